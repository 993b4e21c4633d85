//! Gauss-Jacobi rules on `[0, 1]` for the weight `(1 - w)^a w^b`.
//!
//! Nodes come from the symmetric Jacobi matrix (Golub-Welsch), are polished
//! with Newton steps on the orthonormal recurrence, and the weights are
//! recomputed from the Christoffel function so that small weights keep their
//! relative accuracy.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::ln_gamma_signed;

#[derive(Debug, Clone)]
pub struct GaussJacobi {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Recurrence data of the monic Jacobi polynomials on `[-1, 1]` for weight
/// `(1 - x)^a (1 + x)^b`: diagonal `alpha_k` and squared off-diagonal `beta_k`.
fn recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let alpha_k = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        alpha.push(alpha_k);
        // beta[k] couples p_{k} and p_{k+1} (k + 1 = index of the higher one)
        let j = kf + 1.0;
        let beta_k = if k == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * j * (j + a) * (j + b) * (j + ab)
                / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
        };
        beta.push(beta_k);
    }
    (alpha, beta)
}

impl GaussJacobi {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Numeric("quadrature rule needs at least one node".into()));
        }
        if a <= -1.0 || b <= -1.0 {
            return Err(Error::Domain(format!(
                "Jacobi weight exponents must exceed -1, got ({a}, {b})"
            )));
        }
        let (alpha, beta) = recurrence(n, a, b);
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jac[(k, k)] = alpha[k];
            if k + 1 < n {
                let off = beta[k].sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jac);
        let mut xs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());

        // mu0 = int_{-1}^{1} (1-x)^a (1+x)^b dx
        let (la, _) = ln_gamma_signed(a + 1.0);
        let (lb, _) = ln_gamma_signed(b + 1.0);
        let (lab, _) = ln_gamma_signed(a + b + 2.0);
        let ln_mu0 = (a + b + 1.0) * std::f64::consts::LN_2 + la + lb - lab;

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for x0 in xs {
            let mut x = x0;
            for _ in 0..3 {
                let (p, dp, _) = orthonormal_eval(x, n, &alpha, &beta);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, _, sum_sq) = orthonormal_eval(x, n, &alpha, &beta);
            // Christoffel: w = mu0 / sum_{k<n} q_k(x)^2 with q_0 = 1
            let w_sym = 1.0 / sum_sq;
            let w01 = (ln_mu0 - (a + b + 1.0) * std::f64::consts::LN_2).exp() * w_sym;
            nodes.push(0.5 * (x + 1.0));
            weights.push(w01);
        }
        Ok(GaussJacobi {
            a,
            b,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Nodes in `(0, 1)`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_0^1 (1 - w)^a w^b f(w) dw`
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates the normalized recurrence `q_k` (with `q_0 = 1`) at `x`;
/// returns `(q_n, q_n', sum_{k<n} q_k^2)`.
fn orthonormal_eval(x: f64, n: usize, alpha: &[f64], beta: &[f64]) -> (f64, f64, f64) {
    let mut q_prev = 0.0;
    let mut q = 1.0;
    let mut d_prev = 0.0;
    let mut d = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += q * q;
        let sb = beta[k].sqrt();
        let sb_prev = if k == 0 { 0.0 } else { beta[k - 1].sqrt() };
        let q_next = ((x - alpha[k]) * q - sb_prev * q_prev) / sb;
        let d_next = (q + (x - alpha[k]) * d - sb_prev * d_prev) / sb;
        q_prev = q;
        q = q_next;
        d_prev = d;
        d = d_next;
    }
    (q, d, sum_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;

    #[test]
    fn integrates_weighted_monomials_exactly() {
        for &(a, b) in &[(0.0, 0.0), (0.0, 3.0), (-0.75, 0.0), (-0.5, -0.5), (-0.2, 4.0)] {
            let rule = GaussJacobi::new(12, a, b).unwrap();
            for m in 0..24 {
                let exact = beta(a + 1.0, b + m as f64 + 1.0);
                let got = rule.integrate(|w| w.powi(m));
                assert!(
                    (got - exact).abs() <= 1e-14 * exact.max(1.0),
                    "(a,b)=({a},{b}) m={m}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn nodes_are_inside_unit_interval() {
        let rule = GaussJacobi::new(80, -0.75, 3.0).unwrap();
        assert!(rule.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn singular_endpoint_integral() {
        // int_0^1 (1-w)^{-3/4} cos(w) dw against a fine rule
        let coarse = GaussJacobi::new(20, -0.75, 0.0).unwrap();
        let fine = GaussJacobi::new(60, -0.75, 0.0).unwrap();
        let c = coarse.integrate(f64::cos);
        let f = fine.integrate(f64::cos);
        assert!((c - f).abs() < 1e-14 * f.abs(), "{c} vs {f}");
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(GaussJacobi::new(4, -1.0, 0.0).is_err());
        assert!(GaussJacobi::new(0, 0.0, 0.0).is_err());
    }
}
