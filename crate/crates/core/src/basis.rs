//! Shifted Jacobi and Müntz-Legendre polynomials on `[0, 1]`, and the
//! orthogonal projection onto `span{1, t^sigma, ..., t^(N sigma)}`.

use crate::error::{Error, Result};
use crate::fracpoly::FracPoly;
use crate::quadrature::GaussJacobi;
use crate::special::ln_gamma_signed;

/// Largest polynomial index accepted by the explicit Jacobi formula.
pub const DEFAULT_DEGREE_CAP: usize = 200;

/// Parameters of the shifted Jacobi weight `s^xi (1 - s)^theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub theta: f64,
    pub xi: f64,
}

impl JacobiParams {
    pub fn new(theta: f64, xi: f64) -> Result<Self> {
        if theta > -1.0 && xi > -1.0 {
            Ok(JacobiParams { theta, xi })
        } else {
            Err(Error::Domain(format!(
                "Jacobi parameters must exceed -1, got theta = {theta}, xi = {xi}"
            )))
        }
    }

    /// Müntz-Legendre parameters `(0, gamma - 1)`.
    pub fn muntz(gamma: u32) -> Self {
        JacobiParams {
            theta: 0.0,
            xi: gamma as f64 - 1.0,
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma_signed(k as f64 + 1.0).0
}

/// Monomial coefficients `Z_j`, `j = 0..=n`, of the shifted Jacobi
/// polynomial `J_n^{theta, xi}(s)` on `[0, 1]`.
pub fn jacobi_coeffs(n: usize, params: JacobiParams) -> Result<Vec<f64>> {
    if n > DEFAULT_DEGREE_CAP {
        return Err(Error::Capacity {
            what: "Jacobi polynomial degree",
            requested: n,
            limit: DEFAULT_DEGREE_CAP,
        });
    }
    if n == 0 {
        return Ok(vec![1.0]);
    }
    let JacobiParams { theta, xi } = params;
    let nf = n as f64;
    let (l_a, s_a) = ln_gamma_signed(nf + xi + 1.0);
    let (l_c, s_c) = ln_gamma_signed(nf + theta + xi + 1.0);
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let jf = j as f64;
        let (l_b, s_b) = ln_gamma_signed(nf + theta + xi + jf + 1.0);
        let (l_d, s_d) = ln_gamma_signed(xi + jf + 1.0);
        let ln_mag = l_a + l_b - l_d - ln_factorial(j) - l_c - ln_factorial(n - j);
        let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
        let gamma_sign = (s_a * s_b * s_c * s_d) as f64;
        out.push(sign * gamma_sign * ln_mag.exp());
    }
    Ok(out)
}

/// `h_n = ||J_n^{theta, xi}||^2` in the shifted Jacobi weight.
pub fn jacobi_norm(n: usize, params: JacobiParams) -> f64 {
    let JacobiParams { theta, xi } = params;
    let nf = n as f64;
    let (l1, s1) = ln_gamma_signed(nf + theta + 1.0);
    let (l2, s2) = ln_gamma_signed(nf + xi + 1.0);
    let (l3, s3) = ln_gamma_signed(nf + theta + xi + 1.0);
    let denom = 2.0 * nf + theta + xi + 1.0;
    if n == 0 {
        // Γ(θ+ξ+1)/(θ+ξ+1) = Γ(θ+ξ+2)/(θ+ξ+1)^2 avoids the pole at θ+ξ+1 = 0
        let (l4, _) = ln_gamma_signed(theta + xi + 2.0);
        return (l1 + l2 - l4).exp();
    }
    (s1 * s2 * s3) as f64 * (l1 + l2 - l3 - ln_factorial(n)).exp() / denom
}

/// `||L_{i,sigma}||^2 = (1/sigma) h_i^{0, 1/sigma - 1}`.
pub fn muntz_norm(i: usize, gamma: u32) -> f64 {
    gamma as f64 * jacobi_norm(i, JacobiParams::muntz(gamma))
}

/// `(t^(m sigma), L_{n,sigma})` in `L^2(0, 1)`, in closed product form.
///
/// Vanishes for `m < n`; otherwise
/// `gamma * m! / (m - n)! * Γ(m + gamma) / Γ(m + gamma + n + 1)`.
pub fn monomial_moment(m: usize, n: usize, gamma: u32) -> f64 {
    if m < n {
        return 0.0;
    }
    let lambda = m as f64 + gamma as f64;
    let ln = (gamma as f64).ln() + ln_factorial(m) - ln_factorial(m - n)
        + ln_gamma_signed(lambda).0
        - ln_gamma_signed(lambda + n as f64 + 1.0).0;
    ln.exp()
}

/// Müntz-Legendre polynomials `L_{i,sigma}(t) = J_i^{0, 1/sigma - 1}(t^sigma)`
/// for `i = 0..=max_index`, generated by the three-term recurrence.
#[derive(Debug, Clone)]
pub struct MuntzBasis {
    gamma: u32,
    polys: Vec<FracPoly>,
    norms: Vec<f64>,
}

/// Recurrence coefficients `(d1, d2 slope, d2 offset, d3)` at index `i`,
/// written for the Jacobi variable `x = 2 t^sigma - 1`.
fn recurrence_coeffs(i: usize, gamma: u32) -> (f64, f64, f64, f64) {
    let i = i as f64;
    let g = gamma as f64;
    let d1 = 2.0 * (i + 1.0) * (i + g) * (2.0 * i + g - 1.0);
    let d2_slope = (2.0 * i + g) * (2.0 * i + g - 1.0) * (2.0 * i + g + 1.0);
    let d2_offset = -(2.0 * i + g) * (g - 1.0) * (g - 1.0);
    let d3 = 2.0 * i * (i + g - 1.0) * (2.0 * i + g + 1.0);
    (d1, d2_slope, d2_offset, d3)
}

impl MuntzBasis {
    pub fn new(max_index: usize, gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Domain("gamma must be a positive integer".into()));
        }
        if max_index > DEFAULT_DEGREE_CAP {
            return Err(Error::Capacity {
                what: "Müntz-Legendre index",
                requested: max_index,
                limit: DEFAULT_DEGREE_CAP,
            });
        }
        let sigma = 1.0 / gamma as f64;
        let mut polys = Vec::with_capacity(max_index + 1);
        polys.push(FracPoly::monomial(gamma, 0, 1.0));
        if max_index >= 1 {
            polys.push(FracPoly::from_coeffs(
                gamma,
                vec![-1.0 / sigma, (1.0 + sigma) / sigma],
            ));
        }
        for i in 1..max_index {
            let (d1, slope, offset, d3) = recurrence_coeffs(i, gamma);
            let cur = &polys[i];
            let prev = &polys[i - 1];
            // d2(x) L_i with x = 2 s - 1
            let mut next = cur.shift(1).scaled(2.0 * slope);
            next.add_scaled(offset - slope, cur);
            next.add_scaled(-d3, prev);
            polys.push(next.scaled(1.0 / d1));
        }
        let norms = (0..=max_index).map(|i| muntz_norm(i, gamma)).collect();
        Ok(MuntzBasis {
            gamma,
            polys,
            norms,
        })
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        1.0 / self.gamma as f64
    }

    pub fn max_index(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[FracPoly] {
        &self.polys
    }

    pub fn poly(&self, i: usize) -> &FracPoly {
        &self.polys[i]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    fn require(&self, index: usize) -> Result<()> {
        if index > self.max_index() {
            Err(Error::Capacity {
                what: "Müntz-Legendre basis",
                requested: index,
                limit: self.max_index(),
            })
        } else {
            Ok(())
        }
    }

    /// Coefficients `c_{j,l}` of the orthonormal polynomial `p_j`.
    pub fn orthonormal(&self, j: usize) -> Result<FracPoly> {
        self.require(j)?;
        Ok(self.polys[j].scaled(1.0 / self.norms[j].sqrt()))
    }

    /// Values `L_0(t), ..., L_k(t)` at `t = s^gamma`, from the recurrence
    /// on values rather than on coefficients.
    pub fn values_in_s(&self, s: f64, k: usize) -> Vec<f64> {
        let gamma = self.gamma;
        let sigma = 1.0 / gamma as f64;
        let mut out = Vec::with_capacity(k + 1);
        out.push(1.0);
        if k >= 1 {
            out.push((s * (1.0 + sigma) - 1.0) / sigma);
        }
        let x = 2.0 * s - 1.0;
        for i in 1..k {
            let (d1, slope, offset, d3) = recurrence_coeffs(i, gamma);
            let next = ((slope * x + offset) * out[i] - d3 * out[i - 1]) / d1;
            out.push(next);
        }
        out
    }

    /// Orthogonal projection of a lattice polynomial onto indices `0..=n`.
    ///
    /// Terms with index `<= n` are already in the space and pass through;
    /// a term `t^(m sigma)` with `m > n` becomes
    /// `t^(m sigma) - sum_{k=n+1}^{m} u_k L_k` where `u_k` uses the closed
    /// form of [`monomial_moment`].
    pub fn project_poly(&self, f: &FracPoly, n: usize) -> Result<FracPoly> {
        crate::fracpoly::check_gamma(self.gamma, f.gamma())?;
        let Some(deg) = f.degree() else {
            return Ok(FracPoly::zero(self.gamma));
        };
        if deg <= n {
            return Ok(f.clone().trimmed());
        }
        self.require(deg)?;
        let mut out = FracPoly::from_coeffs(self.gamma, f.coeffs()[..=n].to_vec());
        for m in (n + 1)..=deg {
            let c = f.coeff(m);
            if c == 0.0 {
                continue;
            }
            let mut tail = FracPoly::monomial(self.gamma, m, 1.0);
            for k in (n + 1)..=m {
                let u = monomial_moment(m, k, self.gamma) / self.norms[k];
                tail.add_scaled(-u, &self.polys[k]);
            }
            // the tail's coefficients above n cancel to rounding; drop them
            tail.coeffs_mut().truncate(n + 1);
            out.add_scaled(c, &tail);
        }
        Ok(out.trimmed())
    }

    /// Projection coefficients `u_k = (f, L_k) / ||L_k||^2`, `k = 0..=n`,
    /// by Gauss-Jacobi quadrature in `s = t^sigma` with `nodes` points.
    pub fn projection_coefficients(
        &self,
        f: &dyn Fn(f64) -> f64,
        n: usize,
        nodes: usize,
    ) -> Result<Vec<f64>> {
        self.require(n)?;
        let g = self.gamma as f64;
        let rule = GaussJacobi::new(nodes, 0.0, g - 1.0)?;
        let mut acc = vec![0.0; n + 1];
        for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
            let t = s.powi(self.gamma as i32);
            let fv = f(t);
            if !fv.is_finite() {
                return Err(Error::Numeric(format!(
                    "integrand is not finite at t = {t} ({fv})"
                )));
            }
            let vals = self.values_in_s(s, n);
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += w * fv * v;
            }
        }
        Ok(acc
            .into_iter()
            .enumerate()
            .map(|(k, a)| g * a / self.norms[k])
            .collect())
    }

    /// Orthogonal projection of a sampled function onto indices `0..=n`.
    ///
    /// The quadrature is repeated with 50% more nodes; a disagreement above
    /// `1e-9` (relative to the largest coefficient) is reported as a
    /// convergence failure.
    pub fn project_fn(&self, f: &dyn Fn(f64) -> f64, n: usize, nodes: usize) -> Result<FracPoly> {
        let coarse = self.projection_coefficients(f, n, nodes)?;
        let fine = self.projection_coefficients(f, n, nodes + nodes / 2 + 1)?;
        let scale = fine.iter().fold(1e-300f64, |m, c| m.max(c.abs()));
        let diff = coarse
            .iter()
            .zip(&fine)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff > 1e-9 * scale.max(1.0) {
            return Err(Error::Numeric(format!(
                "projection quadrature did not converge with {nodes} nodes: \
                 coefficient change {diff:.3e} (scale {scale:.3e})"
            )));
        }
        Ok(self.combine(&fine))
    }

    /// `sum_k u_k L_k` as a lattice polynomial.
    pub fn combine(&self, u: &[f64]) -> FracPoly {
        let mut out = FracPoly::zero(self.gamma);
        for (k, &c) in u.iter().enumerate() {
            out.add_scaled(c, &self.polys[k]);
        }
        out
    }
}

/// Builds the Müntz-Legendre basis `L_0..L_N` for `sigma = 1/gamma`.
pub fn muntz_legendre(n: usize, gamma: u32) -> Result<MuntzBasis> {
    MuntzBasis::new(n, gamma)
}

/// Orthonormal coefficients `c_{j, l}`.
pub fn orthonormal_coeffs(j: usize, basis: &MuntzBasis) -> Result<Vec<f64>> {
    Ok(basis.orthonormal(j)?.into_coeffs())
}

/// Quadrature nodes beyond the projection degree used for sampled functions.
pub const PROJECTION_EXTRA_NODES: usize = 16;

/// Something that can be projected: either an exact lattice polynomial or a
/// sampled function on `[0, 1]`.
pub enum Projectable<'a> {
    Poly(&'a FracPoly),
    Sampled(&'a dyn Fn(f64) -> f64),
}

/// `Pi_{N,sigma} f`.
pub fn project(f: Projectable<'_>, n: usize, gamma: u32) -> Result<FracPoly> {
    match f {
        Projectable::Poly(p) => {
            let basis = MuntzBasis::new(p.degree().unwrap_or(0).max(n), gamma)?;
            basis.project_poly(p, n)
        }
        Projectable::Sampled(func) => {
            let basis = MuntzBasis::new(n, gamma)?;
            basis.project_fn(func, n, n + PROJECTION_EXTRA_NODES)
        }
    }
}
