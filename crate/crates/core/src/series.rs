//! Fractional power-series solutions `y_i(t) = sum_mu ybar_{i,mu} t^(mu sigma)`
//! near the origin, used as an independent check on Tau solutions.
//!
//! The coefficients come straight from substituting the series into the
//! system: with `k_ij(t, s) = sum khat_{pq} t^(p sigma) s^(q sigma)`,
//!
//! ```text
//! ybar_{i,mu} = gbar_{i,mu}
//!     + sum_j sum_{p,q} khat_{pq} ybar_{j, mu-p-q-delta_ij}
//!                      B(alpha_ij, (mu - p) sigma - alpha_ij + 1)
//! ```
//!
//! and every index on the right is below `mu` because `delta_ij >= 1`.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::special::beta;

/// Grid size for the maxima entering the radius estimate.
pub const RADIUS_GRID: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub gamma: u32,
    pub m: usize,
    /// `coeffs[i][mu]` multiplies `t^(mu / gamma)` in component `i`.
    pub coeffs: Vec<Vec<f64>>,
    pub radius: Vec<f64>,
}

impl SeriesSolution {
    pub fn sigma(&self) -> f64 {
        1.0 / self.gamma as f64
    }

    /// Safe comparison window `[0, min eps_i / 2]`.
    pub fn window(&self) -> f64 {
        self.radius.iter().copied().fold(1.0, f64::min) / 2.0
    }

    /// Truncated series at `t`, by Horner in `s = t^sigma`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("series evaluated at t = {t}, outside [0, 1]")));
        }
        let s = t.powf(self.sigma());
        Ok(self
            .coeffs
            .iter()
            .map(|c| c.iter().rev().fold(0.0, |acc, &v| acc * s + v))
            .collect())
    }
}

/// Series coefficients for `mu = 0..=m`, plus the radius estimate.
pub fn series_coeffs(problem: &Problem, m: usize) -> Result<SeriesSolution> {
    let n = problem.n();
    let gamma = problem.gamma();
    let sigma = 1.0 / gamma as f64;
    let mut coeffs = problem
        .forcing()
        .iter()
        .map(|g| g.series(m))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<Vec<_>> = problem
        .kernels()
        .iter()
        .map(|row| row.iter().map(|k| k.terms()).collect())
        .collect();
    for mu in 0..=m {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let delta = problem.delta(i, j);
                let alpha = problem.alpha(i, j).value();
                for &(p, q, c) in &terms[i][j] {
                    let Some(nu) = mu.checked_sub(p + q + delta) else {
                        continue;
                    };
                    let y = coeffs[j][nu];
                    if y != 0.0 && c != 0.0 {
                        acc += c * y * beta(alpha, (mu - p) as f64 * sigma - alpha + 1.0);
                    }
                }
            }
            coeffs[i][mu] += acc;
        }
    }
    Ok(SeriesSolution {
        gamma,
        m,
        coeffs,
        radius: radius_estimate(problem),
    })
}

/// `eps_i = min(1, (D1_i / D2_i)^(1/alpha))` with `D1_i = max |G_i|` and
/// `D2_i = (2/alpha) sum_j D1_j max |k_ij|`, maxima over a grid of `[0, 1]`
/// and of the triangle `s <= t`.
pub fn radius_estimate(problem: &Problem) -> Vec<f64> {
    let n = problem.n();
    let grid: Vec<f64> = (0..RADIUS_GRID)
        .map(|k| k as f64 / (RADIUS_GRID - 1) as f64)
        .collect();
    let d1: Vec<f64> = problem
        .forcing()
        .iter()
        .map(|g| grid.iter().fold(0.0f64, |acc, &t| acc.max(g.eval(t).abs())))
        .collect();
    let d1_max = d1.iter().copied().fold(0.0, f64::max);
    if d1_max == 0.0 {
        return vec![1.0; n];
    }
    let alpha = problem
        .alphas()
        .iter()
        .flatten()
        .map(|a| a.value())
        .fold(1.0, f64::min);
    (0..n)
        .map(|i| {
            let d2: f64 = (0..n)
                .map(|j| {
                    let k = problem.kernel(i, j);
                    let kmax = grid.iter().enumerate().fold(0.0f64, |acc, (a, &t)| {
                        grid[..=a].iter().fold(acc, |acc, &s| acc.max(k.eval_abs(t, s)))
                    });
                    d1[j] * kmax
                })
                .sum::<f64>()
                * 2.0
                / alpha;
            // a component with zero forcing is still driven by the others
            let d1_i = if d1[i] > 0.0 { d1[i] } else { d1_max };
            if d2 == 0.0 {
                1.0
            } else {
                (d1_i / d2).powf(1.0 / alpha).min(1.0)
            }
        })
        .collect()
}
