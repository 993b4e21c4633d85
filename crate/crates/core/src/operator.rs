//! The weakly singular integral operator in coefficient space.
//!
//! Row `r` of `Lambda_ij` holds the lattice coefficients of
//! `int_0^t (t - s)^(alpha_ij - 1) k_ij(t, s) s^(r sigma) ds`; it is stored as a
//! band of width `2 N_k + 1` starting at column `r + delta_ij`.

use nalgebra::DMatrix;

use crate::basis::MuntzBasis;
use crate::error::{Error, Result};
use crate::fracpoly::{FracBivar, FracPoly, FracPolyVec};
use crate::problem::Problem;
use crate::quadrature::GaussJacobi;
use crate::special::beta;

/// Threshold below which a band entry counts as zero for the heights.
pub const HEIGHT_THRESHOLD: f64 = 1e-14;

/// `k~_{v,l} = sum_{p+q=v} k^_{p,q} B(delta sigma, (q + l) sigma + 1)`.
pub fn ktilde(kernel: &FracBivar, delta: usize, v: usize, l: usize) -> f64 {
    let nk = kernel.degree_bound();
    if kernel.is_zero() || v > 2 * nk {
        return 0.0;
    }
    let sigma = 1.0 / kernel.gamma() as f64;
    let a = delta as f64 * sigma;
    let p_lo = v.saturating_sub(nk);
    let p_hi = v.min(nk);
    (p_lo..=p_hi)
        .map(|p| {
            let q = v - p;
            let c = kernel.coeff(p, q);
            if c == 0.0 {
                0.0
            } else {
                c * beta(a, (q + l) as f64 * sigma + 1.0)
            }
        })
        .sum()
}

/// Dense truncation of `Lambda` for one kernel (0-based indices):
/// entry `(r, c)` is `k~_{c - delta - r, r}` inside the band, 0 elsewhere.
pub fn lambda_matrix(kernel: &FracBivar, delta: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    let width = 2 * kernel.degree_bound();
    DMatrix::from_fn(rows, cols, |r, c| {
        if kernel.is_zero() || c < r + delta || c - r - delta > width {
            0.0
        } else {
            ktilde(kernel, delta, c - r - delta, r)
        }
    })
}

/// Exact image `int_0^t (t - s)^(delta sigma - 1) k(t, s) y(s) ds`.
pub fn volterra_poly(kernel: &FracBivar, delta: usize, y: &FracPoly) -> FracPoly {
    let gamma = kernel.gamma();
    let mut out = FracPoly::zero(gamma);
    if kernel.is_zero() {
        return out;
    }
    let width = 2 * kernel.degree_bound();
    for (r, &c) in y.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for v in 0..=width {
            let k = ktilde(kernel, delta, v, r);
            if k != 0.0 {
                out.add_to_coeff(r + delta + v, c * k);
            }
        }
    }
    out
}

/// Truncated `Lambda_ij` for all pairs, with heights and offsets.
#[derive(Debug, Clone)]
pub struct LambdaSet {
    gamma: u32,
    n: usize,
    rows: usize,
    width: usize,
    deltas: Vec<Vec<usize>>,
    kernels: Vec<Vec<FracBivar>>,
    /// band[i][j][r][v] = k~^{ij}_{v, r}
    band: Vec<Vec<Vec<Vec<f64>>>>,
    pair_heights: Vec<Vec<usize>>,
    heights: Vec<usize>,
    offsets: Vec<usize>,
}

impl LambdaSet {
    /// Builds `rows` rows of every `Lambda_ij`.
    pub fn new(problem: &Problem, rows: usize) -> Result<Self> {
        let n = problem.n();
        let width = 2 * problem.kernel_degree();
        let mut set = LambdaSet {
            gamma: problem.gamma(),
            n,
            rows: 0,
            width,
            deltas: problem.deltas().to_vec(),
            kernels: problem.kernels().to_vec(),
            band: vec![vec![Vec::new(); n]; n],
            pair_heights: vec![vec![0; n]; n],
            heights: vec![0; n],
            offsets: vec![0; n],
        };
        set.ensure_rows(rows.max(1));
        let (ph, h, d) = heights(&set);
        set.pair_heights = ph;
        set.heights = h;
        set.offsets = d;
        Ok(set)
    }

    /// Rows needed by a Tau solve of degree `n_deg`: `N + max h + 1`.
    pub fn for_degree(problem: &Problem, n_deg: usize) -> Result<Self> {
        let mut set = LambdaSet::new(problem, n_deg + 1)?;
        set.ensure_rows(n_deg + set.max_height() + 1);
        Ok(set)
    }

    /// Extends the truncation to at least `rows` rows; existing rows are kept.
    pub fn ensure_rows(&mut self, rows: usize) {
        if rows <= self.rows {
            return;
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let k = &self.kernels[i][j];
                let delta = self.deltas[i][j];
                let band = &mut self.band[i][j];
                for r in band.len()..rows {
                    let row = if k.is_zero() {
                        Vec::new()
                    } else {
                        (0..=self.width).map(|v| ktilde(k, delta, v, r)).collect()
                    };
                    band.push(row);
                }
            }
        }
        self.rows = rows;
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Columns of the dense view: every band entry of every built row fits.
    pub fn cols(&self) -> usize {
        let max_delta = self.deltas.iter().flatten().copied().max().unwrap_or(0);
        self.rows + self.width + max_delta
    }

    pub fn band_width(&self) -> usize {
        self.width
    }

    pub fn delta(&self, i: usize, j: usize) -> usize {
        self.deltas[i][j]
    }

    pub fn pair_heights(&self) -> &[Vec<usize>] {
        &self.pair_heights
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn max_height(&self) -> usize {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    pub fn require_rows(&self, rows: usize) -> Result<()> {
        if rows > self.rows {
            Err(Error::Capacity {
                what: "Lambda truncation rows",
                requested: rows,
                limit: self.rows,
            })
        } else {
            Ok(())
        }
    }

    /// Nonzero-capable band of row `r` of `Lambda_ij`: `(first column, values)`.
    pub fn row_band(&self, i: usize, j: usize, r: usize) -> (usize, &[f64]) {
        (r + self.deltas[i][j], &self.band[i][j][r])
    }

    /// `Lambda_ij(r, c)`, 0-based.
    pub fn lambda(&self, i: usize, j: usize, r: usize, c: usize) -> f64 {
        assert!(r < self.rows, "row {r} beyond truncation {}", self.rows);
        let (start, vals) = self.row_band(i, j, r);
        if c < start {
            return 0.0;
        }
        vals.get(c - start).copied().unwrap_or(0.0)
    }

    /// `Lambda~_ij(r, c)`: `I - Lambda_ii` on the diagonal blocks, `-Lambda_ij` off it.
    pub fn lambda_tilde(&self, i: usize, j: usize, r: usize, c: usize) -> f64 {
        let id = if i == j && r == c { 1.0 } else { 0.0 };
        id - self.lambda(i, j, r, c)
    }

    /// Dense `rows x cols` view of `Lambda_ij`.
    pub fn matrix(&self, i: usize, j: usize) -> DMatrix<f64> {
        let cols = self.cols();
        DMatrix::from_fn(self.rows, cols, |r, c| self.lambda(i, j, r, c))
    }

    /// `L y = y - int K y` in coefficient space.
    pub fn apply_l(&self, y: &FracPolyVec) -> Result<FracPolyVec> {
        if y.dim() != self.n {
            return Err(Error::Invariant(format!(
                "vector of dimension {} applied to a system of dimension {}",
                y.dim(),
                self.n
            )));
        }
        if let Some(d) = y.degree() {
            self.require_rows(d + 1)?;
        }
        let mut out = y.clone();
        for v in 0..self.n {
            for i in 0..self.n {
                let yi = y.entry(i);
                for (r, &c) in yi.coeffs().iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let (start, vals) = self.row_band(v, i, r);
                    let target = out.entry_mut(v);
                    for (k, &lam) in vals.iter().enumerate() {
                        if lam != 0.0 {
                            target.add_to_coeff(start + k, -c * lam);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `(h_ij, h_i, Delta_j)`: largest nonzero band offset per pair, its row
/// maximum, and the column offsets `min_i (h_i - h_ij)`.
pub fn heights(set: &LambdaSet) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
    let n = set.n;
    let mut ph = vec![vec![0usize; n]; n];
    for (i, row) in ph.iter_mut().enumerate() {
        for (j, h) in row.iter_mut().enumerate() {
            for r in 0..set.rows {
                let (start, vals) = set.row_band(i, j, r);
                if let Some(k) = vals.iter().rposition(|x| x.abs() > HEIGHT_THRESHOLD) {
                    *h = (*h).max(start + k - r);
                }
            }
        }
    }
    let h: Vec<usize> = ph.iter().map(|row| row.iter().copied().max().unwrap_or(0)).collect();
    let offsets = (0..n)
        .map(|j| (0..n).map(|i| h[i] - ph[i][j]).min().unwrap_or(0))
        .collect();
    (ph, h, offsets)
}

/// Tensorized Müntz-Legendre projection of a smooth kernel factor onto
/// `t^(p sigma) s^(q sigma)`, `p, q <= degree`.
pub fn project_kernel(
    f: &dyn Fn(f64, f64) -> f64,
    degree: usize,
    gamma: u32,
    nodes: usize,
) -> Result<FracBivar> {
    let basis = MuntzBasis::new(degree, gamma)?;
    let g = gamma as f64;
    let rule = GaussJacobi::new(nodes, 0.0, g - 1.0)?;
    let vals: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|&x| basis.values_in_s(x, degree))
        .collect();
    let m = degree + 1;
    let mut u = vec![vec![0.0; m]; m];
    for (a, (&x, &wx)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        for (b, (&y, &wy)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let fv = f(x.powi(gamma as i32), y.powi(gamma as i32));
            if !fv.is_finite() {
                return Err(Error::Numeric("kernel is not finite on [0,1]^2".into()));
            }
            let w = g * g * wx * wy * fv;
            for k in 0..m {
                for l in 0..m {
                    u[k][l] += w * vals[a][k] * vals[b][l];
                }
            }
        }
    }
    let mut terms = Vec::new();
    for p in 0..m {
        for q in 0..m {
            let mut c = 0.0;
            for (k, uk) in u.iter().enumerate() {
                let ak = basis.poly(k).coeff(p);
                if ak == 0.0 {
                    continue;
                }
                for (l, &ukl) in uk.iter().enumerate() {
                    c += ukl / (basis.norm(k) * basis.norm(l)) * ak * basis.poly(l).coeff(q);
                }
            }
            terms.push((p, q, c));
        }
    }
    Ok(FracBivar::from_terms(gamma, &terms))
}
