//! Polynomials in fractional powers `t^(l sigma)` with `sigma = 1/gamma`.
//!
//! Every quantity in the solver (forcing expansions, canonical polynomials,
//! residuals, Tau solutions) is a dense coefficient list on this lattice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance used by [`FracPoly::approx_eq`].
pub const DEFAULT_COEFF_TOL: f64 = 1e-12;

/// `sum_l coeffs[l] * t^(l / gamma)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FracPoly {
    gamma: u32,
    coeffs: Vec<f64>,
}

impl FracPoly {
    pub fn zero(gamma: u32) -> Self {
        assert!(gamma >= 1, "gamma must be a positive integer");
        FracPoly {
            gamma,
            coeffs: Vec::new(),
        }
    }

    pub fn from_coeffs(gamma: u32, coeffs: Vec<f64>) -> Self {
        assert!(gamma >= 1, "gamma must be a positive integer");
        FracPoly { gamma, coeffs }
    }

    /// `c * t^(k sigma)`
    pub fn monomial(gamma: u32, k: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        FracPoly::from_coeffs(gamma, coeffs)
    }

    pub fn from_map(gamma: u32, map: &BTreeMap<usize, f64>) -> Self {
        let len = map.keys().next_back().map_or(0, |&k| k + 1);
        let mut coeffs = vec![0.0; len];
        for (&k, &c) in map {
            coeffs[k] = c;
        }
        FracPoly::from_coeffs(gamma, coeffs)
    }

    /// Nonzero coefficients keyed by lattice index.
    pub fn to_map(&self) -> BTreeMap<usize, f64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| (k, c))
            .collect()
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        1.0 / self.gamma as f64
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Vec<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `t^(k sigma)`; zero past the stored length.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Highest index with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn trimmed(mut self) -> Self {
        let len = self.degree().map_or(0, |d| d + 1);
        self.coeffs.truncate(len);
        self
    }

    /// Evaluates in the lattice variable `s = t^sigma`.
    pub fn eval_in_s(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!(
                "fractional polynomial evaluated at t = {t}"
            )));
        }
        Ok(self.eval_in_s(lattice_var(t, self.gamma)))
    }

    /// `a * p + q`
    pub fn axpy(a: f64, p: &FracPoly, q: &FracPoly) -> Result<FracPoly> {
        check_gamma(p.gamma, q.gamma)?;
        let mut out = q.clone();
        out.add_scaled(a, p);
        Ok(out)
    }

    /// `self += a * other`; the caller guarantees matching lattices.
    pub(crate) fn add_scaled(&mut self, a: f64, other: &FracPoly) {
        debug_assert_eq!(self.gamma, other.gamma);
        if a == 0.0 {
            return;
        }
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (dst, &src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *dst += a * src;
        }
    }

    pub(crate) fn add_to_coeff(&mut self, k: usize, c: f64) {
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, 0.0);
        }
        self.coeffs[k] += c;
    }

    pub fn scaled(&self, a: f64) -> FracPoly {
        FracPoly::from_coeffs(self.gamma, self.coeffs.iter().map(|c| a * c).collect())
    }

    /// Multiplication by `t^(k sigma)`.
    pub fn shift(&self, k: usize) -> FracPoly {
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        FracPoly::from_coeffs(self.gamma, coeffs)
    }

    /// Coefficientwise comparison with absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &FracPoly, tol: f64) -> bool {
        if self.gamma != other.gamma {
            return false;
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).all(|k| (self.coeff(k) - other.coeff(k)).abs() <= tol)
    }

    /// Largest coefficientwise difference.
    pub fn max_abs_diff(&self, other: &FracPoly) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).fold(0.0, |m, k| m.max((self.coeff(k) - other.coeff(k)).abs()))
    }
}

impl PartialEq for FracPoly {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, DEFAULT_COEFF_TOL)
    }
}

pub(crate) fn check_gamma(left: u32, right: u32) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::IncompatibleExponent { left, right })
    }
}

/// `t^(1/gamma)`, with the common roots taken exactly.
pub fn lattice_var(t: f64, gamma: u32) -> f64 {
    match gamma {
        1 => t,
        2 => t.sqrt(),
        4 => t.sqrt().sqrt(),
        g => t.powf(1.0 / g as f64),
    }
}

/// A column vector of fractional polynomials sharing one lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracPolyVec {
    gamma: u32,
    entries: Vec<FracPoly>,
}

impl FracPolyVec {
    pub fn zeros(n: usize, gamma: u32) -> Self {
        FracPolyVec {
            gamma,
            entries: vec![FracPoly::zero(gamma); n],
        }
    }

    pub fn from_entries(entries: Vec<FracPoly>) -> Result<Self> {
        let gamma = entries
            .first()
            .map(FracPoly::gamma)
            .ok_or_else(|| Error::InvalidProblem("empty polynomial vector".into()))?;
        for e in &entries {
            check_gamma(gamma, e.gamma())?;
        }
        Ok(FracPolyVec { gamma, entries })
    }

    /// `c * t^(k sigma) e_i`
    pub fn unit(n: usize, gamma: u32, i: usize, k: usize, c: f64) -> Self {
        let mut v = FracPolyVec::zeros(n, gamma);
        v.entries[i] = FracPoly::monomial(gamma, k, c);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn entries(&self) -> &[FracPoly] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &FracPoly {
        &self.entries[i]
    }

    pub fn entry_mut(&mut self, i: usize) -> &mut FracPoly {
        &mut self.entries[i]
    }

    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(FracPoly::degree).max()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(FracPoly::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max_abs()))
    }

    pub(crate) fn add_scaled(&mut self, a: f64, other: &FracPolyVec) {
        debug_assert_eq!(self.dim(), other.dim());
        for (dst, src) in self.entries.iter_mut().zip(&other.entries) {
            dst.add_scaled(a, src);
        }
    }

    /// `a * x + y`
    pub fn axpy(a: f64, x: &FracPolyVec, y: &FracPolyVec) -> Result<FracPolyVec> {
        check_gamma(x.gamma, y.gamma)?;
        if x.dim() != y.dim() {
            return Err(Error::InvalidProblem(format!(
                "vector length mismatch: {} vs {}",
                x.dim(),
                y.dim()
            )));
        }
        let mut out = y.clone();
        out.add_scaled(a, x);
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> FracPolyVec {
        FracPolyVec {
            gamma: self.gamma,
            entries: self.entries.iter().map(|e| e.scaled(a)).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.entries.iter().map(|e| e.eval(t)).collect()
    }

    pub fn max_abs_diff(&self, other: &FracPolyVec) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn approx_eq(&self, other: &FracPolyVec, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn trimmed(self) -> Self {
        FracPolyVec {
            gamma: self.gamma,
            entries: self.entries.into_iter().map(FracPoly::trimmed).collect(),
        }
    }
}

/// `sum_{p,q} coeffs[p][q] t^(p sigma) s^(q sigma)`, a kernel factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracBivar {
    gamma: u32,
    coeffs: Vec<Vec<f64>>,
}

impl FracBivar {
    pub fn zero(gamma: u32) -> Self {
        FracBivar {
            gamma,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(gamma: u32, c: f64) -> Self {
        FracBivar {
            gamma,
            coeffs: vec![vec![c]],
        }
    }

    /// Builds a square grid from `(p, q, coefficient)` triples; repeated
    /// indices accumulate.
    pub fn from_terms(gamma: u32, terms: &[(usize, usize, f64)]) -> Self {
        let size = terms
            .iter()
            .map(|&(p, q, _)| p.max(q) + 1)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![vec![0.0; size]; size];
        for &(p, q, c) in terms {
            coeffs[p][q] += c;
        }
        FracBivar { gamma, coeffs }
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Coefficient of `t^(p sigma) s^(q sigma)`.
    pub fn coeff(&self, p: usize, q: usize) -> f64 {
        self.coeffs
            .get(p)
            .and_then(|row| row.get(q))
            .copied()
            .unwrap_or(0.0)
    }

    /// `N_k`: the largest `p` or `q` index stored.
    pub fn degree_bound(&self) -> usize {
        self.coeffs
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(self.coeffs.len()))
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|&c| c == 0.0)
    }

    /// Nonzero `(p, q, coefficient)` triples.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (p, row) in self.coeffs.iter().enumerate() {
            for (q, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    out.push((p, q, c));
                }
            }
        }
        out
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let x = lattice_var(t, self.gamma);
        let y = lattice_var(s, self.gamma);
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c)
        })
    }

    /// Majorant kernel value: absolute coefficients at `(t, s)`.
    pub fn eval_abs(&self, t: f64, s: f64) -> f64 {
        let x = lattice_var(t, self.gamma);
        let y = lattice_var(s, self.gamma);
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |a, &c| a * y + c.abs())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        let p = FracPoly::from_coeffs(4, vec![1.0, 1.0]);
        assert_eq!(p.eval(1.0).unwrap(), 2.0);
        let q = FracPoly::monomial(4, 5, 1.0);
        assert!((q.eval(0.5).unwrap() - 0.5f64.powf(1.25)).abs() < 1e-15);
        assert!((q.eval(0.5).unwrap() - 0.420_448_207_626_856_9).abs() < 1e-15);
        let z = FracPoly::zero(3);
        assert_eq!(z.eval(0.7).unwrap(), 0.0);
        assert_eq!(p.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_negative_time() {
        let p = FracPoly::monomial(2, 1, 1.0);
        assert!(matches!(p.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn axpy_examples() {
        let g = 4;
        let p = FracPoly::monomial(g, 1, 1.0);
        let q = FracPoly::monomial(g, 1, -1.0);
        assert!(FracPoly::axpy(1.0, &p, &q).unwrap().is_zero());

        let one = FracPoly::monomial(g, 0, 1.0);
        let r = FracPoly::axpy(2.0, &one, &one).unwrap();
        assert_eq!(r.to_map(), BTreeMap::from([(0, 3.0)]));

        let r = FracPoly::axpy(0.5, &FracPoly::monomial(g, 2, 1.0), &FracPoly::monomial(g, 1, 1.0))
            .unwrap();
        assert_eq!(r.to_map(), BTreeMap::from([(1, 1.0), (2, 0.5)]));
    }

    #[test]
    fn axpy_rejects_mismatched_lattices() {
        let p = FracPoly::monomial(4, 1, 1.0);
        let q = FracPoly::monomial(2, 1, 1.0);
        assert_eq!(
            FracPoly::axpy(1.0, &p, &q).unwrap_err(),
            Error::IncompatibleExponent { left: 4, right: 2 }
        );
    }

    #[test]
    fn shift_examples() {
        let one = FracPoly::monomial(4, 0, 1.0);
        assert_eq!(one.shift(3).to_map(), BTreeMap::from([(3, 1.0)]));
        let p = FracPoly::monomial(4, 1, 1.0);
        assert_eq!(p.shift(0).to_map(), p.to_map());
        let q = FracPoly::from_coeffs(4, vec![1.0, 1.0]);
        assert_eq!(q.shift(2).to_map(), BTreeMap::from([(2, 1.0), (3, 1.0)]));
    }

    #[test]
    fn equality_ignores_trailing_zeros() {
        let a = FracPoly::from_coeffs(2, vec![1.0, 0.0, 0.0]);
        let b = FracPoly::from_coeffs(2, vec![1.0]);
        assert_eq!(a, b);
        assert_ne!(a, FracPoly::from_coeffs(3, vec![1.0]));
    }

    #[test]
    fn bivar_eval_and_degree() {
        let k = FracBivar::from_terms(2, &[(0, 0, 1.0), (1, 2, -2.0)]);
        assert_eq!(k.degree_bound(), 2);
        let (t, s) = (0.49f64, 0.16f64);
        assert!((k.eval(t, s) - (1.0 - 2.0 * 0.7 * 0.16)).abs() < 1e-15);
        assert!((k.eval_abs(t, s) - (1.0 + 2.0 * 0.7 * 0.16)).abs() < 1e-15);
        assert!(FracBivar::zero(2).is_zero());
    }

    fn small_int_coeffs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-64i32..64).prop_map(f64::from), 0..12)
    }

    proptest! {
        #[test]
        fn axpy_additive_part_is_commutative_and_associative(
            a in small_int_coeffs(), b in small_int_coeffs(), c in small_int_coeffs()
        ) {
            let (a, b, c) = (
                FracPoly::from_coeffs(3, a),
                FracPoly::from_coeffs(3, b),
                FracPoly::from_coeffs(3, c),
            );
            let ab = FracPoly::axpy(1.0, &a, &b).unwrap();
            let ba = FracPoly::axpy(1.0, &b, &a).unwrap();
            prop_assert!(ab.approx_eq(&ba, 0.0));
            let left = FracPoly::axpy(1.0, &ab, &c).unwrap();
            let bc = FracPoly::axpy(1.0, &b, &c).unwrap();
            let right = FracPoly::axpy(1.0, &a, &bc).unwrap();
            prop_assert!(left.approx_eq(&right, 0.0));
        }

        #[test]
        fn shift_multiplies_by_lattice_power(
            coeffs in prop::collection::vec(-10.0f64..10.0, 1..10),
            k in 0usize..8,
            gamma in 1u32..7,
            t in 0.001f64..=1.0,
        ) {
            let p = FracPoly::from_coeffs(gamma, coeffs);
            let lhs = p.shift(k).eval(t).unwrap();
            let rhs = t.powf(k as f64 / gamma as f64) * p.eval(t).unwrap();
            let scale = p.coeffs().iter().map(|c| c.abs()).sum::<f64>() + 1e-300;
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale.max(rhs.abs()));
        }

        #[test]
        fn map_round_trip(entries in prop::collection::btree_map(0usize..20, -5.0f64..5.0, 0..8)) {
            let entries: BTreeMap<usize, f64> =
                entries.into_iter().filter(|(_, c)| *c != 0.0).collect();
            let p = FracPoly::from_map(5, &entries);
            prop_assert_eq!(p.to_map(), entries);
        }
    }
}
