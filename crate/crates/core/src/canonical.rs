//! Fractional vector canonical polynomials `Q_i^j` with residuals `R_i^j`,
//! `L Q_i^j = t^(j sigma) e_i + R_i^j`, generated rank by rank.
//!
//! Rank `r` produces `Q_j^(h_j + r)` for every component `j` at once from
//! the images `L(t^((r + Delta_i) sigma) e_i)`, after cancelling their lower
//! terms with already known canonical polynomials and mixing the leading
//! terms through `D = P_r^-1`.
//!
//! Coefficients are kept in double-double precision; see [`crate::dd`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::error::{Error, Result};
use crate::fracpoly::{FracPoly, FracPolyVec};
use crate::operator::LambdaSet;

/// Relative pivot size below which `P_r` is treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Coefficients per component.
type DdVec = Vec<Vec<Dd>>;

fn dd_unit(n: usize, i: usize, k: usize, c: f64) -> DdVec {
    let mut v = vec![Vec::new(); n];
    v[i] = vec![Dd::ZERO; k + 1];
    v[i][k] = Dd::from(c);
    v
}

fn dd_axpy(acc: &mut DdVec, a: Dd, x: &DdVec) {
    for (dst, src) in acc.iter_mut().zip(x) {
        if dst.len() < src.len() {
            dst.resize(src.len(), Dd::ZERO);
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            if !s.is_zero() {
                *d += a * s;
            }
        }
    }
}

fn dd_trim(v: &mut DdVec) {
    for p in v.iter_mut() {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
    }
}

fn dd_round(v: &DdVec, gamma: u32) -> FracPolyVec {
    FracPolyVec::from_entries(
        v.iter()
            .map(|p| FracPoly::from_coeffs(gamma, p.iter().map(|c| c.to_f64()).collect()))
            .collect(),
    )
    .expect("components share gamma")
    .trimmed()
}

/// Which family a combination draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Q,
    R,
}

#[derive(Debug, Clone)]
pub struct CanonicalTable {
    gamma: u32,
    n: usize,
    heights: Vec<usize>,
    offsets: Vec<usize>,
    q: Vec<Vec<DdVec>>,
    r: Vec<Vec<DdVec>>,
    ranks: usize,
    verify: bool,
}

/// `P_r[v][i] = Lambda~_{v,i}(r + Delta_i, r + h_v)` and `D = P_r^-1`.
pub fn p_r_matrix(r: usize, set: &LambdaSet) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (p, inv) = p_r_dd(r, set)?;
    let n = p.nrows();
    Ok((p, DMatrix::from_fn(n, n, |a, b| inv[a][b].to_f64())))
}

fn p_r_dd(r: usize, set: &LambdaSet) -> Result<(DMatrix<f64>, Vec<Vec<Dd>>)> {
    let n = set.n();
    let h = set.heights();
    let d = set.offsets();
    let max_off = d.iter().copied().max().unwrap_or(0);
    set.require_rows(r + max_off + 1)?;
    let p = DMatrix::from_fn(n, n, |v, i| set.lambda_tilde(v, i, r + d[i], r + h[v]));
    if invert_checked(&p).is_none() {
        return Err(Error::SingularStep { rank: r });
    }
    let rows: Vec<Vec<Dd>> = (0..n)
        .map(|v| (0..n).map(|i| Dd::from(p[(v, i)])).collect())
        .collect();
    let inv = dd::invert(&rows).ok_or(Error::SingularStep { rank: r })?;
    Ok((p, inv))
}

/// Inverse by fully pivoted LU, or `None` when a pivot falls below
/// `SINGULAR_PIVOT` times the largest entry.
pub(crate) fn invert_checked(p: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = p.amax();
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let lu = p.clone().full_piv_lu();
    let u = lu.u();
    let min_pivot = (0..p.nrows()).map(|k| u[(k, k)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot < SINGULAR_PIVOT * scale {
        return None;
    }
    lu.try_inverse()
}

impl CanonicalTable {
    /// Initial members: for `j < h_i`, `Q_i^j = 0` and `R_i^j = -t^(j sigma) e_i`.
    pub fn init(set: &LambdaSet) -> Self {
        let n = set.n();
        let heights = set.heights().to_vec();
        let mut q = Vec::with_capacity(n);
        let mut r = Vec::with_capacity(n);
        for (i, &h) in heights.iter().enumerate() {
            q.push(vec![vec![Vec::new(); n]; h]);
            r.push((0..h).map(|j| dd_unit(n, i, j, -1.0)).collect());
        }
        CanonicalTable {
            gamma: set.gamma(),
            n,
            heights,
            offsets: set.offsets().to_vec(),
            q,
            r,
            ranks: 0,
            verify: cfg!(debug_assertions),
        }
    }

    /// Turns the defining-relation check after every rank on or off.
    pub fn with_verification(mut self, on: bool) -> Self {
        self.verify = on;
        self
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Number of ranks generated so far.
    pub fn ranks(&self) -> usize {
        self.ranks
    }

    /// `S_i = {0, ..., h_i - 1}`.
    pub fn in_residual_set(&self, i: usize, j: usize) -> bool {
        j < self.heights[i]
    }

    /// Largest stored index for component `i`, if any.
    pub fn max_index(&self, i: usize) -> Option<usize> {
        self.q[i].len().checked_sub(1)
    }

    /// `Q_i^j` rounded to double precision.
    pub fn q(&self, i: usize, j: usize) -> Option<FracPolyVec> {
        self.q[i].get(j).map(|v| dd_round(v, self.gamma))
    }

    /// `R_i^j` rounded to double precision.
    pub fn r(&self, i: usize, j: usize) -> Option<FracPolyVec> {
        self.r[i].get(j).map(|v| dd_round(v, self.gamma))
    }

    /// Number of stored `(i, j)` pairs.
    pub fn len(&self) -> usize {
        self.q.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_k s_k sum_l c_{k,l} X_{i_k}^l` for terms `(i_k, s_k, c_k)`,
    /// accumulated in double-double and rounded once.
    pub fn combine(&self, part: Part, terms: &[(usize, f64, &[f64])]) -> Result<FracPolyVec> {
        Ok(dd_round(&self.combine_dd(part, terms)?, self.gamma))
    }

    /// [`CanonicalTable::combine`] without the final rounding; coefficients per component.
    pub fn combine_dd(&self, part: Part, terms: &[(usize, f64, &[f64])]) -> Result<Vec<Vec<Dd>>> {
        let src = match part {
            Part::Q => &self.q,
            Part::R => &self.r,
        };
        let mut acc: DdVec = vec![Vec::new(); self.n];
        for &(i, s, c) in terms {
            if i >= self.n {
                return Err(Error::Domain(format!("component {} outside 1..={}", i + 1, self.n)));
            }
            for (l, &cl) in c.iter().enumerate() {
                if cl == 0.0 || s == 0.0 {
                    continue;
                }
                let x = src[i].get(l).ok_or_else(|| {
                    Error::Ordering(format!(
                        "index {l} of component {} not generated (table holds 0..={})",
                        i + 1,
                        src[i].len() as isize - 1
                    ))
                })?;
                dd_axpy(&mut acc, Dd::prod(s, cl), x);
            }
        }
        Ok(acc)
    }

    fn check_set(&self, set: &LambdaSet) -> Result<()> {
        if set.n() != self.n
            || set.gamma() != self.gamma
            || set.heights() != &self.heights[..]
            || set.offsets() != &self.offsets[..]
        {
            return Err(Error::Invariant(
                "canonical table and Lambda set describe different problems".into(),
            ));
        }
        Ok(())
    }

    /// Adds rank `r`: `Q_j^(h_j + r)` and `R_j^(h_j + r)` for every `j`.
    pub fn extend(&mut self, r: usize, set: &LambdaSet) -> Result<()> {
        if r != self.ranks {
            return Err(Error::Ordering(format!(
                "rank {r} requested but the table holds ranks 0..{}",
                self.ranks
            )));
        }
        self.check_set(set)?;
        let n = self.n;
        let (_, d) = p_r_dd(r, set)?;
        let h = &self.heights;
        let off = &self.offsets;

        // T_i = t^(r + Delta_i) e_i - sum_{v, m < r + h_v} Lambda~_{v,i}(r + Delta_i, m) Q_v^m
        // U_i =                  - sum_{v, m < r + h_v} Lambda~_{v,i}(r + Delta_i, m) R_v^m
        let mut t_vecs = Vec::with_capacity(n);
        let mut u_vecs = Vec::with_capacity(n);
        for i in 0..n {
            let row = r + off[i];
            let mut tv = dd_unit(n, i, row, 1.0);
            let mut uv: DdVec = vec![Vec::new(); n];
            for v in 0..n {
                let lead = r + h[v];
                let mut visit = |m: usize, coeff: f64| -> Result<()> {
                    if coeff == 0.0 || m == lead {
                        return Ok(());
                    }
                    if m > lead {
                        return Err(Error::Invariant(format!(
                            "Lambda~({}, {}) row {row} reaches column {m} beyond the height bound {lead}",
                            v + 1,
                            i + 1
                        )));
                    }
                    let qv = self.q[v].get(m).ok_or_else(|| {
                        Error::Ordering(format!("Q_{}^{m} missing at rank {r}", v + 1))
                    })?;
                    dd_axpy(&mut tv, Dd::from(-coeff), qv);
                    dd_axpy(&mut uv, Dd::from(-coeff), &self.r[v][m]);
                    Ok(())
                };
                if v == i {
                    visit(row, 1.0)?;
                }
                let (start, vals) = set.row_band(v, i, row);
                for (k, &lam) in vals.iter().enumerate() {
                    visit(start + k, -lam)?;
                }
            }
            t_vecs.push(tv);
            u_vecs.push(uv);
        }

        for j in 0..n {
            let mut qj: DdVec = vec![Vec::new(); n];
            let mut rj: DdVec = vec![Vec::new(); n];
            for i in 0..n {
                dd_axpy(&mut qj, d[i][j], &t_vecs[i]);
                dd_axpy(&mut rj, d[i][j], &u_vecs[i]);
            }
            dd_trim(&mut qj);
            dd_trim(&mut rj);
            self.q[j].push(qj);
            self.r[j].push(rj);
        }
        self.ranks += 1;
        if self.verify {
            for j in 0..n {
                let idx = self.heights[j] + r;
                let defect = self.defect(j, idx, set)?;
                let scale = 1.0 + dd_round(&self.q[j][idx], self.gamma).max_abs();
                if defect > 1e-10 * scale {
                    return Err(Error::Invariant(format!(
                        "defining relation fails for Q_{}^{idx}: defect {defect:.3e}",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Generates ranks until every component holds indices `0..=up_to`.
    pub fn generate(&mut self, up_to: usize, set: &LambdaSet) -> Result<()> {
        let min_h = self.heights.iter().copied().min().unwrap_or(0);
        let ranks = (up_to + 1).saturating_sub(min_h);
        self.generate_ranks(ranks, set)
    }

    /// Generates ranks `self.ranks()..ranks`; existing ranks are reused.
    pub fn generate_ranks(&mut self, ranks: usize, set: &LambdaSet) -> Result<()> {
        while self.ranks < ranks {
            self.extend(self.ranks, set)?;
        }
        Ok(())
    }

    /// `|| L Q_i^j - t^(j sigma) e_i - R_i^j ||` in the coefficient max-norm.
    pub fn defect(&self, i: usize, j: usize, set: &LambdaSet) -> Result<f64> {
        let q = self.q(i, j).ok_or_else(|| {
            Error::Ordering(format!("Q_{}^{j} has not been generated", i + 1))
        })?;
        let mut lhs = set.apply_l(&q)?;
        lhs.entry_mut(i).add_to_coeff(j, -1.0);
        lhs.add_scaled(-1.0, &dd_round(&self.r[i][j], self.gamma));
        Ok(lhs.max_abs())
    }

    /// Largest coefficient of any residual outside the residual space.
    pub fn residual_leak(&self) -> f64 {
        let mut worst = 0.0f64;
        for comp in &self.r {
            for rv in comp {
                for (v, p) in rv.iter().enumerate() {
                    for c in p.iter().skip(self.heights[v]) {
                        worst = worst.max(c.abs().to_f64());
                    }
                }
            }
        }
        worst
    }

    pub fn to_dump(&self, lambda_rows: usize) -> TableDump {
        let conv = |t: &Vec<Vec<DdVec>>| {
            t.iter()
                .map(|comp| {
                    comp.iter()
                        .map(|v| {
                            v.iter()
                                .map(|p| p.iter().map(|c| [c.hi, c.lo]).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        TableDump {
            format: DUMP_FORMAT.into(),
            version: DUMP_VERSION,
            gamma: self.gamma,
            heights: self.heights.clone(),
            offsets: self.offsets.clone(),
            lambda_rows,
            ranks: self.ranks,
            q: conv(&self.q),
            r: conv(&self.r),
        }
    }

    /// Rebuilds a table from a dump; the dump must match `set`'s structure.
    pub fn from_dump(dump: &TableDump, set: &LambdaSet) -> Result<Self> {
        if dump.format != DUMP_FORMAT || dump.version != DUMP_VERSION {
            return Err(Error::Config(format!(
                "unsupported table dump {} v{}",
                dump.format, dump.version
            )));
        }
        let n = dump.heights.len();
        let conv = |t: &DumpFamily| -> Vec<Vec<DdVec>> {
            t.iter()
                .map(|comp| {
                    comp.iter()
                        .map(|v| {
                            v.iter()
                                .map(|p| p.iter().map(|&[hi, lo]| Dd::new(hi, lo)).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        let table = CanonicalTable {
            gamma: dump.gamma,
            n,
            heights: dump.heights.clone(),
            offsets: dump.offsets.clone(),
            q: conv(&dump.q),
            r: conv(&dump.r),
            ranks: dump.ranks,
            verify: false,
        };
        table.check_set(set)?;
        let shape_ok = table.q.len() == n
            && table.r.len() == n
            && (0..n).all(|i| {
                table.q[i].len() == table.heights[i] + table.ranks
                    && table.r[i].len() == table.q[i].len()
                    && table.q[i].iter().chain(&table.r[i]).all(|v| v.len() == n)
            });
        if !shape_ok {
            return Err(Error::Config("table dump has inconsistent shape".into()));
        }
        Ok(table)
    }
}

pub const DUMP_FORMAT: &str = "abel-tau-canonical-table";
pub const DUMP_VERSION: u32 = 2;

/// `[i][j][component][l] = [hi, lo]`.
type DumpFamily = Vec<Vec<Vec<Vec<[f64; 2]>>>>;

/// Serializable snapshot of a [`CanonicalTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDump {
    pub format: String,
    pub version: u32,
    pub gamma: u32,
    pub heights: Vec<usize>,
    pub offsets: Vec<usize>,
    pub lambda_rows: usize,
    pub ranks: usize,
    /// Double-double coefficients of `Q_i^j`.
    pub q: DumpFamily,
    pub r: DumpFamily,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::fracpoly::FracBivar;
    use crate::problem::{ComponentFn, Forcing, Problem, Rational};
    use crate::special::{beta, gamma};

    fn setup(ex: usize, rows: usize) -> (LambdaSet, CanonicalTable) {
        let p = examples::example(ex).unwrap();
        let set = LambdaSet::new(&p, rows).unwrap();
        let table = CanonicalTable::init(&set).with_verification(true);
        (set, table)
    }

    #[test]
    fn initial_members_example_one() {
        let (_, t) = setup(1, 4);
        assert!(t.q(0, 0).unwrap().is_zero() && t.q(1, 0).unwrap().is_zero());
        assert!(t.r(0, 0).unwrap().approx_eq(&FracPolyVec::unit(2, 4, 0, 0, -1.0), 0.0));
        assert!(t.r(1, 0).unwrap().approx_eq(&FracPolyVec::unit(2, 4, 1, 0, -1.0), 0.0));
        assert_eq!(t.len(), 2);
        let (_, t3) = setup(3, 4);
        assert_eq!((t3.max_index(0), t3.max_index(1)), (Some(2), Some(1)));
    }

    #[test]
    fn p_r_example_one_closed_form() {
        let (set, _) = setup(1, 12);
        let g = gamma(0.25);
        for r in 0..6 {
            let (p, d) = p_r_matrix(r, &set).unwrap();
            let b = beta(0.25, (r as f64 + 4.0) / 4.0);
            let p_expect = DMatrix::from_row_slice(2, 2, &[0.0, -b / g, b / g, b / g]);
            let d_expect = DMatrix::from_row_slice(2, 2, &[1.0 / b, 1.0 / b, -1.0 / b, 0.0]) * g;
            assert!((&p - &p_expect).amax() < 1e-14, "r={r}");
            assert!((&d - &d_expect).amax() < 1e-12 * d_expect.amax(), "r={r}");
            assert!((&d * &p - DMatrix::identity(2, 2)).amax() < 1e-12);
        }
    }

    fn scalar_problem(k: f64) -> Problem {
        let a = Rational::new(1, 2).unwrap();
        Problem::new(
            vec![vec![a]],
            vec![vec![FracBivar::constant(2, k)]],
            Forcing::Explicit(vec![ComponentFn::zero(2)]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn scalar_p_r() {
        let p = scalar_problem(0.7);
        let set = LambdaSet::new(&p, 6).unwrap();
        assert_eq!(set.heights(), &[1]);
        for r in 0..4 {
            let (pm, d) = p_r_matrix(r, &set).unwrap();
            assert_eq!(pm[(0, 0)], set.lambda_tilde(0, 0, r, r + 1));
            assert!((d[(0, 0)] * pm[(0, 0)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_operator_degenerates() {
        let p = scalar_problem(0.0);
        let set = LambdaSet::new(&p, 8).unwrap();
        assert_eq!(set.heights(), &[0]);
        let mut t = CanonicalTable::init(&set).with_verification(true);
        assert!(t.is_empty());
        t.generate(6, &set).unwrap();
        for j in 0..=6 {
            assert!(t.q(0, j).unwrap().approx_eq(&FracPolyVec::unit(1, 2, 0, j, 1.0), 0.0));
            assert!(t.r(0, j).unwrap().is_zero());
        }
    }

    #[test]
    fn first_rank_example_one() {
        let (set, mut t) = setup(1, 8);
        t.extend(0, &set).unwrap();
        let (_, d) = p_r_matrix(0, &set).unwrap();
        for j in 0..2 {
            let mut expect = FracPolyVec::zeros(2, 4);
            for i in 0..2 {
                expect.entry_mut(i).add_to_coeff(0, d[(i, j)]);
            }
            assert!(t.q(j, 1).unwrap().approx_eq(&expect, 1e-14));
            assert!(t.defect(j, 1, &set).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ordering_is_enforced() {
        let (set, mut t) = setup(1, 8);
        assert!(matches!(t.extend(1, &set), Err(Error::Ordering(_))));
        let (set3, _) = setup(3, 8);
        assert!(matches!(t.extend(0, &set3), Err(Error::Invariant(_))));
        let (_, t2) = setup(1, 8);
        assert!(t2.defect(0, 5, &set).is_err());
    }

    #[test]
    fn singular_step_is_reported() {
        // k11 = -k12 = k21 = -k22 makes P_r rank one
        let a = Rational::new(1, 2).unwrap();
        let k = |c| FracBivar::constant(2, c);
        let p = Problem::new(
            vec![vec![a, a], vec![a, a]],
            vec![vec![k(1.0), k(-1.0)], vec![k(1.0), k(-1.0)]],
            Forcing::Explicit(vec![ComponentFn::zero(2), ComponentFn::zero(2)]),
            None,
        )
        .unwrap();
        let set = LambdaSet::new(&p, 6).unwrap();
        let mut t = CanonicalTable::init(&set);
        assert_eq!(t.extend(0, &set), Err(Error::SingularStep { rank: 0 }));
    }

    #[test]
    fn residual_confinement_and_degree_bound_example_three() {
        let (set, mut t) = setup(3, 30);
        t.generate(20, &set).unwrap();
        assert!(t.residual_leak() == 0.0);
        let max_off = *set.offsets().iter().max().unwrap();
        for j in 0..2 {
            for r in 0..t.ranks() {
                let deg = t.q(j, set.heights()[j] + r).unwrap().degree().unwrap_or(0);
                assert!(deg <= r + max_off, "j={j} r={r} deg={deg}");
            }
        }
    }

    #[test]
    fn generate_is_incremental_and_deterministic() {
        let (set, mut t) = setup(2, 30);
        t.generate(1, &set).unwrap();
        assert_eq!(t.ranks(), 0);
        t.generate(10, &set).unwrap();
        // min h = 2, so indices 0..=10 need ranks 0..=8
        let k = t.ranks();
        assert_eq!(k, 9);
        t.generate(15, &set).unwrap();
        assert_eq!(t.ranks(), k + 5);
        let (_, mut fresh) = setup(2, 30);
        fresh.generate(15, &set).unwrap();
        for i in 0..2 {
            for j in 0..=t.max_index(i).unwrap() {
                assert_eq!(t.q(i, j), fresh.q(i, j));
            }
        }
        let (a, b) = (t.to_dump(30), fresh.to_dump(30));
        assert!(a.q == b.q && a.r == b.r, "bitwise");
    }

    #[test]
    fn dump_round_trip() {
        let (set, mut t) = setup(3, 20);
        t.generate(8, &set).unwrap();
        let dump = t.to_dump(set.rows());
        let json = serde_json::to_string(&dump).unwrap();
        let back: TableDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dump);
        let t2 = CanonicalTable::from_dump(&back, &set).unwrap();
        assert_eq!(t2.ranks(), t.ranks());
        assert_eq!(t2.q(0, 5), t.q(0, 5));
        let (set1, _) = setup(1, 20);
        assert!(CanonicalTable::from_dump(&back, &set1).is_err());
        let mut bad = dump.clone();
        bad.version = 99;
        assert!(CanonicalTable::from_dump(&bad, &set).is_err());
    }
}
