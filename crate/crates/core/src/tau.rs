//! Recursive Tau solution `Y_N` and its diagnostics.
//!
//! `Y_N = sum_i sum_{l <= N} g_{l,i} Q_i^l + sum_i sum_{j=N+1}^{N+h_i} tau_{j,i} sum_l c_{j,l} Q_i^l`
//! where the `tau` are fixed by requiring the total residual, a combination
//! of the `R_i^l`, to vanish in the residual space.

use nalgebra::{DMatrix, DVector};

use crate::basis::{MuntzBasis, PROJECTION_EXTRA_NODES};
use crate::canonical::{CanonicalTable, Part};
use crate::dd::{self, Dd};
use crate::error::{Error, Result};
use crate::fracpoly::{lattice_var, FracPoly, FracPolyVec};
use crate::operator::LambdaSet;
use crate::problem::{ComponentFn, Problem};

/// Smallest admissible pivot of the equilibrated Tau system, relative to
/// its largest entry.
pub const TAU_PIVOT: f64 = 1e-28;

/// Default number of uniform points for sup-norm errors.
pub const DEFAULT_GRID: usize = 1001;

/// Forcing coefficients `g_{l,i}` entering the Tau solution.
#[derive(Debug, Clone)]
pub struct ForcingExpansion {
    pub coeffs: Vec<FracPoly>,
    /// Largest coefficient of a polynomial forcing term beyond index `N`
    /// that had to be projected rather than kept verbatim.
    pub dropped: f64,
}

#[derive(Debug, Clone)]
pub struct TauSolution {
    pub degree: usize,
    pub y: FracPolyVec,
    /// `taus[i][k] = tau_{N+1+k, i}`.
    pub taus: Vec<Vec<f64>>,
    pub tau_norms: Vec<f64>,
    pub residual_norm: f64,
    /// Smallest relative pivot met while solving for `tau`.
    pub tau_pivot: f64,
    pub forcing: ForcingExpansion,
}

impl TauSolution {
    /// `tau_{j,i}` for `N < j <= N + h_i` (0-based component `i`).
    pub fn tau(&self, j: usize, i: usize) -> Option<f64> {
        j.checked_sub(self.degree + 1)
            .and_then(|k| self.taus.get(i).and_then(|t| t.get(k)).copied())
    }

    pub fn tau_count(&self) -> usize {
        self.taus.iter().map(Vec::len).sum()
    }

    pub fn max_abs_tau(&self) -> f64 {
        self.taus.iter().flatten().fold(0.0, |m, t| m.max(t.abs()))
    }

    /// `Y_N(t)`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.y.eval(t)
    }
}

/// Owns the operator truncation, canonical table and basis for one problem
/// so that solves at several `N` share them.
#[derive(Debug, Clone)]
pub struct TauSolver {
    problem: Problem,
    set: LambdaSet,
    table: CanonicalTable,
    basis: MuntzBasis,
    prepared: Option<usize>,
}

impl TauSolver {
    pub fn new(problem: Problem) -> Result<Self> {
        let set = LambdaSet::new(&problem, 1)?;
        let table = CanonicalTable::init(&set).with_verification(false);
        let basis = MuntzBasis::new(0, problem.gamma())?;
        Ok(TauSolver {
            problem,
            set,
            table,
            basis,
            prepared: None,
        })
    }

    /// Checks the defining relation after every new rank.
    pub fn with_verification(mut self, on: bool) -> Self {
        self.table = self.table.with_verification(on);
        self
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn lambda_set(&self) -> &LambdaSet {
        &self.set
    }

    pub fn table(&self) -> &CanonicalTable {
        &self.table
    }

    pub fn basis(&self) -> &MuntzBasis {
        &self.basis
    }

    /// Replaces the canonical table, e.g. with one loaded from a dump.
    pub fn set_table(&mut self, table: CanonicalTable) -> Result<()> {
        if table.heights() != self.set.heights() || table.gamma() != self.problem.gamma() {
            return Err(Error::Invariant(
                "canonical table does not belong to this problem".into(),
            ));
        }
        self.table = table;
        Ok(())
    }

    pub fn heights(&self) -> &[usize] {
        self.set.heights()
    }

    /// Largest `N` for which every structure is in place.
    pub fn prepared_degree(&self) -> Option<usize> {
        self.prepared
    }

    /// Extends truncation, table and basis so that any `N <= max_n` can be
    /// solved through [`TauSolver::solve_prepared`].
    pub fn prepare(&mut self, max_n: usize) -> Result<()> {
        let max_h = self.set.max_height();
        if max_n < max_h {
            return Err(Error::Domain(format!(
                "N = {max_n} is below the largest height {max_h}"
            )));
        }
        if self.prepared.is_some_and(|p| p >= max_n) {
            return Ok(());
        }
        self.set.ensure_rows(max_n + max_h + 1);
        self.table.generate_ranks(max_n + 1, &self.set)?;
        let poly_deg = self
            .problem
            .forcing()
            .iter()
            .filter_map(|g| g.poly.degree())
            .max()
            .unwrap_or(0);
        let need = (max_n + max_h).max(poly_deg);
        if self.basis.max_index() < need {
            self.basis = MuntzBasis::new(need, self.problem.gamma())?;
        }
        self.prepared = Some(max_n);
        Ok(())
    }

    pub fn solve(&mut self, n_deg: usize) -> Result<TauSolution> {
        self.prepare(n_deg)?;
        self.solve_prepared(n_deg)
    }

    fn require_prepared(&self, n_deg: usize) -> Result<()> {
        match self.prepared {
            Some(p) if p >= n_deg => Ok(()),
            _ => Err(Error::Ordering(format!(
                "solver not prepared for N = {n_deg}; call prepare first"
            ))),
        }
    }

    /// `g_{l,i}`. A purely polynomial `g_i` is kept verbatim when its index
    /// does not exceed `N + h_i` (the canonical polynomials used by the tau
    /// terms cover that range); any other `g_i` is projected onto `l <= N`.
    pub fn expand_forcing(&self, n_deg: usize) -> Result<ForcingExpansion> {
        self.require_prepared(n_deg)?;
        let limits: Vec<usize> = self.set.heights().iter().map(|h| n_deg + h).collect();
        expand_components(&self.basis, self.problem.forcing(), n_deg, &limits)
    }

    /// Coordinates of a residual in `{t^(l sigma) e_v : l < h_v}`.
    fn coords(&self, rv: &[Vec<Dd>]) -> Result<Vec<Dd>> {
        let h = self.set.heights();
        let mut out = Vec::with_capacity(h.iter().sum());
        for (v, p) in rv.iter().enumerate() {
            for l in 0..h[v] {
                out.push(p.get(l).copied().unwrap_or(Dd::ZERO));
            }
            if let Some((l, c)) = p.iter().enumerate().skip(h[v]).find(|(_, c)| !c.is_zero()) {
                return Err(Error::Invariant(format!(
                    "residual has coefficient {:e} at t^({l}/{}) e_{}, outside the residual space",
                    c.to_f64(),
                    self.problem.gamma(),
                    v + 1
                )));
            }
        }
        Ok(out)
    }

    /// Columns of `M` and `b` in double-double.
    fn assemble_dd(&self, g: &[FracPoly], n_deg: usize) -> Result<(Vec<Vec<Dd>>, Vec<Dd>)> {
        self.require_prepared(n_deg)?;
        let h = self.set.heights();
        let mut cols = Vec::with_capacity(h.iter().sum());
        for (i, &hi) in h.iter().enumerate() {
            for j in (n_deg + 1)..=(n_deg + hi) {
                let c = self.basis.orthonormal(j)?;
                cols.push(self.coords(&self.table.combine_dd(Part::R, &[(i, 1.0, c.coeffs())])?)?);
            }
        }
        let terms: Vec<_> = g.iter().enumerate().map(|(i, gi)| (i, 1.0, gi.coeffs())).collect();
        let b = self
            .coords(&self.table.combine_dd(Part::R, &terms)?)?
            .into_iter()
            .map(|x| -x)
            .collect();
        Ok((cols, b))
    }

    /// `M tau = b` from `R(t) = 0`; unknowns ordered by component, then `j`.
    /// Entries are rounded from the double-double system used by the solver.
    pub fn assemble_tau_system(
        &self,
        g: &[FracPoly],
        n_deg: usize,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let (cols, b) = self.assemble_dd(g, n_deg)?;
        let size = b.len();
        Ok((
            DMatrix::from_fn(size, size, |r, c| cols[c][r].to_f64()),
            DVector::from_iterator(size, b.iter().map(|x| x.to_f64())),
        ))
    }

    /// Solves at degree `N`; requires a prior [`TauSolver::prepare`] with a
    /// degree of at least `N`. Never mutates, so several `N` can run in parallel.
    pub fn solve_prepared(&self, n_deg: usize) -> Result<TauSolution> {
        self.require_prepared(n_deg)?;
        let n = self.problem.n();
        let gamma = self.problem.gamma();
        let h = self.set.heights().to_vec();
        let forcing = self.expand_forcing(n_deg)?;
        let (cols, b) = self.assemble_dd(&forcing.coeffs, n_deg)?;
        let (tau_vec, tau_pivot) = solve_system(&cols, &b, n_deg)?;

        let mut taus = Vec::with_capacity(n);
        let mut k = 0;
        for &hi in &h {
            taus.push(tau_vec.iter().skip(k).take(hi).copied().collect::<Vec<_>>());
            k += hi;
        }

        let mut h_n = FracPolyVec::zeros(n, gamma);
        let mut tau_polys = Vec::new();
        for (i, ti) in taus.iter().enumerate() {
            for (k, &tau) in ti.iter().enumerate() {
                let c = self.basis.orthonormal(n_deg + 1 + k)?;
                h_n.entry_mut(i).add_scaled(tau, &c);
                tau_polys.push((i, tau, c));
            }
        }
        let mut terms: Vec<(usize, f64, &[f64])> = forcing
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, gi)| (i, 1.0, gi.coeffs()))
            .collect();
        terms.extend(tau_polys.iter().map(|(i, tau, c)| (*i, *tau, c.coeffs())));
        let y = self.table.combine(Part::Q, &terms)?;

        // L Y_N - Pi_N G - H_N
        let mut defect = self.set.apply_l(&y)?;
        for (i, gi) in forcing.coeffs.iter().enumerate() {
            defect.entry_mut(i).add_scaled(-1.0, gi);
        }
        defect.add_scaled(-1.0, &h_n);
        let residual_norm = defect.max_abs();

        let tau_norms = taus
            .iter()
            .map(|t| t.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .collect();
        Ok(TauSolution {
            degree: n_deg,
            y,
            taus,
            tau_norms,
            residual_norm,
            tau_pivot,
            forcing,
        })
    }
}

/// `tau` from the columns of `M` and `b`, with the smallest relative pivot.
fn solve_system(cols: &[Vec<Dd>], b: &[Dd], n_deg: usize) -> Result<(Vec<f64>, f64)> {
    let size = b.len();
    let rows: Vec<Vec<Dd>> = (0..size).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let (x, pivot) = dd::solve(&rows, b);
    if size > 0 && pivot < TAU_PIVOT {
        return Err(Error::IllPosedTau {
            size,
            degree: n_deg,
        });
    }
    Ok((x.iter().map(|v| v.to_f64()).collect(), pivot))
}

/// Projects each component onto indices `0..=n_deg`, except that purely
/// polynomial components of index at most `keep[i]` are kept exactly.
pub fn expand_components(
    basis: &MuntzBasis,
    comps: &[ComponentFn],
    n_deg: usize,
    keep: &[usize],
) -> Result<ForcingExpansion> {
    let mut coeffs = Vec::with_capacity(comps.len());
    let mut dropped = 0.0f64;
    for (g, &limit) in comps.iter().zip(keep) {
        let verbatim = g.specials.is_empty() && g.poly.degree().is_none_or(|d| d <= limit);
        let mut out = if verbatim {
            g.poly.clone()
        } else {
            for c in g.poly.coeffs().iter().skip(n_deg + 1) {
                dropped = dropped.max(c.abs());
            }
            basis.project_poly(&g.poly, n_deg)?
        };
        if !g.specials.is_empty() {
            let f = |t: f64| g.specials.iter().map(|s| s.eval(t)).sum::<f64>();
            let p = basis.project_fn(&f, n_deg, n_deg + PROJECTION_EXTRA_NODES)?;
            out.add_scaled(1.0, &p);
        }
        coeffs.push(out.trimmed());
    }
    Ok(ForcingExpansion { coeffs, dropped })
}

/// One-shot solve.
pub fn solve(problem: &Problem, n_deg: usize) -> Result<TauSolution> {
    TauSolver::new(problem.clone())?.solve(n_deg)
}

/// `max_t |Y_N,i(t) - y_i(t)|` over `grid` uniform points of `[0, 1]`.
pub fn sup_error(y: &FracPolyVec, exact: impl Fn(f64) -> Vec<f64>, grid: usize) -> Vec<f64> {
    let grid = grid.max(2);
    let gamma = y.gamma();
    let mut err = vec![0.0f64; y.dim()];
    for k in 0..grid {
        let t = k as f64 / (grid - 1) as f64;
        let s = lattice_var(t, gamma);
        let ex = exact(t);
        for (i, e) in err.iter_mut().enumerate() {
            *e = e.max((y.entry(i).eval_in_s(s) - ex[i]).abs());
        }
    }
    err
}

/// One row of the tau-decay table.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub degree: usize,
    pub tau_norms: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

/// `(N, ||tau_1||, ..., ||tau_n||, errors)` rows sorted by `N`.
pub fn tau_decay_report(solutions: &[TauSolution], problem: &Problem) -> Vec<DecayRow> {
    let mut rows: Vec<DecayRow> = solutions
        .iter()
        .map(|s| DecayRow {
            degree: s.degree,
            tau_norms: s.tau_norms.clone(),
            errors: problem
                .exact()
                .map(|_| sup_error(&s.y, |t| problem.exact_at(t).unwrap(), DEFAULT_GRID)),
        })
        .collect();
    rows.sort_by_key(|r| r.degree);
    rows
}
