//! Text, CSV and JSON rendering of solver results.

use std::fmt::Write;

use abel_tau::tau::TauSolution;
use abel_tau::Problem;
use serde_json::json;

/// Sup error below which a solve is flagged as reproducing the exact solution.
pub const EXACT_TOL: f64 = 1e-10;

/// C-style `%.6e`: six decimals and a signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

pub fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| sci(x)).collect();
    format!("[{}]", parts.join(", "))
}

/// One sweep row.
#[derive(Debug, Clone)]
pub struct Row {
    pub degree: usize,
    pub errors: Option<Vec<f64>>,
    pub tau_norms: Vec<f64>,
    pub residual: f64,
    pub seconds: f64,
}

fn header(n: usize) -> Vec<String> {
    let mut h = vec!["N".to_string()];
    h.extend((1..=n).map(|i| format!("e{i}")));
    h.extend((1..=n).map(|i| format!("tau{i}")));
    h.push("residual".into());
    h.push("seconds".into());
    h
}

fn cells(n: usize, row: &Row) -> Vec<String> {
    let mut c = vec![row.degree.to_string()];
    match &row.errors {
        Some(e) => c.extend(e.iter().map(|&x| sci(x))),
        None => c.extend(std::iter::repeat(String::new()).take(n)),
    }
    c.extend(row.tau_norms.iter().map(|&x| sci(x)));
    c.push(sci(row.residual));
    c.push(sci(row.seconds));
    c
}

/// Rows sorted by `N`, header `N,e1..en,tau1..taun,residual,seconds`.
pub fn csv(n: usize, rows: &[Row]) -> String {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.degree);
    let mut out = header(n).join(",");
    out.push('\n');
    for r in &rows {
        out.push_str(&cells(n, r).join(","));
        out.push('\n');
    }
    out
}

pub fn table(n: usize, rows: &[Row]) -> String {
    let mut rows = rows.to_vec();
    rows.sort_by_key(|r| r.degree);
    let mut grid = vec![header(n)];
    grid.extend(rows.iter().map(|r| cells(n, r)));
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|k| grid.iter().map(|r| r[k].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &grid {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub struct SolveSummary<'a> {
    pub problem: &'a Problem,
    pub heights: &'a [usize],
    pub sol: &'a TauSolution,
    pub errors: Option<&'a [f64]>,
    pub seconds: f64,
}

impl SolveSummary<'_> {
    fn exact_match(&self) -> Option<bool> {
        self.errors.map(|e| e.iter().all(|&x| x <= EXACT_TOL))
    }

    pub fn text(&self) -> String {
        let sol = self.sol;
        let mut out = String::new();
        let _ = writeln!(out, "N            {}", sol.degree);
        let _ = writeln!(out, "gamma        {}", self.problem.gamma());
        let _ = writeln!(out, "heights      {:?}", self.heights);
        for (i, taus) in sol.taus.iter().enumerate() {
            for (k, &t) in taus.iter().enumerate() {
                let _ = writeln!(out, "tau[{},{}]     {}", sol.degree + 1 + k, i + 1, sci(t));
            }
        }
        let _ = writeln!(out, "tau norms    {}", list(&sol.tau_norms));
        let _ = writeln!(out, "residual     {}", sci(sol.residual_norm));
        if sol.forcing.dropped > 0.0 {
            let _ = writeln!(out, "dropped      {}", sci(sol.forcing.dropped));
        }
        if let Some(e) = self.errors {
            let _ = writeln!(out, "sup errors   {}", list(e));
        }
        if let Some(m) = self.exact_match() {
            let _ = writeln!(out, "exact match  {m}");
        }
        let _ = writeln!(out, "seconds      {}", sci(self.seconds));
        out
    }

    pub fn json(&self) -> String {
        let sol = self.sol;
        let v = json!({
            "degree": sol.degree,
            "gamma": self.problem.gamma(),
            "heights": self.heights,
            "taus": sol.taus,
            "tau_norms": sol.tau_norms,
            "residual": sol.residual_norm,
            "tau_pivot": sol.tau_pivot,
            "dropped": sol.forcing.dropped,
            "errors": self.errors,
            "exact_match": self.exact_match(),
            "coefficients": sol.y.entries().iter().map(|p| p.coeffs().to_vec()).collect::<Vec<_>>(),
            "seconds": self.seconds,
        });
        serde_json::to_string_pretty(&v).expect("plain JSON values")
    }
}
