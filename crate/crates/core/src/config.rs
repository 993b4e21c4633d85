//! TOML problem descriptions.
//!
//! ```toml
//! name = "demo"
//! alphas = [["1/2", "1/2"], ["1/2", "1/2"]]
//! forcing_from_exact = false
//!
//! [[kernel]]          # k_ij(t, s) = sum c t^(p sigma) s^(q sigma)
//! row = 1
//! col = 2
//! terms = [[0, 0, "-1"]]
//!
//! [[forcing]]         # g_i(t) = sum c t^(l sigma) + sum c f(t)
//! component = 2
//! terms = [[0, 1.0], [1, -1.0]]
//! special = [["erfc_exp_pi", -1.0]]
//! ```
//!
//! Indices are on the problem lattice `sigma = 1/gamma`, `gamma` being the
//! lcm of the exponent denominators. Coefficients are numbers or constant
//! expressions (see [`crate::expr`]). Absent kernels and components are zero.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr;
use crate::fracpoly::{FracBivar, FracPoly};
use crate::problem::{lattice_gamma, ComponentFn, Forcing, Problem, Rational, SpecialTerm};
use crate::special::Special;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Num(f64),
    Expr(String),
}

impl Coeff {
    pub fn value(&self) -> Result<f64> {
        match self {
            Coeff::Num(v) => Ok(*v),
            Coeff::Expr(s) => expr::eval(s),
        }
    }
}

impl From<f64> for Coeff {
    fn from(v: f64) -> Self {
        Coeff::Num(v)
    }
}

impl From<&str> for Coeff {
    fn from(s: &str) -> Self {
        Coeff::Expr(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<(usize, usize, Coeff)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    pub component: usize,
    #[serde(default)]
    pub terms: Vec<(usize, Coeff)>,
    #[serde(default)]
    pub special: Vec<(String, Coeff)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alphas: Vec<Vec<String>>,
    #[serde(default)]
    pub forcing_from_exact: bool,
    #[serde(default, rename = "kernel")]
    pub kernels: Vec<KernelEntry>,
    #[serde(default, rename = "forcing")]
    pub forcing: Vec<ComponentEntry>,
    #[serde(default, rename = "exact")]
    pub exact: Vec<ComponentEntry>,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_problem(&self) -> Result<Problem> {
        let n = self.alphas.len();
        if n == 0 {
            return Err(Error::Config("alphas must not be empty".into()));
        }
        let mut alphas = Vec::with_capacity(n);
        for (i, row) in self.alphas.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "alphas row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            let parsed = row
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<Rational>().map_err(|e| {
                        Error::Config(format!("alphas[{}][{}]: {e}", i + 1, j + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            alphas.push(parsed);
        }
        let gamma = lattice_gamma(&alphas);

        let mut kernels = vec![vec![FracBivar::zero(gamma); n]; n];
        let mut seen = BTreeSet::new();
        for (e, k) in self.kernels.iter().enumerate() {
            let ctx = format!("kernel entry {}", e + 1);
            if k.row == 0 || k.row > n || k.col == 0 || k.col > n {
                return Err(Error::Config(format!(
                    "{ctx}: (row, col) = ({}, {}) outside 1..={n}",
                    k.row, k.col
                )));
            }
            if !seen.insert((k.row, k.col)) {
                return Err(Error::Config(format!(
                    "{ctx}: kernel ({}, {}) given twice",
                    k.row, k.col
                )));
            }
            let terms = k
                .terms
                .iter()
                .map(|(p, q, c)| {
                    c.value()
                        .map(|v| (*p, *q, v))
                        .map_err(|err| Error::Config(format!("{ctx}: {err}")))
                })
                .collect::<Result<Vec<_>>>()?;
            kernels[k.row - 1][k.col - 1] = FracBivar::from_terms(gamma, &terms);
        }

        let forcing = if self.forcing_from_exact {
            if !self.forcing.is_empty() {
                return Err(Error::Config(
                    "forcing_from_exact is set but forcing entries are also given".into(),
                ));
            }
            if self.exact.is_empty() {
                return Err(Error::Config(
                    "forcing_from_exact needs at least one [[exact]] entry".into(),
                ));
            }
            Forcing::FromExact
        } else {
            Forcing::Explicit(components(&self.forcing, n, gamma, "forcing")?)
        };
        let exact = if self.exact.is_empty() {
            None
        } else {
            Some(components(&self.exact, n, gamma, "exact")?)
        };
        Problem::new(alphas, kernels, forcing, exact).map_err(|e| match e {
            Error::InvalidProblem(m) => Error::Config(m),
            other => other,
        })
    }
}

fn components(
    entries: &[ComponentEntry],
    n: usize,
    gamma: u32,
    what: &str,
) -> Result<Vec<ComponentFn>> {
    let mut out = vec![ComponentFn::zero(gamma); n];
    let mut seen = BTreeSet::new();
    for (e, c) in entries.iter().enumerate() {
        let ctx = format!("{what} entry {}", e + 1);
        if c.component == 0 || c.component > n {
            return Err(Error::Config(format!(
                "{ctx}: component {} outside 1..={n}",
                c.component
            )));
        }
        if !seen.insert(c.component) {
            return Err(Error::Config(format!(
                "{ctx}: component {} given twice",
                c.component
            )));
        }
        let mut poly = FracPoly::zero(gamma);
        for (l, coeff) in &c.terms {
            let v = coeff
                .value()
                .map_err(|err| Error::Config(format!("{ctx}: {err}")))?;
            poly.add_to_coeff(*l, v);
        }
        let mut specials = Vec::new();
        for (name, coeff) in &c.special {
            let func = Special::from_name(name).ok_or_else(|| {
                let known: Vec<&str> = Special::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!(
                    "{ctx}: unknown special function {name:?} (known: {})",
                    known.join(", ")
                ))
            })?;
            let v = coeff
                .value()
                .map_err(|err| Error::Config(format!("{ctx}: {err}")))?;
            specials.push(SpecialTerm::plain(v, func));
        }
        out[c.component - 1] = ComponentFn { poly, specials };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
name = "demo"
alphas = [["1/2", "1/2"], ["1/2", "1/2"]]

[[kernel]]
row = 1
col = 2
terms = [[0, 0, "-1"], [1, 0, 0.5]]

[[forcing]]
component = 2
terms = [[0, 1], [1, "-sqrt(4)/2"]]
special = [["erfc_exp_pi", -1.0]]
"#;

    #[test]
    fn parses_demo() {
        let cfg = ProblemConfig::parse(DEMO).unwrap();
        let p = cfg.to_problem().unwrap();
        assert_eq!(p.gamma(), 2);
        assert_eq!(p.kernel(0, 1).coeff(0, 0), -1.0);
        assert_eq!(p.kernel(0, 1).coeff(1, 0), 0.5);
        assert!(p.kernel(0, 0).is_zero());
        let g = &p.forcing()[1];
        assert_eq!(g.poly.coeffs(), &[1.0, -1.0]);
        assert_eq!(g.specials.len(), 1);
        assert!(p.forcing()[0].is_zero());
    }

    #[test]
    fn round_trip_is_a_fixed_point() {
        let cfg = ProblemConfig::parse(DEMO).unwrap();
        let text = cfg.to_toml().unwrap();
        let again = ProblemConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_toml().unwrap());
    }

    #[test]
    fn diagnostics() {
        let bad_alpha = DEMO.replace("[\"1/2\", \"1/2\"], [", "[\"5/4\", \"1/2\"], [");
        let e = ProblemConfig::parse(&bad_alpha).unwrap().to_problem().unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("alphas[1][1]") && m.contains("(0, 1]")), "{e}");

        let e = ProblemConfig::parse("alphas = [[\"1/2\"]]\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");

        let e = ProblemConfig::parse("alphas = [[\"1/2\"]\n").unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");

        let bad_special = DEMO.replace("erfc_exp_pi", "nope");
        let e = ProblemConfig::parse(&bad_special).unwrap().to_problem().unwrap_err();
        assert!(e.to_string().contains("nope"));

        let bad_row = DEMO.replace("row = 1", "row = 3");
        assert!(ProblemConfig::parse(&bad_row).unwrap().to_problem().is_err());

        let bad_expr = DEMO.replace("-sqrt(4)/2", "Gamma(");
        let e = ProblemConfig::parse(&bad_expr).unwrap().to_problem().unwrap_err();
        assert!(e.to_string().contains("forcing entry 1"), "{e}");
    }
}
