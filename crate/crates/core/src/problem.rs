//! Problem data: the system dimension, rational exponents, kernel expansions,
//! forcing terms and (optionally) an exact solution.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fracpoly::{lattice_var, FracBivar, FracPoly};
use crate::operator::volterra_poly;
use crate::quadrature::GaussJacobi;
use crate::special::Special;

/// A reduced fraction `num/den` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u32,
    den: u32,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

impl Rational {
    /// Reduces `num/den` and checks `0 < num/den <= 1`.
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidProblem("exponent has zero denominator".into()));
        }
        if num == 0 || num > den {
            return Err(Error::InvalidProblem(format!(
                "exponent {num}/{den} is outside (0, 1]; kernels must have the form (t-s)^(alpha-1) with 0 < alpha <= 1"
            )));
        }
        let g = gcd(num, den);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidProblem(format!("cannot parse exponent {s:?}")))
        };
        match s.split_once('/') {
            Some((a, b)) => Rational::new(parse(a)?, parse(b)?),
            None => Rational::new(parse(s)?, 1),
        }
    }
}

/// `coeff * f(t)` or, with `integral` set,
/// `coeff * int_0^t (t - s)^(alpha - 1) k(t, s) f(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialTerm {
    pub coeff: f64,
    pub func: Special,
    pub integral: Option<(Rational, FracBivar)>,
}

impl SpecialTerm {
    pub fn plain(coeff: f64, func: Special) -> Self {
        SpecialTerm {
            coeff,
            func,
            integral: None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.integral {
            None => self.coeff * self.func.eval(t),
            Some((alpha, kernel)) => {
                self.coeff * volterra_special(self.func, alpha.value(), kernel, t)
            }
        }
    }

    /// Lattice coefficients `0..=m` of the term's fractional power series.
    pub fn series(&self, gamma: u32, m: usize) -> Result<Vec<f64>> {
        if gamma % 2 != 0 {
            return Err(Error::Unsupported(format!(
                "{} expands in powers t^(1/2), which are not on the lattice sigma = 1/{gamma}",
                self.func.name()
            )));
        }
        let step = (gamma / 2) as usize;
        let mut base = FracPoly::zero(gamma);
        for k in 0..=(m / step) {
            base.add_to_coeff(k * step, self.func.half_power_coeff(k));
        }
        let mut out = match &self.integral {
            None => base,
            Some((alpha, kernel)) => {
                let delta = (alpha.value() * gamma as f64).round() as usize;
                volterra_poly(kernel, delta, &base)
            }
        };
        out.coeffs_mut().resize(m + 1, 0.0);
        Ok(out.scaled(self.coeff).into_coeffs())
    }
}

const VOLTERRA_NODES: usize = 60;

/// Gauss-Jacobi rules for the `(1 - w)^(alpha - 1)` weight, built once per exponent.
fn volterra_rule(alpha: f64) -> Arc<GaussJacobi> {
    static RULES: OnceLock<Mutex<HashMap<u64, Arc<GaussJacobi>>>> = OnceLock::new();
    let mut rules = RULES
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    rules
        .entry(alpha.to_bits())
        .or_insert_with(|| {
            Arc::new(
                GaussJacobi::new(VOLTERRA_NODES, alpha - 1.0, 0.0)
                    .expect("exponent in (0, 1] gives a valid Jacobi weight"),
            )
        })
        .clone()
}

/// `int_0^t (t - s)^(alpha - 1) k(t, s) f(s) ds` with `s = t w^g`, which maps
/// the fractional-power behaviour of `f` at the origin to a smooth integrand
/// and leaves a `(1 - w)^(alpha - 1)` weight.
pub fn volterra_special(f: Special, alpha: f64, kernel: &FracBivar, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    // s = t w^g must also smooth the kernel's s^(q sigma) terms when present
    let g = if kernel.terms().iter().any(|&(_, q, _)| q > 0) {
        lcm(2, kernel.gamma())
    } else {
        2
    };
    let gf = g as f64;
    let rule = volterra_rule(alpha);
    let integral = rule.integrate(|w| {
        let wg = w.powi(g as i32);
        let s = t * wg;
        let geo: f64 = (0..g).map(|k| w.powi(k as i32)).sum();
        geo.powf(alpha - 1.0) * w.powi(g as i32 - 1) * kernel.eval(t, s) * f.eval(s)
    });
    gf * t.powf(alpha) * integral
}

/// A component function: a lattice polynomial plus special-function terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFn {
    pub poly: FracPoly,
    pub specials: Vec<SpecialTerm>,
}

impl ComponentFn {
    pub fn poly(poly: FracPoly) -> Self {
        ComponentFn {
            poly,
            specials: Vec::new(),
        }
    }

    pub fn zero(gamma: u32) -> Self {
        ComponentFn::poly(FracPoly::zero(gamma))
    }

    pub fn is_poly(&self) -> bool {
        self.specials.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() && self.specials.iter().all(|s| s.coeff == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = lattice_var(t, self.poly.gamma());
        self.poly.eval_in_s(s) + self.specials.iter().map(|sp| sp.eval(t)).sum::<f64>()
    }

    /// Lattice coefficients `0..=m` of the series expansion.
    pub fn series(&self, m: usize) -> Result<Vec<f64>> {
        let gamma = self.poly.gamma();
        let mut out = vec![0.0; m + 1];
        for (k, c) in self.poly.coeffs().iter().enumerate().take(m + 1) {
            out[k] = *c;
        }
        for sp in &self.specials {
            for (o, c) in out.iter_mut().zip(sp.series(gamma, m)?) {
                *o += c;
            }
        }
        Ok(out)
    }
}

/// How the right-hand side is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Explicit(Vec<ComponentFn>),
    /// `G = L y` computed from the exact solution.
    FromExact,
}

#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    gamma: u32,
    alphas: Vec<Vec<Rational>>,
    deltas: Vec<Vec<usize>>,
    kernels: Vec<Vec<FracBivar>>,
    forcing: Vec<ComponentFn>,
    exact: Option<Vec<ComponentFn>>,
}

/// `gamma = lcm` of the exponent denominators.
pub fn lattice_gamma(alphas: &[Vec<Rational>]) -> u32 {
    alphas
        .iter()
        .flatten()
        .fold(1, |acc, a| lcm(acc, a.den()))
}

impl Problem {
    pub fn new(
        alphas: Vec<Vec<Rational>>,
        kernels: Vec<Vec<FracBivar>>,
        forcing: Forcing,
        exact: Option<Vec<ComponentFn>>,
    ) -> Result<Self> {
        let n = alphas.len();
        if n == 0 {
            return Err(Error::InvalidProblem("system dimension must be at least 1".into()));
        }
        if alphas.iter().any(|row| row.len() != n) || kernels.len() != n
            || kernels.iter().any(|row| row.len() != n)
        {
            return Err(Error::InvalidProblem(format!(
                "exponent and kernel tables must both be {n} x {n}"
            )));
        }
        let gamma = lattice_gamma(&alphas);
        let deltas: Vec<Vec<usize>> = alphas
            .iter()
            .map(|row| {
                row.iter()
                    .map(|a| (a.num() * (gamma / a.den())) as usize)
                    .collect()
            })
            .collect();
        for (i, row) in kernels.iter().enumerate() {
            for (j, k) in row.iter().enumerate() {
                if k.gamma() != gamma {
                    return Err(Error::InvalidProblem(format!(
                        "kernel ({}, {}) uses sigma = 1/{}, problem lattice is sigma = 1/{gamma}",
                        i + 1,
                        j + 1,
                        k.gamma()
                    )));
                }
            }
        }
        let check_components = |what: &str, comps: &[ComponentFn]| -> Result<()> {
            if comps.len() != n {
                return Err(Error::InvalidProblem(format!(
                    "{what} has {} components, expected {n}",
                    comps.len()
                )));
            }
            for c in comps {
                if c.poly.gamma() != gamma {
                    return Err(Error::InvalidProblem(format!(
                        "{what} uses sigma = 1/{}, problem lattice is sigma = 1/{gamma}",
                        c.poly.gamma()
                    )));
                }
                for sp in &c.specials {
                    if let Some((a, k)) = &sp.integral {
                        if k.gamma() != gamma || (a.value() * gamma as f64).fract() != 0.0 {
                            return Err(Error::InvalidProblem(format!(
                                "{what} has an integral term off the lattice"
                            )));
                        }
                    }
                }
            }
            Ok(())
        };
        if let Some(ex) = &exact {
            check_components("exact solution", ex)?;
        }
        let forcing = match forcing {
            Forcing::Explicit(g) => {
                check_components("forcing", &g)?;
                g
            }
            Forcing::FromExact => {
                let ex = exact.as_ref().ok_or_else(|| {
                    Error::InvalidProblem("forcing from exact solution needs an exact solution".into())
                })?;
                forcing_from_exact(ex, &alphas, &deltas, &kernels)?
            }
        };
        Ok(Problem {
            n,
            gamma,
            alphas,
            deltas,
            kernels,
            forcing,
            exact,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        1.0 / self.gamma as f64
    }

    pub fn alphas(&self) -> &[Vec<Rational>] {
        &self.alphas
    }

    pub fn alpha(&self, i: usize, j: usize) -> Rational {
        self.alphas[i][j]
    }

    pub fn deltas(&self) -> &[Vec<usize>] {
        &self.deltas
    }

    pub fn delta(&self, i: usize, j: usize) -> usize {
        self.deltas[i][j]
    }

    pub fn kernels(&self) -> &[Vec<FracBivar>] {
        &self.kernels
    }

    pub fn kernel(&self, i: usize, j: usize) -> &FracBivar {
        &self.kernels[i][j]
    }

    pub fn forcing(&self) -> &[ComponentFn] {
        &self.forcing
    }

    pub fn exact(&self) -> Option<&[ComponentFn]> {
        self.exact.as_deref()
    }

    /// Largest kernel degree bound `N_k` over all pairs.
    pub fn kernel_degree(&self) -> usize {
        self.kernels
            .iter()
            .flatten()
            .map(FracBivar::degree_bound)
            .max()
            .unwrap_or(0)
    }

    pub fn max_delta(&self) -> usize {
        self.deltas.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Exact solution values at `t`, if known.
    pub fn exact_at(&self, t: f64) -> Option<Vec<f64>> {
        self.exact
            .as_ref()
            .map(|ex| ex.iter().map(|c| c.eval(t)).collect())
    }
}

/// `G_i = y_i - sum_j int K_ij y_j`.
fn forcing_from_exact(
    exact: &[ComponentFn],
    alphas: &[Vec<Rational>],
    deltas: &[Vec<usize>],
    kernels: &[Vec<FracBivar>],
) -> Result<Vec<ComponentFn>> {
    let n = exact.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut g = exact[i].clone();
        for j in 0..n {
            let k = &kernels[i][j];
            if k.is_zero() {
                continue;
            }
            let img = volterra_poly(k, deltas[i][j], &exact[j].poly);
            g.poly.add_scaled(-1.0, &img);
            for sp in &exact[j].specials {
                if sp.integral.is_some() {
                    return Err(Error::Unsupported(
                        "exact solution terms must not themselves be integrals".into(),
                    ));
                }
                g.specials.push(SpecialTerm {
                    coeff: -sp.coeff,
                    func: sp.func,
                    integral: Some((alphas[i][j], k.clone())),
                });
            }
        }
        g.poly = g.poly.trimmed();
        out.push(g);
    }
    Ok(out)
}
