//! The four benchmark systems shipped with the solver.
//!
//! 1. `alpha = 1/4` system with `1/Gamma(alpha)` kernels and solution
//!    `[t^(5/4), Gamma(9/4) t]`.
//! 2. Kernels `(t-s)^(-1/5) ... (t-s)^(-4/5)` with solution `[t + t^2, t - t^2]`.
//! 3. Mixed exponents `1/4, 3/4, 1/4, 1/2` with solution
//!    `[arctan(sqrt t), t^(3/4)]`; the forcing is generated from the solution.
//! 4. `alpha = 1/2` with solution `[1 - e^(pi t) erfc(sqrt(pi t)), sqrt t]`.

use crate::config::{Coeff, ComponentEntry, KernelEntry, ProblemConfig};
use crate::error::{Error, Result};
use crate::problem::Problem;

pub const COUNT: usize = 4;

fn alphas(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn kernel(row: usize, col: usize, c: Coeff) -> KernelEntry {
    KernelEntry {
        row,
        col,
        terms: vec![(0, 0, c)],
    }
}

fn comp(component: usize, terms: Vec<(usize, Coeff)>, special: Vec<(&str, Coeff)>) -> ComponentEntry {
    ComponentEntry {
        component,
        terms,
        special: special
            .into_iter()
            .map(|(n, c)| (n.to_string(), c))
            .collect(),
    }
}

/// Config of built-in example `k` (1-based).
pub fn config(k: usize) -> Result<ProblemConfig> {
    let cfg = match k {
        1 => ProblemConfig {
            name: Some("example1".into()),
            alphas: alphas(&[&["1/4", "1/4"], &["1/4", "1/4"]]),
            forcing_from_exact: false,
            kernels: vec![
                kernel(1, 2, "1/Gamma(1/4)".into()),
                kernel(2, 1, "-1/Gamma(1/4)".into()),
                kernel(2, 2, "-1/Gamma(1/4)".into()),
            ],
            forcing: vec![comp(
                2,
                vec![
                    (4, "5*sqrt(2)*pi/(16*Gamma(3/4))".into()),
                    (5, 1.0.into()),
                    (6, "Gamma(9/4)/Gamma(5/2)".into()),
                ],
                vec![],
            )],
            exact: vec![
                comp(1, vec![(5, 1.0.into())], vec![]),
                comp(2, vec![(4, "5*sqrt(2)*pi/(16*Gamma(3/4))".into())], vec![]),
            ],
        },
        2 => ProblemConfig {
            name: Some("example2".into()),
            alphas: alphas(&[&["4/5", "3/5"], &["2/5", "1/5"]]),
            forcing_from_exact: false,
            kernels: (1..=2)
                .flat_map(|i| (1..=2).map(move |j| kernel(i, j, 1.0.into())))
                .collect(),
            forcing: vec![
                comp(
                    1,
                    vec![
                        (5, 1.0.into()),
                        (10, 1.0.into()),
                        (14, "-25*130/6552".into()),
                        (9, "-25*182/6552".into()),
                        (13, "25*210/6552".into()),
                        (8, "-25*273/6552".into()),
                    ],
                    vec![],
                ),
                comp(
                    2,
                    vec![
                        (5, 1.0.into()),
                        (10, (-1.0).into()),
                        (12, "-25*55/924".into()),
                        (7, "-25*66/924".into()),
                        (11, "25*140/924".into()),
                        (6, "-25*154/924".into()),
                    ],
                    vec![],
                ),
            ],
            exact: vec![
                comp(1, vec![(5, 1.0.into()), (10, 1.0.into())], vec![]),
                comp(2, vec![(5, 1.0.into()), (10, (-1.0).into())], vec![]),
            ],
        },
        3 => ProblemConfig {
            name: Some("example3".into()),
            alphas: alphas(&[&["1/4", "3/4"], &["1/4", "2/4"]]),
            forcing_from_exact: true,
            kernels: (1..=2)
                .flat_map(|i| (1..=2).map(move |j| kernel(i, j, 1.0.into())))
                .collect(),
            forcing: vec![],
            exact: vec![
                comp(1, vec![], vec![("arctan_sqrt", 1.0.into())]),
                comp(2, vec![(3, 1.0.into())], vec![]),
            ],
        },
        4 => ProblemConfig {
            name: Some("example4".into()),
            alphas: alphas(&[&["1/2", "1/2"], &["1/2", "1/2"]]),
            forcing_from_exact: false,
            kernels: vec![
                kernel(1, 1, (-1.0).into()),
                kernel(1, 2, (-1.0).into()),
                kernel(2, 1, 1.0.into()),
            ],
            forcing: vec![
                comp(1, vec![(1, 2.0.into()), (2, "pi/2".into())], vec![]),
                comp(
                    2,
                    vec![(0, 1.0.into()), (1, (-1.0).into())],
                    vec![("erfc_exp_pi", (-1.0).into())],
                ),
            ],
            exact: vec![
                comp(1, vec![(0, 1.0.into())], vec![("erfc_exp_pi", (-1.0).into())]),
                comp(2, vec![(1, 1.0.into())], vec![]),
            ],
        },
        _ => {
            return Err(Error::Config(format!(
                "no built-in example {k} (choose 1..={COUNT})"
            )))
        }
    };
    Ok(cfg)
}

/// Built-in example `k` as a validated problem.
pub fn example(k: usize) -> Result<Problem> {
    config(k)?.to_problem()
}
