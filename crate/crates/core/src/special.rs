//! Scalar special functions and the closed-form special profiles that the
//! built-in problems are expressed in.

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> (f64, i32) {
    libm::lgamma_r(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Euler Beta function for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a + b < 150.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        let (la, _) = ln_gamma_signed(a);
        let (lb, _) = ln_gamma_signed(b);
        let (lab, _) = ln_gamma_signed(a + b);
        (la + lb - lab).exp()
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Named non-polynomial profiles usable in forcing terms and exact solutions.
///
/// Each one is a power series in `t^(1/2)`, so it sits on the exponent
/// lattice of any problem whose `gamma` is even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Special {
    /// `arctan(sqrt(t))`
    ArctanSqrt,
    /// `exp(pi t) erfc(sqrt(pi t))`
    ErfcExpPi,
}

impl Special {
    pub const ALL: [Special; 2] = [Special::ArctanSqrt, Special::ErfcExpPi];

    pub fn name(self) -> &'static str {
        match self {
            Special::ArctanSqrt => "arctan_sqrt",
            Special::ErfcExpPi => "erfc_exp_pi",
        }
    }

    pub fn from_name(name: &str) -> Option<Special> {
        Special::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            Special::ArctanSqrt => t.sqrt().atan(),
            Special::ErfcExpPi => {
                let pt = std::f64::consts::PI * t;
                pt.exp() * erfc(pt.sqrt())
            }
        }
    }

    /// Coefficient of `t^(k/2)` in the Maclaurin expansion.
    pub fn half_power_coeff(self, k: usize) -> f64 {
        match self {
            // sum_m (-1)^m t^(m + 1/2) / (2m + 1)
            Special::ArctanSqrt => {
                if k % 2 == 0 {
                    0.0
                } else {
                    let m = (k - 1) / 2;
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sign / (2 * m + 1) as f64
                }
            }
            // exp(z^2) erfc(z) = sum_k (-z)^k / Γ(k/2 + 1), z = sqrt(pi t)
            Special::ErfcExpPi => {
                let (lg, _) = ln_gamma_signed(k as f64 / 2.0 + 1.0);
                let mag = (0.5 * k as f64 * std::f64::consts::PI.ln() - lg).exp();
                if k % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            }
        }
    }
}
