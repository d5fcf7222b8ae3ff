//! Closed-form results of the long-wavelength expansion `Ω = Ω₁λ + Ω₂λ² + …`.

use super::StabilityFamily;
use crate::error::{Error, Result};
use crate::waves::profile;

/// `Ω₁²` fixed by the second-order solvability condition.
///
/// Whitham: `(2/3)(c − 1)(c − 4)`, unstable for `c > 4`.
/// BBM: `−6c²(c − 1)/(4(2c + 1)(c − 1) + 3)`, negative for every `c > 1`.
pub fn omega1_squared(family: StabilityFamily, c: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::SubcriticalSpeed { c });
    }
    Ok(match family {
        StabilityFamily::Whitham => 2.0 / 3.0 * (c - 1.0) * (c - 4.0),
        StabilityFamily::Bbm => -6.0 * c * c * (c - 1.0) / (4.0 * (2.0 * c + 1.0) * (c - 1.0) + 3.0),
    })
}

/// Right side of the solvability condition with `a₀ = 1`, evaluated at a
/// trial `Ω₁²`. It vanishes exactly when the trial value is the one returned
/// by [`omega1_squared`] (for `ν` consistent with `κ`).
///
/// The condition only involves `Ω₁²`, so the square is taken as input; this
/// also covers the BBM case where `Ω₁` is imaginary.
pub fn solvability_residual(family: StabilityFamily, c: f64, nu: f64, omega1_sq: f64) -> Result<f64> {
    let kappa = family.kappa(c, nu)?;
    Ok(match family {
        StabilityFamily::Whitham => {
            kappa / 3.0 - omega1_sq / (2.0 * kappa.powi(3) * nu * nu) - 1.0 / (kappa * nu)
        }
        StabilityFamily::Bbm => {
            let k2nu = kappa * kappa * nu;
            omega1_sq * (k2nu - 3.0) / (6.0 * kappa * nu * c * c)
                - omega1_sq * (k2nu + 1.0) / (2.0 * kappa.powi(3) * nu * nu * c * c)
                - 1.0 / (kappa * nu * c)
        }
    })
}

/// The first two terms of the eigenfunction expansion `z = z₀ + λz₁ + …`
/// around a line wave of speed `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationExpansion {
    pub family: StabilityFamily,
    pub c: f64,
    pub nu: f64,
    pub kappa: f64,
    pub a0: f64,
    /// Coefficient of the translation mode in `z₁`; it drops out of every
    /// solvability integral.
    pub a1: f64,
    pub omega1_sq: f64,
}

impl PerturbationExpansion {
    pub fn new(family: StabilityFamily, c: f64, nu: f64) -> Result<Self> {
        Ok(PerturbationExpansion {
            family,
            c,
            nu,
            kappa: family.kappa(c, nu)?,
            a0: 1.0,
            a1: 0.0,
            omega1_sq: omega1_squared(family, c)?,
        })
    }

    /// True when the first-order rate `Ω₁` is real and positive.
    pub fn is_unstable(&self) -> bool {
        self.omega1_sq > 0.0
    }

    /// `z₀ = a₀R′`.
    pub fn z0(&self, xi: f64) -> f64 {
        self.a0 * profile::dr(self.kappa, xi)
    }

    /// `z₁` for a given branch of `Ω₁`.
    pub fn z1(&self, omega1: f64, xi: f64) -> f64 {
        let k = self.kappa;
        let shift = self.a1 * profile::dr(k, xi);
        shift
            + match self.family {
                StabilityFamily::Whitham => profile::z1_whitham(k, self.nu, omega1, self.a0, xi),
                StabilityFamily::Bbm => profile::z1_bbm(k, self.nu, self.c, omega1, self.a0, xi),
            }
    }
}
