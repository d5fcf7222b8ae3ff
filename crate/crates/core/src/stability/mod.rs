//! Transverse stability of line solitary waves.
//!
//! The long-wavelength analysis is reproduced three ways: the closed-form
//! first-order results ([`formulas`], checked by [`quadrature`]), a discrete
//! eigenvalue pencil for the linearized ordinary differential equations
//! ([`pencil`]) and growth rates measured from perturbed simulations
//! ([`growth`]).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::ModelTag;
use crate::waves::SolitonFamily;

pub mod formulas;
pub mod growth;
pub mod pencil;
pub mod quadrature;

pub use formulas::{omega1_squared, solvability_residual, PerturbationExpansion};
pub use growth::{measure_growth, BandRecorder, GrowthFit, GrowthSample};
pub use pencil::{
    build_pencil, fit_omega1, growth_rates, EigenPencil, GrowthSpectrum, Omega1Fit, PencilGrid,
};
pub use quadrature::{inner_product_table, inner_product_table_with, InnerProductEntry, InnerProductTable};

/// The two simplified local models whose line waves are analysed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityFamily {
    /// The simplified Whitham-type KP equation with local dispersion.
    Whitham,
    /// The simplified BBM-type KP equation.
    Bbm,
}

impl StabilityFamily {
    pub fn name(self) -> &'static str {
        match self {
            StabilityFamily::Whitham => "whitham",
            StabilityFamily::Bbm => "bbm",
        }
    }

    /// Inverse width `κ` of the line wave travelling at speed `c`.
    pub fn kappa(self, c: f64, nu: f64) -> Result<f64> {
        if !(c > 1.0) {
            return Err(Error::SubcriticalSpeed { c });
        }
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
        }
        Ok(match self {
            StabilityFamily::Whitham => ((c - 1.0) / nu).sqrt(),
            StabilityFamily::Bbm => ((c - 1.0) / (nu * c)).sqrt(),
        })
    }

    /// The time-dependent model whose linearization this family describes.
    pub fn model_tag(self) -> ModelTag {
        match self {
            StabilityFamily::Whitham => ModelTag::WhithamKPLocal,
            StabilityFamily::Bbm => ModelTag::BBMKP,
        }
    }

    pub fn soliton_family(self) -> SolitonFamily {
        match self {
            StabilityFamily::Whitham => SolitonFamily::Mkdv,
            StabilityFamily::Bbm => SolitonFamily::Bbm,
        }
    }
}

impl fmt::Display for StabilityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StabilityFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "whitham" => Ok(StabilityFamily::Whitham),
            "bbm" => Ok(StabilityFamily::Bbm),
            other => Err(Error::InvalidParameter(format!(
                "unknown stability family '{other}'"
            ))),
        }
    }
}
