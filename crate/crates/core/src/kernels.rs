//! Kernel symbols of the nonlocal medium and the multipliers derived from them.
//!
//! A kernel is described by its radial Fourier symbol `β̂(r)`, `r = √(k² + l²)`,
//! normalized so that `β̂(0) = 1`. Everything else in the crate (the mass
//! symbol `m`, the transport symbol `p`, the long-wave coefficient `ν`, the
//! dispersion relations) is derived from it here.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Below this radius `tanh(r)/r` is evaluated from its Taylor polynomial.
const TANH_SERIES_RADIUS: f64 = 1e-4;

/// Finite-difference step used for the long-wave coefficient.
const NU_STEP: f64 = 1e-3;

/// A user-supplied radial symbol `β̂₀(r)` with `β̂₀(0) = 1`.
#[derive(Clone)]
pub struct RadialSymbol {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RadialSymbol {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialSymbol {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The Dirac kernel, `β̂ ≡ 1`, which recovers local elasticity.
    pub fn dirac() -> Self {
        RadialSymbol::new("dirac", |_| 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }
}

impl fmt::Debug for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialSymbol").field("name", &self.name).finish()
    }
}

/// The nonlocal kernel, identified by its Fourier symbol.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    /// `β̂ = tanh(r)/r`.
    WhithamShallow,
    /// `β̂ = 1/(1 + r²)²`, i.e. `β̂^{1/2}` is the symbol of `(1 - Δ)^{-1}`.
    GreenExponential,
    /// A radial symbol registered programmatically.
    CustomRadial(RadialSymbol),
}

impl KernelSpec {
    pub fn family_name(&self) -> &str {
        match self {
            KernelSpec::WhithamShallow => "whitham_shallow",
            KernelSpec::GreenExponential => "green_exponential",
            KernelSpec::CustomRadial(_) => "custom",
        }
    }

    /// `β̂` as a function of the radial wavenumber.
    pub fn beta_hat_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            KernelSpec::WhithamShallow => {
                if r < TANH_SERIES_RADIUS {
                    let r2 = r * r;
                    1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 15.0 - 17.0 * r2 * r2 * r2 / 315.0
                } else {
                    r.tanh() / r
                }
            }
            KernelSpec::GreenExponential => {
                let s = 1.0 + r * r;
                1.0 / (s * s)
            }
            KernelSpec::CustomRadial(f) => f.eval(r),
        }
    }

    /// `β̂(k, l)`.
    pub fn beta_hat(&self, k: f64, l: f64) -> f64 {
        self.beta_hat_radial(k.hypot(l))
    }

    /// Symbol of `M`: `m = 1/β̂ − 1`.
    pub fn m_symbol(&self, k: f64, l: f64) -> Result<f64> {
        let b = self.beta_hat(k, l);
        if b > 0.0 {
            Ok(1.0 / b - 1.0)
        } else {
            Err(Error::NonPositiveSymbol { k, l, value: b })
        }
    }

    /// Symbol of the full dispersion transport operator,
    /// `p = [(1 + l²/k²) β̂]^{1/2}`.
    ///
    /// The ray `k = 0` is singular; there the value 0 is returned, which is
    /// consistent with zero-mass data.
    pub fn p_symbol(&self, k: f64, l: f64) -> Result<f64> {
        let b = self.beta_hat(k, l);
        if b < 0.0 {
            return Err(Error::NonPositiveSymbol { k, l, value: b });
        }
        if k == 0.0 {
            return Ok(0.0);
        }
        let ratio = l / k;
        Ok(((1.0 + ratio * ratio) * b).sqrt())
    }

    /// Long-wave dispersion coefficient `ν = −¼ ∂²β̂/∂k² (0, 0)`.
    ///
    /// Computed numerically for every family: central differences with steps
    /// `h` and `h/2` combined by one Richardson level.
    pub fn nu_coefficient(&self) -> f64 {
        let second = |h: f64| {
            (self.beta_hat(h, 0.0) - 2.0 * self.beta_hat(0.0, 0.0) + self.beta_hat(-h, 0.0)) / (h * h)
        };
        let coarse = second(NU_STEP);
        let fine = second(NU_STEP / 2.0);
        let curvature = (4.0 * fine - coarse) / 3.0;
        let nu = -0.25 * curvature;
        if nu <= 0.0 {
            log::warn!(
                "kernel {} has non-positive long-wave coefficient nu = {nu:e}",
                self.family_name()
            );
        }
        nu
    }

    /// Checks `β̂ > 0` on every wavenumber pair of a grid.
    pub fn check_positive_on(&self, kx: &[f64], ky: &[f64]) -> Result<()> {
        for &l in ky {
            for &k in kx {
                let b = self.beta_hat(k, l);
                if !(b > 0.0) {
                    return Err(Error::NonPositiveSymbol { k, l, value: b });
                }
            }
        }
        Ok(())
    }
}

/// Named custom kernels available to configuration files.
#[derive(Clone, Debug)]
pub struct KernelRegistry {
    symbols: HashMap<String, RadialSymbol>,
}

impl Default for KernelRegistry {
    fn default() -> Self {
        let mut registry = KernelRegistry {
            symbols: HashMap::new(),
        };
        registry.register(RadialSymbol::dirac());
        registry
    }
}

impl KernelRegistry {
    pub fn register(&mut self, symbol: RadialSymbol) {
        self.symbols.insert(symbol.name().to_string(), symbol);
    }

    pub fn get(&self, name: &str) -> Option<KernelSpec> {
        self.symbols.get(name).cloned().map(KernelSpec::CustomRadial)
    }

    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.symbols.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }
}

/// Which dispersion relation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DispersionMode {
    /// `ω = √((k² + l²) β̂)`.
    Full,
    /// Truncated long-wave expansion `ω = k (1 − νk² + l²/(2k²))`.
    KpLongWave,
}

#[derive(Clone, Copy, Debug)]
pub struct DispersionQuery {
    pub mode: DispersionMode,
    pub k: f64,
    pub l: f64,
}

/// Frequency of the right-going branch.
pub fn omega(query: DispersionQuery, kernel: &KernelSpec, nu: f64) -> Result<f64> {
    let DispersionQuery { mode, k, l } = query;
    match mode {
        DispersionMode::Full => {
            let b = kernel.beta_hat(k, l);
            if b < 0.0 {
                return Err(Error::NonPositiveSymbol { k, l, value: b });
            }
            Ok(((k * k + l * l) * b).sqrt())
        }
        DispersionMode::KpLongWave => {
            if k == 0.0 {
                return Err(Error::SingularLongWave { l });
            }
            Ok(k * (1.0 - nu * k * k + l * l / (2.0 * k * k)))
        }
    }
}
