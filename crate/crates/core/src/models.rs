//! The model equations: linear phase symbols, mass symbols and nonlinear terms.
//!
//! First-order models are written in Fourier space as
//!
//! ```text
//! v̂_t = −i Λ(k, l) v̂ − (μ/3) i k (v³)^ / mass(k, l)
//! ```
//!
//! with `v` the strain. The parent nonlocal equation is second order in time
//! and is handled separately as the system `(w, w_t)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::spectral::{Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelTag {
    ParentNonlocal,
    CubicKP,
    WhithamFDKP,
    BBMFDKP,
    SimplifiedWhithamKP,
    WhithamKPLocal,
    BBMKP,
    MKdV,
    CubicBBM,
    ModifiedWhitham,
    ModFornbergWhitham,
    FornbergWhitham2D,
}

impl ModelTag {
    pub const ALL: [ModelTag; 12] = [
        ModelTag::ParentNonlocal,
        ModelTag::CubicKP,
        ModelTag::WhithamFDKP,
        ModelTag::BBMFDKP,
        ModelTag::SimplifiedWhithamKP,
        ModelTag::WhithamKPLocal,
        ModelTag::BBMKP,
        ModelTag::MKdV,
        ModelTag::CubicBBM,
        ModelTag::ModifiedWhitham,
        ModelTag::ModFornbergWhitham,
        ModelTag::FornbergWhitham2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::ParentNonlocal => "parent_nonlocal",
            ModelTag::CubicKP => "cubic_kp",
            ModelTag::WhithamFDKP => "whitham_fdkp",
            ModelTag::BBMFDKP => "bbm_fdkp",
            ModelTag::SimplifiedWhithamKP => "simplified_whitham_kp",
            ModelTag::WhithamKPLocal => "whitham_kp_local",
            ModelTag::BBMKP => "bbm_kp",
            ModelTag::MKdV => "mkdv",
            ModelTag::CubicBBM => "cubic_bbm",
            ModelTag::ModifiedWhitham => "modified_whitham",
            ModelTag::ModFornbergWhitham => "mod_fornberg_whitham",
            ModelTag::FornbergWhitham2D => "fornberg_whitham_2d",
        }
    }

    pub fn is_first_order(self) -> bool {
        self != ModelTag::ParentNonlocal
    }

    /// Models carrying a `D_x⁻¹ ∂_y²` term, which require zero-mass data.
    pub fn is_kp_family(self) -> bool {
        matches!(
            self,
            ModelTag::CubicKP
                | ModelTag::SimplifiedWhithamKP
                | ModelTag::WhithamKPLocal
                | ModelTag::BBMKP
                | ModelTag::FornbergWhitham2D
        )
    }

    /// Models whose linear part has a mass (left) operator.
    pub fn is_bbm_family(self) -> bool {
        matches!(self, ModelTag::BBMFDKP | ModelTag::BBMKP | ModelTag::CubicBBM)
    }

    pub fn projection(self) -> Projection {
        match self {
            t if t.is_kp_family() => Projection::ZeroMass,
            ModelTag::WhithamFDKP | ModelTag::BBMFDKP => Projection::SingularRay,
            _ => Projection::None,
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model tag '{s}'")))
    }
}

/// Which `k = 0` modes a model removes from its data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    None,
    /// Every mode with `k = 0`.
    ZeroMass,
    /// Only the modes `k = 0, l ≠ 0`, where the transport symbol is singular.
    SingularRay,
}

impl Projection {
    pub fn apply(self, grid: &Grid, spec: &mut [Complex64]) {
        let nx = grid.nx();
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Projection::None => {}
            Projection::ZeroMass => spec.chunks_mut(nx).for_each(|row| row[0] = zero),
            Projection::SingularRay => spec.chunks_mut(nx).skip(1).for_each(|row| row[0] = zero),
        }
    }
}

/// The transport operator `L` of the Whitham-type full dispersion models.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TransportOperator {
    /// `p = [(1 + l²/k²) β̂]^{1/2}`.
    #[default]
    Full,
    /// The long-wave operator `1 + D_y²/(2D_x²) + ν D_x²`, symbol
    /// `1 + l²/(2k²) − νk²`, for which the Whitham-type model reduces to
    /// the cubic KP equation.
    KpSpecial,
}

/// `(k + l²/(2k))`, with the `l²/(2k)` part taken as 0 on `k = 0`.
fn kp_transport(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k + l * l / (2.0 * k)
    }
}

/// `k − νk³ + l²/(2k)`.
fn kp_phase(k: f64, l: f64, nu: f64) -> f64 {
    let transverse = if k == 0.0 { 0.0 } else { l * l / (2.0 * k) };
    k - nu * k * k * k + transverse
}

/// A model equation with its coefficients.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub tag: ModelTag,
    pub kernel: KernelSpec,
    pub mu: f64,
    pub nu: f64,
    pub transport: TransportOperator,
}

impl ModelSpec {
    /// A model with `ν` derived from the kernel.
    pub fn new(tag: ModelTag, kernel: KernelSpec, mu: f64) -> Result<Self> {
        let nu = kernel.nu_coefficient();
        ModelSpec {
            tag,
            kernel,
            mu,
            nu,
            transport: TransportOperator::Full,
        }
        .validated()
    }

    /// Replaces the dispersion coefficient.
    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = nu;
        self.validated()
    }

    pub fn with_transport(mut self, transport: TransportOperator) -> Result<Self> {
        self.transport = transport;
        self.validated()
    }

    fn uses_nu(&self) -> bool {
        matches!(
            self.tag,
            ModelTag::CubicKP
                | ModelTag::WhithamKPLocal
                | ModelTag::BBMKP
                | ModelTag::MKdV
                | ModelTag::CubicBBM
        ) || self.transport == TransportOperator::KpSpecial
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if self.uses_nu() && !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nu = {} must be positive for {}",
                self.nu, self.tag
            )));
        }
        if self.transport == TransportOperator::KpSpecial && self.tag != ModelTag::WhithamFDKP {
            return Err(Error::InvalidParameter(format!(
                "the KP transport operator only applies to {}",
                ModelTag::WhithamFDKP
            )));
        }
        Ok(self)
    }

    /// Symbol of the transport operator `L` of the Whitham-type model.
    pub fn transport_symbol(&self, k: f64, l: f64) -> Result<f64> {
        match self.transport {
            TransportOperator::Full => self.kernel.p_symbol(k, l),
            TransportOperator::KpSpecial => {
                if k == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(kp_phase(k, l, self.nu) / k)
                }
            }
        }
    }

    /// `Λ(k, l)` such that the linear part reads `v̂_t = −iΛ v̂`.
    pub fn linear_phase_symbol(&self, k: f64, l: f64) -> Result<f64> {
        let nu = self.nu;
        let value = match self.tag {
            ModelTag::ParentNonlocal => {
                return Err(Error::WrongModelOrder(self.tag.to_string()));
            }
            ModelTag::CubicKP => kp_phase(k, l, nu),
            ModelTag::WhithamFDKP | ModelTag::BBMFDKP => match self.transport {
                TransportOperator::KpSpecial => kp_phase(k, l, nu),
                TransportOperator::Full => k * self.kernel.p_symbol(k, l)?,
            },
            ModelTag::SimplifiedWhithamKP => (1.0 - 0.5 * self.kernel.m_symbol(k, l)?) * kp_transport(k, l),
            ModelTag::WhithamKPLocal => (1.0 - nu * k * k) * kp_transport(k, l),
            ModelTag::BBMKP => kp_transport(k, l) / (1.0 + nu * k * k),
            ModelTag::MKdV => k - nu * k * k * k,
            ModelTag::CubicBBM => k / (1.0 + nu * k * k),
            ModelTag::ModifiedWhitham => {
                let b = self.kernel.beta_hat(k, 0.0);
                if b < 0.0 {
                    return Err(Error::NonPositiveSymbol { k, l: 0.0, value: b });
                }
                k * b.sqrt()
            }
            ModelTag::ModFornbergWhitham => k / (1.0 + k * k),
            ModelTag::FornbergWhitham2D => kp_transport(k, l) / (1.0 + k * k),
        };
        Ok(value)
    }

    /// Symbol of the mass operator acting on `v_t`; the nonlinear term is
    /// divided by it. It is 1 for models without a mass operator.
    pub fn mass_symbol(&self, k: f64, l: f64) -> Result<f64> {
        Ok(match self.tag {
            ModelTag::ParentNonlocal => 1.0 + self.kernel.m_symbol(k, l)?,
            ModelTag::BBMFDKP => (1.0 + self.kernel.m_symbol(k, l)?).sqrt(),
            ModelTag::BBMKP | ModelTag::CubicBBM => 1.0 + self.nu * k * k,
            _ => 1.0,
        })
    }

    /// Quadratic energy density symbol `mass · Λ / k`; 1 at the origin and
    /// 0 on the rest of the `k = 0` ray.
    pub fn energy_symbol(&self, k: f64, l: f64) -> Result<f64> {
        if k == 0.0 {
            return Ok(if l == 0.0 { 1.0 } else { 0.0 });
        }
        Ok(self.mass_symbol(k, l)? * self.linear_phase_symbol(k, l)? / k)
    }

    /// `(mass, stiffness) = (1 + m, k² + l²)` of the parent equation.
    pub fn parent_symbols(&self, k: f64, l: f64) -> Result<(f64, f64)> {
        if self.tag != ModelTag::ParentNonlocal {
            return Err(Error::InvalidParameter(format!(
                "{} is not the parent nonlocal equation",
                self.tag
            )));
        }
        Ok((1.0 + self.kernel.m_symbol(k, l)?, k * k + l * l))
    }

    /// Nonlinear contribution to `v_t` (or to `w_tt` for the parent equation).
    pub fn nonlinear_flux(&self, v: &mut SpectralField) -> Result<SpectralField> {
        let grid = v.grid().clone();
        let eval = Evaluator::new(self, &grid)?;
        let out = if self.tag.is_first_order() {
            eval.nonlinear(v.spectral())
        } else {
            eval.parent_nonlinear(v.spectral())
        };
        Ok(SpectralField::from_spectral(&grid, out))
    }

    /// Semi-discrete time derivative of `v` for a first-order model.
    pub fn rhs(&self, v: &mut SpectralField) -> Result<SpectralField> {
        if !self.tag.is_first_order() {
            return Err(Error::WrongModelOrder(self.tag.to_string()));
        }
        let grid = v.grid().clone();
        let eval = Evaluator::new(self, &grid)?;
        let out = eval.rhs(&[v.spectral().to_vec()]).remove(0);
        Ok(SpectralField::from_spectral(&grid, out))
    }
}

struct ParentTables {
    beta: Vec<f64>,
    stiffness: Vec<f64>,
    dx: Vec<Complex64>,
    dy: Vec<Complex64>,
}

/// Symbol tables of a model on a particular grid.
///
/// Building one is the expensive part; evaluating right-hand sides afterwards
/// only touches the tables and the transforms.
pub struct Evaluator {
    model: ModelSpec,
    grid: Grid,
    phase: Vec<f64>,
    flux: Vec<Complex64>,
    parent: Option<ParentTables>,
}

impl Evaluator {
    pub fn new(model: &ModelSpec, grid: &Grid) -> Result<Self> {
        model.kernel.check_positive_on(grid.kx(), grid.ky())?;
        let nan_on_err = |r: Result<f64>| r.unwrap_or(f64::NAN);
        let (phase, flux, parent) = if model.tag.is_first_order() {
            let phase = grid.real_symbol_table(|k, l| nan_on_err(model.linear_phase_symbol(k, l)))?;
            let c = model.mu / 3.0;
            let flux = grid.symbol_table(|k, l| {
                let mass = nan_on_err(model.mass_symbol(k, l));
                Complex64::new(0.0, -c * k / mass)
            })?;
            (phase, flux, None)
        } else {
            let beta = grid.real_symbol_table(|k, l| model.kernel.beta_hat(k, l))?;
            let stiffness = grid.real_symbol_table(|k, l| k * k + l * l)?;
            let dx = grid.symbol_table(|k, _| Complex64::new(0.0, k))?;
            let dy = grid.symbol_table(|_, l| Complex64::new(0.0, l))?;
            let tables = ParentTables {
                beta,
                stiffness,
                dx,
                dy,
            };
            (Vec::new(), Vec::new(), Some(tables))
        };
        Ok(Evaluator {
            model: model.clone(),
            grid: grid.clone(),
            phase,
            flux,
            parent,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of spectral arrays in the state: 1, or 2 for `(w, w_t)`.
    pub fn components(&self) -> usize {
        if self.model.tag.is_first_order() {
            1
        } else {
            2
        }
    }

    /// Table of `Λ` on the grid (empty for the parent equation).
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// `N(v̂) = −(μ/3) i k (v³)^ / mass`.
    pub fn nonlinear(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut cube = self.grid.cube_spectral(v);
        cube.iter_mut().zip(&self.flux).for_each(|(z, f)| *z *= f);
        cube
    }

    /// `β̂ · (2/3) μ · bracket^` for the parent equation, where the bracket is
    /// `(3w_x² + w_y²) w_xx + 4 w_x w_y w_xy + (w_x² + 3w_y²) w_yy`.
    pub fn parent_nonlinear(&self, w: &[Complex64]) -> Vec<Complex64> {
        let t = self.parent.as_ref().expect("parent tables");
        let deriv = |a: &[Complex64], b: &[Complex64]| -> Vec<f64> {
            let spec: Vec<Complex64> = w.iter().zip(a).zip(b).map(|((z, x), y)| z * x * y).collect();
            self.grid.to_padded_physical(&spec)
        };
        let one = vec![Complex64::new(1.0, 0.0); w.len()];
        let wx = deriv(&t.dx, &one);
        let wy = deriv(&t.dy, &one);
        let wxx = deriv(&t.dx, &t.dx);
        let wxy = deriv(&t.dx, &t.dy);
        let wyy = deriv(&t.dy, &t.dy);
        let bracket: Vec<f64> = (0..wx.len())
            .map(|n| {
                let (a, b) = (wx[n], wy[n]);
                (3.0 * a * a + b * b) * wxx[n] + 4.0 * a * b * wxy[n] + (a * a + 3.0 * b * b) * wyy[n]
            })
            .collect();
        let mut out = self.grid.from_padded_physical(&bracket);
        let c = 2.0 * self.model.mu / 3.0;
        out.iter_mut().zip(&t.beta).for_each(|(z, b)| *z *= c * b);
        out
    }

    /// Semi-discrete right-hand side for the state components.
    pub fn rhs(&self, state: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        match &self.parent {
            None => {
                let v = &state[0];
                let mut out = self.nonlinear(v);
                out.iter_mut()
                    .zip(v)
                    .zip(&self.phase)
                    .for_each(|((o, z), lam)| *o += Complex64::new(0.0, -lam) * z);
                vec![out]
            }
            Some(t) => {
                let (w, wt) = (&state[0], &state[1]);
                let mut acc = self.parent_nonlinear(w);
                acc.iter_mut()
                    .zip(w)
                    .zip(t.beta.iter().zip(&t.stiffness))
                    .for_each(|((a, z), (b, s))| *a -= z * (b * s));
                vec![wt.clone(), acc]
            }
        }
    }

    /// Applies the model's `k = 0` projection to a first-order state.
    pub fn project(&self, v: &mut [Complex64]) {
        self.model.tag.projection().apply(&self.grid, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RadialSymbol;
    use proptest::prelude::*;

    fn local(tag: ModelTag) -> ModelSpec {
        ModelSpec::new(tag, KernelSpec::GreenExponential, 6.0)
            .unwrap()
            .with_nu(1.0)
            .unwrap()
    }

    #[test]
    fn tag_names_round_trip() {
        for tag in ModelTag::ALL {
            assert_eq!(tag.name().parse::<ModelTag>().unwrap(), tag);
        }
        assert!("kdv".parse::<ModelTag>().is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(
            local(ModelTag::CubicKP).linear_phase_symbol(1.0, 0.0).unwrap(),
            0.0
        );
        assert_eq!(local(ModelTag::BBMKP).linear_phase_symbol(1.0, 0.0).unwrap(), 0.5);
        let unit = ModelSpec::new(
            ModelTag::WhithamFDKP,
            KernelSpec::CustomRadial(RadialSymbol::dirac()),
            1.0,
        )
        .unwrap();
        assert_eq!(unit.linear_phase_symbol(2.5, 0.0).unwrap(), 2.5);
        assert!(matches!(
            local(ModelTag::ParentNonlocal).linear_phase_symbol(1.0, 0.0),
            Err(Error::WrongModelOrder(_))
        ));
    }

    #[test]
    fn parent_examples() {
        let g = local(ModelTag::ParentNonlocal);
        assert_eq!(g.parent_symbols(0.0, 0.0).unwrap(), (1.0, 0.0));
        let (mass, stiff) = g.parent_symbols(1.0, 0.0).unwrap();
        assert_eq!((mass, stiff), (4.0, 1.0));
        assert_eq!((stiff / mass).sqrt(), 0.5);
    }

    #[test]
    fn nonpositive_mu_is_rejected() {
        assert!(ModelSpec::new(ModelTag::MKdV, KernelSpec::WhithamShallow, 0.0).is_err());
        assert!(local(ModelTag::MKdV).with_nu(-1.0).is_err());
        assert!(local(ModelTag::CubicKP)
            .with_transport(TransportOperator::KpSpecial)
            .is_err());
    }

    #[test]
    fn zero_field_has_zero_rhs() {
        let grid = Grid::new(16, 8, 10.0, 10.0).unwrap();
        for tag in ModelTag::ALL {
            let model = local(tag);
            let mut v = SpectralField::zeros(&grid);
            let mut flux = model.nonlinear_flux(&mut v).unwrap();
            assert!(flux.max_abs() == 0.0, "{tag}");
        }
    }

    proptest! {
        #[test]
        fn phases_are_odd_in_k_and_even_in_l(k in 0.01f64..6.0, l in -6.0f64..6.0) {
            for tag in ModelTag::ALL.into_iter().filter(|t| t.is_first_order()) {
                for kernel in [KernelSpec::WhithamShallow, KernelSpec::GreenExponential] {
                    let m = ModelSpec::new(tag, kernel, 6.0).unwrap().with_nu(0.5).unwrap();
                    let a = m.linear_phase_symbol(k, l).unwrap();
                    prop_assert!((a + m.linear_phase_symbol(-k, l).unwrap()).abs() <= 1e-12 * a.abs().max(1.0));
                    prop_assert_eq!(a, m.linear_phase_symbol(k, -l).unwrap());
                }
            }
        }

        #[test]
        fn parent_frequency_matches_dispersion(k in -6.0f64..6.0, l in -6.0f64..6.0) {
            let m = ModelSpec::new(ModelTag::ParentNonlocal, KernelSpec::WhithamShallow, 1.0).unwrap();
            let (mass, stiff) = m.parent_symbols(k, l).unwrap();
            let b = m.kernel.beta_hat(k, l);
            let w2 = (k * k + l * l) * b;
            prop_assert!((w2 * mass - stiff * b * (1.0 + m.kernel.m_symbol(k, l).unwrap())).abs() <= 1e-14 * stiff.max(1.0));
        }
    }
}
