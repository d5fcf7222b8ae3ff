//! Line solitary waves `α sech(κ(x − x₀))` and their transverse perturbations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Projection};
use crate::spectral::{Grid, SpectralField};

/// Largest admissible value of the soliton at the domain edge.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolitonFamily {
    /// Solitary waves of the modified KdV equation, `κ² = (c − 1)/ν`.
    Mkdv,
    /// Solitary waves of the cubic BBM equation, `κ² = (c − 1)/(νc)`.
    Bbm,
}

impl SolitonFamily {
    pub fn name(self) -> &'static str {
        match self {
            SolitonFamily::Mkdv => "mkdv",
            SolitonFamily::Bbm => "bbm",
        }
    }
}

impl fmt::Display for SolitonFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolitonFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mkdv" => Ok(SolitonFamily::Mkdv),
            "bbm" => Ok(SolitonFamily::Bbm),
            _ => Err(Error::InvalidParameter(format!("unknown soliton family '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    pub family: SolitonFamily,
    pub c: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Amplitude and inverse width of the solitary wave travelling at speed `c`.
pub fn soliton_params(family: SolitonFamily, c: f64, mu: f64, nu: f64) -> Result<SolitonParams> {
    if !(c > 1.0) {
        return Err(Error::SubcriticalSpeed { c });
    }
    if !(mu > 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu = {mu} and nu = {nu} must be positive"
        )));
    }
    let alpha = (6.0 * (c - 1.0) / mu).sqrt();
    let kappa = match family {
        SolitonFamily::Mkdv => ((c - 1.0) / nu).sqrt(),
        SolitonFamily::Bbm => ((c - 1.0) / (nu * c)).sqrt(),
    };
    Ok(SolitonParams {
        family,
        c,
        mu,
        nu,
        alpha,
        kappa,
    })
}

impl SolitonParams {
    pub fn value(&self, xi: f64) -> f64 {
        self.alpha * profile::r(self.kappa, xi)
    }

    /// Smallest periodic domain on which the soliton tail is below
    /// [`TAIL_TOLERANCE`].
    pub fn required_length(&self) -> f64 {
        if self.alpha <= TAIL_TOLERANCE {
            return 0.0;
        }
        // α sech(κL/2) < tol  ⇔  L > 2 arcosh(α/tol)/κ
        2.0 * (self.alpha / TAIL_TOLERANCE).acosh() / self.kappa
    }

    fn check_domain(&self, lx: f64) -> Result<()> {
        if self.alpha * profile::r(self.kappa, lx / 2.0) >= TAIL_TOLERANCE {
            return Err(Error::DomainTooNarrow {
                length: lx,
                required: self.required_length(),
            });
        }
        Ok(())
    }
}

/// Signed distance from `x0` on a periodic interval of length `lx`, in `[−lx/2, lx/2)`.
pub fn periodic_offset(x: f64, x0: f64, lx: f64) -> f64 {
    (x - x0 + 0.5 * lx).rem_euclid(lx) - 0.5 * lx
}

/// A field together with the size of the `x`-mean removed by projection.
#[derive(Clone, Debug)]
pub struct InitialField {
    pub field: SpectralField,
    pub removed_mean: f64,
}

/// The `y`-uniform line soliton centred at `x0` (domain centre by default).
pub fn line_soliton_field(
    params: &SolitonParams,
    grid: &Grid,
    x0: Option<f64>,
    projection: Projection,
) -> Result<InitialField> {
    perturbed_soliton(params, grid, x0, None, projection)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationProfile {
    /// The translation mode `z₀ = a₀ R′`.
    Z0,
    /// The first-order correction `z₁` with `a₁ = 0`.
    Z1,
}

impl FromStr for PerturbationProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z0" => Ok(PerturbationProfile::Z0),
            "z1" => Ok(PerturbationProfile::Z1),
            _ => Err(Error::InvalidParameter(format!(
                "unknown perturbation profile '{s}'"
            ))),
        }
    }
}

/// A transverse perturbation `δ z(x − x₀) cos(λy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub lambda: f64,
    pub delta: f64,
    pub profile: PerturbationProfile,
}

/// Number of transverse periods `n` with `λ = 2πn/Ly`.
pub fn transverse_mode(grid: &Grid, lambda: f64) -> Result<usize> {
    let dk = 2.0 * PI / grid.ly();
    let n = lambda / dk;
    let rounded = n.round();
    if grid.is_1d() || rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::IncommensurateWavenumber { lambda, dk });
    }
    Ok(rounded as usize)
}

/// The line soliton plus an optional transverse perturbation, with the
/// requested `k = 0` projection applied.
pub fn perturbed_soliton(
    params: &SolitonParams,
    grid: &Grid,
    x0: Option<f64>,
    perturbation: Option<Perturbation>,
    projection: Projection,
) -> Result<InitialField> {
    params.check_domain(grid.lx())?;
    let lx = grid.lx();
    let x0 = x0.unwrap_or(0.5 * lx);
    let kappa = params.kappa;
    let offsets: Vec<f64> = (0..grid.nx())
        .map(|i| periodic_offset(grid.x(i), x0, lx))
        .collect();
    let base: Vec<f64> = offsets.iter().map(|&xi| params.value(xi)).collect();

    let mut samples = Vec::with_capacity(grid.len());
    match perturbation {
        Some(p) if p.delta != 0.0 => {
            transverse_mode(grid, p.lambda)?;
            let shape: Vec<f64> = match p.profile {
                PerturbationProfile::Z0 => offsets.iter().map(|&xi| profile::dr(kappa, xi)).collect(),
                PerturbationProfile::Z1 => offsets
                    .iter()
                    .map(|&xi| match params.family {
                        SolitonFamily::Mkdv => profile::z1_whitham(kappa, params.nu, 1.0, 1.0, xi),
                        SolitonFamily::Bbm => profile::z1_bbm(kappa, params.nu, params.c, 1.0, 1.0, xi),
                    })
                    .collect(),
            };
            let peak = shape.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if peak > 0.0 { p.delta / peak } else { 0.0 };
            for j in 0..grid.ny() {
                let wave = (p.lambda * grid.y(j)).cos();
                samples.extend(base.iter().zip(&shape).map(|(b, z)| b + scale * z * wave));
            }
        }
        _ => {
            for _ in 0..grid.ny() {
                samples.extend_from_slice(&base);
            }
        }
    }
    let mut field = SpectralField::from_real(grid, samples);
    let removed_mean = match projection {
        Projection::None => 0.0,
        _ => {
            let before: Vec<f64> = field
                .spectral()
                .iter()
                .step_by(grid.nx())
                .map(|z| z.norm())
                .collect();
            projection.apply(grid, field.spectral_mut());
            let after = field.spectral().iter().step_by(grid.nx()).map(|z| z.norm());
            before.iter().zip(after).map(|(b, a)| b - a).sum()
        }
    };
    if removed_mean > 0.0 {
        log::debug!("zero-mass projection removed an x-mean of {removed_mean:e}");
    }
    Ok(InitialField { field, removed_mean })
}

/// Largest pointwise residual of the travelling-wave ODE satisfied by the
/// normalized profile `R = sech(κξ)`, with derivatives taken spectrally on a
/// one-dimensional grid.
///
/// * mkdv: `R″ + κ²(2R² − 1)R`;
/// * bbm: `νcR″ + (1 − c)R + 2(c − 1)R³`, the once-integrated travelling form
///   of the cubic BBM equation divided by `α`.
pub fn profile_residual(params: &SolitonParams, grid: &Grid) -> Result<f64> {
    params.check_domain(grid.lx())?;
    let x0 = 0.5 * grid.lx();
    let kappa = params.kappa;
    let samples: Vec<f64> = (0..grid.nx())
        .map(|i| profile::r(kappa, periodic_offset(grid.x(i), x0, grid.lx())))
        .collect();
    let mut rf = SpectralField::from_real(grid, samples.repeat(grid.ny()));
    let mut rxx = SpectralField::from_spectral(grid, rf.spectral().to_vec());
    rxx.apply_real_multiplier(|k, _| -k * k)?;
    let r = rf.real();
    let d2 = rxx.real();
    let (c, nu) = (params.c, params.nu);
    let residual = r.iter().zip(d2).map(|(&r, &d2)| match params.family {
        SolitonFamily::Mkdv => d2 + kappa * kappa * (2.0 * r * r - 1.0) * r,
        SolitonFamily::Bbm => nu * c * d2 + (1.0 - c) * r + 2.0 * (c - 1.0) * r * r * r,
    });
    Ok(residual.fold(0.0, |m, v| m.max(v.abs())))
}

/// Largest pointwise value of `v_t + c v_x` for the soliton under `model`,
/// i.e. how far the semi-discrete system is from carrying the wave at speed
/// `c` unchanged.
pub fn traveling_residual(model: &ModelSpec, params: &SolitonParams, grid: &Grid) -> Result<f64> {
    let mut v = line_soliton_field(params, grid, None, Projection::None)?.field;
    let mut rhs = model.rhs(&mut v)?;
    let mut vx = SpectralField::from_spectral(grid, v.spectral().to_vec());
    vx.apply_multiplier(|k, _| num_complex::Complex64::new(0.0, k))?;
    let c = params.c;
    let total: Vec<f64> = rhs.real().iter().zip(vx.real()).map(|(a, b)| a + c * b).collect();
    Ok(total.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// The profile `R(ξ) = sech(κξ)`, its derivatives and the functions built
/// from it in the perturbation expansion.
pub mod profile {
    /// Below this `|κξ|` the `coth(κξ)` products are evaluated from series.
    pub const SERIES_RADIUS: f64 = 1e-3;

    fn sech(u: f64) -> f64 {
        1.0 / u.cosh()
    }

    pub fn r(kappa: f64, xi: f64) -> f64 {
        sech(kappa * xi)
    }

    pub fn dr(kappa: f64, xi: f64) -> f64 {
        let u = kappa * xi;
        -kappa * sech(u) * u.tanh()
    }

    pub fn d2r(kappa: f64, xi: f64) -> f64 {
        let s = sech(kappa * xi);
        kappa * kappa * s * (1.0 - 2.0 * s * s)
    }

    pub fn d3r(kappa: f64, xi: f64) -> f64 {
        let u = kappa * xi;
        let s = sech(u);
        kappa.powi(3) * s * u.tanh() * (6.0 * s * s - 1.0)
    }

    /// Antiderivative `r` with `r′ = R`, odd in `ξ`.
    pub fn antiderivative(kappa: f64, xi: f64) -> f64 {
        (kappa * xi).sinh().atan() / kappa
    }

    /// `u coth u` and its derivative, for small `u`.
    fn u_coth_series(u: f64) -> (f64, f64) {
        let u2 = u * u;
        let value = 1.0 + u2 / 3.0 - u2 * u2 / 45.0 + 2.0 * u2.powi(3) / 945.0 - u2.powi(4) / 4725.0;
        let slope = u * (2.0 / 3.0 - 4.0 * u2 / 45.0 + 12.0 * u2 * u2 / 945.0 - 8.0 * u2.powi(3) / 4725.0);
        (value, slope)
    }

    /// `tanh(u)/u` and its derivative, for small `u`.
    fn tanh_over_u_series(u: f64) -> (f64, f64) {
        let u2 = u * u;
        let value =
            1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 15.0 - 17.0 * u2.powi(3) / 315.0 + 62.0 * u2.powi(4) / 2835.0;
        let slope =
            u * (-2.0 / 3.0 + 8.0 * u2 / 15.0 - 102.0 * u2 * u2 / 315.0 + 496.0 * u2.powi(3) / 2835.0);
        (value, slope)
    }

    /// `R′(ξ) coth(κξ)`, finite at `ξ = 0` where it equals `−κ`.
    pub fn coth_dr(kappa: f64, xi: f64) -> f64 {
        let u = kappa * xi;
        if u.abs() < SERIES_RADIUS {
            // R′ coth = −κ sech(u) · (tanh u / u) · (u coth u)
            let (a, _) = tanh_over_u_series(u);
            let (b, _) = u_coth_series(u);
            -kappa * sech(u) * a * b
        } else {
            dr(kappa, xi) / u.tanh()
        }
    }

    /// `d/dξ [R′(ξ) coth(κξ)]`.
    pub fn coth_dr_prime(kappa: f64, xi: f64) -> f64 {
        let u = kappa * xi;
        if u.abs() < SERIES_RADIUS {
            let (a, da) = tanh_over_u_series(u);
            let (b, db) = u_coth_series(u);
            let s = sech(u);
            // d/du [−κ sech(u) a(u) b(u)], times κ
            -kappa * kappa * (-s * u.tanh() * a * b + s * (da * b + a * db))
        } else {
            let csch = 1.0 / u.sinh();
            -kappa * csch * csch * dr(kappa, xi) + d2r(kappa, xi) / u.tanh()
        }
    }

    /// `z₁` of the Whitham-type expansion with `a₁ = 0`:
    /// `−Ω₁a₀/(2κ³ν) (κξ − coth κξ) R′`.
    pub fn z1_whitham(kappa: f64, nu: f64, omega1: f64, a0: f64, xi: f64) -> f64 {
        let c = -omega1 * a0 / (2.0 * kappa.powi(3) * nu);
        c * (kappa * xi * dr(kappa, xi) - coth_dr(kappa, xi))
    }

    pub fn z1_whitham_prime(kappa: f64, nu: f64, omega1: f64, a0: f64, xi: f64) -> f64 {
        let c = -omega1 * a0 / (2.0 * kappa.powi(3) * nu);
        c * (kappa * dr(kappa, xi) + kappa * xi * d2r(kappa, xi) - coth_dr_prime(kappa, xi))
    }

    /// `z₁` of the BBM-type expansion with `a₁ = 0`:
    /// `Ω₁a₀(κ²ν − 1)/(2κ²νc) ξR′ + Ω₁a₀/(2κ³νc) R′ coth κξ`.
    pub fn z1_bbm(kappa: f64, nu: f64, c: f64, omega1: f64, a0: f64, xi: f64) -> f64 {
        let (p, q) = z1_bbm_coefficients(kappa, nu, c, omega1, a0);
        p * xi * dr(kappa, xi) + q * coth_dr(kappa, xi)
    }

    pub fn z1_bbm_prime(kappa: f64, nu: f64, c: f64, omega1: f64, a0: f64, xi: f64) -> f64 {
        let (p, q) = z1_bbm_coefficients(kappa, nu, c, omega1, a0);
        p * (dr(kappa, xi) + xi * d2r(kappa, xi)) + q * coth_dr_prime(kappa, xi)
    }

    fn z1_bbm_coefficients(kappa: f64, nu: f64, c: f64, omega1: f64, a0: f64) -> (f64, f64) {
        let k2 = kappa * kappa;
        (
            omega1 * a0 * (k2 * nu - 1.0) / (2.0 * k2 * nu * c),
            omega1 * a0 / (2.0 * k2 * kappa * nu * c),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parameter_examples() {
        let p = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
        assert_eq!((p.alpha, p.kappa), (1.0, 1.0));
        let b = soliton_params(SolitonFamily::Bbm, 2.0, 6.0, 1.0).unwrap();
        assert_eq!(b.alpha, 1.0);
        assert!((b.kappa - 0.5f64.sqrt()).abs() < 1e-16);
        let near = soliton_params(SolitonFamily::Mkdv, 1.0 + 1e-12, 6.0, 1.0).unwrap();
        assert!(near.alpha < 1e-5 && near.kappa < 1e-5);
        assert!(matches!(
            soliton_params(SolitonFamily::Mkdv, 1.0, 6.0, 1.0),
            Err(Error::SubcriticalSpeed { .. })
        ));
    }

    #[test]
    fn domain_width_rule() {
        let p = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
        let wide = Grid::new_1d(256, 80.0).unwrap();
        assert!(line_soliton_field(&p, &wide, None, Projection::None).is_ok());
        let narrow = Grid::new_1d(256, 20.0).unwrap();
        assert!(matches!(
            line_soliton_field(&p, &narrow, None, Projection::None),
            Err(Error::DomainTooNarrow { .. })
        ));
        assert!(p.required_length() > 20.0 && p.required_length() < 80.0);
    }

    #[test]
    fn commensurability() {
        let g = Grid::new(16, 8, 80.0, 20.0 * PI).unwrap();
        assert_eq!(transverse_mode(&g, 0.1).unwrap(), 1);
        assert_eq!(transverse_mode(&g, 0.3).unwrap(), 3);
        assert!(transverse_mode(&g, 0.15).is_err());
        assert!(transverse_mode(&g, 0.0).is_err());
    }

    #[test]
    fn z0_seed_has_unit_profile() {
        let p = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
        let g = Grid::new(512, 8, 80.0, 20.0 * PI).unwrap();
        let pert = Perturbation {
            lambda: 0.1,
            delta: 1e-3,
            profile: PerturbationProfile::Z0,
        };
        let mut seeded = perturbed_soliton(&p, &g, None, Some(pert), Projection::None)
            .unwrap()
            .field;
        let mut plain = line_soliton_field(&p, &g, None, Projection::None).unwrap().field;
        let (a, b) = (seeded.real().to_vec(), plain.real().to_vec());
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let xi = g.x(i) - 40.0;
                let expect = -2.0 * xi.tanh() / xi.cosh() * (0.1 * g.y(j)).cos();
                let got = (a[j * 512 + i] - b[j * 512 + i]) / 1e-3;
                // the grid maximum of sech·tanh sits slightly below 1/2
                assert!((got - expect).abs() < 5e-3, "{got} {expect}");
            }
        }
        let zero = Perturbation { delta: 0.0, ..pert };
        let mut same = perturbed_soliton(&p, &g, None, Some(zero), Projection::None)
            .unwrap()
            .field;
        assert_eq!(same.real(), plain.real());
    }

    #[test]
    fn projection_reports_soliton_mean() {
        let p = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
        let g = Grid::new(512, 4, 80.0, 10.0).unwrap();
        let init = line_soliton_field(&p, &g, None, Projection::ZeroMass).unwrap();
        // mean of sech over the period is π/(κ Lx)
        assert!((init.removed_mean - PI / 80.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_identities() {
        let k = 1.3;
        for &xi in &[-3.0, -0.2, 0.0, 0.5, 2.0] {
            // coth(κξ) R′ = −κ R
            assert!((profile::coth_dr(k, xi) + k * profile::r(k, xi)).abs() < 1e-14);
            assert!((profile::coth_dr_prime(k, xi) + k * profile::dr(k, xi)).abs() < 1e-12);
        }
        // (κξ − coth κξ) R′ → κ at the origin
        let z1_at_origin = profile::z1_whitham(k, 1.0, 1.0, 1.0, 0.0);
        assert!((z1_at_origin + k / (2.0 * k.powi(3))).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn z1_is_continuous_through_origin(xi in -1e-2f64..1e-2) {
            let k = 0.9;
            let f = |x: f64| profile::z1_whitham(k, 1.0, 1.0, 1.0, x);
            let g = |x: f64| profile::coth_dr(k, x);
            let h = 1e-9;
            prop_assert!((f(xi + h) - f(xi)).abs() < 1e-8);
            prop_assert!((g(xi + h) - g(xi)).abs() < 1e-8);
        }
    }
}
