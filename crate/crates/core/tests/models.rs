use std::f64::consts::PI;

use num_complex::Complex64;

use fdkp_core::kernels::{omega, DispersionMode, DispersionQuery};
use fdkp_core::{Evaluator, Grid, KernelSpec, ModelSpec, ModelTag, SpectralField, TransportOperator};

fn grid() -> Grid {
    Grid::new(32, 16, 2.0 * PI * 4.0, 2.0 * PI * 2.0).unwrap()
}

fn model(tag: ModelTag, kernel: KernelSpec) -> ModelSpec {
    ModelSpec::new(tag, kernel, 6.0)
        .and_then(|m| m.with_nu(0.5))
        .unwrap()
}

/// `Λ(k, l)` written out independently for the local models.
fn local_phase(tag: ModelTag, k: f64, l: f64, nu: f64) -> f64 {
    let t = k + l * l / (2.0 * k);
    match tag {
        ModelTag::CubicKP => k - nu * k.powi(3) + l * l / (2.0 * k),
        ModelTag::WhithamKPLocal => (1.0 - nu * k * k) * t,
        ModelTag::BBMKP => t / (1.0 + nu * k * k),
        ModelTag::MKdV => k - nu * k.powi(3),
        ModelTag::CubicBBM => k / (1.0 + nu * k * k),
        ModelTag::ModFornbergWhitham => k / (1.0 + k * k),
        ModelTag::FornbergWhitham2D => t / (1.0 + k * k),
        _ => unreachable!(),
    }
}

#[test]
fn single_mode_right_hand_side_is_linear_phase() {
    let grid = grid();
    let tags = [
        ModelTag::CubicKP,
        ModelTag::WhithamKPLocal,
        ModelTag::BBMKP,
        ModelTag::MKdV,
        ModelTag::CubicBBM,
        ModelTag::ModFornbergWhitham,
        ModelTag::FornbergWhitham2D,
    ];
    let amplitude = 1e-7;
    for tag in tags {
        let m = model(tag, KernelSpec::WhithamShallow);
        let two_d = !matches!(
            tag,
            ModelTag::MKdV | ModelTag::CubicBBM | ModelTag::ModFornbergWhitham
        );
        let (i, j) = (3, if two_d { 2 } else { 0 });
        let idx = j * grid.nx() + i;
        let (k, l) = grid.wavenumber(idx);
        let mut v = SpectralField::from_fn(&grid, |x, y| amplitude * (k * x + l * y).cos());
        let v0 = v.spectral()[idx];
        let mut rhs = m.rhs(&mut v).unwrap();
        let expected = Complex64::new(0.0, -local_phase(tag, k, l, m.nu)) * v0;
        // the cubic term is O(amplitude³)
        assert!(
            (rhs.spectral()[idx] - expected).norm() < 1e-9 * v0.norm(),
            "{tag}"
        );
    }
}

#[test]
fn nonlocal_phase_matches_full_dispersion() {
    let grid = grid();
    for kernel in [KernelSpec::WhithamShallow, KernelSpec::GreenExponential] {
        let m = model(ModelTag::WhithamFDKP, kernel.clone());
        let eval = Evaluator::new(&m, &grid).unwrap();
        for idx in 0..grid.len() {
            let (k, l) = grid.wavenumber(idx);
            if k <= 0.0 {
                continue;
            }
            let w = omega(
                DispersionQuery {
                    mode: DispersionMode::Full,
                    k,
                    l,
                },
                &kernel,
                m.nu,
            )
            .unwrap();
            let direct = ((k * k + l * l) * kernel.beta_hat(k, l)).sqrt();
            assert!((eval.phase()[idx] - w).abs() <= 1e-12 * w.max(1.0));
            assert!((w - direct).abs() <= 1e-12 * w.max(1.0));
        }
    }
}

#[test]
fn special_transport_reduces_to_kp() {
    let grid = grid();
    let kp = model(ModelTag::CubicKP, KernelSpec::WhithamShallow);
    let special = model(ModelTag::WhithamFDKP, KernelSpec::WhithamShallow)
        .with_transport(TransportOperator::KpSpecial)
        .unwrap();
    let a = Evaluator::new(&kp, &grid).unwrap();
    let b = Evaluator::new(&special, &grid).unwrap();
    assert_eq!(a.phase(), b.phase());
}

#[test]
fn whitham_kernel_long_wave_coefficient() {
    // tanh(r)/r = 1 − r²/3 + …, so ν = 1/6
    let nu = KernelSpec::WhithamShallow.nu_coefficient();
    assert!((nu - 1.0 / 6.0).abs() < 1e-8, "{nu}");
    // 1/(1 + r²)² = 1 − 2r² + …, so ν = 1
    let nu = KernelSpec::GreenExponential.nu_coefficient();
    assert!((nu - 1.0).abs() < 1e-8, "{nu}");
}

#[test]
fn tags_round_trip_through_names() {
    for tag in ModelTag::ALL {
        assert_eq!(tag.name().parse::<ModelTag>().unwrap(), tag);
    }
    assert!("kdv".parse::<ModelTag>().is_err());
}

#[test]
fn parent_equation_has_no_first_order_rhs() {
    let grid = grid();
    let m = ModelSpec::new(ModelTag::ParentNonlocal, KernelSpec::WhithamShallow, 6.0).unwrap();
    let mut v = SpectralField::zeros(&grid);
    assert!(m.rhs(&mut v).is_err());
}
