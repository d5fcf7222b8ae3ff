use std::f64::consts::PI;
use std::ops::ControlFlow;

use fdkp_core::solver::{
    run, step, InvariantMonitor, Monitor, Observation, Scheme, SnapshotWriter, State, StepperConfig,
    MONITOR_COLUMNS,
};
use fdkp_core::spectral::snapshot::read_snapshot;
use fdkp_core::waves::{line_soliton_field, soliton_params, SolitonFamily};
use fdkp_core::{Grid, KernelSpec, ModelSpec, ModelTag, Projection, SpectralField};

fn model(tag: ModelTag) -> ModelSpec {
    ModelSpec::new(tag, KernelSpec::WhithamShallow, 6.0)
        .and_then(|m| m.with_nu(1.0))
        .unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn one_step_translates_mkdv_soliton() {
    let grid = Grid::new_1d(512, 80.0).unwrap();
    let m = model(ModelTag::MKdV);
    let params = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
    let mut v = line_soliton_field(&params, &grid, None, Projection::None)
        .unwrap()
        .field;
    let dt = 1e-3;
    let mut next = step(&m, &mut v, dt, Scheme::Etdrk4).unwrap();
    let exact = line_soliton_field(&params, &grid, Some(40.0 + 2.0 * dt), Projection::None)
        .unwrap()
        .field
        .into_real();
    assert!(max_diff(next.real(), &exact) < 1e-9);
}

fn cubic_bbm_at(dt: f64) -> Vec<f64> {
    let grid = Grid::new_1d(256, 100.0).unwrap();
    let m = model(ModelTag::CubicBBM);
    let params = soliton_params(SolitonFamily::Bbm, 1.5, 6.0, 1.0).unwrap();
    let mut v = line_soliton_field(&params, &grid, None, Projection::None)
        .unwrap()
        .field;
    // a standing bump on top so the error is not just a phase shift
    let bump = SpectralField::from_fn(&grid, |x, _| 0.3 * (-(x - 20.0).powi(2)).exp());
    let mut v = SpectralField::from_real(
        &grid,
        v.real()
            .iter()
            .zip(bump.clone().real())
            .map(|(a, b)| a + b)
            .collect(),
    );
    let config = StepperConfig {
        scheme: Scheme::Rk4,
        dt,
        t_final: 2.0,
        snapshot_every: 0,
        monitor_every: 1,
        noise_floor: None,
    };
    run(&m, State::first_order(&mut v), &config, &mut [])
        .unwrap()
        .state
        .field()
        .into_real()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let reference = cubic_bbm_at(0.0125);
    let coarse = max_diff(&cubic_bbm_at(0.2), &reference);
    let fine = max_diff(&cubic_bbm_at(0.1), &reference);
    let order = (coarse / fine).log2();
    assert!((3.7..4.4).contains(&order), "observed order {order}");
}

#[test]
fn etdrk4_converges_at_fourth_order() {
    let grid = Grid::new_1d(256, 80.0).unwrap();
    let m = model(ModelTag::MKdV);
    let params = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
    let at = |dt: f64| {
        let mut v = line_soliton_field(&params, &grid, None, Projection::None)
            .unwrap()
            .field;
        let mut cfg = StepperConfig::default_for(&m, &grid, 1.0).unwrap();
        cfg.dt = dt;
        run(&m, State::first_order(&mut v), &cfg, &mut [])
            .unwrap()
            .state
            .field()
            .into_real()
    };
    let reference = at(0.000625);
    let coarse = max_diff(&at(0.01), &reference);
    let fine = max_diff(&at(0.005), &reference);
    let order = (coarse / fine).log2();
    assert!((3.6..4.5).contains(&order), "observed order {order}");
}

#[test]
fn cubic_bbm_conserves_invariants() {
    let grid = Grid::new_1d(256, 90.0).unwrap();
    let m = model(ModelTag::CubicBBM);
    let params = soliton_params(SolitonFamily::Bbm, 2.0, 6.0, 1.0).unwrap();
    let mut v = line_soliton_field(&params, &grid, None, Projection::None)
        .unwrap()
        .field;
    let cfg = StepperConfig {
        monitor_every: 50,
        ..StepperConfig::default_for(&m, &grid, 5.0).unwrap()
    };
    let mut monitor = InvariantMonitor::new(&m, &grid, cfg.monitor_every).unwrap();
    run(&m, State::first_order(&mut v), &cfg, &mut [&mut monitor]).unwrap();
    let last = monitor.last().unwrap();
    assert!(
        last.dq_rel < 1e-9 && last.de_rel < 1e-8 && last.dp_rel < 1e-12,
        "{last:?}"
    );
}

#[test]
fn parent_equation_conserves_energy() {
    let grid = Grid::new(64, 16, 2.0 * PI * 4.0, 2.0 * PI * 2.0).unwrap();
    let m = model(ModelTag::ParentNonlocal);
    let mut w = SpectralField::from_fn(&grid, |x, y| 0.2 * (x / 4.0).sin() * (y / 2.0).cos());
    let mut wt = SpectralField::zeros(&grid);
    let cfg = StepperConfig {
        monitor_every: 20,
        ..StepperConfig::default_for(&m, &grid, 2.0).unwrap()
    };
    assert_eq!(cfg.scheme, Scheme::Rk4);
    let mut monitor = InvariantMonitor::new(&m, &grid, cfg.monitor_every).unwrap();
    run(
        &m,
        State::second_order(&mut w, &mut wt),
        &cfg,
        &mut [&mut monitor],
    )
    .unwrap();
    let last = monitor.last().unwrap();
    assert!(last.de_rel < 1e-6, "{last:?}");
}

#[test]
fn etdrk4_rejected_for_parent_equation() {
    let grid = Grid::new(16, 16, 10.0, 10.0).unwrap();
    let m = model(ModelTag::ParentNonlocal);
    let (mut w, mut wt) = (SpectralField::zeros(&grid), SpectralField::zeros(&grid));
    let cfg = StepperConfig {
        scheme: Scheme::Etdrk4,
        ..StepperConfig::default_for(&m, &grid, 1.0).unwrap()
    };
    assert!(run(&m, State::second_order(&mut w, &mut wt), &cfg, &mut []).is_err());
}

#[test]
fn monitor_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("monitor.csv");
    let grid = Grid::new_1d(128, 60.0).unwrap();
    let m = model(ModelTag::MKdV);
    let params = soliton_params(SolitonFamily::Mkdv, 2.0, 6.0, 1.0).unwrap();
    let mut v = line_soliton_field(&params, &grid, None, Projection::None)
        .unwrap()
        .field;
    let cfg = StepperConfig {
        dt: 0.01,
        monitor_every: 10,
        ..StepperConfig::default_for(&m, &grid, 1.0).unwrap()
    };
    let mut monitor = InvariantMonitor::new(&m, &grid, 10)
        .unwrap()
        .with_csv(&path)
        .unwrap();
    run(&m, State::first_order(&mut v), &cfg, &mut [&mut monitor]).unwrap();
    drop(monitor);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), MONITOR_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[10].starts_with("1.0000000000000000e0,"));
}

struct StopAt(f64);

impl Monitor for StopAt {
    fn every(&self) -> usize {
        1
    }

    fn observe(&mut self, obs: &Observation<'_>) -> fdkp_core::Result<ControlFlow<()>> {
        Ok(if obs.state.time >= self.0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        })
    }
}

#[test]
fn monitor_can_stop_run() {
    let grid = Grid::new_1d(64, 40.0).unwrap();
    let m = model(ModelTag::MKdV);
    let mut v = SpectralField::from_fn(&grid, |x, _| 0.1 * (-(x - 20.0).powi(2)).exp());
    let cfg = StepperConfig {
        dt: 0.1,
        ..StepperConfig::default_for(&m, &grid, 10.0).unwrap()
    };
    let summary = run(&m, State::first_order(&mut v), &cfg, &mut [&mut StopAt(0.45)]).unwrap();
    assert!(summary.stopped_early);
    assert_eq!(summary.steps, 5);
}

#[test]
fn snapshots_follow_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new_1d(64, 40.0).unwrap();
    let m = model(ModelTag::MKdV);
    let mut v = SpectralField::from_fn(&grid, |x, _| 0.1 * (-(x - 20.0).powi(2)).exp());
    let cfg = StepperConfig {
        dt: 0.1,
        ..StepperConfig::default_for(&m, &grid, 1.0).unwrap()
    };
    let mut writer = SnapshotWriter::new(dir.path(), 4, "mkdv");
    run(&m, State::first_order(&mut v), &cfg, &mut [&mut writer]).unwrap();
    // steps 0, 4, 8 and the final step 10
    assert_eq!(writer.written().len(), 4);
    let (header, _) = read_snapshot(writer.written().last().unwrap()).unwrap();
    assert!((header.time - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_step_is_rejected() {
    let grid = Grid::new_1d(64, 40.0).unwrap();
    let m = model(ModelTag::MKdV);
    let mut v = SpectralField::zeros(&grid);
    let cfg = StepperConfig {
        dt: -1.0,
        ..StepperConfig::default_for(&m, &grid, 1.0).unwrap()
    };
    assert!(run(&m, State::first_order(&mut v), &cfg, &mut []).is_err());
}
