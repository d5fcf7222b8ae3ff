use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fdkp_core::exec::map_collect;
use fdkp_core::kernels::{omega, DispersionMode, DispersionQuery};
use fdkp_core::solver::{
    run, InvariantMonitor, Monitor, SnapshotWriter, State, StepperConfig, MONITOR_COLUMNS,
};
use fdkp_core::stability::{
    build_pencil, growth_rates, inner_product_table_with, measure_growth, omega1_squared, BandRecorder,
    GrowthFit, GrowthSample, Omega1Fit, PencilGrid, StabilityFamily,
};
use fdkp_core::waves::{
    perturbed_soliton, profile_residual, soliton_params, traveling_residual, Perturbation, SolitonFamily,
};
use fdkp_core::{Error, Execution, Grid, ModelSpec, ModelTag, Projection, SpectralField};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, OutputDir};

pub fn dispersion(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let grid = cfg.grid()?;
    let kernel = cfg.kernel()?;
    let nu = cfg.model.nu.unwrap_or_else(|| kernel.nu_coefficient());
    let mut csv = out.csv(
        "dispersion.csv",
        &["k", "l", "omega_full", "omega_kp", "kp_singular"],
    )?;
    let mut singular = 0;
    for idx in 0..grid.len() {
        let (k, l) = grid.wavenumber(idx);
        let full = omega(
            DispersionQuery {
                mode: DispersionMode::Full,
                k,
                l,
            },
            &kernel,
            nu,
        )?;
        let kp = match omega(
            DispersionQuery {
                mode: DispersionMode::KpLongWave,
                k,
                l,
            },
            &kernel,
            nu,
        ) {
            Ok(w) => num(w),
            Err(Error::SingularLongWave { .. }) => {
                singular += 1;
                "inf".to_string()
            }
            Err(e) => return Err(e.into()),
        };
        let flag = if k == 0.0 && l != 0.0 { "1" } else { "0" };
        csv.row(&[num(k), num(l), num(full), kp, flag.to_string()])?;
    }
    csv.close()?;
    println!(
        "dispersion: {} modes, {singular} on the singular ray k = 0 of the long-wave relation",
        grid.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    model: String,
    scheme: String,
    dt: f64,
    steps: usize,
    final_time: f64,
    stopped_early: bool,
    removed_mean: f64,
    max_dq_rel: f64,
    max_de_rel: f64,
    max_dp_rel: f64,
}

/// Initial state described by `[wave]`.
fn initial_state(cfg: &ExperimentConfig, model: &ModelSpec, grid: &Grid) -> CliResult<(State, f64)> {
    let kind = cfg.wave.kind.as_deref().unwrap_or("soliton");
    let projection = if model.tag.is_first_order() {
        model.tag.projection()
    } else {
        Projection::None
    };
    let (mut field, removed) = match kind {
        "soliton" if model.tag.is_first_order() => {
            let params = soliton_params(
                cfg.soliton_family(Some(model.tag))?,
                cfg.wave_speed()?,
                model.mu,
                model.nu,
            )?;
            let perturbation = match cfg.wave.lambda {
                Some(lambda) => Some(Perturbation {
                    lambda,
                    delta: cfg.wave.delta.unwrap_or(1e-4),
                    profile: cfg.perturbation_profile()?,
                }),
                None => None,
            };
            let init = perturbed_soliton(&params, grid, cfg.wave.x0, perturbation, projection)?;
            (init.field, init.removed_mean)
        }
        "soliton" => {
            return Err(CliError::Config(
                "the parent equation has no soliton initializer; use wave.kind = \"gaussian\"".into(),
            ))
        }
        "gaussian" => {
            let a = cfg.wave.amplitude.unwrap_or(0.1);
            let w = cfg.wave.width.unwrap_or(1.0);
            let x0 = cfg.wave.x0.unwrap_or(0.5 * grid.lx());
            let y0 = 0.5 * grid.ly();
            let two_d = !grid.is_1d();
            let field = SpectralField::from_fn(grid, |x, y| {
                let r2 = (x - x0).powi(2) + if two_d { (y - y0).powi(2) } else { 0.0 };
                a * (-r2 / (w * w)).exp()
            });
            (field, 0.0)
        }
        other => return Err(CliError::Config(format!("unknown wave.kind '{other}'"))),
    };
    if let Some(noise) = cfg.wave.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.wave.seed.unwrap_or(0));
        let samples: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut extra = SpectralField::from_real(grid, samples);
        // keep the noise smooth so that it does not feed the grid scale
        extra.apply_real_multiplier(|k, l| noise * (-(k * k + l * l)).exp())?;
        field.axpy(1.0, &mut extra);
        projection.apply(grid, field.spectral_mut());
    }
    let state = if model.tag.is_first_order() {
        State::first_order(&mut field)
    } else {
        State::second_order(&mut field, &mut SpectralField::zeros(grid))
    };
    Ok((state, removed))
}

pub fn simulate(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let stepper = cfg.stepper(&model, &grid)?;
    let (state, removed_mean) = initial_state(cfg, &model, &grid)?;

    let mut monitor =
        InvariantMonitor::new(&model, &grid, stepper.monitor_every)?.with_csv(&out.path("monitor.csv"))?;
    let snapshot_dir = out.path("snapshots");
    let mut snapshots = if stepper.snapshot_every > 0 {
        std::fs::create_dir_all(&snapshot_dir)?;
        Some(SnapshotWriter::new(
            &snapshot_dir,
            stepper.snapshot_every,
            model.tag.name(),
        ))
    } else {
        None
    };
    let summary = {
        let mut monitors: Vec<&mut dyn Monitor> = vec![&mut monitor];
        if let Some(s) = snapshots.as_mut() {
            monitors.push(s);
        }
        run(&model, state, &stepper, &mut monitors)?
    };
    let max = |f: fn(&fdkp_core::solver::InvariantReport) -> f64| {
        monitor.reports().iter().map(f).fold(0.0, f64::max)
    };
    let report = SimulationSummary {
        model: model.tag.to_string(),
        scheme: stepper.scheme.to_string(),
        dt: summary.dt,
        steps: summary.steps,
        final_time: summary.state.time,
        stopped_early: summary.stopped_early,
        removed_mean,
        max_dq_rel: max(|r| r.dq_rel),
        max_de_rel: max(|r| r.de_rel),
        max_dp_rel: max(|r| r.dp_rel),
    };
    out.json("summary.json", &report)?;
    println!(
        "simulate: {} to t = {} in {} steps; max |ΔQ/Q| = {:.3e}, max |ΔE/E| = {:.3e}",
        report.model, report.final_time, report.steps, report.max_dq_rel, report.max_de_rel
    );
    debug_assert_eq!(MONITOR_COLUMNS.len(), 8);
    Ok(())
}

#[derive(Serialize)]
struct SolitonReport {
    family: String,
    c: f64,
    mu: f64,
    nu: f64,
    alpha: f64,
    kappa: f64,
    profile_residual: f64,
    traveling_residual: Option<f64>,
    tolerance: f64,
    pass: bool,
}

pub fn soliton_check(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let grid = cfg.grid()?;
    let tag = cfg.model.tag.as_deref().map(str::parse::<ModelTag>).transpose()?;
    let family = cfg.soliton_family(tag)?;
    let mu = cfg.mu()?;
    let nu = match cfg.model.nu {
        Some(nu) => nu,
        None if tag.is_some() => cfg.model()?.nu,
        None => 1.0,
    };
    let params = soliton_params(family, cfg.wave_speed()?, mu, nu)?;
    let residual = profile_residual(&params, &grid)?;
    // the line soliton is an exact travelling wave of these two models only
    let travel = match tag {
        Some(ModelTag::MKdV) if family == SolitonFamily::Mkdv => {
            Some(traveling_residual(&cfg.model()?, &params, &grid)?)
        }
        Some(ModelTag::CubicBBM) if family == SolitonFamily::Bbm => {
            Some(traveling_residual(&cfg.model()?, &params, &grid)?)
        }
        _ => None,
    };
    let tolerance = cfg.wave.tolerance.unwrap_or(1e-8);
    let pass = residual <= tolerance && travel.is_none_or(|t| t <= tolerance);
    let report = SolitonReport {
        family: family.to_string(),
        c: params.c,
        mu,
        nu,
        alpha: params.alpha,
        kappa: params.kappa,
        profile_residual: residual,
        traveling_residual: travel,
        tolerance,
        pass,
    };
    out.json("soliton_check.json", &report)?;
    println!(
        "soliton-check {family} c = {}: profile residual {residual:.3e}{} -> {}",
        params.c,
        travel
            .map(|t| format!(", travelling residual {t:.3e}"))
            .unwrap_or_default(),
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "soliton residual above {tolerance:e}"
        )))
    }
}

pub fn verify_integrals(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let kappas = cfg
        .stability
        .kappa_list
        .clone()
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    if kappas.is_empty() || kappas.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(CliError::Config(
            "stability.kappa_list must hold positive values".into(),
        ));
    }
    let nu = cfg.stability_nu()?;
    let omega1 = cfg.stability.omega1.unwrap_or(1.0);
    let tol = cfg.stability.tolerance.unwrap_or(1e-10);
    let mut csv = out.csv(
        "integrals.csv",
        &[
            "kappa",
            "nu",
            "omega1",
            "name",
            "computed",
            "closed_form",
            "abs_error",
            "pass",
        ],
    )?;
    let mut failed = 0;
    for &kappa in &kappas {
        let table = inner_product_table_with(kappa, nu, omega1);
        for e in &table.entries {
            let pass = e.abs_error() <= tol;
            csv.row(&[
                num(kappa),
                num(nu),
                num(omega1),
                e.name.to_string(),
                num(e.computed),
                num(e.closed_form),
                num(e.abs_error()),
                pass.to_string(),
            ])?;
        }
        let passing = table.passing(tol);
        failed += table.entries.len() - passing;
        println!(
            "verify-integrals κ = {kappa}: {passing}/{} PASS (max abs error {:.2e})",
            table.entries.len(),
            table.max_abs_error()
        );
    }
    csv.close()?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "{failed} inner products above {tol:e}"
        )))
    }
}

pub fn stability_eigen(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let family = cfg.stability_family()?;
    let nu = cfg.stability_nu()?;
    let cs = cfg.c_list()?;
    let lambdas = cfg.lambda_list(false)?;
    let n = cfg.n_modes()?;
    let jobs: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| lambdas.iter().map(move |&l| (c, l)))
        .collect();
    let results = map_collect(
        Execution::Parallel,
        &jobs,
        |&(c, lambda)| -> CliResult<(PencilGrid, Complex64)> {
            let kappa = family.kappa(c, nu)?;
            let grid = match cfg.stability.length {
                Some(length) => PencilGrid::new(n, length),
                None => PencilGrid::default_for(kappa, n),
            };
            let spectrum = growth_rates(&build_pencil(family, c, nu, lambda, &grid)?)?;
            log::info!("{family} c = {c} λ = {lambda}: leading Ω = {}", spectrum.leading);
            Ok((grid, spectrum.leading))
        },
    );
    let mut csv = out.csv(
        "eigen.csv",
        &[
            "family",
            "c",
            "nu",
            "lambda",
            "re_omega_max",
            "im_omega_at_max",
            "N",
            "L",
        ],
    )?;
    let mut leading = Vec::with_capacity(jobs.len());
    for (&(c, lambda), r) in jobs.iter().zip(results) {
        let (grid, om) = r?;
        csv.row(&[
            family.to_string(),
            num(c),
            num(nu),
            num(lambda),
            num(om.re),
            num(om.im),
            grid.n.to_string(),
            num(grid.length),
        ])?;
        leading.push((c, lambda, om));
    }
    csv.close()?;

    // slope fits where there are enough small wavenumbers
    let mut fits = out.csv(
        "omega1_fit.csv",
        &[
            "family",
            "c",
            "nu",
            "omega1_fit",
            "lambda2_coefficient",
            "omega1_predicted",
        ],
    )?;
    for &c in &cs {
        let points: Vec<(f64, Complex64)> = leading
            .iter()
            .filter(|(cc, l, _)| *cc == c && *l > 0.0 && *l <= 0.2)
            .map(|&(_, l, om)| (l, om))
            .collect();
        if points.len() < 3 {
            continue;
        }
        let fit = Omega1Fit::from_points(points)?;
        let predicted = omega1_squared(family, c)?.max(0.0).sqrt();
        fits.row(&[
            family.to_string(),
            num(c),
            num(nu),
            num(fit.a),
            num(fit.b),
            num(predicted),
        ])?;
        println!(
            "stability-eigen {family} c = {c}: Ω₁ fit {:.6}, predicted {predicted:.6}",
            fit.a
        );
    }
    fits.close()?;
    println!("stability-eigen: {} pencils solved", jobs.len());
    Ok(())
}

/// One perturbed-soliton run and its band history.
fn growth_run(
    cfg: &ExperimentConfig,
    family: StabilityFamily,
    c: f64,
    lambda: f64,
) -> CliResult<(Vec<GrowthSample>, Option<GrowthFit>)> {
    let grid = cfg.grid_for_lambda(lambda)?;
    let nu = cfg.stability_nu()?;
    let model = ModelSpec::new(family.model_tag(), cfg.kernel()?, cfg.mu()?)?.with_nu(nu)?;
    let params = soliton_params(family.soliton_family(), c, model.mu, nu)?;
    let seed = Perturbation {
        lambda,
        delta: cfg.wave.delta.unwrap_or(1e-4),
        profile: cfg.perturbation_profile()?,
    };
    let mut init = perturbed_soliton(&params, &grid, cfg.wave.x0, Some(seed), model.tag.projection())?;
    let mut stepper: StepperConfig = cfg.stepper(&model, &grid)?;
    if cfg.stepper.noise_floor.is_none() {
        stepper.noise_floor = Some(1e-13);
    }
    if cfg.stepper.monitor_every.is_none() {
        stepper.monitor_every = ((0.25 / stepper.dt).round() as usize).max(1);
    }
    let mut band = BandRecorder::new(&grid, lambda, stepper.monitor_every)?.stop_above(0.05 * params.alpha);
    run(
        &model,
        State::first_order(&mut init.field),
        &stepper,
        &mut [&mut band],
    )?;
    let samples = band.into_samples();
    let fit = match measure_growth(&samples, params.alpha) {
        Ok(fit) => Some(fit),
        Err(Error::NoGrowthWindow(why)) => {
            log::warn!("{family} c = {c} λ = {lambda}: no growth window ({why})");
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok((samples, fit))
}

fn fit_fields(fit: &Option<GrowthFit>) -> Vec<String> {
    match fit {
        Some(f) => vec![
            num(f.rate),
            num(f.r_squared),
            num(f.window_start),
            num(f.window_end),
        ],
        None => vec!["nan".into(); 4],
    }
}

fn write_band(out: &OutputDir, name: &str, samples: &[GrowthSample]) -> CliResult<()> {
    let mut csv = out.csv(name, &["time", "l2", "sup"])?;
    for s in samples {
        csv.row(&[num(s.time), num(s.l2), num(s.sup)])?;
    }
    csv.close()
}

pub fn stability_perturb(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let family = cfg.stability_family()?;
    let cs = cfg.c_list()?;
    let [c] = cs[..] else {
        return Err(CliError::Config(
            "stability-perturb takes exactly one speed in stability.c_list".into(),
        ));
    };
    let lambdas = cfg.lambda_list(true)?;
    let runs = map_collect(Execution::Parallel, &lambdas, |&l| growth_run(cfg, family, c, l));
    let mut csv = out.csv(
        "perturb.csv",
        &["lambda", "fitted_rate", "r_squared", "window_start", "window_end"],
    )?;
    for (i, (&lambda, r)) in lambdas.iter().zip(runs).enumerate() {
        let (samples, fit) = r?;
        write_band(out, &format!("band_{i:03}.csv"), &samples)?;
        let mut row = vec![num(lambda)];
        row.extend(fit_fields(&fit));
        csv.row(&row)?;
        match fit {
            Some(f) => println!(
                "stability-perturb λ = {lambda}: rate {:.6} (R² = {:.5})",
                f.rate, f.r_squared
            ),
            None => println!("stability-perturb λ = {lambda}: no growth window"),
        }
    }
    csv.close()
}

pub fn sweep(cfg: &ExperimentConfig, out: &OutputDir) -> CliResult<()> {
    let family = cfg.stability_family()?;
    let cs = cfg.c_list()?;
    let lambdas = cfg.lambda_list(true)?;
    let jobs: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| lambdas.iter().map(move |&l| (c, l)))
        .collect();
    let runs = map_collect(Execution::Parallel, &jobs, |&(c, l)| {
        growth_run(cfg, family, c, l)
    });
    let mut csv = out.csv(
        "sweep.csv",
        &[
            "family",
            "c",
            "lambda",
            "fitted_rate",
            "r_squared",
            "window_start",
            "window_end",
            "predicted_rate",
        ],
    )?;
    for (&(c, lambda), r) in jobs.iter().zip(runs) {
        let (_, fit) = r?;
        let predicted = omega1_squared(family, c)?.max(0.0).sqrt() * lambda;
        let mut row = vec![family.to_string(), num(c), num(lambda)];
        row.extend(fit_fields(&fit));
        row.push(num(predicted));
        csv.row(&row)?;
    }
    csv.close()?;
    println!("sweep: {} runs", jobs.len());
    Ok(())
}

pub fn output_root(cfg: &ExperimentConfig, flag: Option<&Path>, command: &str) -> std::path::PathBuf {
    match (flag, cfg.output.dir.as_deref()) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => d.into(),
        (None, None) => Path::new("out").join(command),
    }
}
