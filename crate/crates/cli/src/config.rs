//! Experiment configuration files.
//!
//! A config is a TOML document with the sections below; every key is
//! optional and each subcommand validates only what it reads.

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use fdkp_core::solver::{Scheme, StepperConfig};
use fdkp_core::stability::StabilityFamily;
use fdkp_core::waves::{PerturbationProfile, SolitonFamily};
use fdkp_core::{Grid, KernelRegistry, KernelSpec, ModelSpec, ModelTag, TransportOperator};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub kernel: KernelSection,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub wave: WaveSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub tag: Option<String>,
    pub mu: Option<f64>,
    /// Defaults to the long-wave coefficient of the kernel.
    pub nu: Option<f64>,
    /// `full` or `kp_special`.
    pub transport: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// `whitham_shallow`, `green_exponential` or a registered custom name.
    pub family: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    pub lx: f64,
    pub ly: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    /// `soliton` (default) or `gaussian`.
    pub kind: Option<String>,
    /// Soliton family; defaults to the one matching the model.
    pub family: Option<String>,
    pub c: Option<f64>,
    pub x0: Option<f64>,
    /// Gaussian amplitude and width.
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    /// Transverse perturbation `δ z cos(λy)`.
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    /// `z0` or `z1`.
    pub profile: Option<String>,
    /// Amplitude of smooth random noise added to the initial field.
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    /// Pass threshold for soliton-check.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub scheme: Option<String>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub monitor_every: Option<usize>,
    pub noise_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    pub family: Option<String>,
    pub c_list: Option<Vec<f64>>,
    pub lambda_list: Option<Vec<f64>>,
    pub n_modes: Option<usize>,
    /// Pencil box length; defaults to `max(56/κ, 80)`.
    pub length: Option<f64>,
    pub nu: Option<f64>,
    pub kappa_list: Option<Vec<f64>>,
    pub omega1: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// The file contents, hashed into the manifest.
    pub raw: String,
}

pub fn load(path: &Path) -> CliResult<LoadedConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = toml::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(LoadedConfig { config, raw })
}

fn parse<T>(value: &str, what: &str) -> CliResult<T>
where
    T: std::str::FromStr<Err = fdkp_core::Error>,
{
    value
        .parse()
        .map_err(|e: fdkp_core::Error| CliError::Config(format!("{what}: {e}")))
}

fn require<T: Copy>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Config(format!("missing key {key}")))
}

fn positive(value: f64, key: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{key} = {value} must be positive")))
    }
}

impl ExperimentConfig {
    pub fn kernel(&self) -> CliResult<KernelSpec> {
        match self.kernel.family.as_deref().unwrap_or("whitham_shallow") {
            "whitham_shallow" => Ok(KernelSpec::WhithamShallow),
            "green_exponential" => Ok(KernelSpec::GreenExponential),
            other => KernelRegistry::default()
                .get(other)
                .ok_or_else(|| CliError::Config(format!("unknown kernel family '{other}'"))),
        }
    }

    pub fn mu(&self) -> CliResult<f64> {
        positive(self.model.mu.unwrap_or(6.0), "model.mu")
    }

    pub fn model(&self) -> CliResult<ModelSpec> {
        let tag: ModelTag = parse(
            self.model
                .tag
                .as_deref()
                .ok_or_else(|| CliError::Config("missing key model.tag".into()))?,
            "model.tag",
        )?;
        let mut model = ModelSpec::new(tag, self.kernel()?, self.mu()?)?;
        if let Some(nu) = self.model.nu {
            model = model.with_nu(positive(nu, "model.nu")?)?;
        }
        match self.model.transport.as_deref() {
            None | Some("full") => {}
            Some("kp_special") => model = model.with_transport(TransportOperator::KpSpecial)?,
            Some(other) => return Err(CliError::Config(format!("unknown transport '{other}'"))),
        }
        Ok(model)
    }

    pub fn grid_section(&self) -> CliResult<&GridSection> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::Config("missing section [grid]".into()))
    }

    pub fn grid(&self) -> CliResult<Grid> {
        let g = self.grid_section()?;
        let ly = if g.ny == 1 { 1.0 } else { require(g.ly, "grid.ly")? };
        Ok(Grid::new(g.nx, g.ny, g.lx, ly)?)
    }

    /// The grid with `Ly = 2π/λ`, so that `λ` is the first transverse mode.
    pub fn grid_for_lambda(&self, lambda: f64) -> CliResult<Grid> {
        let g = self.grid_section()?;
        if g.ny == 1 {
            return Err(CliError::Config(
                "grid.ny must be at least 4 for transverse runs".into(),
            ));
        }
        Ok(Grid::new(g.nx, g.ny, g.lx, 2.0 * PI / lambda)?)
    }

    pub fn soliton_family(&self, tag: Option<ModelTag>) -> CliResult<SolitonFamily> {
        match (self.wave.family.as_deref(), tag) {
            (Some(name), _) => parse(name, "wave.family"),
            (None, Some(t)) if t.is_bbm_family() => Ok(SolitonFamily::Bbm),
            (None, _) => Ok(SolitonFamily::Mkdv),
        }
    }

    pub fn wave_speed(&self) -> CliResult<f64> {
        require(self.wave.c, "wave.c")
    }

    pub fn perturbation_profile(&self) -> CliResult<PerturbationProfile> {
        parse(self.wave.profile.as_deref().unwrap_or("z0"), "wave.profile")
    }

    /// Stepper settings, filling gaps from the model defaults.
    pub fn stepper(&self, model: &ModelSpec, grid: &Grid) -> CliResult<StepperConfig> {
        let s = &self.stepper;
        let t_final = require(s.t_final, "stepper.t_final")?;
        let mut config = StepperConfig::default_for(model, grid, t_final)?;
        if let Some(name) = s.scheme.as_deref() {
            config.scheme = parse::<Scheme>(name, "stepper.scheme")?;
            config.dt = fdkp_core::solver::default_dt(model, grid, config.scheme)?;
        }
        if let Some(dt) = s.dt {
            config.dt = positive(dt, "stepper.dt")?;
        }
        config.snapshot_every = s.snapshot_every.unwrap_or(0);
        config.monitor_every = s.monitor_every.unwrap_or(100).max(1);
        config.noise_floor = s.noise_floor;
        Ok(config)
    }

    pub fn stability_family(&self) -> CliResult<StabilityFamily> {
        parse(
            self.stability.family.as_deref().unwrap_or("whitham"),
            "stability.family",
        )
    }

    pub fn stability_nu(&self) -> CliResult<f64> {
        positive(self.stability.nu.unwrap_or(1.0), "stability.nu")
    }

    pub fn c_list(&self) -> CliResult<Vec<f64>> {
        let list = self.stability.c_list.clone().unwrap_or_default();
        if list.is_empty() {
            return Err(CliError::Config("stability.c_list must not be empty".into()));
        }
        if let Some(bad) = list.iter().find(|c| !(**c > 1.0 && c.is_finite())) {
            return Err(CliError::Config(format!(
                "stability.c_list: c = {bad} must exceed 1"
            )));
        }
        Ok(list)
    }

    /// `λ` values; `positive` rejects `λ = 0`, which only the pencil accepts.
    pub fn lambda_list(&self, positive_only: bool) -> CliResult<Vec<f64>> {
        let list = self.stability.lambda_list.clone().unwrap_or_default();
        if list.is_empty() {
            return Err(CliError::Config("stability.lambda_list must not be empty".into()));
        }
        let ok = |l: f64| l.is_finite() && if positive_only { l > 0.0 } else { l >= 0.0 };
        if let Some(bad) = list.iter().find(|l| !ok(**l)) {
            return Err(CliError::Config(format!(
                "stability.lambda_list: λ = {bad} is not admissible"
            )));
        }
        Ok(list)
    }

    pub fn n_modes(&self) -> CliResult<usize> {
        let n = self.stability.n_modes.unwrap_or(512);
        if n < 8 || !n.is_multiple_of(2) {
            return Err(CliError::Config(format!(
                "stability.n_modes = {n} must be even and at least 8"
            )));
        }
        Ok(n)
    }
}
