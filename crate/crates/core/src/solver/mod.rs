//! Time integration: ETDRK4 for the stiff first-order models, classical RK4
//! for the mass-preconditioned ones and for the parent equation.

mod etdrk4;
mod invariants;
mod monitor;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub use etdrk4::{phi123, Etdrk4Coefficients};
pub use invariants::{invariants, relative_drift, InvariantCalculator, InvariantReport, Invariants};
pub use monitor::{InvariantMonitor, Monitor, Observation, SnapshotWriter, MONITOR_COLUMNS};

use crate::error::{Error, Result};
use crate::models::{Evaluator, ModelSpec, ModelTag};
use crate::spectral::{Grid, SpectralField};

/// RK4 stability bound on the imaginary axis, used for the default step.
const RK4_IMAGINARY_LIMIT: f64 = 2.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Etdrk4,
    Rk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Etdrk4 => "etdrk4",
            Scheme::Rk4 => "rk4",
        }
    }

    /// The scheme used when none is configured.
    pub fn default_for(tag: ModelTag) -> Scheme {
        if tag.is_bbm_family() || tag == ModelTag::ParentNonlocal {
            Scheme::Rk4
        } else {
            Scheme::Etdrk4
        }
    }

    /// ETDRK4 needs a diagonal linear part, which the parent system lacks.
    pub fn admissible(self, tag: ModelTag) -> bool {
        self == Scheme::Rk4 || tag.is_first_order()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "etdrk4" => Ok(Scheme::Etdrk4),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(Error::InvalidParameter(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    pub monitor_every: usize,
    /// Spectral coefficients smaller than this are zeroed after every step.
    ///
    /// Off by default. Useful when the dynamics have very fast instabilities
    /// that would otherwise grow out of round-off in modes the initial data
    /// does not excite.
    pub noise_floor: Option<f64>,
}

impl StepperConfig {
    /// Default scheme and step for a model on a grid.
    ///
    /// ETDRK4 uses `dt = 10⁻² Lx/Nx`; RK4 uses the smaller of that and
    /// `2.8 / max|ω|` over the grid.
    pub fn default_for(model: &ModelSpec, grid: &Grid, t_final: f64) -> Result<Self> {
        let scheme = Scheme::default_for(model.tag);
        Ok(StepperConfig {
            scheme,
            dt: default_dt(model, grid, scheme)?,
            t_final,
            snapshot_every: 0,
            monitor_every: 1,
            noise_floor: None,
        })
    }

    fn validate(&self, tag: ModelTag) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time {} must be non-negative",
                self.t_final
            )));
        }
        if let Some(floor) = self.noise_floor {
            if !(floor >= 0.0 && floor.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "noise floor {floor} must be non-negative"
                )));
            }
        }
        if !self.scheme.admissible(tag) {
            return Err(Error::InadmissibleScheme {
                scheme: self.scheme.to_string(),
                model: tag.to_string(),
            });
        }
        Ok(())
    }
}

/// Default time step of `scheme` for `model` on `grid`.
pub fn default_dt(model: &ModelSpec, grid: &Grid, scheme: Scheme) -> Result<f64> {
    match scheme {
        Scheme::Etdrk4 => Ok(1e-2 * grid.lx() / grid.nx() as f64),
        Scheme::Rk4 => {
            let mut fastest = 0.0f64;
            for idx in 0..grid.len() {
                let (k, l) = grid.wavenumber(idx);
                let rate = if model.tag.is_first_order() {
                    model.linear_phase_symbol(k, l)?.abs()
                } else {
                    let (mass, stiffness) = model.parent_symbols(k, l)?;
                    (stiffness / mass).sqrt()
                };
                fastest = fastest.max(rate);
            }
            // the linear bound alone is far too loose for weakly dispersive
            // models, whose nonlinear term then sets the step
            let spatial = 1e-2 * grid.lx() / grid.nx() as f64;
            Ok(if fastest > 0.0 {
                (RK4_IMAGINARY_LIMIT / fastest).min(spatial)
            } else {
                spatial
            })
        }
    }
}

/// The spectral state of a run: `[v̂]` or `[ŵ, ŵ_t]`.
#[derive(Clone, Debug)]
pub struct State {
    pub grid: Grid,
    pub time: f64,
    pub components: Vec<Vec<Complex64>>,
}

impl State {
    pub fn first_order(v: &mut SpectralField) -> Self {
        State {
            grid: v.grid().clone(),
            time: 0.0,
            components: vec![v.spectral().to_vec()],
        }
    }

    pub fn second_order(w: &mut SpectralField, wt: &mut SpectralField) -> Self {
        State {
            grid: w.grid().clone(),
            time: 0.0,
            components: vec![w.spectral().to_vec(), wt.spectral().to_vec()],
        }
    }

    /// The first component as a field.
    pub fn field(&self) -> SpectralField {
        SpectralField::from_spectral(&self.grid, self.components[0].clone())
    }

    fn is_finite(&self) -> bool {
        self.components
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn axpy(base: &[Complex64], scale: Complex64, dir: &[Complex64]) -> Vec<Complex64> {
    base.iter().zip(dir).map(|(b, d)| b + scale * d).collect()
}

/// Advances states of one model by a fixed step.
pub struct Stepper {
    eval: Evaluator,
    scheme: Scheme,
    dt: f64,
    etd: Option<Etdrk4Coefficients>,
    noise_floor: Option<f64>,
}

impl Stepper {
    pub fn new(model: &ModelSpec, grid: &Grid, scheme: Scheme, dt: f64) -> Result<Self> {
        if !scheme.admissible(model.tag) {
            return Err(Error::InadmissibleScheme {
                scheme: scheme.to_string(),
                model: model.tag.to_string(),
            });
        }
        let eval = Evaluator::new(model, grid)?;
        let etd = (scheme == Scheme::Etdrk4).then(|| {
            let linear: Vec<Complex64> = eval
                .phase()
                .iter()
                .map(|&lam| Complex64::new(0.0, -lam))
                .collect();
            Etdrk4Coefficients::new(&linear, dt)
        });
        Ok(Stepper {
            eval,
            scheme,
            dt,
            etd,
            noise_floor: None,
        })
    }

    /// Zeroes coefficients below `floor` after every step.
    pub fn with_noise_floor(mut self, floor: Option<f64>) -> Self {
        self.noise_floor = floor;
        self
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.eval
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies the model's `k = 0` projection.
    pub fn project(&self, state: &mut State) {
        if self.eval.model().tag.is_first_order() {
            self.eval.project(&mut state.components[0]);
        }
    }

    /// One step; fails with [`Error::UnstableRun`] if the result is not finite.
    pub fn step(&self, state: &mut State) -> Result<()> {
        let last_valid = state.time;
        match self.scheme {
            Scheme::Etdrk4 => self.step_etdrk4(state),
            Scheme::Rk4 => self.step_rk4(state),
        }
        state.time += self.dt;
        self.project(state);
        if let Some(floor) = self.noise_floor {
            for z in state.components.iter_mut().flatten() {
                if z.norm() < floor {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        if !state.is_finite() {
            return Err(Error::UnstableRun {
                time: state.time,
                last_valid,
            });
        }
        Ok(())
    }

    fn step_etdrk4(&self, state: &mut State) {
        let c = self.etd.as_ref().expect("ETDRK4 coefficients");
        let n = |v: &[Complex64]| self.eval.nonlinear(v);
        let u = &state.components[0];
        let nu = n(u);
        let a: Vec<Complex64> = (0..u.len()).map(|i| c.e2[i] * u[i] + c.q[i] * nu[i]).collect();
        let na = n(&a);
        let b: Vec<Complex64> = (0..u.len()).map(|i| c.e2[i] * u[i] + c.q[i] * na[i]).collect();
        let nb = n(&b);
        let cc: Vec<Complex64> = (0..u.len())
            .map(|i| c.e2[i] * a[i] + c.q[i] * (2.0 * nb[i] - nu[i]))
            .collect();
        let nc = n(&cc);
        let next: Vec<Complex64> = (0..u.len())
            .map(|i| c.e[i] * u[i] + c.f1[i] * nu[i] + 2.0 * c.f2[i] * (na[i] + nb[i]) + c.f3[i] * nc[i])
            .collect();
        state.components[0] = next;
    }

    fn step_rk4(&self, state: &mut State) {
        let h = self.dt;
        let f = |s: &[Vec<Complex64>]| self.eval.rhs(s);
        let shift = |s: &[Vec<Complex64>], k: &[Vec<Complex64>], scale: f64| -> Vec<Vec<Complex64>> {
            s.iter()
                .zip(k)
                .map(|(a, b)| axpy(a, Complex64::new(scale, 0.0), b))
                .collect()
        };
        let y = &state.components;
        let k1 = f(y);
        let k2 = f(&shift(y, &k1, h / 2.0));
        let k3 = f(&shift(y, &k2, h / 2.0));
        let k4 = f(&shift(y, &k3, h));
        let next = (0..y.len())
            .map(|c| {
                (0..y[c].len())
                    .map(|i| y[c][i] + (k1[c][i] + 2.0 * (k2[c][i] + k3[c][i]) + k4[c][i]) * (h / 6.0))
                    .collect()
            })
            .collect();
        state.components = next;
    }
}

/// Outcome of [`run`].
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub state: State,
    pub steps: usize,
    /// The step actually used, adjusted so an integer number of steps reaches `T`.
    pub dt: f64,
    pub stopped_early: bool,
}

/// Integrates `initial` to `config.t_final`, notifying `monitors` at their cadence.
///
/// First-order models have their `k = 0` projection applied to the initial
/// state and after every step.
pub fn run(
    model: &ModelSpec,
    initial: State,
    config: &StepperConfig,
    monitors: &mut [&mut dyn Monitor],
) -> Result<RunSummary> {
    config.validate(model.tag)?;
    let expected = if model.tag.is_first_order() { 1 } else { 2 };
    if initial.components.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "{} needs {expected} state component(s), got {}",
            model.tag,
            initial.components.len()
        )));
    }
    let steps = if config.t_final == 0.0 {
        0
    } else {
        (config.t_final / config.dt - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 {
        config.dt
    } else {
        config.t_final / steps as f64
    };
    let grid = initial.grid.clone();
    let stepper = Stepper::new(model, &grid, config.scheme, dt)?.with_noise_floor(config.noise_floor);
    let mut state = initial;
    stepper.project(&mut state);
    let t0 = state.time;

    let mut notify = |state: &State, step: usize, last: bool| -> Result<bool> {
        let obs = Observation { step, state, last };
        let mut stop = false;
        for m in monitors.iter_mut() {
            if last || step.is_multiple_of(m.every()) {
                stop |= m.observe(&obs)?.is_break();
            }
        }
        Ok(stop)
    };

    if notify(&state, 0, steps == 0)? {
        return Ok(RunSummary {
            state,
            steps: 0,
            dt,
            stopped_early: steps > 0,
        });
    }
    for step in 1..=steps {
        stepper.step(&mut state)?;
        state.time = t0 + step as f64 * dt;
        if notify(&state, step, step == steps)? {
            return Ok(RunSummary {
                state,
                steps: step,
                dt,
                stopped_early: step < steps,
            });
        }
    }
    Ok(RunSummary {
        state,
        steps,
        dt,
        stopped_early: false,
    })
}

/// Advances `field` by one step of `scheme` (the `k = 0` projection included).
pub fn step(model: &ModelSpec, field: &mut SpectralField, dt: f64, scheme: Scheme) -> Result<SpectralField> {
    if !model.tag.is_first_order() {
        return Err(Error::WrongModelOrder(model.tag.to_string()));
    }
    let stepper = Stepper::new(model, field.grid(), scheme, dt)?;
    let mut state = State::first_order(field);
    stepper.step(&mut state)?;
    Ok(state.field())
}
