//! Growth rates of transverse modes measured from perturbed simulations.

use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{Monitor, Observation};
use crate::spectral::Grid;
use crate::waves::transverse_mode;

/// Amplitudes of the `ky = λ` band at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub time: f64,
    /// `L²` norm over `x` of the band, `(Lx Σ_k |v̂(k, λ)|²)^{1/2}`.
    pub l2: f64,
    /// Largest pointwise size of the band's real contribution,
    /// `2 max_x |Σ_k v̂(k, λ) e^{ikx}|`.
    pub sup: f64,
}

/// Records the transverse band of `v` and stops the run once the
/// perturbation has left the linear regime.
pub struct BandRecorder {
    every: usize,
    row: usize,
    lx: f64,
    nx: usize,
    fft: Arc<dyn Fft<f64>>,
    stop_above: Option<f64>,
    samples: Vec<GrowthSample>,
}

impl BandRecorder {
    pub fn new(grid: &Grid, lambda: f64, every: usize) -> Result<Self> {
        let row = transverse_mode(grid, lambda)?;
        Ok(BandRecorder {
            every: every.max(1),
            row,
            lx: grid.lx(),
            nx: grid.nx(),
            fft: FftPlanner::new().plan_fft_inverse(grid.nx()),
            stop_above: None,
            samples: Vec::new(),
        })
    }

    /// Requests an early stop once the band's pointwise size exceeds `level`.
    pub fn stop_above(mut self, level: f64) -> Self {
        self.stop_above = Some(level);
        self
    }

    pub fn samples(&self) -> &[GrowthSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<GrowthSample> {
        self.samples
    }

    fn sample(&self, time: f64, spec: &[Complex64]) -> GrowthSample {
        let mut band = spec[self.row * self.nx..(self.row + 1) * self.nx].to_vec();
        let l2 = (self.lx * band.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        self.fft.process(&mut band);
        let sup = 2.0 * band.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        GrowthSample { time, l2, sup }
    }
}

impl Monitor for BandRecorder {
    fn every(&self) -> usize {
        self.every
    }

    fn observe(&mut self, obs: &Observation<'_>) -> Result<ControlFlow<()>> {
        let s = self.sample(obs.state.time, &obs.state.components[0]);
        self.samples.push(s);
        match self.stop_above {
            Some(level) if s.sup > level => Ok(ControlFlow::Break(())),
            _ => Ok(ControlFlow::Continue(())),
        }
    }
}

/// Exponential fit `log A(t) ≈ log A₀ + Ωt` over the linear window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub rate: f64,
    pub r_squared: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub points: usize,
}

/// Fraction of the wave amplitude above which the perturbation is no longer
/// treated as linear.
pub const LINEAR_FRACTION: f64 = 0.05;
/// Growth over the initial amplitude required before the window opens.
pub const NOISE_FACTOR: f64 = 10.0;
/// Minimum window length in monitor intervals.
pub const MIN_INTERVALS: usize = 5;

/// Fits the growth rate of a recorded band.
///
/// The window opens once the `L²` amplitude exceeds ten times its initial
/// value and closes before the pointwise size first exceeds `0.05 α`.
pub fn measure_growth(samples: &[GrowthSample], alpha: f64) -> Result<GrowthFit> {
    let first = samples
        .first()
        .ok_or_else(|| Error::NoGrowthWindow("no samples recorded".into()))?;
    let floor = NOISE_FACTOR * first.l2;
    let ceiling = LINEAR_FRACTION * alpha;
    let start = samples.iter().position(|s| s.l2 >= floor).ok_or_else(|| {
        Error::NoGrowthWindow(format!("band never grew above {NOISE_FACTOR}x its initial size"))
    })?;
    let len = samples[start..].iter().take_while(|s| s.sup <= ceiling).count();
    if len < MIN_INTERVALS + 1 {
        return Err(Error::NoGrowthWindow(format!(
            "linear window spans {} monitor intervals, at least {MIN_INTERVALS} are needed",
            len.saturating_sub(1)
        )));
    }
    let window = &samples[start..start + len];
    let (rate, r_squared) = linear_fit(window.iter().map(|s| (s.time, s.l2.ln())));
    Ok(GrowthFit {
        rate,
        r_squared,
        window_start: window[0].time,
        window_end: window[len - 1].time,
        points: len,
    })
}

/// Least-squares slope and coefficient of determination.
fn linear_fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}
