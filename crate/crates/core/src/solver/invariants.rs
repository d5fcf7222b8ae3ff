use num_complex::Complex64;
use serde::Serialize;

use super::State;
use crate::error::Result;
use crate::models::{ModelSpec, ModelTag};
use crate::spectral::{Grid, SpectralField};

/// The three conserved quantities of a model.
///
/// For first-order models, with `mass` the symbol of the left operator and
/// `Λ` the phase symbol,
///
/// * `Q = ∬ (mass^{1/2} v)²`,
/// * `E = ∬ ½ [v · (mass Λ / k) v + (μ/6) v⁴]`,
/// * `P = ∬ mass v`.
///
/// For the parent equation, `E = ½⟨w_t, (1 + M) w_t⟩ + ∬ F(|∇w|)`,
/// `P = ∬ (1 + M) w_t` and `Q = ∬ ((1 + M) w_t) w_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Invariants {
    pub q: f64,
    pub e: f64,
    pub p: f64,
}

/// Relative change `|X(t) − X(0)| / max(|X(0)|, 1e−30)`.
pub fn relative_drift(now: f64, initial: f64) -> f64 {
    (now - initial).abs() / initial.abs().max(1e-30)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub time: f64,
    pub q: f64,
    pub e: f64,
    pub p: f64,
    pub dq_rel: f64,
    pub de_rel: f64,
    pub dp_rel: f64,
}

impl InvariantReport {
    pub fn new(time: f64, now: Invariants, initial: Invariants) -> Self {
        InvariantReport {
            time,
            q: now.q,
            e: now.e,
            p: now.p,
            dq_rel: relative_drift(now.q, initial.q),
            de_rel: relative_drift(now.e, initial.e),
            dp_rel: relative_drift(now.p, initial.p),
        }
    }
}

/// Precomputed symbol tables for evaluating invariants on one grid.
pub struct InvariantCalculator {
    grid: Grid,
    tag: ModelTag,
    mu: f64,
    mass: Vec<f64>,
    energy: Vec<f64>,
    stiffness: Vec<f64>,
    dx: Vec<Complex64>,
    dy: Vec<Complex64>,
}

impl InvariantCalculator {
    pub fn new(model: &ModelSpec, grid: &Grid) -> Result<Self> {
        model.kernel.check_positive_on(grid.kx(), grid.ky())?;
        let nan = f64::NAN;
        let mass = grid.real_symbol_table(|k, l| model.mass_symbol(k, l).unwrap_or(nan))?;
        let energy = if model.tag.is_first_order() {
            grid.real_symbol_table(|k, l| model.energy_symbol(k, l).unwrap_or(nan))?
        } else {
            Vec::new()
        };
        let stiffness = grid.real_symbol_table(|k, l| k * k + l * l)?;
        let dx = grid.symbol_table(|k, _| Complex64::new(0.0, k))?;
        let dy = grid.symbol_table(|_, l| Complex64::new(0.0, l))?;
        Ok(InvariantCalculator {
            grid: grid.clone(),
            tag: model.tag,
            mu: model.mu,
            mass,
            energy,
            stiffness,
            dx,
            dy,
        })
    }

    /// Mean of `f(v)` over the padded grid.
    fn padded_mean(&self, spec: &[Complex64], f: impl Fn(f64) -> f64) -> f64 {
        let phys = self.grid.to_padded_physical(spec);
        phys.iter().map(|&v| f(v)).sum::<f64>() / phys.len() as f64
    }

    pub fn evaluate(&self, state: &State) -> Invariants {
        let area = self.grid.area();
        let v = &state.components[0];
        if self.tag.is_first_order() {
            let q = area
                * v.iter()
                    .zip(&self.mass)
                    .map(|(z, m)| m * z.norm_sqr())
                    .sum::<f64>();
            let quad = v
                .iter()
                .zip(&self.energy)
                .map(|(z, s)| s * z.norm_sqr())
                .sum::<f64>();
            let quartic = self.padded_mean(v, |x| x.powi(4));
            let e = area * (0.5 * quad + self.mu / 12.0 * quartic);
            let p = area * self.mass[0] * v[0].re;
            Invariants { q, e, p }
        } else {
            let (w, wt) = (v, &state.components[1]);
            let kinetic = wt
                .iter()
                .zip(&self.mass)
                .map(|(z, m)| m * z.norm_sqr())
                .sum::<f64>();
            let strain = w
                .iter()
                .zip(&self.stiffness)
                .map(|(z, s)| s * z.norm_sqr())
                .sum::<f64>();
            let wx_spec: Vec<Complex64> = w.iter().zip(&self.dx).map(|(a, b)| a * b).collect();
            let wy_spec: Vec<Complex64> = w.iter().zip(&self.dy).map(|(a, b)| a * b).collect();
            let wx = self.grid.to_padded_physical(&wx_spec);
            let wy = self.grid.to_padded_physical(&wy_spec);
            let s4 = wx
                .iter()
                .zip(&wy)
                .map(|(a, b)| (a * a + b * b).powi(2))
                .sum::<f64>()
                / wx.len() as f64;
            let e = area * (0.5 * kinetic + 0.5 * strain + self.mu / 6.0 * s4);
            let p = area * self.mass[0] * wt[0].re;
            let q = area
                * wt.iter()
                    .zip(&wx_spec)
                    .zip(&self.mass)
                    .map(|((a, b), m)| m * (a.conj() * b).re)
                    .sum::<f64>();
            Invariants { q, e, p }
        }
    }

    /// `max |v|` over the grid, with `v = w_x` for the parent equation.
    pub fn max_abs_strain(&self, state: &State) -> f64 {
        let v = &state.components[0];
        let strain = if self.tag.is_first_order() {
            self.grid.inverse(v)
        } else {
            let wx: Vec<Complex64> = v.iter().zip(&self.dx).map(|(a, b)| a * b).collect();
            self.grid.inverse(&wx)
        };
        strain.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Conserved quantities of a first-order model evaluated on one field.
pub fn invariants(model: &ModelSpec, field: &mut SpectralField) -> Result<Invariants> {
    let grid = field.grid().clone();
    let calc = InvariantCalculator::new(model, &grid)?;
    let state = State::first_order(field);
    Ok(calc.evaluate(&state))
}
