use num_complex::Complex64;

use super::grid::Grid;
use crate::error::Result;

/// A real periodic field held in physical and/or spectral form.
///
/// Either representation is computed lazily from the other; mutating one
/// through the `_mut` accessors invalidates the other.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    real: Vec<f64>,
    spec: Vec<Complex64>,
    real_valid: bool,
    spec_valid: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            real: vec![0.0; grid.len()],
            spec: vec![Complex64::new(0.0, 0.0); grid.len()],
            real_valid: true,
            spec_valid: true,
        }
    }

    pub fn from_real(grid: &Grid, real: Vec<f64>) -> Self {
        assert_eq!(real.len(), grid.len(), "sample count does not match the grid");
        SpectralField {
            grid: grid.clone(),
            real,
            spec: Vec::new(),
            real_valid: true,
            spec_valid: false,
        }
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut real = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                real.push(f(grid.x(i), y));
            }
        }
        SpectralField::from_real(grid, real)
    }

    pub fn from_spectral(grid: &Grid, spec: Vec<Complex64>) -> Self {
        assert_eq!(
            spec.len(),
            grid.len(),
            "coefficient count does not match the grid"
        );
        SpectralField {
            grid: grid.clone(),
            real: Vec::new(),
            spec,
            real_valid: false,
            spec_valid: true,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Makes the spectral representation valid.
    pub fn transform_forward(&mut self) {
        if !self.spec_valid {
            self.spec = self.grid.forward(&self.real);
            self.spec_valid = true;
        }
    }

    /// Makes the physical representation valid.
    pub fn transform_inverse(&mut self) {
        if !self.real_valid {
            self.real = self.grid.inverse(&self.spec);
            self.real_valid = true;
        }
    }

    pub fn real(&mut self) -> &[f64] {
        self.transform_inverse();
        &self.real
    }

    pub fn spectral(&mut self) -> &[Complex64] {
        self.transform_forward();
        &self.spec
    }

    pub fn real_mut(&mut self) -> &mut [f64] {
        self.transform_inverse();
        self.spec_valid = false;
        &mut self.real
    }

    pub fn spectral_mut(&mut self) -> &mut [Complex64] {
        self.transform_forward();
        self.real_valid = false;
        &mut self.spec
    }

    pub fn into_spectral(mut self) -> Vec<Complex64> {
        self.transform_forward();
        self.spec
    }

    pub fn into_real(mut self) -> Vec<f64> {
        self.transform_inverse();
        self.real
    }

    /// Multiplies every coefficient by `symbol(k, l)`.
    pub fn apply_multiplier<F>(&mut self, symbol: F) -> Result<()>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let table = self.grid.symbol_table(symbol)?;
        self.apply_table(&table);
        Ok(())
    }

    /// Multiplies every coefficient by a real symbol.
    pub fn apply_real_multiplier<F>(&mut self, symbol: F) -> Result<()>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let table = self.grid.real_symbol_table(symbol)?;
        self.apply_real_table(&table);
        Ok(())
    }

    /// Multiplies by a precomputed complex symbol table.
    pub fn apply_table(&mut self, table: &[Complex64]) {
        self.spectral_mut()
            .iter_mut()
            .zip(table)
            .for_each(|(z, s)| *z *= s);
    }

    /// Multiplies by a precomputed real symbol table.
    pub fn apply_real_table(&mut self, table: &[f64]) {
        self.spectral_mut()
            .iter_mut()
            .zip(table)
            .for_each(|(z, s)| *z *= s);
    }

    /// `v³`, computed with 2× zero padding in every direction.
    pub fn cubic_dealias(&mut self) -> SpectralField {
        self.transform_forward();
        let spec = self.grid.cube_spectral(&self.spec);
        SpectralField::from_spectral(&self.grid, spec)
    }

    /// Removes every mode with `k = 0`.
    ///
    /// Returns `Σ_l |ĉ(0, l)|`, a bound on the `x`-mean removed from any row
    /// (exact for `y`-uniform fields).
    pub fn zero_mass_project(&mut self) -> f64 {
        let nx = self.grid.nx();
        let spec = self.spectral_mut();
        let mut removed = 0.0;
        for row in spec.chunks_mut(nx) {
            removed += row[0].norm();
            row[0] = Complex64::new(0.0, 0.0);
        }
        removed
    }

    /// Largest violation of `ĉ(−k, −l) = conj ĉ(k, l)` relative to the
    /// largest coefficient.
    pub fn hermitian_defect(&mut self) -> f64 {
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        let spec = self.spectral();
        let scale = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for j in 0..ny {
            let jm = (ny - j) % ny;
            for i in 0..nx {
                let im = (nx - i) % nx;
                let d = (spec[j * nx + i] - spec[jm * nx + im].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// `∬ v² dx dy` by Parseval.
    pub fn l2_norm_squared(&mut self) -> f64 {
        let area = self.grid.area();
        area * self.spectral().iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs(&mut self) -> f64 {
        self.real().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Adds `scale · other` in spectral space.
    pub fn axpy(&mut self, scale: f64, other: &mut SpectralField) {
        let rhs = other.spectral();
        self.spectral_mut()
            .iter_mut()
            .zip(rhs)
            .for_each(|(a, b)| *a += b * scale);
    }
}
