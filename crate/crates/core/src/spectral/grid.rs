use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::{for_each_chunk, Execution};

/// Real-to-complex transforms along `x`.
#[derive(Clone)]
struct RealPlan {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl RealPlan {
    fn new(planner: &mut RealFftPlanner<f64>, n: usize) -> Self {
        RealPlan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// Complex transforms along `y`.
#[derive(Clone)]
struct ComplexPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ComplexPlan {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        ComplexPlan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

struct Plans {
    x: RealPlan,
    y: ComplexPlan,
    x2: RealPlan,
    y2: ComplexPlan,
}

/// A doubly periodic grid on `[0, Lx) × [0, Ly)` with its FFT plans.
///
/// Samples are stored row-major with `y` rows of `Nx` contiguous `x` values:
/// index `j * Nx + i` holds the point `(x_i, y_j) = (i Lx/Nx, j Ly/Ny)`.
/// Spectral arrays use the same layout in standard FFT ordering, so that
/// `kx[i] = 2π/Lx · i` for `i < Nx/2` and `2π/Lx · (i − Nx)` otherwise; the
/// Nyquist entry is stored with negative sign.
///
/// The forward transform carries the factor `1/(Nx Ny)`, i.e. the `(0, 0)`
/// coefficient is the mean of the field. `Ny = 1` gives a one-dimensional
/// grid, in which case `Ly` is fixed at 1 so that areas reduce to lengths.
///
/// Cloning is cheap; plans are shared.
#[derive(Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    kx: Arc<[f64]>,
    ky: Arc<[f64]>,
    plans: Arc<Plans>,
    exec: Execution,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .field("exec", &self.exec)
            .finish()
    }
}

fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let dk = 2.0 * PI / length;
    (0..n)
        .map(|i| {
            if i < n / 2 {
                dk * i as f64
            } else {
                dk * (i as f64 - n as f64)
            }
        })
        .collect()
}

/// Signed mode number of FFT index `i` on an `n`-point axis; the Nyquist
/// index is reported as `None`.
fn signed_mode(i: usize, n: usize) -> Option<isize> {
    if n == 1 {
        return Some(0);
    }
    if i < n / 2 {
        Some(i as isize)
    } else if i == n / 2 {
        None
    } else {
        Some(i as isize - n as isize)
    }
}

fn index_of(mode: isize, n: usize) -> usize {
    if mode >= 0 {
        mode as usize
    } else {
        (n as isize + mode) as usize
    }
}

/// Destinations of a source index when an `n`-point spectrum is embedded into
/// an `m`-point one. The Nyquist coefficient is split evenly between `±n/2`.
fn pad_targets(i: usize, n: usize, m: usize) -> ([(usize, f64); 2], usize) {
    match signed_mode(i, n) {
        Some(mode) => ([(index_of(mode, m), 1.0), (0, 0.0)], 1),
        None => {
            let half = (n / 2) as isize;
            ([(index_of(half, m), 0.5), (index_of(-half, m), 0.5)], 2)
        }
    }
}

impl Grid {
    /// Builds a two-dimensional grid; `ny = 1` builds a one-dimensional one.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        let check = |n: usize, axis: &str| -> Result<()> {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "N{axis} = {n} must be a power of two and at least 4"
                )));
            }
            Ok(())
        };
        check(nx, "x")?;
        if ny != 1 {
            check(ny, "y")?;
        }
        if !(lx > 0.0 && lx.is_finite()) {
            return Err(Error::InvalidGrid(format!("Lx = {lx} must be positive")));
        }
        let ly = if ny == 1 { 1.0 } else { ly };
        if !(ly > 0.0 && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!("Ly = {ly} must be positive")));
        }

        let mut real_planner = RealFftPlanner::new();
        let mut planner = FftPlanner::new();
        let my = if ny == 1 { 1 } else { 2 * ny };
        let plans = Plans {
            x: RealPlan::new(&mut real_planner, nx),
            y: ComplexPlan::new(&mut planner, ny),
            x2: RealPlan::new(&mut real_planner, 2 * nx),
            y2: ComplexPlan::new(&mut planner, my),
        };
        let ky = if ny == 1 { vec![0.0] } else { wavenumbers(ny, ly) };
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            kx: wavenumbers(nx, lx).into(),
            ky: ky.into(),
            plans: Arc::new(plans),
            exec: Execution::default(),
        })
    }

    pub fn new_1d(nx: usize, lx: f64) -> Result<Self> {
        Grid::new(nx, 1, lx, 1.0)
    }

    /// The same grid with a different loop execution mode.
    pub fn with_execution(&self, exec: Execution) -> Self {
        Grid { exec, ..self.clone() }
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.is_1d() {
            0.0
        } else {
            j as f64 * self.dy()
        }
    }

    /// `(k, l)` at flat index `idx`.
    pub fn wavenumber(&self, idx: usize) -> (f64, f64) {
        (self.kx[idx % self.nx], self.ky[idx / self.nx])
    }

    /// Index of the Nyquist column, `Nx/2`.
    pub fn nyquist_x(&self) -> usize {
        self.nx / 2
    }

    /// Index of the Nyquist row, if the grid is two-dimensional.
    pub fn nyquist_y(&self) -> Option<usize> {
        (!self.is_1d()).then_some(self.ny / 2)
    }

    /// Dimensions `(Mx, My)` of the zero-padded grid.
    pub fn padded_dims(&self) -> (usize, usize) {
        (2 * self.nx, if self.is_1d() { 1 } else { 2 * self.ny })
    }

    /// Evaluates a complex symbol on every grid mode.
    ///
    /// On Nyquist rows and columns the symbol is averaged over `±k_N` (and
    /// `±l_N`), which keeps odd symbols from breaking the realness of fields.
    pub fn symbol_table<F>(&self, symbol: F) -> Result<Vec<Complex64>>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let nx = self.nx;
        let mut table = vec![Complex64::new(0.0, 0.0); self.len()];
        let kx = &self.kx;
        let ky = &self.ky;
        let ny_idx = self.nyquist_y();
        let failed = std::sync::Mutex::new(None);
        for_each_chunk(self.exec, &mut table, nx, |j, row| {
            let ls: &[f64] = if Some(j) == ny_idx {
                &[ky[j], -ky[j]]
            } else {
                std::slice::from_ref(&ky[j])
            };
            for (i, out) in row.iter_mut().enumerate() {
                let ks: &[f64] = if i == nx / 2 {
                    &[kx[i], -kx[i]]
                } else {
                    std::slice::from_ref(&kx[i])
                };
                let mut acc = Complex64::new(0.0, 0.0);
                for &l in ls {
                    for &k in ks {
                        let s = symbol(k, l);
                        if !(s.re.is_finite() && s.im.is_finite()) {
                            failed.lock().unwrap().get_or_insert((k, l));
                        }
                        acc += s;
                    }
                }
                *out = acc / (ls.len() * ks.len()) as f64;
            }
        });
        if let Some((k, l)) = failed.into_inner().unwrap() {
            return Err(Error::NonFiniteSymbol { k, l });
        }
        Ok(table)
    }

    /// Real-valued counterpart of [`Grid::symbol_table`].
    pub fn real_symbol_table<F>(&self, symbol: F) -> Result<Vec<f64>>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let table = self.symbol_table(|k, l| Complex64::new(symbol(k, l), 0.0))?;
        Ok(table.into_iter().map(|z| z.re).collect())
    }

    /// Real transforms of `rows` rows of length `n` into half spectra of
    /// width `n/2 + 1`.
    fn rows_forward(&self, real: &[f64], n: usize, plan: &RealPlan) -> Vec<Complex64> {
        let w = n / 2 + 1;
        let rows = real.len() / n;
        let mut half = vec![Complex64::new(0.0, 0.0); rows * w];
        for_each_chunk(self.exec, &mut half, w, |j, out| {
            let mut input = real[j * n..(j + 1) * n].to_vec();
            let mut scratch = plan.forward.make_scratch_vec();
            plan.forward
                .process_with_scratch(&mut input, out, &mut scratch)
                .expect("buffer lengths match the plan");
        });
        half
    }

    /// Inverse of [`Grid::rows_forward`], unnormalized.
    fn rows_inverse(&self, half: &[Complex64], n: usize, plan: &RealPlan) -> Vec<f64> {
        let w = n / 2 + 1;
        let rows = half.len() / w;
        let mut real = vec![0.0; rows * n];
        for_each_chunk(self.exec, &mut real, n, |j, out| {
            let mut input = half[j * w..(j + 1) * w].to_vec();
            // a real signal has real mean and Nyquist bins; drop any residue
            input[0].im = 0.0;
            input[w - 1].im = 0.0;
            let mut scratch = plan.inverse.make_scratch_vec();
            plan.inverse
                .process_with_scratch(&mut input, out, &mut scratch)
                .expect("buffer lengths match the plan");
        });
        real
    }

    /// Transforms the first `cols` columns of a row-major array of width `w`
    /// along `y`.
    fn columns(&self, data: &mut [Complex64], w: usize, cols: usize, fft: &Arc<dyn Fft<f64>>) {
        let rows = data.len() / w;
        if rows == 1 {
            return;
        }
        let mut t = vec![Complex64::new(0.0, 0.0); cols * rows];
        {
            let src: &[Complex64] = data;
            for_each_chunk(self.exec, &mut t, rows, |i, col| {
                for (j, c) in col.iter_mut().enumerate() {
                    *c = src[j * w + i];
                }
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(col, &mut scratch);
            });
        }
        let src = &t;
        for_each_chunk(self.exec, data, w, |j, row| {
            for (i, c) in row[..cols].iter_mut().enumerate() {
                *c = src[i * rows + j];
            }
        });
    }

    /// Full Hermitian spectrum from the half spectrum of width `nx/2 + 1`.
    fn expand(&self, half: &[Complex64]) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let w = nx / 2 + 1;
        let mut full = vec![Complex64::new(0.0, 0.0); nx * ny];
        for j in 0..ny {
            let jm = (ny - j) % ny;
            for i in 0..nx {
                full[j * nx + i] = if i < w {
                    half[j * w + i]
                } else {
                    half[jm * w + (nx - i)].conj()
                };
            }
        }
        full
    }

    /// Spectral coefficients of real samples (mean convention).
    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        assert_eq!(real.len(), self.len());
        let w = self.nx / 2 + 1;
        let mut half = self.rows_forward(real, self.nx, &self.plans.x);
        self.columns(&mut half, w, w, &self.plans.y.forward);
        let scale = 1.0 / self.len() as f64;
        half.iter_mut().for_each(|z| *z *= scale);
        self.expand(&half)
    }

    /// Real samples from spectral coefficients.
    ///
    /// Only the `k ≥ 0` half of the spectrum is read; the rest is implied by
    /// Hermitian symmetry.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        assert_eq!(spec.len(), self.len());
        let (nx, ny) = (self.nx, self.ny);
        let w = nx / 2 + 1;
        let mut half = vec![Complex64::new(0.0, 0.0); ny * w];
        for j in 0..ny {
            half[j * w..(j + 1) * w].copy_from_slice(&spec[j * nx..j * nx + w]);
        }
        self.columns(&mut half, w, w, &self.plans.y.inverse);
        self.rows_inverse(&half, nx, &self.plans.x)
    }

    /// Embeds a spectrum into the zero-padded grid; the full padded spectrum
    /// is returned.
    pub fn pad(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let (mx, my) = self.padded_dims();
        let mut out = vec![Complex64::new(0.0, 0.0); mx * my];
        for j in 0..self.ny {
            let (ty, ny_t) = pad_targets(j, self.ny, my);
            for i in 0..self.nx {
                let (tx, nx_t) = pad_targets(i, self.nx, mx);
                let z = spec[j * self.nx + i];
                for &(jy, wy) in &ty[..ny_t] {
                    for &(ix, wx) in &tx[..nx_t] {
                        out[jy * mx + ix] += z * (wx * wy);
                    }
                }
            }
        }
        out
    }

    /// Restricts a padded spectrum to the grid modes; Nyquist entries are zeroed.
    pub fn truncate(&self, padded: &[Complex64]) -> Vec<Complex64> {
        let (mx, my) = self.padded_dims();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for j in 0..self.ny {
            let Some(my_mode) = signed_mode(j, self.ny) else {
                continue;
            };
            let jy = index_of(my_mode, my);
            for i in 0..self.nx {
                let Some(mx_mode) = signed_mode(i, self.nx) else {
                    continue;
                };
                out[j * self.nx + i] = padded[jy * mx + index_of(mx_mode, mx)];
            }
        }
        out
    }

    /// Samples of a grid spectrum on the padded physical grid.
    pub fn to_padded_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        assert_eq!(spec.len(), self.len());
        let (nx, ny) = (self.nx, self.ny);
        let (mx, my) = self.padded_dims();
        let wp = mx / 2 + 1;
        let used = nx / 2 + 1;
        let mut half = vec![Complex64::new(0.0, 0.0); my * wp];
        for j in 0..ny {
            let (ty, ny_t) = pad_targets(j, ny, my);
            for i in 0..used {
                let z = if i == nx / 2 {
                    spec[j * nx + i] * 0.5
                } else {
                    spec[j * nx + i]
                };
                for &(jy, wy) in &ty[..ny_t] {
                    half[jy * wp + i] += z * wy;
                }
            }
        }
        self.columns(&mut half, wp, used, &self.plans.y2.inverse);
        self.rows_inverse(&half, mx, &self.plans.x2)
    }

    /// Grid spectrum of a product evaluated on the padded physical grid.
    pub fn from_padded_physical(&self, phys: &[f64]) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let (mx, my) = self.padded_dims();
        assert_eq!(phys.len(), mx * my);
        let wp = mx / 2 + 1;
        let mut half = self.rows_forward(phys, mx, &self.plans.x2);
        self.columns(&mut half, wp, nx / 2, &self.plans.y2.forward);
        let scale = 1.0 / (mx * my) as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
        for j in 0..ny {
            let Some(my_mode) = signed_mode(j, ny) else {
                continue;
            };
            for i in 0..nx {
                let Some(mx_mode) = signed_mode(i, nx) else {
                    continue;
                };
                out[j * nx + i] = if mx_mode >= 0 {
                    half[index_of(my_mode, my) * wp + mx_mode as usize] * scale
                } else {
                    half[index_of(-my_mode, my) * wp + (-mx_mode) as usize].conj() * scale
                };
            }
        }
        out
    }

    /// Alias-free spectrum of the cube of a field given by its spectrum.
    pub fn cube_spectral(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut phys = self.to_padded_physical(spec);
        phys.iter_mut().for_each(|v| *v = *v * *v * *v);
        self.from_padded_physical(&phys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(2, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 8, -1.0, 1.0).is_err());
        assert!(Grid::new(8, 1, 1.0, -5.0).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::new(8, 4, 2.0 * PI, 4.0 * PI).unwrap();
        assert_eq!(g.kx(), &[0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.ky(), &[0.0, 0.5, -1.0, -0.5]);
        assert_eq!(g.wavenumber(9), (1.0, 0.5));
    }

    #[test]
    fn odd_symbol_vanishes_at_nyquist() {
        let g = Grid::new(8, 4, 2.0 * PI, 2.0 * PI).unwrap();
        let t = g.symbol_table(|k, l| Complex64::new(0.0, k + l)).unwrap();
        assert_eq!(t[4], Complex64::new(0.0, 0.0));
        assert_eq!(t[2 * 8 + 1], Complex64::new(0.0, 1.0));
        assert!(g.real_symbol_table(|k, _| 1.0 / k).is_err());
    }

    #[test]
    fn pad_then_truncate_is_identity_off_nyquist() {
        let g = Grid::new(8, 4, 1.0, 1.0).unwrap();
        let spec: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new(i as f64, -(i as f64) / 3.0))
            .collect();
        let back = g.truncate(&g.pad(&spec));
        for (idx, (a, b)) in spec.iter().zip(&back).enumerate() {
            let (i, j) = (idx % 8, idx / 8);
            if i == 4 || j == 2 {
                assert_eq!(*b, Complex64::new(0.0, 0.0));
            } else {
                assert_eq!(a, b);
            }
        }
    }
}
