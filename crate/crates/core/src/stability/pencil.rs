//! Discrete eigenvalue pencil of the linearized line-wave problem.
//!
//! The fourth-order equations for the transverse mode `z(ξ) e^{iλy + Ωt}`
//! are written as `A z = Ω B z` with
//!
//! * Whitham: `A = ν D²𝓛 − (νλ²/2) D² − λ²/2`, `B = −D`;
//! * BBM: `A = D²𝓛 − λ²/(2νc)`, `B = D³/c − D/(νc)`;
//!
//! where `𝓛 = D² + κ²(6 sech²(κξ) − 1)`.
//!
//! The problem is posed on a periodic box `[−L/2, L/2)` in the exponentially
//! weighted variable `w = e^{−aξ} z` (so every `D` becomes `D + a`). With
//! `a < 0` the continuous spectrum of the line problem moves into the left
//! half plane, which keeps the box-quantized continuum from producing
//! spurious small instabilities near the threshold. Discrete eigenvalues of
//! the line problem are unchanged by the weight.
//!
//! Unknowns are coefficients in the real trigonometric basis
//! `{1/√2, cos kⱼξ, sin kⱼξ}` for `0 < j < N/2`, so a pencil built from
//! `N` points has dimension `N − 1`. With `a = 0` the constant mode lies in
//! the kernel of `B` and is dropped, leaving `N − 2`. Derivatives act on each
//! `(cos, sin)` pair as the complex number `a + ikⱼ`; the `sech²` potential is
//! applied as a Galerkin product with coefficients from a twice-oversampled
//! grid.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::StabilityFamily;
use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};

/// Minimum box length in soliton widths.
pub const MIN_WIDTHS: f64 = 56.0;
/// Default box length floor.
pub const DEFAULT_LENGTH: f64 = 80.0;

/// Discretization of the `ξ` line for the pencil.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PencilGrid {
    /// Number of collocation points `N` (even, at least 8).
    pub n: usize,
    /// Box length `L`.
    pub length: f64,
    /// Exponential weight `a`; `None` selects `−κ/4`.
    pub weight: Option<f64>,
}

impl PencilGrid {
    pub fn new(n: usize, length: f64) -> Self {
        PencilGrid {
            n,
            length,
            weight: None,
        }
    }

    /// `L = max(56/κ, 80)`.
    pub fn default_for(kappa: f64, n: usize) -> Self {
        PencilGrid::new(n, (MIN_WIDTHS / kappa).max(DEFAULT_LENGTH))
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = Some(weight);
        self
    }

    fn weight_for(&self, kappa: f64) -> f64 {
        self.weight.unwrap_or(-kappa / 4.0)
    }
}

/// The real trigonometric basis on `[−L/2, L/2)`.
#[derive(Clone, Debug)]
struct Basis {
    modes: usize,
    length: f64,
    constant: bool,
}

impl Basis {
    fn new(n: usize, length: f64, constant: bool) -> Self {
        Basis {
            modes: n / 2 - 1,
            length,
            constant,
        }
    }

    fn offset(&self) -> usize {
        usize::from(self.constant)
    }

    fn dim(&self) -> usize {
        self.offset() + 2 * self.modes
    }

    fn k(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.length
    }

    /// Derivative symbol `a + ik` of each basis index.
    fn symbols(&self, a: f64) -> Vec<Complex64> {
        let mut s = Vec::with_capacity(self.dim());
        if self.constant {
            s.push(Complex64::new(a, 0.0));
        }
        for j in 1..=self.modes {
            let d = Complex64::new(a, self.k(j));
            s.push(d);
            s.push(d);
        }
        s
    }

    /// Matrix of multiplication by `v(ξ)` for an even real `v`, from the
    /// cosine coefficients of `v` on `2N` points.
    #[allow(clippy::needless_range_loop)]
    fn even_potential(&self, v: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let m = 4 * (self.modes + 1);
        let h = self.length / m as f64;
        let samples: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let xi = -0.5 * self.length + i as f64 * h;
                (xi, v(xi))
            })
            .collect();
        let vhat: Vec<f64> = (0..=2 * self.modes)
            .map(|q| {
                let k = self.k(q);
                samples.iter().map(|&(xi, f)| f * (k * xi).cos()).sum::<f64>() / m as f64
            })
            .collect();

        let dim = self.dim();
        let o = self.offset();
        let mut s = DMatrix::zeros(dim, dim);
        if self.constant {
            s[(0, 0)] = vhat[0];
            for j in 1..=self.modes {
                let c = o + 2 * (j - 1);
                s[(0, c)] = SQRT_2 * vhat[j];
                s[(c, 0)] = SQRT_2 * vhat[j];
            }
        }
        for i in 1..=self.modes {
            for j in 1..=self.modes {
                let diff = vhat[i.abs_diff(j)];
                let sum = vhat[i + j];
                let (ci, cj) = (o + 2 * (i - 1), o + 2 * (j - 1));
                s[(ci, cj)] = diff + sum;
                s[(ci + 1, cj + 1)] = diff - sum;
            }
        }
        s
    }

    /// Coefficients of a real function, from `2N`-point sums.
    fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let m = 4 * (self.modes + 1);
        let h = self.length / m as f64;
        let samples: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let xi = -0.5 * self.length + i as f64 * h;
                (xi, f(xi))
            })
            .collect();
        let mut c = Vec::with_capacity(self.dim());
        if self.constant {
            c.push(SQRT_2 * samples.iter().map(|s| s.1).sum::<f64>() / m as f64);
        }
        for j in 1..=self.modes {
            let k = self.k(j);
            let cos = samples.iter().map(|&(x, f)| f * (k * x).cos()).sum::<f64>();
            let sin = samples.iter().map(|&(x, f)| f * (k * x).sin()).sum::<f64>();
            c.push(2.0 * cos / m as f64);
            c.push(2.0 * sin / m as f64);
        }
        c
    }

    fn evaluate<T>(&self, coeffs: &[T], xi: f64) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let o = self.offset();
        let mut acc = coeffs[o] * (self.k(1) * xi).cos() + coeffs[o + 1] * (self.k(1) * xi).sin();
        if self.constant {
            acc = acc + coeffs[0] * FRAC_1_SQRT_2;
        }
        for j in 2..=self.modes {
            let c = o + 2 * (j - 1);
            let k = self.k(j);
            acc = acc + coeffs[c] * (k * xi).cos() + coeffs[c + 1] * (k * xi).sin();
        }
        acc
    }
}

/// Left-multiplies `x` by the block-diagonal operator with per-index
/// complex symbols `f` (a `(cos, sin)` pair shares one symbol).
fn apply_blocks(basis: &Basis, f: &[Complex64], x: &mut DMatrix<f64>) {
    let o = basis.offset();
    let cols = x.ncols();
    if basis.constant {
        let s = f[0].re;
        x.row_mut(0).scale_mut(s);
    }
    for j in 0..basis.modes {
        let (rc, rs) = (o + 2 * j, o + 2 * j + 1);
        let (re, im) = (f[rc].re, f[rc].im);
        for col in 0..cols {
            let (c, s) = (x[(rc, col)], x[(rs, col)]);
            x[(rc, col)] = re * c + im * s;
            x[(rs, col)] = -im * c + re * s;
        }
    }
}

/// Adds the block-diagonal operator with symbols `f` to `x`.
fn add_blocks(basis: &Basis, f: &[Complex64], x: &mut DMatrix<f64>) {
    let o = basis.offset();
    if basis.constant {
        x[(0, 0)] += f[0].re;
    }
    for j in 0..basis.modes {
        let (rc, rs) = (o + 2 * j, o + 2 * j + 1);
        x[(rc, rc)] += f[rc].re;
        x[(rc, rs)] += f[rc].im;
        x[(rs, rc)] -= f[rc].im;
        x[(rs, rs)] += f[rc].re;
    }
}

fn blocks_to_dense(basis: &Basis, f: &[Complex64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    add_blocks(basis, f, &mut m);
    m
}

/// `A z = Ω B z` for one `(family, c, ν, λ)` point.
#[derive(Clone, Debug)]
pub struct EigenPencil {
    pub family: StabilityFamily,
    pub c: f64,
    pub nu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub grid: PencilGrid,
    /// The weight actually used.
    pub weight: f64,
    basis: Basis,
    a: DMatrix<f64>,
    b: Vec<Complex64>,
}

impl EigenPencil {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `B` as a dense matrix; it is block diagonal.
    pub fn b(&self) -> DMatrix<f64> {
        blocks_to_dense(&self.basis, &self.b)
    }

    /// `B⁻¹A`, whose eigenvalues are the pencil's.
    pub fn reduced(&self) -> DMatrix<f64> {
        let inv: Vec<Complex64> = self.b.iter().map(|z| z.inv()).collect();
        let mut m = self.a.clone();
        apply_blocks(&self.basis, &inv, &mut m);
        m
    }

    /// Basis coefficients of a real function of `ξ` (in the weighted variable).
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.basis.project(f)
    }

    /// The eigenfunction `z(ξ) = e^{aξ} w(ξ)` for basis coefficients of `w`.
    pub fn eigenfunction(&self, coeffs: &[Complex64], xi: f64) -> Complex64 {
        self.basis.evaluate(coeffs, xi) * (self.weight * xi).exp()
    }
}

/// The operator `𝓛` in the unweighted basis including the constant mode.
///
/// The basis is orthogonal with equal norms, so the matrix is symmetric
/// exactly when `𝓛` is self-adjoint.
pub fn schrodinger_matrix(kappa: f64, grid: &PencilGrid) -> DMatrix<f64> {
    let basis = Basis::new(grid.n, grid.length, true);
    schrodinger(&basis, kappa, 0.0)
}

/// Basis coefficients of `f` in the basis of [`schrodinger_matrix`].
pub fn project_unweighted(grid: &PencilGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    Basis::new(grid.n, grid.length, true).project(f)
}

fn schrodinger(basis: &Basis, kappa: f64, weight: f64) -> DMatrix<f64> {
    let k2 = kappa * kappa;
    let mut l = basis.even_potential(|xi| {
        let s = 1.0 / (kappa * xi).cosh();
        6.0 * k2 * s * s
    });
    let d = basis.symbols(weight);
    let second: Vec<Complex64> = d.iter().map(|z| z * z - k2).collect();
    add_blocks(basis, &second, &mut l);
    l
}

pub fn build_pencil(
    family: StabilityFamily,
    c: f64,
    nu: f64,
    lambda: f64,
    grid: &PencilGrid,
) -> Result<EigenPencil> {
    let kappa = family.kappa(c, nu)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be non-negative"
        )));
    }
    if grid.n < 8 || !grid.n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "pencil needs an even N ≥ 8, got {}",
            grid.n
        )));
    }
    let required = MIN_WIDTHS / kappa;
    if grid.length < required {
        return Err(Error::DomainTooNarrow {
            length: grid.length,
            required,
        });
    }
    let weight = grid.weight_for(kappa);
    let basis = Basis::new(grid.n, grid.length, weight != 0.0);
    let d = basis.symbols(weight);
    let lam2 = lambda * lambda;

    let (p, q, b): (Vec<_>, Vec<_>, Vec<_>) = match family {
        StabilityFamily::Whitham => d
            .iter()
            .map(|&z| {
                let z2 = z * z;
                (nu * z2, -0.5 * nu * lam2 * z2 - 0.5 * lam2, -z)
            })
            .fold((vec![], vec![], vec![]), push3),
        StabilityFamily::Bbm => d
            .iter()
            .map(|&z| {
                let z2 = z * z;
                let q = Complex64::new(-lam2 / (2.0 * nu * c), 0.0);
                (z2, q, z * z2 / c - z / (nu * c))
            })
            .fold((vec![], vec![], vec![]), push3),
    };

    let mut a = schrodinger(&basis, kappa, weight);
    apply_blocks(&basis, &p, &mut a);
    add_blocks(&basis, &q, &mut a);

    Ok(EigenPencil {
        family,
        c,
        nu,
        lambda,
        kappa,
        grid: *grid,
        weight,
        basis,
        a,
        b,
    })
}

type Triple = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);

fn push3(mut acc: Triple, x: (Complex64, Complex64, Complex64)) -> Triple {
    acc.0.push(x.0);
    acc.1.push(x.1);
    acc.2.push(x.2);
    acc
}

/// Spectrum of a pencil, leading eigenvalue first.
#[derive(Clone, Debug)]
pub struct GrowthSpectrum {
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub leading: Complex64,
    /// Basis coefficients of the leading eigenvector, unit 2-norm.
    pub leading_vector: Vec<Complex64>,
}

impl GrowthSpectrum {
    pub fn leading_rate(&self) -> f64 {
        self.leading.re
    }

    /// Eigenvalue of smallest modulus.
    pub fn smallest(&self) -> Complex64 {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default()
    }
}

/// Dense eigensolve of the pencil.
pub fn growth_rates(pencil: &EigenPencil) -> Result<GrowthSpectrum> {
    let m = pencil.reduced();
    let n = m.nrows();
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-15, 200 * n)
        .ok_or_else(|| Error::EigensolveFailure(format!("Schur iteration did not converge (n = {n})")))?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolveFailure("non-finite eigenvalue".into()));
    }
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let leading = eigenvalues[0];
    let leading_vector = inverse_iteration(&m, leading)?;
    Ok(GrowthSpectrum {
        eigenvalues,
        leading,
        leading_vector,
    })
}

/// Eigenvector for a known eigenvalue by shifted inverse iteration.
fn inverse_iteration(m: &DMatrix<f64>, omega: Complex64) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    let shift = omega + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let v = Complex64::new(m[(i, j)], 0.0);
        if i == j {
            v - shift
        } else {
            v
        }
    });
    let lu = shifted.lu();
    let mut x = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    for _ in 0..3 {
        x = lu
            .solve(&x)
            .ok_or_else(|| Error::EigensolveFailure("singular shifted matrix".into()))?;
        let norm = x.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::EigensolveFailure("inverse iteration broke down".into()));
        }
        x /= Complex64::new(norm, 0.0);
    }
    Ok(x.iter().copied().collect())
}

/// Result of fitting `Re Ω(λ) ≈ aλ + bλ²`.
#[derive(Clone, Debug)]
pub struct Omega1Fit {
    /// Estimate of `Ω₁`.
    pub a: f64,
    /// Empirical `λ²` coefficient; not asserted to equal `Ω₂`.
    pub b: f64,
    /// `(λ, leading Ω)` for each sampled `λ`.
    pub points: Vec<(f64, Complex64)>,
}

/// Least-squares slope of the leading growth rate over small `λ`.
pub fn fit_omega1(
    family: StabilityFamily,
    c: f64,
    nu: f64,
    lambdas: &[f64],
    grid: &PencilGrid,
    exec: Execution,
) -> Result<Omega1Fit> {
    if lambdas.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "fitting Ω₁ needs at least 3 values of λ, got {}",
            lambdas.len()
        )));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && **l <= 0.2)) {
        return Err(Error::InvalidParameter(format!("λ = {bad} is outside (0, 0.2]")));
    }
    let results = map_collect(exec, lambdas, |&lambda| {
        build_pencil(family, c, nu, lambda, grid).and_then(|p| growth_rates(&p))
    });
    let mut points = Vec::with_capacity(lambdas.len());
    for (&lambda, r) in lambdas.iter().zip(results) {
        points.push((lambda, r?.leading));
    }
    Omega1Fit::from_points(points)
}

impl Omega1Fit {
    /// Least-squares fit of `Re Ω ≈ aλ + bλ²` through already computed
    /// `(λ, Ω)` pairs.
    pub fn from_points(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "fitting Ω₁ needs at least 3 values of λ, got {}",
                points.len()
            )));
        }
        // normal equations for the two-parameter model through the origin
        let (mut s2, mut s3, mut s4, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, om) in &points {
            s2 += l * l;
            s3 += l * l * l;
            s4 += l.powi(4);
            y1 += l * om.re;
            y2 += l * l * om.re;
        }
        let det = s2 * s4 - s3 * s3;
        if det.abs() <= 1e-300 {
            return Err(Error::InvalidParameter("λ values must be distinct".into()));
        }
        let a = (y1 * s4 - y2 * s3) / det;
        let b = (s2 * y2 - s3 * y1) / det;
        Ok(Omega1Fit { a, b, points })
    }
}
