//! Adaptive Gauss–Kronrod quadrature of the solvability integrals.
//!
//! Every integral is over the whole line and is truncated to `|κξ| ≤ 40`,
//! where the integrands are below `e⁻³⁹`. The interval is split at `ξ = 0`
//! so that the series-patched `coth` products are only ever sampled in the
//! interior of a panel.

use serde::Serialize;

use crate::waves::profile::{antiderivative, coth_dr, d2r, d3r, dr, r, z1_bbm_prime, z1_whitham_prime};

/// Truncation of the integration range in units of the soliton width.
pub const WIDTHS: f64 = 40.0;

// nodes and weights as tabulated, to more digits than f64 holds
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: the estimate and its difference from the
/// embedded 7-point Gauss rule.
fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let sum = f(mid - dx) + f(mid + dx);
        k += WGK[i] * sum;
        if i % 2 == 1 {
            g += WG[i / 2] * sum;
        }
    }
    (k * half, (k - g).abs() * half)
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_PANELS: usize = 4000;
    let (est, err) = kronrod(&f, a, b);
    let mut panels = vec![(a, b, est, err)];
    let mut panel_count = 1;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= tol || panel_count >= MAX_PANELS {
            break;
        }
        // bisect the worst panel
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let pm = 0.5 * (pa + pb);
        let (e1, r1) = kronrod(&f, pa, pm);
        let (e2, r2) = kronrod(&f, pm, pb);
        panels.push((pa, pm, e1, r1));
        panels.push((pm, pb, e2, r2));
        panel_count += 1;
    }
    // sum in a fixed order so the result does not depend on the bisection history
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    panels.iter().map(|p| p.2).sum()
}

/// `∫ f` over the whole line for an integrand localized on the scale `1/κ`.
pub fn line_integral(kappa: f64, f: impl Fn(f64) -> f64) -> f64 {
    let edge = WIDTHS / kappa;
    let tol = 1e-14;
    integrate(&f, -edge, 0.0, tol) + integrate(&f, 0.0, edge, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerProductEntry {
    pub name: &'static str,
    pub computed: f64,
    pub closed_form: f64,
}

impl InnerProductEntry {
    pub fn abs_error(&self) -> f64 {
        (self.computed - self.closed_form).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerProductTable {
    pub kappa: f64,
    pub nu: f64,
    pub omega1: f64,
    pub entries: Vec<InnerProductEntry>,
}

impl InnerProductTable {
    pub fn max_abs_error(&self) -> f64 {
        self.entries
            .iter()
            .map(InnerProductEntry::abs_error)
            .fold(0.0, f64::max)
    }

    /// Number of entries within `tol` of their closed form.
    pub fn passing(&self, tol: f64) -> usize {
        self.entries.iter().filter(|e| e.abs_error() <= tol).count()
    }
}

/// The nine integrals entering the Whitham-type solvability condition, with
/// `a₀ = 1`, `ν = 1` and `Ω₁ = 1` in `z₁`.
pub fn inner_product_table(kappa: f64) -> InnerProductTable {
    inner_product_table_with(kappa, 1.0, 1.0)
}

pub fn inner_product_table_with(kappa: f64, nu: f64, omega1: f64) -> InnerProductTable {
    let k = kappa;
    let rr = |xi: f64| r(k, xi);
    let anti = |xi: f64| antiderivative(k, xi);
    let entry = |name, computed, closed_form| InnerProductEntry {
        name,
        computed,
        closed_form,
    };
    let entries = vec![
        entry("<R,R>", line_integral(k, |x| rr(x) * rr(x)), 2.0 / k),
        entry("<R',R>", line_integral(k, |x| dr(k, x) * rr(x)), 0.0),
        entry("<R'',R>", line_integral(k, |x| d2r(k, x) * rr(x)), -2.0 * k / 3.0),
        entry(
            "<k xi R',R>",
            line_integral(k, |x| k * x * dr(k, x) * rr(x)),
            -1.0,
        ),
        entry(
            "<R' coth(k xi),R>",
            line_integral(k, |x| coth_dr(k, x) * rr(x)),
            -2.0,
        ),
        entry("<z0,r>/a0", line_integral(k, |x| dr(k, x) * anti(x)), -2.0 / k),
        entry("<z0',r>/a0", line_integral(k, |x| d2r(k, x) * anti(x)), 0.0),
        entry(
            "<z0'',r>/a0",
            line_integral(k, |x| d3r(k, x) * anti(x)),
            2.0 * k / 3.0,
        ),
        entry(
            "<z1',r>",
            line_integral(k, |x| z1_whitham_prime(k, nu, omega1, 1.0, x) * anti(x)),
            omega1 / (2.0 * k.powi(3) * nu),
        ),
    ];
    InnerProductTable {
        kappa,
        nu,
        omega1,
        entries,
    }
}

/// The additional integrals of the BBM-type condition, with `a₀ = 1`.
///
/// `⟨z₀‴, r⟩` and `⟨z₁‴, r⟩` are integrated by parts to `−⟨R‴, R⟩` and
/// `⟨z₁′, R′⟩`, which only need the tabulated derivatives.
pub fn bbm_inner_products(kappa: f64, nu: f64, c: f64, omega1: f64) -> InnerProductTable {
    let k = kappa;
    let k2nu = k * k * nu;
    let z1p = |x: f64| z1_bbm_prime(k, nu, c, omega1, 1.0, x);
    let entries = vec![
        InnerProductEntry {
            name: "<z0''',r>/a0",
            computed: -line_integral(k, |x| d3r(k, x) * r(k, x)),
            closed_form: 0.0,
        },
        InnerProductEntry {
            name: "<z1',r>",
            computed: line_integral(k, |x| z1p(x) * antiderivative(k, x)),
            closed_form: omega1 * (k2nu + 1.0) / (2.0 * k.powi(3) * nu * c),
        },
        InnerProductEntry {
            name: "<z1''',r>",
            computed: line_integral(k, |x| z1p(x) * dr(k, x)),
            closed_form: omega1 * (k2nu - 3.0) / (6.0 * k * nu * c),
        },
    ];
    InnerProductTable {
        kappa,
        nu,
        omega1,
        entries,
    }
}
