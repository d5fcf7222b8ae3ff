use num_complex::Complex64;

/// Below this `|z|` the φ-functions are summed from their Taylor series.
const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 12;

/// `(φ₁, φ₂, φ₃)(z)` with `φ_j(z) = Σ_n zⁿ/(n + j)!`.
pub fn phi123(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    if z.norm() < SERIES_RADIUS {
        let mut sums = [Complex64::new(0.0, 0.0); 3];
        let mut power = one;
        for n in 0..SERIES_TERMS {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += power / factorial(n + j + 1);
            }
            power *= z;
        }
        (sums[0], sums[1], sums[2])
    } else {
        let e = z.exp();
        let p1 = (e - one) / z;
        let p2 = (e - one - z) / (z * z);
        let p3 = (e - one - z - z * z / 2.0) / (z * z * z);
        (p1, p2, p3)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Per-mode coefficients of the Cox–Matthews fourth-order exponential
/// time-differencing Runge–Kutta scheme for `u_t = L u + N(u)` with diagonal `L`.
#[derive(Clone, Debug)]
pub struct Etdrk4Coefficients {
    pub e: Vec<Complex64>,
    pub e2: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f3: Vec<Complex64>,
}

impl Etdrk4Coefficients {
    pub fn new(linear: &[Complex64], dt: f64) -> Self {
        let n = linear.len();
        let mut c = Etdrk4Coefficients {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in linear {
            let z = l * dt;
            let (p1, p2, p3) = phi123(z);
            let (h1, _, _) = phi123(z / 2.0);
            c.e.push(z.exp());
            c.e2.push((z / 2.0).exp());
            c.q.push(h1 * (dt / 2.0));
            c.f1.push((p1 - 3.0 * p2 + 4.0 * p3) * dt);
            c.f2.push((p2 - 2.0 * p3) * dt);
            c.f3.push((-p2 + 4.0 * p3) * dt);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for &arg in &[0.0999, 0.1001] {
            for &z in &[Complex64::new(0.0, arg), Complex64::new(arg, 0.0)] {
                let (a1, a2, a3) = phi123(z);
                let e = z.exp();
                let one = Complex64::new(1.0, 0.0);
                let b1 = (e - one) / z;
                assert!((a1 - b1).norm() < 1e-14);
                assert!((a2 - (e - one - z) / (z * z)).norm() < 1e-12);
                assert!((a3 - (e - one - z - z * z / 2.0) / (z * z * z)).norm() < 1e-10);
            }
        }
        let (p1, p2, p3) = phi123(Complex64::new(0.0, 0.0));
        assert_eq!((p1.re, p2.re, p3.re), (1.0, 0.5, 1.0 / 6.0));
    }

    #[test]
    fn zero_linear_part_reduces_to_classical_weights() {
        let c = Etdrk4Coefficients::new(&[Complex64::new(0.0, 0.0)], 0.5);
        assert!((c.f1[0].re - 0.5 / 6.0).abs() < 1e-16);
        assert!((c.f2[0].re - 0.5 / 6.0).abs() < 1e-16);
        assert!((c.f3[0].re - 0.5 / 6.0).abs() < 1e-16);
        assert!((c.q[0].re - 0.25).abs() < 1e-16);
    }
}
