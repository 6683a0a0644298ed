//! Spherical Bessel functions of the first kind and Legendre coefficients.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e100;

/// `j_0(z), …, j_N(z)` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselSequence {
    argument: Complex64,
    values: Vec<Complex64>,
}

impl BesselSequence {
    pub fn order_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn argument(&self) -> Complex64 {
        self.argument
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

impl std::ops::Index<usize> for BesselSequence {
    type Output = Complex64;

    fn index(&self, n: usize) -> &Complex64 {
        &self.values[n]
    }
}

/// Spherical Bessel functions `j_n(z)` for `n = 0..=order_max`.
///
/// Small arguments use the power series. Otherwise Miller's downward
/// recurrence `j_{n−1} = (2n+1)/z · j_n − j_{n+1}` is started far enough above
/// both `order_max` and the turning point `n ≈ |z|`, then scaled to whichever
/// of the closed forms `j_0 = sin z / z`, `j_1 = sin z / z² − cos z / z` is
/// larger in modulus (the two never vanish together).
pub fn spherical_bessel_sequence(order_max: usize, z: Complex64) -> BesselSequence {
    let mut values = vec![Complex64::new(0.0, 0.0); order_max + 1];
    fill_spherical_bessel(z, &mut values);
    BesselSequence {
        argument: z,
        values,
    }
}

/// Allocation-free variant of [`spherical_bessel_sequence`]; fills `out[n] = j_n(z)`.
pub fn fill_spherical_bessel(z: Complex64, out: &mut [Complex64]) {
    if out.is_empty() {
        return;
    }
    let radius = z.norm();
    if radius == 0.0 {
        out.fill(Complex64::new(0.0, 0.0));
        out[0] = Complex64::new(1.0, 0.0);
    } else if radius < SERIES_RADIUS {
        fill_series(z, out);
    } else {
        fill_miller(z, out);
    }
}

fn fill_series(z: Complex64, out: &mut [Complex64]) {
    let half_z2 = -0.5 * z * z;
    let mut prefactor = Complex64::new(1.0, 0.0);
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            prefactor *= z / (2 * n + 1) as f64;
        }
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..60 {
            term *= half_z2 / (k * (2 * n + 2 * k + 1)) as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        *slot = prefactor * sum;
    }
}

fn miller_start(order_max: usize, radius: f64) -> usize {
    let top = order_max.max(radius.ceil() as usize);
    top + 20 + (10.0 * (0.5 * radius).cbrt()).ceil() as usize
}

fn fill_miller(z: Complex64, out: &mut [Complex64]) {
    let order_max = out.len() - 1;
    let start = miller_start(order_max, z.norm());
    let inv_z = z.inv();

    let mut upper = Complex64::new(0.0, 0.0);
    let mut current = Complex64::new(1e-30, 0.0);
    let mut j1_trial = Complex64::new(0.0, 0.0);
    for n in (1..=start).rev() {
        let lower = (2 * n + 1) as f64 * inv_z * current - upper;
        upper = current;
        current = lower;
        if n - 1 <= order_max {
            out[n - 1] = current;
        }
        if n - 1 == 1 {
            j1_trial = current;
        }
        if current.norm() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            upper *= s;
            j1_trial *= s;
            let from = n - 1;
            if from <= order_max {
                for v in out[from..].iter_mut() {
                    *v *= s;
                }
            }
        }
    }
    let j0_trial = current;

    let (sin, cos) = (z.sin(), z.cos());
    let j0 = sin * inv_z;
    let j1 = sin * inv_z * inv_z - cos * inv_z;
    let scale = if j0.norm() >= j1.norm() {
        j0 / j0_trial
    } else {
        j1 / j1_trial
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    // exact closed forms for the two lowest orders
    out[0] = j0;
    if order_max >= 1 {
        out[1] = j1;
    }
}

/// Power-basis coefficients of a Legendre polynomial, `P_n(z) = Σ_k l_{k,n} z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreCoefficients {
    coeffs: Vec<f64>,
}

impl LegendreCoefficients {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `l_{0,n}, …, l_{n,n}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// Coefficient arrays of `P_0, …, P_{degree_max}` from
/// `(n+1)P_{n+1} = (2n+1)zP_n − nP_{n−1}`.
///
/// Coefficients grow roughly like `2^n`; beyond degree ~60 the power basis
/// loses most significant digits when summed near `|z| = 1`.
pub fn legendre_coefficients(degree_max: usize) -> Vec<LegendreCoefficients> {
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(degree_max + 1);
    polys.push(vec![1.0]);
    if degree_max >= 1 {
        polys.push(vec![0.0, 1.0]);
    }
    for n in 1..degree_max {
        let mut next = vec![0.0; n + 2];
        for (k, &c) in polys[n].iter().enumerate() {
            next[k + 1] += (2 * n + 1) as f64 * c;
        }
        for (k, &c) in polys[n - 1].iter().enumerate() {
            next[k] -= n as f64 * c;
        }
        let inv = 1.0 / (n + 1) as f64;
        next.iter_mut().for_each(|c| *c *= inv);
        polys.push(next);
    }
    polys
        .into_iter()
        .map(|coeffs| LegendreCoefficients { coeffs })
        .collect()
}
