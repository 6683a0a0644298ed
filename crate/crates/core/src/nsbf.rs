//! Neumann series of spherical Bessel functions: coefficient recursion and
//! evaluation of the solutions `S`, `C`, `e` and their derivatives.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::ConductivityProfile;
use crate::quadrature::{cumulative_integral, MeshFunction};
use crate::specfun::{fill_spherical_bessel, legendre_coefficients};
use crate::spps::FormalPowerTable;
use crate::fmt_real;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 120;

/// Coefficients `σ_m` and `α_m = σ_m/x^m`, `m = 0..=N`, on the profile mesh.
#[derive(Debug, Clone)]
pub struct NsbfCoefficientTable {
    profile: ConductivityProfile,
    sigma: Vec<MeshFunction>,
    alpha: Vec<MeshFunction>,
}

impl NsbfCoefficientTable {
    pub fn profile(&self) -> &ConductivityProfile {
        &self.profile
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn sigma(&self, m: usize) -> &MeshFunction {
        &self.sigma[m]
    }

    pub fn alpha(&self, m: usize) -> &MeshFunction {
        &self.alpha[m]
    }

    /// `α_0(x_j), …, α_N(x_j)`.
    pub fn alpha_at(&self, x_index: usize) -> Vec<f64> {
        self.alpha.iter().map(|a| a[x_index]).collect()
    }

    /// Writes `x, σ_0, …, σ_N` as CSV.
    pub fn write_sigma_csv(&self, mut out: impl Write) -> io::Result<()> {
        let mut header = String::from("x");
        for m in 0..=self.order() {
            header.push_str(&format!(",sigma_{m}"));
        }
        writeln!(out, "{header}")?;
        for (j, x) in self.profile.mesh().nodes().enumerate() {
            let mut line = fmt_real(x);
            for s in &self.sigma {
                line.push(',');
                line.push_str(&fmt_real(s[j]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Runs the two-step σ recursion up to order `order`.
pub fn compute_coefficients(profile: &ConductivityProfile, order: usize) -> NsbfCoefficientTable {
    let mesh = *profile.mesh();
    let kappa = profile.kappa();
    let kappa_prime = profile.kappa_prime();
    let inv = cumulative_integral(&kappa.map(|_, k| 1.0 / k));
    let mut sigma: Vec<MeshFunction> = Vec::with_capacity(order + 1);
    sigma.push(inv.map(|x, v| x - v));
    if order >= 1 {
        let inner = cumulative_integral(kappa);
        let outer = cumulative_integral(&inner.zip_map(kappa, |_, v, k| v / k));
        sigma.push(outer.map(|x, v| 1.5 * x * x - 3.0 * v));
    }
    for m in 2..=order {
        let prev = &sigma[m - 2];
        let mf = m as f64;
        let weight = kappa.zip_map(kappa_prime, |x, k, d| 2.0 * (mf - 1.0) * k + x * d);
        let inner = cumulative_integral(&weight.zip_map(prev, |_, w, s| w * s));
        let theta = inner.zip_map(kappa, |_, v, k| v / k);
        let c = 2.0 * mf - 1.0;
        let integrand = prev.zip_map(&theta, |t, s, th| 2.0 * c * t * s - c * th);
        let eta = cumulative_integral(&integrand);
        let factor = (2.0 * mf + 1.0) / (2.0 * mf - 3.0);
        sigma.push(prev.zip_map(&eta, |x, s, e| factor * (x * x * s - e)));
    }
    let alpha = sigma
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let cutoff = origin_cutoff(mesh.step(), m);
            s.map(|x, v| if x == 0.0 || x < cutoff { 0.0 } else { divide_power(v, x, m) })
        })
        .collect();
    NsbfCoefficientTable {
        profile: profile.clone(),
        sigma,
        alpha,
    }
}

/// Lowest order whose coefficient is zeroed near the origin.
pub const CUTOFF_FROM_ORDER: usize = 4;

/// `α_m(x)` is taken as zero for `x` below this value: `10hm` from
/// [`CUTOFF_FROM_ORDER`] on, otherwise only at `x = 0`. Quadrature round-off in
/// `σ_m ~ x^{m+1}` is amplified by `x^{−m}` there, while `j_m(ρx)` is negligible.
pub fn origin_cutoff(step: f64, m: usize) -> f64 {
    if m < CUTOFF_FROM_ORDER {
        0.0
    } else {
        10.0 * step * m as f64
    }
}

fn divide_power(v: f64, x: f64, m: usize) -> f64 {
    let p = x.powi(m as i32);
    if p.is_normal() && p.is_finite() {
        let q = v / p;
        if q.is_finite() {
            return q;
        }
    }
    if v == 0.0 {
        return 0.0;
    }
    v.signum() * (v.abs().ln() - m as f64 * x.ln()).exp()
}

/// `α_n = (2n+1) Σ_k l_{k,n}/(k+1) · (x^{k+1} − φ^{(k+1)})/x^k`, with the same
/// near-origin convention as [`compute_coefficients`].
pub fn alpha_via_formal_powers(fp: &FormalPowerTable, n: usize) -> Result<MeshFunction> {
    if fp.order_max() < n + 1 {
        return Err(Error::InvalidArgument(format!(
            "order {n} needs formal powers up to {}, table has {}",
            n + 1,
            fp.order_max()
        )));
    }
    let legendre = legendre_coefficients(n);
    let l = legendre[n].coeffs();
    let mesh = *fp.profile().mesh();
    let cutoff = origin_cutoff(mesh.step(), n);
    let values = mesh
        .nodes()
        .enumerate()
        .map(|(j, x)| {
            if x == 0.0 || x < cutoff {
                return 0.0;
            }
            let sum: f64 = (0..=n)
                .filter(|&k| l[k] != 0.0)
                .map(|k| {
                    let phi = fp.power(k + 1)[j];
                    l[k] / (k as f64 + 1.0) * (x.powi(k as i32 + 1) - phi) / x.powi(k as i32)
                })
                .sum();
            (2.0 * n as f64 + 1.0) * sum
        })
        .collect();
    MeshFunction::new(mesh, values)
}

/// `|Σ_{n≤N} α_n(x)/(2x) − (1 − 1/√κ(x))|`.
pub fn goursat_residual(table: &NsbfCoefficientTable, x_index: usize, n_used: usize) -> Result<f64> {
    check_index(table, x_index)?;
    check_order(table, n_used)?;
    if x_index == 0 {
        return Err(Error::InvalidArgument("the Goursat residual needs x > 0".into()));
    }
    let x = table.profile.mesh().node(x_index);
    let sum: f64 = (0..=n_used).map(|n| table.alpha[n][x_index]).sum();
    let k = table.profile.kappa()[x_index];
    Ok((sum / (2.0 * x) - (1.0 - 1.0 / k.sqrt())).abs())
}

fn check_index(table: &NsbfCoefficientTable, x_index: usize) -> Result<()> {
    let len = table.profile.mesh().points();
    if x_index >= len {
        return Err(Error::IndexOutOfRange { index: x_index, len });
    }
    Ok(())
}

fn check_order(table: &NsbfCoefficientTable, n_used: usize) -> Result<()> {
    if n_used > table.order() {
        return Err(Error::InvalidArgument(format!(
            "requested {n_used} terms from a table of order {}",
            table.order()
        )));
    }
    Ok(())
}

/// Values of the three NSBF series at one `(ρ, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValues {
    pub s: Complex64,
    pub c: Complex64,
    pub e: Complex64,
}

/// Evaluates `S`, `C` and `e` together, sharing one Bessel sequence.
pub fn eval_series(
    table: &NsbfCoefficientTable,
    rho: Complex64,
    x_index: usize,
    n_used: usize,
) -> Result<SeriesValues> {
    check_index(table, x_index)?;
    check_order(table, n_used)?;
    Ok(series_unchecked(table, rho, x_index, n_used))
}

fn series_unchecked(table: &NsbfCoefficientTable, rho: Complex64, x_index: usize, n_used: usize) -> SeriesValues {
    let x = table.profile.mesh().node(x_index);
    let z = rho * x;
    let mut j = vec![Complex64::new(0.0, 0.0); n_used.max(1) + 1];
    fill_spherical_bessel(z, &mut j);
    let mut even = Complex64::new(0.0, 0.0);
    let mut odd = Complex64::new(0.0, 0.0);
    for n in 0..=n_used {
        let a = table.alpha[n][x_index];
        if a == 0.0 {
            continue;
        }
        let term = j[n] * a;
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if n % 2 == 0 {
            even += term * sign;
        } else {
            odd += term * sign;
        }
    }
    // x·j_0(ρx) is sin(ρx)/ρ without the removable singularity
    let s = j[0] * x - even;
    let c = z.cos() + rho * odd;
    let e = c + Complex64::i() * rho * s;
    SeriesValues { s, c, e }
}

/// `S(ρ, x_j)` truncated after `α_{N_used}`.
pub fn eval_s(table: &NsbfCoefficientTable, rho: Complex64, x_index: usize, n_used: usize) -> Result<Complex64> {
    eval_series(table, rho, x_index, n_used).map(|v| v.s)
}

/// `C(ρ, x_j)` truncated after `α_{N_used}`.
pub fn eval_c(table: &NsbfCoefficientTable, rho: Complex64, x_index: usize, n_used: usize) -> Result<Complex64> {
    eval_series(table, rho, x_index, n_used).map(|v| v.c)
}

/// `e(ρ, x_j) = e^{iρx} − iρ Σ iⁿ α_n j_n(ρx)`.
pub fn eval_e(table: &NsbfCoefficientTable, rho: Complex64, x_index: usize, n_used: usize) -> Result<Complex64> {
    check_index(table, x_index)?;
    check_order(table, n_used)?;
    let x = table.profile.mesh().node(x_index);
    let z = rho * x;
    let mut j = vec![Complex64::new(0.0, 0.0); n_used + 1];
    fill_spherical_bessel(z, &mut j);
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..=n_used {
        sum += power * j[n] * table.alpha[n][x_index];
        power *= Complex64::i();
    }
    Ok((Complex64::i() * z).exp() - Complex64::i() * rho * sum)
}

fn check_pair(table: &NsbfCoefficientTable, recip: &NsbfCoefficientTable) -> Result<()> {
    if !table.profile.is_reciprocal_of(&recip.profile, 1e-12) {
        return Err(Error::MismatchedProfiles(format!(
            "{} is not the reciprocal of {}",
            recip.profile.label(),
            table.profile.label()
        )));
    }
    Ok(())
}

/// `S′_κ(ρ, x) = C_{1/κ}(ρ, x)/κ(x)`.
pub fn eval_s_prime(
    table: &NsbfCoefficientTable,
    recip: &NsbfCoefficientTable,
    rho: Complex64,
    x_index: usize,
    n_used: usize,
) -> Result<Complex64> {
    check_pair(table, recip)?;
    let c = eval_c(recip, rho, x_index, n_used)?;
    Ok(c / table.profile.kappa()[x_index])
}

/// `C′_κ(ρ, x) = −ρ² S_{1/κ}(ρ, x)/κ(x)`.
pub fn eval_c_prime(
    table: &NsbfCoefficientTable,
    recip: &NsbfCoefficientTable,
    rho: Complex64,
    x_index: usize,
    n_used: usize,
) -> Result<Complex64> {
    check_pair(table, recip)?;
    let s = eval_s(recip, rho, x_index, n_used)?;
    Ok(-rho * rho * s / table.profile.kappa()[x_index])
}

/// Tables for `κ` and `1/κ`, which together give `S`, `C` and both derivatives.
#[derive(Debug, Clone)]
pub struct DarbouxPair {
    direct: NsbfCoefficientTable,
    reciprocal: NsbfCoefficientTable,
}

/// `S`, `S′`, `C`, `C′` at one `(ρ, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionValues {
    pub s: Complex64,
    pub s_prime: Complex64,
    pub c: Complex64,
    pub c_prime: Complex64,
}

impl SolutionValues {
    /// `κ(C S′ − C′ S)`, identically one.
    pub fn wronskian(&self, kappa: f64) -> Complex64 {
        (self.c * self.s_prime - self.c_prime * self.s) * kappa
    }
}

impl DarbouxPair {
    pub fn new(profile: &ConductivityProfile, order: usize) -> Self {
        Self {
            direct: compute_coefficients(profile, order),
            reciprocal: compute_coefficients(&profile.reciprocal(), order),
        }
    }

    pub fn from_tables(direct: NsbfCoefficientTable, reciprocal: NsbfCoefficientTable) -> Result<Self> {
        check_pair(&direct, &reciprocal)?;
        if direct.order() != reciprocal.order() {
            return Err(Error::MismatchedProfiles(format!(
                "orders differ: {} vs {}",
                direct.order(),
                reciprocal.order()
            )));
        }
        Ok(Self { direct, reciprocal })
    }

    pub fn direct(&self) -> &NsbfCoefficientTable {
        &self.direct
    }

    pub fn reciprocal(&self) -> &NsbfCoefficientTable {
        &self.reciprocal
    }

    pub fn profile(&self) -> &ConductivityProfile {
        &self.direct.profile
    }

    pub fn order(&self) -> usize {
        self.direct.order()
    }

    /// The same pair viewed from `1/κ`.
    pub fn swapped(&self) -> Self {
        Self {
            direct: self.reciprocal.clone(),
            reciprocal: self.direct.clone(),
        }
    }

    pub fn eval(&self, rho: Complex64, x_index: usize, n_used: usize) -> Result<SolutionValues> {
        let d = eval_series(&self.direct, rho, x_index, n_used)?;
        let r = eval_series(&self.reciprocal, rho, x_index, n_used)?;
        let k = self.direct.profile.kappa()[x_index];
        Ok(SolutionValues {
            s: d.s,
            s_prime: r.c / k,
            c: d.c,
            c_prime: -rho * rho * r.s / k,
        })
    }
}
