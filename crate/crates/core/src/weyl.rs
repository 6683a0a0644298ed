//! Dirichlet and Neumann Weyl functions from the NSBF series.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt_real;
use crate::nsbf::{eval_series, DarbouxPair, NsbfCoefficientTable};

/// Evaluations closer than this to a listed eigenvalue are refused.
pub const POLE_GUARD: f64 = 1e-8;

/// Grid nodes within `EXCLUSION · (1 + |λ_n|)` of a pole are flagged, not evaluated.
pub const EXCLUSION: f64 = 1e-3;

/// Which Weyl function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylKind {
    Dirichlet,
    Neumann,
}

/// `√λ` with `Re ≥ 0`, and `Im ≥ 0` on the imaginary axis.
pub fn principal_sqrt(lambda: Complex64) -> Complex64 {
    let r = lambda.sqrt();
    if r.re == 0.0 && r.im < 0.0 {
        -r
    } else {
        r
    }
}

fn guard(lambda: Complex64, poles: &[f64], radius: impl Fn(f64) -> f64) -> Result<()> {
    if let Some(&p) = poles.iter().find(|&&p| (lambda - p).norm() < radius(p)) {
        return Err(Error::PoleProximity {
            lambda,
            nearest: p,
            radius: radius(p),
        });
    }
    Ok(())
}

/// `C(ρ, L)/S(ρ, L)` for a single table, without pole checks.
pub fn weyl_ratio(table: &NsbfCoefficientTable, rho: Complex64, n_used: usize) -> Result<Complex64> {
    let last = table.profile().mesh().last();
    let v = eval_series(table, rho, last, n_used)?;
    Ok(v.c / v.s)
}

/// `M^D(λ) = C(√λ, L)/S(√λ, L)`.
///
/// `poles` lists known Dirichlet eigenvalues; `λ` within [`POLE_GUARD`] of one
/// is rejected. Pass an empty slice to skip the check.
pub fn weyl_dirichlet(pair: &DarbouxPair, lambda: Complex64, n_used: usize, poles: &[f64]) -> Result<Complex64> {
    guard(lambda, poles, |_| POLE_GUARD)?;
    weyl_ratio(pair.direct(), principal_sqrt(lambda), n_used)
}

/// `M^N(μ) = −M^D_{1/κ}(μ)/μ`, equal to `S′(ρ, L)/C′(ρ, L)`.
///
/// `poles` lists known positive Neumann eigenvalues.
pub fn weyl_neumann(pair: &DarbouxPair, mu: Complex64, n_used: usize, poles: &[f64]) -> Result<Complex64> {
    if mu == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAtZero);
    }
    guard(mu, poles, |_| POLE_GUARD)?;
    let m = weyl_ratio(pair.reciprocal(), principal_sqrt(mu), n_used)?;
    Ok(-m / mu)
}

/// Estimate of `lim_{λ→λ_n} (λ − λ_n) f(λ)` along `λ_n + 10^{−k}`, `k = 2..=6`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    /// Richardson-extrapolated value from the two smallest offsets.
    pub value: Complex64,
    /// Raw products `(λ − λ_n) f(λ)` per offset.
    pub samples: Vec<Complex64>,
    /// `|value − previous extrapolation|`, a confidence indicator.
    pub spread: f64,
}

pub fn extract_residue(f: impl Fn(Complex64) -> Result<Complex64>, pole: f64) -> Result<Residue> {
    let offsets: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
    let samples = offsets
        .iter()
        .map(|&eps| Ok(f(Complex64::new(pole + eps, 0.0))? * eps))
        .collect::<Result<Vec<_>>>()?;
    // first-order error in ε; consecutive offsets differ by a factor 10
    let extrapolated: Vec<Complex64> = samples.windows(2).map(|w| (10.0 * w[1] - w[0]) / 9.0).collect();
    let n = extrapolated.len();
    Ok(Residue {
        value: extrapolated[n - 1],
        spread: (extrapolated[n - 1] - extrapolated[n - 2]).norm(),
        samples,
    })
}

/// Residue of `M^D` at a Dirichlet eigenvalue (`1/β_n` in theory).
pub fn dirichlet_residue(pair: &DarbouxPair, pole: f64, n_used: usize) -> Result<Residue> {
    extract_residue(|l| weyl_dirichlet(pair, l, n_used, &[]), pole)
}

/// Residue of `M^N` at a positive Neumann eigenvalue (`−1/γ_n` in theory).
pub fn neumann_residue(pair: &DarbouxPair, pole: f64, n_used: usize) -> Result<Residue> {
    extract_residue(|l| weyl_neumann(pair, l, n_used, &[]), pole)
}

/// Rectangle `[re_min, re_max] × [im_min, im_max]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        let ok_range = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a <= b;
        if !ok_range(self.re_range) || !ok_range(self.im_range) {
            return Err(Error::InvalidArgument(format!(
                "grid ranges must be finite and ordered: re {:?}, im {:?}",
                self.re_range, self.im_range
            )));
        }
        if self.n_re < 2 || self.n_im < 1 {
            return Err(Error::InvalidArgument(format!(
                "grid needs n_re ≥ 2 and n_im ≥ 1, got {} × {}",
                self.n_re, self.n_im
            )));
        }
        if self.n_im == 1 && self.im_range.0 != self.im_range.1 {
            return Err(Error::InvalidArgument("a single imaginary row needs im_min = im_max".into()));
        }
        Ok(())
    }

    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 || i + 1 == n {
            return if n == 1 { range.0 } else { range.1 };
        }
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }

    pub fn re(&self, i: usize) -> f64 {
        Self::axis(self.re_range, self.n_re, i)
    }

    pub fn im(&self, i: usize) -> f64 {
        Self::axis(self.im_range, self.n_im, i)
    }
}

/// A sign jump of `M` along the real axis, between two evaluated nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpAnnotation {
    pub lambda_left: f64,
    pub lambda_right: f64,
    /// The listed pole inside `[lambda_left, lambda_right]`, if any.
    pub pole: Option<f64>,
}

/// Weyl function values on a rectangular grid, row-major in the imaginary part.
#[derive(Debug, Clone)]
pub struct WeylGrid {
    pub spec: GridSpec,
    pub kind: WeylKind,
    /// `None` marks nodes inside an exclusion disc.
    pub values: Vec<Option<Complex64>>,
    /// Poles used for exclusion.
    pub poles: Vec<f64>,
}

impl WeylGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> Option<Complex64> {
        self.values[i_im * self.spec.n_re + i_re]
    }

    pub fn lambda(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(self.spec.re(i_re), self.spec.im(i_im))
    }

    /// Row index of the real axis, if the grid contains it.
    pub fn real_row(&self) -> Option<usize> {
        (0..self.spec.n_im).find(|&i| self.spec.im(i) == 0.0)
    }

    /// Jumps from negative to positive `Re M` between consecutive evaluated
    /// nodes on the real axis; these sit at the poles since `M` decreases
    /// between them.
    pub fn real_axis_jumps(&self) -> Vec<JumpAnnotation> {
        let Some(row) = self.real_row() else {
            return Vec::new();
        };
        let evaluated: Vec<(f64, f64)> = (0..self.spec.n_re)
            .filter_map(|i| self.value(i, row).map(|v| (self.spec.re(i), v.re)))
            .collect();
        evaluated
            .windows(2)
            .filter(|w| w[0].1 < 0.0 && w[1].1 > 0.0)
            .map(|w| JumpAnnotation {
                lambda_left: w[0].0,
                lambda_right: w[1].0,
                pole: self.poles.iter().copied().find(|&p| p >= w[0].0 && p <= w[1].0),
            })
            .collect()
    }

    /// Writes `re_lambda, im_lambda, re_M, im_M, near_pole_flag`.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "re_lambda,im_lambda,re_M,im_M,near_pole_flag")?;
        for i_im in 0..self.spec.n_im {
            for i_re in 0..self.spec.n_re {
                let l = self.lambda(i_re, i_im);
                let (m, flag) = match self.value(i_re, i_im) {
                    Some(v) => (v, 0),
                    None => (Complex64::new(f64::NAN, f64::NAN), 1),
                };
                writeln!(
                    out,
                    "{},{},{},{},{flag}",
                    fmt_real(l.re),
                    fmt_real(l.im),
                    fmt_real(m.re),
                    fmt_real(m.im)
                )?;
            }
        }
        Ok(())
    }

    /// Writes the real-axis row as `lambda, re_M, im_M, near_pole_flag, jump`,
    /// where `jump = 1` marks the evaluated node right after a pole.
    pub fn write_real_slice_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "lambda,re_M,im_M,near_pole_flag,jump")?;
        let Some(row) = self.real_row() else {
            return Ok(());
        };
        let after: Vec<f64> = self.real_axis_jumps().iter().map(|j| j.lambda_right).collect();
        for i in 0..self.spec.n_re {
            let l = self.spec.re(i);
            let (m, flag) = match self.value(i, row) {
                Some(v) => (v, 0),
                None => (Complex64::new(f64::NAN, f64::NAN), 1),
            };
            let jump = u8::from(flag == 0 && after.contains(&l));
            writeln!(
                out,
                "{},{},{},{flag},{jump}",
                fmt_real(l),
                fmt_real(m.re),
                fmt_real(m.im)
            )?;
        }
        Ok(())
    }
}

/// Evaluates the Weyl function of `kind` over the grid, rows in parallel.
///
/// Nodes within `10⁻³(1 + |λ_n|)` of any listed pole (and of `0` for the
/// Neumann function) are flagged and left unevaluated.
pub fn weyl_grid(
    pair: &DarbouxPair,
    spec: GridSpec,
    kind: WeylKind,
    poles: &[f64],
    n_used: usize,
) -> Result<WeylGrid> {
    spec.validate()?;
    let mut excluded: Vec<f64> = poles.to_vec();
    if kind == WeylKind::Neumann && !excluded.contains(&0.0) {
        excluded.push(0.0);
    }
    let rows = (0..spec.n_im)
        .into_par_iter()
        .map(|i_im| {
            (0..spec.n_re)
                .map(|i_re| {
                    let l = Complex64::new(spec.re(i_re), spec.im(i_im));
                    if excluded.iter().any(|&p| (l - p).norm() < EXCLUSION * (1.0 + p.abs())) {
                        return Ok(None);
                    }
                    let v = match kind {
                        WeylKind::Dirichlet => weyl_dirichlet(pair, l, n_used, &[])?,
                        WeylKind::Neumann => weyl_neumann(pair, l, n_used, &[])?,
                    };
                    Ok(Some(v))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylGrid {
        spec,
        kind,
        values: rows.into_iter().flatten().collect(),
        poles: excluded,
    })
}
