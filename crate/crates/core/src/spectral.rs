//! Characteristic functions, eigenvalue search, norming constants and
//! eigenfunctions for the four separated boundary conditions.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt_real;
use crate::nsbf::{eval_series, DarbouxPair, NsbfCoefficientTable};
use crate::problem::ConductivityProfile;
use crate::quadrature::{integral, MeshFunction};

/// Default upper end of the `ρ` scan.
pub const DEFAULT_RHO_MAX: f64 = 200.0;
/// Default number of scan nodes.
pub const DEFAULT_SCAN_POINTS: usize = 500;
/// Bisection stops once the bracket is below `ROOT_TOL · max(1, ρ)`.
pub const ROOT_TOL: f64 = 1e-13;

const SECANT_STEPS: usize = 3;
const MAX_DENSIFY: usize = 2;
const DENSIFY_FACTOR: usize = 4;
const GAP_FACTOR: f64 = 1.5;

/// Separated boundary conditions at `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// `u(0) = u(L) = 0`.
    Dirichlet,
    /// `u′(0) = u′(L) = 0`.
    Neumann,
    /// `u(0) = u′(L) = 0`.
    DirichletNeumann,
    /// `u′(0) = u(L) = 0`.
    NeumannDirichlet,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 4] = [
        Self::Dirichlet,
        Self::Neumann,
        Self::DirichletNeumann,
        Self::NeumannDirichlet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::DirichletNeumann => "dirichlet-neumann",
            Self::NeumannDirichlet => "neumann-dirichlet",
        }
    }

    /// Whether the eigenfunctions are built from `S` (`u(0) = 0`) rather than `C`.
    pub fn uses_sine(self) -> bool {
        matches!(self, Self::Dirichlet | Self::DirichletNeumann)
    }

    /// Index of the first eigenvalue: 0 for Neumann (`μ_0 = 0`), 1 otherwise.
    pub fn first_index(self) -> usize {
        match self {
            Self::Neumann => 0,
            _ => 1,
        }
    }

    /// Leading-order `ρ_n L/π − n`: 0 for matching conditions, −½ for mixed ones.
    pub fn asymptotic_offset(self) -> f64 {
        match self {
            Self::Dirichlet | Self::Neumann => 0.0,
            Self::DirichletNeumann | Self::NeumannDirichlet => -0.5,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let found = match key.as_str() {
            "d" | "dd" => Some(Self::Dirichlet),
            "n" | "nn" => Some(Self::Neumann),
            "dn" => Some(Self::DirichletNeumann),
            "nd" => Some(Self::NeumannDirichlet),
            _ => Self::ALL.into_iter().find(|b| b.name() == key),
        };
        found.ok_or_else(|| Error::InvalidArgument(format!("unknown boundary condition {s:?}")))
    }
}

/// `S(ρ, L)` from the truncated series `L j_0(ρL) − Σ (−1)ⁿ α_{2n}(L) j_{2n}(ρL)`.
pub fn characteristic_dirichlet(table: &NsbfCoefficientTable, rho: f64, n_used: usize) -> Result<f64> {
    let last = table.profile().mesh().last();
    Ok(eval_series(table, Complex64::new(rho, 0.0), last, n_used)?.s.re)
}

/// The characteristic function of `bc` at `x = L`:
/// `S`, `C′`, `S′` or `C` for Dirichlet, Neumann, Dirichlet–Neumann and
/// Neumann–Dirichlet respectively.
pub fn characteristic(pair: &DarbouxPair, bc: BoundaryCondition, rho: f64, n_used: usize) -> Result<f64> {
    let last = pair.profile().mesh().last();
    let v = pair.eval(Complex64::new(rho, 0.0), last, n_used)?;
    Ok(match bc {
        BoundaryCondition::Dirichlet => v.s.re,
        BoundaryCondition::Neumann => v.c_prime.re,
        BoundaryCondition::DirichletNeumann => v.s_prime.re,
        BoundaryCondition::NeumannDirichlet => v.c.re,
    })
}

/// A positive multiple of the characteristic function with the trivial
/// Neumann root at `ρ = 0` divided out; it has the same positive zeros.
fn scan_function(pair: &DarbouxPair, bc: BoundaryCondition, rho: f64, n_used: usize) -> f64 {
    let last = pair.profile().mesh().last();
    let rho = Complex64::new(rho, 0.0);
    let table = match bc {
        BoundaryCondition::Dirichlet | BoundaryCondition::NeumannDirichlet => pair.direct(),
        BoundaryCondition::Neumann | BoundaryCondition::DirichletNeumann => pair.reciprocal(),
    };
    let v = eval_series(table, rho, last, n_used).expect("index and order validated by caller");
    match bc {
        BoundaryCondition::Dirichlet => v.s.re,
        BoundaryCondition::Neumann => -v.s.re,
        BoundaryCondition::DirichletNeumann | BoundaryCondition::NeumannDirichlet => v.c.re,
    }
}

/// Eigenvalues, norming constants and eigenfunctions for one boundary condition.
#[derive(Debug, Clone)]
pub struct SpectralDataset {
    pub bc: BoundaryCondition,
    /// `λ_n`, ascending; `λ_0 = 0` leads the Neumann list.
    pub eigenvalues: Vec<f64>,
    /// `ρ_n = √λ_n`.
    pub rho: Vec<f64>,
    /// `β_n = ∫S²κ` or `γ_n = ∫C²κ`; empty until [`normalization_constants`] runs.
    pub normalization: Vec<f64>,
    /// Normalized eigenfunctions on the mesh; empty until [`normalization_constants`] runs.
    pub eigenfunctions: Vec<MeshFunction>,
    pub n_used: usize,
    /// `|characteristic(ρ_n)|` per root.
    pub residuals: Vec<f64>,
    /// Number of scan nodes finally used.
    pub scan_points: usize,
    pub warnings: Vec<String>,
}

impl SpectralDataset {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Conventional index of entry `k` (starts at 0 for Neumann, 1 otherwise).
    pub fn index_of(&self, k: usize) -> usize {
        k + self.bc.first_index()
    }

    /// The positive eigenvalues only.
    pub fn positive_eigenvalues(&self) -> &[f64] {
        let skip = usize::from(self.bc == BoundaryCondition::Neumann);
        &self.eigenvalues[skip.min(self.eigenvalues.len())..]
    }

    /// Writes `n, rho_n, lambda_n, beta_n, residual`.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "n,rho_n,lambda_n,beta_n,residual")?;
        for k in 0..self.len() {
            let beta = self.normalization.get(k).copied().unwrap_or(f64::NAN);
            writeln!(
                out,
                "{},{},{},{},{}",
                self.index_of(k),
                fmt_real(self.rho[k]),
                fmt_real(self.eigenvalues[k]),
                fmt_real(beta),
                fmt_real(self.residuals[k])
            )?;
        }
        Ok(())
    }

    /// Writes `x, phi_<n>…` for the stored eigenfunctions.
    pub fn write_eigenfunctions_csv(&self, mut out: impl Write) -> io::Result<()> {
        let Some(first) = self.eigenfunctions.first() else {
            return writeln!(out, "x");
        };
        let mut header = String::from("x");
        for k in 0..self.eigenfunctions.len() {
            header.push_str(&format!(",phi_{}", self.index_of(k)));
        }
        writeln!(out, "{header}")?;
        for (j, x) in first.mesh().nodes().enumerate() {
            let mut line = fmt_real(x);
            for f in &self.eigenfunctions {
                line.push(',');
                line.push_str(&fmt_real(f[j]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Brackets sign changes of the characteristic function on a uniform grid over
/// `[0, ρ_max]`, refines each by bisection and a guarded secant polish.
///
/// If consecutive roots are further apart than `1.5π/L`, the grid is refined
/// fourfold and the scan repeated (at most twice); a persisting gap is reported
/// in [`SpectralDataset::warnings`].
pub fn find_eigenvalues(
    pair: &DarbouxPair,
    bc: BoundaryCondition,
    rho_max: f64,
    scan_points: usize,
    n_used: usize,
) -> Result<SpectralDataset> {
    if !(rho_max.is_finite() && rho_max > 0.0) {
        return Err(Error::InvalidArgument(format!("rho_max must be positive, got {rho_max}")));
    }
    if scan_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 scan points, got {scan_points}"
        )));
    }
    if n_used > pair.order() {
        return Err(Error::InvalidArgument(format!(
            "requested {n_used} terms from tables of order {}",
            pair.order()
        )));
    }
    let length = pair.profile().length();
    let mut points = scan_points;
    let mut warnings = Vec::new();
    let mut roots;
    let mut attempt = 0;
    loop {
        roots = scan_roots(pair, bc, rho_max, points, n_used);
        let suspicious = gap_violation(&roots, bc, length);
        match suspicious {
            Some(at) if attempt < MAX_DENSIFY => {
                attempt += 1;
                points = (points - 1) * DENSIFY_FACTOR + 1;
                warnings.push(format!(
                    "gap above {GAP_FACTOR}π/L after ρ = {at:.6}; rescanning with {points} points"
                ));
            }
            Some(at) => {
                warnings.push(format!("gap above {GAP_FACTOR}π/L after ρ = {at:.6} persists"));
                break;
            }
            None => break,
        }
    }

    let mut rho = Vec::with_capacity(roots.len() + 1);
    let mut residuals = Vec::with_capacity(roots.len() + 1);
    if bc == BoundaryCondition::Neumann {
        rho.push(0.0);
        residuals.push(0.0);
    }
    for r in roots {
        residuals.push(characteristic(pair, bc, r, n_used)?.abs());
        rho.push(r);
    }
    Ok(SpectralDataset {
        bc,
        eigenvalues: rho.iter().map(|r| r * r).collect(),
        rho,
        normalization: Vec::new(),
        eigenfunctions: Vec::new(),
        n_used,
        residuals,
        scan_points: points,
        warnings,
    })
}

fn scan_roots(pair: &DarbouxPair, bc: BoundaryCondition, rho_max: f64, points: usize, n_used: usize) -> Vec<f64> {
    let step = rho_max / (points - 1) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| if i + 1 == points { rho_max } else { i as f64 * step })
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&r| scan_function(pair, bc, r, n_used)).collect();
    let brackets: Vec<(f64, f64, f64, f64)> = (1..points)
        .filter_map(|i| {
            let (fa, fb) = (values[i - 1], values[i]);
            if fb == 0.0 && grid[i] > 0.0 {
                Some((grid[i], grid[i], 0.0, 0.0))
            } else if fa != 0.0 && fa.signum() != fb.signum() {
                Some((grid[i - 1], grid[i], fa, fb))
            } else {
                None
            }
        })
        .collect();
    let mut roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b, fa, fb)| refine(|r| scan_function(pair, bc, r, n_used), a, b, fa, fb))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() < 0.5 * step);
    roots
}

/// Bisection to `ROOT_TOL · max(1, ρ)` followed by secant steps that never
/// leave the final bracket.
pub fn refine(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if a == b {
        return a;
    }
    loop {
        let m = 0.5 * (a + b);
        if b - a <= ROOT_TOL * m.max(1.0) || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let (lo, hi) = (a, b);
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    for _ in 0..SECANT_STEPS {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= lo && x2 <= hi) {
            break;
        }
        let f2 = f(x2);
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
        if f2 == 0.0 {
            break;
        }
    }
    if f1.abs() <= f0.abs() {
        x1
    } else {
        x0
    }
}

fn gap_violation(roots: &[f64], bc: BoundaryCondition, length: f64) -> Option<f64> {
    let spacing = PI / length;
    let limit = GAP_FACTOR * spacing;
    let first = (1.0 + bc.asymptotic_offset()) * spacing;
    if let Some(&r) = roots.first() {
        if r > first + limit {
            return Some(0.0);
        }
    }
    roots.windows(2).find(|w| w[1] - w[0] > limit).map(|w| w[0])
}

/// `∫₀ᴸ u² κ` for `u = S(ρ, ·)` or `C(ρ, ·)` on the table's mesh.
pub fn weighted_norm(table: &NsbfCoefficientTable, sine: bool, rho: f64, n_used: usize) -> Result<f64> {
    let samples = sample_solution(table, sine, rho, n_used)?;
    Ok(integral(&samples.zip_map(table.profile().kappa(), |_, u, k| u * u * k)))
}

fn sample_solution(table: &NsbfCoefficientTable, sine: bool, rho: f64, n_used: usize) -> Result<MeshFunction> {
    let mesh = *table.profile().mesh();
    let rho = Complex64::new(rho, 0.0);
    let values = (0..mesh.points())
        .map(|j| eval_series(table, rho, j, n_used).map(|v| if sine { v.s.re } else { v.c.re }))
        .collect::<Result<Vec<f64>>>()?;
    MeshFunction::new(mesh, values)
}

/// Fills norming constants and normalized eigenfunctions.
///
/// Dirichlet and Dirichlet–Neumann use `β_n = ∫S²κ` and `φ_n = S/√β_n`;
/// Neumann–Dirichlet uses `∫C²κ`. Neumann uses `γ_0 = ∫κ` and
/// `γ_n = μ_n β_n^{1/κ}` with `β^{1/κ}` from the reciprocal table, and
/// `ψ_n = C/√γ_n`.
pub fn normalization_constants(mut ds: SpectralDataset, pair: &DarbouxPair) -> Result<SpectralDataset> {
    let n_used = ds.n_used;
    let bc = ds.bc;
    let computed: Vec<(f64, MeshFunction)> = ds
        .rho
        .par_iter()
        .map(|&rho| -> Result<(f64, MeshFunction)> {
            let sine = bc.uses_sine();
            let u = sample_solution(pair.direct(), sine, rho, n_used)?;
            let norm = if bc == BoundaryCondition::Neumann {
                if rho == 0.0 {
                    integral(pair.profile().kappa())
                } else {
                    rho * rho * weighted_norm(pair.reciprocal(), true, rho, n_used)?
                }
            } else {
                integral(&u.zip_map(pair.profile().kappa(), |_, v, k| v * v * k))
            };
            let scale = 1.0 / norm.sqrt();
            Ok((norm, u.map(|_, v| v * scale)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (normalization, eigenfunctions) = computed.into_iter().unzip();
    ds.normalization = normalization;
    ds.eigenfunctions = eigenfunctions;
    Ok(ds)
}

/// The stored eigenfunction at position `k` of the dataset.
pub fn eigenfunction_samples(ds: &SpectralDataset, k: usize) -> Result<&MeshFunction> {
    ds.eigenfunctions.get(k).ok_or(Error::IndexOutOfRange {
        index: k,
        len: ds.eigenfunctions.len(),
    })
}

/// Deviations `ζ_n = ρ_n − (n + offset)π/L` for the positive eigenvalues,
/// `n = 1, 2, …`, with `offset = −½` for mixed conditions.
pub fn asymptotic_gap_check(ds: &SpectralDataset, length: f64) -> Vec<f64> {
    let skip = usize::from(ds.bc == BoundaryCondition::Neumann);
    let offset = ds.bc.asymptotic_offset();
    ds.rho
        .iter()
        .skip(skip)
        .enumerate()
        .map(|(k, r)| r - (k as f64 + 1.0 + offset) * PI / length)
        .collect()
}

/// `Σ ζ_n²` over `n ∈ [from, to]` (1-based, inclusive, clipped to the data).
pub fn zeta_square_sum(zeta: &[f64], from: usize, to: usize) -> f64 {
    let to = to.min(zeta.len());
    if from == 0 || from > to {
        return 0.0;
    }
    zeta[from - 1..to].iter().map(|z| z * z).sum()
}

/// The a-priori error constant of the NSBF truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// `d = ‖κ′/(2κ)‖_{L²}`.
    pub d: f64,
    /// `‖κ^{−1/2}‖_∞`.
    pub inv_sqrt_sup: f64,
    /// `M = 8L‖κ^{−1/2}‖_∞ (Ld + 2d²(L²d² + L)e^{Ld})`.
    pub m: f64,
}

pub fn error_bound_diagnostic(profile: &ConductivityProfile) -> ErrorBound {
    let l = profile.length();
    let ratio = profile.sample_with_derivative(|_, k, d| (d / (2.0 * k)).powi(2));
    let d = integral(&ratio).sqrt();
    let inv_sqrt_sup = profile
        .kappa()
        .values()
        .iter()
        .map(|k| 1.0 / k.sqrt())
        .fold(0.0, f64::max);
    let m = 8.0 * l * inv_sqrt_sup * (l * d + 2.0 * d * d * (l * l * d * d + l) * (l * d).exp());
    ErrorBound { d, inv_sqrt_sup, m }
}
