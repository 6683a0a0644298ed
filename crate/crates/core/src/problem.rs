//! Conductivity profiles `κ` sampled on a uniform mesh.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{build_mesh, MeshFunction, UniformMesh};

/// A sampled conductivity `κ > 0` together with its derivative.
///
/// Samples are normalized so that `κ(0) = 1`; the raw scale is kept in
/// [`normalization_factor`](Self::normalization_factor). Where the profile is
/// not differentiable at a node, `kappa_prime` holds the average of the two
/// one-sided derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityProfile {
    mesh: UniformMesh,
    kappa: MeshFunction,
    kappa_prime: MeshFunction,
    label: String,
    normalization_factor: f64,
    kinks: Vec<Kink>,
}

/// One-sided derivatives at a node where `κ′` jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub index: usize,
    pub left: f64,
    pub right: f64,
}

impl ConductivityProfile {
    /// Samples `κ` and `κ′` on a mesh of at least `points` nodes over `[0, length]`.
    pub fn from_closed_form(
        length: f64,
        points: usize,
        kappa: impl Fn(f64) -> f64,
        kappa_prime: impl Fn(f64) -> f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mesh = build_mesh(length, points)?;
        let raw_kappa: Vec<f64> = mesh.nodes().map(&kappa).collect();
        let raw_prime: Vec<f64> = mesh.nodes().map(&kappa_prime).collect();
        Self::from_samples(mesh, raw_kappa, raw_prime, label.into())
    }

    /// Normalizes and validates raw samples.
    pub fn from_samples(
        mesh: UniformMesh,
        raw_kappa: Vec<f64>,
        raw_prime: Vec<f64>,
        label: String,
    ) -> Result<Self> {
        if let Some((j, v)) = raw_kappa
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidProfile(format!(
                "conductivity must be positive and finite; κ(x_{j} = {}) = {v}",
                mesh.node(j)
            )));
        }
        if let Some(j) = raw_prime.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "derivative is not finite at x_{j} = {}",
                mesh.node(j)
            )));
        }
        let factor = raw_kappa[0];
        let kappa = raw_kappa.into_iter().map(|v| v / factor).collect();
        let prime = raw_prime.into_iter().map(|v| v / factor).collect();
        Ok(Self {
            mesh,
            kappa: MeshFunction::new(mesh, kappa)?,
            kappa_prime: MeshFunction::new(mesh, prime)?,
            label,
            normalization_factor: factor,
            kinks: Vec::new(),
        })
    }

    fn with_kinks(mut self, kinks: Vec<Kink>) -> Self {
        let f = self.normalization_factor;
        self.kinks = kinks
            .into_iter()
            .map(|k| Kink {
                index: k.index,
                left: k.left / f,
                right: k.right / f,
            })
            .collect();
        self
    }

    /// Triangular conductivity `1 + x` on `[0, ½]`, `2 − x` on `(½, 1]`.
    pub fn triangular(points: usize) -> Result<Self> {
        PiecewisePolynomial::new(vec![0.0, 0.5, 1.0], vec![vec![1.0, 1.0], vec![2.0, -1.0]])?
            .to_profile(points, "triangular")
    }

    /// `κ ≡ 1` on `[0, length]`.
    pub fn unit(length: f64, points: usize) -> Result<Self> {
        Self::from_closed_form(length, points, |_| 1.0, |_| 0.0, "unit")
    }

    /// `κ = (1 + x)⁴` on `[0, length]`.
    pub fn example1(length: f64, points: usize) -> Result<Self> {
        Self::from_closed_form(
            length,
            points,
            |x| (1.0 + x).powi(4),
            |x| 4.0 * (1.0 + x).powi(3),
            "example1",
        )
    }

    /// The conductivity `1/κ` on the same mesh.
    pub fn reciprocal(&self) -> Self {
        let kappa = self.kappa.map(|_, k| 1.0 / k);
        let kappa_prime = self.kappa_prime.zip_map(&self.kappa, |_, d, k| -d / (k * k));
        let kinks = self
            .kinks
            .iter()
            .map(|k| {
                let c = self.kappa[k.index];
                Kink {
                    index: k.index,
                    left: -k.left / (c * c),
                    right: -k.right / (c * c),
                }
            })
            .collect();
        Self {
            mesh: self.mesh,
            kappa,
            kappa_prime,
            label: format!("1/({})", self.label),
            normalization_factor: 1.0 / self.normalization_factor,
            kinks,
        }
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn length(&self) -> f64 {
        self.mesh.length()
    }

    pub fn kappa(&self) -> &MeshFunction {
        &self.kappa
    }

    pub fn kappa_prime(&self) -> &MeshFunction {
        &self.kappa_prime
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn normalization_factor(&self) -> f64 {
        self.normalization_factor
    }

    /// Nodes where `κ′` jumps, with its one-sided limits.
    pub fn kinks(&self) -> &[Kink] {
        &self.kinks
    }

    /// `f(x, κ, κ′)` sampled on the mesh; at kink nodes the two one-sided
    /// values of `f` are averaged, which is what the composite rule needs when
    /// the kink sits on a panel boundary.
    pub fn sample_with_derivative(&self, f: impl Fn(f64, f64, f64) -> f64) -> MeshFunction {
        let mut out = self.kappa_prime.zip_map(&self.kappa, |x, d, k| f(x, k, d));
        if !self.kinks.is_empty() {
            let mut values = out.into_values();
            for kink in &self.kinks {
                let x = self.mesh.node(kink.index);
                let k = self.kappa[kink.index];
                values[kink.index] = 0.5 * (f(x, k, kink.left) + f(x, k, kink.right));
            }
            out = MeshFunction::from_raw(self.mesh, values);
        }
        out
    }

    /// `q = −κ′/κ`.
    pub fn q(&self) -> MeshFunction {
        self.kappa_prime.zip_map(&self.kappa, |_, d, k| -d / k)
    }

    /// True when `other` samples `1/κ` on this mesh (to `tol` relative).
    pub fn is_reciprocal_of(&self, other: &ConductivityProfile, tol: f64) -> bool {
        self.mesh == other.mesh
            && self
                .kappa
                .values()
                .iter()
                .zip(other.kappa.values())
                .all(|(a, b)| (a * b - 1.0).abs() <= tol)
    }
}

/// A continuous piecewise polynomial in the global coordinate `x`.
///
/// Piece `i` covers `[breakpoints[i], breakpoints[i+1]]` and evaluates
/// `Σ_k coefficients[i][k] x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidProfile("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile(format!(
                "breakpoints must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if coefficients.len() != breakpoints.len() - 1 {
            return Err(Error::InvalidProfile(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                coefficients.len()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| c.is_empty()) {
            return Err(Error::InvalidProfile(format!("piece {i} has no coefficients")));
        }
        let pp = Self {
            breakpoints,
            coefficients,
        };
        for i in 1..pp.coefficients.len() {
            let b = pp.breakpoints[i];
            let (left, right) = (horner(&pp.coefficients[i - 1], b), horner(&pp.coefficients[i], b));
            if (left - right).abs() > 1e-12 * left.abs().max(right.abs()).max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "profile is discontinuous at x = {b}: {left} vs {right}"
                )));
            }
        }
        Ok(pp)
    }

    pub fn length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    fn piece(&self, x: f64) -> usize {
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&b| b < x)
    }

    pub fn value(&self, x: f64) -> f64 {
        horner(&self.coefficients[self.piece(x)], x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        horner_derivative(&self.coefficients[self.piece(x)], x)
    }

    /// Samples on a mesh over `[0, last breakpoint]`; nodes that coincide with an
    /// interior breakpoint store the average of the one-sided derivatives.
    pub fn to_profile(&self, points: usize, label: impl Into<String>) -> Result<ConductivityProfile> {
        let mesh = build_mesh(self.length(), points)?;
        let tol = 1e-9 * mesh.step();
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        let mut kappa = Vec::with_capacity(mesh.points());
        let mut prime = Vec::with_capacity(mesh.points());
        let mut kinks = Vec::new();
        for (j, x) in mesh.nodes().enumerate() {
            match interior.iter().position(|&b| (b - x).abs() <= tol) {
                Some(i) => {
                    let b = interior[i];
                    let (l, r) = (&self.coefficients[i], &self.coefficients[i + 1]);
                    let (left, right) = (horner_derivative(l, b), horner_derivative(r, b));
                    kappa.push(0.5 * (horner(l, b) + horner(r, b)));
                    prime.push(0.5 * (left + right));
                    if left != right {
                        kinks.push(Kink { index: j, left, right });
                    }
                }
                None => {
                    kappa.push(self.value(x));
                    prime.push(self.derivative(x));
                }
            }
        }
        Ok(ConductivityProfile::from_samples(mesh, kappa, prime, label.into())?.with_kinks(kinks))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
}

/// Named profiles available from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinProfile {
    /// `κ ≡ 1`.
    Unit,
    /// `κ = (1 + x)⁴`, i.e. impedance `a = (1 + x)²`.
    Example1,
    /// Tent profile peaking at `x = ½`.
    Triangular,
}

impl BuiltinProfile {
    pub const ALL: [BuiltinProfile; 3] = [Self::Unit, Self::Example1, Self::Triangular];

    pub fn name(self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::Example1 => "example1",
            Self::Triangular => "triangular",
        }
    }

    /// Interval length used when none is given. `example1` is posed on `[0, π]`,
    /// which is where its tabulated reference spectrum lives.
    pub fn default_length(self) -> f64 {
        match self {
            Self::Unit | Self::Triangular => 1.0,
            Self::Example1 => std::f64::consts::PI,
        }
    }

    /// Whether the interval length is fixed by the profile definition.
    pub fn fixed_length(self) -> bool {
        matches!(self, Self::Triangular)
    }

    pub fn build(self, length: f64, points: usize) -> Result<ConductivityProfile> {
        match self {
            Self::Unit => ConductivityProfile::unit(length, points),
            Self::Example1 => ConductivityProfile::example1(length, points),
            Self::Triangular => {
                if (length - 1.0).abs() > 1e-15 {
                    return Err(Error::InvalidArgument(format!(
                        "the triangular profile is defined on [0, 1], got L = {length}"
                    )));
                }
                ConductivityProfile::triangular(points)
            }
        }
    }
}

impl fmt::Display for BuiltinProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown builtin profile {s:?}")))
    }
}
