//! Uniform meshes and cumulative integration.
//!
//! Every recursive integral in the solver is an indefinite integral
//! `F(x_j) = ∫₀^{x_j} f`, evaluated on a uniform mesh whose interval count is a
//! multiple of six. Each panel of six intervals carries the degree-6
//! interpolant through its seven nodes, and that interpolant is integrated
//! node-to-node so interior panel nodes receive exact cumulative values too.

use crate::error::{Error, Result};

/// Number of intervals per Newton-Cotes panel.
pub const PANEL: usize = 6;

/// Smallest admissible node count (one panel).
pub const MIN_POINTS: usize = PANEL + 1;

const WEIGHT_DENOM: f64 = 60480.0;

/// `SUB_WEIGHTS[k][i] * h / 60480` is the integral of the i-th Lagrange basis
/// polynomial of a 7-node panel over the sub-interval `[x_k, x_{k+1}]`.
const SUB_WEIGHTS: [[f64; 7]; 6] = [
    [19087.0, 65112.0, -46461.0, 37504.0, -20211.0, 6312.0, -863.0],
    [-863.0, 25128.0, 46989.0, -16256.0, 7299.0, -2088.0, 271.0],
    [271.0, -2760.0, 30819.0, 37504.0, -6771.0, 1608.0, -191.0],
    [-191.0, 1608.0, -6771.0, 37504.0, 30819.0, -2760.0, 271.0],
    [271.0, -2088.0, 7299.0, -16256.0, 46989.0, 25128.0, -863.0],
    [-863.0, 6312.0, -20211.0, 37504.0, -46461.0, 65112.0, 19087.0],
];

/// A uniform mesh `x_j = j·h` on `[0, L]` with `points − 1` divisible by six.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    length: f64,
    points: usize,
    step: f64,
}

impl UniformMesh {
    /// Interval length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of nodes.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Node spacing `h = L / (points − 1)`.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Index of the last node (`x = L`).
    pub fn last(&self) -> usize {
        self.points - 1
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.points - 1 {
            self.length
        } else {
            j as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |j| self.node(j))
    }

    /// Index of the node nearest to `x` (clamped to the mesh).
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = (x / self.step).round();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.points - 1)
        }
    }

    /// Samples a closed-form function on every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> MeshFunction {
        MeshFunction {
            mesh: *self,
            values: self.nodes().map(f).collect(),
        }
    }
}

/// Builds the smallest admissible mesh with at least `requested_points` nodes.
pub fn build_mesh(length: f64, requested_points: usize) -> Result<UniformMesh> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mesh length must be positive and finite, got {length}"
        )));
    }
    if requested_points < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "mesh needs at least {MIN_POINTS} points, got {requested_points}"
        )));
    }
    let intervals = (requested_points - 1).div_ceil(PANEL) * PANEL;
    Ok(UniformMesh {
        length,
        points: intervals + 1,
        step: length / intervals as f64,
    })
}

/// Real samples of a function on a [`UniformMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFunction {
    mesh: UniformMesh,
    values: Vec<f64>,
}

impl MeshFunction {
    /// Wraps samples, checking length and finiteness.
    pub fn new(mesh: UniformMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.points() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                mesh.points(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample {j} is not finite ({})",
                values[j]
            )));
        }
        Ok(Self { mesh, values })
    }

    pub(crate) fn from_raw(mesh: UniformMesh, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.points());
        Self { mesh, values }
    }

    pub fn zeros(mesh: UniformMesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.points()],
        }
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The sample at the last node (`x = L`).
    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Pointwise map `f(x_j, v_j)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .mesh
            .nodes()
            .zip(&self.values)
            .map(|(x, &v)| f(x, v))
            .collect();
        Self::from_raw(self.mesh, values)
    }

    /// Pointwise combination `f(x_j, a_j, b_j)`; both functions must share a mesh.
    pub fn zip_map(&self, other: &MeshFunction, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        assert_eq!(self.mesh, other.mesh, "mesh functions live on different meshes");
        let values = self
            .mesh
            .nodes()
            .zip(self.values.iter().zip(&other.values))
            .map(|(x, (&a, &b))| f(x, a, b))
            .collect();
        Self::from_raw(self.mesh, values)
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for MeshFunction {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// Indefinite integral `F(x_j) = ∫₀^{x_j} f` with `F(0) = 0`.
pub fn cumulative_integral(f: &MeshFunction) -> MeshFunction {
    MeshFunction::from_raw(f.mesh, cumulative_values(f.values(), f.mesh.step()))
}

/// `∫₀ᴸ f` by the same rule.
pub fn integral(f: &MeshFunction) -> f64 {
    let h = f.mesh.step();
    f.values()
        .windows(MIN_POINTS)
        .step_by(PANEL)
        .map(|panel| {
            let full: f64 = (0..MIN_POINTS)
                .map(|i| SUB_WEIGHTS.iter().map(|row| row[i]).sum::<f64>() * panel[i])
                .sum();
            full * h / WEIGHT_DENOM
        })
        .sum()
}

/// Cumulative rule on raw samples; `values.len() − 1` must be a multiple of six.
pub(crate) fn cumulative_values(values: &[f64], h: f64) -> Vec<f64> {
    debug_assert!(values.len() >= MIN_POINTS && (values.len() - 1) % PANEL == 0);
    let scale = h / WEIGHT_DENOM;
    let mut out = Vec::with_capacity(values.len());
    out.push(0.0);
    let mut base = 0.0;
    for panel in values.windows(MIN_POINTS).step_by(PANEL) {
        let mut acc = 0.0;
        for row in &SUB_WEIGHTS {
            let piece: f64 = row.iter().zip(panel).map(|(w, v)| w * v).sum();
            acc += piece * scale;
            out.push(base + acc);
        }
        base += acc;
    }
    out
}
