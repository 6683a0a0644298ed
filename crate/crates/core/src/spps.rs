//! Formal powers and the spectral parameter power series (SPPS).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::ConductivityProfile;
use crate::quadrature::{cumulative_integral, MeshFunction};

/// Default number of formal powers for small-ρ evaluation.
pub const DEFAULT_ORDER: usize = 60;

/// Tail bound above which [`spps_eval`] refuses to answer.
pub const TAIL_LIMIT: f64 = 1e-12;

/// Formal powers `φ^{(k)}`, `k = 0..=K`, of a conductivity profile.
#[derive(Debug, Clone)]
pub struct FormalPowerTable {
    profile: ConductivityProfile,
    powers: Vec<MeshFunction>,
    inv_factorials: Vec<f64>,
}

impl FormalPowerTable {
    pub fn profile(&self) -> &ConductivityProfile {
        &self.profile
    }

    pub fn order_max(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn power(&self, k: usize) -> &MeshFunction {
        &self.powers[k]
    }

    pub fn powers(&self) -> &[MeshFunction] {
        &self.powers
    }
}

/// Builds `φ^{(0)} = 1`, `φ^{(1)} = ∫1/κ` and
/// `φ^{(k)} = k(k−1) ∫ (1/κ) ∫ κ φ^{(k−2)}`.
pub fn compute_formal_powers(profile: &ConductivityProfile, order_max: usize) -> FormalPowerTable {
    let mesh = *profile.mesh();
    let kappa = profile.kappa();
    let mut powers = Vec::with_capacity(order_max + 1);
    powers.push(mesh.sample(|_| 1.0));
    if order_max >= 1 {
        powers.push(cumulative_integral(&kappa.map(|_, k| 1.0 / k)));
    }
    for k in 2..=order_max {
        let inner = cumulative_integral(&powers[k - 2].zip_map(kappa, |_, p, c| c * p));
        let outer = cumulative_integral(&inner.zip_map(kappa, |_, v, c| v / c));
        let scale = (k * (k - 1)) as f64;
        powers.push(outer.map(|_, v| scale * v));
    }
    let mut inv_factorials = Vec::with_capacity(order_max + 1);
    let mut f = 1.0;
    for k in 0..=order_max {
        if k > 0 {
            f /= k as f64;
        }
        inv_factorials.push(f);
    }
    FormalPowerTable {
        profile: profile.clone(),
        powers,
        inv_factorials,
    }
}

/// Bound on the first omitted term, `(|ρ|x)^{K+1}/(K+1)!`.
pub fn spps_tail_bound(order_max: usize, rho_abs: f64, x: f64) -> f64 {
    let t = rho_abs * x;
    if t == 0.0 {
        return 0.0;
    }
    let k = (order_max + 1) as f64;
    let log = k * t.ln() - ln_factorial(order_max + 1);
    log.exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e(ρ, x_j) ≈ Σ_{k≤K} (iρ)^k φ^{(k)}(x_j)/k!`.
pub fn spps_eval(table: &FormalPowerTable, rho: Complex64, x_index: usize) -> Result<Complex64> {
    let n = table.profile.mesh().points();
    if x_index >= n {
        return Err(Error::IndexOutOfRange { index: x_index, len: n });
    }
    if rho == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let x = table.profile.mesh().node(x_index);
    let tail = spps_tail_bound(table.order_max(), rho.norm(), x);
    if tail > TAIL_LIMIT {
        return Err(Error::InsufficientOrder {
            order: table.order_max(),
            tail,
            limit: TAIL_LIMIT,
        });
    }
    let irho = Complex64::i() * rho;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, phi) in table.powers.iter().enumerate() {
        sum += power * (phi[x_index] * table.inv_factorials[k]);
        power *= irho;
    }
    Ok(sum)
}
