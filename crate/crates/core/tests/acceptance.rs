//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use nsbf::nsbf::{alpha_via_formal_powers, goursat_residual, origin_cutoff};
use nsbf::spectral::{
    asymptotic_gap_check, find_eigenvalues, normalization_constants, weighted_norm, zeta_square_sum,
};
use nsbf::spps::compute_formal_powers;
use nsbf::weyl::dirichlet_residue;
use nsbf::{BoundaryCondition, BuiltinProfile, ConductivityProfile, DarbouxPair, SpectralDataset};

const MESH: usize = 2000;
const ORDER: usize = 120;
const RHO_MAX: f64 = 200.0;
const SCAN: usize = 500;

const EXAMPLE1_ABS_LOW: f64 = 1e-8;
const EXAMPLE1_ABS_HIGH: f64 = 1e-6;
const EXAMPLE1_EXACT_REL: f64 = 1e-10;
const EXAMPLE1_SECONDS: f64 = 60.0;
const TRIANGULAR_REL: f64 = 1e-6;
const TRIANGULAR_ORDER: usize = 40;
const UNIT_REL: f64 = 1e-10;
const EQUIVALENCE_ABS: f64 = 1e-6;
const GOURSAT_ABS: f64 = 1e-3;
const GOURSAT_FLOOR: f64 = 1e-9;
const DARBOUX_ABS: f64 = 1e-5;
const WRONSKIAN_ABS: f64 = 1e-6;
const DUALITY_REL: f64 = 1e-9;
const GAMMA_REL: f64 = 1e-6;
const RESIDUE_REL: f64 = 1e-4;
const GRAM_ABS: f64 = 1e-6;
const ZETA_GROWTH: f64 = 1e-4;

/// Published exact Dirichlet eigenvalues of κ = (1+x)⁴ on [0, π], by printed row label.
const EXAMPLE1_REFERENCE: [(usize, f64); 11] = [
    (1, 1.34805063504836),
    (2, 4.43028410885793),
    (3, 9.45645939050872),
    (4, 16.4672876486339),
    (5, 25.4726699599228),
    (6, 36.4757027586749),
    (20, 400.482239127963),
    (21, 441.482300968039),
    (22, 484.482354595155),
    (23, 529.482401400839),
    (30, 1024.48264505729),
];

/// Published NSBF Dirichlet eigenvalues of the triangular profile, n = 1..10.
const TRIANGULAR_REFERENCE: [f64; 10] = [
    8.35158241342649,
    39.3158490304397,
    87.3252433641185,
    157.748091718428,
    245.239779974236,
    355.139577098527,
    482.110512751393,
    631.487939226560,
    798.771379456998,
    985.220115811387,
];

/// Dirichlet eigenvalues of the triangular profile from the Bessel cross
/// products `J_0(ρ)Y_ν(3ρ/2) − Y_0(ρ)J_ν(3ρ/2)`, ν = 0, 1 (30-digit arithmetic).
const TRIANGULAR_EXACT: [f64; 10] = [
    8.3514434681152942,
    39.315849661399995,
    87.325124338224382,
    157.74809421774328,
    245.23966000233078,
    355.1395827107727,
    482.1103894623281,
    631.4882924400261,
    797.93782051640247,
    986.79395138797308,
];

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn note(&self, text: String) {
        println!("     {text}");
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dirichlet(pair: &DarbouxPair, n_used: usize) -> SpectralDataset {
    let ds = find_eigenvalues(pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, n_used).unwrap();
    normalization_constants(ds, pair).unwrap()
}

/// `sin(ρL)/ρ + L²/((1+L)ρ) j_1(ρL)`, the exact characteristic function of κ = (1+x)⁴.
fn phi_exact(rho: f64, l: f64) -> f64 {
    let z = rho * l;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    z.sin() / rho + l * l / ((1.0 + l) * rho) * j1
}

fn exact_example1_roots(l: f64, rho_max: f64) -> Vec<f64> {
    let step = 1e-3;
    let mut roots = Vec::new();
    let mut a = step;
    let mut fa = phi_exact(a, l);
    while a < rho_max {
        let b = a + step;
        let fb = phi_exact(b, l);
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = phi_exact(mid, l);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}

fn example1_reference(gate: &mut Gate) {
    let start = Instant::now();
    let b = BuiltinProfile::Example1;
    let l = b.default_length();
    let p = b.build(l, MESH).unwrap();
    let pair = DarbouxPair::new(&p, ORDER);
    let ds = find_eigenvalues(&pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, ORDER).unwrap();
    let seconds = start.elapsed().as_secs_f64();

    let exact: Vec<f64> = exact_example1_roots(l, RHO_MAX).iter().map(|r| r * r).collect();
    let mut worst_low: f64 = 0.0;
    let mut worst_high: f64 = 0.0;
    for &(n, tab) in &EXAMPLE1_REFERENCE {
        // the printed "30" entry is the 32nd eigenvalue of the exact spectrum
        let index = if n == 30 { 32 } else { n };
        let d = (ds.eigenvalues[index - 1] - tab).abs();
        if n <= 6 {
            worst_low = worst_low.max(d);
        } else {
            worst_high = worst_high.max(d);
        }
    }
    let count = ds.len().min(exact.len());
    let worst_rel = (0..count)
        .map(|k| ((ds.eigenvalues[k] - exact[k]) / exact[k]).abs())
        .fold(0.0, f64::max);
    let tab30 = EXAMPLE1_REFERENCE[10].1;
    let pass = worst_low <= EXAMPLE1_ABS_LOW
        && worst_high <= EXAMPLE1_ABS_HIGH
        && worst_rel <= EXAMPLE1_EXACT_REL
        && ds.len() == exact.len()
        && seconds < EXAMPLE1_SECONDS;
    gate.report(
        "example1 reference eigenvalues",
        pass,
        format!(
            "max|Δλ| n≤6 {worst_low:.2e} (tol {EXAMPLE1_ABS_LOW:.0e}), n≥20 {worst_high:.2e} (tol {EXAMPLE1_ABS_HIGH:.0e}); \
             vs exact Φ roots max rel {worst_rel:.2e} over {count} eigenvalues (tol {EXAMPLE1_EXACT_REL:.0e}); {seconds:.2} s"
        ),
    );
    gate.note(format!(
        "L = π; λ_1 = {:.14}, λ_30 = {:.14} (Φ root {:.14}); tabulated 30th entry {tab30} matches λ_32 = {:.14}",
        ds.eigenvalues[0], ds.eigenvalues[29], exact[29], ds.eigenvalues[31]
    ));
}

fn triangular_reference(gate: &mut Gate) {
    let p = ConductivityProfile::triangular(MESH).unwrap();
    let pair = DarbouxPair::new(&p, TRIANGULAR_ORDER);
    let ds = find_eigenvalues(&pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, TRIANGULAR_ORDER).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let devs: Vec<f64> = TRIANGULAR_REFERENCE.iter().enumerate().map(|(k, t)| rel(ds.eigenvalues[k], *t)).collect();
    let worst = devs.iter().copied().fold(0.0, f64::max);
    let failing: Vec<usize> = devs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > TRIANGULAR_REL)
        .map(|(k, _)| k + 1)
        .collect();
    gate.report(
        "triangular reference eigenvalues (N = 40)",
        worst <= TRIANGULAR_REL,
        format!("max rel dev from tabulated NSBF column {worst:.2e} (tol {TRIANGULAR_REL:.0e}); rows over tol: {failing:?}"),
    );
    let vs_exact = TRIANGULAR_EXACT
        .iter()
        .enumerate()
        .map(|(k, e)| rel(ds.eigenvalues[k], *e))
        .fold(0.0, f64::max);
    let table_vs_exact = TRIANGULAR_EXACT
        .iter()
        .zip(&TRIANGULAR_REFERENCE)
        .map(|(e, t)| rel(*t, *e))
        .fold(0.0, f64::max);
    gate.note(format!(
        "computed vs Bessel-product exact spectrum: max rel {vs_exact:.2e}; tabulated column vs exact: max rel {table_vs_exact:.2e}; {} eigenvalues in [0, {RHO_MAX}]",
        ds.len()
    ));
}

fn unit_spectrum(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    for l in [1.0, 2.0] {
        let p = ConductivityProfile::unit(l, MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let ds = find_eigenvalues(&pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, ORDER).unwrap();
        for n in 1..=30 {
            let exact = (n as f64 * PI / l).powi(2);
            worst = worst.max(((ds.eigenvalues[n - 1] - exact) / exact).abs());
        }
    }
    gate.report(
        "unit profile exact spectrum",
        worst <= UNIT_REL,
        format!("max rel error n ≤ 30, L ∈ {{1, 2}}: {worst:.2e} (tol {UNIT_REL:.0e})"),
    );
}

fn coefficient_equivalence(gate: &mut Gate) {
    let mut parts = Vec::new();
    let mut worst_all: f64 = 0.0;
    for b in BuiltinProfile::ALL {
        let l = b.default_length();
        let p = b.build(l, MESH).unwrap();
        // formal-power oracle on the twice-refined mesh, read at the shared nodes
        let fine = b.build(l, 2 * p.mesh().points() - 1).unwrap();
        assert_eq!(fine.mesh().points(), 2 * p.mesh().points() - 1);
        let table = nsbf::compute_coefficients(&p, 20);
        let fp = compute_formal_powers(&fine, 21);
        let mut worst: f64 = 0.0;
        for m in 0..=20 {
            let oracle = alpha_via_formal_powers(&fp, m).unwrap();
            let cut = origin_cutoff(p.mesh().step(), m);
            for (j, x) in p.mesh().nodes().enumerate() {
                let want = if x < cut { 0.0 } else { oracle[2 * j] };
                worst = worst.max((table.alpha(m)[j] - want).abs());
            }
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{b} {worst:.2e}"));
    }
    gate.report(
        "coefficient formula equivalence (m ≤ 20)",
        worst_all <= EQUIVALENCE_ABS,
        format!("max node-wise |Δα|: {} (tol {EQUIVALENCE_ABS:.0e})", parts.join(", ")),
    );
}

fn example1_lengths() -> [f64; 2] {
    [BuiltinProfile::Example1.default_length(), 1.0]
}

fn goursat(gate: &mut Gate) {
    let mut pass = true;
    let mut parts = Vec::new();
    for l in example1_lengths() {
        let p = ConductivityProfile::example1(l, MESH).unwrap();
        let t = nsbf::compute_coefficients(&p, ORDER);
        let last = p.mesh().last();
        let r30 = goursat_residual(&t, last, 30).unwrap();
        let r120 = goursat_residual(&t, last, ORDER).unwrap();
        pass &= r120 <= GOURSAT_ABS && r120 <= r30.max(GOURSAT_FLOOR);
        parts.push(format!("L = {l:.4}: N=30 {r30:.2e}, N=120 {r120:.2e}"));
    }
    gate.report(
        "Goursat identity at x = L",
        pass,
        format!(
            "{} (tol {GOURSAT_ABS:.0e}, non-increasing above round-off floor {GOURSAT_FLOOR:.0e})",
            parts.join("; ")
        ),
    );
    let p = ConductivityProfile::triangular(MESH).unwrap();
    let t = nsbf::compute_coefficients(&p, ORDER);
    let last = p.mesh().last();
    let r: Vec<String> = [10, 30, 60, 120]
        .iter()
        .map(|&n| format!("N={n} {:.2e}", goursat_residual(&t, last, n).unwrap()))
        .collect();
    gate.note(format!(
        "example1 coefficients vanish beyond m = 3, so both sums are exact to round-off; triangular: {}",
        r.join(", ")
    ));
}

fn lattice(p: &ConductivityProfile) -> Vec<usize> {
    let l = p.length();
    vec![
        p.mesh().nearest_index(0.25 * l),
        p.mesh().nearest_index(0.5 * l),
        p.mesh().last(),
    ]
}

/// Fourth-order first derivative from five samples around (or ending at) `j`.
fn derivative(f: impl Fn(usize) -> Complex64, j: usize, last: usize, h: f64) -> Complex64 {
    if j + 2 <= last && j >= 2 {
        (-f(j + 2) + 8.0 * f(j + 1) - 8.0 * f(j - 1) + f(j - 2)) / (12.0 * h)
    } else {
        (25.0 * f(j) - 48.0 * f(j - 1) + 36.0 * f(j - 2) - 16.0 * f(j - 3) + 3.0 * f(j - 4)) / (12.0 * h)
    }
}

fn darboux_and_wronskian(gate: &mut Gate) {
    let mut worst_s: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    for l in example1_lengths() {
        let p = ConductivityProfile::example1(l, MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let last = p.mesh().last();
        let h = p.mesh().step();
        for rho in [1.0, 2.0, 5.0] {
            let at = |j: usize| pair.eval(c(rho), j, ORDER).unwrap();
            for j in lattice(&p) {
                let v = at(j);
                let k = p.kappa()[j];
                let ds = derivative(|i| at(i).s, j, last, h);
                let dc = derivative(|i| at(i).c, j, last, h);
                // κS′ = C_{1/κ} and κC′ = −ρ²S_{1/κ}, with the right sides from the reciprocal table
                worst_s = worst_s.max((k * ds - k * v.s_prime).norm());
                worst_c = worst_c.max((k * dc - k * v.c_prime).norm());
                worst_w = worst_w.max((v.wronskian(k) - c(1.0)).norm());
            }
        }
    }
    gate.report(
        "Darboux identities vs finite differences",
        worst_s <= DARBOUX_ABS && worst_c <= DARBOUX_ABS,
        format!("max |κS′ − C_1/κ| {worst_s:.2e}, max |κC′ + ρ²S_1/κ| {worst_c:.2e} (tol {DARBOUX_ABS:.0e})"),
    );
    gate.report(
        "Wronskian constancy",
        worst_w <= WRONSKIAN_ABS,
        format!("max |κ(CS′ − C′S) − 1| {worst_w:.2e} (tol {WRONSKIAN_ABS:.0e})"),
    );
}

fn neumann_duality(gate: &mut Gate) {
    let mut worst_mu: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    for l in example1_lengths() {
        let p = ConductivityProfile::example1(l, MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let neumann = find_eigenvalues(&pair, BoundaryCondition::Neumann, RHO_MAX, SCAN, ORDER).unwrap();
        let neumann = normalization_constants(neumann, &pair).unwrap();
        let inverse = ConductivityProfile::from_closed_form(
            l,
            MESH,
            |x| (1.0 + x).powi(-4),
            |x| -4.0 * (1.0 + x).powi(-5),
            "(1+x)^-4",
        )
        .unwrap();
        let inv_pair = DarbouxPair::new(&inverse, ORDER);
        let dir = find_eigenvalues(&inv_pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, ORDER).unwrap();
        for n in 1..=10 {
            let mu = neumann.eigenvalues[n];
            worst_mu = worst_mu.max(((mu - dir.eigenvalues[n - 1]) / mu).abs());
            let direct = weighted_norm(pair.direct(), false, neumann.rho[n], ORDER).unwrap();
            worst_gamma = worst_gamma.max(((neumann.normalization[n] - direct) / direct).abs());
        }
    }
    gate.report(
        "Neumann duality and norming constants",
        worst_mu <= DUALITY_REL && worst_gamma <= GAMMA_REL,
        format!(
            "max rel |μ_n − λ_n(1/κ)| {worst_mu:.2e} (tol {DUALITY_REL:.0e}); max rel |μβ^(1/κ) − ∫C²κ| {worst_gamma:.2e} (tol {GAMMA_REL:.0e})"
        ),
    );
}

fn weyl_residues(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    for l in example1_lengths() {
        let p = ConductivityProfile::example1(l, MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let ds = dirichlet(&pair, ORDER);
        for k in 0..3 {
            let r = dirichlet_residue(&pair, ds.eigenvalues[k], ORDER).unwrap();
            let want = 1.0 / ds.normalization[k];
            worst = worst.max((r.value - want).norm() / want);
        }
    }
    gate.report(
        "Weyl residues at λ_1..λ_3",
        worst <= RESIDUE_REL,
        format!("max rel |Res − 1/β_n| {worst:.2e} (tol {RESIDUE_REL:.0e})"),
    );
}

fn orthonormality(gate: &mut Gate) {
    let mut parts = Vec::new();
    let mut worst_all: f64 = 0.0;
    for b in BuiltinProfile::ALL {
        let p = b.build(b.default_length(), MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let ds = dirichlet(&pair, ORDER);
        let mut worst: f64 = 0.0;
        for m in 0..10 {
            for n in 0..10 {
                let prod = ds.eigenfunctions[m]
                    .zip_map(&ds.eigenfunctions[n], |_, a, b| a * b)
                    .zip_map(p.kappa(), |_, v, k| v * k);
                let g = nsbf::quadrature::integral(&prod);
                worst = worst.max((g - f64::from(u8::from(m == n))).abs());
            }
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{b} {worst:.2e}"));
    }
    gate.report(
        "orthonormality of first 10 eigenfunctions",
        worst_all <= GRAM_ABS,
        format!("max |G − I|: {} (tol {GRAM_ABS:.0e})", parts.join(", ")),
    );
}

fn asymptotics(gate: &mut Gate) {
    let mut partial = Vec::new();
    for l in example1_lengths() {
        let p = ConductivityProfile::example1(l, MESH).unwrap();
        let pair = DarbouxPair::new(&p, ORDER);
        let ds = find_eigenvalues(&pair, BoundaryCondition::Dirichlet, RHO_MAX, SCAN, ORDER).unwrap();
        let zeta = asymptotic_gap_check(&ds, l);
        let growth = zeta_square_sum(&zeta, 41, 60);
        let sup = zeta.iter().take(60).map(|z| z.abs()).fold(0.0, f64::max);
        let decreasing = zeta[4..60].windows(2).all(|w| w[1].abs() <= w[0].abs());
        partial.push((growth, sup, decreasing, 60.0 * zeta[59]));
    }
    let (growth, sup, decreasing, scaled) = partial[0];
    gate.report(
        "eigenvalue asymptotics",
        growth <= ZETA_GROWTH && sup.is_finite(),
        format!("L = π: Σ_{{41..60}} ζ_n² = {growth:.3e} (tol {ZETA_GROWTH:.0e}); sup|ζ_n| (n ≤ 60) {sup:.3e}"),
    );
    let (g1, s1, _, _) = partial[1];
    gate.note(format!(
        "|ζ_n| non-increasing from n = 5: {decreasing}; 60·ζ_60 = {scaled:.4}, so ζ_n ≈ c/n and the tail sum is ≈ c²(1/40 − 1/60); L = 1: Σ = {g1:.3e}, sup {s1:.3e}"
    ));
}

fn main() {
    let mut gate = Gate { failures: 0 };
    example1_reference(&mut gate);
    triangular_reference(&mut gate);
    unit_spectrum(&mut gate);
    coefficient_equivalence(&mut gate);
    goursat(&mut gate);
    darboux_and_wronskian(&mut gate);
    neumann_duality(&mut gate);
    weyl_residues(&mut gate);
    orthonormality(&mut gate);
    asymptotics(&mut gate);
    println!("acceptance: {} criteria failed", gate.failures);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}
