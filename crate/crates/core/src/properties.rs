//! Randomized checks of structural invariants.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use crate::nsbf::eval_series;
use crate::quadrature::{build_mesh, integral};
use crate::spectral::{characteristic, find_eigenvalues};
use crate::specfun::spherical_bessel_sequence;
use crate::spps::{compute_formal_powers, spps_eval};
use crate::weyl::{principal_sqrt, weyl_dirichlet};
use crate::{BoundaryCondition, ConductivityProfile, DarbouxPair, PiecewisePolynomial};

fn example1() -> &'static DarbouxPair {
    static PAIR: OnceLock<DarbouxPair> = OnceLock::new();
    PAIR.get_or_init(|| DarbouxPair::new(&ConductivityProfile::example1(1.0, 2000).unwrap(), 120))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bessel_three_term_recurrence(re in 0.5f64..60.0, im in -3.0f64..3.0, n in 1usize..40) {
        let z = Complex64::new(re, im);
        let j = spherical_bessel_sequence(n + 1, z);
        let v = j.values();
        let lhs = v[n - 1] + v[n + 1];
        let rhs = v[n] * (2 * n + 1) as f64 / z;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (v[n - 1].norm() + v[n + 1].norm() + 1e-300));
    }

    #[test]
    fn wronskian_is_one(rho in 0.0f64..40.0, frac in 0.0f64..=1.0) {
        let pair = example1();
        let p = pair.profile();
        let j = p.mesh().nearest_index(frac * p.length());
        let v = pair.eval(Complex64::new(rho, 0.0), j, 120).unwrap();
        prop_assert!((v.wronskian(p.kappa()[j]) - 1.0).norm() < 1e-9);
    }

    #[test]
    fn e_equals_c_plus_i_rho_s(re in -30.0f64..30.0, im in -2.0f64..2.0, frac in 0.0f64..=1.0) {
        let pair = example1();
        let p = pair.profile();
        let j = p.mesh().nearest_index(frac * p.length());
        let rho = Complex64::new(re, im);
        let v = eval_series(pair.direct(), rho, j, 120).unwrap();
        let scale = 1.0 + v.e.norm();
        prop_assert!((v.e - v.c - Complex64::i() * rho * v.s).norm() <= 1e-12 * scale);
    }

    #[test]
    fn nsbf_agrees_with_spps_for_small_rho(re in -4.0f64..4.0, im in -1.0f64..1.0, frac in 0.0f64..=1.0) {
        let pair = example1();
        let p = pair.profile();
        static FP: OnceLock<crate::spps::FormalPowerTable> = OnceLock::new();
        let fp = FP.get_or_init(|| compute_formal_powers(p, 60));
        let j = p.mesh().nearest_index(frac * p.length());
        let rho = Complex64::new(re, im);
        let a = eval_series(pair.direct(), rho, j, 120).unwrap().e;
        let b = spps_eval(fp, rho, j).unwrap();
        prop_assert!((a - b).norm() < 1e-7 * (1.0 + b.norm()));
    }

    #[test]
    fn weyl_function_maps_upper_half_plane_down(re in -50.0f64..200.0, im in 0.01f64..50.0) {
        let m = weyl_dirichlet(example1(), Complex64::new(re, im), 120, &[]).unwrap();
        prop_assert!(m.im < 0.0);
    }

    #[test]
    fn principal_root_squares_back(re in -100.0f64..100.0, im in -100.0f64..100.0) {
        let l = Complex64::new(re, im);
        let r = principal_sqrt(l);
        prop_assert!(r.re >= 0.0);
        prop_assert!((r * r - l).norm() <= 1e-13 * (1.0 + l.norm()));
    }

    #[test]
    fn unit_profile_spectrum_for_any_length(l in 0.5f64..3.0) {
        let p = ConductivityProfile::unit(l, 601).unwrap();
        let pair = DarbouxPair::new(&p, 40);
        let ds = find_eigenvalues(&pair, BoundaryCondition::Dirichlet, 30.0, 200, 40).unwrap();
        let count = (30.0 * l / PI).floor() as usize;
        prop_assert_eq!(ds.len(), count);
        for (k, lam) in ds.eigenvalues.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI / l).powi(2);
            prop_assert!(((lam - exact) / exact).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_are_sorted_roots(bc_index in 0usize..4) {
        let bc = BoundaryCondition::ALL[bc_index];
        let pair = example1();
        let ds = find_eigenvalues(pair, bc, 60.0, 300, 120).unwrap();
        prop_assert!(ds.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        for &rho in ds.rho.iter().filter(|r| **r > 0.0) {
            let f = |r: f64| characteristic(pair, bc, r, 120).unwrap();
            let h = 1e-6 * rho;
            prop_assert!(f(rho - h) * f(rho + h) <= 0.0 || f(rho).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_is_an_involution(a in 0.1f64..2.0, p in -3.0f64..3.0) {
        let prof = ConductivityProfile::from_closed_form(
            1.0,
            301,
            move |x| (1.0 + a * x).powf(p),
            move |x| a * p * (1.0 + a * x).powf(p - 1.0),
            "power",
        )
        .unwrap();
        let back = prof.reciprocal().reciprocal();
        prop_assert!(prof.reciprocal().is_reciprocal_of(&prof, 1e-13));
        for j in 0..prof.mesh().points() {
            prop_assert!((back.kappa()[j] - prof.kappa()[j]).abs() <= 1e-13 * prof.kappa()[j]);
            prop_assert!((back.kappa_prime()[j] - prof.kappa_prime()[j]).abs() <= 1e-12 * (1.0 + prof.kappa_prime()[j].abs()));
        }
    }

    #[test]
    fn quadrature_exact_for_sextic_polynomials(c in proptest::collection::vec(-3.0f64..3.0, 7), l in 0.2f64..5.0) {
        let m = build_mesh(l, 43).unwrap();
        let f = m.sample(|x| c.iter().rev().fold(0.0, |acc, k| acc * x + k));
        let exact: f64 = c.iter().enumerate().map(|(k, ck)| ck * l.powi(k as i32 + 1) / (k + 1) as f64).sum();
        let scale: f64 = c.iter().enumerate().map(|(k, ck)| (ck * l.powi(k as i32 + 1)).abs()).sum::<f64>() + 1.0;
        prop_assert!((integral(&f) - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn piecewise_rejects_unordered_breakpoints(b1 in 0.05f64..0.95, b2 in 0.05f64..0.95) {
        prop_assume!(b1 != b2);
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let pieces = vec![vec![1.0]; 3];
        prop_assert!(PiecewisePolynomial::new(vec![0.0, lo, hi, 1.0], pieces.clone()).is_ok());
        prop_assert!(PiecewisePolynomial::new(vec![0.0, hi, lo, 1.0], pieces).is_err());
    }
}
