//! Frozen values of the derived bounds and the orderings between them.
//!
//! Reference numbers were produced once by this implementation under the
//! default grid policy (base spacing 0.05, converged under doubling) and are
//! compared with a 1% tolerance.

use std::f64::consts::PI;

use oseen_core::analysis::{
    numerical_range_bound, pseudospectral_bound, spectral_bound, GridPolicy,
};
use oseen_core::discretization::ModeSpec;

fn alpha_for(beta_1: f64) -> f64 {
    8.0 * PI * beta_1
}

fn close(value: f64, frozen: f64) -> bool {
    (value - frozen).abs() <= 1e-2 * frozen.abs()
}

#[test]
fn pseudospectral_bound_table() {
    let policy = GridPolicy::default();
    let frozen = [(1e2, 3.2642), (1e3, 7.3205), (1e4, 16.183), (1e5, 35.317)];
    for (beta, psi) in frozen {
        let b = pseudospectral_bound(ModeSpec::new(alpha_for(beta), 1).unwrap(), &policy).unwrap();
        assert!(b.converged);
        let value = b.psi_bound.unwrap();
        assert!(close(value, psi), "beta = {beta}: {value} vs {psi}");
        // The minimizing shift sits inside the critical-layer range ν ∈ (0,1).
        let nu = b.lambda_star.unwrap() / beta;
        assert!(nu > 0.0 && nu < 1.0, "beta = {beta}: nu = {nu}");
    }
}

#[test]
fn spectral_bound_is_symmetric_and_dominates() {
    let policy = GridPolicy::default();
    let alpha = alpha_for(1e3);
    for (k, frozen) in [(1, 22.3635), (2, 31.6307)] {
        let plus = spectral_bound(ModeSpec::new(alpha, k).unwrap(), &policy).unwrap();
        let minus = spectral_bound(ModeSpec::new(-alpha, k).unwrap(), &policy).unwrap();
        let (s_plus, s_minus) = (plus.sigma_bound.unwrap(), minus.sigma_bound.unwrap());
        assert!(close(s_plus, frozen), "k = {k}: {s_plus}");
        assert!((s_plus - s_minus).abs() <= 1e-8 * s_plus, "k = {k}: {s_plus} vs {s_minus}");

        let mode = ModeSpec::new(alpha, k).unwrap();
        let psi = pseudospectral_bound(mode, &policy).unwrap().psi_bound.unwrap();
        assert!(psi <= s_plus + 1e-6, "k = {k}: psi {psi} > sigma {s_plus}");
        let range = numerical_range_bound(mode, &policy).unwrap();
        assert!(range.value <= s_plus + 2e-2, "k = {k}: range {} > sigma {s_plus}", range.value);
    }
}

#[test]
fn spectral_bound_at_rest() {
    let policy = GridPolicy::default();
    // k = 1 on the complement of the ground profile: 3/2; k = 2: 1.
    for (k, expect) in [(1, 1.5), (2, 1.0)] {
        let b = spectral_bound(ModeSpec::new(0.0, k).unwrap(), &policy).unwrap();
        assert!((b.sigma_bound.unwrap() - expect).abs() < 2e-3, "k = {k}");
    }
}
