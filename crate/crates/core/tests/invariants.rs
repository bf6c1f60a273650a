//! Randomized invariants of the special functions, operators and fits.

use oseen_core::analysis::fit_power_law;
use oseen_core::discretization::{make_grid, quadrature, Field, ModeSpec};
use oseen_core::operators::{apply_kernel, assemble_full};
use oseen_core::solver::{eigenvalues_only, hermitian_part_min_eig};
use oseen_core::{specfun, Complex64};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sigma_is_decreasing_into_unit_interval(a in 0.0f64..20.0, d in 1e-3f64..5.0) {
        let s0 = specfun::sigma(a).unwrap();
        let s1 = specfun::sigma(a + d).unwrap();
        prop_assert!(s0 <= 1.0 && s1 > 0.0);
        prop_assert!(s1 < s0);
        prop_assert!(specfun::sigma_prime(a + d).unwrap() < 0.0);
    }

    #[test]
    fn sigma_inverse_round_trips(nu in 1e-3f64..0.999) {
        let r = specfun::sigma_inverse(nu).unwrap();
        prop_assert!((specfun::sigma(r).unwrap() - nu).abs() < 1e-12);
    }

    #[test]
    fn commutator_potential_is_nonnegative(r in 1e-3f64..30.0) {
        prop_assert!(specfun::commutator_potential(r).unwrap() >= 0.0);
    }

    #[test]
    fn fit_recovers_power_laws(slope in -1.0f64..1.0, scale in 0.1f64..10.0, a0 in 1.0f64..100.0) {
        let pts: Vec<(f64, f64)> =
            (0..5).map(|i| { let a = a0 * 10f64.powi(i); (a, scale * a.powf(slope)) }).collect();
        let fit = fit_power_law(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
    }

    /// The kernel operator is symmetric for the plain L² quadrature pairing.
    #[test]
    fn kernel_is_symmetric(k in 1i64..5, c in prop::array::uniform4(-1.0f64..1.0)) {
        let grid = make_grid(120, 12.0).unwrap();
        let w = Field::from_real_fn(grid, |r| (c[0] + c[1] * r) * (-r * r / 8.0).exp() * r.sqrt());
        let v = Field::from_real_fn(grid, |r| (c[2] + c[3] * r * r) * (-r / 2.0).exp() * r);
        let lhs = quadrature(&apply_kernel(k, &w).unwrap(), &v).unwrap();
        let rhs = quadrature(&w, &apply_kernel(k, &v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1e-3));
    }

    /// The spectrum lies in the numerical range, so min Re λ is bounded below
    /// by the smallest eigenvalue of the Hermitian part.
    #[test]
    fn spectrum_lies_right_of_hermitian_part(
        alpha in -2000.0f64..2000.0,
        k in 1i64..4,
        lambda in -20.0f64..20.0,
    ) {
        let grid = make_grid(60, 10.0).unwrap();
        let mode = ModeSpec::new(alpha, k).unwrap().with_lambda(lambda).unwrap();
        let op = assemble_full(mode, grid).unwrap();
        let herm = hermitian_part_min_eig(&op).unwrap();
        let min_re = eigenvalues_only(&op).unwrap().iter().map(|z: &Complex64| z.re).fold(f64::INFINITY, f64::min);
        prop_assert!(min_re >= herm - 1e-8, "{min_re} < {herm}");
    }
}
