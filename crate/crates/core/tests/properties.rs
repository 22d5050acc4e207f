mod common;

use common::*;
use kam_core::random::{jet, seeded, symplectomorphism, torus_map, trig_polynomial, TrigShape};
use kam_core::small_divisors::{diophantine_constant, solve_cohomological};
use kam_core::symplectic::{compose_torus_maps, group_compose, pullback_jet, TorusMap};
use proptest::prelude::*;

fn poly(seed: u64, dim: usize, order: usize) -> S {
    trig_polynomial(&mut seeded(seed), TrigShape::new(dim, order, 0.4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn products_of_real_series_are_real(seed in any::<u64>(), dim in 1usize..3) {
        let f = poly(seed, dim, 5);
        let g = poly(seed ^ 0x5a5a, dim, 5);
        let p = f.multiply(&g).unwrap();
        prop_assert!(p.is_real());
        prop_assert!(p.conjugate_symmetry_defect() <= 1e-15 * f.l1_norm() * g.l1_norm());
    }

    #[test]
    fn majorant_norm_grows_with_width(seed in any::<u64>(), s in 0.0f64..0.5, ds in 0.0f64..0.5) {
        let f = poly(seed, 2, 6);
        prop_assert!(f.majorant_norm(s) <= f.majorant_norm(s + ds));
        prop_assert!(f.sup_norm_estimate(s, 4).unwrap() <= f.majorant_norm(s) * (1.0 + 1e-12));
    }

    #[test]
    fn majorant_norm_is_submultiplicative(seed in any::<u64>(), s in 0.0f64..0.4) {
        let f = poly(seed, 2, 4);
        let g = poly(seed.wrapping_add(1), 2, 4);
        let p = f.mul_truncated(&g, 8).unwrap();
        prop_assert!(p.majorant_norm(s) <= f.majorant_norm(s) * g.majorant_norm(s) * (1.0 + 1e-12));
    }

    #[test]
    fn cohomological_solve_is_exact(seed in any::<u64>()) {
        let g = trig_polynomial::<f64, _>(&mut seeded(seed), TrigShape::new(2, 16, 0.3).zero_mean());
        let f = solve_cohomological(&g, &golden()).unwrap();
        let back = f.lie_derivative(&golden()).unwrap();
        prop_assert!(back.try_sub(&g).unwrap().majorant_norm(0.2) <= 1e-12 * g.majorant_norm(0.2));
        prop_assert_eq!(f.mean().norm(), 0.0);
    }

    #[test]
    fn one_frequency_has_no_small_divisors(a in 0.01f64..10.0, tau in 0.0f64..3.0, neg in any::<bool>()) {
        let a = if neg { -a } else { a };
        let rep = diophantine_constant(&[a], tau, 50).unwrap();
        prop_assert!((rep.gamma - a.abs()).abs() <= 1e-15 * a.abs());
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let shape = TrigShape::new(2, 3, 0.4);
        let f = jet::<f64, _>(&mut rng, shape, 2, 0.5);
        let g = jet::<f64, _>(&mut rng, shape, 2, 0.5);
        let sum = f.poisson_bracket(&g).unwrap().try_add(&g.poisson_bracket(&f).unwrap()).unwrap();
        prop_assert!(sum.jet_norm(0.0) <= 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn diophantine_constant_decreases_with_the_search_box(k in 2usize..30) {
        let a = diophantine_constant(&golden(), 1.5, k).unwrap();
        let b = diophantine_constant(&golden(), 1.5, k + 7).unwrap();
        prop_assert!(b.gamma <= a.gamma);
    }

    #[test]
    fn torus_maps_compose_with_their_inverse_to_the_identity(seed in any::<u64>()) {
        let phi = torus_map::<f64, _>(&mut seeded(seed), TrigShape::new(2, 4, 0.3), 0.3, 0.05).unwrap();
        let inv = kam_core::symplectic::invert_torus_map_to_order(&phi, 24, 0.1, 0.1, 1e-12).unwrap();
        prop_assert!(inv.residual <= 1e-10);
        let id = compose_torus_maps(&phi.resized(24), &inv.inverse).unwrap();
        prop_assert!(id.norm(0.0) <= 1e-10, "{}", id.norm(0.0));
        prop_assert!(TorusMap::<f64>::identity(2, 4).is_identity());
    }

    #[test]
    fn pullback_respects_composition(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let shape = TrigShape::new(2, 12, 0.5).active(2);
        let g1 = symplectomorphism::<f64, _>(&mut rng, shape, 0.2, 1e-3).unwrap();
        let g2 = symplectomorphism::<f64, _>(&mut rng, shape, 0.2, 1e-3).unwrap();
        let h = normal_form(12, 1e-3);
        let lhs = pullback_jet(&h, &group_compose(&g2, &g1).unwrap().0).unwrap();
        let rhs = pullback_jet(&pullback_jet(&h, &g2).unwrap(), &g1).unwrap();
        prop_assert!(lhs.try_sub(&rhs).unwrap().jet_norm(0.0) <= 1e-10);
    }
}

#[test]
fn single_precision_pipeline_agrees_with_double() {
    let shape = TrigShape::new(2, 8, 0.4).zero_mean();
    let f64_g: S = trig_polynomial(&mut seeded(1), shape);
    let f32_g: kam_core::Series32 = trig_polynomial(&mut seeded(1), shape);
    let alpha32 = [1.0f32, 1.618_034];
    let a = solve_cohomological(&f64_g, &golden()).unwrap();
    let b = solve_cohomological(&f32_g, &alpha32).unwrap();
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x.re - y.re as f64).abs() <= 1e-5 && (x.im - y.im as f64).abs() <= 1e-5);
    }
    let back = b.lie_derivative(&alpha32).unwrap();
    assert!(back.try_sub(&f32_g).unwrap().majorant_norm(0.0) <= 1e-5 * f32_g.majorant_norm(0.0));
}
