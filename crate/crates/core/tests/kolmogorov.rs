use approx::assert_abs_diff_eq;
use kam_core::fourier::FourierSeries;
use kam_core::herman::NewtonSchedule;
use kam_core::jet::ActionJet;
use kam_core::kolmogorov::*;
use kam_core::small_divisors::FrequencyVector;

type S = FourierSeries<f64>;
type J = ActionJet<f64>;

fn golden() -> Vec<f64> {
    vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]
}

fn freq2() -> FrequencyVector<f64> {
    FrequencyVector::certify(golden(), 1.5, 60).unwrap()
}

fn config() -> OuterConfig<f64> {
    OuterConfig::new(NewtonSchedule::new(0.05, 0.2, 12, 1e-12).unwrap())
}

fn verify_config(samples: usize, rotation: f64) -> VerifyConfig<f64> {
    VerifyConfig { time: 10.0, samples, ode_tol: 1e-12, validity_radius: 0.025, rotation }
}

/// `c + alpha . r + r . Q r` with constant coefficients.
fn quadratic_model(order: usize, degree: usize, q: &[f64]) -> J {
    J::constant(2, degree, order, 0.4)
        .try_add(&J::linear(2, degree, order, &golden()))
        .unwrap()
        .try_add(&J::quadratic_form(2, degree, order, q))
        .unwrap()
}

fn coupled_pendulum(order: usize, eps: f64) -> J {
    let mut h = quadratic_model(order, 3, &[0.5, 0.0, 0.0, 0.5]).try_sub(&J::constant(2, 3, order, 0.4)).unwrap();
    let p = S::cosine(2, order, &[1, 0], eps).unwrap().try_add(&S::cosine(2, order, &[1, 1], eps).unwrap()).unwrap();
    h.set_term(&[0, 0], p).unwrap();
    h
}

#[test]
fn flat_quadratic_part_is_left_alone() {
    let k = quadratic_model(4, 3, &[0.5, 0.1, 0.1, 0.3]);
    let fl = flatten_quadratic(&k, &freq2()).unwrap();
    assert!(fl.generator.min_degree().is_none());
    assert_eq!(fl.k_flat, k);
}

#[test]
fn single_harmonic_twist_is_flattened() {
    let (a, eps) = (0.7, 0.1);
    let freq = FrequencyVector::certify(vec![a], 1.0, 20).unwrap();
    let mut k = J::linear(1, 3, 6, &[a]);
    k.set_term(&[2], S::constant(1, 6, 0.5).try_add(&S::cosine(1, 6, &[1], eps / 2.0).unwrap()).unwrap()).unwrap();
    let fl = flatten_quadratic(&k, &freq).unwrap();
    let f_expected = S::sine(1, 6, &[1], eps / (2.0 * a)).unwrap();
    assert!(fl.f[0].try_sub(&f_expected).unwrap().l1_norm() < 1e-16);
    assert!(quadratic_oscillation(&fl.k_flat) < 1e-11);
    assert_abs_diff_eq!(fl.k_flat.term(&[2]).mean().re, 0.5, epsilon = 1e-15);
    assert!(fl.k_flat.term(&[0]).try_sub(&k.term(&[0])).unwrap().l1_norm() < 1e-16);
    assert!(fl.k_flat.term(&[1]).try_sub(&k.term(&[1])).unwrap().l1_norm() < 1e-16);
}

#[test]
fn random_twist_flattens_to_its_average() {
    let order = 6;
    let mut k = quadratic_model(order, 3, &[0.5, 0.1, 0.1, 0.3]);
    let wobble = [S::cosine(2, order, &[1, -1], 0.05).unwrap(), S::sine(2, order, &[0, 2], 0.03).unwrap(), S::cosine(2, order, &[2, 1], 0.02).unwrap()];
    for (e, w) in [[2usize, 0], [1, 1], [0, 2]].iter().zip(&wobble) {
        let t = k.term(e).try_add(w).unwrap();
        k.set_term(e, t).unwrap();
    }
    let twist = TwistData::from_jet(&k).unwrap();
    let fl = flatten_quadratic(&k, &freq2()).unwrap();
    assert!(quadratic_oscillation(&fl.k_flat) < 1e-11);
    let flat = TwistData::from_jet(&fl.k_flat).unwrap();
    for (a, b) in twist.q.iter().zip(&flat.q) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }
}

#[test]
fn translation_examples() {
    let h = J::quadratic_form(1, 3, 2, &[0.5]);
    assert_eq!(translate_actions(&h, &[0.0], 1.0).unwrap(), h);
    let t = translate_actions(&h, &[0.3], 1.0).unwrap();
    assert_abs_diff_eq!(t.term(&[0]).mean().re, 0.045, epsilon = 1e-16);
    assert_abs_diff_eq!(t.term(&[1]).mean().re, 0.3, epsilon = 1e-16);
    assert_abs_diff_eq!(t.term(&[2]).mean().re, 0.5, epsilon = 1e-16);
    let k = coupled_pendulum(4, 0.1).try_add(&J::quadratic_form(2, 3, 4, &[0.0, 0.2, 0.2, 0.0]).mul(&J::linear(2, 3, 4, &[1.0, 1.0])).unwrap()).unwrap();
    let back = translate_actions(&translate_actions(&k, &[0.02, -0.05], 1.0).unwrap(), &[-0.02, 0.05], 1.0).unwrap();
    assert!(back.try_sub(&k).unwrap().jet_norm(0.5) < 1e-13);
    assert!(translate_actions(&k, &[0.2, 0.0], 0.1).is_err());
}

#[test]
fn offset_map_trivial_cases() {
    let k = quadratic_model(8, 3, &[0.5, 0.0, 0.0, 0.5]);
    let ev = offset_map(&k, &freq2(), None, &[0.0, 0.0], &config()).unwrap();
    assert!(ev.beta.iter().all(|b| b.abs() < 1e-15));
    let beta0 = [3e-4, -1e-4];
    let h = k.try_add(&J::linear(2, 3, 8, &beta0)).unwrap();
    let ev = offset_map(&h, &freq2(), None, &[0.0, 0.0], &config()).unwrap();
    for j in 0..2 {
        assert_abs_diff_eq!(ev.beta[j], beta0[j], epsilon = 1e-15);
    }
}

#[test]
fn exact_quadratic_offset_is_linear_in_translation() {
    let q = [0.5, 0.15, 0.15, 0.35];
    let k = quadratic_model(8, 3, &q);
    for r in [[1e-3, 0.0], [0.0, -1e-3], [7e-4, 6e-4], [-1e-4, 3e-4]] {
        let ev = offset_map(&k, &freq2(), None, &r, &config()).unwrap();
        for i in 0..2 {
            let expected = 2.0 * (q[2 * i] * r[0] + q[2 * i + 1] * r[1]);
            assert_abs_diff_eq!(ev.beta[i], expected, epsilon = 1e-9);
        }
    }
}

#[test]
fn perturbed_offset_follows_the_twist_to_first_order() {
    let h = coupled_pendulum(24, 1e-3);
    let base = offset_map(&h, &freq2(), None, &[0.0, 0.0], &config()).unwrap();
    let r = [4e-4, -3e-4];
    let ev = offset_map(&h, &freq2(), None, &r, &config()).unwrap();
    for i in 0..2 {
        let slope = (ev.beta[i] - base.beta[i]) / r[i].abs().max(1e-30);
        let expected = r[i] / r[i].abs();
        assert!((slope - expected).abs() <= 0.05, "{slope} vs {expected}");
    }
}

#[test]
fn warm_start_gives_the_same_offset() {
    let h = coupled_pendulum(24, 1e-3);
    let cfg = config();
    let first = offset_map(&h, &freq2(), None, &[1e-4, 0.0], &cfg).unwrap();
    let cold = offset_map(&h, &freq2(), None, &[2e-4, -1e-4], &cfg).unwrap();
    let warm = offset_map(&h, &freq2(), Some(&first.conjugacy), &[2e-4, -1e-4], &cfg).unwrap();
    for j in 0..2 {
        assert_abs_diff_eq!(cold.beta[j], warm.beta[j], epsilon = 1e-11);
    }
    assert!(warm.trace.iterations() <= cold.trace.iterations());
}

#[test]
fn normal_form_has_the_zero_section() {
    let k = quadratic_model(8, 3, &[0.5, 0.0, 0.0, 0.5]);
    let torus = solve_invariant_torus(&k, &freq2(), &config()).unwrap();
    assert!(torus.r_star.iter().all(|r| *r == 0.0));
    assert!(torus.conjugacy.g.is_identity());
    let rep = verify_invariance(&torus, &k, &golden(), &verify_config(16, 0.0)).unwrap();
    assert!(rep.max_dev <= 1e-10, "{rep:?}");
}

#[test]
fn constant_offset_is_cancelled_by_the_closed_form_translation() {
    let q = [0.5, 0.15, 0.15, 0.35];
    let beta0 = [2e-4, -3e-4];
    let h = quadratic_model(8, 3, &q).try_add(&J::linear(2, 3, 8, &beta0)).unwrap();
    let torus = solve_invariant_torus(&h, &freq2(), &config()).unwrap();
    // R* = -(2Q)^{-1} beta0
    let det = 4.0 * (q[0] * q[3] - q[1] * q[2]);
    let expected = [-(2.0 * q[3] * beta0[0] - 2.0 * q[1] * beta0[1]) / det, -(-2.0 * q[2] * beta0[0] + 2.0 * q[0] * beta0[1]) / det];
    for j in 0..2 {
        assert_abs_diff_eq!(torus.r_star[j], expected[j], epsilon = 1e-13);
    }
}

#[test]
fn offsets_shift_the_torus_by_the_inverse_twist() {
    let h = coupled_pendulum(24, 1e-3);
    let base = solve_invariant_torus(&h, &freq2(), &config()).unwrap();
    let beta0 = [5e-5, -8e-5];
    let shifted = solve_invariant_torus(&h.try_add(&J::linear(2, 3, 24, &beta0)).unwrap(), &freq2(), &config()).unwrap();
    // first order: dR = -(2Q)^{-1} beta0 with Q = I/2
    for j in 0..2 {
        let slope = (shifted.r_star[j] - base.r_star[j]) / beta0[j];
        assert!((slope + 1.0).abs() <= 0.05, "{slope}");
    }
}

#[test]
fn perturbed_torus_is_invariant_under_the_flow() {
    let h = coupled_pendulum(32, 1e-3);
    let torus = solve_invariant_torus(&h, &freq2(), &config()).unwrap();
    assert!(torus.beta.iter().all(|b| b.abs() <= 1e-10));
    let rep = verify_invariance(&torus, &h, &golden(), &verify_config(64, 0.0)).unwrap();
    assert!(rep.max_dev <= 1e-6, "{rep:?}");
    assert!(rep.energy_drift <= 1e-9, "{rep:?}");
    let rotated = verify_invariance(&torus, &h, &golden(), &verify_config(64, 0.37)).unwrap();
    assert!(rotated.max_dev <= 1e-6);
    assert!(embedding_min_jacobian(&torus, 256) > 0.5);
}

#[test]
fn degenerate_twist_is_rejected() {
    let k = quadratic_model(4, 3, &[0.5, 0.5, 0.5, 0.5]);
    assert!(matches!(solve_invariant_torus(&k, &freq2(), &config()), Err(kam_core::error::KamError::TwistDegenerate { .. })));
}

#[test]
fn sample_angles_are_spread_and_rotate() {
    let a = sample_angles::<f64>(2, 64, 0.0);
    let b = sample_angles::<f64>(2, 64, 0.5);
    assert_eq!(a.len(), 64);
    for (x, y) in a.iter().zip(&b) {
        assert_abs_diff_eq!(y[0] - x[0], 0.5, epsilon = 1e-15);
        assert!(x.iter().all(|t| (0.0..std::f64::consts::TAU).contains(t)));
    }
}

#[test]
fn torus_through_a_flattening_is_invariant() {
    let mut h = coupled_pendulum(32, 1e-3);
    let t = h.term(&[2, 0]).try_add(&S::cosine(2, 32, &[0, 1], 0.02).unwrap()).unwrap();
    h.set_term(&[2, 0], t).unwrap();
    let torus = solve_invariant_torus(&h, &freq2(), &config()).unwrap();
    assert!(torus.generator.min_degree().is_some());
    assert!(torus.beta.iter().all(|b| b.abs() <= 1e-10));
    let rep = verify_invariance(&torus, &h, &golden(), &verify_config(32, 0.0)).unwrap();
    assert!(rep.max_dev <= 1e-6, "{rep:?}");
}
