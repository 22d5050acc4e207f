mod common;

use common::*;
use kam_core::herman::*;
use kam_core::random::{seeded, symplectomorphism, TrigShape};

#[test]
fn manufactured_conjugacy_is_recovered_at_full_resolution() {
    let (h, truth) = manufactured(32, 3, 1e-3);
    let run = run_newton(&h, TwistedConjugacy::initial(&h, &golden()), &freq(), &schedule(8));
    let defects = run.trace.defects();
    assert!(run.converged(), "{:?} {defects:?}", run.outcome);
    assert!(run.trace.iterations() <= 8, "{defects:?}");
    assert!(max_abs_diff(&run.conjugacy.beta, &truth.beta) <= 1e-9);
    assert!(conjugacy_distance(&run.conjugacy, &truth, 0.0).unwrap() <= 1e-8);
    assert!(run.reports.iter().all(|r| r.bound_holds));
    let fit = run.trace.quadratic_fit(1e-12);
    assert!(fit.pairs >= 2 && fit.contracting, "{fit:?} {defects:?}");
    for w in defects.windows(2).filter(|w| w[0] > 1e-12 && w[1] > 1e-12) {
        assert!(w[1] <= fit.c_hat * w[0] * w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn normal_form_needs_no_step() {
    let k = normal_form(8, 1e-3);
    let run = run_newton(&k, TwistedConjugacy::initial(&k, &golden()), &freq(), &schedule(8));
    assert!(run.converged());
    assert_eq!(run.trace.iterations(), 0);
    assert!(run.reports.is_empty());
    assert_eq!(run.conjugacy.beta, vec![0.0, 0.0]);
}

#[test]
fn large_perturbation_diverges_with_a_trace() {
    let mut h = normal_form(12, 1e-3);
    let pert = h.term(&[0, 0]).try_add(&S::cosine(2, 12, &[1, -1], 0.5).unwrap()).unwrap();
    h.set_term(&[0, 0], pert).unwrap();
    let run = run_newton(&h, TwistedConjugacy::initial(&h, &golden()), &freq(), &schedule(12));
    assert!(!run.converged(), "{:?}", run.trace.defects());
    assert!(!run.trace.records.is_empty());
    assert!(matches!(run.outcome, NewtonOutcome::Diverged { .. } | NewtonOutcome::Failed(_) | NewtonOutcome::MaxIterations));
    assert!(run.into_result().is_err());
}

#[test]
fn added_offset_only_moves_beta() {
    let (h, _) = manufactured(12, 11, 1e-3);
    let extra = [3e-4, -7e-4];
    let h2 = h.try_add(&J::linear(2, h.degree(), h.order(), &extra)).unwrap();
    let a = run_newton(&h, TwistedConjugacy::initial(&h, &golden()), &freq(), &schedule(10));
    let b = run_newton(&h2, TwistedConjugacy::initial(&h2, &golden()), &freq(), &schedule(10));
    assert!(a.converged() && b.converged());
    for j in 0..2 {
        assert!((b.conjugacy.beta[j] - a.conjugacy.beta[j] - extra[j]).abs() <= 1e-11);
    }
    assert!(a.conjugacy.k.try_sub(&b.conjugacy.k).unwrap().jet_norm(0.0) <= 1e-11);
    let mut bb = b.conjugacy.clone();
    bb.beta = a.conjugacy.beta.clone();
    assert!(conjugacy_distance(&a.conjugacy, &bb, 0.0).unwrap() <= 1e-11);
}

#[test]
fn distinct_initial_guesses_reach_the_same_conjugacy() {
    let (h, _) = manufactured(12, 17, 1e-3);
    let x0 = TwistedConjugacy::initial(&h, &golden());
    let mut x1 = x0.clone();
    x1.g = symplectomorphism(&mut seeded(99), TrigShape::new(2, 12, 0.5).active(2), 0.25, 5e-4).unwrap();
    x1.beta = vec![2e-4, 1e-4];
    let a = run_newton(&h, x0, &freq(), &schedule(10));
    let b = run_newton(&h, x1, &freq(), &schedule(10));
    assert!(a.converged() && b.converged(), "{:?} {:?}", a.trace.defects(), b.trace.defects());
    assert!(max_abs_diff(&a.conjugacy.beta, &b.conjugacy.beta) <= 1e-9);
    assert!(a.conjugacy.k.try_sub(&b.conjugacy.k).unwrap().jet_norm(0.0) <= 1e-9);
}

#[test]
fn radius_scales_with_the_inverse_square_of_the_constant() {
    let a = theoretical_radius(10.0, 3.0, 4.5, 1.0, 0.1, 0.2, 0.05).unwrap();
    let b = theoretical_radius(20.0, 3.0, 4.5, 1.0, 0.1, 0.2, 0.05).unwrap();
    assert!((a.eps_main / b.eps_main - 4.0).abs() < 1e-12);
    assert!((a.eps_domain / b.eps_domain - 4.0).abs() < 1e-12);
    let tau: f64 = 5.5;
    let expected = 2f64.powf(-8.0 * tau) / 900.0 * 0.2f64.powf(2.0 * tau) * 0.05;
    assert!((a.eps_main / expected - 1.0).abs() < 1e-12);
    assert!(a.domain_consistent() && b.domain_consistent());
    assert!(theoretical_radius(10.0, 3.0, 4.5, 1.0, 0.1, 0.2, 0.2).is_err());
}

#[test]
fn second_derivative_vanishes_on_zero_directions() {
    let (h, truth) = manufactured(8, 23, 1e-3);
    let z = zero_tangent::<f64>(2, h.degree(), h.order());
    assert_eq!(second_derivative(&truth, &z, &z).unwrap().jet_norm(0.1), 0.0);
    assert_eq!(second_derivative_bound(&truth, &z, &z, 0.1, 0.1).unwrap(), 0.0);
}

#[test]
fn second_derivative_is_bilinear_and_bounded_on_newton_steps() {
    let (h, _) = manufactured(8, 29, 1e-3);
    let x = TwistedConjugacy::initial(&h, &golden());
    let (_, rep) = newton_step(&h, &x, &freq(), StepWidths::uniform(0.1, 0.1)).unwrap();
    let dx = rep.step;
    let ratio = second_derivative_bound(&x, &dx, &dx, 0.05, 0.1).unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
    let mut dx2 = dx.clone();
    dx2.delta_k = dx.delta_k.scale(2.0);
    dx2.phi_dot = dx.phi_dot.iter().map(|f| f.scale(2.0)).collect();
    dx2.s_dot = dx.s_dot.scale(2.0);
    let one = second_derivative(&x, &dx, &dx).unwrap();
    let two = second_derivative(&x, &dx2, &dx).unwrap();
    assert!(two.try_sub(&one.scale(2.0)).unwrap().jet_norm(0.05) <= 1e-12 * one.jet_norm(0.05));
}

#[test]
fn lipschitz_estimate_holds_for_offsets_and_is_exact_for_equal_data() {
    let (h, _) = manufactured(12, 31, 1e-3);
    let x0 = TwistedConjugacy::initial(&h, &golden());
    let same = lipschitz_check(&h, &h, &x0, &freq(), &schedule(10), 10.0, 4.5, 0.1).unwrap();
    assert_eq!(same.solution_distance, 0.0);
    assert!(same.pass);
    let h2 = h.try_add(&J::linear(2, h.degree(), h.order(), &[1e-5, 0.0])).unwrap();
    let moved = lipschitz_check(&h, &h2, &x0, &freq(), &schedule(10), 10.0, 4.5, 0.1).unwrap();
    assert!(moved.pass, "{moved:?}");
    assert!((moved.solution_distance - 1e-5).abs() < 1e-11);
}

#[test]
fn trace_csv_has_one_row_per_step() {
    let (h, _) = manufactured(8, 37, 1e-3);
    let run = run_newton(&h, TwistedConjugacy::initial(&h, &golden()), &freq(), &schedule(8));
    let csv = run.trace.to_csv(2);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,s_k,sigma_k,defect,step_norm,delta_beta_1,delta_beta_2,delta_c");
    assert_eq!(lines.count(), run.trace.records.len());
}
