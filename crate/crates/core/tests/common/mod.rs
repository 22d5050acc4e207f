#![allow(dead_code)]

use kam_core::fourier::FourierSeries;
use kam_core::herman::{NewtonSchedule, TwistedConjugacy};
use kam_core::jet::ActionJet;
use kam_core::random::{seeded, symplectomorphism, TrigShape};
use rand::Rng;
use kam_core::small_divisors::FrequencyVector;

pub type S = FourierSeries<f64>;
pub type J = ActionJet<f64>;

pub fn golden() -> Vec<f64> {
    vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]
}

pub fn freq() -> FrequencyVector<f64> {
    FrequencyVector::certify(golden(), 1.5, 64).unwrap()
}

pub fn schedule(max_iter: usize) -> NewtonSchedule<f64> {
    NewtonSchedule::new(0.05, 0.2, max_iter, 1e-12).unwrap()
}

/// `K = c + alpha . r + r^T Q(theta) r + r_1^3 / 6` with a weakly modulated
/// positive definite `Q`.
pub fn normal_form(order: usize, modulation: f64) -> J {
    let alpha = golden();
    let mut k = J::constant(2, 3, order, 0.25)
        .try_add(&J::linear(2, 3, order, &alpha))
        .unwrap()
        .try_add(&J::quadratic_form(2, 3, order, &[1.0, 0.1, 0.1, 0.8]))
        .unwrap();
    let q11 = k.term(&[2, 0]).try_add(&S::cosine(2, order, &[1, 1], modulation).unwrap()).unwrap();
    k.set_term(&[2, 0], q11).unwrap();
    k.set_term(&[3, 0], S::constant(2, order, 1.0 / 6.0)).unwrap();
    k
}

/// `H := K* o G* + beta* . r` with random `G*` of size `size` at width
/// `s + sigma` and `beta*` of size `size`.
pub fn manufactured(order: usize, seed: u64, size: f64) -> (J, TwistedConjugacy<f64>) {
    let mut rng = seeded(seed);
    let shape = TrigShape::new(2, order, 0.5).active(3);
    let g = symplectomorphism(&mut rng, shape, 0.25, size).unwrap();
    let beta = (0..2).map(|_| size * rng.gen_range(-1.0..1.0)).collect();
    let truth = TwistedConjugacy::new(normal_form(order, 1e-3), g, beta, &golden()).unwrap();
    (truth.image().unwrap(), truth)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `alpha . r + |r|^2 / 2 + eps (cos theta_1 + cos(theta_1 + theta_2))`.
pub fn pendulum(order: usize, eps: f64) -> J {
    let mut h = J::linear(2, 3, order, &golden()).try_add(&J::quadratic_form(2, 3, order, &[0.5, 0.0, 0.0, 0.5])).unwrap();
    let p = S::cosine(2, order, &[1, 0], eps).unwrap().try_add(&S::cosine(2, order, &[1, 1], eps).unwrap()).unwrap();
    h.set_term(&[0, 0], p).unwrap();
    h
}
