//! Seeded random test objects: trigonometric polynomials, jets and maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fourier::FourierSeries;
use crate::jet::ActionJet;
use crate::multi_index::{l1, WaveBox};
use crate::scalar::{cplx, Real};
use crate::symplectic::{ExactOneForm, FiberedSymplectomorphism, TorusMap};

pub type Rng8 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random trigonometric polynomial: coefficients uniform in the
/// unit square times `exp(-decay |k|_1)`, restricted to `|k|_inf <= active`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigShape {
    pub dim: usize,
    pub order: usize,
    pub active: usize,
    pub decay: f64,
    pub real: bool,
    pub zero_mean: bool,
}

impl TrigShape {
    pub fn new(dim: usize, order: usize, decay: f64) -> Self {
        Self { dim, order, active: order, decay, real: true, zero_mean: false }
    }

    pub fn zero_mean(self) -> Self {
        Self { zero_mean: true, ..self }
    }

    pub fn active(self, active: usize) -> Self {
        Self { active: active.min(self.order), ..self }
    }
}

pub fn trig_polynomial<T: Real, R: Rng>(rng: &mut R, shape: TrigShape) -> FourierSeries<T> {
    let bx = WaveBox::new(shape.dim, shape.order);
    let mut coeffs = Vec::with_capacity(bx.len());
    let mut k = vec![0i64; shape.dim];
    for idx in 0..bx.len() {
        bx.wave_into(idx, &mut k);
        // draw for every mode so that the stream does not depend on the filters
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let inside = k.iter().all(|x| x.unsigned_abs() as usize <= shape.active);
        let keep = inside && !(shape.zero_mean && idx == bx.zero_index());
        let w = if keep { (-shape.decay * l1(&k) as f64).exp() } else { 0.0 };
        coeffs.push(cplx(T::lit(a * w), T::lit(b * w)));
    }
    FourierSeries::from_coeffs(shape.dim, shape.order, coeffs, shape.real).expect("box size")
}

/// Random jet with every monomial carrying an independent polynomial of the
/// given shape, scaled by `scale^{|m|}`.
pub fn jet<T: Real, R: Rng>(rng: &mut R, shape: TrigShape, degree: usize, scale: f64) -> ActionJet<T> {
    let mut j = ActionJet::zeros(shape.dim, degree, shape.order);
    let mono = j.monomials().clone();
    for (i, m) in mono.iter().enumerate() {
        let w = T::lit(scale.powi(mono.total_degree(i) as i32));
        j.set_term(m, trig_polynomial::<T, R>(rng, shape).scale(w)).expect("shape");
    }
    j
}

/// Random torus map with `|v|_s` equal to `size` in the majorant norm.
pub fn torus_map<T: Real, R: Rng>(rng: &mut R, shape: TrigShape, s: T, size: T) -> Result<TorusMap<T>> {
    let shape = shape.zero_mean();
    let v: Vec<FourierSeries<T>> = (0..shape.dim).map(|_| trig_polynomial(rng, shape)).collect();
    let phi = TorusMap::normalized(v)?;
    let norm = phi.norm(s);
    let f = if norm > T::zero() { size / norm } else { T::zero() };
    TorusMap::normalized(phi.displacement().iter().map(|c| c.scale(f)).collect())
}

/// Random `G = (phi, dS)` with `|v|_s = |rho|_s = size`.
pub fn symplectomorphism<T: Real, R: Rng>(rng: &mut R, shape: TrigShape, s: T, size: T) -> Result<FiberedSymplectomorphism<T>> {
    let phi = torus_map(rng, shape, s, size)?;
    let pot = trig_polynomial::<T, R>(rng, shape.zero_mean());
    let form = ExactOneForm::new(pot)?;
    let n = form.norm(s);
    let f = if n > T::zero() { size / n } else { T::zero() };
    FiberedSymplectomorphism::new(phi, ExactOneForm::new(form.potential().scale(f))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let shape = TrigShape::new(2, 3, 0.5);
        let a: FourierSeries<f64> = trig_polynomial(&mut seeded(7), shape);
        let b: FourierSeries<f64> = trig_polynomial(&mut seeded(7), shape);
        assert_eq!(a, b);
        assert!(a.is_real());
        let z: FourierSeries<f64> = trig_polynomial(&mut seeded(7), shape.zero_mean());
        assert_eq!(z.mean().norm(), 0.0);
    }

    #[test]
    fn maps_have_the_requested_size() {
        let phi: TorusMap<f64> = torus_map(&mut seeded(3), TrigShape::new(2, 4, 0.3), 0.2, 0.05).unwrap();
        assert!((phi.norm(0.2) - 0.05).abs() < 1e-15);
        let g: FiberedSymplectomorphism<f64> = symplectomorphism(&mut seeded(3), TrigShape::new(2, 4, 0.3), 0.2, 1e-3).unwrap();
        assert!((g.form().norm(0.2) - 1e-3).abs() < 1e-15);
    }
}
