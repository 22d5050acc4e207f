//! Adaptive Dormand-Prince 5(4) integration with first-same-as-last stages.

use crate::error::{KamError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOutput<T> {
    pub y: Vec<T>,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl<T: Real> Dopri5<T> {
    pub fn new(tol: T) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 1_000_000 }
    }

    pub fn integrate<F>(&self, f: F, t0: T, t1: T, y0: &[T]) -> Result<OdeOutput<T>>
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        self.integrate_observed(f, t0, t1, y0, |_, _| Ok(()))
    }

    /// Integrates from `t0` to `t1`, calling `observe` after every accepted
    /// step; an error from `observe` aborts the integration.
    pub fn integrate_observed<F, O>(&self, mut f: F, t0: T, t1: T, y0: &[T], mut observe: O) -> Result<OdeOutput<T>>
    where
        F: FnMut(T, &[T], &mut [T]),
        O: FnMut(T, &[T]) -> Result<()>,
    {
        let dim = y0.len();
        let span = t1 - t0;
        let dir = if span < T::zero() { -T::one() } else { T::one() };
        let mut out = OdeOutput { y: y0.to_vec(), accepted: 0, rejected: 0, evaluations: 0 };
        if span == T::zero() {
            return Ok(out);
        }
        let mut k: Vec<Vec<T>> = vec![vec![T::zero(); dim]; 7];
        let mut stage = vec![T::zero(); dim];
        let mut y_new = vec![T::zero(); dim];
        let mut t = t0;
        let mut y = y0.to_vec();
        f(t, &y, &mut k[0]);
        out.evaluations += 1;
        let mut h = self.initial_step(&y, &k[0], span.abs()) * dir;
        let mut reject_streak = false;
        while (t1 - t) * dir > T::zero() {
            if out.accepted + out.rejected >= self.max_steps {
                return Err(KamError::NonConvergence { what: "ODE integration".into(), iterations: self.max_steps, last: t.as_f64() });
            }
            if ((t + h) - t1) * dir > T::zero() {
                h = t1 - t;
            }
            for s in 0..6 {
                for i in 0..dim {
                    let mut acc = T::zero();
                    for (j, &a) in A[s].iter().enumerate() {
                        acc = acc + T::lit(a) * k[j][i];
                    }
                    stage[i] = y[i] + h * acc;
                }
                f(t + T::lit(C[s]) * h, &stage, &mut k[s + 1]);
                out.evaluations += 1;
                if s == 5 {
                    y_new.copy_from_slice(&stage);
                }
            }
            // the last stage was evaluated at the fifth-order solution
            let mut err = T::zero();
            for i in 0..dim {
                let mut e = T::zero();
                for (j, &w) in E.iter().enumerate() {
                    e = e + T::lit(w) * k[j][i];
                }
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let q = h * e / sc;
                err = err + q * q;
            }
            err = (err / T::from_usize_lossy(dim.max(1))).sqrt();
            if !err.is_finite() {
                h = h * T::lit(0.1);
                out.rejected += 1;
                continue;
            }
            if err <= T::one() {
                t = if (t1 - (t + h)) * dir <= T::zero() { t1 } else { t + h };
                y.copy_from_slice(&y_new);
                let last = k.pop().expect("seven stages");
                k.insert(0, last);
                out.accepted += 1;
                observe(t, &y)?;
                let mut fac = T::lit(0.9) * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
                fac = fac.min(T::lit(5.0)).max(T::lit(0.2));
                if reject_streak {
                    fac = fac.min(T::one());
                }
                reject_streak = false;
                h = h * fac;
            } else {
                let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
                h = h * fac;
                out.rejected += 1;
                reject_streak = true;
            }
        }
        out.y = y;
        Ok(out)
    }

    fn initial_step(&self, y: &[T], f0: &[T], span: T) -> T {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for (yi, fi) in y.iter().zip(f0) {
            let sc = self.atol + self.rtol * yi.abs();
            d0 = d0.max((*yi / sc).abs());
            d1 = d1.max((*fi / sc).abs());
        }
        let h = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
        h.min(span).max(span * T::lit(1e-12))
    }
}
