//! The averaged Hessian and the flattening of the quadratic part.

use crate::error::{KamError, Result};
use crate::fourier::FourierSeries;
use crate::herman::k2_matrix;
use crate::jet::ActionJet;
use crate::linalg;
use crate::scalar::Real;
use crate::small_divisors::{solve_cohomological, FrequencyVector};
use crate::symplectic::lie_transform;

/// `Q = <K_2>` with `K . r^2 = sum Q_ij r_i r_j`, and its condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistData<T: Real> {
    pub q: Vec<T>,
    pub condition: T,
}

impl<T: Real> TwistData<T> {
    pub fn from_jet(k: &ActionJet<T>) -> Result<Self> {
        if k.degree() < 2 {
            return Err(KamError::InvalidParameter("twist needs a jet of degree at least 2".into()));
        }
        let n = k.dim();
        let k2 = k2_matrix(k);
        let mut q = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] = (k2[i * n + j].mean().re + k2[j * n + i].mean().re) * T::lit(0.5);
            }
        }
        let condition = linalg::condition_inf(&q, n);
        Ok(Self { q, condition })
    }

    pub fn dim(&self) -> usize {
        (self.q.len() as f64).sqrt() as usize
    }

    pub fn check(&self, threshold: T) -> Result<()> {
        if !(self.condition <= threshold) {
            return Err(KamError::TwistDegenerate { cond: self.condition.as_f64(), threshold: threshold.as_f64() });
        }
        Ok(())
    }

    /// `2 Q`, the derivative of the offset at `R = 0` for a flat quadratic part.
    pub fn jacobian(&self) -> Vec<T> {
        self.q.iter().map(|x| *x + *x).collect()
    }
}

/// Result of removing the angle dependence of the `r^2` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Flattening<T: Real> {
    pub k_flat: ActionJet<T>,
    /// `W = F(theta) . r^2`; the time-one map of its flow is the change of variables.
    pub generator: ActionJet<T>,
    /// `F` row-major, symmetric.
    pub f: Vec<FourierSeries<T>>,
}

/// Solves `L_alpha F = K_2 - <K_2>` entrywise and applies the time-one map
/// of `W = F . r^2` to `K`.
pub fn flatten_quadratic<T: Real>(k: &ActionJet<T>, freq: &FrequencyVector<T>) -> Result<Flattening<T>> {
    let n = k.dim();
    if freq.dim() != n {
        return Err(KamError::DimensionMismatch { expected: n, found: freq.dim() });
    }
    let generator = quadratic_generator(k, freq)?;
    let f = k2_matrix(&generator);
    let k_flat = lie_transform(k, &generator)?;
    Ok(Flattening { k_flat, generator, f })
}

/// `W = F . r^2` with `L_alpha F = K_2 - <K_2>`.
pub fn quadratic_generator<T: Real>(k: &ActionJet<T>, freq: &FrequencyVector<T>) -> Result<ActionJet<T>> {
    let n = k.dim();
    let mut w = ActionJet::zeros(n, k.degree(), k.order());
    for i in 0..n {
        for j in i..n {
            let mut e = vec![0usize; n];
            e[i] += 1;
            e[j] += 1;
            // the r_i r_j coefficient is F_ii on the diagonal and 2 F_ij off it
            let c = k.term(&e);
            let mut g = solve_cohomological(&c.add_constant(-c.mean().re), &freq.alpha)?;
            g.realify();
            w.set_term(&e, g)?;
        }
    }
    Ok(w)
}

/// Largest oscillating coefficient of the `r^2` part, the flatness defect.
pub fn quadratic_oscillation<T: Real>(k: &ActionJet<T>) -> T {
    let mut worst = T::zero();
    for f in k2_matrix(k) {
        let z = f.wave_box().zero_index();
        for (i, c) in f.coeffs().iter().enumerate() {
            if i != z {
                worst = worst.max(c.norm());
            }
        }
    }
    worst
}
