//! The invariant torus as a parametrized embedding, and its check against the
//! Hamiltonian flow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::jet::{ActionJet, PointJet};
use crate::linalg;
use crate::ode::Dopri5;
use crate::scalar::Real;
use crate::symplectic::TorusMap;

use super::outer::InvariantTorus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig<T> {
    pub time: T,
    pub samples: usize,
    pub ode_tol: T,
    /// Largest `|r - R*|_inf` along a trajectory before the check is
    /// declared inconclusive.
    pub validity_radius: T,
    /// Common offset added to every sample angle.
    pub rotation: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "T")]
    pub time: f64,
    pub samples: usize,
    pub max_dev: f64,
    pub rms_dev: f64,
    /// Largest `|H(z(t)) - H(z(0))|` seen at accepted steps.
    pub energy_drift: f64,
    /// Largest `|r - R*|_inf` seen along the trajectories.
    pub max_excursion: f64,
    pub ode_steps: usize,
}

/// `count` points of the Kronecker sequence with the generalized golden
/// ratio, scaled to `[0, 2 pi)^n` and shifted by `rotation`.
pub fn sample_angles<T: Real>(n: usize, count: usize, rotation: T) -> Vec<Vec<T>> {
    // unique positive root of x^(n+1) = x + 1
    let mut g = 1.5f64;
    for _ in 0..200 {
        g = (1.0 + g).powf(1.0 / (n as f64 + 1.0));
    }
    let steps: Vec<f64> = (1..=n).map(|j| g.powi(-(j as i32))).collect();
    (0..count)
        .map(|i| {
            steps
                .iter()
                .map(|a| T::lit(std::f64::consts::TAU * (0.5 + a * i as f64).fract()) + rotation)
                .collect()
        })
        .collect()
}

/// Solves `phi(theta) = target` by Newton's method from `theta = target`.
pub fn invert_point<T: Real>(phi: &TorusMap<T>, target: &[T], tol: T) -> Result<Vec<T>> {
    let n = phi.dim();
    let mut theta = target.to_vec();
    for _ in 0..50 {
        let res: Vec<T> = phi.apply(&theta).iter().zip(target).map(|(a, b)| *a - *b).collect();
        let step = linalg::solve(&phi.jacobian(&theta), n, &res)?;
        for j in 0..n {
            theta[j] = theta[j] - step[j];
        }
        if linalg::vec_norm_inf(&step) <= tol {
            return Ok(theta);
        }
    }
    Err(KamError::NonConvergence { what: "pointwise torus-map inversion".into(), iterations: 50, last: f64::NAN })
}

/// Pointwise evaluation of `Gamma(theta) = (phi^{-1}(theta), R* - rho(phi^{-1}(theta)))`
/// carried back through the flattening change of variables.
pub struct Embedding<T: Real> {
    phi: TorusMap<T>,
    rho: Vec<crate::fourier::FourierSeries<T>>,
    r_star: Vec<T>,
    generator: Option<PointJet<T>>,
    flow_tol: T,
}

impl<T: Real> Embedding<T> {
    pub fn new(torus: &InvariantTorus<T>, flow_tol: T) -> Result<Self> {
        let generator = match torus.generator.min_degree() {
            Some(_) => Some(PointJet::new(&torus.generator)?),
            None => None,
        };
        Ok(Self {
            phi: torus.conjugacy.g.phi().clone(),
            rho: torus.conjugacy.g.form().rho(),
            r_star: torus.r_star.clone(),
            generator,
            flow_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.r_star.len()
    }

    /// `(Theta, r)` on the torus above the rotation angle `theta`.
    pub fn point(&self, theta: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.dim();
        let base = invert_point(&self.phi, theta, T::epsilon() * T::lit(16.0))?;
        let r: Vec<T> = (0..n).map(|j| self.r_star[j] - self.rho[j].eval_re(&base)).collect();
        match &self.generator {
            None => Ok((base, r)),
            Some(w) => {
                let mut y = base;
                y.extend_from_slice(&r);
                let out = Dopri5::new(self.flow_tol).integrate(|_, y, dy| w.hamiltonian_field(y, dy), T::zero(), T::one(), &y)?;
                let (a, b) = out.y.split_at(n);
                Ok((a.to_vec(), b.to_vec()))
            }
        }
    }
}

fn wrap<T: Real>(x: T) -> T {
    let tau = T::lit(std::f64::consts::TAU);
    x - (x / tau).round() * tau
}

/// Integrates `theta' = d_r H`, `r' = -d_theta H` from `Gamma(theta_i)` for
/// time `T` and compares with `Gamma(theta_i + T alpha)`.
pub fn verify_invariance<T: Real>(
    torus: &InvariantTorus<T>,
    h: &ActionJet<T>,
    alpha: &[T],
    config: &VerifyConfig<T>,
) -> Result<VerificationReport> {
    let n = h.dim();
    let field = PointJet::new(h)?;
    let emb = Embedding::new(torus, config.ode_tol)?;
    let ode = Dopri5::new(config.ode_tol);
    let angles = sample_angles(n, config.samples, config.rotation);
    let per_sample: Vec<Result<(T, T, T, usize)>> = angles
        .par_iter()
        .map(|theta| {
            let (a0, r0) = emb.point(theta)?;
            let mut y0 = a0;
            y0.extend_from_slice(&r0);
            let e0 = field.eval(&y0[..n], &y0[n..]);
            let mut drift = T::zero();
            let mut excursion = T::zero();
            let out = ode.integrate_observed(
                |_, y, dy| field.hamiltonian_field(y, dy),
                T::zero(),
                config.time,
                &y0,
                |_, y| {
                    let ex = (0..n).fold(T::zero(), |m, j| m.max((y[n + j] - torus.r_star[j]).abs()));
                    excursion = excursion.max(ex);
                    if ex > config.validity_radius {
                        return Err(KamError::OutsideValidity { distance: ex.as_f64(), radius: config.validity_radius.as_f64() });
                    }
                    drift = drift.max((field.eval(&y[..n], &y[n..]) - e0).abs());
                    Ok(())
                },
            )?;
            let moved: Vec<T> = theta.iter().zip(alpha).map(|(t, a)| *t + *a * config.time).collect();
            let (a1, r1) = emb.point(&moved)?;
            let mut dev = T::zero();
            for j in 0..n {
                dev = dev.max(wrap(out.y[j] - a1[j]).abs()).max((out.y[n + j] - r1[j]).abs());
            }
            Ok((dev, drift, excursion, out.accepted + out.rejected))
        })
        .collect();
    let mut max_dev = T::zero();
    let mut sq = T::zero();
    let mut energy = T::zero();
    let mut excursion = T::zero();
    let mut steps = 0usize;
    for r in per_sample {
        let (d, e, x, s) = r?;
        max_dev = max_dev.max(d);
        sq = sq + d * d;
        energy = energy.max(e);
        excursion = excursion.max(x);
        steps += s;
    }
    let count = T::from_usize_lossy(config.samples.max(1));
    Ok(VerificationReport {
        time: config.time.as_f64(),
        samples: config.samples,
        max_dev: max_dev.as_f64(),
        rms_dev: (sq / count).sqrt().as_f64(),
        energy_drift: energy.as_f64(),
        max_excursion: excursion.as_f64(),
        ode_steps: steps,
    })
}

/// Smallest `det phi'` over the sample angles; positive means the angle
/// component of the embedding is a graph over the torus.
pub fn embedding_min_jacobian<T: Real>(torus: &InvariantTorus<T>, samples: usize) -> T {
    let phi = torus.conjugacy.g.phi();
    let n = phi.dim();
    sample_angles(n, samples, T::zero())
        .iter()
        .map(|t| linalg::Lu::new(&phi.jacobian(t), n).map(|lu| lu.determinant()).unwrap_or(T::zero()))
        .fold(T::infinity(), T::min)
}
