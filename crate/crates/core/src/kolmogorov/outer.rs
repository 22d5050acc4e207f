//! Driving the frequency offset to zero by translating the actions.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::herman::{normal_form_guess, run_newton, NewtonSchedule, NewtonTrace, TwistedConjugacy};
use crate::jet::ActionJet;
use crate::linalg;
use crate::scalar::Real;
use crate::small_divisors::FrequencyVector;
use crate::symplectic::lie_transform;

use super::twist::{quadratic_generator, TwistData};

#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig<T> {
    pub schedule: NewtonSchedule<T>,
    /// Target `|beta|_inf`.
    pub tol_outer: T,
    /// Largest accepted `|dR|_inf` per outer step.
    pub r_max: T,
    /// Largest `|R|_inf` accepted by the action translation.
    pub translation_bound: T,
    pub condition_threshold: T,
    pub max_outer: usize,
    /// Step of the finite-difference Jacobian refresh.
    pub fd_step: T,
}

impl<T: Real> OuterConfig<T> {
    pub fn new(schedule: NewtonSchedule<T>) -> Self {
        Self {
            schedule,
            tol_outer: T::lit(1e-10),
            r_max: T::lit(1e-2),
            translation_bound: T::lit(0.1),
            condition_threshold: T::lit(1e8),
            max_outer: 30,
            fd_step: T::lit(1e-6),
        }
    }
}

/// `H(theta, R + r)`, refused beyond `bound` in the sup norm.
pub fn translate_actions<T: Real>(h: &ActionJet<T>, r: &[T], bound: T) -> Result<ActionJet<T>> {
    let norm = linalg::vec_norm_inf(r);
    if !(norm <= bound) {
        return Err(KamError::TranslationTooLarge { norm: norm.as_f64(), bound: bound.as_f64() });
    }
    h.translated(r)
}

#[derive(Debug, Clone)]
pub struct OffsetEvaluation<T: Real> {
    pub r: Vec<T>,
    pub beta: Vec<T>,
    pub conjugacy: TwistedConjugacy<T>,
    pub trace: NewtonTrace,
}

/// `R -> beta(R)`: the Herman offset of the translated Hamiltonian. `warm`
/// replaces the trivial initial guess when given.
pub fn offset_map<T: Real>(
    h: &ActionJet<T>,
    freq: &FrequencyVector<T>,
    warm: Option<&TwistedConjugacy<T>>,
    r: &[T],
    config: &OuterConfig<T>,
) -> Result<OffsetEvaluation<T>> {
    let hr = translate_actions(h, r, config.translation_bound)?;
    let x0 = match warm {
        Some(x) => x.clone(),
        None => TwistedConjugacy::initial(&hr, &freq.alpha),
    };
    let (conjugacy, trace) = run_newton(&hr, x0, freq, &config.schedule).into_result()?;
    Ok(OffsetEvaluation { r: r.to_vec(), beta: conjugacy.beta.clone(), conjugacy, trace })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub iteration: usize,
    pub r: Vec<f64>,
    pub beta_norm: f64,
    pub newton_iterations: usize,
    pub jacobian_refreshed: bool,
}

/// Outcome of the outer loop, before any flow verification.
#[derive(Debug, Clone)]
pub struct InvariantTorus<T: Real> {
    pub r_star: Vec<T>,
    pub beta: Vec<T>,
    pub conjugacy: TwistedConjugacy<T>,
    pub twist: TwistData<T>,
    /// `W = F . r^2` used to flatten the quadratic part (zero when already flat).
    pub generator: ActionJet<T>,
    pub h_flat: ActionJet<T>,
    pub outer: Vec<OuterRecord>,
    pub traces: Vec<NewtonTrace>,
}

/// Newton on `R` for `beta(R) = 0`, starting from `J = 2Q` with a
/// finite-difference refresh when a step fails to reduce `|beta|`.
pub fn solve_invariant_torus<T: Real>(
    h: &ActionJet<T>,
    freq: &FrequencyVector<T>,
    config: &OuterConfig<T>,
) -> Result<InvariantTorus<T>> {
    let n = h.dim();
    let k0 = normal_form_guess(h, &freq.alpha);
    let twist = TwistData::from_jet(&k0)?;
    twist.check(config.condition_threshold)?;
    let generator = quadratic_generator(&k0, freq)?;
    let h_flat = if generator.min_degree().is_none() { h.clone() } else { lie_transform(h, &generator)? };

    let mut outer = Vec::new();
    let mut traces = Vec::new();
    let mut cur = offset_map(&h_flat, freq, None, &vec![T::zero(); n], config)?;
    let mut jac = twist.jacobian();
    let mut refreshed = false;
    for iteration in 0..=config.max_outer {
        let beta_norm = linalg::vec_norm_inf(&cur.beta);
        outer.push(OuterRecord {
            iteration,
            r: cur.r.iter().map(|x| x.as_f64()).collect(),
            beta_norm: beta_norm.as_f64(),
            newton_iterations: cur.trace.iterations(),
            jacobian_refreshed: refreshed,
        });
        traces.push(cur.trace.clone());
        if beta_norm <= config.tol_outer {
            return Ok(InvariantTorus {
                r_star: cur.r.clone(),
                beta: cur.beta.clone(),
                conjugacy: cur.conjugacy,
                twist,
                generator,
                h_flat,
                outer,
                traces,
            });
        }
        if iteration == config.max_outer {
            break;
        }
        refreshed = false;
        let mut accepted = None;
        let mut dr = newton_increment(&jac, &cur.beta, config.r_max)?;
        for _ in 0..12 {
            let trial: Vec<T> = cur.r.iter().zip(&dr).map(|(a, b)| *a + *b).collect();
            match offset_map(&h_flat, freq, Some(&cur.conjugacy), &trial, config) {
                Ok(ev) if linalg::vec_norm_inf(&ev.beta) < beta_norm => {
                    accepted = Some(ev);
                    break;
                }
                _ if !refreshed => {
                    jac = fd_jacobian(&h_flat, freq, &cur, config)?;
                    refreshed = true;
                    dr = newton_increment(&jac, &cur.beta, config.r_max)?;
                }
                _ => dr.iter_mut().for_each(|x| *x = *x * T::lit(0.5)),
            }
        }
        let next = accepted.ok_or_else(|| KamError::NonConvergence {
            what: "outer translation loop (step shrinking exhausted)".into(),
            iterations: iteration + 1,
            last: beta_norm.as_f64(),
        })?;
        // slow contraction means the Jacobian is stale
        if linalg::vec_norm_inf(&next.beta) > T::lit(0.25) * beta_norm && !refreshed {
            jac = fd_jacobian(&h_flat, freq, &next, config)?;
            refreshed = true;
        }
        cur = next;
    }
    Err(KamError::NonConvergence {
        what: "outer translation loop".into(),
        iterations: config.max_outer,
        last: linalg::vec_norm_inf(&cur.beta).as_f64(),
    })
}

fn newton_increment<T: Real>(jac: &[T], beta: &[T], r_max: T) -> Result<Vec<T>> {
    let n = beta.len();
    let mut dr = linalg::solve(jac, n, beta).map_err(|_| KamError::Singular("offset Jacobian".into()))?;
    dr.iter_mut().for_each(|x| *x = -*x);
    let norm = linalg::vec_norm_inf(&dr);
    if norm > r_max {
        let f = r_max / norm;
        dr.iter_mut().for_each(|x| *x = *x * f);
    }
    Ok(dr)
}

/// Forward differences `d beta / d R_j`, warm-started from `at`.
pub fn fd_jacobian<T: Real>(
    h: &ActionJet<T>,
    freq: &FrequencyVector<T>,
    at: &OffsetEvaluation<T>,
    config: &OuterConfig<T>,
) -> Result<Vec<T>> {
    let n = at.r.len();
    let mut jac = vec![T::zero(); n * n];
    for j in 0..n {
        let mut r = at.r.clone();
        r[j] = r[j] + config.fd_step;
        let ev = offset_map(h, freq, Some(&at.conjugacy), &r, config)?;
        for i in 0..n {
            jac[i * n + j] = (ev.beta[i] - at.beta[i]) / config.fd_step;
        }
    }
    Ok(jac)
}
