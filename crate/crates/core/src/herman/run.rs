//! The Newton iteration with its width schedule, and the quantitative
//! diagnostics around it.

use crate::error::{KamError, Result};
use crate::fourier::FourierSeries;
use crate::jet::ActionJet;
use crate::scalar::Real;
use crate::small_divisors::FrequencyVector;

use super::conjugacy::{defect, TwistedConjugacy};
use super::schedule::{NewtonSchedule, NewtonTrace, TraceRecord};
use super::step::{default_inversion_tol, directional_derivative, newton_step, tangent_field, StepReport, StepWidths, TangentStep};

#[derive(Debug, Clone, PartialEq)]
pub enum NewtonOutcome {
    Converged,
    /// The defect increased on two consecutive steps.
    Diverged { step: usize },
    MaxIterations,
    /// A step could not be computed.
    Failed(KamError),
}

#[derive(Debug, Clone)]
pub struct NewtonRun<T: Real> {
    pub conjugacy: TwistedConjugacy<T>,
    pub trace: NewtonTrace,
    pub reports: Vec<StepReport<T>>,
    pub outcome: NewtonOutcome,
    /// Defect at the target width `s` of the returned conjugacy.
    pub final_defect: T,
}

impl<T: Real> NewtonRun<T> {
    pub fn converged(&self) -> bool {
        self.outcome == NewtonOutcome::Converged
    }

    pub fn into_result(self) -> Result<(TwistedConjugacy<T>, NewtonTrace)> {
        match self.outcome {
            NewtonOutcome::Converged => Ok((self.conjugacy, self.trace)),
            NewtonOutcome::Diverged { step } => Err(KamError::Divergence { step, defect: self.final_defect.as_f64() }),
            NewtonOutcome::MaxIterations => Err(KamError::NonConvergence {
                what: "Newton iteration".into(),
                iterations: self.trace.iterations(),
                last: self.final_defect.as_f64(),
            }),
            NewtonOutcome::Failed(e) => Err(e),
        }
    }
}

/// Iterates `x_{k+1} = x_k + phi'(x_k)^{-1}(H - phi(x_k))` with widths
/// `(s_{k+1}, sigma_k)`, stopping at the defect floor, after `max_iter` steps,
/// or after two consecutive defect increases.
pub fn run_newton<T: Real>(
    h: &ActionJet<T>,
    x0: TwistedConjugacy<T>,
    freq: &FrequencyVector<T>,
    schedule: &NewtonSchedule<T>,
) -> NewtonRun<T> {
    let mut x = x0;
    let mut trace = NewtonTrace::default();
    let mut reports = Vec::new();
    let mut increases = 0usize;
    let n = h.dim();
    let outcome = loop {
        let k = trace.records.len();
        let s_k = schedule.s_k(k);
        let d = match defect(h, &x, s_k) {
            Ok(d) => d,
            Err(e) => break NewtonOutcome::Failed(e),
        };
        if let Some(prev) = trace.records.last() {
            if d.as_f64() > prev.defect {
                increases += 1;
            } else {
                increases = 0;
            }
        }
        trace.records.push(TraceRecord {
            k,
            s_k: s_k.as_f64(),
            sigma_k: schedule.sigma_k(k).as_f64(),
            defect: d.as_f64(),
            step_norm: 0.0,
            delta_beta: vec![0.0; n],
            delta_c: 0.0,
        });
        if !d.is_finite() {
            break NewtonOutcome::Diverged { step: k };
        }
        if d <= schedule.defect_floor {
            break NewtonOutcome::Converged;
        }
        if increases >= 2 {
            break NewtonOutcome::Diverged { step: k };
        }
        if k >= schedule.max_iter {
            break NewtonOutcome::MaxIterations;
        }
        let widths = StepWidths {
            s: schedule.s_k(k + 1),
            sigma: schedule.sigma_k(k),
            inversion_s: schedule.s,
            inversion_sigma: schedule.sigma,
            inversion_tol: default_inversion_tol(),
        };
        match newton_step(h, &x, freq, widths) {
            Ok((next, report)) => {
                let rec = trace.records.last_mut().expect("pushed");
                rec.step_norm = report.step_norm.as_f64();
                rec.delta_beta = report.step.delta_beta.iter().map(|b| b.as_f64()).collect();
                rec.delta_c = report.step.delta_c.as_f64();
                reports.push(report);
                x = next;
            }
            Err(e) => break NewtonOutcome::Failed(e),
        }
    };
    let final_defect = defect(h, &x, schedule.s).unwrap_or(T::infinity());
    NewtonRun { conjugacy: x, trace, reports, outcome, final_defect }
}

/// Closed-form radii of the inverse function theorem.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TheoreticalRadius {
    /// `2^{-8 tau} C^{-2} sigma^{2 tau} eta`.
    pub eps_main: f64,
    /// `2^{-12 tau} tau^{-1} C^{-2} S^{3 tau}` with `S = s + sigma`.
    pub eps_domain: f64,
    /// `eps_main` at the optimal split `s = S / (1 + 2 tau)`, `sigma = 2 tau s`, `eta = s`.
    pub eps_main_at_split: f64,
    pub tau: f64,
    pub c: f64,
}

impl TheoreticalRadius {
    pub fn domain_consistent(&self) -> bool {
        self.eps_domain <= self.eps_main_at_split
    }
}

pub fn theoretical_radius(
    c_prime: f64,
    c_second: f64,
    tau_prime: f64,
    tau_second: f64,
    s: f64,
    sigma: f64,
    eta: f64,
) -> Result<TheoreticalRadius> {
    if c_prime < 1.0 || c_second < 1.0 || tau_prime < 1.0 || tau_second < 1.0 {
        return Err(KamError::InvalidParameter("constants and exponents must be at least 1".into()));
    }
    if !(eta < s) || !(s > 0.0 && s < 1.0 && sigma > 0.0 && sigma < 1.0) {
        return Err(KamError::InvalidParameter(format!("need 0 < eta < s < 1 and 0 < sigma < 1 (s = {s}, sigma = {sigma}, eta = {eta})")));
    }
    let c = c_prime * c_second;
    let tau = tau_prime + tau_second;
    let main = |sig: f64, e: f64| 2f64.powf(-8.0 * tau) / (c * c) * sig.powf(2.0 * tau) * e;
    let big_s = s + sigma;
    let split_s = big_s / (1.0 + 2.0 * tau);
    Ok(TheoreticalRadius {
        eps_main: main(sigma, eta),
        eps_domain: 2f64.powf(-12.0 * tau) / tau / (c * c) * big_s.powf(3.0 * tau),
        eps_main_at_split: main(2.0 * tau * split_s, split_s),
        tau,
        c,
    })
}

/// Tangent vector `(dK, dG, dbeta)` with `dG` given at the identity.
pub type Tangent<T> = TangentStep<T>;

/// Measured `C''`: `sigma |phi''(x) dx (x) dxh|_{G,s} / (|dx|_{s+sigma} |dxh|_{s+sigma})`,
/// where `phi''(x) dx (x) dxh = dK' . dGh + dKh' . dG + K''(dG, dGh)` in
/// coordinates straightened by `G`.
pub fn second_derivative_bound<T: Real>(
    x: &TwistedConjugacy<T>,
    dx: &Tangent<T>,
    dxh: &Tangent<T>,
    s: T,
    sigma: T,
) -> Result<T> {
    let second = second_derivative(x, dx, dxh)?;
    let num = second.jet_norm(s) * sigma;
    let den = dx.norm(s + sigma) * dxh.norm(s + sigma);
    Ok(if num == T::zero() { T::zero() } else { num / den })
}

/// `dK' . dGh + dKh' . dG + K''(dG, dGh)`.
pub fn second_derivative<T: Real>(x: &TwistedConjugacy<T>, dx: &Tangent<T>, dxh: &Tangent<T>) -> Result<ActionJet<T>> {
    let k = &x.k;
    let (d, o) = (k.degree(), k.order());
    let (ta, ra) = tangent_field(&dx.phi_dot, &dx.rho_dot(), d, o)?;
    let (tb, rb) = tangent_field(&dxh.phi_dot, &dxh.rho_dot(), d, o)?;
    let first = directional_derivative(&dx.delta_k.with_order(o), &tb, &rb)?;
    let second = directional_derivative(&dxh.delta_k.with_order(o), &ta, &ra)?;
    // K''(a, b) = D_a(D_b K) - D_{D_a b} K, the coordinate Hessian
    let dbk = directional_derivative(k, &tb, &rb)?;
    let dadb = directional_derivative(&dbk, &ta, &ra)?;
    let mut ta_b = Vec::with_capacity(k.dim());
    let mut ra_b = Vec::with_capacity(k.dim());
    for j in 0..k.dim() {
        ta_b.push(directional_derivative(&tb[j], &ta, &ra)?);
        ra_b.push(directional_derivative(&rb[j], &ta, &ra)?);
    }
    let correction = directional_derivative(k, &ta_b, &ra_b)?;
    first.try_add(&second)?.try_add(&dadb.try_sub(&correction)?)
}

/// Random tangent direction built from angle functions of the given size.
pub fn zero_tangent<T: Real>(dim: usize, degree: usize, order: usize) -> Tangent<T> {
    TangentStep {
        delta_k: ActionJet::zeros(dim, degree, order),
        phi_dot: (0..dim).map(|_| FourierSeries::zeros(dim, order)).collect(),
        s_dot: FourierSeries::zeros(dim, order),
        delta_beta: vec![T::zero(); dim],
        delta_c: T::zero(),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LipschitzReport {
    /// `|x(Hh) - x(H)|_s`.
    pub solution_distance: f64,
    /// `|Hh - H|_{s+sigma}`.
    pub data_distance: f64,
    /// `2 C' sigma^{-tau'}`.
    pub constant: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Distance between two conjugacies: `max(|dK|_s, |dv|_s, |drho|_s, |dbeta|)`.
pub fn conjugacy_distance<T: Real>(a: &TwistedConjugacy<T>, b: &TwistedConjugacy<T>, s: T) -> Result<T> {
    let dk = a.k.try_sub(&b.k)?.jet_norm(s);
    let dv = a
        .g
        .phi()
        .displacement()
        .iter()
        .zip(b.g.phi().displacement())
        .map(|(p, q)| p.try_sub(q).map(|d| d.majorant_norm(s)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    let ds = a.g.form().potential().try_sub(b.g.form().potential())?;
    let drho = ds.gradient().iter().map(|f| f.majorant_norm(s)).fold(T::zero(), T::max);
    let db = a.beta.iter().zip(&b.beta).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()));
    Ok(dk.max(dv).max(drho).max(db))
}

/// Solves for `H` and `Hh` from the same start and checks
/// `|x(Hh) - x(H)|_s <= 2 C' sigma^{-tau'} |Hh - H|_{s+sigma}`.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_check<T: Real>(
    h: &ActionJet<T>,
    h_hat: &ActionJet<T>,
    x0: &TwistedConjugacy<T>,
    freq: &FrequencyVector<T>,
    schedule: &NewtonSchedule<T>,
    c_prime: f64,
    tau_prime: f64,
    sigma: f64,
) -> Result<LipschitzReport> {
    let (xa, _) = run_newton(h, x0.clone(), freq, schedule).into_result()?;
    let (xb, _) = run_newton(h_hat, x0.clone(), freq, schedule).into_result()?;
    let solution_distance = conjugacy_distance(&xa, &xb, schedule.s)?.as_f64();
    let data_distance = h_hat.try_sub(h)?.jet_norm(schedule.s + T::lit(sigma)).as_f64();
    let constant = 2.0 * c_prime * sigma.powf(-tau_prime);
    let ratio = if data_distance > 0.0 { solution_distance / data_distance } else { 0.0 };
    let pass = solution_distance <= constant * data_distance * (1.0 + 1e-12) + 1e-300 || solution_distance == 0.0;
    Ok(LipschitzReport { solution_distance, data_distance, constant, ratio, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{ExactOneForm, FiberedSymplectomorphism, TorusMap};

    type S = FourierSeries<f64>;
    type J = ActionJet<f64>;

    fn golden() -> Vec<f64> {
        vec![1.0, (5f64.sqrt() - 1.0) / 2.0]
    }

    fn twist(order: usize) -> J {
        let alpha = golden();
        J::constant(2, 3, order, 0.3)
            .try_add(&J::linear(2, 3, order, &alpha))
            .unwrap()
            .try_add(&J::quadratic_form(2, 3, order, &[1.0, 0.1, 0.1, 0.8]))
            .unwrap()
    }

    #[test]
    fn offset_only_step_is_a_frequency_shift() {
        let alpha = golden();
        let freq = FrequencyVector::certify(alpha.clone(), 1.5, 60).unwrap();
        let k = twist(6);
        let beta0 = [2e-3, -1e-3];
        let h = k.try_add(&J::linear(2, 3, 6, &beta0)).unwrap();
        let x = TwistedConjugacy::initial(&h, &alpha);
        let (next, rep) = newton_step(&h, &x, &freq, StepWidths::uniform(0.1, 0.1)).unwrap();
        for j in 0..2 {
            assert!((rep.step.delta_beta[j] - beta0[j]).abs() < 1e-15);
        }
        assert!(rep.step.delta_c.abs() < 1e-15);
        assert!(rep.step.s_dot.l1_norm() < 1e-15);
        assert!(rep.step.phi_dot.iter().all(|f| f.l1_norm() < 1e-15));
        assert!(rep.step.delta_k.jet_norm(0.1) < 1e-15);
        assert!(defect(&h, &next, 0.1).unwrap() < 1e-15);
    }

    #[test]
    fn cosine_perturbation_generates_sine_potential() {
        let (a, eps) = (0.7, 1e-3);
        let freq = FrequencyVector::certify(vec![a], 1.0, 10).unwrap();
        let k = J::constant(1, 2, 4, 0.2)
            .try_add(&J::linear(1, 2, 4, &[a]))
            .unwrap()
            .try_add(&J::quadratic_form(1, 2, 4, &[0.5]))
            .unwrap();
        let mut h = k.clone();
        h.set_term(&[0], S::constant(1, 4, 0.2).try_add(&S::cosine(1, 4, &[1], eps).unwrap()).unwrap()).unwrap();
        let x = TwistedConjugacy::initial(&h, &[a]);
        let (_, rep) = newton_step(&h, &x, &freq, StepWidths::uniform(0.1, 0.1)).unwrap();
        let expected = S::sine(1, 4, &[1], eps / a).unwrap();
        assert!(rep.step.s_dot.try_sub(&expected).unwrap().l1_norm() < 1e-16);
        assert!(rep.step.delta_beta[0].abs() < 1e-16);
        assert!(rep.linear_residual < 1e-16);
    }

    #[test]
    fn manufactured_conjugacy_is_recovered() {
        let order = 12;
        let alpha = golden();
        let freq = FrequencyVector::certify(alpha.clone(), 1.5, 60).unwrap();
        let k = twist(order);
        let v = vec![
            S::sine(2, order, &[1, 0], 1e-3).unwrap(),
            S::cosine(2, order, &[1, 1], 1e-3).unwrap().try_add(&S::sine(2, order, &[0, 1], 5e-4).unwrap()).unwrap(),
        ];
        let form = ExactOneForm::renormalized(S::cosine(2, order, &[1, -1], 1e-3).unwrap()).0;
        let g = FiberedSymplectomorphism::new(TorusMap::normalized(v).unwrap(), form).unwrap();
        let beta = vec![1e-3, -5e-4];
        let truth = TwistedConjugacy::new(k, g, beta.clone(), &alpha).unwrap();
        let h = truth.image().unwrap();
        let schedule = NewtonSchedule::new(0.05, 0.2, 12, 1e-12).unwrap();
        let run = run_newton(&h, TwistedConjugacy::initial(&h, &alpha), &freq, &schedule);
        assert!(run.converged(), "{:?} {:?}", run.outcome, run.trace.defects());
        assert!(run.trace.iterations() <= 6, "{:?}", run.trace.defects());
        for j in 0..2 {
            assert!((run.conjugacy.beta[j] - beta[j]).abs() < 1e-10);
        }
        let fit = run.trace.quadratic_fit(1e-12);
        assert!(fit.contracting, "{fit:?}");
        assert!(run.reports.iter().all(|r| r.bound_holds));
    }

    #[test]
    fn radius_domain_check_at_optimal_split() {
        let r = theoretical_radius(10.0, 2.0, 4.5, 1.0, 0.1, 0.2, 0.05).unwrap();
        assert!(r.eps_main > 0.0 && r.eps_domain > 0.0);
        assert!(r.domain_consistent());
        assert!(theoretical_radius(0.5, 2.0, 4.5, 1.0, 0.1, 0.2, 0.05).is_err());
    }
}
