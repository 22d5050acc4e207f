//! Approximation functions `Delta`, their discrete Laplace transforms
//! `L(sigma) = sum_{l >= 1} Delta(l) e^{-l sigma}` and the summability
//! criterion they feed.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{KamError, Result};

const OVERFLOW_GUARD: f64 = 1e300;
const MAX_TERMS: usize = 200_000_000;

/// A nondecreasing map `N_+ -> [1, inf)`; values below 1 are raised to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproximationFunction {
    /// `Delta = c`.
    Constant { value: f64 },
    /// `Delta(l) = l^p`.
    Power { exponent: f64 },
    /// `Delta(l) = l^tau (l + n - 1)^{n-1} / gamma`, the profile of a
    /// Diophantine vector with constants `(gamma, tau)`.
    Diophantine { n: usize, tau: f64, gamma: f64 },
    /// `Delta(l) = e^{rate l}`.
    Exponential { rate: f64 },
    /// `Delta(1), Delta(2), ...`; only partial sums are available.
    Tabulated { values: Vec<f64> },
}

impl ApproximationFunction {
    /// Tabulated profile made nondecreasing and at least 1.
    pub fn tabulated(raw: &[f64]) -> Self {
        let mut run = 1f64;
        let values = raw
            .iter()
            .map(|&x| {
                run = run.max(x);
                run
            })
            .collect();
        Self::Tabulated { values }
    }

    pub fn eval(&self, l: usize) -> f64 {
        let x = l as f64;
        let raw = match self {
            Self::Constant { value } => *value,
            Self::Power { exponent } => x.powf(*exponent),
            Self::Diophantine { n, tau, gamma } => {
                x.powf(*tau) * (x + *n as f64 - 1.0).powi(*n as i32 - 1) / gamma
            }
            Self::Exponential { rate } => (rate * x).exp(),
            Self::Tabulated { values } => {
                return values.get(l.saturating_sub(1)).copied().unwrap_or(f64::NAN);
            }
        };
        raw.max(1.0)
    }

    /// `(A, b)` with `Delta(l) <= A e^{b l}` for all `l >= 1`, where `b` is
    /// chosen below `sigma` whenever possible.
    fn envelope(&self, sigma: f64) -> Option<(f64, f64)> {
        let poly = |p: f64, shift: f64, factor: f64| {
            if p <= 0.0 {
                return (factor.max(1.0), 0.0);
            }
            // x^p <= (p / (e b))^p e^{b x}
            let b = sigma / 2.0;
            let a = (p / (std::f64::consts::E * b)).powf(p) * (b * shift).exp() * factor;
            (a.max(1.0), b)
        };
        match self {
            Self::Constant { value } => Some((value.max(1.0), 0.0)),
            Self::Power { exponent } => Some(poly(*exponent, 0.0, 1.0)),
            Self::Diophantine { n, tau, gamma } => {
                // l^tau (l+n-1)^{n-1} <= (l+n-1)^{tau+n-1}
                Some(poly(tau + *n as f64 - 1.0, *n as f64 - 1.0, 1.0 / gamma))
            }
            Self::Exponential { rate } => Some((1.0, rate.max(0.0))),
            Self::Tabulated { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    /// `sum_{l <= l_max} Delta(l) e^{-l sigma}`.
    pub partial: f64,
    /// Certified bound on the remainder, absent when no envelope is known.
    pub tail_bound: Option<f64>,
    pub terms: usize,
}

impl LaplaceValue {
    pub fn certified(&self) -> bool {
        self.tail_bound.is_some()
    }

    pub fn upper(&self) -> f64 {
        self.partial + self.tail_bound.unwrap_or(f64::INFINITY)
    }
}

/// Partial sum up to `l_max` plus the geometric tail majorant of the declared
/// envelope.
pub fn laplace_transform(delta: &ApproximationFunction, sigma: f64, l_max: usize) -> Result<LaplaceValue> {
    if !(sigma > 0.0) {
        return Err(KamError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let env = delta.envelope(sigma);
    if let Some((_, b)) = env {
        if b >= sigma {
            return Err(KamError::Divergent(format!(
                "Delta grows like e^({b} l), not summable against e^(-{sigma} l)"
            )));
        }
    }
    let l_max = match delta {
        ApproximationFunction::Tabulated { values } => l_max.min(values.len()),
        _ => l_max,
    };
    let mut partial = 0f64;
    let mut comp = 0f64;
    for l in 1..=l_max {
        let term = delta.eval(l) * (-(l as f64) * sigma).exp();
        // Kahan summation keeps the long sums at full precision
        let y = term - comp;
        let t = partial + y;
        comp = (t - partial) - y;
        partial = t;
        if !(partial < OVERFLOW_GUARD) {
            return Err(KamError::Divergent(format!("partial sum exceeds {OVERFLOW_GUARD:e} at l = {l}")));
        }
    }
    let tail_bound = env.map(|(a, b)| {
        let q = (b - sigma).exp();
        a * ((b - sigma) * (l_max as f64 + 1.0)).exp() / (1.0 - q)
    });
    Ok(LaplaceValue { partial, tail_bound, terms: l_max })
}

/// Doubles `l_max` until the certified tail is below `rel_tol` of the partial
/// sum. Tabulated profiles return their full partial sum, uncertified.
pub fn laplace_transform_auto(delta: &ApproximationFunction, sigma: f64, rel_tol: f64) -> Result<LaplaceValue> {
    let mut l_max = ((8.0 / sigma).ceil() as usize).max(64);
    loop {
        let v = laplace_transform(delta, sigma, l_max)?;
        match v.tail_bound {
            None => return Ok(v),
            Some(t) if t <= rel_tol * v.partial => return Ok(v),
            _ => {}
        }
        if l_max >= MAX_TERMS {
            return Ok(v);
        }
        l_max = (l_max * 2).min(MAX_TERMS);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub j: usize,
    pub sigma: f64,
    /// `log L(1/j^2)`; absent when the transform diverges.
    pub log_laplace: Option<f64>,
    /// `c 2^{delta j}`.
    pub log_threshold: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub c: f64,
    pub delta: f64,
    pub rows: Vec<CriterionRow>,
    /// Running sums of `2^{-j} log L(1/j^2)`, over the rows where it is finite.
    pub partial_sums: Vec<f64>,
    /// Every `j <= passes_up_to` passes.
    pub passes_up_to: usize,
    pub all_pass: bool,
    /// Nondecreasing running sums (positive increments).
    pub partial_sums_monotone: bool,
    /// Last increments shrink, consistent with a convergent series.
    pub increments_shrinking: bool,
    pub verdict: String,
}

/// Checks `L(1/j^2) <= exp(c 2^{delta j})` for `j = 1..=j_max`. This is a
/// finite check of an asymptotic condition, so the verdict reads "passes up
/// to j_max".
pub fn check_convergence_criterion(
    delta_fn: &ApproximationFunction,
    c: f64,
    delta: f64,
    j_max: usize,
) -> Result<CriterionReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(KamError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut rows = Vec::with_capacity(j_max);
    let mut partial_sums = Vec::new();
    let mut increments = Vec::new();
    let mut running = 0f64;
    for j in 1..=j_max {
        let sigma = 1.0 / (j * j) as f64;
        let log_threshold = c * 2f64.powf(delta * j as f64);
        let (log_laplace, pass, note) = match laplace_transform_auto(delta_fn, sigma, 1e-12) {
            Ok(v) => {
                let ll = v.upper().min(f64::MAX).ln();
                let note = if v.certified() { String::new() } else { "partial sum only (no tail certificate)".into() };
                (Some(ll), ll <= log_threshold, note)
            }
            Err(e) => (None, false, e.to_string()),
        };
        if let Some(ll) = log_laplace {
            let inc = ll * 0.5f64.powi(j as i32);
            running += inc;
            increments.push(inc);
            partial_sums.push(running);
        }
        rows.push(CriterionRow { j, sigma, log_laplace, log_threshold, pass, note });
    }
    let passes_up_to = rows.iter().take_while(|r| r.pass).count();
    let all_pass = passes_up_to == j_max;
    let partial_sums_monotone = increments.iter().all(|&x| x >= 0.0);
    let tail = &increments[increments.len().saturating_sub(5)..];
    let increments_shrinking = increments.len() >= 2 && tail.windows(2).all(|w| w[1] <= w[0]);
    let verdict = if all_pass {
        format!("passes up to j = {j_max}")
    } else {
        format!("fails at j = {}", passes_up_to + 1)
    };
    Ok(CriterionReport {
        c,
        delta,
        rows,
        partial_sums,
        passes_up_to,
        all_pass,
        partial_sums_monotone,
        increments_shrinking,
        verdict,
    })
}

/// `2^n e / (n - 1)!`.
pub fn generalized_constant(n: usize) -> f64 {
    2f64.powi(n as i32) * std::f64::consts::E / gamma_fn(n as f64)
}

/// `C L(sigma)` with `C = 2^n e / (n - 1)!`, using the certified upper value of
/// the transform.
pub fn generalized_cohomological_bound(delta: &ApproximationFunction, n: usize, sigma: f64) -> Result<f64> {
    let v = laplace_transform_auto(delta, sigma, 1e-13)?;
    Ok(generalized_constant(n) * v.upper())
}

/// Worst ratio `|k.alpha| Delta(|k|) / (|k| + n - 1)^{n-1}` over the half box
/// `0 < |k|_1 <= k_max`; membership in the class needs it to be at least 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub min_ratio: f64,
    pub witness_k: Vec<i64>,
    pub member: bool,
}

pub fn approximation_class_membership(
    alpha: &[f64],
    delta: &ApproximationFunction,
    k_max: usize,
) -> Result<ClassMembership> {
    let n = alpha.len();
    // |k.alpha| Delta(l) / (l+n-1)^{n-1} = |k.alpha| l^0 w(l) with w tabulated
    let weights: Vec<f64> = (0..=k_max)
        .map(|l| if l == 0 { 0.0 } else { delta.eval(l) / ((l + n - 1) as f64).powi(n as i32 - 1) })
        .collect();
    let mut best = (f64::INFINITY, vec![0i64; n]);
    let mut k = vec![0i64; n];
    visit(alpha, &weights, &mut k, 0, k_max, false, &mut best);
    Ok(ClassMembership { member: best.0 >= 1.0, min_ratio: best.0, witness_k: best.1 })
}

fn visit(alpha: &[f64], w: &[f64], k: &mut Vec<i64>, axis: usize, budget: usize, positive: bool, best: &mut (f64, Vec<i64>)) {
    let n = alpha.len();
    if axis == n {
        if !positive {
            return;
        }
        let l: usize = k.iter().map(|x| x.unsigned_abs() as usize).sum();
        let dot: f64 = k.iter().zip(alpha).map(|(a, b)| *a as f64 * b).sum();
        let v = dot.abs() * w[l];
        if v < best.0 {
            *best = (v, k.clone());
        }
        return;
    }
    let b = budget as i64;
    for kj in -b..=b {
        if !positive && kj < 0 {
            continue;
        }
        k[axis] = kj;
        visit(alpha, w, k, axis + 1, budget - kj.unsigned_abs() as usize, positive || kj > 0, best);
    }
    k[axis] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_is_geometric() {
        let d = ApproximationFunction::Constant { value: 1.0 };
        for sigma in [0.1, 0.5, 1.0] {
            let v = laplace_transform_auto(&d, sigma, 1e-14).unwrap();
            let exact = 1.0 / (sigma.exp() - 1.0);
            assert!((v.partial - exact).abs() <= 1e-10 * exact);
            assert!(v.upper() >= exact);
        }
    }

    #[test]
    fn quadratic_profile_closed_form() {
        let d = ApproximationFunction::Power { exponent: 2.0 };
        let s: f64 = 0.5;
        let e = s.exp();
        let exact = e * (e + 1.0) / (e - 1.0).powi(3);
        let v = laplace_transform_auto(&d, s, 1e-14).unwrap();
        assert!((v.partial - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn exponential_profile_diverges() {
        let d = ApproximationFunction::Exponential { rate: 2.0 };
        assert!(matches!(laplace_transform(&d, 1.0, 100), Err(KamError::Divergent(_))));
        let r = check_convergence_criterion(&ApproximationFunction::Exponential { rate: 1.0 }, 10.0, 0.5, 5).unwrap();
        assert!(!r.all_pass);
    }

    #[test]
    fn generalized_constant_values() {
        assert!((generalized_constant(1) - 2.0 * std::f64::consts::E).abs() < 1e-14);
        let d = ApproximationFunction::Constant { value: 1.0 };
        let b = generalized_cohomological_bound(&d, 2, 1.0).unwrap();
        let expect = 4.0 * std::f64::consts::E / (std::f64::consts::E - 1.0);
        assert!((b - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn tabulation_is_monotone() {
        let d = ApproximationFunction::tabulated(&[0.5, 3.0, 2.0, 4.0]);
        assert_eq!((1..=4).map(|l| d.eval(l)).collect::<Vec<_>>(), vec![1.0, 3.0, 3.0, 4.0]);
        assert!(!laplace_transform(&d, 1.0, 10).unwrap().certified());
    }
}
