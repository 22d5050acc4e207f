//! Width schedules and iteration traces.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::scalar::Real;

/// Widths `s_k = s + sigma 2^{-k}` shrinking to `s` with steps
/// `sigma_k = (sigma / 6) 2^{-k}`, so that `s_{k+1} = s_k - 3 sigma_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSchedule<T> {
    pub s: T,
    pub sigma: T,
    pub max_iter: usize,
    pub defect_floor: T,
}

impl<T: Real> NewtonSchedule<T> {
    pub fn new(s: T, sigma: T, max_iter: usize, defect_floor: T) -> Result<Self> {
        if !(s > T::zero() && sigma > T::zero() && s + sigma <= T::one()) {
            return Err(KamError::InvalidParameter(format!(
                "widths must satisfy 0 < s, 0 < sigma, s + sigma <= 1 (got s = {}, sigma = {})",
                s.as_f64(),
                sigma.as_f64()
            )));
        }
        if !(defect_floor > T::zero()) {
            return Err(KamError::InvalidParameter("defect floor must be positive".into()));
        }
        Ok(Self { s, sigma, max_iter, defect_floor })
    }

    pub fn sigma_k(&self, k: usize) -> T {
        self.sigma / T::lit(6.0) * T::lit(0.5).powi(k as i32)
    }

    pub fn s_k(&self, k: usize) -> T {
        self.s + self.sigma * T::lit(0.5).powi(k as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub s_k: f64,
    pub sigma_k: f64,
    /// `|H - K o G - beta . r|_{s_k}` before step `k`.
    pub defect: f64,
    /// Size of the correction computed at step `k` (0 on the final record).
    pub step_norm: f64,
    pub delta_beta: Vec<f64>,
    pub delta_c: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub records: Vec<TraceRecord>,
}

/// Fit of `d_{k+1} <= C d_k^2` over consecutive defects that both lie above a
/// floor; a step landing at or under the floor carries no quadratic information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    /// Smallest single constant valid for every pair.
    pub c_hat: f64,
    /// Least-squares exponent `p` in `log d_{k+1} = p log d_k + b`.
    pub order: Option<f64>,
    pub pairs: usize,
    /// `c_hat d_k < 1` on every pair, i.e. the quadratic law contracts.
    pub contracting: bool,
}

impl NewtonTrace {
    pub fn defects(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.defect).collect()
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn quadratic_fit(&self, floor: f64) -> QuadraticFit {
        let d = self.defects();
        let pairs: Vec<(f64, f64)> = d.windows(2).filter(|w| w[0] > floor && w[1] > floor).map(|w| (w[0], w[1])).collect();
        let c_hat = pairs.iter().map(|(a, b)| b / (a * a)).fold(0.0, f64::max);
        let contracting = pairs.iter().all(|(a, _)| c_hat * a < 1.0);
        let fit: Vec<(f64, f64)> = pairs.iter().map(|(a, b)| (a.ln(), b.ln())).collect();
        let order = (fit.len() >= 2).then(|| {
            let m = fit.len() as f64;
            let mx = fit.iter().map(|p| p.0).sum::<f64>() / m;
            let my = fit.iter().map(|p| p.1).sum::<f64>() / m;
            let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });
        QuadraticFit { c_hat, order, pairs: pairs.len(), contracting }
    }

    /// CSV with columns `k, s_k, sigma_k, defect, step_norm, delta_beta_1..n, delta_c`.
    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = String::from("k,s_k,sigma_k,defect,step_norm");
        for j in 1..=dim {
            out.push_str(&format!(",delta_beta_{j}"));
        }
        out.push_str(",delta_c\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e},{:e},{:e}", r.k, r.s_k, r.sigma_k, r.defect, r.step_norm));
            for j in 0..dim {
                out.push_str(&format!(",{:e}", r.delta_beta.get(j).copied().unwrap_or(0.0)));
            }
            out.push_str(&format!(",{:e}\n", r.delta_c));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_budget_adds_up() {
        let sch = NewtonSchedule::new(0.1f64, 0.3, 10, 1e-12).unwrap();
        let total: f64 = (0..60).map(|k| 3.0 * sch.sigma_k(k)).sum();
        assert!((total - 0.3).abs() < 1e-15);
        for k in 0..20 {
            assert!((sch.s_k(k + 1) - (sch.s_k(k) - 3.0 * sch.sigma_k(k))).abs() < 1e-15);
            assert!(sch.s_k(k + 1) < sch.s_k(k) && sch.s_k(k) <= 1.0);
        }
        assert_eq!(sch.s_k(0), 0.4);
    }

    #[test]
    fn quadratic_fit_of_doubling_digits() {
        let trace = NewtonTrace {
            records: [1e-3, 2e-6, 8e-12, 1e-15]
                .iter()
                .enumerate()
                .map(|(k, &d)| TraceRecord { k, s_k: 0.0, sigma_k: 0.0, defect: d, step_norm: 0.0, delta_beta: vec![], delta_c: 0.0 })
                .collect(),
        };
        let fit = trace.quadratic_fit(1e-12);
        assert_eq!(fit.pairs, 2);
        assert!((fit.c_hat - 2.0).abs() < 1e-9);
        assert!(fit.contracting);
        assert!((fit.order.unwrap() - 2.0).abs() < 0.1);
    }
}
