//! Hadamard interpolation between strip widths, checked with grid sup
//! estimates.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::fourier::FourierSeries;
use crate::jet::ActionJet;
use crate::scalar::Real;

/// Relative slack accepted as round-off in the grid estimates.
pub const SLACK_TOL: f64 = 1e-12;

/// Functions with a sup norm on `T_s^n x D_s^n` (angle-only functions ignore
/// the polydisc).
pub trait StripNorm<T: Real> {
    fn strip_norm(&self, s: T, t: T, oversample: usize) -> Result<T>;
}

impl<T: Real> StripNorm<T> for FourierSeries<T> {
    fn strip_norm(&self, s: T, _t: T, oversample: usize) -> Result<T> {
        self.sup_norm_estimate(s, oversample)
    }
}

impl<T: Real> StripNorm<T> for ActionJet<T> {
    fn strip_norm(&self, s: T, t: T, oversample: usize) -> Result<T> {
        self.sup_norm_estimate(s, t, oversample)
    }
}

/// Upper width increment `sigma~` in `|f|_{s+sigma}^2 <= |f|_s |f|_{s+sigma~}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HadamardForm {
    /// `sigma~ = sigma (1 + 1/s)`.
    Linear,
    /// `sigma~ = sigma + log(1 + sigma/s)`, the smallest admissible increment.
    Sharp,
}

impl HadamardForm {
    pub fn upper_increment(self, s: f64, sigma: f64) -> f64 {
        match self {
            HadamardForm::Linear => sigma * (1.0 + 1.0 / s),
            HadamardForm::Sharp => sigma + (sigma / s).ln_1p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardReport {
    pub s: f64,
    pub sigma: f64,
    pub sigma_tilde: f64,
    /// `|f|_s`, `|f|_{s+sigma}`, `|f|_{s+sigma~}`.
    pub norms: [f64; 3],
    /// `(rhs - lhs) / rhs`, nonnegative when the inequality holds.
    pub slack: f64,
    pub holds: bool,
}

/// Checks `|f|_{s+sigma}^2 <= |f|_s |f|_{s+sigma~}`; the jet norm uses the
/// polydisc of the same radius as the strip.
pub fn verify_hadamard<T: Real, F: StripNorm<T>>(
    f: &F,
    s: f64,
    sigma: f64,
    form: HadamardForm,
    oversample: usize,
) -> Result<HadamardReport> {
    if !(s > 0.0 && sigma > 0.0) {
        return Err(KamError::InvalidParameter(format!("need s > 0 and sigma > 0 (s = {s}, sigma = {sigma})")));
    }
    let sigma_tilde = form.upper_increment(s, sigma);
    if s + sigma_tilde > 1.0 {
        return Err(KamError::InvalidWidth(s + sigma_tilde));
    }
    let norm = |w: f64| f.strip_norm(T::lit(w), T::lit(w), oversample).map(|x| x.as_f64());
    let norms = [norm(s)?, norm(s + sigma)?, norm(s + sigma_tilde)?];
    let lhs = norms[1] * norms[1];
    let rhs = norms[0] * norms[2];
    let slack = relative_slack(lhs, rhs);
    Ok(HadamardReport { s, sigma, sigma_tilde, norms, slack, holds: slack >= -SLACK_TOL })
}

fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 { 0.0 } else { -1.0 }
    } else {
        (rhs - lhs) / rhs
    }
}

/// Widths `(s0, t0)`, `(s1, t1)` with `log(t1/t0) = s1 - s0` and the weight
/// `rho`; the middle domain is `s = (1-rho)s0 + rho s1`, `t = t0^(1-rho) t1^rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedDomain {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub rho: f64,
}

impl MixedDomain {
    pub fn new(s0: f64, s1: f64, t0: f64, rho: f64) -> Result<Self> {
        if !(0.0 < s0 && s0 <= s1 && t0 > 0.0 && (0.0..=1.0).contains(&rho)) {
            return Err(KamError::InvalidParameter("need 0 < s0 <= s1, t0 > 0 and 0 <= rho <= 1".into()));
        }
        Ok(Self { s0, s1, t0, rho })
    }

    pub fn t1(&self) -> f64 {
        self.t0 * (self.s1 - self.s0).exp()
    }

    pub fn middle(&self) -> (f64, f64) {
        let s = (1.0 - self.rho) * self.s0 + self.rho * self.s1;
        let t = self.t0.powf(1.0 - self.rho) * self.t1().powf(self.rho);
        (s, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedReport {
    pub domain: MixedDomain,
    /// `|f|_{s0,t0}`, `|f|_{s,t}`, `|f|_{s1,t1}`.
    pub norms: [f64; 3],
    pub slack: f64,
    pub holds: bool,
}

/// Checks `|f|_{s,t} <= |f|_{s0,t0}^(1-rho) |f|_{s1,t1}^rho`.
pub fn verify_mixed_domain<T: Real, F: StripNorm<T>>(f: &F, domain: MixedDomain, oversample: usize) -> Result<MixedReport> {
    let (s, t) = domain.middle();
    let norm = |a: f64, b: f64| f.strip_norm(T::lit(a), T::lit(b), oversample).map(|x| x.as_f64());
    let norms = [norm(domain.s0, domain.t0)?, norm(s, t)?, norm(domain.s1, domain.t1())?];
    let rhs = norms[0].powf(1.0 - domain.rho) * norms[2].powf(domain.rho);
    let slack = relative_slack(norms[1], rhs);
    Ok(MixedReport { domain, norms, slack, holds: slack >= -SLACK_TOL })
}
