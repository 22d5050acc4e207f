//! Randomized property suites with fixed seeds. Every case draws from its own
//! stream so results do not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fourier::FourierSeries;
use crate::interpolation::{verify_hadamard, HadamardForm};
use crate::jet::ActionJet;
use crate::random::{jet, seeded, torus_map, trig_polynomial, TrigShape};
use crate::small_divisors::{cohomological_bound, diophantine_constant, solve_cohomological};
use crate::symplectic::invert_torus_map_to_order;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Worst value of the checked quantity (its meaning depends on the suite).
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SuiteReport {
    fn new(name: &str, values: &[Option<f64>], threshold: f64, fails: impl Fn(f64) -> bool) -> Self {
        let failures = values.iter().filter(|v| v.is_none_or(&fails)).count();
        let worst = values.iter().flatten().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        Self { name: name.into(), cases: values.len(), failures, worst, threshold, pass: failures == 0, note: None }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// `PASS`/`FAIL` line with the worst value.
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} cases, {} failures, worst {:e} (threshold {:e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.threshold
        )
    }
}

fn case_rng(seed: u64, stream: u64, case: usize) -> crate::random::Rng8 {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng.set_word_pos(((case as u128) << 20) * 16);
    rng
}

pub fn golden_pair() -> Vec<f64> {
    vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]
}

/// Parameters of the cohomological suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohomologySetup {
    pub order: usize,
    pub tau: f64,
    pub s: f64,
    pub sigma: f64,
    pub decay: f64,
}

impl Default for CohomologySetup {
    fn default() -> Self {
        Self { order: 32, tau: 1.5, s: 0.3, sigma: 0.2, decay: 0.5 }
    }
}

/// Round trip `f -> L_alpha f -> solve` and the explicit bound
/// `|f|_s <= C_0 gamma^{-1} sigma^{-tau-n} |g|_{s+sigma}` on the same cases.
pub fn cohomology_suites(seed: u64, cases: usize, alpha: &[f64], setup: CohomologySetup) -> Result<(SuiteReport, SuiteReport)> {
    let n = alpha.len();
    let dioph = diophantine_constant(alpha, setup.tau, 2 * n * setup.order)?;
    let bound = cohomological_bound(n, setup.tau, dioph.gamma, setup.sigma)?;
    let rows: Vec<(Option<f64>, Option<f64>)> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = case_rng(seed, 1, c);
            let f: FourierSeries<f64> = trig_polynomial(&mut rng, TrigShape::new(n, setup.order, setup.decay).zero_mean());
            let Ok(g) = f.lie_derivative(alpha) else { return (None, None) };
            let Ok(back) = solve_cohomological(&g, alpha) else { return (None, None) };
            let fs = f.majorant_norm(setup.s);
            let err = back.try_sub(&f).map(|d| d.majorant_norm(setup.s) / fs).ok();
            let ratio = fs / (bound * g.majorant_norm(setup.s + setup.sigma));
            (err, Some(ratio))
        })
        .collect();
    let errs: Vec<Option<f64>> = rows.iter().map(|r| r.0).collect();
    let ratios: Vec<Option<f64>> = rows.iter().map(|r| r.1).collect();
    let round = SuiteReport::new("cohomology round trip", &errs, 1e-10, |e| !(e <= 1e-10));
    let bounded = SuiteReport::new("cohomological bound", &ratios, 1.0, |r| !(r <= 1.0))
        .note(format!("gamma = {:e} at tau = {}, ratio |f|_s / bound", dioph.gamma, setup.tau));
    Ok((round, bounded))
}

/// Inversion of `id + v` with `|v|_{s+2 sigma} = fraction * sigma`: grid
/// residual, `|psi - id|_s <= |v|_{s+sigma}` and
/// `|psi' - id|_s <= 2 |v|_{s+2 sigma} / sigma`.
pub fn inversion_suite(seed: u64, cases: usize, dim: usize, fraction: f64) -> SuiteReport {
    let (s, sigma, order, work) = (0.1, 0.1, 4, 32);
    let rows: Vec<Option<f64>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = case_rng(seed, 2 + dim as u64, c);
            let phi = torus_map::<f64, _>(&mut rng, TrigShape::new(dim, order, 0.3), s + 2.0 * sigma, fraction * sigma).ok()?;
            let inv = invert_torus_map_to_order(&phi, work, s, sigma, 1e-10).ok()?;
            let deriv_bound = 2.0 * phi.norm(s + 2.0 * sigma) / sigma;
            let shift_ok = inv.shift_norm <= inv.shift_bound * (1.0 + 1e-12);
            let deriv_ok = inv.derivative_norm <= deriv_bound * (1.0 + 1e-12);
            (shift_ok && deriv_ok).then_some(inv.residual)
        })
        .collect();
    SuiteReport::new(&format!("torus-map inversion (n = {dim})"), &rows, 1e-10, |r| !(r <= 1e-10))
        .note(format!("|v|_(s+2sigma) = {fraction} sigma, s = {s}, sigma = {sigma}; worst is the composition residual"))
}

/// `|f|_{s+sigma}^2 <= |f|_s |f|_{s+sigma~}` on random polynomials in one and
/// two angles over a grid of widths; `worst` is minus the smallest slack.
pub fn interpolation_suite(seed: u64, cases: usize, form: HadamardForm) -> SuiteReport {
    let widths = [(0.1, 0.05), (0.2, 0.1), (0.3, 0.1), (0.4, 0.1), (0.5, 0.05)];
    let rows: Vec<Option<f64>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = case_rng(seed, 5, c);
            let dim = 1 + c % 2;
            let order = if dim == 1 { 10 } else { 5 };
            let f: FourierSeries<f64> = trig_polynomial(&mut rng, TrigShape::new(dim, order, 0.2));
            let mut worst = f64::INFINITY;
            for &(s, sigma) in &widths {
                let rep = verify_hadamard(&f, s, sigma, form, 8).ok()?;
                worst = worst.min(rep.slack);
            }
            Some(-worst)
        })
        .collect();
    let name = match form {
        HadamardForm::Linear => "interpolation inequality (sigma~ = sigma(1 + 1/s))",
        HadamardForm::Sharp => "interpolation inequality (sigma~ = sigma + log(1 + sigma/s))",
    };
    SuiteReport::new(name, &rows, 1e-12, |v| !(v <= 1e-12)).note("worst is minus the smallest relative slack")
}

/// `{F,{G,H}} + {G,{H,F}} + {H,{F,G}} = 0` for random degree-2 jets, held in
/// jets large enough that no truncation occurs.
pub fn jacobi_suite(seed: u64, cases: usize) -> SuiteReport {
    let rows: Vec<Option<f64>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = case_rng(seed, 6, c);
            let shape = TrigShape::new(2, 2, 0.3);
            let mut draw = || jet::<f64, _>(&mut rng, shape, 2, 0.5).with_degree(4).with_order(6);
            let (f, g, h) = (draw(), draw(), draw());
            let br = |a: &ActionJet<f64>, b: &ActionJet<f64>| a.poisson_bracket(b);
            let total = br(&f, &br(&g, &h).ok()?)
                .ok()?
                .try_add(&br(&g, &br(&h, &f).ok()?).ok()?)
                .ok()?
                .try_add(&br(&h, &br(&f, &g).ok()?).ok()?)
                .ok()?;
            Some(total.jet_norm(0.0))
        })
        .collect();
    SuiteReport::new("Poisson bracket Jacobi identity", &rows, 1e-11, |v| !(v <= 1e-11))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub all_pass: bool,
}

/// Case counts of the standard suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSizes {
    pub cohomology: usize,
    pub inversion: usize,
    pub interpolation: usize,
    pub jacobi: usize,
    /// `|v|_{s+2 sigma}` as a fraction of the certificate `sigma`.
    pub inversion_fraction: f64,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self { cohomology: 100, inversion: 100, interpolation: 200, jacobi: 20, inversion_fraction: 0.8 }
    }
}

pub fn run_all(seed: u64, sizes: SuiteSizes) -> Result<VerifyReport> {
    let (round, bound) = cohomology_suites(seed, sizes.cohomology, &golden_pair(), CohomologySetup::default())?;
    let suites = vec![
        round,
        bound,
        inversion_suite(seed, sizes.inversion / 2, 1, sizes.inversion_fraction),
        inversion_suite(seed, sizes.inversion - sizes.inversion / 2, 2, sizes.inversion_fraction),
        interpolation_suite(seed, sizes.interpolation, HadamardForm::Linear),
        interpolation_suite(seed, sizes.interpolation, HadamardForm::Sharp),
        jacobi_suite(seed, sizes.jacobi),
    ];
    let all_pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport { seed, suites, all_pass })
}
