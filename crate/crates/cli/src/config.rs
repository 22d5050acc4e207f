//! Experiment configuration (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use kam_core::fourier::FourierSeries;
use kam_core::herman::NewtonSchedule;
use kam_core::jet::ActionJet;
use kam_core::kolmogorov::{OuterConfig, VerifyConfig};
use kam_core::small_divisors::ApproximationFunction;
use kam_core::suite::SuiteSizes;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    #[serde(default)]
    pub widths: Widths,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub outer: Outer,
    #[serde(default)]
    pub verification: Verification,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub herman: Herman,
    #[serde(default)]
    pub cohomology: Cohomology,
    #[serde(default)]
    pub arithmetics: Arithmetics,
    #[serde(default)]
    pub verify: SuiteSizes,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub n: usize,
    /// Fourier box `[-N, N]^n`.
    #[serde(rename = "N")]
    pub order: usize,
    /// Jet degree in the actions.
    #[serde(rename = "d")]
    pub degree: usize,
    pub alpha: Vec<f64>,
    pub tau: f64,
    pub k_max: usize,
    #[serde(default)]
    pub energy: f64,
    /// Row-major `Q` of the integrable part `r . Q r`; defaults to `I / 2`.
    #[serde(default)]
    pub twist: Option<Vec<f64>>,
    #[serde(default)]
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    #[default]
    None,
    /// `eps sum_j cos(theta_1 + ... + theta_j)`.
    Pendulum { eps: f64 },
    /// `eps sum r^m (c cos(k . theta) + s sin(k . theta))`.
    Coefficients {
        #[serde(default = "one")]
        eps: f64,
        terms: Vec<Term>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub m: Vec<usize>,
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Widths {
    pub s: f64,
    pub sigma: f64,
}

impl Default for Widths {
    fn default() -> Self {
        Self { s: 0.05, sigma: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub max_iter: usize,
    pub defect_floor: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { max_iter: 12, defect_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outer {
    pub tol_outer: f64,
    #[serde(rename = "R_max")]
    pub r_max: f64,
}

impl Default for Outer {
    fn default() -> Self {
        Self { tol_outer: 1e-10, r_max: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verification {
    #[serde(rename = "T")]
    pub time: f64,
    pub samples: usize,
    pub ode_tol: f64,
    #[serde(default = "validity")]
    pub validity_radius: f64,
}

fn validity() -> f64 {
    0.025
}

impl Default for Verification {
    fn default() -> Self {
        Self { time: 10.0, samples: 64, ode_tol: 1e-12, validity_radius: validity() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Output {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv] }
    }
}

impl Output {
    pub fn json(&self) -> bool {
        self.formats.contains(&Format::Json)
    }

    pub fn csv(&self) -> bool {
        self.formats.contains(&Format::Csv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Cap on `n (2N + 1)^n binom(n + d, d)`.
    pub max_coefficients: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_coefficients: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Herman {
    /// Replaces the Hamiltonian by `K o G* + beta* . r` with random `G*`.
    #[serde(default)]
    pub manufactured: Option<Manufactured>,
    /// Added offset `beta0 . r`.
    #[serde(default)]
    pub beta0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manufactured {
    /// `|v*|`, `|rho*|` at width `s + sigma` and the size of `beta*`.
    pub size: f64,
    /// Highest active harmonic of `G*`.
    #[serde(default = "three")]
    pub harmonics: usize,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cohomology {
    pub cases: usize,
    pub decay: f64,
}

impl Default for Cohomology {
    fn default() -> Self {
        Self { cases: 100, decay: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arithmetics {
    pub profile: ApproximationFunction,
    pub c: f64,
    pub delta: f64,
    pub j_max: usize,
    /// Widths at which a constant profile is compared with `1 / (e^sigma - 1)`.
    pub closed_form_sigmas: Vec<f64>,
}

impl Default for Arithmetics {
    fn default() -> Self {
        Self {
            profile: ApproximationFunction::Constant { value: 1.0 },
            c: 10.0,
            delta: 0.5,
            j_max: 20,
            closed_form_sigmas: vec![0.1, 0.5, 1.0, 2.0],
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc.saturating_mul(n + 1 - i) / i)
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config("validate", format!("{name} must be positive and finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config("parse", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("read", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.problem;
        if !(1..=4).contains(&p.n) {
            return Err(CliError::config("validate", format!("n must lie in 1..=4, got {}", p.n)));
        }
        if p.alpha.len() != p.n {
            return Err(CliError::config("validate", format!("alpha has {} entries, expected n = {}", p.alpha.len(), p.n)));
        }
        if p.alpha.iter().any(|a| !a.is_finite()) {
            return Err(CliError::config("validate", "alpha must be finite"));
        }
        if p.degree < 2 {
            return Err(CliError::config("validate", format!("d must be at least 2, got {}", p.degree)));
        }
        if p.order == 0 || p.k_max == 0 {
            return Err(CliError::config("validate", "N and k_max must be positive"));
        }
        if let Some(q) = &p.twist {
            if q.len() != p.n * p.n {
                return Err(CliError::config("validate", format!("twist has {} entries, expected n^2 = {}", q.len(), p.n * p.n)));
            }
        }
        match &p.perturbation {
            Perturbation::None => {}
            Perturbation::Pendulum { eps } => {
                if !eps.is_finite() {
                    return Err(CliError::config("validate", "pendulum eps must be finite"));
                }
            }
            Perturbation::Coefficients { terms, .. } => {
                for t in terms {
                    if t.m.len() != p.n || t.k.len() != p.n {
                        return Err(CliError::config("validate", format!("term {:?}/{:?} does not have n = {} entries", t.m, t.k, p.n)));
                    }
                    if t.m.iter().sum::<usize>() > p.degree || t.k.iter().any(|k| k.unsigned_abs() as usize > p.order) {
                        return Err(CliError::config("validate", format!("term r^{:?} e^(i {:?}) lies outside the jet", t.m, t.k)));
                    }
                }
            }
        }
        positive("tau", p.tau)?;
        positive("widths.s", self.widths.s)?;
        positive("widths.sigma", self.widths.sigma)?;
        if self.widths.s + self.widths.sigma >= 1.0 {
            return Err(CliError::config("validate", "widths.s + widths.sigma must stay below 1"));
        }
        positive("schedule.defect_floor", self.schedule.defect_floor)?;
        positive("outer.tol_outer", self.outer.tol_outer)?;
        positive("outer.R_max", self.outer.r_max)?;
        positive("verification.T", self.verification.time)?;
        positive("verification.ode_tol", self.verification.ode_tol)?;
        positive("verification.validity_radius", self.verification.validity_radius)?;
        if self.verification.samples == 0 {
            return Err(CliError::config("validate", "verification.samples must be positive"));
        }
        if let Some(m) = &self.herman.manufactured {
            positive("herman.manufactured.size", m.size)?;
        }
        if let Some(b) = &self.herman.beta0 {
            if b.len() != p.n {
                return Err(CliError::config("validate", format!("herman.beta0 has {} entries, expected {}", b.len(), p.n)));
            }
        }
        positive("arithmetics.c", self.arithmetics.c)?;
        positive("cohomology.decay", self.cohomology.decay)?;
        let cost = self.coefficient_count();
        if cost > self.limits.max_coefficients {
            return Err(CliError::new(
                "resource_cap",
                "validate",
                format!("n (2N+1)^n binom(n+d, d) = {cost} exceeds limits.max_coefficients = {}", self.limits.max_coefficients),
                crate::error::EXIT_CONFIG,
            ));
        }
        Ok(())
    }

    pub fn coefficient_count(&self) -> u64 {
        let p = &self.problem;
        let n = p.n as u64;
        let side = 2 * p.order as u64 + 1;
        let per_series = (0..n).fold(1u64, |a, _| a.saturating_mul(side));
        n.saturating_mul(per_series).saturating_mul(binomial(n + p.degree as u64, p.degree as u64))
    }

    pub fn schedule(&self) -> Result<NewtonSchedule<f64>, CliError> {
        NewtonSchedule::new(self.widths.s, self.widths.sigma, self.schedule.max_iter, self.schedule.defect_floor)
            .map_err(|e| CliError::kam("schedule", e))
    }

    pub fn outer_config(&self) -> Result<OuterConfig<f64>, CliError> {
        let mut c = OuterConfig::new(self.schedule()?);
        c.tol_outer = self.outer.tol_outer;
        c.r_max = self.outer.r_max;
        Ok(c)
    }

    pub fn verify_config(&self) -> VerifyConfig<f64> {
        VerifyConfig {
            time: self.verification.time,
            samples: self.verification.samples,
            ode_tol: self.verification.ode_tol,
            validity_radius: self.verification.validity_radius,
            rotation: 0.0,
        }
    }

    /// `energy + alpha . r + r . Q r`.
    pub fn integrable_part(&self) -> ActionJet<f64> {
        let p = &self.problem;
        let (n, d, o) = (p.n, p.degree, p.order);
        let q = p.twist.clone().unwrap_or_else(|| (0..n * n).map(|i| if i % (n + 1) == 0 { 0.5 } else { 0.0 }).collect());
        ActionJet::constant(n, d, o, p.energy)
            .try_add(&ActionJet::linear(n, d, o, &p.alpha))
            .and_then(|j| j.try_add(&ActionJet::quadratic_form(n, d, o, &q)))
            .expect("same shape")
    }

    pub fn perturbation(&self) -> Result<ActionJet<f64>, CliError> {
        let p = &self.problem;
        let (n, d, o) = (p.n, p.degree, p.order);
        let mut out = ActionJet::zeros(n, d, o);
        let err = |e| CliError::kam("perturbation", e);
        match &p.perturbation {
            Perturbation::None => {}
            Perturbation::Pendulum { eps } => {
                let mut f = FourierSeries::zeros(n, o);
                for j in 0..n {
                    let k: Vec<i64> = (0..n).map(|i| (i <= j) as i64).collect();
                    f = f.try_add(&FourierSeries::cosine(n, o, &k, *eps).map_err(err)?).map_err(err)?;
                }
                out.set_term(&vec![0; n], f).map_err(err)?;
            }
            Perturbation::Coefficients { eps, terms } => {
                for t in terms {
                    let c = FourierSeries::cosine(n, o, &t.k, eps * t.cos).map_err(err)?;
                    let s = FourierSeries::sine(n, o, &t.k, eps * t.sin).map_err(err)?;
                    let f = out.term(&t.m).try_add(&c).and_then(|x| x.try_add(&s)).map_err(err)?;
                    out.set_term(&t.m, f).map_err(err)?;
                }
            }
        }
        Ok(out)
    }

    pub fn hamiltonian(&self) -> Result<ActionJet<f64>, CliError> {
        self.integrable_part().try_add(&self.perturbation()?).map_err(|e| CliError::kam("hamiltonian", e))
    }
}

impl Default for ExperimentConfig {
    /// Golden-mean frequencies in two degrees of freedom with the
    /// `cos theta_1 + cos(theta_1 + theta_2)` perturbation at `eps = 1e-3`.
    fn default() -> Self {
        Self {
            problem: Problem {
                n: 2,
                order: 32,
                degree: 3,
                alpha: vec![1.0, (1.0 + 5f64.sqrt()) / 2.0],
                tau: 1.5,
                k_max: 64,
                energy: 0.0,
                twist: None,
                perturbation: Perturbation::Pendulum { eps: 1e-3 },
            },
            widths: Widths::default(),
            schedule: Schedule::default(),
            outer: Outer::default(),
            verification: Verification::default(),
            seed: default_seed(),
            output: Output::default(),
            limits: Limits::default(),
            herman: Herman::default(),
            cohomology: Cohomology::default(),
            arithmetics: Arithmetics::default(),
            verify: SuiteSizes::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.coefficient_count(), 2 * 65 * 65 * 10);
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                seen += 1;
            }
        }
        assert!(seen >= 10);
    }

    #[test]
    fn pendulum_family_builds_the_nested_cosines() {
        let mut cfg = ExperimentConfig::default();
        cfg.problem.order = 4;
        let p = cfg.perturbation().unwrap();
        let f = p.term(&[0, 0]);
        assert_eq!(f.coeff(&[1, 0]).re, 5e-4);
        assert_eq!(f.coeff(&[1, 1]).re, 5e-4);
        assert_eq!(f.coeff(&[0, 1]).re, 0.0);
    }
}
