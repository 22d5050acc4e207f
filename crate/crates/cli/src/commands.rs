//! One function per subcommand. Each writes its artifacts and returns the
//! failure that decides the exit code, if any.

use kam_core::herman::{conjugacy_distance, normal_form_guess, run_newton, NewtonOutcome, QuadraticFit, TwistedConjugacy};
use kam_core::jet::ActionJet;
use kam_core::kolmogorov::{sample_angles, solve_invariant_torus, verify_invariance, Embedding, OuterRecord, VerificationReport};
use kam_core::random::{seeded, symplectomorphism, TrigShape};
use kam_core::serial::{conjugacy_doc, jet_doc, one_form_doc, torus_map_doc, ConjugacyDoc, JetDoc, OneFormDoc, TorusMapDoc};
use kam_core::small_divisors::{
    check_convergence_criterion, diophantine_constant, generalized_cohomological_bound, laplace_transform_auto,
    ApproximationFunction, CriterionReport, DiophantineReport, FrequencyVector,
};
use kam_core::suite::{cohomology_suites, run_all, CohomologySetup, SuiteReport, VerifyReport};
use kam_core::symplectic::invert_torus_map_to_order;
use rand::Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, EXIT_DIVERGENCE, EXIT_PROPERTY};
use crate::output::{numbered, OutputDir};

fn certify(cfg: &ExperimentConfig) -> Result<FrequencyVector<f64>, CliError> {
    let p = &cfg.problem;
    FrequencyVector::certify(p.alpha.clone(), p.tau, p.k_max).map_err(|e| CliError::kam("diophantine", e))
}

#[derive(Debug, Serialize)]
pub struct EmbeddingDoc {
    pub phi_inv: TorusMapDoc,
    pub rho: OneFormDoc,
    /// Generator `W` of the flattening; the torus is the time-one `W`-flow
    /// image of the graph `(phi_inv, R* - rho o phi_inv)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<JetDoc>,
}

#[derive(Debug, Serialize)]
pub struct TwistDoc {
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub condition: f64,
}

#[derive(Debug, Serialize)]
pub struct InvariantTorusResult {
    #[serde(rename = "R_star")]
    pub r_star: Vec<f64>,
    pub beta: Vec<f64>,
    pub embedding: EmbeddingDoc,
    pub verification: VerificationReport,
    pub twist: TwistDoc,
    pub outer: Vec<OuterRecord>,
}

pub fn cmd_solve(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let freq = certify(cfg)?;
    let h = cfg.hamiltonian()?;
    let n = cfg.problem.n;
    let torus = solve_invariant_torus(&h, &freq, &cfg.outer_config()?).map_err(|e| CliError::kam("outer", e))?;
    let report = verify_invariance(&torus, &h, &freq.alpha, &cfg.verify_config()).map_err(|e| CliError::kam("verify", e))?;

    if cfg.output.csv() {
        for (i, trace) in torus.traces.iter().enumerate() {
            out.write_bytes(&format!("trace_R{i:02}.csv"), trace.to_csv(n).as_bytes())?;
        }
        let rows: Vec<(usize, usize, f64, f64)> = torus
            .traces
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.records.iter().map(move |r| (i, r.k, r.s_k, r.defect)))
            .collect();
        let header = ["outer", "k", "s_k", "defect"].map(String::from);
        out.write_csv("defects.csv", &header, &rows)?;

        let embedding = Embedding::new(&torus, cfg.verification.ode_tol).map_err(|e| CliError::kam("embedding", e))?;
        let mut rows = Vec::new();
        for theta in sample_angles(n, cfg.verification.samples, 0.0) {
            let (big, r) = embedding.point(&theta).map_err(|e| CliError::kam("embedding", e))?;
            rows.push([theta, big, r].concat());
        }
        let header = [numbered("theta", n), numbered("Theta", n), numbered("r", n)].concat();
        out.write_csv("embedding.csv", &header, &rows)?;
    }
    if cfg.output.json() {
        let phi = torus.conjugacy.g.phi();
        let inv = invert_torus_map_to_order(phi, phi.order(), cfg.widths.s, cfg.widths.sigma, 1e-13)
            .map_err(|e| CliError::kam("embedding", e))?;
        let doc = InvariantTorusResult {
            r_star: torus.r_star.clone(),
            beta: torus.beta.clone(),
            embedding: EmbeddingDoc {
                phi_inv: torus_map_doc(&inv.inverse),
                rho: one_form_doc(torus.conjugacy.g.form()),
                generator: torus.generator.min_degree().map(|_| jet_doc(&torus.generator)),
            },
            verification: report,
            twist: TwistDoc { q: torus.twist.q.clone(), condition: torus.twist.condition },
            outer: torus.outer.clone(),
        };
        out.write_json("torus.json", &doc)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Recovery {
    pub beta_error: f64,
    /// Largest coefficient error of `v`.
    pub phi_error: f64,
    /// Largest coefficient error of `S`.
    pub potential_error: f64,
    /// Majorant distance of `(K, G, beta)` at width 0.
    pub distance: f64,
}

#[derive(Debug, Serialize)]
pub struct HermanReport {
    pub outcome: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_defect: f64,
    pub quadratic_fit: QuadraticFit,
    pub beta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<Recovery>,
    pub conjugacy: ConjugacyDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<ConjugacyDoc>,
}

fn max_coeff_error(a: &[kam_core::Series], b: &[kam_core::Series]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.try_sub(y).map(|d| d.max_abs_coeff()).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

pub fn cmd_herman(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let freq = certify(cfg)?;
    let p = &cfg.problem;
    let (n, d, o) = (p.n, p.degree, p.order);
    let mut h = cfg.hamiltonian()?;
    let mut truth = None;
    if let Some(m) = cfg.herman.manufactured {
        let mut rng = seeded(cfg.seed);
        let shape = TrigShape::new(n, o, 0.5).active(m.harmonics);
        let g = symplectomorphism(&mut rng, shape, cfg.widths.s + cfg.widths.sigma, m.size)
            .map_err(|e| CliError::kam("manufacture", e))?;
        let beta: Vec<f64> = (0..n).map(|_| m.size * rng.gen_range(-1.0..1.0)).collect();
        let x = TwistedConjugacy::new(normal_form_guess(&h, &p.alpha), g, beta, &p.alpha)
            .map_err(|e| CliError::kam("manufacture", e))?;
        h = x.image().map_err(|e| CliError::kam("manufacture", e))?;
        truth = Some(x);
    }
    if let Some(b0) = &cfg.herman.beta0 {
        h = h.try_add(&ActionJet::linear(n, d, o, b0)).map_err(|e| CliError::kam("offset", e))?;
        if let Some(x) = truth.as_mut() {
            x.beta.iter_mut().zip(b0).for_each(|(b, e)| *b += e);
        }
    }
    let run = run_newton(&h, TwistedConjugacy::initial(&h, &p.alpha), &freq, &cfg.schedule()?);
    let recovery = truth.as_ref().map(|t| Recovery {
        beta_error: run.conjugacy.beta.iter().zip(&t.beta).fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        phi_error: max_coeff_error(run.conjugacy.g.phi().displacement(), t.g.phi().displacement()),
        potential_error: max_coeff_error(
            std::slice::from_ref(run.conjugacy.g.form().potential()),
            std::slice::from_ref(t.g.form().potential()),
        ),
        distance: conjugacy_distance(&run.conjugacy, t, 0.0).unwrap_or(f64::INFINITY),
    });
    if cfg.output.csv() {
        out.write_bytes("trace.csv", run.trace.to_csv(n).as_bytes())?;
    }
    let outcome = match &run.outcome {
        NewtonOutcome::Converged => "converged".to_string(),
        NewtonOutcome::Diverged { step } => format!("diverged at step {step}"),
        NewtonOutcome::MaxIterations => "iteration limit".to_string(),
        NewtonOutcome::Failed(e) => format!("failed: {e}"),
    };
    if cfg.output.json() {
        let doc = HermanReport {
            outcome: outcome.clone(),
            converged: run.converged(),
            iterations: run.trace.iterations(),
            final_defect: run.final_defect,
            quadratic_fit: run.trace.quadratic_fit(cfg.schedule.defect_floor),
            beta: run.conjugacy.beta.clone(),
            recovery,
            conjugacy: conjugacy_doc(&run.conjugacy),
            truth: truth.as_ref().map(conjugacy_doc),
        };
        out.write_json("herman.json", &doc)?;
    }
    match run.outcome {
        NewtonOutcome::Converged => Ok(()),
        NewtonOutcome::Failed(e) => Err(CliError::kam("newton", e)),
        _ => Err(CliError::new("divergence", "newton", format!("{outcome}; defects {:?}", run.trace.defects()), EXIT_DIVERGENCE)),
    }
}

#[derive(Debug, Serialize)]
struct SuiteRow<'a> {
    name: &'a str,
    cases: usize,
    failures: usize,
    worst: f64,
    threshold: f64,
    pass: bool,
}

fn write_suites(out: &mut OutputDir, cfg: &ExperimentConfig, stem: &str, suites: &[SuiteReport]) -> Result<(), CliError> {
    if cfg.output.csv() {
        let rows: Vec<SuiteRow> = suites
            .iter()
            .map(|s| SuiteRow { name: &s.name, cases: s.cases, failures: s.failures, worst: s.worst, threshold: s.threshold, pass: s.pass })
            .collect();
        let header = ["name", "cases", "failures", "worst", "threshold", "pass"].map(String::from);
        out.write_csv(&format!("{stem}.csv"), &header, &rows)?;
    }
    Ok(())
}

fn property_failure(stage: &str, suites: &[SuiteReport]) -> CliError {
    let names: Vec<&str> = suites.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect();
    CliError::new("property_failure", stage, format!("failing suites: {}", names.join(", ")), EXIT_PROPERTY)
}

#[derive(Debug, Serialize)]
struct CohomologyReport {
    alpha: Vec<f64>,
    setup: CohomologySetup,
    seed: u64,
    suites: Vec<SuiteReport>,
    all_pass: bool,
}

pub fn cmd_cohomology(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    certify(cfg)?;
    let p = &cfg.problem;
    let setup = CohomologySetup { order: p.order, tau: p.tau, s: cfg.widths.s, sigma: cfg.widths.sigma, decay: cfg.cohomology.decay };
    let (round, bound) =
        cohomology_suites(cfg.seed, cfg.cohomology.cases, &p.alpha, setup).map_err(|e| CliError::kam("cohomology", e))?;
    let suites = vec![round, bound];
    let all_pass = suites.iter().all(|s| s.pass);
    if cfg.output.json() {
        let doc = CohomologyReport { alpha: p.alpha.clone(), setup, seed: cfg.seed, suites: suites.clone(), all_pass };
        out.write_json("cohomology.json", &doc)?;
    }
    write_suites(out, cfg, "cohomology", &suites)?;
    if all_pass {
        Ok(())
    } else {
        Err(property_failure("cohomology", &suites))
    }
}

#[derive(Debug, Serialize)]
struct DiophantineDoc {
    alpha: Vec<f64>,
    tau: f64,
    #[serde(flatten)]
    report: DiophantineReport,
}

pub fn cmd_diophantine(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p = &cfg.problem;
    let run = |k| diophantine_constant(&p.alpha, p.tau, k).map_err(|e| CliError::kam("diophantine", e));
    let report = run(p.k_max)?;
    if cfg.output.csv() {
        let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|k| *k < p.k_max).collect();
        ks.push(p.k_max);
        let mut rows = Vec::new();
        for k in ks {
            let r = run(k)?;
            let witness = r.witness_k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            rows.push((k, r.gamma, witness, r.stability_ratio));
        }
        let header = ["k_max", "gamma", "witness_k", "stability_ratio"].map(String::from);
        out.write_csv("diophantine.csv", &header, &rows)?;
    }
    if cfg.output.json() {
        out.write_json("diophantine.json", &DiophantineDoc { alpha: p.alpha.clone(), tau: p.tau, report })?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClosedForm {
    sigma: f64,
    laplace: f64,
    exact: f64,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct BoundRow {
    sigma: f64,
    bound: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ArithmeticsDoc {
    profile: ApproximationFunction,
    criterion: CriterionReport,
    /// Present for constant profiles: `L(sigma)` against `c / (e^sigma - 1)`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    closed_form: Vec<ClosedForm>,
    /// `C L(sigma)` for the configured dimension.
    bounds: Vec<BoundRow>,
}

pub fn cmd_arithmetics(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let a = &cfg.arithmetics;
    let criterion =
        check_convergence_criterion(&a.profile, a.c, a.delta, a.j_max).map_err(|e| CliError::kam("arithmetics", e))?;
    let mut closed_form = Vec::new();
    if let ApproximationFunction::Constant { value } = a.profile {
        for &sigma in &a.closed_form_sigmas {
            let v = laplace_transform_auto(&a.profile, sigma, 1e-14).map_err(|e| CliError::kam("laplace", e))?;
            let exact = value.max(1.0) / (sigma.exp() - 1.0);
            closed_form.push(ClosedForm { sigma, laplace: v.partial, exact, relative_error: (v.partial - exact).abs() / exact });
        }
    }
    let bounds = a
        .closed_form_sigmas
        .iter()
        .map(|&sigma| BoundRow { sigma, bound: generalized_cohomological_bound(&a.profile, cfg.problem.n, sigma).ok() })
        .collect();
    if cfg.output.csv() {
        let rows: Vec<_> = criterion.rows.iter().map(|r| (r.j, r.sigma, r.log_laplace, r.log_threshold, r.pass)).collect();
        let header = ["j", "sigma", "log_laplace", "log_threshold", "pass"].map(String::from);
        out.write_csv("arithmetics.csv", &header, &rows)?;
    }
    if cfg.output.json() {
        out.write_json("arithmetics.json", &ArithmeticsDoc { profile: a.profile.clone(), criterion, closed_form, bounds })?;
    }
    Ok(())
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let report: VerifyReport = run_all(cfg.seed, cfg.verify).map_err(|e| CliError::kam("verify", e))?;
    if cfg.output.json() {
        out.write_json("verify.json", &report)?;
    }
    write_suites(out, cfg, "verify", &report.suites)?;
    if report.all_pass {
        Ok(())
    } else {
        Err(property_failure("verify", &report.suites))
    }
}
