//! Experiment drivers. Each one produces a single CSV with a `#` header.

use std::fmt::Write as _;
use std::path::PathBuf;

use sdelab::models::{ait_sahalia_wellposed, bbd_threshold, feller_ratio, heston_moment_bound, lamperti_cir};
use sdelab::{
    black_scholes_call, cir_mean, heston_call_price, mc_estimate, mc_estimate_discarded, mlmc_estimate, mlmc_plan,
    negativity_stats, pathwise_error_curve, rmsq_study, standard_mc_pairing, strong_error_curves,
    three_halves_abs_mean_fixture, ErrorReport, ErrorStudy, ModelParams, PayoffKind, Phi, StreamKey,
    GAUSSIAN_TRANSFORM,
};

use crate::config::{ConfigError, ExperimentKind};
use crate::resolve::Plan;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("oracle self-check failed: {0}")]
    Oracle(String),
    #[error("{0}")]
    Run(sdelab::Error),
    #[error("{0}")]
    Io(String),
}

impl From<sdelab::Error> for CliError {
    fn from(e: sdelab::Error) -> Self {
        match e {
            sdelab::Error::OracleCheck(m) => CliError::Oracle(m),
            e => CliError::Run(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Oracle(_) => 3,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

impl Artifact {
    /// Data rows with the `#` lines stripped.
    pub fn rows(&self) -> impl Iterator<Item = &str> {
        self.contents.lines().filter(|l| !l.starts_with('#'))
    }
}

fn model_line(p: &ModelParams<f64>) -> String {
    format!("{p:?}")
}

fn header(plan: &Plan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# sdelab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# experiment = {}", plan.kind);
    let _ = writeln!(s, "# seed = {}", plan.seed);
    let _ = writeln!(s, "# gaussian_transform = {GAUSSIAN_TRANSFORM}");
    let _ = writeln!(s, "# overflow = {}", plan.overflow.as_str());
    let _ = writeln!(s, "# model = {} horizon={}", model_line(&plan.params), plan.horizon);
    s.push_str("# config:\n");
    for line in plan.echo.lines().filter(|l| !l.trim().is_empty()) {
        let _ = writeln!(s, "#   {line}");
    }
    s
}

fn base_key(plan: &Plan) -> StreamKey {
    StreamKey::new(plan.seed)
}

fn study(plan: &Plan) -> ErrorStudy<f64> {
    let mut st = ErrorStudy::new(
        plan.horizon,
        plan.grid.steps.clone(),
        plan.grid.reference_steps.expect("checked"),
        plan.reference.clone().expect("checked"),
    );
    st.p = plan.grid.p;
    st.overflow = plan.overflow;
    st
}

fn regression_line(s: &mut String, r: &ErrorReport) {
    match r.regression {
        Some(g) => {
            let _ = writeln!(
                s,
                "# regression scheme={} slope={:.6} intercept={:.6} stderr={:.6}",
                r.scheme, g.slope, g.intercept, g.stderr
            );
        }
        None => {
            let _ = writeln!(s, "# regression scheme={} unavailable", r.scheme);
        }
    }
}

fn negstats(plan: &Plan) -> Result<String, CliError> {
    let mut s = String::from("scheme,model,n,N,avg_negative_steps,negative_path_frequency\n");
    let (n, samples) = (plan.grid.n.expect("checked"), plan.grid.samples.expect("checked"));
    for c in &plan.schemes {
        let st = negativity_stats(&plan.model, c, plan.horizon, n, samples, base_key(plan))?;
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6}",
            st.scheme, st.model, st.steps, st.samples, st.avg_negative_steps, st.negative_path_frequency
        );
    }
    Ok(s)
}

fn pathwise(plan: &Plan) -> Result<String, CliError> {
    let st = study(plan);
    let mut s = String::from("scheme,delta,error\n");
    let mut tail = String::new();
    for c in &plan.schemes {
        let r = pathwise_error_curve(&plan.model, c, &st, base_key(plan))?;
        for (d, e) in r.stepsizes.iter().zip(&r.errors) {
            let _ = writeln!(s, "{},{d:.10e},{e:.10e}", r.scheme);
        }
        if !r.valid {
            let _ = writeln!(tail, "# reference overflowed for scheme={}", r.scheme);
        }
        regression_line(&mut tail, &r);
    }
    let _ = writeln!(tail, "# reference = {} at {} steps", reference_label(plan), st.reference_steps);
    Ok(s + &tail)
}

fn reference_label(plan: &Plan) -> String {
    match plan.reference.as_ref().expect("checked") {
        sdelab::Reference::Scheme(c) => c.label(),
        sdelab::Reference::GbmExact(_) => "gbm-exact".into(),
    }
}

fn converge(plan: &Plan) -> Result<String, CliError> {
    let st = study(plan);
    let samples = plan.grid.samples.expect("checked");
    let reports = strong_error_curves(&plan.model, &plan.schemes, &st, samples, base_key(plan))?;
    let mut s = String::from("scheme,delta,error,stderr,n_overflow\n");
    let mut tail = String::new();
    for r in &reports {
        for i in 0..r.stepsizes.len() {
            let _ = writeln!(
                s,
                "{},{:.10e},{:.10e},{:.10e},{}",
                r.scheme, r.stepsizes[i], r.errors[i], r.stderrs[i], r.n_overflow[i]
            );
        }
        regression_line(&mut tail, r);
    }
    let _ = writeln!(
        tail,
        "# reference = {} at {} steps, N = {samples}, p = {}",
        reference_label(plan),
        st.reference_steps,
        st.p
    );
    Ok(s + &tail)
}

fn explode(plan: &Plan) -> Result<String, CliError> {
    let payoff = plan.payoff.expect("checked");
    let sizes = if plan.grid.sample_sizes.is_empty() {
        vec![plan.grid.samples.expect("checked")]
    } else {
        plan.grid.sample_sizes.clone()
    };
    let mut s = String::from("scheme,N,delta,estimate,stderr,overflow_count,discarded\n");
    for c in &plan.schemes {
        for &nn in &sizes {
            for &n in &plan.grid.steps {
                let e = match plan.grid.radius {
                    Some(r) => mc_estimate_discarded(&plan.model, c, &payoff, n, nn, r, base_key(plan), plan.overflow)?,
                    None => mc_estimate(&plan.model, c, &payoff, n, nn, base_key(plan), plan.overflow)?,
                };
                let _ = writeln!(
                    s,
                    "{},{nn},{:.10e},{:.8},{:.8},{},{}",
                    c.label(),
                    plan.horizon / n as f64,
                    e.value,
                    e.std_error(),
                    e.overflow_count,
                    e.discarded
                );
            }
        }
    }
    Ok(s)
}

/// Reference price for the rmsq column.
fn mlmc_truth(plan: &Plan) -> Result<Option<f64>, CliError> {
    if let Some(t) = plan.truth {
        return Ok(Some(t));
    }
    let payoff = plan.payoff.expect("checked");
    match (&plan.params, payoff.kind) {
        (ModelParams::Heston(h) | ModelParams::LogHeston(h), PayoffKind::Terminal(Phi::Call(k))) => {
            let discounted = heston_call_price(h, k, plan.horizon, &plan.fourier)?;
            Ok(Some(discounted * ((h.r - payoff.rate) * plan.horizon).exp()))
        }
        _ => Ok(None),
    }
}

fn mlmc(plan: &Plan) -> Result<String, CliError> {
    let payoff = plan.payoff.expect("checked");
    let m = plan.grid.replications;
    let truth = if plan.grid.plan_only || m < 2 { None } else { mlmc_truth(plan)? };
    let mut s = String::from(
        "scheme,epsilon,levels,total_steps,standard_steps,standard_samples,standard_cost,estimate,rmsq,overflow_count\n",
    );
    for c in &plan.schemes {
        for &eps in &plan.grid.epsilons {
            let lp = mlmc_plan(eps, plan.horizon)?;
            let sp = standard_mc_pairing(eps, plan.horizon)?;
            let (estimate, rmsq, overflow) = if plan.grid.plan_only {
                (String::new(), String::new(), String::new())
            } else if let Some(truth) = truth {
                let est = |key| mlmc_estimate(&plan.model, c, &payoff, eps, key, plan.overflow).map(|e| e.value);
                let r = rmsq_study(est, truth, m, base_key(plan))?;
                (format!("{:.8}", r.mean), format!("{:.8}", r.rmsq), r.overflowed.to_string())
            } else {
                let e = mlmc_estimate(&plan.model, c, &payoff, eps, base_key(plan), plan.overflow)?;
                (format!("{:.8}", e.value), String::new(), e.overflow_count.to_string())
            };
            let _ = writeln!(
                s,
                "{},{eps},{},{},{},{},{},{estimate},{rmsq},{overflow}",
                c.label(),
                lp.levels,
                lp.total_steps,
                sp.steps,
                sp.samples,
                sp.cost
            );
        }
    }
    if let Some(t) = truth {
        let _ = writeln!(s, "# truth = {t:.8}, M = {m}");
    }
    Ok(s)
}

fn price(plan: &Plan) -> Result<String, CliError> {
    let mut s = String::from("strike,price,method\n");
    match &plan.params {
        ModelParams::Heston(h) | ModelParams::LogHeston(h) => {
            for &k in &plan.grid.strikes {
                let p = heston_call_price(h, k, plan.horizon, &plan.fourier)?;
                let _ = writeln!(s, "{k},{p:.8},fourier");
            }
        }
        ModelParams::Gbm(g) => {
            for &k in &plan.grid.strikes {
                let p = black_scholes_call(g.x0, k, g.mu, g.sigma, plan.horizon)?;
                let _ = writeln!(s, "{k},{p:.8},black-scholes");
            }
        }
        ModelParams::ThreeHalves(t) => {
            let f = three_halves_abs_mean_fixture(t, plan.horizon)?;
            let _ = writeln!(s, ",{:.6},fixture", f.value);
            let _ = writeln!(s, "# fixture: {}", f.provenance);
        }
        _ => unreachable!("rejected during resolution"),
    }
    Ok(s)
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn validate(plan: &Plan) -> Result<String, CliError> {
    let mut s = String::from("quantity,value\n");
    let _ = writeln!(s, "model,{}", plan.model.id().as_str());
    let _ = writeln!(s, "dim,{}", plan.model.dim());
    let _ = writeln!(s, "noise_dim,{}", plan.model.noise_dim());
    let cir_rows = |s: &mut String, p: &sdelab::CirParams<f64>| {
        let f = feller_ratio(p);
        let _ = writeln!(s, "feller_ratio,{f:.6}");
        let _ = writeln!(s, "feller_condition,{}", flag(f >= 1.0));
        for &m in &plan.grid.moments {
            let b = bbd_threshold(p, m);
            let _ = writeln!(s, "bbd_threshold_p{m},{:.6}", b.threshold);
            let _ = writeln!(s, "bbd_satisfied_p{m},{}", flag(b.satisfied));
        }
    };
    match &plan.params {
        ModelParams::Cir(p) | ModelParams::CirLamperti(p) => {
            cir_rows(&mut s, p);
            let l = lamperti_cir(p);
            let _ = writeln!(s, "lamperti_alpha,{:.6}", l.alpha);
            let _ = writeln!(s, "lamperti_beta,{:.6}", l.beta);
            let _ = writeln!(s, "lamperti_gamma,{:.6}", l.gamma);
            let _ = writeln!(s, "mean_at_horizon,{:.6}", cir_mean(p, plan.horizon)?);
        }
        ModelParams::Heston(h) | ModelParams::LogHeston(h) => {
            cir_rows(&mut s, &h.variance());
            for &m in plan.grid.moments.iter().filter(|m| **m > 1.0) {
                let _ = writeln!(s, "price_moment_finite_p{m},{}", flag(heston_moment_bound(h, m)));
            }
        }
        ModelParams::AitSahalia(a) => {
            let w = ait_sahalia_wellposed(a);
            let _ = writeln!(s, "strong_solution_ok,{}", flag(w.strong_solution_ok));
            let _ = writeln!(s, "backward_euler_ok,{}", flag(w.backward_euler_ok));
        }
        _ => {}
    }
    let _ = writeln!(s, "defined_off_domain,{}", flag(plan.model.defined_off_domain()));
    Ok(s)
}

/// Runs `plan` and returns its CSV. Identical plans give identical bytes,
/// whatever the size of the worker pool.
pub fn run_experiment(plan: &Plan) -> Result<Artifact, CliError> {
    let body = match plan.kind {
        ExperimentKind::Negstats => negstats(plan)?,
        ExperimentKind::Pathwise => pathwise(plan)?,
        ExperimentKind::Converge => converge(plan)?,
        ExperimentKind::Explode => explode(plan)?,
        ExperimentKind::Mlmc => mlmc(plan)?,
        ExperimentKind::Price => price(plan)?,
        ExperimentKind::Validate => validate(plan)?,
    };
    Ok(Artifact {
        file_name: format!("{}.csv", plan.kind),
        contents: header(plan) + &body,
    })
}

/// Writes `artifact` into the plan's output directory.
pub fn write_artifact(plan: &Plan, artifact: &Artifact) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&plan.out).map_err(|e| CliError::Io(format!("{}: {e}", plan.out.display())))?;
    let path = plan.out.join(&artifact.file_name);
    std::fs::write(&path, &artifact.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
