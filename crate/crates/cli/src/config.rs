//! Experiment configuration files.
//!
//! A config is a TOML document with a fixed schema. Every table rejects keys
//! it does not know, so a typo is an error instead of a silently ignored
//! setting.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Negstats,
    Pathwise,
    Converge,
    Explode,
    Mlmc,
    Price,
    Validate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Negstats,
        ExperimentKind::Pathwise,
        ExperimentKind::Converge,
        ExperimentKind::Explode,
        ExperimentKind::Mlmc,
        ExperimentKind::Price,
        ExperimentKind::Validate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Negstats => "negstats",
            ExperimentKind::Pathwise => "pathwise",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Explode => "explode",
            ExperimentKind::Mlmc => "mlmc",
            ExperimentKind::Price => "price",
            ExperimentKind::Validate => "validate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverflowSetting {
    Propagate,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionName {
    Truncated,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionName {
    Absolute,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    ClosedForm,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffName {
    Call,
    Put,
    Identity,
    Abs,
    AbsoluteTerminal,
    Barrier,
}

/// Top level of a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub overflow: Option<OverflowSetting>,
    pub model: Option<ModelSection>,
    pub scheme: Option<SchemeSection>,
    /// Further schemes run on the same Brownian paths, as `[[schemes]]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schemes: Vec<SchemeSection>,
    pub reference: Option<SchemeSection>,
    pub grid: Option<GridSection>,
    pub payoff: Option<PayoffSection>,
    pub fourier: Option<FourierSection>,
}

/// A preset, a family with explicit parameters, or a preset with some
/// parameters overridden.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub preset: Option<String>,
    pub family: Option<String>,
    pub horizon: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub x0: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub s0: Option<f64>,
    pub rho: Option<f64>,
    pub v0: Option<f64>,
    pub r: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub alpha_m1: Option<f64>,
    pub alpha_0: Option<f64>,
    pub alpha_1: Option<f64>,
    pub alpha_2: Option<f64>,
    pub price_mu: Option<f64>,
    pub price_rho: Option<f64>,
    pub price_s0: Option<f64>,
}

impl ModelSection {
    /// Numeric parameters present in the section, in declaration order.
    pub fn given(&self) -> Vec<(&'static str, f64)> {
        let all = [
            ("kappa", self.kappa),
            ("lambda", self.lambda),
            ("theta", self.theta),
            ("x0", self.x0),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("s0", self.s0),
            ("rho", self.rho),
            ("v0", self.v0),
            ("r", self.r),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("alpha_m1", self.alpha_m1),
            ("alpha_0", self.alpha_0),
            ("alpha_1", self.alpha_1),
            ("alpha_2", self.alpha_2),
            ("price_mu", self.price_mu),
            ("price_rho", self.price_rho),
            ("price_s0", self.price_s0),
        ];
        all.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    /// Scheme name, or `gbm-exact` in `[reference]`.
    pub id: Option<String>,
    pub extension: Option<ExtensionName>,
    pub projection: Option<ProjectionName>,
    pub solver: Option<SolverName>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Steps per path.
    pub n: Option<usize>,
    /// Paths per estimate.
    pub samples: Option<usize>,
    /// Several path counts, for `explode`.
    pub sample_sizes: Option<Vec<usize>>,
    /// Step counts, increasing. Mutually exclusive with `deltas`.
    pub steps: Option<Vec<usize>>,
    /// Step sizes, decreasing; each must divide the horizon.
    pub deltas: Option<Vec<f64>>,
    pub reference_steps: Option<usize>,
    /// Norm exponent of the strong error.
    pub p: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    /// Independent estimator replications for the rmsq column.
    pub replications: Option<usize>,
    /// Only report the level plan, do not simulate.
    pub plan_only: Option<bool>,
    /// Discard paths leaving this ball.
    pub radius: Option<f64>,
    pub strikes: Option<Vec<f64>>,
    /// Moment orders for the diagnostics of `validate`.
    pub moments: Option<Vec<f64>>,
}

impl GridSection {
    /// Fields of `over` replace those of `self`.
    fn merged(self, over: GridSection) -> GridSection {
        let user_grid = over.steps.is_some() || over.deltas.is_some();
        GridSection {
            n: over.n.or(self.n),
            samples: over.samples.or(self.samples),
            sample_sizes: over.sample_sizes.or(self.sample_sizes),
            steps: if user_grid { over.steps } else { self.steps },
            deltas: if user_grid { over.deltas } else { self.deltas },
            reference_steps: over.reference_steps.or(self.reference_steps),
            p: over.p.or(self.p),
            epsilons: over.epsilons.or(self.epsilons),
            replications: over.replications.or(self.replications),
            plan_only: over.plan_only.or(self.plan_only),
            radius: over.radius.or(self.radius),
            strikes: over.strikes.or(self.strikes),
            moments: over.moments.or(self.moments),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSection {
    pub kind: Option<PayoffName>,
    pub strike: Option<f64>,
    pub rate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Test function inside a barrier payoff.
    pub phi: Option<PayoffName>,
    /// Reference value for the rmsq column.
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSection {
    pub truncation: Option<f64>,
    pub nodes: Option<usize>,
    pub damping: Option<f64>,
    pub stability_tol: Option<f64>,
}

/// One violated rule, with the line it refers to when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub problems: Vec<Problem>,
}

impl ConfigError {
    pub fn single(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError {
            problems: vec![Problem {
                line,
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.problems.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses a config document. Syntax errors, duplicate keys, unknown keys and
/// type mismatches are reported with their line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        ConfigError::single(line, e.message().trim().to_string())
    })
}

/// Line of `key = …` inside table `section` (`None` for the top level). For
/// arrays of tables, `index` selects the occurrence.
pub fn locate(text: &str, section: Option<&str>, index: usize, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    let mut seen: i64 = -1;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').split(']').next().unwrap_or("").trim().to_string();
            if Some(name.as_str()) == section {
                seen += 1;
            }
            current = Some(name);
            continue;
        }
        let in_section = match section {
            None => current.is_none(),
            Some(s) => current.as_deref() == Some(s) && seen == index as i64,
        };
        if !in_section {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim().trim_matches('"') == key {
                return Some(i + 1);
            }
        }
    }
    None
}

const NEGSTATS: &str = r#"
[model]
preset = "cir-scenario-1"

[scheme]
id = "modified-euler"
extension = "truncated"

[grid]
n = 512
samples = 100000
"#;

const PATHWISE: &str = r#"
[model]
preset = "cir-scenario-1"

[scheme]
id = "modified-euler"
extension = "truncated"

[reference]
id = "cir-implicit-sqrt-euler"
extension = "truncated"

[grid]
steps = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192]
reference_steps = 65536
"#;

const CONVERGE: &str = r#"
[model]
preset = "cev-set-1"

[scheme]
id = "modified-euler"
extension = "truncated"

[grid]
steps = [16, 32, 64, 128, 256, 512, 1024]
reference_steps = 16384
samples = 10000
p = 2.0
"#;

const EXPLODE: &str = r#"
[model]
preset = "three-halves-mc"

[scheme]
id = "modified-euler"
extension = "truncated"

[grid]
deltas = [1.0, 0.25, 0.0625, 0.015625, 0.00390625, 0.0009765625]
sample_sizes = [1000, 10000]

[payoff]
kind = "absolute-terminal"
"#;

const MLMC: &str = r#"
[model]
preset = "heston-mlmc"

[scheme]
id = "log-heston-composite"

[grid]
epsilons = [0.125, 0.0625, 0.03125, 0.015625]
replications = 0

[payoff]
kind = "call"
strike = 105.0
rate = 0.0319
"#;

const PRICE: &str = r#"
[model]
preset = "heston-mlmc"

[grid]
strikes = [105.0]
"#;

const VALIDATE: &str = r#"
[model]
preset = "cir-scenario-1"

[grid]
moments = [1.0, 2.0]
"#;

/// The config used when `kind` runs without a file.
pub fn default_config_text(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Negstats => NEGSTATS,
        ExperimentKind::Pathwise => PATHWISE,
        ExperimentKind::Converge => CONVERGE,
        ExperimentKind::Explode => EXPLODE,
        ExperimentKind::Mlmc => MLMC,
        ExperimentKind::Price => PRICE,
        ExperimentKind::Validate => VALIDATE,
    }
}

/// User settings over the experiment defaults. Tables other than `[grid]`
/// are replaced as a whole; `[grid]` is merged key by key.
pub fn with_defaults(kind: ExperimentKind, user: ExperimentConfig) -> ExperimentConfig {
    let base = parse_config(default_config_text(kind)).expect("built-in defaults parse");
    let user_schemes = user.scheme.is_some() || !user.schemes.is_empty();
    let user_model = user.model.is_some();
    ExperimentConfig {
        experiment: Some(kind),
        seed: user.seed,
        out: user.out,
        overflow: user.overflow.or(base.overflow),
        model: user.model.or(base.model),
        scheme: if user_schemes { user.scheme } else { base.scheme },
        schemes: if user_schemes { user.schemes } else { base.schemes },
        // a default reference only makes sense with the default model
        reference: user.reference.or(if user_model || user_schemes { None } else { base.reference }),
        grid: Some(base.grid.unwrap_or_default().merged(user.grid.unwrap_or_default())),
        payoff: user.payoff.or(base.payoff),
        fourier: user.fourier.or(base.fourier),
    }
}
