//! Turns a parsed config into a checked experiment plan.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use sdelab::models::{preset, PRESET_NAMES};
use sdelab::{
    build_model, AitSahaliaParams, AuxiliaryExtension, CevParams, CirParams, CubicToyParams, FourierSettings,
    GbmParams, HestonParams, ModelParams, OverflowPolicy, PayoffKind, PayoffSpec, Phi, PriceLayer, ProjectionMap,
    Reference, SchemeId, SolverSettings, Stepper, StepperConfig, ThreeHalvesParams,
};

use crate::config::{
    locate, parse_config, with_defaults, ConfigError, ExperimentConfig, ExperimentKind, ExtensionName,
    GridSection, OverflowSetting, PayoffName, PayoffSection, Problem, ProjectionName, SchemeSection, SolverName,
};

/// Settings given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Grid values after defaults, all checked positive.
#[derive(Debug, Clone, Default)]
pub struct Grid {
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub sample_sizes: Vec<usize>,
    pub steps: Vec<usize>,
    pub reference_steps: Option<usize>,
    pub p: f64,
    pub epsilons: Vec<f64>,
    pub replications: usize,
    pub plan_only: bool,
    pub radius: Option<f64>,
    pub strikes: Vec<f64>,
    pub moments: Vec<f64>,
}

/// Everything an experiment needs, validated.
#[derive(Clone)]
pub struct Plan {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
    pub overflow: OverflowPolicy,
    pub params: ModelParams<f64>,
    pub model: sdelab::Model,
    pub horizon: f64,
    pub schemes: Vec<StepperConfig<f64>>,
    pub reference: Option<Reference<f64>>,
    pub grid: Grid,
    pub payoff: Option<PayoffSpec<f64>>,
    pub truth: Option<f64>,
    pub fourier: FourierSettings,
    /// Effective config without seed and output directory.
    pub echo: String,
}

struct Ctx<'a> {
    text: &'a str,
    problems: Vec<Problem>,
}

impl Ctx<'_> {
    fn err(&mut self, section: Option<&str>, index: usize, key: &str, message: impl Into<String>) {
        let line = locate(self.text, section, index, key);
        let path = match section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        self.problems.push(Problem {
            line,
            message: format!("{path}: {}", message.into()),
        });
    }
}

/// Parses `text` (or the defaults when `None`) for experiment `kind`.
pub fn load(kind: ExperimentKind, text: Option<&str>, overrides: &Overrides) -> Result<Plan, ConfigError> {
    let text = text.unwrap_or("");
    let user = parse_config(text)?;
    resolve(kind, user, text, overrides)
}

pub fn resolve(
    kind: ExperimentKind,
    user: ExperimentConfig,
    text: &str,
    overrides: &Overrides,
) -> Result<Plan, ConfigError> {
    let mut cx = Ctx {
        text,
        problems: Vec::new(),
    };
    if let Some(k) = user.experiment {
        if k != kind {
            cx.err(None, 0, "experiment", format!("config is for `{k}` but `{kind}` was requested"));
        }
    }
    let cfg = with_defaults(kind, user);
    let seed = overrides.seed.or(cfg.seed);
    if seed.is_none() {
        cx.err(None, 0, "seed", "a seed is required, give `seed = …` or --seed");
    }
    let out = overrides.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let overflow = match cfg.overflow {
        Some(OverflowSetting::Exclude) => OverflowPolicy::Exclude,
        _ => OverflowPolicy::Propagate,
    };

    let model = resolve_model(&mut cx, &cfg);
    let grid = resolve_grid(&mut cx, cfg.grid.clone().unwrap_or_default(), model.as_ref().map(|m| m.1));

    let mut schemes = Vec::new();
    let mut reference = None;
    let mut payoff = None;
    let mut truth = None;
    if let Some((params, horizon, built)) = &model {
        let sections: Vec<(&str, usize, &SchemeSection)> = cfg
            .scheme
            .iter()
            .map(|s| ("scheme", 0, s))
            .chain(cfg.schemes.iter().enumerate().map(|(i, s)| ("schemes", i, s)))
            .collect();
        for (sec, idx, s) in sections {
            if let Some(c) = resolve_scheme(&mut cx, sec, idx, s, built) {
                schemes.push(c);
            }
        }
        if matches!(kind, ExperimentKind::Pathwise | ExperimentKind::Converge) {
            reference = match &cfg.reference {
                Some(r) if r.id.as_deref() == Some("gbm-exact") => match params {
                    ModelParams::Gbm(p) => Some(Reference::GbmExact(*p)),
                    _ => {
                        cx.err(Some("reference"), 0, "id", "the exact reference needs a gbm model");
                        None
                    }
                },
                Some(r) => resolve_scheme(&mut cx, "reference", 0, r, built).map(Reference::Scheme),
                None => schemes.first().cloned().map(Reference::Scheme),
            };
        }
        if let Some(p) = &cfg.payoff {
            payoff = resolve_payoff(&mut cx, p, *horizon);
            truth = p.truth;
        }
    }

    let fourier = {
        let mut s = FourierSettings::default();
        if let Some(f) = &cfg.fourier {
            s.truncation = f.truncation.unwrap_or(s.truncation);
            s.nodes = f.nodes.unwrap_or(s.nodes);
            s.damping = f.damping.unwrap_or(s.damping);
            s.stability_tol = f.stability_tol.unwrap_or(s.stability_tol);
        }
        if let Err(e) = s.validate() {
            cx.err(Some("fourier"), 0, param_name(&e).unwrap_or("nodes"), e.to_string());
        }
        if !(s.stability_tol > 0.0) {
            cx.err(Some("fourier"), 0, "stability_tol", "must be positive");
        }
        s
    };

    if let Some((params, _, _)) = &model {
        requirements(&mut cx, kind, &grid, &cfg, params, payoff.as_ref(), truth);
    }

    if !cx.problems.is_empty() {
        return Err(ConfigError { problems: cx.problems });
    }
    let (params, horizon, model) = model.expect("model resolved when no problems");
    let mut echo_cfg = cfg;
    echo_cfg.seed = None;
    echo_cfg.out = None;
    let echo = toml::to_string(&echo_cfg).map_err(|e| ConfigError::single(None, e.to_string()))?;
    Ok(Plan {
        kind,
        seed: seed.expect("checked"),
        out,
        overflow,
        params,
        model,
        horizon,
        schemes,
        reference,
        grid,
        payoff,
        truth,
        fourier,
        echo,
    })
}

fn param_name(e: &sdelab::Error) -> Option<&'static str> {
    match e {
        sdelab::Error::InvalidParameter { name, .. } => Some(name),
        _ => None,
    }
}

const FAMILIES: [&str; 9] = [
    "cir",
    "cev",
    "gbm",
    "heston",
    "log-heston",
    "ait-sahalia",
    "three-halves",
    "cubic-toy",
    "cir-lamperti",
];

fn family_fields(family: &str) -> &'static [&'static str] {
    match family {
        "cir" | "cir-lamperti" => &["kappa", "lambda", "theta", "x0"],
        "cev" => &["mu", "sigma", "gamma", "s0"],
        "gbm" => &["mu", "sigma", "x0"],
        "heston" | "log-heston" => &["mu", "kappa", "lambda", "theta", "rho", "s0", "v0", "r"],
        "ait-sahalia" => &["alpha_m1", "alpha_0", "alpha_1", "alpha_2", "sigma", "r", "rho", "x0"],
        "three-halves" => &["c1", "c2", "c3", "v0", "price_mu", "price_rho", "price_s0"],
        "cubic-toy" => &["sigma", "x0"],
        _ => &[],
    }
}

fn family_of(p: &ModelParams<f64>) -> &'static str {
    match p {
        ModelParams::Cir(_) => "cir",
        ModelParams::Cev(_) => "cev",
        ModelParams::Gbm(_) => "gbm",
        ModelParams::Heston(_) => "heston",
        ModelParams::LogHeston(_) => "log-heston",
        ModelParams::AitSahalia(_) => "ait-sahalia",
        ModelParams::ThreeHalves(_) => "three-halves",
        ModelParams::CubicToy(_) => "cubic-toy",
        ModelParams::CirLamperti(_) => "cir-lamperti",
    }
}

fn to_map(p: &ModelParams<f64>) -> BTreeMap<&'static str, f64> {
    let v: Vec<(&'static str, f64)> = match p {
        ModelParams::Cir(c) | ModelParams::CirLamperti(c) => {
            vec![("kappa", c.kappa), ("lambda", c.lambda), ("theta", c.theta), ("x0", c.x0)]
        }
        ModelParams::Cev(c) => vec![("mu", c.mu), ("sigma", c.sigma), ("gamma", c.gamma), ("s0", c.s0)],
        ModelParams::Gbm(g) => vec![("mu", g.mu), ("sigma", g.sigma), ("x0", g.x0)],
        ModelParams::Heston(h) | ModelParams::LogHeston(h) => vec![
            ("mu", h.mu),
            ("kappa", h.kappa),
            ("lambda", h.lambda),
            ("theta", h.theta),
            ("rho", h.rho),
            ("s0", h.s0),
            ("v0", h.v0),
            ("r", h.r),
        ],
        ModelParams::AitSahalia(a) => vec![
            ("alpha_m1", a.alpha_m1),
            ("alpha_0", a.alpha_0),
            ("alpha_1", a.alpha_1),
            ("alpha_2", a.alpha_2),
            ("sigma", a.sigma),
            ("r", a.r),
            ("rho", a.rho),
            ("x0", a.x0),
        ],
        ModelParams::ThreeHalves(t) => {
            let mut v = vec![("c1", t.c1), ("c2", t.c2), ("c3", t.c3), ("v0", t.v0)];
            if let Some(p) = t.price {
                v.extend([("price_mu", p.mu), ("price_rho", p.rho), ("price_s0", p.s0)]);
            }
            v
        }
        ModelParams::CubicToy(c) => vec![("sigma", c.sigma), ("x0", c.x0)],
    };
    v.into_iter().collect()
}

fn from_map(family: &str, m: &BTreeMap<&'static str, f64>) -> ModelParams<f64> {
    let g = |k: &str| m[k];
    match family {
        "cir" => ModelParams::Cir(CirParams::new(g("kappa"), g("lambda"), g("theta"), g("x0"))),
        "cir-lamperti" => ModelParams::CirLamperti(CirParams::new(g("kappa"), g("lambda"), g("theta"), g("x0"))),
        "cev" => ModelParams::Cev(CevParams {
            mu: g("mu"),
            sigma: g("sigma"),
            gamma: g("gamma"),
            s0: g("s0"),
        }),
        "gbm" => ModelParams::Gbm(GbmParams {
            mu: g("mu"),
            sigma: g("sigma"),
            x0: g("x0"),
        }),
        "heston" | "log-heston" => {
            let h = HestonParams {
                mu: g("mu"),
                kappa: g("kappa"),
                lambda: g("lambda"),
                theta: g("theta"),
                rho: g("rho"),
                s0: g("s0"),
                v0: g("v0"),
                r: g("r"),
            };
            if family == "heston" {
                ModelParams::Heston(h)
            } else {
                ModelParams::LogHeston(h)
            }
        }
        "ait-sahalia" => ModelParams::AitSahalia(AitSahaliaParams {
            alpha_m1: g("alpha_m1"),
            alpha_0: g("alpha_0"),
            alpha_1: g("alpha_1"),
            alpha_2: g("alpha_2"),
            sigma: g("sigma"),
            r: g("r"),
            rho: g("rho"),
            x0: g("x0"),
        }),
        "three-halves" => ModelParams::ThreeHalves(ThreeHalvesParams {
            c1: g("c1"),
            c2: g("c2"),
            c3: g("c3"),
            v0: g("v0"),
            price: m.contains_key("price_mu").then(|| PriceLayer {
                mu: g("price_mu"),
                rho: g("price_rho"),
                s0: g("price_s0"),
            }),
        }),
        _ => ModelParams::CubicToy(CubicToyParams {
            sigma: g("sigma"),
            x0: g("x0"),
        }),
    }
}

fn resolve_model(cx: &mut Ctx, cfg: &ExperimentConfig) -> Option<(ModelParams<f64>, f64, sdelab::Model)> {
    let sec = cfg.model.clone().unwrap_or_default();
    let m = Some("model");
    let base = match &sec.preset {
        Some(name) => match preset(name) {
            Some(p) => Some(p),
            None => {
                cx.err(m, 0, "preset", format!("unknown preset `{name}`, known: {}", PRESET_NAMES.join(", ")));
                return None;
            }
        },
        None => None,
    };
    let family = match (&sec.family, &base) {
        (Some(f), _) if !FAMILIES.contains(&f.as_str()) => {
            cx.err(m, 0, "family", format!("unknown family `{f}`, known: {}", FAMILIES.join(", ")));
            return None;
        }
        (Some(f), Some(b)) if family_of(&b.params) != f => {
            cx.err(
                m,
                0,
                "family",
                format!("preset `{}` is a {} model, not {f}", b.name, family_of(&b.params)),
            );
            return None;
        }
        (Some(f), _) => FAMILIES.into_iter().find(|x| x == f).expect("checked"),
        (None, Some(b)) => family_of(&b.params),
        (None, None) => {
            cx.err(m, 0, "preset", "give a preset or a family");
            return None;
        }
    };
    let allowed = family_fields(family);
    let mut values = base.map(|b| to_map(&b.params)).unwrap_or_default();
    let mut ok = true;
    for (k, v) in sec.given() {
        if !allowed.contains(&k) {
            cx.err(m, 0, k, format!("not a parameter of the {family} model"));
            ok = false;
        } else {
            values.insert(k, v);
        }
    }
    let mut required: Vec<&str> = allowed.to_vec();
    if family == "three-halves" {
        let layer = ["price_mu", "price_rho", "price_s0"];
        let present = layer.iter().filter(|k| values.contains_key(*k)).count();
        if present == 0 {
            required.retain(|k| !layer.contains(k));
        }
    }
    for k in required {
        if !values.contains_key(k) {
            cx.err(m, 0, k, format!("required by the {family} model"));
            ok = false;
        }
    }
    let horizon = sec.horizon.or(base.map(|b| b.horizon));
    match horizon {
        Some(t) if t > 0.0 && t.is_finite() => {}
        Some(_) => {
            cx.err(m, 0, "horizon", "must be positive");
            ok = false;
        }
        None => {
            cx.err(m, 0, "horizon", "required without a preset");
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    let params = from_map(family, &values);
    match build_model(params) {
        Ok(model) => Some((params, horizon.expect("checked"), model)),
        Err(e) => {
            cx.err(m, 0, param_name(&e).unwrap_or("family"), e.to_string());
            None
        }
    }
}

fn resolve_scheme(
    cx: &mut Ctx,
    sec: &str,
    idx: usize,
    s: &SchemeSection,
    model: &sdelab::Model,
) -> Option<StepperConfig<f64>> {
    let Some(name) = &s.id else {
        cx.err(Some(sec), idx, "id", "scheme id required");
        return None;
    };
    let id = match SchemeId::from_str(name) {
        Ok(id) => id,
        Err(_) => {
            let known: Vec<&str> = SchemeId::ALL.iter().map(|s| s.as_str()).collect();
            cx.err(Some(sec), idx, "id", format!("unknown scheme `{name}`, known: {}", known.join(", ")));
            return None;
        }
    };
    let mut c = StepperConfig::new(id);
    match s.extension {
        Some(ExtensionName::Truncated) => c = c.with_extension(AuxiliaryExtension::truncated()),
        Some(ExtensionName::Absolute) => c = c.with_extension(AuxiliaryExtension::absolute()),
        None => {}
    }
    match s.projection {
        Some(ProjectionName::Absolute) => c = c.with_projection(ProjectionMap::Absolute),
        Some(ProjectionName::Boundary) => c = c.with_projection(ProjectionMap::Boundary),
        None => {}
    }
    let mut solver = match s.solver {
        Some(SolverName::Newton) => SolverSettings::newton(),
        _ => SolverSettings::default(),
    };
    if let Some(t) = s.tol {
        if !(t > 0.0) {
            cx.err(Some(sec), idx, "tol", "must be positive");
            return None;
        }
        solver.abs_tol = t;
    }
    if let Some(n) = s.max_iter {
        if n == 0 {
            cx.err(Some(sec), idx, "max_iter", "must be positive");
            return None;
        }
        solver.max_iter = n;
    }
    c = c.with_solver(solver);
    if let Err(e) = Stepper::new(&c, model) {
        cx.err(Some(sec), idx, "id", e.to_string());
        return None;
    }
    Some(c)
}

fn phi_of(cx: &mut Ctx, name: PayoffName, strike: Option<f64>, key: &str) -> Option<Phi<f64>> {
    let need_strike = |cx: &mut Ctx| match strike {
        Some(k) if k >= 0.0 => Some(k),
        Some(_) => {
            cx.err(Some("payoff"), 0, "strike", "must be nonnegative");
            None
        }
        None => {
            cx.err(Some("payoff"), 0, key, "this payoff needs `strike`");
            None
        }
    };
    match name {
        PayoffName::Call => need_strike(cx).map(Phi::Call),
        PayoffName::Put => need_strike(cx).map(Phi::Put),
        PayoffName::Identity => Some(Phi::Identity),
        PayoffName::Abs | PayoffName::AbsoluteTerminal => Some(Phi::Abs),
        PayoffName::Barrier => {
            cx.err(Some("payoff"), 0, key, "a barrier cannot be nested");
            None
        }
    }
}

fn resolve_payoff(cx: &mut Ctx, p: &PayoffSection, horizon: f64) -> Option<PayoffSpec<f64>> {
    let Some(kind) = p.kind else {
        cx.err(Some("payoff"), 0, "kind", "payoff kind required");
        return None;
    };
    let kind = match kind {
        PayoffName::AbsoluteTerminal => PayoffKind::AbsoluteTerminal,
        PayoffName::Barrier => {
            let phi = match p.phi {
                Some(f) => phi_of(cx, f, p.strike, "phi")?,
                None => {
                    cx.err(Some("payoff"), 0, "phi", "a barrier payoff needs `phi`");
                    return None;
                }
            };
            let (Some(lower), Some(upper)) = (p.lower, p.upper) else {
                cx.err(Some("payoff"), 0, "kind", "a barrier payoff needs `lower` and `upper`");
                return None;
            };
            PayoffKind::Barrier { phi, lower, upper }
        }
        other => PayoffKind::Terminal(phi_of(cx, other, p.strike, "kind")?),
    };
    let rate = p.rate.unwrap_or(0.0);
    if !rate.is_finite() {
        cx.err(Some("payoff"), 0, "rate", "must be finite");
        return None;
    }
    let spec = PayoffSpec { kind, rate, horizon };
    if let Err(e) = spec.validate() {
        cx.err(Some("payoff"), 0, "kind", e.to_string());
        return None;
    }
    Some(spec)
}

fn resolve_grid(cx: &mut Ctx, g: GridSection, horizon: Option<f64>) -> Grid {
    let gs = Some("grid");
    let positive = |cx: &mut Ctx, key: &str, v: Option<usize>| {
        if v == Some(0) {
            cx.err(gs, 0, key, "must be positive");
        }
        v
    };
    let n = positive(cx, "n", g.n);
    let samples = positive(cx, "samples", g.samples);
    let reference_steps = positive(cx, "reference_steps", g.reference_steps);
    let sample_sizes = g.sample_sizes.unwrap_or_default();
    if sample_sizes.contains(&0) {
        cx.err(gs, 0, "sample_sizes", "every entry must be positive");
    }
    let steps_given = g.steps.is_some();
    let mut steps = g.steps.unwrap_or_default();
    if steps.contains(&0) {
        cx.err(gs, 0, "steps", "every entry must be positive");
    }
    if let Some(deltas) = g.deltas {
        if !steps.is_empty() {
            cx.err(gs, 0, "deltas", "give either `steps` or `deltas`");
        } else if let Some(t) = horizon {
            for d in deltas {
                let k = (t / d).round();
                if !(d > 0.0) || k < 1.0 || ((k * d - t).abs() > 1e-9 * t) {
                    cx.err(gs, 0, "deltas", format!("{d} does not divide the horizon {t}"));
                } else {
                    steps.push(k as usize);
                }
            }
        }
    }
    if steps.windows(2).any(|w| w[0] >= w[1]) {
        cx.err(gs, 0, if steps_given { "steps" } else { "deltas" }, "must be strictly refining");
    }
    let p = g.p.unwrap_or(2.0);
    if !(p >= 1.0) {
        cx.err(gs, 0, "p", "must be at least 1");
    }
    let epsilons = g.epsilons.unwrap_or_default();
    if epsilons.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        cx.err(gs, 0, "epsilons", "every entry must lie in (0, 1]");
    }
    let radius = g.radius;
    if let Some(r) = radius {
        if !(r > 0.0) {
            cx.err(gs, 0, "radius", "must be positive");
        }
    }
    let strikes = g.strikes.unwrap_or_default();
    if strikes.iter().any(|k| !(*k >= 0.0)) {
        cx.err(gs, 0, "strikes", "every strike must be nonnegative");
    }
    let moments = g.moments.unwrap_or_default();
    if moments.iter().any(|m| !(*m > 0.0)) {
        cx.err(gs, 0, "moments", "every moment order must be positive");
    }
    Grid {
        n,
        samples,
        sample_sizes,
        steps,
        reference_steps,
        p,
        epsilons,
        replications: g.replications.unwrap_or(0),
        plan_only: g.plan_only.unwrap_or(false),
        radius,
        strikes,
        moments,
    }
}

/// Fields each experiment cannot run without.
#[allow(clippy::too_many_arguments)]
fn requirements(
    cx: &mut Ctx,
    kind: ExperimentKind,
    grid: &Grid,
    cfg: &ExperimentConfig,
    params: &ModelParams<f64>,
    payoff: Option<&PayoffSpec<f64>>,
    truth: Option<f64>,
) {
    let gs = Some("grid");
    let scheme_given = cfg.scheme.is_some() || !cfg.schemes.is_empty();
    let needs_scheme = !matches!(kind, ExperimentKind::Price | ExperimentKind::Validate);
    if needs_scheme && !scheme_given {
        cx.err(Some("scheme"), 0, "id", format!("`{kind}` needs a scheme"));
    }
    let require = |cx: &mut Ctx, key: &str, present: bool| {
        if !present {
            cx.err(gs, 0, key, format!("required by `{kind}`"));
        }
    };
    match kind {
        ExperimentKind::Negstats => {
            require(cx, "n", grid.n.is_some());
            require(cx, "samples", grid.samples.is_some());
        }
        ExperimentKind::Pathwise | ExperimentKind::Converge => {
            require(cx, "steps", !grid.steps.is_empty());
            match grid.reference_steps {
                None => require(cx, "reference_steps", false),
                Some(r) if !r.is_power_of_two() => cx.err(gs, 0, "reference_steps", "must be a power of two"),
                Some(r) => {
                    if grid.steps.iter().any(|&n| r % n != 0 || n > r) {
                        cx.err(gs, 0, "steps", "every step count must divide reference_steps");
                    }
                }
            }
            if kind == ExperimentKind::Converge {
                match grid.samples {
                    None => require(cx, "samples", false),
                    Some(1) => cx.err(gs, 0, "samples", "strong errors need at least two samples"),
                    _ => {}
                }
            }
        }
        ExperimentKind::Explode => {
            require(cx, "steps", !grid.steps.is_empty());
            require(cx, "sample_sizes", !grid.sample_sizes.is_empty() || grid.samples.is_some());
            if payoff.is_none() && cfg.payoff.is_none() {
                cx.err(Some("payoff"), 0, "kind", "`explode` needs a payoff");
            }
        }
        ExperimentKind::Mlmc => {
            require(cx, "epsilons", !grid.epsilons.is_empty());
            if payoff.is_none() && cfg.payoff.is_none() {
                cx.err(Some("payoff"), 0, "kind", "`mlmc` needs a payoff");
            }
            if grid.replications == 1 {
                cx.err(gs, 0, "replications", "use 0 for a single estimate or at least 2 for the rmsq study");
            }
            let fourier_truth = matches!(params, ModelParams::Heston(_) | ModelParams::LogHeston(_))
                && matches!(payoff.map(|p| p.kind), Some(PayoffKind::Terminal(Phi::Call(_))));
            if grid.replications >= 2 && truth.is_none() && !fourier_truth && !grid.plan_only {
                cx.err(
                    Some("payoff"),
                    0,
                    "truth",
                    "the rmsq study needs `truth` unless the price has a Fourier reference",
                );
            }
        }
        ExperimentKind::Price => match params {
            ModelParams::Heston(_) | ModelParams::LogHeston(_) | ModelParams::Gbm(_) => {
                require(cx, "strikes", !grid.strikes.is_empty());
                if let ModelParams::Gbm(g) = params {
                    if !(g.sigma > 0.0) {
                        cx.err(Some("model"), 0, "sigma", "Black-Scholes prices need sigma > 0");
                    }
                }
            }
            ModelParams::ThreeHalves(_) => {}
            other => cx.err(
                Some("model"),
                0,
                "preset",
                format!("no price oracle for the {} model", family_of(other)),
            ),
        },
        ExperimentKind::Validate => {}
    }
}
