//! Standard, ball-discarding and multilevel Monte Carlo estimators.
//!
//! Sample `i` of an estimator called with key `k` is driven by
//! `k.with_sample(k.sample_index + i)`. Per-sample work runs in parallel but
//! every sum is taken in index order, so results do not depend on the worker
//! count.

use std::fmt::Write as _;

use crate::brownian::{sample_increments, sample_lattice, IncrementSequence, StreamKey};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::parallel::map_indexed;
use crate::real::Real;
use crate::schemes::{Stepper, StepperConfig};

/// How non-finite samples enter an average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// An overflowed sample counts as `+∞`, so the estimate becomes `+∞`.
    #[default]
    Propagate,
    /// Overflowed samples are dropped and counted.
    Exclude,
}

impl OverflowPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            OverflowPolicy::Propagate => "propagate",
            OverflowPolicy::Exclude => "exclude",
        }
    }
}

/// Terminal test function `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phi<T> {
    Call(T),
    Put(T),
    Identity,
    Abs,
}

impl<T: Real> Phi<T> {
    pub fn eval(&self, x: T) -> T {
        match *self {
            Phi::Call(k) => (x - k).pos(),
            Phi::Put(k) => (k - x).pos(),
            Phi::Identity => x,
            Phi::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayoffKind<T> {
    /// `φ(X_T)`.
    Terminal(Phi<T>),
    /// `φ(X_T) 1{K₁ ≤ |X_{t_k}| ≤ K₂ for all nodes}`.
    Barrier { phi: Phi<T>, lower: T, upper: T },
    /// `|X_T|`.
    AbsoluteTerminal,
}

/// Payoff on the model's observable (the price for log-Heston, exponentiated
/// only where it is evaluated) discounted at `rate` over `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffSpec<T> {
    pub kind: PayoffKind<T>,
    pub rate: T,
    pub horizon: T,
}

impl<T: Real> PayoffSpec<T> {
    pub fn terminal(phi: Phi<T>, horizon: T) -> Self {
        PayoffSpec {
            kind: PayoffKind::Terminal(phi),
            rate: T::zero(),
            horizon,
        }
    }

    pub fn discounted(mut self, rate: T) -> Self {
        self.rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) {
            return Err(Error::param("T", "horizon must be positive"));
        }
        let strike_ok = |phi: &Phi<T>| match phi {
            Phi::Call(k) | Phi::Put(k) => *k >= T::zero(),
            _ => true,
        };
        match &self.kind {
            PayoffKind::Terminal(phi) if !strike_ok(phi) => Err(Error::param("K", "strike must be nonnegative")),
            PayoffKind::Barrier { phi, lower, upper } => {
                if !strike_ok(phi) {
                    return Err(Error::param("K", "strike must be nonnegative"));
                }
                if !(*lower >= T::zero() && lower <= upper) {
                    return Err(Error::param("barrier", "requires 0 <= K1 <= K2"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn discount(&self) -> T {
        (-self.rate * self.horizon).exp()
    }

    fn needs_path(&self) -> bool {
        matches!(self.kind, PayoffKind::Barrier { .. })
    }
}

/// One simulated payoff sample.
struct Draw {
    value: f64,
    overflow: bool,
    discarded: bool,
}

/// Simulates one path on `inc` and evaluates the payoff. `ball` enables the
/// discarding indicator `sup_k |X_{t_k}| ≤ R`.
fn draw<T: Real>(stepper: &Stepper<T>, payoff: &PayoffSpec<T>, inc: &IncrementSequence<T>, ball: Option<T>) -> Result<Draw> {
    let model = stepper.model();
    let d = stepper.state_dim();
    let mut last = [T::zero(); crate::models::MAX_DIM];
    let mut inside = true;
    let mut in_ball = true;
    let barrier = match payoff.kind {
        PayoffKind::Barrier { lower, upper, .. } => Some((lower, upper)),
        _ => None,
    };
    let track = payoff.needs_path() || ball.is_some();
    let stats = stepper.run(inc, |_, x| {
        last[..d].copy_from_slice(x);
        if track {
            if let Some((lo, hi)) = barrier {
                let s = model.observable(x).abs();
                inside &= s >= lo && s <= hi;
            }
            if let Some(r) = ball {
                let norm = x.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
                in_ball &= norm <= r;
            }
        }
    })?;
    let overflow = stats.overflow_at.is_some();
    if !in_ball {
        return Ok(Draw {
            value: 0.0,
            overflow,
            discarded: true,
        });
    }
    if overflow {
        return Ok(Draw {
            value: f64::INFINITY,
            overflow,
            discarded: false,
        });
    }
    let s = model.observable(&last[..d]);
    let v = match payoff.kind {
        PayoffKind::Terminal(phi) => phi.eval(s),
        PayoffKind::AbsoluteTerminal => s.abs(),
        PayoffKind::Barrier { phi, .. } => {
            if inside {
                phi.eval(s)
            } else {
                T::zero()
            }
        }
    };
    let value = (payoff.discount() * v).to_f64_lossy();
    Ok(Draw {
        value: if value.is_finite() { value } else { f64::INFINITY },
        overflow: !value.is_finite(),
        discarded: false,
    })
}

/// Mean, spread and bookkeeping of an estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceEstimate {
    pub value: f64,
    /// Sample standard deviation of the payoff (standard MC) or the
    /// estimated standard error of the level sum (MLMC).
    pub stddev: f64,
    pub samples: usize,
    pub overflow_count: usize,
    pub discarded: usize,
    /// Total scheme steps simulated.
    pub cost: u64,
    /// Per-level statistics, MLMC only.
    pub levels: Vec<LevelStat>,
}

impl PriceEstimate {
    pub fn std_error(&self) -> f64 {
        if self.levels.is_empty() {
            self.stddev / (self.samples.max(1) as f64).sqrt()
        } else {
            self.stddev
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStat {
    pub level: usize,
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub cost: u64,
    pub overflow_count: usize,
}

/// Two-pass mean and sample variance of `values` in index order.
fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values.clone() {
        s += v;
        n += 1;
    }
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = s / n as f64;
    if !mean.is_finite() {
        return (mean, f64::NAN, n);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
    (mean, var, n)
}

fn aggregate(draws: &[Draw], policy: OverflowPolicy, cost: u64) -> PriceEstimate {
    let overflow_count = draws.iter().filter(|d| d.overflow).count();
    let discarded = draws.iter().filter(|d| d.discarded).count();
    let kept = draws
        .iter()
        .filter(|d| !(policy == OverflowPolicy::Exclude && d.overflow && !d.discarded))
        .map(|d| d.value);
    let (value, var, n) = mean_var(kept);
    PriceEstimate {
        value,
        stddev: var.sqrt(),
        samples: n,
        overflow_count,
        discarded,
        cost,
        levels: Vec::new(),
    }
}

fn sample_key(key: StreamKey, i: u64) -> StreamKey {
    key.with_sample(key.sample_index.wrapping_add(i))
}

fn run_mc<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    payoff: &PayoffSpec<T>,
    n: usize,
    samples: usize,
    key: StreamKey,
    ball: Option<T>,
    policy: OverflowPolicy,
) -> Result<PriceEstimate> {
    payoff.validate()?;
    if n == 0 || samples == 0 {
        return Err(Error::param("N", "need at least one step and one sample"));
    }
    let stepper = Stepper::new(config, model)?;
    let m = stepper.noise_dim();
    let draws = map_indexed(samples, |i| {
        let inc = sample_increments::<T>(sample_key(key, i as u64), payoff.horizon, m, n)?;
        draw(&stepper, payoff, &inc, ball)
    })?;
    Ok(aggregate(&draws, policy, (n as u64) * (samples as u64)))
}

/// `(1/N) Σ φ(X̄_T⁽ⁱ⁾)` with `n` steps per path.
pub fn mc_estimate<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    payoff: &PayoffSpec<T>,
    n: usize,
    samples: usize,
    key: StreamKey,
    policy: OverflowPolicy,
) -> Result<PriceEstimate> {
    run_mc(model, config, payoff, n, samples, key, None, policy)
}

/// Standard estimator with paths leaving the ball of radius `radius` counted
/// as zero. `radius = ∞` reproduces [`mc_estimate`].
#[allow(clippy::too_many_arguments)]
pub fn mc_estimate_discarded<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    payoff: &PayoffSpec<T>,
    n: usize,
    samples: usize,
    radius: T,
    key: StreamKey,
    policy: OverflowPolicy,
) -> Result<PriceEstimate> {
    if !(radius > T::zero()) {
        return Err(Error::param("R", "discarding radius must be positive"));
    }
    run_mc(model, config, payoff, n, samples, key, Some(radius), policy)
}

/// Level count and replications of the multilevel estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MlmcPlan {
    pub epsilon: f64,
    pub horizon: f64,
    /// Finest level `L`; levels run `0..=L`.
    pub levels: usize,
    pub samples: Vec<u64>,
    pub total_steps: u64,
}

/// Steps simulated per sample at level `ℓ`: one at level 0, `2^ℓ` fine plus
/// `2^{ℓ−1}` coarse above.
pub fn level_cost(level: usize) -> u64 {
    if level == 0 {
        1
    } else {
        (1u64 << level) + (1u64 << (level - 1))
    }
}

/// `L = ⌈log₂(T/ε)⌉`, `N_ℓ = ⌈L ε⁻² T 2⁻ℓ⌉`.
pub fn mlmc_plan(epsilon: f64, horizon: f64) -> Result<MlmcPlan> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param("epsilon", "must lie in (0, 1]"));
    }
    if !(horizon > 0.0) {
        return Err(Error::param("T", "must be positive"));
    }
    let levels = (horizon / epsilon).log2().ceil().max(0.0) as usize;
    // at least one correction level's worth of samples even when L = 0
    let l = levels.max(1) as f64;
    let samples: Vec<u64> = (0..=levels)
        .map(|ell| (l * horizon / (epsilon * epsilon) / (1u64 << ell) as f64).ceil() as u64)
        .map(|n| n.max(1))
        .collect();
    let total_steps = samples.iter().enumerate().map(|(ell, n)| n * level_cost(ell)).sum();
    Ok(MlmcPlan {
        epsilon,
        horizon,
        levels,
        samples,
        total_steps,
    })
}

/// Multilevel estimator with the plan of [`mlmc_plan`]. Level `ℓ ≥ 1` uses
/// one lattice of `2^ℓ` steps per sample, simulated at full and half
/// resolution; every `(level, sample)` pair gets its own lattice.
pub fn mlmc_estimate<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    payoff: &PayoffSpec<T>,
    epsilon: f64,
    key: StreamKey,
    policy: OverflowPolicy,
) -> Result<PriceEstimate> {
    payoff.validate()?;
    let horizon = payoff.horizon.to_f64_lossy();
    let plan = mlmc_plan(epsilon, horizon)?;
    let stepper = Stepper::new(config, model)?;
    let m = stepper.noise_dim();
    let mut offset = 0u64;
    let mut levels = Vec::with_capacity(plan.levels + 1);
    let mut total = 0.0;
    let mut var_sum = 0.0;
    let mut overflow_total = 0;
    let mut kept_total = 0;
    for (ell, &n_ell) in plan.samples.iter().enumerate() {
        let level_key = sample_key(key, offset);
        let diffs = map_indexed(n_ell as usize, |i| {
            let lattice = sample_lattice(sample_key(level_key, i as u64), horizon, m, 1 << ell)?;
            let fine = draw(&stepper, payoff, &lattice.increments_at::<T>(1 << ell)?, None)?;
            if ell == 0 {
                return Ok((fine.value, fine.overflow));
            }
            let coarse = draw(&stepper, payoff, &lattice.increments_at::<T>(1 << (ell - 1))?, None)?;
            let overflow = fine.overflow || coarse.overflow;
            Ok((if overflow { f64::INFINITY } else { fine.value - coarse.value }, overflow))
        })?;
        offset += n_ell;
        let overflow_count = diffs.iter().filter(|d| d.1).count();
        let kept = diffs
            .iter()
            .filter(|d| !(policy == OverflowPolicy::Exclude && d.1))
            .map(|d| d.0);
        let (mean, var, n) = mean_var(kept);
        total += mean;
        var_sum += var / n.max(1) as f64;
        overflow_total += overflow_count;
        kept_total += n;
        levels.push(LevelStat {
            level: ell,
            samples: n_ell,
            mean,
            variance: var,
            cost: n_ell * level_cost(ell),
            overflow_count,
        });
    }
    let cost = levels.iter().map(|l| l.cost).sum();
    debug_assert_eq!(cost, plan.total_steps);
    Ok(PriceEstimate {
        value: total,
        stddev: var_sum.sqrt(),
        samples: kept_total,
        overflow_count: overflow_total,
        discarded: 0,
        cost,
        levels,
    })
}

/// Step count `n = ⌈T/ε⌉` and sample count `N = ⌈n²/T⌉` balancing bias
/// and variance of the standard estimator, i.e. `Δ² = T/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardMcPairing {
    pub steps: usize,
    pub samples: usize,
    pub cost: u64,
}

pub fn standard_mc_pairing(epsilon: f64, horizon: f64) -> Result<StandardMcPairing> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param("epsilon", "must lie in (0, 1]"));
    }
    if !(horizon > 0.0) {
        return Err(Error::param("T", "must be positive"));
    }
    let steps = (horizon / epsilon).ceil() as usize;
    let samples = ((steps * steps) as f64 / horizon).ceil() as usize;
    Ok(StandardMcPairing {
        steps,
        samples,
        cost: steps as u64 * samples as u64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsqReport {
    pub rmsq: f64,
    pub mean: f64,
    pub replications: usize,
    pub overflowed: usize,
    pub estimates: Vec<f64>,
}

/// Spacing of replication keys in `sample_index`; estimators use offsets
/// below it.
pub const REPLICATION_STRIDE: u64 = 1 << 40;

/// `√((1/M) Σ (P̂⁽ʳ⁾ − truth)²)` over `M` replications. Replication `r` calls
/// `estimator` with `sample_index` advanced by `r · 2⁴⁰`. Replications run
/// one after another; each estimator parallelizes internally.
pub fn rmsq_study(
    estimator: impl Fn(StreamKey) -> Result<f64>,
    truth: f64,
    replications: usize,
    key: StreamKey,
) -> Result<RmsqReport> {
    if replications < 2 {
        return Err(Error::param("M", "need at least two replications"));
    }
    let estimates = (0..replications)
        .map(|r| estimator(sample_key(key, r as u64 * REPLICATION_STRIDE)))
        .collect::<Result<Vec<_>>>()?;
    let se: f64 = estimates.iter().map(|e| (e - truth) * (e - truth)).sum();
    let mean = estimates.iter().sum::<f64>() / replications as f64;
    Ok(RmsqReport {
        rmsq: (se / replications as f64).sqrt(),
        mean,
        replications,
        overflowed: estimates.iter().filter(|e| !e.is_finite()).count(),
        estimates,
    })
}

/// CSV rows `epsilon,levels,total_steps,estimate,rmsq,overflow_count`.
pub fn mlmc_csv_rows(rows: &[(MlmcPlan, f64, Option<f64>, usize)]) -> String {
    let mut s = String::from("epsilon,levels,total_steps,estimate,rmsq,overflow_count\n");
    for (plan, est, rmsq, ov) in rows {
        let rmsq = rmsq.map(|r| format!("{r:.6}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{:.6},{},{}", plan.epsilon, plan.levels, plan.total_steps, est, rmsq, ov);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_matches_closed_form() {
        let p = mlmc_plan(0.125, 1.0).unwrap();
        assert_eq!(p.levels, 3);
        assert_eq!(p.samples, vec![192, 96, 48, 24]);
        assert_eq!(p.total_steps, 1056);
    }

    #[test]
    fn pairing_cost() {
        let p = standard_mc_pairing(1.0 / 32.0, 1.0).unwrap();
        assert_eq!((p.steps, p.samples, p.cost), (32, 1024, 32768));
    }

    #[test]
    fn phi_values() {
        assert_eq!(Phi::Call(1.0).eval(3.0), 2.0);
        assert_eq!(Phi::Put(1.0).eval(3.0), 0.0);
        assert_eq!(Phi::Abs.eval(-3.0), 3.0);
    }
}
