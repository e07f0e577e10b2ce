//! Pathwise and strong error curves against coupled fine-grid references,
//! convergence-order regression and negativity statistics.

use std::fmt::Write as _;
use std::ops::Range;

use crate::brownian::{sample_increments, sample_lattice, BrownianLattice, StreamKey};
use crate::error::{Error, Result};
use crate::estimators::OverflowPolicy;
use crate::models::{GbmParams, Model};
use crate::oracles::gbm_exact_path;
use crate::parallel::map_indexed;
use crate::real::Real;
use crate::schemes::{SamplePath, Stepper, StepperConfig};

/// Least squares fit of `log error = intercept + slope · log Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub stderr: f64,
}

/// Empirical convergence order from `(Δ, error)` pairs.
pub fn fit_order(points: &[(f64, f64)]) -> Result<Regression> {
    if points.len() < 2 {
        return Err(Error::param("points", "need at least two (delta, error) pairs"));
    }
    if let Some(&(d, e)) = points.iter().find(|(d, e)| !(*d > 0.0 && *e > 0.0 && d.is_finite() && e.is_finite())) {
        return Err(Error::param("points", format!("nonpositive or non-finite pair ({d}, {e})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("points", "step sizes must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if points.len() > 2 {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(Regression {
        slope,
        intercept,
        stderr,
    })
}

/// What the schemes are compared against.
#[derive(Clone)]
pub enum Reference<T> {
    /// A scheme run on the same lattice at the finest resolution.
    Scheme(StepperConfig<T>),
    /// The exact GBM solution on the same Brownian path.
    GbmExact(GbmParams<T>),
}

impl<T: Real> Reference<T> {
    fn label(&self) -> String {
        match self {
            Reference::Scheme(c) => c.label(),
            Reference::GbmExact(_) => "gbm-exact".into(),
        }
    }
}

/// Grid and sampling setup shared by the error curves.
#[derive(Clone)]
pub struct ErrorStudy<T> {
    pub horizon: T,
    /// Step counts `n`, strictly increasing, each dividing `reference_steps`.
    pub steps: Vec<usize>,
    /// Power of two.
    pub reference_steps: usize,
    pub reference: Reference<T>,
    /// Norm exponent of the strong error.
    pub p: f64,
    pub overflow: OverflowPolicy,
}

impl<T: Real> ErrorStudy<T> {
    pub fn new(horizon: T, steps: Vec<usize>, reference_steps: usize, reference: Reference<T>) -> Self {
        ErrorStudy {
            horizon,
            steps,
            reference_steps,
            reference,
            p: 2.0,
            overflow: OverflowPolicy::Propagate,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) {
            return Err(Error::param("T", "horizon must be positive"));
        }
        if !self.reference_steps.is_power_of_two() {
            return Err(Error::Grid(format!("reference resolution {} is not a power of two", self.reference_steps)));
        }
        if self.steps.is_empty() {
            return Err(Error::Grid("no step sizes given".into()));
        }
        if self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Grid("step sizes must be strictly decreasing".into()));
        }
        if let Some(n) = self.steps.iter().find(|&&n| n == 0 || self.reference_steps % n != 0) {
            return Err(Error::Grid(format!(
                "{n} steps is not a dyadic divisor of the reference resolution {}",
                self.reference_steps
            )));
        }
        if !(self.p >= 1.0) {
            return Err(Error::param("p", "norm exponent must be at least 1"));
        }
        Ok(())
    }

    pub fn stepsizes(&self) -> Vec<f64> {
        let t = self.horizon.to_f64_lossy();
        self.steps.iter().map(|&n| t / n as f64).collect()
    }
}

/// Error curve of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Strictly decreasing.
    pub stepsizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Zero for pathwise curves.
    pub stderrs: Vec<f64>,
    pub n_overflow: Vec<usize>,
    pub p: f64,
    /// Fit over all finite points, if there are at least two.
    pub regression: Option<Regression>,
    /// False when the reference path itself overflowed.
    pub valid: bool,
    pub scheme: String,
    pub model: String,
    pub samples: usize,
    pub reference: String,
}

impl ErrorReport {
    /// Regression restricted to the points with index in `window`.
    pub fn fit_window(&self, window: Range<usize>) -> Result<Regression> {
        let pts: Vec<(f64, f64)> = window.map(|i| (self.stepsizes[i], self.errors[i])).collect();
        fit_order(&pts)
    }

    /// `delta,error,stderr,n_overflow` rows and a trailing regression comment.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,error,stderr,n_overflow\n");
        for i in 0..self.stepsizes.len() {
            let _ = writeln!(
                s,
                "{:.10e},{:.10e},{:.10e},{}",
                self.stepsizes[i], self.errors[i], self.stderrs[i], self.n_overflow[i]
            );
        }
        match self.regression {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "# regression slope={:.6} intercept={:.6} stderr={:.6}",
                    r.slope, r.intercept, r.stderr
                );
            }
            None => s.push_str("# regression unavailable\n"),
        }
        s
    }
}

/// Maximum Euclidean distance over the nodes `path` shares with `reference`.
pub fn max_node_error<T: Real>(path: &SamplePath<T>, reference: &SamplePath<T>) -> Result<T> {
    let (n, nr) = (path.steps(), reference.steps());
    if path.dims() != reference.dims() {
        return Err(Error::Grid("paths have different dimensions".into()));
    }
    if nr % n != 0 || path.grid().horizon() != reference.grid().horizon() {
        return Err(Error::Grid(format!(
            "a {n}-step grid is not a subset of a {nr}-step grid on the same horizon"
        )));
    }
    let r = nr / n;
    let mut worst = T::zero();
    for k in 0..=n {
        let dist = dist(path.state(k), reference.state(k * r));
        if !dist.is_finite() {
            return Ok(T::infinity());
        }
        worst = worst.max(dist);
    }
    Ok(worst)
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (*x - *y) * (*x - *y)).sqrt()
}

/// Reference node values for one lattice, `None` on overflow.
fn reference_nodes<T: Real>(
    study: &ErrorStudy<T>,
    ref_stepper: Option<&Stepper<T>>,
    lattice: &BrownianLattice,
) -> Result<Option<SamplePath<T>>> {
    let path = match (&study.reference, ref_stepper) {
        (Reference::GbmExact(p), _) => gbm_exact_path(p, lattice, study.reference_steps)?,
        (Reference::Scheme(_), Some(s)) => s.simulate(&lattice.increments_at::<T>(study.reference_steps)?)?,
        (Reference::Scheme(_), None) => unreachable!("reference stepper is built up front"),
    };
    Ok(if path.overflowed() { None } else { Some(path) })
}

/// Per-sample max node errors of every scheme at every step count; `∞` marks
/// an overflow of either side.
fn sample_errors<T: Real>(
    steppers: &[Stepper<T>],
    study: &ErrorStudy<T>,
    reference: &SamplePath<T>,
    lattice: &BrownianLattice,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(steppers.len() * study.steps.len());
    let incs = study
        .steps
        .iter()
        .map(|&n| lattice.increments_at::<T>(n))
        .collect::<Result<Vec<_>>>()?;
    for stepper in steppers {
        for (inc, &n) in incs.iter().zip(&study.steps) {
            let r = study.reference_steps / n;
            let mut worst = T::zero();
            let stats = stepper.run(inc, |k, x| {
                let d = dist(x, reference.state(k * r));
                worst = if d.is_finite() { worst.max(d) } else { T::infinity() };
            })?;
            out.push(if stats.overflow_at.is_some() {
                f64::INFINITY
            } else {
                worst.to_f64_lossy()
            });
        }
    }
    Ok(out)
}

fn build_steppers<T: Real>(
    model: &Model<T>,
    configs: &[StepperConfig<T>],
    study: &ErrorStudy<T>,
) -> Result<(Vec<Stepper<T>>, Option<Stepper<T>>)> {
    study.validate()?;
    let steppers = configs
        .iter()
        .map(|c| Stepper::new(c, model))
        .collect::<Result<Vec<_>>>()?;
    let reference = match &study.reference {
        Reference::Scheme(c) => Some(Stepper::new(c, model)?),
        Reference::GbmExact(_) => None,
    };
    if let Some(s) = steppers.first() {
        if let Some(r) = &reference {
            if r.noise_dim() != s.noise_dim() {
                return Err(Error::Grid("reference and scheme need the same noise dimension".into()));
            }
        }
    }
    Ok((steppers, reference))
}

/// Error of each configured scheme along the single Brownian path of `key`.
pub fn pathwise_error_curve<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    study: &ErrorStudy<T>,
    key: StreamKey,
) -> Result<ErrorReport> {
    let (steppers, ref_stepper) = build_steppers(model, std::slice::from_ref(config), study)?;
    let m = steppers[0].noise_dim();
    let lattice = sample_lattice(key, study.horizon.to_f64_lossy(), m, study.reference_steps)?;
    let k = study.steps.len();
    let (errors, valid) = match reference_nodes(study, ref_stepper.as_ref(), &lattice)? {
        Some(reference) => (sample_errors(&steppers, study, &reference, &lattice)?, true),
        None => (vec![f64::INFINITY; k], false),
    };
    let n_overflow = errors.iter().map(|e| usize::from(!e.is_finite())).collect();
    Ok(finish_report(
        model,
        config,
        study,
        errors,
        vec![0.0; k],
        n_overflow,
        1,
        valid,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish_report<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    study: &ErrorStudy<T>,
    errors: Vec<f64>,
    stderrs: Vec<f64>,
    n_overflow: Vec<usize>,
    samples: usize,
    valid: bool,
) -> ErrorReport {
    let stepsizes = study.stepsizes();
    let pts: Vec<(f64, f64)> = stepsizes
        .iter()
        .zip(&errors)
        .filter(|(_, e)| e.is_finite() && **e > 0.0)
        .map(|(d, e)| (*d, *e))
        .collect();
    ErrorReport {
        stepsizes,
        errors,
        stderrs,
        n_overflow,
        p: study.p,
        regression: fit_order(&pts).ok(),
        valid,
        scheme: config.label(),
        model: model.id().as_str().to_string(),
        samples,
        reference: format!("{} at {} steps", study.reference.label(), study.reference_steps),
    }
}

/// `((1/N) Σ_i max_k |X*⁽ⁱ⁾_{t_k} − X̄⁽ⁱ⁾_{t_k}|ᵖ)^{1/p}` over `samples`
/// independent lattices.
pub fn strong_error_curve<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    study: &ErrorStudy<T>,
    samples: usize,
    key: StreamKey,
) -> Result<ErrorReport> {
    strong_error_curves(model, std::slice::from_ref(config), study, samples, key).map(|mut v| v.remove(0))
}

/// Same as [`strong_error_curve`] for several schemes sharing the lattices
/// and the reference paths.
pub fn strong_error_curves<T: Real>(
    model: &Model<T>,
    configs: &[StepperConfig<T>],
    study: &ErrorStudy<T>,
    samples: usize,
    key: StreamKey,
) -> Result<Vec<ErrorReport>> {
    if samples < 2 {
        return Err(Error::param("N", "strong errors need at least two samples"));
    }
    if configs.is_empty() {
        return Err(Error::param("schemes", "no scheme given"));
    }
    let (steppers, ref_stepper) = build_steppers(model, configs, study)?;
    let m = steppers[0].noise_dim();
    let k = study.steps.len();
    let width = configs.len() * k;
    let horizon = study.horizon.to_f64_lossy();
    let per_sample = map_indexed(samples, |i| {
        let lattice = sample_lattice(key.with_sample(key.sample_index.wrapping_add(i as u64)), horizon, m, study.reference_steps)?;
        match reference_nodes(study, ref_stepper.as_ref(), &lattice)? {
            Some(reference) => sample_errors(&steppers, study, &reference, &lattice),
            None => Ok(vec![f64::INFINITY; width]),
        }
    })?;

    let p = study.p;
    let mut reports = Vec::with_capacity(configs.len());
    for (c, config) in configs.iter().enumerate() {
        let mut errors = Vec::with_capacity(k);
        let mut stderrs = Vec::with_capacity(k);
        let mut n_overflow = Vec::with_capacity(k);
        for j in 0..k {
            let col = c * k + j;
            let overflow = per_sample.iter().filter(|s| !s[col].is_finite()).count();
            let kept: Vec<f64> = per_sample
                .iter()
                .map(|s| s[col])
                .filter(|e| study.overflow == OverflowPolicy::Propagate || e.is_finite())
                .map(|e| e.powf(p))
                .collect();
            n_overflow.push(overflow);
            if kept.is_empty() || kept.iter().any(|v| !v.is_finite()) {
                errors.push(f64::INFINITY);
                stderrs.push(f64::NAN);
                continue;
            }
            let n = kept.len() as f64;
            let mean = kept.iter().sum::<f64>() / n;
            let var = kept.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
            let err = mean.powf(1.0 / p);
            // delta method for g(m) = m^{1/p}
            let se = if mean > 0.0 {
                err / (p * mean) * (var / n).sqrt()
            } else {
                0.0
            };
            errors.push(err);
            stderrs.push(se);
        }
        reports.push(finish_report(model, config, study, errors, stderrs, n_overflow, samples, true));
    }
    Ok(reports)
}

/// Negative excursions of a scheme that may leave `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityStats {
    pub avg_negative_steps: f64,
    pub negative_path_frequency: f64,
    pub samples: usize,
    pub steps: usize,
    pub scheme: String,
    pub model: String,
}

impl NegativityStats {
    pub fn to_csv(&self) -> String {
        format!(
            "scheme,model,n,N,avg_negative_steps,negative_path_frequency\n{},{},{},{},{:.6},{:.6}\n",
            self.scheme, self.model, self.steps, self.samples, self.avg_negative_steps, self.negative_path_frequency
        )
    }
}

/// Counts steps with a negative constrained coordinate over `samples` paths
/// of `n` steps on `[0, horizon]`.
pub fn negativity_stats<T: Real>(
    model: &Model<T>,
    config: &StepperConfig<T>,
    horizon: T,
    n: usize,
    samples: usize,
    key: StreamKey,
) -> Result<NegativityStats> {
    if samples == 0 {
        return Err(Error::param("N", "need at least one sample"));
    }
    let stepper = Stepper::new(config, model)?;
    let m = stepper.noise_dim();
    let counts = map_indexed(samples, |i| {
        let inc = sample_increments::<T>(key.with_sample(key.sample_index.wrapping_add(i as u64)), horizon, m, n)?;
        Ok(stepper.run(&inc, |_, _| {})?.negative_steps)
    })?;
    let total: usize = counts.iter().sum();
    let hit = counts.iter().filter(|&&c| c > 0).count();
    Ok(NegativityStats {
        avg_negative_steps: total as f64 / samples as f64,
        negative_path_frequency: hit as f64 / samples as f64,
        samples,
        steps: n,
        scheme: config.label(),
        model: model.id().as_str().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..8).map(|j| {
            let d = 2f64.powi(-j);
            (d, 3.0 * d.sqrt())
        }).collect();
        let r = fit_order(&pts).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        assert!(r.stderr < 1e-12);
    }

    #[test]
    fn constant_error_has_zero_slope() {
        let r = fit_order(&[(0.1, 2.0), (0.01, 2.0), (0.001, 2.0)]).unwrap();
        assert!(r.slope.abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_errors() {
        assert!(fit_order(&[(0.1, 0.0), (0.01, 1.0)]).is_err());
        assert!(fit_order(&[(0.1, 1.0)]).is_err());
    }
}
