use crate::error::{Error, Result};
use crate::models::{lamperti_cir, Model, ModelParams};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Use a registered closed form where one exists, Newton otherwise.
    ClosedForm,
    /// Always iterate, even when a closed form is available.
    NewtonBisection,
}

/// Settings of the scalar implicit solver.
///
/// Convergence is declared once `|x − Δ a(x) − rhs| ≤ abs_tol · max(1, |x|)`
/// or the bracket has shrunk to adjacent floating point numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    pub mode: SolverMode,
    pub abs_tol: T,
    pub max_iter: usize,
    /// Growth factor of the bracket search.
    pub bracket_expansion: T,
    pub max_bracket_steps: usize,
    /// One-sided and two-sided Lipschitz constants `(L₁, L₂)` of the drift.
    /// When given, step sizes beyond `1 / max{1 + 2L₁, 4L₂}` are rejected.
    pub lipschitz: Option<(T, T)>,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        SolverSettings {
            mode: SolverMode::ClosedForm,
            abs_tol: T::lit(1e-12),
            max_iter: 100,
            bracket_expansion: T::lit(2.0),
            max_bracket_steps: 400,
            lipschitz: None,
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn newton() -> Self {
        SolverSettings {
            mode: SolverMode::NewtonBisection,
            ..Self::default()
        }
    }

    /// Largest admissible step `Δ*`, if Lipschitz constants are known.
    pub fn max_step(&self) -> Option<T> {
        self.lipschitz.map(|(l1, l2)| {
            let two = T::lit(2.0);
            T::one() / (T::one() + two * l1).max(T::lit(4.0) * l2)
        })
    }
}

/// Solves `x − Δ a(x) = rhs` for a scalar model on the domain its
/// coefficients may be evaluated on.
///
/// `guess` seeds the iteration; the previous state is a good choice.
pub fn solve_drift_implicit<T: Real>(
    model: &Model<T>,
    rhs: T,
    dt: T,
    guess: T,
    settings: &SolverSettings<T>,
) -> Result<T> {
    if model.dim() != 1 {
        return Err(Error::Unsupported("implicit solves are implemented for scalar models".into()));
    }
    if let Some(max) = settings.max_step() {
        if dt >= max {
            return Err(Error::Grid(format!("step {dt} exceeds the admissible implicit step {max}")));
        }
    }
    if settings.mode == SolverMode::ClosedForm {
        if let Some(x) = closed_form(model, rhs, dt) {
            return if model.domain().contains(&[x]) || x.is_nan() {
                Ok(x)
            } else {
                Err(Error::SolverFailure {
                    iterations: 0,
                    reason: format!("the unique root {x} lies outside the domain"),
                })
            };
        }
    }
    let positive = model.domain().is_constrained(0);
    let drift = |x: T| {
        let mut a = [T::zero()];
        model.drift(&[x], &mut a);
        a[0]
    };
    let residual = |x: T| x - dt * drift(x) - rhs;
    let slope = |x: T| model.drift_derivative(x).map(|d| T::one() - dt * d);
    solve_scalar(residual, slope, guess, positive, settings)
}

fn closed_form<T: Real>(model: &Model<T>, rhs: T, dt: T) -> Option<T> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    match *model.params() {
        // affine drift: the continuation off the domain is the same formula
        ModelParams::Cir(p) => Some((rhs + p.kappa * p.lambda * dt) / (T::one() + p.kappa * dt)),
        ModelParams::Gbm(p) if rhs > T::zero() && p.mu * dt < T::one() => Some(rhs / (T::one() - p.mu * dt)),
        ModelParams::Cev(p) if rhs > T::zero() && p.mu * dt < T::one() => Some(rhs / (T::one() - p.mu * dt)),
        ModelParams::CirLamperti(p) => {
            let l = lamperti_cir(&p);
            let c = T::one() - l.beta * dt;
            if l.alpha <= T::zero() {
                return None;
            }
            Some((rhs + (rhs * rhs + four * c * l.alpha * dt).sqrt()) / (two * c))
        }
        ModelParams::ThreeHalves(p) if p.price.is_none() && model.extension().is_none() && rhs > T::zero() => {
            let a = dt * p.c1;
            let b = T::one() - dt * p.c1 * p.c2;
            // positive root, written to avoid cancellation when b > 0
            let disc = (b * b + four * a * rhs).sqrt();
            Some(if b > T::zero() {
                two * rhs / (b + disc)
            } else {
                (disc - b) / (two * a)
            })
        }
        _ => None,
    }
}

/// Safeguarded Newton iteration on a bracket found by geometric search.
pub(crate) fn solve_scalar<T: Real>(
    residual: impl Fn(T) -> T,
    slope: impl Fn(T) -> Option<T>,
    guess: T,
    positive: bool,
    settings: &SolverSettings<T>,
) -> Result<T> {
    let fail = |iterations: usize, reason: String| Error::SolverFailure { iterations, reason };
    let tol = |x: T| settings.abs_tol * x.abs().max(T::one());
    // one more Newton step once converged, kept only if it lowers the residual
    let polish = |x: T, fx: T| {
        slope(x)
            .filter(|s| s.is_finite() && *s != T::zero())
            .map(|s| x - fx / s)
            .filter(|xp| xp.is_finite() && (!positive || *xp > T::zero()))
            .filter(|xp| residual(*xp).abs() < fx.abs())
            .unwrap_or(x)
    };
    let x0 = if guess.is_finite() && (!positive || guess > T::zero()) {
        guess
    } else {
        T::one()
    };
    let f0 = residual(x0);
    if !f0.is_finite() {
        return Err(fail(0, format!("residual not finite at the starting point {x0}")));
    }
    if f0.abs() <= tol(x0) {
        return Ok(polish(x0, f0));
    }

    let width = x0.abs().max(T::one());
    let (mut lo, mut hi) = (x0, x0);
    let mut found = false;
    let mut step = width;
    for _ in 0..settings.max_bracket_steps {
        if f0 > T::zero() {
            lo = if positive { lo / settings.bracket_expansion } else { x0 - step };
            let f = residual(lo);
            if f.is_finite() && f.abs() <= tol(lo) {
                return Ok(polish(lo, f));
            }
            if f < T::zero() {
                found = true;
                break;
            }
            hi = lo;
        } else {
            hi = x0 + step;
            let f = residual(hi);
            if f.is_finite() && f.abs() <= tol(hi) {
                return Ok(polish(hi, f));
            }
            if f > T::zero() {
                found = true;
                break;
            }
            lo = hi;
        }
        step = step * settings.bracket_expansion;
    }
    if !found {
        return Err(fail(
            0,
            format!(
                "no sign change of the residual found in {} after {} expansions",
                if positive { "(0, inf)" } else { "the real line" },
                settings.max_bracket_steps
            ),
        ));
    }

    let half = T::lit(0.5);
    let mut x = if f0 > T::zero() { hi } else { lo };
    for _ in 0..settings.max_iter {
        let fx = residual(x);
        let newton = slope(x)
            .filter(|s| s.is_finite() && *s != T::zero())
            .map(|s| x - fx / s)
            .filter(|xn| xn.is_finite() && *xn > lo && *xn < hi);
        let xn = newton.unwrap_or_else(|| lo + half * (hi - lo));
        let fn_ = residual(xn);
        if fn_.abs() <= tol(xn) {
            return Ok(polish(xn, fn_));
        }
        if fn_ < T::zero() {
            lo = xn;
        } else {
            hi = xn;
        }
        let mid = lo + half * (hi - lo);
        if mid <= lo || mid >= hi {
            // bracket exhausted at machine precision
            return Ok(if residual(lo).abs() <= residual(hi).abs() { lo } else { hi });
        }
        x = xn;
    }
    Err(fail(settings.max_iter, "Newton/bisection did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, AitSahaliaParams, CirParams};

    #[test]
    fn newton_agrees_with_closed_form() {
        let m = build_model(ModelParams::Cir(CirParams::new(2.0, 0.09, 1.0, 0.09))).unwrap();
        for rhs in [0.01, 0.3, 2.0] {
            let a: f64 = solve_drift_implicit(&m, rhs, 0.1, rhs, &SolverSettings::default()).unwrap();
            let b = solve_drift_implicit(&m, rhs, 0.1, rhs, &SolverSettings::newton()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ait_sahalia_root_is_positive() {
        let m = build_model(ModelParams::AitSahalia(AitSahaliaParams {
            alpha_m1: 1.0,
            alpha_0: 1.0,
            alpha_1: 1.0,
            alpha_2: 1.0,
            sigma: 1.0,
            r: 2.0,
            rho: 1.4,
            x0: 1.0,
        }))
        .unwrap();
        for rhs in [-5.0, 0.0, 0.5, 40.0] {
            let x: f64 = solve_drift_implicit(&m, rhs, 0.01, 1.0, &SolverSettings::default()).unwrap();
            let mut a = [0.0];
            m.drift(&[x], &mut a);
            assert!(x > 0.0);
            assert!((x - 0.01 * a[0] - rhs).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn step_size_guard() {
        let m = build_model(ModelParams::Cir(CirParams::new(2.0, 0.09, 1.0, 0.09))).unwrap();
        let s = SolverSettings {
            lipschitz: Some((1.0, 1.0)),
            ..SolverSettings::default()
        };
        assert!(solve_drift_implicit(&m, 0.1, 0.5, 0.1, &s).is_err());
        assert!(solve_drift_implicit(&m, 0.1, 0.2, 0.1, &s).is_ok());
    }
}
