//! One-step maps. Each takes the state at `t_k`, the step `Δ` and the
//! Brownian increment over `[t_k, t_{k+1}]`.

use super::extension::ProjectionMap;
use super::solver::{solve_drift_implicit, SolverSettings};
use crate::error::{Error, Result};
use crate::models::{lamperti_cir, CirParams, HestonParams, LampertiCir, Model, MAX_DIM};
use crate::real::Real;

const BUF: usize = MAX_DIM * MAX_DIM;

/// `x + a(x)Δ + Σ_j b_j(x) ΔW_j`.
pub fn step_explicit_euler<T: Real>(model: &Model<T>, x: &[T], dt: T, dw: &[T], out: &mut [T]) {
    let d = model.dim();
    let m = model.noise_dim();
    let mut a = [T::zero(); MAX_DIM];
    let mut b = [T::zero(); BUF];
    model.drift(x, &mut a);
    model.diffusion(x, &mut b);
    for i in 0..d {
        let mut v = x[i] + a[i] * dt;
        for j in 0..m {
            v = v + b[j * d + i] * dw[j];
        }
        out[i] = v;
    }
}

/// Scalar Milstein: Euler plus `½ b b' (ΔW² − Δ)`.
pub fn step_milstein_scalar<T: Real>(model: &Model<T>, x: T, dt: T, dw: T) -> T {
    debug_assert_eq!(model.noise_dim(), 1);
    let (mut a, mut b, mut db) = ([T::zero()], [T::zero()], [T::zero()]);
    model.drift(&[x], &mut a);
    model.diffusion(&[x], &mut b);
    model.diffusion_jacobian(&[x], &mut db);
    x + a[0] * dt + b[0] * dw + T::lit(0.5) * b[0] * db[0] * (dw * dw - dt)
}

/// Euler step followed by `ψ` whenever the result leaves the open domain.
pub fn step_reflected<T: Real>(
    model: &Model<T>,
    projection: &ProjectionMap<T>,
    x: &[T],
    dt: T,
    dw: &[T],
    out: &mut [T],
) {
    step_explicit_euler(model, x, dt, dw, out);
    if !model.base_domain().contains(&out[..model.dim()]) {
        projection.project(model, out);
    }
}

/// `x + a(x)Δ / (1 + ‖a(x)‖Δ) + Σ_j b_j(x) ΔW_j`.
pub fn step_tamed_euler<T: Real>(model: &Model<T>, x: &[T], dt: T, dw: &[T], out: &mut [T]) {
    let d = model.dim();
    let m = model.noise_dim();
    let mut a = [T::zero(); MAX_DIM];
    let mut b = [T::zero(); BUF];
    model.drift(x, &mut a);
    model.diffusion(x, &mut b);
    let norm = a[..d].iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
    let tame = T::one() / (T::one() + norm * dt);
    for i in 0..d {
        let mut v = x[i] + a[i] * dt * tame;
        for j in 0..m {
            v = v + b[j * d + i] * dw[j];
        }
        out[i] = v;
    }
}

/// Split-step backward Euler: `x* = x + a(x*)Δ`, then `x' = x* + b(x*)ΔW`.
pub fn step_split_step_backward<T: Real>(
    model: &Model<T>,
    x: T,
    dt: T,
    dw: T,
    settings: &SolverSettings<T>,
) -> Result<T> {
    let star = solve_drift_implicit(model, x, dt, x, settings)?;
    let mut b = [T::zero()];
    model.diffusion(&[star], &mut b);
    Ok(star + b[0] * dw)
}

/// Drift-implicit Euler: `x' = x + a(x')Δ + b(x)ΔW`.
pub fn step_backward_euler<T: Real>(
    model: &Model<T>,
    x: T,
    dt: T,
    dw: T,
    settings: &SolverSettings<T>,
) -> Result<T> {
    let mut b = [T::zero()];
    model.diffusion(&[x], &mut b);
    solve_drift_implicit(model, x + b[0] * dw, dt, x, settings)
}

/// Drift-implicit Euler for `Y = √X`, solved in closed form:
/// `y' = A/(2(1−βΔ)) + √(A²/(4(1−βΔ)²) + αΔ/(1−βΔ))` with `A = y + γΔW`.
/// Requires `α > 0`; the result is then strictly positive.
pub fn step_cir_implicit_sqrt<T: Real>(l: &LampertiCir<T>, y: T, dt: T, dw: T) -> T {
    let c = T::one() - l.beta * dt;
    let half_a = (y + l.gamma * dw) / (T::lit(2.0) * c);
    half_a + (half_a * half_a + l.alpha * dt / c).sqrt()
}

/// Variant for `α ≤ 0` operating on `X`: `y = √x⁺`, the discriminant is cut
/// at zero and `x' = y'²`.
pub fn step_cir_implicit_sqrt_truncated<T: Real>(l: &LampertiCir<T>, x: T, dt: T, dw: T) -> T {
    let c = T::one() - l.beta * dt;
    let half_a = (x.pos().sqrt() + l.gamma * dw) / (T::lit(2.0) * c);
    let y = half_a + (half_a * half_a + l.alpha * dt / c).pos().sqrt();
    y * y
}

/// Drift-implicit Milstein for CIR:
/// `z' = [(√z + θΔW/2)² + (κλ − θ²/4)Δ] / (1 + κΔ)`.
pub fn step_cir_implicit_milstein<T: Real>(p: &CirParams<T>, z: T, dt: T, dw: T) -> Result<T> {
    if z < T::zero() {
        return Err(Error::NegativeSqrtArgument { value: z.to_f64_lossy() });
    }
    Ok(implicit_milstein(p, z.sqrt(), dt, dw))
}

/// Same map with `√z` replaced by `√z⁺`; the result may be negative when
/// `4κλ < θ²`.
pub fn step_cir_implicit_milstein_truncated<T: Real>(p: &CirParams<T>, z: T, dt: T, dw: T) -> T {
    implicit_milstein(p, z.pos().sqrt(), dt, dw)
}

fn implicit_milstein<T: Real>(p: &CirParams<T>, sz: T, dt: T, dw: T) -> T {
    let half = T::lit(0.5);
    let r = sz + half * p.theta * dw;
    (r * r + (p.kappa * p.lambda - T::lit(0.25) * p.theta * p.theta) * dt) / (T::one() + p.kappa * dt)
}

/// Log-price Euler step coupled with the square-root variance step.
/// The state is `(h, y) = (ln S, √V)`; `dw[1]` drives the variance.
pub fn step_log_heston<T: Real>(p: &HestonParams<T>, h: T, y: T, dt: T, dw: [T; 2]) -> (T, T) {
    let l = lamperti_cir(&p.variance());
    let c = (T::one() - p.rho * p.rho).sqrt();
    let h1 = h + (p.mu - T::lit(0.5) * y * y) * dt + y * (c * dw[0] + p.rho * dw[1]);
    (h1, step_cir_implicit_sqrt(&l, y, dt, dw[1]))
}
