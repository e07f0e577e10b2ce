//! SDE models with analytic coefficients, domains and parameter diagnostics.
//!
//! Each [`Model`] evaluates `a(x)`, the diffusion columns `b_j(x)` and their
//! Jacobians for states of dimension at most [`MAX_DIM`]. Coefficients are
//! only defined on the closure of the model's domain; schemes that can leave
//! it must run on a model returned by
//! [`apply_extension`](crate::schemes::apply_extension).

mod diagnostics;
mod params;
mod presets;

use std::sync::Arc;

pub use diagnostics::{
    ait_sahalia_wellposed, bbd_threshold, feller_ratio, heston_moment_bound, lamperti_cir, BbdThreshold,
    Wellposedness,
};
pub use params::{
    AitSahaliaParams, CevParams, CirParams, CubicToyParams, GbmParams, HestonParams, LampertiCir, ModelParams,
    PriceLayer, ThreeHalvesParams,
};
pub use presets::{preset, Preset, PRESET_NAMES};

use crate::error::Result;
use crate::real::Real;
use crate::schemes::AuxiliaryExtension;

/// Largest state (and noise) dimension of any model in the crate.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Cir,
    Cev,
    Gbm,
    Heston,
    LogHeston,
    AitSahalia,
    ThreeHalves,
    CubicToy,
    CirLamperti,
}

impl ModelId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Cir => "cir",
            ModelId::Cev => "cev",
            ModelId::Gbm => "gbm",
            ModelId::Heston => "heston",
            ModelId::LogHeston => "log-heston",
            ModelId::AitSahalia => "ait-sahalia",
            ModelId::ThreeHalves => "three-halves",
            ModelId::CubicToy => "cubic-toy",
            ModelId::CirLamperti => "cir-lamperti",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    FullSpace,
    PositiveHalfLine,
    PositiveOrthant(usize),
    /// Some coordinates free, some constrained to `(0, ∞)`.
    Product,
}

/// Open domain `D`: a product of `ℝ` and `(0, ∞)` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Domain {
    dims: usize,
    positive: [bool; MAX_DIM],
}

impl Domain {
    pub fn full_space(dims: usize) -> Self {
        Domain {
            dims,
            positive: [false; MAX_DIM],
        }
    }

    pub fn positive_half_line() -> Self {
        Domain {
            dims: 1,
            positive: [true, false],
        }
    }

    pub fn positive_orthant(dims: usize) -> Self {
        let mut positive = [false; MAX_DIM];
        positive[..dims].iter_mut().for_each(|p| *p = true);
        Domain { dims, positive }
    }

    pub fn product(positive: [bool; MAX_DIM], dims: usize) -> Self {
        Domain { dims, positive }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn is_constrained(&self, coord: usize) -> bool {
        self.positive[coord]
    }

    pub fn kind(&self) -> DomainKind {
        let n = self.positive[..self.dims].iter().filter(|p| **p).count();
        match (n, self.dims) {
            (0, _) => DomainKind::FullSpace,
            (1, 1) => DomainKind::PositiveHalfLine,
            (n, d) if n == d => DomainKind::PositiveOrthant(d),
            _ => DomainKind::Product,
        }
    }

    pub fn contains<T: Real>(&self, x: &[T]) -> bool {
        (0..self.dims).all(|i| !self.positive[i] || x[i] > T::zero())
    }

    pub fn contains_closure<T: Real>(&self, x: &[T]) -> bool {
        (0..self.dims).all(|i| !self.positive[i] || x[i] >= T::zero())
    }

    /// Signed distance to `∂D`: positive inside, negative outside the
    /// closure, `+∞` for the full space.
    pub fn boundary_distance<T: Real>(&self, x: &[T]) -> T {
        if self.kind() == DomainKind::FullSpace {
            return T::infinity();
        }
        if self.contains_closure(x) {
            (0..self.dims)
                .filter(|&i| self.positive[i])
                .map(|i| x[i])
                .fold(T::infinity(), T::min)
        } else {
            let s = (0..self.dims)
                .filter(|&i| self.positive[i] && x[i] < T::zero())
                .map(|i| x[i] * x[i])
                .fold(T::zero(), |a, b| a + b);
            -s.sqrt()
        }
    }
}

/// A validated SDE `dX = a(X) dt + Σ_j b_j(X) dW^(j)`.
///
/// Diffusion values are laid out column-major: `out[j * d + i]` is component
/// `i` of `b_j`. Jacobians store `∂b_{i,j}/∂x_l` at `out[(j * d + i) * d + l]`.
#[derive(Clone)]
pub struct Model<T: Real> {
    params: ModelParams<T>,
    extension: Option<Arc<AuxiliaryExtension<T>>>,
}

impl<T: Real> std::fmt::Debug for Model<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("params", &self.params)
            .field("extension", &self.extension.as_ref().map(|e| e.name().to_string()))
            .finish()
    }
}

/// Validates `params` and builds the corresponding model.
pub fn build_model<T: Real>(params: ModelParams<T>) -> Result<Model<T>> {
    params.validate()?;
    Ok(Model {
        params,
        extension: None,
    })
}

impl<T: Real> Model<T> {
    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn id(&self) -> ModelId {
        match self.params {
            ModelParams::Cir(_) => ModelId::Cir,
            ModelParams::Cev(_) => ModelId::Cev,
            ModelParams::Gbm(_) => ModelId::Gbm,
            ModelParams::Heston(_) => ModelId::Heston,
            ModelParams::LogHeston(_) => ModelId::LogHeston,
            ModelParams::AitSahalia(_) => ModelId::AitSahalia,
            ModelParams::ThreeHalves(_) => ModelId::ThreeHalves,
            ModelParams::CubicToy(_) => ModelId::CubicToy,
            ModelParams::CirLamperti(_) => ModelId::CirLamperti,
        }
    }

    pub fn extension(&self) -> Option<&AuxiliaryExtension<T>> {
        self.extension.as_deref()
    }

    pub(crate) fn with_extension(&self, ext: AuxiliaryExtension<T>) -> Model<T> {
        Model {
            params: self.params,
            extension: Some(Arc::new(ext)),
        }
    }

    /// Model without any auxiliary extension.
    pub fn base(&self) -> Model<T> {
        Model {
            params: self.params,
            extension: None,
        }
    }

    pub fn dim(&self) -> usize {
        match self.params {
            ModelParams::Heston(_) | ModelParams::LogHeston(_) => 2,
            ModelParams::ThreeHalves(p) if p.price.is_some() => 2,
            _ => 1,
        }
    }

    pub fn noise_dim(&self) -> usize {
        self.dim()
    }

    /// Domain of the original SDE.
    pub fn base_domain(&self) -> Domain {
        match self.params {
            ModelParams::CubicToy(_) => Domain::full_space(1),
            ModelParams::Heston(_) => Domain::positive_orthant(2),
            ModelParams::ThreeHalves(p) if p.price.is_some() => Domain::positive_orthant(2),
            ModelParams::LogHeston(_) => Domain::product([false, true], 2),
            _ => Domain::positive_half_line(),
        }
    }

    /// Domain on which the coefficients may be evaluated: the full space once
    /// an extension is attached.
    pub fn domain(&self) -> Domain {
        if self.extension.is_some() {
            Domain::full_space(self.dim())
        } else {
            self.base_domain()
        }
    }

    /// Whether the raw coefficients stay finite off `closure(D)`.
    pub fn defined_off_domain(&self) -> bool {
        self.extension.is_some()
            || matches!(
                self.params,
                ModelParams::Gbm(_) | ModelParams::CubicToy(_) | ModelParams::CirLamperti(_)
            )
    }

    pub fn initial_state(&self) -> [T; MAX_DIM] {
        match self.params {
            ModelParams::Cir(p) => [p.x0, T::zero()],
            ModelParams::CirLamperti(p) => [p.x0.sqrt(), T::zero()],
            ModelParams::Cev(p) => [p.s0, T::zero()],
            ModelParams::Gbm(p) => [p.x0, T::zero()],
            ModelParams::Heston(p) => [p.s0, p.v0],
            ModelParams::LogHeston(p) => [p.s0.ln(), p.v0.sqrt()],
            ModelParams::AitSahalia(p) => [p.x0, T::zero()],
            ModelParams::ThreeHalves(p) => match p.price {
                Some(layer) => [layer.s0, p.v0],
                None => [p.v0, T::zero()],
            },
            ModelParams::CubicToy(p) => [p.x0, T::zero()],
        }
    }

    /// The quantity payoffs are written on: the (exponentiated) asset price
    /// for two-dimensional models, the state itself otherwise.
    pub fn observable(&self, x: &[T]) -> T {
        match self.params {
            ModelParams::LogHeston(_) => x[0].exp(),
            _ => x[0],
        }
    }

    fn off_base_domain(&self, x: &[T]) -> Option<&AuxiliaryExtension<T>> {
        match &self.extension {
            Some(ext) if !self.base_domain().contains(x) => Some(ext),
            _ => None,
        }
    }

    pub fn drift(&self, x: &[T], out: &mut [T]) {
        if let Some(ext) = self.off_base_domain(x) {
            return ext.eval_drift(self, x, out);
        }
        self.raw_drift(x, out)
    }

    pub fn diffusion(&self, x: &[T], out: &mut [T]) {
        if let Some(ext) = self.off_base_domain(x) {
            return ext.eval_diffusion(self, x, out);
        }
        self.raw_diffusion(x, out)
    }

    pub fn diffusion_jacobian(&self, x: &[T], out: &mut [T]) {
        if let Some(ext) = self.off_base_domain(x) {
            if self.base_domain().boundary_distance(x) == T::zero() {
                // on ∂D: one-sided limit from D, zero where it diverges
                self.raw_diffusion_jacobian(x, out);
                out.iter_mut().for_each(|v| {
                    if !v.is_finite() {
                        *v = T::zero()
                    }
                });
                return;
            }
            return ext.eval_diffusion_jacobian(self, x, out);
        }
        self.raw_diffusion_jacobian(x, out)
    }

    /// `a'(x)` for scalar models, used by the Newton solver.
    pub fn drift_derivative(&self, x: T) -> Option<T> {
        let one = T::one();
        Some(match self.params {
            ModelParams::Cir(p) => -p.kappa,
            ModelParams::Cev(p) => p.mu,
            ModelParams::Gbm(p) => p.mu,
            ModelParams::AitSahalia(p) => {
                -p.alpha_m1 / (x * x) + p.alpha_1 - p.alpha_2 * p.r * x.powf(p.r - one)
            }
            ModelParams::ThreeHalves(p) if p.price.is_none() => p.c1 * p.c2 - T::lit(2.0) * p.c1 * x,
            ModelParams::CubicToy(_) => -T::lit(3.0) * x * x,
            ModelParams::CirLamperti(p) => {
                let l = lamperti_cir(&p);
                -l.alpha / (x * x) + l.beta
            }
            _ => return None,
        })
    }

    fn raw_drift(&self, x: &[T], out: &mut [T]) {
        let half = T::lit(0.5);
        match self.params {
            ModelParams::Cir(p) => out[0] = p.kappa * (p.lambda - x[0]),
            ModelParams::Cev(p) => out[0] = p.mu * x[0],
            ModelParams::Gbm(p) => out[0] = p.mu * x[0],
            ModelParams::AitSahalia(p) => {
                let v = x[0];
                out[0] = p.alpha_m1 / v - p.alpha_0 + p.alpha_1 * v - p.alpha_2 * v.powf(p.r)
            }
            ModelParams::ThreeHalves(p) => match p.price {
                None => out[0] = p.c1 * x[0] * (p.c2 - x[0]),
                Some(layer) => {
                    out[0] = layer.mu * x[0];
                    out[1] = p.c1 * x[1] * (p.c2 - x[1]);
                }
            },
            ModelParams::CubicToy(_) => out[0] = -x[0] * x[0] * x[0],
            ModelParams::CirLamperti(p) => {
                let l = lamperti_cir(&p);
                out[0] = l.alpha / x[0] + l.beta * x[0]
            }
            ModelParams::Heston(p) => {
                out[0] = p.mu * x[0];
                out[1] = p.kappa * (p.lambda - x[1]);
            }
            ModelParams::LogHeston(p) => {
                let l = lamperti_cir(&p.variance());
                let y = x[1];
                out[0] = p.mu - half * y * y;
                out[1] = l.alpha / y + l.beta * y;
            }
        }
    }

    fn raw_diffusion(&self, x: &[T], out: &mut [T]) {
        match self.params {
            ModelParams::Cir(p) => out[0] = p.theta * x[0].sqrt(),
            ModelParams::Cev(p) => out[0] = p.sigma * x[0].powf(p.gamma),
            ModelParams::Gbm(p) => out[0] = p.sigma * x[0],
            ModelParams::AitSahalia(p) => out[0] = p.sigma * x[0].powf(p.rho),
            ModelParams::ThreeHalves(p) => match p.price {
                None => out[0] = p.c3 * x[0] * x[0].sqrt(),
                Some(layer) => {
                    let (s, v) = (x[0], x[1]);
                    let vol = v.sqrt() * s;
                    out[0] = vol * (T::one() - layer.rho * layer.rho).sqrt();
                    out[1] = T::zero();
                    out[2] = vol * layer.rho;
                    out[3] = p.c3 * v * v.sqrt();
                }
            },
            ModelParams::CubicToy(p) => out[0] = p.sigma,
            ModelParams::CirLamperti(p) => out[0] = T::lit(0.5) * p.theta,
            ModelParams::Heston(p) => {
                let (s, v) = (x[0], x[1]);
                let sv = v.sqrt();
                out[0] = sv * s * (T::one() - p.rho * p.rho).sqrt();
                out[1] = T::zero();
                out[2] = sv * s * p.rho;
                out[3] = p.theta * sv;
            }
            ModelParams::LogHeston(p) => {
                let y = x[1];
                out[0] = y * (T::one() - p.rho * p.rho).sqrt();
                out[1] = T::zero();
                out[2] = y * p.rho;
                out[3] = T::lit(0.5) * p.theta;
            }
        }
    }

    fn raw_diffusion_jacobian(&self, x: &[T], out: &mut [T]) {
        let half = T::lit(0.5);
        match self.params {
            ModelParams::Cir(p) => out[0] = half * p.theta / x[0].sqrt(),
            ModelParams::Cev(p) => out[0] = p.sigma * p.gamma * x[0].powf(p.gamma - T::one()),
            ModelParams::Gbm(p) => out[0] = p.sigma,
            ModelParams::AitSahalia(p) => out[0] = p.sigma * p.rho * x[0].powf(p.rho - T::one()),
            ModelParams::CubicToy(_) | ModelParams::CirLamperti(_) => out[0] = T::zero(),
            ModelParams::ThreeHalves(p) => match p.price {
                None => out[0] = T::lit(1.5) * p.c3 * x[0].sqrt(),
                Some(layer) => {
                    let (s, v) = (x[0], x[1]);
                    let sv = v.sqrt();
                    let c = (T::one() - layer.rho * layer.rho).sqrt();
                    out.iter_mut().take(8).for_each(|o| *o = T::zero());
                    // b_1 = (√v s c, 0)
                    out[0] = sv * c;
                    out[1] = half * s * c / sv;
                    // b_2 = (√v s ρ, c₃ v^{3/2})
                    out[4] = sv * layer.rho;
                    out[5] = half * s * layer.rho / sv;
                    out[7] = T::lit(1.5) * p.c3 * sv;
                }
            },
            ModelParams::Heston(p) => {
                let (s, v) = (x[0], x[1]);
                let sv = v.sqrt();
                let c = (T::one() - p.rho * p.rho).sqrt();
                out.iter_mut().take(8).for_each(|o| *o = T::zero());
                out[0] = sv * c;
                out[1] = half * s * c / sv;
                out[4] = sv * p.rho;
                out[5] = half * s * p.rho / sv;
                out[7] = half * p.theta / sv;
            }
            ModelParams::LogHeston(p) => {
                out.iter_mut().take(8).for_each(|o| *o = T::zero());
                out[1] = (T::one() - p.rho * p.rho).sqrt();
                out[5] = p.rho;
            }
        }
    }

    /// Natural continuation of the drift formula off the domain, used by the
    /// named extensions. `None` where the drift is singular on `∂D`.
    pub(crate) fn drift_continuation(&self, x: &[T], out: &mut [T]) -> bool {
        match self.params {
            // the CEV experiments run with drift μ|x|
            ModelParams::Cev(p) => out[0] = p.mu * x[0].abs(),
            ModelParams::Gbm(p) => out[0] = p.mu * x[0].abs(),
            ModelParams::Cir(_) | ModelParams::ThreeHalves(_) | ModelParams::Heston(_) | ModelParams::CubicToy(_) => {
                self.raw_drift(x, out)
            }
            ModelParams::AitSahalia(_) | ModelParams::LogHeston(_) | ModelParams::CirLamperti(_) => return false,
        }
        true
    }

    /// Raw diffusion at the coordinatewise image `map(x_i)` of the constrained
    /// coordinates.
    pub(crate) fn diffusion_at_mapped(&self, x: &[T], map: impl Fn(T) -> T, out: &mut [T]) {
        let dom = self.base_domain();
        let mut y = [T::zero(); MAX_DIM];
        for i in 0..self.dim() {
            y[i] = if dom.is_constrained(i) { map(x[i]) } else { x[i] };
        }
        self.raw_diffusion(&y[..self.dim()], out)
    }

    pub(crate) fn diffusion_jacobian_at_mapped(&self, x: &[T], map: impl Fn(T) -> T, out: &mut [T]) {
        let dom = self.base_domain();
        let mut y = [T::zero(); MAX_DIM];
        for i in 0..self.dim() {
            y[i] = if dom.is_constrained(i) { map(x[i]) } else { x[i] };
        }
        self.raw_diffusion_jacobian(&y[..self.dim()], out)
    }
}
