use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{DomainKind, Model, MAX_DIM};
use crate::real::Real;

/// Coordinate map `ℝᵈ → ℝᵈ` written into an output buffer.
pub type VectorField<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

#[derive(Clone)]
enum Rule<T> {
    /// `f` continues the drift formula, `g_j(x) = b_j(x⁺)`.
    Truncated,
    /// `f` continues the drift formula, `g_j(x) = b_j(|x|)`.
    Absolute,
    Custom {
        drift: VectorField<T>,
        diffusion: VectorField<T>,
        jacobian: Option<VectorField<T>>,
    },
}

/// Auxiliary coefficients `f`, `g_j` used off the domain `D`.
#[derive(Clone)]
pub struct AuxiliaryExtension<T> {
    name: String,
    rule: Rule<T>,
}

impl<T: Real> AuxiliaryExtension<T> {
    /// The truncation `√x ↦ √x⁺` for CIR, `(x⁺)^γ` for CEV, and so on.
    pub fn truncated() -> Self {
        AuxiliaryExtension {
            name: "truncated".into(),
            rule: Rule::Truncated,
        }
    }

    /// The reflection `√x ↦ √|x|` inside the diffusion.
    pub fn absolute() -> Self {
        AuxiliaryExtension {
            name: "absolute".into(),
            rule: Rule::Absolute,
        }
    }

    /// User supplied `f` and `g`. Without an explicit Jacobian the diffusion
    /// derivative on `E` is taken by central differences of `g`.
    pub fn custom(
        name: impl Into<String>,
        drift: VectorField<T>,
        diffusion: VectorField<T>,
        jacobian: Option<VectorField<T>>,
    ) -> Self {
        AuxiliaryExtension {
            name: name.into(),
            rule: Rule::Custom {
                drift,
                diffusion,
                jacobian,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn is_truncation(&self) -> bool {
        matches!(self.rule, Rule::Truncated)
    }

    pub(crate) fn eval_drift(&self, model: &Model<T>, x: &[T], out: &mut [T]) {
        match &self.rule {
            Rule::Truncated | Rule::Absolute => {
                let ok = model.drift_continuation(x, out);
                debug_assert!(ok, "apply_extension admits only continuable drifts");
            }
            Rule::Custom { drift, .. } => drift(x, out),
        }
    }

    pub(crate) fn eval_diffusion(&self, model: &Model<T>, x: &[T], out: &mut [T]) {
        match &self.rule {
            Rule::Truncated => model.diffusion_at_mapped(x, |v| v.pos(), out),
            Rule::Absolute => model.diffusion_at_mapped(x, |v| v.abs(), out),
            Rule::Custom { diffusion, .. } => diffusion(x, out),
        }
    }

    pub(crate) fn eval_diffusion_jacobian(&self, model: &Model<T>, x: &[T], out: &mut [T]) {
        let d = model.dim();
        let m = model.noise_dim();
        let dom = model.base_domain();
        match &self.rule {
            Rule::Truncated | Rule::Absolute => {
                let truncated = matches!(self.rule, Rule::Truncated);
                if truncated {
                    model.diffusion_jacobian_at_mapped(x, |v| v.pos(), out);
                } else {
                    model.diffusion_jacobian_at_mapped(x, |v| v.abs(), out);
                }
                // chain rule through x ↦ x⁺ or x ↦ |x| on constrained coordinates
                for l in 0..d {
                    if !dom.is_constrained(l) || x[l] >= T::zero() {
                        continue;
                    }
                    let factor = if truncated { T::zero() } else { -T::one() };
                    for j in 0..m {
                        for i in 0..d {
                            let idx = (j * d + i) * d + l;
                            out[idx] = out[idx] * factor;
                        }
                    }
                }
                out.iter_mut().take(d * d * m).for_each(|v| {
                    if !v.is_finite() {
                        *v = T::zero()
                    }
                });
            }
            Rule::Custom {
                diffusion, jacobian, ..
            } => match jacobian {
                Some(jac) => jac(x, out),
                None => {
                    let mut bp = [T::zero(); MAX_DIM * MAX_DIM];
                    let mut bm = [T::zero(); MAX_DIM * MAX_DIM];
                    for l in 0..d {
                        let h = T::lit(1e-6) * x[l].abs().max(T::one());
                        let mut xp = [T::zero(); MAX_DIM];
                        xp[..d].copy_from_slice(&x[..d]);
                        let mut xm = xp;
                        xp[l] = xp[l] + h;
                        xm[l] = xm[l] - h;
                        diffusion(&xp[..d], &mut bp);
                        diffusion(&xm[..d], &mut bm);
                        for j in 0..m {
                            for i in 0..d {
                                out[(j * d + i) * d + l] = (bp[j * d + i] - bm[j * d + i]) / (h + h);
                            }
                        }
                    }
                }
            },
        }
    }
}

/// Model with `ã = a·1_D + f·1_E` and `b̃_j = b_j·1_D + g_j·1_E` on the full
/// space. On `∂D` the diffusion derivative is the one-sided limit from `D`,
/// replaced by zero where that limit diverges.
pub fn apply_extension<T: Real>(model: &Model<T>, ext: AuxiliaryExtension<T>) -> Result<Model<T>> {
    if model.base_domain().kind() == DomainKind::FullSpace {
        return Err(Error::Unsupported(format!(
            "model `{}` lives on the full space, nothing to extend",
            model.id().as_str()
        )));
    }
    if matches!(ext.rule, Rule::Truncated | Rule::Absolute) {
        let mut probe = [T::zero(); MAX_DIM];
        if !model.drift_continuation(&model.initial_state()[..model.dim()], &mut probe) {
            return Err(Error::Unsupported(format!(
                "model `{}` has no natural drift continuation off its domain; supply a custom extension",
                model.id().as_str()
            )));
        }
    }
    Ok(model.with_extension(ext))
}

/// Projection `ψ: E → closure(D)` used by reflected schemes.
#[derive(Clone)]
pub enum ProjectionMap<T> {
    /// Coordinatewise `|x|`: the symmetrized Euler scheme.
    Absolute,
    /// Coordinatewise `x⁺`: projection onto the boundary.
    Boundary,
    /// Fixed point of `closure(D)`.
    Constant([T; MAX_DIM]),
    Custom(VectorField<T>),
}

impl<T: Real> ProjectionMap<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionMap::Absolute => "absolute",
            ProjectionMap::Boundary => "boundary",
            ProjectionMap::Constant(_) => "constant",
            ProjectionMap::Custom(_) => "custom",
        }
    }

    pub(crate) fn project(&self, model: &Model<T>, x: &mut [T]) {
        let dom = model.base_domain();
        let d = model.dim();
        match self {
            ProjectionMap::Absolute => (0..d).filter(|&i| dom.is_constrained(i)).for_each(|i| x[i] = x[i].abs()),
            ProjectionMap::Boundary => (0..d).filter(|&i| dom.is_constrained(i)).for_each(|i| x[i] = x[i].pos()),
            ProjectionMap::Constant(c) => x[..d].copy_from_slice(&c[..d]),
            ProjectionMap::Custom(f) => {
                let mut y = [T::zero(); MAX_DIM];
                f(&x[..d], &mut y);
                x[..d].copy_from_slice(&y[..d]);
            }
        }
    }
}
