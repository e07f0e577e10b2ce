//! Time-stepping schemes and the path simulator.
//!
//! A [`StepperConfig`] names a scheme and its options. [`Stepper::new`]
//! checks it against a model once; stepping is then infallible apart from
//! implicit solver failures and evaluation of coefficients outside the
//! domain they are defined on.

mod extension;
mod path;
mod solver;
mod steps;

use std::fmt;
use std::str::FromStr;

pub use extension::{apply_extension, AuxiliaryExtension, ProjectionMap, VectorField};
pub use path::{simulate_path, PathStats, SamplePath};
pub use solver::{solve_drift_implicit, SolverMode, SolverSettings};
pub use steps::{
    step_backward_euler, step_cir_implicit_milstein, step_cir_implicit_milstein_truncated, step_cir_implicit_sqrt,
    step_cir_implicit_sqrt_truncated, step_explicit_euler, step_log_heston, step_milstein_scalar, step_reflected,
    step_split_step_backward, step_tamed_euler,
};

use crate::error::{Error, Result};
use crate::models::{feller_ratio, lamperti_cir, CirParams, HestonParams, LampertiCir, Model, ModelParams, MAX_DIM};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    ExplicitEuler,
    Milstein,
    ModifiedEuler,
    ModifiedMilstein,
    ReflectedEuler,
    SplitStepBackwardEuler,
    BackwardEuler,
    TamedEuler,
    CirImplicitSqrtEuler,
    CirImplicitMilstein,
    LogHestonComposite,
}

impl SchemeId {
    pub const ALL: [SchemeId; 11] = [
        SchemeId::ExplicitEuler,
        SchemeId::Milstein,
        SchemeId::ModifiedEuler,
        SchemeId::ModifiedMilstein,
        SchemeId::ReflectedEuler,
        SchemeId::SplitStepBackwardEuler,
        SchemeId::BackwardEuler,
        SchemeId::TamedEuler,
        SchemeId::CirImplicitSqrtEuler,
        SchemeId::CirImplicitMilstein,
        SchemeId::LogHestonComposite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::ExplicitEuler => "explicit-euler",
            SchemeId::Milstein => "milstein",
            SchemeId::ModifiedEuler => "modified-euler",
            SchemeId::ModifiedMilstein => "modified-milstein",
            SchemeId::ReflectedEuler => "reflected-euler",
            SchemeId::SplitStepBackwardEuler => "split-step-backward-euler",
            SchemeId::BackwardEuler => "backward-euler",
            SchemeId::TamedEuler => "tamed-euler",
            SchemeId::CirImplicitSqrtEuler => "cir-implicit-sqrt-euler",
            SchemeId::CirImplicitMilstein => "cir-implicit-milstein",
            SchemeId::LogHestonComposite => "log-heston-composite",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown scheme `{s}`")))
    }
}

/// Scheme plus the options it may need.
#[derive(Clone)]
pub struct StepperConfig<T> {
    pub scheme: SchemeId,
    /// Attached to the model before stepping. For the two CIR-specific
    /// schemes a truncated extension selects the `√x⁺` variants.
    pub extension: Option<AuxiliaryExtension<T>>,
    pub projection: Option<ProjectionMap<T>>,
    pub solver: SolverSettings<T>,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(scheme: SchemeId) -> Self {
        StepperConfig {
            scheme,
            extension: None,
            projection: None,
            solver: SolverSettings::default(),
        }
    }

    pub fn with_extension(mut self, ext: AuxiliaryExtension<T>) -> Self {
        self.extension = Some(ext);
        self
    }

    pub fn with_projection(mut self, projection: ProjectionMap<T>) -> Self {
        self.projection = Some(projection);
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings<T>) -> Self {
        self.solver = solver;
        self
    }

    /// Short human readable label, e.g. `modified-euler[truncated]`.
    pub fn label(&self) -> String {
        let mut s = self.scheme.as_str().to_string();
        if let Some(e) = &self.extension {
            s.push_str(&format!("[{}]", e.name()));
        }
        if let Some(p) = &self.projection {
            s.push_str(&format!("[{}]", p.name()));
        }
        s
    }
}

#[derive(Clone)]
enum Kernel<T> {
    Euler,
    Milstein,
    Reflected(ProjectionMap<T>),
    SplitStep,
    Backward,
    Tamed,
    /// State is `X`, stepped through `Y = √X`.
    ImplicitSqrtX { l: LampertiCir<T>, truncated: bool },
    /// State is already `Y`.
    ImplicitSqrtY(LampertiCir<T>),
    ImplicitMilstein { p: CirParams<T>, truncated: bool },
    LogHeston(HestonParams<T>),
}

/// A scheme validated against a model.
#[derive(Clone)]
pub struct Stepper<T: Real> {
    scheme: SchemeId,
    model: Model<T>,
    kernel: Kernel<T>,
    solver: SolverSettings<T>,
    label: String,
}

impl<T: Real> fmt::Debug for Stepper<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper").field("scheme", &self.label).field("model", &self.model).finish()
    }
}

fn incompatible(scheme: SchemeId, reason: impl Into<String>) -> Error {
    Error::IncompatibleScheme {
        scheme: scheme.as_str(),
        reason: reason.into(),
    }
}

impl<T: Real> Stepper<T> {
    pub fn new(config: &StepperConfig<T>, model: &Model<T>) -> Result<Self> {
        let scheme = config.scheme;
        let truncated = config.extension.as_ref().is_some_and(|e| e.is_truncation());
        let cir_specific = matches!(scheme, SchemeId::CirImplicitSqrtEuler | SchemeId::CirImplicitMilstein);
        let model = match &config.extension {
            Some(ext) if !cir_specific => apply_extension(model, ext.clone())?,
            Some(ext) if !ext.is_truncation() => {
                return Err(incompatible(scheme, "only the truncated extension is available"))
            }
            _ => model.clone(),
        };
        let scalar = model.dim() == 1 && model.noise_dim() == 1;
        let kernel = match scheme {
            SchemeId::ExplicitEuler => Kernel::Euler,
            SchemeId::TamedEuler => Kernel::Tamed,
            SchemeId::ModifiedEuler | SchemeId::ModifiedMilstein => {
                if model.extension().is_none() {
                    return Err(incompatible(scheme, "requires an auxiliary extension"));
                }
                if scheme == SchemeId::ModifiedEuler {
                    Kernel::Euler
                } else if scalar {
                    Kernel::Milstein
                } else {
                    return Err(incompatible(scheme, "only scalar noise is supported"));
                }
            }
            SchemeId::Milstein => {
                if !scalar {
                    return Err(incompatible(
                        scheme,
                        "requires scalar noise; Levy areas for non-commutative noise are not simulated",
                    ));
                }
                Kernel::Milstein
            }
            SchemeId::ReflectedEuler => match &config.projection {
                Some(p) => Kernel::Reflected(p.clone()),
                None => return Err(incompatible(scheme, "requires a projection map")),
            },
            SchemeId::SplitStepBackwardEuler | SchemeId::BackwardEuler => {
                if !scalar {
                    return Err(incompatible(scheme, "implicit solves are implemented for scalar models"));
                }
                if scheme == SchemeId::BackwardEuler {
                    Kernel::Backward
                } else {
                    Kernel::SplitStep
                }
            }
            SchemeId::CirImplicitSqrtEuler => match *model.params() {
                ModelParams::Cir(p) => {
                    let l = lamperti_cir(&p);
                    if l.alpha <= T::zero() && !truncated {
                        return Err(incompatible(
                            scheme,
                            "requires 4 kappa lambda > theta^2 unless the truncated variant is selected",
                        ));
                    }
                    Kernel::ImplicitSqrtX { l, truncated }
                }
                ModelParams::CirLamperti(p) => {
                    let l = lamperti_cir(&p);
                    if l.alpha <= T::zero() {
                        return Err(incompatible(scheme, "requires 4 kappa lambda > theta^2"));
                    }
                    Kernel::ImplicitSqrtY(l)
                }
                _ => return Err(incompatible(scheme, "only defined for the CIR model")),
            },
            SchemeId::CirImplicitMilstein => match *model.params() {
                ModelParams::Cir(p) => {
                    if feller_ratio(&p) < T::lit(0.5) && !truncated {
                        return Err(incompatible(
                            scheme,
                            "requires 4 kappa lambda >= theta^2 unless the truncated variant is selected",
                        ));
                    }
                    Kernel::ImplicitMilstein { p, truncated }
                }
                _ => return Err(incompatible(scheme, "only defined for the CIR model")),
            },
            SchemeId::LogHestonComposite => match *model.params() {
                ModelParams::LogHeston(p) => {
                    if lamperti_cir(&p.variance()).alpha <= T::zero() {
                        return Err(incompatible(scheme, "requires 4 kappa lambda > theta^2"));
                    }
                    Kernel::LogHeston(p)
                }
                _ => return Err(incompatible(scheme, "only defined for the log-Heston model")),
            },
        };
        if let Kernel::Reflected(_) = kernel {
            if model.base_domain().kind() == crate::models::DomainKind::FullSpace {
                return Err(incompatible(scheme, "the model lives on the full space"));
            }
        }
        Ok(Stepper {
            scheme,
            model,
            kernel,
            solver: config.solver,
            label: config.label(),
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The model the scheme evaluates, with any extension attached.
    pub fn model(&self) -> &Model<T> {
        &self.model
    }

    pub fn state_dim(&self) -> usize {
        self.model.dim()
    }

    pub fn noise_dim(&self) -> usize {
        self.model.noise_dim()
    }

    pub fn initial_state(&self) -> [T; MAX_DIM] {
        self.model.initial_state()
    }

    fn needs_domain(&self) -> bool {
        !matches!(
            self.kernel,
            Kernel::ImplicitSqrtX { .. } | Kernel::ImplicitMilstein { .. } | Kernel::LogHeston(_) | Kernel::ImplicitSqrtY(_)
        ) && !self.model.defined_off_domain()
    }

    /// Advances `x` by one step of size `dt` driven by `dw`.
    pub fn step(&self, x: &mut [T; MAX_DIM], dt: T, dw: &[T]) -> Result<()> {
        let d = self.model.dim();
        if self.needs_domain() && !self.model.base_domain().contains_closure(&x[..d]) {
            let bad = (0..d).find(|&i| x[i] < T::zero()).map(|i| x[i]).unwrap_or(x[0]);
            return Err(Error::NegativeSqrtArgument { value: bad.to_f64_lossy() });
        }
        let mut out = [T::zero(); MAX_DIM];
        match &self.kernel {
            Kernel::Euler => step_explicit_euler(&self.model, &x[..d], dt, dw, &mut out),
            Kernel::Tamed => step_tamed_euler(&self.model, &x[..d], dt, dw, &mut out),
            Kernel::Milstein => out[0] = step_milstein_scalar(&self.model, x[0], dt, dw[0]),
            Kernel::Reflected(p) => step_reflected(&self.model, p, &x[..d], dt, dw, &mut out),
            Kernel::SplitStep => out[0] = step_split_step_backward(&self.model, x[0], dt, dw[0], &self.solver)?,
            Kernel::Backward => out[0] = step_backward_euler(&self.model, x[0], dt, dw[0], &self.solver)?,
            Kernel::ImplicitSqrtX { l, truncated } => {
                out[0] = if *truncated {
                    step_cir_implicit_sqrt_truncated(l, x[0], dt, dw[0])
                } else {
                    let y = step_cir_implicit_sqrt(l, x[0].sqrt(), dt, dw[0]);
                    y * y
                }
            }
            Kernel::ImplicitSqrtY(l) => out[0] = step_cir_implicit_sqrt(l, x[0], dt, dw[0]),
            Kernel::ImplicitMilstein { p, truncated } => {
                out[0] = if *truncated {
                    step_cir_implicit_milstein_truncated(p, x[0], dt, dw[0])
                } else {
                    step_cir_implicit_milstein(p, x[0], dt, dw[0])?
                }
            }
            Kernel::LogHeston(p) => {
                let (h, y) = step_log_heston(p, x[0], x[1], dt, [dw[0], dw[1]]);
                out[0] = h;
                out[1] = y;
            }
        }
        x[..d].copy_from_slice(&out[..d]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, AitSahaliaParams, CirParams, CubicToyParams, ModelParams};

    fn cir(p: CirParams<f64>) -> Model<f64> {
        build_model(ModelParams::Cir(p)).unwrap()
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>().unwrap(), id);
        }
        assert!("euler-maruyama".parse::<SchemeId>().is_err());
    }

    #[test]
    fn compatibility_checks() {
        let scen2 = cir(CirParams::new(2.0, 0.09, 1.0, 0.09));
        assert!(Stepper::new(&StepperConfig::new(SchemeId::CirImplicitSqrtEuler), &scen2).is_err());
        let trunc = StepperConfig::new(SchemeId::CirImplicitSqrtEuler).with_extension(AuxiliaryExtension::truncated());
        assert!(Stepper::new(&trunc, &scen2).is_ok());
        assert!(Stepper::new(&StepperConfig::new(SchemeId::ModifiedEuler), &scen2).is_err());
        assert!(Stepper::new(&StepperConfig::new(SchemeId::ReflectedEuler), &scen2).is_err());
        let cubic = build_model(ModelParams::CubicToy(CubicToyParams { sigma: 1.0, x0: 0.0 })).unwrap();
        assert!(Stepper::new(&StepperConfig::new(SchemeId::CirImplicitMilstein), &cubic).is_err());
        let ait = build_model(ModelParams::AitSahalia(AitSahaliaParams {
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
        let cfg = StepperConfig::new(SchemeId::ModifiedEuler).with_extension(AuxiliaryExtension::truncated());
        assert!(Stepper::new(&cfg, &ait).is_err());
    }

    #[test]
    fn unextended_euler_rejects_negative_states() {
        let s = Stepper::new(&StepperConfig::new(SchemeId::ExplicitEuler), &cir(CirParams::new(2.0, 0.09, 1.0, 0.09)))
            .unwrap();
        let mut x = [-0.01, 0.0];
        assert!(matches!(s.step(&mut x, 0.01, &[0.1]), Err(Error::NegativeSqrtArgument { .. })));
    }
}
