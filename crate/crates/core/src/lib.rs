//! Discretizations of SDEs whose coefficients are not globally Lipschitz,
//! with the tooling to measure them: strong error curves, negativity
//! statistics, Monte Carlo and multilevel Monte Carlo estimators and
//! reference pricers.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use sdelab::{build_model, CirParams, ModelParams, SchemeId, StepperConfig, StreamKey};
//!
//! let model = build_model(ModelParams::Cir(CirParams::new(5.07, 0.0457, 0.48, 0.05))).unwrap();
//! let lattice = sdelab::sample_lattice(StreamKey::new(7), 5.0, 1, 1024).unwrap();
//! let cfg = StepperConfig::new(SchemeId::CirImplicitSqrtEuler);
//! let path = sdelab::simulate_path(&cfg, &model, &lattice, 256).unwrap();
//! assert!(path.terminal()[0] > 0.0);
//! ```

pub mod brownian;
pub mod error;
pub mod error_lab;
pub mod estimators;
pub mod models;
pub mod oracles;
mod parallel;
pub mod real;
pub mod schemes;

pub use brownian::{
    derive_stream, sample_increments, sample_lattice, BrownianLattice, IncrementSequence, RandomStream, StreamKey,
    TimeGrid, GAUSSIAN_TRANSFORM,
};
pub use error::{Error, Result};
pub use models::{
    build_model, AitSahaliaParams, CevParams, CirParams, CubicToyParams, Domain, DomainKind, GbmParams,
    HestonParams, LampertiCir, ModelId, ModelParams, PriceLayer, ThreeHalvesParams,
};
pub use real::Real;
pub use schemes::{
    apply_extension, simulate_path, AuxiliaryExtension, PathStats, ProjectionMap, SchemeId, SolverMode,
    SolverSettings, Stepper, StepperConfig,
};

pub use error_lab::{
    fit_order, max_node_error, negativity_stats, pathwise_error_curve, strong_error_curve, strong_error_curves,
    ErrorReport, ErrorStudy, NegativityStats, Reference, Regression,
};
pub use estimators::{
    mc_estimate, mc_estimate_discarded, mlmc_estimate, mlmc_plan, rmsq_study, standard_mc_pairing, MlmcPlan,
    OverflowPolicy, PayoffKind, PayoffSpec, Phi, PriceEstimate,
};
pub use oracles::{
    black_scholes_call, black_scholes_put, cir_mean, gbm_exact_path, heston_call_price, three_halves_abs_mean_fixture,
    FourierSettings,
};

pub type Model = models::Model<f64>;
pub type SamplePath = schemes::SamplePath<f64>;
