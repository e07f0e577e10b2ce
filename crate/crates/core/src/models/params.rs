use crate::error::{Error, Result};
use crate::real::Real;

fn positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be strictly positive, got {v}")))
    }
}

fn finite<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {v}")))
    }
}

/// `dX = κ(λ − X) dt + θ √X dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirParams<T> {
    pub kappa: T,
    pub lambda: T,
    pub theta: T,
    pub x0: T,
}

impl<T: Real> CirParams<T> {
    pub fn new(kappa: T, lambda: T, theta: T, x0: T) -> Self {
        CirParams {
            kappa,
            lambda,
            theta,
            x0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("kappa", self.kappa)?;
        positive("lambda", self.lambda)?;
        positive("theta", self.theta)?;
        positive("x0", self.x0)
    }
}

/// `dS = μ S dt + σ S^γ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CevParams<T> {
    pub mu: T,
    pub sigma: T,
    pub gamma: T,
    pub s0: T,
}

impl<T: Real> CevParams<T> {
    pub fn validate(&self) -> Result<()> {
        finite("mu", self.mu)?;
        positive("sigma", self.sigma)?;
        positive("s0", self.s0)?;
        if !(self.gamma >= T::lit(0.5) && self.gamma <= T::one()) {
            return Err(Error::param(
                "gamma",
                format!(
                    "a unique strong solution requires gamma in [1/2, 1], got {}",
                    self.gamma
                ),
            ));
        }
        Ok(())
    }
}

/// Geometric Brownian motion, the `γ = 1` member of the CEV family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams<T> {
    pub mu: T,
    pub sigma: T,
    pub x0: T,
}

impl<T: Real> GbmParams<T> {
    pub fn validate(&self) -> Result<()> {
        finite("mu", self.mu)?;
        finite("sigma", self.sigma)?;
        if self.sigma < T::zero() {
            return Err(Error::param("sigma", "must be nonnegative"));
        }
        positive("x0", self.x0)
    }
}

/// Heston stochastic volatility. `v0`, `kappa`, `lambda`, `theta` describe
/// the CIR variance; `r` is only used for discounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams<T> {
    pub mu: T,
    pub kappa: T,
    pub lambda: T,
    pub theta: T,
    pub rho: T,
    pub s0: T,
    pub v0: T,
    pub r: T,
}

impl<T: Real> HestonParams<T> {
    pub fn validate(&self) -> Result<()> {
        finite("mu", self.mu)?;
        finite("r", self.r)?;
        positive("kappa", self.kappa)?;
        positive("lambda", self.lambda)?;
        positive("theta", self.theta)?;
        positive("s0", self.s0)?;
        positive("v0", self.v0)?;
        if !(self.rho > -T::one() && self.rho < T::one()) {
            return Err(Error::param("rho", format!("must lie in (-1, 1), got {}", self.rho)));
        }
        Ok(())
    }

    pub fn variance(&self) -> CirParams<T> {
        CirParams::new(self.kappa, self.lambda, self.theta, self.v0)
    }
}

/// Generalised Ait-Sahalia short rate
/// `dX = (α₋₁/X − α₀ + α₁X − α₂Xʳ) dt + σ X^ρ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AitSahaliaParams<T> {
    pub alpha_m1: T,
    pub alpha_0: T,
    pub alpha_1: T,
    pub alpha_2: T,
    pub sigma: T,
    pub r: T,
    pub rho: T,
    pub x0: T,
}

impl<T: Real> AitSahaliaParams<T> {
    pub fn validate(&self) -> Result<()> {
        positive("alpha_m1", self.alpha_m1)?;
        positive("alpha_0", self.alpha_0)?;
        positive("alpha_1", self.alpha_1)?;
        positive("alpha_2", self.alpha_2)?;
        positive("sigma", self.sigma)?;
        positive("x0", self.x0)?;
        if !(self.r > T::one()) {
            return Err(Error::param("r", format!("must exceed 1, got {}", self.r)));
        }
        if !(self.rho > T::one()) {
            return Err(Error::param("rho", format!("must exceed 1, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Asset layer driven by the 3/2 volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceLayer<T> {
    pub mu: T,
    pub rho: T,
    pub s0: T,
}

/// 3/2 volatility `dV = c₁ V (c₂ − V) dt + c₃ V^{3/2} dW`, optionally with an
/// asset price on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeHalvesParams<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub v0: T,
    pub price: Option<PriceLayer<T>>,
}

impl<T: Real> ThreeHalvesParams<T> {
    pub fn validate(&self) -> Result<()> {
        positive("c1", self.c1)?;
        positive("c2", self.c2)?;
        positive("c3", self.c3)?;
        positive("v0", self.v0)?;
        if let Some(p) = self.price {
            finite("mu", p.mu)?;
            positive("s0", p.s0)?;
            if !(p.rho > -T::one() && p.rho < T::one()) {
                return Err(Error::param("rho", "must lie in (-1, 1)"));
            }
        }
        Ok(())
    }
}

/// `dX = −X³ dt + σ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicToyParams<T> {
    pub sigma: T,
    pub x0: T,
}

impl<T: Real> CubicToyParams<T> {
    pub fn validate(&self) -> Result<()> {
        finite("x0", self.x0)?;
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return Err(Error::param("sigma", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Coefficients of `Y = √X` for a CIR process:
/// `dY = (α/Y + βY) dt + γ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LampertiCir<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub y0: T,
}

impl<T: Real> LampertiCir<T> {
    /// Recovers the CIR parameters (κ, λ, θ, x₀).
    pub fn to_cir(&self) -> CirParams<T> {
        let kappa = -T::lit(2.0) * self.beta;
        let theta = T::lit(2.0) * self.gamma;
        let lambda = (T::lit(8.0) * self.alpha + theta * theta) / (T::lit(4.0) * kappa);
        CirParams::new(kappa, lambda, theta, self.y0 * self.y0)
    }
}

/// Parameter record tagged by model family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams<T> {
    Cir(CirParams<T>),
    Cev(CevParams<T>),
    Gbm(GbmParams<T>),
    Heston(HestonParams<T>),
    LogHeston(HestonParams<T>),
    AitSahalia(AitSahaliaParams<T>),
    ThreeHalves(ThreeHalvesParams<T>),
    CubicToy(CubicToyParams<T>),
    CirLamperti(CirParams<T>),
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Cir(p) | ModelParams::CirLamperti(p) => p.validate(),
            ModelParams::Cev(p) => p.validate(),
            ModelParams::Gbm(p) => p.validate(),
            ModelParams::Heston(p) | ModelParams::LogHeston(p) => p.validate(),
            ModelParams::AitSahalia(p) => p.validate(),
            ModelParams::ThreeHalves(p) => p.validate(),
            ModelParams::CubicToy(p) => p.validate(),
        }
    }
}
