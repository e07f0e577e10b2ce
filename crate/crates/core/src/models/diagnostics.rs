//! Parameter conditions under which the schemes are known to behave.

use super::params::{AitSahaliaParams, CirParams, HestonParams, LampertiCir};
use crate::real::Real;

/// `2κλ/θ²`. The CIR process stays strictly positive iff this is ≥ 1.
pub fn feller_ratio<T: Real>(p: &CirParams<T>) -> T {
    T::lit(2.0) * p.kappa * p.lambda / (p.theta * p.theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbdThreshold<T> {
    pub threshold: T,
    pub satisfied: bool,
}

/// Sufficient condition for the `p`-th moment strong rate of the symmetrized
/// Euler scheme: `2κλ/θ² > 1 + √8 max{(√κ/θ)√(16p−1), 16p−2}`.
pub fn bbd_threshold<T: Real>(p: &CirParams<T>, moment_p: T) -> BbdThreshold<T> {
    let sixteen_p = T::lit(16.0) * moment_p;
    let first = p.kappa.sqrt() / p.theta * (sixteen_p - T::one()).sqrt();
    let second = sixteen_p - T::lit(2.0);
    let threshold = T::one() + T::lit(8.0).sqrt() * first.max(second);
    BbdThreshold {
        threshold,
        satisfied: feller_ratio(p) > threshold,
    }
}

/// `E S_t^p < ∞` for all `t` iff `ρ ≤ −√(p−1)/√p + κ/(θp)` (`p > 1`).
pub fn heston_moment_bound<T: Real>(p: &HestonParams<T>, moment_p: T) -> bool {
    let rhs = -(moment_p - T::one()).sqrt() / moment_p.sqrt() + p.kappa / (p.theta * moment_p);
    p.rho <= rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wellposedness {
    pub strong_solution_ok: bool,
    pub backward_euler_ok: bool,
}

pub fn ait_sahalia_wellposed<T: Real>(p: &AitSahaliaParams<T>) -> Wellposedness {
    let one = T::one();
    Wellposedness {
        strong_solution_ok: p.r > one && p.rho < (one + p.r) / T::lit(2.0),
        backward_euler_ok: p.r + one > T::lit(2.0) * p.rho,
    }
}

/// Coefficients of the square-root transformed CIR process.
pub fn lamperti_cir<T: Real>(p: &CirParams<T>) -> LampertiCir<T> {
    LampertiCir {
        alpha: (T::lit(4.0) * p.kappa * p.lambda - p.theta * p.theta) / T::lit(8.0),
        beta: -p.kappa / T::lit(2.0),
        gamma: p.theta / T::lit(2.0),
        y0: p.x0.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_one() -> CirParams<f64> {
        CirParams::new(5.07, 0.0457, 0.48, 0.05)
    }

    fn scenario_two() -> CirParams<f64> {
        CirParams::new(2.0, 0.09, 1.0, 0.09)
    }

    fn heston() -> HestonParams<f64> {
        HestonParams {
            mu: 0.0319,
            kappa: 5.07,
            lambda: 0.0457,
            theta: 0.48,
            rho: -0.7,
            s0: 100.0,
            v0: 0.05,
            r: 0.0319,
        }
    }

    fn ait(r: f64, rho: f64) -> AitSahaliaParams<f64> {
        AitSahaliaParams {
            alpha_m1: 1.0,
            alpha_0: 1.0,
            alpha_1: 1.0,
            alpha_2: 1.0,
            sigma: 1.0,
            r,
            rho,
            x0: 1.0,
        }
    }

    #[test]
    fn feller_ratios() {
        assert!((feller_ratio(&scenario_one()) - 2.011276).abs() < 1e-6);
        assert!((feller_ratio(&scenario_two()) - 0.36).abs() < 1e-15);
        let p = CirParams::new(2.0, 0.25, 1.0, 1.0);
        assert_eq!(feller_ratio(&p), 1.0);
    }

    #[test]
    fn bbd_branches() {
        let b = bbd_threshold(&scenario_one(), 1.0);
        // 1 + √8·(√5.07/0.48)·√15
        let expect = 1.0 + 8f64.sqrt() * (5.07f64.sqrt() / 0.48) * 15f64.sqrt();
        assert!((b.threshold - expect).abs() < 1e-12);
        assert!((b.threshold - 52.38).abs() < 0.02);
        assert!(!b.satisfied);

        let stiff = CirParams::new(400.0, 1.0, 0.1, 1.0);
        let b = bbd_threshold(&stiff, 1.0);
        let expect = 1.0 + 8f64.sqrt() * (400f64.sqrt() / 0.1) * 15f64.sqrt();
        assert!((b.threshold - expect).abs() < 1e-9);

        let flat = CirParams::new(0.01, 1.0, 1.0, 1.0);
        let b = bbd_threshold(&flat, 2.0);
        assert!((b.threshold - (1.0 + 8f64.sqrt() * 30.0)).abs() < 1e-12);
    }

    #[test]
    fn heston_moments() {
        let p = heston();
        let rhs = -(1.0f64).sqrt() / 2f64.sqrt() + 5.07 / (0.48 * 2.0);
        assert!((rhs - 4.57).abs() < 0.01);
        assert!(heston_moment_bound(&p, 2.0));
        let rhs = -(1.0f64).sqrt() / 2f64.sqrt() + 1.0 / (1.0 * 2.0);
        let boundary = HestonParams {
            kappa: 1.0,
            theta: 1.0,
            rho: rhs,
            ..p
        };
        assert!(heston_moment_bound(&boundary, 2.0));
        let explosive = HestonParams {
            kappa: 0.1,
            theta: 2.0,
            rho: 0.9,
            ..p
        };
        assert!(!heston_moment_bound(&explosive, 4.0));
    }

    #[test]
    fn ait_sahalia_conditions() {
        let w = ait_sahalia_wellposed(&ait(2.0, 1.4));
        assert!(w.strong_solution_ok && w.backward_euler_ok);
        let w = ait_sahalia_wellposed(&ait(2.0, 1.5));
        assert!(!w.strong_solution_ok && !w.backward_euler_ok);
        let w = ait_sahalia_wellposed(&ait(3.0, 1.9));
        assert!(w.strong_solution_ok && w.backward_euler_ok);
    }

    #[test]
    fn lamperti_fields() {
        let l = lamperti_cir(&scenario_one());
        assert!((l.alpha - (4.0 * 5.07 * 0.0457 - 0.48 * 0.48) / 8.0).abs() < 1e-15);
        assert!((l.alpha - 0.0870495).abs() < 1e-7);
        assert_eq!(l.beta, -2.535);
        assert_eq!(l.gamma, 0.24);
        let zero = lamperti_cir(&CirParams::new(1.0, 0.25, 1.0, 1.0));
        assert_eq!(zero.alpha, 0.0);
        let back = l.to_cir();
        assert!((back.kappa - 5.07).abs() < 1e-14);
        assert!((back.theta - 0.48).abs() < 1e-14);
        assert!((back.lambda - 0.0457).abs() < 1e-14);
        assert!((back.x0 - 0.05).abs() < 1e-15);
    }
}
