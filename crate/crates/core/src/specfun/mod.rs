//! Special functions and the quadrature oracles used to check them.
//!
//! The closed forms for the broadcast-phase success probabilities reduce to
//! integrals of the form `∫₀^∞ e^{-k/y - βy} yⁿ dy`, whose values are
//! Bessel-K expressions. The oracles here evaluate those integrals directly
//! with the substitution `y = e^u`, which maps `(0, ∞)` onto the real line
//! and turns the `e^{-k/y}` essential singularity at zero into a smooth,
//! doubly-exponentially decaying tail.

mod bessel;
mod quadrature;

pub use bessel::{bessel_k, bessel_k_flagged, bessel_k_scaled, BesselK};
pub use quadrature::{integrate, Estimate, QuadratureSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument x = {x} outside (0, inf)")]
    Domain { x: f64 },
    #[error("Bessel order {0} not supported (only 0, 1, 2)")]
    UnsupportedOrder(u32),
    #[error("non-positive parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("quadrature did not converge: error {achieved:e} > tolerance {requested:e}")]
    Convergence { achieved: f64, requested: f64 },
    #[error("quadrature tolerances must be positive and the subdivision budget at least 1")]
    InvalidSpec,
}

fn require_positive(name: &'static str, value: f64) -> Result<(), SpecfunError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::Parameter { name, value })
    }
}

/// `u`-range carrying all but a negligible part of `∫ e^{-k/y - βy} (...) dy`.
fn log_domain(k: f64, beta: f64) -> (f64, f64) {
    let y_peak = (k / beta).sqrt() + 1.0 / beta;
    let y_hi = y_peak + 100.0 / beta;
    let y_lo = k / (k / y_peak + 100.0);
    (y_lo.ln(), y_hi.ln())
}

/// `A · ∫₀^∞ e^{-k/y} (e^{-β₁y} − e^{-β₂y}) dy` by adaptive quadrature.
///
/// Closed form: `2A(√(k/β₁) K₁(2√(kβ₁)) − √(k/β₂) K₁(2√(kβ₂)))`.
pub fn exp_ratio_integral(
    k: f64,
    beta1: f64,
    beta2: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64, SpecfunError> {
    require_positive("k", k)?;
    require_positive("beta1", beta1)?;
    require_positive("beta2", beta2)?;
    if beta1 == beta2 {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if beta1 < beta2 { (beta1, beta2, 1.0) } else { (beta2, beta1, -1.0) };
    let gap = hi - lo;
    let (u_lo, u_hi) = log_domain(k, lo);
    // e^{-lo y} - e^{-hi y} = e^{-lo y} * (-expm1(-gap y)), no cancellation
    let integrand = |u: f64| {
        let y = u.exp();
        (u - k / y - lo * y).exp() * -(-gap * y).exp_m1()
    };
    let est = integrate(integrand, u_lo, u_hi, spec)?;
    Ok(scale * sign * est.value)
}

/// `β² ∫₀^∞ y e^{-k/y - βy} dy`, the Erlang-2 analogue of
/// [`exp_ratio_integral`]. Closed form: `2βk K₂(2√(βk))`.
pub fn erlang_weighted_integral(k: f64, beta: f64, spec: &QuadratureSpec) -> Result<f64, SpecfunError> {
    require_positive("k", k)?;
    require_positive("beta", beta)?;
    let (u_lo, u_hi) = log_domain(k, beta);
    let integrand = |u: f64| {
        let y = u.exp();
        (2.0 * u - k / y - beta * y).exp()
    };
    let est = integrate(integrand, u_lo, u_hi, spec)?;
    Ok(beta * beta * est.value)
}

/// `e^x K_ν(x)` from `∫₀^∞ e^{-x cosh t} cosh(νt) dt`. Independent of the
/// series/continued-fraction route in [`bessel_k_scaled`].
pub fn bessel_k_scaled_by_quadrature(order: u32, x: f64, spec: &QuadratureSpec) -> Result<f64, SpecfunError> {
    if order > 2 {
        return Err(SpecfunError::UnsupportedOrder(order));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecfunError::Domain { x });
    }
    let nu = order as f64;
    // beyond t_hi the integrand is below e^{-740} of its peak
    let t_hi = (1.0 + 760.0 / x).acosh() + 1.0;
    let integrand = |t: f64| {
        // cosh t - 1 = 2 sinh²(t/2), exact near zero
        let s = (0.5 * t).sinh();
        (-2.0 * x * s * s).exp() * (nu * t).cosh()
    };
    Ok(integrate(integrand, 0.0, t_hi, spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-300, max_subdivisions: 5000 }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bessel_quadrature_reference_points() {
        // K1(1), K2(1) from the cosh integral representation
        let k1 = bessel_k_scaled_by_quadrature(1, 1.0, &tight()).unwrap() * (-1.0f64).exp();
        let k2 = bessel_k_scaled_by_quadrature(2, 1.0, &tight()).unwrap() * (-1.0f64).exp();
        assert!(rel(k1, 0.601_907_230_197_234_6) < 1e-11);
        assert!(rel(k2, 1.624_838_898_635_177_5) < 1e-11);
    }

    #[test]
    fn bessel_series_agrees_with_quadrature() {
        for &x in &[1e-3, 0.1, 0.7, 1.5, 2.0, 2.5, 4.0, 9.0, 30.0, 200.0, 650.0] {
            for order in 0..3 {
                let q = bessel_k_scaled_by_quadrature(order, x, &tight()).unwrap();
                let s = bessel_k_scaled(order, x).unwrap();
                assert!(rel(s, q) < 1e-10, "order {order} x {x}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn exp_ratio_equal_rates_is_zero() {
        assert_eq!(exp_ratio_integral(3.0, 1.5, 1.5, 7.0, &tight()).unwrap(), 0.0);
    }

    #[test]
    fn exp_ratio_matches_bessel_form() {
        let got = exp_ratio_integral(1.0, 1.0, 2.0, 1.0, &tight()).unwrap();
        // 2(K1(2) - sqrt(1/2) K1(2 sqrt 2))
        assert!(rel(got, 0.209_898_026_625_398_28) < 1e-10, "{got}");
    }

    #[test]
    fn exp_ratio_small_k_limit() {
        let got = exp_ratio_integral(1e-12, 1.0, 2.0, 1.0, &tight()).unwrap();
        assert!((got - 0.5).abs() < 1e-9, "{got}");
    }

    #[test]
    fn exp_ratio_antisymmetric_in_rates() {
        let s = tight();
        let ab = exp_ratio_integral(0.3, 0.2, 5.0, 1.0, &s).unwrap();
        let ba = exp_ratio_integral(0.3, 5.0, 0.2, 1.0, &s).unwrap();
        assert_eq!(ab, -ba);
    }

    #[test]
    fn erlang_reference_and_limits() {
        let s = tight();
        let got = erlang_weighted_integral(1.0, 1.0, &s).unwrap();
        // 2 K2(2)
        assert!(rel(got, 0.507_519_509_132_111_7) < 1e-10, "{got}");
        let mass = erlang_weighted_integral(1e-14, 1.0, &s).unwrap();
        assert!((mass - 1.0).abs() < 1e-9);
        let mut last = f64::INFINITY;
        for i in 0..30 {
            let k = 1e-3 * 1.5f64.powi(i);
            let v = erlang_weighted_integral(k, 1.0, &s).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn parameters_checked() {
        let s = QuadratureSpec::default();
        assert!(matches!(exp_ratio_integral(0.0, 1.0, 2.0, 1.0, &s), Err(SpecfunError::Parameter { name: "k", .. })));
        assert!(matches!(erlang_weighted_integral(1.0, -1.0, &s), Err(SpecfunError::Parameter { name: "beta", .. })));
    }
}
