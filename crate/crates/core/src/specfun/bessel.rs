//! Modified Bessel functions of the second kind, orders 0, 1 and 2.
//!
//! For `x <= 2` the ascending series in `x²/4` is used; above that, Steed's
//! continued fraction (CF2) for `K_0`/`K_1`. `K_2` always comes from the
//! upward recurrence `K_2 = K_0 + (2/x) K_1`, which is stable for `K`.

use std::f64::consts::PI;

use super::SpecfunError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_SWITCH: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// A Bessel value with an underflow marker.
///
/// `underflowed` is set when the true value lies below the smallest normal
/// double; `value` is then exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    pub underflowed: bool,
}

/// `K_order(x)` for `order` in {0, 1, 2} and `x > 0`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64, SpecfunError> {
    bessel_k_flagged(order, x).map(|k| k.value)
}

pub fn bessel_k_flagged(order: u32, x: f64) -> Result<BesselK, SpecfunError> {
    let scaled = bessel_k_scaled(order, x)?;
    let value = scaled * (-x).exp();
    if value < f64::MIN_POSITIVE {
        Ok(BesselK { value: 0.0, underflowed: true })
    } else {
        Ok(BesselK { value, underflowed: false })
    }
}

/// `e^x · K_order(x)`. Finite for every positive `x`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64, SpecfunError> {
    if order > 2 {
        return Err(SpecfunError::UnsupportedOrder(order));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecfunError::Domain { x });
    }
    let (k0, k1) = if x <= SERIES_SWITCH {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_scaled_cf(x)
    };
    Ok(match order {
        0 => k0,
        1 => k1,
        _ => k0 + 2.0 / x * k1,
    })
}

/// Ascending series for `K_0` and `K_1`, accurate for `0 < x <= 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // term_k = t^k / (k!)^2, term1_k = t^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut term1 = 1.0;
    // psi(k+1) and psi(k+2)
    let mut psi_k1 = -EULER_GAMMA;
    let mut psi_k2 = 1.0 - EULER_GAMMA;
    let mut harmonic = 0.0;

    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut s0 = 0.0;
    let mut s1 = term1 * (psi_k1 + psi_k2);

    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);

        i0 += term;
        i1 += term1;
        s0 += harmonic * term;
        let d1 = term1 * (psi_k1 + psi_k2);
        s1 += d1;
        if term < 1e-17 * i0 && d1.abs() < 1e-17 * s1.abs() {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// Steed's continued fraction for `e^x K_0(x)` and `e^x K_1(x)`, `x >= 2`.
fn k01_scaled_cf(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
