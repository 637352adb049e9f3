#![allow(dead_code)]

use proptest::prelude::*;

use swipt_twr::model::{derive, validate, Geometry, NoiseMode, SystemConfig, ValidatedConfig};
use swipt_twr::specfun::{integrate, QuadratureSpec};

/// Random valid configs over a broad but physical range.
pub fn any_config() -> impl Strategy<Value = ValidatedConfig> {
    let scalars = (
        0.0..60.0f64,  // pp1 dB
        0.0..60.0f64,  // pp2 dB
        0.05..=1.0f64, // eta
        0.02..0.98f64, // alpha
        0.01..0.99f64, // rho1
        0.01..0.99f64, // rho2
        2.0..4.0f64,   // m
        0.05..2.0f64,  // rp
        0.05..2.0f64,  // rs
    );
    let noise = (0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, any::<bool>());
    let lambdas = prop::array::uniform7(0.2..5.0f64);
    let layout = (1.0..4.0f64, 0.05..0.95f64, 0.1..2.0f64);
    (scalars, noise, lambdas, layout).prop_map(|(s, n, lambdas, (length, frac, offset))| {
        let (pp1_db, pp2_db, eta, alpha, rho1, rho2, m, rp, rs) = s;
        let (s_pu1, s_pu2, s_su2, s_c, split) = n;
        let cfg = SystemConfig {
            pp1: 10f64.powf(pp1_db / 10.0),
            pp2: 10f64.powf(pp2_db / 10.0),
            eta,
            alpha,
            rho1,
            rho2,
            path_loss_exp: m,
            rate_pu: rp,
            rate_su: rs,
            sigma2_pu1: s_pu1,
            sigma2_pu2: s_pu2,
            sigma2_su2: s_su2,
            noise_mode: if split {
                NoiseMode::Split { sigma2_su1: s_su2, sigma2_c: s_c }
            } else {
                NoiseMode::Combined { sigma2: s_c }
            },
            lambdas,
            geometry: Geometry::LineLayout { length, d1: frac * length, su2_offset: offset },
        };
        validate(cfg).expect("strategy only produces valid configs")
    })
}

pub fn reference() -> ValidatedConfig {
    validate(SystemConfig::reference()).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        ((got - want) / want).abs()
    }
}

/// Exact outage probabilities of the simulated protocol, without assuming
/// the per-hop events are independent. Every phase-3 link shares the
/// harvested power `a·x₁ + b·x₂`, so the expectation over `(x₁, x₂)` is
/// taken jointly by nested quadrature.
pub fn joint_outage(cfg: &ValidatedConfig) -> (f64, f64) {
    let dc = derive(cfg);
    let m = cfg.path_loss_exp;
    let d = dc.dist;
    let l = cfg.lambdas;
    // x1 > t1 and x2 > t2 are the SU1 decoding events
    let t1 = dc.gamma_p1 * d.d1.powf(m) * dc.sigma2_eff1 / ((1.0 - cfg.rho1) * cfg.pp1);
    let t2 = dc.gamma_p1 * d.d2.powf(m) * dc.sigma2_eff2 / ((1.0 - cfg.rho2) * cfg.pp2);
    let t3 = dc.gamma_p1 * d.d3.powf(m) * cfg.sigma2_su2 / cfg.pp1;
    let t4 = dc.gamma_p1 * d.d4.powf(m) * cfg.sigma2_su2 / cfg.pp2;

    let pu_k = {
        let den1 = dc.a_p - dc.gamma_p2 * dc.b_p;
        let den2 = dc.a_pp - dc.gamma_p2 * dc.b_pp;
        if den1 <= 0.0 || den2 <= 0.0 {
            None
        } else {
            Some(l[5] * dc.gamma_p2 / den1 + l[6] * dc.gamma_p2 / den2)
        }
    };
    let su_k = l[4] * dc.gamma_s / dc.c;

    let spec = QuadratureSpec { rel_tol: 1e-11, abs_tol: 1e-300, max_subdivisions: 4000 };
    let expect_given_decode = |k: f64| -> f64 {
        let inner = |x1: f64| {
            let f = |x2: f64| (-l[1] * x2 - k / (dc.a * x1 + dc.b * x2)).exp();
            l[1] * integrate(f, t2, t2 + 80.0 / l[1], &spec).unwrap().value
        };
        let outer = |x1: f64| l[0] * (-l[0] * x1).exp() * inner(x1);
        integrate(outer, t1, t1 + 80.0 / l[0], &spec).unwrap().value
    };

    let pu = match pu_k {
        Some(k) => 1.0 - expect_given_decode(k),
        None => 1.0,
    };
    let su = 1.0 - expect_given_decode(su_k) * (-l[2] * t3 - l[3] * t4).exp();
    (pu, su)
}
