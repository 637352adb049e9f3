//! Built-in numerical self-test behind `swipt-twr validate`.

use crate::analytic::{broadcast_success, evaluate, pdf_y, DEGENERATE_SWITCH};
use crate::model::{validate, SystemConfig};
use crate::montecarlo::estimate_outage;
use crate::specfun::{bessel_k_scaled, bessel_k_scaled_by_quadrature, integrate, QuadratureSpec, SpecfunError};

/// Signature of `e^x K_ν(x)`; swappable so tests can inject a faulty one.
pub type ScaledBessel = fn(u32, f64) -> Result<f64, SpecfunError>;

pub const MC_SMOKE_TRIALS: u64 = 100_000;
pub const MC_SMOKE_SEED: u64 = 2024;
pub const MC_SMOKE_MAX_Z: f64 = 4.0;

#[derive(Debug, Clone, Copy)]
pub struct SelfCheckOptions {
    pub fast: bool,
    pub bessel: ScaledBessel,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        SelfCheckOptions { fast: false, bessel: bessel_k_scaled }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

pub fn run_checks(opts: &SelfCheckOptions) -> Vec<CheckResult> {
    let mut out = vec![check_bessel(opts.bessel), check_pdf_normalization(), check_degenerate_continuity()];
    if !opts.fast {
        out.push(check_mc_smoke());
    }
    out
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn check_bessel(f: ScaledBessel) -> CheckResult {
    let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-300, max_subdivisions: 5000 };
    let mut worst = 0.0f64;
    let mut at = (0, 0.0);
    for &x in &[1e-6, 1e-3, 0.1, 0.5, 1.0, 1.99, 2.01, 3.0, 10.0, 50.0, 300.0, 700.0] {
        for order in 1..=2 {
            let err = match (f(order, x), bessel_k_scaled_by_quadrature(order, x, &spec)) {
                (Ok(v), Ok(q)) => ((v - q) / q).abs(),
                _ => f64::INFINITY,
            };
            if !(err <= worst) {
                worst = err;
                at = (order, x);
            }
        }
    }
    result(
        "bessel_vs_quadrature",
        worst <= 1e-10,
        format!("max rel err {worst:.3e} at K{}({})", at.0, at.1),
    )
}

fn check_pdf_normalization() -> CheckResult {
    let spec = QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-15);
    let cases = [(1.0, 1.0, 1.0, 1.0), (1.0, 2.0, 1.0, 1.0), (0.3, 5.0, 2.0, 0.5), (1e4, 1e4, 1.0, 1.0), (2.0, 1.0, 1.0, 0.5)];
    let mut worst = 0.0f64;
    for &(a, b, l1, l2) in &cases {
        let scale = a / l1 + b / l2;
        // y = scale * e^u
        let mass = integrate(
            |u| {
                let y = scale * u.exp();
                pdf_y(y, a, b, l1, l2) * y
            },
            -40.0,
            4.0,
            &spec,
        )
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
        let err = (mass - 1.0).abs();
        if !(err <= worst) {
            worst = err;
        }
    }
    result("pdf_y_normalization", worst <= 1e-9, format!("max |mass - 1| = {worst:.3e}"))
}

fn check_degenerate_continuity() -> CheckResult {
    let mut worst = 0.0f64;
    for &k in &[1e-3, 0.1, 1.0, 10.0] {
        for &beta in &[0.01, 1.0, 30.0] {
            let below = 0.99 * DEGENERATE_SWITCH;
            let above = 1.01 * DEGENERATE_SWITCH;
            // relative gap d = (b2 - b1) / (b1 + b2)
            let pair = |d: f64| (beta * (1.0 - d), beta * (1.0 + d));
            let (b1, b2) = pair(below);
            let inside = broadcast_success(k, b1, b2);
            let (b1, b2) = pair(above);
            let outside = broadcast_success(k, b1, b2);
            if !inside.degenerate || outside.degenerate {
                worst = f64::INFINITY;
                continue;
            }
            let scale = inside.prob.max(1e-300);
            worst = worst.max((inside.prob - outside.prob).abs() / scale);
        }
    }
    result("degenerate_switch_continuity", worst <= 1e-6, format!("max rel jump {worst:.3e}"))
}

fn check_mc_smoke() -> CheckResult {
    let cfg = validate(SystemConfig::reference()).expect("reference config is valid");
    let analytic = evaluate(&cfg).outage;
    match estimate_outage(&cfg, MC_SMOKE_TRIALS, MC_SMOKE_SEED) {
        Ok((pu, su)) => {
            let zp = pu.z_score(analytic.p_out_pu);
            let zs = su.z_score(analytic.p_out_su);
            result(
                "mc_smoke",
                zp.abs() <= MC_SMOKE_MAX_Z && zs.abs() <= MC_SMOKE_MAX_Z,
                format!("{MC_SMOKE_TRIALS} trials, z_pu = {zp:.2}, z_su = {zs:.2}"),
            )
        }
        Err(e) => result("mc_smoke", false, e.to_string()),
    }
}
