//! Closed-form success probabilities per phase, the primary/secondary outage
//! expressions built from them, and the spectrum/energy efficiency metrics.
//!
//! The broadcast-phase probabilities all have the shape `Pr{X > k / Y}` with
//! `X ~ Exp(λ)` and `Y = a·X₁ + b·X₂` hypoexponential. Writing
//! `β₁ = λ₁/a`, `β₂ = λ₂/b` and `x_i = 2√(λk·β_i)`, the result is
//!
//! ```text
//! P = (β₂·x₁K₁(x₁) − β₁·x₂K₁(x₂)) / (β₂ − β₁)
//! ```
//!
//! which is 0/0 when `β₁ = β₂`. There the Erlang-2 limit
//! `P = 2z·K₂(2√z)`, `z = λkβ`, is used instead.

use serde::Serialize;

use crate::model::{derive, DerivedConstants, ValidatedConfig};
use crate::specfun::bessel_k_scaled;

/// Relative rate gap `|β₁ − β₂| / (β₁ + β₂)` below which the Erlang-2
/// limit replaces the general hypoexponential expression.
pub const DEGENERATE_SWITCH: f64 = 1e-6;

/// Factors smaller than this push the product into log space.
const LOG_PRODUCT_THRESHOLD: f64 = 1e-12;

/// Result of a broadcast-phase evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadcastSuccess {
    pub prob: f64,
    pub degenerate: bool,
}

/// Every success-probability factor of the two outage expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseProbabilities {
    pub p_su1_ph1: f64,
    pub p_su1_ph2: f64,
    pub p_su2_ph1: f64,
    pub p_su2_ph2: f64,
    pub p_pu1_ph3: f64,
    pub p_pu2_ph3: f64,
    pub p_su2_ph3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticOutage {
    pub p_out_pu: f64,
    pub p_out_su: f64,
    /// Whether any broadcast-phase factor went through the Erlang-2 branch.
    pub degenerate_branch_used: bool,
}

/// Everything the closed forms produce for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub phases: PhaseProbabilities,
    pub outage: AnalyticOutage,
    pub spectrum_efficiency: f64,
    pub energy_efficiency: f64,
}

/// `x·K₁(x)` on `x >= 0`, equal to 1 at the origin.
fn x_k1(x: f64) -> f64 {
    if x < 1e-150 {
        return 1.0;
    }
    if x > 745.0 {
        return 0.0;
    }
    x * bessel_k_scaled(1, x).expect("positive argument") * (-x).exp()
}

/// `Pr{X > k/Y}` for `X ~ Exp(1)` after folding λ into `k_eff = λ·k`, and
/// `Y` with rates `beta1`, `beta2`.
pub fn broadcast_success(k_eff: f64, beta1: f64, beta2: f64) -> BroadcastSuccess {
    let degenerate = (beta1 - beta2).abs() < DEGENERATE_SWITCH * (beta1 + beta2);
    if k_eff <= 0.0 {
        return BroadcastSuccess { prob: 1.0, degenerate };
    }
    if !k_eff.is_finite() {
        return BroadcastSuccess { prob: 0.0, degenerate };
    }
    let prob = if degenerate {
        // geometric mean keeps the branch switch second-order accurate
        let beta = (beta1 * beta2).sqrt();
        erlang_success(k_eff * beta)
    } else {
        let h1 = x_k1(2.0 * (k_eff * beta1).sqrt());
        let h2 = x_k1(2.0 * (k_eff * beta2).sqrt());
        (beta2 * h1 - beta1 * h2) / (beta2 - beta1)
    };
    BroadcastSuccess { prob: prob.clamp(0.0, 1.0), degenerate }
}

/// `2z·K₂(2√z)`, i.e. `Pr{X > k/Y}` with `Y ~ Erlang(2, β)` and `z = kβ`.
fn erlang_success(z: f64) -> f64 {
    if z < 1e-200 {
        return 1.0;
    }
    let x = 2.0 * z.sqrt();
    if x > 745.0 {
        return 0.0;
    }
    2.0 * z * bessel_k_scaled(2, x).expect("positive argument") * (-x).exp()
}

/// Success of PU₁ → SU₁ decoding in phase 1.
pub fn p_su1_phase1(dc: &DerivedConstants, cfg: &ValidatedConfig) -> f64 {
    let path = dc.dist.d1.powf(cfg.path_loss_exp);
    (-cfg.lambdas[0] * dc.gamma_p1 * path * dc.sigma2_eff1 / ((1.0 - cfg.rho1) * cfg.pp1)).exp()
}

/// Success of PU₂ → SU₁ decoding in phase 2.
pub fn p_su1_phase2(dc: &DerivedConstants, cfg: &ValidatedConfig) -> f64 {
    let path = dc.dist.d2.powf(cfg.path_loss_exp);
    (-cfg.lambdas[1] * dc.gamma_p1 * path * dc.sigma2_eff2 / ((1.0 - cfg.rho2) * cfg.pp2)).exp()
}

/// SU₂ overhearing PU₁ in phase 1 (full received power, no split).
pub fn p_su2_phase1(dc: &DerivedConstants, cfg: &ValidatedConfig) -> f64 {
    let path = dc.dist.d3.powf(cfg.path_loss_exp);
    (-cfg.lambdas[2] * dc.gamma_p1 * path * cfg.sigma2_su2 / cfg.pp1).exp()
}

/// SU₂ overhearing PU₂ in phase 2.
pub fn p_su2_phase2(dc: &DerivedConstants, cfg: &ValidatedConfig) -> f64 {
    let path = dc.dist.d4.powf(cfg.path_loss_exp);
    (-cfg.lambdas[3] * dc.gamma_p1 * path * cfg.sigma2_su2 / cfg.pp2).exp()
}

fn above_ceiling(dc: &DerivedConstants, cfg: &ValidatedConfig) -> bool {
    dc.gamma_p2 >= cfg.alpha / (1.0 - cfg.alpha)
}

fn rates(dc: &DerivedConstants, cfg: &ValidatedConfig) -> (f64, f64) {
    (cfg.lambdas[0] / dc.a, cfg.lambdas[1] / dc.b)
}

/// Phase-3 primary decoding at a PU with SINR constants `(a_x, b_x)` and
/// fading rate `lambda`.
fn pu_broadcast(dc: &DerivedConstants, cfg: &ValidatedConfig, a_x: f64, b_x: f64, lambda: f64) -> BroadcastSuccess {
    let (beta1, beta2) = rates(dc, cfg);
    let den = a_x - dc.gamma_p2 * b_x;
    if above_ceiling(dc, cfg) || den <= 0.0 {
        let degenerate = (beta1 - beta2).abs() < DEGENERATE_SWITCH * (beta1 + beta2);
        return BroadcastSuccess { prob: 0.0, degenerate };
    }
    broadcast_success(lambda * dc.gamma_p2 / den, beta1, beta2)
}

/// Success of the phase-3 broadcast at PU₁.
pub fn p_pu1_phase3(dc: &DerivedConstants, cfg: &ValidatedConfig) -> BroadcastSuccess {
    pu_broadcast(dc, cfg, dc.a_p, dc.b_p, cfg.lambdas[5])
}

/// Success of the phase-3 broadcast at PU₂.
pub fn p_pu2_phase3(dc: &DerivedConstants, cfg: &ValidatedConfig) -> BroadcastSuccess {
    pu_broadcast(dc, cfg, dc.a_pp, dc.b_pp, cfg.lambdas[6])
}

/// Success of SU₂ decoding the secondary message in phase 3. No
/// interference term, so there is no ceiling.
pub fn p_su2_phase3(dc: &DerivedConstants, cfg: &ValidatedConfig) -> BroadcastSuccess {
    let (beta1, beta2) = rates(dc, cfg);
    broadcast_success(cfg.lambdas[4] * dc.gamma_s / dc.c, beta1, beta2)
}

/// Product of probabilities, in log space once any factor is tiny.
pub fn product(factors: &[f64]) -> f64 {
    if factors.contains(&0.0) {
        return 0.0;
    }
    if factors.iter().any(|&p| p < LOG_PRODUCT_THRESHOLD) {
        factors.iter().map(|p| p.ln()).sum::<f64>().exp()
    } else {
        factors.iter().product()
    }
}

pub fn phase_probabilities(dc: &DerivedConstants, cfg: &ValidatedConfig) -> (PhaseProbabilities, bool) {
    let pu1 = p_pu1_phase3(dc, cfg);
    let pu2 = p_pu2_phase3(dc, cfg);
    let su2 = p_su2_phase3(dc, cfg);
    let phases = PhaseProbabilities {
        p_su1_ph1: p_su1_phase1(dc, cfg),
        p_su1_ph2: p_su1_phase2(dc, cfg),
        p_su2_ph1: p_su2_phase1(dc, cfg),
        p_su2_ph2: p_su2_phase2(dc, cfg),
        p_pu1_ph3: pu1.prob,
        p_pu2_ph3: pu2.prob,
        p_su2_ph3: su2.prob,
    };
    (phases, pu1.degenerate || pu2.degenerate || su2.degenerate)
}

impl PhaseProbabilities {
    pub fn outage_pu(&self) -> f64 {
        1.0 - product(&[self.p_su1_ph1, self.p_su1_ph2, self.p_pu1_ph3, self.p_pu2_ph3])
    }

    pub fn outage_su(&self) -> f64 {
        1.0 - product(&[self.p_su1_ph1, self.p_su2_ph1, self.p_su1_ph2, self.p_su2_ph2, self.p_su2_ph3])
    }

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.p_su1_ph1,
            self.p_su1_ph2,
            self.p_su2_ph1,
            self.p_su2_ph2,
            self.p_pu1_ph3,
            self.p_pu2_ph3,
            self.p_su2_ph3,
        ]
    }
}

/// Primary outage: any of the four primary hops failing.
pub fn outage_pu(cfg: &ValidatedConfig) -> f64 {
    let dc = derive(cfg);
    if above_ceiling(&dc, cfg) {
        return 1.0;
    }
    phase_probabilities(&dc, cfg).0.outage_pu()
}

/// Secondary outage: either primary message missed at SU₁ or SU₂, or the
/// secondary message missed at SU₂.
pub fn outage_su(cfg: &ValidatedConfig) -> f64 {
    let dc = derive(cfg);
    phase_probabilities(&dc, cfg).0.outage_su()
}

pub fn outage(cfg: &ValidatedConfig) -> AnalyticOutage {
    evaluate(cfg).outage
}

/// Average spectrum efficiency from the two outage probabilities. Two primary
/// messages and one secondary message per 2T frame.
pub fn spectrum_efficiency_from(cfg: &ValidatedConfig, p_out_pu: f64, p_out_su: f64) -> f64 {
    cfg.rate_pu * (1.0 - p_out_pu) + 0.5 * cfg.rate_su * (1.0 - p_out_su)
}

pub fn spectrum_efficiency(cfg: &ValidatedConfig) -> f64 {
    let o = outage(cfg);
    spectrum_efficiency_from(cfg, o.p_out_pu, o.p_out_su)
}

/// Spectrum efficiency per unit of total (linear) PU transmit power.
pub fn energy_efficiency(cfg: &ValidatedConfig) -> f64 {
    spectrum_efficiency(cfg) / (cfg.pp1 + cfg.pp2)
}

pub fn evaluate(cfg: &ValidatedConfig) -> AnalyticReport {
    let dc = derive(cfg);
    let (phases, degenerate) = phase_probabilities(&dc, cfg);
    let outage = AnalyticOutage {
        p_out_pu: if above_ceiling(&dc, cfg) { 1.0 } else { phases.outage_pu() },
        p_out_su: phases.outage_su(),
        degenerate_branch_used: degenerate,
    };
    let se = spectrum_efficiency_from(cfg, outage.p_out_pu, outage.p_out_su);
    AnalyticReport {
        phases,
        outage,
        spectrum_efficiency: se,
        energy_efficiency: se / (cfg.pp1 + cfg.pp2),
    }
}

/// Density of `Y = a·X₁ + b·X₂` with `X_i ~ Exp(λ_i)`.
pub fn pdf_y(y: f64, a: f64, b: f64, lambda1: f64, lambda2: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (b1, b2) = (lambda1 / a, lambda2 / b);
    if (b1 - b2).abs() < DEGENERATE_SWITCH * (b1 + b2) {
        let beta = (b1 * b2).sqrt();
        return beta * beta * y * (-beta * y).exp();
    }
    let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
    // b1 b2 / (b2 - b1) * (e^{-b1 y} - e^{-b2 y}), symmetric in (b1, b2)
    lo * hi / (hi - lo) * (-lo * y).exp() * -(-(hi - lo) * y).exp_m1()
}

/// Distribution function of `Y`, used by the goodness-of-fit checks.
pub fn cdf_y(y: f64, a: f64, b: f64, lambda1: f64, lambda2: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (b1, b2) = (lambda1 / a, lambda2 / b);
    if (b1 - b2).abs() < DEGENERATE_SWITCH * (b1 + b2) {
        let beta = (b1 * b2).sqrt();
        let t = beta * y;
        return -(-t).exp_m1() - t * (-t).exp();
    }
    1.0 - (b2 * (-b1 * y).exp() - b1 * (-b2 * y).exp()) / (b2 - b1)
}
