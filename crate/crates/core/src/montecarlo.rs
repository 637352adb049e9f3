//! Trial-by-trial simulation of the three-phase protocol.
//!
//! Each trial draws the seven squared channel gains, computes every
//! instantaneous rate straight from the signal model (received powers,
//! harvested power, interference) and records which outage events fired.
//! Nothing here reuses the closed-form shorthand beyond `a` and `b`, so the
//! estimates are an independent check on [`crate::analytic`].
//!
//! Trial `i` under seed `s` always uses ChaCha8 keyed by `s` on stream `i`.
//! Outage counts are integers, so the result is identical for any number of
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{derive, DerivedConstants, ValidatedConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// One realization of the squared channel magnitudes `|h_i|²`, i = 1..7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw(pub [f64; 7]);

impl FadingDraw {
    pub fn x(&self, i: usize) -> f64 {
        self.0[i - 1]
    }
}

/// Rates (bits/s/Hz) and outage flags for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub r_su1_ph1: f64,
    pub r_su1_ph2: f64,
    pub r_su2_ph1: f64,
    pub r_su2_ph2: f64,
    pub r_pu1_ph3: f64,
    pub r_pu2_ph3: f64,
    pub r_su2_ph3: f64,
    /// SU₁'s phase-3 transmit power from the energy harvested in phases 1–2.
    pub harvested_power: f64,
    pub pu_outage: bool,
    pub su_outage: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// 95 % Wilson score interval, reported when fewer than ten events were
    /// expected under `p_hat` (the normal approximation is poor there).
    pub wilson: Option<(f64, f64)>,
}

impl OutageEstimate {
    pub fn from_count(events: u64, n_trials: u64, seed: u64) -> Self {
        let n = n_trials as f64;
        let p_hat = events as f64 / n;
        let stderr = (p_hat * (1.0 - p_hat) / n).sqrt();
        let wilson = (p_hat * n < 10.0).then(|| wilson_interval(events, n_trials, 1.959_963_984_540_054));
        OutageEstimate { p_hat, stderr, n_trials, seed, wilson }
    }

    /// Standardized distance to a reference probability. Zero-variance
    /// estimates give 0 on an exact match and infinity otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.p_hat - reference;
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Wilson score interval for `events` successes out of `n`.
pub fn wilson_interval(events: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes; the formula rounds
    let lo = if events == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if p == 1.0 { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// The generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seven independent exponential variates by inverse transform.
pub fn sample_draw<R: Rng + ?Sized>(rng: &mut R, lambdas: &[f64; 7]) -> FadingDraw {
    let mut x = [0.0; 7];
    for (xi, &l) in x.iter_mut().zip(lambdas) {
        // 1 - U lies in (0, 1], so the log is finite
        let u: f64 = rng.random();
        *xi = -(1.0 - u).ln() / l;
    }
    FadingDraw(x)
}

fn quarter_rate(snr: f64) -> f64 {
    0.25 * (1.0 + snr).log2()
}

fn half_rate(sinr: f64) -> f64 {
    0.5 * (1.0 + sinr).log2()
}

/// Evaluates one trial of the protocol for a given fading draw.
pub fn run_trial(cfg: &ValidatedConfig, dc: &DerivedConstants, draw: &FadingDraw) -> TrialOutcome {
    let m = cfg.path_loss_exp;
    let d = &dc.dist;
    let (l1, l2, l3, l4, l5) = (d.d1.powf(m), d.d2.powf(m), d.d3.powf(m), d.d4.powf(m), d.d5.powf(m));
    let [x1, x2, x3, x4, x5, x6, x7] = draw.0;

    // phases 1-2: SU1's information branch keeps (1 - rho) of the signal
    let r_su1_ph1 = quarter_rate((1.0 - cfg.rho1) * cfg.pp1 * x1 / (l1 * dc.sigma2_eff1));
    let r_su1_ph2 = quarter_rate((1.0 - cfg.rho2) * cfg.pp2 * x2 / (l2 * dc.sigma2_eff2));
    let r_su2_ph1 = quarter_rate(cfg.pp1 * x3 / (l3 * cfg.sigma2_su2));
    let r_su2_ph2 = quarter_rate(cfg.pp2 * x4 / (l4 * cfg.sigma2_su2));

    // energy from T/4 + T/4 spent over T/2
    let harvested_power = 0.5 * cfg.eta * (dc.a * x1 + dc.b * x2);
    let relay = cfg.alpha * harvested_power;
    let secondary = (1.0 - cfg.alpha) * harvested_power;

    // phase 3: the secondary layer interferes with primary decoding
    let sinr_pu1 = relay * x6 / l1 / (secondary * x6 / l1 + cfg.sigma2_pu1);
    let sinr_pu2 = relay * x7 / l2 / (secondary * x7 / l2 + cfg.sigma2_pu2);
    let snr_su2 = secondary * x5 / (l5 * cfg.sigma2_su2);
    let r_pu1_ph3 = half_rate(sinr_pu1);
    let r_pu2_ph3 = half_rate(sinr_pu2);
    let r_su2_ph3 = half_rate(snr_su2);

    let rp = cfg.rate_pu;
    let su1_decodes = r_su1_ph1 > rp && r_su1_ph2 > rp;
    let pu_ok = su1_decodes && r_pu1_ph3 > rp && r_pu2_ph3 > rp;
    let su_ok = su1_decodes && r_su2_ph1 > rp && r_su2_ph2 > rp && r_su2_ph3 > cfg.rate_su;

    TrialOutcome {
        r_su1_ph1,
        r_su1_ph2,
        r_su2_ph1,
        r_su2_ph2,
        r_pu1_ph3,
        r_pu2_ph3,
        r_su2_ph3,
        harvested_power,
        pu_outage: !pu_ok,
        su_outage: !su_ok,
    }
}

/// Monte Carlo estimates of the primary and secondary outage probabilities.
pub fn estimate_outage(
    cfg: &ValidatedConfig,
    n_trials: u64,
    seed: u64,
) -> Result<(OutageEstimate, OutageEstimate), McError> {
    if n_trials == 0 {
        return Err(McError::NoTrials);
    }
    let dc = derive(cfg);
    let (pu, su) = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let draw = sample_draw(&mut rng, &cfg.lambdas);
            let t = run_trial(cfg, &dc, &draw);
            (t.pu_outage as u64, t.su_outage as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((OutageEstimate::from_count(pu, n_trials, seed), OutageEstimate::from_count(su, n_trials, seed)))
}
