//! Network parameters, geometry and the derived shorthand constants.
//!
//! Everything here is stored in linear units. dB conversion only happens at
//! the config-file boundary (see [`crate::config_file`]).

use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

/// Noise model at SU₁'s information receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NoiseMode {
    /// One fixed effective variance, independent of the splitting factor.
    Combined { sigma2: f64 },
    /// `(1 - rho) * sigma2_su1 + sigma2_c`, evaluated per phase.
    Split { sigma2_su1: f64, sigma2_c: f64 },
}

/// Node placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Geometry {
    /// All five link distances given directly.
    Explicit { d1: f64, d2: f64, d3: f64, d4: f64, d5: f64 },
    /// PU₁ at the origin, PU₂ at `(length, 0)`, SU₁ at `(d1, 0)` and SU₂
    /// at `(length / 2, su2_offset)`.
    LineLayout { length: f64, d1: f64, su2_offset: f64 },
}

/// Resolved link distances in meters.
///
/// `d1`: PU₁–SU₁, `d2`: PU₂–SU₁, `d3`: PU₁–SU₂, `d4`: PU₂–SU₂, `d5`: SU₁–SU₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
}

/// Full parameter set of the three-phase protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Transmit power of PU₁ (linear, normalized to unit noise).
    pub pp1: f64,
    /// Transmit power of PU₂.
    pub pp2: f64,
    /// Energy conversion efficiency.
    pub eta: f64,
    /// Share of SU₁'s harvested power spent relaying primary data.
    pub alpha: f64,
    /// Power-splitting factor in phase 1 (fraction sent to the harvester).
    pub rho1: f64,
    /// Power-splitting factor in phase 2.
    pub rho2: f64,
    /// Path-loss exponent.
    pub path_loss_exp: f64,
    /// Primary target rate, bits/s/Hz.
    pub rate_pu: f64,
    /// Secondary target rate, bits/s/Hz.
    pub rate_su: f64,
    pub sigma2_pu1: f64,
    pub sigma2_pu2: f64,
    pub sigma2_su2: f64,
    pub noise_mode: NoiseMode,
    /// Exponential rates of X₁..X₇ (reciprocal mean channel power).
    pub lambdas: [f64; 7],
    pub geometry: Geometry,
}

impl SystemConfig {
    /// The reference operating point: L = 2 m, 40 dB per PU, η = 0.9,
    /// α = 0.9, ρ₁ = ρ₂ = 0.5, m = 3, unit target rates, unit noise and
    /// unit-mean fading.
    pub fn reference() -> Self {
        SystemConfig {
            pp1: 1e4,
            pp2: 1e4,
            eta: 0.9,
            alpha: 0.9,
            rho1: 0.5,
            rho2: 0.5,
            path_loss_exp: 3.0,
            rate_pu: 1.0,
            rate_su: 1.0,
            sigma2_pu1: 1.0,
            sigma2_pu2: 1.0,
            sigma2_su2: 1.0,
            noise_mode: NoiseMode::Combined { sigma2: 1.0 },
            lambdas: [1.0; 7],
            geometry: Geometry::LineLayout { length: 2.0, d1: 1.0, su2_offset: 1.0 },
        }
    }

    /// Sets both splitting factors.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho1 = rho;
        self.rho2 = rho;
        self
    }

    /// Sets both PU powers from a per-PU dB value.
    pub fn with_power_db(mut self, db: f64) -> Self {
        let p = db_to_linear(db);
        self.pp1 = p;
        self.pp2 = p;
        self
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::reference()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// A single out-of-range field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field} = {value} is out of range (allowed: {allowed})")]
pub struct RangeViolation {
    pub field: String,
    pub value: f64,
    pub allowed: &'static str,
}

/// Every violation found in a config, in field order.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<RangeViolation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl ValidationError {
    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.violations.iter().map(|v| v.field.as_str())
    }
}

/// A config that has passed [`validate`]. Derefs to the inner config.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedConfig(SystemConfig);

impl ValidatedConfig {
    pub fn into_inner(self) -> SystemConfig {
        self.0
    }
}

impl Deref for ValidatedConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.0
    }
}

#[derive(Default)]
struct Checker {
    violations: Vec<RangeViolation>,
}

impl Checker {
    fn check(&mut self, field: impl Into<String>, value: f64, ok: bool, allowed: &'static str) {
        if !(ok && value.is_finite()) {
            self.violations.push(RangeViolation { field: field.into(), value, allowed });
        }
    }

    fn positive(&mut self, field: impl Into<String>, value: f64) {
        self.check(field, value, value > 0.0, "> 0");
    }

    fn open_unit(&mut self, field: impl Into<String>, value: f64) {
        self.check(field, value, value > 0.0 && value < 1.0, "(0, 1)");
    }
}

/// Checks every invariant and reports all violations at once.
pub fn validate(cfg: SystemConfig) -> Result<ValidatedConfig, ValidationError> {
    let mut c = Checker::default();
    c.positive("pp1", cfg.pp1);
    c.positive("pp2", cfg.pp2);
    c.check("eta", cfg.eta, cfg.eta > 0.0 && cfg.eta <= 1.0, "(0, 1]");
    c.open_unit("alpha", cfg.alpha);
    c.open_unit("rho1", cfg.rho1);
    c.open_unit("rho2", cfg.rho2);
    c.positive("m", cfg.path_loss_exp);
    c.check("rp", cfg.rate_pu, cfg.rate_pu >= 0.0, ">= 0");
    c.check("rs", cfg.rate_su, cfg.rate_su >= 0.0, ">= 0");
    c.positive("sigma2_pu1", cfg.sigma2_pu1);
    c.positive("sigma2_pu2", cfg.sigma2_pu2);
    c.positive("sigma2_su2", cfg.sigma2_su2);
    match cfg.noise_mode {
        NoiseMode::Combined { sigma2 } => c.positive("sigma2", sigma2),
        NoiseMode::Split { sigma2_su1, sigma2_c } => {
            c.positive("sigma2_su1", sigma2_su1);
            c.positive("sigma2_c", sigma2_c);
        }
    }
    for (i, &l) in cfg.lambdas.iter().enumerate() {
        c.positive(format!("lambda{}", i + 1), l);
    }
    match cfg.geometry {
        Geometry::Explicit { d1, d2, d3, d4, d5 } => {
            for (name, d) in [("d1", d1), ("d2", d2), ("d3", d3), ("d4", d4), ("d5", d5)] {
                c.positive(name, d);
            }
        }
        Geometry::LineLayout { length, d1, su2_offset } => {
            if let Err(e) = layout_distances(length, d1, su2_offset) {
                c.violations.extend(e.violations);
            }
        }
    }
    if c.violations.is_empty() {
        Ok(ValidatedConfig(cfg))
    } else {
        Err(ValidationError { violations: c.violations })
    }
}

/// Link distances for the line layout. SU₂ sits above the PU₁–PU₂ midpoint.
pub fn layout_distances(length: f64, d1: f64, su2_offset: f64) -> Result<Distances, ValidationError> {
    let mut c = Checker::default();
    c.positive("L", length);
    c.check("d1", d1, d1 > 0.0 && d1 < length, "(0, L)");
    c.positive("su2_offset", su2_offset);
    if !c.violations.is_empty() {
        return Err(ValidationError { violations: c.violations });
    }
    Ok(line_distances(length, d1, su2_offset))
}

fn line_distances(length: f64, d1: f64, su2_offset: f64) -> Distances {
    let half = length / 2.0;
    let d_pu_su2 = half.hypot(su2_offset);
    Distances {
        d1,
        d2: length - d1,
        d3: d_pu_su2,
        d4: d_pu_su2,
        d5: (d1 - half).hypot(su2_offset),
    }
}

impl Geometry {
    /// Resolves the link distances. Only meaningful on validated input.
    pub fn distances(&self) -> Distances {
        match *self {
            Geometry::Explicit { d1, d2, d3, d4, d5 } => Distances { d1, d2, d3, d4, d5 },
            Geometry::LineLayout { length, d1, su2_offset } => line_distances(length, d1, su2_offset),
        }
    }
}

/// Shorthand constants shared by the closed forms and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// ρ₁·Pp1 / d1^m
    pub a: f64,
    /// ρ₂·Pp2 / d2^m
    pub b: f64,
    /// α·η / (2·d1^m·σ²_PU1)
    pub a_p: f64,
    /// (1−α)·η / (2·d1^m·σ²_PU1)
    pub b_p: f64,
    /// α·η / (2·d2^m·σ²_PU2)
    pub a_pp: f64,
    /// (1−α)·η / (2·d2^m·σ²_PU2)
    pub b_pp: f64,
    /// (1−α)·η / (2·d5^m·σ²_SU2)
    pub c: f64,
    /// 2^(4·Rp) − 1, threshold for the quarter-slot primary hops.
    pub gamma_p1: f64,
    /// 2^(2·Rp) − 1, threshold for the half-slot broadcast to the PUs.
    pub gamma_p2: f64,
    /// 2^(2·Rs) − 1
    pub gamma_s: f64,
    /// Effective noise at SU₁'s information receiver in phase 1.
    pub sigma2_eff1: f64,
    /// Same for phase 2.
    pub sigma2_eff2: f64,
    pub dist: Distances,
}

pub fn derive(cfg: &ValidatedConfig) -> DerivedConstants {
    let dist = cfg.geometry.distances();
    let m = cfg.path_loss_exp;
    let (l1, l2, l5) = (dist.d1.powf(m), dist.d2.powf(m), dist.d5.powf(m));
    let (alpha, eta) = (cfg.alpha, cfg.eta);
    let (sigma2_eff1, sigma2_eff2) = match cfg.noise_mode {
        NoiseMode::Combined { sigma2 } => (sigma2, sigma2),
        NoiseMode::Split { sigma2_su1, sigma2_c } => (
            (1.0 - cfg.rho1) * sigma2_su1 + sigma2_c,
            (1.0 - cfg.rho2) * sigma2_su1 + sigma2_c,
        ),
    };
    DerivedConstants {
        a: cfg.rho1 * cfg.pp1 / l1,
        b: cfg.rho2 * cfg.pp2 / l2,
        a_p: alpha * eta / (2.0 * l1 * cfg.sigma2_pu1),
        b_p: (1.0 - alpha) * eta / (2.0 * l1 * cfg.sigma2_pu1),
        a_pp: alpha * eta / (2.0 * l2 * cfg.sigma2_pu2),
        b_pp: (1.0 - alpha) * eta / (2.0 * l2 * cfg.sigma2_pu2),
        c: (1.0 - alpha) * eta / (2.0 * l5 * cfg.sigma2_su2),
        gamma_p1: (4.0 * cfg.rate_pu).exp2() - 1.0,
        gamma_p2: (2.0 * cfg.rate_pu).exp2() - 1.0,
        gamma_s: (2.0 * cfg.rate_su).exp2() - 1.0,
        sigma2_eff1,
        sigma2_eff2,
        dist,
    }
}

impl DerivedConstants {
    /// Phase-3 primary SINR ceiling α/(1−α).
    pub fn sinr_ceiling(&self) -> f64 {
        self.a_p / self.b_p
    }
}
