//! One-parameter sweeps over the splitting factor, relay position or PU
//! power, with optional Monte Carlo columns next to the closed forms.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic;
use crate::model::{validate, Geometry, SystemConfig, ValidationError};
use crate::montecarlo::{estimate_outage, McError};

pub const CSV_HEADER: &str = "param,pu_analytic,su_analytic,pu_mc,pu_mc_stderr,su_mc,su_mc_stderr,se,ee";

/// Refinement grid is this many times finer than the coarse one.
const REFINE_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// ρ₁ = ρ₂ = ρ.
    Rho,
    /// Relay position along the PU₁–PU₂ line (needs a line layout).
    D1,
    /// Per-PU transmit power in dB, Pp1 = Pp2.
    PowerDb,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Rho => "rho",
            SweepParameter::D1 => "d1",
            SweepParameter::PowerDb => "power_db",
        }
    }

    /// Returns `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig, SweepError> {
        let mut cfg = base.clone();
        match self {
            SweepParameter::Rho => cfg = cfg.with_rho(value),
            SweepParameter::PowerDb => cfg = cfg.with_power_db(value),
            SweepParameter::D1 => match &mut cfg.geometry {
                Geometry::LineLayout { d1, .. } => *d1 = value,
                Geometry::Explicit { .. } => return Err(SweepError::NeedsLineLayout),
            },
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rho" => Ok(SweepParameter::Rho),
            "d1" => Ok(SweepParameter::D1),
            "power_db" => Ok(SweepParameter::PowerDb),
            other => Err(format!("unknown sweep parameter `{other}` (expected rho, d1 or power_db)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// Monte Carlo trials per grid point; 0 skips simulation.
    pub mc_trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn analytic(parameter: SweepParameter, from: f64, to: f64, steps: usize) -> Self {
        SweepSpec { parameter, from, to, steps, mc_trials: 0, seed: 0 }
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.to - self.from;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == last { self.to } else { self.from + span * i as f64 / last as f64 })
            .collect()
    }

    fn check(&self) -> Result<(), SweepError> {
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(SweepError::InvalidRange { from: self.from, to: self.to });
        }
        if self.steps < 2 {
            return Err(SweepError::TooFewSteps(self.steps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub pu_analytic: f64,
    pub su_analytic: f64,
    pub pu_mc: Option<f64>,
    pub pu_mc_stderr: Option<f64>,
    pub su_mc: Option<f64>,
    pub su_mc_stderr: Option<f64>,
    pub se: f64,
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub base: SystemConfig,
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    PuAnalytic,
    SuAnalytic,
    PuMc,
    SuMc,
    Se,
    Ee,
}

impl Column {
    fn get(self, row: &SweepRow) -> Option<f64> {
        match self {
            Column::PuAnalytic => Some(row.pu_analytic),
            Column::SuAnalytic => Some(row.su_analytic),
            Column::PuMc => row.pu_mc,
            Column::SuMc => row.su_mc,
            Column::Se => Some(row.se),
            Column::Ee => Some(row.ee),
        }
    }

    /// Efficiencies are maximized, outages minimized.
    fn maximize(self) -> bool {
        matches!(self, Column::Se | Column::Ee)
    }
}

/// Which extreme of a column [`improvement_ratio`] compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    /// Best (lowest) value over the grid.
    Minimum,
    /// Worst (highest) value over the grid.
    WorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub param: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep range [{from}, {to}] must be finite with from < to")]
    InvalidRange { from: f64, to: f64 },
    #[error("a sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("a d1 sweep needs a line-layout geometry")]
    NeedsLineLayout,
    #[error("grid point {index} ({parameter} = {value}): {source}")]
    GridPoint {
        index: usize,
        parameter: SweepParameter,
        value: f64,
        source: ValidationError,
    },
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error("sweep has no rows")]
    EmptySweep,
    #[error("column not present in this sweep (Monte Carlo disabled?)")]
    MissingColumn,
    #[error("sweeps are not on the same grid")]
    GridMismatch,
}

/// Evaluates every grid point. Rows come back in grid order.
pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.check()?;
    let grid = spec.grid();
    let configs = grid
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let cfg = spec.parameter.apply(base, value)?;
            validate(cfg).map_err(|source| SweepError::GridPoint { index, parameter: spec.parameter, value, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = grid
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&param, cfg)| {
            let report = analytic::evaluate(cfg);
            let mut row = SweepRow {
                param,
                pu_analytic: report.outage.p_out_pu,
                su_analytic: report.outage.p_out_su,
                pu_mc: None,
                pu_mc_stderr: None,
                su_mc: None,
                su_mc_stderr: None,
                se: report.spectrum_efficiency,
                ee: report.energy_efficiency,
            };
            if spec.mc_trials > 0 {
                let (pu, su) = estimate_outage(cfg, spec.mc_trials, spec.seed)?;
                row.pu_mc = Some(pu.p_hat);
                row.pu_mc_stderr = Some(pu.stderr);
                row.su_mc = Some(su.p_hat);
                row.su_mc_stderr = Some(su.stderr);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, SweepError>>()?;

    Ok(SweepResult { base: base.clone(), spec: *spec, rows })
}

impl SweepResult {
    pub fn params(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.param).collect()
    }

    pub fn column(&self, column: Column) -> Result<Vec<f64>, SweepError> {
        self.rows.iter().map(|r| column.get(r).ok_or(SweepError::MissingColumn)).collect()
    }

    /// Grid index of the best value, first occurrence on ties.
    pub fn best_index(&self, column: Column) -> Result<usize, SweepError> {
        let values = self.column(column)?;
        let mut best: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) if column.maximize() => v > values[b],
                Some(b) => v < values[b],
            };
            if better {
                best = Some(i);
            }
        }
        best.ok_or(SweepError::EmptySweep)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(r.param),
                fmt_f64(r.pu_analytic),
                fmt_f64(r.su_analytic),
                opt(r.pu_mc),
                opt(r.pu_mc_stderr),
                opt(r.su_mc),
                opt(r.su_mc_stderr),
                fmt_f64(r.se),
                fmt_f64(r.ee),
            );
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Best grid value of `column`, then one re-sweep ten times finer over the
/// neighbouring grid cells to pin it down.
pub fn find_optimum(result: &SweepResult, column: Column) -> Result<Optimum, SweepError> {
    if result.rows.is_empty() {
        return Err(SweepError::EmptySweep);
    }
    let i = result.best_index(column)?;
    let coarse = Optimum { param: result.rows[i].param, value: column.get(&result.rows[i]).expect("checked") };
    if result.rows.len() < 2 {
        return Ok(coarse);
    }
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(result.rows.len() - 1);
    let fine_spec = SweepSpec {
        from: result.rows[lo].param,
        to: result.rows[hi].param,
        steps: (hi - lo) * REFINE_FACTOR + 1,
        ..result.spec
    };
    let fine = run_sweep(&result.base, &fine_spec)?;
    let j = fine.best_index(column)?;
    let refined = Optimum { param: fine.rows[j].param, value: column.get(&fine.rows[j]).expect("checked") };
    // first-occurrence tie-breaking carries over from the coarse grid
    let keep_coarse = if column.maximize() { coarse.value >= refined.value } else { coarse.value <= refined.value };
    Ok(if keep_coarse { coarse } else { refined })
}

/// Percentage improvement of `b` over `a`: `100 · (1 − ext(b) / ext(a))`
/// where `ext` is the grid minimum or maximum of `column`.
pub fn improvement_ratio(a: &SweepResult, b: &SweepResult, column: Column, extremum: Extremum) -> Result<f64, SweepError> {
    if a.rows.is_empty() || b.rows.is_empty() {
        return Err(SweepError::EmptySweep);
    }
    if a.params() != b.params() {
        return Err(SweepError::GridMismatch);
    }
    let pick = |r: &SweepResult| -> Result<f64, SweepError> {
        let values = r.column(column)?;
        Ok(match extremum {
            Extremum::Minimum => values.iter().copied().fold(f64::INFINITY, f64::min),
            Extremum::WorstCase => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    };
    let (ea, eb) = (pick(a)?, pick(b)?);
    Ok(100.0 * (1.0 - eb / ea))
}

/// A gnuplot script plotting the outage columns of `csv_path` on a log
/// axis, with SE on the second axis for power sweeps.
pub fn gnuplot_script(csv_path: &str, parameter: SweepParameter, with_mc: bool) -> String {
    let xlabel = match parameter {
        SweepParameter::Rho => "power splitting factor rho",
        SweepParameter::D1 => "relay distance from PU1 d1 (m)",
        SweepParameter::PowerDb => "per-PU normalized transmit power (dB)",
    };
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel 'outage probability'");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set grid");
    let mut plots = vec![
        format!("'{csv_path}' using 1:2 with lines title 'PU analytic'"),
        format!("'{csv_path}' using 1:3 with lines title 'SU analytic'"),
    ];
    if with_mc {
        plots.push(format!("'{csv_path}' using 1:4:5 with yerrorbars title 'PU simulation'"));
        plots.push(format!("'{csv_path}' using 1:6:7 with yerrorbars title 'SU simulation'"));
    }
    if parameter == SweepParameter::PowerDb {
        let _ = writeln!(s, "set y2label 'spectrum efficiency (bps/Hz)'");
        let _ = writeln!(s, "set y2tics");
        plots.push(format!("'{csv_path}' using 1:8 axes x1y2 with linespoints title 'SE'"));
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
