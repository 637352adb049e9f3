use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use swipt_twr::analytic::{self, AnalyticReport};
use swipt_twr::config_file::load_config;
use swipt_twr::model::{validate, ValidatedConfig};
use swipt_twr::montecarlo::{estimate_outage, OutageEstimate};
use swipt_twr::selfcheck::{all_passed, run_checks, SelfCheckOptions};
use swipt_twr::sweeps::{fmt_f64, gnuplot_script, run_sweep, SweepParameter, SweepSpec};

/// Outage, spectrum and energy efficiency of a SWIPT two-way cognitive relay.
#[derive(Parser)]
#[command(name = "swipt-twr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// `name = value` config file; missing keys take reference values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form phase probabilities, outage, SE and EE.
    Analytic {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Monte Carlo outage estimates next to the closed forms.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// One-parameter sweep written as CSV or JSON.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        param: SweepParameter,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        steps: u64,
        /// Monte Carlo trials per grid point; 0 for closed forms only.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long, short, value_name = "PATH")]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        /// Also write a gnuplot script next to the output file.
        #[arg(long, requires = "output")]
        gnuplot: bool,
    },
    /// Run the numerical self-test.
    Validate {
        /// Skip the Monte Carlo smoke test.
        #[arg(long)]
        fast: bool,
    },
}

enum Failure {
    /// Bad input; exit 2.
    Usage(String),
    /// Self-test failed; exit 1.
    Checks,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Analytic { cfg, format } => cmd_analytic(&load(&cfg)?, format),
        Command::Simulate { cfg, trials, seed, format } => cmd_simulate(&load(&cfg)?, trials, seed, format),
        Command::Sweep { cfg, param, from, to, steps, trials, seed, output, format, gnuplot } => {
            let spec = SweepSpec { parameter: param, from, to, steps: steps as usize, mc_trials: trials, seed };
            cmd_sweep(&load(&cfg)?, &spec, output.as_deref(), format, gnuplot)
        }
        Command::Validate { fast } => cmd_validate(fast),
    }
}

fn load(args: &ConfigArgs) -> Result<ValidatedConfig, Failure> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let cfg = load_config(&text, &args.set)?;
    Ok(validate(cfg)?)
}

fn branch_name(degenerate: bool) -> &'static str {
    if degenerate {
        "degenerate"
    } else {
        "general"
    }
}

#[derive(Serialize)]
struct AnalyticJson<'a> {
    #[serde(flatten)]
    report: &'a AnalyticReport,
    bessel_branch: &'static str,
}

fn cmd_analytic(cfg: &ValidatedConfig, format: ReportFormat) -> Result<(), Failure> {
    let report = analytic::evaluate(cfg);
    let branch = branch_name(report.outage.degenerate_branch_used);
    match format {
        ReportFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&AnalyticJson { report: &report, bessel_branch: branch })?);
        }
        ReportFormat::Text => {
            let p = &report.phases;
            let rows = [
                ("p_su1_ph1", p.p_su1_ph1),
                ("p_su1_ph2", p.p_su1_ph2),
                ("p_su2_ph1", p.p_su2_ph1),
                ("p_su2_ph2", p.p_su2_ph2),
                ("p_pu1_ph3", p.p_pu1_ph3),
                ("p_pu2_ph3", p.p_pu2_ph3),
                ("p_su2_ph3", p.p_su2_ph3),
                ("pu_outage", report.outage.p_out_pu),
                ("su_outage", report.outage.p_out_su),
                ("spectrum_efficiency", report.spectrum_efficiency),
                ("energy_efficiency", report.energy_efficiency),
            ];
            let mut out = String::new();
            for (name, v) in rows {
                let _ = writeln!(out, "{name:<20} {}", fmt_f64(v));
            }
            let _ = writeln!(out, "{:<20} {branch}", "bessel_branch");
            print!("{out}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateRow {
    estimate: OutageEstimate,
    analytic: f64,
    z: f64,
}

#[derive(Serialize)]
struct SimulateJson {
    pu: SimulateRow,
    su: SimulateRow,
}

fn cmd_simulate(cfg: &ValidatedConfig, trials: u64, seed: u64, format: ReportFormat) -> Result<(), Failure> {
    let (pu, su) = estimate_outage(cfg, trials, seed)?;
    let exact = analytic::outage(cfg);
    let row = |estimate: OutageEstimate, analytic: f64| SimulateRow { estimate, analytic, z: estimate.z_score(analytic) };
    let report = SimulateJson { pu: row(pu, exact.p_out_pu), su: row(su, exact.p_out_su) };
    match format {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "trials {trials}  seed {seed}");
            let _ = writeln!(out, "{:<6} {:>24} {:>24} {:>24} {:>9}", "system", "simulated", "stderr", "analytic", "z");
            for (name, r) in [("pu", &report.pu), ("su", &report.su)] {
                let _ = writeln!(
                    out,
                    "{name:<6} {:>24} {:>24} {:>24} {:>9.3}",
                    fmt_f64(r.estimate.p_hat),
                    fmt_f64(r.estimate.stderr),
                    fmt_f64(r.analytic),
                    r.z
                );
                if let Some((lo, hi)) = r.estimate.wilson {
                    let _ = writeln!(out, "{:<6} 95% Wilson interval [{}, {}]", "", fmt_f64(lo), fmt_f64(hi));
                }
            }
            print!("{out}");
        }
    }
    Ok(())
}

fn cmd_sweep(
    cfg: &ValidatedConfig,
    spec: &SweepSpec,
    output: Option<&Path>,
    format: TableFormat,
    gnuplot: bool,
) -> Result<(), Failure> {
    let result = run_sweep(cfg, spec)?;
    let body = match format {
        TableFormat::Csv => result.to_csv(),
        TableFormat::Json => serde_json::to_string_pretty(&result.rows)? + "\n",
    };
    match output {
        None => print!("{body}"),
        Some(path) => {
            fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            if gnuplot {
                let script_path = path.with_extension("gp");
                let script = gnuplot_script(&path.display().to_string(), spec.parameter, spec.mc_trials > 0);
                fs::write(&script_path, script).map_err(|e| Failure::Usage(format!("{}: {e}", script_path.display())))?;
            }
        }
    }
    Ok(())
}

fn cmd_validate(fast: bool) -> Result<(), Failure> {
    let results = run_checks(&SelfCheckOptions { fast, ..Default::default() });
    for r in &results {
        println!("{} {:<30} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if all_passed(&results) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
