//! Acceptance run. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{any_config, joint_outage, reference, rel_err};
use swipt_twr::analytic::{self, broadcast_success, cdf_y, pdf_y, DEGENERATE_SWITCH};
use swipt_twr::model::{derive, validate, Geometry, SystemConfig};
use swipt_twr::montecarlo::estimate_outage;
use swipt_twr::specfun::{erlang_weighted_integral, exp_ratio_integral, integrate, QuadratureSpec};
use swipt_twr::sweeps::{find_optimum, improvement_ratio, run_sweep, Column, Extremum, SweepParameter, SweepSpec};

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn tight() -> QuadratureSpec {
    QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-300, max_subdivisions: 5000 }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

fn broadcast_oracle(k: f64, b1: f64, b2: f64) -> f64 {
    if b1 == b2 {
        erlang_weighted_integral(k, b1, &tight()).unwrap()
    } else {
        exp_ratio_integral(k, b1, b2, b1 * b2 / (b2 - b1), &tight()).unwrap()
    }
}

fn bessel_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, (0.0, 0.0, 0.0));
    let mut record = |k: f64, b1: f64, b2: f64, got: f64| {
        let err = rel_err(got, broadcast_oracle(k, b1, b2));
        if !(err <= worst.0) {
            worst = (err, (k, b1, b2));
        }
    };
    // 5 x 5 x 4 general points, beta2 offset from the beta1 grid
    let ks = log_space(-3.0, 3.0, 5);
    let b1s = log_space(-3.0, 3.0, 5);
    let b2s = log_space(-2.25, 2.25, 4);
    let mut points = 0;
    for &k in &ks {
        for &b1 in &b1s {
            for &b2 in &b2s {
                record(k, b1, b2, broadcast_success(k, b1, b2).prob);
                points += 1;
            }
        }
    }
    // degenerate line
    for &k in &ks {
        for &b in &log_space(-3.0, 3.0, 7) {
            let p = broadcast_success(k, b, b);
            assert!(p.degenerate);
            record(k, b, b, p.prob);
            points += 1;
        }
    }
    // the three phase-3 entry points on both branches
    let mut asym = SystemConfig::reference().with_power_db(20.0);
    asym.geometry = Geometry::LineLayout { length: 2.0, d1: 0.5, su2_offset: 1.0 };
    for cfg in [reference(), validate(asym).unwrap()] {
        let dc = derive(&cfg);
        let l = cfg.lambdas;
        let (b1, b2) = (l[0] / dc.a, l[1] / dc.b);
        let (b1, b2) = if analytic::p_pu1_phase3(&dc, &cfg).degenerate { (b1, b1) } else { (b1, b2) };
        let cases = [
            (analytic::p_pu1_phase3(&dc, &cfg).prob, l[5] * dc.gamma_p2 / (dc.a_p - dc.gamma_p2 * dc.b_p)),
            (analytic::p_pu2_phase3(&dc, &cfg).prob, l[6] * dc.gamma_p2 / (dc.a_pp - dc.gamma_p2 * dc.b_pp)),
            (analytic::p_su2_phase3(&dc, &cfg).prob, l[4] * dc.gamma_s / dc.c),
        ];
        for (got, k) in cases {
            record(k, b1, b2, got);
            points += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let (err, (k, b1, b2)) = worst;
    outcome(
        err <= 1e-8 && secs < 60.0,
        format!("{points} points, max rel err {err:.2e} at (k, b1, b2) = ({k:.3e}, {b1:.3e}, {b2:.3e}), {secs:.2} s"),
    )
}

fn mc_matches_closed_form() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    const SEED: u64 = 1;
    let mut points = vec![("reference".to_string(), SystemConfig::reference())];
    for &db in &[30.0, 35.0, 40.0, 45.0, 50.0] {
        for &rho in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            points.push((format!("rho {rho} {db} dB"), SystemConfig::reference().with_power_db(db).with_rho(rho)));
        }
    }
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_joint = 0.0f64;
    for (name, cfg) in &points {
        let cfg = validate(cfg.clone()).unwrap();
        let closed = analytic::outage(&cfg);
        let (pu, su) = estimate_outage(&cfg, TRIALS, SEED).unwrap();
        let (zp, zs) = (pu.z_score(closed.p_out_pu), su.z_score(closed.p_out_su));
        worst = worst.max(zp.abs()).max(zs.abs());
        if zp.abs() > 3.0 || zs.abs() > 3.0 {
            let (jp, js) = joint_outage(&cfg);
            let (jzp, jzs) = (pu.z_score(jp), su.z_score(js));
            worst_joint = worst_joint.max(jzp.abs()).max(jzs.abs());
            failures.push(format!("{name}: z = ({zp:.1}, {zs:.1}), vs joint law ({jzp:.1}, {jzs:.1})"));
        }
    }
    let mut detail = format!(
        "{} of {} points outside 3 stderr at {TRIALS} trials, max |z| {worst:.1}",
        failures.len(),
        points.len()
    );
    if !failures.is_empty() {
        detail += &format!(
            "; the same estimates sit within |z| <= {worst_joint:.1} of the exact joint outage\n      {}",
            failures.join("\n      ")
        );
    }
    outcome(failures.is_empty(), detail)
}

/// Grid step of the rho sweeps, matching the +-0.02 optimum tolerance.
const RHO_STEP: f64 = 0.02;

fn rho_sweep(db: f64) -> swipt_twr::sweeps::SweepResult {
    let base = SystemConfig::reference().with_power_db(db);
    run_sweep(&base, &SweepSpec::analytic(SweepParameter::Rho, 0.02, 0.98, 49)).unwrap()
}

fn splitting_factor_optima() -> Outcome {
    let r = rho_sweep(40.0);
    let pu = find_optimum(&r, Column::PuAnalytic).unwrap();
    let su = find_optimum(&r, Column::SuAnalytic).unwrap();
    let ok = (pu.param - 0.37).abs() <= 0.02 && (su.param - 0.52).abs() <= 0.02;
    outcome(ok, format!("PU argmin {:.3} (want 0.37 +- 0.02), SU argmin {:.3} (want 0.52 +- 0.02)", pu.param, su.param))
}

fn power_scaling_at_optimum() -> Outcome {
    let (lo, hi) = (rho_sweep(30.0), rho_sweep(40.0));
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, col) in [("PU", Column::PuAnalytic), ("SU", Column::SuAnalytic)] {
        let (a, b) = (find_optimum(&lo, col).unwrap(), find_optimum(&hi, col).unwrap());
        let drop = 100.0 * (1.0 - b.value / a.value);
        let shift = (b.param - a.param).abs();
        ok &= (drop - 89.0).abs() <= 5.0 && shift <= RHO_STEP + 1e-12;
        parts.push(format!("{name} drop {drop:.1}% (want 89 +- 5), argmin {:.3} -> {:.3} (shift <= {RHO_STEP})", a.param, b.param));
    }
    outcome(ok, parts.join("; "))
}

fn relay_position_worst_case() -> Outcome {
    // d1 from 0.1 to 1.9 m in 0.05 m steps at the reference power
    let at = |rho: f64| {
        let base = SystemConfig::reference().with_rho(rho);
        run_sweep(&base, &SweepSpec::analytic(SweepParameter::D1, 0.1, 1.9, 37)).unwrap()
    };
    let (low, high) = (at(0.25), at(0.55));
    let pu = improvement_ratio(&low, &high, Column::PuAnalytic, Extremum::WorstCase).unwrap();
    let su = improvement_ratio(&low, &high, Column::SuAnalytic, Extremum::WorstCase).unwrap();
    let pu_col = high.column(Column::PuAnalytic).unwrap();
    let argmax = pu_col.iter().enumerate().fold(0, |best, (i, &v)| if v > pu_col[best] { i } else { best });
    let d1_max = high.rows[argmax].param;
    let ok = (pu - 47.0).abs() <= 5.0 && (su - 44.0).abs() <= 5.0 && (d1_max - 1.0).abs() <= 0.1;
    outcome(
        ok,
        format!(
            "worst-case improvement PU {pu:.1}% (want 47 +- 5), SU {su:.1}% (want 44 +- 5); PU maximum at d1 = {d1_max:.2} (want 1.0 +- 0.1)"
        ),
    )
}

fn spectrum_efficiency_saturation() -> Outcome {
    let r = run_sweep(&SystemConfig::reference(), &SweepSpec::analytic(SweepParameter::PowerDb, 0.0, 60.0, 61)).unwrap();
    let monotone = r.rows.windows(2).all(|w| w[1].se >= w[0].se);
    let near = r.rows.iter().filter(|row| row.param >= 45.0).all(|row| (row.se - 1.5).abs() <= 0.05);
    let at45 = r.rows.iter().find(|row| row.param == 45.0).unwrap().se;
    outcome(monotone && near, format!("SE(45 dB) = {at45:.4}, SE(60 dB) = {:.4}, non-decreasing: {monotone}", r.rows[60].se))
}

fn sinr_ceiling() -> Outcome {
    let mut cases = Vec::new();
    for (alpha, rp) in [(0.75, 1.0), (0.5, 1.0), (0.9, 1.7), (0.2, 0.25), (0.5, 0.55)] {
        let mut cfg = SystemConfig::reference();
        cfg.alpha = alpha;
        cfg.rate_pu = rp;
        cases.push(validate(cfg).unwrap());
    }
    let mut ok = true;
    for cfg in &cases {
        let dc = derive(cfg);
        assert!(dc.gamma_p2 >= cfg.alpha / (1.0 - cfg.alpha));
        ok &= analytic::outage_pu(cfg) == 1.0 && analytic::outage(cfg).p_out_pu == 1.0;
        for n in [1, 100, 10_000] {
            let (pu, _) = estimate_outage(cfg, n, 5).unwrap();
            ok &= pu.p_hat == 1.0 && pu.stderr == 0.0;
        }
    }
    outcome(ok, format!("{} ceiling configs, analytic and simulated PU outage exactly 1 at 1, 100, 1e4 trials", cases.len()))
}

fn density_and_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-16);
    let mut mass_err = 0.0f64;
    for i in 0..100 {
        let a = 10f64.powf(rng.random_range(-2.0..4.0));
        let l1 = rng.random_range(0.2..5.0);
        let l2 = rng.random_range(0.2..5.0);
        let b = if i % 4 == 0 {
            // beta2 = beta1 (1 + gap), straddling the switch
            let gap = [1e-9, 1e-7, 1.5e-6, 1e-5, 1e-3][i / 4 % 5];
            l2 / (l1 / a * (1.0 + gap))
        } else {
            10f64.powf(rng.random_range(-2.0..4.0))
        };
        let (s1, s2) = (a / l1, b / l2);
        let mass: f64 = [s1.min(s2), s1.max(s2)]
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                // split at the smaller mean so both scales are resolved
                let (lo, hi) = if j == 0 { (-60.0, 0.0) } else { ((s1.min(s2) / s).ln(), 6.0) };
                integrate(|u| { let y = s * u.exp(); pdf_y(y, a, b, l1, l2) * y }, lo, hi, &spec).unwrap().value
            })
            .sum();
        mass_err = mass_err.max((mass - 1.0).abs());
    }

    let mut jump = 0.0f64;
    for &k in &[1e-3, 0.1, 1.0, 10.0, 100.0] {
        for &beta in &[1e-3, 0.1, 1.0, 10.0, 1e3] {
            let pair = |d: f64| (beta * (1.0 - d), beta * (1.0 + d));
            let ((i1, i2), (o1, o2)) = (pair(0.99 * DEGENERATE_SWITCH), pair(1.01 * DEGENERATE_SWITCH));
            jump = jump.max((broadcast_success(k, i1, i2).prob - broadcast_success(k, o1, o2).prob).abs());
            let y = k / beta;
            jump = jump.max((cdf_y(y, 1.0, 1.0, i1, i2) - cdf_y(y, 1.0, 1.0, o1, o2)).abs());
        }
    }

    let mut runner = TestRunner::deterministic();
    let strategy = any_config();
    let mut bad_range = 0;
    let mut bad_monotone = 0;
    for _ in 0..10_000 {
        let cfg = strategy.new_tree(&mut runner).unwrap().current();
        let r = analytic::evaluate(&cfg);
        let mut probs = r.phases.as_array().to_vec();
        probs.extend([r.outage.p_out_pu, r.outage.p_out_su]);
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            bad_range += 1;
        }
        let louder = validate(cfg.clone().into_inner().with_power_db(10.0 * cfg.pp1.max(cfg.pp2).log10() + 3.0)).unwrap();
        let lo = analytic::outage(&louder);
        let base = analytic::outage(&validate(cfg.clone().into_inner().with_power_db(10.0 * cfg.pp1.max(cfg.pp2).log10())).unwrap());
        if lo.p_out_pu > base.p_out_pu || lo.p_out_su > base.p_out_su {
            bad_monotone += 1;
        }
    }

    let ok = mass_err <= 1e-9 && jump < 1e-6 && bad_range == 0 && bad_monotone == 0;
    outcome(
        ok,
        format!(
            "pdf mass max err {mass_err:.2e} over 100 sets; switch jump {jump:.2e}; 1e4 configs: {bad_range} out of range, {bad_monotone} non-monotone"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("bessel_oracle_equivalence", bessel_oracle_equivalence),
        ("mc_matches_closed_form", mc_matches_closed_form),
        ("splitting_factor_optima", splitting_factor_optima),
        ("power_scaling_at_optimum", power_scaling_at_optimum),
        ("relay_position_worst_case", relay_position_worst_case),
        ("spectrum_efficiency_saturation", spectrum_efficiency_saturation),
        ("sinr_ceiling", sinr_ceiling),
        ("density_and_invariants", density_and_invariants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += usize::from(!o.passed);
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
