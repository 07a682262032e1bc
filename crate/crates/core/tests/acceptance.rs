//! End-to-end qualification suite for the crane study.
//!
//! Each test prints one `criterion N (...): pass|FAIL` line so a full run
//! doubles as a short report. Tolerances live in the constants below; the
//! scenario definitions come from the presets module.

use std::sync::OnceLock;

use dsm_cbf::presets;
use dsm_cbf::sim::{run_scenario, Controller, TrajectoryLog};
use dsm_cbf::verify;
use dsm_cbf::{ConstraintKind, DsmSpec, FilterStatus, LyapunovFn};

/// Worst admissible per-sample constraint violation for the safe policies.
const VIOLATION_TOL: f64 = 1e-6;
/// The unfiltered controller must miss by at least this much.
const NOMINAL_VIOLATION_MIN: f64 = 1e-3;
/// Force-limit threshold under the benchmark parameters, closed form.
const GAMMA3_EXPECTED: f64 = 7.9208;
const GAMMA3_TOL: f64 = 1e-4;
/// Brute-force level-set oracle resolution for the threshold sweep.
const ORACLE_RESOLUTION: usize = 61;
const SWEEP_POINTS: usize = 23;
/// Randomized-start battery for the margin-based filter.
const RANDOM_STARTS: usize = 100;
const RANDOM_START_HORIZON: f64 = 4.0;
const SEED: u64 = 2024;

fn report(num: u32, name: &str, passed: bool, details: &str) {
    println!(
        "criterion {num} ({name}): {}{}{}",
        if passed { "pass" } else { "FAIL" },
        if details.is_empty() { "" } else { " - " },
        details
    );
    assert!(passed, "criterion {num} ({name}) failed: {details}");
}

fn logs_for(
    cell: &'static OnceLock<Vec<(Controller, TrajectoryLog)>>,
    scenario: fn(Controller) -> dsm_cbf::ScenarioConfig,
) -> &'static [(Controller, TrajectoryLog)] {
    cell.get_or_init(|| {
        Controller::ALL
            .iter()
            .map(|&c| (c, run_scenario(&scenario(c)).expect("scenario run failed")))
            .collect()
    })
}

fn logs_a() -> &'static [(Controller, TrajectoryLog)] {
    static CELL: OnceLock<Vec<(Controller, TrajectoryLog)>> = OnceLock::new();
    logs_for(&CELL, presets::scenario_a)
}

fn logs_b() -> &'static [(Controller, TrajectoryLog)] {
    static CELL: OnceLock<Vec<(Controller, TrajectoryLog)>> = OnceLock::new();
    logs_for(&CELL, presets::scenario_b)
}

fn log_of(logs: &[(Controller, TrajectoryLog)], c: Controller) -> &TrajectoryLog {
    &logs.iter().find(|(k, _)| *k == c).unwrap().1
}

#[test]
fn criterion_1_safe_policies_respect_constraints_nominal_does_not() {
    let logs = logs_a();
    let mut passed = true;
    let mut details = Vec::new();
    for c in [
        Controller::Erg,
        Controller::CandidateCbf,
        Controller::DsmCbf,
    ] {
        let log = log_of(logs, c);
        let worst = log.max_violation.iter().copied().fold(0.0, f64::max);
        if worst > VIOLATION_TOL {
            passed = false;
        }
        details.push(format!("{c} worst violation {worst:.2e}"));
    }
    let nominal = log_of(logs, Controller::Nominal);
    let nominal_worst = nominal.max_violation.iter().copied().fold(0.0, f64::max);
    if nominal_worst <= NOMINAL_VIOLATION_MIN {
        passed = false;
    }
    details.push(format!("nominal worst violation {nominal_worst:.2e}"));
    report(
        1,
        "safe policies respect constraints",
        passed,
        &details.join(", "),
    );
}

#[test]
fn criterion_2_settling_order_follows_filter_conservatism() {
    let logs = logs_a();
    let cbf = log_of(logs, Controller::CandidateCbf).settling_time;
    let dsm = log_of(logs, Controller::DsmCbf).settling_time;
    let erg = log_of(logs, Controller::Erg).settling_time;
    let passed = cbf <= dsm && dsm <= erg;
    report(
        2,
        "settling order follows filter conservatism",
        passed,
        &format!("settle: candidate {cbf:.3}s <= margin-based {dsm:.3}s <= governor {erg:.3}s"),
    );
}

#[test]
fn criterion_3_swing_limit_breaks_candidate_filter_but_not_margin_filters() {
    let logs = logs_b();
    let cbf = log_of(logs, Controller::CandidateCbf);
    let horizon = presets::HORIZON;
    let infeas = cbf.infeasibility_time();
    let mut passed = matches!(infeas, Some(t) if t > 0.0 && t < horizon);
    let mut details = vec![match infeas {
        Some(t) => format!("candidate filter infeasible at t = {t:.3}s"),
        None => "candidate filter never reported infeasibility".to_string(),
    }];
    for c in [Controller::Erg, Controller::DsmCbf] {
        let log = log_of(logs, c);
        let worst = log.max_violation.iter().copied().fold(0.0, f64::max);
        let clean = log.events.is_empty()
            && log.samples.iter().all(|s| s.status == FilterStatus::Ok)
            && worst <= VIOLATION_TOL;
        if !clean {
            passed = false;
        }
        details.push(format!("{c} worst violation {worst:.2e}"));
    }
    let dsm = log_of(logs, Controller::DsmCbf).settling_time;
    let erg = log_of(logs, Controller::Erg).settling_time;
    if !(dsm < erg) {
        passed = false;
    }
    details.push(format!(
        "settle: margin-based {dsm:.3}s vs governor {erg:.3}s"
    ));
    report(
        3,
        "swing limit breaks only the candidate filter",
        passed,
        &details.join(", "),
    );
}

#[test]
fn criterion_4_margin_filter_qp_feasible_from_randomized_safe_starts() {
    let rep = verify::check_recursive_feasibility(RANDOM_STARTS, RANDOM_START_HORIZON, SEED)
        .expect("feasibility battery errored");
    report(
        4,
        "filter QP feasible along its own loop",
        rep.passed,
        &rep.details,
    );
}

#[test]
fn criterion_5_prestabilizer_witnesses_all_margins_at_once() {
    let rep = verify::check_control_sharing_witness(10_000, SEED).expect("witness check errored");
    report(
        5,
        "prestabilizer witnesses all margins at once",
        rep.passed,
        &rep.details,
    );
}

#[test]
fn criterion_6_thresholds_stay_below_brute_force_levels() {
    let rep = verify::check_threshold_soundness(ORACLE_RESOLUTION, SWEEP_POINTS)
        .expect("threshold sweep errored");
    let lyap = LyapunovFn::new(presets::table_params(), presets::pi_gains());
    let gamma3 = DsmSpec::new(presets::input_bound(), lyap).gamma(0.0);
    let arithmetic_ok = (gamma3 - GAMMA3_EXPECTED).abs() <= GAMMA3_TOL;
    report(
        6,
        "thresholds stay below brute-force levels",
        rep.passed && arithmetic_ok,
        &format!("{}; force threshold {gamma3:.6} J", rep.details),
    );
}

#[test]
fn criterion_7_gradients_qp_and_energy_match_references() {
    let grad = verify::check_gradients_fd(1000, SEED).expect("gradient check errored");
    let qp = verify::check_qp_against_grid_oracle(1000, SEED).expect("QP check errored");
    let energy = verify::check_energy_descent(SEED).expect("energy check errored");
    report(
        7,
        "gradients, QP, and energy match references",
        grad.passed && qp.passed && energy.passed,
        &format!("{}; {}; {}", grad.details, qp.details, energy.details),
    );
}

#[test]
fn criterion_8_rescaled_barrier_gains_keep_the_filter_safe() {
    let mut passed = true;
    let mut details = Vec::new();
    for scale in [0.1, 10.0] {
        let mut cfg = presets::scenario_a(Controller::DsmCbf);
        for c in &mut cfg.constraints {
            c.alpha *= scale;
        }
        match run_scenario(&cfg) {
            Ok(log) => {
                let worst = log.max_violation.iter().copied().fold(0.0, f64::max);
                let clean = log.events.is_empty()
                    && log.samples.iter().all(|s| s.status == FilterStatus::Ok)
                    && worst <= VIOLATION_TOL;
                if !clean {
                    passed = false;
                }
                details.push(format!("alpha x{scale}: worst violation {worst:.2e}"));
            }
            Err(e) => {
                passed = false;
                details.push(format!("alpha x{scale}: {e}"));
            }
        }
    }
    report(
        8,
        "rescaled barrier gains keep the filter safe",
        passed,
        &details.join(", "),
    );
}

#[test]
fn scenario_b_margins_cover_the_swing_limit() {
    // sanity on the fixture itself: scenario B carries all five constraints
    let cfg = presets::scenario_b(Controller::DsmCbf);
    assert_eq!(cfg.constraints.len(), 5);
    assert!(cfg
        .constraints
        .iter()
        .any(|c| c.kind == ConstraintKind::AngleBound));
    assert_eq!(cfg.dsms_pi().len(), 5);
}
