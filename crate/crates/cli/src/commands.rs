//! The four subcommand bodies. Each returns the process exit code so
//! negative findings (an unsound threshold, a failed property check) can
//! exit nonzero after printing their report.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use dsm_cbf::lyapunov::{gamma_star_oracle, OracleGrid};
use dsm_cbf::sim::{run_scenario, Controller, Event, TrajectoryLog};
use dsm_cbf::verify;
use dsm_cbf::{Error, FilterStatus, LyapunovFn, Result};

use crate::config::{ConfigFile, MetaSection};

/// Exit code for a detected safety-contract problem (unsound threshold,
/// failed property check), matching the code used when a run aborts on a
/// contract violation.
const EXIT_CONTRACT: u8 = 3;

pub fn parse_controllers(spec: &str) -> Result<Vec<Controller>> {
    if spec == "all" {
        return Ok(Controller::ALL.to_vec());
    }
    spec.parse().map(|c| vec![c])
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

/// 17 significant digits, enough to reproduce any f64 exactly.
fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn status_label(s: FilterStatus) -> &'static str {
    match s {
        FilterStatus::Ok => "ok",
        FilterStatus::Infeasible => "infeasible",
    }
}

fn event_text(e: &Event) -> String {
    match e {
        Event::QpInfeasible { t } => format!("qp-infeasible at t = {t:.3} s"),
        Event::DomainExit { t, theta_abs } => {
            format!("domain-exit at t = {t:.3} s (|theta| = {theta_abs:.3} rad)")
        }
    }
}

fn write_trajectory_csv(path: &Path, log: &TrajectoryLog) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    let mut line = |s: String| w.write_all(s.as_bytes()).map_err(|e| io_err(path, e));
    line("t,x,theta,xdot,thetadot,v,u,rho,dmin,status\n".to_string())?;
    for s in &log.samples {
        line(format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            f17(s.t),
            f17(s.state.x),
            f17(s.state.theta),
            f17(s.state.xdot),
            f17(s.state.thetadot),
            f17(s.v),
            f17(s.u),
            f17(s.rho),
            f17(s.dmin()),
            status_label(s.status)
        ))?;
    }
    Ok(())
}

fn write_manifest(
    out: &Path,
    cfg: &ConfigFile,
    config_path: &str,
    seed: u64,
    controllers: &[Controller],
) -> Result<()> {
    let mut manifest = cfg.clone();
    manifest.meta = Some(MetaSection {
        config: config_path.to_string(),
        out: out.display().to_string(),
        seed,
        controllers: controllers.iter().map(|c| c.label().to_string()).collect(),
    });
    let path = out.join("manifest.toml");
    fs::write(&path, manifest.to_toml()?).map_err(|e| io_err(&path, e))
}

fn worst_violation(log: &TrajectoryLog) -> f64 {
    log.max_violation.iter().copied().fold(0.0, f64::max)
}

pub fn cmd_simulate(
    cfg: &ConfigFile,
    config_path: &str,
    out: &Path,
    controllers: &[Controller],
    seed: u64,
) -> Result<ExitCode> {
    // resolve everything first so a bad config fails before any file exists
    let scenarios: Vec<_> = controllers
        .iter()
        .map(|&c| cfg.resolve(c))
        .collect::<Result<_>>()?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_manifest(out, cfg, config_path, seed, controllers)?;

    let summary_path = out.join("summary.csv");
    let mut summary =
        BufWriter::new(File::create(&summary_path).map_err(|e| io_err(&summary_path, e))?);
    writeln!(
        summary,
        "controller,settling_time,max_abs_u,worst_violation,infeasibility_time,events"
    )
    .map_err(|e| io_err(&summary_path, e))?;

    for scenario in &scenarios {
        let log = run_scenario(scenario)?;
        let label = scenario.controller.label();
        let csv_path = out.join(format!("{label}.csv"));
        write_trajectory_csv(&csv_path, &log)?;

        let events: Vec<String> = log.events.iter().map(event_text).collect();
        writeln!(
            summary,
            "{label},{},{},{},{},{}",
            f17(log.settling_time),
            f17(log.max_abs_force()),
            f17(worst_violation(&log)),
            log.infeasibility_time()
                .map_or_else(|| "-".to_string(), f17),
            events.join("; ")
        )
        .map_err(|e| io_err(&summary_path, e))?;

        println!(
            "wrote {} ({} records, settle {:.3} s{})",
            csv_path.display(),
            log.samples.len(),
            log.settling_time,
            if events.is_empty() {
                String::new()
            } else {
                format!(", {}", events.join("; "))
            }
        );
    }
    println!("wrote {}", summary_path.display());
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_compare(
    cfg: &ConfigFile,
    config_path: &str,
    out: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let scenarios: Vec<_> = Controller::ALL
        .iter()
        .map(|&c| cfg.resolve(c))
        .collect::<Result<_>>()?;
    let kinds: Vec<String> = cfg.constraints.iter().map(|c| c.kind.clone()).collect();
    let logs: Vec<TrajectoryLog> = scenarios.iter().map(run_scenario).collect::<Result<_>>()?;

    let mut header = format!(
        "{:<10} {:>10} {:>10}",
        "controller", "settle[s]", "max|u|[N]"
    );
    for k in &kinds {
        header.push_str(&format!(" {k:>15}"));
    }
    header.push_str(&format!(" {:>14}", "infeasible at"));
    println!("{header}");
    for log in &logs {
        let mut row = format!(
            "{:<10} {:>10.3} {:>10.3}",
            log.controller.label(),
            log.settling_time,
            log.max_abs_force()
        );
        for v in &log.max_violation {
            row.push_str(&format!(" {v:>15.3e}"));
        }
        row.push_str(&format!(
            " {:>14}",
            log.infeasibility_time()
                .map_or_else(|| "-".to_string(), |t| format!("{t:.3} s"))
        ));
        println!("{row}");
    }

    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        write_manifest(out, cfg, config_path, seed, &Controller::ALL)?;
        let path = out.join("compare.csv");
        let mut w = BufWriter::new(File::create(&path).map_err(|e| io_err(&path, e))?);
        let mut line = |s: String| w.write_all(s.as_bytes()).map_err(|e| io_err(&path, e));
        line(format!(
            "controller,settling_time,max_abs_u,{},infeasibility_time\n",
            kinds.join(",")
        ))?;
        for log in &logs {
            let violations: Vec<String> = log.max_violation.iter().map(|&v| f17(v)).collect();
            line(format!(
                "{},{},{},{},{}\n",
                log.controller.label(),
                f17(log.settling_time),
                f17(log.max_abs_force()),
                violations.join(","),
                log.infeasibility_time()
                    .map_or_else(|| "-".to_string(), f17)
            ))?;
        }
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_verify_thresholds(
    cfg: &ConfigFile,
    resolution: usize,
    v_points: usize,
) -> Result<ExitCode> {
    let scenario = cfg.resolve(Controller::DsmCbf)?;
    if scenario.constraints.is_empty() {
        println!("no constraints");
        return Ok(ExitCode::SUCCESS);
    }
    let lyap = LyapunovFn::new(scenario.params, scenario.pi_gains);
    let dsms = scenario.dsms_pi();
    let grid = OracleGrid::with_resolution(resolution);

    let mut failures = 0usize;
    let mut compared = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for d in &dsms {
        let mut kind_worst = f64::NEG_INFINITY;
        let mut kind_compared = 0usize;
        for k in 0..v_points {
            let v = -1.0 + 2.05 * k as f64 / (v_points - 1).max(1) as f64;
            let gamma = d.gamma(v);
            let oracle = gamma_star_oracle(v, &d.constraint, &lyap, &grid);
            if !oracle.is_finite() {
                continue;
            }
            kind_compared += 1;
            // tolerance: two percent of the threshold itself
            let excess = gamma - oracle - 0.02 * gamma.abs();
            kind_worst = kind_worst.max(excess);
            if excess > 1e-12 {
                failures += 1;
            }
        }
        compared += kind_compared;
        if kind_compared > 0 {
            worst_excess = worst_excess.max(kind_worst);
        }
        if kind_compared == 0 {
            println!(
                "{:<15} no unsafe state on the oracle grid, skipped",
                d.constraint.kind
            );
        } else {
            println!(
                "{:<15} worst excess over 2% tolerance {:.3e} J over {} points{}",
                d.constraint.kind,
                kind_worst,
                kind_compared,
                if kind_worst > 1e-12 { "  FAIL" } else { "" }
            );
        }
    }
    println!(
        "threshold sweep: {v_points} reference points, {compared} finite comparisons, \
         {failures} failures; worst excess over tolerance {worst_excess:.3e} J"
    );
    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CONTRACT))
    }
}

pub fn cmd_selftest(seed: u64) -> Result<ExitCode> {
    let reports = verify::run_all(seed)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    for r in &reports {
        println!("{r}");
    }
    println!("selftest: {} checks, {failed} failed", reports.len());
    if failed == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CONTRACT))
    }
}
