//! Fixed-step closed-loop simulation of the crane under each policy.
//!
//! One run integrates the plant (and, where applicable, the virtual
//! reference as a fifth state) with classical fourth-order Runge-Kutta at a
//! fixed step. The policy is evaluated once per step and its outputs are
//! held constant across the four stages, emulating a fast sampled
//! implementation of the continuous law.
//!
//! Runs produce a [`TrajectoryLog`]: one sample per step plus terminal
//! events. Two conditions truncate a run early and are recorded rather than
//! swallowed: the candidate-barrier QP certifying infeasibility, and the
//! payload angle leaving the model domain. A margin-based-filter QP
//! reporting infeasibility is different: it breaks that filter's guarantee,
//! so the run aborts with an error instead of a log.

use std::str::FromStr;

use crate::dynamics::{crane_dynamics, nominal_kappa, CraneParams, PdGains, PlantState};
use crate::error::{Error, Result};
use crate::filters::{candidate_cbf_step, dsm_cbf_step, erg_step, AugmentedState, FilterStatus};
use crate::lyapunov::{AngleThresholdForm, ConstraintSpec, DsmSpec, LyapunovFn};
use crate::presets::SETTLING_BAND;

/// Which closed loop to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Controller {
    /// Stiff PD law applied directly; no constraint handling.
    Nominal,
    /// Explicit reference governor.
    Erg,
    /// Candidate-barrier QP filter.
    CandidateCbf,
    /// Margin-based barrier QP filter on the augmented system.
    DsmCbf,
}

impl Controller {
    pub const ALL: [Controller; 4] = [
        Controller::Nominal,
        Controller::Erg,
        Controller::CandidateCbf,
        Controller::DsmCbf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Controller::Nominal => "nominal",
            Controller::Erg => "erg",
            Controller::CandidateCbf => "cbf",
            Controller::DsmCbf => "dsmcbf",
        }
    }
}

impl std::fmt::Display for Controller {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Controller {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nominal" => Ok(Controller::Nominal),
            "erg" => Ok(Controller::Erg),
            "cbf" => Ok(Controller::CandidateCbf),
            "dsmcbf" => Ok(Controller::DsmCbf),
            other => Err(Error::Config(format!(
                "unknown controller {other:?}; expected nominal, erg, cbf, or dsmcbf"
            ))),
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: CraneParams,
    /// Prestabilizer gains; these build the energy function behind the
    /// margins of the margin-based filter.
    pub pi_gains: PdGains,
    /// Nominal-controller gains; also the loop the governor runs.
    pub kappa_gains: PdGains,
    pub constraints: Vec<ConstraintSpec>,
    /// QP weight on reference progress in the margin-based filter.
    pub eta: f64,
    /// Target gantry position (m).
    pub target: f64,
    pub x0: PlantState,
    /// Initial virtual reference (m).
    pub v0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub controller: Controller,
    pub angle_form: AngleThresholdForm,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.pi_gains.validate()?;
        self.kappa_gains.validate()?;
        for c in &self.constraints {
            c.validate()?;
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!(
                "eta must be nonnegative, got {}",
                self.eta
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::Config(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        if !self.x0.in_domain() {
            return Err(Error::Config(format!(
                "initial angle {} rad is outside (-pi/2, pi/2)",
                self.x0.theta
            )));
        }
        Ok(())
    }

    /// Margins built with the prestabilizer gains (margin-based filter).
    pub fn dsms_pi(&self) -> Vec<DsmSpec> {
        self.dsms_with(self.pi_gains)
    }

    /// Margins built with the nominal gains (governor).
    pub fn dsms_kappa(&self) -> Vec<DsmSpec> {
        self.dsms_with(self.kappa_gains)
    }

    fn dsms_with(&self, gains: PdGains) -> Vec<DsmSpec> {
        let lyap = LyapunovFn::new(self.params, gains);
        self.constraints
            .iter()
            .map(|c| DsmSpec::new(*c, lyap).with_angle_form(self.angle_form))
            .collect()
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One logged instant: the state and the policy's decision at that state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: PlantState,
    /// Virtual reference; the target itself for the nominal policy and the
    /// candidate filter, which track it directly.
    pub v: f64,
    pub u: f64,
    pub rho: f64,
    /// Per-constraint margins, list order matching the configuration: energy
    /// margins for nominal/governor/margin-filter runs, worst barrier values
    /// for candidate-filter runs.
    pub margins: Vec<f64>,
    pub status: FilterStatus,
    /// Constraint indices binding in the QP, empty for QP-free policies.
    pub active: Vec<usize>,
}

impl Sample {
    /// Worst margin at this instant.
    pub fn dmin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Why a run stopped before its horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// The candidate-barrier QP certified that no admissible force exists.
    QpInfeasible { t: f64 },
    /// The payload angle left (-pi/2, pi/2) during integration; `t` is the
    /// end of the offending step.
    DomainExit { t: f64, theta_abs: f64 },
}

/// A completed (possibly truncated) run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub controller: Controller,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    /// First time after which the gantry stays within the settling band of
    /// the target; `+inf` if it never does.
    pub settling_time: f64,
    /// Per-constraint worst violation over the run, measured on the raw
    /// constraint (position, force, angle, payload tip), zero when clean.
    pub max_violation: Vec<f64>,
}

impl TrajectoryLog {
    pub fn infeasibility_time(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e {
            Event::QpInfeasible { t } => Some(*t),
            _ => None,
        })
    }

    pub fn max_abs_force(&self) -> f64 {
        self.samples
            .iter()
            .fold(0.0_f64, |acc, s| acc.max(s.u.abs()))
    }
}

/// Classical fourth-order Runge-Kutta step with the derivative's inputs
/// frozen for the step (the closure sees only the state).
pub fn rk4_step<const N: usize>(
    y: &[f64; N],
    dt: f64,
    mut f: impl FnMut(&[f64; N]) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    fn saxpy<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
        let mut out = *y;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    }
    let k1 = f(y)?;
    let k2 = f(&saxpy(y, &k1, 0.5 * dt))?;
    let k3 = f(&saxpy(y, &k2, 0.5 * dt))?;
    let k4 = f(&saxpy(y, &k3, dt))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// First time after which the position stays inside `band` of `r` for every
/// remaining sample; `+inf` if the log ends outside the band.
pub fn settling_time(samples: &[Sample], r: f64, band: f64) -> f64 {
    let mut settle = f64::INFINITY;
    for s in samples.iter().rev() {
        if (s.state.x - r).abs() <= band {
            settle = s.t;
        } else {
            break;
        }
    }
    settle
}

/// Integrates the selected closed loop over the horizon.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TrajectoryLog> {
    cfg.validate()?;
    let dsms_pi = cfg.dsms_pi();
    let dsms_kappa = cfg.dsms_kappa();

    if cfg.controller == Controller::DsmCbf {
        for (i, d) in dsms_pi.iter().enumerate() {
            let delta = d.value(&cfg.x0, cfg.v0);
            if delta < -1e-9 {
                return Err(Error::Config(format!(
                    "initial state sits outside the safe set of constraint {i} ({}): \
                     margin {delta:.3e}",
                    d.constraint.kind
                )));
            }
        }
    }

    let steps = cfg.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut events = Vec::new();
    let mut max_violation = vec![0.0_f64; cfg.constraints.len()];
    let mut state = cfg.x0;
    let mut v = cfg.v0;

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let aug = AugmentedState::new(state, v);

        let (v_logged, u, rho, margins, status, active) = match cfg.controller {
            Controller::Nominal => {
                let u = nominal_kappa(&state, cfg.target, &cfg.kappa_gains);
                let margins: Vec<f64> = dsms_pi
                    .iter()
                    .map(|d| d.value(&state, cfg.target))
                    .collect();
                (cfg.target, u, 0.0, margins, FilterStatus::Ok, Vec::new())
            }
            Controller::Erg => {
                let (u, rho) = erg_step(&aug, cfg.target, &dsms_kappa, &cfg.kappa_gains)?;
                let margins: Vec<f64> = dsms_kappa.iter().map(|d| d.value(&state, v)).collect();
                (v, u, rho, margins, FilterStatus::Ok, Vec::new())
            }
            Controller::CandidateCbf => {
                let d = candidate_cbf_step(
                    &state,
                    cfg.target,
                    &cfg.constraints,
                    &cfg.kappa_gains,
                    &cfg.params,
                )?;
                (cfg.target, d.u, d.rho, d.margins, d.status, d.active)
            }
            Controller::DsmCbf => {
                let d = dsm_cbf_step(&aug, cfg.target, &dsms_pi, &cfg.kappa_gains, cfg.eta)?;
                (v, d.u, d.rho, d.margins, d.status, d.active)
            }
        };

        for (slot, c) in max_violation.iter_mut().zip(&cfg.constraints) {
            *slot = slot.max(c.violation(&state, u, &cfg.params));
        }
        samples.push(Sample {
            t,
            state,
            v: v_logged,
            u,
            rho,
            margins,
            status,
            active,
        });

        if status == FilterStatus::Infeasible {
            events.push(Event::QpInfeasible { t });
            break;
        }
        if k == steps {
            break;
        }

        let y = [state.x, state.theta, state.xdot, state.thetadot, v];
        let stepped = rk4_step(&y, cfg.dt, |y| {
            let s = PlantState::new(y[0], y[1], y[2], y[3]);
            let d = crane_dynamics(&s, u, &cfg.params)?;
            Ok([d[0], d[1], d[2], d[3], rho])
        });
        match stepped {
            Ok(y_next) => {
                let next = PlantState::new(y_next[0], y_next[1], y_next[2], y_next[3]);
                if !next.in_domain() {
                    events.push(Event::DomainExit {
                        t: t + cfg.dt,
                        theta_abs: next.theta.abs(),
                    });
                    break;
                }
                state = next;
                v = y_next[4];
            }
            Err(Error::DomainViolation { theta_abs }) => {
                events.push(Event::DomainExit {
                    t: t + cfg.dt,
                    theta_abs,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let settling = settling_time(&samples, cfg.target, SETTLING_BAND);
    Ok(TrajectoryLog {
        controller: cfg.controller,
        samples,
        events,
        settling_time: settling,
        max_violation,
    })
}
