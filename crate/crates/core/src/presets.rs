//! The benchmark parameterization of the crane study.
//!
//! Everything here is one coherent set of numbers: a 1 kg gantry with a
//! 0.5 kg payload on a 0.7 m rod, a soft prestabilizer, a stiff nominal
//! controller, and five constraints with the filter tunings used throughout
//! the test suite and the bundled CLI configs. Two scenarios share the set:
//! scenario A enforces everything except the swing-angle limit, scenario B
//! adds it.

use crate::dynamics::{CraneParams, PdGains, PlantState};
use crate::lyapunov::{AngleThresholdForm, ConstraintKind, ConstraintSpec};
use crate::sim::{Controller, ScenarioConfig};

/// Gantry 1 kg, payload 0.5 kg, rod 0.7 m, g = 9.81 m/s^2.
pub fn table_params() -> CraneParams {
    CraneParams {
        gantry_mass: 1.0,
        payload_mass: 0.5,
        rod_length: 0.7,
        gravity: 9.81,
    }
}

/// Prestabilizer gains: kp = 1, kd = 0.1.
pub fn pi_gains() -> PdGains {
    PdGains::new(1.0, 0.1)
}

/// Nominal-controller gains: kp = 10, kd = 4.
pub fn kappa_gains() -> PdGains {
    PdGains::new(10.0, 4.0)
}

/// Trade-off weight between force tracking and reference progress in the
/// margin-based QP filter.
pub const ETA: f64 = 0.01;

/// Target gantry position (m).
pub const TARGET: f64 = 1.0;

/// Initial virtual reference (m).
pub const V0: f64 = 0.1;

/// Integration step (s).
pub const DT: f64 = 1e-3;

/// Run length (s), long enough for every controller that settles at all to
/// do so visibly.
pub const HORIZON: f64 = 15.0;

/// Settling band around the target: 2% of the 1 m reference step.
pub const SETTLING_BAND: f64 = 0.02;

/// `x >= -1.1` with margin gain 10 and candidate barrier (6, 8).
pub fn position_lower() -> ConstraintSpec {
    ConstraintSpec::new(ConstraintKind::PositionLower, 1.1, 10.0).with_cbf(6.0, 8.0)
}

/// `x <= 1.1` with margin gain 10 and candidate barrier (6, 8).
pub fn position_upper() -> ConstraintSpec {
    ConstraintSpec::new(ConstraintKind::PositionUpper, 1.1, 10.0).with_cbf(6.0, 8.0)
}

/// `|u| <= 4` with margin gain 20; enters the candidate-barrier QP as the
/// variable box rather than a barrier row.
pub fn input_bound() -> ConstraintSpec {
    ConstraintSpec::new(ConstraintKind::InputBound, 4.0, 20.0)
}

/// `|theta| <= 10 deg` with margin gain 80 and candidate barrier (6, 8).
pub fn angle_bound() -> ConstraintSpec {
    ConstraintSpec::new(ConstraintKind::AngleBound, 10.0_f64.to_radians(), 80.0).with_cbf(6.0, 8.0)
}

/// `x + L sin(theta) <= 1.1` with margin gain 2.2 and candidate barrier
/// (4, 3.5).
pub fn payload_bound() -> ConstraintSpec {
    ConstraintSpec::new(ConstraintKind::PayloadBound, 1.1, 2.2).with_cbf(4.0, 3.5)
}

/// Scenario A constraint list: both position limits, the force limit, and
/// the payload-tip limit. No swing-angle limit.
pub fn scenario_a_constraints() -> Vec<ConstraintSpec> {
    vec![
        position_lower(),
        position_upper(),
        input_bound(),
        payload_bound(),
    ]
}

/// Scenario B constraint list: scenario A plus the swing-angle limit, in
/// canonical order.
pub fn scenario_b_constraints() -> Vec<ConstraintSpec> {
    vec![
        position_lower(),
        position_upper(),
        input_bound(),
        angle_bound(),
        payload_bound(),
    ]
}

fn scenario_with(constraints: Vec<ConstraintSpec>, controller: Controller) -> ScenarioConfig {
    ScenarioConfig {
        params: table_params(),
        pi_gains: pi_gains(),
        kappa_gains: kappa_gains(),
        constraints,
        eta: ETA,
        target: TARGET,
        x0: PlantState::new(0.0, 0.0, 0.0, 0.0),
        v0: V0,
        dt: DT,
        horizon: HORIZON,
        controller,
        angle_form: AngleThresholdForm::Cosine,
    }
}

/// Full scenario A run configuration: rest start at the origin, 1 m step.
pub fn scenario_a(controller: Controller) -> ScenarioConfig {
    scenario_with(scenario_a_constraints(), controller)
}

/// Full scenario B run configuration: scenario A plus the swing-angle limit.
pub fn scenario_b(controller: Controller) -> ScenarioConfig {
    scenario_with(scenario_b_constraints(), controller)
}
