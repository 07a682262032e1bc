//! Constrained control built from energy certificates.
//!
//! The toolkit turns a Lyapunov function of a prestabilized plant into
//! safety machinery for an overhead crane: per-constraint energy thresholds,
//! the margins they induce, and three constrained policies layered on top of
//! a nominal PD controller:
//!
//! * a QP filter that treats each margin as a barrier function on the
//!   augmented (state, virtual-reference) system and is feasible by
//!   construction ([`filters::dsm_cbf_step`]),
//! * an explicit reference governor that scales reference progress by the
//!   worst margin ([`filters::erg_step`]),
//! * a conventional QP filter over hand-designed candidate barriers, which
//!   can and does run into certified infeasibility ([`filters::candidate_cbf_step`]).
//!
//! [`sim`] integrates the closed loops and logs trajectories, [`presets`]
//! holds the benchmark parameterization, [`qp`] is the small dense QP solver
//! underneath both filters, and [`verify`] bundles the randomized property
//! checks exposed through the CLI's `selftest`.

pub mod dynamics;
pub mod error;
pub mod filters;
pub mod lyapunov;
pub mod presets;
pub mod qp;
pub mod sim;
pub mod verify;

pub use dynamics::{CraneParams, PdGains, PlantState};
pub use error::{Error, Result};
pub use filters::{AugmentedState, CandidateCbf, ClassKLinear, FilterDecision, FilterStatus};
pub use lyapunov::{
    AngleThresholdForm, ConstraintKind, ConstraintSpec, DsmSpec, LyapunovFn, OracleGrid,
};
pub use qp::{QpProblem, QpSolution};
pub use sim::{Controller, Event, Sample, ScenarioConfig, TrajectoryLog};
