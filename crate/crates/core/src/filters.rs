//! The three constrained policies of the crane study.
//!
//! All three sit between a nominal PD controller and the plant:
//!
//! * [`dsm_cbf_step`] treats every energy margin `Delta_i` as a barrier
//!   function on the augmented (state, virtual-reference) system and solves
//!   a QP over the pair `(u, rho)`: force applied to the plant, rate applied
//!   to the virtual reference. The prestabilizer provides a built-in
//!   feasible point, `(pi(x, v), 0)`, so a well-configured filter can never
//!   run out of options; infeasibility here is a contract violation, not an
//!   outcome.
//! * [`erg_step`] is the reference-governor baseline: the plant input is the
//!   nominal law tracking `v`, and `v` crawls toward the target at a rate
//!   scaled by the worst margin. No QP involved.
//! * [`candidate_cbf_step`] is the conventional baseline: one hand-designed
//!   first-order barrier per constraint, QP over the force alone. The
//!   barriers are not guaranteed compatible, so certified infeasibility is a
//!   legitimate result that callers must treat as data.

use crate::dynamics::{control_affine_split, nominal_kappa, CraneParams, PdGains, PlantState};
use crate::error::{Error, Result};
use crate::lyapunov::{ConstraintKind, ConstraintSpec, DsmSpec};
use crate::qp::{solve_qp, QpProblem, QpSolution};
use nalgebra::{DMatrix, DVector};

/// Linear class-K gain `alpha(c) = gain * c` for nonnegative `c`, `gain > 0`,
/// extended by zero to negative arguments. Class-K functions are defined on
/// nonnegative arguments only; discrete integration can drag a margin a few
/// ulps below zero between policy evaluations, and the zero extension keeps
/// the prestabilized witness row nonnegative there instead of turning the
/// barrier inequality into a decay demand no bounded force can meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassKLinear {
    pub gain: f64,
}

impl ClassKLinear {
    pub fn new(gain: f64) -> Self {
        Self { gain }
    }

    pub fn apply(&self, c: f64) -> f64 {
        self.gain * c.max(0.0)
    }
}

/// Plant state plus the virtual reference governed alongside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub plant: PlantState,
    pub v: f64,
}

impl AugmentedState {
    pub fn new(plant: PlantState, v: f64) -> Self {
        Self { plant, v }
    }
}

/// A hand-designed first-order barrier for one constraint: a linear
/// combination of the constrained quantity's margin and its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateCbf {
    pub kind: ConstraintKind,
    pub bound: f64,
    /// Slope weighting the position-level margin against its rate.
    pub gamma: f64,
    /// Class-K gain used in the QP row.
    pub alpha_tilde: f64,
}

impl CandidateCbf {
    /// `None` for the input bound, which constrains the decision variable
    /// directly and has no state barrier.
    pub fn from_constraint(c: &ConstraintSpec) -> Option<Self> {
        if c.kind == ConstraintKind::InputBound {
            return None;
        }
        Some(Self {
            kind: c.kind,
            bound: c.bound,
            gamma: c.cbf_gamma,
            alpha_tilde: c.cbf_alpha,
        })
    }

    /// Barrier values with their state gradients. The symmetric angle bound
    /// contributes one row per side; every other kind contributes one.
    pub fn rows(&self, s: &PlantState, p: &CraneParams) -> Vec<(f64, [f64; 4])> {
        let g = self.gamma;
        match self.kind {
            ConstraintKind::PositionLower => {
                vec![(g * (s.x + self.bound) + s.xdot, [g, 0.0, 1.0, 0.0])]
            }
            ConstraintKind::PositionUpper => {
                vec![(g * (self.bound - s.x) - s.xdot, [-g, 0.0, -1.0, 0.0])]
            }
            ConstraintKind::AngleBound => vec![
                (g * (self.bound + s.theta) + s.thetadot, [0.0, g, 0.0, 1.0]),
                (
                    g * (self.bound - s.theta) - s.thetadot,
                    [0.0, -g, 0.0, -1.0],
                ),
            ],
            ConstraintKind::PayloadBound => {
                let l = p.rod_length;
                let (sin_t, cos_t) = s.theta.sin_cos();
                let value = g * (self.bound - s.x - l * sin_t) - s.xdot - l * s.thetadot * cos_t;
                let grad = [
                    -g,
                    -g * l * cos_t + l * s.thetadot * sin_t,
                    -1.0,
                    -l * cos_t,
                ];
                vec![(value, grad)]
            }
            ConstraintKind::InputBound => Vec::new(),
        }
    }

    /// Worst barrier value at `s` (the binding side for the angle bound).
    pub fn min_value(&self, s: &PlantState, p: &CraneParams) -> f64 {
        self.rows(s, p)
            .iter()
            .map(|(h, _)| *h)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterStatus {
    Ok,
    Infeasible,
}

/// One policy evaluation: the applied force, the virtual-reference rate, and
/// the evidence behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDecision {
    pub u: f64,
    pub rho: f64,
    pub status: FilterStatus,
    /// Per-constraint margins in input-list order: `Delta_i` for the
    /// margin-based filter, the worst barrier value for the candidate
    /// filter (`+inf` for its input bound, which has no barrier).
    pub margins: Vec<f64>,
    /// Indices of constraints binding at the QP solution, ascending.
    pub active: Vec<usize>,
}

fn u_max_of(constraints: impl Iterator<Item = ConstraintSpec>) -> Option<f64> {
    let mut bound: Option<f64> = None;
    for c in constraints {
        if c.kind == ConstraintKind::InputBound {
            bound = Some(bound.map_or(c.bound, |b: f64| b.min(c.bound)));
        }
    }
    bound
}

/// Full left-hand side of constraint `dsm`'s barrier inequality at the
/// decision `(u, rho)`:
///
/// ```text
/// dDelta/dx . (f0(x) + g(x) u) + dDelta/dv . rho + alpha(Delta)
/// ```
///
/// Nonnegative means the decision respects that margin's decay condition.
/// The prestabilized pair `(pi(x, v), 0)` always yields
/// `kd xdot^2 + alpha(Delta)`, which is the feasibility witness the
/// margin-based filter relies on.
pub fn dsm_row_value(a: &AugmentedState, dsm: &DsmSpec, u: f64, rho: f64) -> Result<f64> {
    let (f0, g) = control_affine_split(&a.plant, &dsm.lyap.params)?;
    let (d_state, d_v) = dsm.gradients(&a.plant, a.v);
    let mut flow = 0.0;
    for i in 0..4 {
        flow += d_state[i] * (f0[i] + g[i] * u);
    }
    let alpha = ClassKLinear::new(dsm.alpha);
    Ok(flow + d_v * rho + alpha.apply(dsm.value(&a.plant, a.v)))
}

/// Smallest margin across the list and its index; ties keep the earliest.
pub fn dsm_min_over_constraints(a: &AugmentedState, dsms: &[DsmSpec]) -> Result<(usize, f64)> {
    if dsms.is_empty() {
        return Err(Error::Config("margin list is empty".into()));
    }
    let mut best = (0, dsms[0].value(&a.plant, a.v));
    for (i, d) in dsms.iter().enumerate().skip(1) {
        let val = d.value(&a.plant, a.v);
        if val < best.1 {
            best = (i, val);
        }
    }
    Ok(best)
}

/// Margin-based QP filter on the augmented system.
///
/// Minimizes `|u - kappa(x, r)|^2 + eta |rho - (r - v)|^2` subject to one
/// barrier row per margin and the force box. `eta` trades force fidelity
/// against reference progress; `eta = 0` is accepted and regularized
/// internally so the Hessian stays positive definite (safety does not
/// depend on `eta`). The prestabilized pair `(pi(x, v), 0)` satisfies every
/// barrier row at any domain state, so as long as an input-bound margin
/// keeps `pi` within the force box the QP stays feasible, and an infeasible
/// report aborts with [`Error::ContractViolation`].
pub fn dsm_cbf_step(
    a: &AugmentedState,
    r: f64,
    dsms: &[DsmSpec],
    kappa_gains: &PdGains,
    eta: f64,
) -> Result<FilterDecision> {
    if dsms.is_empty() {
        return Err(Error::Config(
            "margin-based filter needs at least one constraint".into(),
        ));
    }
    let params = dsms[0].lyap.params;
    let margins: Vec<f64> = dsms.iter().map(|d| d.value(&a.plant, a.v)).collect();
    let (f0, g) = control_affine_split(&a.plant, &params)?;

    let eta_eff = eta.max(1e-9);
    let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0 * eta_eff]);
    let u_des = nominal_kappa(&a.plant, r, kappa_gains);
    let rho_des = r - a.v;
    let f = DVector::from_vec(vec![-2.0 * u_des, -2.0 * eta_eff * rho_des]);
    let mut qp = QpProblem::new(h, f);

    for (d, &delta) in dsms.iter().zip(&margins) {
        let (d_state, d_v) = d.gradients(&a.plant, a.v);
        let mut coef_u = 0.0;
        let mut drift = 0.0;
        for i in 0..4 {
            coef_u += d_state[i] * g[i];
            drift += d_state[i] * f0[i];
        }
        let alpha = ClassKLinear::new(d.alpha);
        qp.push_row(&[coef_u, d_v], drift + alpha.apply(delta));
    }
    if let Some(u_max) = u_max_of(dsms.iter().map(|d| d.constraint)) {
        qp.set_bounds(0, Some(-u_max), Some(u_max));
    }

    match solve_qp(&qp)? {
        QpSolution::Optimal { z, active_set, .. } => {
            let active = map_active(&active_set, &row_constraint_map(dsms), dsms);
            Ok(FilterDecision {
                u: z[0],
                rho: z[1],
                status: FilterStatus::Ok,
                margins,
                active,
            })
        }
        QpSolution::Infeasible { certificate } => Err(Error::ContractViolation(format!(
            "margin-based QP has no solution at v = {:.6}, margins = {:?}, certificate = {:?}; \
             the filter was started outside its safe set or the margins do not share a control",
            a.v,
            margins,
            certificate.as_slice()
        ))),
    }
}

/// Reference-governor baseline.
///
/// The force is the nominal law tracking the virtual reference; the
/// reference rate is the worst margin times the distance to the target, so
/// progress stalls as any margin approaches zero and reverses if one goes
/// negative. The margins must be built with the *nominal* gains, because
/// that is the loop actually driving the plant here.
pub fn erg_step(
    a: &AugmentedState,
    r: f64,
    dsms_with_kappa_gains: &[DsmSpec],
    kappa_gains: &PdGains,
) -> Result<(f64, f64)> {
    let u = nominal_kappa(&a.plant, a.v, kappa_gains);
    let (_, worst) = dsm_min_over_constraints(a, dsms_with_kappa_gains)?;
    Ok((u, worst * (r - a.v)))
}

/// Candidate-barrier QP filter over the force alone.
///
/// One row per barrier (two for the angle bound), force box from the input
/// constraint. Certified infeasibility is returned as a decision with
/// `status = Infeasible`, `u = 0`, `rho = 0`; the caller decides what to do
/// with it.
pub fn candidate_cbf_step(
    s: &PlantState,
    r: f64,
    constraints: &[ConstraintSpec],
    kappa_gains: &PdGains,
    params: &CraneParams,
) -> Result<FilterDecision> {
    let (f0, g) = control_affine_split(s, params)?;
    let u_des = nominal_kappa(s, r, kappa_gains);

    let mut qp = QpProblem::new(
        DMatrix::from_element(1, 1, 2.0),
        DVector::from_element(1, -2.0 * u_des),
    );
    let mut margins = Vec::with_capacity(constraints.len());
    let mut row_map: Vec<usize> = Vec::new();
    for (i, c) in constraints.iter().enumerate() {
        let Some(cbf) = CandidateCbf::from_constraint(c) else {
            margins.push(f64::INFINITY);
            continue;
        };
        let mut worst = f64::INFINITY;
        for (value, grad) in cbf.rows(s, params) {
            let mut coef_u = 0.0;
            let mut drift = 0.0;
            for j in 0..4 {
                coef_u += grad[j] * g[j];
                drift += grad[j] * f0[j];
            }
            qp.push_row(&[coef_u], drift + cbf.alpha_tilde * value);
            row_map.push(i);
            worst = worst.min(value);
        }
        margins.push(worst);
    }
    if let Some(u_max) = u_max_of(constraints.iter().copied()) {
        qp.set_bounds(0, Some(-u_max), Some(u_max));
    }

    match solve_qp(&qp)? {
        QpSolution::Optimal { z, active_set, .. } => {
            let active = map_active_candidate(&active_set, &row_map, constraints);
            Ok(FilterDecision {
                u: z[0],
                rho: 0.0,
                status: FilterStatus::Ok,
                margins,
                active,
            })
        }
        QpSolution::Infeasible { .. } => Ok(FilterDecision {
            u: 0.0,
            rho: 0.0,
            status: FilterStatus::Infeasible,
            margins,
            active: Vec::new(),
        }),
    }
}

fn row_constraint_map(dsms: &[DsmSpec]) -> Vec<usize> {
    (0..dsms.len()).collect()
}

/// Translates combined-row indices from the QP back to constraint indices;
/// box rows count toward the input-bound constraint.
fn map_active(active_rows: &[usize], row_map: &[usize], dsms: &[DsmSpec]) -> Vec<usize> {
    let input_idx = dsms
        .iter()
        .position(|d| d.constraint.kind == ConstraintKind::InputBound);
    collect_active(active_rows, row_map, input_idx)
}

fn map_active_candidate(
    active_rows: &[usize],
    row_map: &[usize],
    constraints: &[ConstraintSpec],
) -> Vec<usize> {
    let input_idx = constraints
        .iter()
        .position(|c| c.kind == ConstraintKind::InputBound);
    collect_active(active_rows, row_map, input_idx)
}

fn collect_active(
    active_rows: &[usize],
    row_map: &[usize],
    input_idx: Option<usize>,
) -> Vec<usize> {
    let mut active: Vec<usize> = Vec::new();
    for &row in active_rows {
        let mapped = if row < row_map.len() {
            Some(row_map[row])
        } else {
            input_idx
        };
        if let Some(i) = mapped {
            if !active.contains(&i) {
                active.push(i);
            }
        }
    }
    active.sort_unstable();
    active
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{equilibrium_state, prestab_pi};
    use crate::lyapunov::LyapunovFn;
    use crate::presets::{
        kappa_gains, pi_gains, scenario_a_constraints, scenario_b_constraints, table_params,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dsms(constraints: &[ConstraintSpec]) -> Vec<DsmSpec> {
        let lyap = LyapunovFn::new(table_params(), pi_gains());
        constraints.iter().map(|c| DsmSpec::new(*c, lyap)).collect()
    }

    fn dsms_kappa(constraints: &[ConstraintSpec]) -> Vec<DsmSpec> {
        let lyap = LyapunovFn::new(table_params(), kappa_gains());
        constraints.iter().map(|c| DsmSpec::new(*c, lyap)).collect()
    }

    #[test]
    fn filter_passes_nominal_input_at_the_target_equilibrium() {
        let r = 0.6;
        let a = AugmentedState::new(equilibrium_state(r), r);
        let d = dsm_cbf_step(
            &a,
            r,
            &dsms(&scenario_b_constraints()),
            &kappa_gains(),
            0.01,
        )
        .unwrap();
        assert_eq!(d.status, FilterStatus::Ok);
        assert!(d.u.abs() < 1e-12);
        assert!(d.rho.abs() < 1e-12);
        assert!(d.margins.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn prestabilized_pair_is_a_feasible_witness_row_by_row() {
        // The inequality value at (pi(x, v), 0) collapses to
        // kd xdot^2 + alpha(Delta): nonnegative at every sampled state, with
        // the zero-extended gain covering states outside the margin set.
        let specs = dsms(&scenario_b_constraints());
        let kd = pi_gains().kd;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..500 {
            let s = PlantState::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.3..0.3),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let v = rng.random_range(-1.0..1.0);
            let a = AugmentedState::new(s, v);
            let u_pi = prestab_pi(&s, v, &pi_gains());
            for d in &specs {
                let row = dsm_row_value(&a, d, u_pi, 0.0).unwrap();
                let expected = kd * s.xdot * s.xdot + d.alpha * d.value(&s, v).max(0.0);
                assert!(
                    (row - expected).abs() < 1e-9 * (1.0 + expected.abs()),
                    "{}: row {} vs closed form {}",
                    d.constraint.kind,
                    row,
                    expected
                );
                assert!(row >= -1e-9);
            }
        }
    }

    #[test]
    fn filter_respects_a_margin_sitting_exactly_on_its_level_set() {
        // velocity-only state scaled onto the input-bound threshold level
        let lyap = LyapunovFn::new(table_params(), pi_gains());
        let only_input = vec![DsmSpec::new(crate::presets::input_bound(), lyap)];
        let v = 0.3;
        let gamma3 = only_input[0].gamma(v);
        let xdot = (2.0 * gamma3 / 1.5).sqrt();
        let a = AugmentedState::new(PlantState::new(v, 0.0, xdot, 0.0), v);
        assert!(only_input[0].value(&a.plant, v).abs() < 1e-12);

        let d = dsm_cbf_step(&a, 1.0, &only_input, &kappa_gains(), 0.01).unwrap();
        assert_eq!(d.status, FilterStatus::Ok);
        let row = dsm_row_value(&a, &only_input[0], d.u, d.rho).unwrap();
        assert!(row >= -1e-8, "boundary decay condition violated: {row}");
        assert!(d.u.abs() <= 4.0 + 1e-9);
    }

    #[test]
    fn governor_matches_hand_computed_start_of_scenario() {
        let a = AugmentedState::new(PlantState::new(0.0, 0.0, 0.0, 0.0), 0.1);
        let (u, rho) = erg_step(
            &a,
            1.0,
            &dsms_kappa(&scenario_a_constraints()),
            &kappa_gains(),
        )
        .unwrap();
        assert!((u - 1.0).abs() < 1e-12);
        // worst margin is the input bound: 16/52 - V, V = 1/2 * 10 * 0.01
        let expected_rho = (16.0 / 52.0 - 0.05) * 0.9;
        assert!((rho - expected_rho).abs() < 1e-12, "rho = {rho}");
    }

    #[test]
    fn governor_reverses_when_a_margin_goes_negative() {
        // inflate the energy well above every threshold
        let a = AugmentedState::new(PlantState::new(0.0, 0.0, 2.5, 0.0), 0.1);
        let specs = dsms_kappa(&scenario_a_constraints());
        let (_, worst) = dsm_min_over_constraints(&a, &specs).unwrap();
        assert!(worst < 0.0);
        let (_, rho) = erg_step(&a, 1.0, &specs, &kappa_gains()).unwrap();
        assert!(
            rho < 0.0,
            "rate should point away from the target, got {rho}"
        );
    }

    #[test]
    fn worst_margin_picks_smallest_index_on_ties() {
        let lyap = LyapunovFn::new(table_params(), pi_gains());
        // two identical constraints produce identical margins
        let pair = vec![
            DsmSpec::new(crate::presets::position_upper(), lyap),
            DsmSpec::new(crate::presets::position_upper(), lyap),
        ];
        let a = AugmentedState::new(PlantState::new(0.2, 0.0, 0.0, 0.0), 0.2);
        let (idx, _) = dsm_min_over_constraints(&a, &pair).unwrap();
        assert_eq!(idx, 0);

        let single = vec![DsmSpec::new(crate::presets::input_bound(), lyap)];
        let (idx, val) = dsm_min_over_constraints(&a, &single).unwrap();
        assert_eq!(idx, 0);
        assert!((val - single[0].value(&a.plant, 0.2)).abs() < 1e-15);

        assert!(dsm_min_over_constraints(&a, &[]).is_err());
    }

    #[test]
    fn worst_margin_at_scenario_start_is_the_swing_limit() {
        let specs = dsms(&scenario_b_constraints());
        let a = AugmentedState::new(PlantState::new(0.0, 0.0, 0.0, 0.0), 0.1);
        let (idx, val) = dsm_min_over_constraints(&a, &specs).unwrap();
        // direct recomputation: Delta_i = Gamma_i(0.1) - 0.005
        let direct: Vec<f64> = specs.iter().map(|d| d.gamma(0.1) - 0.005).collect();
        let direct_min = direct
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        assert_eq!(idx, direct_min.0);
        assert_eq!(specs[idx].constraint.kind, ConstraintKind::AngleBound);
        assert!((val - direct_min.1).abs() < 1e-15);
    }

    #[test]
    fn candidate_barrier_values_match_hand_arithmetic() {
        let p = table_params();
        let origin = PlantState::new(0.0, 0.0, 0.0, 0.0);
        let h1 = CandidateCbf::from_constraint(&crate::presets::position_lower()).unwrap();
        assert!((h1.min_value(&origin, &p) - 6.6).abs() < 1e-12);

        let angle = CandidateCbf::from_constraint(&crate::presets::angle_bound()).unwrap();
        let rows = angle.rows(&origin, &p);
        assert_eq!(rows.len(), 2);
        assert!(
            (rows[0].0 - rows[1].0).abs() < 1e-15,
            "symmetric at the origin"
        );

        assert!(CandidateCbf::from_constraint(&crate::presets::input_bound()).is_none());
    }

    #[test]
    fn candidate_gradients_match_finite_differences() {
        let p = table_params();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = 1e-6;
        for c in scenario_b_constraints() {
            let Some(cbf) = CandidateCbf::from_constraint(&c) else {
                continue;
            };
            for _ in 0..200 {
                let s = PlantState::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-3.0..3.0),
                );
                let rows = cbf.rows(&s, &p);
                for (r_idx, (_, grad)) in rows.iter().enumerate() {
                    let mut arr = s.to_array();
                    for i in 0..4 {
                        let orig = arr[i];
                        arr[i] = orig + h;
                        let up = cbf.rows(&PlantState::from_array(arr), &p)[r_idx].0;
                        arr[i] = orig - h;
                        let dn = cbf.rows(&PlantState::from_array(arr), &p)[r_idx].0;
                        arr[i] = orig;
                        let fd = (up - dn) / (2.0 * h);
                        assert!(
                            (grad[i] - fd).abs() < 1e-6 * (1.0 + grad[i].abs()),
                            "{} row {r_idx} axis {i}",
                            c.kind
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn candidate_filter_passes_nominal_input_deep_inside() {
        let s = PlantState::new(0.0, 0.0, 0.0, 0.0);
        let d = candidate_cbf_step(
            &s,
            0.1,
            &scenario_b_constraints(),
            &kappa_gains(),
            &table_params(),
        )
        .unwrap();
        assert_eq!(d.status, FilterStatus::Ok);
        assert!(
            (d.u - 1.0).abs() < 1e-10,
            "nominal force admissible, got {}",
            d.u
        );
        assert_eq!(d.rho, 0.0);
        assert!(d.active.is_empty());
    }

    #[test]
    fn candidate_filter_reports_infeasibility_as_data() {
        // fast swing near the angle limit: the receding-side row demands a
        // force far below what the box allows
        let s = PlantState::new(0.0, 0.17, 0.0, 3.0);
        let d = candidate_cbf_step(
            &s,
            0.0,
            &scenario_b_constraints(),
            &kappa_gains(),
            &table_params(),
        )
        .unwrap();
        assert_eq!(d.status, FilterStatus::Infeasible);
        assert_eq!(d.u, 0.0);
        assert_eq!(d.rho, 0.0);
        // the swing barrier is deeply negative at this state
        assert!(d.margins[3] < -1.0);
    }

    #[test]
    fn filter_reports_binding_constraints() {
        // park the reference on the upper position bound and ask for more
        let lyap = LyapunovFn::new(table_params(), pi_gains());
        let constraints = scenario_a_constraints();
        let specs: Vec<DsmSpec> = constraints.iter().map(|c| DsmSpec::new(*c, lyap)).collect();
        let v = 1.0999;
        let a = AugmentedState::new(equilibrium_state(v), v);
        let d = dsm_cbf_step(&a, 1.5, &specs, &kappa_gains(), 0.01).unwrap();
        assert_eq!(d.status, FilterStatus::Ok);
        // progress must stall: the upper-position margin is nearly zero
        assert!(d.rho < 1e-3, "rho = {}", d.rho);
        assert!(d.margins[1] < 1e-5);
    }

    #[test]
    fn empty_constraint_lists_are_rejected() {
        let a = AugmentedState::new(PlantState::new(0.0, 0.0, 0.0, 0.0), 0.0);
        assert!(matches!(
            dsm_cbf_step(&a, 1.0, &[], &kappa_gains(), 0.01),
            Err(Error::Config(_))
        ));
    }
}
