//! Dense convex QP solver for very small problems.
//!
//! Solves `min 1/2 z'Hz + f'z` subject to `Az + b >= 0` and optional
//! per-variable bounds, with `H` positive definite and at most a handful of
//! variables and rows. The scale admits a deliberately simple design:
//!
//! * feasibility is decided first by a phase-1 simplex that either returns a
//!   feasible point or a Farkas certificate `y >= 0`, `A'y = 0`, `b'y < 0`
//!   proving the inequalities contradictory (variable bounds are folded into
//!   `A` so the certificate covers them too);
//! * the minimizer is then found by a primal active-set iteration whose
//!   working-set updates use smallest-index selection both when adding a
//!   blocking row and when dropping a negative-multiplier row, which rules
//!   out cycling;
//! * every linear solve is a dense factorization of a system no larger than
//!   `(n + n) x (n + n)`.
//!
//! Certified infeasibility is a result, not an error: callers that treat it
//! as fatal do so themselves. Errors are reserved for malformed problems and
//! for blowing the iteration cap.
//!
//! Row indexing in solutions and certificates: the caller's rows keep their
//! indices `0..m`; bound rows follow, lower before upper, variables in
//! order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual tolerance for declaring an inequality satisfied.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Tolerance on KKT stationarity and multiplier signs.
pub const STATIONARITY_TOL: f64 = 1e-8;
/// Iteration cap shared by the simplex and the active-set loop.
pub const MAX_ITER: usize = 200;

/// Phase-1 artificial variable must shrink below this for the system to
/// count as feasible; the returned point then satisfies `Az + b >= -1e-10`.
const PHASE1_TOL: f64 = 1e-10;
/// Pivoting threshold: tableau entries smaller than this are treated as
/// zero during ratio tests and pivot selection.
const PIVOT_TOL: f64 = 1e-11;

/// `min 1/2 z'Hz + f'z  s.t.  Az + b >= 0,  lower <= z <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Cost Hessian, symmetric positive definite.
    pub h: DMatrix<f64>,
    /// Cost linear term.
    pub f: DVector<f64>,
    /// Inequality rows, one constraint per row.
    pub a: DMatrix<f64>,
    /// Inequality offsets: row `i` requires `a_i . z + b_i >= 0`.
    pub b: DVector<f64>,
    /// Optional per-variable lower bounds.
    pub box_lower: Vec<Option<f64>>,
    /// Optional per-variable upper bounds.
    pub box_upper: Vec<Option<f64>>,
}

impl QpProblem {
    /// Unconstrained problem; add rows and bounds afterwards.
    pub fn new(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        let n = f.len();
        Self {
            h,
            f,
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            box_lower: vec![None; n],
            box_upper: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    /// Appends the constraint `row . z + offset >= 0`.
    pub fn push_row(&mut self, row: &[f64], offset: f64) {
        assert_eq!(row.len(), self.n(), "row length must match variable count");
        let m = self.a.nrows();
        let mut a = std::mem::replace(&mut self.a, DMatrix::zeros(0, 0)).insert_row(m, 0.0);
        for (j, &v) in row.iter().enumerate() {
            a[(m, j)] = v;
        }
        self.a = a;
        let b = std::mem::replace(&mut self.b, DVector::zeros(0)).insert_row(m, offset);
        self.b = b;
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.box_lower[var] = lower;
        self.box_upper[var] = upper;
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.h.nrows() != n || self.h.ncols() != n {
            return Err(Error::Config(format!(
                "Hessian is {}x{} but the problem has {n} variables",
                self.h.nrows(),
                self.h.ncols()
            )));
        }
        if self.a.ncols() != n && self.a.nrows() > 0 {
            return Err(Error::Config("constraint matrix width mismatch".into()));
        }
        if self.a.nrows() != self.b.len() {
            return Err(Error::Config("constraint offset length mismatch".into()));
        }
        let scale = 1.0_f64.max(self.h.amax());
        if (&self.h - self.h.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Config("Hessian must be symmetric".into()));
        }
        if self.h.clone().cholesky().is_none() {
            return Err(Error::Config("Hessian must be positive definite".into()));
        }
        for (lo, hi) in self.box_lower.iter().zip(&self.box_upper) {
            if let (Some(l), Some(u)) = (lo, hi) {
                if l > u {
                    return Err(Error::Config(format!("empty variable box [{l}, {u}]")));
                }
            }
        }
        Ok(())
    }

    /// All inequalities as rows, variable bounds folded in after the
    /// caller's rows.
    fn combined_rows(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.n();
        let mut rows: Vec<f64> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        for i in 0..self.a.nrows() {
            rows.extend((0..n).map(|j| self.a[(i, j)]));
            offsets.push(self.b[i]);
        }
        for j in 0..n {
            if let Some(l) = self.box_lower[j] {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                rows.extend(e);
                offsets.push(-l);
            }
            if let Some(u) = self.box_upper[j] {
                let mut e = vec![0.0; n];
                e[j] = -1.0;
                rows.extend(e);
                offsets.push(u);
            }
        }
        let m = offsets.len();
        (
            DMatrix::from_row_slice(m, n, &rows),
            DVector::from_vec(offsets),
        )
    }
}

/// Outcome of a QP solve. Infeasibility carries a Farkas certificate over
/// the combined row list (caller rows, then bound rows), normalized to unit
/// max entry.
#[derive(Debug, Clone, PartialEq)]
pub enum QpSolution {
    Optimal {
        z: DVector<f64>,
        /// Indices of rows active at the solution, ascending, in combined-row
        /// indexing.
        active_set: Vec<usize>,
        /// Worst KKT residual: stationarity, primal and dual feasibility,
        /// complementary slackness.
        kkt_residual: f64,
    },
    Infeasible {
        certificate: DVector<f64>,
    },
}

impl QpSolution {
    pub fn optimal(&self) -> Option<&DVector<f64>> {
        match self {
            QpSolution::Optimal { z, .. } => Some(z),
            QpSolution::Infeasible { .. } => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, QpSolution::Infeasible { .. })
    }
}

/// Outcome of the standalone feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase1Outcome {
    /// A point with `Az + b >= -1e-10` on every combined row.
    Feasible(DVector<f64>),
    /// Farkas certificate `y >= 0`, `A'y = 0`, `b'y < 0`, unit max entry.
    Infeasible { certificate: DVector<f64> },
}

/// Decides feasibility of `Az + b >= 0` with variable bounds, independent of
/// any cost.
pub fn phase1_feasibility(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    box_lower: &[Option<f64>],
    box_upper: &[Option<f64>],
) -> Result<Phase1Outcome> {
    let n = a.ncols();
    let dummy = QpProblem {
        h: DMatrix::identity(n, n),
        f: DVector::zeros(n),
        a: a.clone(),
        b: b.clone(),
        box_lower: box_lower.to_vec(),
        box_upper: box_upper.to_vec(),
    };
    let (a_all, b_all) = dummy.combined_rows();
    phase1_on_rows(&a_all, &b_all)
}

/// Solves the QP or certifies the constraints contradictory.
pub fn solve_qp(p: &QpProblem) -> Result<QpSolution> {
    p.validate()?;
    let (a_all, b_all) = p.combined_rows();
    let m = a_all.nrows();

    // unconstrained minimum first: if it satisfies every row it is the
    // global optimum and no iteration is needed
    let chol = p.h.clone().cholesky().expect("validated positive definite");
    let z_uc = chol.solve(&(-&p.f));
    if m == 0 || (&a_all * &z_uc + &b_all).min() >= -1e-12 {
        let (active, kkt) = certify(p, &a_all, &b_all, &z_uc, &[], &[]);
        return Ok(QpSolution::Optimal {
            z: z_uc,
            active_set: active,
            kkt_residual: kkt,
        });
    }

    let z0 = match phase1_on_rows(&a_all, &b_all)? {
        Phase1Outcome::Feasible(z0) => z0,
        Phase1Outcome::Infeasible { certificate } => {
            return Ok(QpSolution::Infeasible { certificate })
        }
    };
    let (z, working, lambda) = active_set_iterate(p, &a_all, &b_all, z0)?;
    let (active, kkt) = certify(p, &a_all, &b_all, &z, &working, &lambda);
    Ok(QpSolution::Optimal {
        z,
        active_set: active,
        kkt_residual: kkt,
    })
}

/// Reports the active rows at `z` and the worst KKT residual given the
/// final working set and its multipliers.
fn certify(
    p: &QpProblem,
    a_all: &DMatrix<f64>,
    b_all: &DVector<f64>,
    z: &DVector<f64>,
    working: &[usize],
    lambda: &[f64],
) -> (Vec<usize>, f64) {
    let residuals = a_all * z + b_all;
    let active: Vec<usize> = (0..a_all.nrows())
        .filter(|&i| residuals[i].abs() <= FEASIBILITY_TOL)
        .collect();

    let mut stat = &p.h * z + &p.f;
    for (&i, &l) in working.iter().zip(lambda) {
        for j in 0..p.n() {
            stat[j] -= l * a_all[(i, j)];
        }
    }
    let r_stat = stat.amax();
    let r_prim = (0..a_all.nrows()).fold(0.0_f64, |acc, i| acc.max(-residuals[i]));
    let r_dual = lambda.iter().fold(0.0_f64, |acc, &l| acc.max(-l));
    let r_comp = working
        .iter()
        .zip(lambda)
        .fold(0.0_f64, |acc, (&i, &l)| acc.max((l * residuals[i]).abs()));
    (active, r_stat.max(r_prim).max(r_dual).max(r_comp))
}

/// Primal active-set iteration from a feasible start.
///
/// Returns the minimizer, the final working set, and its multipliers.
/// Rows entering the working set always have a gradient independent of the
/// rows already in it (a dependent row cannot block a step that keeps the
/// working rows tight), so the KKT systems stay nonsingular.
fn active_set_iterate(
    p: &QpProblem,
    a_all: &DMatrix<f64>,
    b_all: &DVector<f64>,
    mut z: DVector<f64>,
) -> Result<(DVector<f64>, Vec<usize>, Vec<f64>)> {
    let n = p.n();
    let m = a_all.nrows();
    let mut working: Vec<usize> = Vec::new();

    for _ in 0..MAX_ITER {
        let k = working.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&p.h);
        for (r, &i) in working.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = a_all[(i, j)];
                kkt[(j, n + r)] = a_all[(i, j)];
            }
        }
        let g = &p.h * &z + &p.f;
        let mut rhs = DVector::zeros(n + k);
        for j in 0..n {
            rhs[j] = -g[j];
        }
        let sol = kkt
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolverFailure("singular KKT system".into()))?;
        let step = sol.rows(0, n).into_owned();
        let lambda: Vec<f64> = (0..k).map(|r| -sol[n + r]).collect();

        if step.amax() <= 1e-10 {
            // stationary on the working surface; drop the lowest-index row
            // whose multiplier wants to leave
            let drop = working
                .iter()
                .enumerate()
                .filter(|&(r, _)| lambda[r] < -STATIONARITY_TOL)
                .min_by_key(|&(_, &i)| i)
                .map(|(r, _)| r);
            match drop {
                Some(r) => {
                    working.remove(r);
                }
                None => return Ok((z, working, lambda)),
            }
            continue;
        }

        // longest step along `step` that keeps every inactive row satisfied
        let mut alpha = 1.0;
        let mut blocker: Option<usize> = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let d: f64 = (0..n).map(|j| a_all[(i, j)] * step[j]).sum();
            if d >= -PIVOT_TOL {
                continue;
            }
            let r: f64 = (0..n).map(|j| a_all[(i, j)] * z[j]).sum::<f64>() + b_all[i];
            let a_i = (-r / d).max(0.0);
            if a_i < alpha - 1e-12 {
                alpha = a_i;
                blocker = Some(i);
            }
        }
        z += alpha * &step;
        if let Some(i) = blocker {
            working.push(i);
            working.sort_unstable();
        }
    }
    Err(Error::SolverFailure(format!(
        "active-set iteration cap {MAX_ITER} exceeded"
    )))
}

/// Phase-1 simplex on an explicit row list.
///
/// Minimizes a single artificial slack `s` in `Az + b + s >= 0`, `s >= 0`,
/// written in standard form with `z = z+ - z-` and row slacks `t`:
///
/// ```text
/// -A z+ + A z- - s + t = b,    all variables >= 0,    min s
/// ```
///
/// `s* ~ 0` yields a feasible `z`; otherwise the optimal reduced costs of
/// the `t` columns are exactly a Farkas certificate for the row system.
fn phase1_on_rows(a_all: &DMatrix<f64>, b_all: &DVector<f64>) -> Result<Phase1Outcome> {
    let n = a_all.ncols();
    let m = a_all.nrows();
    if m == 0 || b_all.min() >= 0.0 {
        return Ok(Phase1Outcome::Feasible(DVector::zeros(n)));
    }

    // columns: z+ (n), z- (n), s (1), t (m); rows: m constraints + objective
    let s_col = 2 * n;
    let t0 = 2 * n + 1;
    let width = t0 + m + 1;
    let rhs_col = width - 1;
    let mut tab = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        for j in 0..n {
            tab[i][j] = -a_all[(i, j)];
            tab[i][n + j] = a_all[(i, j)];
        }
        tab[i][s_col] = -1.0;
        tab[i][t0 + i] = 1.0;
        tab[i][rhs_col] = b_all[i];
    }
    tab[m][s_col] = 1.0;

    // drive s into the basis at the worst row, making every rhs nonnegative
    let mut basis: Vec<usize> = (0..m).map(|i| t0 + i).collect();
    let worst = (0..m)
        .min_by(|&i, &j| b_all[i].partial_cmp(&b_all[j]).expect("finite offsets"))
        .expect("nonempty");
    pivot(&mut tab, worst, s_col);
    basis[worst] = s_col;

    for _ in 0..MAX_ITER {
        // entering column: lowest index with a negative reduced cost
        let entering = (0..width - 1).find(|&j| tab[m][j] < -1e-12);
        let Some(col) = entering else { break };
        // leaving row: tightest ratio, ties broken by lowest basis variable
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            if tab[i][col] <= PIVOT_TOL {
                continue;
            }
            let ratio = tab[i][rhs_col] / tab[i][col];
            let better = match best {
                None => true,
                Some((r, b_var, _)) => {
                    ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < b_var)
                }
            };
            if better {
                best = Some((ratio, basis[i], i));
            }
        }
        let Some((_, _, row)) = best else {
            return Err(Error::SolverFailure(
                "phase-1 objective unbounded: numerical breakdown".into(),
            ));
        };
        pivot(&mut tab, row, col);
        basis[row] = col;
        if tab[m][..width - 1].iter().all(|&c| c >= -1e-12) {
            break;
        }
    }
    if tab[m][..width - 1].iter().any(|&c| c < -1e-12) {
        return Err(Error::SolverFailure(format!(
            "phase-1 iteration cap {MAX_ITER} exceeded"
        )));
    }

    let mut w = vec![0.0; width - 1];
    for (i, &bv) in basis.iter().enumerate() {
        w[bv] = tab[i][rhs_col].max(0.0);
    }
    let s_star = w[s_col];
    if s_star <= PHASE1_TOL {
        let z = DVector::from_iterator(n, (0..n).map(|j| w[j] - w[n + j]));
        let worst_residual = (a_all * &z + b_all).min();
        if worst_residual < -1e-9 {
            return Err(Error::SolverFailure(format!(
                "phase-1 point failed validation: residual {worst_residual:.3e}"
            )));
        }
        return Ok(Phase1Outcome::Feasible(z));
    }

    // reduced costs of the t columns are the Farkas multipliers
    let mut y = DVector::from_iterator(m, (0..m).map(|i| tab[m][t0 + i].max(0.0)));
    let scale = y.amax();
    if scale <= 0.0 {
        return Err(Error::SolverFailure(
            "degenerate infeasibility certificate".into(),
        ));
    }
    y /= scale;
    let mag = 1.0_f64.max(a_all.amax()).max(b_all.amax());
    let aty = (a_all.transpose() * &y).amax();
    let bty = b_all.dot(&y);
    if aty > 1e-7 * mag || bty >= 0.0 {
        return Err(Error::SolverFailure(format!(
            "infeasibility certificate failed validation: |A'y| = {aty:.3e}, b'y = {bty:.3e}"
        )));
    }
    Ok(Phase1Outcome::Infeasible { certificate: y })
}

fn pivot(tab: &mut [Vec<f64>], row: usize, col: usize) {
    let piv = tab[row][col];
    for v in &mut tab[row] {
        *v /= piv;
    }
    for i in 0..tab.len() {
        if i == row {
            continue;
        }
        let factor = tab[i][col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..tab[i].len() {
            tab[i][j] -= factor * tab[row][j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_problem(n: usize) -> QpProblem {
        QpProblem::new(DMatrix::identity(n, n), DVector::zeros(n))
    }

    #[test]
    fn unconstrained_minimum_is_minus_h_inverse_f() {
        let p = identity_problem(2);
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal {
                z,
                active_set,
                kkt_residual,
            } => {
                assert_eq!(z, DVector::zeros(2));
                assert!(active_set.is_empty());
                assert!(kkt_residual <= STATIONARITY_TOL);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn single_constraint_clips_the_minimum() {
        // min 1/2 |z|^2 - 2 z1 subject to z1 <= 1: optimum at (1, 0)
        let mut p = identity_problem(2);
        p.f = DVector::from_vec(vec![-2.0, 0.0]);
        p.push_row(&[-1.0, 0.0], 1.0);
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal {
                z,
                active_set,
                kkt_residual,
            } => {
                assert!((z[0] - 1.0).abs() < 1e-10);
                assert!(z[1].abs() < 1e-10);
                assert_eq!(active_set, vec![0]);
                assert!(kkt_residual <= STATIONARITY_TOL);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_half_lines_yield_unit_certificate() {
        // z >= 1 and z <= 0 cannot both hold
        let mut p = identity_problem(1);
        p.push_row(&[1.0], -1.0);
        p.push_row(&[-1.0], 0.0);
        match solve_qp(&p).unwrap() {
            QpSolution::Infeasible { certificate } => {
                assert!((certificate[0] - 1.0).abs() < 1e-9);
                assert!((certificate[1] - 1.0).abs() < 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn variable_bounds_participate_as_rows() {
        // min (z - 4)^2 / 2 ... with z <= 1: clipped at the bound row
        let mut p = identity_problem(1);
        p.f = DVector::from_vec(vec![-4.0]);
        p.set_bounds(0, None, Some(1.0));
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal { z, active_set, .. } => {
                assert!((z[0] - 1.0).abs() < 1e-10);
                assert_eq!(
                    active_set,
                    vec![0],
                    "bound row takes index 0 with no caller rows"
                );
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_fold_into_the_certificate() {
        let mut p = identity_problem(1);
        p.push_row(&[1.0], -2.0); // z >= 2
        p.set_bounds(0, None, Some(1.0)); // z <= 1
        match solve_qp(&p).unwrap() {
            QpSolution::Infeasible { certificate } => {
                assert_eq!(certificate.len(), 2);
                assert!(certificate.min() >= 0.0);
                // y certifies: summing y1*(z - 2) + y2*(1 - z) >= 0 demands y1 = y2
                // and leaves the negative constant y1*(-2) + y2*(1)
                assert!((certificate[0] - certificate[1]).abs() < 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn phase1_trivial_cases() {
        let a = DMatrix::zeros(0, 1);
        let b = DVector::zeros(0);
        match phase1_feasibility(&a, &b, &[None], &[None]).unwrap() {
            Phase1Outcome::Feasible(z) => assert_eq!(z, DVector::zeros(1)),
            other => panic!("expected feasible, got {other:?}"),
        }

        // 1 <= z <= 2
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        match phase1_feasibility(&a, &b, &[None], &[None]).unwrap() {
            Phase1Outcome::Feasible(z) => {
                assert!(z[0] >= 1.0 - 1e-10 && z[0] <= 2.0 + 1e-10, "z = {}", z[0]);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn two_variable_corner_with_two_active_rows() {
        // min 1/2 |z|^2 - [3, 3] . z subject to z1 <= 1, z2 <= 1
        let mut p = identity_problem(2);
        p.f = DVector::from_vec(vec![-3.0, -3.0]);
        p.push_row(&[-1.0, 0.0], 1.0);
        p.push_row(&[0.0, -1.0], 1.0);
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal {
                z,
                active_set,
                kkt_residual,
            } => {
                assert!((z[0] - 1.0).abs() < 1e-10);
                assert!((z[1] - 1.0).abs() < 1e-10);
                assert_eq!(active_set, vec![0, 1]);
                assert!(kkt_residual <= STATIONARITY_TOL);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn slides_along_a_face_to_the_constrained_minimum() {
        let mut p = identity_problem(2);
        p.f = DVector::from_vec(vec![2.0, -4.0]);
        // z2 <= 2 binds at the optimum; z1 >= -3 stays slack
        p.push_row(&[0.0, -1.0], 2.0);
        p.push_row(&[1.0, 0.0], 3.0);
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal { z, active_set, .. } => {
                assert!((z[0] + 2.0).abs() < 1e-10);
                assert!((z[1] - 2.0).abs() < 1e-10);
                assert_eq!(active_set, vec![0]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn working_set_drops_a_row_when_its_multiplier_goes_negative() {
        // The anisotropic Hessian bends the constrained path: the iteration
        // first slides along z1 + z2 <= 1, hits z1 <= 1.05 at a vertex where
        // the first row's multiplier is -0.5, drops it, and finishes on the
        // second row alone at (1.05, -0.055).
        let mut p = QpProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 100.0]),
            DVector::from_vec(vec![-2.0, 5.5]),
        );
        p.push_row(&[-1.0, -1.0], 1.0);
        p.push_row(&[-1.0, 0.0], 1.05);
        match solve_qp(&p).unwrap() {
            QpSolution::Optimal {
                z,
                active_set,
                kkt_residual,
            } => {
                assert!((z[0] - 1.05).abs() < 1e-10, "z = {z:?}");
                assert!((z[1] + 0.055).abs() < 1e-10, "z = {z:?}");
                assert_eq!(active_set, vec![1]);
                assert!(kkt_residual <= STATIONARITY_TOL);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let mut p = identity_problem(2);
        p.f = DVector::from_vec(vec![-1.0, -7.0]);
        p.push_row(&[-1.0, -1.0], 1.5);
        p.set_bounds(1, Some(-1.0), Some(1.0));
        let one = format!("{:?}", solve_qp(&p).unwrap());
        let two = format!("{:?}", solve_qp(&p).unwrap());
        assert_eq!(one, two);
    }

    #[test]
    fn malformed_problems_are_config_errors() {
        let bad_dim = QpProblem {
            h: DMatrix::identity(1, 1),
            f: DVector::zeros(2),
            a: DMatrix::zeros(0, 2),
            b: DVector::zeros(0),
            box_lower: vec![None; 2],
            box_upper: vec![None; 2],
        };
        assert!(matches!(solve_qp(&bad_dim), Err(Error::Config(_))));

        let not_pd = QpProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DVector::zeros(2),
        );
        assert!(matches!(solve_qp(&not_pd), Err(Error::Config(_))));

        let asym = QpProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]),
            DVector::zeros(2),
        );
        assert!(matches!(solve_qp(&asym), Err(Error::Config(_))));

        let mut empty_box = identity_problem(1);
        empty_box.set_bounds(0, Some(1.0), Some(0.0));
        assert!(matches!(solve_qp(&empty_box), Err(Error::Config(_))));
    }

    #[test]
    fn reported_solutions_satisfy_kkt_tolerances() {
        // a handful of structured cases; the randomized battery lives in the
        // verification suite
        let cases: Vec<QpProblem> = vec![
            {
                let mut p = identity_problem(2);
                p.f = DVector::from_vec(vec![-5.0, 0.3]);
                p.push_row(&[-1.0, -1.0], 1.0);
                p.push_row(&[1.0, -2.0], 0.5);
                p.set_bounds(0, Some(-2.0), Some(2.0));
                p
            },
            {
                let mut p = QpProblem::new(
                    DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]),
                    DVector::from_vec(vec![1.0, -6.0]),
                );
                p.push_row(&[0.0, -1.0], 1.2);
                p
            },
        ];
        for p in &cases {
            match solve_qp(p).unwrap() {
                QpSolution::Optimal {
                    z, kkt_residual, ..
                } => {
                    let (a_all, b_all) = p.combined_rows();
                    assert!((&a_all * &z + &b_all).min() >= -FEASIBILITY_TOL);
                    assert!(kkt_residual <= STATIONARITY_TOL, "residual {kkt_residual}");
                }
                other => panic!("expected optimal, got {other:?}"),
            }
        }
    }
}
