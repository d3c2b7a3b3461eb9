//! Self-contained dense linear-program solver.
//!
//! Two-phase primal simplex on a dense tableau with Bland's anti-cycling
//! pivot rule. The problems this crate generates have at most a few dozen
//! variables and a few hundred constraints, so determinism and simplicity
//! win over asymptotics. Variables carry explicit bounds; upper bounds may
//! be `f64::INFINITY`, which is how relaxed-capacity studies avoid big-M
//! constants.
//!
//! Solved programs report row duals. For `min c.x` with `A_in x <= b_in`
//! the inequality duals are nonpositive, equality duals are free, and
//! `kkt_residual` checks stationarity, dual signs, and complementary
//! slackness against the solution.

use thiserror::Error;

/// Absolute primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Entries smaller than this are treated as zero during pivoting.
pub const PIVOT_TOL: f64 = 1e-10;
/// Slack threshold below which an inequality is reported as binding.
pub const BINDING_TOL: f64 = 1e-6;

/// One linear row, `coeffs . x (= or <=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }

    fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

/// `min objective . x` subject to equalities, inequalities (`<=`), and
/// per-variable bounds. Lower bounds must be finite; upper bounds may be
/// `+inf`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Per-variable `(lower, upper)`.
    pub bounds: Vec<(f64, f64)>,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl LinearProgram {
    /// A program over `num_vars` variables with zero objective and
    /// bounds `[0, +inf)`.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            bounds: vec![(0.0, f64::INFINITY); num_vars],
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() {
                return Err(LpError::Malformed(format!("variable {j}: lower bound must be finite")));
            }
            if hi.is_nan() || hi < lo {
                return Err(LpError::Malformed(format!("variable {j}: bounds [{lo}, {hi}]")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("objective must be finite".into()));
        }
        for (kind, rows) in [("equality", &self.equalities), ("inequality", &self.inequalities)] {
            for (k, row) in rows.iter().enumerate() {
                if row.coeffs.len() != n {
                    return Err(LpError::Malformed(format!(
                        "{kind} {k} has {} coefficients for {n} variables",
                        row.coeffs.len()
                    )));
                }
                if row.coeffs.iter().any(|a| !a.is_finite()) || !row.rhs.is_finite() {
                    return Err(LpError::Malformed(format!("{kind} {k} must be finite")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `x`, `objective_value`, `binding`, and the duals are
/// meaningful only when `status == Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Indices into `inequalities` with slack below [`BINDING_TOL`].
    pub binding: Vec<usize>,
    /// Equality-row multipliers (free sign).
    pub eq_duals: Vec<f64>,
    /// Inequality-row multipliers, `<= 0` at optimality.
    pub ineq_duals: Vec<f64>,
    /// Multipliers of the upper bounds `x_j <= hi_j`, `<= 0`; zero for
    /// variables without a finite upper bound.
    pub upper_duals: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective_value: f64::NAN,
            binding: Vec::new(),
            eq_duals: Vec::new(),
            ineq_duals: Vec::new(),
            upper_duals: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

// Internal row bookkeeping. `Upper(j)` rows realize finite upper bounds of
// shifted variables.
#[derive(Debug, Clone, Copy)]
enum RowKind {
    Eq(usize),
    Ineq(usize),
    Upper(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    kind: RowKind,
    flipped: bool,
    relation: Relation,
    coeffs: Vec<f64>,
    rhs: f64,
}

struct Tableau {
    width: usize,
    data: Vec<f64>, // (rows + 1) x width, cost row last
    basis: Vec<usize>,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pivot_row: usize, pivot_col: usize) {
        let width = self.width;
        let pivot = self.at(pivot_row, pivot_col);
        for c in 0..width {
            *self.at_mut(pivot_row, c) /= pivot;
        }
        *self.at_mut(pivot_row, pivot_col) = 1.0;
        for r in 0..=self.rows() {
            if r == pivot_row {
                continue;
            }
            let factor = self.at(r, pivot_col);
            if factor == 0.0 {
                continue;
            }
            for c in 0..width {
                let delta = factor * self.at(pivot_row, c);
                *self.at_mut(r, c) -= delta;
            }
            *self.at_mut(r, pivot_col) = 0.0;
        }
        self.basis[pivot_row] = pivot_col;
    }

    /// Bland's rule: entering column is the lowest-indexed one with a
    /// negative reduced cost; leaving row is the minimum ratio, ties broken
    /// by the lowest basic variable index.
    fn run_simplex(&mut self, allowed_cols: usize) -> Result<LpStatus, LpError> {
        let cost_row = self.rows();
        let max_iterations = 50_000 + 200 * (self.rows() + self.width);
        for _ in 0..max_iterations {
            let entering = (0..allowed_cols)
                .find(|&c| self.at(cost_row, c) < -PIVOT_TOL);
            let Some(col) = entering else {
                return Ok(LpStatus::Optimal);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                let a = self.at(r, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match leaving {
                    None => true,
                    Some((best_r, best_ratio)) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio <= best_ratio + PIVOT_TOL
                                && self.basis[r] < self.basis[best_r])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(LpStatus::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(LpError::Numerical("simplex iteration limit exceeded".into()))
    }
}

/// Solves the program. Infeasibility and unboundedness are reported through
/// `LpSolution::status`; errors are reserved for malformed input and
/// numerical failure.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let lower: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();

    // Shift x = lower + y with y >= 0, then put every row in standard form
    // with a nonnegative right-hand side.
    let mut rows: Vec<Row> = Vec::new();
    let mut push_row = |kind: RowKind, relation: Relation, coeffs: Vec<f64>, rhs: f64| {
        let (coeffs, rhs, relation, flipped) = if rhs < 0.0 {
            let flipped_rel = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (coeffs.iter().map(|a| -a).collect(), -rhs, flipped_rel, true)
        } else {
            (coeffs, rhs, relation, false)
        };
        rows.push(Row {
            kind,
            flipped,
            relation,
            coeffs,
            rhs,
        });
    };

    for (k, row) in lp.equalities.iter().enumerate() {
        let shifted = row.rhs - row.dot(&lower);
        push_row(RowKind::Eq(k), Relation::Eq, row.coeffs.clone(), shifted);
    }
    for (k, row) in lp.inequalities.iter().enumerate() {
        let shifted = row.rhs - row.dot(&lower);
        push_row(RowKind::Ineq(k), Relation::Le, row.coeffs.clone(), shifted);
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            // hi - lo >= 0, so upper rows are never flipped.
            push_row(RowKind::Upper(j), Relation::Le, coeffs, hi - lo);
        }
    }

    // Column layout: structural | slack/surplus | artificial | rhs.
    let num_rows = rows.len();
    let num_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let num_artificial = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let width = n + num_slack + num_artificial + 1;

    let mut tableau = Tableau {
        width,
        data: vec![0.0; (num_rows + 1) * width],
        basis: vec![0; num_rows],
    };

    let mut slack_col_of = vec![usize::MAX; num_rows];
    let mut next_slack = n;
    let mut next_artificial = n + num_slack;
    for (r, row) in rows.iter().enumerate() {
        for (j, &a) in row.coeffs.iter().enumerate() {
            *tableau.at_mut(r, j) = a;
        }
        *tableau.at_mut(r, width - 1) = row.rhs;
        match row.relation {
            Relation::Le => {
                *tableau.at_mut(r, next_slack) = 1.0;
                slack_col_of[r] = next_slack;
                tableau.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                *tableau.at_mut(r, next_slack) = -1.0;
                slack_col_of[r] = next_slack;
                next_slack += 1;
                *tableau.at_mut(r, next_artificial) = 1.0;
                tableau.basis[r] = next_artificial;
                next_artificial += 1;
            }
            Relation::Eq => {
                *tableau.at_mut(r, next_artificial) = 1.0;
                tableau.basis[r] = next_artificial;
                next_artificial += 1;
            }
        }
    }
    let artificial_start = n + num_slack;

    // Phase 1: minimize the sum of artificials.
    if num_artificial > 0 {
        let cost_row = num_rows;
        for c in artificial_start..width - 1 {
            *tableau.at_mut(cost_row, c) = 1.0;
        }
        for r in 0..num_rows {
            if tableau.basis[r] >= artificial_start {
                let factor: Vec<f64> = (0..width).map(|c| tableau.at(r, c)).collect();
                for (c, v) in factor.into_iter().enumerate() {
                    *tableau.at_mut(cost_row, c) -= v;
                }
            }
        }
        if tableau.run_simplex(width - 1)? == LpStatus::Unbounded {
            // Phase 1 is bounded below by zero; this cannot happen.
            return Err(LpError::Numerical("phase 1 reported unbounded".into()));
        }
        let phase1_objective = -tableau.at(num_rows, width - 1);
        if phase1_objective > FEASIBILITY_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }

        // Drive leftover basic artificials out; rows that cannot pivot are
        // redundant (0 = 0 within tolerance) and get dropped.
        let mut drop_rows = Vec::new();
        for r in 0..num_rows {
            if tableau.basis[r] < artificial_start {
                continue;
            }
            let pivot_col =
                (0..artificial_start).find(|&c| tableau.at(r, c).abs() > PIVOT_TOL);
            match pivot_col {
                Some(col) => tableau.pivot(r, col),
                None => drop_rows.push(r),
            }
        }
        if !drop_rows.is_empty() {
            let keep: Vec<usize> = (0..num_rows).filter(|r| !drop_rows.contains(r)).collect();
            let mut data = Vec::with_capacity((keep.len() + 1) * width);
            for &r in &keep {
                data.extend((0..width).map(|c| tableau.at(r, c)));
            }
            data.extend(vec![0.0; width]);
            tableau.basis = keep.iter().map(|&r| tableau.basis[r]).collect();
            tableau.data = data;
            let kept: Vec<Row> = keep.iter().map(|&r| rows[r].clone()).collect();
            let kept_slack: Vec<usize> = keep.iter().map(|&r| slack_col_of[r]).collect();
            rows = kept;
            slack_col_of = kept_slack;
        }
    }
    let num_rows = rows.len();

    // Phase 2: price the original objective over the current basis. The
    // artificial columns stay allocated but are excluded from entering.
    {
        let cost_row = num_rows;
        for c in 0..width {
            *tableau.at_mut(cost_row, c) = 0.0;
        }
        for j in 0..n {
            *tableau.at_mut(cost_row, j) = lp.objective[j];
        }
        for r in 0..num_rows {
            let basic = tableau.basis[r];
            if basic < n {
                let cost = lp.objective[basic];
                if cost != 0.0 {
                    let row_values: Vec<f64> = (0..width).map(|c| tableau.at(r, c)).collect();
                    for (c, v) in row_values.into_iter().enumerate() {
                        *tableau.at_mut(cost_row, c) -= cost * v;
                    }
                }
            }
        }
        if tableau.run_simplex(artificial_start)? == LpStatus::Unbounded {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
        }
    }

    // Extract the primal point.
    let mut shifted = vec![0.0; n];
    for r in 0..num_rows {
        let basic = tableau.basis[r];
        if basic < n {
            shifted[basic] = tableau.rhs(r).max(0.0);
        }
    }
    let x: Vec<f64> = shifted
        .iter()
        .zip(&lower)
        .map(|(y, lo)| lo + y)
        .collect();

    let residual = primal_residual(lp, &x);
    if residual > FEASIBILITY_TOL {
        return Err(LpError::Numerical(format!(
            "optimal basis violates feasibility by {residual:.3e}"
        )));
    }

    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // Row duals from the final basis: solve B^T dual = c_B against the
    // untouched standard-form rows, then undo sign flips. Rows whose own
    // slack is basic get an exact zero.
    let duals = if num_rows == 0 {
        nalgebra::DVector::zeros(0)
    } else {
        use nalgebra::{DMatrix, DVector};
        let mut basis_matrix = DMatrix::zeros(num_rows, num_rows);
        let mut basis_cost = DVector::zeros(num_rows);
        for (k, &basic) in tableau.basis.iter().enumerate() {
            if basic < n {
                for (r, row) in rows.iter().enumerate() {
                    basis_matrix[(r, k)] = row.coeffs[basic];
                }
                basis_cost[k] = lp.objective[basic];
            } else {
                let r = slack_col_of
                    .iter()
                    .position(|&c| c == basic)
                    .expect("basic slack belongs to a surviving row");
                basis_matrix[(r, k)] = if rows[r].relation == Relation::Ge { -1.0 } else { 1.0 };
            }
        }
        let mut duals = basis_matrix
            .transpose()
            .lu()
            .solve(&basis_cost)
            .ok_or_else(|| LpError::Numerical("singular final basis".into()))?;
        for (r, &slack) in slack_col_of.iter().enumerate() {
            if slack != usize::MAX && tableau.basis.contains(&slack) {
                duals[r] = 0.0;
            }
        }
        duals
    };

    let mut eq_duals = vec![0.0; lp.equalities.len()];
    let mut ineq_duals = vec![0.0; lp.inequalities.len()];
    let mut upper_duals = vec![0.0; n];
    for (r, row) in rows.iter().enumerate() {
        let value = if row.flipped { -duals[r] } else { duals[r] };
        match row.kind {
            RowKind::Eq(k) => eq_duals[k] = value,
            RowKind::Ineq(k) => ineq_duals[k] = value,
            RowKind::Upper(j) => upper_duals[j] = value,
        }
    }

    let binding = lp
        .inequalities
        .iter()
        .enumerate()
        .filter(|(_, row)| row.rhs - row.dot(&x) <= BINDING_TOL)
        .map(|(k, _)| k)
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        binding,
        eq_duals,
        ineq_duals,
        upper_duals,
    })
}

/// Largest absolute violation of the program's constraints at `x`.
pub fn primal_residual(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for row in &lp.equalities {
        worst = worst.max((row.dot(x) - row.rhs).abs());
    }
    for row in &lp.inequalities {
        worst = worst.max(row.dot(x) - row.rhs);
    }
    for (&(lo, hi), &v) in lp.bounds.iter().zip(x) {
        worst = worst.max(lo - v);
        if hi.is_finite() {
            worst = worst.max(v - hi);
        }
    }
    worst
}

/// Max KKT residual of an optimal solution: primal feasibility (absolute),
/// dual signs, stationarity, and complementary slackness (each product
/// scaled by the magnitude of its slack side).
pub fn kkt_residual(lp: &LinearProgram, sol: &LpSolution) -> f64 {
    assert_eq!(sol.status, LpStatus::Optimal, "kkt_residual needs an optimum");
    let n = lp.num_vars();
    let mut worst = primal_residual(lp, &sol.x);

    // Dual signs: inequality and upper-bound multipliers are nonpositive.
    for &mu in sol.ineq_duals.iter().chain(&sol.upper_duals) {
        worst = worst.max(mu);
    }

    // Stationarity: r = c - A_eq' lambda - A_in' mu - eta >= 0, and r pairs
    // complementarily with x - lo.
    let cost_scale = 1.0 + lp.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for j in 0..n {
        let mut reduced = lp.objective[j] - sol.upper_duals[j];
        for (row, lambda) in lp.equalities.iter().zip(&sol.eq_duals) {
            reduced -= lambda * row.coeffs[j];
        }
        for (row, mu) in lp.inequalities.iter().zip(&sol.ineq_duals) {
            reduced -= mu * row.coeffs[j];
        }
        worst = worst.max(-reduced / cost_scale);
        let at_lower = sol.x[j] - lp.bounds[j].0;
        worst = worst.max((reduced * at_lower).abs() / (cost_scale * (1.0 + at_lower.abs())));
        let (_, hi) = lp.bounds[j];
        if hi.is_finite() {
            let upper_slack = hi - sol.x[j];
            worst = worst
                .max((sol.upper_duals[j] * upper_slack).abs() / (cost_scale * (1.0 + upper_slack.abs())));
        }
    }
    for (row, mu) in lp.inequalities.iter().zip(&sol.ineq_duals) {
        let slack = row.rhs - row.dot(&sol.x);
        worst = worst.max((mu * slack).abs() / (cost_scale * (1.0 + slack.abs())));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn single_var(rows: Vec<(f64, f64)>) -> LinearProgram {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        for (a, rhs) in rows {
            lp.inequalities.push(Constraint::new(vec![a], rhs));
        }
        lp
    }

    #[test]
    fn bounded_single_variable() {
        // min x s.t. x >= 3, x <= 10
        let sol = solve(&single_var(vec![(-1.0, -3.0), (1.0, 10.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.x[0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.objective_value, 3.0, epsilon = 1e-9);
        assert_eq!(sol.binding, vec![0]);
        assert!(kkt_residual(&single_var(vec![(-1.0, -3.0), (1.0, 10.0)]), &sol) <= 1e-7);
    }

    #[test]
    fn contradictory_single_variable_is_infeasible() {
        // min x s.t. x >= 3, x <= 2
        let sol = solve(&single_var(vec![(-1.0, -3.0), (1.0, 2.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn missing_upper_bound_is_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn duplicate_flipped_rows_are_handled() {
        // Identical x >= 3 rows force the redundant-artificial path.
        let sol = solve(&single_var(vec![(-1.0, -3.0), (-1.0, -3.0), (1.0, 10.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.objective_value, 3.0, epsilon = 1e-9);
    }

    /// The 2-bus economic dispatch program with d = (0, 200) and capacities
    /// (300, 300), written out by hand. The shift-factor row of each line is
    /// (0, -1/2) with slack at bus 1.
    fn two_bus_ed() -> LinearProgram {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.bounds = vec![(0.0, 300.0), (0.0, 300.0)];
        lp.equalities.push(Constraint::new(vec![1.0, 1.0], 200.0));
        for _line in 0..2 {
            // h.q <= limit + h.d and -h.q <= limit - h.d with h = (0, -0.5),
            // h.d = -100, limit = 100.
            lp.inequalities.push(Constraint::new(vec![0.0, -0.5], 0.0));
            lp.inequalities.push(Constraint::new(vec![0.0, 0.5], 200.0));
        }
        lp
    }

    #[test]
    fn two_bus_dispatch_vertex() {
        let lp = two_bus_ed();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.x[0], 200.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.objective_value, 200.0, epsilon = 1e-9);
        assert!(kkt_residual(&lp, &sol) <= 1e-7);

        let brute = brute_force_optimum(&lp).expect("feasible");
        assert_abs_diff_eq!(sol.objective_value, brute, epsilon = 1e-7);
    }

    #[test]
    fn infinite_upper_bounds_are_native() {
        // min -x + y with x <= 5 via a row, y free upward but costly.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, 1.0];
        lp.inequalities.push(Constraint::new(vec![1.0, 0.0], 5.0));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.objective_value, -5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let mut lp = LinearProgram::new(2);
        lp.bounds[0] = (3.0, 2.0);
        assert!(matches!(solve(&lp), Err(LpError::Malformed(_))));

        let mut lp = LinearProgram::new(2);
        lp.equalities.push(Constraint::new(vec![1.0], 0.0));
        assert!(matches!(solve(&lp), Err(LpError::Malformed(_))));
    }

    #[test]
    fn identical_input_gives_identical_output() {
        let lp = two_bus_ed();
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }

    /// Brute-force oracle: enumerate all candidate vertices (square
    /// subsystems of active rows) and take the best feasible one. Only
    /// usable for small programs with finite bounds.
    fn brute_force_optimum(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &lp.equalities {
            rows.push((c.coeffs.clone(), c.rhs));
        }
        for c in &lp.inequalities {
            rows.push((c.coeffs.clone(), c.rhs));
        }
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            rows.push((e.clone(), lo));
            if hi.is_finite() {
                rows.push((e, hi));
            }
        }

        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        enumerate_subsets(rows.len(), n, 0, &mut pick, &mut |subset| {
            use nalgebra::{DMatrix, DVector};
            let a = DMatrix::from_fn(n, n, |r, c| rows[subset[r]].0[c]);
            let b = DVector::from_fn(n, |r, _| rows[subset[r]].1);
            if let Some(x) = a.lu().solve(&b) {
                let x: Vec<f64> = x.iter().copied().collect();
                if x.iter().any(|v| !v.is_finite()) {
                    return;
                }
                if primal_residual(lp, &x) <= 1e-6 {
                    let obj = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
        });
        best
    }

    fn enumerate_subsets(
        total: usize,
        size: usize,
        from: usize,
        pick: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        let depth = pick.len() - size;
        if size == 0 {
            visit(&pick[..depth]);
            return;
        }
        for i in from..total {
            pick[depth] = i;
            enumerate_subsets(total, size - 1, i + 1, pick, visit);
        }
    }

    /// Random programs that are feasible by construction: every row is
    /// translated to pass beyond a random point of the bounding box, so
    /// oracle comparisons never sit on the feasibility boundary.
    fn arb_feasible_lp() -> impl Strategy<Value = LinearProgram> {
        (2usize..4).prop_flat_map(|n| {
            let objective = proptest::collection::vec(-5.0f64..5.0, n);
            let upper = proptest::collection::vec(1.0f64..10.0, n);
            let anchor = proptest::collection::vec(0.1f64..0.9, n);
            let ineq = proptest::collection::vec(
                (proptest::collection::vec(-2.0f64..2.0, n), 0.0f64..5.0),
                0..4,
            );
            let eq = proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, n), 0..2);
            (objective, upper, anchor, ineq, eq).prop_map(
                move |(objective, upper, anchor, ineq, eq)| {
                    let mut lp = LinearProgram::new(n);
                    lp.objective = objective;
                    lp.bounds = upper.iter().map(|&u| (0.0, u)).collect();
                    let x0: Vec<f64> = anchor.iter().zip(&upper).map(|(a, u)| a * u).collect();
                    let dot = |coeffs: &[f64]| -> f64 {
                        coeffs.iter().zip(&x0).map(|(a, v)| a * v).sum()
                    };
                    for (coeffs, slack) in ineq {
                        let rhs = dot(&coeffs) + slack;
                        lp.inequalities.push(Constraint::new(coeffs, rhs));
                    }
                    for coeffs in eq {
                        let rhs = dot(&coeffs);
                        lp.equalities.push(Constraint::new(coeffs, rhs));
                    }
                    lp
                },
            )
        })
    }

    proptest! {
        /// Vertex-enumeration oracle agreement on random boxed programs.
        #[test]
        fn matches_brute_force_on_small_programs(lp in arb_feasible_lp()) {
            let sol = solve(&lp).unwrap();
            prop_assert_eq!(sol.status, LpStatus::Optimal);
            let expected = brute_force_optimum(&lp).expect("feasible by construction");
            let scale = 1.0 + expected.abs();
            prop_assert!((sol.objective_value - expected).abs() <= 1e-5 * scale,
                "solver {} vs brute force {}", sol.objective_value, expected);
            prop_assert!(kkt_residual(&lp, &sol) <= 1e-7);
        }

        /// Programs priced so a chosen vertex is optimal are recovered to
        /// 1e-9 relative.
        #[test]
        fn recovers_priced_vertices(
            n in 2usize..4,
            seed in proptest::collection::vec(0.1f64..0.9, 4),
            weights in proptest::collection::vec(0.1f64..3.0, 4),
            normals in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 4), 4),
        ) {
            let target: Vec<f64> = seed.iter().take(n).map(|s| 1.0 + 8.0 * s).collect();
            let mut lp = LinearProgram::new(n);
            lp.bounds = vec![(0.0, 10.0); n];
            let mut objective = vec![0.0; n];
            for k in 0..n {
                let a: Vec<f64> = normals[k].iter().take(n).copied().collect();
                let rhs: f64 = a.iter().zip(&target).map(|(ai, xi)| ai * xi).sum();
                for j in 0..n {
                    objective[j] -= weights[k] * a[j];
                }
                lp.inequalities.push(Constraint::new(a, rhs));
            }
            lp.objective = objective;

            let expected: f64 = lp.objective.iter().zip(&target).map(|(c, x)| c * x).sum();
            let sol = solve(&lp).unwrap();
            prop_assert_eq!(sol.status, LpStatus::Optimal);
            let scale = 1.0 + expected.abs();
            prop_assert!((sol.objective_value - expected).abs() <= 1e-9 * scale,
                "solver {} vs priced vertex {}", sol.objective_value, expected);
        }
    }
}
