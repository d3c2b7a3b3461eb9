//! Economic dispatch, preventive N-1 security-constrained dispatch, and the
//! price of security.
//!
//! Both problems minimize total linear generation cost subject to capacity
//! bounds, supply-demand balance, and base-topology line limits. SCED adds,
//! for every non-islanding single-line outage, the surviving-line limits
//! evaluated at the *same* dispatch — the preventive paradigm with no
//! post-contingency redispatch. The price of security for an instance is
//! the ratio of the two optimal costs.

use thiserror::Error;

use crate::lp::{self, Constraint, LinearProgram, LpStatus};
use crate::network::{validate_instance, InputInstance, LineId, Network};
use crate::ptdf::{self, ContingencyAnalysis, PtdfError, ShiftFactorMatrix};

/// Supply-demand balance tolerance on solutions.
pub const BALANCE_TOL: f64 = 1e-6;
/// Flow-limit tolerance for violation checks and binding reports.
pub const FLOW_TOL: f64 = 1e-6;
/// Costs below this are treated as zero when forming the ratio.
const ZERO_COST_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("cannot certify N-1 security: removing line(s) {0:?} islands the network")]
    Islanding(Vec<LineId>),
    #[error("economic dispatch is infeasible for this instance")]
    EdInfeasible,
    #[error("security-constrained dispatch is infeasible for this instance")]
    ScedInfeasible,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Ptdf(#[from] PtdfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchStatus {
    Optimal,
    Infeasible,
}

/// A solved (or infeasible) dispatch. Vectors are in network bus/line order;
/// `binding_contingencies` pairs `(outaged line, surviving line)` are only
/// populated by SCED solves.
#[derive(Debug, Clone)]
pub struct DispatchSolution {
    pub status: DispatchStatus,
    pub generation: Vec<f64>,
    pub flows: Vec<f64>,
    pub cost: f64,
    pub binding_lines: Vec<LineId>,
    pub binding_contingencies: Vec<(LineId, LineId)>,
}

impl DispatchSolution {
    fn infeasible() -> Self {
        Self {
            status: DispatchStatus::Infeasible,
            generation: Vec::new(),
            flows: Vec::new(),
            cost: f64::NAN,
            binding_lines: Vec::new(),
            binding_contingencies: Vec::new(),
        }
    }
}

/// Price-of-security report for one instance.
#[derive(Debug, Clone)]
pub struct PosReport {
    pub c_ed: f64,
    pub c_sc: f64,
    /// `c_sc / c_ed`, fixed to 1 when both costs vanish (zero demand).
    pub pos: f64,
    pub ed_solution: DispatchSolution,
    pub sc_solution: DispatchSolution,
}

/// One post-contingency limit violation.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityViolation {
    pub outaged_line: LineId,
    pub line: LineId,
    pub flow: f64,
    pub limit: f64,
}

impl SecurityViolation {
    pub fn excess(&self) -> f64 {
        self.flow.abs() - self.limit
    }
}

/// Result of independently re-checking a dispatch against every single-line
/// outage. A dispatch is certified only with zero violations and no
/// islanding contingencies.
#[derive(Debug, Clone)]
pub struct SecurityReport {
    pub violations: Vec<SecurityViolation>,
    pub islanding: Vec<LineId>,
    pub contingencies_checked: usize,
    /// `sum(q - d)`; callers should hand in balanced dispatches.
    pub imbalance: f64,
}

impl SecurityReport {
    pub fn is_secure(&self) -> bool {
        self.violations.is_empty() && self.islanding.is_empty()
    }
}

/// Dispatch problems for one network, with shift factors and contingency
/// topologies computed once and shared read-only across solves.
#[derive(Debug, Clone)]
pub struct DispatchModel {
    net: Network,
    shift_factors: ShiftFactorMatrix,
    contingencies: ContingencyAnalysis,
    costs: Vec<f64>,
}

impl DispatchModel {
    pub fn new(net: &Network) -> Result<Self, DispatchError> {
        let slack = ptdf::default_slack(net);
        let shift_factors = ptdf::shift_factors(net, slack)?;
        let contingencies = ptdf::contingency_topologies(net)?;
        Ok(Self {
            net: net.clone(),
            shift_factors,
            contingencies,
            costs: net.cost_vector(),
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn contingencies(&self) -> &ContingencyAnalysis {
        &self.contingencies
    }

    fn check_instance(&self, inst: &InputInstance) -> Result<(), DispatchError> {
        let report = validate_instance(&self.net, inst);
        if !report.is_valid() {
            let joined = report
                .errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            return Err(DispatchError::InvalidInstance(joined));
        }
        Ok(())
    }

    fn injections(&self, inst: &InputInstance, generation: &[f64]) -> Vec<f64> {
        generation
            .iter()
            .zip(&inst.demand)
            .map(|(q, d)| q - d)
            .collect()
    }

    /// Appends `-limit <= h.(q - d) <= limit` for every row of a
    /// shift-factor matrix, as two `<=` rows over `q`.
    fn push_flow_rows(
        lp: &mut LinearProgram,
        matrix: &ShiftFactorMatrix,
        limits: &[f64],
        demand: &[f64],
    ) {
        for (idx, &limit) in limits.iter().enumerate() {
            let row = matrix.row(idx);
            let h_d: f64 = row.iter().zip(demand).map(|(h, d)| h * d).sum();
            lp.inequalities
                .push(Constraint::new(row.clone(), limit + h_d));
            lp.inequalities
                .push(Constraint::new(row.iter().map(|h| -h).collect(), limit - h_d));
        }
    }

    fn build_program(&self, inst: &InputInstance, security: bool) -> LinearProgram {
        let n = self.net.bus_count();
        let mut lp = LinearProgram::new(n);
        lp.objective = self.costs.clone();
        lp.bounds = inst.gen_capacity.iter().map(|&cap| (0.0, cap)).collect();
        lp.equalities
            .push(Constraint::new(vec![1.0; n], inst.total_demand()));

        let base_limits: Vec<f64> = self.net.lines().iter().map(|l| l.limit).collect();
        Self::push_flow_rows(&mut lp, &self.shift_factors, &base_limits, &inst.demand);

        if security {
            for topology in &self.contingencies.topologies {
                Self::push_flow_rows(
                    &mut lp,
                    &topology.shift_factors,
                    &topology.limits,
                    &inst.demand,
                );
            }
        }
        lp
    }

    fn extract_solution(
        &self,
        inst: &InputInstance,
        solved: lp::LpSolution,
        security: bool,
    ) -> Result<DispatchSolution, DispatchError> {
        match solved.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(DispatchSolution::infeasible()),
            // Costs are nonnegative and generation is bounded below, so an
            // unbounded report is a solver anomaly.
            LpStatus::Unbounded => {
                return Err(DispatchError::Solver("dispatch program reported unbounded".into()))
            }
        }
        let generation = solved.x;
        let injections = self.injections(inst, &generation);
        let flows = self.shift_factors.flows(&injections);

        let binding_lines = self
            .net
            .lines()
            .iter()
            .zip(&flows)
            .filter(|(line, flow)| line.limit - flow.abs() <= FLOW_TOL)
            .map(|(line, _)| line.id)
            .collect();

        let mut binding_contingencies = Vec::new();
        if security {
            for topology in &self.contingencies.topologies {
                let outage_flows = topology.shift_factors.flows(&injections);
                for ((line, flow), limit) in topology
                    .shift_factors
                    .line_ids()
                    .iter()
                    .zip(&outage_flows)
                    .zip(&topology.limits)
                {
                    if limit - flow.abs() <= FLOW_TOL {
                        binding_contingencies.push((topology.outaged_line, *line));
                    }
                }
            }
        }

        Ok(DispatchSolution {
            status: DispatchStatus::Optimal,
            generation,
            flows,
            cost: solved.objective_value,
            binding_lines,
            binding_contingencies,
        })
    }

    fn run(&self, inst: &InputInstance, security: bool) -> Result<DispatchSolution, DispatchError> {
        self.check_instance(inst)?;
        if security && !self.contingencies.islanding.is_empty() {
            return Err(DispatchError::Islanding(self.contingencies.islanding.clone()));
        }
        let program = self.build_program(inst, security);
        let solved = lp::solve(&program).map_err(|e| DispatchError::Solver(e.to_string()))?;
        self.extract_solution(inst, solved, security)
    }

    /// Minimum-cost dispatch subject to capacities, balance, and base line
    /// limits.
    pub fn solve_ed(&self, inst: &InputInstance) -> Result<DispatchSolution, DispatchError> {
        self.run(inst, false)
    }

    /// Economic dispatch plus preventive surviving-line limits for every
    /// single-line outage. Errors if any outage islands the network.
    pub fn solve_sced(&self, inst: &InputInstance) -> Result<DispatchSolution, DispatchError> {
        self.run(inst, true)
    }

    /// Re-derives every post-outage flow for a given generation vector and
    /// reports limit violations. This path goes straight through the
    /// contingency shift factors and never consults the LP, so it serves as
    /// an independent certification of SCED output.
    pub fn check_n1_security(&self, inst: &InputInstance, generation: &[f64]) -> SecurityReport {
        let injections = self.injections(inst, generation);
        let imbalance = injections.iter().sum();
        let mut violations = Vec::new();
        for topology in &self.contingencies.topologies {
            let flows = topology.shift_factors.flows(&injections);
            for ((line, flow), limit) in topology
                .shift_factors
                .line_ids()
                .iter()
                .zip(&flows)
                .zip(&topology.limits)
            {
                if flow.abs() > limit + FLOW_TOL {
                    violations.push(SecurityViolation {
                        outaged_line: topology.outaged_line,
                        line: *line,
                        flow: *flow,
                        limit: *limit,
                    });
                }
            }
        }
        SecurityReport {
            violations,
            islanding: self.contingencies.islanding.clone(),
            contingencies_checked: self.contingencies.topologies.len(),
            imbalance,
        }
    }

    /// Solves both problems and forms `pos = c_sc / c_ed`. Infeasibility of
    /// either problem is reported distinctly so instance searches can skip
    /// points outside the feasible set.
    pub fn price_of_security(&self, inst: &InputInstance) -> Result<PosReport, DispatchError> {
        let ed_solution = self.solve_ed(inst)?;
        if ed_solution.status != DispatchStatus::Optimal {
            return Err(DispatchError::EdInfeasible);
        }
        let sc_solution = self.solve_sced(inst)?;
        if sc_solution.status != DispatchStatus::Optimal {
            return Err(DispatchError::ScedInfeasible);
        }
        let c_ed = ed_solution.cost;
        let c_sc = sc_solution.cost;
        let pos = if c_ed.abs() <= ZERO_COST_TOL {
            if c_sc.abs() <= ZERO_COST_TOL {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            c_sc / c_ed
        };
        Ok(PosReport {
            c_ed,
            c_sc,
            pos,
            ed_solution,
            sc_solution,
        })
    }
}

/// One-shot economic dispatch; builds a [`DispatchModel`] internally.
pub fn solve_ed(net: &Network, inst: &InputInstance) -> Result<DispatchSolution, DispatchError> {
    DispatchModel::new(net)?.solve_ed(inst)
}

/// One-shot security-constrained dispatch.
pub fn solve_sced(net: &Network, inst: &InputInstance) -> Result<DispatchSolution, DispatchError> {
    DispatchModel::new(net)?.solve_sced(inst)
}

/// One-shot N-1 check of a generation vector.
pub fn check_n1_security(
    net: &Network,
    inst: &InputInstance,
    generation: &[f64],
) -> Result<SecurityReport, DispatchError> {
    Ok(DispatchModel::new(net)?.check_n1_security(inst, generation))
}

/// One-shot price of security.
pub fn price_of_security(net: &Network, inst: &InputInstance) -> Result<PosReport, DispatchError> {
    DispatchModel::new(net)?.price_of_security(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::network::{load_network, Bus};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_bus_model() -> DispatchModel {
        DispatchModel::new(&cases::two_bus()).unwrap()
    }

    fn inst(capacity: [f64; 2], demand: [f64; 2]) -> InputInstance {
        InputInstance::new(capacity.to_vec(), demand.to_vec())
    }

    /// Solution invariants: bounds, balance, and line limits.
    fn assert_solution_valid(net: &Network, instance: &InputInstance, sol: &DispatchSolution) {
        assert_eq!(sol.status, DispatchStatus::Optimal);
        for ((q, cap), d) in sol.generation.iter().zip(&instance.gen_capacity).zip(&instance.demand) {
            assert!(*q >= -1e-9 && *q <= cap + 1e-6, "generation {q} out of [0, {cap}] (d={d})");
        }
        let imbalance: f64 = sol
            .generation
            .iter()
            .zip(&instance.demand)
            .map(|(q, d)| q - d)
            .sum();
        assert!(imbalance.abs() <= BALANCE_TOL, "imbalance {imbalance}");
        for (line, flow) in net.lines().iter().zip(&sol.flows) {
            assert!(flow.abs() <= line.limit + FLOW_TOL, "line {} overloaded", line.id);
        }
    }

    #[test]
    fn two_bus_economic_dispatch_examples() {
        let model = two_bus_model();

        let a = model.solve_ed(&inst([300.0, 300.0], [0.0, 200.0])).unwrap();
        assert_solution_valid(model.network(), &inst([300.0, 300.0], [0.0, 200.0]), &a);
        assert_abs_diff_eq!(a.generation[0], 200.0, epsilon = 1e-6);
        assert_abs_diff_eq!(a.generation[1], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(a.cost, 200.0, epsilon = 1e-6);
        // Both parallel lines saturate at 100 MW.
        assert_eq!(a.binding_lines, vec![LineId(1), LineId(2)]);

        let zero = model.solve_ed(&inst([300.0, 300.0], [0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(zero.cost, 0.0, epsilon = 1e-9);

        let heavy = model.solve_ed(&inst([300.0, 300.0], [0.0, 300.0])).unwrap();
        assert_abs_diff_eq!(heavy.generation[0], 200.0, epsilon = 1e-6);
        assert_abs_diff_eq!(heavy.generation[1], 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(heavy.cost, 400.0, epsilon = 1e-6);
    }

    #[test]
    fn two_bus_secure_dispatch_examples() {
        let model = two_bus_model();

        let secure = model.solve_sced(&inst([300.0, 300.0], [0.0, 200.0])).unwrap();
        assert_abs_diff_eq!(secure.generation[0], 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(secure.generation[1], 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(secure.cost, 300.0, epsilon = 1e-6);
        // The base flows sit at 50 MW per line; what binds is each
        // survivor at the other's outage.
        assert!(secure.binding_lines.is_empty());
        assert_eq!(
            secure.binding_contingencies,
            vec![(LineId(1), LineId(2)), (LineId(2), LineId(1))]
        );

        // Light demand inside the secure transfer limit: SCED equals ED.
        let light = model.solve_sced(&inst([300.0, 300.0], [0.0, 50.0])).unwrap();
        assert_abs_diff_eq!(light.generation[0], 50.0, epsilon = 1e-6);
        assert_abs_diff_eq!(light.cost, 50.0, epsilon = 1e-6);
    }

    #[test]
    fn aggregate_shortfall_is_infeasible_not_an_error() {
        let model = two_bus_model();
        let sol = model.solve_ed(&inst([50.0, 50.0], [0.0, 200.0])).unwrap();
        assert_eq!(sol.status, DispatchStatus::Infeasible);
        assert!(matches!(
            model.price_of_security(&inst([50.0, 50.0], [0.0, 200.0])),
            Err(DispatchError::EdInfeasible)
        ));
    }

    #[test]
    fn bridge_network_refuses_security_certification() {
        let net = load_network(
            r#"{"name":"bridge","buses":[{"id":1,"alpha":1.0},{"id":2,"alpha":2.0}],
                "lines":[{"id":1,"from":1,"to":2,"susceptance":1.0,"limit":100.0}]}"#,
        )
        .unwrap();
        let model = DispatchModel::new(&net).unwrap();
        let instance = inst([300.0, 300.0], [0.0, 50.0]);
        assert!(model.solve_ed(&instance).is_ok());
        assert!(matches!(
            model.solve_sced(&instance),
            Err(DispatchError::Islanding(ref lines)) if lines == &vec![LineId(1)]
        ));
    }

    #[test]
    fn security_check_examples() {
        let model = two_bus_model();
        let instance = inst([300.0, 300.0], [0.0, 200.0]);

        // The secure dispatch loads the survivor exactly to its limit.
        let report = model.check_n1_security(&instance, &[100.0, 100.0]);
        assert!(report.is_secure());
        assert_eq!(report.contingencies_checked, 2);
        assert!(report.imbalance.abs() <= BALANCE_TOL);

        // The unconstrained-optimal dispatch fails both outages.
        let report = model.check_n1_security(&instance, &[200.0, 0.0]);
        assert_eq!(report.violations.len(), 2);
        for violation in &report.violations {
            assert_abs_diff_eq!(violation.flow.abs(), 200.0, epsilon = 1e-6);
            assert_abs_diff_eq!(violation.limit, 100.0, epsilon = 1e-12);
        }

        // Serving all demand locally never stresses any line.
        let report = model.check_n1_security(&inst([300.0, 300.0], [50.0, 50.0]), &[50.0, 50.0]);
        assert!(report.is_secure());
    }

    #[test]
    fn price_of_security_examples() {
        let model = two_bus_model();

        let report = model.price_of_security(&inst([300.0, 300.0], [0.0, 200.0])).unwrap();
        assert_abs_diff_eq!(report.c_ed, 200.0, epsilon = 1e-6);
        assert_abs_diff_eq!(report.c_sc, 300.0, epsilon = 1e-6);
        assert_abs_diff_eq!(report.pos, 1.5, epsilon = 1e-9);

        let light = model.price_of_security(&inst([300.0, 300.0], [0.0, 50.0])).unwrap();
        assert_abs_diff_eq!(light.pos, 1.0, epsilon = 1e-9);

        let zero = model.price_of_security(&inst([300.0, 300.0], [0.0, 0.0])).unwrap();
        assert_eq!(zero.pos, 1.0);
    }

    #[test]
    fn pjm5_nominal_instance_is_secure_after_sced() {
        let net = cases::pjm5();
        let model = DispatchModel::new(&net).unwrap();
        let instance = crate::network::load_instance(
            &net,
            include_str!("../cases/pjm5_nominal.json"),
        )
        .unwrap();
        let ed = model.solve_ed(&instance).unwrap();
        let sced = model.solve_sced(&instance).unwrap();
        assert_solution_valid(&net, &instance, &ed);
        assert_solution_valid(&net, &instance, &sced);
        assert!(ed.cost <= sced.cost + 1e-6);
        assert!(model.check_n1_security(&instance, &sced.generation).is_secure());
    }

    proptest! {
        /// Feasible-set inclusion: ED never costs more than SCED.
        #[test]
        fn sced_cost_dominates_ed_cost(d1 in 0.0f64..150.0, d2 in 0.0f64..150.0, cap in 200.0f64..400.0) {
            let model = two_bus_model();
            let instance = inst([cap, cap], [d1, d2]);
            let report = model.price_of_security(&instance).unwrap();
            prop_assert!(report.c_ed <= report.c_sc + 1e-6);
            prop_assert!(report.pos >= 1.0 - 1e-9);
        }

        /// Scaling every cost coefficient by a positive factor scales both
        /// optimal costs and leaves the ratio unchanged.
        #[test]
        fn cost_scaling_leaves_pos_invariant(factor in 0.1f64..10.0, d2 in 10.0f64..280.0) {
            let base = cases::two_bus();
            let scaled_buses: Vec<Bus> = base
                .buses()
                .iter()
                .map(|b| Bus { id: b.id, marginal_cost: b.marginal_cost * factor })
                .collect();
            let scaled = Network::new("2bus-scaled", scaled_buses, base.lines().to_vec()).unwrap();

            let instance = InputInstance::with_unlimited_capacity(&base, vec![0.0, d2]);
            let original = price_of_security(&base, &instance).unwrap();
            let rescaled = price_of_security(&scaled, &instance).unwrap();

            let scale = 1.0 + original.c_sc.abs() * factor;
            prop_assert!((rescaled.c_ed - factor * original.c_ed).abs() <= 1e-9 * scale);
            prop_assert!((rescaled.c_sc - factor * original.c_sc).abs() <= 1e-9 * scale);
            prop_assert!((rescaled.pos - original.pos).abs() <= 1e-9 * (1.0 + original.pos));
        }
    }
}
