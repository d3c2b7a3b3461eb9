//! Network topology, parameters, and problem instances.
//!
//! A [`Network`] is an immutable directed multigraph of buses and lines.
//! Edge directions are an arbitrary sign convention for flows; parallel
//! lines between the same bus pair are allowed (and required by the 2-bus
//! test case). Per-instance data (generation capacities and demands) lives
//! in [`InputInstance`], keyed by bus position in the network's bus order.
//!
//! Case files are UTF-8 JSON:
//!
//! ```json
//! {"name": "2bus",
//!  "buses": [{"id": 1, "alpha": 1.0}, {"id": 2, "alpha": 2.0}],
//!  "lines": [{"id": 1, "from": 1, "to": 2, "susceptance": 1.0, "limit": 100.0}]}
//! ```
//!
//! Instance files map bus ids to MW values:
//!
//! ```json
//! {"gen_capacity": {"1": 300.0, "2": 300.0}, "demand": {"2": 200.0}}
//! ```
//!
//! Buses missing from an instance map default to 0.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unique integer label of a bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub i64);

/// Unique integer label of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(pub i64);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A bus with its generator's marginal cost. Each bus hosts exactly one
/// generator and one load; capacities and demands are per-instance data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    /// Generation cost coefficient in $/MWh, nonnegative.
    #[serde(rename = "alpha")]
    pub marginal_cost: f64,
}

/// A transmission line with DC parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: LineId,
    #[serde(rename = "from")]
    pub from_bus: BusId,
    #[serde(rename = "to")]
    pub to_bus: BusId,
    /// Per-unit susceptance magnitude, strictly positive.
    pub susceptance: f64,
    /// Thermal limit in MW, nonnegative. Effectively unlimited lines carry a
    /// large finite value (JSON has no infinity).
    pub limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDocument {
    name: String,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    /// Free-form provenance notes; ignored by the engine.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

/// Errors raised while loading or constructing a network.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid JSON document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("n >= 2 required: document has {0} bus(es)")]
    TooFewBuses(usize),
    #[error("m >= 1 required: document has no lines")]
    NoLines,
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("duplicate line id {0}")]
    DuplicateLine(LineId),
    #[error("line {line} references unknown bus {bus}")]
    UnknownBus { line: LineId, bus: BusId },
    #[error("line {0} connects bus to itself")]
    SelfLoop(LineId),
    #[error("line {0}: susceptance must be finite and > 0")]
    BadSusceptance(LineId),
    #[error("line {0}: limit must be finite and >= 0")]
    BadLimit(LineId),
    #[error("bus {0}: cost coefficient must be finite and >= 0")]
    BadCost(BusId),
    #[error("network is disconnected: buses {unreachable:?} unreachable from bus {root}")]
    Disconnected { root: BusId, unreachable: Vec<BusId> },
    #[error("instance references unknown bus {0}")]
    UnknownInstanceBus(BusId),
    #[error("instance bus key {0:?} is not an integer id")]
    BadInstanceKey(String),
}

/// Immutable, connected multigraph of buses and lines.
///
/// Bus and line order follows the source document and fixes all downstream
/// indexing: bus `i` is column `i` of every shift-factor matrix and position
/// `i` of every instance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: String,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    bus_positions: HashMap<BusId, usize>,
    line_positions: HashMap<LineId, usize>,
}

impl Network {
    /// Validates and assembles a network. See [`NetworkError`] for the
    /// conditions checked; connectivity of the full graph is required here,
    /// while post-contingency connectivity is a per-outage concern.
    pub fn new(
        name: impl Into<String>,
        buses: Vec<Bus>,
        lines: Vec<Line>,
    ) -> Result<Self, NetworkError> {
        if buses.len() < 2 {
            return Err(NetworkError::TooFewBuses(buses.len()));
        }
        if lines.is_empty() {
            return Err(NetworkError::NoLines);
        }

        let mut bus_positions = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if !(bus.marginal_cost.is_finite() && bus.marginal_cost >= 0.0) {
                return Err(NetworkError::BadCost(bus.id));
            }
            if bus_positions.insert(bus.id, i).is_some() {
                return Err(NetworkError::DuplicateBus(bus.id));
            }
        }

        let mut line_positions = HashMap::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line_positions.insert(line.id, i).is_some() {
                return Err(NetworkError::DuplicateLine(line.id));
            }
            for end in [line.from_bus, line.to_bus] {
                if !bus_positions.contains_key(&end) {
                    return Err(NetworkError::UnknownBus {
                        line: line.id,
                        bus: end,
                    });
                }
            }
            if line.from_bus == line.to_bus {
                return Err(NetworkError::SelfLoop(line.id));
            }
            if !(line.susceptance.is_finite() && line.susceptance > 0.0) {
                return Err(NetworkError::BadSusceptance(line.id));
            }
            if !(line.limit.is_finite() && line.limit >= 0.0) {
                return Err(NetworkError::BadLimit(line.id));
            }
        }

        let net = Network {
            name: name.into(),
            buses,
            lines,
            bus_positions,
            line_positions,
        };

        let reachable = net.reachable_from(0, None);
        if reachable.iter().any(|r| !r) {
            let unreachable = net
                .buses
                .iter()
                .zip(&reachable)
                .filter(|(_, &r)| !r)
                .map(|(b, _)| b.id)
                .collect();
            return Err(NetworkError::Disconnected {
                root: net.buses[0].id,
                unreachable,
            });
        }

        Ok(net)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Position of a bus in the network's bus order.
    pub fn bus_position(&self, id: BusId) -> Option<usize> {
        self.bus_positions.get(&id).copied()
    }

    /// Position of a line in the network's line order.
    pub fn line_position(&self, id: LineId) -> Option<usize> {
        self.line_positions.get(&id).copied()
    }

    /// Marginal cost vector in bus order.
    pub fn cost_vector(&self) -> Vec<f64> {
        self.buses.iter().map(|b| b.marginal_cost).collect()
    }

    /// Bus reachability via breadth-first search from bus position `root`,
    /// optionally treating one line as outaged.
    pub(crate) fn reachable_from(&self, root: usize, skip_line: Option<LineId>) -> Vec<bool> {
        let mut seen = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        // Adjacency rebuilt per call; networks here are tiny.
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.buses.len()];
        for line in &self.lines {
            if Some(line.id) == skip_line {
                continue;
            }
            let u = self.bus_positions[&line.from_bus];
            let w = self.bus_positions[&line.to_bus];
            adjacency[u].push(w);
            adjacency[w].push(u);
        }
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// True if removing `line` leaves the graph connected.
    pub fn connected_without(&self, line: LineId) -> bool {
        self.reachable_from(0, Some(line)).iter().all(|&r| r)
    }

    /// Serializes back to the case-file schema. Round-trips through
    /// [`load_network`] to an identical network.
    pub fn to_document(&self) -> String {
        let doc = CaseDocument {
            name: self.name.clone(),
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            notes: Vec::new(),
        };
        serde_json::to_string_pretty(&doc).expect("case document serialization cannot fail")
    }
}

/// Parses and validates a case document.
pub fn load_network(document: &str) -> Result<Network, NetworkError> {
    let doc: CaseDocument = serde_json::from_str(document)?;
    Network::new(doc.name, doc.buses, doc.lines)
}

/// A problem instance: generation capacities and demands in MW, both
/// indexed by bus position. `omega = (gen_capacity, demand)` in the dispatch
/// problems; capacities may be `f64::INFINITY` for relaxed-capacity studies.
#[derive(Debug, Clone, PartialEq)]
pub struct InputInstance {
    pub gen_capacity: Vec<f64>,
    pub demand: Vec<f64>,
}

impl InputInstance {
    pub fn new(gen_capacity: Vec<f64>, demand: Vec<f64>) -> Self {
        Self {
            gen_capacity,
            demand,
        }
    }

    /// Instance with every capacity relaxed to infinity.
    pub fn with_unlimited_capacity(net: &Network, demand: Vec<f64>) -> Self {
        Self {
            gen_capacity: vec![f64::INFINITY; net.bus_count()],
            demand,
        }
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.gen_capacity.iter().sum()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    #[serde(default)]
    gen_capacity: BTreeMap<String, f64>,
    #[serde(default)]
    demand: BTreeMap<String, f64>,
}

/// Parses an instance file against a network. Buses absent from a map get 0;
/// unknown bus ids are rejected.
pub fn load_instance(net: &Network, document: &str) -> Result<InputInstance, NetworkError> {
    let doc: InstanceDocument = serde_json::from_str(document)?;
    let to_vec = |map: &BTreeMap<String, f64>| -> Result<Vec<f64>, NetworkError> {
        let mut values = vec![0.0; net.bus_count()];
        for (key, &value) in map {
            let id = key
                .parse::<i64>()
                .map(BusId)
                .map_err(|_| NetworkError::BadInstanceKey(key.clone()))?;
            let pos = net
                .bus_position(id)
                .ok_or(NetworkError::UnknownInstanceBus(id))?;
            values[pos] = value;
        }
        Ok(values)
    };
    Ok(InputInstance {
        gen_capacity: to_vec(&doc.gen_capacity)?,
        demand: to_vec(&doc.demand)?,
    })
}

/// A single finding from [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceIssue {
    /// Vector length does not match the bus count.
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    /// Negative or non-finite entry.
    BadEntry {
        field: &'static str,
        position: usize,
        value: f64,
    },
    /// Total capacity below total demand; both dispatch problems are
    /// guaranteed infeasible. Reported as a warning, not an error.
    CapacityShortfall { capacity: f64, demand: f64 },
}

impl fmt::Display for InstanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceIssue::DimensionMismatch {
                field,
                expected,
                got,
            } => write!(f, "{field} has length {got}, expected {expected}"),
            InstanceIssue::BadEntry {
                field,
                position,
                value,
            } => write!(f, "{field}[{position}] = {value} must be finite and >= 0"),
            InstanceIssue::CapacityShortfall { capacity, demand } => write!(
                f,
                "total capacity {capacity} < total demand {demand}: both problems infeasible"
            ),
        }
    }
}

/// Result of validating an instance against a network. Errors make the
/// instance unusable; warnings flag instances that cannot be feasible.
#[derive(Debug, Clone, Default)]
pub struct InstanceReport {
    pub errors: Vec<InstanceIssue>,
    pub warnings: Vec<InstanceIssue>,
}

impl InstanceReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks dimensions and signs of an instance; never fails.
pub fn validate_instance(net: &Network, inst: &InputInstance) -> InstanceReport {
    let mut report = InstanceReport::default();
    let n = net.bus_count();
    for (field, values) in [
        ("gen_capacity", &inst.gen_capacity),
        ("demand", &inst.demand),
    ] {
        if values.len() != n {
            report.errors.push(InstanceIssue::DimensionMismatch {
                field,
                expected: n,
                got: values.len(),
            });
            continue;
        }
        for (position, &value) in values.iter().enumerate() {
            // Infinite capacity is allowed (relaxed problems); NaN is not.
            let ok = value >= 0.0 && !value.is_nan() && (field == "gen_capacity" || value.is_finite());
            if !ok {
                report.errors.push(InstanceIssue::BadEntry {
                    field,
                    position,
                    value,
                });
            }
        }
    }
    if report.errors.is_empty() {
        let capacity = inst.total_capacity();
        let demand = inst.total_demand();
        if capacity < demand {
            report
                .warnings
                .push(InstanceIssue::CapacityShortfall { capacity, demand });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;

    #[test]
    fn loads_bundled_two_bus_case() {
        let net = cases::two_bus();
        assert_eq!(net.bus_count(), 2);
        assert_eq!(net.line_count(), 2);
        assert_eq!(net.buses()[0].marginal_cost, 1.0);
        assert_eq!(net.buses()[1].marginal_cost, 2.0);
        for line in net.lines() {
            assert_eq!(line.susceptance, 1.0);
            assert_eq!(line.limit, 100.0);
        }
    }

    #[test]
    fn single_bus_document_rejected() {
        let doc = r#"{"name":"one","buses":[{"id":1,"alpha":1.0}],
                      "lines":[{"id":1,"from":1,"to":1,"susceptance":1.0,"limit":1.0}]}"#;
        let err = load_network(doc).unwrap_err();
        assert!(err.to_string().contains("n >= 2 required"), "{err}");
    }

    #[test]
    fn disconnected_document_names_unreachable_buses() {
        let doc = r#"{"name":"split","buses":[{"id":1,"alpha":1.0},{"id":2,"alpha":1.0},
                      {"id":3,"alpha":1.0},{"id":4,"alpha":1.0}],
                      "lines":[{"id":1,"from":1,"to":2,"susceptance":1.0,"limit":10.0},
                               {"id":2,"from":3,"to":4,"susceptance":1.0,"limit":10.0}]}"#;
        match load_network(doc).unwrap_err() {
            NetworkError::Disconnected { unreachable, .. } => {
                assert_eq!(unreachable, vec![BusId(3), BusId(4)]);
            }
            other => panic!("expected Disconnected, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_bad_parameters_rejected() {
        let dup = r#"{"name":"d","buses":[{"id":1,"alpha":1.0},{"id":1,"alpha":2.0}],
                      "lines":[{"id":1,"from":1,"to":1,"susceptance":1.0,"limit":1.0}]}"#;
        assert!(matches!(
            load_network(dup).unwrap_err(),
            NetworkError::DuplicateBus(BusId(1))
        ));

        let bad_b = r#"{"name":"b","buses":[{"id":1,"alpha":1.0},{"id":2,"alpha":2.0}],
                        "lines":[{"id":7,"from":1,"to":2,"susceptance":0.0,"limit":1.0}]}"#;
        assert!(matches!(
            load_network(bad_b).unwrap_err(),
            NetworkError::BadSusceptance(LineId(7))
        ));
    }

    #[test]
    fn document_round_trip_is_identity() {
        for net in [cases::two_bus(), cases::pjm5()] {
            let round = load_network(&net.to_document()).unwrap();
            assert_eq!(net, round);
        }
    }

    #[test]
    fn instance_examples_from_two_bus() {
        let net = cases::two_bus();
        let inst = load_instance(
            &net,
            r#"{"gen_capacity":{"1":300.0,"2":300.0},"demand":{"2":200.0}}"#,
        )
        .unwrap();
        assert_eq!(inst.gen_capacity, vec![300.0, 300.0]);
        assert_eq!(inst.demand, vec![0.0, 200.0]);
        let report = validate_instance(&net, &inst);
        assert!(report.is_valid());
        assert!(report.warnings.is_empty());

        // Aggregate shortfall warns but does not error.
        let short = InputInstance::new(vec![50.0, 50.0], vec![0.0, 200.0]);
        let report = validate_instance(&net, &short);
        assert!(report.is_valid());
        assert_eq!(
            report.warnings,
            vec![InstanceIssue::CapacityShortfall {
                capacity: 100.0,
                demand: 200.0
            }]
        );

        // Dimension mismatch is an error.
        let bad = InputInstance::new(vec![50.0, 50.0], vec![0.0, 100.0, 100.0]);
        let report = validate_instance(&net, &bad);
        assert!(!report.is_valid());
        assert!(matches!(
            report.errors[0],
            InstanceIssue::DimensionMismatch {
                field: "demand",
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn unknown_instance_bus_rejected() {
        let net = cases::two_bus();
        let err = load_instance(&net, r#"{"demand":{"9":1.0}}"#).unwrap_err();
        assert!(matches!(err, NetworkError::UnknownInstanceBus(BusId(9))));
    }
}
