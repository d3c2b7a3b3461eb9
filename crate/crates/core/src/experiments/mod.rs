//! Sweep harness: parameterized experiment suites over a network, emitted
//! as deterministic CSV.
//!
//! Every sweep mode evaluates the price of security across a swept axis.
//! Points are independent work items and run in parallel; rows are ordered
//! by sweep index and randomized points derive their RNG stream from
//! `(seed, point index)`, so output never depends on scheduling. Repeated
//! runs of the same spec produce byte-identical CSV; metadata that could
//! break that (wall-clock time) stays out of the CSV.

mod runner;

use std::collections::BTreeMap;
use std::fmt;
use std::time::SystemTime;

use serde::Deserialize;
use thiserror::Error;

use crate::dispatch::DispatchError;

pub use runner::{
    ablation_network, ablation_suite, capacity_sweep, cheap_demand_sweep, demand_grid,
    fixed_aggregate_split, random_distribution_study, run_sweep, worst_case_search,
    AblationVariant, WorstCaseResult,
};

/// A PoS above `1 + CRITICAL_TOL` counts as "security has a price" when
/// extracting critical points from sweep curves.
pub const CRITICAL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    BadSpec(String),
    #[error("sweep spec references unknown bus id {0}")]
    UnknownBus(i64),
    #[error("invalid spec document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("no grid point is feasible for both problems")]
    EmptyFeasibleGrid,
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

/// The experiment families reproduced by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    CapacitySweep,
    DemandGrid,
    CheapDemandSweep,
    FixedAggregateSplit,
    RandomDistributionStudy,
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SweepMode::CapacitySweep => "capacity-sweep",
            SweepMode::DemandGrid => "demand-grid",
            SweepMode::CheapDemandSweep => "cheap-demand-sweep",
            SweepMode::FixedAggregateSplit => "fixed-aggregate-split",
            SweepMode::RandomDistributionStudy => "random-distribution-study",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for SweepMode {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s {
            "capacity-sweep" => Ok(SweepMode::CapacitySweep),
            "demand-grid" => Ok(SweepMode::DemandGrid),
            "cheap-demand-sweep" => Ok(SweepMode::CheapDemandSweep),
            "fixed-aggregate-split" => Ok(SweepMode::FixedAggregateSplit),
            "random-distribution-study" => Ok(SweepMode::RandomDistributionStudy),
            other => Err(SweepError::BadSpec(format!("unknown sweep mode {other:?}"))),
        }
    }
}

/// Inclusive `[start, stop]` axis with positive step.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SweepError::BadSpec(format!("step {} must be > 0", self.step)));
        }
        if self.stop < self.start || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(SweepError::BadSpec(format!(
                "range [{}, {}] must be finite and nondecreasing",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Grid points, inclusive of `stop` up to a small snap tolerance.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// How the capacity-sweep axis is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityAxis {
    /// Axis values are total cheap-side capacity in MW.
    #[default]
    Absolute,
    /// Axis values multiply the total demand.
    DemandMultiple,
}

/// Parameters shared by the sweep modes; each mode validates the subset it
/// needs. Bus maps are keyed by bus id.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub range: Range,
    /// Second axis for the demand grid.
    pub range2: Option<Range>,
    #[serde(default)]
    pub capacity_axis: CapacityAxis,
    /// Fixed demand profile by bus id.
    #[serde(default)]
    pub demand: BTreeMap<String, f64>,
    /// Capacities by bus id; buses left out are unlimited.
    #[serde(default)]
    pub base_capacity: BTreeMap<String, f64>,
    #[serde(default)]
    pub cheap_buses: Vec<i64>,
    #[serde(default)]
    pub expensive_buses: Vec<i64>,
    /// Aggregate demand: the randomized total for capacity and cheap-demand
    /// sweeps, the fixed total for aggregate splits.
    pub aggregate_demand: Option<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_runs() -> usize {
    1
}

fn default_mode() -> Option<SweepMode> {
    None
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    #[serde(default = "default_mode")]
    mode: Option<SweepMode>,
    #[serde(flatten)]
    params: SweepParams,
}

/// A full sweep specification: mode plus parameters.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub params: SweepParams,
}

impl SweepSpec {
    /// Parses a spec document. The document may carry its own `mode`; when
    /// it does, it must agree with the requested one.
    pub fn from_json(mode: SweepMode, document: &str) -> Result<Self, SweepError> {
        let doc: SpecDocument = serde_json::from_str(document)?;
        if let Some(embedded) = doc.mode {
            if embedded != mode {
                return Err(SweepError::BadSpec(format!(
                    "spec file says mode {embedded}, requested {mode}"
                )));
            }
        }
        let spec = SweepSpec {
            mode,
            params: doc.params,
        };
        spec.params.range.validate()?;
        if let Some(range2) = &spec.params.range2 {
            range2.validate()?;
        }
        if spec.params.runs == 0 {
            return Err(SweepError::BadSpec("runs must be >= 1".into()));
        }
        Ok(spec)
    }
}

/// Per-point solve status recorded in the CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    EdInfeasible,
    ScedInfeasible,
    /// Every randomized run at this point was infeasible.
    NoFeasibleRuns,
}

impl PointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::EdInfeasible => "ed-infeasible",
            PointStatus::ScedInfeasible => "sced-infeasible",
            PointStatus::NoFeasibleRuns => "no-feasible-runs",
        }
    }
}

/// A CSV column; `count` columns render as integers.
#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub count: bool,
}

impl Column {
    pub const fn value(name: &'static str) -> Self {
        Self { name, count: false }
    }

    pub const fn counter(name: &'static str) -> Self {
        Self { name, count: true }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub swept: Vec<f64>,
    pub status: PointStatus,
    /// One entry per metric column; `None` renders as an empty cell.
    pub metrics: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepMetadata {
    pub case: String,
    pub mode: SweepMode,
    pub seed: u64,
    /// When the sweep ran; informational only and never written to CSV.
    pub generated_at: SystemTime,
}

/// Ordered sweep records plus metadata. `pos_metric` names the column used
/// for peak and critical-point extraction.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub swept_columns: Vec<Column>,
    pub metric_columns: Vec<Column>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
    /// Row index of the maximum PoS, ties broken toward the earliest row.
    pub argmax: Option<usize>,
}

impl SweepResult {
    fn pos_metric_index(&self) -> Option<usize> {
        self.metric_columns
            .iter()
            .position(|c| c.name == "pos" || c.name == "pos_max")
    }

    /// PoS value of a row, when present.
    pub fn pos_of_row(&self, row: &SweepRow) -> Option<f64> {
        self.pos_metric_index().and_then(|i| row.metrics[i])
    }

    pub(crate) fn compute_argmax(&mut self) {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(pos) = self.pos_of_row(row) {
                if best.is_none_or(|(_, b)| pos > b) {
                    best = Some((i, pos));
                }
            }
        }
        self.argmax = best.map(|(i, _)| i);
    }

    /// First row whose PoS exceeds `1 + CRITICAL_TOL`: where security
    /// starts to cost something along the sweep.
    pub fn first_critical(&self) -> Option<(usize, f64)> {
        self.rows.iter().enumerate().find_map(|(i, row)| {
            let pos = self.pos_of_row(row)?;
            (pos > 1.0 + CRITICAL_TOL).then_some((i, pos))
        })
    }

    /// Peak row and PoS value.
    pub fn peak(&self) -> Option<(usize, f64)> {
        let i = self.argmax?;
        Some((i, self.pos_of_row(&self.rows[i])?))
    }

    /// Peak location robust to flat-topped curves: the first swept value
    /// whose PoS is within `tol` of the maximum. Sampled max-PoS curves can
    /// be flat near their peak, where the exact argmax is noise.
    pub fn plateau_onset(&self, tol: f64) -> Option<f64> {
        let (_, peak) = self.peak()?;
        self.rows.iter().find_map(|row| {
            let pos = self.pos_of_row(row)?;
            (pos >= peak - tol).then(|| row.swept[0])
        })
    }

    /// Renders the records as CSV with a header row. Floats carry 9
    /// significant digits; missing metrics render as empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self
            .swept_columns
            .iter()
            .map(|c| c.name)
            .chain(std::iter::once("status"))
            .chain(self.metric_columns.iter().map(|c| c.name))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> =
                row.swept.iter().map(|v| format_sig(*v)).collect();
            cells.push(row.status.as_str().to_string());
            for (column, value) in self.metric_columns.iter().zip(&row.metrics) {
                cells.push(match value {
                    None => String::new(),
                    Some(v) if column.count => format!("{}", *v as i64),
                    Some(v) => format_sig(*v),
                });
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Formats a float with 9 significant digits.
pub fn format_sig(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0.00000000".into();
    }
    let exponent = value.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}
