//! Sweep-mode runners, the worst-case grid search, and the topology
//! ablations.

use std::collections::BTreeMap;
use std::time::SystemTime;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cases;
use crate::dispatch::{DispatchError, DispatchModel, PosReport};
use crate::network::{Bus, BusId, InputInstance, Network};

use super::{
    Column, PointStatus, Range, SweepError, SweepMetadata, SweepMode, SweepParams, SweepResult,
    SweepRow, SweepSpec,
};

const DET_METRICS: [Column; 3] = [
    Column::value("c_ed"),
    Column::value("c_sc"),
    Column::value("pos"),
];

const RAND_METRICS: [Column; 3] = [
    Column::counter("feasible_runs"),
    Column::value("pos_max"),
    Column::value("pos_avg"),
];

/// Runs the sweep named by the spec's mode.
pub fn run_sweep(net: &Network, spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    match spec.mode {
        SweepMode::CapacitySweep => capacity_sweep(net, &spec.params),
        SweepMode::DemandGrid => demand_grid(net, &spec.params),
        SweepMode::CheapDemandSweep => cheap_demand_sweep(net, &spec.params),
        SweepMode::FixedAggregateSplit => fixed_aggregate_split(net, &spec.params),
        SweepMode::RandomDistributionStudy => random_distribution_study(net, &spec.params),
    }
}

// --- shared plumbing -------------------------------------------------------

fn region(net: &Network, ids: &[i64], label: &str) -> Result<Vec<usize>, SweepError> {
    if ids.is_empty() {
        return Err(SweepError::BadSpec(format!("{label} must name at least one bus")));
    }
    ids.iter()
        .map(|&id| {
            net.bus_position(BusId(id))
                .ok_or(SweepError::UnknownBus(id))
        })
        .collect()
}

fn map_to_vec(
    net: &Network,
    map: &BTreeMap<String, f64>,
    default: f64,
) -> Result<Vec<f64>, SweepError> {
    let mut values = vec![default; net.bus_count()];
    for (key, &value) in map {
        let id: i64 = key
            .parse()
            .map_err(|_| SweepError::BadSpec(format!("bus key {key:?} is not an integer")))?;
        let pos = net
            .bus_position(BusId(id))
            .ok_or(SweepError::UnknownBus(id))?;
        values[pos] = value;
    }
    Ok(values)
}

/// Per-point RNG stream derived from `(seed, point index)`, so parallel
/// scheduling never changes the sampled demands.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw from the simplex `{d >= 0 : sum d = total}` via the
/// exponential-spacings construction.
fn simplex_split<R: Rng>(rng: &mut R, total: f64, parts: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..parts)
        .map(|_| {
            let u: f64 = rng.gen();
            -(1.0 - u).ln()
        })
        .collect();
    let sum: f64 = draws.iter().sum();
    for d in &mut draws {
        *d *= total / sum;
    }
    draws
}

enum Eval {
    Feasible { c_ed: f64, c_sc: f64, pos: f64 },
    EdInfeasible,
    ScedInfeasible,
}

fn evaluate(model: &DispatchModel, inst: &InputInstance) -> Result<Eval, SweepError> {
    match model.price_of_security(inst) {
        Ok(report) => Ok(Eval::Feasible {
            c_ed: report.c_ed,
            c_sc: report.c_sc,
            pos: report.pos,
        }),
        Err(DispatchError::EdInfeasible) => Ok(Eval::EdInfeasible),
        Err(DispatchError::ScedInfeasible) => Ok(Eval::ScedInfeasible),
        Err(other) => Err(other.into()),
    }
}

fn deterministic_row(
    model: &DispatchModel,
    swept: Vec<f64>,
    capacity: Vec<f64>,
    demand: Vec<f64>,
) -> Result<SweepRow, SweepError> {
    let inst = InputInstance::new(capacity, demand);
    let (status, metrics) = match evaluate(model, &inst)? {
        Eval::Feasible { c_ed, c_sc, pos } => {
            (PointStatus::Ok, vec![Some(c_ed), Some(c_sc), Some(pos)])
        }
        Eval::EdInfeasible => (PointStatus::EdInfeasible, vec![None, None, None]),
        Eval::ScedInfeasible => (PointStatus::ScedInfeasible, vec![None, None, None]),
    };
    Ok(SweepRow { swept, status, metrics })
}

#[allow(clippy::too_many_arguments)]
fn randomized_row(
    model: &DispatchModel,
    swept: Vec<f64>,
    base_demand: &[f64],
    expensive: &[usize],
    aggregate: f64,
    capacity: &[f64],
    runs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SweepRow, SweepError> {
    let mut feasible = 0usize;
    let mut max_pos = f64::NEG_INFINITY;
    let mut sum_pos = 0.0;
    for _ in 0..runs {
        let split = simplex_split(rng, aggregate, expensive.len());
        let mut demand = base_demand.to_vec();
        for (&pos, share) in expensive.iter().zip(split) {
            demand[pos] += share;
        }
        if let Eval::Feasible { pos, .. } =
            evaluate(model, &InputInstance::new(capacity.to_vec(), demand))?
        {
            feasible += 1;
            max_pos = max_pos.max(pos);
            sum_pos += pos;
        }
    }
    let (status, max_avg) = if feasible > 0 {
        (
            PointStatus::Ok,
            (Some(max_pos), Some(sum_pos / feasible as f64)),
        )
    } else {
        (PointStatus::NoFeasibleRuns, (None, None))
    };
    Ok(SweepRow {
        swept,
        status,
        metrics: vec![Some(feasible as f64), max_avg.0, max_avg.1],
    })
}

fn assemble(
    net: &Network,
    mode: SweepMode,
    seed: u64,
    swept_columns: Vec<Column>,
    metric_columns: Vec<Column>,
    rows: Vec<SweepRow>,
) -> SweepResult {
    let mut result = SweepResult {
        swept_columns,
        metric_columns,
        rows,
        metadata: SweepMetadata {
            case: net.name().to_string(),
            mode,
            seed,
            generated_at: SystemTime::now(),
        },
        argmax: None,
    };
    result.compute_argmax();
    result
}

// --- sweep modes -----------------------------------------------------------

/// PoS versus cheap-side generation capacity at fixed demand. With an
/// `aggregate_demand`, the expensive-side demand profile is redrawn `runs`
/// times per point and the max/average PoS is reported; otherwise the fixed
/// `demand` map is used. Multi-bus cheap regions scale together,
/// proportionally to their `base_capacity` entries.
pub fn capacity_sweep(net: &Network, params: &SweepParams) -> Result<SweepResult, SweepError> {
    params.range.validate()?;
    let model = DispatchModel::new(net)?;
    let cheap = region(net, &params.cheap_buses, "cheap_buses")?;
    let fixed_demand = map_to_vec(net, &params.demand, 0.0)?;
    let base_capacity = map_to_vec(net, &params.base_capacity, f64::INFINITY)?;

    let randomized = params.aggregate_demand.is_some();
    if !randomized && params.runs != 1 {
        return Err(SweepError::BadSpec(
            "runs > 1 needs an aggregate_demand to randomize".into(),
        ));
    }
    let expensive = if randomized {
        region(net, &params.expensive_buses, "expensive_buses")?
    } else {
        Vec::new()
    };

    let total_demand =
        fixed_demand.iter().sum::<f64>() + params.aggregate_demand.unwrap_or(0.0);
    if total_demand <= 0.0 {
        return Err(SweepError::BadSpec("capacity sweep needs positive total demand".into()));
    }

    let ratios: Vec<f64> = if cheap.len() == 1 {
        vec![1.0]
    } else {
        let entries: Vec<f64> = cheap.iter().map(|&pos| base_capacity[pos]).collect();
        let sum: f64 = entries.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(SweepError::BadSpec(
                "multi-bus cheap regions need finite positive base_capacity entries for the split ratio"
                    .into(),
            ));
        }
        entries.iter().map(|e| e / sum).collect()
    };

    let values = params.range.values();
    let rows: Vec<SweepRow> = (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let total_cheap = match params.capacity_axis {
                super::CapacityAxis::Absolute => values[idx],
                super::CapacityAxis::DemandMultiple => values[idx] * total_demand,
            };
            let mut capacity = base_capacity.clone();
            for (&pos, ratio) in cheap.iter().zip(&ratios) {
                capacity[pos] = total_cheap * ratio;
            }
            let swept = vec![total_cheap, total_cheap / total_demand];
            if randomized {
                let mut rng = point_rng(params.seed, idx);
                randomized_row(
                    &model,
                    swept,
                    &fixed_demand,
                    &expensive,
                    params.aggregate_demand.unwrap(),
                    &capacity,
                    params.runs,
                    &mut rng,
                )
            } else {
                deterministic_row(&model, swept, capacity, fixed_demand.clone())
            }
        })
        .collect::<Result<_, _>>()?;

    let metrics = if randomized { RAND_METRICS } else { DET_METRICS };
    Ok(assemble(
        net,
        SweepMode::CapacitySweep,
        params.seed,
        vec![Column::value("cheap_capacity_mw"), Column::value("capacity_scale")],
        metrics.to_vec(),
        rows,
    ))
}

/// PoS over the full (cheap demand, expensive demand) plane of a 2-bus
/// network; `range` drives the cheap axis and `range2` the expensive one.
pub fn demand_grid(net: &Network, params: &SweepParams) -> Result<SweepResult, SweepError> {
    if net.bus_count() != 2 {
        return Err(SweepError::BadSpec("demand grids are defined for 2-bus networks".into()));
    }
    let range2 = params
        .range2
        .ok_or_else(|| SweepError::BadSpec("demand grid needs range2 for the second axis".into()))?;
    params.range.validate()?;
    range2.validate()?;

    let model = DispatchModel::new(net)?;
    let capacity = map_to_vec(net, &params.base_capacity, f64::INFINITY)?;
    // Cheap bus first; ties go to the lower id.
    let cheap_pos = if (net.buses()[0].marginal_cost, net.buses()[0].id)
        <= (net.buses()[1].marginal_cost, net.buses()[1].id)
    {
        0
    } else {
        1
    };
    let expensive_pos = 1 - cheap_pos;

    let cheap_values = params.range.values();
    let expensive_values = range2.values();
    let total = cheap_values.len() * expensive_values.len();
    let rows: Vec<SweepRow> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let d_cheap = cheap_values[idx / expensive_values.len()];
            let d_expensive = expensive_values[idx % expensive_values.len()];
            let mut demand = vec![0.0; 2];
            demand[cheap_pos] = d_cheap;
            demand[expensive_pos] = d_expensive;
            deterministic_row(&model, vec![d_cheap, d_expensive], capacity.clone(), demand)
        })
        .collect::<Result<_, _>>()?;

    Ok(assemble(
        net,
        SweepMode::DemandGrid,
        params.seed,
        vec![Column::value("d_cheap_mw"), Column::value("d_expensive_mw")],
        DET_METRICS.to_vec(),
        rows,
    ))
}

/// PoS versus cheap-side demand with the expensive side held fixed —
/// either the literal `demand` map, or `runs` random splits of
/// `aggregate_demand` over the expensive buses. The swept cheap aggregate
/// spreads evenly over the cheap buses.
pub fn cheap_demand_sweep(net: &Network, params: &SweepParams) -> Result<SweepResult, SweepError> {
    params.range.validate()?;
    let model = DispatchModel::new(net)?;
    let cheap = region(net, &params.cheap_buses, "cheap_buses")?;
    let capacity = map_to_vec(net, &params.base_capacity, f64::INFINITY)?;
    let fixed_demand = map_to_vec(net, &params.demand, 0.0)?;

    let randomized = params.aggregate_demand.is_some();
    if !randomized && params.runs != 1 {
        return Err(SweepError::BadSpec(
            "runs > 1 needs an aggregate_demand to randomize".into(),
        ));
    }
    let expensive = if randomized {
        region(net, &params.expensive_buses, "expensive_buses")?
    } else {
        Vec::new()
    };

    let values = params.range.values();
    let rows: Vec<SweepRow> = (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let cheap_total = values[idx];
            let share = cheap_total / cheap.len() as f64;
            let mut demand = fixed_demand.clone();
            for &pos in &cheap {
                demand[pos] = share;
            }
            let swept = vec![cheap_total];
            if randomized {
                let mut rng = point_rng(params.seed, idx);
                randomized_row(
                    &model,
                    swept,
                    &demand,
                    &expensive,
                    params.aggregate_demand.unwrap(),
                    &capacity,
                    params.runs,
                    &mut rng,
                )
            } else {
                deterministic_row(&model, swept, capacity.clone(), demand)
            }
        })
        .collect::<Result<_, _>>()?;

    let metrics = if randomized { RAND_METRICS } else { DET_METRICS };
    Ok(assemble(
        net,
        SweepMode::CheapDemandSweep,
        params.seed,
        vec![Column::value("cheap_demand_mw")],
        metrics.to_vec(),
        rows,
    ))
}

/// PoS versus the split of a fixed aggregate demand between the regions.
/// The axis sweeps the expensive-side total; the cheap side takes the
/// remainder, spread evenly. Multi-bus expensive regions with `runs > 1`
/// randomize the expensive split per run; otherwise it spreads evenly too.
pub fn fixed_aggregate_split(net: &Network, params: &SweepParams) -> Result<SweepResult, SweepError> {
    params.range.validate()?;
    let total = params
        .aggregate_demand
        .ok_or_else(|| SweepError::BadSpec("fixed-aggregate-split needs aggregate_demand".into()))?;
    if params.range.stop > total + 1e-9 {
        return Err(SweepError::BadSpec(format!(
            "range stop {} exceeds the aggregate demand {total}",
            params.range.stop
        )));
    }
    let model = DispatchModel::new(net)?;
    let cheap = region(net, &params.cheap_buses, "cheap_buses")?;
    let expensive = region(net, &params.expensive_buses, "expensive_buses")?;
    let capacity = map_to_vec(net, &params.base_capacity, f64::INFINITY)?;

    let values = params.range.values();
    let rows: Vec<SweepRow> = (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let expensive_total = values[idx];
            let cheap_total = total - expensive_total;
            let mut demand = vec![0.0; net.bus_count()];
            for &pos in &cheap {
                demand[pos] = cheap_total / cheap.len() as f64;
            }
            let swept = vec![expensive_total, cheap_total];
            if params.runs > 1 {
                let mut rng = point_rng(params.seed, idx);
                randomized_row(
                    &model,
                    swept,
                    &demand,
                    &expensive,
                    expensive_total,
                    &capacity,
                    params.runs,
                    &mut rng,
                )
            } else {
                for &pos in &expensive {
                    demand[pos] = expensive_total / expensive.len() as f64;
                }
                deterministic_row(&model, swept, capacity.clone(), demand)
            }
        })
        .collect::<Result<_, _>>()?;

    let metrics = if params.runs > 1 { RAND_METRICS } else { DET_METRICS };
    Ok(assemble(
        net,
        SweepMode::FixedAggregateSplit,
        params.seed,
        vec![
            Column::value("d_expensive_mw"),
            Column::value("d_cheap_mw"),
        ],
        metrics.to_vec(),
        rows,
    ))
}

/// Max/average PoS of `runs` random expensive-side demand profiles per
/// swept aggregate demand, with any fixed demand taken from the `demand`
/// map. Fully reproducible from the seed.
pub fn random_distribution_study(
    net: &Network,
    params: &SweepParams,
) -> Result<SweepResult, SweepError> {
    params.range.validate()?;
    let model = DispatchModel::new(net)?;
    let expensive = region(net, &params.expensive_buses, "expensive_buses")?;
    let capacity = map_to_vec(net, &params.base_capacity, f64::INFINITY)?;
    let fixed_demand = map_to_vec(net, &params.demand, 0.0)?;

    let values = params.range.values();
    let rows: Vec<SweepRow> = (0..values.len())
        .into_par_iter()
        .map(|idx| {
            let mut rng = point_rng(params.seed, idx);
            randomized_row(
                &model,
                vec![values[idx]],
                &fixed_demand,
                &expensive,
                values[idx],
                &capacity,
                params.runs,
                &mut rng,
            )
        })
        .collect::<Result<_, _>>()?;

    Ok(assemble(
        net,
        SweepMode::RandomDistributionStudy,
        params.seed,
        vec![Column::value("aggregate_demand_mw")],
        RAND_METRICS.to_vec(),
        rows,
    ))
}

// --- worst-case search -----------------------------------------------------

/// Outcome of the exhaustive grid search: the maximizing instance, its full
/// report, and how much of the grid was feasible.
#[derive(Debug, Clone)]
pub struct WorstCaseResult {
    pub instance: InputInstance,
    pub report: PosReport,
    pub evaluated: usize,
    pub feasible: usize,
}

#[derive(Clone, Copy)]
struct BestPoint {
    index: usize,
    pos: f64,
}

/// Exhaustively grids instances `omega = (capacity, demand)` — every
/// capacity vector in `capacities` crossed with the demand box
/// `[0, dmax]^n` at step `dstep` — and returns the PoS maximizer, skipping
/// infeasible points. Ties break toward the lexicographically smallest
/// point.
pub fn worst_case_search(
    net: &Network,
    capacities: &[Vec<f64>],
    dmax: f64,
    dstep: f64,
) -> Result<WorstCaseResult, SweepError> {
    if capacities.is_empty() {
        return Err(SweepError::BadSpec("at least one capacity vector is required".into()));
    }
    for cap in capacities {
        if cap.len() != net.bus_count() {
            return Err(SweepError::BadSpec(format!(
                "capacity vector length {} does not match {} buses",
                cap.len(),
                net.bus_count()
            )));
        }
    }
    let axis = Range { start: 0.0, stop: dmax, step: dstep };
    axis.validate()?;
    let values = axis.values();

    let n = net.bus_count();
    let per_capacity = values
        .len()
        .checked_pow(n as u32)
        .filter(|&p| p.checked_mul(capacities.len()).is_some_and(|t| t <= 50_000_000))
        .ok_or_else(|| SweepError::BadSpec("demand grid is too large to enumerate".into()))?;
    let total = per_capacity * capacities.len();

    let model = DispatchModel::new(net)?;
    let decode = |index: usize| -> InputInstance {
        let capacity = &capacities[index / per_capacity];
        let mut rest = index % per_capacity;
        let mut demand = vec![0.0; n];
        // Bus 0 is the most significant digit, so the enumeration is
        // lexicographic in demand.
        for slot in (0..n).rev() {
            demand[slot] = values[rest % values.len()];
            rest /= values.len();
        }
        InputInstance::new(capacity.clone(), demand)
    };

    struct Acc {
        best: Option<BestPoint>,
        feasible: usize,
    }
    let merged = (0..total)
        .into_par_iter()
        .map(|index| -> Result<Acc, SweepError> {
            let outcome = evaluate(&model, &decode(index))?;
            Ok(match outcome {
                Eval::Feasible { pos, .. } => Acc {
                    best: Some(BestPoint { index, pos }),
                    feasible: 1,
                },
                _ => Acc { best: None, feasible: 0 },
            })
        })
        .try_reduce(
            || Acc { best: None, feasible: 0 },
            |a, b| {
                let best = match (a.best, b.best) {
                    (Some(x), Some(y)) => {
                        if y.pos > x.pos || (y.pos == x.pos && y.index < x.index) {
                            Some(y)
                        } else {
                            Some(x)
                        }
                    }
                    (x, y) => x.or(y),
                };
                Ok(Acc { best, feasible: a.feasible + b.feasible })
            },
        )?;

    let best = merged.best.ok_or(SweepError::EmptyFeasibleGrid)?;
    let instance = decode(best.index);
    let report = model.price_of_security(&instance)?;
    Ok(WorstCaseResult {
        instance,
        report,
        evaluated: total,
        feasible: merged.feasible,
    })
}

// --- topology ablations ----------------------------------------------------

/// Cumulative simplifications of the PJM 5-bus case toward the 2-bus shape:
/// drop the 150 MW link, normalize the remaining cross-region limits to a
/// common limit/susceptance ratio, then flatten costs to 15 $/MWh on the
/// generation side and 40 $/MWh on the demand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AblationVariant {
    Full,
    No150Link,
    Normalized,
    Homogeneous,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 4] = [
        AblationVariant::Full,
        AblationVariant::No150Link,
        AblationVariant::Normalized,
        AblationVariant::Homogeneous,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::No150Link => "no-150-link",
            AblationVariant::Normalized => "normalized",
            AblationVariant::Homogeneous => "homogeneous",
        }
    }
}

impl std::fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AblationVariant {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        AblationVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| SweepError::BadSpec(format!("unknown ablation variant {s:?}")))
    }
}

/// Builds the simplified PJM 5-bus topology for a variant.
pub fn ablation_network(variant: AblationVariant) -> Network {
    let base = cases::pjm5();
    let mut name = base.name().to_string();
    let mut buses: Vec<Bus> = base.buses().to_vec();
    let mut lines = base.lines().to_vec();

    if variant >= AblationVariant::No150Link {
        let before = lines.len();
        lines.retain(|l| !(l.from_bus == BusId(1) && l.to_bus == BusId(5)));
        assert_eq!(lines.len() + 1, before, "expected exactly one (1,5) link");
        name.push_str("-no150");
    }
    if variant >= AblationVariant::Normalized {
        let reference = lines
            .iter()
            .find(|l| l.from_bus == BusId(1) && l.to_bus == BusId(3))
            .expect("line (1,3) present");
        let ratio = reference.limit / reference.susceptance;
        let target = lines
            .iter_mut()
            .find(|l| l.from_bus == BusId(2) && l.to_bus == BusId(5))
            .expect("line (2,5) present");
        target.limit = ratio * target.susceptance;
        name.push_str("-normalized");
    }
    if variant >= AblationVariant::Homogeneous {
        for bus in &mut buses {
            bus.marginal_cost = if cases::PJM5_CHEAP_BUSES.contains(&bus.id.0) {
                15.0
            } else {
                40.0
            };
        }
        name.push_str("-homogeneous");
    }

    Network::new(name, buses, lines).expect("ablation variants stay valid")
}

/// The worst-case demand sweep of an ablation variant: zero cheap-side
/// demand, random expensive-side profiles with the aggregate swept from
/// 50 to 1000 MW in 50 MW steps, and relaxed generation capacities.
pub fn ablation_suite(
    variant: AblationVariant,
    runs: usize,
    seed: u64,
) -> Result<SweepResult, SweepError> {
    let net = ablation_network(variant);
    let params = SweepParams {
        range: Range { start: 50.0, stop: 1000.0, step: 50.0 },
        range2: None,
        capacity_axis: super::CapacityAxis::Absolute,
        demand: BTreeMap::new(),
        base_capacity: BTreeMap::new(),
        cheap_buses: cases::PJM5_CHEAP_BUSES.to_vec(),
        expensive_buses: cases::PJM5_EXPENSIVE_BUSES.to_vec(),
        aggregate_demand: None,
        runs,
        seed,
    };
    random_distribution_study(&net, &params)
}
