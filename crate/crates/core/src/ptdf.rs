//! Shift-factor (PTDF) matrices and single-line-outage topologies.
//!
//! The shift-factor matrix `H` maps balanced nodal net injections to DC line
//! flows, `f = H (q - d)`. It is assembled densely as `B_d * A * L~`, where
//! `A` is the line-bus incidence matrix, `B_d` the diagonal susceptance
//! matrix, and `L~` the inverse of the graph Laplacian with the slack bus
//! row and column deleted, zero-padded back at the slack position. Networks
//! of interest here are tiny, so a direct dense factorization beats any
//! sparse or LODF-based shortcut.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::network::{BusId, Line, LineId, Network};

/// Max allowed relative residual of the reduced-Laplacian inverse.
const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PtdfError {
    #[error("slack bus {0} is not part of the network")]
    UnknownSlack(BusId),
    #[error("reduced Laplacian is singular (disconnected input?)")]
    Singular,
    #[error("reduced Laplacian inverse failed the residual check: {residual:.3e}")]
    IllConditioned { residual: f64 },
    #[error("expected a 2-bus network with 2 parallel lines, got {buses} buses / {lines} lines")]
    WrongTopology { buses: usize, lines: usize },
}

/// Dense shift-factor matrix over a fixed set of lines.
///
/// Row order is `line_ids`; column `i` corresponds to bus `i` in the
/// network's bus order. For balanced injections the flows are independent
/// of the slack choice.
#[derive(Debug, Clone)]
pub struct ShiftFactorMatrix {
    line_ids: Vec<LineId>,
    matrix: DMatrix<f64>,
    slack: BusId,
}

impl ShiftFactorMatrix {
    pub fn line_ids(&self) -> &[LineId] {
        &self.line_ids
    }

    pub fn slack(&self) -> BusId {
        self.slack
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Coefficients of the row for the `idx`-th line in `line_ids` order.
    pub fn row(&self, idx: usize) -> Vec<f64> {
        self.matrix.row(idx).iter().copied().collect()
    }

    /// Line flows for a nodal net-injection vector.
    pub fn flows(&self, injection: &[f64]) -> Vec<f64> {
        assert_eq!(injection.len(), self.matrix.ncols(), "injection length");
        self.matrix
            .row_iter()
            .map(|row| row.iter().zip(injection).map(|(h, p)| h * p).sum())
            .collect()
    }
}

/// The lowest bus id, used as the angle reference when none is given.
pub fn default_slack(net: &Network) -> BusId {
    net.buses()
        .iter()
        .map(|b| b.id)
        .min()
        .expect("networks have at least two buses")
}

/// Shift factors of the full topology with an explicit slack bus.
pub fn shift_factors(net: &Network, slack: BusId) -> Result<ShiftFactorMatrix, PtdfError> {
    let slack_pos = net
        .bus_position(slack)
        .ok_or(PtdfError::UnknownSlack(slack))?;
    build_shift_factors(net, net.lines(), slack_pos, slack)
}

fn build_shift_factors(
    net: &Network,
    lines: &[Line],
    slack_pos: usize,
    slack: BusId,
) -> Result<ShiftFactorMatrix, PtdfError> {
    let n = net.bus_count();
    let endpoints: Vec<(usize, usize, f64)> = lines
        .iter()
        .map(|line| {
            let u = net.bus_position(line.from_bus).expect("validated line");
            let w = net.bus_position(line.to_bus).expect("validated line");
            (u, w, line.susceptance)
        })
        .collect();

    let mut laplacian = DMatrix::zeros(n, n);
    for &(u, w, b) in &endpoints {
        laplacian[(u, u)] += b;
        laplacian[(w, w)] += b;
        laplacian[(u, w)] -= b;
        laplacian[(w, u)] -= b;
    }

    let reduced = laplacian.remove_row(slack_pos).remove_column(slack_pos);
    let inverse = reduced.clone().try_inverse().ok_or(PtdfError::Singular)?;

    let identity: DMatrix<f64> = DMatrix::identity(n - 1, n - 1);
    let residual = (&reduced * &inverse - identity).amax();
    let scale = reduced.amax().max(1.0);
    if residual.is_nan() || residual > SOLVE_RESIDUAL_TOL * scale {
        return Err(PtdfError::IllConditioned { residual });
    }

    let padded = inverse.insert_row(slack_pos, 0.0).insert_column(slack_pos, 0.0);

    let mut matrix = DMatrix::zeros(lines.len(), n);
    for (row, &(u, w, b)) in endpoints.iter().enumerate() {
        for col in 0..n {
            matrix[(row, col)] = b * (padded[(u, col)] - padded[(w, col)]);
        }
    }

    Ok(ShiftFactorMatrix {
        line_ids: lines.iter().map(|l| l.id).collect(),
        matrix,
        slack,
    })
}

/// A single-line-outage topology that stays connected: shift factors and
/// limits of the surviving lines.
#[derive(Debug, Clone)]
pub struct ContingencyTopology {
    pub outaged_line: LineId,
    pub shift_factors: ShiftFactorMatrix,
    pub limits: Vec<f64>,
}

/// Outcome of screening every single-line outage. Islanding lines (bridges)
/// are reported rather than silently skipped.
#[derive(Debug, Clone)]
pub struct ContingencyAnalysis {
    pub topologies: Vec<ContingencyTopology>,
    pub islanding: Vec<LineId>,
}

/// Builds the surviving-topology shift factors for every line outage,
/// ordered by outaged line id. Each surviving topology is refactorized from
/// scratch rather than patched with outage distribution factors.
pub fn contingency_topologies(net: &Network) -> Result<ContingencyAnalysis, PtdfError> {
    let slack = default_slack(net);
    let slack_pos = net.bus_position(slack).expect("slack is a network bus");

    let mut outages: Vec<LineId> = net.lines().iter().map(|l| l.id).collect();
    outages.sort();

    let mut analysis = ContingencyAnalysis {
        topologies: Vec::with_capacity(outages.len()),
        islanding: Vec::new(),
    };
    for outaged in outages {
        if !net.connected_without(outaged) {
            analysis.islanding.push(outaged);
            continue;
        }
        let survivors: Vec<Line> = net
            .lines()
            .iter()
            .filter(|l| l.id != outaged)
            .cloned()
            .collect();
        let shift_factors = build_shift_factors(net, &survivors, slack_pos, slack)?;
        let limits = survivors.iter().map(|l| l.limit).collect();
        analysis.topologies.push(ContingencyTopology {
            outaged_line: outaged,
            shift_factors,
            limits,
        });
    }
    Ok(analysis)
}

/// Maximum bus-1 to bus-2 transfer of a 2-bus, 2-parallel-line topology:
/// `base` under the intact network, `secure` under the worst single outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferLimits {
    pub base: f64,
    pub secure: f64,
}

/// Transfer limits from raw parallel-pair parameters.
///
/// Intact, a transfer `t` splits as `B_e / (B_1 + B_2) * t` per line, so the
/// base limit is `(B_1 + B_2) * min(limit_1/B_1, limit_2/B_2)`. After either
/// outage the survivor carries everything, so the secure limit is
/// `min(limit_1, limit_2)`.
pub fn parallel_pair_limits(
    susceptances: [f64; 2],
    limits: [f64; 2],
) -> TransferLimits {
    let [b1, b2] = susceptances;
    let [l1, l2] = limits;
    TransferLimits {
        base: (b1 + b2) * (l1 / b1).min(l2 / b2),
        secure: l1.min(l2),
    }
}

/// Transfer limits of a 2-bus, 2-line network.
pub fn two_bus_transfer_limits(net: &Network) -> Result<TransferLimits, PtdfError> {
    if net.bus_count() != 2 || net.line_count() != 2 {
        return Err(PtdfError::WrongTopology {
            buses: net.bus_count(),
            lines: net.line_count(),
        });
    }
    let [l1, l2] = [&net.lines()[0], &net.lines()[1]];
    Ok(parallel_pair_limits(
        [l1.susceptance, l2.susceptance],
        [l1.limit, l2.limit],
    ))
}
