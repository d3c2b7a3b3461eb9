//! Closed-form analysis of the 2-bus, 2-parallel-line topology.
//!
//! For this topology both dispatch problems collapse to a single transfer
//! variable, giving closed forms for the optimal costs, the price of
//! security, the best demand split at fixed aggregate demand, and the
//! worst-case instance. The closed forms hold when the cheap generator can
//! cover the total demand; outside that regime the LP path is authoritative.
//! This module doubles as the ground-truth oracle the LP path is tested
//! against.

use thiserror::Error;

use crate::network::{BusId, Network};
use crate::ptdf::{self, PtdfError, TransferLimits};

#[derive(Debug, Error)]
pub enum TwoBusError {
    #[error("invalid two-bus parameters: {0}")]
    BadParams(String),
    #[error("negative demand ({d1}, {d2})")]
    NegativeDemand { d1: f64, d2: f64 },
    #[error(transparent)]
    Ptdf(#[from] PtdfError),
}

/// Parameters of the reduced 2-bus problem, relabeled so the cheap
/// generator comes first. `cheap_bus` / `expensive_bus` remember the
/// original labels so reports can use them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBusParams {
    pub cheap_cost: f64,
    pub expensive_cost: f64,
    /// Maximum cheap-to-expensive transfer of the intact topology.
    pub base_transfer: f64,
    /// Maximum transfer that survives either single-line outage.
    pub secure_transfer: f64,
    pub cheap_bus: BusId,
    pub expensive_bus: BusId,
}

/// The instance attaining the maximum price of security: all demand sits at
/// the expensive bus and equals the base transfer limit, with cheap
/// capacity at least that much.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    pub demand_cheap: f64,
    pub demand_expensive: f64,
    pub min_cheap_capacity: f64,
    pub pos: f64,
}

impl TwoBusParams {
    /// Builds the oracle from per-bus costs and precomputed transfer
    /// limits, relabeling so the cheap cost comes first. The transfer
    /// limits must satisfy `secure <= base <= 2 * secure`, which every
    /// equal-susceptance pair does.
    pub fn from_costs_and_limits(
        costs: [f64; 2],
        bus_ids: [BusId; 2],
        limits: TransferLimits,
    ) -> Result<Self, TwoBusError> {
        for (label, value) in [
            ("cost", costs[0]),
            ("cost", costs[1]),
            ("base transfer", limits.base),
            ("secure transfer", limits.secure),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(TwoBusError::BadParams(format!(
                    "{label} must be finite and nonnegative, got {value}"
                )));
            }
        }
        let slack = 1e-9 * (1.0 + limits.base);
        if limits.secure > limits.base + slack {
            return Err(TwoBusError::BadParams(format!(
                "secure transfer {} exceeds base transfer {}",
                limits.secure, limits.base
            )));
        }
        if limits.base > 2.0 * limits.secure + slack {
            return Err(TwoBusError::BadParams(format!(
                "base transfer {} exceeds twice the secure transfer {}; \
                 outside the regime the closed forms characterize",
                limits.base, limits.secure
            )));
        }
        let ordered = if costs[0] <= costs[1] { [0, 1] } else { [1, 0] };
        Ok(Self {
            cheap_cost: costs[ordered[0]],
            expensive_cost: costs[ordered[1]],
            base_transfer: limits.base,
            secure_transfer: limits.secure,
            cheap_bus: bus_ids[ordered[0]],
            expensive_bus: bus_ids[ordered[1]],
        })
    }

    /// Builds the oracle from raw line parameters of the parallel pair.
    pub fn from_line_params(
        costs: [f64; 2],
        susceptances: [f64; 2],
        line_limits: [f64; 2],
    ) -> Result<Self, TwoBusError> {
        for (label, value) in [("susceptance", susceptances[0]), ("susceptance", susceptances[1])] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TwoBusError::BadParams(format!(
                    "{label} must be finite and positive, got {value}"
                )));
            }
        }
        let limits = ptdf::parallel_pair_limits(susceptances, line_limits);
        Self::from_costs_and_limits(costs, [BusId(1), BusId(2)], limits)
    }

    /// Builds the oracle from a 2-bus, 2-line network.
    pub fn from_network(net: &Network) -> Result<Self, TwoBusError> {
        let limits = ptdf::two_bus_transfer_limits(net)?;
        let costs = [net.buses()[0].marginal_cost, net.buses()[1].marginal_cost];
        let ids = [net.buses()[0].id, net.buses()[1].id];
        Self::from_costs_and_limits(costs, ids, limits)
    }

    fn check_demand(&self, d_cheap: f64, d_expensive: f64) -> Result<(), TwoBusError> {
        if d_cheap < 0.0 || d_expensive < 0.0 || d_cheap.is_nan() || d_expensive.is_nan() {
            return Err(TwoBusError::NegativeDemand {
                d1: d_cheap,
                d2: d_expensive,
            });
        }
        Ok(())
    }

    /// Optimal ED and SCED costs for demands at the cheap and expensive
    /// bus, assuming cheap capacity covers the total demand: local demand
    /// is served locally, the transfer limit caps cheap exports, and the
    /// remainder runs on the expensive generator.
    pub fn closed_form_costs(
        &self,
        d_cheap: f64,
        d_expensive: f64,
    ) -> Result<(f64, f64), TwoBusError> {
        self.check_demand(d_cheap, d_expensive)?;
        let cost_at = |transfer: f64| {
            self.cheap_cost * (d_cheap + transfer.min(d_expensive))
                + self.expensive_cost * (d_expensive - transfer).max(0.0)
        };
        Ok((cost_at(self.base_transfer), cost_at(self.secure_transfer)))
    }

    /// Ratio of the closed-form costs; 1 at zero total demand by the shared
    /// convention.
    pub fn closed_form_pos(&self, d_cheap: f64, d_expensive: f64) -> Result<f64, TwoBusError> {
        let (c_ed, c_sc) = self.closed_form_costs(d_cheap, d_expensive)?;
        if c_ed <= 0.0 {
            return Ok(1.0);
        }
        Ok(c_sc / c_ed)
    }

    /// The globally PoS-maximizing instance and its value,
    /// `expensive/cheap - (expensive - cheap) * secure / (cheap * base)`.
    pub fn worst_case(&self) -> WorstCase {
        let pos = if self.base_transfer <= 0.0 {
            // No transfer capacity at all: both problems serve locally.
            1.0
        } else {
            self.expensive_cost / self.cheap_cost
                - (self.expensive_cost - self.cheap_cost) * self.secure_transfer
                    / (self.cheap_cost * self.base_transfer)
        };
        WorstCase {
            demand_cheap: 0.0,
            demand_expensive: self.base_transfer,
            min_cheap_capacity: self.base_transfer,
            pos,
        }
    }

    /// For a fixed aggregate demand, the split maximizing the price of
    /// security: load the expensive bus up to the base transfer limit and
    /// keep the rest at the cheap bus. Returns `(d_cheap, d_expensive)`.
    pub fn best_demand_split(&self, total_demand: f64) -> Result<(f64, f64), TwoBusError> {
        self.check_demand(total_demand, 0.0)?;
        let d_expensive = total_demand.min(self.base_transfer);
        Ok((total_demand - d_expensive, d_expensive))
    }

    /// Maps oracle-ordered demands back to network bus order.
    pub fn demand_in_network_order(
        &self,
        net: &Network,
        d_cheap: f64,
        d_expensive: f64,
    ) -> Result<Vec<f64>, TwoBusError> {
        let mut demand = vec![0.0; net.bus_count()];
        for (bus, value) in [(self.cheap_bus, d_cheap), (self.expensive_bus, d_expensive)] {
            let pos = net
                .bus_position(bus)
                .ok_or_else(|| TwoBusError::BadParams(format!("bus {bus} not in network")))?;
            demand[pos] = value;
        }
        Ok(demand)
    }
}
