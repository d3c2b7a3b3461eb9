//! DC dispatch engine with N-1 security analysis.
//!
//! The crate solves economic dispatch (ED) and preventive security-
//! constrained economic dispatch (SCED) as linear programs on a DC power
//! flow model, and reports the price of security — the ratio of the two
//! optimal costs — per problem instance. A closed-form oracle covers the
//! 2-bus, 2-line topology, and a sweep harness reproduces the bundled
//! experiment suites as CSV.
//!
//! Modules follow the pipeline:
//!
//! * [`network`] — topology, parameters, case and instance files
//! * [`ptdf`] — shift-factor matrices and single-line-outage topologies
//! * [`lp`] — dense two-phase simplex
//! * [`dispatch`] — ED / SCED programs and the price of security
//! * [`two_bus`] — closed-form costs, worst case, and demand splits
//! * [`experiments`] — sweeps, worst-case search, ablations, CSV output
//! * [`cases`] — bundled `2bus` and `pjm5` networks

pub mod cases;
pub mod dispatch;
pub mod experiments;
pub mod lp;
pub mod network;
pub mod ptdf;
pub mod two_bus;

pub use dispatch::{DispatchModel, DispatchSolution, DispatchStatus, PosReport, SecurityReport};
pub use network::{
    load_instance, load_network, validate_instance, Bus, BusId, InputInstance, Line, LineId,
    Network,
};
pub use ptdf::{
    contingency_topologies, shift_factors, two_bus_transfer_limits, ContingencyTopology,
    ShiftFactorMatrix, TransferLimits,
};
pub use two_bus::TwoBusParams;
