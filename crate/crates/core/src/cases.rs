//! Bundled test cases.

use crate::network::{load_network, Network};

/// Case document for the 2-bus, 2-parallel-line network.
pub const TWO_BUS_JSON: &str = include_str!("../cases/2bus.json");

/// Case document for the modified PJM 5-bus network.
pub const PJM5_JSON: &str = include_str!("../cases/pjm5.json");

/// Buses forming the cheap generation region of the PJM 5-bus case.
pub const PJM5_CHEAP_BUSES: [i64; 2] = [1, 2];

/// Buses forming the expensive demand region of the PJM 5-bus case.
pub const PJM5_EXPENSIVE_BUSES: [i64; 3] = [3, 4, 5];

pub fn two_bus() -> Network {
    load_network(TWO_BUS_JSON).expect("bundled 2bus case is valid")
}

/// Loads the PJM 5-bus case and asserts the 790 MW cheap-to-expensive cut
/// capacity the case was assembled around.
pub fn pjm5() -> Network {
    let net = load_network(PJM5_JSON).expect("bundled pjm5 case is valid");
    let cut: f64 = net
        .lines()
        .iter()
        .filter(|line| {
            PJM5_CHEAP_BUSES.contains(&line.from_bus.0) != PJM5_CHEAP_BUSES.contains(&line.to_bus.0)
        })
        .map(|line| line.limit)
        .filter(|limit| *limit < 1e6)
        .sum();
    assert_eq!(cut, 790.0, "pjm5 cheap-to-expensive cut capacity drifted");
    net
}

/// Resolves a bundled case by name.
pub fn by_name(name: &str) -> Option<Network> {
    match name {
        "2bus" => Some(two_bus()),
        "pjm5" => Some(pjm5()),
        _ => None,
    }
}
