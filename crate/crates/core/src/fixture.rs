//! Bundled 8-node, 10-link illustrative instance.

use crate::influence::{load_influence_matrix, InfluenceMatrix};
use crate::network::{parse_network, Network};

/// Influence CSV for the illustrative instance; sensors `1..8`, events `L1..L10`.
pub const EXAMPLE_INFLUENCE_CSV: &str = include_str!("../fixtures/example_influence.csv");

/// Network document with the same 8 nodes and 10 links.
pub const EXAMPLE_NETWORK_JSON: &str = include_str!("../fixtures/example_network.json");

pub fn example_matrix() -> InfluenceMatrix {
    load_influence_matrix(EXAMPLE_INFLUENCE_CSV).expect("bundled fixture parses")
}

pub fn example_network() -> Network {
    parse_network(EXAMPLE_NETWORK_JSON).expect("bundled fixture parses")
}
