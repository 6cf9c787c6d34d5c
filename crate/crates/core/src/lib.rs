//! Sensor placement for detecting and localizing link failures in networks.
//!
//! An influence matrix records which sensors respond to which failure events.
//! Detection asks for a small sensor set covering every detectable event
//! (minimum set cover); localization asks for a small set that separates every
//! pair of events (minimum test cover).
//!
//! ```
//! use faultcover::{fixture::example_matrix, testcover::augmented_greedy};
//!
//! let m = example_matrix();
//! let cover = augmented_greedy(&m).placement.selected;
//! assert_eq!(cover, vec![0, 1, 2, 4]);
//! ```

// NaN must fail the range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod cover;
pub mod error;
pub mod fixture;
pub mod influence;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod placement;
pub mod testcover;
pub mod transient;

pub use error::{Error, Result};
pub use influence::{detection_sets, DetectionSets, InfluenceMatrix};
pub use placement::PlacementResult;
