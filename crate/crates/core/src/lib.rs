//! Master production scheduling for soft-variety product mixes whose raw
//! materials can only be bought in whole lots.
//!
//! Three solution paths are provided and can be compared side by side:
//!
//! * [`heuristic`]: solve the integer linear model with fractional material
//!   cost, then round purchases up to whole lots with leftover carry-over.
//! * [`search`]: optimize the lot-quantized profit directly with multi-start
//!   local search, in integer or relaxed mode.
//! * [`oracle`]: exhaustive enumeration for tiny instances, used as ground truth.

pub mod error;
pub mod heuristic;
pub mod instance;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod report;
pub mod schedule;
pub mod search;
pub mod simplex;

pub use error::{Error, Result};
pub use instance::{Dimensions, GeneratorRanges, Instance, Interval};
pub use schedule::{ProductionSchedule, ProfitBreakdown};

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

pub(crate) fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![0.0; cols]; rows]
}

/// Column label for product `index`: A..Z, then P27, P28, ...
pub fn product_label(index: usize) -> String {
    if index < 26 {
        ((b'A' + index as u8) as char).to_string()
    } else {
        format!("P{}", index + 1)
    }
}
