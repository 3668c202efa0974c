//! Brute-force reference validator, exhaustive minimal-table search at toy
//! sizes, and the parameter sweep harness.

mod brute;
mod search;
mod sweep;

pub use brute::brute_validate;
pub use search::{search_min_table, SearchBudget, SearchOutcome};
pub use sweep::{
    load_schemes, parse_schemes, sweep, write_csv, ParamRange, SchemeSpec, SweepRanges, SweepRow,
    SweepScheme, CSV_HEADER,
};
