//! Discriminant families and the short-interval statistics built on them.

mod bseries;
mod family;
mod report;

pub use bseries::{
    b_index_set, b_series, decay_exponent, l_f_value, BIndex, BValue, IndexWeight, LfkEstimate,
    LFK_FIT_LIMIT,
};
pub use family::{window_bounds, DiscriminantFamily};
pub use report::{
    constant_c_n, default_zero_threshold, first_moment, nonvanishing_count, records_csv,
    resolve_zero_threshold, scan_window, second_moment, MomentOptions, MomentReport,
    NonvanishingReport, SecondMomentReport, DEFAULT_LFK_GRID, MIN_ZERO_THRESHOLD, SCHEMA_VERSION,
};
