//! Exact q-expansions and Hecke eigenform coefficient tables.

mod eigenform;
pub mod io;
mod level32;
pub mod qseries;

pub use eigenform::{
    delta_coefficients, delta_series, hecke_extend, Eigenform, FormInfo, DELTA_DEFAULT_CAP,
    LEVEL32_DEFAULT_CAP,
};
pub use io::{
    load_coefficients, read_coefficients, save_coefficients, write_coefficients, CoefficientHeader,
};
pub use level32::{level32_ap, level32_ap_by_counting, level32_form, level32_series, LEVEL32};
pub use qseries::{
    eta_quotient, eta_series, sparse_product, theta_series, EtaFactor, IntegerQSeries,
    SparseQSeries,
};
