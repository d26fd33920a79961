//! Numerical companions to the bounds on `L(n)`: Dickman's function, smooth
//! counts, reciprocal prime sums in progressions, chain and prime-power
//! counts, and per-decade distribution reports.

mod counting;
mod report;
mod rho;

pub use counting::{
    bt_recip_sum, calibrate_bt_constant, calibrate_chain_constant, calibrate_power_constant,
    chain_bound, chain_constant_needed, chain_count, loglog, power_exact_divisor_count,
    prop_bound_eval, smooth_count, ChainCalibration, ChainCalibrationRow, ChainCount,
    PowerCalibration, PowerCalibrationRow, PropBound, RecipSum, SEARCH_LIMIT,
};
pub use report::{
    decade_bounds, distribution_report, fmt_g, DecadeRow, DistributionParams, StatReport,
    CSV_HEADER,
};
pub use rho::{dickman_rho, RhoTable, DEFAULT_STEP, DEFAULT_U_MAX};
