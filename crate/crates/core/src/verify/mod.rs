//! Checks of exchangeability, c.i.d. and stationarity.
//!
//! Finite alphabets are checked exactly by enumeration; real-valued density
//! strategies by quadrature; samplers by Kolmogorov-Smirnov tests and
//! empirical characteristic functions.

pub mod exact;
pub mod montecarlo;
pub mod quadrature;
pub mod report;

pub use exact::{
    check_cid, check_exchangeability, check_stationarity, conditional_exchangeability_report, exchangeability_report,
    stationarity_report, stop_block_report, EventScope,
};
pub use montecarlo::{empirical_cf_distance, ks_one_sample, ks_two_sample, sample_seeded, KsOutcome};
pub use quadrature::{check_cid_quadrature, QuadratureCheck};
pub use report::{CheckKind, Method, Verdict, VerificationReport, Witness};
