//! Desk-scale reproductions: rate studies, lower bounds, the inequality
//! suite and the oracle cross-check.

pub mod lower_bound;
pub mod oracle_suite;
pub mod quadrature_check;
pub mod rate;
pub mod residual;
pub mod suite;

pub use lower_bound::{run_lower_bound_check, LowerBoundReport, LowerBoundSetup};
pub use oracle_suite::{compare_case, run_oracle_suite, OracleComparison};
pub use quadrature_check::{quadrature_doubling, run_quadrature_checks, QuadratureCheck};
pub use rate::{fit_power_law, powers_of_two, run_rate_study, ProbeSpacing, RateFit, RatePoint, RateReport, RateStudy};
pub use residual::ResidualInstance;
pub use suite::{run_bound_suite, SuiteConfig, SuiteReport};
