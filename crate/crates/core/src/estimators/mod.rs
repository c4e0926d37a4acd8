//! Maximum-likelihood binary-choice estimators with clustered inference.

mod binary;
mod newton;
pub mod normal;
mod re_probit;
mod result;
mod sandwich;
mod spec;
mod stats;

pub use binary::{fit, fit_logit, fit_probit, fit_relogit, logit_loglik, probit_loglik, LogLik};
pub use re_probit::{fit_re_probit, gauss_hermite, re_probit_loglik};
pub use result::{stars, write_comparison_csv, Coefficient, Diagnostics, FitResult, VarianceComponent};
pub use sandwich::{clustered_sandwich, robust_sandwich};
pub use spec::{ClusterKey, Estimator, ModelSpec, RouteFilter, SampleFilter, SpecFile};
pub use stats::{coefficient_equality_test, fit_stats, EqualityRow, EqualityTest, FitStats};

pub use newton::NewtonSettings;
