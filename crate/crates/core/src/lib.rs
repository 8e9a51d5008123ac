//! Best subset selection under an exact cardinality constraint
//! `min l(beta) s.t. |beta|_0 = k` for linear, logistic and Cox
//! proportional-hazards models.
//!
//! The solver is a primal-dual active set iteration ([`pdas::pdas`]); the
//! subset size is chosen either by sweeping `k` and scoring with AIC, BIC or
//! EBIC ([`tuning::spdas`]) or by a golden-section search for the elbow of
//! the loss curve ([`tuning::gpdas`]).
//!
//! ```
//! use pdas_core::{datagen, standardize, tuning, Family, ModelFamily};
//!
//! let cfg = datagen::GenConfig::new(Family::Gaussian, 100, 10, 2, 7);
//! let data = datagen::generate(&cfg).unwrap();
//! let std = standardize(&data.dataset).unwrap();
//! let family = ModelFamily::gaussian();
//! let (_, report) = tuning::fit_one(&family, &std, 2, &[], 20).unwrap();
//! assert_eq!(report.active_set, data.support);
//! ```

pub mod data;
pub mod datagen;
pub mod error;
pub mod family;
mod linalg;
pub mod metrics;
pub mod oracle;
pub mod pdas;
pub mod tuning;

pub use data::{destandardize_coefficients, load_csv, standardize, CsvOptions, Dataset, Family, Response, StandardizedDataset};
pub use error::{Error, Result};
pub use family::{CoefficientModel, ModelFamily};
pub use pdas::{pdas, select_top_k, PdasOutput, PrimalDualState};
pub use tuning::{
    criteria, gpdas, spdas, Criterion, CriterionValues, FitPath, GoldenSectionTrace, Method, SelectionReport,
};
