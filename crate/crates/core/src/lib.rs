//! Fractional-order model fitting.
//!
//! Closed-form solutions of linear Caputo fractional differential equations
//! (Mittag-Leffler growth, a two-compartment absorption/elimination system
//! solved as a double series, and a tape-counter model given by a weakly
//! singular convolution integral) together with their classical first-order
//! counterparts, a box-constrained Levenberg-Marquardt fitter, and numerical
//! fractional operators used to check that the closed forms satisfy their
//! equations.
//!
//! ```
//! use fracfit::{bundled_dataset, ModelSpec, multistart_fit, LmOptions};
//!
//! let data = bundled_dataset("bal").unwrap();
//! let model = ModelSpec::by_name("bal-classical").unwrap();
//! let fit = multistart_fit(&model, &data, 4, 7, &LmOptions::default()).unwrap();
//! assert!(fit.sse < 775.3);
//! ```

pub mod dataio;
pub mod error;
pub mod fitting;
pub mod fracops;
pub mod models;
pub mod quad;
pub mod specfun;

pub use dataio::{bundled_dataset, list_datasets, load_csv, DatasetInfo, TimeSeries};
pub use error::{Error, Result};
pub use fitting::{
    efficiency_gain, latin_hypercube_starts, lm_fit, multistart_fit, sse, FitResult, LmOptions, ParamVector, Termination,
};
pub use fracops::{caputo_derivative, caputo_of_identity, frac_integral, volterra_residual, GridFunction};
pub use models::{BalParams, ModelKind, ModelSpec, ParamDef, PopulationParams, TapeParams};
pub use specfun::{beta, gamma, ln_gamma, mittag_leffler, SeriesConfig};
