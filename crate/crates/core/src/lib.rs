//! Numerical laboratory for the Muskat slope equation on the torus
//!
//! ```text
//! d_t h = (1/pi) d/dx int  d_x h*(x,a) / (1 + h*(x,a)^2) da,
//! h*(x,a) = (1/a) int_{x-a}^x h,   d_x h*(x,a) = (h(x) - h(x-a)) / a,
//! ```
//!
//! with corner (slope-discontinuity) initial data. Modules follow the
//! construction: spectral operators, initial data, the nonlinearity, the
//! Littlewood-Paley kernel machinery, corner renormalization, the two
//! solvers, and the diagnostics.

pub mod config;
pub mod corner;
pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod initial_data;
pub mod kernels;
pub mod output;
pub mod presets;
pub mod pseudoproduct;
pub mod rhs;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{DyadicBand, Grid, GridFunction, MultiplierSpec, Symmetry};
