//! p-adic Frobenius structures, canonical forms and local invariants of
//! θ- and Airy connections, computed as truncated series over `Q_p(π)`.

pub mod error;
pub mod padic;
pub mod series;
pub mod fit;
pub mod witt;
pub mod robba;
pub mod ffield;
pub mod charsum;
pub mod matrix;
pub mod lie;
pub mod connection;
pub mod slopes;
pub mod canonical;
pub mod wild;
pub mod acceptance;
pub mod frobenius;

pub use error::{Error, Result};
pub use padic::{Comparison, FieldContext, PAdic, Valuation};
pub use series::PadicSeries;
