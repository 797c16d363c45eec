//! Exact q-series machinery for replicable functions and the Hecke operators of
//! the Fricke extension of Gamma0(2).

pub mod algebra;
pub mod cli;
pub mod cosets;
pub mod error;
pub mod faber;
pub mod familyspec;
pub mod eta;
pub mod ntheory;
pub mod recurrence;
pub mod replication;
pub mod report;
pub mod series;
pub mod suite;

pub use error::{Error, Result};
pub use series::QSeries;
