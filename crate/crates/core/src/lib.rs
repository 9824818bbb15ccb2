// Negated comparisons are deliberate: they also reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bond;
pub mod cds;
pub mod curves;
pub mod error;
pub mod hedging;
pub mod io;
pub mod math;
pub mod par;
pub mod replication;
pub mod run;

pub use error::{Error, Result};
