pub mod ansatz;
pub mod baselines;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod optimize;
pub mod pqa;
pub mod sim;

pub use error::{Error, Result};
