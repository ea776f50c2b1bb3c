pub mod adversary;
pub mod channel;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
