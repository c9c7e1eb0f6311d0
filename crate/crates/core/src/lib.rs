pub mod channel;
pub mod codec;
pub mod error;
pub mod gf;
pub mod harness;
pub mod hash;
pub mod mac;
pub mod regions;
pub mod rng;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
