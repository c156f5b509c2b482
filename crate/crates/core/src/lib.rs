//! Secure distributed hypothesis testing.
//!
//! Exact laws of exchangeable message sequences, the channel constructions
//! that make schemes private, scheme evaluation, private simultaneous
//! message protocols and a numerics lab for the Hellinger-ratio bounds.

pub mod channels;
pub mod engine;
pub mod error;
pub mod lab;
pub mod prob;
pub mod psm;
pub mod rng;

pub use error::{Result, SdhtError};
