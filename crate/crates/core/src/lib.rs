//! Memory-bounded large-flow detection.
//!
//! Detectors implement [`Detector`] and consume [`Packet`]s in timestamp
//! order. [`sim`] drives them with worst-case traffic and scores the result,
//! [`analysis`] evaluates the closed-form detection and damage bounds, and
//! [`harness`] runs configured experiments and writes CSV.

pub mod analysis;
pub mod baseline;
pub mod detector;
pub mod eardet;
pub mod error;
pub mod harness;
pub mod hash;
pub mod hybrid;
pub mod model;
pub mod rlfd;
pub mod sim;

pub use detector::{Detector, Footprint};
pub use error::{Error, Result};
pub use model::{Blacklist, Detection, FlowId, FlowSpec, LeakyBucket, LinkConfig, Nanos, Packet, Rate};
