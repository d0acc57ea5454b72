//! Comparison detectors: AMF, Flow Memory and their serial hybrid.

pub mod amf;
pub mod amf_fm;
pub mod fm;

pub use amf::{Amf, AmfConfig};
pub use amf_fm::{AmfFm, AmfFmConfig};
pub use fm::{Admission, FlowMemory, FmConfig};
