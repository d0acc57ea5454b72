//! Twin-RLFD, CLEF and their reference settings.

pub mod clef;
pub mod presets;
pub mod twin;

pub use clef::{Clef, ClefBuild, ClefConfig, Cycle2};
pub use presets::{presets, preset_for, Preset};
pub use twin::{twin_cycle2, TwinRlfd, TwinRlfdConfig, DEFAULT_ALPHA_TARGET, DEFAULT_JITTER};
