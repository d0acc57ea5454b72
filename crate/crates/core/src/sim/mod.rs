//! Worst-case traffic generation, the event loop and damage scoring.

pub mod damage;
pub mod engine;
pub mod trace;
pub mod traffic;

pub use damage::{fp_damage, overuse, DamageReport};
pub use engine::{replay, simulate, FlowRecord, Scorer, SimConfig, SimOutcome};
pub use traffic::{
    attack_id, gen_attack, gen_background, is_attack, AttackFlow, AttackPattern, BackgroundConfig, ConstantFlow,
    ATTACK_BIT, DEFAULT_LEGIT_PACKET,
};
