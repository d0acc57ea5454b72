//! Reference RLFD and CLEF settings, keyed by total counter budget.

use serde::Deserialize;

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../presets/rlfd_settings.toml");

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct Preset {
    pub m: usize,
    pub t_ell: f64,
    pub single_d: u32,
    pub single_t_c: f64,
    pub twin_d: u32,
    pub twin_t_c1: f64,
    pub twin_t_c2: f64,
}

#[derive(Deserialize)]
struct File {
    preset: Vec<Preset>,
}

pub fn presets() -> Vec<Preset> {
    let f: File = toml::from_str(BUNDLED).expect("bundled preset table parses");
    f.preset
}

pub fn preset_for(m: usize) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.m == m)
        .ok_or_else(|| Error::Config(format!("no preset for m = {m}; available: 20, 40, 70, 100, 150, 200, 400")))
}
