//! Flow path codes in the virtual counter tree.
//!
//! A code is a base-`m` number with `d` digits; digit `k` (least significant
//! first) is the counter index at level `k`. For `m = 2^s` this is the bit
//! layout `bits[s(k−1)..sk−1]` and node membership is one AND plus one compare.

use crate::error::{config, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathLayout {
    m: u64,
    d: u32,
    shift: Option<u32>,
    // m^(k) for k = 0..=d; m^d may equal 2^64
    powers: Vec<u128>,
}

impl PathLayout {
    pub fn new(m: usize, d: u32) -> Result<Self> {
        if m < 2 {
            return config(format!("rlfd needs m >= 2 counters, got {m}"));
        }
        if d < 1 {
            return config("rlfd depth must be at least 1");
        }
        let m = m as u64;
        let mut powers = Vec::with_capacity(d as usize + 1);
        let mut p: u128 = 1;
        powers.push(p);
        for _ in 0..d {
            p *= m as u128;
            if p > 1u128 << 64 {
                return config(format!("rlfd path code m^d = {m}^{d} exceeds 64 bits"));
            }
            powers.push(p);
        }
        let shift = m.is_power_of_two().then(|| m.trailing_zeros());
        Ok(PathLayout { m, d, shift, powers })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn depth(&self) -> u32 {
        self.d
    }

    pub fn is_binary(&self) -> bool {
        self.shift.is_some()
    }

    /// Truncates a 64-bit hash to `d` digits.
    #[inline]
    pub fn code(&self, h: u64) -> u64 {
        let span = self.powers[self.d as usize];
        if span == 1u128 << 64 {
            h
        } else if self.shift.is_some() {
            h & (span as u64 - 1)
        } else {
            h % span as u64
        }
    }

    /// Low `k−1` digits: the part compared against the ancestor code at level `k`.
    #[inline]
    pub fn prefix(&self, code: u64, k: u32) -> u64 {
        let span = self.powers[k as usize - 1];
        match self.shift {
            Some(_) => code & (span as u64).wrapping_sub(1),
            None => (code as u128 % span) as u64,
        }
    }

    /// Digit `k` (1-based): the counter index at level `k`.
    #[inline]
    pub fn digit(&self, code: u64, k: u32) -> usize {
        match self.shift {
            Some(s) => ((code >> (s * (k - 1))) & (self.m - 1)) as usize,
            None => ((code as u128 / self.powers[k as usize - 1]) % self.m as u128) as usize,
        }
    }

    /// Ancestor code after choosing `index` at level `k`.
    pub fn extend(&self, ancestor: u64, k: u32, index: usize) -> u64 {
        ancestor + (index as u128 * self.powers[k as usize - 1]) as u64
    }

    /// Mask with the low s·(k−1) bits set (binary layouts only).
    pub fn mask(&self, k: u32) -> Option<u64> {
        self.shift.map(|_| (self.powers[k as usize - 1] as u64).wrapping_sub(1))
    }

    /// Counter index of `code` if the flow belongs to the node chosen by `ancestor` at level `k`.
    #[inline]
    pub fn in_loaded_node(&self, code: u64, k: u32, ancestor: u64) -> Option<usize> {
        (self.prefix(code, k) == ancestor).then(|| self.digit(code, k))
    }
}

/// ⌊1.2·log_m(n)⌋ + 1.
pub fn default_depth(m: usize, n: u64) -> u32 {
    if n <= 1 || m < 2 {
        return 1;
    }
    let x = 1.2 * (n as f64).ln() / (m as f64).ln();
    (x + 1e-9).floor() as u32 + 1
}
