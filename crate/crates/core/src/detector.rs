use crate::error::Result;
use crate::model::{Detection, Nanos, Packet};

/// Resident state of a detector, in counters and table slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub counters: usize,
    pub table_slots: usize,
}

impl std::ops::Add for Footprint {
    type Output = Footprint;
    fn add(self, o: Footprint) -> Footprint {
        Footprint { counters: self.counters + o.counters, table_slots: self.table_slots + o.table_slots }
    }
}

/// A streaming large-flow detector. Packets must arrive in timestamp order and
/// callers drop blacklisted flows before calling `process`.
pub trait Detector: Send {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>>;

    /// Runs timer work due up to `now` (level changes, cycle resets).
    fn advance(&mut self, _now: Nanos) -> Result<()> {
        Ok(())
    }

    fn footprint(&self) -> Footprint;

    fn name(&self) -> &'static str;
}

impl<D: Detector + ?Sized> Detector for Box<D> {
    fn process(&mut self, pkt: &Packet) -> Result<Option<Detection>> {
        (**self).process(pkt)
    }
    fn advance(&mut self, now: Nanos) -> Result<()> {
        (**self).advance(now)
    }
    fn footprint(&self) -> Footprint {
        (**self).footprint()
    }
    fn name(&self) -> &'static str {
        (**self).name()
    }
}
