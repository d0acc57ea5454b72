//! Text traces: one `flow_id,timestamp_ns,size_bytes` line per packet, LF
//! terminated, optional header, timestamps non-decreasing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Nanos, Packet};

pub const HEADER: &str = "flow_id,timestamp_ns,size_bytes";

/// Streams packets from a trace, checking format and order.
pub struct TraceReader<R> {
    lines: std::io::Lines<R>,
    line: u64,
    last: Nanos,
    max_packet: u32,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(r: R, max_packet: u32) -> Self {
        TraceReader { lines: r.lines(), line: 0, last: 0, max_packet }
    }

    fn parse(&self, s: &str) -> Result<Packet> {
        let err = |msg: String| Error::Parse { line: self.line, msg };
        let mut it = s.split(',');
        let mut field = |name: &str| {
            it.next()
                .map(str::trim)
                .filter(|f| !f.is_empty())
                .ok_or_else(|| err(format!("missing {name}")))
        };
        let flow = field("flow_id")?;
        let ts = field("timestamp_ns")?;
        let size = field("size_bytes")?;
        if it.next().is_some() {
            return Err(err("expected 3 fields".into()));
        }
        let flow: u64 = flow.parse().map_err(|e| err(format!("flow_id {flow:?}: {e}")))?;
        let ts: u64 = ts.parse().map_err(|e| err(format!("timestamp_ns {ts:?}: {e}")))?;
        let size: u32 = size.parse().map_err(|e| err(format!("size_bytes {size:?}: {e}")))?;
        if size == 0 || size > self.max_packet {
            return Err(err(format!("size_bytes {size} outside 1..={}", self.max_packet)));
        }
        Ok(Packet::new(flow, size, ts))
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<Packet>;

    fn next(&mut self) -> Option<Result<Packet>> {
        loop {
            let raw = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            let s = raw.trim_end_matches('\r');
            if s.trim().is_empty() || (self.line == 1 && s.trim() == HEADER) {
                continue;
            }
            let p = match self.parse(s) {
                Ok(p) => p,
                Err(e) => return Some(Err(e)),
            };
            if p.arrival < self.last {
                return Some(Err(Error::Parse {
                    line: self.line,
                    msg: format!("timestamp {} before previous {}", p.arrival, self.last),
                }));
            }
            self.last = p.arrival;
            return Some(Ok(p));
        }
    }
}

pub fn open_trace(path: &Path, max_packet: u32) -> Result<TraceReader<BufReader<File>>> {
    Ok(TraceReader::new(BufReader::new(File::open(path)?), max_packet))
}

pub fn read_trace(path: &Path, max_packet: u32) -> Result<Vec<Packet>> {
    open_trace(path, max_packet)?.collect()
}

pub fn write_trace<'a>(w: impl Write, packets: impl IntoIterator<Item = &'a Packet>) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{HEADER}")?;
    for p in packets {
        writeln!(w, "{},{},{}", p.flow.0, p.arrival, p.size)?;
    }
    w.flush()?;
    Ok(())
}
