//! Parallel Redundancy Protocol at frame level.
//!
//! Every frame is sent on two independent LANs with a six-byte redundancy
//! control trailer (RCT) appended:
//!
//! ```text
//! seq_nr:16 | lan_id:4 | lsdu_size:12 | 0x88FB
//! ```
//!
//! `lsdu_size` counts the frame after the two MAC addresses, trailer
//! included. A receiver delivers the first copy of each `(source, seq_nr)`
//! and discards the second.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::ethernet::MacAddr;

pub const PRP_SUFFIX: u16 = 0x88FB;
pub const PRP_TRAILER_LEN: usize = 6;
pub const MAX_PRP_PAYLOAD: usize = 1470;
/// Default duplicate-discard window.
pub const DEFAULT_WINDOW_NS: u64 = 400_000_000;
/// Sequence numbers remembered per source.
pub const DEFAULT_WINDOW_ENTRIES: usize = 1024;

const MAC_HEADER_LEN: usize = 12;
const MIN_PAYLOAD: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lan {
    A,
    B,
}

impl Lan {
    fn id(self) -> u8 {
        match self {
            Lan::A => 0xA,
            Lan::B => 0xB,
        }
    }

    fn from_id(id: u8) -> Option<Self> {
        match id {
            0xA => Some(Lan::A),
            0xB => Some(Lan::B),
            _ => None,
        }
    }
}

impl fmt::Display for Lan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lan::A => "A",
            Lan::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrpError {
    #[error("payload of {0} bytes exceeds the {MAX_PRP_PAYLOAD}-byte PRP limit")]
    PayloadTooLarge(usize),
    #[error("payload of {0} bytes is shorter than an Ethernet header")]
    PayloadTooShort(usize),
}

/// A frame tagged for one of the two LANs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrpFrame {
    pub payload: Vec<u8>,
    pub lan: Lan,
    pub seq_nr: u16,
    pub lsdu_size: u16,
}

impl PrpFrame {
    fn new(payload: Vec<u8>, lan: Lan, seq_nr: u16) -> Self {
        let lsdu_size = (payload.len() - MAC_HEADER_LEN + PRP_TRAILER_LEN) as u16;
        Self {
            payload,
            lan,
            seq_nr,
            lsdu_size,
        }
    }

    pub fn source(&self) -> MacAddr {
        let mut mac = [0u8; 6];
        mac.copy_from_slice(&self.payload[6..12]);
        MacAddr(mac)
    }

    /// Payload with the redundancy trailer appended.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + PRP_TRAILER_LEN);
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.seq_nr.to_be_bytes());
        let word = ((self.lan.id() as u16) << 12) | (self.lsdu_size & 0x0FFF);
        out.extend_from_slice(&word.to_be_bytes());
        out.extend_from_slice(&PRP_SUFFIX.to_be_bytes());
        out
    }

    /// Strips a valid trailer. Returns `None` when the bytes do not end in a
    /// consistent RCT, i.e. the frame is not a PRP frame.
    pub fn parse(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < MIN_PAYLOAD + PRP_TRAILER_LEN {
            return None;
        }
        let n = bytes.len();
        let suffix = u16::from_be_bytes([bytes[n - 2], bytes[n - 1]]);
        if suffix != PRP_SUFFIX {
            return None;
        }
        let seq_nr = u16::from_be_bytes([bytes[n - 6], bytes[n - 5]]);
        let word = u16::from_be_bytes([bytes[n - 4], bytes[n - 3]]);
        let lan = Lan::from_id((word >> 12) as u8)?;
        let lsdu_size = word & 0x0FFF;
        if lsdu_size as usize != n - MAC_HEADER_LEN {
            return None;
        }
        Some(Self {
            payload: bytes[..n - PRP_TRAILER_LEN].to_vec(),
            lan,
            seq_nr,
            lsdu_size,
        })
    }
}

/// Duplicates `payload` into the LAN A and LAN B copies for `seq_nr`.
pub fn prp_send(payload: &[u8], seq_nr: u16) -> Result<(PrpFrame, PrpFrame), PrpError> {
    if payload.len() > MAX_PRP_PAYLOAD {
        return Err(PrpError::PayloadTooLarge(payload.len()));
    }
    if payload.len() < MIN_PAYLOAD {
        return Err(PrpError::PayloadTooShort(payload.len()));
    }
    Ok((
        PrpFrame::new(payload.to_vec(), Lan::A, seq_nr),
        PrpFrame::new(payload.to_vec(), Lan::B, seq_nr),
    ))
}

/// Sending side of a PRP node: owns the 16-bit sequence counter.
#[derive(Debug, Clone, Default)]
pub struct PrpSender {
    next_seq: u16,
}

impl PrpSender {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(seq_nr: u16) -> Self {
        Self { next_seq: seq_nr }
    }

    pub fn send(&mut self, payload: &[u8]) -> Result<(PrpFrame, PrpFrame), PrpError> {
        let pair = prp_send(payload, self.next_seq)?;
        self.next_seq = self.next_seq.wrapping_add(1);
        Ok(pair)
    }
}

/// Outcome of handing a received frame to the [`DiscardTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delivery {
    /// First copy of a PRP frame; the trailer has been removed.
    Delivered { payload: Vec<u8>, lan: Lan, seq_nr: u16 },
    /// Second copy of an already delivered frame.
    Discarded,
    /// No valid trailer: passed up unchanged.
    NonPrp(Vec<u8>),
}

#[derive(Debug, Default)]
struct SourceWindow {
    order: VecDeque<(u16, u64)>,
    seen: HashSet<u16>,
}

/// Duplicate-discard state of one receiver.
///
/// Entries are forgotten once they are older than the time window or once
/// more than the configured number of newer sequence numbers have arrived
/// from the same source, whichever happens first.
#[derive(Debug)]
pub struct DiscardTable {
    window_ns: u64,
    max_entries: usize,
    sources: HashMap<MacAddr, SourceWindow>,
}

impl Default for DiscardTable {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW_NS, DEFAULT_WINDOW_ENTRIES)
    }
}

impl DiscardTable {
    pub fn new(window_ns: u64, max_entries: usize) -> Self {
        Self {
            window_ns,
            max_entries: max_entries.max(1),
            sources: HashMap::new(),
        }
    }

    /// Processes one received frame at time `now_ns`.
    pub fn receive(&mut self, bytes: &[u8], now_ns: u64) -> Delivery {
        match PrpFrame::parse(bytes) {
            Some(frame) => self.receive_frame(frame, now_ns),
            None => Delivery::NonPrp(bytes.to_vec()),
        }
    }

    pub fn receive_frame(&mut self, frame: PrpFrame, now_ns: u64) -> Delivery {
        let window = self.sources.entry(frame.source()).or_default();
        while let Some(&(seq, t)) = window.order.front() {
            if now_ns.saturating_sub(t) > self.window_ns || window.order.len() >= self.max_entries {
                window.order.pop_front();
                window.seen.remove(&seq);
            } else {
                break;
            }
        }
        if window.seen.contains(&frame.seq_nr) {
            return Delivery::Discarded;
        }
        window.seen.insert(frame.seq_nr);
        window.order.push_back((frame.seq_nr, now_ns));
        Delivery::Delivered {
            payload: frame.payload,
            lan: frame.lan,
            seq_nr: frame.seq_nr,
        }
    }

    pub fn clear(&mut self) {
        self.sources.clear();
    }
}
