//! Frame transports. Every transport delivers whole Ethernet frames; PRP
//! duplication and discard happen in the relay, not here.

mod memory;
#[cfg(target_os = "linux")]
mod raw;
mod udp;

use std::io;
use std::time::Duration;

use crate::codec::Lan;

pub use memory::{memory_pair, MemoryPeer, MemoryTransport};
#[cfg(target_os = "linux")]
pub use raw::RawTransport;
pub use udp::UdpTransport;

pub trait FrameTransport: Send {
    /// Next received frame, or `None` after `timeout`.
    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>>;
    /// Sends `bytes` on `lan`. Transports with one port ignore `lan`.
    fn send(&mut self, lan: Lan, bytes: &[u8]) -> io::Result<()>;
}
