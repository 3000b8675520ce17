use std::io;
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender};

use super::FrameTransport;
use crate::codec::Lan;

/// In-process transport, used by tests and embedded test sets.
pub struct MemoryTransport {
    rx: Receiver<Vec<u8>>,
    tx: Sender<(Lan, Vec<u8>)>,
}

/// The far end of a [`MemoryTransport`].
#[derive(Clone)]
pub struct MemoryPeer {
    pub tx: Sender<Vec<u8>>,
    pub rx: Receiver<(Lan, Vec<u8>)>,
}

pub fn memory_pair() -> (MemoryTransport, MemoryPeer) {
    let (in_tx, in_rx) = unbounded();
    let (out_tx, out_rx) = unbounded();
    (
        MemoryTransport { rx: in_rx, tx: out_tx },
        MemoryPeer { tx: in_tx, rx: out_rx },
    )
}

impl FrameTransport for MemoryTransport {
    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        match self.rx.recv_timeout(timeout) {
            Ok(f) => Ok(Some(f)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(io::Error::new(io::ErrorKind::BrokenPipe, "peer closed")),
        }
    }

    fn send(&mut self, lan: Lan, bytes: &[u8]) -> io::Result<()> {
        self.tx
            .send((lan, bytes.to_vec()))
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer closed"))
    }
}
