use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::thread;
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError};

use super::FrameTransport;
use crate::codec::{Lan, MAX_FRAME_LEN};

/// Ethernet frames tunnelled one per UDP datagram, one socket per LAN.
pub struct UdpTransport {
    sockets: Vec<UdpSocket>,
    peers: Vec<SocketAddr>,
    rx: Receiver<Vec<u8>>,
}

impl UdpTransport {
    pub fn bind(lan_a: SocketAddr, lan_b: Option<SocketAddr>, peers: Vec<SocketAddr>) -> io::Result<Self> {
        let mut sockets = vec![UdpSocket::bind(lan_a)?];
        if let Some(b) = lan_b {
            sockets.push(UdpSocket::bind(b)?);
        }
        let (tx, rx) = unbounded();
        for sock in &sockets {
            let sock = sock.try_clone()?;
            let tx = tx.clone();
            thread::Builder::new().name("udp-rx".into()).spawn(move || {
                let mut buf = vec![0u8; MAX_FRAME_LEN + 64];
                loop {
                    match sock.recv_from(&mut buf) {
                        Ok((n, _)) => {
                            if tx.send(buf[..n].to_vec()).is_err() {
                                return;
                            }
                        }
                        Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                        Err(e) => {
                            log::warn!("udp receive failed: {e}");
                            return;
                        }
                    }
                }
            })?;
        }
        Ok(Self { sockets, peers, rx })
    }

    pub fn local_addrs(&self) -> io::Result<Vec<SocketAddr>> {
        self.sockets.iter().map(|s| s.local_addr()).collect()
    }
}

impl FrameTransport for UdpTransport {
    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        match self.rx.recv_timeout(timeout) {
            Ok(f) => Ok(Some(f)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(io::Error::new(io::ErrorKind::BrokenPipe, "receivers stopped")),
        }
    }

    fn send(&mut self, lan: Lan, bytes: &[u8]) -> io::Result<()> {
        let sock = match lan {
            Lan::B if self.sockets.len() > 1 => &self.sockets[1],
            _ => &self.sockets[0],
        };
        for peer in &self.peers {
            sock.send_to(bytes, peer)?;
        }
        Ok(())
    }
}
