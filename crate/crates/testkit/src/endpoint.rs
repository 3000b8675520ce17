//! Where the test set sends SV frames and collects GOOSE replies.

use std::net::SocketAddr;
use std::thread;
use std::time::{Duration, Instant};

use vied_core::runtime::transport::{FrameTransport, UdpTransport};
use vied_core::runtime::{check_causality, Relay, RelayConfig, RelayEvent};

use crate::Error;

/// A GOOSE frame (PRP trailer included) and its arrival time on the
/// waveform time base.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub t_s: f64,
    pub bytes: Vec<u8>,
}

pub trait RelayEndpoint {
    /// Starts a stream whose first sample sits at waveform time `t0_s`.
    fn begin(&mut self, t0_s: f64) -> Result<(), Error>;

    /// Delivers both PRP copies of the SV frame for the sample at `t_s` and
    /// returns whatever GOOSE traffic has arrived since the last call.
    fn push(&mut self, t_s: f64, lan_a: &[u8], lan_b: &[u8]) -> Result<Vec<Received>, Error>;

    /// Ends the stream. The result reports whether the relay's own event
    /// log was causal, when the endpoint can see it.
    fn finish(&mut self) -> Result<Option<Result<(), String>>, Error>;
}

/// A fresh in-process relay per stream, on the virtual clock.
pub struct SimEndpoint {
    cfg: RelayConfig,
    relay: Option<Relay>,
    t0_s: f64,
    events: Vec<RelayEvent>,
    samples: u64,
}

impl SimEndpoint {
    pub fn new(cfg: RelayConfig) -> Self {
        Self {
            cfg,
            relay: None,
            t0_s: 0.0,
            events: Vec::new(),
            samples: 0,
        }
    }

    /// Samples processed over the endpoint's lifetime.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    fn drain(&mut self) -> Vec<Received> {
        let Some(relay) = self.relay.as_mut() else {
            return Vec::new();
        };
        self.events.extend(relay.take_events());
        relay.take_measurements();
        let t0 = self.t0_s;
        relay
            .take_outbox()
            .into_iter()
            .flat_map(|g| {
                let t_s = t0 + g.time_ns as f64 * 1e-9;
                [
                    Received { t_s, bytes: g.lan_a },
                    Received { t_s, bytes: g.lan_b },
                ]
            })
            .collect()
    }
}

impl RelayEndpoint for SimEndpoint {
    fn begin(&mut self, t0_s: f64) -> Result<(), Error> {
        self.relay = Some(Relay::new(self.cfg.clone()).map_err(|e| Error::Relay(e.to_string()))?);
        self.t0_s = t0_s;
        self.events.clear();
        Ok(())
    }

    fn push(&mut self, _t_s: f64, lan_a: &[u8], lan_b: &[u8]) -> Result<Vec<Received>, Error> {
        let relay = self.relay.as_mut().ok_or_else(|| Error::Relay("stream not started".into()))?;
        relay.handle_frame(lan_a);
        relay.handle_frame(lan_b);
        self.samples += 1;
        Ok(self.drain())
    }

    fn finish(&mut self) -> Result<Option<Result<(), String>>, Error> {
        self.drain();
        self.relay = None;
        Ok(Some(check_causality(&self.events)))
    }
}

/// A running `vied --transport sim` daemon reached over UDP. Frames are
/// paced in real time; arrival times come from the wall clock.
pub struct UdpEndpoint {
    lan_a: UdpTransport,
    lan_b: UdpTransport,
    start: Instant,
    t0_s: f64,
}

impl UdpEndpoint {
    /// `listen` is where the relay sends its GOOSE traffic (one of its
    /// configured peers); `relay_a` and `relay_b` are its two LAN sockets.
    pub fn connect(listen: SocketAddr, relay_a: SocketAddr, relay_b: SocketAddr) -> Result<Self, Error> {
        let mut spare = listen;
        spare.set_port(0);
        Ok(Self {
            lan_a: UdpTransport::bind(listen, None, vec![relay_a])?,
            lan_b: UdpTransport::bind(spare, None, vec![relay_b])?,
            start: Instant::now(),
            t0_s: 0.0,
        })
    }

    fn collect(&mut self, out: &mut Vec<Received>) -> Result<(), Error> {
        for lan in [&mut self.lan_a, &mut self.lan_b] {
            while let Some(bytes) = lan.recv(Duration::ZERO)? {
                let t_s = self.t0_s + self.start.elapsed().as_secs_f64();
                out.push(Received { t_s, bytes });
            }
        }
        Ok(())
    }
}

impl RelayEndpoint for UdpEndpoint {
    fn begin(&mut self, t0_s: f64) -> Result<(), Error> {
        self.start = Instant::now();
        self.t0_s = t0_s;
        let mut stale = Vec::new();
        self.collect(&mut stale)
    }

    fn push(&mut self, t_s: f64, lan_a: &[u8], lan_b: &[u8]) -> Result<Vec<Received>, Error> {
        let due = Duration::from_secs_f64((t_s - self.t0_s).max(0.0));
        loop {
            let now = self.start.elapsed();
            if now >= due {
                break;
            }
            if due - now > Duration::from_millis(1) {
                thread::sleep(due - now - Duration::from_micros(500));
            } else {
                std::hint::spin_loop();
            }
        }
        self.lan_a.send(vied_core::codec::Lan::A, lan_a)?;
        self.lan_b.send(vied_core::codec::Lan::B, lan_b)?;
        let mut out = Vec::new();
        self.collect(&mut out)?;
        Ok(out)
    }

    fn finish(&mut self) -> Result<Option<Result<(), String>>, Error> {
        Ok(None)
    }
}
