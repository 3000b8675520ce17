use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;

use vied_core::runtime::daemon;
use vied_core::runtime::transport::{FrameTransport, UdpTransport};
use vied_core::runtime::{ClockMode, Relay, RelayConfig, TransportKind};

/// Virtual IED protection relay.
#[derive(Parser, Debug)]
#[command(name = "vied", version)]
struct Args {
    /// Relay configuration (TOML). Defaults apply to anything left out.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured transport.
    #[arg(long)]
    transport: Option<TransportKind>,
    /// Override the station-bus TCP port.
    #[arg(long)]
    station_port: Option<u16>,
    /// Append protection events to this file, one JSON object per line.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn open_transport(cfg: &RelayConfig) -> Result<(Box<dyn FrameTransport>, ClockMode)> {
    let t = &cfg.transport;
    match t.kind {
        TransportKind::Sim => {
            let udp = UdpTransport::bind(t.sim_listen_a, t.sim_listen_b, t.sim_peers.clone())
                .context("binding simulated transport sockets")?;
            Ok((Box::new(udp), ClockMode::Virtual))
        }
        TransportKind::Raw => open_raw(cfg),
    }
}

#[cfg(target_os = "linux")]
fn open_raw(cfg: &RelayConfig) -> Result<(Box<dyn FrameTransport>, ClockMode)> {
    let t = &cfg.transport;
    let raw = vied_core::runtime::transport::RawTransport::open(&t.lan_a, t.lan_b.as_deref())
        .with_context(|| format!("opening raw sockets on {} (needs CAP_NET_RAW)", t.lan_a))?;
    Ok((Box::new(raw), ClockMode::Wall))
}

#[cfg(not(target_os = "linux"))]
fn open_raw(_: &RelayConfig) -> Result<(Box<dyn FrameTransport>, ClockMode)> {
    bail!("raw Ethernet transport is only available on Linux")
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let mut cfg = RelayConfig::load(&args.config)?;
    if let Some(kind) = args.transport {
        cfg.transport.kind = kind;
    }
    if let Some(port) = args.station_port {
        cfg.station.port = port;
    }
    let (transport, clock) = open_transport(&cfg)?;
    let event_log: Option<Box<dyn Write + Send>> = match &args.log {
        Some(path) => {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("opening event log {}", path.display()))?;
            Some(Box::new(BufWriter::new(f)))
        }
        None => None,
    };
    let relay = Relay::with_clock(cfg, clock)?;
    let handle = daemon::spawn(relay, transport, event_log)?;
    log::info!("vied running; station protocol on {}", handle.station_addr());
    handle.wait();
    bail!("relay pipeline stopped")
}
