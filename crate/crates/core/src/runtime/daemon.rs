//! Threads around a [`Relay`]: the sample pipeline and the station server.
//!
//! The pipeline owns the relay outright. Connection threads talk to it only
//! through a command channel, and it pushes streamed data back through
//! bounded per-connection queues that drop their oldest entry when full, so
//! a slow client never stalls sample processing.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, unbounded, Receiver, RecvTimeoutError, Sender, TrySendError};

use crate::codec::Lan;
use crate::protection::FunctionSettings;

use super::config::RelayConfig;
use super::events::EventLog;
use super::relay::Relay;
use super::station::{
    event_message, handle_station_message, measurement_message, PingInfo, StationBackend, Stream,
};
use super::transport::FrameTransport;

const SUBSCRIBER_QUEUE: usize = 256;
const COMMAND_TIMEOUT: Duration = Duration::from_secs(5);
const RECV_POLL: Duration = Duration::from_millis(1);

#[derive(Clone)]
struct Outbox {
    tx: Sender<String>,
    rx: Receiver<String>,
}

impl Outbox {
    fn new() -> Self {
        let (tx, rx) = bounded(SUBSCRIBER_QUEUE);
        Self { tx, rx }
    }

    /// Queues `line`, evicting the oldest entry if the queue is full.
    fn push_lossy(&self, line: String) {
        let mut line = line;
        loop {
            match self.tx.try_send(line) {
                Ok(()) | Err(TrySendError::Disconnected(_)) => return,
                Err(TrySendError::Full(l)) => {
                    let _ = self.rx.try_recv();
                    line = l;
                }
            }
        }
    }

    fn push(&self, line: String) {
        let _ = self.tx.send_timeout(line, COMMAND_TIMEOUT);
    }
}

enum Command {
    GetConfig(Sender<RelayConfig>),
    ApplySettings(FunctionSettings, Sender<Result<FunctionSettings, String>>),
    Ping(Sender<PingInfo>),
    Subscribe(u64, Vec<Stream>, Outbox),
    Unsubscribe(u64, Vec<Stream>),
    Disconnect(u64),
}

/// Running daemon. Dropping the handle does not stop it; call
/// [`DaemonHandle::shutdown`].
pub struct DaemonHandle {
    station_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl DaemonHandle {
    pub fn station_addr(&self) -> SocketAddr {
        self.station_addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    /// Blocks until the pipeline stops (transport closed).
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

/// Starts the pipeline and the station server. The station listener binds
/// `cfg.station`; port 0 picks a free port.
pub fn spawn(
    relay: Relay,
    transport: Box<dyn FrameTransport>,
    event_log: Option<Box<dyn Write + Send>>,
) -> io::Result<DaemonHandle> {
    let station = &relay.config().station;
    let listener = TcpListener::bind((station.address.as_str(), station.port))?;
    listener.set_nonblocking(true)?;
    let station_addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let (cmd_tx, cmd_rx) = unbounded();

    let pipeline = {
        let stop = Arc::clone(&stop);
        thread::Builder::new()
            .name("vied-pipeline".into())
            .spawn(move || pipeline_loop(relay, transport, event_log, cmd_rx, stop))?
    };
    let server = {
        let stop = Arc::clone(&stop);
        thread::Builder::new()
            .name("vied-station".into())
            .spawn(move || accept_loop(listener, cmd_tx, stop))?
    };
    log::info!("station server listening on {station_addr}");
    Ok(DaemonHandle {
        station_addr,
        stop,
        threads: vec![pipeline, server],
    })
}

fn pipeline_loop(
    mut relay: Relay,
    mut transport: Box<dyn FrameTransport>,
    event_log: Option<Box<dyn Write + Send>>,
    commands: Receiver<Command>,
    stop: Arc<AtomicBool>,
) {
    let started = Instant::now();
    let mut log = event_log.map(EventLog::new);
    let mut subscribers: HashMap<u64, (BTreeSet<Stream>, Outbox)> = HashMap::new();
    while !stop.load(Ordering::Relaxed) {
        while let Ok(cmd) = commands.try_recv() {
            match cmd {
                Command::GetConfig(reply) => {
                    let _ = reply.send(relay.config().clone());
                }
                Command::ApplySettings(s, reply) => {
                    let _ = reply.send(relay.apply_settings(s).cloned().map_err(|e| e.to_string()));
                }
                Command::Ping(reply) => {
                    let _ = reply.send(PingInfo {
                        uptime_s: started.elapsed().as_secs_f64(),
                        samples: relay.processed_samples(),
                    });
                }
                Command::Subscribe(conn, streams, outbox) => {
                    let entry = subscribers.entry(conn).or_insert_with(|| (BTreeSet::new(), outbox));
                    entry.0.extend(streams);
                }
                Command::Unsubscribe(conn, streams) => {
                    if let Some(entry) = subscribers.get_mut(&conn) {
                        for s in streams {
                            entry.0.remove(&s);
                        }
                    }
                }
                Command::Disconnect(conn) => {
                    subscribers.remove(&conn);
                }
            }
        }

        match transport.recv(RECV_POLL) {
            Ok(Some(frame)) => {
                relay.handle_frame(&frame);
            }
            Ok(None) => {}
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                log::info!("transport closed, stopping pipeline");
                break;
            }
            Err(e) => log::warn!("transport receive error: {e}"),
        }
        relay.tick();

        for g in relay.take_outbox() {
            for (lan, bytes) in [(Lan::A, &g.lan_a), (Lan::B, &g.lan_b)] {
                if let Err(e) = transport.send(lan, bytes) {
                    log::warn!("GOOSE send on LAN {lan} failed: {e}");
                }
            }
        }
        let events = relay.take_events();
        if !events.is_empty() {
            if let Some(log) = log.as_mut() {
                for e in &events {
                    if let Err(err) = log.append(e) {
                        log::warn!("event log write failed: {err}");
                    }
                }
                let _ = log.flush();
            }
            for (streams, out) in subscribers.values() {
                if streams.contains(&Stream::Events) {
                    for e in &events {
                        out.push_lossy(event_message(e).to_string());
                    }
                }
            }
        }
        for m in relay.take_measurements() {
            let line = measurement_message(&m).to_string();
            for (streams, out) in subscribers.values() {
                if streams.contains(&Stream::Measurements) {
                    out.push_lossy(line.clone());
                }
            }
        }
    }
}

fn accept_loop(listener: TcpListener, commands: Sender<Command>, stop: Arc<AtomicBool>) {
    let next_id = AtomicU64::new(1);
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let id = next_id.fetch_add(1, Ordering::Relaxed);
                let commands = commands.clone();
                log::info!("station client {peer} connected");
                let spawned = thread::Builder::new()
                    .name(format!("vied-conn-{id}"))
                    .spawn(move || {
                        if let Err(e) = serve_connection(stream, id, commands) {
                            log::debug!("station client {peer}: {e}");
                        }
                    });
                if let Err(e) = spawned {
                    log::warn!("could not spawn connection thread: {e}");
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(20)),
            Err(e) => {
                log::warn!("accept failed: {e}");
                thread::sleep(Duration::from_millis(20));
            }
        }
    }
}

struct ChannelBackend {
    conn: u64,
    commands: Sender<Command>,
    outbox: Outbox,
}

impl ChannelBackend {
    fn ask<T>(&self, make: impl FnOnce(Sender<T>) -> Command) -> Option<T> {
        let (tx, rx) = bounded(1);
        self.commands.send(make(tx)).ok()?;
        match rx.recv_timeout(COMMAND_TIMEOUT) {
            Ok(v) => Some(v),
            Err(RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected) => None,
        }
    }
}

impl StationBackend for ChannelBackend {
    fn config(&mut self) -> RelayConfig {
        self.ask(Command::GetConfig).unwrap_or_default()
    }

    fn apply_settings(&mut self, settings: FunctionSettings) -> Result<FunctionSettings, String> {
        self.ask(|tx| Command::ApplySettings(settings, tx))
            .unwrap_or_else(|| Err("relay pipeline not responding".into()))
    }

    fn ping(&mut self) -> PingInfo {
        self.ask(Command::Ping).unwrap_or(PingInfo {
            uptime_s: 0.0,
            samples: 0,
        })
    }

    fn subscribe(&mut self, streams: &[Stream]) {
        let _ = self
            .commands
            .send(Command::Subscribe(self.conn, streams.to_vec(), self.outbox.clone()));
    }

    fn unsubscribe(&mut self, streams: &[Stream]) {
        let _ = self.commands.send(Command::Unsubscribe(self.conn, streams.to_vec()));
    }
}

fn serve_connection(stream: TcpStream, conn: u64, commands: Sender<Command>) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    let outbox = Outbox::new();
    let mut writer = stream.try_clone()?;
    let out_rx = outbox.rx.clone();
    let writer_thread = thread::spawn(move || {
        for line in out_rx.iter() {
            if writer.write_all(line.as_bytes()).is_err() || writer.write_all(b"\n").is_err() {
                return;
            }
        }
    });
    let mut backend = ChannelBackend {
        conn,
        commands,
        outbox: outbox.clone(),
    };
    let mut result = Ok(());
    for line in BufReader::new(stream).lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                result = Err(e);
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let reply = handle_station_message(&mut backend, &line);
        outbox.push(reply.to_string());
    }
    // The pipeline holds a clone of the outbox while subscribed; release it
    // so the writer sees the queue close.
    let _ = backend.commands.send(Command::Disconnect(conn));
    drop(backend);
    drop(outbox);
    let _ = writer_thread.join();
    result
}
