//! The relay daemon and the pieces it is built from.
//!
//! [`Relay`] is the deterministic per-sample pipeline. [`daemon`] wraps it
//! with transports, a station-bus server and an event log.

pub mod config;
pub mod daemon;
pub mod events;
pub mod publisher;
pub mod relay;
pub mod station;
pub mod transport;

pub use config::{ConfigError, RelayConfig, TransportKind};
pub use events::{check_causality, EventLog, ProtectionEvent, RelayEvent, Transition};
pub use publisher::GoosePublisher;
pub use relay::{ClockMode, FrameOutcome, Measurement, OutboundGoose, Relay, RelayStats};
pub use station::{handle_station_message, StationBackend};
