//! Virtual test set for the relay in `vied-core`.
//!
//! It solves midline faults on a two-source 500 kV line, synthesises the
//! resulting SV streams, plays them into a relay and times the trip GOOSE
//! messages that come back.

pub mod campaign;
pub mod endpoint;
pub mod fault;
pub mod line;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod stats;
pub mod waveform;

pub use campaign::{run_campaign, run_scenario, CampaignConfig, CampaignOutcome, LatencyRecord, RelayTarget, RunOptions, ScenarioResult, Violation};
pub use endpoint::{RelayEndpoint, SimEndpoint, UdpEndpoint};
pub use fault::{fault_phasors, FaultPhasors, ThreePhase};
pub use line::{LineModel, Source};
pub use oracle::{expected_operation, Expectation, CAMPAIGN_FUNCTIONS};
pub use scenario::{FaultScenario, FaultType, ScenarioMatrix};
pub use stats::LatencyStats;
pub use waveform::{synthesize_waveform, FaultWaveform, Waveform};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("relay: {0}")]
    Relay(String),
}
