use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{MacAddr, CURRENT_LSB_A, DEFAULT_SV_APP_ID, MAX_SV_ID_LEN, VOLTAGE_LSB_V};
use crate::dsp::DspSettings;
use crate::protection::{FunctionSettings, SettingsError};
use crate::Channel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Counts-to-engineering-units conversion per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scaling {
    #[serde(rename = "current_lsb_A")]
    pub current_lsb_a: f64,
    #[serde(rename = "voltage_lsb_V")]
    pub voltage_lsb_v: f64,
    /// Per-channel LSB overrides.
    pub overrides: BTreeMap<Channel, f64>,
}

impl Default for Scaling {
    fn default() -> Self {
        Self {
            current_lsb_a: CURRENT_LSB_A,
            voltage_lsb_v: VOLTAGE_LSB_V,
            overrides: BTreeMap::new(),
        }
    }
}

impl Scaling {
    pub fn lsb(&self, ch: Channel) -> f64 {
        match self.overrides.get(&ch) {
            Some(v) => *v,
            None if ch.is_current() => self.current_lsb_a,
            None => self.voltage_lsb_v,
        }
    }

    pub fn table(&self) -> [f64; 8] {
        Channel::ALL.map(|ch| self.lsb(ch))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvSubscription {
    pub sv_id: String,
    pub app_id: u16,
}

impl Default for SvSubscription {
    fn default() -> Self {
        Self {
            sv_id: "VIED_MU0101".into(),
            app_id: DEFAULT_SV_APP_ID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoosePublication {
    pub go_id: String,
    pub gocb_ref: String,
    pub dataset_ref: String,
    pub dst_mac: MacAddr,
    pub src_mac: MacAddr,
    pub app_id: u16,
    pub conf_rev: u32,
    /// Retransmission intervals after a state change, milliseconds.
    pub retransmit_ms: Vec<f64>,
    /// Heartbeat interval once the burst is over, milliseconds.
    pub stable_ms: f64,
}

impl Default for GoosePublication {
    fn default() -> Self {
        Self {
            go_id: "VIED_TRIP".into(),
            gocb_ref: "VIEDPROT/LLN0$GO$gcbTrip".into(),
            dataset_ref: "VIEDPROT/LLN0$dsTrip".into(),
            dst_mac: MacAddr([0x01, 0x0C, 0xCD, 0x01, 0x00, 0x01]),
            src_mac: MacAddr([0x02, 0x00, 0x00, 0x00, 0x0E, 0xD1]),
            app_id: 0x0001,
            conf_rev: 1,
            retransmit_ms: vec![2.0, 4.0, 8.0, 16.0],
            stable_ms: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationBind {
    pub address: String,
    pub port: u16,
}

impl Default for StationBind {
    fn default() -> Self {
        Self {
            address: "127.0.0.1".into(),
            port: 10102,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    /// Frames tunnelled one per UDP datagram, virtual clock.
    Sim,
    /// AF_PACKET sockets on the LAN A/B interfaces, wall clock.
    Raw,
}

impl std::str::FromStr for TransportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim" => Ok(Self::Sim),
            "raw" => Ok(Self::Raw),
            other => Err(format!("unknown transport {other:?} (expected sim or raw)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub kind: TransportKind,
    /// Interface names for raw mode.
    pub lan_a: String,
    pub lan_b: Option<String>,
    /// UDP listen addresses for simulated mode.
    pub sim_listen_a: SocketAddr,
    pub sim_listen_b: Option<SocketAddr>,
    /// Where published GOOSE datagrams go in simulated mode.
    pub sim_peers: Vec<SocketAddr>,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            kind: TransportKind::Sim,
            lan_a: "eth0".into(),
            lan_b: None,
            sim_listen_a: "127.0.0.1:10200".parse().unwrap(),
            sim_listen_b: Some("127.0.0.1:10201".parse().unwrap()),
            sim_peers: vec!["127.0.0.1:10210".parse().unwrap()],
        }
    }
}

/// Full relay configuration. Every section has defaults, so an empty
/// document is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayConfig {
    pub nominal_frequency_hz: f64,
    pub samples_per_second: u32,
    pub scaling: Scaling,
    pub settings: FunctionSettings,
    pub dsp: DspSettings,
    pub sv_subscription: SvSubscription,
    pub goose_publication: GoosePublication,
    pub station: StationBind,
    pub transport: TransportConfig,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            nominal_frequency_hz: 60.0,
            samples_per_second: 4800,
            scaling: Scaling::default(),
            settings: FunctionSettings::default(),
            dsp: DspSettings::default(),
            sv_subscription: SvSubscription::default(),
            goose_publication: GoosePublication::default(),
            station: StationBind::default(),
            transport: TransportConfig::default(),
        }
    }
}

impl RelayConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: RelayConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config always serialises")
    }

    /// Whole samples per nominal cycle.
    pub fn samples_per_cycle(&self) -> u32 {
        (self.samples_per_second as f64 / self.nominal_frequency_hz).round() as u32
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let f = self.nominal_frequency_hz;
        if !(f.is_finite() && f > 0.0) {
            return invalid(format!("nominal_frequency_hz must be > 0, got {f}"));
        }
        let spc = self.samples_per_second as f64 / f;
        if self.samples_per_second == 0 || (spc - spc.round()).abs() > 1e-9 {
            return invalid(format!(
                "samples_per_second {} is not a whole number of samples per {f} Hz cycle",
                self.samples_per_second
            ));
        }
        if self.samples_per_second > u16::MAX as u32 {
            return invalid("samples_per_second exceeds the 16-bit sample counter".into());
        }
        for (ch, lsb) in Channel::ALL.map(|c| (c, self.scaling.lsb(c))) {
            if !(lsb.is_finite() && lsb > 0.0) {
                return invalid(format!("scaling for {ch} must be > 0"));
            }
        }
        if self.sv_subscription.sv_id.len() > MAX_SV_ID_LEN {
            return invalid(format!("sv_id longer than {MAX_SV_ID_LEN} characters"));
        }
        let g = &self.goose_publication;
        if g.retransmit_ms.is_empty() {
            return invalid("retransmit_ms must list at least one interval".into());
        }
        let mut prev = 0.0;
        for &ms in g.retransmit_ms.iter().chain(std::iter::once(&g.stable_ms)) {
            if !(ms.is_finite() && ms > prev) {
                return invalid("retransmission intervals must be positive and strictly increasing up to stable_ms".into());
            }
            prev = ms;
        }
        self.settings.validate()?;
        self.dsp.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }
}
