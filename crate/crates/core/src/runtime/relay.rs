use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::codec::{
    encode_goose, DatasetSchema, DecodeError, Delivery, DiscardTable, GooseFrame, PrpSender, SvProfile,
};
use crate::dsp::{Phasor, PhasorSet, SignalProcessor};
use crate::protection::{FunctionSettings, ProtectionSuite, SettingsError, SuiteOutput};

use super::config::{ConfigError, RelayConfig};
use super::events::{diff_outputs, RelayEvent};
use super::publisher::GoosePublisher;

/// Where relay time comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    /// Time is the stream sample index divided by the sample rate.
    Virtual,
    /// Monotonic wall clock since construction.
    Wall,
}

/// A published GOOSE message and its two PRP-tagged copies.
#[derive(Debug, Clone, PartialEq)]
pub struct OutboundGoose {
    pub time_ns: u64,
    pub frame: GooseFrame,
    pub lan_a: Vec<u8>,
    pub lan_b: Vec<u8>,
}

/// 10 Hz monitoring snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub timestamp_ns: u64,
    pub sample_index: u64,
    pub frequency_hz: f64,
    pub phasors: [Phasor; 8],
    pub outputs: SuiteOutput,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayStats {
    pub frames: u64,
    pub duplicates: u64,
    pub decode_errors: u64,
    pub ignored: u64,
    pub gaps: u64,
    pub samples: u64,
}

/// What happened to one received frame.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameOutcome {
    Processed,
    /// Second PRP copy.
    Duplicate,
    /// A valid frame for another stream.
    NotSubscribed,
    Malformed(DecodeError),
}

/// The relay pipeline: PRP de-duplication, SV decoding, scaling, signal
/// processing, protection and GOOSE publication. It is a plain state
/// machine; the daemon, the test set and the tests all drive it directly.
pub struct Relay {
    cfg: RelayConfig,
    profile: SvProfile,
    lsb: [f64; 8],
    discard: DiscardTable,
    dsp: SignalProcessor,
    suite: ProtectionSuite,
    last_output: SuiteOutput,
    publisher: GoosePublisher,
    prp: PrpSender,
    schema: DatasetSchema,
    clock: ClockMode,
    started: Instant,
    last_smp_cnt: Option<u16>,
    stream_index: u64,
    measurement_every: u64,
    dsp_fault_active: bool,
    stats: RelayStats,
    outbox: Vec<OutboundGoose>,
    events: Vec<RelayEvent>,
    measurements: Vec<Measurement>,
}

impl Relay {
    pub fn new(cfg: RelayConfig) -> Result<Self, ConfigError> {
        Self::with_clock(cfg, ClockMode::Virtual)
    }

    pub fn with_clock(cfg: RelayConfig, clock: ClockMode) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let fs = cfg.samples_per_second;
        let initial = SuiteOutput::default();
        let epoch = match clock {
            ClockMode::Virtual => 0,
            ClockMode::Wall => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0),
        };
        let (publisher, first) =
            GoosePublisher::with_epoch(&cfg.goose_publication, initial.dataset(), 0, epoch);
        let mut relay = Self {
            profile: SvProfile {
                samples_per_second: fs as u16,
            },
            lsb: cfg.scaling.table(),
            discard: DiscardTable::default(),
            dsp: SignalProcessor::new(&cfg.dsp, cfg.nominal_frequency_hz, fs as f64),
            suite: ProtectionSuite::new(),
            last_output: initial,
            publisher,
            prp: PrpSender::new(),
            schema: DatasetSchema::new(SuiteOutput::dataset_names()),
            clock,
            started: Instant::now(),
            last_smp_cnt: None,
            stream_index: 0,
            measurement_every: (fs / 10).max(1) as u64,
            dsp_fault_active: false,
            stats: RelayStats::default(),
            outbox: Vec::new(),
            events: Vec::new(),
            measurements: Vec::new(),
            cfg,
        };
        relay.emit(first, 0);
        Ok(relay)
    }

    /// Relay time in nanoseconds.
    pub fn now_ns(&self) -> u64 {
        match self.clock {
            ClockMode::Virtual => self.virtual_ns(),
            ClockMode::Wall => self.started.elapsed().as_nanos() as u64,
        }
    }

    fn virtual_ns(&self) -> u64 {
        // Time of the most recently processed sample.
        let idx = self.stream_index.saturating_sub(1);
        ((idx as u128 * 1_000_000_000) / self.cfg.samples_per_second as u128) as u64
    }

    fn emit(&mut self, frame: GooseFrame, time_ns: u64) {
        let bytes = encode_goose(&frame).expect("publication config validated");
        let (a, b) = self.prp.send(&bytes).expect("GOOSE frame fits a PRP payload");
        self.outbox.push(OutboundGoose {
            time_ns,
            frame,
            lan_a: a.to_bytes(),
            lan_b: b.to_bytes(),
        });
    }

    /// Handles one received Ethernet frame, with or without a PRP trailer.
    pub fn handle_frame(&mut self, bytes: &[u8]) -> FrameOutcome {
        self.stats.frames += 1;
        let now = self.now_ns();
        let payload = match self.discard.receive(bytes, now) {
            Delivery::Delivered { payload, .. } => payload,
            Delivery::NonPrp(p) => p,
            Delivery::Discarded => {
                self.stats.duplicates += 1;
                return FrameOutcome::Duplicate;
            }
        };
        let frame = match self.profile.decode(&payload) {
            Ok(f) => f,
            Err(e) => {
                self.stats.decode_errors += 1;
                return FrameOutcome::Malformed(e);
            }
        };
        let sub = &self.cfg.sv_subscription;
        if frame.app_id != sub.app_id || frame.sv_id != sub.sv_id {
            self.stats.ignored += 1;
            return FrameOutcome::NotSubscribed;
        }
        let mut samples = [0.0; 8];
        for (i, s) in samples.iter_mut().enumerate() {
            *s = frame.channels[i] as f64 * self.lsb[i];
        }
        self.process_samples(frame.smp_cnt, &samples);
        FrameOutcome::Processed
    }

    /// Runs one sample (engineering units) through DSP and protection.
    pub fn process_samples(&mut self, smp_cnt: u16, samples: &[f64; 8]) {
        let fs = self.cfg.samples_per_second;
        let step = match self.last_smp_cnt {
            None => 1,
            Some(prev) => {
                let expected = ((prev as u32 + 1) % fs) as u16;
                if smp_cnt != expected {
                    self.stats.gaps += 1;
                    self.events.push(RelayEvent::SampleGap {
                        timestamp_ns: self.now_ns(),
                        sample_index: self.stream_index,
                        expected_smp_cnt: expected,
                        received_smp_cnt: smp_cnt,
                    });
                }
                let delta = (smp_cnt as u32 + fs - prev as u32) % fs;
                delta.max(1) as u64
            }
        };
        self.last_smp_cnt = Some(smp_cnt);
        self.stream_index += step;
        self.stats.samples += 1;
        let now = self.now_ns();

        self.dsp.process(samples);
        match (self.dsp.last_fault(), self.dsp_fault_active) {
            (Some(f), false) => {
                self.dsp_fault_active = true;
                self.events.push(RelayEvent::DspFault {
                    timestamp_ns: now,
                    sample_index: self.stream_index,
                    fault: f.to_string(),
                });
            }
            (None, true) => self.dsp_fault_active = false,
            _ => {}
        }
        let phasors = self.dsp.phasors();
        // Hold protection at rest until the estimator has seen a full cycle.
        let out = if self.stats.samples > self.cfg.samples_per_cycle() as u64 {
            self.suite.step(&self.cfg.settings, phasors, self.dsp.dt())
        } else {
            SuiteOutput::default()
        };
        let mut changed = None;
        if out.dataset() != self.last_output.dataset() {
            diff_outputs(&self.last_output, &out, now, self.stream_index, phasors, &mut self.events);
            changed = self.publisher.update(&out.dataset(), now);
        }
        if self.stats.samples % self.measurement_every == 0 {
            self.measurements.push(Measurement {
                timestamp_ns: now,
                sample_index: self.stream_index,
                frequency_hz: phasors.frequency_hz,
                phasors: phasors.phasors,
                outputs: out,
            });
        }
        self.last_output = out;
        if let Some(f) = changed {
            self.emit(f, now);
        }
        self.poll_at(now);
    }

    fn poll_at(&mut self, now: u64) {
        while let Some(f) = self.publisher.poll(now) {
            self.emit(f, now);
        }
    }

    /// Sends any due retransmissions. Only meaningful with a wall clock;
    /// under the virtual clock time moves only with samples.
    pub fn tick(&mut self) {
        let now = self.now_ns();
        self.poll_at(now);
    }

    /// Replaces the protection settings before the next sample.
    pub fn apply_settings(&mut self, settings: FunctionSettings) -> Result<&FunctionSettings, SettingsError> {
        settings.validate()?;
        self.cfg.settings = settings;
        self.events.push(RelayEvent::SettingsApplied {
            timestamp_ns: self.now_ns(),
            sample_index: self.stream_index,
        });
        Ok(&self.cfg.settings)
    }

    pub fn config(&self) -> &RelayConfig {
        &self.cfg
    }

    pub fn settings(&self) -> &FunctionSettings {
        &self.cfg.settings
    }

    pub fn stats(&self) -> RelayStats {
        self.stats
    }

    pub fn processed_samples(&self) -> u64 {
        self.stats.samples
    }

    pub fn last_output(&self) -> &SuiteOutput {
        &self.last_output
    }

    pub fn phasors(&self) -> &PhasorSet {
        self.dsp.phasors()
    }

    pub fn dataset_schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn publisher(&self) -> &GoosePublisher {
        &self.publisher
    }

    pub fn take_outbox(&mut self) -> Vec<OutboundGoose> {
        std::mem::take(&mut self.outbox)
    }

    pub fn take_events(&mut self) -> Vec<RelayEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn take_measurements(&mut self) -> Vec<Measurement> {
        std::mem::take(&mut self.measurements)
    }

    pub fn has_pending_output(&self) -> bool {
        !self.outbox.is_empty()
    }
}
