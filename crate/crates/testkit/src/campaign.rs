//! Repeated fault playback against a relay and latency bookkeeping.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vied_core::codec::{decode_goose, encode_sv, DatasetSchema, Delivery, DiscardTable, PrpSender, SampledValueFrame};
use vied_core::protection::{FunctionId, SuiteOutput};
use vied_core::runtime::RelayConfig;
use vied_core::Channel;

use crate::endpoint::{Received, RelayEndpoint, SimEndpoint, UdpEndpoint};
use crate::fault::fault_phasors;
use crate::line::LineModel;
use crate::oracle::{expected_operation, Expectation, CAMPAIGN_FUNCTIONS};
use crate::scenario::{FaultScenario, ScenarioMatrix};
use crate::waveform::FaultWaveform;
use crate::Error;

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub line: LineModel,
    pub matrix: ScenarioMatrix,
    /// Relay configuration: used to build simulated relays, and its
    /// settings feed the oracle in every mode.
    pub relay: RelayConfig,
    pub repeats: usize,
    pub seed: u64,
    /// Healthy signal before the first inception opportunity.
    pub prefault_s: f64,
    /// Gaussian measurement noise relative to rated values; `None` for a
    /// noiseless record.
    pub noise_snr_db: Option<f64>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            line: LineModel::default(),
            matrix: ScenarioMatrix::default(),
            relay: RelayConfig::default(),
            repeats: 50,
            seed: 1,
            prefault_s: 1.0,
            noise_snr_db: Some(60.0),
        }
    }
}

/// One row of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRecord {
    pub scenario_id: String,
    pub function: FunctionId,
    pub repeat: usize,
    /// Inception to first trip GOOSE; `None` is a no-operation.
    pub t_operate_s: Option<f64>,
    pub t_expected_s: Option<f64>,
    pub t_excess_s: Option<f64>,
    pub operated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    StNumRegressed { repeat: usize, from: u32, to: u32 },
    FalseTrip { repeat: usize, function: FunctionId, t_s: f64 },
    Causality { repeat: usize, message: String },
    Undecodable { repeat: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_id: String,
    pub scenario: FaultScenario,
    pub expectations: [Expectation; 4],
    pub records: Vec<LatencyRecord>,
    pub violations: Vec<Violation>,
    pub samples: u64,
}

impl ScenarioResult {
    pub fn expectation(&self, f: FunctionId) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.function == f)
    }
}

/// Which relay the campaign drives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelayTarget {
    Sim,
    Udp {
        listen: SocketAddr,
        relay_a: SocketAddr,
        relay_b: SocketAddr,
    },
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub target: RelayTarget,
    /// Run scenarios concurrently, each with its own simulated relay.
    pub parallel: bool,
    /// Per-scenario results are kept here for `resume`.
    pub out_dir: Option<PathBuf>,
    pub resume: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            target: RelayTarget::Sim,
            parallel: false,
            out_dir: None,
            resume: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub results: Vec<ScenarioResult>,
    pub elapsed_s: f64,
    pub resumed: usize,
}

impl CampaignOutcome {
    pub fn records(&self) -> impl Iterator<Item = &LatencyRecord> {
        self.results.iter().flat_map(|r| &r.records)
    }

    pub fn samples(&self) -> u64 {
        self.results.iter().map(|r| r.samples).sum()
    }
}

/// Streams one scenario `cfg.repeats` times. `index` is the scenario's
/// position in the campaign and selects its random streams.
pub fn run_scenario(
    cfg: &CampaignConfig,
    index: usize,
    scenario: &FaultScenario,
    endpoint: &mut dyn RelayEndpoint,
) -> Result<ScenarioResult, Error> {
    let phasors = fault_phasors(&cfg.line, scenario)?;
    let expectations = expected_operation(&cfg.relay.settings, &phasors.fault, scenario.duration_s);
    let wave = FaultWaveform::new(&phasors, scenario, cfg.line.frequency_hz, cfg.prefault_s);
    let mut player = Player::new(cfg)?;
    let mut result = ScenarioResult {
        scenario_id: scenario.id(),
        scenario: *scenario,
        expectations,
        records: Vec::with_capacity(cfg.repeats * CAMPAIGN_FUNCTIONS.len()),
        violations: Vec::new(),
        samples: 0,
    };
    for repeat in 0..cfg.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(((index as u64) << 32) | repeat as u64);
        let trips = player.play(&wave, repeat, &mut rng, endpoint, &mut result)?;
        for (k, e) in expectations.iter().enumerate() {
            let t_operate_s = trips[k].map(|t| t - wave.inception_s());
            result.records.push(LatencyRecord {
                scenario_id: result.scenario_id.clone(),
                function: e.function,
                repeat,
                t_operate_s,
                t_expected_s: e.t_expected_s,
                t_excess_s: t_operate_s.zip(e.t_expected_s).map(|(a, b)| a - b),
                operated: t_operate_s.is_some(),
            });
        }
    }
    Ok(result)
}

/// Per-scenario playback state carried across repeats: SV sample counter
/// and PRP sequence numbers keep running as they would on a real bus.
struct Player {
    fs: f64,
    lsb: [f64; 8],
    noise: Option<[Normal<f64>; 8]>,
    sender: PrpSender,
    smp_cnt: u32,
    schema: DatasetSchema,
    trip_index: [usize; 4],
}

impl Player {
    fn new(cfg: &CampaignConfig) -> Result<Self, Error> {
        let rated = &cfg.relay.settings.rated;
        let noise = match cfg.noise_snr_db {
            Some(db) => {
                let k = 10f64.powf(-db / 20.0);
                let sigma = |ch: Channel| if ch.is_current() { rated.current_a * k } else { rated.voltage_v * k };
                let mut n = [Normal::new(0.0, 1.0).unwrap(); 8];
                for ch in Channel::ALL {
                    n[ch.index()] = Normal::new(0.0, sigma(ch)).map_err(|e| Error::Config(e.to_string()))?;
                }
                Some(n)
            }
            None => None,
        };
        let schema = DatasetSchema::new(SuiteOutput::dataset_names());
        let trip_index = CAMPAIGN_FUNCTIONS.map(|f| schema.position(&format!("{}.trip", f.name())).expect("trip flag in dataset"));
        Ok(Self {
            fs: cfg.relay.samples_per_second as f64,
            lsb: cfg.relay.scaling.table(),
            noise,
            sender: PrpSender::new(),
            smp_cnt: 0,
            schema,
            trip_index,
        })
    }

    /// Plays one repeat and returns the arrival time of the first trip of
    /// each campaign function after inception.
    fn play(
        &mut self,
        wave: &FaultWaveform,
        repeat: usize,
        rng: &mut ChaCha8Rng,
        endpoint: &mut dyn RelayEndpoint,
        result: &mut ScenarioResult,
    ) -> Result<[Option<f64>; 4], Error> {
        // The sampling grid is not phase-locked to the fault record.
        let t0 = rng.random::<f64>() / self.fs;
        let n = ((wave.end_s() - t0) * self.fs).ceil() as usize;
        let mut discard = DiscardTable::default();
        let mut last: Option<(u32, Vec<bool>)> = None;
        let mut trips = [None; 4];
        let base = SampledValueFrame::default();
        let fs_count = self.fs as u32;
        endpoint.begin(t0)?;
        for k in 0..n {
            let t = t0 + k as f64 / self.fs;
            let mut s = wave.eval(t);
            if let Some(noise) = &self.noise {
                for (x, d) in s.iter_mut().zip(noise) {
                    *x += d.sample(rng);
                }
            }
            let frame = SampledValueFrame {
                smp_cnt: (self.smp_cnt % fs_count) as u16,
                channels: std::array::from_fn(|ch| (s[ch] / self.lsb[ch]).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32),
                ..base.clone()
            };
            self.smp_cnt = (self.smp_cnt + 1) % fs_count;
            let bytes = encode_sv(&frame).map_err(|e| Error::Relay(e.to_string()))?;
            let (a, b) = self.sender.send(&bytes).map_err(|e| Error::Relay(e.to_string()))?;
            for r in endpoint.push(t, &a.to_bytes(), &b.to_bytes())? {
                self.receive(r, wave.inception_s(), repeat, &mut discard, &mut last, &mut trips, result);
            }
            if trips.iter().all(Option::is_some) {
                break;
            }
        }
        if let Some(Err(message)) = endpoint.finish()? {
            result.violations.push(Violation::Causality { repeat, message });
        }
        result.samples += n as u64;
        Ok(trips)
    }

    #[allow(clippy::too_many_arguments)]
    fn receive(
        &self,
        r: Received,
        inception_s: f64,
        repeat: usize,
        discard: &mut DiscardTable,
        last: &mut Option<(u32, Vec<bool>)>,
        trips: &mut [Option<f64>; 4],
        result: &mut ScenarioResult,
    ) {
        let now_ns = (r.t_s.max(0.0) * 1e9) as u64;
        let payload = match discard.receive(&r.bytes, now_ns) {
            Delivery::Delivered { payload, .. } => payload,
            Delivery::NonPrp(payload) => payload,
            Delivery::Discarded => return,
        };
        let g = match decode_goose(&payload) {
            Ok(g) if g.values.len() == self.schema.len() => g,
            Ok(g) => {
                let message = format!("dataset of {} entries, expected {}", g.values.len(), self.schema.len());
                result.violations.push(Violation::Undecodable { repeat, message });
                return;
            }
            Err(e) => {
                result.violations.push(Violation::Undecodable { repeat, message: e.to_string() });
                return;
            }
        };
        let previous = last.take();
        if let Some((st, _)) = &previous {
            if g.st_num < *st {
                result.violations.push(Violation::StNumRegressed {
                    repeat,
                    from: *st,
                    to: g.st_num,
                });
            }
        }
        for (k, &idx) in self.trip_index.iter().enumerate() {
            let was = previous.as_ref().is_some_and(|(_, v)| v[idx]);
            if !g.values[idx] || was || trips[k].is_some() {
                continue;
            }
            if r.t_s < inception_s {
                result.violations.push(Violation::FalseTrip {
                    repeat,
                    function: CAMPAIGN_FUNCTIONS[k],
                    t_s: r.t_s,
                });
            } else {
                trips[k] = Some(r.t_s);
            }
        }
        *last = Some((g.st_num, g.values));
    }
}

fn scenario_file(dir: &Path, id: &str) -> PathBuf {
    dir.join("scenarios").join(format!("{id}.json"))
}

fn load_saved(dir: &Path, sc: &FaultScenario, repeats: usize) -> Option<ScenarioResult> {
    let text = fs::read_to_string(scenario_file(dir, &sc.id())).ok()?;
    let saved: ScenarioResult = serde_json::from_str(&text).ok()?;
    (saved.scenario == *sc && saved.records.len() == repeats * CAMPAIGN_FUNCTIONS.len()).then_some(saved)
}

fn save(dir: &Path, r: &ScenarioResult) -> Result<(), Error> {
    let path = scenario_file(dir, &r.scenario_id);
    fs::create_dir_all(path.parent().expect("scenario file has a parent"))?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec(r).map_err(|e| Error::Format(e.to_string()))?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

fn make_endpoint(cfg: &CampaignConfig, target: &RelayTarget) -> Result<Box<dyn RelayEndpoint>, Error> {
    Ok(match target {
        RelayTarget::Sim => Box::new(SimEndpoint::new(cfg.relay.clone())),
        RelayTarget::Udp {
            listen,
            relay_a,
            relay_b,
        } => Box::new(UdpEndpoint::connect(*listen, *relay_a, *relay_b)?),
    })
}

/// Runs every scenario of the matrix. Results come back in matrix order
/// whatever the execution order.
pub fn run_campaign(cfg: &CampaignConfig, opts: &RunOptions) -> Result<CampaignOutcome, Error> {
    cfg.line.validate()?;
    cfg.relay.validate().map_err(|e| Error::Config(e.to_string()))?;
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    if opts.parallel && opts.target != RelayTarget::Sim {
        return Err(Error::Config("parallel mode needs the simulated relay".into()));
    }
    let started = Instant::now();
    let scenarios = cfg.matrix.scenarios()?;
    let total = scenarios.len();
    let resumed: Vec<Option<ScenarioResult>> = scenarios
        .iter()
        .map(|sc| match (&opts.out_dir, opts.resume) {
            (Some(dir), true) => load_saved(dir, sc, cfg.repeats),
            _ => None,
        })
        .collect();
    let n_resumed = resumed.iter().flatten().count();

    let run_one = |index: usize, sc: &FaultScenario, endpoint: &mut dyn RelayEndpoint| -> Result<ScenarioResult, Error> {
        let r = run_scenario(cfg, index, sc, endpoint)?;
        if let Some(dir) = &opts.out_dir {
            save(dir, &r)?;
        }
        log::info!("{} done ({} of {total})", r.scenario_id, index + 1);
        Ok(r)
    };

    let results: Vec<ScenarioResult> = if opts.parallel {
        scenarios
            .par_iter()
            .zip(resumed.into_par_iter())
            .enumerate()
            .map(|(i, (sc, saved))| match saved {
                Some(r) => Ok(r),
                None => run_one(i, sc, make_endpoint(cfg, &opts.target)?.as_mut()),
            })
            .collect::<Result<_, _>>()?
    } else {
        let mut endpoint = make_endpoint(cfg, &opts.target)?;
        scenarios
            .iter()
            .zip(resumed)
            .enumerate()
            .map(|(i, (sc, saved))| match saved {
                Some(r) => Ok(r),
                None => run_one(i, sc, endpoint.as_mut()),
            })
            .collect::<Result<_, _>>()?
    };
    Ok(CampaignOutcome {
        results,
        elapsed_s: started.elapsed().as_secs_f64(),
        resumed: n_resumed,
    })
}
