//! Virtual test set: fault campaigns, waveform generation and replay.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use vied_core::codec::{decode_goose, encode_sv, DatasetSchema, SampledValueFrame};
use vied_core::protection::SuiteOutput;
use vied_core::runtime::{Relay, RelayConfig};
use vied_core::Channel;
use vied_testkit::report::{render_tables, latency_tables, write_bundle};
use vied_testkit::{
    fault_phasors, run_campaign, synthesize_waveform, CampaignConfig, FaultScenario, LineModel, RelayTarget,
    RunOptions, ScenarioMatrix, Waveform,
};

#[derive(Parser)]
#[command(name = "testset", version, about = "Virtual test set for the vied relay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fault campaign and write the report bundle.
    Run(RunArgs),
    /// Write the synthesised record of one scenario as CSV.
    GenWaveform {
        /// Scenario id, e.g. AG-R15-A45.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        line: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        prefault_s: f64,
        #[arg(long, default_value_t = 0.2)]
        duration_s: f64,
        #[arg(long, default_value_t = 4800.0)]
        fs: f64,
    },
    /// Play a CSV record into a simulated relay and print its GOOSE state
    /// changes and events as JSON lines.
    Replay {
        #[arg(long)]
        csv: PathBuf,
        /// Relay configuration (TOML); defaults otherwise.
        #[arg(long)]
        relay_config: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    line: Option<PathBuf>,
    /// Scenario matrix (TOML).
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    /// `sim`, or the LAN A address of a running `vied --transport sim`.
    #[arg(long, default_value = "sim")]
    relay: String,
    /// LAN B address of a remote relay; defaults to LAN A's port + 1.
    #[arg(long)]
    relay_b: Option<SocketAddr>,
    /// Where a remote relay sends its GOOSE traffic.
    #[arg(long, default_value = "127.0.0.1:10210")]
    listen: SocketAddr,
    /// Station-bus address of a remote relay, used to fetch its settings
    /// for the oracle.
    #[arg(long)]
    station: Option<SocketAddr>,
    /// Relay configuration (TOML) for simulated relays and the oracle.
    #[arg(long)]
    relay_config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    prefault_s: f64,
    #[arg(long, default_value_t = 60.0)]
    noise_snr_db: f64,
    #[arg(long)]
    no_noise: bool,
    /// Run scenarios concurrently (simulated relay only).
    #[arg(long)]
    parallel: bool,
    /// Reuse per-scenario results already present in the output directory.
    #[arg(long)]
    resume: bool,
}

fn load_line(path: &Option<PathBuf>) -> Result<LineModel> {
    Ok(match path {
        Some(p) => LineModel::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => LineModel::default(),
    })
}

fn load_relay_config(path: &Option<PathBuf>) -> Result<RelayConfig> {
    Ok(match path {
        Some(p) => RelayConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => RelayConfig::default(),
    })
}

fn fetch_config(station: SocketAddr) -> Result<RelayConfig> {
    let mut stream = TcpStream::connect(station).with_context(|| format!("connecting to {station}"))?;
    writeln!(stream, r#"{{"id":1,"op":"get-config"}}"#)?;
    let mut line = String::new();
    BufReader::new(stream).read_line(&mut line)?;
    let reply: serde_json::Value = serde_json::from_str(&line)?;
    if reply["ok"] != true {
        bail!("get-config failed: {reply}");
    }
    Ok(serde_json::from_value(reply["result"].clone())?)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let target = if args.relay == "sim" {
        RelayTarget::Sim
    } else {
        let relay_a: SocketAddr = args.relay.parse().context("--relay must be `sim` or an address")?;
        let relay_b = args.relay_b.unwrap_or_else(|| {
            let mut b = relay_a;
            b.set_port(relay_a.port() + 1);
            b
        });
        RelayTarget::Udp {
            listen: args.listen,
            relay_a,
            relay_b,
        }
    };
    let relay = match args.station {
        Some(addr) => fetch_config(addr)?,
        None => load_relay_config(&args.relay_config)?,
    };
    let matrix = match &args.scenarios {
        Some(p) => ScenarioMatrix::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ScenarioMatrix::default(),
    };
    let cfg = CampaignConfig {
        line: load_line(&args.line)?,
        matrix,
        relay,
        repeats: args.repeats,
        seed: args.seed,
        prefault_s: args.prefault_s,
        noise_snr_db: (!args.no_noise).then_some(args.noise_snr_db),
    };
    let opts = RunOptions {
        target,
        parallel: args.parallel,
        out_dir: Some(args.out.clone()),
        resume: args.resume,
    };
    let expected = cfg.matrix.scenarios()?.len();
    let outcome = run_campaign(&cfg, &opts)?;
    let props = write_bundle(&args.out, &outcome, expected, cfg.repeats)?;
    print!("{}", render_tables(&latency_tables(&outcome.results)));
    println!(
        "{} scenarios × {} repeats in {:.1} s ({} resumed)",
        outcome.results.len(),
        cfg.repeats,
        outcome.elapsed_s,
        outcome.resumed
    );
    for p in &props {
        println!("{} {}: {}", if p.passed { "PASS" } else { "FAIL" }, p.name, p.detail);
    }
    Ok(if props.iter().all(|p| p.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn replay(csv: PathBuf, relay_config: Option<PathBuf>) -> Result<()> {
    let wave = Waveform::load_csv(&csv).with_context(|| format!("reading {}", csv.display()))?;
    let cfg = load_relay_config(&relay_config)?;
    let fs = cfg.samples_per_second as f64;
    if (wave.fs - fs).abs() > 1e-6 * fs {
        bail!("record is sampled at {} Hz, the relay expects {fs} Hz", wave.fs);
    }
    let lsb = cfg.scaling.table();
    let schema = DatasetSchema::new(SuiteOutput::dataset_names());
    let mut relay = Relay::new(cfg.clone())?;
    let t0 = wave.times[0];
    let out = std::io::stdout();
    let mut out = out.lock();
    for (k, s) in wave.samples.iter().enumerate() {
        let frame = SampledValueFrame {
            smp_cnt: (k % cfg.samples_per_second as usize) as u16,
            channels: std::array::from_fn(|ch| (s[ch] / lsb[ch]).round() as i32),
            ..SampledValueFrame::default()
        };
        relay.handle_frame(&encode_sv(&frame)?);
        for e in relay.take_events() {
            writeln!(out, "{}", serde_json::json!({ "event": e }))?;
        }
        for g in relay.take_outbox() {
            if g.frame.sq_num == 0 {
                let decoded = decode_goose(&g.lan_a[..g.lan_a.len() - 6])?;
                let set: Vec<&str> = decoded.entries(&schema).filter(|(_, v)| *v).map(|(n, _)| n).collect();
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({ "goose": { "t_s": t0 + g.time_ns as f64 * 1e-9, "st_num": decoded.st_num, "set": set } })
                )?;
            }
        }
        relay.take_measurements();
    }
    let last = relay.phasors();
    let mags: Vec<String> = Channel::ALL.iter().map(|&c| format!("{c}={:.1}", last.magnitude(c))).collect();
    eprintln!("{} samples replayed; final RMS {}", wave.len(), mags.join(" "));
    Ok(())
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::GenWaveform {
            scenario,
            out,
            line,
            prefault_s,
            duration_s,
            fs,
        } => {
            let line = load_line(&line)?;
            let mut sc: FaultScenario = scenario.parse()?;
            sc.duration_s = duration_s;
            sc.validate()?;
            let w = synthesize_waveform(&fault_phasors(&line, &sc)?, &sc, line.frequency_hz, prefault_s, fs);
            w.save_csv(&out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "{}: {} samples, inception at {:.6} s",
                sc.id(),
                w.len(),
                w.inception_s.unwrap_or_default()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { csv, relay_config } => {
            replay(csv, relay_config)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
