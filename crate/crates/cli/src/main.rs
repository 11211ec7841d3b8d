use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridsvc_core::grid::{build_synthetic_network, load_network, three_area_27bus, write_network, SyntheticSpec};
use gridsvc_core::harness::{
    load_scenario, max_ratio_above, run_scenario, sweep_compression, sweep_compression_synthetic,
    sweep_pilots, HarnessError, NetworkSource, PilotSet, Scenario,
};

#[derive(Parser)]
#[command(name = "gridsvc", version, about = "Secondary voltage control scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the per-step telemetry CSV.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median recovery SNR per compression ratio.
    SweepRho {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,6")]
        rhos: Vec<f64>,
        /// Sweep seeded correlated telemetry of this length instead of the
        /// scenario's concentrated states.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Report the largest ratio whose median SNR reaches this floor.
        #[arg(long, default_value_t = 30.0)]
        floor_db: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Final rms voltage deviation per number of pilot buses.
    SweepPilots {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9")]
        counts: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a network fixture.
    GenNetwork {
        /// `areas,gen,cap,load,seed`; the three-area 27-bus network when omitted.
        #[arg(long)]
        synthetic: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    LoadSteps,
    Noise40,
    Fault175,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file; overrides --preset.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "load-steps")]
    preset: Preset,
    /// Network fixture replacing the scenario's network.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    duration_s: Option<f64>,
    /// `all`, `first:<k>` or a bus list such as `0:7 1:8`.
    #[arg(long)]
    pilots: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    bandwidth_bps: Option<f64>,
    #[arg(long)]
    latency_s: Option<f64>,
    #[arg(long)]
    channel_snr_db: Option<f64>,
    #[arg(long)]
    sensor_snr_db: Option<f64>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Failures reading inputs exit with 2, anything later with 1.
enum Failure {
    Fixture(String),
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Run(e.to_string())
    }
}

impl ScenarioArgs {
    fn build(&self) -> Result<Scenario, Failure> {
        let fixture = |e: HarnessError| Failure::Fixture(e.to_string());
        let mut s = match (&self.scenario, self.preset) {
            (Some(path), _) => load_scenario(path).map_err(fixture)?,
            (None, Preset::LoadSteps) => Scenario::load_steps(),
            (None, Preset::Noise40) => Scenario::noise40(1),
            (None, Preset::Fault175) => Scenario::fault175(1),
        };
        if let Some(p) = &self.network {
            s.network = NetworkSource::Fixture(p.clone());
        }
        if let NetworkSource::Fixture(p) = &s.network {
            load_network(p).map_err(|e| Failure::Fixture(e.to_string()))?;
        }
        if let Some(p) = &self.pilots {
            s.pilots = p.parse::<PilotSet>().map_err(fixture)?;
        }
        set(&mut s.duration_s, self.duration_s);
        set(&mut s.rho, self.rho);
        set(&mut s.channel.bandwidth_bps, self.bandwidth_bps);
        set(&mut s.channel.latency_s, self.latency_s);
        set(&mut s.detector.scales, self.scales);
        set(&mut s.detector.threshold, self.threshold);
        set(&mut s.controller.beta, self.beta);
        set(&mut s.controller.epsilon, self.epsilon);
        set(&mut s.controller.max_iterations, self.max_iterations);
        set(&mut s.seed, self.seed);
        if self.channel_snr_db.is_some() {
            s.channel.noise_snr_db = self.channel_snr_db;
        }
        if self.sensor_snr_db.is_some() {
            s.sensor_snr_db = self.sensor_snr_db;
        }
        s.validate()?;
        Ok(s)
    }
}

fn set<T: Copy>(field: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *field = v;
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_synthetic(spec: &str) -> Result<SyntheticSpec, Failure> {
    let bad = || Failure::Run(format!("bad synthetic spec `{spec}` (want areas,gen,cap,load,seed)"));
    let v: Vec<u64> = spec
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, g, c, l, seed] if a > 0 && g > 0 && c > 0 && l > 0 => {
            Ok(SyntheticSpec::new(a as usize, g as usize, c as usize, l as usize, seed))
        }
        _ => Err(bad()),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out } => {
            let s = scenario.build()?;
            let report = run_scenario(&s)?;
            emit(out.as_deref(), &report.to_csv())?;
            let unconverged = report.control.iter().filter(|c| !c.converged).count();
            eprintln!(
                "final x_rms {:.6e}, {} control steps ({} unconverged), {} alarms, mean delay {:.6} s, median snr {} dB",
                report.final_x_rms(),
                report.control.len(),
                unconverged,
                report.alarms.len(),
                report.mean_delay_s(),
                report.median_snr_db(),
            );
            for a in &report.alarms {
                eprintln!("alarm t={} area {} load {} entropy {:.6}", a.time_s, a.bus.area, a.bus.index, a.entropy);
            }
        }
        Command::SweepRho {
            scenario,
            rhos,
            synthetic,
            trials,
            floor_db,
            out,
        } => {
            let points = match synthetic {
                Some(n) => {
                    let seed = scenario.seed.unwrap_or(1);
                    sweep_compression_synthetic(n, &rhos, trials, seed)?
                }
                None => sweep_compression(&scenario.build()?, &rhos)?,
            };
            let mut csv = String::from("rho,m,median_snr_db\n");
            for p in &points {
                csv += &format!("{:.6},{},{:.6}\n", p.rho, p.m, p.median_snr_db);
            }
            emit(out.as_deref(), &csv)?;
            match max_ratio_above(&points, floor_db) {
                Some(r) => eprintln!("largest ratio with median snr >= {floor_db} dB: {r}"),
                None => eprintln!("no ratio reaches {floor_db} dB"),
            }
        }
        Command::SweepPilots { scenario, counts, out } => {
            let points = sweep_pilots(&scenario.build()?, &counts)?;
            let mut csv = String::from("pilots,final_x_rms\n");
            for p in &points {
                csv += &format!("{},{:.9e}\n", p.pilots, p.final_x_rms);
            }
            emit(out.as_deref(), &csv)?;
        }
        Command::GenNetwork { synthetic, out } => {
            let net = match synthetic {
                Some(spec) => build_synthetic_network(&parse_synthetic(&spec)?),
                None => three_area_27bus(),
            };
            emit(out.as_deref(), &write_network(&net))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Fixture(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
