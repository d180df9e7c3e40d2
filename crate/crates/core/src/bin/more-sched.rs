use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use more_sched::checks;
use more_sched::harness::{
    self, generate_scenario, load_scenario, run_experiment, run_pipeline_detailed, save_scenario,
    summary_path, write_csv, ExperimentConfig, ExperimentRecord, PipelineParams, ScenarioParams,
    Scheme, Sweep,
};
use more_sched::oracle::EXHAUSTIVE_LIMIT;
use more_sched::{BudgetAccounting, ChargerSpec, Result, SchedError};

#[derive(Parser)]
#[command(
    name = "more-sched",
    version,
    about = "Deadline-driven mobile charger scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    More,
    Edf,
    Random,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::More => Scheme::More,
            SchemeArg::Edf => Scheme::Edf,
            SchemeArg::Random => Scheme::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Lambda,
    Dt,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Number of sensor nodes.
    #[arg(long, default_value_t = 40)]
    nodes: usize,
    /// Side of the square field (m).
    #[arg(long, default_value_t = 50.0)]
    plane: f64,
    /// Charger travel speed (m/s).
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
}

impl ScenarioArgs {
    fn params(&self, seed: u64) -> ScenarioParams {
        ScenarioParams {
            plane_side: self.plane,
            node_count: self.nodes,
            charger: ChargerSpec {
                speed_v: self.speed,
                ..ChargerSpec::default()
            },
            seed,
            ..ScenarioParams::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario with one scheme and write a single result row.
    Run {
        #[arg(long, value_enum, default_value = "more")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = harness::DEFAULT_LAMBDA)]
        lambda: f64,
        /// Slot length (s).
        #[arg(long, default_value_t = harness::DEFAULT_DT)]
        dt: f64,
        /// Substitute search resolution (m); defaults to δ/100.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Load the scenario from a JSON file instead of generating it.
        #[arg(long)]
        scenario_file: Option<PathBuf>,
        /// Save the scenario as JSON.
        #[arg(long)]
        write_scenario: Option<PathBuf>,
        /// Charge only travel time against the budget.
        #[arg(long)]
        travel_only: bool,
        /// Results CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the final tour as JSON.
        #[arg(long)]
        dump_tour: Option<PathBuf>,
    },
    /// Sweep λ or Δt over seeds and schemes.
    Sweep {
        #[arg(long, value_enum)]
        sweep: SweepArg,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Seeds as a comma list (`1,2,3`) or a half-open range (`0..30`).
        #[arg(long, default_value = "0..30")]
        seeds: String,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "more,edf,random"
        )]
        schemes: Vec<SchemeArg>,
        /// λ when sweeping Δt.
        #[arg(long, default_value_t = harness::DEFAULT_LAMBDA)]
        lambda: f64,
        /// Δt when sweeping λ.
        #[arg(long, default_value_t = harness::DEFAULT_DT)]
        dt: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        travel_only: bool,
        /// Fill the wall_s column with measured times (output is then not
        /// reproducible byte for byte).
        #[arg(long)]
        record_wall_time: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the brute-force oracle suites.
    OracleCheck {
        /// Largest exhaustive search size, (grids + 1)^slots.
        #[arg(long, default_value_t = EXHAUSTIVE_LIMIT)]
        max_size: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || SchedError::InvalidParameter {
        name: "seeds",
        reason: format!("cannot parse `{text}`"),
    };
    let seeds: Vec<u64> = if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        (lo..hi).collect()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    Ok(seeds)
}

fn threads_from_env() -> Result<usize> {
    match std::env::var("MORE_SCHED_THREADS") {
        Ok(v) => {
            v.trim()
                .parse::<usize>()
                .map(|n| n.max(1))
                .map_err(|_| SchedError::InvalidParameter {
                    name: "MORE_SCHED_THREADS",
                    reason: format!("not a thread count: `{v}`"),
                })
        }
        Err(_) => Ok(1),
    }
}

fn accounting(travel_only: bool) -> BudgetAccounting {
    if travel_only {
        BudgetAccounting::TravelOnly
    } else {
        BudgetAccounting::TravelAndDwell
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            scheme,
            lambda,
            dt,
            sigma,
            seed,
            scenario,
            scenario_file,
            write_scenario,
            travel_only,
            out,
            dump_tour,
        } => {
            let sc = match scenario_file {
                Some(path) => load_scenario(&path)?,
                None => generate_scenario(&scenario.params(seed))?,
            };
            if let Some(path) = write_scenario {
                save_scenario(&path, &sc)?;
            }
            let params = PipelineParams {
                lambda,
                dt,
                sigma,
                accounting: accounting(travel_only),
                prune: false,
            };
            let scheme: Scheme = scheme.into();
            let started = std::time::Instant::now();
            let run = run_pipeline_detailed(&sc, &params, scheme, seed)?;
            let record = ExperimentRecord {
                scheme,
                sweep_name: "none".into(),
                sweep_value: 0.0,
                seed,
                utility_morer: run.schedule.total_utility,
                utility_travel: run.evaluation.total_utility,
                stop_grids: run.planned_tour.stops.len(),
                tour_len_m: run.tour.length,
                gamma: run.gridmap.len(),
                slots: run.slots.count,
                wall_s: started.elapsed().as_secs_f64(),
            };
            let (lo, hi) = sc
                .nodes
                .iter()
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), n| {
                    (lo.min(n.deadline), hi.max(n.deadline))
                });
            eprintln!(
                "{} nodes, deadlines {:.1}-{:.1} min, δ = {:.4} m, Γ = {}, m = {}",
                sc.nodes.len(),
                lo / 60.0,
                hi / 60.0,
                run.delta,
                run.gridmap.len(),
                run.slots.count
            );
            if let Some(path) = dump_tour {
                let text = serde_json::to_string_pretty(&run.tour.export(&sc.charger))?;
                std::fs::write(&path, text).map_err(|source| SchedError::Io { path, source })?;
            }
            match out {
                Some(path) => write_csv(&path, &[record])?,
                None => print!("{}", String::from_utf8_lossy(&harness::to_csv(&[record])?)),
            }
            Ok(true)
        }
        Command::Sweep {
            sweep,
            values,
            seeds,
            schemes,
            lambda,
            dt,
            sigma,
            scenario,
            travel_only,
            record_wall_time,
            out,
        } => {
            let config = ExperimentConfig {
                schemes: schemes.into_iter().map(Scheme::from).collect(),
                sweep: match sweep {
                    SweepArg::Lambda => Sweep::Lambda(values),
                    SweepArg::Dt => Sweep::Dt(values),
                },
                pipeline: PipelineParams {
                    lambda,
                    dt,
                    sigma,
                    accounting: accounting(travel_only),
                    prune: false,
                },
                scenario: scenario.params(0),
                seeds: parse_seeds(&seeds)?,
                threads: threads_from_env()?,
                record_wall_time,
            };
            let output = run_experiment(&config)?;
            write_csv(&out, &output.records)?;
            write_csv(&summary_path(&out), &output.summary)?;
            for row in &output.summary {
                println!(
                    "{:<6} {}={:<6} utility {:.3} (travel-aware {:.3}), stops {:.1}, tour {:.1} m",
                    row.scheme,
                    row.sweep_name,
                    row.sweep_value,
                    row.mean_utility_morer,
                    row.mean_utility_travel,
                    row.mean_stop_grids,
                    row.mean_tour_len_m
                );
            }
            Ok(true)
        }
        Command::OracleCheck { max_size, seed } => {
            let reports = checks::run_all(seed, max_size)?;
            for r in &reports {
                println!("{r}");
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: oracle checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
