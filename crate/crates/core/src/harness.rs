//! Scenario generation, the end-to-end planning pipeline, experiment sweeps
//! and their file formats.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{edf_schedule, random_schedule};
use crate::discretize::{max_side_for_error, slotting, GridMap, SlotPlan};
use crate::error::{invalid, Result, SchedError};
use crate::geometry::Point;
use crate::greedy::{greedy_schedule, ScheduleResult};
use crate::model::{ChargerSpec, Scenario, SensorNode};
use crate::path::{
    evaluate_plan, skip_substitute, truncate_to_budget, BudgetAccounting, PlanEvaluation, TourPlan,
};

pub const DEFAULT_LAMBDA: f64 = 0.15;
pub const DEFAULT_DT: f64 = 30.0;

/// Inputs for random scenario generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub plane_side: f64,
    pub node_count: usize,
    /// Demand range (J).
    pub demand: (f64, f64),
    /// Deadline range (s).
    pub deadline: (f64, f64),
    pub charger: ChargerSpec,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            plane_side: 50.0,
            node_count: 40,
            demand: (10.0, 100.0),
            deadline: (300.0, 1800.0),
            charger: ChargerSpec::default(),
            seed: 0,
        }
    }
}

impl ScenarioParams {
    pub fn with_seed(seed: u64) -> Self {
        ScenarioParams {
            seed,
            ..Self::default()
        }
    }
}

fn check_range(name: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(invalid(
            name,
            format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

/// Nodes uniform over the plane with uniform demands and deadlines; the
/// budget is the largest drawn deadline. Fully determined by the seed.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    if params.node_count == 0 {
        return Err(invalid("node_count", "need at least one node"));
    }
    check_range("demand", params.demand)?;
    check_range("deadline", params.deadline)?;
    params.charger.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = params.plane_side;
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    };
    let nodes = (0..params.node_count)
        .map(|i| {
            let x = rng.random_range(0.0..side);
            let y = rng.random_range(0.0..side);
            let demand = draw(&mut rng, params.demand);
            let deadline = draw(&mut rng, params.deadline);
            SensorNode::new(i as u32, Point::new(x, y), demand, deadline)
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(side, nodes, params.charger, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    More,
    Edf,
    Random,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::More, Scheme::Edf, Scheme::Random];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::More => "more",
            Scheme::Edf => "edf",
            Scheme::Random => "random",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = SchedError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "more" => Ok(Scheme::More),
            "edf" => Ok(Scheme::Edf),
            "random" => Ok(Scheme::Random),
            other => Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Knobs of one pipeline run besides the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub lambda: f64,
    pub dt: f64,
    /// Binary-search resolution (m); `None` means δ/100.
    pub sigma: Option<f64>,
    pub accounting: BudgetAccounting,
    pub prune: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            lambda: DEFAULT_LAMBDA,
            dt: DEFAULT_DT,
            sigma: None,
            accounting: BudgetAccounting::TravelAndDwell,
            prune: false,
        }
    }
}

/// Everything one pipeline run produced.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub delta: f64,
    pub gridmap: GridMap,
    pub slots: SlotPlan,
    pub schedule: ScheduleResult,
    /// Shortened tour before budget truncation.
    pub planned_tour: TourPlan,
    pub tour: TourPlan,
    pub evaluation: PlanEvaluation,
}

/// Seed handed to the random baseline for a scenario seed.
pub fn scheme_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03
}

/// discretize → schedule → initial path → skip-substitute → truncate →
/// travel-aware evaluation.
pub fn run_pipeline_detailed(
    scenario: &Scenario,
    params: &PipelineParams,
    scheme: Scheme,
    seed: u64,
) -> Result<PipelineRun> {
    scenario.validate()?;
    let delta = max_side_for_error(params.lambda, scenario.charger.beta)?;
    let gridmap = GridMap::build(scenario, delta, params.prune)?;
    let slots = slotting(scenario.budget_t, params.dt, &scenario.nodes)?;
    let depot = scenario.charger.depot;
    let (schedule, tour) = match scheme {
        Scheme::More => {
            let s = greedy_schedule(scenario, &gridmap, &slots);
            let t = crate::path::initial_path(&s.assignment, &gridmap, depot, slots.dt);
            (s, t)
        }
        Scheme::Edf => edf_schedule(scenario, &gridmap, &slots),
        Scheme::Random => random_schedule(scenario, &gridmap, &slots, scheme_seed(seed)),
    };
    let sigma = params.sigma.unwrap_or(delta / 100.0);
    let planned_tour = skip_substitute(&tour, &gridmap, sigma)?;
    let tour = truncate_to_budget(
        &planned_tour,
        scenario.budget_t,
        &scenario.charger,
        params.accounting,
    );
    let evaluation = evaluate_plan(&tour, scenario, &gridmap, &slots);
    Ok(PipelineRun {
        delta,
        gridmap,
        slots,
        schedule,
        planned_tour,
        tour,
        evaluation,
    })
}

/// One result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub seed: u64,
    /// Score with travel ignored.
    pub utility_morer: f64,
    /// Score of the truncated tour with real arrival times.
    pub utility_travel: f64,
    /// Distinct merged stops of the planned tour.
    pub stop_grids: usize,
    pub tour_len_m: f64,
    pub gamma: usize,
    pub slots: usize,
    pub wall_s: f64,
}

pub fn run_pipeline(
    scenario: &Scenario,
    params: &PipelineParams,
    scheme: Scheme,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let run = run_pipeline_detailed(scenario, params, scheme, seed)?;
    Ok(ExperimentRecord {
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
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    Lambda(Vec<f64>),
    Dt(Vec<f64>),
    None,
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Lambda(_) => "lambda",
            Sweep::Dt(_) => "dt",
            Sweep::None => "none",
        }
    }

    fn values(&self) -> Vec<Option<f64>> {
        match self {
            Sweep::Lambda(v) | Sweep::Dt(v) => v.iter().copied().map(Some).collect(),
            Sweep::None => vec![None],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    /// Fixed parameters; the swept one is overridden per value.
    pub pipeline: PipelineParams,
    /// Scenario template; its seed is replaced by each entry of `seeds`.
    pub scenario: ScenarioParams,
    pub seeds: Vec<u64>,
    /// Worker threads; 1 runs serially.
    pub threads: usize,
    /// Record real wall times. Off by default so output bytes depend only on
    /// the configuration.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schemes: Scheme::ALL.to_vec(),
            sweep: Sweep::None,
            pipeline: PipelineParams::default(),
            scenario: ScenarioParams::default(),
            seeds: (0..30).collect(),
            threads: 1,
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "empty scheme list"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "empty seed list"));
        }
        match &self.sweep {
            Sweep::Lambda(v) | Sweep::Dt(v) if v.is_empty() => {
                Err(invalid("values", "empty sweep value list"))
            }
            Sweep::Lambda(v) if v.iter().any(|l| !(0.0..1.0).contains(l) || *l == 0.0) => {
                Err(invalid("lambda", "sweep values must lie in (0, 1)"))
            }
            Sweep::Dt(v) if v.iter().any(|d| !(*d > 0.0)) => {
                Err(invalid("dt", "sweep values must be > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Mean scores of one (scheme, sweep value) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub runs: usize,
    pub mean_utility_morer: f64,
    pub mean_utility_travel: f64,
    pub mean_stop_grids: f64,
    pub mean_tour_len_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs schemes × sweep values × seeds. Records come back ordered by
/// (scheme, sweep value, seed) in configuration order, however many threads
/// ran them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let values = config.sweep.values();
    let mut jobs = Vec::new();
    for &scheme in &config.schemes {
        for &value in &values {
            for &seed in &config.seeds {
                jobs.push((scheme, value, seed));
            }
        }
    }
    let run_job =
        |&(scheme, value, seed): &(Scheme, Option<f64>, u64)| -> Result<ExperimentRecord> {
            let scenario = generate_scenario(&ScenarioParams {
                seed,
                ..config.scenario.clone()
            })?;
            let mut params = config.pipeline;
            match (&config.sweep, value) {
                (Sweep::Lambda(_), Some(v)) => params.lambda = v,
                (Sweep::Dt(_), Some(v)) => params.dt = v,
                _ => {}
            }
            let mut rec = run_pipeline(&scenario, &params, scheme, seed)?;
            rec.sweep_name = config.sweep.name().into();
            rec.sweep_value = value.unwrap_or(0.0);
            if !config.record_wall_time {
                rec.wall_s = 0.0;
            }
            Ok(rec)
        };
    let records: Vec<ExperimentRecord> = if config.threads <= 1 {
        jobs.iter().map(run_job).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_job).collect::<Result<_>>())?
    };
    let summary = summarize(&records);
    Ok(ExperimentOutput { records, summary })
}

/// Per-(scheme, sweep value) means, in first-appearance order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in records {
        let row = match rows
            .iter_mut()
            .find(|s| s.scheme == r.scheme && s.sweep_value == r.sweep_value)
        {
            Some(row) => row,
            None => {
                rows.push(SummaryRow {
                    scheme: r.scheme,
                    sweep_name: r.sweep_name.clone(),
                    sweep_value: r.sweep_value,
                    runs: 0,
                    mean_utility_morer: 0.0,
                    mean_utility_travel: 0.0,
                    mean_stop_grids: 0.0,
                    mean_tour_len_m: 0.0,
                });
                rows.last_mut().unwrap()
            }
        };
        row.runs += 1;
        row.mean_utility_morer += r.utility_morer;
        row.mean_utility_travel += r.utility_travel;
        row.mean_stop_grids += r.stop_grids as f64;
        row.mean_tour_len_m += r.tour_len_m;
    }
    for row in &mut rows {
        let n = row.runs as f64;
        row.mean_utility_morer /= n;
        row.mean_utility_travel /= n;
        row.mean_stop_grids /= n;
        row.mean_tour_len_m /= n;
    }
    rows
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SchedError + '_ {
    move |source| SchedError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes rows as CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| SchedError::Io {
        path: PathBuf::from("<memory>"),
        source: e.into_error(),
    })
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let bytes = to_csv(rows)?;
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(SchedError::from))
        .collect()
}

/// Path of the summary file written next to a results file.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}_summary.csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ChargerFile {
    alpha: f64,
    beta: f64,
    range_m: f64,
    speed_mps: f64,
    depot: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NodeFile {
    id: u32,
    x_m: f64,
    y_m: f64,
    demand_j: f64,
    deadline_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScenarioFile {
    plane_side_m: f64,
    charger: ChargerFile,
    nodes: Vec<NodeFile>,
    budget_s: f64,
}

pub fn scenario_to_json(scenario: &Scenario) -> Result<String> {
    let c = &scenario.charger;
    let file = ScenarioFile {
        plane_side_m: scenario.plane_side(),
        charger: ChargerFile {
            alpha: c.alpha,
            beta: c.beta,
            range_m: c.range_d,
            speed_mps: c.speed_v,
            depot: c.depot.into(),
        },
        nodes: scenario
            .nodes
            .iter()
            .map(|n| NodeFile {
                id: n.id,
                x_m: n.position.x,
                y_m: n.position.y,
                demand_j: n.demand,
                deadline_s: n.deadline,
            })
            .collect(),
        budget_s: scenario.budget_t,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let c = file.charger;
    let charger = ChargerSpec::new(c.alpha, c.beta, c.range_m, c.speed_mps, c.depot.into())?;
    let nodes = file
        .nodes
        .iter()
        .map(|n| SensorNode::new(n.id, Point::new(n.x_m, n.y_m), n.demand_j, n.deadline_s))
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(file.plane_side_m, nodes, charger, Some(file.budget_s))
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    scenario_from_json(&text)
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    fs::write(path, scenario_to_json(scenario)?).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded_and_bounded() {
        let a = generate_scenario(&ScenarioParams::with_seed(5)).unwrap();
        let b = generate_scenario(&ScenarioParams::with_seed(5)).unwrap();
        assert_eq!(scenario_to_json(&a).unwrap(), scenario_to_json(&b).unwrap());
        let c = generate_scenario(&ScenarioParams::with_seed(6)).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.nodes.len(), 40);
        let max = a.nodes.iter().map(|n| n.deadline).fold(0.0, f64::max);
        assert_eq!(a.budget_t, max);
        for n in &a.nodes {
            assert!((300.0..=1800.0).contains(&n.deadline));
            assert!((10.0..=100.0).contains(&n.demand));
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        let p = ScenarioParams {
            node_count: 0,
            ..ScenarioParams::default()
        };
        assert!(generate_scenario(&p).is_err());
    }

    #[test]
    fn scenario_json_round_trip() {
        let a = generate_scenario(&ScenarioParams::with_seed(1)).unwrap();
        let text = scenario_to_json(&a).unwrap();
        assert!(text.contains("\"plane_side_m\"") && text.contains("\"deadline_s\""));
        assert_eq!(scenario_from_json(&text).unwrap(), a);
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("fifo".parse::<Scheme>().is_err());
    }

    #[test]
    fn csv_header_and_order() {
        let rec = ExperimentRecord {
            scheme: Scheme::Edf,
            sweep_name: "lambda".into(),
            sweep_value: 0.15,
            seed: 3,
            utility_morer: 1.5,
            utility_travel: 1.25,
            stop_grids: 4,
            tour_len_m: 12.5,
            gamma: 100,
            slots: 60,
            wall_s: 0.0,
        };
        let text = String::from_utf8(to_csv(&[rec]).unwrap()).unwrap();
        assert_eq!(
            text,
            "scheme,sweep_name,sweep_value,seed,utility_morer,utility_travel,stop_grids,tour_len_m,gamma,slots,wall_s\n\
             edf,lambda,0.15,3,1.5,1.25,4,12.5,100,60,0.0\n"
        );
    }

    #[test]
    fn empty_seed_list_rejected() {
        let cfg = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(run_experiment(&cfg).is_err());
    }
}
