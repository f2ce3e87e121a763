//! Benchmark harness: runs localization methods over a grid of anchor
//! counts and radii with repeated trials, and persists results.
//!
//! Every `(anchor count, radius, repeat)` cell derives a stable seed from
//! the experiment's base seed, so all methods inside a cell see the *same*
//! generated network — a paired comparison that removes layout variance
//! from method differences. Cells are independent and run on a small worker
//! pool; results are reassembled in grid order, so output is byte-identical
//! for a fixed base seed regardless of worker count or scheduling.
//!
//! Timing is off by default: the `seconds` column is written as zero so
//! result files stay reproducible. Enabling `timing` records wall-clock
//! seconds per repeat at the cost of byte determinism.

use std::fmt;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::demn::UpperBoundModel;
use crate::dvhop::baseline_placement;
use crate::metrics::{ala, ales, apg, confidence_interval};
use crate::moga::{run, GaConfig, LocalizationProblem, ObjectiveMode};
use crate::net::{generate_network, hop_matrix, Area, NetError, Network, Point, TopologyShape};
use crate::objectives::{distance_table, least_squares_placement};

/// Environment variable overriding the worker-thread count.
pub const WORKERS_ENV: &str = "HOPLOC_WORKERS";

/// Significance level for the reported confidence intervals.
pub const CI_ALPHA: f64 = 0.05;

/// Errors from experiment configuration and result I/O.
#[derive(Debug)]
pub enum ExperimentError {
    /// A configuration field is out of range or inconsistent.
    Config(String),
    /// The configuration file failed to parse.
    ConfigParse(String),
    /// A results file line failed to parse.
    CsvParse { line: usize, message: String },
    Net(NetError),
    Io(std::io::Error),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Config(msg) => write!(f, "invalid experiment config: {msg}"),
            ExperimentError::ConfigParse(msg) => write!(f, "config parse error: {msg}"),
            ExperimentError::CsvParse { line, message } => {
                write!(f, "results line {line}: {message}")
            }
            ExperimentError::Net(e) => write!(f, "network error: {e}"),
            ExperimentError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<NetError> for ExperimentError {
    fn from(e: NetError) -> Self {
        ExperimentError::Net(e)
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e)
    }
}

/// A localization method the harness can benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Classic DV-Hop: hop-count distance table + least squares.
    #[serde(rename = "dvhop")]
    DvHop,
    /// Expected-distance table + two-objective evolutionary solver.
    #[serde(rename = "demn-hop")]
    DemnHop,
    /// Expected-distance table + classic least-squares solve: isolates the
    /// distance model by keeping the baseline's solver.
    #[serde(rename = "demn-only")]
    DemnOnly,
    /// Classic distance table + two-objective evolutionary solver.
    #[serde(rename = "hop-only")]
    HopOnly,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DvHop, Method::DemnHop, Method::DemnOnly, Method::HopOnly];

    pub fn name(&self) -> &'static str {
        match self {
            Method::DvHop => "dvhop",
            Method::DemnHop => "demn-hop",
            Method::DemnOnly => "demn-only",
            Method::HopOnly => "hop-only",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full description of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Topology mask name: "random", "c", "o", or "x".
    pub shape: String,
    /// Total node count per network.
    pub n_nodes: usize,
    /// Anchor counts forming the grid's first axis.
    pub anchor_counts: Vec<usize>,
    /// Communication radii (meters) forming the second axis.
    pub radii: Vec<f64>,
    /// Independent repeats per cell.
    pub repeats: usize,
    /// Methods to run on each repeat's network.
    pub methods: Vec<Method>,
    /// Solver parameters; the seed field is ignored and derived per repeat.
    pub ga: GaConfig,
    /// Seed one solver individual with the least-squares baseline placement;
    /// the rest of the population stays uniform. Gives the solver methods a
    /// refinement head start at no extra cost per repeat.
    pub warm_start: bool,
    /// Base seed all per-cell seeds derive from.
    pub seed_base: u64,
    /// Deployment area width, meters.
    pub area_width: f64,
    /// Deployment area height, meters.
    pub area_height: f64,
    /// Record wall-clock seconds per repeat (breaks byte reproducibility).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            shape: "random".into(),
            n_nodes: 100,
            anchor_counts: vec![5, 10, 15, 20, 25, 30],
            radii: vec![25.0, 30.0, 35.0, 40.0],
            repeats: 50,
            methods: vec![Method::DvHop, Method::DemnHop],
            ga: GaConfig::default(),
            warm_start: true,
            seed_base: 42,
            area_width: 100.0,
            area_height: 100.0,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::ConfigParse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks field ranges and resolves the shape name.
    pub fn validate(&self) -> Result<TopologyShape, ExperimentError> {
        let shape = TopologyShape::from_name(&self.shape)
            .map_err(|_| ExperimentError::Config(format!("unknown shape {:?}", self.shape)))?;
        if self.repeats < 1 {
            return Err(ExperimentError::Config("repeats must be at least 1".into()));
        }
        if self.n_nodes < 3 {
            return Err(ExperimentError::Config("need at least 3 nodes".into()));
        }
        if self.anchor_counts.is_empty() || self.radii.is_empty() || self.methods.is_empty() {
            return Err(ExperimentError::Config(
                "anchor_counts, radii, and methods must be non-empty".into(),
            ));
        }
        for &na in &self.anchor_counts {
            if na < 2 || na >= self.n_nodes {
                return Err(ExperimentError::Config(format!(
                    "anchor count {na} must satisfy 2 ≤ n_anchors < {}",
                    self.n_nodes
                )));
            }
        }
        for &r in &self.radii {
            if !(r > 0.0) || !r.is_finite() {
                return Err(ExperimentError::Config(format!("radius {r} must be positive")));
            }
        }
        if !(self.area_width > 0.0) || !(self.area_height > 0.0) {
            return Err(ExperimentError::Config("area dimensions must be positive".into()));
        }
        self.ga
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(shape)
    }
}

/// One method's result on one repeat of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatRow {
    pub shape: String,
    pub method: Method,
    pub n_anchors: usize,
    pub radius: f64,
    pub repeat: usize,
    /// Normalized localization error; `None` marks a failed repeat.
    pub ales_percent: Option<f64>,
    /// Wall-clock seconds, or zero when timing is disabled.
    pub seconds: f64,
}

/// Aggregated statistics for one (method, anchor count, radius) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub shape: String,
    pub method: Method,
    pub n_anchors: usize,
    pub radius: f64,
    /// Successful per-repeat error samples, in percent.
    pub samples: Vec<f64>,
    /// Repeats that recorded an error marker.
    pub errors: usize,
    pub mean_ales: f64,
    pub ala: f64,
    /// `None` when fewer than two samples exist (interval skipped).
    pub ci: Option<(f64, f64)>,
    /// Total recorded seconds across the cell's repeats.
    pub seconds: f64,
}

/// Outcome of a full grid run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Per-repeat rows in grid order (anchor count, radius, repeat, method).
    pub rows: Vec<RepeatRow>,
    /// Per-cell aggregates in grid order.
    pub cells: Vec<CellSummary>,
}

impl ExperimentReport {
    pub fn cell(&self, method: Method, n_anchors: usize, radius: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.n_anchors == n_anchors && c.radius == radius)
    }
}

/// 64-bit finalizer with full avalanche; stable across platforms and
/// releases, unlike the standard library's default hasher.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn combine(h: u64, v: u64) -> u64 {
    mix64(h ^ mix64(v))
}

/// Seed for the network of one grid repeat. Method-independent by
/// construction: every method inside a cell sees the same layout.
pub fn network_seed(seed_base: u64, shape: &str, n_anchors: usize, radius: f64, repeat: usize) -> u64 {
    let mut h = mix64(seed_base);
    for b in shape.bytes() {
        h = combine(h, b as u64);
    }
    h = combine(h, n_anchors as u64);
    h = combine(h, radius.to_bits());
    combine(h, repeat as u64)
}

/// Seed for the solver on one repeat, derived from (not equal to) the
/// network seed so the two random streams never alias.
fn solver_seed(net_seed: u64) -> u64 {
    combine(net_seed, 0x50_4C_41_43_45) // "PLACE"
}

fn worker_count(tasks: usize) -> usize {
    let configured = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    configured.min(tasks).max(1)
}

/// Runs one method on a prepared network; `None` records a failure marker.
fn solve(
    network: &Network,
    hops: &crate::net::HopMatrix,
    method: Method,
    ga: GaConfig,
    warm_start: bool,
) -> Option<Vec<Point>> {
    let ub = UpperBoundModel::HopTimesRadius;
    let (demn, mode) = match method {
        Method::DvHop => return Some(baseline_placement(network, hops)),
        Method::DemnHop => (Some(&ub), ObjectiveMode::DistanceAndHops),
        Method::DemnOnly => {
            let table = distance_table(network, hops, Some(&ub)).ok()?;
            return Some(least_squares_placement(&table, network));
        }
        Method::HopOnly => (None, ObjectiveMode::DistanceAndHops),
    };
    let table = distance_table(network, hops, demn).ok()?;
    let mut problem = LocalizationProblem::new(network, hops, &table).with_mode(mode);
    if warm_start {
        problem = problem.with_warm_start(baseline_placement(network, hops));
    }
    let result = run(problem, ga).ok()?;
    Some(result.chosen.placement)
}

/// Rows for all methods on one (anchor count, radius, repeat) task.
fn run_task(
    config: &ExperimentConfig,
    shape: TopologyShape,
    n_anchors: usize,
    radius: f64,
    repeat: usize,
) -> Vec<RepeatRow> {
    let net_seed = network_seed(config.seed_base, &config.shape, n_anchors, radius, repeat);
    let area = Area::new(config.area_width, config.area_height);
    let network = generate_network(shape, config.n_nodes, n_anchors, radius, area, net_seed).ok();
    let prepared = network.map(|net| {
        let hops = hop_matrix(&net);
        (net, hops)
    });
    let ga = GaConfig { seed: solver_seed(net_seed), ..config.ga };
    config
        .methods
        .iter()
        .map(|&method| {
            let started = Instant::now();
            let ales_percent = prepared.as_ref().and_then(|(net, hops)| {
                let placement = solve(net, hops, method, ga, config.warm_start)?;
                Some(ales(&placement, net.unknown_positions(), radius))
            });
            let seconds = if config.timing { started.elapsed().as_secs_f64() } else { 0.0 };
            RepeatRow {
                shape: config.shape.clone(),
                method,
                n_anchors,
                radius,
                repeat,
                ales_percent,
                seconds,
            }
        })
        .collect()
}

/// Runs the full grid. Deterministic for a fixed `seed_base` (timing off);
/// the `HOPLOC_WORKERS` environment variable overrides the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let shape = config.validate()?;
    let mut tasks = Vec::new();
    for &na in &config.anchor_counts {
        for &radius in &config.radii {
            for repeat in 0..config.repeats {
                tasks.push((na, radius, repeat));
            }
        }
    }
    let slots: Mutex<Vec<Option<Vec<RepeatRow>>>> = Mutex::new(vec![None; tasks.len()]);
    let next = AtomicUsize::new(0);
    let workers = worker_count(tasks.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(na, radius, repeat)) = tasks.get(t) else { break };
                let rows = run_task(config, shape, na, radius, repeat);
                slots.lock().unwrap()[t] = Some(rows);
            });
        }
    });
    let rows: Vec<RepeatRow> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .flat_map(|slot| slot.expect("every task completed"))
        .collect();
    let cells = summarize_rows(&rows);
    Ok(ExperimentReport { config: config.clone(), rows, cells })
}

/// Groups rows by (shape, method, anchor count, radius) in first-appearance
/// order and aggregates mean error, accuracy, and confidence interval.
pub fn summarize_rows(rows: &[RepeatRow]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    for row in rows {
        let key = |c: &CellSummary| {
            c.shape == row.shape
                && c.method == row.method
                && c.n_anchors == row.n_anchors
                && c.radius.to_bits() == row.radius.to_bits()
        };
        let cell = match cells.iter_mut().find(|c| key(c)) {
            Some(c) => c,
            None => {
                cells.push(CellSummary {
                    shape: row.shape.clone(),
                    method: row.method,
                    n_anchors: row.n_anchors,
                    radius: row.radius,
                    samples: Vec::new(),
                    errors: 0,
                    mean_ales: 0.0,
                    ala: 0.0,
                    ci: None,
                    seconds: 0.0,
                });
                cells.last_mut().unwrap()
            }
        };
        match row.ales_percent {
            Some(v) => cell.samples.push(v),
            None => cell.errors += 1,
        }
        cell.seconds += row.seconds;
    }
    for cell in &mut cells {
        let n = cell.samples.len();
        cell.mean_ales = if n == 0 {
            f64::NAN
        } else {
            cell.samples.iter().sum::<f64>() / n as f64
        };
        cell.ala = ala(cell.mean_ales);
        cell.ci = confidence_interval(&cell.samples, CI_ALPHA).ok();
    }
    cells
}

const CSV_HEADER: &str = "shape,method,n_anchors,radius,repeat,ales_percent,seconds";

/// Serializes rows to CSV. Floats use the shortest round-trip form; a
/// failed repeat leaves `ales_percent` empty.
pub fn rows_to_csv(rows: &[RepeatRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 48 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let ales = r.ales_percent.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.shape, r.method, r.n_anchors, r.radius, r.repeat, ales, r.seconds
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Parses a results CSV produced by [`rows_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<RepeatRow>, ExperimentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        other => {
            return Err(ExperimentError::CsvParse {
                line: 1,
                message: format!(
                    "expected header {CSV_HEADER:?}, got {:?}",
                    other.map(|(_, h)| h).unwrap_or("")
                ),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(ExperimentError::CsvParse {
                line: line_no,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, v: &str| ExperimentError::CsvParse {
            line: line_no,
            message: format!("bad {what}: {v:?}"),
        };
        let method =
            Method::from_name(fields[1]).ok_or_else(|| parse_err("method", fields[1]))?;
        let ales_percent = if fields[5].is_empty() {
            None
        } else {
            Some(fields[5].parse::<f64>().map_err(|_| parse_err("ales_percent", fields[5]))?)
        };
        rows.push(RepeatRow {
            shape: fields[0].to_string(),
            method,
            n_anchors: fields[2].parse().map_err(|_| parse_err("n_anchors", fields[2]))?,
            radius: fields[3].parse().map_err(|_| parse_err("radius", fields[3]))?,
            repeat: fields[4].parse().map_err(|_| parse_err("repeat", fields[4]))?,
            ales_percent,
            seconds: fields[6].parse().map_err(|_| parse_err("seconds", fields[6]))?,
        });
    }
    Ok(rows)
}

/// Renders cell summaries as an aligned text table with per-cell mean,
/// accuracy, confidence bounds, and mean-error gain versus the other
/// methods benchmarked on the same cell.
pub fn render_summary(cells: &[CellSummary]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:<10} {:>9} {:>7} {:>8} {:>10} {:>8} {:>10} {:>10} {:>9} {:>9}",
        "shape", "method", "n_anchors", "radius", "repeats", "mean_ales", "ala",
        "ci_lower", "ci_upper", "apg_vs", "seconds"
    )
    .unwrap();
    for cell in cells {
        let siblings: Vec<f64> = cells
            .iter()
            .filter(|c| {
                c.method != cell.method
                    && c.shape == cell.shape
                    && c.n_anchors == cell.n_anchors
                    && c.radius.to_bits() == cell.radius.to_bits()
                    && !c.mean_ales.is_nan()
            })
            .map(|c| c.mean_ales)
            .collect();
        let apg_col = if siblings.is_empty() || cell.mean_ales.is_nan() {
            "n/a".to_string()
        } else {
            format!("{:.2}", apg(&siblings, cell.mean_ales))
        };
        let (ci_lo, ci_hi) = match cell.ci {
            Some((lo, hi)) => (format!("{lo:.2}"), format!("{hi:.2}")),
            None => ("n/a".to_string(), "n/a".to_string()),
        };
        writeln!(
            out,
            "{:<8} {:<10} {:>9} {:>7} {:>8} {:>10} {:>8} {:>10} {:>10} {:>9} {:>9}",
            cell.shape,
            cell.method.name(),
            cell.n_anchors,
            cell.radius,
            cell.samples.len() + cell.errors,
            if cell.mean_ales.is_nan() { "n/a".into() } else { format!("{:.2}", cell.mean_ales) },
            if cell.ala.is_nan() { "n/a".into() } else { format!("{:.2}", cell.ala) },
            ci_lo,
            ci_hi,
            apg_col,
            format!("{:.2}", cell.seconds),
        )
        .unwrap();
    }
    out
}

/// Serializes cell summaries as pretty JSON.
pub fn summary_json(cells: &[CellSummary]) -> String {
    serde_json::to_string_pretty(cells).expect("summary serializes")
}
