//! NSGA-II search over placements of the unknown nodes.
//!
//! Candidate placements are real-coded individuals (one `(x, y)` gene pair
//! per unknown, clamped to the deployment area) evolved with simulated
//! binary crossover and polynomial mutation under fast non-dominated
//! sorting, crowding-distance diversity, and elitist (μ+λ) selection. Both
//! objectives are minimized: the distance loss `f1` against the estimate
//! table and the hop loss `f2` against the observed connectivity. The
//! returned answer is the final-population individual with the lowest hop
//! loss — the placement most consistent with what the network actually
//! heard.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::net::{HopMatrix, Network, Point};
use crate::objectives::{
    diameter_hop_bound, distance_loss, hop_loss, predicted_hops, DistanceTable, ObjectiveValues,
    Placement,
};

/// Numerical floor below which two parent genes are treated as identical.
const SBX_EPS: f64 = 1e-14;

/// Errors from solver configuration.
#[derive(Debug)]
pub enum MogaError {
    /// Population must have at least two members and be even (pairwise mating).
    InvalidPopulation(usize),
    /// A probability parameter fell outside [0, 1].
    InvalidProbability { name: &'static str, value: f64 },
    /// A distribution index must be positive and finite.
    InvalidDistributionIndex { name: &'static str, value: f64 },
    /// A warm-start placement must have one point per unknown.
    WarmStartSizeMismatch { expected: usize, got: usize },
}

impl fmt::Display for MogaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MogaError::InvalidPopulation(n) => {
                write!(f, "population size must be an even number ≥ 2, got {n}")
            }
            MogaError::InvalidProbability { name, value } => {
                write!(f, "{name} must lie in [0, 1], got {value}")
            }
            MogaError::InvalidDistributionIndex { name, value } => {
                write!(f, "{name} must be positive and finite, got {value}")
            }
            MogaError::WarmStartSizeMismatch { expected, got } => {
                write!(f, "warm start has {got} points, network has {expected} unknowns")
            }
        }
    }
}

impl std::error::Error for MogaError {}

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Number of individuals kept each generation; even, at least 2.
    pub population_size: usize,
    /// Generations to evolve.
    pub max_iter: usize,
    /// Crossover probability per mating pair.
    pub pc: f64,
    /// Mutation probability per gene.
    pub pm: f64,
    /// Random seed; equal seeds give identical results.
    pub seed: u64,
    /// Simulated-binary-crossover distribution index.
    pub eta_crossover: f64,
    /// Polynomial-mutation distribution index.
    pub eta_mutation: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 20,
            max_iter: 500,
            pc: 0.9,
            pm: 0.1,
            seed: 0,
            eta_crossover: 20.0,
            eta_mutation: 20.0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), MogaError> {
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(MogaError::InvalidPopulation(self.population_size));
        }
        for (name, value) in [("pc", self.pc), ("pm", self.pm)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(MogaError::InvalidProbability { name, value });
            }
        }
        for (name, value) in [
            ("eta_crossover", self.eta_crossover),
            ("eta_mutation", self.eta_mutation),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(MogaError::InvalidDistributionIndex { name, value });
            }
        }
        Ok(())
    }
}

/// Which objectives drive the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Distance loss and hop loss together (the full method).
    DistanceAndHops,
    /// Distance loss alone; `f2` is pinned to zero and never computed.
    DistanceOnly,
}

/// One candidate placement with its scores and ranking metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub placement: Placement,
    pub objectives: ObjectiveValues,
    /// Non-domination front index; 0 is the Pareto-best front.
    pub rank: usize,
    /// Crowding distance; boundary points get infinity.
    pub crowding: f64,
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoResult {
    /// The last generation, ranks and crowding included.
    pub final_population: Vec<Individual>,
    /// Minimum-`f2` member of the final population (ties: smaller `f1`,
    /// then first).
    pub chosen: Individual,
    /// Per-generation `(min f1, min f2)`, starting with the initial
    /// population: `max_iter + 1` entries after a full run.
    pub history: Vec<(f64, f64)>,
}

/// A localization instance the solver can evaluate: the network geometry,
/// its observed hop counts, and the anchor-distance table. Owns copies so
/// solver state is self-contained.
#[derive(Debug, Clone)]
pub struct LocalizationProblem {
    network: Network,
    real_hops: HopMatrix,
    table: DistanceTable,
    mode: ObjectiveMode,
    warm_start: Option<Placement>,
    h_max: u32,
}

impl LocalizationProblem {
    pub fn new(network: &Network, real_hops: &HopMatrix, table: &DistanceTable) -> Self {
        let h_max = diameter_hop_bound(network.area(), network.radius());
        LocalizationProblem {
            network: network.clone(),
            real_hops: real_hops.clone(),
            table: table.clone(),
            mode: ObjectiveMode::DistanceAndHops,
            warm_start: None,
            h_max,
        }
    }

    pub fn with_mode(mut self, mode: ObjectiveMode) -> Self {
        self.mode = mode;
        self
    }

    /// Seeds one initial individual with a known placement (for example a
    /// least-squares solution) instead of drawing it uniformly.
    pub fn with_warm_start(mut self, placement: Placement) -> Self {
        self.warm_start = Some(placement);
        self
    }

    pub fn n_unknowns(&self) -> usize {
        self.network.n_unknowns()
    }

    pub fn evaluate(&self, placement: &[Point]) -> ObjectiveValues {
        let anchors = self.network.anchor_positions();
        let f1 = distance_loss(placement, anchors, &self.table);
        let f2 = match self.mode {
            ObjectiveMode::DistanceAndHops => {
                let pred = predicted_hops(anchors, placement, self.network.radius());
                hop_loss(&pred, &self.real_hops, self.network.n_anchors(), self.h_max)
            }
            ObjectiveMode::DistanceOnly => 0.0,
        };
        ObjectiveValues { f1, f2 }
    }
}

/// `a` dominates `b`: no worse on both objectives, strictly better on one.
fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Fast non-dominated sorting: partitions point indices into fronts where
/// front `r` is dominated only by members of earlier fronts.
pub fn non_dominated_sort(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(points[i], points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(points[j], points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distances for one front: boundary points per objective get
/// infinity, interior points the normalized gap between their neighbors,
/// summed over objectives. Objectives with zero spread are skipped.
pub fn crowding_distance(front: &[(f64, f64)]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0f64; n];
    if n == 0 {
        return dist;
    }
    for obj in 0..2 {
        let value = |i: usize| if obj == 0 { front[i].0 } else { front[i].1 };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = value(order[n - 1]) - value(order[0]);
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = value(order[w + 1]) - value(order[w - 1]);
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Assigns ranks and crowding distances in place.
fn rank_population(population: &mut [Individual]) {
    let points: Vec<(f64, f64)> = population
        .iter()
        .map(|ind| (ind.objectives.f1, ind.objectives.f2))
        .collect();
    for (rank, front) in non_dominated_sort(&points).into_iter().enumerate() {
        let front_points: Vec<(f64, f64)> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&front_points);
        for (&i, &c) in front.iter().zip(&crowd) {
            population[i].rank = rank;
            population[i].crowding = c;
        }
    }
}

/// Incremental NSGA-II state: construct, call [`step`](Nsga2::step) once per
/// generation, then [`finish`](Nsga2::finish). [`run`] wraps the full loop.
pub struct Nsga2 {
    problem: LocalizationProblem,
    config: GaConfig,
    rng: ChaCha8Rng,
    population: Vec<Individual>,
    history: Vec<(f64, f64)>,
    generation: usize,
}

impl Nsga2 {
    pub fn new(problem: LocalizationProblem, config: GaConfig) -> Result<Self, MogaError> {
        config.validate()?;
        if let Some(ws) = &problem.warm_start {
            if ws.len() != problem.n_unknowns() {
                return Err(MogaError::WarmStartSizeMismatch {
                    expected: problem.n_unknowns(),
                    got: ws.len(),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let area = problem.network.area();
        let n_unknowns = problem.n_unknowns();
        let mut population: Vec<Individual> = (0..config.population_size)
            .map(|idx| {
                let placement: Placement = match (&problem.warm_start, idx) {
                    (Some(ws), 0) => ws.iter().map(|p| clamp_point(*p, area)).collect(),
                    _ => (0..n_unknowns)
                        .map(|_| {
                            Point::new(
                                rng.gen_range(0.0..=area.width),
                                rng.gen_range(0.0..=area.height),
                            )
                        })
                        .collect(),
                };
                let objectives = problem.evaluate(&placement);
                Individual { placement, objectives, rank: 0, crowding: 0.0 }
            })
            .collect();
        rank_population(&mut population);
        let history = vec![population_best(&population)];
        Ok(Nsga2 { problem, config, rng, population, history, generation: 0 })
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn history(&self) -> &[(f64, f64)] {
        &self.history
    }

    /// Evolves one generation: tournament mating, crossover, mutation,
    /// evaluation, and elitist truncation of parents plus offspring.
    pub fn step(&mut self) {
        let mu = self.config.population_size;
        let mut combined = self.population.clone();
        combined.reserve(mu);
        for _ in 0..mu / 2 {
            let p1 = self.tournament();
            let p2 = self.tournament();
            let (mut c1, mut c2) = self.crossover(p1, p2);
            self.mutate(&mut c1);
            self.mutate(&mut c2);
            for placement in [c1, c2] {
                let objectives = self.problem.evaluate(&placement);
                combined.push(Individual { placement, objectives, rank: 0, crowding: 0.0 });
            }
        }
        rank_population(&mut combined);
        self.population = select(combined, mu);
        rank_population(&mut self.population);
        self.history.push(population_best(&self.population));
        self.generation += 1;
    }

    /// Final population, chosen answer, and history.
    pub fn finish(self) -> ParetoResult {
        let chosen = choose(&self.population);
        ParetoResult {
            final_population: self.population,
            chosen,
            history: self.history,
        }
    }

    /// Binary tournament on (rank ascending, crowding descending).
    fn tournament(&mut self) -> Placement {
        let a = self.rng.gen_range(0..self.population.len());
        let b = self.rng.gen_range(0..self.population.len());
        let (ia, ib) = (&self.population[a], &self.population[b]);
        let winner = if ib.rank < ia.rank || (ib.rank == ia.rank && ib.crowding > ia.crowding) {
            ib
        } else {
            ia
        };
        winner.placement.clone()
    }

    /// Simulated binary crossover per gene, clamped to the area.
    fn crossover(&mut self, p1: Placement, p2: Placement) -> (Placement, Placement) {
        if self.rng.gen::<f64>() > self.config.pc {
            return (p1, p2);
        }
        let area = self.problem.network.area();
        let eta = self.config.eta_crossover;
        let mut c1 = p1;
        let mut c2 = p2;
        for (q1, q2) in c1.iter_mut().zip(c2.iter_mut()) {
            // Each node is crossed with probability 1/2 and passed through
            // whole otherwise: a node's (x, y) is the unit of inheritance,
            // so recombination mixes per-node placements between parents
            // instead of tearing coordinates apart.
            if self.rng.gen::<f64>() > 0.5 {
                continue;
            }
            for (g1, g2) in [(&mut q1.x, &mut q2.x), (&mut q1.y, &mut q2.y)] {
                if (*g1 - *g2).abs() < SBX_EPS {
                    continue;
                }
                let u: f64 = self.rng.gen();
                let beta = if u <= 0.5 {
                    (2.0 * u).powf(1.0 / (eta + 1.0))
                } else {
                    (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
                };
                let (a, b) = (*g1, *g2);
                *g1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
                *g2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
            }
            *q1 = clamp_point(*q1, area);
            *q2 = clamp_point(*q2, area);
        }
        (c1, c2)
    }

    /// Polynomial mutation per gene, clamped to the area.
    fn mutate(&mut self, placement: &mut Placement) {
        let area = self.problem.network.area();
        let eta = self.config.eta_mutation;
        for point in placement.iter_mut() {
            for (gene, hi) in [(&mut point.x, area.width), (&mut point.y, area.height)] {
                if self.rng.gen::<f64>() > self.config.pm {
                    continue;
                }
                let x = *gene;
                let d1 = x / hi;
                let d2 = (hi - x) / hi;
                let u: f64 = self.rng.gen();
                let dq = if u < 0.5 {
                    let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
                    v.powf(1.0 / (eta + 1.0)) - 1.0
                } else {
                    let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
                    1.0 - v.powf(1.0 / (eta + 1.0))
                };
                *gene = (x + dq * hi).clamp(0.0, hi);
            }
        }
    }
}

fn clamp_point(p: Point, area: crate::net::Area) -> Point {
    Point::new(p.x.clamp(0.0, area.width), p.y.clamp(0.0, area.height))
}

fn population_best(population: &[Individual]) -> (f64, f64) {
    let f1 = population.iter().map(|i| i.objectives.f1).fold(f64::INFINITY, f64::min);
    let f2 = population.iter().map(|i| i.objectives.f2).fold(f64::INFINITY, f64::min);
    (f1, f2)
}

/// Minimum-`f2` individual; ties broken by smaller `f1`, then first index.
fn choose(population: &[Individual]) -> Individual {
    population
        .iter()
        .reduce(|best, ind| {
            let b = (best.objectives.f2, best.objectives.f1);
            let c = (ind.objectives.f2, ind.objectives.f1);
            if c.0.total_cmp(&b.0).then(c.1.total_cmp(&b.1)).is_lt() {
                ind
            } else {
                best
            }
        })
        .expect("population is never empty")
        .clone()
}

/// Elitist truncation: whole fronts in rank order, then the split front by
/// crowding distance (descending, stable).
fn select(mut combined: Vec<Individual>, mu: usize) -> Vec<Individual> {
    combined.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then_with(|| b.crowding.total_cmp(&a.crowding))
    });
    combined.truncate(mu);
    combined
}

/// Runs the full NSGA-II loop for `config.max_iter` generations.
pub fn run(problem: LocalizationProblem, config: GaConfig) -> Result<ParetoResult, MogaError> {
    let mut solver = Nsga2::new(problem, config)?;
    for _ in 0..config.max_iter {
        solver.step();
    }
    Ok(solver.finish())
}
