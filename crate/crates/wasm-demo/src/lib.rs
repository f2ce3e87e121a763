//! Browser bindings for the localization toolkit.
//!
//! Three interactive surfaces back the demo page: a network playground
//! (generate a layout, localize it with any method), a cross-domain
//! explorer (analytic expected distance with a Monte Carlo cross-check),
//! and a steppable solver session for animating convergence. All results
//! cross the boundary as JSON strings so the page stays framework-free.
//!
//! Fallible operations live in `*_impl` functions with string errors; the
//! exported wrappers convert those to `JsError` at the boundary, because
//! `JsError` itself only exists at runtime inside a browser.

use hoploc_core::demn::{evaluate, monte_carlo_eval, CrossDomainCase, UpperBoundModel};
use hoploc_core::dvhop::baseline_placement;
use hoploc_core::experiment::Method;
use hoploc_core::metrics::ales;
use hoploc_core::moga::{run, GaConfig, LocalizationProblem, Nsga2, ObjectiveMode};
use hoploc_core::net::{generate_network, hop_matrix, Area, HopMatrix, Network, TopologyShape};
use hoploc_core::objectives::{distance_table, least_squares_placement};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo payloads serialize")
}

fn parse_method(name: &str) -> Result<Method, String> {
    Method::from_name(name).ok_or_else(|| {
        format!("unknown method {name:?} (expected dvhop, demn-hop, demn-only, or hop-only)")
    })
}

fn ga_config(pop: usize, iters: usize, pc: f64, pm: f64, seed: u32) -> GaConfig {
    GaConfig {
        population_size: pop,
        max_iter: iters,
        pc,
        pm,
        seed: seed as u64,
        ..GaConfig::default()
    }
}

#[derive(Serialize)]
struct NodeOut {
    x: f64,
    y: f64,
    anchor: bool,
}

#[derive(Serialize)]
struct LocalizeOut {
    placement: Vec<(f64, f64)>,
    ales_percent: f64,
    /// Per-generation `(min f1, min f2)`; absent for the least-squares paths.
    history: Option<Vec<(f64, f64)>>,
}

#[derive(Serialize)]
struct CrossDomainOut {
    expected: f64,
    d1: f64,
    d2: f64,
    d3: f64,
    x_cross: f64,
    mc_expected: Option<f64>,
    mc_std_error: Option<f64>,
}

#[derive(Serialize)]
struct SolverStateOut {
    generation: usize,
    done: bool,
    /// Current minimum-`f2` placement (the would-be chosen individual).
    best: Vec<(f64, f64)>,
    best_f1: f64,
    best_f2: f64,
    ales_percent: f64,
    /// Objective pairs of the current rank-0 front.
    front: Vec<(f64, f64)>,
    /// Per-generation `(min f1, min f2)` so far.
    history: Vec<(f64, f64)>,
}

/// A generated network held on the Rust side; the page queries it as JSON
/// and runs localization methods against it.
#[wasm_bindgen]
pub struct NetworkSession {
    network: Network,
    hops: HopMatrix,
}

impl NetworkSession {
    fn new_impl(
        shape: &str,
        nodes: usize,
        anchors: usize,
        radius: f64,
        width: f64,
        height: f64,
        seed: u32,
    ) -> Result<NetworkSession, String> {
        let shape = TopologyShape::from_name(shape).map_err(|e| e.to_string())?;
        let area = Area::new(width, height);
        let network = generate_network(shape, nodes, anchors, radius, area, seed as u64)
            .map_err(|e| e.to_string())?;
        let hops = hop_matrix(&network);
        Ok(NetworkSession { network, hops })
    }

    #[allow(clippy::too_many_arguments)]
    fn localize_impl(
        &self,
        method: &str,
        pop: usize,
        iters: usize,
        pc: f64,
        pm: f64,
        seed: u32,
        warm_start: bool,
    ) -> Result<String, String> {
        let method = parse_method(method)?;
        let ub = UpperBoundModel::HopTimesRadius;
        let (placement, history) = match method {
            Method::DvHop => (baseline_placement(&self.network, &self.hops), None),
            Method::DemnOnly => {
                let table = distance_table(&self.network, &self.hops, Some(&ub))
                    .map_err(|e| e.to_string())?;
                (least_squares_placement(&table, &self.network), None)
            }
            Method::DemnHop | Method::HopOnly => {
                let demn = matches!(method, Method::DemnHop).then_some(&ub);
                let table =
                    distance_table(&self.network, &self.hops, demn).map_err(|e| e.to_string())?;
                let mut problem = LocalizationProblem::new(&self.network, &self.hops, &table)
                    .with_mode(ObjectiveMode::DistanceAndHops);
                if warm_start {
                    problem =
                        problem.with_warm_start(baseline_placement(&self.network, &self.hops));
                }
                let result =
                    run(problem, ga_config(pop, iters, pc, pm, seed)).map_err(|e| e.to_string())?;
                (result.chosen.placement, Some(result.history))
            }
        };
        let out = LocalizeOut {
            ales_percent: ales(&placement, self.network.unknown_positions(), self.network.radius()),
            placement: placement.iter().map(|p| (p.x, p.y)).collect(),
            history,
        };
        Ok(to_json(&out))
    }
}

#[wasm_bindgen]
impl NetworkSession {
    /// Generates a layout. Shapes: `random`, `c`, `o`, `x`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        shape: &str,
        nodes: usize,
        anchors: usize,
        radius: f64,
        width: f64,
        height: f64,
        seed: u32,
    ) -> Result<NetworkSession, JsError> {
        Self::new_impl(shape, nodes, anchors, radius, width, height, seed)
            .map_err(|e| JsError::new(&e))
    }

    /// All node positions with their anchor flag, as JSON.
    pub fn nodes_json(&self) -> String {
        let nodes: Vec<NodeOut> = self
            .network
            .positions()
            .iter()
            .enumerate()
            .map(|(i, p)| NodeOut { x: p.x, y: p.y, anchor: i < self.network.n_anchors() })
            .collect();
        to_json(&nodes)
    }

    /// One-hop links as index pairs, as JSON.
    pub fn edges_json(&self) -> String {
        let n = self.network.len();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for k in i + 1..n {
                if self.hops.get(i, k) == Some(1) {
                    edges.push((i, k));
                }
            }
        }
        to_json(&edges)
    }

    /// Runs one localization method to completion and reports the placement,
    /// its normalized error, and (for the solver methods) the history.
    #[allow(clippy::too_many_arguments)]
    pub fn localize_json(
        &self,
        method: &str,
        pop: usize,
        iters: usize,
        pc: f64,
        pm: f64,
        seed: u32,
        warm_start: bool,
    ) -> Result<String, JsError> {
        self.localize_impl(method, pop, iters, pc, pm, seed, warm_start)
            .map_err(|e| JsError::new(&e))
    }
}

fn cross_domain_impl(
    d: f64,
    radius: f64,
    ub: f64,
    m: u32,
    mc_samples: u32,
) -> Result<String, String> {
    let ub = if ub > 0.0 { ub } else { m as f64 * radius };
    let case = CrossDomainCase::new(d, radius, ub, m).map_err(|e| e.to_string())?;
    let analytic = evaluate(&case).map_err(|e| e.to_string())?;
    let mc = if mc_samples > 0 {
        Some(monte_carlo_eval(&case, mc_samples as u64, 1).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok(to_json(&CrossDomainOut {
        expected: analytic.expected,
        d1: analytic.areas.d1,
        d2: analytic.areas.d2,
        d3: analytic.areas.d3,
        x_cross: analytic.x_cross,
        mc_expected: mc.as_ref().map(|m| m.expected),
        mc_std_error: mc.as_ref().map(|m| m.std_error),
    }))
}

/// Analytic cross-domain expected distance for two anchors `d` meters
/// apart, with an optional Monte Carlo cross-check (`mc_samples = 0` skips
/// it). `ub ≤ 0` selects the default bound `m · radius`.
#[wasm_bindgen]
pub fn cross_domain_json(
    d: f64,
    radius: f64,
    ub: f64,
    m: u32,
    mc_samples: u32,
) -> Result<String, JsError> {
    cross_domain_impl(d, radius, ub, m, mc_samples).map_err(|e| JsError::new(&e))
}

/// An in-progress solver run the page can advance a few generations per
/// animation frame.
#[wasm_bindgen]
pub struct SolverSession {
    solver: Nsga2,
    truth: Vec<hoploc_core::net::Point>,
    radius: f64,
    max_iter: usize,
}

impl SolverSession {
    #[allow(clippy::too_many_arguments)]
    fn new_impl(
        session: &NetworkSession,
        method: &str,
        pop: usize,
        iters: usize,
        pc: f64,
        pm: f64,
        seed: u32,
        warm_start: bool,
    ) -> Result<SolverSession, String> {
        let demn = match parse_method(method)? {
            Method::DemnHop => Some(&UpperBoundModel::HopTimesRadius),
            Method::HopOnly => None,
            other => {
                return Err(format!(
                    "method {other} has no solver loop to animate; use demn-hop or hop-only"
                ))
            }
        };
        let table = distance_table(&session.network, &session.hops, demn)
            .map_err(|e| e.to_string())?;
        let mut problem = LocalizationProblem::new(&session.network, &session.hops, &table)
            .with_mode(ObjectiveMode::DistanceAndHops);
        if warm_start {
            problem = problem.with_warm_start(baseline_placement(&session.network, &session.hops));
        }
        let solver =
            Nsga2::new(problem, ga_config(pop, iters, pc, pm, seed)).map_err(|e| e.to_string())?;
        Ok(SolverSession {
            solver,
            truth: session.network.unknown_positions().to_vec(),
            radius: session.network.radius(),
            max_iter: iters,
        })
    }
}

#[wasm_bindgen]
impl SolverSession {
    /// Starts a solver run on the session's network. Methods: `demn-hop`
    /// (expected-distance table) or `hop-only` (classic table).
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        session: &NetworkSession,
        method: &str,
        pop: usize,
        iters: usize,
        pc: f64,
        pm: f64,
        seed: u32,
        warm_start: bool,
    ) -> Result<SolverSession, JsError> {
        Self::new_impl(session, method, pop, iters, pc, pm, seed, warm_start)
            .map_err(|e| JsError::new(&e))
    }

    /// Advances up to `generations` steps (stopping at the configured
    /// iteration budget) and returns the current state as JSON.
    pub fn step_json(&mut self, generations: usize) -> String {
        for _ in 0..generations {
            if self.solver.generation() >= self.max_iter {
                break;
            }
            self.solver.step();
        }
        let population = self.solver.population();
        let best = population
            .iter()
            .min_by(|a, b| {
                (a.objectives.f2, a.objectives.f1)
                    .partial_cmp(&(b.objectives.f2, b.objectives.f1))
                    .expect("objectives are finite")
            })
            .expect("population is non-empty");
        let front: Vec<(f64, f64)> = population
            .iter()
            .filter(|ind| ind.rank == 0)
            .map(|ind| (ind.objectives.f1, ind.objectives.f2))
            .collect();
        to_json(&SolverStateOut {
            generation: self.solver.generation(),
            done: self.solver.generation() >= self.max_iter,
            best_f1: best.objectives.f1,
            best_f2: best.objectives.f2,
            ales_percent: ales(&best.placement, &self.truth, self.radius),
            best: best.placement.iter().map(|p| (p.x, p.y)).collect(),
            front,
            history: self.solver.history().to_vec(),
        })
    }
}
