//! Range-free localization for wireless sensor networks.
//!
//! Estimates the coordinates of unknown sensor nodes from hop counts alone
//! — no ranging hardware — combining three ingredients:
//!
//! * **DV-Hop baseline** ([`dvhop`]): per-anchor average hop distance, hop
//!   count × average products, and linearized least squares.
//! * **DEMN** ([`demn`]): when an unknown node is detected by two anchors,
//!   the expected distance over their *cross domain* (the intersection of
//!   the detection disk and the hop-count reach disk) replaces the coarse
//!   hop product. Closed-form inner integrals plus adaptive quadrature; a
//!   seeded Monte Carlo oracle cross-checks every region.
//! * **Multi-objective search** ([`moga`]): NSGA-II over candidate
//!   placements minimizing distance-table disagreement ([`objectives`] `f1`)
//!   and observed-connectivity disagreement (`f2`), returning the
//!   placement most consistent with what the network actually measured.
//!
//! [`net`] provides network generation (random and C/O/X masked
//! topologies), BFS hop counting, and file persistence; [`metrics`] the
//! evaluation statistics (normalized error, accuracy, gain, Student-t
//! intervals); [`experiment`] a deterministic, parallel benchmark grid with
//! CSV/JSON reporting; [`quad`] the adaptive Simpson integrator used by the
//! expected-distance math.

pub mod demn;
pub mod dvhop;
pub mod experiment;
pub mod metrics;
pub mod moga;
pub mod net;
pub mod objectives;
pub mod quad;

pub use demn::{
    demn_estimates, evaluate, monte_carlo_eval, CrossDomainCase, CrossDomainEval, DemnError,
    McEval, RegionAreas, UpperBoundModel,
};
pub use dvhop::{
    avg_hop_distance, baseline_placement, classic_distance, least_squares_position,
    AvgHopDistance, DistanceEstimate, DvHopError, EstimateSource,
};
pub use experiment::{
    run_experiment, summarize_rows, CellSummary, ExperimentConfig, ExperimentError,
    ExperimentReport, Method, RepeatRow,
};
pub use metrics::{ala, ales, apg, confidence_interval, MetricsError};
pub use moga::{
    non_dominated_sort, run, GaConfig, Individual, LocalizationProblem, MogaError, Nsga2,
    ObjectiveMode, ParetoResult,
};
pub use net::{
    generate_network, hop_matrix, load_network, save_network, Area, HopMatrix, NetError, Network,
    Point, TopologyShape,
};
pub use objectives::{
    distance_loss, distance_table, diameter_hop_bound, hop_loss, least_squares_placement,
    predicted_hops, DistanceTable, ObjectiveValues, Placement,
};
