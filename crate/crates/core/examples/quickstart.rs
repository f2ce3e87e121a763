//! Minimal end-to-end run: generate a network, build the mixed distance
//! table, search placements with the two-objective solver.

use hoploc_core::{
    distance_table, generate_network, hop_matrix, run, Area, GaConfig, LocalizationProblem,
    TopologyShape, UpperBoundModel,
};

fn main() {
    let net = generate_network(TopologyShape::Random, 100, 20, 25.0, Area::new(100.0, 100.0), 7)
        .unwrap();
    let hops = hop_matrix(&net);
    let table = distance_table(&net, &hops, Some(&UpperBoundModel::HopTimesRadius)).unwrap();
    let result = run(
        LocalizationProblem::new(&net, &hops, &table),
        GaConfig { max_iter: 100, ..GaConfig::default() },
    )
    .unwrap();
    println!("placed {} unknowns", result.chosen.placement.len());
}
