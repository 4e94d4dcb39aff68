//! Shared fixtures for the benchmark targets.

use cokern_core::lce::{generate_dataset, Dataset, LceProblem};
use cokern_core::statevector::CouplingGraph;

/// A deterministic LCE instance with `per_label` points per class.
pub fn fixture(n: usize, per_label: usize) -> (CouplingGraph, Dataset) {
    let graph = CouplingGraph::heavy_hex_fragment(n).expect("valid size");
    let problem = LceProblem::new(graph.clone(), 42).expect("valid graph");
    let data = generate_dataset(&problem, per_label, 0.01, 7).expect("valid parameters");
    (graph, data)
}
