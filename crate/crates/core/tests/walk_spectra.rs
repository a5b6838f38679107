mod common;

use hdx_core::complex::{complete_graph, cycle_graph};
use hdx_core::spectral::{
    local_spectral_sweep, second_eigenvalue, second_eigenvalue_power, walk_spectrum, WeightedGraph,
};

#[test]
fn small_graph_eigenvalues_against_dense_spectrum() {
    for (g, expect) in [(complete_graph(4), -1.0 / 3.0), (cycle_graph(4), 0.0)] {
        let w = WeightedGraph::from_complex(&g);
        let ev = second_eigenvalue(&w).unwrap();
        assert!((ev.lambda2 - expect).abs() < 1e-9, "{}", ev.lambda2);
        let spectrum = walk_spectrum(&w).unwrap();
        let mut sorted = spectrum.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert!((sorted[1] - expect).abs() < 1e-9);
    }
}

#[test]
fn power_iteration_agrees_on_petersen() {
    let w = WeightedGraph::from_complex(&hdx_core::complex::petersen_graph());
    let dense = second_eigenvalue(&w).unwrap().lambda2;
    let power = second_eigenvalue_power(&w, 20_000, 1e-12).unwrap();
    assert!((dense - power).abs() < 1e-6, "{dense} vs {power}");
}

#[test]
fn links_of_unip_complex() {
    let x = &common::unip(3).complex;
    let sweep = local_spectral_sweep(x, 0.5);
    assert!(sweep.all_connected);
    let mut bipartite = 0;
    for l in &sweep.links {
        if l.bipartite {
            bipartite += 1;
            let s = l.smallest.expect("spectrum");
            assert!((s + 1.0).abs() < 1e-9, "{:?}: {s}", l.face);
        }
    }
    assert_eq!(bipartite, x.count(0));
}
