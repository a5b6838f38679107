#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use hdx_core::complex::{
    build_coset_complex, complete_graph, cycle_graph, graph, octahedron, petersen_graph,
    tetrahedron_boundary, torus7, CosetComplex, Simplex, SimplicialComplex,
};
use hdx_core::groups::{Construction, DEFAULT_SIZE_CAP};

pub fn unip(q: u32) -> &'static CosetComplex {
    static Q2: OnceLock<CosetComplex> = OnceLock::new();
    static Q3: OnceLock<CosetComplex> = OnceLock::new();
    let cell = match q {
        2 => &Q2,
        3 => &Q3,
        _ => panic!("only q = 2, 3 are cached"),
    };
    cell.get_or_init(|| {
        let c = Construction::UnipFq { n: 3, q };
        let g = Arc::new(c.build(DEFAULT_SIZE_CAP).unwrap());
        let ks = c.subgroups(&g).unwrap();
        build_coset_complex(g, ks).unwrap()
    })
}

pub fn disjoint_triangles() -> SimplicialComplex {
    SimplicialComplex::from_maximal([Simplex::new(vec![0, 1, 2]), Simplex::new(vec![3, 4, 5])])
}

pub fn single_edge() -> SimplicialComplex {
    graph(2, &[(0, 1)])
}

/// Small reference complexes with a name.
pub fn fixtures() -> Vec<(&'static str, SimplicialComplex)> {
    vec![
        ("tetrahedron boundary", tetrahedron_boundary()),
        ("octahedron", octahedron()),
        ("torus", torus7()),
        ("C6", cycle_graph(6)),
        ("K4", complete_graph(4)),
        ("K5", complete_graph(5)),
        ("Petersen", petersen_graph()),
        ("single edge", single_edge()),
        ("disjoint triangles", disjoint_triangles()),
    ]
}
