mod common;

use hdx_core::complex::{cycle_graph, graph, octahedron, petersen_graph, tetrahedron_boundary, torus7};
use hdx_core::cones::{
    act_on_cone, build_cone, crad_upper, existence_equivalence_test, radius_and_diameter,
    verify_cone, ConeOutcome,
};
use hdx_core::homology::{Extended, FillMode, DEFAULT_BUDGET};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn built_cones_satisfy_the_cone_equation() {
    let cases = [
        (tetrahedron_boundary(), 1),
        (octahedron(), 1),
        (torus7(), 0),
        (petersen_graph(), 0),
        (common::unip(2).complex.clone(), 0),
        (common::unip(3).complex.clone(), 1),
    ];
    for (x, k) in cases {
        for apex in x.vertex_ids().into_iter().step_by(29) {
            let c = build_cone(&x, apex, k, FillMode::Greedy, DEFAULT_BUDGET)
                .unwrap()
                .cone()
                .expect("homology vanishes in these degrees");
            assert!(verify_cone(&x, &c).is_ok());
        }
    }
}

#[test]
fn zero_cone_radius_is_graph_radius() {
    let cases = [
        ("C6", cycle_graph(6)),
        ("Petersen", petersen_graph()),
        ("octahedron", octahedron()),
        ("torus", torus7()),
        ("Unip_4(F_2)", common::unip(2).complex.clone()),
    ];
    for (name, x) in cases {
        let (radius, _) = radius_and_diameter(&x).unwrap();
        let r = crad_upper(&x, 0, &x.vertex_ids(), FillMode::Exact, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.crad_upper, Extended::Finite(radius as u64), "{name}");
    }
}

#[test]
fn cone_existence_matches_vanishing_homology() {
    let s = tetrahedron_boundary();
    let v = existence_equivalence_test(&s, 1, DEFAULT_BUDGET).unwrap();
    assert!(v.homology_vanishes && v.cone_built && v.consistent);
    let v = existence_equivalence_test(&s, 2, DEFAULT_BUDGET).unwrap();
    assert!(!v.homology_vanishes && !v.cone_built && v.witness_nonbounding && v.consistent);
    let g = graph(4, &[(0, 1), (2, 3)]);
    let v = existence_equivalence_test(&g, 0, DEFAULT_BUDGET).unwrap();
    assert!(!v.cone_built && v.consistent);
    let t = torus7();
    let v = existence_equivalence_test(&t, 1, DEFAULT_BUDGET).unwrap();
    assert!(!v.cone_built && v.consistent);
    assert_eq!(v.first_nonvanishing, Some(1));
}

#[test]
fn group_action_preserves_cone_volume() {
    let cc = common::unip(3);
    let apex = cc.base_face().vertices()[0];
    let cone = match build_cone(&cc.complex, apex, 0, FillMode::Exact, DEFAULT_BUDGET).unwrap() {
        ConeOutcome::Built(c) => c,
        ConeOutcome::Obstructed(o) => panic!("obstructed at {:?}", o.face),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        let g = rng.random_range(0..cc.group.len() as u32);
        let moved = act_on_cone(Some(cc), g, &cone).unwrap();
        assert!(verify_cone(&cc.complex, &moved).is_ok());
        assert_eq!(moved.vol(), cone.vol());
        assert_eq!(moved.apex, cc.act(g, apex));
    }
}

#[test]
fn filling_constants_on_the_sphere() {
    let s = tetrahedron_boundary();
    let m = hdx_core::cones::m_constants(&s, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(m.m[0], Extended::Finite(1));
    assert_eq!(m.m[1], Extended::Finite(1));
    assert!(m.all_hold);
}
