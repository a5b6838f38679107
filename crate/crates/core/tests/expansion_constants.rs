mod common;

use hdx_core::complex::{complete_graph, cycle_graph, petersen_graph, tetrahedron_boundary};
use hdx_core::cones::{crad_upper, radius_and_diameter};
use hdx_core::expansion::{
    certificate_theorem_crad, certificate_theorem_n0n1, cheeger_graph, exp0_known, exp_b,
    exp_b_by_definition, p_poly, verify_chung_bound, Budget, ExpansionError, Known,
};
use hdx_core::groups::bounded_generation_diameter;
use hdx_core::homology::{Extended, FillMode, DEFAULT_BUDGET};
use hdx_core::rational::Rational;

#[test]
fn quotient_enumeration_matches_definition() {
    let mut compared = 0;
    for (name, x) in common::fixtures() {
        for k in [0, 1] {
            if k > x.top_dim() || x.count(k) > 14 {
                continue;
            }
            let fast = exp_b(&x, k, Budget::default()).unwrap().map(|q| q.value);
            let slow = exp_b_by_definition(&x, k).unwrap();
            assert_eq!(fast, slow, "{name}, k = {k}");
            compared += 1;
        }
    }
    assert!(compared >= 12);
}

#[test]
fn single_edge_and_disconnected_values() {
    let e = common::single_edge();
    assert_eq!(exp_b(&e, 0, Budget::default()).unwrap().unwrap().value, Rational::from_integer(2));
    let d = common::disjoint_triangles();
    assert_eq!(exp_b(&d, 0, Budget::default()).unwrap().unwrap().value, Rational::from_integer(0));
}

#[test]
fn crad_certificate_on_the_sphere() {
    let x = tetrahedron_boundary();
    for k in [0, 1] {
        let r = crad_upper(&x, k, &x.vertex_ids(), FillMode::Exact, DEFAULT_BUDGET).unwrap();
        let exact = exp_b(&x, k, Budget::default()).unwrap().unwrap().value;
        let rec = certificate_theorem_crad(2, k, true, r.crad_upper, &Known::Exact(exact)).unwrap();
        assert_eq!(rec.holds, Some(true), "k = {k}: {exact} vs {}", rec.value);
    }
}

#[test]
fn certificates_on_unip_over_f3() {
    let cc = common::unip(3);
    let x = &cc.complex;
    let known = exp0_known(x, Budget::default()).unwrap();
    match &known {
        Known::Bracket { lower, upper } => assert!(lower <= upper),
        Known::Exact(_) => {}
        other => panic!("no value for Exp^0: {other:?}"),
    }
    let (radius, _) = radius_and_diameter(x).unwrap();
    let crad = Extended::Finite(radius as u64);
    let rec = certificate_theorem_crad(2, 0, true, crad, &known).unwrap();
    assert_eq!(rec.value, Rational::new(1, 3 * radius as i64));
    assert_eq!(rec.holds, Some(true));

    let ks = &cc.subgroups;
    let diam = bounded_generation_diameter(&cc.group, &[ks[0].clone(), ks[2].clone()]).unwrap();
    let recs = certificate_theorem_n0n1(2, Some(diam), None, &known, &Known::Unknown).unwrap();
    assert_eq!(recs[0].value, Rational::new(1, 3 * (diam as i64 + 1)));
    assert_eq!(recs[0].holds, Some(true));
    assert_eq!(p_poly(1, 1), 77);
}

#[test]
fn chung_bound_on_edge_transitive_graphs() {
    for (name, g) in [
        ("C6", cycle_graph(6)),
        ("K4", complete_graph(4)),
        ("K5", complete_graph(5)),
        ("Petersen", petersen_graph()),
    ] {
        let r = verify_chung_bound(&g, None).unwrap();
        assert!(r.holds, "{name}: h = {} < {}", r.h, r.bound);
    }
    let c = cheeger_graph(&petersen_graph()).unwrap();
    assert_eq!(c.h, Rational::new(1, 3));
}

#[test]
fn chung_on_unip_skeleton() {
    let skeleton = common::unip(2).complex.skeleton(1);
    assert_eq!(skeleton.count(0), 32);
    match verify_chung_bound(&skeleton, None) {
        Ok(r) => assert!(r.holds),
        Err(ExpansionError::NotEdgeTransitive { h, diameter }) => {
            assert!(h > Rational::from_integer(0) && diameter > 0);
        }
        Err(e) => panic!("{e}"),
    }
}
