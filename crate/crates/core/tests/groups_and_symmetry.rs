mod common;

use std::sync::Arc;

use hdx_core::algebra::{verify_pure_degree_steinberg, verify_steinberg};
use hdx_core::complex::{build_coset_complex, check_strong_symmetry, tetrahedron_boundary};
use hdx_core::groups::{bounded_generation_diameter, Construction, DEFAULT_SIZE_CAP};

#[test]
fn steinberg_relations_hold_exhaustively() {
    for q in [2, 3, 5] {
        let r = verify_steinberg(q, 4).unwrap();
        assert!(r.passed(), "q = {q}: {:?}", r.failures);
    }
    for q in [2, 3] {
        let r = verify_pure_degree_steinberg(q, 4).unwrap();
        assert!(r.passed(), "q = {q}: {:?}", r.failures);
    }
}

#[test]
fn warm_up_bounded_generation() {
    for q in [2, 3, 5] {
        let c = Construction::UnipFq { n: 3, q };
        let g = c.build(DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(g.len(), (q as usize).pow(6));
        let ks = c.subgroups(&g).unwrap();
        let d = bounded_generation_diameter(&g, &[ks[0].clone(), ks[2].clone()]).unwrap();
        assert!(d <= 6, "q = {q}: diameter {d}");
    }
}

#[test]
fn polynomial_link_group_bounded_generation() {
    let c = Construction::UnipPoly { n: 3, q: 2 };
    let g = c.build(DEFAULT_SIZE_CAP).unwrap();
    assert_eq!(g.len(), 1 << 16);
    let ks = c.subgroups(&g).unwrap();
    let d = bounded_generation_diameter(&g, &ks).unwrap();
    assert!(d <= 2 + 4 * 4, "diameter {d}");
}

#[test]
fn strong_symmetry_of_unip_complexes() {
    for q in [2, 3] {
        let cert = check_strong_symmetry(common::unip(q));
        assert!(cert.criterion_holds, "q = {q}: {:?}", cert.criterion_failures);
        assert!(cert.transitive && cert.agree);
        assert_eq!(cert.orbit_size, cert.top_faces);
    }
}

#[test]
fn coset_complex_counts() {
    let x = &common::unip(3).complex;
    assert_eq!((x.count(0), x.count(1), x.count(2)), (135, 729, 729));
    assert!(x.is_pure() && x.is_partite());
}

#[test]
fn symmetric_group_orbit_on_sphere() {
    let x = tetrahedron_boundary();
    let gens = vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]];
    for p in &gens {
        assert!(x.is_automorphism(p));
    }
    assert_eq!(x.top_face_orbit(&gens), 4);
}

#[test]
fn generating_failure_is_reported() {
    let c = Construction::UnipFq { n: 3, q: 2 };
    let g = Arc::new(c.build(DEFAULT_SIZE_CAP).unwrap());
    let ks = c.subgroups(&g).unwrap();
    assert!(bounded_generation_diameter(&g, &ks[..1]).is_err());
    assert!(build_coset_complex(g, ks[..1].to_vec()).is_err());
}
