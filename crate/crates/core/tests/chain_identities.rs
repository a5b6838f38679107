mod common;

use hdx_core::complex::SimplicialComplex;
use hdx_core::homology::{betti, boundary, cobetti, coboundary, ChainVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_chain(x: &SimplicialComplex, k: isize, rng: &mut ChaCha8Rng) -> ChainVector {
    let n = x.count(k);
    ChainVector::from_indices(x, k, (0..n).filter(|_| rng.random_range(0..2) == 1))
}

fn check_identities(name: &str, x: &SimplicialComplex, samples: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for k in 0..=x.top_dim() {
        // on basis vectors, which settles linearity
        for i in 0..x.count(k) {
            let a = ChainVector::from_indices(x, k, [i]);
            let da = boundary(x, k, &a).unwrap();
            assert!(boundary(x, k - 1, &da).unwrap().is_zero(), "{name}: boundary twice, dim {k}");
            if k < x.top_dim() {
                let dphi = coboundary(x, k, &a).unwrap();
                if k + 1 < x.top_dim() {
                    assert!(coboundary(x, k + 1, &dphi).unwrap().is_zero(), "{name}: d twice, dim {k}");
                }
            }
        }
        for _ in 0..samples {
            let a = random_chain(x, k, &mut rng);
            let da = boundary(x, k, &a).unwrap();
            assert!(boundary(x, k - 1, &da).unwrap().is_zero());
            let phi = random_chain(x, k - 1, &mut rng);
            let lhs = coboundary(x, k - 1, &phi).unwrap().eval(&a);
            let rhs = phi.eval(&da);
            assert_eq!(lhs, rhs, "{name}: duality at dim {k}");
        }
    }
}

#[test]
fn identities_on_reference_complexes() {
    for (name, x) in common::fixtures() {
        check_identities(name, &x, 50);
    }
}

#[test]
fn identities_on_coset_complexes() {
    for q in [2, 3] {
        check_identities(&format!("Unip_4(F_{q})"), &common::unip(q).complex, 20);
    }
}

#[test]
fn homology_of_reference_complexes() {
    let s = hdx_core::complex::tetrahedron_boundary();
    assert_eq!((betti(&s, 0), betti(&s, 1), betti(&s, 2)), (0, 0, 1));
    let t = hdx_core::complex::torus7();
    assert_eq!((betti(&t, 0), betti(&t, 1), betti(&t, 2)), (0, 2, 1));
    assert_eq!(cobetti(&t, 1), 2);
    let d = common::disjoint_triangles();
    assert_eq!(betti(&d, 0), 1);
}

#[test]
fn coset_complex_low_degree_homology() {
    let x = &common::unip(3).complex;
    assert_eq!((betti(x, 0), betti(x, 1), cobetti(x, 1), betti(x, 2)), (0, 0, 0, 134));
    // over F_2 the q = 2 complex is not simply connected mod 2
    let x = &common::unip(2).complex;
    assert_eq!((betti(x, 0), betti(x, 1), cobetti(x, 1)), (0, 2, 2));
}
