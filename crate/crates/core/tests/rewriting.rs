mod common;

use hdx_core::complex::Vertex;
use hdx_core::expansion::p_poly;
use hdx_core::presentation::{
    apply_relation, path_to_word, q_independence, relations_from_tables, replay_path, sfill1_upper,
    triangle_trace, verify_residual_relations, Family, Letter, Move, Orientation, Word,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_relation_applications_preserve_evaluation() {
    let cc = common::unip(3);
    let g = &cc.group;
    let rs = relations_from_tables(g, &cc.subgroups);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut w = Word::default();
    let mut applied = 0;
    while applied < 1000 {
        let i = rng.random_range(0..cc.subgroups.len());
        let before = w.evaluate(g);
        if w.len() >= 2 && rng.random_range(0..2) == 0 {
            let at = rng.random_range(0..w.len() - 1);
            let (a, b) = (w.letters[at].element, w.letters[at + 1].element);
            let c = g.inverse(g.mul(a, b));
            if let Ok(out) = apply_relation(g, &rs, &w, at, i, (a, b, c), Orientation::Forward) {
                assert_eq!(out.evaluate(g), before);
                w = out;
                applied += 1;
                continue;
            }
        }
        // plant g3^{-1} and expand it
        let triples = &rs.triples[i];
        let t = triples[rng.random_range(0..triples.len())];
        let at = rng.random_range(0..=w.len());
        let mut letters = w.letters.clone();
        letters.insert(at, Letter::new(&cc.subgroups, i, g.inverse(t.2)).unwrap());
        let planted = Word::new(letters);
        let out = apply_relation(g, &rs, &planted, at, i, t, Orientation::Backward).unwrap();
        assert_eq!(out.evaluate(g), planted.evaluate(g));
        w = out;
        applied += 1;
    }
}

#[test]
fn charges_for_each_move_type() {
    let cc = common::unip(3);
    let g = &cc.group;
    let e = g.identity();
    let k0: Vec<u32> = cc.subgroups[0].members().iter().copied().filter(|&x| x != e).collect();
    let s = k0[0];
    let t = k0.iter().copied().find(|&t| t != s && g.mul(s, t) != e).unwrap();
    let l = |x| Letter::new(&cc.subgroups, 0, x).unwrap();
    let st = g.mul(s, t);
    assert_ne!(st, e);
    let cases: Vec<(Word, Vec<Move>, u64)> = vec![
        (Word::new(vec![l(s), l(g.inverse(s))]), vec![], 1),
        (
            Word::new(vec![l(s), l(t), l(g.inverse(t)), l(g.inverse(s))]),
            vec![Move::Free { at: 1 }],
            6 + 4 * 3 + 1,
        ),
        (
            Word::new(vec![l(s), l(e), l(e), l(g.inverse(s))]),
            vec![Move::Identity { at: 1 }, Move::Identity { at: 1 }],
            (4 + 2 * 3) + (4 + 2 * 2) + 1,
        ),
        (
            Word::new(vec![l(s), l(t), l(g.inverse(st))]),
            vec![Move::Merge { at: 0, subgroup: 0 }],
            4 + 2 * 2 + 1,
        ),
        (
            Word::new(vec![l(st), l(g.inverse(st))]),
            vec![
                Move::Split {
                    at: 0,
                    subgroup: 0,
                    left: s,
                },
                Move::Merge { at: 1, subgroup: 0 },
            ],
            2 + (4 + 2 * 2) + 1,
        ),
    ];
    for (w, trace, expect) in cases {
        let b = sfill1_upper(g, &cc.subgroups, &w, &trace).unwrap();
        assert_eq!(b.trace_bound, expect, "{trace:?}");
        assert_eq!(b.ledger.sfill1_upper, expect);
    }
}

#[test]
fn triangle_words_stay_below_the_ceiling() {
    let cc = common::unip(3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for f in cc.complex.faces(2) {
        let mut path: Vec<Vertex> = f.vertices().to_vec();
        path.rotate_left(rng.random_range(0..3));
        if rng.random_range(0..2) == 1 {
            path.swap(1, 2);
        }
        let pw = path_to_word(cc, &path).unwrap();
        assert!(replay_path(cc, &path, &pw));
        let trace = triangle_trace(cc, &pw.word).unwrap();
        let b = sfill1_upper(&cc.group, &cc.subgroups, &pw.word, &trace).unwrap();
        assert_eq!(b.ceiling, p_poly(3, b.d));
        assert!(b.trace_bound <= b.ceiling, "{} > {}", b.trace_bound, b.ceiling);
    }
}

#[test]
fn back_and_forth_path() {
    let cc = common::unip(3);
    let edge = cc.complex.faces(1)[0].vertices().to_vec();
    let pw = path_to_word(cc, &edge).unwrap();
    assert_eq!(pw.word.len(), 2);
    assert!(pw.word.is_trivial(&cc.group));
}

#[test]
fn residual_relations_as_matrices() {
    let r = verify_residual_relations(Family::Field, 3, &[2, 3, 5]).unwrap();
    assert!(r.passed);
    let additive = r
        .entries
        .iter()
        .find(|e| e.q == 5 && e.relation == "corner_additivity")
        .unwrap();
    assert_eq!(additive.checked, 25);
    let r = verify_residual_relations(Family::Polynomial, 3, &[2]).unwrap();
    assert!(r.passed);
}

#[test]
fn application_counts_are_independent_of_q() {
    let shapes = q_independence(3, &[3, 5, 7]).unwrap();
    assert!(shapes.len() > 5);
    for s in shapes {
        assert!(s.equal, "{}: {:?}", s.shape, s.counts);
    }
}
