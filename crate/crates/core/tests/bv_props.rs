use std::collections::BTreeMap;

use num::One;
use opnerve::bv::*;
use opnerve::fixtures;
use opnerve::hops::SuHomotopyOperad;
use opnerve::linalg::{q, Q};
use opnerve::nerve::composite_dendrex;
use opnerve::operads::DgColoredOperad;
use opnerve::trees::{bit, popcount, trees_up_to, Tree, TreeMapKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn interval_laws() {
    let r = check_interval();
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn d_squared_vanishes_up_to_five_vertices() {
    for t in trees_up_to(5, 3) {
        let w = BVOperad::build(&t);
        let r = check_d_squared(&w);
        assert!(r.passed(), "{}", t.planar_encoding());
    }
}

#[test]
fn component_dimensions_are_powers_of_three() {
    for t in trees_up_to(4, 3) {
        let w = BVOperad::build(&t);
        for c in w.components() {
            let cc = w.chain_complex(c).unwrap();
            assert_eq!(cc.dim(), 3usize.pow(popcount(w.inner(c)) as u32));
        }
        // the trivial tree has only its unit
        let triv = BVOperad::build(&Tree::trivial());
        assert_eq!(triv.components(), vec![Comp::Unit(0)]);
    }
}

#[test]
fn two_vertex_differential_by_hand() {
    let t = Tree::linear(2);
    let w = BVOperad::build(&t);
    let a = t.inner_edges()[0];
    let all = t.all_vertices();
    let d = w.d(&w.generator((all, bit(a))));
    let lower = t.consumer(a).unwrap();
    let upper = t.producer(a).unwrap();
    let (graft, sign) = w
        .compose(
            &w.generator((bit(lower), 0)),
            a,
            &w.generator((bit(upper), 0)),
        )
        .unwrap();
    assert_eq!(sign, 1);
    let want: BvVec = [(graft, Q::one()), (w.generator((all, 0)), -Q::one())]
        .into_iter()
        .collect();
    assert_eq!(d, want);
}

#[test]
fn bv_operads_satisfy_the_axioms() {
    for t in trees_up_to(4, 2) {
        let w = BVOperad::build(&t);
        let r = check_bv_operad(&w).unwrap();
        assert!(r.passed(), "{}: {}", t.planar_encoding(), r.to_json());
    }
}

#[test]
fn cosimplicial_maps_are_dg_operad_maps() {
    for t in trees_up_to(3, 2) {
        for m in t.cofaces_and_codegeneracies() {
            let f = bv_cosimplicial_map(&m);
            let r = check_bv_map(&f).unwrap();
            assert!(
                r.passed(),
                "{:?} on {}: {}",
                m.kind,
                t.planar_encoding(),
                r.to_json()
            );
        }
    }
}

#[test]
fn codegeneracy_kills_h1_next_to_h() {
    let t = Tree::linear(2);
    let a = t.inner_edges()[0];
    let m = t.codegeneracy(a).unwrap();
    let f = bv_cosimplicial_map(&m);
    let all = m.source.all_vertices();
    let inner: Vec<usize> = m.source.inner_edges();
    assert_eq!(inner.len(), 2);
    let labels: BTreeMap<usize, IntervalH> = [(inner[0], IntervalH::H1), (inner[1], IntervalH::H)]
        .into_iter()
        .collect();
    let b = BvBasis {
        comp: Comp::Sub(all),
        labels,
    };
    assert!(f.apply(&b).is_empty());
    // h₀ next to h keeps h
    let labels: BTreeMap<usize, IntervalH> = [(inner[0], IntervalH::H0), (inner[1], IntervalH::H)]
        .into_iter()
        .collect();
    let img = f.apply(&BvBasis {
        comp: Comp::Sub(all),
        labels,
    });
    assert_eq!(img.len(), 1);
    let (k, c) = img.into_iter().next().unwrap();
    assert_eq!(c, q(1));
    assert_eq!(k.labels[&a], IntervalH::H);
}

#[test]
fn inner_coface_is_basis_injective() {
    for t in trees_up_to(4, 2) {
        for e in t.inner_edges() {
            let f = bv_cosimplicial_map(&t.inner_coface(e).unwrap());
            let mut seen = std::collections::BTreeSet::new();
            for c in f.source.components() {
                for b in f.source.basis(c) {
                    let img = f.apply(&b);
                    assert_eq!(img.len(), 1);
                    let (k, v) = img.into_iter().next().unwrap();
                    assert!(v == q(1) || v == q(-1));
                    assert!(seen.insert(k));
                }
            }
        }
    }
}

#[test]
fn codegeneracy_after_adjacent_coface_is_the_identity() {
    for t in trees_up_to(3, 2) {
        for e in 0..t.n_edges() {
            let s = t.codegeneracy(e).unwrap();
            let ts = &s.source;
            let u = (0..ts.n_vertices())
                .find(|&v| s.vertex_map[v] == 0)
                .unwrap();
            let vx = ts.vertex(u);
            for a in std::iter::once(vx.out)
                .chain(vx.ins.iter().copied())
                .filter(|&a| ts.is_inner(a))
            {
                let d = ts.inner_coface(a).unwrap();
                let fd = bv_cosimplicial_map(&d);
                let fs = bv_cosimplicial_map(&s);
                let edge: Vec<usize> = d.edge_map.iter().map(|&x| s.edge_map[x]).collect();
                for c in fd.source.components() {
                    for b in fd.source.basis(c) {
                        let img = fs.apply_vec(&fd.apply(&b));
                        let comp = match b.comp {
                            Comp::Unit(x) => Comp::Unit(edge[x]),
                            Comp::Sub(v) => Comp::Sub(s.map_vertices(d.map_vertices(v))),
                        };
                        let labels = b.labels.iter().map(|(&x, &h)| (edge[x], h)).collect();
                        let want: BvVec =
                            [(BvBasis { comp, labels }, Q::one())].into_iter().collect();
                        assert_eq!(img, want, "{:?}", TreeMapKind::Codegeneracy(e));
                    }
                }
            }
        }
    }
}

#[test]
fn hc_check_accepts_composites_and_rejects_flips() {
    assert!(hc_dendrex_check(
        &Tree::trivial(),
        &[0],
        &Assignment::new(),
        &DgColoredOperad::tree_operad(&Tree::trivial())
    )
    .unwrap()
    .passed());
    for (_, t) in fixtures::trees() {
        let p = DgColoredOperad::tree_operad(&t);
        let su = SuHomotopyOperad::from_dg(&p);
        let colors: Vec<usize> = (0..t.n_edges()).collect();
        let ones: Vec<Vec<Q>> = (0..t.n_vertices()).map(|_| vec![q(1)]).collect();
        let g = composite_dendrex(&su, &t, &colors, &ones).unwrap().elements;
        assert!(hc_dendrex_check(&t, &colors, &g, &p).unwrap().passed());
        if t.n_vertices() >= 2 {
            let mut bad = g.clone();
            bad.insert((t.all_vertices(), 0), vec![q(-1)]);
            assert!(!hc_dendrex_check(&t, &colors, &bad, &p).unwrap().passed());
        }
    }
}

#[test]
fn roundtrip_agrees_on_end_and_tree_operads() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let end = fixtures::endomorphism();
    let mut accepted = 0;
    for t in trees_up_to(4, 2) {
        for colors in hc_colorings(&end, &t) {
            let r = nerve_bv_roundtrip(&end, &t, &colors, 30, &mut rng).unwrap();
            assert!(
                r.report.passed(),
                "{}: {}",
                t.planar_encoding(),
                r.report.to_json()
            );
            accepted += r.accepted;
        }
    }
    assert!(accepted > 50);
    for (_, s) in fixtures::trees() {
        let p = DgColoredOperad::tree_operad(&s);
        for t in trees_up_to(3, 2) {
            for colors in hc_colorings(&p, &t).into_iter().take(4) {
                let r = nerve_bv_roundtrip(&p, &t, &colors, 12, &mut rng).unwrap();
                assert!(
                    r.report.passed(),
                    "{}: {}",
                    t.planar_encoding(),
                    r.report.to_json()
                );
            }
        }
    }
}
