use num::Zero;
use opnerve::fixtures;
use opnerve::hops::SuHomotopyOperad;
use opnerve::linalg::{q, Matrix, Q};
use opnerve::nerve::*;
use opnerve::operads::{DgColoredOperad, Profile};
use opnerve::trees::{bit, trees_up_to, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn end() -> SuHomotopyOperad {
    SuHomotopyOperad::from_dg(&fixtures::endomorphism())
}

#[test]
fn corolla_dendrices_are_cycles() {
    let p = end();
    let t = Tree::corolla(1);
    let prof = Profile::new(vec![0], 0);
    let dim = p.dim(&prof);
    for i in 0..dim {
        if p.degree(&prof, i) != 0 {
            continue;
        }
        let mut v = vec![Q::zero(); dim];
        v[i] = q(1);
        let x = Dendrex {
            tree: t.clone(),
            colors: vec![0, 0],
            elements: [((1, 0), v.clone())].into_iter().collect(),
        };
        let closed = component_differential(&p, &prof)
            .unwrap()
            .apply(&v)
            .iter()
            .all(Zero::is_zero);
        assert_eq!(check_dendrex(&p, &x).unwrap().passed(), closed);
    }
}

#[test]
fn random_dendrices_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, p) in fixtures::operads() {
        let p = p.with_vertex_bound(4);
        for t in trees_up_to(3, p.max_arity()) {
            for colors in colorings(&p, &t).into_iter().take(3) {
                let x = random_dendrex(&p, &t, &colors, &mut rng).unwrap();
                let r = check_dendrex(&p, &x).unwrap();
                assert!(
                    r.passed(),
                    "{name} {}: {}",
                    t.planar_encoding(),
                    r.to_json()
                );
            }
        }
    }
}

#[test]
fn two_vertex_horn_fills_with_the_composite() {
    let p = end();
    let t = Tree::linear(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_dendrex(&p, &t, &[0, 0, 0], &mut rng).unwrap();
    let h = restrict_to_horn(&x, 1).unwrap();
    assert!(check_horn(&p, &h).unwrap().passed());
    let f = fill_inner_horn(&p, &h).unwrap();
    assert!(check_dendrex(&p, &f).unwrap().passed());
    let ct = f.colored();
    let comp = p
        .gamma(
            &ct,
            &[
                f.elements[&(bit(0), 0)].clone(),
                f.elements[&(bit(1), 0)].clone(),
            ],
        )
        .unwrap();
    assert_eq!(f.elements[&(3, 0)], comp);
    assert!(f.elements[&(3, 2)].iter().all(Zero::is_zero));
}

#[test]
fn random_horns_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut nonzero, mut total) = (0, 0);
    for p in [fixtures::a_infinity(), end().with_vertex_bound(4)] {
        for t in trees_up_to(4, p.max_arity()) {
            for e in t.inner_edges() {
                for colors in colorings(&p, &t).into_iter().take(2) {
                    let x = random_dendrex(&p, &t, &colors, &mut rng).unwrap();
                    let h = restrict_to_horn(&x, e).unwrap();
                    assert!(check_horn(&p, &h).unwrap().passed());
                    let f = fill_inner_horn(&p, &h).unwrap();
                    let r = check_dendrex(&p, &f).unwrap();
                    assert!(r.passed(), "{}: {}", t.planar_encoding(), r.to_json());
                    let face = horn_gaps(&t, e).1;
                    if f.elements[&face].iter().any(|c| !c.is_zero()) {
                        nonzero += 1;
                    }
                    total += 1;
                }
            }
        }
    }
    assert!(total >= 50 && nonzero >= 15, "{nonzero} of {total}");
}

#[test]
fn faces_and_degeneracies_are_dendrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [fixtures::a_infinity(), end().with_vertex_bound(5)] {
        for t in trees_up_to(3, p.max_arity()) {
            for colors in colorings(&p, &t).into_iter().take(2) {
                let x = random_dendrex(&p, &t, &colors, &mut rng).unwrap();
                for m in t.cofaces_and_codegeneracies() {
                    let y = pullback(&p, &x, &m).unwrap();
                    let r = check_dendrex(&p, &y).unwrap();
                    assert!(
                        r.passed(),
                        "{:?} on {}: {}",
                        m.kind,
                        t.planar_encoding(),
                        r.to_json()
                    );
                }
                // degenerate, then contract an edge of the new vertex
                for e in 0..t.n_edges() {
                    let y = degeneracy(&p, &x, e).unwrap();
                    let s = &y.tree;
                    let u = (0..s.n_vertices())
                        .find(|&v| t.codegeneracy(e).unwrap().vertex_map[v] == 0)
                        .unwrap();
                    let vx = s.vertex(u);
                    for a in std::iter::once(vx.out)
                        .chain(vx.ins.iter().copied())
                        .filter(|&a| s.is_inner(a))
                    {
                        let z = inner_face(&p, &y, a).unwrap();
                        assert_eq!(z, x);
                    }
                }
            }
        }
    }
}

#[test]
fn composite_dendrices_over_tree_operads() {
    for (_, t) in fixtures::trees() {
        let p = SuHomotopyOperad::from_dg(&DgColoredOperad::tree_operad(&t));
        let colors: Vec<usize> = (0..t.n_edges()).collect();
        let elems: Vec<Vec<Q>> = (0..t.n_vertices()).map(|_| vec![q(1)]).collect();
        let x = composite_dendrex(&p, &t, &colors, &elems).unwrap();
        assert!(check_dendrex(&p, &x).unwrap().passed());
        // every element with no cuts is the generator of its sub-tree
        for ((_, c), v) in &x.elements {
            if *c == 0 {
                assert_eq!(v, &vec![q(1)]);
            }
        }
    }
}

#[test]
fn mapping_spaces_are_simplicial_and_normalize_to_tr() {
    for (name, p) in fixtures::operads() {
        for prof in p.all_profiles().into_iter().take(6) {
            let ms = mapping_space(&p, &prof, 3).unwrap();
            let h = h0(&p, &prof).unwrap();
            assert_eq!(ms.levels[0].dim(), h.cycles.len(), "{name} {prof}");
            for n in 0..3 {
                for i in 0..=n {
                    let si = ms.degeneracy(n, i);
                    assert_eq!(
                        ms.face(n + 1, i).mul(&si),
                        Matrix::identity(ms.levels[n].dim())
                    );
                    assert_eq!(
                        ms.face(n + 1, i + 1).mul(&si),
                        Matrix::identity(ms.levels[n].dim())
                    );
                }
            }
            for n in 2..=3 {
                for j in 1..=n {
                    for i in 0..j {
                        assert_eq!(
                            ms.face(n - 1, i).mul(&ms.face(n, j)),
                            ms.face(n - 1, j - 1).mul(&ms.face(n, i))
                        );
                    }
                }
            }
            let r = normalized_vs_tr(&p, &prof, 3).unwrap();
            assert!(r.passed(), "{name} {prof}: {}", r.to_json());
        }
    }
}

#[test]
fn pi0_matches_h0() {
    for (name, p) in fixtures::operads() {
        let profiles = p.all_profiles();
        let r = h0_nerve_comparison(&p, &profiles).unwrap();
        assert!(r.passed(), "{name}: {}", r.to_json());
    }
}

#[test]
fn predicates_on_fixtures() {
    for (name, f) in fixtures::we_positive() {
        let v = is_weak_equivalence(&f).unwrap();
        assert!(v.holds, "{name}: {}", v.report.to_json());
    }
    for (name, f) in fixtures::we_negative() {
        let v = is_weak_equivalence(&f).unwrap();
        assert!(!v.holds, "{name}");
        assert!(v.report.first_failure().unwrap().witness.is_some());
    }
    for (name, f) in fixtures::fib_positive() {
        let v = is_fibration(&f).unwrap();
        assert!(v.holds, "{name}: {}", v.report.to_json());
    }
    for (name, f) in fixtures::fib_negative() {
        let v = is_fibration(&f).unwrap();
        assert!(!v.holds, "{name}");
        assert!(v.report.first_failure().unwrap().witness.is_some());
    }
}

#[test]
fn truncation_does_not_change_the_nerve() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = SuHomotopyOperad::from_dg(&fixtures::padded()).with_vertex_bound(4);
    let r = nerve_tr_equality(&p, 3, 2, &mut rng).unwrap();
    assert!(r.passed(), "{}", r.to_json());
    // the non-closed degree-0 element never shows up in a dendrex
    let t = Tree::corolla(1);
    for _ in 0..10 {
        let x = random_dendrex(&p, &t, &[0, 0], &mut rng).unwrap();
        let v = &x.elements[&(1, 0)];
        assert!(v[2].is_zero(), "z appears");
        let _ = rng.gen::<u8>();
    }
}
