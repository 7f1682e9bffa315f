use std::collections::BTreeMap;

use num::{One, Zero};
use opnerve::hops::{
    check_su_morphism, check_su_structure, compose_morphisms, from_a_infinity, stasheff_defect,
    MultiMap, SuHomotopyOperad, SuMorphism, Tensor,
};
use opnerve::linalg::{q, GradedSpace, SparseVec, Q};
use opnerve::operads::{single_complex, DgColoredOperad, OperadMorphism};
use opnerve::trees::{ColoredTree, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tuples(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..dim).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn a_inf_fixture() -> (GradedSpace, BTreeMap<usize, MultiMap>) {
    let space = GradedSpace::new(
        vec![("1".into(), 0), ("x".into(), 0), ("y".into(), 1)],
        (-2, 6),
    )
    .unwrap();
    let one = |i: usize| -> SparseVec { [(i, Q::one())].into_iter().collect() };
    let mut m2 = MultiMap::new();
    for a in 0..3 {
        m2.insert(vec![0, a], one(a));
        m2.insert(vec![a, 0], one(a));
    }
    let mut m3 = MultiMap::new();
    m3.insert(vec![1, 1, 1], one(2));
    (space, [(2, m2), (3, m3)].into_iter().collect())
}

#[test]
fn a_infinity_fixture_satisfies_stasheff_and_gamma() {
    let (space, m) = a_inf_fixture();
    let degs: Vec<i32> = (0..3).map(|i| space.degree(i)).collect();
    for n in 1..=5 {
        for args in tuples(3, n) {
            assert!(
                stasheff_defect(&degs, &m, &args).iter().all(Zero::is_zero),
                "{args:?}"
            );
        }
    }
    let p = from_a_infinity(space, vec![q(1), q(0), q(0)], &m, 5).unwrap();
    let r = check_su_structure(&p);
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn linear_trees_carry_exactly_the_stasheff_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let degrees = [0, 0, 1, -1, 2];
    let basis: Vec<(String, i32)> = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| (format!("b{i}"), d))
        .collect();
    let space = GradedSpace::new(basis, (-4, 8)).unwrap();
    for _ in 0..4 {
        let mut m = BTreeMap::new();
        for n in 1..=3usize {
            let mut mm = MultiMap::new();
            for args in tuples(5, n) {
                let target: i32 = args.iter().map(|&a| degrees[a]).sum::<i32>() + n as i32 - 2;
                let mut v = SparseVec::new();
                for (i, &d) in degrees.iter().enumerate() {
                    if d == target && rng.gen_bool(0.6) {
                        v.insert(i, q(rng.gen_range(-2..=2)));
                    }
                }
                v.retain(|_, c| !c.is_zero());
                if !v.is_empty() {
                    mm.insert(args, v);
                }
            }
            m.insert(n, mm);
        }
        let p = from_a_infinity(space.clone(), vec![q(0); 5], &m, 4).unwrap();
        let mut nonzero = 0;
        for n in 1..=4 {
            let t = ColoredTree::monochrome(Tree::linear(n));
            for args in tuples(5, n) {
                let x: Tensor = [(args.clone(), Q::one())].into_iter().collect();
                let g = p.gamma_of_coderivation(&t, &x).unwrap();
                let s = stasheff_defect(&degrees, &m, &args);
                let neg: Vec<Q> = s.iter().map(|c| -c).collect();
                assert!(g == s || g == neg, "n={n} args={args:?}");
                if !g.iter().all(Zero::is_zero) {
                    nonzero += 1;
                }
            }
        }
        assert!(nonzero > 0);
    }
}

fn end_fixture() -> DgColoredOperad {
    let v = single_complex(&[("x", 0), ("y", 1)], &[(0, 1, 1)]).unwrap();
    DgColoredOperad::endomorphism(&v, 2).unwrap()
}

#[test]
fn dg_operads_give_su_structures() {
    let e = SuHomotopyOperad::from_dg(&end_fixture()).with_vertex_bound(3);
    let r = check_su_structure(&e);
    assert!(r.passed(), "{}", r.to_json());
    let t = Tree::linear(2);
    let k = SuHomotopyOperad::from_dg(&DgColoredOperad::tree_operad(&Tree::c_mn(2, 1)));
    assert!(check_su_structure(&k).passed());
    let tr = k.truncate().unwrap();
    assert!(check_su_structure(&tr).passed());
    let tre = e.truncate().unwrap();
    let r = check_su_structure(&tre);
    assert!(r.passed(), "{}", r.to_json());
    let _ = t;
}

#[test]
fn corrupted_a_infinity_table_is_caught() {
    let (space, mut m) = a_inf_fixture();
    m.get_mut(&3)
        .unwrap()
        .insert(vec![1, 2, 1], [(2, Q::one())].into_iter().collect());
    let p = from_a_infinity(space, vec![q(1), q(0), q(0)], &m, 5).unwrap();
    let r = check_su_structure(&p);
    assert!(!r.passed());
    assert!(r.first_failure().unwrap().witness.is_some());
}

#[test]
fn morphisms_identities_faces_and_composites() {
    let p = SuHomotopyOperad::from_dg(&end_fixture()).with_vertex_bound(3);
    let id = SuMorphism::identity(&p);
    assert!(check_su_morphism(&id).passed());
    let c = compose_morphisms(&id, &id).unwrap();
    assert_eq!(c.f1, id.f1);
    assert!(c.higher.is_empty());

    let t = Tree::c_mn(2, 1);
    for face in t.faces() {
        let f = SuMorphism::from_dg(&OperadMorphism::from_tree_map(&face));
        let r = check_su_morphism(&f);
        assert!(r.passed(), "{}", r.to_json());
    }

    // a genuine higher component: the A∞ fixture with an extra f(L₂)
    let (space, m) = a_inf_fixture();
    let a = from_a_infinity(space, vec![q(1), q(0), q(0)], &m, 4).unwrap();
    let mut g = SuMorphism::identity(&a);
    assert!(check_su_morphism(&g).passed());
    let l2 = ColoredTree::monochrome(Tree::linear(2)).planar_encoding();
    g.higher.insert(
        l2.clone(),
        [(vec![1, 1], [(2, Q::one())].into_iter().collect())]
            .into_iter()
            .collect(),
    );
    let r = check_su_morphism(&g);
    assert!(r.passed(), "{}", r.to_json());
    let gg = compose_morphisms(&g, &g).unwrap();
    assert!(check_su_morphism(&gg).passed());
    assert_eq!(
        gg.higher[&l2][&vec![1, 1]],
        [(2, q(2))].into_iter().collect::<SparseVec>()
    );
    let mut bad = g.clone();
    bad.higher
        .get_mut(&l2)
        .unwrap()
        .insert(vec![0, 1], [(2, Q::one())].into_iter().collect());
    assert!(!check_su_morphism(&bad).passed());
}
