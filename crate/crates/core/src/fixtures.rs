//! Small hand-built operads and morphisms used by the acceptance suite,
//! the CLI and the benches.

use std::collections::BTreeMap;

use num::One;

use crate::hops::{from_a_infinity, MultiMap, SuHomotopyOperad, SuMorphism};
use crate::linalg::{ChainComplex, GradedSpace, Matrix, SparseVec, Q};
use crate::operads::{
    single_complex, square_zero, DgColoredOperad, OperadMorphism, Profile, Table,
};
use crate::trees::{parse_tree, Tree};

/// V = ⟨x₀, y₁⟩ with d y = x.
pub fn end_complex() -> ChainComplex {
    single_complex(&[("x", 0), ("y", 1)], &[(0, 1, 1)]).expect("valid complex")
}

/// End(V) up to arity two.
pub fn endomorphism() -> DgColoredOperad {
    DgColoredOperad::endomorphism(&end_complex(), 2).expect("valid operad")
}

/// A = ⟨1, x, y⟩, |y| = 1, m₂ unital and zero otherwise, m₃(x,x,x) = y.
pub fn a_infinity_ops() -> (GradedSpace, BTreeMap<usize, MultiMap>) {
    let space = GradedSpace::new(
        vec![("1".into(), 0), ("x".into(), 0), ("y".into(), 1)],
        (-2, 6),
    )
    .expect("valid space");
    let one = |i: usize| -> SparseVec { std::iter::once((i, Q::one())).collect() };
    let mut m2 = MultiMap::new();
    for a in 0..3 {
        m2.insert(vec![0, a], one(a));
        m2.insert(vec![a, 0], one(a));
    }
    let mut m3 = MultiMap::new();
    m3.insert(vec![1, 1, 1], one(2));
    (space, [(2, m2), (3, m3)].into_iter().collect())
}

pub fn a_infinity() -> SuHomotopyOperad {
    let (space, m) = a_infinity_ops();
    let unit = vec![
        Q::one(),
        Q::from_integer(0.into()),
        Q::from_integer(0.into()),
    ];
    from_a_infinity(space, unit, &m, 5).expect("valid table")
}

/// Two colors a, b: ℚ·id ⊕ V with (a;b) = ⟨u₀, w₁; d w = u⟩ and (a,a;b) = ⟨v₀⟩.
pub fn two_colored() -> DgColoredOperad {
    let mut extra = BTreeMap::new();
    extra.insert(
        Profile::new(vec![0], 1),
        single_complex(&[("u", 0), ("w", 1)], &[(0, 1, 1)]).unwrap(),
    );
    extra.insert(
        Profile::new(vec![0, 0], 1),
        single_complex(&[("v", 0)], &[]).unwrap(),
    );
    square_zero(vec!["a".into(), "b".into()], extra).expect("valid operad")
}

/// One color with junk below degree zero and a non-closed degree-0 element:
/// (c;c) = ℚ·id ⊕ ⟨n₋₁, z₀, k₁, t₂; d z = n, d t = k⟩ and (c,c;c) = ⟨m₀, r₋₁⟩.
pub fn padded() -> DgColoredOperad {
    let mut extra = BTreeMap::new();
    extra.insert(
        Profile::unit(0),
        single_complex(
            &[("n", -1), ("z", 0), ("k", 1), ("t", 2)],
            &[(0, 1, 1), (2, 3, 1)],
        )
        .unwrap(),
    );
    extra.insert(
        Profile::new(vec![0, 0], 0),
        single_complex(&[("m", 0), ("r", -1)], &[]).unwrap(),
    );
    square_zero(vec!["c".into()], extra).expect("valid operad")
}

/// The linear category with two isomorphic objects: every hom is ℚ.
pub fn two_isomorphic_objects() -> DgColoredOperad {
    let mut t = Table::default();
    for a in 0..2 {
        for b in 0..2 {
            t.components.insert(
                Profile::new(vec![a], b),
                single_complex(&[("m", 0)], &[]).unwrap(),
            );
        }
    }
    t.units = vec![vec![Q::one()], vec![Q::one()]];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let e: SparseVec = std::iter::once((0, Q::one())).collect();
                t.comps.insert(
                    (Profile::new(vec![b], c), 0, Profile::new(vec![a], b)),
                    std::iter::once(((0, 0), e)).collect(),
                );
            }
        }
    }
    DgColoredOperad::from_table(vec!["p".into(), "q".into()], t).expect("valid operad")
}

/// One color, ℚ·id ⊕ V on (c;c) for a complex given by labels and degrees.
pub fn square_zero_unary(basis: &[(&str, i32)], d: &[(usize, usize, i64)]) -> DgColoredOperad {
    let mut extra = BTreeMap::new();
    if !basis.is_empty() {
        extra.insert(Profile::unit(0), single_complex(basis, d).unwrap());
    }
    square_zero(vec!["c".into()], extra).expect("valid operad")
}

pub fn trees() -> Vec<(&'static str, Tree)> {
    ["(|)", "((|) |)", "((| |) |)", "(((|)))", "((|) (|))"]
        .into_iter()
        .map(|s| (s, parse_tree(s).unwrap().0))
        .collect()
}

/// Every fixture operad, as su operads.
pub fn operads() -> Vec<(String, SuHomotopyOperad)> {
    let mut out: Vec<(String, SuHomotopyOperad)> = trees()
        .into_iter()
        .map(|(s, t)| {
            (
                format!("tree-operad {s}"),
                SuHomotopyOperad::from_dg(&DgColoredOperad::tree_operad(&t)),
            )
        })
        .collect();
    out.push((
        "endomorphism".into(),
        SuHomotopyOperad::from_dg(&endomorphism()),
    ));
    out.push(("a-infinity".into(), a_infinity()));
    out.push((
        "two-colored".into(),
        SuHomotopyOperad::from_dg(&two_colored()),
    ));
    out.push(("padded".into(), SuHomotopyOperad::from_dg(&padded())));
    out.push((
        "two-isomorphic-objects".into(),
        SuHomotopyOperad::from_dg(&two_isomorphic_objects()),
    ));
    out
}

fn dg_map(
    src: &DgColoredOperad,
    tgt: &DgColoredOperad,
    color_map: Vec<usize>,
    maps: &[(Profile, Vec<Vec<i64>>)],
) -> SuMorphism {
    let mut m = BTreeMap::new();
    // units always go to units
    for c in 0..src.n_colors() {
        let up = Profile::unit(c);
        let tp = Profile::unit(color_map[c]);
        let mut x = Matrix::zero(tgt.dim(&tp), src.dim(&up));
        x.set(
            tgt.unit_index(color_map[c]).unwrap(),
            src.unit_index(c).unwrap(),
            Q::one(),
        );
        m.insert(up, x);
    }
    for (p, rows) in maps {
        let rows: Vec<Vec<Q>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect())
            .collect();
        m.insert(p.clone(), Matrix::from_dense(&rows));
    }
    SuMorphism::from_dg(
        &OperadMorphism::from_table(src, tgt, color_map, m).expect("valid morphism"),
    )
}

fn acyclic_sum() -> DgColoredOperad {
    // ⟨a₁⟩ ⊕ ⟨b₁, c₂; d c = b⟩
    square_zero_unary(&[("a", 1), ("b", 1), ("c", 2)], &[(1, 2, 1)])
}

fn with_class() -> DgColoredOperad {
    square_zero_unary(&[("a", 1)], &[])
}

fn bare() -> DgColoredOperad {
    square_zero_unary(&[], &[])
}

fn one_object() -> DgColoredOperad {
    let mut t = Table::default();
    t.components
        .insert(Profile::unit(0), single_complex(&[("m", 0)], &[]).unwrap());
    t.units = vec![vec![Q::one()]];
    t.fill_unit_laws();
    DgColoredOperad::from_table(vec!["p".into()], t).unwrap()
}

fn discrete_two() -> DgColoredOperad {
    let mut t = Table::default();
    for c in 0..2 {
        t.components
            .insert(Profile::unit(c), single_complex(&[("m", 0)], &[]).unwrap());
    }
    t.units = vec![vec![Q::one()], vec![Q::one()]];
    t.fill_unit_laws();
    DgColoredOperad::from_table(vec!["p".into(), "q".into()], t).unwrap()
}

fn two_colored_small() -> DgColoredOperad {
    let mut extra = BTreeMap::new();
    extra.insert(
        Profile::new(vec![0], 1),
        single_complex(&[("u", 0)], &[]).unwrap(),
    );
    square_zero(vec!["a".into(), "b".into()], extra).unwrap()
}

fn a_infinity_with_higher() -> SuMorphism {
    let a = a_infinity().with_vertex_bound(4);
    let mut g = SuMorphism::identity(&a);
    let l2 = crate::trees::ColoredTree::monochrome(Tree::linear(2)).planar_encoding();
    g.higher.insert(
        l2,
        std::iter::once((vec![1, 1], std::iter::once((2, Q::one())).collect())).collect(),
    );
    g
}

fn coface_l1_l2() -> SuMorphism {
    let t = Tree::linear(2);
    let top = t.external_vertices().into_iter().max().unwrap();
    SuMorphism::from_dg(&OperadMorphism::from_tree_map(
        &t.outer_coface(top).unwrap(),
    ))
}

fn sub_inclusion() -> SuMorphism {
    dg_map(
        &two_colored_small(),
        &{
            let mut extra = BTreeMap::new();
            extra.insert(
                Profile::new(vec![0], 1),
                single_complex(&[("u", 0), ("w", 1)], &[(0, 1, 1)]).unwrap(),
            );
            square_zero(vec!["a".into(), "b".into()], extra).unwrap()
        },
        vec![0, 1],
        &[(Profile::new(vec![0], 1), vec![vec![1], vec![0]])],
    )
}

/// Morphisms that are weak equivalences.
pub fn we_positive() -> Vec<(String, SuMorphism)> {
    let end = SuHomotopyOperad::from_dg(&endomorphism()).with_vertex_bound(3);
    vec![
        ("identity of End(V)".into(), SuMorphism::identity(&end)),
        (
            "identity of a tree operad".into(),
            SuMorphism::identity(&SuHomotopyOperad::from_dg(&DgColoredOperad::tree_operad(
                &trees()[2].1,
            ))),
        ),
        (
            "inclusion of a deformation retract".into(),
            dg_map(
                &with_class(),
                &acyclic_sum(),
                vec![0],
                &[(
                    Profile::unit(0),
                    vec![vec![1, 0], vec![0, 1], vec![0, 0], vec![0, 0]],
                )],
            ),
        ),
        (
            "projection onto a deformation retract".into(),
            dg_map(
                &acyclic_sum(),
                &with_class(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]])],
            ),
        ),
        (
            "A∞ identity".into(),
            SuMorphism::identity(&a_infinity().with_vertex_bound(4)),
        ),
        (
            "A∞ map with a higher component".into(),
            a_infinity_with_higher(),
        ),
        (
            "one object into two isomorphic objects".into(),
            dg_map(&one_object(), &two_isomorphic_objects(), vec![0], &[]),
        ),
    ]
}

/// Morphisms that are not weak equivalences.
pub fn we_negative() -> Vec<(String, SuMorphism)> {
    vec![
        (
            "killing a degree-1 class".into(),
            dg_map(
                &with_class(),
                &bare(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1, 0]])],
            ),
        ),
        (
            "missing a degree-1 class".into(),
            dg_map(
                &bare(),
                &with_class(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1], vec![0]])],
            ),
        ),
        (
            "one object into two unrelated objects".into(),
            dg_map(&one_object(), &discrete_two(), vec![0], &[]),
        ),
        (
            "killing a degree-0 class".into(),
            dg_map(
                &square_zero_unary(&[("z", 0)], &[]),
                &bare(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1, 0]])],
            ),
        ),
        ("outer face of a linear tree".into(), coface_l1_l2()),
        ("inclusion onto a boundary".into(), sub_inclusion()),
    ]
}

/// Morphisms that are fibrations.
pub fn fib_positive() -> Vec<(String, SuMorphism)> {
    let end = SuHomotopyOperad::from_dg(&endomorphism()).with_vertex_bound(3);
    vec![
        ("identity of End(V)".into(), SuMorphism::identity(&end)),
        (
            "identity of a tree operad".into(),
            SuMorphism::identity(&SuHomotopyOperad::from_dg(&DgColoredOperad::tree_operad(
                &trees()[2].1,
            ))),
        ),
        (
            "projection from a direct sum".into(),
            dg_map(
                &acyclic_sum(),
                &with_class(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]])],
            ),
        ),
        (
            "projection killing a degree-1 class".into(),
            dg_map(
                &with_class(),
                &bare(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1, 0]])],
            ),
        ),
        (
            "A∞ identity".into(),
            SuMorphism::identity(&a_infinity().with_vertex_bound(4)),
        ),
        (
            "identity of two isomorphic objects".into(),
            SuMorphism::identity(&SuHomotopyOperad::from_dg(&two_isomorphic_objects())),
        ),
    ]
}

/// Morphisms that are not fibrations.
pub fn fib_negative() -> Vec<(String, SuMorphism)> {
    vec![
        (
            "inclusion missing a degree-1 element".into(),
            dg_map(
                &bare(),
                &with_class(),
                vec![0],
                &[(Profile::unit(0), vec![vec![1], vec![0]])],
            ),
        ),
        (
            "inclusion missing a degree-2 element".into(),
            dg_map(
                &bare(),
                &square_zero_unary(&[("t", 2)], &[]),
                vec![0],
                &[(Profile::unit(0), vec![vec![1], vec![0]])],
            ),
        ),
        (
            "inclusion of a deformation retract".into(),
            dg_map(
                &with_class(),
                &acyclic_sum(),
                vec![0],
                &[(
                    Profile::unit(0),
                    vec![vec![1, 0], vec![0, 1], vec![0, 0], vec![0, 0]],
                )],
            ),
        ),
        (
            "one object into two isomorphic objects".into(),
            dg_map(&one_object(), &two_isomorphic_objects(), vec![0], &[]),
        ),
        ("inclusion onto a boundary".into(), sub_inclusion()),
    ]
}
