use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use opnerve::bv::{check_d_squared, BVOperad};
use opnerve::doldkan::{gamma, random_complex, Comparison};
use opnerve::fixtures;
use opnerve::hops::SuHomotopyOperad;
use opnerve::nerve::{colorings, fill_inner_horn, random_dendrex, restrict_to_horn};
use opnerve::operads::{check_operad_axioms, DgColoredOperad};
use opnerve::trees::{parse_tree, trees_up_to};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bv(c: &mut Criterion) {
    let t = parse_tree("((| |) (|) (| |))").unwrap().0;
    c.bench_function("bv build and d² on a 3-vertex tree", |b| {
        b.iter(|| check_d_squared(&BVOperad::build(black_box(&t))))
    });
    let t = parse_tree("(((| |) |) (|))").unwrap().0;
    let w = BVOperad::build(&t);
    c.bench_function("bv d² on a 4-vertex tree", |b| {
        b.iter(|| check_d_squared(black_box(&w)))
    });
}

fn horns(c: &mut Criterion) {
    let p = fixtures::a_infinity();
    // the largest tree with a coloring and an inner edge
    let (t, colors) = trees_up_to(4, p.max_arity())
        .into_iter()
        .filter(|t| !t.inner_edges().is_empty())
        .filter_map(|t| colorings(&p, &t).into_iter().next().map(|c| (t, c)))
        .next_back()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_dendrex(&p, &t, &colors, &mut rng).unwrap();
    let e = t.inner_edges()[0];
    let h = restrict_to_horn(&x, e).unwrap();
    c.bench_function("fill an A∞ horn", |b| {
        b.iter(|| fill_inner_horn(&p, black_box(&h)).unwrap())
    });
    let end = SuHomotopyOperad::from_dg(&fixtures::endomorphism()).with_vertex_bound(4);
    let t = parse_tree("(((|)))").unwrap().0;
    let colors = colorings(&end, &t).remove(0);
    c.bench_function("random End dendrex on a 3-vertex tree", |b| {
        b.iter(|| random_dendrex(&end, black_box(&t), &colors, &mut rng).unwrap())
    });
}

fn axioms(c: &mut Criterion) {
    let t = parse_tree("((| |) (|))").unwrap().0;
    let p = DgColoredOperad::tree_operad(&t);
    c.bench_function("operad axioms of a tree operad", |b| {
        b.iter(|| check_operad_axioms(black_box(&p)))
    });
}

fn dold_kan(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = random_complex(&mut rng, 0, 3, 4).unwrap();
    c.bench_function("Γ at level 4", |b| {
        b.iter(|| gamma(black_box(&v), 4).unwrap())
    });
    let cmp = Comparison::new(3).unwrap();
    c.bench_function("mapping-space comparison at level 3", |b| {
        b.iter(|| cmp.run(black_box(&v)).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = bv, horns, axioms, dold_kan
}
criterion_main!(kernels);
