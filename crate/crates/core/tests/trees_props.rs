use std::collections::BTreeSet;

use opnerve::trees::{
    bits, parse_tree, popcount, subsets, trees_up_to, ColoredTree, OmegaWitness, Tree, Vertex,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relabel(t: &Tree, rng: &mut ChaCha8Rng) -> (Tree, Vec<usize>, Vec<usize>) {
    let mut ep: Vec<usize> = (0..t.n_edges()).collect();
    ep.shuffle(rng);
    let mut vp: Vec<usize> = (0..t.n_vertices()).collect();
    vp.shuffle(rng);
    let mut vs = vec![
        Vertex {
            out: 0,
            ins: vec![]
        };
        t.n_vertices()
    ];
    for v in 0..t.n_vertices() {
        let vx = t.vertex(v);
        vs[vp[v]] = Vertex {
            out: ep[vx.out],
            ins: vx.ins.iter().map(|&e| ep[e]).collect(),
        };
    }
    (Tree::new(t.n_edges(), vs, ep[t.root()]).unwrap(), vp, ep)
}

#[test]
fn orders_survive_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in trees_up_to(5, 3) {
        let (vs, es) = t.canonical_orders();
        for _ in 0..3 {
            let (r, vp, ep) = relabel(&t, &mut rng);
            let (rvs, res) = r.canonical_orders();
            assert_eq!(rvs, vs.iter().map(|&v| vp[v]).collect::<Vec<_>>());
            assert_eq!(res, es.iter().map(|&e| ep[e]).collect::<Vec<_>>());
            assert_eq!(r.normalized().0, t);
        }
    }
}

#[test]
fn subtrees_match_brute_force_and_count_edges() {
    for t in trees_up_to(5, 3) {
        let brute: Vec<u64> = (1..1u64 << t.n_vertices())
            .filter(|&s| t.is_subtree(s))
            .collect();
        let mut got = t.enumerate_subtrees();
        got.sort();
        assert_eq!(got, brute);
        for &s in &brute {
            assert_eq!(popcount(t.subtree_inner(s)) + 1, popcount(s));
            // omega picks the sub-tree back out from its boundary
            assert_eq!(
                t.omega_component(&t.subtree_leaves(s), t.subtree_root(s)),
                Some(OmegaWitness::Subtree(s))
            );
        }
    }
}

#[test]
fn omega_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in trees_up_to(4, 3) {
        let subs = t.enumerate_subtrees();
        for _ in 0..40 {
            let k = rng.gen_range(0..4usize);
            let mut ins: Vec<usize> = (0..k).map(|_| rng.gen_range(0..t.n_edges())).collect();
            ins.dedup();
            let out = rng.gen_range(0..t.n_edges());
            let expected = if ins == [out] {
                Some(OmegaWitness::Trivial(out))
            } else {
                let want: BTreeSet<usize> = ins.iter().copied().collect();
                subs.iter()
                    .find(|&&s| {
                        t.subtree_root(s) == out
                            && t.subtree_leaves(s).into_iter().collect::<BTreeSet<_>>() == want
                            && want.len() == ins.len()
                    })
                    .map(|&s| OmegaWitness::Subtree(s))
            };
            assert_eq!(
                t.omega_component(&ins, out),
                expected,
                "tree {} ins {ins:?} out {out}",
                t.planar_encoding()
            );
        }
    }
    let t = Tree::linear(2);
    assert_eq!(t.omega_component(&[0], 2), None);
}

#[test]
fn contractions_keep_counts_and_order() {
    for t in trees_up_to(5, 3) {
        for s in t.enumerate_subtrees() {
            for c in subsets(t.subtree_inner(s)) {
                let k = t.contract(s, c);
                let blocks = popcount(c) + 1;
                assert_eq!(k.tree.n_vertices(), blocks);
                assert_eq!(k.tree.inner_edges().len(), blocks - 1);
                assert_eq!(k.tree.leaf_count(), t.subtree_leaves(s).len());
                // depth-first orders of the contraction are restrictions of the ambient ones
                assert!(k.edge_map.windows(2).all(|w| w[0] < w[1]));
                let roots: Vec<usize> =
                    k.blocks.iter().map(|&b| t.subtree_root_vertex(b)).collect();
                assert!(roots.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(
                    k.tree
                        .inner_edges()
                        .iter()
                        .map(|&e| k.edge_map[e])
                        .collect::<Vec<_>>(),
                    bits(c).collect::<Vec<_>>()
                );
            }
        }
    }
}

#[test]
fn coface_then_contract_is_identity() {
    for t in trees_up_to(4, 3) {
        for e in t.inner_edges() {
            let m = t.inner_coface(e).unwrap();
            let all = t.all_vertices();
            assert_eq!(
                t.contract(all, t.subtree_inner(all) & !(1 << e)).tree,
                m.source
            );
        }
        for f in t.faces() {
            assert_eq!(f.edge_map.len(), f.source.n_edges());
        }
    }
}

fn brute_iso(a: &ColoredTree, b: &ColoredTree) -> bool {
    fn rec(a: &ColoredTree, ea: usize, b: &ColoredTree, eb: usize) -> bool {
        if a.colors[ea] != b.colors[eb] {
            return false;
        }
        match (a.tree.producer(ea), b.tree.producer(eb)) {
            (None, None) => true,
            (Some(u), Some(v)) => {
                let ia = &a.tree.vertex(u).ins;
                let ib = &b.tree.vertex(v).ins;
                if ia.len() != ib.len() {
                    return false;
                }
                permutations(ia.len())
                    .into_iter()
                    .any(|p| (0..ia.len()).all(|i| rec(a, ia[i], b, ib[p[i]])))
            }
            _ => false,
        }
    }
    rec(a, a.tree.root(), b, b.tree.root())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn mirror(t: &ColoredTree) -> ColoredTree {
    let vs: Vec<(usize, Vec<usize>)> = t
        .tree
        .vertices()
        .iter()
        .map(|v| (v.out, v.ins.iter().rev().copied().collect()))
        .collect();
    let (m, _, eback) = Tree::build(&vs, t.tree.root()).unwrap();
    let colors = eback.iter().map(|&e| t.colors[e]).collect();
    ColoredTree::new(m, colors).unwrap()
}

#[test]
fn canonical_form_matches_isomorphism_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trees = trees_up_to(4, 3);
    let mut samples = Vec::new();
    for t in &trees {
        for _ in 0..3 {
            let colors = (0..t.n_edges()).map(|_| rng.gen_range(0..2)).collect();
            samples.push(ColoredTree::new(t.clone(), colors).unwrap());
        }
    }
    for a in &samples {
        let m = mirror(a);
        assert_eq!(a.canonical_form(), m.canonical_form());
        assert!(brute_iso(a, &m));
    }
    for (i, a) in samples.iter().enumerate() {
        for b in samples.iter().skip(i + 1).step_by(7) {
            assert_eq!(a.canonical_form() == b.canonical_form(), brute_iso(a, b));
        }
    }
    let (t, _) = parse_tree("(| |)").unwrap();
    let x = ColoredTree::new(t.clone(), vec![0, 0, 1]).unwrap();
    let y = ColoredTree::new(t, vec![0, 1, 1]).unwrap();
    assert_ne!(x.canonical_form(), y.canonical_form());
}

#[test]
fn enumeration_has_no_duplicates() {
    let trees = trees_up_to(5, 3);
    let forms: BTreeSet<String> = trees
        .iter()
        .map(|t| ColoredTree::monochrome(t.clone()).canonical_form())
        .collect();
    assert_eq!(forms.len(), trees.len());
    // arity at most one: a chain topped by either a leaf or a stump
    let two: Vec<String> = opnerve::trees::trees_with_vertices(2, 1)
        .iter()
        .map(Tree::planar_encoding)
        .collect();
    assert_eq!(two, vec!["(())", "((|))"]);
}
