//! The dendroidal nerve of an su operad: dendrices as element families
//! indexed by contracted sub-trees, their faces and degeneracies, the inner
//! horn filler, mapping spaces and the homotopical predicates.

use std::collections::BTreeMap;

use num::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hops::{colored_contract, SuHomotopyOperad, SuMorphism};
use crate::linalg::{
    add_entry, perm_sign, q, qs, sign_pow, to_dense, zeros, Matrix, Span, SparseVec, Q,
};
use crate::operads::{Color, Profile};
use crate::report::Report;
use crate::trees::{bit, bits, popcount, subsets, ColoredTree, ESet, Tree, TreeMap, VSet};

/// A contracted sub-tree (S, C): the vertex set S of a sub-tree and the
/// inner edges C of S that stay uncontracted.
pub type Key = (VSet, ESet);

pub fn keys(t: &Tree) -> Vec<Key> {
    let mut out: Vec<Key> = t
        .enumerate_subtrees()
        .into_iter()
        .flat_map(|s| subsets(t.subtree_inner(s)).map(move |c| (s, c)))
        .collect();
    out.sort_by_key(|&(s, c)| (popcount(s), s, popcount(c), c));
    out
}

pub fn key_profile(t: &Tree, colors: &[Color], (s, _): Key) -> Profile {
    Profile::new(
        t.subtree_leaves(s).iter().map(|&e| colors[e]).collect(),
        colors[t.subtree_root(s)],
    )
}

/// Sign of regrouping the vertices of t = (S, C) into the blocks of (S, D).
/// Every generator of sKΩ(T) has degree one, so this is a plain
/// permutation sign.
pub fn partition_sign(t: &Tree, s: VSet, c: ESet, d: ESet) -> i32 {
    let fine = t.blocks(s, c);
    let coarse = t.blocks(s, d);
    let order: Vec<usize> = coarse
        .iter()
        .flat_map(|&b| {
            fine.iter()
                .enumerate()
                .filter(move |(_, &f)| f & b == f)
                .map(|(i, _)| i)
        })
        .collect();
    perm_sign(&order)
}

/// Sign of the term p_{t/a} in f∘d_ν(t) for t = (S, C).
pub fn edge_sign(t: &Tree, s: VSet, c: ESet, a: usize) -> i32 {
    let coarse = t.blocks(s, c & !bit(a));
    let m = coarse
        .iter()
        .position(|&b| b & bit(t.consumer(a).unwrap()) != 0)
        .unwrap();
    partition_sign(t, s, c, c & !bit(a)) * sign_pow(m as i64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dendrex {
    pub tree: Tree,
    pub colors: Vec<Color>,
    pub elements: BTreeMap<Key, Vec<Q>>,
}

impl Dendrex {
    pub fn colored(&self) -> ColoredTree {
        ColoredTree {
            tree: self.tree.clone(),
            colors: self.colors.clone(),
        }
    }
}

fn check_colors(p: &SuHomotopyOperad, t: &Tree, colors: &[Color]) -> Result<()> {
    if colors.len() != t.n_edges() || colors.iter().any(|&c| c >= p.n_colors()) {
        return Err(Error::Color(
            "the color map must send every edge to a color of the operad".into(),
        ));
    }
    Ok(())
}

/// Both sides of the dendrex equation at one key; absent elements count as zero.
pub fn eq4_sides(
    p: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    get: &dyn Fn(Key) -> Option<Vec<Q>>,
    (s, c): Key,
) -> Result<(Vec<Q>, Vec<Q>)> {
    let ct = ColoredTree {
        tree: t.clone(),
        colors: colors.to_vec(),
    };
    let prof = key_profile(t, colors, (s, c));
    let dim = p.dim(&prof);
    let mut lhs = SparseVec::new();
    for d in subsets(c) {
        let (quot, blocks) = colored_contract(&ct, s, d);
        let mut factors = Vec::with_capacity(blocks.len());
        let mut zero = false;
        for &b in &blocks {
            let k = (b, c & t.subtree_inner(b));
            let bp = key_profile(t, colors, k);
            let v = get(k).unwrap_or_else(|| zeros(p.dim(&bp)));
            zero |= v.iter().all(Zero::is_zero);
            factors.push(v);
        }
        if zero {
            continue;
        }
        let g = p.gamma(&quot, &factors)?;
        let sign = qs(partition_sign(t, s, c, d));
        for (i, x) in g.into_iter().enumerate() {
            add_entry(&mut lhs, i, x * &sign);
        }
    }
    let mut rhs = SparseVec::new();
    for a in bits(c) {
        if let Some(v) = get((s, c & !bit(a))) {
            let sign = qs(edge_sign(t, s, c, a));
            for (i, x) in v.into_iter().enumerate() {
                add_entry(&mut rhs, i, x * &sign);
            }
        }
    }
    Ok((to_dense(&lhs, dim), to_dense(&rhs, dim)))
}

fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| format!("{}*b{i}", crate::linalg::fmt_q(c)))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

pub fn key_str((s, c): Key) -> String {
    let vs: Vec<String> = bits(s).map(|v| v.to_string()).collect();
    let es: Vec<String> = bits(c).map(|e| e.to_string()).collect();
    format!("[{}|{}]", vs.join(","), es.join(","))
}

fn check_shapes(
    p: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    elements: &BTreeMap<Key, Vec<Q>>,
) -> std::result::Result<(), String> {
    for (&k, v) in elements {
        let prof = key_profile(t, colors, k);
        let Some(space) = p.component(&prof) else {
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            return Err(format!(
                "{} lives in a missing component {prof}",
                key_str(k)
            ));
        };
        if v.len() != space.dim() {
            return Err(format!(
                "{} has length {} but the component has dimension {}",
                key_str(k),
                v.len(),
                space.dim()
            ));
        }
        let want = popcount(k.1) as i32;
        if let Some(i) = (0..v.len()).find(|&i| !v[i].is_zero() && space.degree(i) != want) {
            return Err(format!(
                "{} has a coordinate b{i} outside degree {want}",
                key_str(k)
            ));
        }
    }
    Ok(())
}

pub fn check_dendrex(p: &SuHomotopyOperad, x: &Dendrex) -> Result<Report> {
    check_colors(p, &x.tree, &x.colors)?;
    let mut r = Report::new()
        .bound("vertices", x.tree.n_vertices())
        .bound("vertex_bound", p.vertex_bound());
    let all = keys(&x.tree);
    let missing: Vec<String> = all
        .iter()
        .filter(|k| !x.elements.contains_key(k))
        .map(|&k| key_str(k))
        .collect();
    r.record(
        "every contracted sub-tree has an element",
        if missing.is_empty() {
            Ok(())
        } else {
            Err(format!("missing {}", missing.join(" ")))
        },
    );
    r.record(
        "elements have the right degrees",
        check_shapes(p, &x.tree, &x.colors, &x.elements),
    );
    if !r.passed() {
        return Ok(r);
    }
    let get = |k: Key| x.elements.get(&k).cloned();
    let mut eq = Ok(());
    for &k in &all {
        let (l, rr) = eq4_sides(p, &x.tree, &x.colors, &get, k)?;
        if l != rr {
            eq = Err(format!(
                "at {}: left {} right {}",
                key_str(k),
                fmt_vec(&l),
                fmt_vec(&rr)
            ));
            break;
        }
    }
    r.record("dendrex equation on every contracted sub-tree", eq);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerHorn {
    pub tree: Tree,
    pub colors: Vec<Color>,
    pub edge: usize,
    pub elements: BTreeMap<Key, Vec<Q>>,
}

/// The two keys a horn leaves out: T itself and T/e.
pub fn horn_gaps(t: &Tree, e: usize) -> (Key, Key) {
    let all = t.all_vertices();
    let inner = t.subtree_inner(all);
    ((all, inner), (all, inner & !bit(e)))
}

pub fn restrict_to_horn(x: &Dendrex, e: usize) -> Result<InnerHorn> {
    if !x.tree.is_inner(e) {
        return Err(Error::InvalidTree(format!("edge {e} is not inner")));
    }
    let (top, face) = horn_gaps(&x.tree, e);
    let elements = x
        .elements
        .iter()
        .filter(|(k, _)| **k != top && **k != face)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    Ok(InnerHorn {
        tree: x.tree.clone(),
        colors: x.colors.clone(),
        edge: e,
        elements,
    })
}

pub fn check_horn(p: &SuHomotopyOperad, h: &InnerHorn) -> Result<Report> {
    check_colors(p, &h.tree, &h.colors)?;
    let mut r = Report::new().bound("vertices", h.tree.n_vertices());
    if !h.tree.is_inner(h.edge) {
        r.fail("edge is inner", format!("edge {}", h.edge));
        return Ok(r);
    }
    let (top, face) = horn_gaps(&h.tree, h.edge);
    let wanted: Vec<Key> = keys(&h.tree)
        .into_iter()
        .filter(|&k| k != top && k != face)
        .collect();
    let missing: Vec<String> = wanted
        .iter()
        .filter(|k| !h.elements.contains_key(k))
        .map(|&k| key_str(k))
        .collect();
    let extra = h.elements.contains_key(&top) || h.elements.contains_key(&face);
    r.record(
        "horn has exactly the covered elements",
        if !missing.is_empty() {
            Err(format!("missing {}", missing.join(" ")))
        } else if extra {
            Err("horn must leave out T and T/e".into())
        } else {
            Ok(())
        },
    );
    r.record(
        "elements have the right degrees",
        check_shapes(p, &h.tree, &h.colors, &h.elements),
    );
    if !r.passed() {
        return Ok(r);
    }
    let get = |k: Key| h.elements.get(&k).cloned();
    let mut eq = Ok(());
    for &k in &wanted {
        let (l, rr) = eq4_sides(p, &h.tree, &h.colors, &get, k)?;
        if l != rr {
            eq = Err(format!(
                "at {}: left {} right {}",
                key_str(k),
                fmt_vec(&l),
                fmt_vec(&rr)
            ));
            break;
        }
    }
    r.record("dendrex equation on the covered sub-trees", eq);
    Ok(r)
}

/// Fill with p_T = 0 and solve the top equation for p_{T/e}.
pub fn fill_inner_horn(p: &SuHomotopyOperad, h: &InnerHorn) -> Result<Dendrex> {
    check_colors(p, &h.tree, &h.colors)?;
    if !h.tree.is_inner(h.edge) {
        return Err(Error::InvalidTree(format!("edge {} is not inner", h.edge)));
    }
    let (top, face) = horn_gaps(&h.tree, h.edge);
    let dim = p.dim(&key_profile(&h.tree, &h.colors, top));
    let mut elements = h.elements.clone();
    elements.insert(top, zeros(dim));
    let get = |k: Key| elements.get(&k).cloned();
    let (lhs, rhs) = eq4_sides(p, &h.tree, &h.colors, &get, top)?;
    let sign = qs(edge_sign(&h.tree, top.0, top.1, h.edge));
    let face_elem: Vec<Q> = lhs.iter().zip(&rhs).map(|(l, r)| (l - r) * &sign).collect();
    elements.insert(face, face_elem);
    Ok(Dendrex {
        tree: h.tree.clone(),
        colors: h.colors.clone(),
        elements,
    })
}

/// Unknown layout of the elements (S, C) for one sub-tree S: for each C,
/// the basis indices of degree |C|.
pub struct TopSystem {
    pub cuts: Vec<ESet>,
    pub slots: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
    pub matrix: Matrix,
    pub rhs: Vec<Q>,
    pub dim: usize,
}

impl TopSystem {
    pub fn n_unknowns(&self) -> usize {
        self.matrix.cols()
    }

    /// Element vectors of a solution.
    pub fn unpack(&self, x: &[Q]) -> Vec<Vec<Q>> {
        self.slots
            .iter()
            .zip(&self.offsets)
            .map(|(slots, &off)| {
                let mut v = zeros(self.dim);
                for (j, &i) in slots.iter().enumerate() {
                    v[i] = x[off + j].clone();
                }
                v
            })
            .collect()
    }
}

/// The affine-linear system satisfied by the elements (S, C), C ⊆ inner(S),
/// once every element on a smaller sub-tree is fixed.
pub fn top_system(
    p: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    known: &BTreeMap<Key, Vec<Q>>,
    s: VSet,
) -> Result<TopSystem> {
    let prof = key_profile(t, colors, (s, 0));
    let dim = p.dim(&prof);
    let cuts: Vec<ESet> = {
        let mut v: Vec<ESet> = subsets(t.subtree_inner(s)).collect();
        v.sort_by_key(|&c| (popcount(c), c));
        v
    };
    let space = p.component(&prof);
    let mut slots = Vec::new();
    let mut offsets = Vec::new();
    let mut n = 0;
    for &c in &cuts {
        let sl = space
            .map(|sp| sp.in_degree(popcount(c) as i32))
            .unwrap_or_default();
        offsets.push(n);
        n += sl.len();
        slots.push(sl);
    }
    let corolla = ColoredTree {
        tree: Tree::corolla(prof.arity()),
        colors: std::iter::once(prof.output)
            .chain(prof.inputs.iter().copied())
            .collect(),
    };
    let mut gamma1: Vec<SparseVec> = Vec::with_capacity(dim);
    if dim > 0 {
        for i in 0..dim {
            gamma1.push(p.gamma_basis(&corolla, &[i])?);
        }
    }
    let pos: BTreeMap<ESet, usize> = cuts.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut matrix = Matrix::zero(cuts.len() * dim, n);
    let mut rhs = zeros(cuts.len() * dim);
    let lower = |k: Key| {
        if k.0 == s {
            None
        } else {
            known.get(&k).cloned()
        }
    };
    for (ci, &c) in cuts.iter().enumerate() {
        let row0 = ci * dim;
        for (j, &i) in slots[ci].iter().enumerate() {
            for (r, x) in &gamma1[i] {
                matrix.add(row0 + r, offsets[ci] + j, x.clone());
            }
        }
        for a in bits(c) {
            let cj = pos[&(c & !bit(a))];
            let sign = qs(-edge_sign(t, s, c, a));
            for (j, &i) in slots[cj].iter().enumerate() {
                matrix.add(row0 + i, offsets[cj] + j, sign.clone());
            }
        }
        let (l, _) = eq4_sides(p, t, colors, &lower, (s, c))?;
        for (r, x) in l.into_iter().enumerate() {
            rhs[row0 + r] = -x;
        }
    }
    Ok(TopSystem {
        cuts,
        slots,
        offsets,
        matrix,
        rhs,
        dim,
    })
}

/// A random dendrex: sub-trees in increasing size, each a particular
/// solution plus a random kernel combination.
pub fn random_dendrex<R: Rng>(
    p: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    rng: &mut R,
) -> Result<Dendrex> {
    check_colors(p, t, colors)?;
    let mut elements = BTreeMap::new();
    let mut subs = t.enumerate_subtrees();
    subs.sort_by_key(|&s| (popcount(s), s));
    for s in subs {
        let sys = top_system(p, t, colors, &elements, s)?;
        let mut x = sys
            .matrix
            .solve(&sys.rhs)
            .ok()
            .ok_or_else(|| Error::Invalid(format!("no extension over {}", key_str((s, 0)))))?;
        for k in sys.matrix.kernel() {
            let c = q(rng.gen_range(-2..=2));
            for (xi, ki) in x.iter_mut().zip(k) {
                *xi += &c * ki;
            }
        }
        for (c, v) in sys.cuts.iter().zip(sys.unpack(&x)) {
            elements.insert((s, *c), v);
        }
    }
    Ok(Dendrex {
        tree: t.clone(),
        colors: colors.to_vec(),
        elements,
    })
}

/// Colorings of `t` whose vertex profiles all have nonzero components.
pub fn colorings(p: &SuHomotopyOperad, t: &Tree) -> Vec<Vec<Color>> {
    let nc = p.n_colors();
    let mut out = Vec::new();
    let mut colors = vec![0; t.n_edges()];
    fn rec(
        p: &SuHomotopyOperad,
        t: &Tree,
        e: usize,
        nc: usize,
        colors: &mut Vec<Color>,
        out: &mut Vec<Vec<Color>>,
    ) {
        if e == t.n_edges() {
            let ok = (0..t.n_vertices()).all(|v| {
                let vx = t.vertex(v);
                p.dim(&Profile::new(
                    vx.ins.iter().map(|&i| colors[i]).collect(),
                    colors[vx.out],
                )) > 0
            });
            if ok {
                out.push(colors.clone());
            }
            return;
        }
        for c in 0..nc {
            colors[e] = c;
            // prune on vertices whose edges are all assigned
            if let Some(v) = t.consumer(e) {
                let vx = t.vertex(v);
                if vx.ins.iter().all(|&i| i <= e) && vx.out <= e {
                    let pr =
                        Profile::new(vx.ins.iter().map(|&i| colors[i]).collect(), colors[vx.out]);
                    if p.dim(&pr) == 0 {
                        continue;
                    }
                }
            }
            rec(p, t, e + 1, nc, colors, out);
        }
    }
    rec(p, t, 0, nc, &mut colors, &mut out);
    out.retain(|c| in_bounds(p, t, c));
    out
}

/// Every sub-tree composes into a stored component.
pub fn in_bounds(p: &SuHomotopyOperad, t: &Tree, colors: &[Color]) -> bool {
    t.enumerate_subtrees()
        .into_iter()
        .all(|s| p.component(&key_profile(t, colors, (s, 0))).is_some())
}

/// Pull a dendrex back along a generating tree map into its target.
pub fn pullback(p: &SuHomotopyOperad, x: &Dendrex, m: &TreeMap) -> Result<Dendrex> {
    if m.target != x.tree {
        return Err(Error::InvalidTree(
            "tree map does not land in the dendrex tree".into(),
        ));
    }
    let src = &m.source;
    let colors: Vec<Color> = m.edge_map.iter().map(|&e| x.colors[e]).collect();
    let mut elements = BTreeMap::new();
    for k in keys(src) {
        let (s, c) = k;
        let blocks = src.blocks(s, c);
        let unit_blocks = blocks.iter().filter(|&&b| m.map_vertices(b) == 0).count();
        let prof = key_profile(src, &colors, k);
        let v = if unit_blocks > 0 {
            if blocks.len() == 1 {
                p.unit(prof.output)
            } else {
                zeros(p.dim(&prof))
            }
        } else {
            let tk = (m.map_vertices(s), m.map_edges(c));
            x.elements
                .get(&tk)
                .cloned()
                .ok_or_else(|| Error::Missing(format!("element {}", key_str(tk))))?
        };
        elements.insert(k, v);
    }
    Ok(Dendrex {
        tree: src.clone(),
        colors,
        elements,
    })
}

pub fn inner_face(p: &SuHomotopyOperad, x: &Dendrex, e: usize) -> Result<Dendrex> {
    pullback(p, x, &x.tree.inner_coface(e)?)
}

pub fn outer_face(p: &SuHomotopyOperad, x: &Dendrex, v: usize) -> Result<Dendrex> {
    pullback(p, x, &x.tree.outer_coface(v)?)
}

pub fn degeneracy(p: &SuHomotopyOperad, x: &Dendrex, e: usize) -> Result<Dendrex> {
    pullback(p, x, &x.tree.codegeneracy(e)?)
}

// ---------------------------------------------------------------------------
// mapping spaces P^L(c₁,…,c_m; c)

/// One level of the mapping space: solutions of
/// d p_{i₀<…<i_k} = Σ_α (−1)^α p_{…î_α…}, with d = −γ on one vertex.
#[derive(Clone, Debug)]
pub struct MapLevel {
    pub n: usize,
    pub seqs: Vec<u64>,
    pub slots: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
    pub ambient: usize,
    pub basis: Vec<Vec<Q>>,
    span: Span,
}

impl MapLevel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn seq_index(&self, s: u64) -> Option<usize> {
        self.seqs.iter().position(|&x| x == s)
    }

    /// Element p_seq of an ambient vector, as a component vector.
    pub fn element(&self, v: &[Q], seq: u64, dim: usize) -> Vec<Q> {
        let mut out = zeros(dim);
        if let Some(i) = self.seq_index(seq) {
            for (j, &b) in self.slots[i].iter().enumerate() {
                out[b] = v[self.offsets[i] + j].clone();
            }
        }
        out
    }

    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        self.span.coords(v)
    }
}

#[derive(Clone, Debug)]
pub struct MappingSpace {
    pub profile: Profile,
    pub dim: usize,
    pub degrees: Vec<i32>,
    /// The differential of the component (−γ on the corolla).
    pub d: Matrix,
    pub levels: Vec<MapLevel>,
}

pub fn component_differential(p: &SuHomotopyOperad, prof: &Profile) -> Result<Matrix> {
    let dim = p.dim(prof);
    let corolla = ColoredTree {
        tree: Tree::corolla(prof.arity()),
        colors: std::iter::once(prof.output)
            .chain(prof.inputs.iter().copied())
            .collect(),
    };
    let mut d = Matrix::zero(dim, dim);
    for i in 0..dim {
        for (r, x) in p.gamma_basis(&corolla, &[i])? {
            d.set(r, i, -x);
        }
    }
    Ok(d)
}

pub fn mapping_space(
    p: &SuHomotopyOperad,
    prof: &Profile,
    max_level: usize,
) -> Result<MappingSpace> {
    let dim = p.dim(prof);
    let degrees: Vec<i32> = (0..dim).map(|i| p.degree(prof, i)).collect();
    let d = component_differential(p, prof)?;
    let mut levels = Vec::new();
    for n in 0..=max_level {
        let mut seqs: Vec<u64> = (1u64..1 << (n + 1)).collect();
        seqs.sort_by_key(|&s| (popcount(s), s));
        let mut slots = Vec::new();
        let mut offsets = Vec::new();
        let mut ambient = 0;
        for &s in &seqs {
            let k = popcount(s) as i32 - 1;
            let sl: Vec<usize> = (0..dim).filter(|&i| degrees[i] == k).collect();
            offsets.push(ambient);
            ambient += sl.len();
            slots.push(sl);
        }
        let pos: BTreeMap<u64, usize> = seqs.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut cons = Matrix::zero(seqs.len() * dim, ambient);
        for (si, &s) in seqs.iter().enumerate() {
            for (j, &b) in slots[si].iter().enumerate() {
                for r in 0..dim {
                    let x = d.get(r, b);
                    if !x.is_zero() {
                        cons.add(si * dim + r, offsets[si] + j, x);
                    }
                }
            }
            if popcount(s) >= 2 {
                for (alpha, i) in bits(s).enumerate() {
                    let sj = pos[&(s & !bit(i))];
                    let sign = qs(-sign_pow(alpha as i64));
                    for (j, &b) in slots[sj].iter().enumerate() {
                        cons.add(si * dim + b, offsets[sj] + j, sign.clone());
                    }
                }
            }
        }
        let basis = cons.kernel();
        let span = Span::from_vectors(ambient, &basis);
        levels.push(MapLevel {
            n,
            seqs,
            slots,
            offsets,
            ambient,
            basis,
            span,
        });
    }
    Ok(MappingSpace {
        profile: prof.clone(),
        dim,
        degrees,
        d,
        levels,
    })
}

fn delta(i: usize, j: usize) -> usize {
    if j < i {
        j
    } else {
        j + 1
    }
}

fn sigma(i: usize, j: usize) -> usize {
    if j <= i {
        j
    } else {
        j - 1
    }
}

impl MappingSpace {
    fn level_map(&self, from: usize, to: usize, img: &dyn Fn(u64) -> Option<u64>) -> Matrix {
        let src = &self.levels[from];
        let dst = &self.levels[to];
        let mut m = Matrix::zero(dst.dim(), src.dim());
        for (col, b) in src.basis.iter().enumerate() {
            let mut v = zeros(dst.ambient);
            for (si, &s) in dst.seqs.iter().enumerate() {
                if let Some(t) = img(s) {
                    let e = src.element(b, t, self.dim);
                    for (j, &bb) in dst.slots[si].iter().enumerate() {
                        v[dst.offsets[si] + j] = e[bb].clone();
                    }
                }
            }
            let c = dst
                .coords(&v)
                .expect("faces and degeneracies preserve the constraints");
            for (r, x) in c.into_iter().enumerate() {
                if !x.is_zero() {
                    m.set(r, col, x);
                }
            }
        }
        m
    }

    /// d_i: level n → level n−1 in level coordinates.
    pub fn face(&self, n: usize, i: usize) -> Matrix {
        self.level_map(n, n - 1, &|s| {
            Some(bits(s).fold(0, |acc, j| acc | bit(delta(i, j))))
        })
    }

    /// s_i: level n → level n+1.
    pub fn degeneracy(&self, n: usize, i: usize) -> Matrix {
        self.level_map(n, n + 1, &|s| {
            let img: Vec<usize> = bits(s).map(|j| sigma(i, j)).collect();
            if img.windows(2).all(|w| w[0] < w[1]) {
                Some(img.iter().fold(0, |acc, &j| acc | bit(j)))
            } else {
                None
            }
        })
    }

    /// Basis of N_n = ∩_{i<n} ker d_i in level coordinates.
    pub fn normalized(&self, n: usize) -> Vec<Vec<Q>> {
        if n == 0 {
            return (0..self.levels[0].dim())
                .map(|i| crate::linalg::unit_vec(self.levels[0].dim(), i))
                .collect();
        }
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for i in 0..n {
            let f = self.face(n, i);
            for r in 0..f.rows() {
                rows.push((0..f.cols()).map(|c| f.get(r, c)).collect());
            }
        }
        if rows.is_empty() {
            return (0..self.levels[n].dim())
                .map(|i| crate::linalg::unit_vec(self.levels[n].dim(), i))
                .collect();
        }
        Matrix::from_dense(&rows).kernel()
    }
}

/// N(P^L) ≅ tr P degreewise up to level L, through the top element p_{0<…<n}.
pub fn normalized_vs_tr(p: &SuHomotopyOperad, prof: &Profile, max_level: usize) -> Result<Report> {
    let ms = mapping_space(p, prof, max_level)?;
    let mut r = Report::new()
        .bound("level", max_level)
        .bound("profile", prof);
    let tr_dim = |n: usize| -> usize {
        let idx: Vec<usize> = (0..ms.dim).filter(|&i| ms.degrees[i] == n as i32).collect();
        if n == 0 {
            let sub = ms.d.submatrix(&(0..ms.dim).collect::<Vec<_>>(), &idx);
            idx.len() - sub.rank()
        } else {
            idx.len()
        }
    };
    let top = |n: usize, x: &[Q]| -> Vec<Q> {
        let lvl = &ms.levels[n];
        let amb = vec_combination(&lvl.basis, x, lvl.ambient);
        lvl.element(&amb, (1u64 << (n + 1)) - 1, ms.dim)
    };
    let mut dims = Ok(());
    let mut iso = Ok(());
    let mut comm = Ok(());
    for n in 0..=max_level {
        let nb = ms.normalized(n);
        if nb.len() != tr_dim(n) {
            dims = Err(format!(
                "degree {n}: normalized {} vs truncation {}",
                nb.len(),
                tr_dim(n)
            ));
            break;
        }
        let images: Vec<Vec<Q>> = nb.iter().map(|x| top(n, x)).collect();
        let rank = if images.is_empty() {
            0
        } else {
            Matrix::from_columns(ms.dim, &images).rank()
        };
        if rank != nb.len() {
            iso = Err(format!(
                "degree {n}: top-element map has rank {rank} on {} vectors",
                nb.len()
            ));
        }
        if n >= 1 {
            let f = ms.face(n, n);
            for x in &nb {
                let dx: Vec<Q> = f
                    .apply(x)
                    .into_iter()
                    .map(|c| c * qs(sign_pow(n as i64)))
                    .collect();
                let lhs = top(n - 1, &dx);
                let rhs = ms.d.apply(&top(n, x));
                if lhs != rhs {
                    comm = Err(format!("degree {n}: differentials disagree"));
                }
            }
        }
    }
    r.record("dimensions match the truncation", dims);
    r.record("top element is an isomorphism", iso);
    r.record("differentials commute", comm);
    Ok(r)
}

fn vec_combination(basis: &[Vec<Q>], x: &[Q], n: usize) -> Vec<Q> {
    let mut out = zeros(n);
    for (b, c) in basis.iter().zip(x) {
        if c.is_zero() {
            continue;
        }
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// H₀ and the category level

/// H₀ of one component: cycles, boundaries and a quotient basis.
#[derive(Clone, Debug)]
pub struct H0 {
    pub dim: usize,
    pub cycles: Vec<Vec<Q>>,
    pub boundaries: Span,
    /// Cycle representatives of a basis of H₀.
    pub reps: Vec<Vec<Q>>,
    quotient: Span,
}

impl H0 {
    /// Coordinates of the class of a degree-0 cycle in the representative basis.
    pub fn class(&self, z: &[Q]) -> Option<Vec<Q>> {
        let c = self.quotient.coords(z)?;
        Some(c[..self.reps.len()].to_vec())
    }

    pub fn is_boundary(&self, z: &[Q]) -> bool {
        self.boundaries.contains(z)
    }
}

pub fn h0(p: &SuHomotopyOperad, prof: &Profile) -> Result<H0> {
    let dim = p.dim(prof);
    let d = component_differential(p, prof)?;
    let deg = |i: usize| p.degree(prof, i);
    let zero: Vec<usize> = (0..dim).filter(|&i| deg(i) == 0).collect();
    let one: Vec<usize> = (0..dim).filter(|&i| deg(i) == 1).collect();
    let all: Vec<usize> = (0..dim).collect();
    let cycles: Vec<Vec<Q>> = d
        .submatrix(&all, &zero)
        .kernel()
        .into_iter()
        .map(|k| {
            let mut v = zeros(dim);
            for (j, &i) in zero.iter().enumerate() {
                v[i] = k[j].clone();
            }
            v
        })
        .collect();
    let bvecs: Vec<Vec<Q>> = one.iter().map(|&i| d.column(i)).collect();
    let boundaries = Span::from_vectors(dim, &bvecs);
    let mut reps = Vec::new();
    let mut probe = boundaries.clone();
    for z in &cycles {
        if probe.insert(z) {
            reps.push(z.clone());
        }
    }
    // generators: reps first, then boundaries, so class coordinates come first
    let mut gens = reps.clone();
    gens.extend(bvecs);
    let quotient = Span::from_vectors(dim, &gens);
    Ok(H0 {
        dim,
        cycles,
        boundaries,
        reps,
        quotient,
    })
}

/// π₀ of the mapping space against H₀, and τ_d composition (through horn
/// filling on two-vertex trees) against composition in H₀.
pub fn h0_nerve_comparison(p: &SuHomotopyOperad, profiles: &[Profile]) -> Result<Report> {
    let mut r = Report::new().bound("profiles", profiles.len());
    let mut dims = Ok(());
    for prof in profiles {
        let ms = mapping_space(p, prof, 1)?;
        let d0 = ms.face(1, 0);
        let d1 = ms.face(1, 1);
        let pi0 = ms.levels[0].dim() - d0.plus(&d1.scale(&q(-1))).rank();
        let h = h0(p, prof)?;
        if pi0 != h.reps.len() {
            dims = Err(format!(
                "{prof}: π₀ has dimension {pi0}, H₀ has {}",
                h.reps.len()
            ));
            break;
        }
    }
    r.record("π₀ of the mapping space = H₀", dims);

    let mut comp = Ok(());
    let mut checked = 0usize;
    'outer: for outer in profiles {
        let ho = h0(p, outer)?;
        if ho.reps.is_empty() {
            continue;
        }
        for slot in 0..outer.arity() {
            for inner in profiles.iter().filter(|q| q.output == outer.inputs[slot]) {
                let hi = h0(p, inner)?;
                if hi.reps.is_empty() {
                    continue;
                }
                let target = outer.graft(slot, inner);
                if p.component(&target).is_none() {
                    continue;
                }
                let ht = h0(p, &target)?;
                let t = two_vertex_tree(outer, slot, inner);
                for x in &ho.reps {
                    for y in &hi.reps {
                        // horn on the two-vertex tree, filled
                        let (_, face) = horn_gaps(&t.tree, t.tree.inner_edges()[0]);
                        let mut elements = BTreeMap::new();
                        elements.insert((bit(0), 0), x.clone());
                        elements.insert((bit(1), 0), y.clone());
                        let h = InnerHorn {
                            tree: t.tree.clone(),
                            colors: t.colors.clone(),
                            edge: t.tree.inner_edges()[0],
                            elements,
                        };
                        let filled = fill_inner_horn(p, &h)?;
                        let composite = &filled.elements[&face];
                        let direct = p.gamma(&t, &[x.clone(), y.clone()])?;
                        let diff: Vec<Q> =
                            composite.iter().zip(&direct).map(|(a, b)| a - b).collect();
                        if !ht.is_boundary(&diff) || ht.class(composite).is_none() {
                            comp = Err(format!("{outer} ∘_{slot} {inner}: filler class differs from the H₀ composite"));
                            break 'outer;
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    r.set_bound("compositions", checked);
    r.record("τ_d composition = H₀ composition", comp);
    Ok(r)
}

/// The two-vertex tree realizing outer ∘_slot inner.
pub fn two_vertex_tree(outer: &Profile, slot: usize, inner: &Profile) -> ColoredTree {
    let n = outer.arity();
    // edges: 0 root, 1..=n outer inputs, then inner inputs
    let mut vs = vec![(0usize, (1..=n).collect::<Vec<_>>())];
    let mid = 1 + slot;
    vs.push((mid, (n + 1..n + 1 + inner.arity()).collect()));
    let mut colors = vec![outer.output];
    colors.extend(outer.inputs.iter().copied());
    colors.extend(inner.inputs.iter().copied());
    let (tree, _, eback) = Tree::build(&vs, 0).expect("two-vertex tree");
    ColoredTree {
        colors: eback.iter().map(|&e| colors[e]).collect(),
        tree,
    }
}

fn linear2(a: Color, b: Color, c: Color) -> ColoredTree {
    // root vertex (b; c) below (a; b)
    two_vertex_tree(&Profile::new(vec![b], c), 0, &Profile::new(vec![a], b))
}

/// The category j*H₀(P): hom spaces between colors and composition.
pub struct H0Category<'a> {
    p: &'a SuHomotopyOperad,
    homs: BTreeMap<(Color, Color), H0>,
}

impl<'a> H0Category<'a> {
    pub fn new(p: &'a SuHomotopyOperad) -> Result<Self> {
        let mut homs = BTreeMap::new();
        for a in 0..p.n_colors() {
            for b in 0..p.n_colors() {
                homs.insert((a, b), h0(p, &Profile::new(vec![a], b))?);
            }
        }
        Ok(H0Category { p, homs })
    }

    pub fn hom(&self, a: Color, b: Color) -> &H0 {
        &self.homs[&(a, b)]
    }

    /// v after u for u: a → b, v: b → c, both cycles.
    pub fn compose(&self, u: &[Q], a: Color, v: &[Q], b: Color, c: Color) -> Result<Vec<Q>> {
        self.p.gamma(&linear2(a, b, c), &[v.to_vec(), u.to_vec()])
    }

    /// An inverse class for u: a → b, if one exists.
    pub fn inverse(&self, u: &[Q], a: Color, b: Color) -> Result<Option<Vec<Q>>> {
        let back = self.hom(b, a);
        if back.reps.is_empty() {
            return Ok(None);
        }
        let ida = self.p.unit(a);
        let idb = self.p.unit(b);
        // unknown v = Σ λ_i reps_i; both composites minus the units must be boundaries
        let mut cols_a = Vec::new();
        let mut cols_b = Vec::new();
        for rep in &back.reps {
            cols_a.push(self.compose(u, a, rep, b, a)?);
            cols_b.push(self.compose(rep, b, u, a, b)?);
        }
        let ha = self.hom(a, a);
        let hb = self.hom(b, b);
        let k = back.reps.len();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        let mut rhs = Vec::new();
        for (h, cols, id) in [(ha, &cols_a, &ida), (hb, &cols_b, &idb)] {
            let Some(idc) = h.class(id) else {
                return Ok(None);
            };
            let classes: Vec<Vec<Q>> = cols
                .iter()
                .map(|c| h.class(c).expect("composites of cycles are cycles"))
                .collect();
            for (r, target) in idc.iter().enumerate() {
                rows.push((0..k).map(|j| classes[j][r].clone()).collect());
                rhs.push(target.clone());
            }
        }
        if rows.is_empty() {
            return Ok(Some(zeros(back.dim)));
        }
        Ok(Matrix::from_dense(&rows)
            .solve(&rhs)
            .ok()
            .map(|lam| vec_combination(&back.reps, &lam, back.dim)))
    }

    /// Bounded search for isomorphisms a → b among small combinations of
    /// the representative classes.
    pub fn iso_candidates(&self, a: Color, b: Color) -> Result<Vec<(Vec<Q>, Vec<Q>)>> {
        let h = self.hom(a, b);
        let mut out = Vec::new();
        for coeffs in small_combinations(h.reps.len()) {
            let u = vec_combination(&h.reps, &coeffs, h.dim);
            if let Some(v) = self.inverse(&u, a, b)? {
                out.push((u, v));
            }
        }
        Ok(out)
    }
}

/// Nonzero coefficient vectors with entries in {−1, 0, 1}, capped.
fn small_combinations(k: usize) -> Vec<Vec<Q>> {
    let mut out = Vec::new();
    let k = k.min(4);
    let total = 3usize.pow(k as u32);
    for mut code in 1..total {
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            v.push(q((code % 3) as i64 - 1));
            code /= 3;
        }
        if v.iter().any(|c| !c.is_zero()) {
            out.push(v);
        }
    }
    out.sort_by_key(|v| v.iter().filter(|c| !c.is_zero()).count());
    out.dedup();
    out
}

/// Every color profile of arity at most `arity` over `n` colors.
pub fn color_tuples(n: usize, arity: usize) -> Vec<Profile> {
    let mut out = Vec::new();
    let mut ins: Vec<Vec<Color>> = vec![vec![]];
    for a in 0..=arity {
        if a > 0 {
            ins = ins
                .into_iter()
                .flat_map(|v| {
                    (0..n).map(move |c| {
                        let mut v = v.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        for i in &ins {
            for c in 0..n {
                out.push(Profile::new(i.clone(), c));
            }
        }
    }
    out
}

/// Verdict of a homotopical predicate, with witnesses in the report.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub holds: bool,
    pub report: Report,
}

fn first_level_matrix(f: &SuMorphism, prof: &Profile) -> Matrix {
    let tgt = f.image_profile(prof);
    f.f1.get(prof)
        .cloned()
        .unwrap_or_else(|| Matrix::zero(f.target.dim(&tgt), f.source.dim(prof)))
}

/// Homology of a component in one degree: cycles modulo boundaries.
fn homology_map_iso(
    f: &SuMorphism,
    prof: &Profile,
    deg: i32,
) -> Result<std::result::Result<(), String>> {
    let tgt = f.image_profile(prof);
    let ds = component_differential(&f.source, prof)?;
    let dt = component_differential(&f.target, &tgt)?;
    let m = first_level_matrix(f, prof);
    let hs = homology_data(
        &ds,
        &(0..f.source.dim(prof))
            .map(|i| f.source.degree(prof, i))
            .collect::<Vec<_>>(),
        deg,
    );
    let ht = homology_data(
        &dt,
        &(0..f.target.dim(&tgt))
            .map(|i| f.target.degree(&tgt, i))
            .collect::<Vec<_>>(),
        deg,
    );
    // images of the source classes, modulo target boundaries
    let mut span = Span::from_vectors(f.target.dim(&tgt), &ht.1);
    let base = span.dim();
    let mut injective = true;
    for z in &hs.0 {
        if !span.insert(&m.apply(z)) {
            injective = false;
        }
    }
    let image = span.dim() - base;
    let target_classes = ht.0.len();
    Ok(if !injective {
        Err(format!("{prof} degree {deg}: a nonzero class maps to zero"))
    } else if image != target_classes {
        Err(format!(
            "{prof} degree {deg}: image has dimension {image} of {target_classes}"
        ))
    } else {
        Ok(())
    })
}

/// (class representatives, boundary vectors) in one degree.
fn homology_data(d: &Matrix, degrees: &[i32], deg: i32) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let n = degrees.len();
    let here: Vec<usize> = (0..n).filter(|&i| degrees[i] == deg).collect();
    let above: Vec<usize> = (0..n).filter(|&i| degrees[i] == deg + 1).collect();
    let all: Vec<usize> = (0..n).collect();
    let bounds: Vec<Vec<Q>> = above.iter().map(|&i| d.column(i)).collect();
    let cycles: Vec<Vec<Q>> = d
        .submatrix(&all, &here)
        .kernel()
        .into_iter()
        .map(|k| {
            let mut v = zeros(n);
            for (j, &i) in here.iter().enumerate() {
                v[i] = k[j].clone();
            }
            v
        })
        .collect();
    let mut span = Span::from_vectors(n, &bounds);
    let reps = cycles.into_iter().filter(|z| span.insert(z)).collect();
    (reps, bounds)
}

fn window_of(p: &SuHomotopyOperad, profiles: &[Profile]) -> (i32, i32) {
    let mut lo = 0;
    let mut hi = 0;
    for pr in profiles {
        if let Some(sp) = p.component(pr) {
            lo = lo.min(sp.window().0);
            hi = hi.max(sp.window().1);
        }
    }
    (lo, hi)
}

/// First-level H_j isomorphisms for P-degrees j ≥ 0 in the window, plus
/// essential surjectivity of j*H₀(f).
pub fn is_weak_equivalence(f: &SuMorphism) -> Result<Verdict> {
    let arity = f.source.max_arity().max(f.target.max_arity());
    let profiles = color_tuples(f.source.n_colors(), arity);
    let (_, hi) = window_of(
        &f.target,
        &profiles
            .iter()
            .map(|p| f.image_profile(p))
            .collect::<Vec<_>>(),
    );
    let (_, hi_s) = window_of(&f.source, &profiles);
    let hi = hi.max(hi_s);
    let mut r = Report::new()
        .bound("degrees", format!("0..{hi}"))
        .bound("arity", arity);
    let mut homology = Ok(());
    'p: for prof in &profiles {
        for deg in 0..=hi {
            if let Err(w) = homology_map_iso(f, prof, deg)? {
                homology = Err(w);
                break 'p;
            }
        }
    }
    r.record(
        "first level is a homology isomorphism in degrees ≥ 0",
        homology,
    );

    let cat_t = H0Category::new(&f.target)?;
    let mut ess = Ok(());
    for d in 0..f.target.n_colors() {
        if f.color_map.contains(&d) {
            continue;
        }
        let mut found = false;
        for c in 0..f.source.n_colors() {
            if !cat_t.iso_candidates(f.color_map[c], d)?.is_empty() {
                found = true;
                break;
            }
        }
        if !found {
            ess = Err(format!(
                "color {d} of the target is not isomorphic to an image color"
            ));
            break;
        }
    }
    r.record("j*H₀ is essentially surjective", ess);
    Ok(Verdict {
        holds: r.passed(),
        report: r,
    })
}

/// Degreewise surjective in P-degrees ≥ 1 and j*H₀(f) an isofibration
/// (isomorphisms out of image colors lift, searched within bounds).
pub fn is_fibration(f: &SuMorphism) -> Result<Verdict> {
    let arity = f.source.max_arity().max(f.target.max_arity());
    let profiles = color_tuples(f.source.n_colors(), arity);
    let (_, hi) = window_of(
        &f.target,
        &profiles
            .iter()
            .map(|p| f.image_profile(p))
            .collect::<Vec<_>>(),
    );
    let mut r = Report::new()
        .bound("degrees", format!("1..{hi}"))
        .bound("arity", arity);
    let mut surj = Ok(());
    'p: for prof in &profiles {
        let tgt = f.image_profile(prof);
        let Some(space) = f.target.component(&tgt) else {
            continue;
        };
        let m = first_level_matrix(f, prof);
        for deg in 1..=hi {
            let rows = space.in_degree(deg);
            if rows.is_empty() {
                continue;
            }
            let cols: Vec<usize> = match f.source.component(prof) {
                Some(s) => s.in_degree(deg),
                None => vec![],
            };
            let rank = if cols.is_empty() {
                0
            } else {
                m.submatrix(&rows, &cols).rank()
            };
            if rank < rows.len() {
                surj = Err(format!(
                    "{prof} → {tgt} misses {} dimensions in degree {deg}",
                    rows.len() - rank
                ));
                break 'p;
            }
        }
    }
    r.record("surjective in degrees ≥ 1", surj);

    let cat_s = H0Category::new(&f.source)?;
    let cat_t = H0Category::new(&f.target)?;
    let mut iso = Ok(());
    'c: for c in 0..f.source.n_colors() {
        for d in 0..f.target.n_colors() {
            for (u, _) in cat_t.iso_candidates(f.color_map[c], d)? {
                let mut lifted = false;
                for c2 in (0..f.source.n_colors()).filter(|&x| f.color_map[x] == d) {
                    let prof = Profile::new(vec![c], c2);
                    let m = first_level_matrix(f, &prof);
                    let ht = cat_t.hom(f.color_map[c], d);
                    let Some(want) = ht.class(&u) else { continue };
                    for (w, _) in cat_s.iso_candidates(c, c2)? {
                        if ht.class(&m.apply(&w)).as_ref() == Some(&want) {
                            lifted = true;
                            break;
                        }
                    }
                    if lifted {
                        break;
                    }
                }
                if !lifted {
                    iso = Err(format!(
                        "an isomorphism {} → {d} does not lift from color {c}",
                        f.color_map[c]
                    ));
                    break 'c;
                }
            }
        }
    }
    r.record("j*H₀ is an isofibration (bounded search)", iso);
    Ok(Verdict {
        holds: r.passed(),
        report: r,
    })
}

/// Dendrices over P and over tr(P) are the same: per sub-tree, with the
/// lower elements fixed, the affine solution spaces agree after inclusion.
pub fn nerve_tr_equality<R: Rng>(
    p: &SuHomotopyOperad,
    max_vertices: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Report> {
    let tr = p.truncate()?;
    let mut r = Report::new()
        .bound("vertices", max_vertices)
        .bound("samples_per_coloring", samples);
    let mut outcome = Ok(());
    let mut systems = 0usize;
    let arity = p.max_arity();
    'trees: for t in crate::trees::trees_up_to(max_vertices, arity) {
        for colors in colorings(p, &t) {
            for _ in 0..samples {
                // a dendrex over tr(P), pushed into P
                let x = random_dendrex(&tr, &t, &colors, rng)?;
                let incl: BTreeMap<Key, Vec<Q>> = x
                    .elements
                    .iter()
                    .map(|(&k, v)| (k, tr.include(&key_profile(&t, &colors, k), v)))
                    .collect();
                let pushed = Dendrex {
                    tree: t.clone(),
                    colors: colors.clone(),
                    elements: incl.clone(),
                };
                if !check_dendrex(p, &pushed)?.passed() {
                    outcome = Err(format!(
                        "{}: a tr(P) dendrex is not a P dendrex",
                        t.planar_encoding()
                    ));
                    break 'trees;
                }
                for s in t.enumerate_subtrees() {
                    let sp = top_system(p, &t, &colors, &incl, s)?;
                    let st = top_system(&tr, &t, &colors, &x.elements, s)?;
                    systems += 1;
                    if let Err(w) = compare_systems(&tr, &t, &colors, s, &sp, &st) {
                        outcome = Err(format!(
                            "{} over {}: {w}",
                            t.planar_encoding(),
                            key_str((s, 0))
                        ));
                        break 'trees;
                    }
                }
            }
        }
    }
    r.set_bound("systems", systems);
    r.record("constraint systems over P and tr(P) agree", outcome);
    Ok(r)
}

fn compare_systems(
    tr: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    s: VSet,
    sp: &TopSystem,
    st: &TopSystem,
) -> std::result::Result<(), String> {
    let prof = key_profile(t, colors, (s, 0));
    let kp = sp.matrix.kernel();
    let kt = st.matrix.kernel();
    if kp.len() != kt.len() {
        return Err(format!(
            "solution spaces have dimensions {} and {}",
            kp.len(),
            kt.len()
        ));
    }
    let pp = sp.matrix.solve(&sp.rhs).ok();
    let pt = st.matrix.solve(&st.rhs).ok();
    match (pp, pt) {
        (None, None) => Ok(()),
        (Some(_), None) | (None, Some(_)) => Err("one system is inconsistent".into()),
        (Some(_), Some(xt)) => {
            // include the tr solution and its kernel into P's unknowns
            let embed = |x: &[Q]| -> Vec<Q> {
                let elems = st.unpack(x);
                let mut out = zeros(sp.n_unknowns());
                for (ci, e) in elems.iter().enumerate() {
                    let v = tr.include(&prof, e);
                    for (j, &i) in sp.slots[ci].iter().enumerate() {
                        out[sp.offsets[ci] + j] = v[i].clone();
                    }
                }
                out
            };
            let x = embed(&xt);
            if sp.matrix.apply(&x) != sp.rhs {
                return Err("an included tr(P) solution fails over P".into());
            }
            for k in &kt {
                if !sp.matrix.apply(&embed(k)).iter().all(Zero::is_zero) {
                    return Err("an included homogeneous solution fails over P".into());
                }
            }
            Ok(())
        }
    }
}

/// Structured dendrex from a composite-closed choice of vertex elements:
/// p_{(S,∅)} is the composite along S, and elements with cuts vanish.
pub fn composite_dendrex(
    p: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    vertex_elems: &[Vec<Q>],
) -> Result<Dendrex> {
    check_colors(p, t, colors)?;
    let ct = ColoredTree {
        tree: t.clone(),
        colors: colors.to_vec(),
    };
    let mut elements: BTreeMap<Key, Vec<Q>> = BTreeMap::new();
    let mut subs = t.enumerate_subtrees();
    subs.sort_by_key(|&s| (popcount(s), s));
    for s in subs {
        let prof = key_profile(t, colors, (s, 0));
        for c in subsets(t.subtree_inner(s)) {
            let v = if c != 0 {
                zeros(p.dim(&prof))
            } else if popcount(s) == 1 {
                vertex_elems[bits(s).next().unwrap()].clone()
            } else {
                // compose the root vertex with the rest, one edge at a time
                let root = t.subtree_root_vertex(s);
                let a = t
                    .vertex(root)
                    .ins
                    .iter()
                    .copied()
                    .find(|&e| t.producer(e).is_some_and(|u| s & bit(u) != 0))
                    .unwrap();
                let (quot, blocks) = colored_contract(&ct, s, bit(a));
                let factors: Vec<Vec<Q>> = blocks
                    .iter()
                    .map(|&b| elements[&(b, 0)].clone())
                    .collect::<Vec<_>>();
                let g = p.gamma(&quot, &factors)?;
                let sign = qs(edge_sign(t, s, bit(a), a) * partition_sign(t, s, bit(a), bit(a)));
                g.into_iter().map(|x| x * &sign).collect()
            };
            elements.insert((s, c), v);
        }
    }
    Ok(Dendrex {
        tree: t.clone(),
        colors: colors.to_vec(),
        elements,
    })
}
