//! Planar rooted trees, sub-trees and their partitions, contractions,
//! cofaces/codegeneracies and the nested-list encoding.
//!
//! Vertex and edge sets of a tree are bitmasks (`u64`), which caps trees at
//! 64 edges. That is far beyond anything the rest of the crate can afford.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VSet = u64;
pub type ESet = u64;

pub fn bits(s: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| s >> i & 1 == 1)
}

pub fn bit(i: usize) -> u64 {
    1u64 << i
}

pub fn popcount(s: u64) -> usize {
    s.count_ones() as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub out: usize,
    pub ins: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    n_edges: usize,
    vertices: Vec<Vertex>,
    root: usize,
    producer: Vec<Option<usize>>,
    consumer: Vec<Option<usize>>,
}

impl Tree {
    /// Edges are `0..n_edges`; validates the incidence invariants.
    pub fn new(n_edges: usize, vertices: Vec<Vertex>, root: usize) -> Result<Self> {
        if n_edges == 0 || root >= n_edges {
            return Err(Error::InvalidTree("root edge missing".into()));
        }
        if n_edges > 64 {
            return Err(Error::InvalidTree("more than 64 edges".into()));
        }
        let mut producer = vec![None; n_edges];
        let mut consumer = vec![None; n_edges];
        for (v, vx) in vertices.iter().enumerate() {
            if vx.out >= n_edges || producer[vx.out].replace(v).is_some() {
                return Err(Error::InvalidTree(format!(
                    "edge {} is the output of two vertices",
                    vx.out
                )));
            }
            for &e in &vx.ins {
                if e >= n_edges || consumer[e].replace(v).is_some() {
                    return Err(Error::InvalidTree(format!("edge {e} is an input twice")));
                }
            }
        }
        if consumer[root].is_some() {
            return Err(Error::InvalidTree("root is an input".into()));
        }
        let t = Tree {
            n_edges,
            vertices,
            root,
            producer,
            consumer,
        };
        // connected and acyclic: a walk from the root reaches every edge once
        let mut seen = vec![false; n_edges];
        let mut stack = vec![root];
        while let Some(e) = stack.pop() {
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidTree("cycle".into()));
            }
            if let Some(v) = t.producer[e] {
                stack.extend(t.vertices[v].ins.iter().copied());
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree("disconnected".into()));
        }
        Ok(t)
    }

    pub fn trivial() -> Self {
        Tree::new(1, vec![], 0).unwrap()
    }

    pub fn corolla(n: usize) -> Self {
        Tree::new(
            n + 1,
            vec![Vertex {
                out: 0,
                ins: (1..=n).collect(),
            }],
            0,
        )
        .unwrap()
    }

    /// Chain of `n` unary vertices.
    pub fn linear(n: usize) -> Self {
        let vs = (0..n)
            .map(|i| Vertex {
                out: i,
                ins: vec![i + 1],
            })
            .collect();
        Tree::new(n + 1, vs, 0).unwrap()
    }

    /// `n` unary vertices at the root with an `m`-corolla on top.
    pub fn c_mn(m: usize, n: usize) -> Self {
        let mut vs: Vec<Vertex> = (0..n)
            .map(|i| Vertex {
                out: i,
                ins: vec![i + 1],
            })
            .collect();
        vs.push(Vertex {
            out: n,
            ins: (n + 1..=n + m).collect(),
        });
        Tree::new(n + m + 1, vs, 0).unwrap()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn all_vertices(&self) -> VSet {
        if self.vertices.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.vertices.len())
        }
    }

    /// The vertex whose output is `e`.
    pub fn producer(&self, e: usize) -> Option<usize> {
        self.producer[e]
    }

    /// The vertex having `e` among its inputs.
    pub fn consumer(&self, e: usize) -> Option<usize> {
        self.consumer[e]
    }

    pub fn is_leaf(&self, e: usize) -> bool {
        self.producer[e].is_none()
    }

    pub fn is_inner(&self, e: usize) -> bool {
        self.producer[e].is_some() && self.consumer[e].is_some()
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.n_edges).filter(|&e| self.is_leaf(e)).count()
    }

    pub fn root_vertex(&self) -> Option<usize> {
        self.producer[self.root]
    }

    /// Leaves in planar order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk_edges(self.root, &mut |e| {
            if self.is_leaf(e) {
                out.push(e);
            }
        });
        out
    }

    fn walk_edges(&self, e: usize, f: &mut dyn FnMut(usize)) {
        f(e);
        if let Some(v) = self.producer[e] {
            for &c in &self.vertices[v].ins {
                self.walk_edges(c, f);
            }
        }
    }

    /// Root-first depth-first left-to-right order of vertices, and inner
    /// edges ordered by the position of the vertex above them.
    pub fn canonical_orders(&self) -> (Vec<usize>, Vec<usize>) {
        let mut vs = Vec::new();
        let mut es = Vec::new();
        self.walk_edges(self.root, &mut |e| {
            if let Some(v) = self.producer[e] {
                vs.push(v);
                if self.consumer[e].is_some() {
                    es.push(e);
                }
            }
        });
        (vs, es)
    }

    /// Relabels edges and vertices in depth-first order. Returns the new
    /// tree with maps old vertex → new vertex and old edge → new edge.
    pub fn normalized(&self) -> (Tree, Vec<usize>, Vec<usize>) {
        let mut emap = vec![usize::MAX; self.n_edges];
        let mut vmap = vec![usize::MAX; self.vertices.len()];
        let mut ne = 0;
        let mut nv = 0;
        self.walk_edges(self.root, &mut |e| {
            emap[e] = ne;
            ne += 1;
            if let Some(v) = self.producer[e] {
                vmap[v] = nv;
                nv += 1;
            }
        });
        let mut vs = vec![
            Vertex {
                out: 0,
                ins: vec![]
            };
            self.vertices.len()
        ];
        for (v, vx) in self.vertices.iter().enumerate() {
            vs[vmap[v]] = Vertex {
                out: emap[vx.out],
                ins: vx.ins.iter().map(|&e| emap[e]).collect(),
            };
        }
        (Tree::new(self.n_edges, vs, 0).unwrap(), vmap, emap)
    }

    pub fn is_normalized(&self) -> bool {
        let (vs, _) = self.canonical_orders();
        let mut order = Vec::new();
        self.walk_edges(self.root, &mut |e| order.push(e));
        vs.iter().enumerate().all(|(i, &v)| i == v)
            && order.iter().enumerate().all(|(i, &e)| i == e)
    }

    /// Build from vertices over arbitrary edge identifiers; the result is
    /// normalized. Also returns new vertex → input position and new edge →
    /// old edge identifier.
    pub fn build(
        vertices: &[(usize, Vec<usize>)],
        root: usize,
    ) -> Result<(Tree, Vec<usize>, Vec<usize>)> {
        let mut ids: BTreeSet<usize> = BTreeSet::new();
        ids.insert(root);
        for (o, ins) in vertices {
            ids.insert(*o);
            ids.extend(ins.iter().copied());
        }
        let compact: BTreeMap<usize, usize> =
            ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let vs = vertices
            .iter()
            .map(|(o, ins)| Vertex {
                out: compact[o],
                ins: ins.iter().map(|e| compact[e]).collect(),
            })
            .collect();
        let raw = Tree::new(ids.len(), vs, compact[&root])?;
        let (t, vmap, emap) = raw.normalized();
        let old_ids: Vec<usize> = ids.into_iter().collect();
        let mut v_back = vec![0; t.n_vertices()];
        for (old, &new) in vmap.iter().enumerate() {
            v_back[new] = old;
        }
        let mut e_back = vec![0; t.n_edges()];
        for (compacted, &new) in emap.iter().enumerate() {
            e_back[new] = old_ids[compacted];
        }
        Ok((t, v_back, e_back))
    }

    pub fn inner_edges(&self) -> Vec<usize> {
        self.canonical_orders().1
    }

    /// Number of vertices in `s` whose output leaves `s`.
    fn top_count(&self, s: VSet) -> usize {
        bits(s)
            .filter(|&v| match self.consumer[self.vertices[v].out] {
                Some(w) => s & bit(w) == 0,
                None => true,
            })
            .count()
    }

    pub fn is_subtree(&self, s: VSet) -> bool {
        s != 0 && s & !self.all_vertices() == 0 && self.top_count(s) == 1
    }

    /// The vertex of `s` closest to the root.
    pub fn subtree_root_vertex(&self, s: VSet) -> usize {
        bits(s)
            .find(|&v| match self.consumer[self.vertices[v].out] {
                Some(w) => s & bit(w) == 0,
                None => true,
            })
            .expect("nonempty vertex set")
    }

    pub fn subtree_root(&self, s: VSet) -> usize {
        self.vertices[self.subtree_root_vertex(s)].out
    }

    /// Input edges of the sub-tree in planar order.
    pub fn subtree_leaves(&self, s: VSet) -> Vec<usize> {
        let mut out = Vec::new();
        self.subtree_leaves_rec(self.subtree_root_vertex(s), s, &mut out);
        out
    }

    fn subtree_leaves_rec(&self, v: usize, s: VSet, out: &mut Vec<usize>) {
        for &e in &self.vertices[v].ins {
            match self.producer[e] {
                Some(u) if s & bit(u) != 0 => self.subtree_leaves_rec(u, s, out),
                _ => out.push(e),
            }
        }
    }

    /// Inner edges of the sub-tree.
    pub fn subtree_inner(&self, s: VSet) -> ESet {
        let mut out = 0;
        for v in bits(s) {
            if let Some(w) = self.consumer[self.vertices[v].out] {
                if s & bit(w) != 0 {
                    out |= bit(self.vertices[v].out);
                }
            }
        }
        out
    }

    /// Vertex subsets inducing sub-trees, by size then bitmask.
    pub fn enumerate_subtrees(&self) -> Vec<VSet> {
        let n = self.n_vertices();
        let mut out: Vec<VSet> = Vec::new();
        // grow connected sets from each vertex by adding neighbours
        let mut frontier: BTreeSet<VSet> = (0..n).map(bit).collect();
        while !frontier.is_empty() {
            out.extend(frontier.iter().copied());
            let mut next = BTreeSet::new();
            for &s in &frontier {
                for v in bits(s) {
                    for u in self.neighbours(v) {
                        if s & bit(u) == 0 {
                            next.insert(s | bit(u));
                        }
                    }
                }
            }
            frontier = next;
        }
        out.sort_by_key(|&s| (popcount(s), s));
        out
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertices[v]
            .ins
            .iter()
            .filter_map(|&e| self.producer[e])
            .collect();
        if let Some(w) = self.consumer[self.vertices[v].out] {
            out.push(w);
        }
        out
    }

    /// Blocks of `s` once the edges in `cuts` are removed, ordered by the
    /// canonical position of each block's root.
    pub fn blocks(&self, s: VSet, cuts: ESet) -> Vec<VSet> {
        let mut blocks = Vec::new();
        let mut rest = s;
        while rest != 0 {
            // lowest remaining id is a block root in a normalized tree, but
            // search explicitly so this also works for other labelings
            let start = bits(rest).next().unwrap();
            let mut block = bit(start);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in self.neighbours(v) {
                    if s & bit(u) == 0 || block & bit(u) != 0 {
                        continue;
                    }
                    let e = if self.consumer[self.vertices[u].out] == Some(v) {
                        self.vertices[u].out
                    } else {
                        self.vertices[v].out
                    };
                    if cuts & bit(e) == 0 {
                        block |= bit(u);
                        stack.push(u);
                    }
                }
            }
            blocks.push(block);
            rest &= !block;
        }
        let order = self.canonical_orders().0;
        let pos: Vec<usize> = {
            let mut p = vec![0; self.n_vertices()];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        blocks.sort_by_key(|&b| pos[self.subtree_root_vertex(b)]);
        blocks
    }

    /// Cut set of a partition given by blocks.
    pub fn partition_cuts(&self, s: VSet, blocks: &[VSet]) -> Result<ESet> {
        if !self.is_subtree(s) {
            return Err(Error::InvalidTree("partition of a non-sub-tree".into()));
        }
        let mut union = 0;
        for &b in blocks {
            if union & b != 0 || !self.is_subtree(b) {
                return Err(Error::InvalidTree(
                    "blocks must be disjoint connected sets".into(),
                ));
            }
            union |= b;
        }
        if union != s {
            return Err(Error::InvalidTree("blocks must cover the sub-tree".into()));
        }
        let inside = blocks.iter().fold(0, |acc, &b| acc | self.subtree_inner(b));
        Ok(self.subtree_inner(s) & !inside)
    }

    /// All partitions of the sub-tree into connected blocks.
    pub fn enumerate_partitions(&self, s: VSet) -> Result<Vec<Vec<VSet>>> {
        if !self.is_subtree(s) {
            return Err(Error::InvalidTree(
                "disconnected or empty vertex set".into(),
            ));
        }
        let inner = self.subtree_inner(s);
        Ok(subsets(inner).map(|c| self.blocks(s, c)).collect())
    }

    /// T′/T₁⋯T_k for the sub-tree `s` cut along `cuts ⊆ inner(s)`.
    pub fn contract(&self, s: VSet, cuts: ESet) -> Contraction {
        assert!(self.is_subtree(s), "contraction of a non-sub-tree");
        assert_eq!(
            cuts & !self.subtree_inner(s),
            0,
            "cuts outside the sub-tree"
        );
        let blocks = self.blocks(s, cuts);
        let vs: Vec<(usize, Vec<usize>)> = blocks
            .iter()
            .map(|&b| (self.subtree_root(b), self.subtree_leaves(b)))
            .collect();
        let (tree, v_back, e_back) =
            Tree::build(&vs, self.subtree_root(s)).expect("contraction is a tree");
        let blocks = v_back.iter().map(|&i| blocks[i]).collect();
        Contraction {
            tree,
            blocks,
            edge_map: e_back,
        }
    }

    /// The sub-tree as a tree of its own.
    pub fn extract(&self, s: VSet) -> Contraction {
        self.contract(s, self.subtree_inner(s))
    }

    /// The (possibly trivial) sub-tree with the given inputs (as a set) and output.
    pub fn omega_component(&self, inputs: &[usize], output: usize) -> Option<OmegaWitness> {
        if inputs.iter().any(|&e| e >= self.n_edges) || output >= self.n_edges {
            return None;
        }
        if inputs == [output] {
            return Some(OmegaWitness::Trivial(output));
        }
        let wanted: BTreeSet<usize> = inputs.iter().copied().collect();
        if wanted.len() != inputs.len() {
            return None;
        }
        let mut s = 0;
        let mut found = BTreeSet::new();
        let mut stack = vec![output];
        while let Some(e) = stack.pop() {
            if e != output && wanted.contains(&e) {
                found.insert(e);
                continue;
            }
            let v = self.producer[e]?;
            s |= bit(v);
            stack.extend(self.vertices[v].ins.iter().copied());
        }
        (found == wanted).then_some(OmegaWitness::Subtree(s))
    }

    /// Vertices removable by an outer face; needs at least two vertices.
    pub fn external_vertices(&self) -> Vec<usize> {
        if self.n_vertices() < 2 {
            return vec![];
        }
        (0..self.n_vertices())
            .filter(|&v| {
                let vx = &self.vertices[v];
                let inner_inputs = vx
                    .ins
                    .iter()
                    .filter(|&&e| self.producer[e].is_some())
                    .count();
                if vx.out == self.root {
                    inner_inputs == 1
                } else {
                    inner_inputs == 0
                }
            })
            .collect()
    }

    pub fn inner_coface(&self, e: usize) -> Result<TreeMap> {
        if !self.is_inner(e) {
            return Err(Error::InvalidTree(format!("edge {e} is not inner")));
        }
        let all = self.all_vertices();
        let c = self.contract(all, self.subtree_inner(all) & !bit(e));
        Ok(TreeMap {
            kind: TreeMapKind::InnerCoface(e),
            edge_map: c.edge_map,
            vertex_map: c.blocks,
            source: c.tree,
            target: self.clone(),
        })
    }

    pub fn outer_coface(&self, v: usize) -> Result<TreeMap> {
        if !self.external_vertices().contains(&v) {
            return Err(Error::InvalidTree(format!("vertex {v} is not external")));
        }
        let rest = self.all_vertices() & !bit(v);
        let c = self.extract(rest);
        let vertex_map = c.blocks.clone();
        Ok(TreeMap {
            kind: TreeMapKind::OuterCoface(v),
            edge_map: c.edge_map,
            vertex_map,
            source: c.tree,
            target: self.clone(),
        })
    }

    /// η → C_n picking out one edge of a corolla.
    pub fn edge_inclusion(&self, e: usize) -> Result<TreeMap> {
        if self.n_vertices() != 1 || e >= self.n_edges {
            return Err(Error::InvalidTree(
                "edge inclusions are faces of corollas".into(),
            ));
        }
        Ok(TreeMap {
            kind: TreeMapKind::EdgeInclusion(e),
            source: Tree::trivial(),
            target: self.clone(),
            edge_map: vec![e],
            vertex_map: vec![],
        })
    }

    /// All faces of this tree: inner cofaces, outer cofaces and, for a
    /// corolla, the edge inclusions.
    pub fn faces(&self) -> Vec<TreeMap> {
        let mut out: Vec<TreeMap> = self
            .inner_edges()
            .into_iter()
            .map(|e| self.inner_coface(e).unwrap())
            .collect();
        out.extend(
            self.external_vertices()
                .into_iter()
                .map(|v| self.outer_coface(v).unwrap()),
        );
        if self.n_vertices() == 1 {
            out.extend((0..self.n_edges).map(|e| self.edge_inclusion(e).unwrap()));
        }
        out
    }

    /// σ: T_σ → T where T_σ has a unary vertex inserted on `e`.
    pub fn codegeneracy(&self, e: usize) -> Result<TreeMap> {
        if e >= self.n_edges {
            return Err(Error::InvalidTree(format!("no edge {e}")));
        }
        let fresh = self.n_edges;
        let mut vs: Vec<(usize, Vec<usize>)> = self
            .vertices
            .iter()
            .map(|vx| (vx.out, vx.ins.clone()))
            .collect();
        // e stays the lower half; the fresh edge is the upper half
        if let Some(u) = self.producer[e] {
            vs[u].0 = fresh;
        }
        vs.push((e, vec![fresh]));
        let (src, v_back, e_back) = Tree::build(&vs, self.root)?;
        let edge_map = e_back
            .iter()
            .map(|&x| if x == fresh { e } else { x })
            .collect();
        let vertex_map = v_back
            .iter()
            .map(|&i| if i == self.n_vertices() { 0 } else { bit(i) })
            .collect();
        Ok(TreeMap {
            kind: TreeMapKind::Codegeneracy(e),
            source: src,
            target: self.clone(),
            edge_map,
            vertex_map,
        })
    }

    pub fn cofaces_and_codegeneracies(&self) -> Vec<TreeMap> {
        let mut out = self.faces();
        out.extend((0..self.n_edges).map(|e| self.codegeneracy(e).unwrap()));
        out
    }

    pub fn planar_encoding(&self) -> String {
        self.encode_with(&|_| None)
    }

    pub fn encode_with(&self, color: &dyn Fn(usize) -> Option<String>) -> String {
        let mut s = String::new();
        self.encode_rec(self.root, color, &mut s);
        s
    }

    fn encode_rec(&self, e: usize, color: &dyn Fn(usize) -> Option<String>, s: &mut String) {
        match self.producer[e] {
            None => s.push('|'),
            Some(v) => {
                s.push('(');
                for (i, &c) in self.vertices[v].ins.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    self.encode_rec(c, color, s);
                }
                s.push(')');
            }
        }
        if let Some(c) = color(e) {
            let _ = write!(s, ":{c}");
        }
    }
}

/// All subsets of a bitmask, smallest bitmask first.
pub fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut cur = Some(0u64);
    std::iter::from_fn(move || {
        let c = cur?;
        cur = if c == mask {
            None
        } else {
            Some(((c | !mask).wrapping_add(1)) & mask)
        };
        Some(c)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub tree: Tree,
    /// Block of the ambient tree behind each vertex of the contracted tree.
    pub blocks: Vec<VSet>,
    /// Ambient edge behind each edge of the contracted tree.
    pub edge_map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaWitness {
    Trivial(usize),
    Subtree(VSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeMapKind {
    InnerCoface(usize),
    OuterCoface(usize),
    EdgeInclusion(usize),
    Codegeneracy(usize),
}

/// A generating map source → target. `vertex_map[v]` is the sub-tree of the
/// target that vertex v of the source lands on (empty for a unit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMap {
    pub kind: TreeMapKind,
    pub source: Tree,
    pub target: Tree,
    pub edge_map: Vec<usize>,
    pub vertex_map: Vec<VSet>,
}

impl TreeMap {
    /// Image of a source vertex set.
    pub fn map_vertices(&self, s: VSet) -> VSet {
        bits(s).fold(0, |acc, v| acc | self.vertex_map[v])
    }

    pub fn map_edges(&self, c: ESet) -> ESet {
        bits(c).fold(0, |acc, e| acc | bit(self.edge_map[e]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredTree {
    pub tree: Tree,
    pub colors: Vec<usize>,
}

impl ColoredTree {
    pub fn new(tree: Tree, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != tree.n_edges() {
            return Err(Error::Color("coloring must be total on edges".into()));
        }
        Ok(ColoredTree { tree, colors })
    }

    pub fn monochrome(tree: Tree) -> Self {
        let n = tree.n_edges();
        ColoredTree {
            tree,
            colors: vec![0; n],
        }
    }

    pub fn planar_encoding(&self) -> String {
        self.tree.encode_with(&|e| Some(self.colors[e].to_string()))
    }

    /// Equal exactly for isomorphic colored trees.
    pub fn canonical_form(&self) -> String {
        self.canon_rec(self.tree.root())
    }

    fn canon_rec(&self, e: usize) -> String {
        match self.tree.producer(e) {
            None => format!("|:{}", self.colors[e]),
            Some(v) => {
                let mut kids: Vec<String> = self
                    .tree
                    .vertex(v)
                    .ins
                    .iter()
                    .map(|&c| self.canon_rec(c))
                    .collect();
                kids.sort();
                format!("({}):{}", kids.join(" "), self.colors[e])
            }
        }
    }
}

/// Parse the nested-list encoding: `|` a leaf, `(…)` a vertex, each
/// optionally followed by `:name`. Edge and vertex ids come out normalized.
pub fn parse_tree(src: &str) -> Result<(Tree, Vec<Option<String>>)> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vertices: vec![],
        colors: vec![],
    };
    p.skip_ws();
    let root = p.edge()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::TreeSyntax {
            pos: p.pos,
            msg: "trailing input".into(),
        });
    }
    let n = p.colors.len();
    let vs = p
        .vertices
        .into_iter()
        .map(|(out, ins)| Vertex { out, ins })
        .collect();
    let t = Tree::new(n, vs, root)?;
    debug_assert!(t.is_normalized());
    Ok((t, p.colors))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vertices: Vec<(usize, Vec<usize>)>,
    colors: Vec<Option<String>>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn edge(&mut self) -> Result<usize> {
        let e = self.colors.len();
        self.colors.push(None);
        match self.src.get(self.pos) {
            Some(b'|') => self.pos += 1,
            Some(b'(') => {
                self.pos += 1;
                let v = self.vertices.len();
                self.vertices.push((e, vec![]));
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => {
                            let c = self.edge()?;
                            self.vertices[v].1.push(c);
                        }
                        None => {
                            return Err(Error::TreeSyntax {
                                pos: self.pos,
                                msg: "unclosed '('".into(),
                            })
                        }
                    }
                }
            }
            _ => {
                return Err(Error::TreeSyntax {
                    pos: self.pos,
                    msg: "expected '|' or '('".into(),
                })
            }
        }
        if self.src.get(self.pos) == Some(&b':') {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len()
                && ((self.src[self.pos] as char).is_alphanumeric()
                    || b"_-.'".contains(&self.src[self.pos]))
            {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(Error::TreeSyntax {
                    pos: start,
                    msg: "empty color name".into(),
                });
            }
            self.colors[e] = Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned());
        }
        Ok(e)
    }
}

/// One representative per isomorphism class of trees with exactly `n`
/// vertices, each vertex having at most `max_arity` inputs.
pub fn trees_with_vertices(n: usize, max_arity: usize) -> Vec<Tree> {
    let mut by_size: Vec<Vec<String>> = vec![vec!["|".to_string()]];
    for k in 1..=n {
        let mut found: BTreeSet<String> = BTreeSet::new();
        for arity in 0..=max_arity {
            for combo in child_combos(&by_size, k - 1, arity) {
                let mut kids = combo;
                kids.sort();
                found.insert(format!("({})", kids.join(" ")));
            }
        }
        by_size.push(found.into_iter().collect());
    }
    by_size[n]
        .iter()
        .map(|s| parse_tree(s).unwrap().0)
        .collect()
}

fn child_combos(by_size: &[Vec<String>], total: usize, arity: usize) -> Vec<Vec<String>> {
    if arity == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        if first >= by_size.len() {
            break;
        }
        for rest in child_combos(by_size, total - first, arity - 1) {
            for c in &by_size[first] {
                // nondecreasing order keeps each multiset once
                if rest.first().is_some_and(|r| r < c) {
                    continue;
                }
                let mut v = vec![c.clone()];
                v.extend(rest.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

/// Trees with 1..=n vertices and vertex arity at most `max_arity`.
pub fn trees_up_to(n: usize, max_arity: usize) -> Vec<Tree> {
    (1..=n)
        .flat_map(|k| trees_with_vertices(k, max_arity))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap().0
    }

    fn brute_subtrees(tr: &Tree) -> usize {
        (1..1u64 << tr.n_vertices())
            .filter(|&s| tr.is_subtree(s))
            .count()
    }

    #[test]
    fn subtree_counts() {
        assert_eq!(Tree::corolla(2).enumerate_subtrees(), vec![1]);
        assert_eq!(Tree::linear(2).enumerate_subtrees().len(), 3);
        let big = t("((| |) (() |) |)");
        assert_eq!(big.n_vertices(), 4);
        assert_eq!(big.enumerate_subtrees().len(), brute_subtrees(&big));
    }

    #[test]
    fn partition_counts() {
        let l3 = Tree::linear(3);
        assert_eq!(l3.enumerate_partitions(0b1).unwrap().len(), 1);
        assert_eq!(l3.enumerate_partitions(0b11).unwrap().len(), 2);
        assert_eq!(l3.enumerate_partitions(0b111).unwrap().len(), 4);
        assert!(l3.enumerate_partitions(0b101).is_err());
    }

    #[test]
    fn contraction_shapes() {
        let tr = t("((| |) |)");
        let full = tr.contract(0b11, 0);
        assert_eq!(full.tree, Tree::corolla(3));
        let cut = tr.contract(0b11, tr.subtree_inner(0b11));
        assert_eq!(cut.tree, tr);
    }

    #[test]
    fn c32_orders() {
        let c = Tree::c_mn(3, 2);
        assert_eq!(c.planar_encoding(), "(((| | |)))");
        let (vs, es) = c.canonical_orders();
        assert_eq!(vs, vec![0, 1, 2]);
        assert_eq!(es, vec![1, 2]);
        assert_eq!(c.producer(1), Some(1));
    }

    #[test]
    fn subset_iteration() {
        let all: Vec<u64> = subsets(0b1010).collect();
        assert_eq!(all, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(subsets(0).count(), 1);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        for s in ["|", "()", "(| |)", "((| ()) |)"] {
            assert_eq!(t(s).planar_encoding(), s);
        }
        assert!(parse_tree("(| |").is_err());
        assert!(parse_tree("| |").is_err());
        let (tr, cs) = parse_tree("(|:a |:b):c").unwrap();
        assert_eq!(tr.n_edges(), 3);
        assert_eq!(
            cs,
            vec![Some("c".into()), Some("a".into()), Some("b".into())]
        );
    }

    #[test]
    fn three_faces_of_two_vertex_tree() {
        let tr = t("((| |) |)");
        assert_eq!(tr.faces().len(), 3);
        assert!(Tree::corolla(3).inner_edges().is_empty());
    }

    #[test]
    fn codegeneracy_then_contract() {
        let tr = t("((| |) |)");
        for e in 0..tr.n_edges() {
            let s = tr.codegeneracy(e).unwrap();
            let unary = (0..s.source.n_vertices())
                .find(|&v| s.vertex_map[v] == 0)
                .unwrap();
            let new_edge = s.source.vertex(unary).ins[0];
            let lower = s.source.vertex(unary).out;
            let contracted = match s.source.inner_coface(new_edge) {
                Ok(m) => m.source,
                Err(_) => s.source.inner_coface(lower).unwrap().source,
            };
            assert_eq!(contracted, tr);
        }
    }
}
