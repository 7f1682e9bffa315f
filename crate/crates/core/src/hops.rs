//! Strict unital homotopy colored operads. Every structure map γ(t) lives
//! at the suspended level: an element `sx` is stored by the coordinates of
//! `x` in the component basis, and its degree is |x| + 1.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    add_entry, fmt_q, koszul_sign, qs, sign_pow, to_dense, zeros, GradedSpace, Matrix, Span,
    SparseVec, Q,
};
use crate::operads::{Color, DgColoredOperad, Elem, OperadMorphism, Profile};
use crate::report::Report;
use crate::trees::{bit, bits, subsets, trees_up_to, ColoredTree, Tree, VSet};

pub const DEFAULT_VERTEX_BOUND: usize = 5;

/// Pure tensors of basis indices, one index per vertex in canonical order.
pub type Tensor = BTreeMap<Vec<usize>, Q>;

/// Multilinear map on basis tuples; absent tuples map to zero.
pub type MultiMap = BTreeMap<Vec<usize>, SparseVec>;

pub fn vertex_profile(t: &ColoredTree, v: usize) -> Profile {
    let vx = t.tree.vertex(v);
    Profile::new(
        vx.ins.iter().map(|&e| t.colors[e]).collect(),
        t.colors[vx.out],
    )
}

pub fn tree_profile(t: &ColoredTree) -> Profile {
    Profile::new(
        t.tree.leaves().iter().map(|&e| t.colors[e]).collect(),
        t.colors[t.tree.root()],
    )
}

/// Colored sub-tree `s` of `t` with its own normalized ids.
pub fn colored_extract(t: &ColoredTree, s: VSet) -> ColoredTree {
    let c = t.tree.extract(s);
    ColoredTree {
        colors: c.edge_map.iter().map(|&e| t.colors[e]).collect(),
        tree: c.tree,
    }
}

/// Colored contraction of the sub-tree `s` along the cut set `cuts`.
pub fn colored_contract(t: &ColoredTree, s: VSet, cuts: u64) -> (ColoredTree, Vec<VSet>) {
    let c = t.tree.contract(s, cuts);
    (
        ColoredTree {
            colors: c.edge_map.iter().map(|&e| t.colors[e]).collect(),
            tree: c.tree,
        },
        c.blocks,
    )
}

/// Truncated su operad data given by explicit γ tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuTable {
    pub components: BTreeMap<Profile, GradedSpace>,
    pub units: Vec<Vec<Q>>,
    /// Keyed by the planar colored encoding of the tree.
    pub gamma: BTreeMap<String, MultiMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct TrComponent {
    space: GradedSpace,
    /// Columns are the new basis vectors in parent coordinates.
    incl: Matrix,
    span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SuKind {
    FromDg(DgColoredOperad),
    Table(SuTable),
    Truncated {
        parent: Box<SuHomotopyOperad>,
        comps: BTreeMap<Profile, TrComponent>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuHomotopyOperad {
    color_names: Vec<String>,
    vertex_bound: usize,
    kind: SuKind,
}

impl SuHomotopyOperad {
    /// γ(1 vertex) = −d, γ(2 vertices)(sa₀⊗sa₁) = (−1)^{|a₀|} s(a₀∘a₁), zero above.
    pub fn from_dg(p: &DgColoredOperad) -> Self {
        SuHomotopyOperad {
            color_names: p.color_names().to_vec(),
            vertex_bound: DEFAULT_VERTEX_BOUND,
            kind: SuKind::FromDg(p.clone()),
        }
    }

    pub fn from_table(
        color_names: Vec<String>,
        table: SuTable,
        vertex_bound: usize,
    ) -> Result<Self> {
        if table.units.len() != color_names.len() {
            return Err(Error::Invalid("one unit per color".into()));
        }
        for (c, u) in table.units.iter().enumerate() {
            let dim = table
                .components
                .get(&Profile::unit(c))
                .map_or(0, GradedSpace::dim);
            if u.len() != dim {
                return Err(Error::Dimension(format!("unit of color {c}")));
            }
        }
        Ok(SuHomotopyOperad {
            color_names,
            vertex_bound,
            kind: SuKind::Table(table),
        })
    }

    pub fn with_vertex_bound(mut self, b: usize) -> Self {
        self.vertex_bound = b;
        self
    }

    pub fn vertex_bound(&self) -> usize {
        self.vertex_bound
    }

    pub fn n_colors(&self) -> usize {
        self.color_names.len()
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    pub fn dg(&self) -> Option<&DgColoredOperad> {
        match &self.kind {
            SuKind::FromDg(p) => Some(p),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&SuTable> {
        match &self.kind {
            SuKind::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn component(&self, p: &Profile) -> Option<&GradedSpace> {
        match &self.kind {
            SuKind::FromDg(d) => d.component(p).map(|c| c.space()),
            SuKind::Table(t) => t.components.get(p),
            SuKind::Truncated { comps, .. } => comps.get(p).map(|c| &c.space),
        }
    }

    pub fn dim(&self, p: &Profile) -> usize {
        self.component(p).map_or(0, GradedSpace::dim)
    }

    pub fn all_profiles(&self) -> Vec<Profile> {
        match &self.kind {
            SuKind::FromDg(d) => d.all_profiles(),
            SuKind::Table(t) => t.components.keys().cloned().collect(),
            SuKind::Truncated { comps, .. } => comps.keys().cloned().collect(),
        }
    }

    pub fn profiles(&self) -> Vec<Profile> {
        match &self.kind {
            SuKind::FromDg(d) => d.profiles(),
            _ => {
                let all: BTreeSet<Profile> = self.all_profiles().into_iter().collect();
                all.iter()
                    .filter(|p| {
                        crate::operads::all_permutations(p.arity()).iter().all(|s| {
                            let r = p.permuted(s);
                            r.inputs >= p.inputs || !all.contains(&r)
                        })
                    })
                    .cloned()
                    .collect()
            }
        }
    }

    pub fn max_arity(&self) -> usize {
        self.all_profiles()
            .iter()
            .filter(|p| self.dim(p) > 0)
            .map(Profile::arity)
            .max()
            .unwrap_or(1)
    }

    /// Unit in component coordinates (unsuspended).
    pub fn unit(&self, c: Color) -> Vec<Q> {
        match &self.kind {
            SuKind::FromDg(d) => d.unit(c).v,
            SuKind::Table(t) => t.units[c].clone(),
            SuKind::Truncated { parent, comps } => {
                let u = parent.unit(c);
                match comps.get(&Profile::unit(c)) {
                    Some(tc) => tc.span.coords(&u).expect("unit is a degree-0 cycle"),
                    None => vec![],
                }
            }
        }
    }

    /// P-degree of a basis element.
    pub fn degree(&self, p: &Profile, i: usize) -> i32 {
        self.component(p).expect("component exists").degree(i)
    }

    /// γ(t) on one basis tuple (canonical vertex order), in the component of
    /// the tree's profile.
    pub fn gamma_basis(&self, t: &ColoredTree, idx: &[usize]) -> Result<SparseVec> {
        let k = t.tree.n_vertices();
        if k == 0 || k != idx.len() {
            return Err(Error::Invalid("one decoration per vertex".into()));
        }
        if k > self.vertex_bound {
            return Err(Error::Missing(format!(
                "γ beyond the vertex bound {}",
                self.vertex_bound
            )));
        }
        match &self.kind {
            SuKind::FromDg(d) => match k {
                1 => {
                    let p = vertex_profile(t, 0);
                    let x = d.d(&d.basis_elem(&p, idx[0]));
                    Ok(x.v
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| (i, -c.clone()))
                        .collect())
                }
                2 => {
                    let p0 = vertex_profile(t, 0);
                    let p1 = vertex_profile(t, 1);
                    let slot = t
                        .tree
                        .vertex(0)
                        .ins
                        .iter()
                        .position(|&e| e == t.tree.vertex(1).out)
                        .unwrap();
                    let a0 = d.basis_elem(&p0, idx[0]);
                    let a1 = d.basis_elem(&p1, idx[1]);
                    let sign = qs(sign_pow(d.degree(&p0, idx[0]) as i64));
                    let r = d.compose(&a0, slot, &a1)?;
                    Ok(r.v
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| (i, &sign * c))
                        .collect())
                }
                _ => Ok(SparseVec::new()),
            },
            SuKind::Table(tab) => {
                for v in 0..k {
                    if idx[v]
                        >= tab
                            .components
                            .get(&vertex_profile(t, v))
                            .map_or(0, GradedSpace::dim)
                    {
                        return Err(Error::Dimension("decoration index out of range".into()));
                    }
                }
                Ok(tab
                    .gamma
                    .get(&t.planar_encoding())
                    .and_then(|m| m.get(idx))
                    .cloned()
                    .unwrap_or_default())
            }
            SuKind::Truncated { parent, comps } => {
                let inputs: Vec<Vec<Q>> = (0..k)
                    .map(|v| comps[&vertex_profile(t, v)].incl.column(idx[v]))
                    .collect();
                let out = parent.gamma(t, &inputs)?;
                let tp = tree_profile(t);
                match comps.get(&tp) {
                    Some(tc) => {
                        let c = tc.span.coords(&out).ok_or_else(|| {
                            Error::NotComplex(
                                "γ leaves the truncation; the structure is not closed".into(),
                            )
                        })?;
                        Ok(crate::linalg::to_sparse(&c))
                    }
                    None if out.iter().all(Zero::is_zero) => Ok(SparseVec::new()),
                    None => Err(Error::NotComplex(
                        "γ lands in a truncated-away component".into(),
                    )),
                }
            }
        }
    }

    /// γ(t) extended multilinearly to vectors.
    pub fn gamma(&self, t: &ColoredTree, inputs: &[Vec<Q>]) -> Result<Vec<Q>> {
        let out_dim = self.dim(&tree_profile(t));
        let mut acc = SparseVec::new();
        let supports: Vec<Vec<(usize, &Q)>> = inputs
            .iter()
            .map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        let mut idx = vec![0usize; inputs.len()];
        let mut cur = vec![0usize; inputs.len()];
        if supports.iter().any(Vec::is_empty) {
            return Ok(zeros(out_dim));
        }
        loop {
            let mut coef = Q::one();
            for (v, &j) in cur.iter().enumerate() {
                idx[v] = supports[v][j].0;
                coef *= supports[v][j].1;
            }
            for (i, c) in self.gamma_basis(t, &idx)? {
                add_entry(&mut acc, i, c * &coef);
            }
            // odometer
            let mut v = inputs.len();
            loop {
                if v == 0 {
                    return Ok(to_dense(&acc, out_dim));
                }
                v -= 1;
                cur[v] += 1;
                if cur[v] < supports[v].len() {
                    break;
                }
                cur[v] = 0;
            }
        }
    }

    /// Suspended degrees of a basis decoration.
    pub fn suspended_degrees(&self, t: &ColoredTree, idx: &[usize]) -> Vec<i32> {
        idx.iter()
            .enumerate()
            .map(|(v, &i)| self.degree(&vertex_profile(t, v), i) + 1)
            .collect()
    }

    /// d_γ(t)(x), one term per sub-tree s, each living on t/s.
    pub fn coderivation_apply(
        &self,
        t: &ColoredTree,
        x: &Tensor,
    ) -> Result<Vec<(ColoredTree, Tensor)>> {
        let all = t.tree.all_vertices();
        let mut out = Vec::new();
        for s in t.tree.enumerate_subtrees() {
            let (ts, blocks) =
                colored_contract(t, all, t.tree.subtree_inner(all) & !t.tree.subtree_inner(s));
            let sub = colored_extract(t, s);
            let m = blocks.iter().position(|&b| b == s).unwrap();
            let order: Vec<usize> = blocks.iter().flat_map(|&b| bits(b)).collect();
            let mut res = Tensor::new();
            for (idx, c) in x {
                let degs = self.suspended_degrees(t, idx);
                let sign = koszul_sign(&order, &degs);
                let before: i64 = blocks[..m]
                    .iter()
                    .map(|&b| degs[bits(b).next().unwrap()] as i64)
                    .sum();
                let sign = sign * sign_pow(before);
                let sidx: Vec<usize> = bits(s).map(|v| idx[v]).collect();
                let g = self.gamma_basis(&sub, &sidx)?;
                for (r, gc) in g {
                    let nidx: Vec<usize> = blocks
                        .iter()
                        .enumerate()
                        .map(|(j, &b)| {
                            if j == m {
                                r
                            } else {
                                idx[bits(b).next().unwrap()]
                            }
                        })
                        .collect();
                    let e = res.entry(nidx.clone()).or_insert_with(Q::zero);
                    *e += qs(sign) * c * gc;
                    if e.is_zero() {
                        res.remove(&nidx);
                    }
                }
            }
            out.push((ts, res));
        }
        Ok(out)
    }

    /// γ(d_γ(t)(x)) summed over all sub-trees.
    pub fn gamma_of_coderivation(&self, t: &ColoredTree, x: &Tensor) -> Result<Vec<Q>> {
        let out_dim = self.dim(&tree_profile(t));
        let mut acc = SparseVec::new();
        for (ts, tensor) in self.coderivation_apply(t, x)? {
            for (idx, c) in tensor {
                for (i, g) in self.gamma_basis(&ts, &idx)? {
                    add_entry(&mut acc, i, g * &c);
                }
            }
        }
        Ok(to_dense(&acc, out_dim))
    }

    /// Every coloring of trees with at most `max_vertices` vertices whose
    /// vertex profiles all have nonzero components.
    pub fn colored_trees(&self, max_vertices: usize) -> Vec<ColoredTree> {
        let profiles: Vec<Profile> = self
            .all_profiles()
            .into_iter()
            .filter(|p| self.dim(p) > 0)
            .collect();
        let mut by_out: BTreeMap<(Color, usize), Vec<&Profile>> = BTreeMap::new();
        for p in &profiles {
            by_out.entry((p.output, p.arity())).or_default().push(p);
        }
        let mut out = Vec::new();
        for shape in trees_up_to(max_vertices, self.max_arity()) {
            for root in 0..self.n_colors() {
                let mut colors = vec![usize::MAX; shape.n_edges()];
                colors[shape.root()] = root;
                color_rec(&shape, 0, &mut colors, &by_out, &mut out);
            }
        }
        // every sub-tree must compose into a stored component
        out.retain(|t| {
            t.tree.enumerate_subtrees().into_iter().all(|s| {
                self.component(&tree_profile(&colored_extract(t, s)))
                    .is_some()
            })
        });
        out
    }

    /// tr: drop negative degrees and keep only cycles in degree 0.
    pub fn truncate(&self) -> Result<SuHomotopyOperad> {
        let mut comps = BTreeMap::new();
        for p in self.all_profiles() {
            let Some(space) = self.component(&p) else {
                continue;
            };
            let one = ColoredTree {
                tree: Tree::corolla(p.arity()),
                colors: std::iter::once(p.output)
                    .chain(p.inputs.iter().copied())
                    .collect(),
            };
            let mut cols: Vec<Vec<Q>> = Vec::new();
            let mut basis = Vec::new();
            let zero_deg = space.in_degree(0);
            let mut dmat = Matrix::zero(space.dim(), zero_deg.len());
            for (j, &i) in zero_deg.iter().enumerate() {
                for (r, c) in self.gamma_basis(&one, &[i])? {
                    dmat.set(r, j, c);
                }
            }
            for (k, z) in dmat.kernel().into_iter().enumerate() {
                let mut v = zeros(space.dim());
                for (j, &i) in zero_deg.iter().enumerate() {
                    v[i] = z[j].clone();
                }
                cols.push(v);
                basis.push((format!("z{k}"), 0));
            }
            for i in 0..space.dim() {
                if space.degree(i) > 0 {
                    let mut v = zeros(space.dim());
                    v[i] = Q::one();
                    cols.push(v);
                    basis.push((space.label(i).to_string(), space.degree(i)));
                }
            }
            if cols.is_empty() {
                continue;
            }
            let (_, hi) = space.window();
            let tspace = GradedSpace::new(basis, (-1, hi.max(1)))?;
            let incl = Matrix::from_columns(space.dim(), &cols);
            let span = Span::from_vectors(space.dim(), &cols);
            comps.insert(
                p,
                TrComponent {
                    space: tspace,
                    incl,
                    span,
                },
            );
        }
        Ok(SuHomotopyOperad {
            color_names: self.color_names.clone(),
            vertex_bound: self.vertex_bound,
            kind: SuKind::Truncated {
                parent: Box::new(self.clone()),
                comps,
            },
        })
    }

    /// For a truncation, the parent coordinates of a vector.
    pub fn include(&self, p: &Profile, v: &[Q]) -> Vec<Q> {
        match &self.kind {
            SuKind::Truncated { comps, .. } => match comps.get(p) {
                Some(tc) => tc.incl.apply(v),
                None => vec![],
            },
            _ => v.to_vec(),
        }
    }

    pub fn parent(&self) -> Option<&SuHomotopyOperad> {
        match &self.kind {
            SuKind::Truncated { parent, .. } => Some(parent),
            _ => None,
        }
    }
}

fn color_rec(
    shape: &Tree,
    v: usize,
    colors: &mut Vec<usize>,
    by_out: &BTreeMap<(Color, usize), Vec<&Profile>>,
    out: &mut Vec<ColoredTree>,
) {
    if v == shape.n_vertices() {
        out.push(ColoredTree {
            tree: shape.clone(),
            colors: colors.clone(),
        });
        return;
    }
    let vx = shape.vertex(v);
    let Some(cands) = by_out.get(&(colors[vx.out], vx.ins.len())) else {
        return;
    };
    for p in cands {
        for (k, &e) in vx.ins.iter().enumerate() {
            colors[e] = p.inputs[k];
        }
        color_rec(shape, v + 1, colors, by_out, out);
    }
    for &e in &vx.ins {
        colors[e] = usize::MAX;
    }
}

/// Basis decorations of a colored tree: all of them when there are at most
/// `cap`, otherwise a seeded sample of `cap`.
pub fn decorations(dims: &[usize], cap: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let total: usize = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .unwrap_or(usize::MAX);
    if total == 0 {
        return (vec![], true);
    }
    if total <= cap {
        let mut all = vec![vec![]];
        for &d in dims {
            all = all
                .into_iter()
                .flat_map(|t: Vec<usize>| {
                    (0..d).map(move |i| {
                        let mut t = t.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        return (all, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < cap {
        let t: Vec<usize> = dims
            .iter()
            .map(|&d| *(0..d).collect::<Vec<_>>().choose(&mut rng).unwrap())
            .collect();
        seen.insert(t);
    }
    (seen.into_iter().collect(), false)
}

pub const DECORATION_CAP: usize = 400;

fn tensor_of(idx: &[usize]) -> Tensor {
    std::iter::once((idx.to_vec(), Q::one())).collect()
}

fn vec_str(v: &[Q]) -> String {
    let parts: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| format!("{}*b{i}", fmt_q(c)))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// γ∘d_γ = 0 on every colored tree in bounds, plus the unit coherences.
pub fn check_su_structure(p: &SuHomotopyOperad) -> Report {
    let b = p.vertex_bound();
    let mut r = Report::new()
        .bound("vertex_bound", b)
        .bound("decoration_cap", DECORATION_CAP);
    let trees = p.colored_trees(b);
    let mut sq = Ok(());
    let mut exhaustive = true;
    'trees: for (n, t) in trees.iter().enumerate() {
        let dims: Vec<usize> = (0..t.tree.n_vertices())
            .map(|v| p.dim(&vertex_profile(t, v)))
            .collect();
        let (decs, all) = decorations(&dims, DECORATION_CAP, n as u64);
        exhaustive &= all;
        for idx in decs {
            match p.gamma_of_coderivation(t, &tensor_of(&idx)) {
                Ok(v) if v.iter().all(Zero::is_zero) => {}
                Ok(v) => {
                    sq = Err(format!(
                        "tree {} decoration {idx:?} gives {}",
                        t.planar_encoding(),
                        vec_str(&v)
                    ));
                    break 'trees;
                }
                Err(e) => {
                    sq = Err(format!("tree {}: {e}", t.planar_encoding()));
                    break 'trees;
                }
            }
        }
    }
    r.set_bound(
        "decorations",
        if exhaustive { "exhaustive" } else { "sampled" },
    );
    r.record("γ∘d_γ = 0", sq);

    // unit coherences
    let mut units = Ok(());
    'u: for t in trees.iter() {
        let k = t.tree.n_vertices();
        let unit_slots: Vec<usize> = (0..k)
            .filter(|&v| {
                let pr = vertex_profile(t, v);
                pr.arity() == 1 && pr.inputs[0] == pr.output
            })
            .collect();
        for &v in &unit_slots {
            let c = t.colors[t.tree.vertex(v).out];
            let u = p.unit(c);
            let others: Vec<usize> = (0..k).filter(|&w| w != v).collect();
            let dims: Vec<usize> = others
                .iter()
                .map(|&w| p.dim(&vertex_profile(t, w)))
                .collect();
            let (decs, _) = decorations(&dims, 60, v as u64);
            for d in decs {
                let mut inputs: Vec<Vec<Q>> = Vec::with_capacity(k);
                let mut it = d.iter();
                for w in 0..k {
                    if w == v {
                        inputs.push(u.clone());
                    } else {
                        let pr = vertex_profile(t, w);
                        inputs.push(crate::linalg::unit_vec(p.dim(&pr), *it.next().unwrap()));
                    }
                }
                let got = match p.gamma(t, &inputs) {
                    Ok(x) => x,
                    Err(e) => {
                        units = Err(e.to_string());
                        break 'u;
                    }
                };
                let expected = match k {
                    1 => zeros(got.len()),
                    2 => {
                        let w = 1 - v;
                        let x = &inputs[w];
                        let deg = p.degree(&vertex_profile(t, w), d[0]);
                        if v == 0 {
                            x.clone()
                        } else {
                            x.iter().map(|c| c * qs(sign_pow(deg as i64))).collect()
                        }
                    }
                    _ => zeros(got.len()),
                };
                if got != expected {
                    units = Err(format!(
                        "tree {} with the unit at vertex {v}",
                        t.planar_encoding()
                    ));
                    break 'u;
                }
            }
        }
    }
    r.record("strict unit coherences", units);
    r
}

/// A morphism of su operads: first-level maps per profile plus higher
/// components keyed by the planar colored encoding of the source tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuMorphism {
    pub source: SuHomotopyOperad,
    pub target: SuHomotopyOperad,
    pub color_map: Vec<Color>,
    pub f1: BTreeMap<Profile, Matrix>,
    pub higher: BTreeMap<String, MultiMap>,
}

impl SuMorphism {
    pub fn identity(p: &SuHomotopyOperad) -> Self {
        let f1 = p
            .all_profiles()
            .into_iter()
            .map(|pr| (pr.clone(), Matrix::identity(p.dim(&pr))))
            .collect();
        SuMorphism {
            source: p.clone(),
            target: p.clone(),
            color_map: (0..p.n_colors()).collect(),
            f1,
            higher: BTreeMap::new(),
        }
    }

    /// A dg morphism seen with no higher components.
    pub fn from_dg(f: &OperadMorphism) -> Self {
        let f1 = f
            .source
            .all_profiles()
            .into_iter()
            .map(|pr| (pr.clone(), f.matrix(&pr)))
            .collect();
        SuMorphism {
            source: SuHomotopyOperad::from_dg(&f.source),
            target: SuHomotopyOperad::from_dg(&f.target),
            color_map: f.color_map.clone(),
            f1,
            higher: BTreeMap::new(),
        }
    }

    pub fn image_profile(&self, p: &Profile) -> Profile {
        Profile::new(
            p.inputs.iter().map(|&c| self.color_map[c]).collect(),
            self.color_map[p.output],
        )
    }

    pub fn image_tree(&self, t: &ColoredTree) -> ColoredTree {
        ColoredTree {
            tree: t.tree.clone(),
            colors: t.colors.iter().map(|&c| self.color_map[c]).collect(),
        }
    }

    /// f(t) on a basis decoration, in the target component of the image profile.
    pub fn eval_basis(&self, t: &ColoredTree, idx: &[usize]) -> SparseVec {
        if t.tree.n_vertices() == 1 {
            let p = vertex_profile(t, 0);
            let tp = self.image_profile(&p);
            let dim = self.target.dim(&tp);
            return match self.f1.get(&p) {
                Some(m) => crate::linalg::to_sparse(&m.column(idx[0])),
                None => crate::linalg::to_sparse(&zeros(dim)),
            };
        }
        self.higher
            .get(&t.planar_encoding())
            .and_then(|m| m.get(idx))
            .cloned()
            .unwrap_or_default()
    }

    /// Rf(t)(x) regrouped per partition and pushed through γ of the target:
    /// the left side of ν∘Rf = f∘d_γ.
    pub fn nu_rf(&self, t: &ColoredTree, idx: &[usize]) -> Result<Vec<Q>> {
        let all = t.tree.all_vertices();
        let tp = self.image_profile(&tree_profile(t));
        let dim = self.target.dim(&tp);
        let degs = self.source.suspended_degrees(t, idx);
        let mut acc = SparseVec::new();
        for cuts in subsets(t.tree.subtree_inner(all)) {
            let (quot, blocks) = colored_contract(t, all, cuts);
            let order: Vec<usize> = blocks.iter().flat_map(|&b| bits(b)).collect();
            let sign = qs(koszul_sign(&order, &degs));
            let mut factors = Vec::new();
            for &b in &blocks {
                let sub = colored_extract(t, b);
                let sidx: Vec<usize> = bits(b).map(|v| idx[v]).collect();
                let val = self.eval_basis(&sub, &sidx);
                let pdim = self.target.dim(&self.image_profile(&tree_profile(&sub)));
                factors.push(to_dense(&val, pdim));
            }
            let g = self.target.gamma(&self.image_tree(&quot), &factors)?;
            for (i, c) in g.into_iter().enumerate() {
                add_entry(&mut acc, i, c * &sign);
            }
        }
        Ok(to_dense(&acc, dim))
    }

    /// f∘d_γ(t)(x).
    pub fn f_d(&self, t: &ColoredTree, idx: &[usize]) -> Result<Vec<Q>> {
        let tp = self.image_profile(&tree_profile(t));
        let dim = self.target.dim(&tp);
        let mut acc = SparseVec::new();
        for (ts, tensor) in self.source.coderivation_apply(t, &tensor_of(idx))? {
            for (j, c) in tensor {
                for (i, x) in self.eval_basis(&ts, &j) {
                    add_entry(&mut acc, i, x * &c);
                }
            }
        }
        Ok(to_dense(&acc, dim))
    }
}

pub fn check_su_morphism(m: &SuMorphism) -> Report {
    let b = m.source.vertex_bound().min(m.target.vertex_bound());
    let mut r = Report::new()
        .bound("vertex_bound", b)
        .bound("decoration_cap", DECORATION_CAP);
    let mut eq = Ok(());
    let trees = m.source.colored_trees(b);
    'trees: for (n, t) in trees.iter().enumerate() {
        let dims: Vec<usize> = (0..t.tree.n_vertices())
            .map(|v| m.source.dim(&vertex_profile(t, v)))
            .collect();
        for idx in decorations(&dims, DECORATION_CAP, n as u64).0 {
            let lhs = m.nu_rf(t, &idx);
            let rhs = m.f_d(t, &idx);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => {
                    eq = Err(format!(
                        "tree {} decoration {idx:?}: {} vs {}",
                        t.planar_encoding(),
                        vec_str(&a),
                        vec_str(&b)
                    ));
                    break 'trees;
                }
                (Err(e), _) | (_, Err(e)) => {
                    eq = Err(e.to_string());
                    break 'trees;
                }
            }
        }
    }
    r.record("ν∘Rf = f∘d_γ", eq);

    let mut units = Ok(());
    for c in 0..m.source.n_colors() {
        let up = Profile::unit(c);
        if m.source.dim(&up) == 0 {
            continue;
        }
        let fu = m.f1.get(&up).map(|x| x.apply(&m.source.unit(c)));
        if fu.as_ref() != Some(&m.target.unit(m.color_map[c])) {
            units = Err(format!("f(s id) for color {c}"));
            break;
        }
    }
    if units.is_ok() {
        'h: for t in trees.iter().filter(|t| t.tree.n_vertices() >= 2) {
            for v in 0..t.tree.n_vertices() {
                let pr = vertex_profile(t, v);
                if pr.arity() != 1 || pr.inputs[0] != pr.output {
                    continue;
                }
                let Some(u) = unit_basis(&m.source, pr.output) else {
                    continue;
                };
                let dims: Vec<usize> = (0..t.tree.n_vertices())
                    .map(|w| m.source.dim(&vertex_profile(t, w)))
                    .collect();
                for mut idx in decorations(&dims, 60, v as u64).0 {
                    idx[v] = u;
                    if !m.eval_basis(t, &idx).is_empty() {
                        units = Err(format!(
                            "f nonzero on {} with a unit at vertex {v}",
                            t.planar_encoding()
                        ));
                        break 'h;
                    }
                }
            }
        }
    }
    r.record("unit conditions", units);
    r
}

fn unit_basis(p: &SuHomotopyOperad, c: Color) -> Option<usize> {
    let u = p.unit(c);
    let nz: Vec<usize> = (0..u.len()).filter(|&i| !u[i].is_zero()).collect();
    (nz.len() == 1 && u[nz[0]].is_one()).then(|| nz[0])
}

/// (g∘f)(t) = Σ_partitions ε g(t/t₁⋯t_k)(f(t₁)⊗…⊗f(t_k)).
pub fn compose_morphisms(g: &SuMorphism, f: &SuMorphism) -> Result<SuMorphism> {
    if f.target != g.source {
        return Err(Error::Color("target of f must be the source of g".into()));
    }
    let color_map: Vec<Color> = f.color_map.iter().map(|&c| g.color_map[c]).collect();
    let mut f1 = BTreeMap::new();
    for p in f.source.all_profiles() {
        let mid = f.image_profile(&p);
        let a =
            f.f1.get(&p)
                .cloned()
                .unwrap_or_else(|| Matrix::zero(f.target.dim(&mid), f.source.dim(&p)));
        let b = g.f1.get(&mid).cloned().unwrap_or_else(|| {
            Matrix::zero(g.target.dim(&g.image_profile(&mid)), g.source.dim(&mid))
        });
        f1.insert(p, b.mul(&a));
    }
    let mut higher: BTreeMap<String, MultiMap> = BTreeMap::new();
    let b = f.source.vertex_bound().min(g.source.vertex_bound());
    for t in f
        .source
        .colored_trees(b)
        .into_iter()
        .filter(|t| t.tree.n_vertices() >= 2)
    {
        let all = t.tree.all_vertices();
        let dims: Vec<usize> = (0..t.tree.n_vertices())
            .map(|v| f.source.dim(&vertex_profile(&t, v)))
            .collect();
        let mut table = MultiMap::new();
        for idx in decorations(&dims, usize::MAX, 0).0 {
            let degs = f.source.suspended_degrees(&t, &idx);
            let mut acc = SparseVec::new();
            for cuts in subsets(t.tree.subtree_inner(all)) {
                let (quot, blocks) = colored_contract(&t, all, cuts);
                let order: Vec<usize> = blocks.iter().flat_map(|&bl| bits(bl)).collect();
                let sign = qs(koszul_sign(&order, &degs));
                // f on each block, then g on the quotient, expanded over bases
                let mut partial: Tensor = std::iter::once((vec![], sign)).collect();
                for &bl in &blocks {
                    let sub = colored_extract(&t, bl);
                    let sidx: Vec<usize> = bits(bl).map(|v| idx[v]).collect();
                    let val = f.eval_basis(&sub, &sidx);
                    let mut next = Tensor::new();
                    for (pre, c) in &partial {
                        for (i, x) in &val {
                            let mut k = pre.clone();
                            k.push(*i);
                            *next.entry(k).or_insert_with(Q::zero) += c * x;
                        }
                    }
                    partial = next;
                }
                let mid_tree = f.image_tree(&quot);
                for (k, c) in partial {
                    if c.is_zero() {
                        continue;
                    }
                    for (i, x) in g.eval_basis(&mid_tree, &k) {
                        add_entry(&mut acc, i, x * &c);
                    }
                }
            }
            if !acc.is_empty() {
                table.insert(idx, acc);
            }
        }
        if !table.is_empty() {
            higher.insert(t.planar_encoding(), table);
        }
    }
    Ok(SuMorphism {
        source: f.source.clone(),
        target: g.target.clone(),
        color_map,
        f1,
        higher,
    })
}

/// Shorthand for a vector in a dg component.
pub fn elem(p: &Profile, v: Vec<Q>) -> Elem {
    Elem {
        profile: p.clone(),
        v,
    }
}

/// The A∞ relations Σ (−1)^{r+st} m_u(1^r ⊗ m_s ⊗ 1^t) = 0 evaluated on
/// one tuple of basis elements, with the usual Koszul rule. `m[n]` maps a
/// basis tuple of length n to a vector; degrees are those of the basis.
pub fn stasheff_defect(degrees: &[i32], m: &BTreeMap<usize, MultiMap>, args: &[usize]) -> Vec<Q> {
    let dim = degrees.len();
    let n = args.len();
    let apply = |k: usize, tuple: &[usize]| -> SparseVec {
        m.get(&k)
            .and_then(|mm| mm.get(tuple))
            .cloned()
            .unwrap_or_default()
    };
    let mut acc = SparseVec::new();
    for s in 1..=n {
        for r in 0..=n - s {
            let t = n - r - s;
            let u = r + 1 + t;
            let inner = apply(s, &args[r..r + s]);
            // |m_s| = s − 2 passes the first r arguments
            let pass: i64 = args[..r].iter().map(|&a| degrees[a] as i64).sum();
            let koszul = sign_pow((s as i64 - 2) * pass);
            let base = sign_pow((r + s * t) as i64) * koszul;
            for (w, c) in inner {
                let mut outer = args[..r].to_vec();
                outer.push(w);
                outer.extend_from_slice(&args[r + s..]);
                for (z, c2) in apply(u, &outer) {
                    add_entry(&mut acc, z, qs(base) * &c * c2);
                }
            }
        }
    }
    to_dense(&acc, dim)
}

/// The single-colored su operad concentrated in arity one given by an A∞
/// algebra: γ(L_n)(sa₀⊗…⊗sa_{n−1}) = ± s m_n(a₀,…,a_{n−1}) with a₀ at the root.
pub fn from_a_infinity(
    space: GradedSpace,
    unit: Vec<Q>,
    m: &BTreeMap<usize, MultiMap>,
    vertex_bound: usize,
) -> Result<SuHomotopyOperad> {
    let p = Profile::unit(0);
    let mut gamma = BTreeMap::new();
    for (&n, mm) in m {
        let t = ColoredTree::monochrome(Tree::linear(n));
        let mut table = MultiMap::new();
        for (args, out) in mm {
            let degs: Vec<i32> = args.iter().map(|&a| space.degree(a)).collect();
            let sign = qs(crate::linalg::suspension_sign(&degs));
            table.insert(
                args.clone(),
                out.iter().map(|(&k, c)| (k, c * &sign)).collect(),
            );
        }
        gamma.insert(t.planar_encoding(), table);
    }
    let mut components = BTreeMap::new();
    components.insert(p, space);
    SuHomotopyOperad::from_table(
        vec!["c".into()],
        SuTable {
            components,
            units: vec![unit],
            gamma,
        },
        vertex_bound,
    )
}

/// Vertices of `t` that carry a strict unit in the given decoration.
pub fn unit_vertices(p: &SuHomotopyOperad, t: &ColoredTree, idx: &[usize]) -> VSet {
    let mut out = 0;
    for v in 0..t.tree.n_vertices() {
        let pr = vertex_profile(t, v);
        if pr.arity() == 1 && pr.inputs[0] == pr.output && unit_basis(p, pr.output) == Some(idx[v])
        {
            out |= bit(v);
        }
    }
    out
}
