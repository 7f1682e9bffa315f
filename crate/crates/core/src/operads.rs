//! Finite truncations of dg colored operads, stored through partial
//! compositions, the right symmetric action and unit elements.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    add_entry, fmt_q, koszul_sign, q, qs, sign_pow, to_sparse, zeros, ChainComplex, GradedSpace,
    Matrix, Span, SparseVec, Q,
};
use crate::report::Report;
use crate::trees::{Tree, TreeMap};

pub type Color = usize;

pub const DEFAULT_WINDOW: (i32, i32) = (-2, 6);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    pub inputs: Vec<Color>,
    pub output: Color,
}

impl Profile {
    pub fn new(inputs: Vec<Color>, output: Color) -> Self {
        Profile { inputs, output }
    }

    pub fn unit(c: Color) -> Self {
        Profile {
            inputs: vec![c],
            output: c,
        }
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Slot k of the result is slot `sigma[k]` of `self`.
    pub fn permuted(&self, sigma: &[usize]) -> Profile {
        Profile {
            inputs: sigma.iter().map(|&j| self.inputs[j]).collect(),
            output: self.output,
        }
    }

    pub fn graft(&self, i: usize, inner: &Profile) -> Profile {
        let mut inputs = self.inputs[..i].to_vec();
        inputs.extend(inner.inputs.iter().copied());
        inputs.extend(self.inputs[i + 1..].iter().copied());
        Profile {
            inputs,
            output: self.output,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ins: Vec<String> = self.inputs.iter().map(|c| c.to_string()).collect();
        write!(f, "({};{})", ins.join(","), self.output)
    }
}

/// A vector in one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elem {
    pub profile: Profile,
    pub v: Vec<Q>,
}

impl Elem {
    pub fn zero(profile: Profile, dim: usize) -> Self {
        Elem {
            profile,
            v: zeros(dim),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, c: &Q) -> Elem {
        Elem {
            profile: self.profile.clone(),
            v: self.v.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_assign(&mut self, c: &Q, other: &Elem) {
        assert_eq!(
            self.profile, other.profile,
            "adding elements of different components"
        );
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += c * b;
        }
    }
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for i in 0..n {
            let mut r = p.clone();
            r.insert(i, n - 1);
            out.push(r);
        }
    }
    out.sort();
    out
}

pub fn compose_perm(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    tau.iter().map(|&t| sigma[t]).collect()
}

pub fn invert_perm(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (k, &s) in sigma.iter().enumerate() {
        inv[s] = k;
    }
    inv
}

/// Stored finite operad: every nonzero component for every ordered profile.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub components: BTreeMap<Profile, ChainComplex>,
    /// Unit element of the (c; c) component, per color.
    pub units: Vec<Vec<Q>>,
    /// Nonzero products of basis elements: (x basis, y basis) → result.
    pub comps: BTreeMap<(Profile, usize, Profile), BTreeMap<(usize, usize), SparseVec>>,
    /// Explicit actions; absent entries act by matching basis positions.
    pub actions: BTreeMap<(Profile, Vec<usize>), Matrix>,
}

impl Table {
    /// Unit as a basis index, when it is a single basis vector.
    pub fn unit_basis(&self, c: Color) -> Option<usize> {
        let nz: Vec<(usize, &Q)> = self.units[c]
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .collect();
        match nz.as_slice() {
            [(i, x)] if x.is_one() => Some(*i),
            _ => None,
        }
    }

    /// Product entries forced by the unit laws, for colors whose unit is a
    /// basis vector.
    pub fn fill_unit_laws(&mut self) {
        let profiles: Vec<Profile> = self.components.keys().cloned().collect();
        for p in &profiles {
            let n = self.components[p].dim();
            let out = p.output;
            if let Some(u) = self.unit_basis(out) {
                let e = self
                    .comps
                    .entry((Profile::unit(out), 0, p.clone()))
                    .or_default();
                for b in 0..n {
                    e.insert((u, b), std::iter::once((b, Q::one())).collect());
                }
            }
            for (i, &c) in p.inputs.iter().enumerate() {
                if let Some(uc) = self.unit_basis(c) {
                    let e = self
                        .comps
                        .entry((p.clone(), i, Profile::unit(c)))
                        .or_default();
                    for b in 0..n {
                        e.insert((b, uc), std::iter::once((b, Q::one())).collect());
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EndArity {
    basis: Vec<(Vec<usize>, usize)>,
    index: HashMap<(Vec<usize>, usize), usize>,
    complex: ChainComplex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Tree {
        tree: Tree,
        line: ChainComplex,
    },
    End {
        v: ChainComplex,
        arity: Vec<EndArity>,
    },
    Table(Table),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgColoredOperad {
    color_names: Vec<String>,
    arity_bound: usize,
    window: (i32, i32),
    kind: Kind,
}

fn line_complex() -> ChainComplex {
    ChainComplex::zero_differential(
        GradedSpace::new(vec![("op".into(), 0)], DEFAULT_WINDOW).unwrap(),
    )
}

impl DgColoredOperad {
    /// KΩ(T): one color per edge, a line in degree 0 for each sub-tree.
    pub fn tree_operad(tree: &Tree) -> Self {
        DgColoredOperad {
            color_names: (0..tree.n_edges()).map(|e| format!("e{e}")).collect(),
            arity_bound: tree.leaf_count().max(1),
            window: DEFAULT_WINDOW,
            kind: Kind::Tree {
                tree: tree.clone(),
                line: line_complex(),
            },
        }
    }

    /// End(V) up to the given arity. The window is one step wider than the
    /// degrees that actually occur.
    pub fn endomorphism(v: &ChainComplex, arity_bound: usize) -> Result<Self> {
        let dim = v.dim();
        let vs = v.space();
        let mut arities = Vec::new();
        let mut lo = i32::MAX;
        let mut hi = i32::MIN;
        for n in 0..=arity_bound {
            for t in tuples(dim, n) {
                let s: i32 = t.iter().map(|&b| vs.degree(b)).sum();
                for b in 0..dim {
                    let d = vs.degree(b) - s;
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
        }
        if dim == 0 {
            lo = 0;
            hi = 0;
        }
        let window = (lo - 1, hi + 1);
        for n in 0..=arity_bound {
            let mut basis = Vec::new();
            for t in tuples(dim, n) {
                for b in 0..dim {
                    basis.push((t.clone(), b));
                }
            }
            let index: HashMap<(Vec<usize>, usize), usize> = basis
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, k)| (k, i))
                .collect();
            let labels: Vec<(String, i32)> = basis
                .iter()
                .map(|(t, b)| {
                    let s: i32 = t.iter().map(|&x| vs.degree(x)).sum();
                    let ins: Vec<&str> = t.iter().map(|&x| vs.label(x)).collect();
                    (
                        format!("{}>{}", ins.join("."), vs.label(*b)),
                        vs.degree(*b) - s,
                    )
                })
                .collect();
            let space = GradedSpace::new(labels, window)?;
            // ∂f = d∘f − (−1)^{|f|} f∘d on basis maps
            let mut d = Matrix::zero(basis.len(), basis.len());
            let tensor_d = tensor_differential(v, n);
            for (col, (t, b)) in basis.iter().enumerate() {
                let fdeg = space.degree(col);
                for c in 0..dim {
                    let x = v.d().get(c, *b);
                    if !x.is_zero() {
                        d.add(index[&(t.clone(), c)], col, x);
                    }
                }
                let ti = tuple_index(dim, t);
                for (row_t, col_s, x) in tensor_d.entries() {
                    if row_t == ti {
                        let s = tuple_from_index(dim, n, col_s);
                        d.add(index[&(s, *b)], col, -qs(sign_pow(fdeg as i64)) * x);
                    }
                }
            }
            let complex = ChainComplex::new(space, d)?;
            arities.push(EndArity {
                basis,
                index,
                complex,
            });
        }
        Ok(DgColoredOperad {
            color_names: vec!["c".into()],
            arity_bound,
            window,
            kind: Kind::End {
                v: v.clone(),
                arity: arities,
            },
        })
    }

    pub fn from_table(color_names: Vec<String>, table: Table) -> Result<Self> {
        if table.units.len() != color_names.len() {
            return Err(Error::Invalid("one unit per color".into()));
        }
        let mut lo = i32::MAX;
        let mut hi = i32::MIN;
        let mut arity_bound = 1;
        for (p, c) in &table.components {
            if p.inputs
                .iter()
                .chain([&p.output])
                .any(|&x| x >= color_names.len())
            {
                return Err(Error::Color(format!("profile {p} uses an unknown color")));
            }
            lo = lo.min(c.space().window().0);
            hi = hi.max(c.space().window().1);
            arity_bound = arity_bound.max(p.arity());
        }
        for c in 0..color_names.len() {
            let dim = table
                .components
                .get(&Profile::unit(c))
                .map_or(0, ChainComplex::dim);
            let u = &table.units[c];
            if u.len() != dim {
                return Err(Error::Dimension(format!(
                    "unit of color {c} has the wrong length"
                )));
            }
            if let Some(comp) = table.components.get(&Profile::unit(c)) {
                if !crate::linalg::concentrated_in(comp.space(), u, 0) {
                    return Err(Error::Invalid(format!(
                        "unit of color {c} must have degree 0"
                    )));
                }
            }
        }
        for ((px, i, py), entries) in &table.comps {
            let cx = table
                .components
                .get(px)
                .ok_or_else(|| Error::Missing(format!("component {px}")))?;
            let cy = table
                .components
                .get(py)
                .ok_or_else(|| Error::Missing(format!("component {py}")))?;
            if *i >= px.arity() || px.inputs[*i] != py.output {
                return Err(Error::Color(format!(
                    "cannot insert {py} at slot {i} of {px}"
                )));
            }
            let pr = px.graft(*i, py);
            for ((a, b), r) in entries {
                if *a >= cx.dim() || *b >= cy.dim() {
                    return Err(Error::Dimension(format!(
                        "product entry out of range in {px}∘{i}{py}"
                    )));
                }
                if r.is_empty() {
                    continue;
                }
                let cr = table
                    .components
                    .get(&pr)
                    .ok_or_else(|| Error::Missing(format!("component {pr}")))?;
                let deg = cx.space().degree(*a) + cy.space().degree(*b);
                for (&k, _) in r {
                    if k >= cr.dim() || cr.space().degree(k) != deg {
                        return Err(Error::Dimension(format!(
                            "product in {pr} has the wrong degree"
                        )));
                    }
                }
            }
        }
        Ok(DgColoredOperad {
            color_names,
            arity_bound,
            window: if lo <= hi { (lo, hi) } else { DEFAULT_WINDOW },
            kind: Kind::Table(table),
        })
    }

    pub fn n_colors(&self) -> usize {
        self.color_names.len()
    }

    pub fn color_name(&self, c: Color) -> &str {
        &self.color_names[c]
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    pub fn arity_bound(&self) -> usize {
        self.arity_bound
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn as_table(&self) -> Option<&Table> {
        match &self.kind {
            Kind::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn tree(&self) -> Option<&Tree> {
        match &self.kind {
            Kind::Tree { tree, .. } => Some(tree),
            _ => None,
        }
    }

    pub fn component(&self, p: &Profile) -> Option<&ChainComplex> {
        if p.output >= self.n_colors() || p.inputs.iter().any(|&c| c >= self.n_colors()) {
            return None;
        }
        match &self.kind {
            Kind::Tree { tree, line } => tree.omega_component(&p.inputs, p.output).map(|_| line),
            Kind::End { arity, .. } => arity.get(p.arity()).map(|a| &a.complex),
            Kind::Table(t) => t.components.get(p),
        }
    }

    pub fn dim(&self, p: &Profile) -> usize {
        self.component(p).map_or(0, ChainComplex::dim)
    }

    pub fn basis_label(&self, p: &Profile, i: usize) -> String {
        match self.component(p) {
            Some(c) => c.space().label(i).to_string(),
            None => format!("?{i}"),
        }
    }

    /// One profile per orbit of the symmetric action among nonzero components.
    pub fn profiles(&self) -> Vec<Profile> {
        match &self.kind {
            Kind::Tree { tree, .. } => {
                let mut out: Vec<Profile> = (0..tree.n_edges()).map(Profile::unit).collect();
                for s in tree.enumerate_subtrees() {
                    out.push(Profile::new(tree.subtree_leaves(s), tree.subtree_root(s)));
                }
                out
            }
            Kind::End { arity, .. } => (0..arity.len())
                .map(|n| Profile::new(vec![0; n], 0))
                .collect(),
            Kind::Table(t) => {
                let keys: BTreeSet<&Profile> = t.components.keys().collect();
                keys.iter()
                    .filter(|p| {
                        all_permutations(p.arity()).iter().all(|s| {
                            let r = p.permuted(s);
                            r.inputs >= p.inputs || !keys.contains(&r)
                        })
                    })
                    .map(|p| (*p).clone())
                    .collect()
            }
        }
    }

    /// Every ordered profile with a nonzero component.
    pub fn all_profiles(&self) -> Vec<Profile> {
        match &self.kind {
            Kind::Table(t) => t.components.keys().cloned().collect(),
            _ => {
                let mut set = BTreeSet::new();
                for p in self.profiles() {
                    for s in all_permutations(p.arity()) {
                        set.insert(p.permuted(&s));
                    }
                }
                set.into_iter().collect()
            }
        }
    }

    pub fn unit(&self, c: Color) -> Elem {
        let p = Profile::unit(c);
        let idx = match &self.kind {
            Kind::Tree { .. } => 0,
            Kind::End { .. } => {
                // identity map: sum of b ↦ b
                let a = self.end_arity(1);
                let mut v = zeros(a.basis.len());
                for b in 0..self.end_v().dim() {
                    v[a.index[&(vec![b], b)]] = Q::one();
                }
                return Elem { profile: p, v };
            }
            Kind::Table(t) => {
                return Elem {
                    profile: p,
                    v: t.units[c].clone(),
                }
            }
        };
        let mut v = zeros(self.dim(&p));
        v[idx] = Q::one();
        Elem { profile: p, v }
    }

    /// The unit as a basis index when it is one (tree and table kinds).
    pub fn unit_index(&self, c: Color) -> Option<usize> {
        match &self.kind {
            Kind::Tree { .. } => Some(0),
            Kind::End { .. } => None,
            Kind::Table(t) => t.unit_basis(c),
        }
    }

    fn end_arity(&self, n: usize) -> &EndArity {
        match &self.kind {
            Kind::End { arity, .. } => &arity[n],
            _ => unreachable!("endomorphism data on another kind"),
        }
    }

    fn end_v(&self) -> &ChainComplex {
        match &self.kind {
            Kind::End { v, .. } => v,
            _ => unreachable!("endomorphism data on another kind"),
        }
    }

    pub fn basis_elem(&self, p: &Profile, i: usize) -> Elem {
        let mut v = zeros(self.dim(p));
        v[i] = Q::one();
        Elem {
            profile: p.clone(),
            v,
        }
    }

    pub fn degree(&self, p: &Profile, i: usize) -> i32 {
        self.component(p)
            .expect("component exists")
            .space()
            .degree(i)
    }

    pub fn d(&self, x: &Elem) -> Elem {
        match self.component(&x.profile) {
            Some(c) => Elem {
                profile: x.profile.clone(),
                v: c.d().apply(&x.v),
            },
            None => x.clone(),
        }
    }

    /// x ∘_i y.
    pub fn compose(&self, x: &Elem, i: usize, y: &Elem) -> Result<Elem> {
        let px = &x.profile;
        let py = &y.profile;
        if i >= px.arity() || px.inputs[i] != py.output {
            return Err(Error::Color(format!(
                "cannot insert {py} at slot {i} of {px}"
            )));
        }
        let pr = px.graft(i, py);
        let rdim = match self.component(&pr) {
            Some(c) => c.dim(),
            None => {
                return Err(Error::Missing(format!(
                    "component {pr} beyond the stored bounds"
                )));
            }
        };
        let mut out = SparseVec::new();
        for (a, xa) in x.v.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.v.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let c = xa * yb;
                for (k, r) in self.compose_basis(px, a, i, py, b) {
                    add_entry(&mut out, k, &c * r);
                }
            }
        }
        let mut v = zeros(rdim);
        for (k, c) in out {
            v[k] = c;
        }
        Ok(Elem { profile: pr, v })
    }

    fn compose_basis(&self, px: &Profile, a: usize, i: usize, py: &Profile, b: usize) -> SparseVec {
        match &self.kind {
            Kind::Tree { .. } => std::iter::once((0, Q::one())).collect(),
            Kind::End { v, .. } => {
                let (t, tb) = &self.end_arity(px.arity()).basis[a];
                let (u, ub) = &self.end_arity(py.arity()).basis[b];
                if *ub != t[i] {
                    return SparseVec::new();
                }
                let vs = v.space();
                let gdeg: i32 = vs.degree(*ub) - u.iter().map(|&x| vs.degree(x)).sum::<i32>();
                let before: i32 = t[..i].iter().map(|&x| vs.degree(x)).sum();
                let mut s = t[..i].to_vec();
                s.extend(u.iter().copied());
                s.extend(t[i + 1..].iter().copied());
                let r = self.end_arity(px.arity() + py.arity() - 1).index[&(s, *tb)];
                std::iter::once((r, qs(sign_pow(gdeg as i64 * before as i64)))).collect()
            }
            Kind::Table(t) => t
                .comps
                .get(&(px.clone(), i, py.clone()))
                .and_then(|m| m.get(&(a, b)))
                .cloned()
                .unwrap_or_default(),
        }
    }

    /// Right action: slot k of the result is slot `sigma[k]` of x.
    pub fn act(&self, x: &Elem, sigma: &[usize]) -> Result<Elem> {
        let p = &x.profile;
        if sigma.len() != p.arity() || invert_perm(sigma).len() != sigma.len() || {
            let set: BTreeSet<usize> = sigma.iter().copied().collect();
            set.len() != sigma.len() || set.iter().any(|&s| s >= sigma.len())
        } {
            return Err(Error::Invalid("not a permutation of the inputs".into()));
        }
        let pr = p.permuted(sigma);
        let rdim = self.dim(&pr);
        match &self.kind {
            Kind::Tree { .. } => Ok(Elem {
                profile: pr,
                v: x.v.clone(),
            }),
            Kind::End { v, .. } => {
                let a = self.end_arity(p.arity());
                let vs = v.space();
                let inv = invert_perm(sigma);
                let mut out = zeros(rdim);
                for (idx, c) in x.v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let (t, b) = &a.basis[idx];
                    let s: Vec<usize> = sigma.iter().map(|&j| t[j]).collect();
                    let degs: Vec<i32> = s.iter().map(|&z| vs.degree(z)).collect();
                    let sign = koszul_sign(&inv, &degs);
                    out[a.index[&(s, *b)]] += qs(sign) * c;
                }
                Ok(Elem {
                    profile: pr,
                    v: out,
                })
            }
            Kind::Table(t) => {
                if let Some(m) = t.actions.get(&(p.clone(), sigma.to_vec())) {
                    return Ok(Elem {
                        profile: pr,
                        v: m.apply(&x.v),
                    });
                }
                let src = t.components.get(p);
                let dst = t.components.get(&pr);
                match (src, dst) {
                    (Some(a), Some(b)) if a.space().basis() == b.space().basis() => Ok(Elem {
                        profile: pr,
                        v: x.v.clone(),
                    }),
                    _ if x.is_zero() => Ok(Elem::zero(pr, rdim)),
                    _ => Err(Error::Missing(format!("action of {sigma:?} on {p}"))),
                }
            }
        }
    }

    /// Materialize every ordered component, product and action.
    pub fn to_table(&self) -> Table {
        if let Kind::Table(t) = &self.kind {
            return t.clone();
        }
        let profiles = self.all_profiles();
        let mut t = Table {
            units: (0..self.n_colors()).map(|c| self.unit(c).v).collect(),
            ..Table::default()
        };
        for p in &profiles {
            let c = self.component(p).unwrap().clone();
            for s in all_permutations(p.arity()) {
                let r = p.permuted(&s);
                let mut m = Matrix::zero(self.dim(&r), c.dim());
                for j in 0..c.dim() {
                    let y = self.act(&self.basis_elem(p, j), &s).unwrap();
                    for (i, x) in y.v.into_iter().enumerate() {
                        m.set(i, j, x);
                    }
                }
                t.actions.insert((p.clone(), s), m);
            }
            t.components.insert(p.clone(), c);
        }
        for px in &profiles {
            for py in &profiles {
                for i in 0..px.arity() {
                    if px.inputs[i] != py.output || self.component(&px.graft(i, py)).is_none() {
                        continue;
                    }
                    let mut entries = BTreeMap::new();
                    for a in 0..self.dim(px) {
                        for b in 0..self.dim(py) {
                            let r = self.compose_basis(px, a, i, py, b);
                            if !r.is_empty() {
                                entries.insert((a, b), r);
                            }
                        }
                    }
                    if !entries.is_empty() {
                        t.comps.insert((px.clone(), i, py.clone()), entries);
                    }
                }
            }
        }
        t
    }
}

fn tuples(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim).map(move |b| {
                    let mut t = t.clone();
                    t.push(b);
                    t
                })
            })
            .collect();
    }
    out
}

fn tuple_index(dim: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &b| acc * dim + b)
}

fn tuple_from_index(dim: usize, n: usize, mut i: usize) -> Vec<usize> {
    let mut t = vec![0; n];
    for k in (0..n).rev() {
        t[k] = i % dim;
        i /= dim;
    }
    t
}

/// Differential of V^{⊗n} on the tuple basis, Koszul-signed.
pub fn tensor_differential(v: &ChainComplex, n: usize) -> Matrix {
    let dim = v.dim();
    let total = dim.pow(n as u32);
    let mut m = Matrix::zero(total, total);
    for t in tuples(dim, n) {
        let col = tuple_index(dim, &t);
        let mut before = 0i64;
        for j in 0..n {
            for c in 0..dim {
                let x = v.d().get(c, t[j]);
                if !x.is_zero() {
                    let mut s = t.clone();
                    s[j] = c;
                    m.add(tuple_index(dim, &s), col, qs(sign_pow(before)) * x);
                }
            }
            before += v.space().degree(t[j]) as i64;
        }
    }
    m
}

pub fn elem_str(p: &DgColoredOperad, x: &Elem) -> String {
    let parts: Vec<String> =
        x.v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*{}", fmt_q(c), p.basis_label(&x.profile, i)))
            .collect();
    format!("{} [{}]", x.profile, parts.join(" + "))
}

fn basis_str(p: &DgColoredOperad, pr: &Profile, i: usize) -> String {
    format!("{}{}", pr, p.basis_label(pr, i))
}

/// Arities up to this get every permutation in the action checks.
pub const FULL_PERMUTATION_ARITY: usize = 4;

fn transpositions(n: usize) -> Vec<Vec<usize>> {
    (1..n)
        .map(|i| {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(i - 1, i);
            t
        })
        .collect()
}

// all of S_n in small arity; otherwise the identity, the generators, the
// reversal and the long cycle
fn permutations_to_test(n: usize, gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if n <= FULL_PERMUTATION_ARITY {
        return all_permutations(n);
    }
    let mut out = vec![(0..n).collect::<Vec<_>>()];
    out.extend(gens.iter().cloned());
    out.push((0..n).rev().collect());
    out.push((0..n).map(|i| (i + 1) % n).collect());
    out
}

/// Pass/fail per operad axiom over every in-bounds basis configuration.
/// Permutations are exhaustive up to [`FULL_PERMUTATION_ARITY`].
pub fn check_operad_axioms(p: &DgColoredOperad) -> Report {
    let mut r = Report::new()
        .bound("arity", p.arity_bound())
        .bound("all_permutations_up_to_arity", FULL_PERMUTATION_ARITY)
        .bound(
            "degree_window",
            format!("{}..{}", p.window().0, p.window().1),
        );
    let profiles = p.all_profiles();
    let basis: Vec<(Profile, usize)> = profiles
        .iter()
        .flat_map(|pr| (0..p.dim(pr)).map(move |i| (pr.clone(), i)))
        .collect();
    let deg = |pr: &Profile, i: usize| p.degree(pr, i);
    let fits = |pr: &Profile| p.component(pr).is_some();
    let mut by_output: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
    for (n, (pr, _)) in basis.iter().enumerate() {
        by_output.entry(pr.output).or_default().push(n);
    }
    let with_output = |c: Color| by_output.get(&c).map(Vec::as_slice).unwrap_or(&[]);

    let mut unit_law = Ok(());
    'u: for (pr, i) in &basis {
        let x = p.basis_elem(pr, *i);
        let left = p.compose(&p.unit(pr.output), 0, &x);
        if left.as_ref().ok() != Some(&x) {
            unit_law = Err(format!("id∘{} ≠ itself", basis_str(p, pr, *i)));
            break;
        }
        for (k, &c) in pr.inputs.iter().enumerate() {
            if p.compose(&x, k, &p.unit(c)).ok().as_ref() != Some(&x) {
                unit_law = Err(format!("{}∘{k} id ≠ itself", basis_str(p, pr, *i)));
                break 'u;
            }
        }
    }
    r.record("unit laws", unit_law);

    let mut deriv = Ok(());
    let mut seq = Ok(());
    let mut par = Ok(());
    'outer: for (px, a) in &basis {
        let x = p.basis_elem(px, *a);
        for i in 0..px.arity() {
            for &ny in with_output(px.inputs[i]) {
                let (py, b) = &basis[ny];
                let y = p.basis_elem(py, *b);
                if !fits(&px.graft(i, py)) {
                    continue;
                }
                let xy = p.compose(&x, i, &y).unwrap();
                if deriv.is_ok() {
                    let mut rhs = p.compose(&p.d(&x), i, &y).unwrap();
                    rhs.add_assign(
                        &qs(sign_pow(deg(px, *a) as i64)),
                        &p.compose(&x, i, &p.d(&y)).unwrap(),
                    );
                    if p.d(&xy) != rhs {
                        deriv = Err(format!(
                            "d({}∘{i}{})",
                            basis_str(p, px, *a),
                            basis_str(p, py, *b)
                        ));
                    }
                }
                // sequential: (x∘_i y)∘_{i+j} z = x∘_i (y∘_j z)
                for j in 0..py.arity() {
                    for &nz in with_output(py.inputs[j]) {
                        let (pz, c) = &basis[nz];
                        let z = p.basis_elem(pz, *c);
                        if !fits(&xy.profile.graft(i + j, pz)) {
                            continue;
                        }
                        let lhs = p.compose(&xy, i + j, &z).unwrap();
                        let rhs = p.compose(&x, i, &p.compose(&y, j, &z).unwrap()).unwrap();
                        if lhs != rhs {
                            seq = Err(format!(
                                "({}∘{i}{})∘{} {}",
                                basis_str(p, px, *a),
                                basis_str(p, py, *b),
                                i + j,
                                basis_str(p, pz, *c)
                            ));
                            break 'outer;
                        }
                    }
                }
                // parallel: (x∘_i y)∘_{k+m-1} z = ±(x∘_k z)∘_i y for i < k
                let m = py.arity();
                for k in i + 1..px.arity() {
                    for &nz in with_output(px.inputs[k]) {
                        let (pz, c) = &basis[nz];
                        let z = p.basis_elem(pz, *c);
                        if !fits(&xy.profile.graft(k + m - 1, pz)) || !fits(&px.graft(k, pz)) {
                            continue;
                        }
                        let lhs = p.compose(&xy, k + m - 1, &z).unwrap();
                        let xz = p.compose(&x, k, &z).unwrap();
                        let mut rhs = p.compose(&xz, i, &y).unwrap();
                        rhs = rhs.scaled(&qs(sign_pow(deg(py, *b) as i64 * deg(pz, *c) as i64)));
                        if lhs != rhs {
                            par = Err(format!(
                                "{} with {} at {i} and {} at {k}",
                                basis_str(p, px, *a),
                                basis_str(p, py, *b),
                                basis_str(p, pz, *c)
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    r.record("d is a derivation of every ∘_i", deriv);
    r.record("sequential associativity", seq);
    r.record("parallel associativity", par);

    let mut action = Ok(());
    let mut equiv = Ok(());
    'act: for (px, a) in &basis {
        let x = p.basis_elem(px, *a);
        // adjacent transpositions generate; the laws below are closed under products
        let gens = transpositions(px.arity());
        let perms = permutations_to_test(px.arity(), &gens);
        for s in &perms {
            let generator = gens.contains(s) || s.iter().enumerate().all(|(i, &o)| i == o);
            let xs = match p.act(&x, s) {
                Ok(v) => v,
                Err(e) => {
                    action = Err(e.to_string());
                    break 'act;
                }
            };
            if generator && p.d(&xs) != p.act(&p.d(&x), s).unwrap() {
                action = Err(format!(
                    "d does not commute with {s:?} on {}",
                    basis_str(p, px, *a)
                ));
                break 'act;
            }
            for t in &gens {
                if p.act(&xs, t).unwrap() != p.act(&x, &compose_perm(s, t)).unwrap() {
                    action = Err(format!("{s:?} then {t:?} on {}", basis_str(p, px, *a)));
                    break 'act;
                }
            }
            if !generator {
                continue;
            }
            for k in 0..px.arity() {
                for &ny in with_output(xs.profile.inputs[k]) {
                    let (py, b) = &basis[ny];
                    let y = p.basis_elem(py, *b);
                    let m = py.arity();
                    if !fits(&xs.profile.graft(k, py)) {
                        continue;
                    }
                    // (x·σ)∘_k y = (x∘_{σ(k)} y)·σ̃
                    let lhs = p.compose(&xs, k, &y).unwrap();
                    let j = s[k];
                    let pos = |o: usize| if o < j { o } else { o + m - 1 };
                    let mut tilde: Vec<usize> = s[..k].iter().map(|&o| pos(o)).collect();
                    tilde.extend((0..m).map(|r| j + r));
                    tilde.extend(s[k + 1..].iter().map(|&o| pos(o)));
                    let rhs = p.act(&p.compose(&x, j, &y).unwrap(), &tilde).unwrap();
                    if lhs != rhs {
                        equiv = Err(format!(
                            "({}·{s:?})∘{k}{}",
                            basis_str(p, px, *a),
                            basis_str(p, py, *b)
                        ));
                        break 'act;
                    }
                    if *s == (0..px.arity()).collect::<Vec<_>>() {
                        // x∘_k (y·τ) = (x∘_k y)·(id ⊕ τ ⊕ id)
                        for tau in permutations_to_test(m, &transpositions(m)) {
                            let yt = p.act(&y, &tau).unwrap();
                            if !fits(&px.graft(k, &yt.profile)) {
                                continue;
                            }
                            let lhs = p.compose(&x, k, &yt).unwrap();
                            let mut block: Vec<usize> = (0..k).collect();
                            block.extend(tau.iter().map(|&t| t + k));
                            block.extend(k + m..px.arity() + m - 1);
                            let rhs = p.act(&p.compose(&x, k, &y).unwrap(), &block).unwrap();
                            if lhs != rhs {
                                equiv = Err(format!(
                                    "{}∘{k}({}·{tau:?})",
                                    basis_str(p, px, *a),
                                    basis_str(p, py, *b)
                                ));
                                break 'act;
                            }
                        }
                    }
                }
            }
        }
    }
    r.record("right action commuting with d", action);
    r.record("equivariance of ∘_i", equiv);
    r
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum MorphKind {
    Identity,
    Tree(TreeMap),
    Table(BTreeMap<Profile, Matrix>),
}

/// Degree-0 map of operads over a color map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperadMorphism {
    pub source: DgColoredOperad,
    pub target: DgColoredOperad,
    pub color_map: Vec<Color>,
    kind: MorphKind,
}

impl OperadMorphism {
    pub fn identity(p: &DgColoredOperad) -> Self {
        OperadMorphism {
            source: p.clone(),
            target: p.clone(),
            color_map: (0..p.n_colors()).collect(),
            kind: MorphKind::Identity,
        }
    }

    /// KΩ(S) → KΩ(T) induced by a tree map S → T.
    pub fn from_tree_map(m: &TreeMap) -> Self {
        OperadMorphism {
            source: DgColoredOperad::tree_operad(&m.source),
            target: DgColoredOperad::tree_operad(&m.target),
            color_map: m.edge_map.clone(),
            kind: MorphKind::Tree(m.clone()),
        }
    }

    /// Per source profile, a matrix into the image component; absent = zero.
    pub fn from_table(
        source: &DgColoredOperad,
        target: &DgColoredOperad,
        color_map: Vec<Color>,
        maps: BTreeMap<Profile, Matrix>,
    ) -> Result<Self> {
        if color_map.len() != source.n_colors() || color_map.iter().any(|&c| c >= target.n_colors())
        {
            return Err(Error::Color(
                "color map must send every source color to a target color".into(),
            ));
        }
        let f = OperadMorphism {
            source: source.clone(),
            target: target.clone(),
            color_map,
            kind: MorphKind::Table(BTreeMap::new()),
        };
        for (p, m) in &maps {
            let tp = f.image_profile(p);
            if m.cols() != source.dim(p) || m.rows() != target.dim(&tp) {
                return Err(Error::Dimension(format!("map on {p} has the wrong shape")));
            }
            let (Some(sc), Some(tc)) = (source.component(p), target.component(&tp)) else {
                return Err(Error::Missing(format!("component {p} or its image")));
            };
            for (i, j, _) in m.entries() {
                if sc.space().degree(j) != tc.space().degree(i) {
                    return Err(Error::Dimension(format!("map on {p} is not of degree 0")));
                }
            }
        }
        Ok(OperadMorphism {
            kind: MorphKind::Table(maps),
            ..f
        })
    }

    pub fn image_profile(&self, p: &Profile) -> Profile {
        Profile::new(
            p.inputs.iter().map(|&c| self.color_map[c]).collect(),
            self.color_map[p.output],
        )
    }

    /// Matrix of the map on one source component.
    pub fn matrix(&self, p: &Profile) -> Matrix {
        let tp = self.image_profile(p);
        let (n, m) = (self.target.dim(&tp), self.source.dim(p));
        match &self.kind {
            MorphKind::Identity => Matrix::identity(m),
            MorphKind::Tree(_) => {
                let mut x = Matrix::zero(n, m);
                if n == 1 && m == 1 {
                    x.set(0, 0, Q::one());
                }
                x
            }
            MorphKind::Table(t) => t.get(p).cloned().unwrap_or_else(|| Matrix::zero(n, m)),
        }
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        let tp = self.image_profile(&x.profile);
        if self.target.component(&tp).is_none() {
            if x.is_zero() {
                return Ok(Elem::zero(tp, 0));
            }
            return Err(Error::Missing(format!("image component {tp}")));
        }
        Ok(Elem {
            v: self.matrix(&x.profile).apply(&x.v),
            profile: tp,
        })
    }

    /// Replace the map on one component (for fault injection and tests).
    pub fn with_matrix(&self, p: &Profile, m: Matrix) -> Self {
        let mut maps: BTreeMap<Profile, Matrix> = self
            .source
            .all_profiles()
            .into_iter()
            .map(|pr| (pr.clone(), self.matrix(&pr)))
            .collect();
        maps.insert(p.clone(), m);
        OperadMorphism {
            kind: MorphKind::Table(maps),
            ..self.clone()
        }
    }
}

pub fn check_operad_morphism(f: &OperadMorphism) -> Report {
    let src = &f.source;
    let tgt = &f.target;
    let mut r = Report::new().bound("arity", src.arity_bound());
    let profiles = src.all_profiles();
    let basis: Vec<(Profile, usize)> = profiles
        .iter()
        .flat_map(|pr| (0..src.dim(pr)).map(move |i| (pr.clone(), i)))
        .collect();
    let img = |x: &Elem| f.apply(x);

    let mut units = Ok(());
    for c in 0..src.n_colors() {
        if img(&src.unit(c)).ok() != Some(tgt.unit(f.color_map[c])) {
            units = Err(format!("unit of color {c}"));
            break;
        }
    }
    r.record("preserves units", units);

    let mut dcomm = Ok(());
    let mut act = Ok(());
    for (p, i) in &basis {
        let x = src.basis_elem(p, *i);
        let Ok(fx) = img(&x) else {
            dcomm = Err(format!("no image for {}", basis_str(src, p, *i)));
            break;
        };
        if img(&src.d(&x)).ok() != Some(tgt.d(&fx)) {
            dcomm = Err(format!("d on {}", basis_str(src, p, *i)));
            break;
        }
        for s in all_permutations(p.arity()) {
            let lhs = src.act(&x, &s).and_then(|y| img(&y));
            let rhs = tgt.act(&fx, &s);
            if lhs.ok() != rhs.ok() {
                act = Err(format!("{s:?} on {}", basis_str(src, p, *i)));
            }
        }
    }
    r.record("commutes with d", dcomm);
    r.record("commutes with the action", act);

    let mut comp = Ok(());
    'c: for (px, a) in &basis {
        let x = src.basis_elem(px, *a);
        for (py, b) in &basis {
            for i in 0..px.arity() {
                if px.inputs[i] != py.output || src.component(&px.graft(i, py)).is_none() {
                    continue;
                }
                let y = src.basis_elem(py, *b);
                let lhs = img(&src.compose(&x, i, &y).unwrap());
                let rhs = tgt.compose(&img(&x).unwrap(), i, &img(&y).unwrap());
                if lhs.ok() != rhs.ok() {
                    comp = Err(format!(
                        "{}∘{i}{}",
                        basis_str(src, px, *a),
                        basis_str(src, py, *b)
                    ));
                    break 'c;
                }
            }
        }
    }
    r.record("commutes with ∘_i", comp);
    r
}

/// H₀ of every component with the induced products, as a table operad
/// concentrated in degree 0.
pub fn h0_of_operad(p: &DgColoredOperad) -> Result<DgColoredOperad> {
    let (lo, hi) = p.window();
    if lo > -1 || hi < 1 {
        return Err(Error::OutOfWindow {
            degree: if lo > -1 { -1 } else { 1 },
            lo,
            hi,
        });
    }
    struct H0 {
        reps: Vec<Vec<Q>>,
        // boundaries first, then representatives
        span: Span,
        nb: usize,
    }
    let profiles = p.all_profiles();
    let mut h: BTreeMap<Profile, H0> = BTreeMap::new();
    let mut table = Table::default();
    for pr in &profiles {
        let c = p.component(pr).unwrap();
        let hom = c.homology(0)?;
        let bounds: Vec<Vec<Q>> = c
            .space()
            .in_degree(1)
            .into_iter()
            .map(|j| c.d().column(j))
            .collect();
        let mut span = Span::new(c.dim());
        for b in &bounds {
            span.insert(b);
        }
        let nb = bounds.len();
        for z in &hom.representatives {
            span.insert(z);
        }
        let labels = (0..hom.dim).map(|k| (format!("[{k}]"), 0)).collect();
        if hom.dim > 0 {
            table.components.insert(
                pr.clone(),
                ChainComplex::zero_differential(GradedSpace::new(labels, (-1, 1))?),
            );
        }
        h.insert(
            pr.clone(),
            H0 {
                reps: hom.representatives,
                span,
                nb,
            },
        );
    }
    let project = |pr: &Profile, v: &[Q]| -> Result<SparseVec> {
        let e = &h[pr];
        let c = e
            .span
            .coords(v)
            .ok_or_else(|| Error::NotComplex("H₀ projection of a non-cycle".into()))?;
        Ok(to_sparse(&c[e.nb..]))
    };
    for c in 0..p.n_colors() {
        let up = Profile::unit(c);
        let u = project(&up, &p.unit(c).v)?;
        table
            .units
            .push(crate::linalg::to_dense(&u, h[&up].reps.len()));
    }
    for px in &profiles {
        for py in &profiles {
            for i in 0..px.arity() {
                let pr = px.graft(i, py);
                if px.inputs[i] != py.output || !h.contains_key(&pr) {
                    continue;
                }
                let mut entries = BTreeMap::new();
                for (a, za) in h[px].reps.iter().enumerate() {
                    for (b, zb) in h[py].reps.iter().enumerate() {
                        let x = Elem {
                            profile: px.clone(),
                            v: za.clone(),
                        };
                        let y = Elem {
                            profile: py.clone(),
                            v: zb.clone(),
                        };
                        let r = project(&pr, &p.compose(&x, i, &y)?.v)?;
                        if !r.is_empty() {
                            entries.insert((a, b), r);
                        }
                    }
                }
                if !entries.is_empty() {
                    table.comps.insert((px.clone(), i, py.clone()), entries);
                }
            }
        }
    }
    for pr in &profiles {
        if h[pr].reps.is_empty() {
            continue;
        }
        for s in all_permutations(pr.arity()) {
            let ps = pr.permuted(&s);
            let mut m = Matrix::zero(h[&ps].reps.len(), h[pr].reps.len());
            for (j, z) in h[pr].reps.iter().enumerate() {
                let y = p.act(
                    &Elem {
                        profile: pr.clone(),
                        v: z.clone(),
                    },
                    &s,
                )?;
                for (i, x) in project(&ps, &y.v)? {
                    m.set(i, j, x);
                }
            }
            table.actions.insert((pr.clone(), s), m);
        }
    }
    DgColoredOperad::from_table(p.color_names().to_vec(), table)
}

/// ℚ·id ⊕ V with every product of two V elements zero. Each listed
/// component must have distinct basis labels from the unit `id_c`, and the
/// symmetric action is by matching basis positions.
pub fn square_zero(
    color_names: Vec<String>,
    extra: BTreeMap<Profile, ChainComplex>,
) -> Result<DgColoredOperad> {
    let mut table = Table::default();
    let n = color_names.len();
    for c in 0..n {
        let up = Profile::unit(c);
        let unit_label = (format!("id_{}", color_names[c]), 0);
        let comp = match extra.get(&up) {
            Some(v) => {
                let mut basis = vec![unit_label];
                basis.extend(v.space().basis().iter().cloned());
                let (lo, hi) = v.space().window();
                let space = GradedSpace::new(basis, (lo.min(-1), hi.max(1)))?;
                let k = v.dim();
                let mut d = Matrix::zero(k + 1, k + 1);
                for (i, j, x) in v.d().entries() {
                    d.set(i + 1, j + 1, x.clone());
                }
                ChainComplex::new(space, d)?
            }
            None => ChainComplex::zero_differential(GradedSpace::new(vec![unit_label], (-1, 1))?),
        };
        table.components.insert(up, comp);
        table.units.push(crate::linalg::unit_vec(
            table.components[&Profile::unit(c)].dim(),
            0,
        ));
    }
    for (p, v) in extra {
        if p.arity() == 1 && p.inputs[0] == p.output {
            continue;
        }
        table.components.insert(p, v);
    }
    table.fill_unit_laws();
    DgColoredOperad::from_table(color_names, table)
}

pub fn single_complex(basis: &[(&str, i32)], d: &[(usize, usize, i64)]) -> Result<ChainComplex> {
    let space = GradedSpace::finite(basis.iter().map(|(l, g)| (l.to_string(), *g)).collect())?;
    let mut m = Matrix::zero(space.dim(), space.dim());
    for &(i, j, x) in d {
        m.set(i, j, q(x));
    }
    ChainComplex::new(space, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_tree;

    fn v2() -> ChainComplex {
        // x in degree 0, y in degree 1, d y = x
        single_complex(&[("x", 0), ("y", 1)], &[(0, 1, 1)]).unwrap()
    }

    #[test]
    fn end_of_line_is_one_dimensional() {
        let v = single_complex(&[("x", 0)], &[]).unwrap();
        let e = DgColoredOperad::endomorphism(&v, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(e.dim(&Profile::new(vec![0; n], 0)), 1);
        }
        assert_eq!(e.unit(0).v, vec![q(1)]);
    }

    #[test]
    fn end_axioms_hold() {
        let e = DgColoredOperad::endomorphism(&v2(), 3).unwrap();
        let r = check_operad_axioms(&e);
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn tree_operad_axioms_and_counts() {
        let (t, _) = parse_tree("((| |) |)").unwrap();
        let p = DgColoredOperad::tree_operad(&t);
        assert_eq!(
            p.profiles().len(),
            t.n_edges() + t.enumerate_subtrees().len()
        );
        let r = check_operad_axioms(&p);
        assert!(r.passed(), "{}", r.to_json());
        // the two generators compose to the whole tree
        let top = Elem {
            profile: Profile::new(vec![2, 3], 1),
            v: vec![q(1)],
        };
        let bottom = Elem {
            profile: Profile::new(vec![1, 4], 0),
            v: vec![q(1)],
        };
        let whole = p.compose(&bottom, 0, &top).unwrap();
        assert_eq!(whole.profile, Profile::new(vec![2, 3, 4], 0));
        assert_eq!(whole.v, vec![q(1)]);
    }

    #[test]
    fn corrupted_product_is_caught() {
        let e = DgColoredOperad::endomorphism(&v2(), 2).unwrap();
        let mut t = e.to_table();
        let key = t
            .comps
            .keys()
            .find(|(px, _, py)| px.arity() == 2 && py.arity() == 1)
            .unwrap()
            .clone();
        let entry = t.comps.get_mut(&key).unwrap();
        let (k, v) = entry.iter_mut().find(|(_, v)| !v.is_empty()).unwrap();
        let _ = k;
        for x in v.values_mut() {
            *x = -x.clone();
        }
        let bad = DgColoredOperad::from_table(e.color_names().to_vec(), t).unwrap();
        assert!(!check_operad_axioms(&bad).passed());
    }

    #[test]
    fn h0_of_acyclic_end() {
        let e = DgColoredOperad::endomorphism(&v2(), 2).unwrap();
        let h = h0_of_operad(&e).unwrap();
        // V is acyclic, so End(V) is acyclic in every arity
        assert!(h.all_profiles().is_empty() || h.all_profiles().iter().all(|p| h.dim(p) == 0));
    }
}
