//! The Boardman–Vogt resolution W_H(T) of KΩ(T), realized on labelings of
//! inner edges by the interval H, its cosimplicial structure in T, and the
//! comparison of its dg morphisms with dendrices.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::hops::SuHomotopyOperad;
use crate::linalg::{perm_sign, q, qs, sign_pow, ChainComplex, GradedSpace, Matrix, Q};
use crate::nerve::{
    check_dendrex, colorings, composite_dendrex, key_profile, key_str, keys, random_dendrex,
    Dendrex, Key,
};
use crate::operads::{Color, DgColoredOperad, Elem};
use crate::report::Report;
use crate::trees::{bit, bits, popcount, ESet, Tree, TreeMap, VSet};

/// Basis of the interval H: h₀, h₁ in degree 0 and h in degree 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntervalH {
    H0,
    H,
    H1,
}

impl IntervalH {
    pub const ALL: [IntervalH; 3] = [IntervalH::H0, IntervalH::H, IntervalH::H1];

    pub fn degree(self) -> i32 {
        match self {
            IntervalH::H => 1,
            _ => 0,
        }
    }

    /// d(h) = h₁ − h₀.
    pub fn d(self) -> Vec<(IntervalH, i32)> {
        match self {
            IntervalH::H => vec![(IntervalH::H1, 1), (IntervalH::H0, -1)],
            _ => vec![],
        }
    }

    /// The product ∨; `None` is zero.
    pub fn vee(self, other: IntervalH) -> Option<IntervalH> {
        use IntervalH::*;
        match (self, other) {
            (H0, x) | (x, H0) => Some(x),
            (H1, H1) => Some(H1),
            _ => None,
        }
    }

    pub fn eps(self) -> i32 {
        match self {
            IntervalH::H => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for IntervalH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalH::H0 => "h0",
            IntervalH::H => "h",
            IntervalH::H1 => "h1",
        })
    }
}

/// Unit, Leibniz and counit laws of (H, ∨, ε).
pub fn check_interval() -> Report {
    use IntervalH::*;
    let mut r = Report::new();
    let mul = |a: &BTreeMap<IntervalH, i32>, b: &BTreeMap<IntervalH, i32>| {
        let mut out = BTreeMap::new();
        for (&x, &cx) in a {
            for (&y, &cy) in b {
                if let Some(z) = x.vee(y) {
                    *out.entry(z).or_insert(0) += cx * cy;
                }
            }
        }
        out.retain(|_, c| *c != 0);
        out
    };
    let single = |x: IntervalH| -> BTreeMap<IntervalH, i32> { [(x, 1)].into_iter().collect() };
    let dd = |x: IntervalH| -> BTreeMap<IntervalH, i32> { x.d().into_iter().collect() };
    let mut leibniz = Ok(());
    let mut comm = Ok(());
    let mut assoc = Ok(());
    for a in IntervalH::ALL {
        for b in IntervalH::ALL {
            let lhs: BTreeMap<IntervalH, i32> = match a.vee(b) {
                Some(z) => dd(z),
                None => BTreeMap::new(),
            };
            let mut rhs = mul(&dd(a), &single(b));
            for (z, c) in mul(&single(a), &dd(b)) {
                *rhs.entry(z).or_insert(0) += sign_pow(a.degree() as i64) * c;
            }
            rhs.retain(|_, c| *c != 0);
            if lhs != rhs {
                leibniz = Err(format!("d({a}∨{b})"));
            }
            // graded commutativity: the only odd pair h∨h vanishes
            if a.vee(b) != b.vee(a) {
                comm = Err(format!("{a}∨{b}"));
            }
            for c in IntervalH::ALL {
                let l = a.vee(b).and_then(|x| x.vee(c));
                let rr = b.vee(c).and_then(|x| a.vee(x));
                if l != rr {
                    assoc = Err(format!("({a}∨{b})∨{c}"));
                }
            }
        }
    }
    r.record(
        "h0 is a unit",
        if IntervalH::ALL.iter().all(|&x| H0.vee(x) == Some(x)) {
            Ok(())
        } else {
            Err("h0".into())
        },
    );
    r.record(
        "h1 is idempotent and h is nilpotent",
        if H1.vee(H1) == Some(H1) && H.vee(H).is_none() && H.vee(H1).is_none() {
            Ok(())
        } else {
            Err("table".into())
        },
    );
    r.record("d is a derivation for the product", leibniz);
    r.record("the product is commutative", comm);
    r.record("the product is associative", assoc);
    let eps_chain = IntervalH::ALL
        .iter()
        .all(|&x| x.d().iter().map(|&(y, c)| c * y.eps()).sum::<i32>() == 0);
    r.record(
        "the counit is a chain map",
        if eps_chain {
            Ok(())
        } else {
            Err("ε∘d".into())
        },
    );
    r
}

/// A component of W_H(T): the unit of an edge or a sub-tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comp {
    Unit(usize),
    Sub(VSet),
}

/// A labeled sub-tree: the inner edges of the component with their labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BvBasis {
    pub comp: Comp,
    pub labels: BTreeMap<usize, IntervalH>,
}

pub type BvVec = BTreeMap<BvBasis, Q>;

fn add_term(v: &mut BvVec, b: BvBasis, c: Q) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(b.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&b);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BVOperad {
    tree: Tree,
    /// Rank of each inner edge in the fixed depth-first order.
    pos: Vec<usize>,
}

impl BVOperad {
    pub fn build(t: &Tree) -> Self {
        let mut pos = vec![usize::MAX; t.n_edges()];
        for (i, e) in t.canonical_orders().1.into_iter().enumerate() {
            pos[e] = i;
        }
        BVOperad {
            tree: t.clone(),
            pos,
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn edge_rank(&self, e: usize) -> usize {
        self.pos[e]
    }

    pub fn components(&self) -> Vec<Comp> {
        let mut out: Vec<Comp> = (0..self.tree.n_edges()).map(Comp::Unit).collect();
        let mut subs = self.tree.enumerate_subtrees();
        subs.sort_by_key(|&s| (popcount(s), s));
        out.extend(subs.into_iter().map(Comp::Sub));
        out
    }

    pub fn inner(&self, c: Comp) -> ESet {
        match c {
            Comp::Unit(_) => 0,
            Comp::Sub(s) => self.tree.subtree_inner(s),
        }
    }

    pub fn root(&self, c: Comp) -> usize {
        match c {
            Comp::Unit(e) => e,
            Comp::Sub(s) => self.tree.subtree_root(s),
        }
    }

    pub fn leaves(&self, c: Comp) -> Vec<usize> {
        match c {
            Comp::Unit(e) => vec![e],
            Comp::Sub(s) => self.tree.subtree_leaves(s),
        }
    }

    fn ordered(&self, edges: ESet) -> Vec<usize> {
        let mut v: Vec<usize> = bits(edges).collect();
        v.sort_by_key(|&e| self.pos[e]);
        v
    }

    /// All 3^{#inner} labelings of the component.
    pub fn basis(&self, c: Comp) -> Vec<BvBasis> {
        let edges = self.ordered(self.inner(c));
        let mut out = vec![BTreeMap::new()];
        for &e in &edges {
            out = out
                .into_iter()
                .flat_map(|l: BTreeMap<usize, IntervalH>| {
                    IntervalH::ALL.into_iter().map(move |h| {
                        let mut l = l.clone();
                        l.insert(e, h);
                        l
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|labels| BvBasis { comp: c, labels })
            .collect()
    }

    pub fn degree(&self, b: &BvBasis) -> i32 {
        b.labels.values().filter(|&&h| h == IntervalH::H).count() as i32
    }

    /// The generator e_t for t = (S, C): h on C, h₀ on the other inner edges.
    pub fn generator(&self, (s, c): Key) -> BvBasis {
        let labels = bits(self.tree.subtree_inner(s))
            .map(|e| {
                (
                    e,
                    if c & bit(e) != 0 {
                        IntervalH::H
                    } else {
                        IntervalH::H0
                    },
                )
            })
            .collect();
        BvBasis {
            comp: Comp::Sub(s),
            labels,
        }
    }

    pub fn unit(&self, e: usize) -> BvBasis {
        BvBasis {
            comp: Comp::Unit(e),
            labels: BTreeMap::new(),
        }
    }

    /// d = Σ over h-labeled edges a of (−1)^{#h before a}((a ↦ h₁) − (a ↦ h₀)).
    pub fn d(&self, b: &BvBasis) -> BvVec {
        let mut out = BvVec::new();
        let hs: Vec<usize> = self.ordered(
            b.labels
                .iter()
                .filter(|(_, &h)| h == IntervalH::H)
                .fold(0, |acc, (&e, _)| acc | bit(e)),
        );
        for (k, &a) in hs.iter().enumerate() {
            for (h, c) in IntervalH::H.d() {
                let mut nb = b.clone();
                nb.labels.insert(a, h);
                add_term(&mut out, nb, qs(sign_pow(k as i64) * c));
            }
        }
        out
    }

    pub fn d_vec(&self, v: &BvVec) -> BvVec {
        let mut out = BvVec::new();
        for (b, c) in v {
            for (nb, x) in self.d(b) {
                add_term(&mut out, nb, c * x);
            }
        }
        out
    }

    /// Koszul sign taking the h-edges of `first` followed by those of
    /// `second` into the global order.
    fn merge_sign(
        &self,
        first: &BTreeMap<usize, IntervalH>,
        second: &BTreeMap<usize, IntervalH>,
    ) -> i32 {
        let hs: Vec<usize> = self
            .ordered(
                first
                    .iter()
                    .filter(|(_, &h)| h == IntervalH::H)
                    .fold(0, |a, (&e, _)| a | bit(e)),
            )
            .into_iter()
            .chain(
                self.ordered(
                    second
                        .iter()
                        .filter(|(_, &h)| h == IntervalH::H)
                        .fold(0, |a, (&e, _)| a | bit(e)),
                ),
            )
            .collect();
        let mut perm: Vec<usize> = (0..hs.len()).collect();
        perm.sort_by_key(|&i| self.pos[hs[i]]);
        perm_sign(&perm)
    }

    /// Grafting y onto the leaf `a` of x; the new inner edge is labeled h₁.
    pub fn compose(&self, x: &BvBasis, a: usize, y: &BvBasis) -> Result<(BvBasis, i32)> {
        if !self.leaves(x.comp).contains(&a) || self.root(y.comp) != a {
            return Err(Error::Color(format!(
                "cannot graft {} onto edge {a} of {}",
                self.name(y),
                self.name(x)
            )));
        }
        match (x.comp, y.comp) {
            (Comp::Unit(_), _) => Ok((y.clone(), 1)),
            (_, Comp::Unit(_)) => Ok((x.clone(), 1)),
            (Comp::Sub(s1), Comp::Sub(s2)) => {
                let mut labels = x.labels.clone();
                labels.extend(y.labels.iter().map(|(&e, &h)| (e, h)));
                labels.insert(a, IntervalH::H1);
                Ok((
                    BvBasis {
                        comp: Comp::Sub(s1 | s2),
                        labels,
                    },
                    self.merge_sign(&x.labels, &y.labels),
                ))
            }
        }
    }

    pub fn compose_vec(&self, x: &BvVec, a: usize, y: &BvVec) -> Result<BvVec> {
        let mut out = BvVec::new();
        for (bx, cx) in x {
            for (by, cy) in y {
                let (b, s) = self.compose(bx, a, by)?;
                add_term(&mut out, b, cx * cy * qs(s));
            }
        }
        Ok(out)
    }

    pub fn name(&self, b: &BvBasis) -> String {
        match b.comp {
            Comp::Unit(e) => format!("1_{e}"),
            Comp::Sub(s) => {
                let vs: Vec<String> = bits(s).map(|v| v.to_string()).collect();
                let ls: Vec<String> = self
                    .ordered(self.inner(b.comp))
                    .iter()
                    .map(|e| format!("{e}:{}", b.labels[e]))
                    .collect();
                format!("[{}|{}]", vs.join(","), ls.join(","))
            }
        }
    }

    /// The component as a chain complex on the labeling basis.
    pub fn chain_complex(&self, c: Comp) -> Result<ChainComplex> {
        let basis = self.basis(c);
        let index: BTreeMap<&BvBasis, usize> =
            basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let n = popcount(self.inner(c)) as i32;
        let space = GradedSpace::new(
            basis
                .iter()
                .map(|b| (self.name(b), self.degree(b)))
                .collect(),
            (0, n.max(0)),
        )?;
        let mut d = Matrix::zero(basis.len(), basis.len());
        for (j, b) in basis.iter().enumerate() {
            for (nb, x) in self.d(b) {
                d.set(index[&nb], j, x);
            }
        }
        ChainComplex::new(space, d)
    }
}

/// d² = 0 on every component.
pub fn check_d_squared(w: &BVOperad) -> Report {
    let mut r = Report::new().bound("vertices", w.tree.n_vertices());
    let mut out = Ok(());
    let mut count = 0usize;
    'outer: for c in w.components() {
        for b in w.basis(c) {
            count += 1;
            let dd = w.d_vec(&w.d(&b));
            if !dd.is_empty() {
                out = Err(format!("d²{} ≠ 0", w.name(&b)));
                break 'outer;
            }
        }
    }
    r.set_bound("basis_elements", count);
    r.record("d² = 0 on the labeling basis", out);
    r
}

fn composable(w: &BVOperad) -> Vec<(Comp, usize, Comp)> {
    let comps = w.components();
    let mut out = Vec::new();
    for &x in &comps {
        for a in w.leaves(x) {
            for &y in &comps {
                if w.root(y) != a {
                    continue;
                }
                if let (Comp::Sub(s1), Comp::Sub(s2)) = (x, y) {
                    if s1 & s2 != 0 {
                        continue;
                    }
                }
                out.push((x, a, y));
            }
        }
    }
    out
}

/// Operad axioms of W_H(T) on the labeling basis: d² = 0, units, Leibniz,
/// sequential and parallel associativity.
pub fn check_bv_operad(w: &BVOperad) -> Result<Report> {
    let mut r = check_d_squared(w);
    let pairs = composable(w);
    let single = |b: BvBasis| -> BvVec { [(b, Q::one())].into_iter().collect() };
    let mut units = Ok(());
    let mut leibniz = Ok(());
    for &(cx, a, cy) in &pairs {
        for x in w.basis(cx) {
            for y in w.basis(cy) {
                let (z, s) = w.compose(&x, a, &y)?;
                let lhs = w.d_vec(&single(z).into_iter().map(|(b, c)| (b, c * qs(s))).collect());
                let mut rhs = w.compose_vec(&w.d(&x), a, &single(y.clone()))?;
                for (b, c) in w.compose_vec(&single(x.clone()), a, &w.d(&y))? {
                    add_term(&mut rhs, b, c * qs(sign_pow(w.degree(&x) as i64)));
                }
                if lhs != rhs && leibniz.is_ok() {
                    leibniz = Err(format!("d({} ∘_{a} {})", w.name(&x), w.name(&y)));
                }
            }
        }
    }
    for c in w.components() {
        for x in w.basis(c) {
            for a in w.leaves(c) {
                if w.compose(&x, a, &w.unit(a))? != (x.clone(), 1) {
                    units = Err(format!("{} ∘ 1", w.name(&x)));
                }
            }
            if w.compose(&w.unit(w.root(c)), w.root(c), &x)? != (x.clone(), 1) {
                units = Err(format!("1 ∘ {}", w.name(&x)));
            }
        }
    }
    r.record("unit laws", units);
    r.record("d is a derivation for grafting", leibniz);
    let mut seq = Ok(());
    let mut par = Ok(());
    for &(cx, a, cy) in &pairs {
        let (Comp::Sub(s1), Comp::Sub(s2)) = (cx, cy) else {
            continue;
        };
        for &(cy2, b, cz) in pairs.iter().filter(|p| p.0 == cy) {
            let Comp::Sub(s3) = cz else { continue };
            if s3 & s1 != 0 {
                continue;
            }
            for x in w.basis(cx) {
                for y in w.basis(cy2) {
                    for z in w.basis(cz) {
                        let (xy, e1) = w.compose(&x, a, &y)?;
                        let (l, e2) = w.compose(&xy, b, &z)?;
                        let (yz, e3) = w.compose(&y, b, &z)?;
                        let (rr, e4) = w.compose(&x, a, &yz)?;
                        if l != rr || e1 * e2 != e3 * e4 {
                            seq = Err(format!(
                                "({} ∘ {}) ∘ {}",
                                w.name(&x),
                                w.name(&y),
                                w.name(&z)
                            ));
                        }
                    }
                }
            }
        }
        // parallel: another leaf of x
        for &(cx2, b, cz) in pairs.iter().filter(|p| p.0 == cx && p.1 != a) {
            let Comp::Sub(s3) = cz else { continue };
            if s3 & s2 != 0 {
                continue;
            }
            for x in w.basis(cx2) {
                for y in w.basis(cy) {
                    for z in w.basis(cz) {
                        let (xy, e1) = w.compose(&x, a, &y)?;
                        let (l, e2) = w.compose(&xy, b, &z)?;
                        let (xz, e3) = w.compose(&x, b, &z)?;
                        let (rr, e4) = w.compose(&xz, a, &y)?;
                        let tw = sign_pow((w.degree(&y) * w.degree(&z)) as i64);
                        if l != rr || e1 * e2 != e3 * e4 * tw {
                            par = Err(format!(
                                "{} with {} and {}",
                                w.name(&x),
                                w.name(&y),
                                w.name(&z)
                            ));
                        }
                    }
                }
            }
        }
    }
    r.record("sequential associativity", seq);
    r.record("parallel associativity", par);
    Ok(r)
}

/// The operad map W_H(S) → W_H(T) induced by a tree map S → T.
#[derive(Clone, Debug)]
pub struct BvMap {
    pub source: BVOperad,
    pub target: BVOperad,
    pub map: TreeMap,
}

pub fn bv_cosimplicial_map(m: &TreeMap) -> BvMap {
    BvMap {
        source: BVOperad::build(&m.source),
        target: BVOperad::build(&m.target),
        map: m.clone(),
    }
}

impl BvMap {
    /// Image of a basis element: labels are carried along, fresh inner edges
    /// get h₀, edges merged by a codegeneracy multiply, and an inner edge
    /// that becomes outer contributes its counit.
    pub fn apply(&self, b: &BvBasis) -> BvVec {
        let (src, tgt, m) = (&self.source, &self.target, &self.map);
        let s = match b.comp {
            Comp::Unit(e) => return [(tgt.unit(m.edge_map[e]), Q::one())].into_iter().collect(),
            Comp::Sub(s) => s,
        };
        let image = m.map_vertices(s);
        if image == 0 {
            // a lone unary vertex labeled by the identity
            let e = m.edge_map[src.tree.vertex(bits(s).next().unwrap()).out];
            return [(tgt.unit(e), Q::one())].into_iter().collect();
        }
        let inner_t = tgt.tree.subtree_inner(image);
        let mut coef = 1;
        let mut merged: BTreeMap<usize, IntervalH> = BTreeMap::new();
        for (&e, &h) in &b.labels {
            let f = m.edge_map[e];
            if inner_t & bit(f) == 0 {
                coef *= h.eps();
                continue;
            }
            match merged.get(&f) {
                None => {
                    merged.insert(f, h);
                }
                Some(&g) => match g.vee(h) {
                    Some(z) => {
                        merged.insert(f, z);
                    }
                    None => coef = 0,
                },
            }
        }
        if coef == 0 {
            return BvVec::new();
        }
        for f in bits(inner_t) {
            merged.entry(f).or_insert(IntervalH::H0);
        }
        // reorder the h labels from source rank to target rank
        let hs: Vec<usize> = src
            .ordered(
                b.labels
                    .iter()
                    .filter(|(_, &h)| h == IntervalH::H)
                    .fold(0, |a, (&e, _)| a | bit(e)),
            )
            .into_iter()
            .map(|e| m.edge_map[e])
            .collect();
        let mut perm: Vec<usize> = (0..hs.len()).collect();
        perm.sort_by_key(|&i| tgt.pos[hs[i]]);
        coef *= perm_sign(&perm);
        [(
            BvBasis {
                comp: Comp::Sub(image),
                labels: merged,
            },
            qs(coef),
        )]
        .into_iter()
        .collect()
    }

    pub fn apply_vec(&self, v: &BvVec) -> BvVec {
        let mut out = BvVec::new();
        for (b, c) in v {
            for (nb, x) in self.apply(b) {
                add_term(&mut out, nb, c * x);
            }
        }
        out
    }
}

/// The induced map is a dg operad morphism: units, d and grafting are preserved.
pub fn check_bv_map(f: &BvMap) -> Result<Report> {
    let mut r = Report::new().bound("source_vertices", f.source.tree.n_vertices());
    let (src, tgt) = (&f.source, &f.target);
    let mut chain = Ok(());
    for c in src.components() {
        for b in src.basis(c) {
            if f.apply_vec(&src.d(&b)) != tgt.d_vec(&f.apply(&b)) {
                chain = Err(format!("d at {}", src.name(&b)));
            }
        }
    }
    r.record("commutes with the differential", chain);
    let mut graft = Ok(());
    for (cx, a, cy) in composable(src) {
        for x in src.basis(cx) {
            for y in src.basis(cy) {
                let (z, s) = src.compose(&x, a, &y)?;
                let lhs: BvVec = f
                    .apply(&z)
                    .into_iter()
                    .map(|(b, c)| (b, c * qs(s)))
                    .collect();
                let rhs = tgt.compose_vec(&f.apply(&x), f.map.edge_map[a], &f.apply(&y))?;
                if lhs != rhs {
                    graft = Err(format!("{} ∘_{a} {}", src.name(&x), src.name(&y)));
                }
            }
        }
    }
    r.record("commutes with grafting", graft);
    Ok(r)
}

/// Composite of two maps evaluated on every basis element, for
/// comparing both sides of a cosimplicial identity.
pub fn compare_composites(first: (&BvMap, &BvMap), second: (&BvMap, &BvMap)) -> bool {
    let src = &first.0.source;
    src.components().into_iter().all(|c| {
        src.basis(c).iter().all(|b| {
            let l = first.1.apply_vec(&first.0.apply(b));
            let r = second.1.apply_vec(&second.0.apply(b));
            l == r
        })
    })
}

/// Images of the generators e_t in P, keyed like dendrices.
pub type Assignment = BTreeMap<Key, Vec<Q>>;

/// Value on any labeled sub-tree of the operad map determined by the
/// generator images: split at the last h₁ edge and compose in P.
pub fn hc_eval(
    w: &BVOperad,
    colors: &[Color],
    g: &Assignment,
    p: &DgColoredOperad,
    b: &BvBasis,
) -> Result<Elem> {
    let t = &w.tree;
    let s = match b.comp {
        Comp::Unit(e) => return Ok(p.unit(colors[e])),
        Comp::Sub(s) => s,
    };
    let last = b
        .labels
        .iter()
        .filter(|(_, &h)| h == IntervalH::H1)
        .map(|(&e, _)| e)
        .max_by_key(|&e| w.pos[e]);
    let Some(a) = last else {
        let c = b
            .labels
            .iter()
            .filter(|(_, &h)| h == IntervalH::H)
            .fold(0, |acc, (&e, _)| acc | bit(e));
        let prof = key_profile(t, colors, (s, c));
        let v = g
            .get(&(s, c))
            .cloned()
            .ok_or_else(|| Error::Missing(format!("no image for {}", key_str((s, c)))))?;
        return Ok(Elem { profile: prof, v });
    };
    let blocks = t.blocks(s, bit(a));
    let (lower, upper) = if t.subtree_root(blocks[0]) == a {
        (blocks[1], blocks[0])
    } else {
        (blocks[0], blocks[1])
    };
    let part = |blk: VSet| -> BTreeMap<usize, IntervalH> {
        let inner = t.subtree_inner(blk);
        b.labels
            .iter()
            .filter(|(&e, _)| inner & bit(e) != 0)
            .map(|(&e, &h)| (e, h))
            .collect()
    };
    let (lx, ly) = (part(lower), part(upper));
    let sign = w.merge_sign(&lx, &ly);
    let x = hc_eval(
        w,
        colors,
        g,
        p,
        &BvBasis {
            comp: Comp::Sub(lower),
            labels: lx,
        },
    )?;
    let y = hc_eval(
        w,
        colors,
        g,
        p,
        &BvBasis {
            comp: Comp::Sub(upper),
            labels: ly,
        },
    )?;
    let slot = t
        .subtree_leaves(lower)
        .iter()
        .position(|&e| e == a)
        .unwrap();
    Ok(p.compose(&x, slot, &y)?.scaled(&qs(sign)))
}

/// Whether the generator images extend to a dg operad map W_H(T) → P:
/// degrees match and d_P g(e_t) = g(d e_t) for every generator.
pub fn hc_dendrex_check(
    t: &Tree,
    colors: &[Color],
    g: &Assignment,
    p: &DgColoredOperad,
) -> Result<Report> {
    if colors.len() != t.n_edges() || colors.iter().any(|&c| c >= p.n_colors()) {
        return Err(Error::Color(
            "the color map must send every edge to a color of the operad".into(),
        ));
    }
    let w = BVOperad::build(t);
    let mut r = Report::new().bound("vertices", t.n_vertices());
    let all = keys(t);
    let mut shapes = Ok(());
    for &k in &all {
        let prof = key_profile(t, colors, k);
        let Some(v) = g.get(&k) else {
            shapes = Err(format!("no image for {}", key_str(k)));
            break;
        };
        if v.len() != p.dim(&prof) {
            shapes = Err(format!("{} has the wrong length", key_str(k)));
            break;
        }
        let want = popcount(k.1) as i32;
        if let Some(i) = (0..v.len()).find(|&i| !v[i].is_zero() && p.degree(&prof, i) != want) {
            shapes = Err(format!(
                "{} has a coordinate b{i} outside degree {want}",
                key_str(k)
            ));
            break;
        }
    }
    r.record("generator images have degree #inner edges", shapes);
    if !r.passed() {
        return Ok(r);
    }
    let mut eq = Ok(());
    for &k in &all {
        let e = w.generator(k);
        let prof = key_profile(t, colors, k);
        let lhs = p.d(&Elem {
            profile: prof.clone(),
            v: g[&k].clone(),
        });
        let mut rhs = Elem::zero(prof, lhs.v.len());
        for (b, c) in w.d(&e) {
            rhs.add_assign(&c, &hc_eval(&w, colors, g, p, &b)?);
        }
        if lhs != rhs {
            eq = Err(format!("at {}: d g(e) ≠ g(d e)", key_str(k)));
            break;
        }
    }
    r.record("compatible with the differential on every generator", eq);
    Ok(r)
}

/// Outcome of comparing the two predicates on a batch of assignments.
#[derive(Clone, Debug)]
pub struct Roundtrip {
    pub report: Report,
    pub tested: usize,
    pub accepted: usize,
}

fn random_in_degree<R: Rng>(
    p: &DgColoredOperad,
    prof: &crate::operads::Profile,
    deg: i32,
    rng: &mut R,
) -> Vec<Q> {
    (0..p.dim(prof))
        .map(|i| {
            if p.degree(prof, i) == deg {
                q(rng.gen_range(-2..=2))
            } else {
                Q::zero()
            }
        })
        .collect()
}

/// Both predicates on the same element families under the dictionary
/// g(e_t) = p_t. Samples mix valid dendrices, single-key perturbations of
/// them, arbitrary degree-correct families, and composites of vertex
/// elements.
pub fn nerve_bv_roundtrip<R: Rng>(
    p: &DgColoredOperad,
    t: &Tree,
    colors: &[Color],
    samples: usize,
    rng: &mut R,
) -> Result<Roundtrip> {
    let su = SuHomotopyOperad::from_dg(p).with_vertex_bound(t.n_vertices().max(2));
    let mut fams: Vec<Assignment> = Vec::new();
    for i in 0..samples {
        let fam = match i % 3 {
            0 => random_dendrex(&su, t, colors, rng)?.elements,
            1 => {
                let mut x = random_dendrex(&su, t, colors, rng)?.elements;
                let ks: Vec<Key> = x.keys().copied().collect();
                let k = ks[rng.gen_range(0..ks.len())];
                let prof = key_profile(t, colors, k);
                let noise = random_in_degree(p, &prof, popcount(k.1) as i32, rng);
                for (a, b) in x.get_mut(&k).unwrap().iter_mut().zip(noise) {
                    *a += b;
                }
                x
            }
            _ => keys(t)
                .into_iter()
                .map(|k| {
                    let prof = key_profile(t, colors, k);
                    (k, random_in_degree(p, &prof, popcount(k.1) as i32, rng))
                })
                .collect(),
        };
        fams.push(fam);
    }
    // composites of degree-0 vertex elements
    let vertex_elems: Vec<Vec<Q>> = (0..t.n_vertices())
        .map(|v| random_in_degree(p, &key_profile(t, colors, (bit(v), 0)), 0, rng))
        .collect();
    fams.push(composite_dendrex(&su, t, colors, &vertex_elems)?.elements);
    let mut r = Report::new()
        .bound("vertices", t.n_vertices())
        .bound("dictionary", "g(e_(S,C)) = p_(S,C)");
    let mut accepted = 0;
    let mut agree = Ok(());
    for fam in &fams {
        let x = Dendrex {
            tree: t.clone(),
            colors: colors.to_vec(),
            elements: fam.clone(),
        };
        let a = check_dendrex(&su, &x)?.passed();
        let b = hc_dendrex_check(t, colors, fam, p)?.passed();
        accepted += a as usize;
        if a != b && agree.is_ok() {
            let ks: Vec<String> = fam
                .iter()
                .map(|(&k, v)| format!("{}={v:?}", key_str(k)))
                .collect();
            agree = Err(format!("dendrex {a}, hc {b} on {}", ks.join(" ")));
        }
    }
    r.set_bound("samples", fams.len());
    r.record("dendrex and homotopy coherent predicates agree", agree);
    Ok(Roundtrip {
        report: r,
        tested: fams.len(),
        accepted,
    })
}

/// Every coloring of `t` the operad can carry within its stored arities.
pub fn hc_colorings(p: &DgColoredOperad, t: &Tree) -> Vec<Vec<Color>> {
    let su = SuHomotopyOperad::from_dg(p).with_vertex_bound(t.n_vertices().max(2));
    colorings(&su, t)
}
