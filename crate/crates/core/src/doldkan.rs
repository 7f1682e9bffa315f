//! Truncated simplicial modules and the Dold–Kan functors, finite
//! simplicial sets (Δ[n], Δ[1]^n, Q[n]) with their normalized chains,
//! Eilenberg–Zilber and Alexander–Whitney maps, the maps α, a, b and the
//! comparison of the two mapping spaces built from them.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};
use rand::Rng;

use crate::bv::IntervalH;
use crate::error::{Error, Result};
use crate::linalg::{
    perm_sign, q, qs, sign_pow, unit_vec, zeros, ChainComplex, GradedSpace, Matrix, Span, Q,
};
use crate::report::Report;

fn vstack(ms: &[&Matrix], cols: usize) -> Matrix {
    let rows: usize = ms.iter().map(|m| m.rows()).sum();
    let mut out = Matrix::zero(rows, cols);
    let mut off = 0;
    for m in ms {
        for (i, j, x) in m.entries() {
            out.set(off + i, j, x.clone());
        }
        off += m.rows();
    }
    out
}

/// Coordinates of `v` on a linearly independent family.
fn coords_in(basis: &[Vec<Q>], dim: usize, v: &[Q]) -> Option<Vec<Q>> {
    Span::from_vectors(dim, basis).coords(v)
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    if m.rows() != m.cols() || m.rank() != m.rows() {
        return None;
    }
    let n = m.rows();
    let cols: Option<Vec<Vec<Q>>> = (0..n).map(|j| m.solve(&unit_vec(n, j)).ok()).collect();
    Some(Matrix::from_columns(n, &cols?))
}

/// A simplicial K-module truncated at level L = dims.len() − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialModule {
    pub dims: Vec<usize>,
    /// faces[n][i]: X_n → X_{n−1}; faces[0] is empty.
    pub faces: Vec<Vec<Matrix>>,
    /// degens[n][i]: X_n → X_{n+1}, for n < L.
    pub degens: Vec<Vec<Matrix>>,
}

/// N(X) with its basis inside X and the differential (−1)^n d_n.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub basis: Vec<Vec<Vec<Q>>>,
    /// diff[n]: N_n → N_{n−1} in basis coordinates; diff[0] has no rows.
    pub diff: Vec<Matrix>,
}

impl Normalized {
    pub fn dim(&self, n: usize) -> usize {
        self.basis[n].len()
    }

    pub fn complex(&self) -> Result<ChainComplex> {
        block_complex(
            &self.basis.iter().map(Vec::len).collect::<Vec<_>>(),
            &self.diff,
            "n",
        )
    }

    /// (cycles, boundaries) in degree j, in basis coordinates.
    pub fn cycles_and_boundaries(&self, j: usize) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
        let z = if j == 0 {
            (0..self.dim(0)).map(|i| unit_vec(self.dim(0), i)).collect()
        } else {
            self.diff[j].kernel()
        };
        let b = if j + 1 < self.diff.len() {
            self.diff[j + 1].image()
        } else {
            vec![]
        };
        (z, b)
    }

    pub fn homology_dim(&self, j: usize) -> usize {
        let (z, b) = self.cycles_and_boundaries(j);
        z.len() - Span::from_vectors(self.dim(j), &b).dim()
    }
}

/// Chain complex with blocks of the given sizes in degrees 0, 1, … and
/// block differentials diff[n]: block n → block n−1.
fn block_complex(dims: &[usize], diff: &[Matrix], prefix: &str) -> Result<ChainComplex> {
    let mut basis = Vec::new();
    let mut off = vec![0];
    for (n, &d) in dims.iter().enumerate() {
        for k in 0..d {
            basis.push((format!("{prefix}{n}.{k}"), n as i32));
        }
        off.push(off[n] + d);
    }
    let total = off[dims.len()];
    let space = GradedSpace::new(basis, (-1, dims.len() as i32))?;
    let mut d = Matrix::zero(total, total);
    for n in 1..dims.len() {
        for (i, j, x) in diff[n].entries() {
            d.set(off[n - 1] + i, off[n] + j, x.clone());
        }
    }
    ChainComplex::new(space, d)
}

/// C/D(X) with the projection from each level and a section.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub dims: Vec<usize>,
    pub proj: Vec<Matrix>,
    pub section: Vec<Vec<Vec<Q>>>,
    pub diff: Vec<Matrix>,
}

impl SimplicialModule {
    pub fn level(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn check_identities(&self) -> Report {
        let l = self.level();
        let mut r = Report::new().bound("level", l);
        let mut faces = Ok(());
        for n in 2..=l {
            for j in 0..=n {
                for i in 0..j {
                    if self.faces[n - 1][i].mul(&self.faces[n][j])
                        != self.faces[n - 1][j - 1].mul(&self.faces[n][i])
                    {
                        faces = Err(format!("d{i} d{j} at level {n}"));
                    }
                }
            }
        }
        let mut degens = Ok(());
        for n in 0..l.saturating_sub(1) {
            for j in 0..=n {
                for i in 0..=j {
                    if self.degens[n + 1][j + 1].mul(&self.degens[n][i])
                        != self.degens[n + 1][i].mul(&self.degens[n][j])
                    {
                        degens = Err(format!("s{j} s{i} at level {n}"));
                    }
                }
            }
        }
        let mut mixed = Ok(());
        for n in 0..l {
            for j in 0..=n {
                for i in 0..=n + 1 {
                    let lhs = self.faces[n + 1][i].mul(&self.degens[n][j]);
                    let rhs = if i == j || i == j + 1 {
                        Matrix::identity(self.dims[n])
                    } else if i < j {
                        self.degens[n - 1][j - 1].mul(&self.faces[n][i])
                    } else {
                        self.degens[n - 1][j].mul(&self.faces[n][i - 1])
                    };
                    if lhs != rhs {
                        mixed = Err(format!("d{i} s{j} at level {n}"));
                    }
                }
            }
        }
        r.record("face identities", faces);
        r.record("degeneracy identities", degens);
        r.record("mixed identities", mixed);
        r
    }

    /// Σ (−1)^i d_i : X_n → X_{n−1}.
    pub fn moore_d(&self, n: usize) -> Matrix {
        let mut m = Matrix::zero(self.dims[n - 1], self.dims[n]);
        for (i, f) in self.faces[n].iter().enumerate() {
            m = m.plus(&f.scale(&qs(sign_pow(i as i64))));
        }
        m
    }

    pub fn moore(&self) -> Result<ChainComplex> {
        let diff: Vec<Matrix> = (0..=self.level())
            .map(|n| {
                if n == 0 {
                    Matrix::zero(0, self.dims[0])
                } else {
                    self.moore_d(n)
                }
            })
            .collect();
        block_complex(&self.dims, &diff, "x")
    }

    pub fn normalized(&self) -> Normalized {
        let mut basis = Vec::new();
        for n in 0..=self.level() {
            let b = if n == 0 {
                (0..self.dims[0])
                    .map(|i| unit_vec(self.dims[0], i))
                    .collect()
            } else {
                let fs: Vec<&Matrix> = self.faces[n][..n].iter().collect();
                if fs.is_empty() {
                    (0..self.dims[n])
                        .map(|i| unit_vec(self.dims[n], i))
                        .collect()
                } else {
                    vstack(&fs, self.dims[n]).kernel()
                }
            };
            basis.push(b);
        }
        let mut diff = vec![Matrix::zero(0, basis[0].len())];
        for n in 1..=self.level() {
            let dn = self.faces[n][n].scale(&qs(sign_pow(n as i64)));
            let cols: Vec<Vec<Q>> = basis[n]
                .iter()
                .map(|v| {
                    coords_in(&basis[n - 1], self.dims[n - 1], &dn.apply(v))
                        .expect("d_n preserves N")
                })
                .collect();
            diff.push(Matrix::from_columns(basis[n - 1].len(), &cols));
        }
        Normalized { basis, diff }
    }

    /// Spanning vectors of D_n, the images of the degeneracies.
    pub fn degenerate(&self, n: usize) -> Vec<Vec<Q>> {
        if n == 0 {
            return vec![];
        }
        let mut span = Span::new(self.dims[n]);
        let mut out = Vec::new();
        for s in &self.degens[n - 1] {
            for j in 0..s.cols() {
                let c = s.column(j);
                if span.insert(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn c_mod_d(&self) -> Quotient {
        let mut dims = Vec::new();
        let mut proj = Vec::new();
        let mut section = Vec::new();
        for n in 0..=self.level() {
            let dn = self.degenerate(n);
            let mut span = Span::from_vectors(self.dims[n], &dn);
            let mut comp = Vec::new();
            for i in 0..self.dims[n] {
                let e = unit_vec(self.dims[n], i);
                if span.insert(&e) {
                    comp.push(e);
                }
            }
            let all: Vec<Vec<Q>> = dn.iter().chain(comp.iter()).cloned().collect();
            let cols: Vec<Vec<Q>> = (0..self.dims[n])
                .map(|i| {
                    let c = coords_in(&all, self.dims[n], &unit_vec(self.dims[n], i)).unwrap();
                    c[dn.len()..].to_vec()
                })
                .collect();
            dims.push(comp.len());
            proj.push(Matrix::from_columns(comp.len(), &cols));
            section.push(comp);
        }
        let mut diff = vec![Matrix::zero(0, dims[0])];
        for n in 1..=self.level() {
            let d = self.moore_d(n);
            let cols: Vec<Vec<Q>> = section[n]
                .iter()
                .map(|v| proj[n - 1].apply(&d.apply(v)))
                .collect();
            diff.push(Matrix::from_columns(dims[n - 1], &cols));
        }
        Quotient {
            dims,
            proj,
            section,
            diff,
        }
    }

    /// The composite N ↪ C ↠ C/D, level by level.
    pub fn n_to_c_mod_d(&self, nz: &Normalized, qt: &Quotient) -> Vec<Matrix> {
        (0..=self.level())
            .map(|n| {
                let cols: Vec<Vec<Q>> = nz.basis[n].iter().map(|v| qt.proj[n].apply(v)).collect();
                Matrix::from_columns(qt.dims[n], &cols)
            })
            .collect()
    }

    /// Change of basis g_n on each level.
    pub fn conjugate(&self, g: &[Matrix]) -> Result<SimplicialModule> {
        let inv: Vec<Matrix> = g
            .iter()
            .map(|m| {
                inverse(m).ok_or_else(|| Error::Invalid("base change is not invertible".into()))
            })
            .collect::<Result<_>>()?;
        let faces = (0..=self.level())
            .map(|n| {
                self.faces[n]
                    .iter()
                    .map(|f| g[n - 1].mul(f).mul(&inv[n]))
                    .collect()
            })
            .collect();
        let degens = (0..self.level())
            .map(|n| {
                self.degens[n]
                    .iter()
                    .map(|s| g[n + 1].mul(s).mul(&inv[n]))
                    .collect()
            })
            .collect();
        Ok(SimplicialModule {
            dims: self.dims.clone(),
            faces,
            degens,
        })
    }

    /// X(η) for a monotone surjection η: [n] ↠ [p], as a map X_p → X_n.
    pub fn degeneracy_operator(&self, eta: &[usize]) -> Matrix {
        let n = eta.len() - 1;
        match (0..n).find(|&i| eta[i] == eta[i + 1]) {
            None => Matrix::identity(self.dims[n]),
            Some(i) => {
                let mut rest = eta.to_vec();
                rest.remove(i + 1);
                self.degens[n - 1][i].mul(&self.degeneracy_operator(&rest))
            }
        }
    }
}

/// Every level, face and degeneracy of both the Moore complex and the
/// normalized one checked: d² = 0, dim C = dim N + dim D, N ≅ C/D.
pub fn moore_and_normalized(x: &SimplicialModule) -> Result<Report> {
    let mut r = x.check_identities();
    let c = x.moore()?;
    r.pass("Moore differential squares to zero");
    let _ = c;
    let nz = x.normalized();
    let qt = x.c_mod_d();
    let mut split = Ok(());
    for n in 0..=x.level() {
        let dn = x.degenerate(n).len();
        if nz.dim(n) + dn != x.dims[n] {
            split = Err(format!("level {n}: {} + {dn} ≠ {}", nz.dim(n), x.dims[n]));
        }
    }
    r.record("dim C = dim N + dim D", split);
    let iso = x.n_to_c_mod_d(&nz, &qt);
    let mut inv = Ok(());
    for (n, m) in iso.iter().enumerate() {
        if inverse(m).is_none() && (m.rows() > 0 || m.cols() > 0) {
            inv = Err(format!("level {n}"));
        }
        if n >= 1 && qt.diff[n].mul(m) != iso[n - 1].mul(&nz.diff[n]) {
            inv = Err(format!("not a chain map at level {n}"));
        }
    }
    r.record("N → C/D is an isomorphism of complexes", inv);
    nz.complex()?;
    Ok(r)
}

/// Monotone surjections from [n], as value vectors η(0..=n).
pub fn surjections(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..1 << n)
        .map(|mask| {
            let mut v = vec![0];
            for i in 0..n {
                v.push(v[i] + ((mask >> i) & 1) as usize);
            }
            v
        })
        .collect();
    out.sort_by_key(|v| (v[n], v.clone()));
    out
}

/// Γ(V) with the summand (η, basis index of V) behind each basis vector.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub module: SimplicialModule,
    pub summands: Vec<Vec<(Vec<usize>, usize)>>,
}

pub fn gamma(v: &ChainComplex, level: usize) -> Result<Gamma> {
    let sp = v.space();
    if let Some(i) = (0..sp.dim()).find(|&i| sp.degree(i) < 0) {
        return Err(Error::Invalid(format!(
            "Γ needs a nonnegatively graded complex; {} has degree {}",
            sp.label(i),
            sp.degree(i)
        )));
    }
    let mut summands: Vec<Vec<(Vec<usize>, usize)>> = Vec::new();
    let mut index: Vec<HashMap<(Vec<usize>, usize), usize>> = Vec::new();
    for n in 0..=level {
        let mut list = Vec::new();
        for eta in surjections(n) {
            for i in sp.in_degree(eta[n] as i32) {
                list.push((eta.clone(), i));
            }
        }
        index.push(
            list.iter()
                .enumerate()
                .map(|(k, s)| (s.clone(), k))
                .collect(),
        );
        summands.push(list);
    }
    let dims: Vec<usize> = summands.iter().map(Vec::len).collect();
    let mut faces = vec![vec![]];
    for n in 1..=level {
        let mut fs = Vec::new();
        for i in 0..=n {
            let mut m = Matrix::zero(dims[n - 1], dims[n]);
            for (col, (eta, vi)) in summands[n].iter().enumerate() {
                let p = eta[n];
                let mut e2 = eta.clone();
                e2.remove(i);
                let covered = (0..=p).all(|x| e2.contains(&x));
                if covered {
                    m.set(index[n - 1][&(e2, *vi)], col, Q::one());
                    continue;
                }
                let j = (0..=p).find(|x| !e2.contains(x)).unwrap();
                if j != p {
                    continue;
                }
                let sign = qs(sign_pow(p as i64));
                for w in sp.in_degree(p as i32 - 1) {
                    let c = v.d().get(w, *vi);
                    if !c.is_zero() {
                        m.add(index[n - 1][&(e2.clone(), w)], col, &c * &sign);
                    }
                }
            }
            fs.push(m);
        }
        faces.push(fs);
    }
    let mut degens = Vec::new();
    for n in 0..level {
        let mut ss = Vec::new();
        for i in 0..=n {
            let mut m = Matrix::zero(dims[n + 1], dims[n]);
            for (col, (eta, vi)) in summands[n].iter().enumerate() {
                let mut e2 = eta.clone();
                e2.insert(i, eta[i]);
                m.set(index[n + 1][&(e2, *vi)], col, Q::one());
            }
            ss.push(m);
        }
        degens.push(ss);
    }
    Ok(Gamma {
        module: SimplicialModule {
            dims,
            faces,
            degens,
        },
        summands,
    })
}

/// N(Γ(V)) is V: the normalized part of level n is exactly the identity
/// summand, carrying the differential of V.
pub fn n_gamma_identity(v: &ChainComplex, level: usize) -> Result<Report> {
    let g = gamma(v, level)?;
    let x = &g.module;
    let nz = x.normalized();
    let sp = v.space();
    let mut r = Report::new().bound("level", level);
    let mut same = Ok(());
    let mut diff = Ok(());
    for n in 0..=level {
        let ident: Vec<usize> = (0..=n).collect();
        let id_vecs: Vec<(usize, Vec<Q>)> = g.summands[n]
            .iter()
            .enumerate()
            .filter(|(_, (eta, _))| *eta == ident)
            .map(|(k, (_, vi))| (*vi, unit_vec(x.dims[n], k)))
            .collect();
        let span = Span::from_vectors(x.dims[n], &nz.basis[n]);
        if id_vecs.len() != nz.dim(n) || id_vecs.iter().any(|(_, e)| !span.contains(e)) {
            same = Err(format!("level {n}"));
        }
        if n == 0 {
            continue;
        }
        let down: Vec<usize> = (0..n).collect();
        let dm = x.moore_d(n);
        for (vi, e) in &id_vecs {
            let mut want = zeros(x.dims[n - 1]);
            for w in sp.in_degree(n as i32 - 1) {
                let c = v.d().get(w, *vi);
                if !c.is_zero() {
                    let k = g.summands[n - 1]
                        .iter()
                        .position(|s| s.0 == down && s.1 == w)
                        .unwrap();
                    want[k] = c;
                }
            }
            if dm.apply(e) != want {
                diff = Err(format!("basis {} at level {n}", sp.label(*vi)));
            }
        }
    }
    r.record("N Γ(V) is the identity summand", same);
    r.record("the differential of N Γ(V) is that of V", diff);
    Ok(r)
}

/// The natural map Γ(N X) → X, v in the η-summand ↦ X(η)(v).
pub fn gamma_n_map(x: &SimplicialModule) -> Result<(Gamma, Vec<Matrix>)> {
    let nz = x.normalized();
    let nc = nz.complex()?;
    let g = gamma(&nc, x.level())?;
    let mut offsets = vec![0];
    for n in 0..=x.level() {
        offsets.push(offsets[n] + nz.dim(n));
    }
    let maps = (0..=x.level())
        .map(|n| {
            let cols: Vec<Vec<Q>> = g.summands[n]
                .iter()
                .map(|(eta, vi)| {
                    let p = eta[n];
                    let v = &nz.basis[p][vi - offsets[p]];
                    x.degeneracy_operator(eta).apply(v)
                })
                .collect();
            Matrix::from_columns(x.dims[n], &cols)
        })
        .collect();
    Ok((g, maps))
}

/// Γ(N X) → X is a simplicial isomorphism.
pub fn gamma_n_iso(x: &SimplicialModule) -> Result<Report> {
    let (g, psi) = gamma_n_map(x)?;
    let y = &g.module;
    let mut r = Report::new().bound("level", x.level());
    let mut inv = Ok(());
    for (n, m) in psi.iter().enumerate() {
        if m.rows() != m.cols() || m.rank() != m.rows() {
            inv = Err(format!(
                "level {n}: {}×{} of rank {}",
                m.rows(),
                m.cols(),
                m.rank()
            ));
        }
    }
    r.record("bijective on every level", inv);
    r.record(
        "commutes with faces and degeneracies",
        simplicial_map_check(y, x, &psi),
    );
    Ok(r)
}

/// Do level maps f_n : X_n → Y_n commute with the structure?
pub fn simplicial_map_check(
    x: &SimplicialModule,
    y: &SimplicialModule,
    f: &[Matrix],
) -> std::result::Result<(), String> {
    for n in 1..=x.level() {
        for i in 0..=n {
            if f[n - 1].mul(&x.faces[n][i]) != y.faces[n][i].mul(&f[n]) {
                return Err(format!("d{i} at level {n}"));
            }
        }
    }
    for n in 0..x.level() {
        for i in 0..=n {
            if f[n + 1].mul(&x.degens[n][i]) != y.degens[n][i].mul(&f[n]) {
                return Err(format!("s{i} at level {n}"));
            }
        }
    }
    Ok(())
}

/// A simplex: cube coordinates (number of trailing ones of each Δ[1]
/// factor), a monotone sequence for Δ[n], or a concatenation for products.
pub type Simplex = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Cube(usize),
    Simplex(usize),
    Q(usize),
    Product(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn width(&self, l: usize) -> usize {
        match self {
            Shape::Cube(n) | Shape::Q(n) => *n,
            Shape::Simplex(_) => l + 1,
            Shape::Product(a, b) => a.width(l) + b.width(l),
        }
    }

    pub fn split<'a>(&self, x: &'a [u8], l: usize) -> (&'a [u8], &'a [u8]) {
        match self {
            Shape::Product(a, _) => x.split_at(a.width(l)),
            _ => (x, &[]),
        }
    }

    pub fn simplices(&self, l: usize) -> Vec<Simplex> {
        match self {
            Shape::Cube(n) => {
                let mut out = vec![vec![]];
                for _ in 0..*n {
                    out = out
                        .into_iter()
                        .flat_map(|v: Vec<u8>| {
                            (0..=l as u8 + 1).map(move |c| {
                                let mut v = v.clone();
                                v.push(c);
                                v
                            })
                        })
                        .collect();
                }
                out
            }
            Shape::Q(n) => Shape::Cube(*n)
                .simplices(l)
                .into_iter()
                .filter(|x| self.canon(x.clone(), l) == *x)
                .collect(),
            Shape::Simplex(n) => {
                let mut out = vec![vec![]];
                for _ in 0..=l {
                    out = out
                        .into_iter()
                        .flat_map(|v: Vec<u8>| {
                            let lo = v.last().copied().unwrap_or(0);
                            (lo..=*n as u8).map(move |c| {
                                let mut v = v.clone();
                                v.push(c);
                                v
                            })
                        })
                        .collect();
                }
                out
            }
            Shape::Product(a, b) => {
                let bs = b.simplices(l);
                a.simplices(l)
                    .into_iter()
                    .flat_map(|x| {
                        bs.iter().map(move |y| {
                            let mut z = x.clone();
                            z.extend_from_slice(y);
                            z
                        })
                    })
                    .collect()
            }
        }
    }

    /// Normal form in Q[n]: everything left of the rightmost all-ones
    /// coordinate becomes all-ones.
    pub fn canon(&self, mut x: Simplex, l: usize) -> Simplex {
        if let Shape::Q(_) = self {
            if let Some(p) = x.iter().rposition(|&c| c as usize == l + 1) {
                for c in &mut x[..p] {
                    *c = l as u8 + 1;
                }
            }
        }
        x
    }

    pub fn face(&self, x: &[u8], l: usize, j: usize) -> Simplex {
        match self {
            Shape::Cube(_) | Shape::Q(_) => {
                let y = x
                    .iter()
                    .map(|&c| if j + c as usize > l { c - 1 } else { c })
                    .collect();
                self.canon(y, l - 1)
            }
            Shape::Simplex(_) => {
                let mut y = x.to_vec();
                y.remove(j);
                y
            }
            Shape::Product(a, b) => {
                let (xa, xb) = self.split(x, l);
                let mut y = a.face(xa, l, j);
                y.extend(b.face(xb, l, j));
                y
            }
        }
    }

    pub fn degen(&self, x: &[u8], l: usize, j: usize) -> Simplex {
        match self {
            Shape::Cube(_) | Shape::Q(_) => {
                let y = x
                    .iter()
                    .map(|&c| if j + c as usize > l { c + 1 } else { c })
                    .collect();
                self.canon(y, l + 1)
            }
            Shape::Simplex(_) => {
                let mut y = x.to_vec();
                y.insert(j, x[j]);
                y
            }
            Shape::Product(a, b) => {
                let (xa, xb) = self.split(x, l);
                let mut y = a.degen(xa, l, j);
                y.extend(b.degen(xb, l, j));
                y
            }
        }
    }

    pub fn is_degenerate(&self, x: &[u8], l: usize) -> bool {
        (0..l).any(|j| self.degen(&self.face(x, l, j), l - 1, j) == x)
    }
}

/// A finite simplicial set materialized up to some level.
#[derive(Clone, Debug)]
pub struct SimplicialSet {
    pub shape: Shape,
    pub levels: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
}

impl SimplicialSet {
    pub fn build(shape: Shape, max_level: usize) -> Self {
        let levels: Vec<Vec<Simplex>> = (0..=max_level).map(|l| shape.simplices(l)).collect();
        let index = levels
            .iter()
            .map(|xs| xs.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect())
            .collect();
        SimplicialSet {
            shape,
            levels,
            index,
        }
    }

    pub fn index_of(&self, x: &[u8], l: usize) -> Option<usize> {
        self.index.get(l)?.get(x).copied()
    }

    /// The free simplicial module K[X].
    pub fn module(&self) -> SimplicialModule {
        let dims: Vec<usize> = self.levels.iter().map(Vec::len).collect();
        let l = dims.len() - 1;
        let mut faces = vec![vec![]];
        for n in 1..=l {
            faces.push(
                (0..=n)
                    .map(|j| {
                        let mut m = Matrix::zero(dims[n - 1], dims[n]);
                        for (c, x) in self.levels[n].iter().enumerate() {
                            m.set(self.index[n - 1][&self.shape.face(x, n, j)], c, Q::one());
                        }
                        m
                    })
                    .collect(),
            );
        }
        let degens = (0..l)
            .map(|n| {
                (0..=n)
                    .map(|j| {
                        let mut m = Matrix::zero(dims[n + 1], dims[n]);
                        for (c, x) in self.levels[n].iter().enumerate() {
                            m.set(self.index[n + 1][&self.shape.degen(x, n, j)], c, Q::one());
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        SimplicialModule {
            dims,
            faces,
            degens,
        }
    }
}

/// C/D K X on the basis of nondegenerate simplices.
#[derive(Clone, Debug)]
pub struct Chains {
    pub shape: Shape,
    pub basis: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    pub diff: Vec<Matrix>,
}

pub type ChainVec = BTreeMap<(usize, Simplex), Q>;

impl Chains {
    pub fn new(shape: Shape, max_level: usize) -> Self {
        let basis: Vec<Vec<Simplex>> = (0..=max_level)
            .map(|l| {
                shape
                    .simplices(l)
                    .into_iter()
                    .filter(|x| !shape.is_degenerate(x, l))
                    .collect()
            })
            .collect();
        let index: Vec<HashMap<Simplex, usize>> = basis
            .iter()
            .map(|xs| xs.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect())
            .collect();
        let mut diff = vec![Matrix::zero(0, basis[0].len())];
        for l in 1..=max_level {
            let mut m = Matrix::zero(basis[l - 1].len(), basis[l].len());
            for (c, x) in basis[l].iter().enumerate() {
                for j in 0..=l {
                    if let Some(r) = index[l - 1].get(&shape.face(x, l, j)) {
                        m.add(*r, c, qs(sign_pow(j as i64)));
                    }
                }
            }
            diff.push(m);
        }
        Chains {
            shape,
            basis,
            index,
            diff,
        }
    }

    pub fn max_level(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn dim(&self, l: usize) -> usize {
        self.basis.get(l).map_or(0, Vec::len)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    pub fn lookup(&self, x: &[u8], l: usize) -> Option<usize> {
        self.index.get(l)?.get(x).copied()
    }

    pub fn complex(&self) -> Result<ChainComplex> {
        block_complex(&self.dims(), &self.diff, "s")
    }

    /// One block matrix per degree for a simplicial map given on simplices.
    pub fn map_to(
        &self,
        target: &Chains,
        f: &dyn Fn(&[u8], usize) -> Simplex,
    ) -> Result<Vec<Matrix>> {
        (0..=self.max_level())
            .map(|l| {
                let mut m = Matrix::zero(target.dim(l), self.dim(l));
                for (c, x) in self.basis[l].iter().enumerate() {
                    let y = f(x, l);
                    match target.lookup(&y, l) {
                        Some(r) => m.set(r, c, Q::one()),
                        None if target.shape.is_degenerate(&y, l) || l > target.max_level() => {}
                        None => return Err(Error::Missing(format!("simplex {y:?} at level {l}"))),
                    }
                }
                Ok(m)
            })
            .collect()
    }

    /// Drop degenerate simplices from a formal sum.
    pub fn reduce(&self, v: ChainVec) -> ChainVec {
        v.into_iter()
            .filter(|((l, x), c)| !c.is_zero() && !self.shape.is_degenerate(x, *l))
            .collect()
    }

    pub fn d_vec(&self, v: &ChainVec) -> ChainVec {
        let mut out = ChainVec::new();
        for ((l, x), c) in v {
            if *l == 0 {
                continue;
            }
            for j in 0..=*l {
                let y = self.shape.face(x, *l, j);
                if !self.shape.is_degenerate(&y, l - 1) {
                    add_chain(&mut out, (l - 1, y), c * qs(sign_pow(j as i64)));
                }
            }
        }
        out
    }
}

fn add_chain<K: Ord + Clone>(v: &mut BTreeMap<K, Q>, k: K, c: Q) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(k.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&k);
    }
}

/// (μ, ν) shuffles of p + q as the increasing index lists μ.
fn shuffles(p: usize, q: usize) -> Vec<Vec<usize>> {
    let n = p + q;
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == p)
        .map(|m| (0..n).filter(|&i| (m >> i) & 1 == 1).collect())
        .collect()
}

fn iterate_degens(shape: &Shape, x: &[u8], mut l: usize, idx: &[usize]) -> Simplex {
    let mut y = x.to_vec();
    for &j in idx {
        y = shape.degen(&y, l, j);
        l += 1;
    }
    y
}

/// Eilenberg–Zilber shuffle map on a pair of simplices.
pub fn ez(xs: &Shape, x: &[u8], p: usize, ys: &Shape, y: &[u8], qd: usize) -> Vec<(Simplex, i32)> {
    let prod = Shape::Product(Box::new(xs.clone()), Box::new(ys.clone()));
    let mut out = Vec::new();
    for mu in shuffles(p, qd) {
        let nu: Vec<usize> = (0..p + qd).filter(|i| !mu.contains(i)).collect();
        let perm: Vec<usize> = mu.iter().chain(nu.iter()).copied().collect();
        let sign = perm_sign(&perm);
        let mut z = iterate_degens(xs, x, p, &nu);
        z.extend(iterate_degens(ys, y, qd, &mu));
        if !prod.is_degenerate(&z, p + qd) {
            out.push((z, sign));
        }
    }
    out
}

pub fn ez_vec(xs: &Shape, a: &ChainVec, ys: &Shape, b: &ChainVec) -> ChainVec {
    let mut out = ChainVec::new();
    for ((p, x), cx) in a {
        for ((qd, y), cy) in b {
            for (z, s) in ez(xs, x, *p, ys, y, *qd) {
                add_chain(&mut out, (p + qd, z), cx * cy * qs(s));
            }
        }
    }
    out
}

/// Alexander–Whitney: front faces ⊗ back faces, degenerate terms dropped.
pub fn aw(xs: &Shape, ys: &Shape, z: &[u8], n: usize) -> Vec<((usize, Simplex), (usize, Simplex))> {
    let prod = Shape::Product(Box::new(xs.clone()), Box::new(ys.clone()));
    let (x, y) = prod.split(z, n);
    let mut out = Vec::new();
    for i in 0..=n {
        let mut front = x.to_vec();
        for top in (i + 1..=n).rev() {
            front = xs.face(&front, top, top);
        }
        let mut back = y.to_vec();
        for lvl in (n - i + 1..=n).rev() {
            back = ys.face(&back, lvl, 0);
        }
        if !xs.is_degenerate(&front, i) && !ys.is_degenerate(&back, n - i) {
            out.push(((i, front), (n - i, back)));
        }
    }
    out
}

pub type TensorVec = BTreeMap<((usize, Simplex), (usize, Simplex)), Q>;

/// AW∘EZ = id, EZ a chain map, and EZ symmetric up to the Koszul twist,
/// on all pairs of nondegenerate simplices of total dimension ≤ max_level.
pub fn ez_and_aw(xs: &Shape, ys: &Shape, max_level: usize) -> Report {
    let cx = Chains::new(xs.clone(), max_level);
    let cy = Chains::new(ys.clone(), max_level);
    let prod = Shape::Product(Box::new(xs.clone()), Box::new(ys.clone()));
    let cp = Chains::new(prod.clone(), max_level);
    let swapped = Shape::Product(Box::new(ys.clone()), Box::new(xs.clone()));
    let mut r = Report::new().bound("level", max_level);
    let mut roundtrip = Ok(());
    let mut chain = Ok(());
    let mut sym = Ok(());
    for p in 0..=max_level {
        for qd in 0..=max_level - p {
            for x in &cx.basis[p] {
                for y in &cy.basis[qd] {
                    let e = ez(xs, x, p, ys, y, qd);
                    let mut back = TensorVec::new();
                    for (z, s) in &e {
                        for (a, b) in aw(xs, ys, z, p + qd) {
                            add_chain(&mut back, (a, b), qs(*s));
                        }
                    }
                    let want: TensorVec = [(((p, x.clone()), (qd, y.clone())), Q::one())]
                        .into_iter()
                        .collect();
                    if back != want {
                        roundtrip = Err(format!("x={x:?} y={y:?}"));
                    }
                    // d EZ = EZ d⊗
                    let ev: ChainVec = e
                        .iter()
                        .map(|(z, s)| ((p + qd, z.clone()), qs(*s)))
                        .collect();
                    let lhs = cp.d_vec(&ev);
                    let one_x: ChainVec = [((p, x.clone()), Q::one())].into_iter().collect();
                    let one_y: ChainVec = [((qd, y.clone()), Q::one())].into_iter().collect();
                    let mut rhs = ez_vec(xs, &cx.d_vec(&one_x), ys, &one_y);
                    for (k, c) in ez_vec(xs, &one_x, ys, &cy.d_vec(&one_y)) {
                        add_chain(&mut rhs, k, c * qs(sign_pow(p as i64)));
                    }
                    if lhs != rhs {
                        chain = Err(format!("x={x:?} y={y:?}"));
                    }
                    // EZ(y⊗x) = (−1)^{pq} τ EZ(x⊗y)
                    let mut tw: ChainVec = ChainVec::new();
                    for (z, s) in ez(ys, y, qd, xs, x, p) {
                        let (b, a) = swapped.split(&z, p + qd);
                        let mut w = a.to_vec();
                        w.extend_from_slice(b);
                        add_chain(&mut tw, (p + qd, w), qs(s * sign_pow((p * qd) as i64)));
                    }
                    if tw != ev {
                        sym = Err(format!("x={x:?} y={y:?}"));
                    }
                }
            }
        }
    }
    r.record("AW∘EZ is the identity on normalized tensors", roundtrip);
    r.record("EZ is a chain map", chain);
    r.record("EZ is symmetric up to the Koszul twist", sym);
    r
}

/// α_k by its closed formula: h ↦ signed permutations, h₀ ↦ e_{0,n},
/// h₁ ↦ e_{n+1,n}, where n is the number of h.
pub fn alpha(labels: &[IntervalH]) -> ChainVec {
    let hs: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == IntervalH::H)
        .collect();
    let n = hs.len();
    let mut out = ChainVec::new();
    for sigma in crate::operads::all_permutations(n) {
        let mut x: Simplex = labels
            .iter()
            .map(|h| match h {
                IntervalH::H0 => 0,
                IntervalH::H1 => n as u8 + 1,
                IntervalH::H => 0,
            })
            .collect();
        // the j-th h (1-based) carries e_{σ(n+1−j)}
        for (j, &pos) in hs.iter().enumerate() {
            x[pos] = sigma[n - 1 - j] as u8 + 1;
        }
        add_chain(&mut out, (n, x), qs(perm_sign(&sigma)));
    }
    out
}

fn alpha_one(h: IntervalH) -> ChainVec {
    let k = match h {
        IntervalH::H0 => (0, vec![0]),
        IntervalH::H1 => (0, vec![1]),
        IntervalH::H => (1, vec![1]),
    };
    [(k, Q::one())].into_iter().collect()
}

/// α_k as iterated Eilenberg–Zilber maps of α₁.
pub fn alpha_ez(labels: &[IntervalH]) -> ChainVec {
    match labels {
        [] => [((0, vec![]), Q::one())].into_iter().collect(),
        [h] => alpha_one(*h),
        [h, rest @ ..] => ez_vec(
            &Shape::Cube(1),
            &alpha_one(*h),
            &Shape::Cube(rest.len()),
            &alpha_ez(rest),
        ),
    }
}

fn tensor_labels(k: usize) -> Vec<Vec<IntervalH>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v: Vec<IntervalH>| {
                IntervalH::ALL.into_iter().map(move |h| {
                    let mut v = v.clone();
                    v.push(h);
                    v
                })
            })
            .collect();
    }
    out
}

/// Closed formula against iterated EZ, multiplicativity and the chain-map
/// property, for k ≤ max_k.
pub fn check_alpha(max_k: usize) -> Report {
    let mut r = Report::new().bound("k", max_k);
    let mut formula = Ok(());
    let mut mult = Ok(());
    let mut chain = Ok(());
    for k in 1..=max_k {
        let cube = Chains::new(Shape::Cube(k), k);
        for labels in tensor_labels(k) {
            let a = alpha(&labels);
            if a != alpha_ez(&labels) {
                formula = Err(format!("{labels:?}"));
            }
            for split in 1..k {
                let e = ez_vec(
                    &Shape::Cube(split),
                    &alpha(&labels[..split]),
                    &Shape::Cube(k - split),
                    &alpha(&labels[split..]),
                );
                if e != a {
                    mult = Err(format!("{labels:?} at {split}"));
                }
            }
            // d α(A) = α(d A), with the Koszul rule on H^{⊗k}
            let mut da = ChainVec::new();
            let mut before = 0;
            for (i, &h) in labels.iter().enumerate() {
                for (g, c) in h.d() {
                    let mut l2 = labels.clone();
                    l2[i] = g;
                    for (key, x) in alpha(&l2) {
                        add_chain(&mut da, key, x * qs(c * sign_pow(before)));
                    }
                }
                before += h.degree() as i64;
            }
            if cube.d_vec(&a) != cube.reduce(da) {
                chain = Err(format!("{labels:?}"));
            }
        }
    }
    r.record("closed formula equals iterated Eilenberg–Zilber", formula);
    r.record("α_{k,l}(α_k ⊗ α_l) = α_{k+l}", mult);
    r.record("α is a chain map", chain);
    r
}

/// A cosimplicial chain complex K⁰…K^L.
#[derive(Clone, Debug)]
pub struct CosimplicialComplex {
    pub terms: Vec<Chains>,
    /// cofaces[n][i]: K^n → K^{n+1}, per degree block, i ≤ n + 1.
    pub cofaces: Vec<Vec<Vec<Matrix>>>,
    /// codegens[n][i]: K^n → K^{n−1}, i < n; codegens[0] is empty.
    pub codegens: Vec<Vec<Vec<Matrix>>>,
}

/// Block-diagonal matrix on the whole complex from per-degree blocks.
pub fn total_matrix(blocks: &[Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(Matrix::rows).sum();
    let cols: usize = blocks.iter().map(Matrix::cols).sum();
    let mut m = Matrix::zero(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for (i, j, x) in b.entries() {
            m.set(r0 + i, c0 + j, x.clone());
        }
        r0 += b.rows();
        c0 += b.cols();
    }
    m
}

fn pad_blocks(m: Vec<Matrix>, rows: &[usize], cols: &[usize]) -> Vec<Matrix> {
    let l = rows.len().max(cols.len());
    (0..l)
        .map(|k| match m.get(k) {
            Some(b)
                if b.rows() == rows.get(k).copied().unwrap_or(0)
                    && b.cols() == cols.get(k).copied().unwrap_or(0) =>
            {
                b.clone()
            }
            Some(b) => {
                let r = rows.get(k).copied().unwrap_or(0);
                let c = cols.get(k).copied().unwrap_or(0);
                let mut out = Matrix::zero(r, c);
                for (i, j, x) in b.entries() {
                    if i < r && j < c {
                        out.set(i, j, x.clone());
                    }
                }
                out
            }
            None => Matrix::zero(
                rows.get(k).copied().unwrap_or(0),
                cols.get(k).copied().unwrap_or(0),
            ),
        })
        .collect()
}

impl CosimplicialComplex {
    fn build(
        level: usize,
        shape: &dyn Fn(usize) -> Shape,
        coface: &dyn Fn(usize, usize, &[u8], usize) -> Simplex,
        codegen: &dyn Fn(usize, usize, &[u8], usize) -> Simplex,
    ) -> Result<Self> {
        // K^n needs simplices up to dimension n; keep a common top so blocks align
        let terms: Vec<Chains> = (0..=level).map(|n| Chains::new(shape(n), level)).collect();
        let mut cofaces = Vec::new();
        for n in 0..level {
            let mut fs = Vec::new();
            for i in 0..=n + 1 {
                fs.push(terms[n].map_to(&terms[n + 1], &|x, l| coface(n, i, x, l))?);
            }
            cofaces.push(fs);
        }
        let mut codegens = vec![vec![]];
        for n in 1..=level {
            let mut ss = Vec::new();
            for i in 0..n {
                ss.push(terms[n].map_to(&terms[n - 1], &|x, l| codegen(n, i, x, l))?);
            }
            codegens.push(ss);
        }
        Ok(CosimplicialComplex {
            terms,
            cofaces,
            codegens,
        })
    }

    pub fn level(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn coface(&self, n: usize, i: usize) -> Matrix {
        total_matrix(&pad_blocks(
            self.cofaces[n][i].clone(),
            &self.terms[n + 1].dims(),
            &self.terms[n].dims(),
        ))
    }

    pub fn codegen(&self, n: usize, i: usize) -> Matrix {
        total_matrix(&pad_blocks(
            self.codegens[n][i].clone(),
            &self.terms[n - 1].dims(),
            &self.terms[n].dims(),
        ))
    }

    pub fn complex(&self, n: usize) -> Result<ChainComplex> {
        self.terms[n].complex()
    }

    /// Cosimplicial identities and the chain-map property of every structure map.
    pub fn check(&self) -> Result<Report> {
        let l = self.level();
        let mut r = Report::new().bound("level", l);
        let mut chain = Ok(());
        for n in 0..=l {
            let dn = self.complex(n)?.d().clone();
            if n < l {
                let dn1 = self.complex(n + 1)?.d().clone();
                for i in 0..=n + 1 {
                    let f = self.coface(n, i);
                    if dn1.mul(&f) != f.mul(&dn) {
                        chain = Err(format!("δ{i} on K^{n}"));
                    }
                }
            }
            if n >= 1 {
                let dm = self.complex(n - 1)?.d().clone();
                for i in 0..n {
                    let s = self.codegen(n, i);
                    if dm.mul(&s) != s.mul(&dn) {
                        chain = Err(format!("σ{i} on K^{n}"));
                    }
                }
            }
        }
        r.record("structure maps are chain maps", chain);
        let mut ids = Ok(());
        for n in 0..=l {
            // δ^j δ^i = δ^i δ^{j−1}, i < j
            if n + 2 <= l {
                for j in 0..=n + 2 {
                    for i in 0..j {
                        if self.coface(n + 1, j).mul(&self.coface(n, i))
                            != self.coface(n + 1, i).mul(&self.coface(n, j - 1))
                        {
                            ids = Err(format!("δ{j}δ{i} on K^{n}"));
                        }
                    }
                }
            }
            // σ^j σ^i = σ^i σ^{j+1}, i ≤ j
            if n >= 2 {
                for j in 0..n - 1 {
                    for i in 0..=j {
                        if self.codegen(n - 1, j).mul(&self.codegen(n, i))
                            != self.codegen(n - 1, i).mul(&self.codegen(n, j + 1))
                        {
                            ids = Err(format!("σ{j}σ{i} on K^{n}"));
                        }
                    }
                }
            }
            // σ^j δ^i
            if n < l {
                for j in 0..=n {
                    for i in 0..=n + 1 {
                        let lhs = self.codegen(n + 1, j).mul(&self.coface(n, i));
                        let rhs = if i == j || i == j + 1 {
                            Matrix::identity(lhs.rows())
                        } else if n == 0 {
                            continue;
                        } else if i < j {
                            self.coface(n - 1, i).mul(&self.codegen(n, j - 1))
                        } else {
                            self.coface(n - 1, i - 1).mul(&self.codegen(n, j))
                        };
                        if lhs != rhs {
                            ids = Err(format!("σ{j}δ{i} on K^{n}"));
                        }
                    }
                }
            }
        }
        r.record("cosimplicial identities", ids);
        Ok(r)
    }
}

/// C/D KΔ[−] up to level L.
pub fn delta_cosimplicial(level: usize) -> Result<CosimplicialComplex> {
    CosimplicialComplex::build(
        level,
        &Shape::Simplex,
        &|_, i, x, _| {
            x.iter()
                .map(|&a| if a as usize >= i { a + 1 } else { a })
                .collect()
        },
        &|_, i, x, _| {
            x.iter()
                .map(|&a| if a as usize > i { a - 1 } else { a })
                .collect()
        },
    )
}

/// C/D KQ[−] up to level L.
pub fn q_cosimplicial(level: usize) -> Result<CosimplicialComplex> {
    CosimplicialComplex::build(
        level,
        &Shape::Q,
        &|n, i, x, l| {
            let mut y = x.to_vec();
            if i == 0 {
                y.insert(0, l as u8 + 1);
            } else {
                y.insert(i - 1, 0);
            }
            Shape::Q(n + 1).canon(y, l)
        },
        &|n, i, x, l| {
            let mut y = x.to_vec();
            if i == 0 {
                y.remove(0);
            } else {
                let m = y[i - 1].max(y[i]);
                y[i - 1] = m;
                y.remove(i);
            }
            Shape::Q(n - 1).canon(y, l)
        },
    )
}

/// β on a simplex of Q[n] at level k.
pub fn beta(x: &[u8], k: usize) -> Simplex {
    (1..=k + 1)
        .rev()
        .map(|t| {
            x.iter()
                .rposition(|&c| c as usize >= t)
                .map_or(0, |j| j as u8 + 1)
        })
        .collect()
}

/// b = C/D Kβ : C/D KQ[n] → C/D KΔ[n], per degree.
pub fn b_map(qc: &CosimplicialComplex, dc: &CosimplicialComplex, n: usize) -> Result<Vec<Matrix>> {
    qc.terms[n].map_to(&dc.terms[n], &|x, l| beta(x, l))
}

/// The labels h₁^{a₀} ⊗ A′ behind a nondegenerate simplex [a₀ < … < a_k] of Δ[n].
pub fn delta_labels(x: &[u8], n: usize) -> Vec<IntervalH> {
    let a0 = x[0] as usize;
    (1..=n)
        .map(|pos| {
            if pos <= a0 {
                IntervalH::H1
            } else if x[1..].contains(&(pos as u8)) {
                IntervalH::H
            } else {
                IntervalH::H0
            }
        })
        .collect()
}

/// a : C/D KΔ[n] → C/D KQ[n], the image of α under Δ[1]^n ↠ Q[n].
pub fn a_map(qc: &CosimplicialComplex, dc: &CosimplicialComplex, n: usize) -> Result<Vec<Matrix>> {
    let src = &dc.terms[n];
    let tgt = &qc.terms[n];
    (0..=src.max_level())
        .map(|l| {
            let mut m = Matrix::zero(tgt.dim(l), src.dim(l));
            for (c, x) in src.basis[l].iter().enumerate() {
                for ((k, y), coef) in alpha(&delta_labels(x, n)) {
                    debug_assert_eq!(k, l);
                    let y = Shape::Q(n).canon(y, k);
                    if let Some(r) = tgt.lookup(&y, k) {
                        m.add(r, c, coef);
                    } else if !tgt.shape.is_degenerate(&y, k) {
                        return Err(Error::Missing(format!("simplex {y:?} of Q[{n}]")));
                    }
                }
            }
            Ok(m)
        })
        .collect()
}

/// b∘a = id for n ≤ max_n, and both commute with cofaces and codegeneracies
/// for n ≤ max_cosimplicial.
pub fn check_a_and_b(level: usize, max_cosimplicial: usize) -> Result<Report> {
    let qc = q_cosimplicial(level)?;
    let dc = delta_cosimplicial(level)?;
    let mut r = Report::new().bound("level", level);
    let a: Vec<Matrix> = (0..=level)
        .map(|n| a_map(&qc, &dc, n).map(|m| total_matrix(&m)))
        .collect::<Result<_>>()?;
    let b: Vec<Matrix> = (0..=level)
        .map(|n| b_map(&qc, &dc, n).map(|m| total_matrix(&m)))
        .collect::<Result<_>>()?;
    let mut ba = Ok(());
    let mut chain = Ok(());
    for n in 0..=level {
        if b[n].mul(&a[n]) != Matrix::identity(a[n].cols()) {
            ba = Err(format!("n = {n}"));
        }
        let dq = qc.complex(n)?.d().clone();
        let dd = dc.complex(n)?.d().clone();
        if dq.mul(&a[n]) != a[n].mul(&dd) || dd.mul(&b[n]) != b[n].mul(&dq) {
            chain = Err(format!("n = {n}"));
        }
    }
    r.record("b∘a is the identity", ba);
    r.record("a and b are chain maps", chain);
    let mut cos = Ok(());
    for n in 0..=max_cosimplicial.min(level) {
        if n < level {
            for i in 0..=n + 1 {
                if qc.coface(n, i).mul(&a[n]) != a[n + 1].mul(&dc.coface(n, i)) {
                    cos = Err(format!("a with δ{i} at n = {n}"));
                }
                if dc.coface(n, i).mul(&b[n]) != b[n + 1].mul(&qc.coface(n, i)) {
                    cos = Err(format!("b with δ{i} at n = {n}"));
                }
            }
        }
        if n >= 1 {
            for i in 0..n {
                if qc.codegen(n, i).mul(&a[n]) != a[n - 1].mul(&dc.codegen(n, i)) {
                    cos = Err(format!("a with σ{i} at n = {n}"));
                }
                if dc.codegen(n, i).mul(&b[n]) != b[n - 1].mul(&qc.codegen(n, i)) {
                    cos = Err(format!("b with σ{i} at n = {n}"));
                }
            }
        }
    }
    r.record("a and b commute with the cosimplicial structure", cos);
    Ok(r)
}

/// Basis of the degree-0 chain maps K → V, as dim V × dim K matrices.
pub fn chain_maps(k: &ChainComplex, v: &ChainComplex) -> Vec<Matrix> {
    let (ks, vs) = (k.space(), v.space());
    let unknowns: Vec<(usize, usize)> = (0..vs.dim())
        .flat_map(|i| {
            (0..ks.dim())
                .filter(move |&j| vs.degree(i) == ks.degree(j))
                .map(move |j| (i, j))
        })
        .collect();
    let col: HashMap<(usize, usize), usize> =
        unknowns.iter().enumerate().map(|(c, &u)| (u, c)).collect();
    // (d_V f − f d_K)[r][j] = 0
    let mut sys = Matrix::zero(vs.dim() * ks.dim(), unknowns.len());
    for r in 0..vs.dim() {
        for j in 0..ks.dim() {
            let row = r * ks.dim() + j;
            for i in 0..vs.dim() {
                let c = v.d().get(r, i);
                if let (false, Some(&u)) = (c.is_zero(), col.get(&(i, j))) {
                    sys.add(row, u, c);
                }
            }
            for m in 0..ks.dim() {
                let c = k.d().get(m, j);
                if let (false, Some(&u)) = (c.is_zero(), col.get(&(r, m))) {
                    sys.add(row, u, -c);
                }
            }
        }
    }
    sys.kernel()
        .into_iter()
        .map(|sol| {
            let mut f = Matrix::zero(vs.dim(), ks.dim());
            for (c, x) in sol.into_iter().enumerate() {
                if !x.is_zero() {
                    let (i, j) = unknowns[c];
                    f.set(i, j, x);
                }
            }
            f
        })
        .collect()
}

fn flatten(m: &Matrix) -> Vec<Q> {
    let mut v = zeros(m.rows() * m.cols());
    for (i, j, x) in m.entries() {
        v[i * m.cols() + j] = x.clone();
    }
    v
}

/// Hom(K^•, V) as a simplicial module, with the chain maps behind each basis vector.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub module: SimplicialModule,
    pub bases: Vec<Vec<Matrix>>,
    spans: Vec<Span>,
}

fn flat_spans(bases: &[Vec<Matrix>], entries: &[usize]) -> Vec<Span> {
    bases
        .iter()
        .zip(entries)
        .map(|(b, &e)| Span::from_vectors(e, &b.iter().map(flatten).collect::<Vec<_>>()))
        .collect()
}

impl HomSpace {
    pub fn coords(&self, n: usize, f: &Matrix) -> Option<Vec<Q>> {
        self.spans[n].coords(&flatten(f))
    }

    /// f ↦ f∘m_n from this space to `to`, with m_n : K_to^n → K_this^n.
    pub fn precompose(&self, to: &HomSpace, maps: &[Matrix]) -> Result<Vec<Matrix>> {
        (0..self.bases.len())
            .map(|n| {
                let cols: Option<Vec<Vec<Q>>> = self.bases[n]
                    .iter()
                    .map(|f| to.coords(n, &f.mul(&maps[n])))
                    .collect();
                let cols = cols.ok_or_else(|| {
                    Error::Invalid(format!("precomposite at level {n} is not a chain map"))
                })?;
                Ok(Matrix::from_columns(to.bases[n].len(), &cols))
            })
            .collect()
    }
}

pub fn mapping_space_hom(
    k: &CosimplicialComplex,
    v: &ChainComplex,
    level: usize,
) -> Result<HomSpace> {
    if level > k.level() {
        return Err(Error::Invalid(format!(
            "level {level} above the cosimplicial truncation {}",
            k.level()
        )));
    }
    let complexes: Vec<ChainComplex> = (0..=level).map(|n| k.complex(n)).collect::<Result<_>>()?;
    let bases: Vec<Vec<Matrix>> = complexes.iter().map(|kn| chain_maps(kn, v)).collect();
    let entries: Vec<usize> = complexes.iter().map(|kn| kn.dim() * v.dim()).collect();
    let spans = flat_spans(&bases, &entries);
    let partial = HomSpace {
        module: SimplicialModule {
            dims: vec![],
            faces: vec![],
            degens: vec![],
        },
        bases: bases.clone(),
        spans,
    };
    let dims: Vec<usize> = bases.iter().map(Vec::len).collect();
    let express = |n: usize, f: &Matrix| -> Result<Vec<Q>> {
        partial
            .coords(n, f)
            .ok_or_else(|| Error::Invalid(format!("not a chain map at level {n}")))
    };
    let mut faces = vec![vec![]];
    for n in 1..=level {
        let mut fs = Vec::new();
        for i in 0..=n {
            let delta = k.coface(n - 1, i);
            let cols: Vec<Vec<Q>> = bases[n]
                .iter()
                .map(|f| express(n - 1, &f.mul(&delta)))
                .collect::<Result<_>>()?;
            fs.push(Matrix::from_columns(dims[n - 1], &cols));
        }
        faces.push(fs);
    }
    let mut degens = Vec::new();
    for n in 0..level {
        let mut ss = Vec::new();
        for i in 0..=n {
            let sigma = k.codegen(n + 1, i);
            let cols: Vec<Vec<Q>> = bases[n]
                .iter()
                .map(|f| express(n + 1, &f.mul(&sigma)))
                .collect::<Result<_>>()?;
            ss.push(Matrix::from_columns(dims[n + 1], &cols));
        }
        degens.push(ss);
    }
    Ok(HomSpace {
        module: SimplicialModule {
            dims,
            faces,
            degens,
        },
        bases,
        spans: partial.spans,
    })
}

/// Rank of the map induced on H_j between normalized complexes by level maps f.
pub fn induced_rank(
    src: &SimplicialModule,
    tgt: &SimplicialModule,
    f: &[Matrix],
    j: usize,
) -> Option<usize> {
    let ns = src.normalized();
    let nt = tgt.normalized();
    let (z, _) = ns.cycles_and_boundaries(j);
    let (_, b) = nt.cycles_and_boundaries(j);
    let mut span = Span::from_vectors(nt.dim(j), &b);
    let base = span.dim();
    for c in z {
        let mut v = zeros(src.dims[j]);
        for (k, x) in c.iter().enumerate() {
            for (t, y) in ns.basis[j][k].iter().enumerate() {
                v[t] += x * y;
            }
        }
        let w = f[j].apply(&v);
        let cw = coords_in(&nt.basis[j], tgt.dims[j], &w)?;
        span.insert(&cw);
    }
    Some(span.dim() - base)
}

/// Homology of a complex in degree j, by dimension.
pub fn complex_homology_dim(v: &ChainComplex, j: i32) -> usize {
    let idx = v.space().in_degree(j);
    let z = v.d_block(j).kernel().len();
    let z = if idx.is_empty() { 0 } else { z };
    let b = v.d_block(j + 1).rank();
    z - b
}

/// The big and homotopy coherent mapping spaces of V, compared through a*.
pub fn big_vs_hc_comparison(v: &ChainComplex, level: usize) -> Result<Report> {
    Comparison::new(level)?.run(v)
}

/// The V-independent half of the comparison: both cosimplicial complexes
/// with a and b, built once and reused across complexes.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub level: usize,
    pub q: CosimplicialComplex,
    pub delta: CosimplicialComplex,
    pub a: Vec<Matrix>,
    pub b: Vec<Matrix>,
}

impl Comparison {
    pub fn new(level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::Invalid("the comparison needs level ≥ 1".into()));
        }
        let q = q_cosimplicial(level)?;
        let delta = delta_cosimplicial(level)?;
        let a = (0..=level)
            .map(|n| a_map(&q, &delta, n).map(|m| total_matrix(&m)))
            .collect::<Result<_>>()?;
        let b = (0..=level)
            .map(|n| b_map(&q, &delta, n).map(|m| total_matrix(&m)))
            .collect::<Result<_>>()?;
        Ok(Comparison {
            level,
            q,
            delta,
            a,
            b,
        })
    }

    pub fn run(&self, v: &ChainComplex) -> Result<Report> {
        let level = self.level;
        let (a, b) = (&self.a, &self.b);
        let mq = mapping_space_hom(&self.q, v, level)?;
        let md = mapping_space_hom(&self.delta, v, level)?;
        compare_spaces(v, level, &mq, &md, a, b)
    }
}

fn compare_spaces(
    v: &ChainComplex,
    level: usize,
    mq: &HomSpace,
    md: &HomSpace,
    a: &[Matrix],
    b: &[Matrix],
) -> Result<Report> {
    let a_star = mq.precompose(md, a)?;
    let b_star = md.precompose(mq, b)?;
    let mut r = Report::new()
        .bound("level", level)
        .bound("homology_degrees", format!("0..={}", level - 1));
    r.record(
        "a* is simplicial",
        simplicial_map_check(&mq.module, &md.module, &a_star),
    );
    r.record(
        "b* is simplicial",
        simplicial_map_check(&md.module, &mq.module, &b_star),
    );
    let mut id = Ok(());
    for n in 0..=level {
        if a_star[n].mul(&b_star[n]) != Matrix::identity(md.module.dims[n]) {
            id = Err(format!("level {n}"));
        }
    }
    r.record("a*∘b* is the identity", id);
    let nq = mq.module.normalized();
    let nd = md.module.normalized();
    let mut iso = Ok(());
    let mut oracle = Ok(());
    for j in 0..level {
        let hq = nq.homology_dim(j);
        let hd = nd.homology_dim(j);
        let rank = induced_rank(&mq.module, &md.module, &a_star, j)
            .ok_or_else(|| Error::Invalid("a* leaves the normalized complex".into()))?;
        if hq != hd || rank != hd {
            iso = Err(format!("H_{j}: big {hq}, hc {hd}, rank {rank}"));
        }
        let hv = complex_homology_dim(v, j as i32);
        if hd != hv {
            oracle = Err(format!("H_{j}: hc {hd}, V {hv}"));
        }
    }
    r.record("a* is a homology isomorphism in the window", iso);
    r.record("the hc mapping space has the homology of V", oracle);
    Ok(r)
}

/// Random bounded complex: a sum of spheres and discs in degrees
/// lo..=hi, with a random change of basis in each degree.
pub fn random_complex<R: Rng>(rng: &mut R, lo: i32, hi: i32, atoms: usize) -> Result<ChainComplex> {
    let mut degs = Vec::new();
    let mut edges = Vec::new();
    for _ in 0..atoms {
        let n = rng.gen_range(lo..=hi);
        if n > lo && rng.gen_bool(0.5) {
            degs.push(n);
            degs.push(n - 1);
            edges.push((degs.len() - 1, degs.len() - 2));
        } else {
            degs.push(n);
        }
    }
    let dim = degs.len();
    let mut d = Matrix::zero(dim, dim);
    for &(lower, upper) in &edges {
        d.set(lower, upper, Q::one());
    }
    // base change g per degree: d' = g d g⁻¹
    let g = loop {
        let mut cand = Matrix::zero(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                if degs[i] == degs[j] {
                    let x = if i == j {
                        q(rng.gen_range(1..=2))
                    } else {
                        q(rng.gen_range(-1..=1))
                    };
                    cand.set(i, j, x);
                }
            }
        }
        if cand.rank() == dim {
            break cand;
        }
    };
    let gi = inverse(&g).unwrap();
    let d2 = g.mul(&d).mul(&gi);
    let basis = degs
        .iter()
        .enumerate()
        .map(|(i, &n)| (format!("v{i}"), n))
        .collect();
    ChainComplex::new(GradedSpace::new(basis, (lo - 1, hi + 1))?, d2)
}

/// A random invertible matrix per level, for disguising a module.
pub fn random_base_change<R: Rng>(rng: &mut R, dims: &[usize]) -> Vec<Matrix> {
    dims.iter()
        .map(|&n| loop {
            let mut m = Matrix::zero(n, n);
            for i in 0..n {
                for j in 0..n {
                    let x = rng.gen_range(-1..=1) + if i == j { 2 } else { 0 };
                    m.set(i, j, q(x));
                }
            }
            if m.rank() == n {
                break m;
            }
        })
        .collect()
}
