//! Exact rational linear algebra over sparse rows, graded spaces and chain
//! complexes, plus the two sign helpers every other module leans on.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Sparse vector keyed by coordinate.
pub type SparseVec = BTreeMap<usize, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `num/den` with the denominator always written out.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn zeros(n: usize) -> Vec<Q> {
    vec![Q::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Q> {
    let mut v = zeros(n);
    v[i] = Q::one();
    v
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn to_sparse(v: &[Q]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn to_dense(v: &SparseVec, n: usize) -> Vec<Q> {
    let mut out = zeros(n);
    for (&i, x) in v {
        out[i] = x.clone();
    }
    out
}

/// `y += c * x`, dropping cancelled entries.
pub fn axpy(y: &mut SparseVec, c: &Q, x: &SparseVec) {
    if c.is_zero() {
        return;
    }
    for (&i, xi) in x {
        let e = y.entry(i).or_insert_with(Q::zero);
        *e += c * xi;
        if e.is_zero() {
            y.remove(&i);
        }
    }
}

pub fn add_entry(y: &mut SparseVec, i: usize, c: Q) {
    if c.is_zero() {
        return;
    }
    let e = y.entry(i).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        y.remove(&i);
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Sparse matrix with deterministic (row, col) iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Q>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Columns given as dense vectors of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Matrix::zero(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if x.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), x);
        }
    }

    pub fn add(&mut self, i: usize, j: usize, x: Q) {
        let v = self.get(i, j) + x;
        self.set(i, j, v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        self.entries.iter().map(|(&(i, j), x)| (i, j, x))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_vecs(&self) -> Vec<SparseVec> {
        let mut out = vec![SparseVec::new(); self.rows];
        for (&(i, j), x) in &self.entries {
            out[i].insert(j, x.clone());
        }
        out
    }

    pub fn col_vecs(&self) -> Vec<SparseVec> {
        let mut out = vec![SparseVec::new(); self.cols];
        for (&(i, j), x) in &self.entries {
            out[j].insert(i, x.clone());
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zero(self.cols, self.rows);
        for (&(i, j), x) in &self.entries {
            m.entries.insert((j, i), x.clone());
        }
        m
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols, "vector length");
        let mut out = zeros(self.rows);
        for (&(i, j), x) in &self.entries {
            if !v[j].is_zero() {
                out[i] += x * &v[j];
            }
        }
        out
    }

    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let cols = self.col_vecs();
        let mut out = SparseVec::new();
        for (&j, c) in v {
            axpy(&mut out, c, &cols[j]);
        }
        out
    }

    /// `self * other`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let rows = other.row_vecs();
        let mut acc: Vec<SparseVec> = vec![SparseVec::new(); self.rows];
        for (&(i, k), x) in &self.entries {
            axpy(&mut acc[i], x, &rows[k]);
        }
        let mut m = Matrix::zero(self.rows, other.cols);
        for (i, row) in acc.into_iter().enumerate() {
            for (j, x) in row {
                m.entries.insert((i, j), x);
            }
        }
        m
    }

    pub fn plus(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (&(i, j), x) in &other.entries {
            m.add(i, j, x.clone());
        }
        m
    }

    pub fn scale(&self, c: &Q) -> Matrix {
        let mut m = Matrix::zero(self.rows, self.cols);
        if !c.is_zero() {
            for (&k, x) in &self.entries {
                m.entries.insert(k, x * c);
            }
        }
        m
    }

    /// Restrict to the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let rpos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let cpos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let mut m = Matrix::zero(rows.len(), cols.len());
        for (&(i, j), x) in &self.entries {
            if let (Some(&a), Some(&b)) = (rpos.get(&i), cpos.get(&j)) {
                m.entries.insert((a, b), x.clone());
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new();
        for r in self.row_vecs() {
            e.insert(r);
        }
        e.rank()
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let rref = rref(self.row_vecs());
        let pivots: BTreeMap<usize, &SparseVec> = rref.iter().map(|(p, r)| (*p, r)).collect();
        let mut out = Vec::new();
        for f in 0..self.cols {
            if pivots.contains_key(&f) {
                continue;
            }
            let mut v = zeros(self.cols);
            v[f] = Q::one();
            for (&p, row) in &pivots {
                if let Some(x) = row.get(&f) {
                    v[p] = -x.clone();
                }
            }
            out.push(v);
        }
        out
    }

    /// Basis of the column space, as a subset of the columns.
    pub fn image(&self) -> Vec<Vec<Q>> {
        let mut span = Span::new(self.rows);
        let mut out = Vec::new();
        for (j, c) in self.col_vecs().into_iter().enumerate() {
            if span.insert_sparse(c) {
                out.push(self.column(j));
            }
        }
        out
    }

    pub fn solve(&self, b: &[Q]) -> Solution {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let mut span = Span::new(self.rows);
        for c in self.col_vecs() {
            span.insert_sparse(c);
        }
        match span.coords(b) {
            Some(x) => Solution::Solved(x),
            None => {
                // y with y A = 0 and y b != 0 exists because b is not in the image.
                let left = self.transpose().kernel();
                let y = left
                    .into_iter()
                    .find(|y| !dot(y, b).is_zero())
                    .expect("inconsistent system has a separating functional");
                Solution::Inconsistent(y)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Solved(Vec<Q>),
    /// A functional vanishing on the image but not on the target.
    Inconsistent(Vec<Q>),
}

impl Solution {
    pub fn ok(self) -> Option<Vec<Q>> {
        match self {
            Solution::Solved(x) => Some(x),
            Solution::Inconsistent(_) => None,
        }
    }
}

/// Semi-echelon basis: each stored row has a distinct leading column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after clearing every pivot column.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut done = SparseVec::new();
        while let Some((&c, x)) = v.iter().next() {
            match self.rows.get(&c) {
                Some(row) => {
                    let f = -x.clone();
                    axpy(&mut v, &f, row);
                }
                None => {
                    let x = x.clone();
                    v.remove(&c);
                    done.insert(c, x);
                }
            }
        }
        done
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(v);
        let Some((&c, x)) = r.iter().next() else {
            return false;
        };
        let inv = x.recip();
        let mut row = SparseVec::new();
        axpy(&mut row, &inv, &r);
        self.rows.insert(c, row);
        true
    }
}

/// Span of a list of generators that remembers how each echelon row was
/// built, so membership queries also return coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    dim: usize,
    gens: usize,
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
}

impl Span {
    pub fn new(dim: usize) -> Self {
        Span {
            dim,
            gens: 0,
            rows: BTreeMap::new(),
        }
    }

    pub fn from_vectors(dim: usize, vs: &[Vec<Q>]) -> Self {
        let mut s = Span::new(dim);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn generators(&self) -> usize {
        self.gens
    }

    fn reduce(&self, mut v: SparseVec, mut comb: SparseVec) -> (SparseVec, SparseVec) {
        let mut done = SparseVec::new();
        while let Some((&c, x)) = v.iter().next() {
            match self.rows.get(&c) {
                Some((row, rc)) => {
                    let f = -x.clone();
                    axpy(&mut v, &f, row);
                    axpy(&mut comb, &f, rc);
                }
                None => {
                    let x = x.clone();
                    v.remove(&c);
                    done.insert(c, x);
                }
            }
        }
        (done, comb)
    }

    /// Add a generator; returns whether it enlarged the span. The generator
    /// gets the next index either way.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.dim, "span vector length");
        self.insert_sparse(to_sparse(v))
    }

    pub fn insert_sparse(&mut self, v: SparseVec) -> bool {
        let idx = self.gens;
        self.gens += 1;
        let mut comb = SparseVec::new();
        comb.insert(idx, Q::one());
        let (r, comb) = self.reduce(v, comb);
        let Some((&c, x)) = r.iter().next() else {
            return false;
        };
        let inv = x.recip();
        let mut row = SparseVec::new();
        axpy(&mut row, &inv, &r);
        let mut rc = SparseVec::new();
        axpy(&mut rc, &inv, &comb);
        self.rows.insert(c, (row, rc));
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(to_sparse(v), SparseVec::new()).0.is_empty()
    }

    /// Coefficients on the generators that reproduce `v`, if it lies in the span.
    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        let (rest, comb) = self.reduce(to_sparse(v), SparseVec::new());
        if !rest.is_empty() {
            return None;
        }
        let mut out = zeros(self.gens);
        for (i, x) in comb {
            out[i] = -x;
        }
        Some(out)
    }
}

/// Reduced row echelon form as (pivot column, row) pairs.
pub fn rref(rows: Vec<SparseVec>) -> Vec<(usize, SparseVec)> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    let mut out: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for (&p, row) in e.rows.iter().rev() {
        let mut r = row.clone();
        let hits: Vec<(usize, Q)> = r
            .iter()
            .filter(|(c, _)| **c != p && out.contains_key(c))
            .map(|(c, x)| (*c, x.clone()))
            .collect();
        for (c, x) in hits {
            let f = -x;
            axpy(&mut r, &f, &out[&c]);
        }
        out.insert(p, r);
    }
    out.into_iter().collect()
}

/// Sign of a plain permutation, `perm[i]` being the old index at new position i.
pub fn perm_sign(perm: &[usize]) -> i32 {
    koszul_sign(perm, &vec![1; perm.len()])
}

/// Koszul sign of permuting graded symbols: position `i` of the result holds
/// old symbol `perm[i]`; every crossing of two odd symbols flips the sign.
pub fn koszul_sign(perm: &[usize], degrees: &[i32]) -> i32 {
    assert_eq!(perm.len(), degrees.len(), "permutation and degree lengths");
    let mut odd_crossings = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && degrees[perm[i]] % 2 != 0 && degrees[perm[j]] % 2 != 0 {
                odd_crossings += 1;
            }
        }
    }
    if odd_crossings.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of a_0 ⊗ … ⊗ a_{k-1} ↦ ±sa_0 ⊗ … ⊗ sa_{k-1}.
pub fn suspension_sign(degrees: &[i32]) -> i32 {
    let k = degrees.len();
    let e: i64 = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| (k - 1 - i) as i64 * d as i64)
        .sum();
    sign_pow(e)
}

/// (−1)^e
pub fn sign_pow(e: i64) -> i32 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn qs(sign: i32) -> Q {
    q(sign as i64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    basis: Vec<(String, i32)>,
    window: (i32, i32),
}

impl GradedSpace {
    pub fn new(basis: Vec<(String, i32)>, window: (i32, i32)) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (l, d) in &basis {
            if !seen.insert(l.clone()) {
                return Err(Error::Invalid(format!("duplicate basis label {l}")));
            }
            if *d < window.0 || *d > window.1 {
                return Err(Error::OutOfWindow {
                    degree: *d,
                    lo: window.0,
                    hi: window.1,
                });
            }
        }
        Ok(GradedSpace { basis, window })
    }

    /// Window one step wider than the support, so the whole space is known.
    pub fn finite(basis: Vec<(String, i32)>) -> Result<Self> {
        let lo = basis.iter().map(|b| b.1).min().unwrap_or(0) - 1;
        let hi = basis.iter().map(|b| b.1).max().unwrap_or(0) + 1;
        GradedSpace::new(basis, (lo, hi))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(String, i32)] {
        &self.basis
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].0
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.basis[i].1
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn with_window(&self, window: (i32, i32)) -> Result<Self> {
        GradedSpace::new(self.basis.clone(), window)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|(l, _)| l == label)
    }

    pub fn in_degree(&self, n: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis[i].1 == n).collect()
    }

    pub fn in_window(&self, n: i32) -> bool {
        n >= self.window.0 && n <= self.window.1
    }

    /// Degree of a vector if it is homogeneous and nonzero.
    pub fn homogeneous_degree(&self, v: &[Q]) -> Option<i32> {
        let mut deg = None;
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            match deg {
                None => deg = Some(self.degree(i)),
                Some(d) if d != self.degree(i) => return None,
                _ => {}
            }
        }
        deg
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub degree: i32,
    /// Rows index the target basis, columns the source basis.
    pub matrix: Matrix,
}

impl LinearMap {
    pub fn new(
        source: GradedSpace,
        target: GradedSpace,
        degree: i32,
        matrix: Matrix,
    ) -> Result<Self> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(Error::Dimension(format!(
                "matrix {}x{} for map {} -> {}",
                matrix.rows(),
                matrix.cols(),
                source.dim(),
                target.dim()
            )));
        }
        for (i, j, _) in matrix.entries() {
            if target.degree(i) != source.degree(j) + degree {
                return Err(Error::Dimension(format!(
                    "entry {} -> {} breaks degree {degree}",
                    source.label(j),
                    target.label(i)
                )));
            }
        }
        Ok(LinearMap {
            source,
            target,
            degree,
            matrix,
        })
    }

    pub fn identity(space: &GradedSpace) -> Self {
        LinearMap {
            source: space.clone(),
            target: space.clone(),
            degree: 0,
            matrix: Matrix::identity(space.dim()),
        }
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.matrix.apply(v)
    }

    pub fn compose(&self, first: &LinearMap) -> Result<LinearMap> {
        if first.target != self.source {
            return Err(Error::Dimension(
                "composable maps need matching spaces".into(),
            ));
        }
        LinearMap::new(
            first.source.clone(),
            self.target.clone(),
            self.degree + first.degree,
            self.matrix.mul(&first.matrix),
        )
    }

    pub fn solve(&self, b: &[Q]) -> Solution {
        self.matrix.solve(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homology {
    pub degree: i32,
    pub dim: usize,
    /// Cycles whose classes form a basis, as vectors in the whole space.
    pub representatives: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    space: GradedSpace,
    d: Matrix,
}

impl ChainComplex {
    pub fn new(space: GradedSpace, d: Matrix) -> Result<Self> {
        let map = LinearMap::new(space.clone(), space.clone(), -1, d)?;
        if !map.matrix.mul(&map.matrix).is_zero() {
            return Err(Error::NotComplex("d∘d is nonzero".into()));
        }
        Ok(ChainComplex {
            space,
            d: map.matrix,
        })
    }

    pub fn zero_differential(space: GradedSpace) -> Self {
        let n = space.dim();
        ChainComplex {
            space,
            d: Matrix::zero(n, n),
        }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn differential(&self) -> LinearMap {
        LinearMap {
            source: self.space.clone(),
            target: self.space.clone(),
            degree: -1,
            matrix: self.d.clone(),
        }
    }

    /// d restricted to degree n, as a matrix from C_n to C_{n-1}.
    pub fn d_block(&self, n: i32) -> Matrix {
        self.d
            .submatrix(&self.space.in_degree(n - 1), &self.space.in_degree(n))
    }

    pub fn homology(&self, n: i32) -> Result<Homology> {
        let (lo, hi) = self.space.window();
        for m in [n - 1, n, n + 1] {
            if m < lo || m > hi {
                return Err(Error::OutOfWindow { degree: m, lo, hi });
            }
        }
        Ok(self.homology_unchecked(n))
    }

    fn homology_unchecked(&self, n: i32) -> Homology {
        let idx = self.space.in_degree(n);
        let above = self.space.in_degree(n + 1);
        let dim = self.dim();
        let cycles = self.d_block(n).kernel();
        let mut span = Span::new(idx.len());
        for j in &above {
            let col: Vec<Q> = idx.iter().map(|&i| self.d.get(i, *j)).collect();
            span.insert(&col);
        }
        let mut reps = Vec::new();
        for z in cycles {
            if span.insert(&z) {
                let mut full = zeros(dim);
                for (k, &i) in idx.iter().enumerate() {
                    full[i] = z[k].clone();
                }
                reps.push(full);
            }
        }
        Homology {
            degree: n,
            dim: reps.len(),
            representatives: reps,
        }
    }

    /// Euler characteristic of the chains, summed over the support.
    pub fn euler_characteristic(&self) -> i64 {
        (0..self.dim())
            .map(|i| {
                if self.space.degree(i).rem_euclid(2) == 0 {
                    1
                } else {
                    -1
                }
            })
            .sum()
    }

    /// Degrees where every neighbour needed for homology is inside the window.
    pub fn homology_degrees(&self) -> Vec<i32> {
        let (lo, hi) = self.space.window();
        (lo + 1..hi).collect()
    }
}

/// Is `v` homogeneous of degree `n` (or zero)?
pub fn concentrated_in(space: &GradedSpace, v: &[Q], n: i32) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, x)| x.is_zero() || space.degree(i) == n)
}

pub fn abs_one(x: &Q) -> bool {
    x.abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(degs: &[i32]) -> GradedSpace {
        GradedSpace::finite(
            degs.iter()
                .enumerate()
                .map(|(i, &d)| (format!("b{i}"), d))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_complex_is_acyclic() {
        let s = space(&[0, 1]);
        let mut d = Matrix::zero(2, 2);
        d.set(0, 1, q(1));
        let c = ChainComplex::new(s, d).unwrap();
        assert_eq!(c.homology(0).unwrap().dim, 0);
        assert_eq!(c.homology(1).unwrap().dim, 0);
    }

    #[test]
    fn zero_differential_keeps_everything() {
        let c = ChainComplex::zero_differential(space(&[0, 0]));
        assert_eq!(c.homology(0).unwrap().dim, 2);
    }

    #[test]
    fn out_of_window_refused() {
        let c = ChainComplex::zero_differential(space(&[0]));
        assert!(c.homology(3).is_err());
    }

    #[test]
    fn nonsquare_zero_rejected() {
        let s = space(&[0, 1, 2]);
        let mut d = Matrix::zero(3, 3);
        d.set(0, 1, q(1));
        d.set(1, 2, q(1));
        assert!(matches!(ChainComplex::new(s, d), Err(Error::NotComplex(_))));
    }

    #[test]
    fn koszul_basics() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]), 1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]), -1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 2]), 1);
        assert_eq!(perm_sign(&[2, 0, 1]), 1);
        assert_eq!(perm_sign(&[1, 0, 2]), -1);
    }

    #[test]
    fn suspension_examples() {
        for a0 in 0..3 {
            for a1 in 0..3 {
                for a2 in 0..3 {
                    assert_eq!(suspension_sign(&[a0, a1, a2]), sign_pow(a1 as i64));
                }
                assert_eq!(suspension_sign(&[a0, a1]), sign_pow(a0 as i64));
            }
            assert_eq!(suspension_sign(&[a0]), 1);
        }
    }

    #[test]
    fn solve_and_certificate() {
        let m = Matrix::from_dense(&[vec![q(1), q(2)], vec![q(2), q(4)]]);
        let b = vec![q(3), q(6)];
        let x = m.solve(&b).ok().unwrap();
        assert_eq!(m.apply(&x), b);
        match m.solve(&[q(1), q(0)]) {
            Solution::Inconsistent(y) => {
                assert!(m.transpose().apply(&y).iter().all(Zero::is_zero));
                assert!(!dot(&y, &[q(1), q(0)]).is_zero());
            }
            Solution::Solved(_) => panic!("system should be inconsistent"),
        }
    }

    #[test]
    fn span_coordinates() {
        let vs = vec![
            vec![q(1), q(1), q(0)],
            vec![q(0), q(1), q(1)],
            vec![q(1), q(2), q(1)],
        ];
        let s = Span::from_vectors(3, &vs);
        assert_eq!(s.dim(), 2);
        let target = vec![q(2), q(5), q(3)];
        let c = s.coords(&target).unwrap();
        let mut back = zeros(3);
        for (k, v) in vs.iter().enumerate() {
            for i in 0..3 {
                back[i] += &c[k] * &v[i];
            }
        }
        assert_eq!(back, target);
        assert!(s.coords(&[q(1), q(0), q(0)]).is_none());
    }

    #[test]
    fn rational_format_roundtrip() {
        let x = q_frac(-6, 4);
        assert_eq!(fmt_q(&x), "-3/2");
        assert_eq!(parse_q("-3/2").unwrap(), x);
        assert_eq!(parse_q("7").unwrap(), q(7));
        assert!(parse_q("1/0").is_none());
    }
}
