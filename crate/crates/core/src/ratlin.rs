//! Exact rational dense/sparse linear algebra: rank, kernel, orthogonal
//! complement and incremental row echelon forms.
//!
//! All entries are `num::BigRational`. Matrices are immutable once built;
//! every routine is a pure function of its inputs.

use num::{BigRational, Signed, Zero};
use std::collections::BTreeMap;

/// Exact rational scalar used everywhere in the crate.
pub type Q = BigRational;

/// Shorthand for an integer constant as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// n/d as a rational.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Exact factorial as a rational.
pub fn factorial(n: usize) -> Q {
    let mut acc = num::BigInt::from(1u32);
    for k in 2..=n {
        acc *= num::BigInt::from(k);
    }
    Q::from_integer(acc)
}

/// Dense matrix with exact rational entries, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, qi(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = RatMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Q::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc += a * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Rank over Q by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new();
        for i in 0..self.rows {
            ech.insert(dense_to_sparse(self.row(i)));
        }
        ech.rank()
    }

    /// Basis of the right null space {v : M v = 0}; dim = cols - rank.
    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        let rows: Vec<SparseVec> = (0..self.rows).map(|i| dense_to_sparse(self.row(i))).collect();
        kernel_of_rows(&rows, self.cols)
            .into_iter()
            .map(|s| sparse_to_dense(&s, self.cols))
            .collect()
    }
}

/// Sparse vector: (index, value) pairs sorted by index, values nonzero.
pub type SparseVec = Vec<(usize, Q)>;

pub fn dense_to_sparse(v: &[Q]) -> SparseVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

pub fn sparse_to_dense(v: &SparseVec, len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// a + c*b for sparse vectors.
pub fn sparse_axpy(a: &SparseVec, c: &Q, b: &SparseVec) -> SparseVec {
    let mut out = SparseVec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn sparse_scale(a: &SparseVec, c: &Q) -> SparseVec {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(i, x)| (*i, x * c)).collect()
}

/// Incremental sparse row echelon form over Q.
///
/// Rows are kept with their leading (lowest-index) column as pivot, leading
/// coefficient normalized to 1. The set of pivot columns is exactly the
/// column support of the span, so the non-pivot columns index a complement
/// basis of the quotient by the span.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SparseVec>,
    pivot_of_col: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivot_of_col.keys().copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of_col.contains_key(&col)
    }

    /// Reduce `v` against the echelon rows; the result has no support on
    /// pivot columns. This is the canonical representative of `v` modulo
    /// the row span.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        loop {
            let hit = v.iter().find_map(|(c, x)| {
                self.pivot_of_col.get(c).map(|r| (*r, x.clone()))
            });
            match hit {
                None => return v,
                Some((r, coef)) => {
                    let neg = -coef;
                    v = sparse_axpy(&v, &neg, &self.rows[r]);
                }
            }
        }
    }

    /// Insert a row; returns true when it enlarged the span. The echelon
    /// is kept fully reduced (no row has support on another row's pivot
    /// column), which kernel extraction relies on.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut r = self.reduce(v);
        if r.is_empty() {
            return false;
        }
        let lead = r[0].1.clone();
        let inv = qi(1) / lead;
        r = sparse_scale(&r, &inv);
        let pcol = r[0].0;
        for row in &mut self.rows {
            if let Some(c) = row.iter().find(|(j, _)| *j == pcol).map(|(_, c)| c.clone()) {
                let neg = -c;
                *row = sparse_axpy(row, &neg, &r);
            }
        }
        self.pivot_of_col.insert(pcol, self.rows.len());
        self.rows.push(r);
        true
    }

    /// Columns in 0..dim that are not pivots: a basis of the quotient.
    pub fn complement(&self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|c| !self.is_pivot(*c)).collect()
    }
}

/// Kernel of the linear map given by `rows` (each row one equation) on Q^cols.
pub fn kernel_of_rows(rows: &[SparseVec], cols: usize) -> Vec<SparseVec> {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(r.clone());
    }
    // Free columns parameterize the kernel. For a free column f, the kernel
    // vector has v[f] = 1 and v[p] = -row_p[f] for each pivot column p.
    let mut out = Vec::new();
    for f in ech.complement(cols) {
        let mut v: SparseVec = vec![(f, qi(1))];
        for (p, r) in &ech.pivot_of_col {
            let coeff = ech.rows[*r].iter().find(|(c, _)| c == &f).map(|(_, x)| x.clone());
            if let Some(x) = coeff {
                v.push((*p, -x));
            }
        }
        v.sort_by_key(|(c, _)| *c);
        out.push(v);
    }
    out
}

/// Basis of {w in Q^dim : <w, s> = 0 for all s in span} for the Kronecker
/// pairing on coordinates.
pub fn orthogonal_complement(span: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    for s in span {
        assert_eq!(s.len(), dim, "vector length does not match ambient dimension");
    }
    let rows: Vec<SparseVec> = span.iter().map(|s| dense_to_sparse(s)).collect();
    kernel_of_rows(&rows, dim).into_iter().map(|s| sparse_to_dense(&s, dim)).collect()
}

/// Dot product in coordinates.
pub fn dot(a: &[Q], b: &[Q]) -> Q {
    assert_eq!(a.len(), b.len());
    let mut acc = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Solver that expresses vectors in the span of a fixed generating family,
/// tracking the combination coefficients.
#[derive(Clone, Debug, Default)]
pub struct LinSolver {
    ech: Vec<(SparseVec, SparseVec)>, // (reduced row, combination over generators)
    pivot_of_col: BTreeMap<usize, usize>,
    ngens: usize,
}

impl LinSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_generator(&mut self, v: SparseVec) {
        let tag: SparseVec = vec![(self.ngens, qi(1))];
        self.ngens += 1;
        let (mut r, mut comb) = (v, tag);
        loop {
            let hit = r.iter().find_map(|(c, x)| self.pivot_of_col.get(c).map(|i| (*i, x.clone())));
            match hit {
                None => break,
                Some((i, coef)) => {
                    let neg = -coef;
                    r = sparse_axpy(&r, &neg, &self.ech[i].0);
                    comb = sparse_axpy(&comb, &neg, &self.ech[i].1);
                }
            }
        }
        if r.is_empty() {
            return;
        }
        let inv = qi(1) / r[0].1.clone();
        r = sparse_scale(&r, &inv);
        comb = sparse_scale(&comb, &inv);
        self.pivot_of_col.insert(r[0].0, self.ech.len());
        self.ech.push((r, comb));
    }

    pub fn rank(&self) -> usize {
        self.ech.len()
    }

    /// Coordinates c with v = sum c_g * gen_g, or None when v is outside
    /// the span.
    pub fn solve(&self, v: SparseVec) -> Option<Vec<Q>> {
        let mut r = v;
        let mut comb: SparseVec = Vec::new();
        loop {
            let hit = r.iter().find_map(|(c, x)| self.pivot_of_col.get(c).map(|i| (*i, x.clone())));
            match hit {
                None => break,
                Some((i, coef)) => {
                    let neg = -coef.clone();
                    r = sparse_axpy(&r, &neg, &self.ech[i].0);
                    comb = sparse_axpy(&comb, &coef, &self.ech[i].1);
                }
            }
        }
        if !r.is_empty() {
            return None;
        }
        Some(sparse_to_dense(&comb, self.ngens))
    }
}

/// Render a rational without superfluous `/1`.
pub fn fmt_q(x: &Q) -> String {
    if x.denom() == &num::BigInt::from(1) {
        format!("{}", x.numer())
    } else if x.is_negative() && x.numer().magnitude() == x.denom().magnitude() {
        // keep -1/1 style out; BigRational normalizes so this is unreachable
        format!("{}", x)
    } else {
        format!("{}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_trivial_cases() {
        assert_eq!(RatMatrix::zero(3, 3).rank(), 0);
        assert_eq!(RatMatrix::identity(4).rank(), 4);
        let m = RatMatrix::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_cases() {
        assert!(RatMatrix::identity(3).kernel_basis().is_empty());
        assert_eq!(RatMatrix::zero(2, 3).kernel_basis().len(), 3);
        let m = RatMatrix::from_rows(vec![vec![qi(1), qi(1)]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // span of (1, -1)
        assert_eq!(&k[0][0] + &k[0][1], Q::zero());
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn orthogonal_complement_cases() {
        let c = orthogonal_complement(&[], 2);
        assert_eq!(c.len(), 2);
        let full = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert!(orthogonal_complement(&full, 2).is_empty());
        let s = vec![vec![qi(1), qi(1), qi(0)]];
        let c = orthogonal_complement(&s, 3);
        assert_eq!(c.len(), 2);
        for w in &c {
            assert_eq!(dot(w, &s[0]), Q::zero());
        }
    }

    #[test]
    fn complement_plus_span_is_ambient() {
        // nondegenerate pairing in characteristic 0
        let s = vec![
            vec![qi(1), qi(2), qi(3), qi(0)],
            vec![qi(0), qi(1), qi(1), qi(1)],
            vec![qi(1), qi(3), qi(4), qi(1)],
        ];
        let mut ech = Echelon::new();
        for v in &s {
            ech.insert(dense_to_sparse(v));
        }
        let c = orthogonal_complement(&s, 4);
        assert_eq!(ech.rank() + c.len(), 4);
    }

    #[test]
    fn kernel_with_nontriangular_pivots() {
        // regression: back-substitution needs the fully reduced echelon
        let m = RatMatrix::from_rows(vec![
            vec![qi(-1), qi(-1), qi(0)],
            vec![qi(-1), qi(0), qi(1)],
        ]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()), "not in kernel: {:?}", v);
        }
        // random-ish shaped matrix: every reported kernel vector really is one
        let m = RatMatrix::from_rows(vec![
            vec![qi(2), qi(1), qi(0), qi(3), qi(1)],
            vec![qi(0), qi(0), qi(1), qi(1), qi(2)],
            vec![qi(2), qi(1), qi(1), qi(4), qi(3)],
            vec![qi(1), qi(1), qi(1), qi(1), qi(1)],
        ]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 5 - m.rank());
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solver_roundtrip() {
        let mut ls = LinSolver::new();
        ls.push_generator(dense_to_sparse(&[qi(1), qi(1), qi(0)]));
        ls.push_generator(dense_to_sparse(&[qi(0), qi(1), qi(1)]));
        let v = dense_to_sparse(&[qi(2), qi(5), qi(3)]);
        let c = ls.solve(v).unwrap();
        assert_eq!(c, vec![qi(2), qi(3)]);
        assert!(ls.solve(dense_to_sparse(&[qi(1), qi(0), qi(0)])).is_none());
    }
}
