//! `F_q`-subspaces of `F_{q^m}`.
//!
//! A subspace is stored as the reduced row-echelon basis of its coordinate
//! row space, with no zero rows. That form is canonical, so structural
//! equality is subspace equality.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct Subspace {
    basis: Matrix,
}

impl TryFrom<Matrix> for Subspace {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        let s = Subspace::row_space(&m);
        if s.basis != m {
            return Err(Error::Consistency("basis is not in canonical reduced form".into()));
        }
        Ok(s)
    }
}

impl From<Subspace> for Matrix {
    fn from(s: Subspace) -> Matrix {
        s.basis
    }
}

impl Subspace {
    pub fn zero(field: &Field) -> Self {
        Subspace { basis: Matrix::zeros(field.q(), 0, field.degree()) }
    }

    pub fn full(field: &Field) -> Self {
        Subspace { basis: Matrix::identity(field.q(), field.degree()) }
    }

    /// Canonical row space of an arbitrary `k x m` coordinate matrix.
    pub fn row_space(m: &Matrix) -> Self {
        let r = m.rref();
        let basis = r.rref.submatrix(0..r.rank, 0..m.cols());
        Subspace { basis }
    }

    /// `F_q`-span of the given elements; empty input gives the zero subspace.
    pub fn span(field: &Field, elems: &[Elem]) -> Self {
        let m = field.degree();
        let mut data = Vec::with_capacity(elems.len() * m);
        for e in elems {
            debug_assert_eq!(e.coords().len(), m);
            data.extend_from_slice(e.coords());
        }
        Self::row_space(&Matrix::from_raw(field.q(), elems.len(), m, data))
    }

    /// `V_{α,d} = ⟨1, α, …, α^{d-1}⟩`.
    pub fn bounded_degree(field: &Field, d: usize) -> Result<Self> {
        if d == 0 || d > field.degree() {
            return param(format!("bounded degree {d} outside 1..={}", field.degree()));
        }
        let mut elems = Vec::with_capacity(d);
        let mut x = field.one();
        for _ in 0..d {
            let next = field.mul_alpha(&x);
            elems.push(x);
            x = next;
        }
        Ok(Self::span(field, &elems))
    }

    /// Uniform subspace of dimension `r`: the row space of a uniform
    /// full-rank `r x m` matrix.
    pub fn random<R: Rng + ?Sized>(field: &Field, r: usize, rng: &mut R) -> Result<Self> {
        let m = field.degree();
        if r > m {
            return param(format!("dimension {r} exceeds m = {m}"));
        }
        let mat = Matrix::random_of_rank(field.q(), r, m, r, rng)?;
        Ok(Self::row_space(&mat))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Canonical basis rows as field elements.
    pub fn basis_elems(&self) -> Vec<Elem> {
        (0..self.dim())
            .map(|i| Elem::from_coords_unchecked(self.basis.row(i).to_vec()))
            .collect()
    }

    /// Membership by reduction against the echelon basis.
    pub fn contains(&self, x: &Elem) -> bool {
        let q = self.basis.q() as u64;
        let mut v: Vec<u32> = x.coords().to_vec();
        for i in 0..self.dim() {
            let row = self.basis.row(i);
            let pivot = row.iter().position(|&c| c != 0).expect("no zero rows");
            let f = v[pivot] as u64;
            if f != 0 {
                for (a, &b) in v.iter_mut().zip(row) {
                    *a = ((*a as u64 + (q - f) * b as u64) % q) as u32;
                }
            }
        }
        v.iter().all(|&c| c == 0)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis_elems().iter().all(|e| other.contains(e))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Self::row_space(&self.basis.vstack(&other.basis))
    }

    /// `U ∩ V` by Zassenhaus: eliminate `[U | U ; V | 0]`; rows whose left
    /// half vanishes carry a basis of the intersection in their right half.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let m = self.basis.cols();
        let q = self.basis.q();
        if self.is_zero() || other.is_zero() {
            return Subspace { basis: Matrix::zeros(q, 0, m) };
        }
        let top = self.basis.hstack(&self.basis);
        let bottom = other.basis.hstack(&Matrix::zeros(q, other.dim(), m));
        let r = top.vstack(&bottom).rref();
        let first_right = r.pivot_cols.iter().position(|&c| c >= m).unwrap_or(r.rank);
        let inter = r.rref.submatrix(first_right..r.rank, m..2 * m);
        Self::row_space(&inter)
    }

    /// `E W`, spanned by all pairwise products of basis elements.
    pub fn product(&self, field: &Field, other: &Subspace) -> Subspace {
        let a = self.basis_elems();
        let b = other.basis_elems();
        let mut prods = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                prods.push(field.mul(x, y));
            }
        }
        Self::span(field, &prods)
    }

    /// `V_{α,t} · self`, using repeated multiplication by `α`.
    pub fn alpha_expand(&self, field: &Field, t: usize) -> Subspace {
        let base = self.basis_elems();
        let mut all = Vec::with_capacity(base.len() * t);
        let mut layer = base;
        for i in 0..t {
            if i + 1 < t {
                let next: Vec<Elem> = layer.iter().map(|e| field.mul_alpha(e)).collect();
                all.append(&mut layer);
                layer = next;
            } else {
                all.append(&mut layer);
            }
        }
        Self::span(field, &all)
    }

    /// `c · U` for a nonzero scalar `c ∈ F_{q^m}`.
    pub fn scale(&self, field: &Field, c: &Elem) -> Result<Subspace> {
        if c.is_zero() {
            return param("cannot scale a subspace by zero");
        }
        let elems: Vec<Elem> = self.basis_elems().iter().map(|e| field.mul(c, e)).collect();
        Ok(Self::span(field, &elems))
    }
}
