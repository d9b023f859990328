//! Dense linear algebra over a prime field `F_q`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{inv_mod, is_prime};

/// Row-major matrix over `F_q` with entries in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    q: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    q: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        if !is_prime(r.q) {
            return param(format!("q = {} is not prime", r.q));
        }
        Matrix::from_vec(r.q, r.rows, r.cols, r.entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr { q: m.q, rows: m.rows, cols: m.cols, entries: m.data }
    }
}

/// Reduced row-echelon form of a matrix together with its rank and pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rref: Matrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    /// Every solution is `particular + span(kernel)`.
    Consistent { particular: Vec<u32>, kernel: Vec<Vec<u32>> },
    Inconsistent,
}

impl Matrix {
    pub fn zeros(q: u32, rows: usize, cols: usize) -> Self {
        Matrix { q, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(q: u32, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(q: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return param(format!(
                "{} entries given for a {rows}x{cols} matrix",
                data.len()
            ));
        }
        if data.iter().any(|&x| x >= q) {
            return param(format!("matrix entry out of range for q = {q}"));
        }
        Ok(Matrix { q, rows, cols, data })
    }

    /// Builds a matrix from equal-length rows. An empty slice gives a `0 x cols` matrix.
    pub fn from_rows(q: u32, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return param("ragged rows");
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(q, rows.len(), cols, data)
    }

    pub(crate) fn from_raw(q: u32, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { q, rows, cols, data }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        assert!(v < self.q);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.q, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        assert_eq!(self.q, other.q);
        let q = self.q as u64;
        let mut out = vec![0u64; self.rows * other.cols];
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l] as u64;
                if a == 0 {
                    continue;
                }
                let brow = other.row(l);
                let orow = &mut out[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = (*o + a * b as u64) % q;
                }
            }
        }
        Matrix::from_raw(self.q, self.rows, other.cols, out.into_iter().map(|x| x as u32).collect())
    }

    pub fn mul_vec(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.cols);
        let q = self.q as u64;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % q) as u32
            })
            .collect()
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix::from_raw(self.q, self.rows + other.rows, self.cols, data)
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Matrix::from_raw(self.q, self.rows, cols, data)
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for i in rows.clone() {
            data.extend_from_slice(&self.row(i)[cols.clone()]);
        }
        Matrix::from_raw(self.q, rows.len(), cols.len(), data)
    }

    /// Gauss-Jordan elimination in place, choosing pivots only among the first
    /// `pivot_limit` columns. Returns the pivot columns.
    fn eliminate(&mut self, pivot_limit: usize) -> Vec<usize> {
        let q = self.q as u64;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        let mut prow = vec![0u32; cols];
        for c in 0..pivot_limit.min(cols) {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let lead = self.data[r * cols + c];
            if lead != 1 {
                let li = inv_mod(lead, self.q) as u64;
                for x in &mut self.data[r * cols + c..(r + 1) * cols] {
                    *x = (*x as u64 * li % q) as u32;
                }
            }
            prow[c..].copy_from_slice(&self.data[r * cols + c..(r + 1) * cols]);
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c] as u64;
                if f == 0 {
                    continue;
                }
                let row = &mut self.data[i * cols + c..(i + 1) * cols];
                if q == 2 {
                    for (x, &y) in row.iter_mut().zip(&prow[c..]) {
                        *x ^= y;
                    }
                } else {
                    let nf = q - f;
                    for (x, &y) in row.iter_mut().zip(&prow[c..]) {
                        *x = ((*x as u64 + nf * y as u64) % q) as u32;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Canonical reduced row-echelon form.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivot_cols = m.eliminate(self.cols);
        Rref { rank: pivot_cols.len(), rref: m, pivot_cols }
    }

    /// Rank, with a bit-packed path for `q = 2`.
    pub fn rank(&self) -> usize {
        if self.q == 2 {
            rank_gf2(self)
        } else {
            self.rref().rank
        }
    }

    /// Kernel basis: vectors `x` with `A x = 0`, one per free column.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let r = self.rref();
        kernel_from_rref(&r, self.cols)
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve(&self, b: &[u32]) -> Result<Solution> {
        if b.len() != self.rows {
            return param(format!("rhs has length {}, expected {}", b.len(), self.rows));
        }
        let rhs = Matrix::from_vec(self.q, self.rows, 1, b.to_vec())?;
        Ok(match self.solve_many(&rhs)? {
            Some(x) => Solution::Consistent {
                particular: x.data,
                kernel: self.kernel(),
            },
            None => Solution::Inconsistent,
        })
    }

    /// Solves `A X = B` column by column with one shared elimination. Returns
    /// the particular solution with all free variables zero, or `None` if any
    /// column is inconsistent.
    pub fn solve_many(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        if rhs.rows != self.rows || rhs.q != self.q {
            return param("right-hand side shape does not match");
        }
        let mut aug = self.hstack(rhs);
        let pivots = aug.eliminate(self.cols);
        let rank = pivots.len();
        let width = aug.cols;
        for i in rank..aug.rows {
            if aug.data[i * width + self.cols..(i + 1) * width].iter().any(|&x| x != 0) {
                return Ok(None);
            }
        }
        let mut x = Matrix::zeros(self.q, self.cols, rhs.cols);
        for (i, &c) in pivots.iter().enumerate() {
            let src = &aug.data[i * width + self.cols..(i + 1) * width];
            x.data[c * rhs.cols..(c + 1) * rhs.cols].copy_from_slice(src);
        }
        Ok(Some(x))
    }

    pub fn random<R: Rng + ?Sized>(q: u32, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        Matrix::from_raw(q, rows, cols, data)
    }

    /// Uniform sample among `rows x cols` matrices of rank exactly `rank`.
    ///
    /// Full rank is reached by rejection. Lower ranks use `C · R` with `C`
    /// (`rows x rank`) and `R` (`rank x cols`) uniform of full rank: every
    /// rank-`rank` matrix has exactly `|GL_rank(F_q)|` such factorisations,
    /// so the product is uniform too.
    pub fn random_of_rank<R: Rng + ?Sized>(
        q: u32,
        rows: usize,
        cols: usize,
        rank: usize,
        rng: &mut R,
    ) -> Result<Matrix> {
        if rank > rows.min(cols) {
            return param(format!("rank {rank} impossible for a {rows}x{cols} matrix"));
        }
        if rank == 0 {
            return Ok(Matrix::zeros(q, rows, cols));
        }
        if rank == rows.min(cols) {
            loop {
                let m = Matrix::random(q, rows, cols, rng);
                if m.rank() == rank {
                    return Ok(m);
                }
            }
        }
        let left = Matrix::random_of_rank(q, rows, rank, rank, rng)?;
        let right = Matrix::random_of_rank(q, rank, cols, rank, rng)?;
        Ok(left.mul(&right))
    }
}

pub(crate) fn kernel_from_rref(r: &Rref, cols: usize) -> Vec<Vec<u32>> {
    let q = r.rref.q;
    let mut is_pivot = vec![false; cols];
    for &c in &r.pivot_cols {
        is_pivot[c] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![0u32; cols];
            v[f] = 1;
            for (i, &c) in r.pivot_cols.iter().enumerate() {
                let a = r.rref.get(i, f);
                v[c] = (q - a) % q;
            }
            v
        })
        .collect()
}

fn rank_gf2(m: &Matrix) -> usize {
    let words = m.cols.div_ceil(64).max(1);
    let mut bits = vec![0u64; m.rows * words];
    for i in 0..m.rows {
        for (j, &x) in m.row(i).iter().enumerate() {
            if x & 1 == 1 {
                bits[i * words + j / 64] |= 1 << (j % 64);
            }
        }
    }
    let mut rank = 0;
    for c in 0..m.cols {
        if rank == m.rows {
            break;
        }
        let (w, b) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..m.rows).find(|&i| bits[i * words + w] & b != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..words {
                bits.swap(p * words + k, rank * words + k);
            }
        }
        for i in rank + 1..m.rows {
            if bits[i * words + w] & b != 0 {
                for k in w..words {
                    let v = bits[rank * words + k];
                    bits[i * words + k] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}
