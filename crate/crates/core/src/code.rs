//! Bounded-degree LRPC code instances.
//!
//! Every parity-check entry `h_{i,j}` lies in `V_{α,d}` and is kept as its
//! coefficient vector `(h_{i,j,0}, …, h_{i,j,d-1})` over `F_q`. The expanded
//! matrix `H_ext` stacks those coefficients row block by row block.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::Matrix;
use crate::subspace::Subspace;

/// A vector in `F_{q^m}^n`: codeword, error or received word.
pub type Word = Vec<Elem>;

/// Default number of parity-check resamples before giving up.
pub const DEFAULT_RETRY_BUDGET: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl CodeParams {
    pub fn new(q: u32, m: usize, n: usize, k: usize, d: usize) -> Result<Self> {
        let p = CodeParams { q, m, n, k, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0 < self.k && self.k < self.n) {
            return param(format!("need 0 < k < n, got k = {}, n = {}", self.k, self.n));
        }
        if self.d == 0 || self.d > self.m {
            return param(format!("need 1 <= d <= m, got d = {}, m = {}", self.d, self.m));
        }
        Ok(())
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    /// `d ≥ n / (n - k)`, the dimension half of the unique-decoding property.
    pub fn admits_unique_decoding(&self) -> bool {
        self.d * self.redundancy() >= self.n
    }
}

/// Properties a sampled parity-check matrix must satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirements {
    pub maximal_row_span: bool,
    pub unique_decoding: bool,
}

impl Requirements {
    pub fn both() -> Self {
        Requirements { maximal_row_span: true, unique_decoding: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub maximal_row_span: bool,
    pub unique_decoding: bool,
}

#[derive(Clone, Debug)]
pub struct CodeInstance {
    params: CodeParams,
    field: Field,
    /// `h_{i,j,v}` at `(i * n + j) * d + v`.
    coeffs: Vec<u32>,
    h: Vec<Elem>,
    h_ext: Matrix,
    generator: Vec<Word>,
    flags: Flags,
}

/// On-disk form; `H_ext` and the generator are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct CodeFile {
    params: CodeParams,
    modulus_poly: Vec<u32>,
    /// `h[i][j][v]`
    h: Vec<Vec<Vec<u32>>>,
    flags: Flags,
}

impl CodeInstance {
    /// Samples `H` with i.i.d. uniform coefficients until the entries span
    /// exactly `V_{α,d}`, the rows are independent over `F_{q^m}` and every
    /// required property holds.
    pub fn sample<R: Rng + ?Sized>(
        field: &Field,
        params: CodeParams,
        req: Requirements,
        rng: &mut R,
    ) -> Result<Self> {
        Self::sample_with_budget(field, params, req, DEFAULT_RETRY_BUDGET, rng)
    }

    pub fn sample_with_budget<R: Rng + ?Sized>(
        field: &Field,
        params: CodeParams,
        req: Requirements,
        budget: usize,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        check_field(field, &params)?;
        if req.unique_decoding && !params.admits_unique_decoding() {
            return param(format!(
                "unique decoding needs d >= n/(n-k); d = {}, n = {}, n-k = {}",
                params.d,
                params.n,
                params.redundancy()
            ));
        }
        let (nk, n, d) = (params.redundancy(), params.n, params.d);
        let mut failures = [0usize; 4];
        const NAMES: [&str; 4] = [
            "entries span V_{alpha,d}",
            "maximal-row-span",
            "unique-decoding (H_ext column rank n)",
            "rows of H independent over F_{q^m}",
        ];
        for _ in 0..budget.max(1) {
            let coeffs: Vec<u32> = (0..nk * n * d).map(|_| rng.gen_range(0..params.q)).collect();
            if coeff_rank(params.q, d, &coeffs) != d {
                failures[0] += 1;
                continue;
            }
            if req.maximal_row_span
                && !(0..nk).all(|i| coeff_rank(params.q, d, &coeffs[i * n * d..(i + 1) * n * d]) == d)
            {
                failures[1] += 1;
                continue;
            }
            let h_ext = h_ext_from_coeffs(params.q, nk, n, d, &coeffs);
            if req.unique_decoding && h_ext.rank() != n {
                failures[2] += 1;
                continue;
            }
            let h = entries_from_coeffs(field, nk, n, d, &coeffs);
            let (rank, kernel) = ext_rank_and_kernel(field, nk, n, &h);
            if rank != nk {
                failures[3] += 1;
                continue;
            }
            let flags = compute_flags(&params, &coeffs, &h_ext);
            return Ok(CodeInstance { params, field: field.clone(), coeffs, h, h_ext, generator: kernel, flags });
        }
        let worst = (0..4).max_by_key(|&i| failures[i]).unwrap_or(0);
        Err(Error::Construction { attempts: budget.max(1), predicate: NAMES[worst].into() })
    }

    /// Builds an instance from an explicit coefficient tensor `h[i][j][v]`.
    pub fn from_coefficients(field: &Field, params: CodeParams, h: &[Vec<Vec<u32>>]) -> Result<Self> {
        params.validate()?;
        check_field(field, &params)?;
        let (nk, n, d) = (params.redundancy(), params.n, params.d);
        if h.len() != nk || h.iter().any(|row| row.len() != n || row.iter().any(|c| c.len() != d)) {
            return param(format!("coefficient tensor must be {nk} x {n} x {d}"));
        }
        let coeffs: Vec<u32> = h.iter().flatten().flatten().copied().collect();
        if coeffs.iter().any(|&c| c >= params.q) {
            return param("coefficient out of range");
        }
        if coeff_rank(params.q, d, &coeffs) != d {
            return Err(Error::Consistency("entries of H do not span V_{alpha,d}".into()));
        }
        let h_ext = h_ext_from_coeffs(params.q, nk, n, d, &coeffs);
        let hm = entries_from_coeffs(field, nk, n, d, &coeffs);
        let (rank, kernel) = ext_rank_and_kernel(field, nk, n, &hm);
        if rank != nk {
            return Err(Error::Consistency("rows of H are dependent over F_{q^m}".into()));
        }
        let flags = compute_flags(&params, &coeffs, &h_ext);
        Ok(CodeInstance { params, field: field.clone(), coeffs, h: hm, h_ext, generator: kernel, flags })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn h(&self, i: usize, j: usize) -> &Elem {
        &self.h[i * self.params.n + j]
    }

    /// Parity-check matrix as rows of field elements.
    pub fn parity_check(&self) -> Vec<Word> {
        self.h.chunks(self.params.n).map(|r| r.to_vec()).collect()
    }

    pub fn coefficient(&self, i: usize, j: usize, v: usize) -> u32 {
        self.coeffs[(i * self.params.n + j) * self.params.d + v]
    }

    pub fn h_ext(&self) -> &Matrix {
        &self.h_ext
    }

    /// `k x n` generator with `G Hᵀ = 0`.
    pub fn generator(&self) -> &[Word] {
        &self.generator
    }

    pub fn check_unique_decoding(&self) -> bool {
        self.params.admits_unique_decoding() && self.h_ext.rank() == self.params.n
    }

    pub fn check_maximal_row_span(&self) -> bool {
        let (n, d) = (self.params.n, self.params.d);
        (0..self.params.redundancy())
            .all(|i| coeff_rank(self.params.q, d, &self.coeffs[i * n * d..(i + 1) * n * d]) == d)
    }

    /// `s = y Hᵀ`, evaluated as `s_i = Σ_v α^v Σ_j h_{i,j,v} y_j`.
    pub fn syndrome(&self, y: &[Elem]) -> Result<Word> {
        let (n, d) = (self.params.n, self.params.d);
        if y.len() != n {
            return param(format!("word has length {}, expected {n}", y.len()));
        }
        let f = &self.field;
        Ok((0..self.params.redundancy())
            .map(|i| {
                let mut acc = f.zero();
                for v in (0..d).rev() {
                    acc = f.mul_alpha(&acc);
                    for (j, yj) in y.iter().enumerate() {
                        f.add_scaled_assign(&mut acc, yj, self.coeffs[(i * n + j) * d + v]);
                    }
                }
                acc
            })
            .collect())
    }

    /// `message · G`.
    pub fn encode(&self, message: &[Elem]) -> Result<Word> {
        if message.len() != self.params.k {
            return param(format!("message has length {}, expected {}", message.len(), self.params.k));
        }
        let f = &self.field;
        let mut c = vec![f.zero(); self.params.n];
        for (mi, row) in message.iter().zip(&self.generator) {
            if mi.is_zero() {
                continue;
            }
            for (cj, gij) in c.iter_mut().zip(row) {
                *cj = f.add(cj, &f.mul(mi, gij));
            }
        }
        Ok(c)
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let msg: Vec<Elem> = (0..self.params.k).map(|_| self.field.random(rng)).collect();
        self.encode(&msg).expect("message length matches k")
    }

    pub fn to_json(&self) -> String {
        let (nk, n, d) = (self.params.redundancy(), self.params.n, self.params.d);
        let h = (0..nk)
            .map(|i| (0..n).map(|j| (0..d).map(|v| self.coefficient(i, j, v)).collect()).collect())
            .collect();
        let file = CodeFile {
            params: self.params,
            modulus_poly: self.field.modulus().to_vec(),
            h,
            flags: self.flags,
        };
        serde_json::to_string_pretty(&file).expect("code file serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CodeFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let field = Field::with_modulus(file.params.q, file.modulus_poly)?;
        let code = Self::from_coefficients(&field, file.params, &file.h)?;
        if code.flags != file.flags {
            return Err(Error::Consistency(format!(
                "stored flags {:?} disagree with recomputed {:?}",
                file.flags, code.flags
            )));
        }
        Ok(code)
    }
}

fn check_field(field: &Field, params: &CodeParams) -> Result<()> {
    if field.q() != params.q || field.degree() != params.m {
        return param(format!(
            "field F_{}^{} does not match code parameters q = {}, m = {}",
            field.q(),
            field.degree(),
            params.q,
            params.m
        ));
    }
    Ok(())
}

fn compute_flags(params: &CodeParams, coeffs: &[u32], h_ext: &Matrix) -> Flags {
    let (n, d) = (params.n, params.d);
    Flags {
        maximal_row_span: (0..params.redundancy())
            .all(|i| coeff_rank(params.q, d, &coeffs[i * n * d..(i + 1) * n * d]) == d),
        unique_decoding: params.admits_unique_decoding() && h_ext.rank() == n,
    }
}

/// Rank of a run of length-`d` coefficient vectors.
fn coeff_rank(q: u32, d: usize, coeffs: &[u32]) -> usize {
    Matrix::from_raw(q, coeffs.len() / d, d, coeffs.to_vec()).rank()
}

fn h_ext_from_coeffs(q: u32, nk: usize, n: usize, d: usize, coeffs: &[u32]) -> Matrix {
    let mut data = vec![0u32; nk * d * n];
    for i in 0..nk {
        for j in 0..n {
            for v in 0..d {
                data[(i * d + v) * n + j] = coeffs[(i * n + j) * d + v];
            }
        }
    }
    Matrix::from_raw(q, nk * d, n, data)
}

fn entries_from_coeffs(field: &Field, nk: usize, n: usize, d: usize, coeffs: &[u32]) -> Vec<Elem> {
    // α^v has coordinate vector e_v for v < m, so h_{i,j} = Σ h_{i,j,v} α^v
    // is the coefficient vector padded to length m.
    (0..nk * n).map(|idx| field.low_degree_elem(&coeffs[idx * d..(idx + 1) * d])).collect()
}

/// Expanded matrix of a parity-check matrix given over `F_{q^m}`.
///
/// Row `i·d + v` holds the `α^v` coefficients of row `i`. Fails if an entry
/// lies outside `V_{α,d}`.
pub fn build_h_ext(field: &Field, d: usize, h: &[Word]) -> Result<Matrix> {
    if d == 0 || d > field.degree() {
        return param(format!("d = {d} outside 1..={}", field.degree()));
    }
    let nk = h.len();
    let n = h.first().map_or(0, |r| r.len());
    let mut data = vec![0u32; nk * d * n];
    for (i, row) in h.iter().enumerate() {
        if row.len() != n {
            return param("ragged parity-check matrix");
        }
        for (j, e) in row.iter().enumerate() {
            field.validate(e)?;
            let c = e.coords();
            if c[d..].iter().any(|&x| x != 0) {
                return Err(Error::Consistency(format!("h[{i}][{j}] lies outside V_(alpha,d)")));
            }
            for v in 0..d {
                data[(i * d + v) * n + j] = c[v];
            }
        }
    }
    Ok(Matrix::from_raw(field.q(), nk * d, n, data))
}

/// Gauss-Jordan over `F_{q^m}` on a `rows x cols` matrix stored row-major.
/// Returns the rank and a basis of the right kernel.
pub(crate) fn ext_rank_and_kernel(field: &Field, rows: usize, cols: usize, a: &[Elem]) -> (usize, Vec<Word>) {
    let mut mat: Vec<Elem> = a.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !mat[i * cols + c].is_zero()) else {
            continue;
        };
        for j in 0..cols {
            mat.swap(p * cols + j, r * cols + j);
        }
        let inv = field.inv(&mat[r * cols + c]).expect("pivot is nonzero");
        for j in c..cols {
            mat[r * cols + j] = field.mul(&mat[r * cols + j], &inv);
        }
        for i in 0..rows {
            if i == r || mat[i * cols + c].is_zero() {
                continue;
            }
            let f = mat[i * cols + c].clone();
            for j in c..cols {
                let t = field.mul(&f, &mat[r * cols + j]);
                mat[i * cols + j] = field.sub(&mat[i * cols + j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let kernel = (0..cols)
        .filter(|&fc| !is_pivot[fc])
        .map(|fc| {
            let mut v = vec![field.zero(); cols];
            v[fc] = field.one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(&mat[i * cols + fc]);
            }
            v
        })
        .collect();
    (pivots.len(), kernel)
}

/// Rank-`r` error `e = ε · E`: `ε` a basis of a uniform `r`-dimensional
/// subspace, `E` a uniform full-rank `r x n` matrix over `F_q`.
pub fn sample_error<R: Rng + ?Sized>(field: &Field, n: usize, r: usize, rng: &mut R) -> Result<Word> {
    if r > n.min(field.degree()) {
        return param(format!("error rank {r} exceeds min(n, m) = {}", n.min(field.degree())));
    }
    let eps = Subspace::random(field, r, rng)?.basis_elems();
    let coef = Matrix::random_of_rank(field.q(), r, n, r, rng)?;
    Ok(combine(field, &eps, &coef))
}

/// `e_j = Σ_u coef[u][j] · basis[u]`.
pub(crate) fn combine(field: &Field, basis: &[Elem], coef: &Matrix) -> Word {
    (0..coef.cols())
        .map(|j| {
            let mut acc = field.zero();
            for (u, b) in basis.iter().enumerate() {
                field.add_scaled_assign(&mut acc, b, coef.get(u, j));
            }
            acc
        })
        .collect()
}

/// `supp(w)`, the `F_q`-span of the coordinates.
pub fn support(field: &Field, w: &[Elem]) -> Subspace {
    Subspace::span(field, w)
}

/// Rank weight of a word.
pub fn rank_weight(field: &Field, w: &[Elem]) -> usize {
    support(field, w).dim()
}

pub fn add_words(field: &Field, a: &[Elem], b: &[Elem]) -> Word {
    a.iter().zip(b).map(|(x, y)| field.add(x, y)).collect()
}

pub fn sub_words(field: &Field, a: &[Elem], b: &[Elem]) -> Word {
    a.iter().zip(b).map(|(x, y)| field.sub(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct_syndrome(code: &CodeInstance, y: &[Elem]) -> Word {
        let f = code.field();
        code.parity_check()
            .iter()
            .map(|row| {
                row.iter().zip(y).fold(f.zero(), |acc, (h, yj)| f.add(&acc, &f.mul(h, yj)))
            })
            .collect()
    }

    fn small_code(seed: u64) -> CodeInstance {
        let f = Field::new(2, 24).unwrap();
        let p = CodeParams::new(2, 24, 20, 10, 2).unwrap();
        CodeInstance::sample(&f, p, Requirements::both(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn paper_regime_instance() {
        let f = Field::new(2, 37).unwrap();
        let p = CodeParams::new(2, 37, 32, 16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let code = CodeInstance::sample(&f, p, Requirements::both(), &mut rng).unwrap();
        assert!(code.flags().unique_decoding && code.flags().maximal_row_span);
        assert_eq!((code.h_ext().rows(), code.h_ext().cols()), (32, 32));
        assert_eq!(code.h_ext().rank(), 32);
        assert_eq!(code.generator().len(), 16);
        for g in code.generator() {
            assert!(code.syndrome(g).unwrap().iter().all(Elem::is_zero));
        }
        let entries: Vec<Elem> = code.parity_check().concat();
        assert_eq!(Subspace::span(&f, &entries), Subspace::bounded_degree(&f, 2).unwrap());
    }

    #[test]
    fn degree_one_code() {
        let f = Field::new(2, 8).unwrap();
        let p = CodeParams::new(2, 8, 6, 3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let req = Requirements { maximal_row_span: true, unique_decoding: false };
        let code = CodeInstance::sample(&f, p, req, &mut rng).unwrap();
        assert!(code.flags().maximal_row_span);
        assert!(!code.flags().unique_decoding);
        // H_ext is H read over F_q.
        for i in 0..3 {
            for j in 0..6 {
                assert_eq!(code.h_ext().get(i, j), code.h(i, j).coords()[0]);
            }
        }
        assert!(CodeInstance::sample(&f, p, Requirements::both(), &mut rng).is_err());
    }

    #[test]
    fn unique_decoding_gate() {
        let f = Field::new(2, 20).unwrap();
        // d = 2 < n/(n-k) = 20/8
        let p = CodeParams::new(2, 20, 20, 12, 2).unwrap();
        assert!(!p.admits_unique_decoding());
        let code = CodeInstance::sample(&f, p, Requirements::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(!code.check_unique_decoding());
    }

    #[test]
    fn deficient_row_breaks_maximal_row_span() {
        let f = Field::new(2, 10).unwrap();
        let p = CodeParams::new(2, 10, 4, 2, 2).unwrap();
        let h = vec![
            vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]],
            vec![vec![1, 0], vec![1, 0], vec![0, 0], vec![1, 0]],
        ];
        let code = CodeInstance::from_coefficients(&f, p, &h).unwrap();
        assert!(!code.check_maximal_row_span());
        assert!(!code.flags().maximal_row_span);
    }

    #[test]
    fn retry_budget_reports_predicate() {
        let f = Field::new(2, 10).unwrap();
        // One row of two entries over F_2 with d = 3 can never span V_{α,3}.
        let p = CodeParams::new(2, 10, 2, 1, 3).unwrap();
        let err = CodeInstance::sample_with_budget(&f, p, Requirements::default(), 20, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        match err {
            Error::Construction { attempts, predicate } => {
                assert_eq!(attempts, 20);
                assert!(predicate.contains("span"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn h_ext_round_trip() {
        let code = small_code(8);
        let f = code.field();
        let rebuilt = build_h_ext(f, 2, &code.parity_check()).unwrap();
        assert_eq!(&rebuilt, code.h_ext());
        for i in 0..10 {
            for j in 0..20 {
                let mut acc = f.zero();
                for v in 0..2 {
                    f.add_scaled_assign(&mut acc, &f.alpha_power(v as i64), code.h_ext().get(i * 2 + v, j));
                }
                assert_eq!(&acc, code.h(i, j));
            }
        }
        let mut bad = code.parity_check();
        bad[0][0] = f.alpha_power(2);
        assert!(matches!(build_h_ext(f, 2, &bad), Err(Error::Consistency(_))));
    }

    #[test]
    fn syndrome_properties() {
        let code = small_code(5);
        let f = code.field();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = code.random_codeword(&mut rng);
        assert!(code.syndrome(&c).unwrap().iter().all(Elem::is_zero));
        let e = sample_error(f, 20, 3, &mut rng).unwrap();
        let y = add_words(f, &c, &e);
        let s = code.syndrome(&y).unwrap();
        assert_eq!(s, code.syndrome(&e).unwrap());
        assert_eq!(s, direct_syndrome(&code, &y));
        let prod = Subspace::bounded_degree(f, 2).unwrap().product(f, &support(f, &e));
        assert!(support(f, &s).is_subspace_of(&prod));
        assert!(code.syndrome(&y[..3]).is_err());
    }

    #[test]
    fn error_sampling() {
        let f = Field::new(2, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_error(&f, 10, 0, &mut rng).unwrap().iter().all(Elem::is_zero));
        for r in 1..=6 {
            assert_eq!(rank_weight(&f, &sample_error(&f, 10, r, &mut rng).unwrap()), r);
        }
        assert!(sample_error(&f, 4, 5, &mut rng).is_err());
    }

    #[test]
    fn error_support_is_uniform_over_lines() {
        let f = Field::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 7000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let e = sample_error(&f, 4, 1, &mut rng).unwrap();
            *counts.entry(support(&f, &e)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 7);
        // chi-square with 6 degrees of freedom; 3 sigma upper quantile ~ 22.5
        let chi: f64 = counts.values().map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0).sum();
        assert!(chi < 22.5, "{chi} {counts:?}");
    }

    #[test]
    fn json_round_trip() {
        let code = small_code(11);
        let js = code.to_json();
        let back = CodeInstance::from_json(&js).unwrap();
        assert_eq!(back.h_ext(), code.h_ext());
        assert_eq!(back.parity_check(), code.parity_check());
        assert_eq!(back.flags(), code.flags());
        let tampered = js.replacen("\"unique_decoding\": true", "\"unique_decoding\": false", 1);
        assert!(CodeInstance::from_json(&tampered).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn syndrome_is_linear(seed in any::<u64>()) {
            let code = small_code(seed % 4);
            let f = code.field();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Word = (0..20).map(|_| f.random(&mut rng)).collect();
            let b: Word = (0..20).map(|_| f.random(&mut rng)).collect();
            let lhs = code.syndrome(&add_words(f, &a, &b)).unwrap();
            let rhs = add_words(f, &code.syndrome(&a).unwrap(), &code.syndrome(&b).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
