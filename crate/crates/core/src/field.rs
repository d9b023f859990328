//! Arithmetic in a prime field `F_q` and its degree-`m` extension `F_{q^m}`.
//!
//! Extension elements are stored as their coordinate vector over `F_q` in the
//! polynomial basis `1, α, …, α^{m-1}`, where `α` is the class of the
//! indeterminate modulo a fixed monic irreducible polynomial.

use std::fmt;

use rand::Rng;

use crate::error::{param, Error, Result};

/// Largest supported base prime. Products of two residues fit in a `u32`.
pub const MAX_CHARACTERISTIC: u32 = 65_521;
/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 128;

/// An element of `F_{q^m}`: `m` residues modulo `q`, lowest power of `α` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(Vec<u32>);

impl Elem {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<u32> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Caller guarantees the coordinates come from a matrix over the same field.
    pub(crate) fn from_coords_unchecked(c: Vec<u32>) -> Elem {
        Elem(c)
    }
}

/// The operations accepted by [`Field::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow(i64),
}

/// The tower `F_q ⊂ F_{q^m}` with distinguished generator `α`.
///
/// Immutable once built; share it freely between threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    q: u32,
    m: usize,
    /// Monic, length `m + 1`, constant term first.
    modulus: Vec<u32>,
}

impl Field {
    /// Builds `F_{q^m}` over the smallest admissible modulus.
    ///
    /// Candidates `x^m + c_{m-1} x^{m-1} + … + c_0` are visited in increasing
    /// order of the integer `Σ c_i q^i` and the first irreducible one with
    /// `c_0 ≠ 0` is taken, so `α` is always invertible (this only matters for
    /// `m = 1`, where `x` itself would otherwise be chosen).
    pub fn new(q: u32, m: usize) -> Result<Self> {
        check_params(q, m)?;
        let mut low = vec![0u32; m];
        low[0] = 1;
        loop {
            let mut candidate = low.clone();
            candidate.push(1);
            if is_irreducible(&candidate, q) {
                return Ok(Field { q, m, modulus: candidate });
            }
            // Increment the base-q counter, keeping c_0 nonzero.
            let mut i = 0;
            loop {
                if i == m {
                    // Every monic degree-m polynomial has been tried; cannot
                    // happen since irreducibles exist in every degree.
                    return Err(Error::Consistency(format!(
                        "no irreducible polynomial of degree {m} over F_{q}"
                    )));
                }
                low[i] += 1;
                if low[i] < q {
                    break;
                }
                low[i] = if i == 0 { 1 } else { 0 };
                i += 1;
            }
        }
    }

    /// Builds `F_{q^m}` over an explicit modulus (constant term first, monic).
    pub fn with_modulus(q: u32, modulus: Vec<u32>) -> Result<Self> {
        if modulus.len() < 2 {
            return param("modulus must have degree at least 1");
        }
        let m = modulus.len() - 1;
        check_params(q, m)?;
        if modulus[m] != 1 {
            return param("modulus must be monic");
        }
        if modulus.iter().any(|&c| c >= q) {
            return param("modulus coefficient out of range");
        }
        if modulus[0] == 0 || !is_irreducible(&modulus, q) {
            return param("modulus must be irreducible with nonzero constant term");
        }
        Ok(Field { q, m, modulus })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Elem {
        Elem(vec![0; self.m])
    }

    pub fn one(&self) -> Elem {
        let mut c = vec![0; self.m];
        c[0] = 1;
        Elem(c)
    }

    /// The generator `α`. For `m = 1` this is the root of the linear modulus.
    pub fn alpha(&self) -> Elem {
        if self.m == 1 {
            return Elem(vec![(self.q - self.modulus[0]) % self.q]);
        }
        let mut c = vec![0; self.m];
        c[1] = 1;
        Elem(c)
    }

    /// Checked constructor from coordinates.
    pub fn element(&self, coords: Vec<u32>) -> Result<Elem> {
        let e = Elem(coords);
        self.validate(&e)?;
        Ok(e)
    }

    /// Rejects elements that do not belong to this field.
    pub fn validate(&self, a: &Elem) -> Result<()> {
        if a.0.len() != self.m {
            return param(format!(
                "element has {} coordinates, field degree is {}",
                a.0.len(),
                self.m
            ));
        }
        if a.0.iter().any(|&c| c >= self.q) {
            return param(format!("coordinate out of range for q = {}", self.q));
        }
        Ok(())
    }

    /// Element whose coordinates are `coeffs` (length at most `m`), zero-padded.
    pub(crate) fn low_degree_elem(&self, coeffs: &[u32]) -> Elem {
        let mut c = vec![0; self.m];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Elem(c)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        Elem((0..self.m).map(|_| rng.gen_range(0..self.q)).collect())
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let q = self.q;
        Elem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + y) % q).collect())
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let q = self.q;
        Elem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + q - y) % q).collect())
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        let q = self.q;
        Elem(a.0.iter().map(|&x| (q - x) % q).collect())
    }

    /// Multiplication by a base-field scalar.
    pub fn scale(&self, a: &Elem, c: u32) -> Elem {
        let q = self.q as u64;
        let c = c as u64 % q;
        Elem(a.0.iter().map(|&x| (x as u64 * c % q) as u32).collect())
    }

    /// `acc += c · a` in place, with `c ∈ F_q`.
    pub(crate) fn add_scaled_assign(&self, acc: &mut Elem, a: &Elem, c: u32) {
        if c == 0 {
            return;
        }
        let q = self.q as u64;
        for (x, &y) in acc.0.iter_mut().zip(&a.0) {
            *x = ((*x as u64 + y as u64 * c as u64) % q) as u32;
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let m = self.m;
        let q = self.q as u64;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let x = x as u64;
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += x * y as u64;
            }
            // Keep accumulators well inside u64 for large q.
            if q > 1 << 16 {
                for p in prod.iter_mut() {
                    *p %= q;
                }
            }
        }
        for p in prod.iter_mut() {
            *p %= q;
        }
        for top in (m..2 * m - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            let shift = top - m;
            for j in 0..m {
                let sub = c * self.modulus[j] as u64 % q;
                prod[shift + j] = (prod[shift + j] + q - sub) % q;
            }
            prod[top] = 0;
        }
        Elem(prod[..m].iter().map(|&p| p as u32).collect())
    }

    /// `α · a`, a single shift-and-reduce.
    pub fn mul_alpha(&self, a: &Elem) -> Elem {
        if self.m == 1 {
            return self.mul(a, &self.alpha());
        }
        let q = self.q as u64;
        let m = self.m;
        let top = a.0[m - 1] as u64;
        let mut out = Vec::with_capacity(m);
        out.push(0u32);
        out.extend_from_slice(&a.0[..m - 1]);
        if top != 0 {
            for (o, &f) in out.iter_mut().zip(&self.modulus[..m]) {
                *o = ((*o as u64 + q - top * f as u64 % q) % q) as u32;
            }
        }
        Elem(out)
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let q = self.q;
        // Extended Euclid: track s with s·a ≡ r (mod modulus).
        let mut r0 = self.modulus.clone();
        let mut r1 = trim(a.0.clone());
        let mut s0: Vec<u32> = vec![];
        let mut s1: Vec<u32> = vec![1];
        while !(r1.len() == 1 && r1[0] != 0) {
            let (quot, rem) = poly_divmod(&r0, &r1, q);
            let s2 = poly_sub(&s0, &poly_mul(&quot, &s1, q), q);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
            if r1.is_empty() {
                return Err(Error::Consistency("modulus is not irreducible".into()));
            }
        }
        let c = inv_mod(r1[0], q);
        let s = poly_scale(&s1, c, q);
        let (_, s) = poly_divmod(&s, &self.modulus, q);
        Ok(self.low_degree_elem(&s))
    }

    /// `a^e`; negative exponents go through [`Field::inv`].
    pub fn pow(&self, a: &Elem, e: i64) -> Result<Elem> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        Ok(acc)
    }

    pub fn alpha_power(&self, i: i64) -> Elem {
        self.pow(&self.alpha(), i)
            .expect("alpha is invertible: the modulus has a nonzero constant term")
    }

    /// Validated dispatch over [`ArithOp`]; `b` is ignored for `Inv` and `Pow`.
    pub fn arith(&self, op: ArithOp, a: &Elem, b: Option<&Elem>) -> Result<Elem> {
        self.validate(a)?;
        let need_b = || -> Result<&Elem> {
            let b = b.ok_or_else(|| Error::Parameter("missing second operand".into()))?;
            self.validate(b)?;
            Ok(b)
        };
        match op {
            ArithOp::Add => Ok(self.add(a, need_b()?)),
            ArithOp::Sub => Ok(self.sub(a, need_b()?)),
            ArithOp::Mul => Ok(self.mul(a, need_b()?)),
            ArithOp::Inv => self.inv(a),
            ArithOp::Pow(e) => self.pow(a, e),
        }
    }

    /// Little-endian coordinate string. Digits `0-9a-z` when `q ≤ 36`,
    /// otherwise comma-separated decimal residues.
    pub fn format_elem(&self, a: &Elem) -> String {
        if self.q <= 36 {
            a.0.iter()
                .map(|&c| std::char::from_digit(c, 36).expect("residue below 36"))
                .collect()
        } else {
            a.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let coords: Vec<u32> = if self.q <= 36 {
            s.trim()
                .chars()
                .map(|ch| {
                    ch.to_digit(36)
                        .ok_or_else(|| Error::Parse(format!("bad digit {ch:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            s.trim()
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::Parse(format!("bad residue {t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        self.element(coords).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod ", self.q, self.m)?;
        let terms: Vec<String> = (0..=self.m)
            .rev()
            .filter(|&i| self.modulus[i] != 0)
            .map(|i| {
                let c = self.modulus[i];
                let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
                match i {
                    0 => coef,
                    1 => format!("{coef}x"),
                    _ => format!("{coef}x^{i}"),
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

fn check_params(q: u32, m: usize) -> Result<()> {
    if !is_prime(q) {
        return param(format!("q = {q} is not prime"));
    }
    if q > MAX_CHARACTERISTIC {
        return param(format!("q = {q} exceeds {MAX_CHARACTERISTIC}"));
    }
    if m == 0 {
        return param("extension degree m must be at least 1");
    }
    if m > MAX_DEGREE {
        return param(format!("extension degree {m} exceeds {MAX_DEGREE}"));
    }
    Ok(())
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= q as u64 {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Inverse in `F_q` by Fermat. `a` must be nonzero.
pub(crate) fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(q));
    let q64 = q as u64;
    let mut base = a as u64 % q64;
    let mut e = q - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q64;
        }
        base = base * base % q64;
        e >>= 1;
    }
    acc as u32
}

// Dense polynomials over F_q, constant term first, trimmed (zero is empty).

fn trim(mut p: Vec<u32>) -> Vec<u32> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_scale(p: &[u32], c: u32, q: u32) -> Vec<u32> {
    trim(p.iter().map(|&x| (x as u64 * c as u64 % q as u64) as u32).collect())
}

fn poly_sub(a: &[u32], b: &[u32], q: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + q - y) % q
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u32], b: &[u32], q: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let q = q as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % q;
        }
    }
    trim(out.into_iter().map(|x| x as u32).collect())
}

fn poly_divmod(a: &[u32], b: &[u32], q: u32) -> (Vec<u32>, Vec<u32>) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let q64 = q as u64;
    let lead_inv = inv_mod(*b.last().unwrap(), q) as u64;
    let mut quot = vec![0u32; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = *rem.last().unwrap() as u64 * lead_inv % q64;
        quot[shift] = c as u32;
        for (j, &bj) in b.iter().enumerate() {
            let sub = c * bj as u64 % q64;
            rem[shift + j] = ((rem[shift + j] as u64 + q64 - sub) % q64) as u32;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn poly_gcd(a: &[u32], b: &[u32], q: u32) -> Vec<u32> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divmod(&x, &y, q);
        x = std::mem::replace(&mut y, r);
    }
    x
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], q: u32) -> Vec<u32> {
    poly_divmod(&poly_mul(a, b, q), f, q).1
}

fn poly_powmod(base: &[u32], mut e: u64, f: &[u32], q: u32) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut sq = poly_divmod(base, f, q).1;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &sq, f, q);
        }
        e >>= 1;
        if e > 0 {
            sq = poly_mulmod(&sq, &sq, f, q);
        }
    }
    acc
}

/// Ben-Or irreducibility test for a monic `f` of degree `m`: `f` is
/// irreducible iff `gcd(x^{q^i} - x, f) = 1` for every `1 ≤ i ≤ m/2`.
pub(crate) fn is_irreducible(f: &[u32], q: u32) -> bool {
    let f = trim(f.to_vec());
    let m = f.len().saturating_sub(1);
    if m == 0 {
        return false;
    }
    let x = vec![0u32, 1];
    let mut h = x.clone();
    for _ in 0..m / 2 {
        h = poly_powmod(&h, q as u64, &f, q);
        let g = poly_gcd(&poly_sub(&h, &x, q), &f, q);
        if g.len() != 1 {
            return false;
        }
    }
    true
}
