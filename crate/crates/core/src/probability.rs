//! Closed-form success probabilities and decoding-failure bounds.
//!
//! `P_t` is the probability that the block-Toeplitz matrix `M_t` of size
//! `t(n-k) x r(d+t-1)` has full column rank. Probabilities are carried as a
//! value together with its complement so that failure rates near `1e-40`
//! keep their significant digits.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{param, Result};
use crate::field::is_prime;

/// A probability and its complement, each computed from the side where it
/// is small.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prob {
    value: f64,
    complement: f64,
}

impl Prob {
    pub const ONE: Prob = Prob { value: 1.0, complement: 0.0 };
    pub const ZERO: Prob = Prob { value: 0.0, complement: 1.0 };

    /// Clamps to `[0, 1]`; clamping is logged.
    pub fn from_value(p: f64) -> Prob {
        let v = clamp(p, "value");
        Prob { value: v, complement: 1.0 - v }
    }

    pub fn from_complement(c: f64) -> Prob {
        let c = clamp(c, "complement");
        Prob { value: 1.0 - c, complement: c }
    }

    /// From `ln(value)`, with `value ≤ 1`.
    fn from_ln(ln_value: f64) -> Prob {
        if ln_value == f64::NEG_INFINITY {
            return Prob::ZERO;
        }
        let ln_value = ln_value.min(0.0);
        Prob { value: ln_value.exp(), complement: -ln_value.exp_m1() }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }

    pub fn log10_value(&self) -> f64 {
        self.value.log10()
    }

    /// `-inf` when the value is exactly 1.
    pub fn log10_complement(&self) -> f64 {
        self.complement.log10()
    }

    /// Product of independent events.
    pub fn and(self, other: Prob) -> Prob {
        let complement = self.complement + other.complement - self.complement * other.complement;
        Prob { value: self.value * other.value, complement: complement.clamp(0.0, 1.0) }
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Prob", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("log10_complement", &finite_or_none(self.log10_complement()))?;
        st.end()
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn clamp(p: f64, what: &str) -> f64 {
    if p.is_nan() {
        log::warn!("probability {what} is NaN; clamped to 0");
        return 0.0;
    }
    if !(0.0..=1.0).contains(&p) {
        log::debug!("probability {what} {p} clamped to [0, 1]");
    }
    p.clamp(0.0, 1.0)
}

/// Why a bound could not be evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DomainViolation(pub String);

impl std::fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Bounded<T> = std::result::Result<T, DomainViolation>;

fn violation<T>(msg: impl Into<String>) -> Bounded<T> {
    Err(DomainViolation(msg.into()))
}

fn qf(q: u32, e: i64) -> f64 {
    (q as f64).powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// `∏ (1 - x_j)` by compensated summation of `ln(1 - x_j)`, smallest terms
/// first. A factor with `x ≥ 1` makes the product 0.
fn prod_one_minus(xs: impl IntoIterator<Item = f64>) -> Prob {
    let mut xs: Vec<f64> = xs.into_iter().collect();
    if xs.iter().any(|&x| x >= 1.0) {
        return Prob::ZERO;
    }
    xs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Prob::from_ln(kahan(xs.into_iter().map(|x| (-x).ln_1p())))
}

fn kahan(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}

/// `[n k]_q = ∏_{i<k} (q^n - q^i)/(q^k - q^i)`; zero when `k > n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let qb = BigUint::from(q);
    let pow = |e: usize| qb.pow(e as u32);
    let (mut num, mut den) = (BigUint::from(1u32), BigUint::from(1u32));
    for i in 0..k {
        num *= pow(n) - pow(i);
        den *= pow(k) - pow(i);
    }
    num / den
}

/// `ln [n k]_q` without big integers.
fn ln_gaussian_binomial(n: usize, k: usize, q: u32) -> f64 {
    let lq = (q as f64).ln();
    kahan((0..k).map(|l| {
        let (a, b) = ((n - l) as f64, (k - l) as f64);
        (a - b) * lq + (-qf(q, -((n - l) as i64))).ln_1p() - (-qf(q, -((k - l) as i64))).ln_1p()
    }))
}

/// Probability that `r` uniform vectors of `F_q^rows` are independent:
/// `∏_{i<r} (1 - q^{i-rows})`.
pub fn full_rank_prob(q: u32, rows: usize, r: usize) -> Prob {
    prod_one_minus((0..r).map(|i| qf(q, i as i64 - rows as i64)))
}

/// Classical LRPC success probability `P_1 = ∏_{i<rd} (1 - q^{-(n-k-i)})`.
pub fn p1_classical(q: u32, n: usize, k: usize, d: usize, r: usize) -> Prob {
    full_rank_prob(q, n - k, r * d)
}

/// `P_{r(d-1)} = ∏_{j=0}^{r-1}(1-q^{j-(n-k)}) · ∏_{j=1}^{r}(1-q^{j-(n-k)})`.
pub fn p_opt_exact(q: u32, n: usize, k: usize, r: usize) -> Prob {
    full_rank_prob(q, n - k, r).and(q_opt(q, n, k, r))
}

/// `∏_{j=1}^{r}(1-q^{j-(n-k)})`, the residual factor at `t ≥ r(d-1)`.
pub fn q_opt(q: u32, n: usize, k: usize, r: usize) -> Prob {
    prod_one_minus((1..=r).map(|j| qf(q, j as i64 - (n - k) as i64)))
}

/// Sandwich around `P_{r(d-1)}`: `(1 - (q+1)/(q-1) q^{-u}, 1 - (q+1)/q q^{-u} + q^{-2u-1})`.
pub fn p_opt_sandwich(q: u32, u: i64) -> (f64, f64) {
    let qq = q as f64;
    (1.0 - (qq + 1.0) / (qq - 1.0) * qf(q, -u), 1.0 - (qq + 1.0) / qq * qf(q, -u) + qf(q, -2 * u - 1))
}

/// Exact `P_2` for `d = 2`.
pub fn p2_exact_d2(q: u32, n: usize, k: usize, r: usize) -> Prob {
    if r == 0 {
        return Prob::ONE;
    }
    let nk = n - k;
    if r >= nk {
        return Prob::ZERO;
    }
    let u = nk - r;
    let lo = r.div_ceil(2);
    let hi = r.min(u);
    if lo > hi {
        return Prob::ZERO;
    }
    let mut terms = Vec::new();
    for v in lo..=hi {
        let mut ln = -(((u - v) * (r - v)) as f64) * (q as f64).ln();
        for i in 0..v {
            let (i, u, r, v) = (i as i64, u as i64, r as i64, v as i64);
            ln += (-qf(q, i - u)).ln_1p() + (-qf(q, i - r)).ln_1p() - (-qf(q, i - v)).ln_1p();
        }
        for i in 0..(r - v) {
            ln += (-qf(q, i as i64 - v as i64)).ln_1p();
        }
        terms.push(ln);
    }
    // The v = min(r, u) term dominates; its complement carries the precision.
    let sum_val = kahan(terms.iter().map(|l| l.exp()));
    let sum = if sum_val > 0.5 {
        // 1 - Σ = (1 - top) - rest
        let top = *terms.last().expect("non-empty range");
        let rest = kahan(terms[..terms.len() - 1].iter().map(|l| l.exp()));
        Prob::from_complement(-top.exp_m1() - rest)
    } else {
        Prob::from_value(sum_val)
    };
    full_rank_prob(q, nk, r).and(sum)
}

/// `R_j = q^{r(d-1)-uj} + Σ_{i=1}^{j-1} [j i]_q q^{-ui}`.
pub fn r_term(q: u32, d: usize, r: usize, u: i64, j: usize) -> f64 {
    let lq = (q as f64).ln();
    let head = qf(q, (r * (d - 1)) as i64 - u * j as i64);
    head + kahan((1..j).map(|i| (ln_gaussian_binomial(j, i, q) - (u * i as i64) as f64 * lq).exp()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub prob: Prob,
    pub argmin_j: usize,
}

/// `P_t ≥ 1 - min_{1≤j≤t} R_j` for `⌈r(d-1)/u⌉ ≤ t ≤ rd`, `u ≥ 1`, `d ≥ 2`.
pub fn p_lower_bound(q: u32, n: usize, k: usize, d: usize, r: usize, t: usize) -> Bounded<LowerBound> {
    let u = (n - k) as i64 - r as i64;
    if u <= 0 {
        return violation(format!("u = n-k-r = {u} must be positive"));
    }
    if d < 2 {
        return violation("lower bound needs d >= 2");
    }
    if r == 0 {
        return Ok(LowerBound { prob: Prob::ONE, argmin_j: 0 });
    }
    let lo = (r * (d - 1)).div_ceil(u as usize);
    if t < lo || t > r * d {
        return violation(format!("t = {t} outside [{lo}, {}]", r * d));
    }
    let (j, rj) = (1..=t)
        .map(|j| (j, r_term(q, d, r, u, j)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("t >= 1");
    Ok(LowerBound { prob: Prob::from_complement(rj), argmin_j: j })
}

/// Closed-form bounds at `t = 2` and at `2 < t ≤ u`.
pub fn p_corollary_bound(q: u32, u: i64, t: usize) -> Bounded<Prob> {
    let qq = q as f64;
    let t = t as i64;
    if u <= 0 {
        return violation(format!("u = {u} must be positive"));
    }
    if t == 2 {
        Ok(Prob::from_complement((qq + 2.0) * qf(q, -u)))
    } else if 2 < t && t <= u {
        Ok(Prob::from_complement(
            qf(q, -u) + qf(q, -(u - t)) / (qq - 1.0) + 4.0 * qf(q, -2 * (u - t)) / (qq.powi(4) - 1.0),
        ))
    } else {
        violation(format!("t = {t} is neither 2 nor in (2, u = {u}]"))
    }
}

/// How to read the sign of the denominator in the `d = 2` remark bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Denominator `1 - q` as printed; the bound exceeds 1 and is clamped.
    AsPrinted,
    /// Denominator `q - 1`.
    SignCorrected,
}

/// `1 - (q^{-u/2} + q^{-u} + q^{-u+1}) / den`; returns the raw value and
/// its clamped probability.
pub fn d2_remark_bound(q: u32, u: i64, reading: Reading) -> (f64, Prob) {
    let qq = q as f64;
    let num = qq.powf(-(u as f64) / 2.0) + qf(q, -u) + qf(q, 1 - u);
    let den = match reading {
        Reading::AsPrinted => 1.0 - qq,
        Reading::SignCorrected => qq - 1.0,
    };
    let raw = 1.0 - num / den;
    (raw, Prob::from_complement(num / den))
}

/// `(∏_{i<r}(1-q^{i-(n-k)}))²`.
pub fn p_upper_bound(q: u32, n: usize, k: usize, r: usize) -> Prob {
    let f = full_rank_prob(q, n - k, r);
    f.and(f)
}

/// `H_q(n) = ∏_{i=1}^{n}(1-q^{-i})`.
pub fn hq(q: u32, n: usize) -> Prob {
    prod_one_minus((1..=n).map(|i| qf(q, -(i as i64))))
}

/// `K = H_q((d-1)r+u-1) / H_q(u-1)` for `u ≥ 1`, `d ≥ 2`.
pub fn conjecture_k(q: u32, d: usize, r: usize, u: i64) -> Bounded<Prob> {
    if u < 1 {
        return violation(format!("u = {u} must be positive"));
    }
    if d < 2 {
        return violation("K needs d >= 2");
    }
    let top = ((d - 1) * r) as i64 + u - 1;
    Ok(prod_one_minus((u..=top).map(|i| qf(q, -i))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbParams {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub r: usize,
}

impl ProbParams {
    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.q) {
            return param(format!("q = {} is not prime", self.q));
        }
        if !(0 < self.k && self.k < self.n) {
            return param(format!("need 0 < k < n, got k = {}, n = {}", self.k, self.n));
        }
        if self.d == 0 || self.t == 0 || self.m == 0 {
            return param("d, t and m must be positive");
        }
        Ok(())
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    pub fn u(&self) -> i64 {
        self.redundancy() as i64 - self.r as i64
    }

    /// `r(d+t-1) ≤ t(n-k)`: `M_t` has at least as many rows as columns.
    pub fn rank_feasible(&self) -> bool {
        self.r * (self.d + self.t - 1) <= self.t * self.redundancy()
    }

    /// `(d+t)r ≤ m`.
    pub fn within_field(&self) -> bool {
        (self.d + self.t) * self.r <= self.m
    }
}

/// Where the `P_t` value used in the failure bounds came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PtSource {
    /// `r = 0`
    NoError,
    /// `r(d+t-1) > t(n-k)`: full column rank impossible
    RankInfeasible,
    /// `d = 1`: `M_t` is block diagonal in `X_1`
    DegreeOne,
    /// `t ≥ r(d-1)`
    Optimal,
    /// `d = 2`, `t = 2`
    ExactD2,
    LowerBound,
}

impl PtSource {
    pub fn is_exact(self) -> bool {
        self != PtSource::LowerBound
    }
}

/// The best available value of `P_t`: exact where a closed form exists,
/// otherwise the lower bound.
pub fn best_pt(p: &ProbParams) -> Bounded<(Prob, PtSource)> {
    let (q, n, k, d, t, r) = (p.q, p.n, p.k, p.d, p.t, p.r);
    if r == 0 {
        return Ok((Prob::ONE, PtSource::NoError));
    }
    if !p.rank_feasible() {
        return Ok((Prob::ZERO, PtSource::RankInfeasible));
    }
    if d == 1 {
        return Ok((full_rank_prob(q, n - k, r), PtSource::DegreeOne));
    }
    if t >= r * (d - 1) {
        return Ok((p_opt_exact(q, n, k, r), PtSource::Optimal));
    }
    if d == 2 && t == 2 {
        return Ok((p2_exact_d2(q, n, k, r), PtSource::ExactD2));
    }
    p_lower_bound(q, n, k, d, r, t).map(|lb| (lb.prob, PtSource::LowerBound))
}

/// `q^{r(d+t)} / (q^m - q^{r-1})`
fn a_new(p: &ProbParams) -> f64 {
    let lq = (p.q as f64).ln();
    let ln = (p.r * (p.d + p.t)) as f64 * lq
        - (p.m as f64 * lq + (-qf(p.q, p.r as i64 - 1 - p.m as i64)).ln_1p());
    ln.exp()
}

/// `q^{-m + 2(d+t-1)r - r}`
fn a_fl(p: &ProbParams) -> f64 {
    qf(p.q, -(p.m as i64) + (2 * (p.d + p.t - 1) * p.r) as i64 - p.r as i64)
}

/// `1 - (1 - a)·P = a·P + (1 - P)`, clamped.
fn failure_from(a: f64, pt: Prob) -> Prob {
    Prob::from_value(a * pt.value() + pt.complement())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    OutOfRadius,
    DomainViolation,
}

/// One reported quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub status: Status,
    pub value: Option<f64>,
    pub log10_value: Option<f64>,
    pub log10_complement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Entry {
    pub fn ok(p: Prob) -> Entry {
        Entry::with(Status::Ok, p, None)
    }

    fn with(status: Status, p: Prob, note: Option<String>) -> Entry {
        Entry {
            status,
            value: Some(p.value()),
            log10_value: finite_or_none(p.log10_value()),
            log10_complement: finite_or_none(p.log10_complement()),
            note,
        }
    }

    pub fn violation(reason: impl Into<String>) -> Entry {
        Entry { status: Status::DomainViolation, value: None, log10_value: None, log10_complement: None, note: Some(reason.into()) }
    }

    fn from_bounded(b: Bounded<Prob>) -> Entry {
        match b {
            Ok(p) => Entry::ok(p),
            Err(v) => Entry::violation(v.0),
        }
    }

    /// Compact cell text: the value, or the status marker.
    pub fn cell(&self) -> String {
        match (self.status, self.value) {
            (Status::DomainViolation, _) | (_, None) => "domain-violation".into(),
            (Status::OutOfRadius, Some(v)) => format!("{v:e} (out-of-radius)"),
            (Status::Ok, Some(v)) => format!("{v:e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureBounds {
    pub d_new: Entry,
    /// Labelled an estimate rather than a proven bound.
    pub d_fl: Entry,
    pub d_g: Entry,
    pub success_lower: Entry,
}

/// Failure bounds for the given `P_t`. At `r = 0` every failure is 0.
pub fn failure_bounds(p: &ProbParams, pt: Prob) -> FailureBounds {
    if p.r == 0 {
        let z = Entry::ok(Prob::ZERO);
        return FailureBounds { d_new: z.clone(), d_fl: z.clone(), d_g: z, success_lower: Entry::ok(Prob::ONE) };
    }
    let new_status = if p.within_field() { Status::Ok } else { Status::OutOfRadius };
    let new_note = (!p.within_field()).then(|| format!("(d+t)r = {} > m = {}", (p.d + p.t) * p.r, p.m));
    let d_new = failure_from(a_new(p), pt);
    let d_fl = failure_from(a_fl(p), pt);
    let (q, r, d, m) = (p.q, p.r as i64, p.d as i64, p.m as i64);
    let qq = q as f64;
    let den_ln = m as f64 * qq.ln() + (-qf(q, r - 1 - m)).ln_1p();
    let dg = qf(q, -(p.redundancy() as i64) + d * r) / (qq - 1.0)
        + ((r * (2 * d - 1)) as f64 * qq.ln() - den_ln).exp()
        + ((r * d) as f64 * qq.ln() - den_ln).exp();
    let g_in = p.d * p.r <= p.redundancy();
    FailureBounds {
        d_new: Entry::with(new_status, d_new, new_note.clone()),
        d_fl: Entry::with(Status::Ok, d_fl, Some("estimate".into())),
        d_g: Entry::with(
            if g_in { Status::Ok } else { Status::OutOfRadius },
            Prob::from_value(dg),
            (!g_in).then(|| format!("rd = {} > n-k = {}", p.d * p.r, p.redundancy())),
        ),
        success_lower: Entry::with(new_status, success_lower(p, pt), new_note),
    }
}

/// `(1 - q^{r(d+t)}/(q^m - q^{r-1})) · P_t`.
pub fn success_lower(p: &ProbParams, pt: Prob) -> Prob {
    if p.r == 0 {
        return Prob::ONE;
    }
    let a = a_new(p);
    Prob { value: ((1.0 - a) * pt.value()).clamp(0.0, 1.0), complement: failure_from(a, pt).value() }
}

/// Exact rational arithmetic for the closed forms of `P_t` and the raw
/// (unclamped) failure expressions.
pub mod exact {
    use super::*;
    use num_traits::{One, Zero};

    pub fn qpow(q: u32, e: i64) -> BigRational {
        let base = BigInt::from(q).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            BigRational::from_integer(base)
        } else {
            BigRational::new(BigInt::one(), base)
        }
    }

    fn prod_one_minus(q: u32, exps: impl IntoIterator<Item = i64>) -> BigRational {
        exps.into_iter().fold(BigRational::one(), |acc, e| acc * (BigRational::one() - qpow(q, e)))
    }

    pub fn full_rank(q: u32, rows: usize, r: usize) -> BigRational {
        prod_one_minus(q, (0..r as i64).map(|i| i - rows as i64))
    }

    pub fn p_opt(q: u32, n: usize, k: usize, r: usize) -> BigRational {
        let nk = (n - k) as i64;
        full_rank(q, n - k, r) * prod_one_minus(q, (1..=r as i64).map(|j| j - nk))
    }

    pub fn p2_d2(q: u32, n: usize, k: usize, r: usize) -> BigRational {
        let nk = n - k;
        if r == 0 {
            return BigRational::one();
        }
        if r >= nk {
            return BigRational::zero();
        }
        let u = nk - r;
        let qi = |e: usize| BigInt::from(q).pow(e as u32);
        let mut sum = BigRational::zero();
        for v in r.div_ceil(2)..=r.min(u) {
            let mut term = qpow(q, -((u * r) as i64));
            for i in 0..v {
                term *= BigRational::new((qi(u) - qi(i)) * (qi(r) - qi(i)), qi(v) - qi(i));
            }
            term *= prod_one_minus(q, (0..(r - v) as i64).map(|i| i - v as i64));
            sum += term;
        }
        full_rank(q, nk, r) * sum
    }

    /// `P_t` as an exact rational when its source is a closed form.
    pub fn pt(p: &ProbParams) -> Option<BigRational> {
        let (_, source) = best_pt(p).ok()?;
        Some(match source {
            PtSource::NoError => BigRational::one(),
            PtSource::RankInfeasible => BigRational::zero(),
            PtSource::DegreeOne => full_rank(p.q, p.redundancy(), p.r),
            PtSource::Optimal => p_opt(p.q, p.n, p.k, p.r),
            PtSource::ExactD2 => p2_d2(p.q, p.n, p.k, p.r),
            PtSource::LowerBound => return None,
        })
    }

    pub fn a_new(p: &ProbParams) -> BigRational {
        qpow(p.q, (p.r * (p.d + p.t)) as i64) / (qpow(p.q, p.m as i64) - qpow(p.q, p.r as i64 - 1))
    }

    pub fn a_fl(p: &ProbParams) -> BigRational {
        qpow(p.q, -(p.m as i64) + (2 * (p.d + p.t - 1) * p.r) as i64 - p.r as i64)
    }

    /// `1 - (1 - a)·P_t`, unclamped.
    pub fn failure(a: &BigRational, pt: &BigRational) -> BigRational {
        BigRational::one() - (BigRational::one() - a) * pt
    }

    /// Orders the unclamped new and FL failure expressions, when `P_t` has
    /// a closed form. With no error both failures are 0.
    pub fn compare_new_fl(p: &ProbParams) -> Option<Ordering> {
        if p.r == 0 {
            return Some(Ordering::Equal);
        }
        let pt = pt(p)?;
        Some(failure(&a_new(p), &pt).cmp(&failure(&a_fl(p), &pt)))
    }

    pub fn to_f64(x: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        x.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PtEntry {
    pub value: Entry,
    pub source: Option<PtSource>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbReport {
    pub params: ProbParams,
    pub u: i64,
    pub p1: Entry,
    pub p2_exact: Entry,
    pub p_opt: Entry,
    pub b_lower: Entry,
    pub b_lower_argmin_j: Option<usize>,
    pub b_corollary: Entry,
    pub d2_remark_as_printed: Entry,
    pub d2_remark_sign_corrected: Entry,
    pub p_upper: Entry,
    #[serde(rename = "K")]
    pub k_conjecture: Entry,
    pub pt: PtEntry,
    pub success_lower: Entry,
    pub d_new: Entry,
    pub d_fl: Entry,
    pub d_g: Entry,
    /// `Some(true)` when the unclamped new failure expression is strictly
    /// below the FL one in exact arithmetic.
    pub new_below_fl_exact: Option<bool>,
}

pub fn report(p: &ProbParams) -> Result<ProbReport> {
    p.validate()?;
    let (q, n, k, d, t, r) = (p.q, p.n, p.k, p.d, p.t, p.r);
    let u = p.u();
    let p2_exact = if d == 2 { Entry::ok(p2_exact_d2(q, n, k, r)) } else { Entry::violation("exact P_2 needs d = 2") };
    let p_opt = if r == 0 { Entry::ok(Prob::ONE) } else { Entry::ok(p_opt_exact(q, n, k, r)) };
    let lb = p_lower_bound(q, n, k, d, r, t);
    let b_corollary = Entry::from_bounded(p_corollary_bound(q, u, t));
    let remark = |reading| {
        if d != 2 || u <= 0 {
            Entry::violation("remark bound needs d = 2 and u > 0")
        } else {
            let (raw, prob) = d2_remark_bound(q, u, reading);
            let note = (raw > 1.0).then(|| format!("raw value {raw} exceeds 1; clamped"));
            Entry::with(Status::Ok, prob, note)
        }
    };
    let (pt, fb) = match best_pt(p) {
        Ok((prob, source)) => {
            (PtEntry { value: Entry::ok(prob), source: Some(source) }, Some(failure_bounds(p, prob)))
        }
        Err(v) => (PtEntry { value: Entry::violation(v.0), source: None }, None),
    };
    let missing = || Entry::violation("no value of P_t available");
    Ok(ProbReport {
        params: *p,
        u,
        p1: Entry::ok(p1_classical(q, n, k, d, r)),
        p2_exact,
        p_opt,
        b_lower_argmin_j: lb.as_ref().ok().map(|b| b.argmin_j),
        b_lower: Entry::from_bounded(lb.map(|b| b.prob)),
        b_corollary,
        d2_remark_as_printed: remark(Reading::AsPrinted),
        d2_remark_sign_corrected: remark(Reading::SignCorrected),
        p_upper: Entry::ok(p_upper_bound(q, n, k, r)),
        k_conjecture: Entry::from_bounded(conjecture_k(q, d, r, u)),
        pt,
        success_lower: fb.as_ref().map_or_else(missing, |f| f.success_lower.clone()),
        d_new: fb.as_ref().map_or_else(missing, |f| f.d_new.clone()),
        d_fl: fb.as_ref().map_or_else(missing, |f| f.d_fl.clone()),
        d_g: fb.as_ref().map_or_else(missing, |f| f.d_g.clone()),
        new_below_fl_exact: exact::compare_new_fl(p).map(|o| o == Ordering::Less),
    })
}

impl ProbReport {
    pub const CSV_HEADER: [&'static str; 23] = [
        "q", "m", "n", "k", "d", "t", "r", "u", "p1", "p2_exact", "p_opt", "b_lower", "b_lower_argmin_j",
        "b_corollary", "p_upper", "K", "pt", "pt_source", "success_lower", "d_new", "d_fl", "d_g",
        "new_below_fl_exact",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let p = &self.params;
        let mut row: Vec<String> = [p.q as usize, p.m, p.n, p.k, p.d, p.t, p.r].iter().map(|x| x.to_string()).collect();
        row.push(self.u.to_string());
        for e in [&self.p1, &self.p2_exact, &self.p_opt, &self.b_lower] {
            row.push(e.cell());
        }
        row.push(self.b_lower_argmin_j.map_or(String::new(), |j| j.to_string()));
        for e in [&self.b_corollary, &self.p_upper, &self.k_conjecture, &self.pt.value] {
            row.push(e.cell());
        }
        row.push(self.pt.source.map_or(String::new(), |s| {
            serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
        }));
        for e in [&self.success_lower, &self.d_new, &self.d_fl, &self.d_g] {
            row.push(e.cell());
        }
        row.push(self.new_below_fl_exact.map_or(String::new(), |b| b.to_string()));
        row
    }
}

/// Rounds half-up to 5 decimals.
pub fn round5(x: f64) -> String {
    format!("{:.5}", (x * 1e5 + 0.5).floor() / 1e5)
}

/// One row of the `r, P_1, B_2, P_{r(d-1)}` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub r: usize,
    pub p1: Entry,
    pub b2: Entry,
    pub p_opt: Entry,
}

impl TableRow {
    pub const CSV_HEADER: [&'static str; 4] = ["r", "P_1", "B_2", "P_{r(d-1)}"];

    pub fn new(q: u32, n: usize, k: usize, d: usize, r: usize) -> TableRow {
        TableRow {
            r,
            p1: Entry::ok(p1_classical(q, n, k, d, r)),
            b2: Entry::from_bounded(p_lower_bound(q, n, k, d, r, 2).map(|b| b.prob)),
            p_opt: if d < 2 {
                Entry::violation("t = r(d-1) needs d >= 2")
            } else if r == 0 {
                Entry::ok(Prob::ONE)
            } else {
                Entry::ok(p_opt_exact(q, n, k, r))
            },
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        let cell = |e: &Entry| e.value.map_or_else(|| "domain-violation".to_string(), round5);
        vec![self.r.to_string(), cell(&self.p1), cell(&self.b2), cell(&self.p_opt)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(5, 0, 3), BigUint::from(1u32));
        assert_eq!(gaussian_binomial(3, 1, 2), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(4, 2, 2), BigUint::from(35u32));
        assert_eq!(gaussian_binomial(2, 3, 2), BigUint::from(0u32));
        for n in 0..=24 {
            for k in 0..=n {
                let g = gaussian_binomial(n, k, 2);
                let lo = BigUint::from(2u32).pow((k * (n - k)) as u32);
                assert!(lo <= g && g <= lo * 4u32, "{n} {k}");
                let ln = ln_gaussian_binomial(n, k, 2);
                assert!((ln - g.to_f64().unwrap().ln()).abs() < 1e-9, "{n} {k}");
            }
        }
    }

    #[test]
    fn table_values() {
        let expect = [
            (1, "0.99953", "0.99991", "0.99995"),
            (2, "0.98447", "0.99982", "0.99986"),
            (3, "0.57759", "0.99957", "0.99968"),
            (4, "0.00000", "0.99536", "0.99931"),
            (5, "0.00000", "0.74854", "0.99858"),
        ];
        for (r, p1, b2, po) in expect {
            let row = TableRow::new(2, 32, 16, 5, r).csv_row();
            assert_eq!(row, vec![r.to_string(), p1.into(), b2.into(), po.into()]);
        }
        let lb = p_lower_bound(2, 32, 16, 5, 1, 2).unwrap();
        assert_eq!(lb.argmin_j, 2);
        assert!(close(lb.prob.complement(), 2f64.powi(-26) + 3.0 * 2f64.powi(-15), 1e-18));
    }

    #[test]
    fn small_cases() {
        assert_eq!(p1_classical(2, 32, 16, 5, 0), Prob::ONE);
        assert_eq!(p1_classical(2, 32, 16, 5, 4).value(), 0.0);
        assert_eq!(hq(2, 0), Prob::ONE);
        assert!(close(p_upper_bound(2, 32, 16, 1).value(), (1.0 - 2f64.powi(-16)).powi(2), 1e-15));
        assert!(close(p_corollary_bound(2, 15, 2).unwrap().value(), 1.0 - 4.0 * 2f64.powi(-15), 1e-15));
        assert!(p_corollary_bound(2, 15, 20).is_err());
        assert!(p_lower_bound(2, 32, 16, 5, 16, 2).is_err());
        assert!(p_lower_bound(2, 32, 16, 1, 2, 2).is_err());
        assert!(p_lower_bound(2, 32, 16, 5, 5, 1).is_err());
    }

    #[test]
    fn p2_reduces_at_r1() {
        for nk in [6usize, 10, 16] {
            let u = nk as i32 - 1;
            let want = (1.0 - 2f64.powi(-(nk as i32))) * (1.0 - 2f64.powi(-u));
            assert!(close(p2_exact_d2(2, nk + 4, 4, 1).value(), want, 1e-15));
        }
        // empty split range
        assert_eq!(p2_exact_d2(2, 10, 4, 5), Prob::ZERO);
    }

    #[test]
    fn p2_matches_popt_where_both_apply() {
        for r in 1..=2 {
            let a = p2_exact_d2(2, 32, 16, r);
            let b = p_opt_exact(2, 32, 16, r);
            assert!(close(a.complement(), b.complement(), 1e-12 * b.complement()), "{r}");
        }
    }

    #[test]
    fn float_agrees_with_exact() {
        for r in 0..=10 {
            let f = p2_exact_d2(2, 32, 16, r);
            let e = exact::p2_d2(2, 32, 16, r);
            assert!(close(f.value(), exact::to_f64(&e), 1e-14), "{r}");
            let c = BigRational::from_integer(1.into()) - e;
            let ce = exact::to_f64(&c);
            assert!(close(f.complement(), ce, 1e-10 * ce.max(1e-300)), "{r} {} {}", f.complement(), ce);
            let po = p_opt_exact(2, 32, 16, r);
            assert!(close(po.value(), exact::to_f64(&exact::p_opt(2, 32, 16, r)), 1e-15));
        }
    }

    #[test]
    fn figure_regime_p2() {
        let want = [1.0, 0.99995, 0.99986, 0.99968, 0.99931, 0.99858, 0.99707, 0.99374, 0.98466, 0.94745, 0.74119];
        for (r, w) in want.iter().enumerate() {
            assert_eq!(round5(p2_exact_d2(2, 32, 16, r).value()), round5(*w), "{r}");
        }
    }

    #[test]
    fn sandwich_and_ordering() {
        for r in 1..=5 {
            let u = 16 - r as i64;
            let (lo, hi) = p_opt_sandwich(2, u);
            let v = p_opt_exact(2, 32, 16, r).value();
            assert!(lo <= v && v <= hi, "{r}");
            assert!(p_lower_bound(2, 32, 16, 5, r, 2).unwrap().prob.value() <= v);
            // the t = 2 closed form applies when ⌈r(d-1)/u⌉ + 1 = 2
            if (4 * r) as i64 <= u {
                let cor = p_corollary_bound(2, u, 2).unwrap().value();
                assert!(cor <= p_lower_bound(2, 32, 16, 5, r, 2).unwrap().prob.value() + 1e-15);
            }
        }
    }

    #[test]
    fn k_chain() {
        for nk in [12usize, 16] {
            for d in [2usize, 3, 5] {
                for r in 1..=4 {
                    let u = (nk - r) as i64;
                    let k = conjecture_k(2, d, r, u).unwrap().value();
                    let qo = q_opt(2, nk + 1, 1, r).value();
                    assert!(k <= qo + 1e-15 && qo <= 1.0 - 2f64.powi(-(u as i32)) + 1e-15);
                    let tail: f64 = (nk..=((d - 1) * r + u as usize - 1)).map(|i| 1.0 - 2f64.powi(-(i as i32))).product();
                    assert!(close(k, qo * tail, 1e-14));
                }
            }
        }
    }

    #[test]
    fn d2_remark_readings() {
        let (raw, p) = d2_remark_bound(2, 15, Reading::AsPrinted);
        assert!(raw > 1.0 && p.value() == 1.0);
        let (raw, _) = d2_remark_bound(2, 15, Reading::SignCorrected);
        assert!(raw < 1.0);
        // t ≤ u/2: the corrected reading sits below the general t > 2 bound.
        for u in [8i64, 12, 15] {
            for t in 3..=(u / 2) as usize {
                let cor = p_corollary_bound(2, u, t).unwrap().value();
                assert!(cor >= d2_remark_bound(2, u, Reading::SignCorrected).0, "{u} {t}");
            }
        }
    }

    fn fig(r: usize) -> ProbParams {
        ProbParams { q: 2, m: 37, n: 32, k: 16, d: 2, t: 2, r }
    }

    #[test]
    fn failure_bounds_regime() {
        let r0 = report(&fig(0)).unwrap();
        assert_eq!(r0.d_new.value, Some(0.0));
        assert_eq!(r0.success_lower.value, Some(1.0));
        for r in 1..=5 {
            let rep = report(&fig(r)).unwrap();
            let (n, f) = (rep.d_new.value.unwrap(), rep.d_fl.value.unwrap());
            assert!(n <= f && (f - n) / f < 0.15, "{r} {n} {f}");
        }
        for r in 6..=10 {
            let rep = report(&fig(r)).unwrap();
            assert_eq!(rep.new_below_fl_exact, Some(true), "{r}");
            assert!(rep.d_new.value.unwrap() <= rep.d_fl.value.unwrap());
        }
        assert_eq!(report(&fig(10)).unwrap().d_new.status, Status::OutOfRadius);
        let rep = report(&fig(3)).unwrap();
        assert_eq!(rep.d_fl.note.as_deref(), Some("estimate"));
        assert_eq!(rep.pt.source, Some(PtSource::ExactD2));
    }

    #[test]
    fn complement_consistency() {
        for r in 0..=10 {
            let rep = report(&fig(r)).unwrap();
            for e in [&rep.p1, &rep.p_opt, &rep.pt.value, &rep.success_lower, &rep.d_new, &rep.d_fl, &rep.d_g] {
                let v = e.value.unwrap();
                assert!((0.0..=1.0).contains(&v));
                if let Some(lc) = e.log10_complement {
                    let c = 10f64.powf(lc);
                    assert!(((1.0 - v) - c).abs() <= 1e-12 * v.max(c), "{r} {v} {c}");
                }
            }
        }
    }

    #[test]
    fn pt_sources() {
        let base = ProbParams { q: 2, m: 60, n: 32, k: 16, d: 3, t: 2, r: 2 };
        assert_eq!(best_pt(&ProbParams { r: 0, ..base }).unwrap().1, PtSource::NoError);
        assert_eq!(best_pt(&ProbParams { d: 1, ..base }).unwrap().1, PtSource::DegreeOne);
        assert_eq!(best_pt(&ProbParams { t: 4, ..base }).unwrap().1, PtSource::Optimal);
        assert_eq!(best_pt(&base).unwrap().1, PtSource::LowerBound);
        assert_eq!(best_pt(&ProbParams { r: 12, ..base }).unwrap().1, PtSource::RankInfeasible);
        assert!(report(&ProbParams { q: 4, ..base }).is_err());
        let tiny = ProbParams { q: 2, m: 200, n: 160, k: 80, d: 2, t: 2, r: 1 };
        let pt = best_pt(&tiny).unwrap().0;
        assert!(pt.complement() > 0.0 && pt.log10_complement() < -20.0);
    }

    #[test]
    fn report_serialises() {
        let v = serde_json::to_value(report(&fig(4)).unwrap()).unwrap();
        assert_eq!(v["d_fl"]["note"], "estimate");
        assert_eq!(v["pt"]["source"], "exact-d2");
        assert!(v["K"]["value"].as_f64().unwrap() <= 1.0);
        let row = report(&fig(4)).unwrap().csv_row();
        assert_eq!(row.len(), ProbReport::CSV_HEADER.len());
    }
}
