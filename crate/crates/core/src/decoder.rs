//! Successive-intersection decoder.
//!
//! `s = yHᵀ`, `S = supp(s)`, `F = V_{α,t}S`, then `F ← α⁻¹F ∩ F` for
//! `d+t-2` rounds to recover the error support `E`, followed by erasure
//! decoding through `H_ext` and a final syndrome check.

use serde::Serialize;

use crate::code::{combine, sub_words, CodeInstance, Word};
use crate::error::{param, Result};
use crate::field::{Elem, Field};
use crate::linalg::Matrix;
use crate::subspace::Subspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DecoderConfig {
    pub t: usize,
    pub verify_final: bool,
}

impl DecoderConfig {
    pub fn new(t: usize) -> Result<Self> {
        if t == 0 {
            return param("expansion parameter t must be at least 1");
        }
        Ok(DecoderConfig { t, verify_final: true })
    }

    /// `⌈r(d-1)/u⌉ + 1` with `u = n - k - r`, or `None` when `u ≤ 0`.
    pub fn recommended_t(n: usize, k: usize, d: usize, r: usize) -> Option<usize> {
        let u = (n - k).checked_sub(r).filter(|&u| u > 0)?;
        Some((r * (d - 1)).div_ceil(u) + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureStage {
    ZeroSupport,
    SyndromeDecomposition,
    ErasureSystem,
    Verification,
}

impl FailureStage {
    pub const ALL: [FailureStage; 4] = [
        FailureStage::ZeroSupport,
        FailureStage::SyndromeDecomposition,
        FailureStage::ErasureSystem,
        FailureStage::Verification,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FailureStage::ZeroSupport => "zero-support",
            FailureStage::SyndromeDecomposition => "syndrome-decomposition",
            FailureStage::ErasureSystem => "erasure-system",
            FailureStage::Verification => "verification",
        }
    }
}

impl std::fmt::Display for FailureStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Success { codeword: Word, error: Word, support: Subspace },
    Failure { stage: FailureStage },
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, DecodeOutcome::Success { .. })
    }

    pub fn stage(&self) -> Option<FailureStage> {
        match self {
            DecodeOutcome::Failure { stage } => Some(*stage),
            DecodeOutcome::Success { .. } => None,
        }
    }

    /// JSON view with elements in the field's text format.
    pub fn to_json(&self, field: &Field) -> serde_json::Value {
        let fmt = |w: &[Elem]| w.iter().map(|e| field.format_elem(e)).collect::<Vec<_>>();
        match self {
            DecodeOutcome::Success { codeword, error, support } => serde_json::json!({
                "status": "success",
                "codeword": fmt(codeword),
                "error": fmt(error),
                "support": fmt(&support.basis_elems()),
            }),
            DecodeOutcome::Failure { stage } => serde_json::json!({
                "status": "failure",
                "stage": stage.label(),
            }),
        }
    }
}

/// Result of the erasure step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Erasure {
    Solved(Word),
    NoSolution(FailureStage),
}

/// `V_{α,t} · S`.
pub fn expand_syndrome_support(field: &Field, s: &Subspace, t: usize) -> Result<Subspace> {
    if t == 0 {
        return param("expansion parameter t must be at least 1");
    }
    Ok(s.alpha_expand(field, t))
}

/// Applies `F ← α⁻¹F ∩ F` exactly `steps` times.
pub fn recover_support(field: &Field, f: &Subspace, steps: usize) -> Subspace {
    let alpha_inv = field.alpha_power(-1);
    let mut cur = f.clone();
    for _ in 0..steps {
        if cur.is_zero() {
            break;
        }
        let shifted = cur.scale(field, &alpha_inv).expect("alpha is invertible");
        cur = shifted.intersect(&cur);
    }
    cur
}

/// Finds `e` with `supp(e) ⊆ E` and `eHᵀ = s`.
///
/// The syndrome coordinates are first split along the products `ε_u α^v`
/// (one stacked system shared by all rows of `H`), then each error
/// coordinate column is solved against `H_ext`.
pub fn erasure_decode(code: &CodeInstance, e: &Subspace, s: &[Elem]) -> Result<Erasure> {
    let p = code.params();
    let field = code.field();
    let (nk, d, m) = (p.redundancy(), p.d, p.m);
    if s.len() != nk {
        return param(format!("syndrome has length {}, expected {nk}", s.len()));
    }
    let r = e.dim();
    if r == 0 {
        return param("support must have dimension at least 1");
    }
    let eps = e.basis_elems();

    // Columns of `pt` are the coordinates of ε_u α^v at index u·d + v.
    let mut pt = Matrix::zeros(field.q(), m, r * d);
    for (u, eu) in eps.iter().enumerate() {
        let mut prod = eu.clone();
        for v in 0..d {
            for (row, &c) in prod.coords().iter().enumerate() {
                pt.set(row, u * d + v, c);
            }
            prod = field.mul_alpha(&prod);
        }
    }
    let mut st = Matrix::zeros(field.q(), m, nk);
    for (i, si) in s.iter().enumerate() {
        field.validate(si)?;
        for (row, &c) in si.coords().iter().enumerate() {
            st.set(row, i, c);
        }
    }
    let Some(x) = pt.solve_many(&st)? else {
        return Ok(Erasure::NoSolution(FailureStage::SyndromeDecomposition));
    };

    // rhs[(i·d + v), u] = s_{i,u,v}
    let mut rhs = Matrix::zeros(field.q(), nk * d, r);
    for i in 0..nk {
        for u in 0..r {
            for v in 0..d {
                rhs.set(i * d + v, u, x.get(u * d + v, i));
            }
        }
    }
    let Some(coef) = code.h_ext().solve_many(&rhs)? else {
        return Ok(Erasure::NoSolution(FailureStage::ErasureSystem));
    };
    Ok(Erasure::Solved(combine(field, &eps, &coef.transpose())))
}

pub fn decode(code: &CodeInstance, y: &[Elem], config: &DecoderConfig) -> Result<DecodeOutcome> {
    if config.t == 0 {
        return param("expansion parameter t must be at least 1");
    }
    let field = code.field();
    let p = code.params();
    if !code.flags().unique_decoding {
        log::debug!("decoding with a code lacking the unique-decoding property; erasure solutions may not be unique");
    }
    let s = code.syndrome(y)?;
    if s.iter().all(Elem::is_zero) {
        return Ok(DecodeOutcome::Success {
            codeword: y.to_vec(),
            error: vec![field.zero(); p.n],
            support: Subspace::zero(field),
        });
    }
    let big_s = Subspace::span(field, &s);
    let f = expand_syndrome_support(field, &big_s, config.t)?;
    let support = recover_support(field, &f, p.d + config.t - 2);
    if support.is_zero() {
        return Ok(DecodeOutcome::Failure { stage: FailureStage::ZeroSupport });
    }
    let e = match erasure_decode(code, &support, &s)? {
        Erasure::Solved(e) => e,
        Erasure::NoSolution(stage) => return Ok(DecodeOutcome::Failure { stage }),
    };
    let codeword = sub_words(field, y, &e);
    if config.verify_final && !code.syndrome(&codeword)?.iter().all(Elem::is_zero) {
        return Ok(DecodeOutcome::Failure { stage: FailureStage::Verification });
    }
    Ok(DecodeOutcome::Success { codeword, error: e, support })
}

/// The two sufficient conditions for successful decoding, evaluated with
/// knowledge of the planted error support `e_supp` and the syndrome support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conditions {
    /// `V_{α,t}S = V_{α,d+t-1}E`
    pub expansion_complete: bool,
    /// `dim(V_{α,d+t}E) = (d+t)r`
    pub product_full: bool,
}

impl Conditions {
    pub fn both(&self) -> bool {
        self.expansion_complete && self.product_full
    }
}

pub fn check_conditions(field: &Field, d: usize, t: usize, syndrome_support: &Subspace, e_supp: &Subspace) -> Conditions {
    let lhs = syndrome_support.alpha_expand(field, t);
    let rhs = e_supp.alpha_expand(field, d + t - 1);
    Conditions {
        expansion_complete: lhs == rhs,
        product_full: e_supp.alpha_expand(field, d + t).dim() == (d + t) * e_supp.dim(),
    }
}
