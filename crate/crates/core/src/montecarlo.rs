//! Seeded Monte Carlo estimators for `P_t`, `Q_t` and end-to-end decoding.
//!
//! Trial `i` draws from its own ChaCha stream (`seed`, stream `i`), and the
//! per-trial tallies are merged by addition, so results do not depend on
//! the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::code::{add_words, sample_error, support, CodeInstance, CodeParams, Requirements};
use crate::decoder::{check_conditions, decode, DecodeOutcome, DecoderConfig, FailureStage};
use crate::error::{param, Result};
use crate::field::{is_prime, Field};
use crate::linalg::Matrix;
use crate::probability::ProbParams;

/// z-score of the two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Parameters of end-to-end decoding runs.
pub type SimParams = ProbParams;

/// Parameters of the rank experiments on `M_t` and `M_t(Z, A)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankParams {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub r: usize,
}

impl RankParams {
    fn validate(&self) -> Result<()> {
        if !is_prime(self.q) {
            return param(format!("q = {} is not prime", self.q));
        }
        if !(0 < self.k && self.k < self.n) || self.d == 0 || self.t == 0 {
            return param("need 0 < k < n, d >= 1 and t >= 1");
        }
        Ok(())
    }

    fn redundancy(&self) -> usize {
        self.n - self.k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    RankMt,
    RankMtza,
    Decode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParamRecord {
    pub q: u32,
    pub m: Option<usize>,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub r: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub zero_support: u64,
    pub syndrome_decomposition: u64,
    pub erasure_system: u64,
    /// Includes miscorrections (a verified but wrong codeword).
    pub verification: u64,
}

/// Per-trial checks of the two sufficient decoding conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    /// `V_{α,t}S = V_{α,d+t-1}E`
    pub expansion_complete: u64,
    /// `dim(V_{α,d+t}E) = (d+t)r`
    pub product_full: u64,
    pub both: u64,
    pub successes_given_both: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub experiment: Experiment,
    pub params: ParamRecord,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub failures: StageCounts,
    pub miscorrections: u64,
    pub seed: u64,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<Diagnosis>,
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl TrialStats {
    pub const CSV_HEADER: [&'static str; 17] = [
        "q", "m", "n", "k", "d", "t", "r", "trials", "successes", "rate", "ci_lo", "ci_hi",
        "fail_zero_support", "fail_syndrome_decomp", "fail_erasure", "fail_verify", "seed",
    ];

    fn new(experiment: Experiment, params: ParamRecord, trials: u64, seed: u64, tally: &Tally) -> Self {
        let (ci_lo, ci_hi) = wilson(tally.successes, trials, Z95);
        TrialStats {
            experiment,
            params,
            trials,
            successes: tally.successes,
            rate: if trials == 0 { 0.0 } else { tally.successes as f64 / trials as f64 },
            ci_lo,
            ci_hi,
            failures: tally.stages,
            miscorrections: tally.miscorrections,
            seed,
            flags: Vec::new(),
            diagnosis: None,
        }
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson(self.successes, self.trials, z)
    }

    /// Whether `p` lies in the Wilson interval of half-width `z` sigma.
    pub fn consistent_with(&self, p: f64, z: f64) -> bool {
        let (lo, hi) = self.wilson(z);
        lo <= p && p <= hi
    }

    pub fn failures_total(&self) -> u64 {
        let s = &self.failures;
        s.zero_support + s.syndrome_decomposition + s.erasure_system + s.verification
    }

    pub fn csv_row(&self) -> Vec<String> {
        let p = &self.params;
        let f = &self.failures;
        vec![
            p.q.to_string(),
            p.m.map_or(String::new(), |m| m.to_string()),
            p.n.to_string(),
            p.k.to_string(),
            p.d.to_string(),
            p.t.to_string(),
            p.r.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            self.rate.to_string(),
            self.ci_lo.to_string(),
            self.ci_hi.to_string(),
            f.zero_support.to_string(),
            f.syndrome_decomposition.to_string(),
            f.erasure_system.to_string(),
            f.verification.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Additive per-trial accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    successes: u64,
    stages: StageCounts,
    miscorrections: u64,
    diag: Diagnosis,
}

impl Tally {
    fn success() -> Self {
        Tally { successes: 1, ..Default::default() }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.successes += o.successes;
        self.stages.zero_support += o.stages.zero_support;
        self.stages.syndrome_decomposition += o.stages.syndrome_decomposition;
        self.stages.erasure_system += o.stages.erasure_system;
        self.stages.verification += o.stages.verification;
        self.miscorrections += o.miscorrections;
        self.diag.expansion_complete += o.diag.expansion_complete;
        self.diag.product_full += o.diag.product_full;
        self.diag.both += o.diag.both;
        self.diag.successes_given_both += o.diag.successes_given_both;
        self
    }
}

/// RNG of trial `index`: independent of every other trial's stream.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// RNG used to sample the shared code instance of a run.
pub fn code_rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, u64::MAX)
}

/// Runs `trials` trials on `workers` threads: 0 uses the global pool, 1 runs
/// sequentially. Without the `parallel` feature every run is sequential.
fn run<F>(trials: u64, workers: usize, f: F) -> Result<Tally>
where
    F: Fn(u64) -> Result<Tally> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != 1 {
        use rayon::prelude::*;
        let job = || (0..trials).into_par_iter().map(&f).try_reduce(Tally::default, |a, b| Ok(a.merge(b)));
        return if workers == 0 {
            job()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| crate::Error::Parameter(format!("cannot build thread pool: {e}")))?
                .install(job)
        };
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..trials).try_fold(Tally::default(), |acc, i| Ok(acc.merge(f(i)?)))
}

/// Assembles the block-Toeplitz `M_t`: block row `i` holds `X_1 … X_d`
/// starting at block column `i`.
pub fn build_mt(q: u32, t: usize, blocks: &[Matrix]) -> Result<Matrix> {
    let d = blocks.len();
    let Some(first) = blocks.first() else {
        return param("need at least one block");
    };
    let (rows, r) = (first.rows(), first.cols());
    if blocks.iter().any(|b| b.rows() != rows || b.cols() != r || b.q() != q) {
        return param("blocks must share shape and field");
    }
    let mut m = Matrix::zeros(q, t * rows, r * (d + t - 1));
    for i in 0..t {
        for (l, x) in blocks.iter().enumerate() {
            for a in 0..rows {
                for b in 0..r {
                    m.set(i * rows + a, (i + l) * r + b, x.get(a, b));
                }
            }
        }
    }
    Ok(m)
}

/// Block companion matrix with top blocks `A_1 … A_{d-1}` and identity
/// blocks on the subdiagonal.
pub fn companion(q: u32, r: usize, blocks: &[Matrix]) -> Result<Matrix> {
    let s = blocks.len();
    if blocks.iter().any(|b| b.rows() != r || b.cols() != r || b.q() != q) {
        return param("companion blocks must be r x r");
    }
    let mut a = Matrix::zeros(q, r * s, r * s);
    for (l, blk) in blocks.iter().enumerate() {
        for i in 0..r {
            for j in 0..r {
                a.set(i, l * r + j, blk.get(i, j));
            }
        }
    }
    for l in 1..s {
        for i in 0..r {
            a.set(l * r + i, (l - 1) * r + i, 1);
        }
    }
    Ok(a)
}

/// `(Z; ZA; …; ZA^{t-1})`.
pub fn stack_powers(z: &Matrix, a: &Matrix, t: usize) -> Matrix {
    let mut out = z.clone();
    let mut cur = z.clone();
    for _ in 1..t {
        cur = cur.mul(a);
        out = out.vstack(&cur);
    }
    out
}

fn rank_record(p: &RankParams) -> ParamRecord {
    ParamRecord { q: p.q, m: None, n: p.n, k: p.k, d: p.d, t: p.t, r: p.r }
}

/// Estimates `P_t = Pr(rank M_t = r(d+t-1))`.
pub fn estimate_pt(p: &RankParams, trials: u64, seed: u64, workers: usize) -> Result<TrialStats> {
    p.validate()?;
    let (q, nk, d, t, r) = (p.q, p.redundancy(), p.d, p.t, p.r);
    let target = r * (d + t - 1);
    let tally = run(trials, workers, |i| {
        let mut rng = trial_rng(seed, i);
        let blocks: Vec<Matrix> = (0..d).map(|_| Matrix::random(q, nk, r, &mut rng)).collect();
        let m = build_mt(q, t, &blocks)?;
        Ok(if m.rank() == target { Tally::success() } else { Tally::default() })
    })?;
    let mut stats = TrialStats::new(Experiment::RankMt, rank_record(p), trials, seed, &tally);
    if target > t * nk {
        stats.flags.push("rank-infeasible".into());
    }
    Ok(stats)
}

/// Estimates `Q_t = Pr(rank M_t(Z, A) = r(d-1))`. For `d = 1` the event is
/// empty-rank and `Q_t = 1` by convention.
pub fn estimate_qt(p: &RankParams, trials: u64, seed: u64, workers: usize) -> Result<TrialStats> {
    p.validate()?;
    let (q, nk, d, t, r) = (p.q, p.redundancy(), p.d, p.t, p.r);
    if d == 1 {
        let tally = Tally { successes: trials, ..Default::default() };
        let mut stats = TrialStats::new(Experiment::RankMtza, rank_record(p), trials, seed, &tally);
        stats.flags.push("degenerate-d1".into());
        return Ok(stats);
    }
    if r >= nk {
        return param(format!("u = n-k-r must be positive, got r = {r}, n-k = {nk}"));
    }
    let u = nk - r;
    let target = r * (d - 1);
    let tally = run(trials, workers, |i| {
        let mut rng = trial_rng(seed, i);
        let z = Matrix::random(q, u, target, &mut rng);
        let blocks: Vec<Matrix> = (0..d - 1).map(|_| Matrix::random(q, r, r, &mut rng)).collect();
        let a = companion(q, r, &blocks)?;
        Ok(if stack_powers(&z, &a, t).rank() == target { Tally::success() } else { Tally::default() })
    })?;
    Ok(TrialStats::new(Experiment::RankMtza, rank_record(p), trials, seed, &tally))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub workers: usize,
    /// Run even outside `(d+t)r ≤ m` and `r(d+t-1) ≤ t(n-k)`.
    pub force: bool,
    /// Check the two sufficient conditions per trial.
    pub diagnose: bool,
    /// Draw a fresh parity-check matrix in every trial.
    pub resample_code: bool,
}

fn requirements(p: &CodeParams) -> Requirements {
    Requirements { maximal_row_span: true, unique_decoding: p.admits_unique_decoding() }
}

fn check_sim(p: &SimParams, force: bool) -> Result<(Field, CodeParams, Vec<String>)> {
    p.validate()?;
    let cp = CodeParams::new(p.q, p.m, p.n, p.k, p.d)?;
    if p.r > p.n.min(p.m) {
        return param(format!("r = {} exceeds min(n, m)", p.r));
    }
    let mut flags = Vec::new();
    if !(p.within_field() && p.rank_feasible()) {
        let why = format!(
            "outside the decoding radius: (d+t)r = {} vs m = {}, r(d+t-1) = {} vs t(n-k) = {}",
            (p.d + p.t) * p.r,
            p.m,
            p.r * (p.d + p.t - 1),
            p.t * p.redundancy()
        );
        if !force {
            return param(format!("{why}; pass --force to run anyway"));
        }
        log::warn!("{why}");
        flags.push("beyond-radius".into());
    }
    if !cp.admits_unique_decoding() {
        log::warn!("d < n/(n-k): sampling a code without the unique-decoding property");
        flags.push("no-unique-decoding".into());
    }
    Ok((Field::new(p.q, p.m)?, cp, flags))
}

/// Decodes `trials` random codewords hit by rank-`r` errors. One code is
/// sampled per run from [`code_rng`] unless `resample_code` is set.
pub fn simulate_decoding(p: &SimParams, trials: u64, seed: u64, opts: &SimOptions) -> Result<TrialStats> {
    let (field, cp, flags) = check_sim(p, opts.force)?;
    let code = if opts.resample_code {
        None
    } else {
        Some(CodeInstance::sample(&field, cp, requirements(&cp), &mut code_rng(seed))?)
    };
    simulate(p, &field, cp, code.as_ref(), trials, seed, opts, flags)
}

/// As [`simulate_decoding`] against a given code.
pub fn simulate_with_code(code: &CodeInstance, t: usize, r: usize, trials: u64, seed: u64, opts: &SimOptions) -> Result<TrialStats> {
    let cp = *code.params();
    let p = SimParams { q: cp.q, m: cp.m, n: cp.n, k: cp.k, d: cp.d, t, r };
    let (_, _, flags) = check_sim(&p, opts.force)?;
    let opts = SimOptions { resample_code: false, ..*opts };
    simulate(&p, code.field(), cp, Some(code), trials, seed, &opts, flags)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    p: &SimParams,
    field: &Field,
    cp: CodeParams,
    code: Option<&CodeInstance>,
    trials: u64,
    seed: u64,
    opts: &SimOptions,
    flags: Vec<String>,
) -> Result<TrialStats> {
    let cfg = DecoderConfig::new(p.t)?;
    let (n, r, d, t) = (p.n, p.r, p.d, p.t);
    let tally = run(trials, opts.workers, |i| {
        let mut rng = trial_rng(seed, i);
        let fresh;
        let code = match code {
            Some(c) => c,
            None => {
                fresh = CodeInstance::sample(field, cp, requirements(&cp), &mut rng)?;
                &fresh
            }
        };
        let c = code.random_codeword(&mut rng);
        let e = sample_error(field, n, r, &mut rng)?;
        let y = add_words(field, &c, &e);
        let out = decode(code, &y, &cfg)?;
        let mut tally = Tally::default();
        let ok = matches!(&out, DecodeOutcome::Success { codeword, .. } if *codeword == c);
        match &out {
            _ if ok => tally.successes = 1,
            DecodeOutcome::Success { .. } => {
                tally.miscorrections = 1;
                tally.stages.verification = 1;
            }
            DecodeOutcome::Failure { stage } => match stage {
                FailureStage::ZeroSupport => tally.stages.zero_support = 1,
                FailureStage::SyndromeDecomposition => tally.stages.syndrome_decomposition = 1,
                FailureStage::ErasureSystem => tally.stages.erasure_system = 1,
                FailureStage::Verification => tally.stages.verification = 1,
            },
        }
        if opts.diagnose && r > 0 {
            let s_supp = support(field, &code.syndrome(&y)?);
            let cond = check_conditions(field, d, t, &s_supp, &support(field, &e));
            tally.diag.expansion_complete = cond.expansion_complete as u64;
            tally.diag.product_full = cond.product_full as u64;
            tally.diag.both = cond.both() as u64;
            tally.diag.successes_given_both = (cond.both() && ok) as u64;
        }
        Ok(tally)
    })?;
    let record = ParamRecord { q: p.q, m: Some(p.m), n: p.n, k: p.k, d: p.d, t: p.t, r: p.r };
    let mut stats = TrialStats::new(Experiment::Decode, record, trials, seed, &tally);
    stats.flags = flags;
    if opts.resample_code {
        stats.flags.push("resample-code".into());
    }
    if opts.diagnose {
        stats.diagnosis = Some(tally.diag);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{full_rank_prob, p2_exact_d2, p_opt_exact, q_opt};

    fn rp(nk: usize, d: usize, t: usize, r: usize) -> RankParams {
        RankParams { q: 2, n: nk + 4, k: 4, d, t, r }
    }

    #[test]
    fn wilson_interval() {
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
        let (lo, hi) = wilson(100, 100, 3.0);
        assert!((hi - 1.0).abs() < 1e-12 && (lo - 100.0 / 109.0).abs() < 1e-12);
    }

    #[test]
    fn mt_layout() {
        let x1 = Matrix::from_rows(2, 1, &[vec![1], vec![0]]).unwrap();
        let x2 = Matrix::from_rows(2, 1, &[vec![0], vec![1]]).unwrap();
        let m = build_mt(2, 3, &[x1, x2]).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 4));
        let want = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        for (i, row) in want.iter().enumerate() {
            assert_eq!(m.row(i), row);
        }
    }

    #[test]
    fn companion_layout() {
        let a1 = Matrix::from_rows(2, 1, &[vec![1]]).unwrap();
        let a2 = Matrix::from_rows(2, 1, &[vec![0]]).unwrap();
        let a3 = Matrix::from_rows(2, 1, &[vec![1]]).unwrap();
        let a = companion(2, 1, &[a1, a2, a3]).unwrap();
        assert_eq!(a.row_vecs(), vec![vec![1, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        let z = Matrix::from_rows(2, 3, &[vec![1, 0, 0]]).unwrap();
        let s = stack_powers(&z, &a, 3);
        assert_eq!(s.row_vecs(), vec![vec![1, 0, 0], vec![1, 0, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn degree_one_full_rank() {
        let p = rp(6, 1, 1, 3);
        let s = estimate_pt(&p, 20_000, 1, 0).unwrap();
        assert!(s.consistent_with(full_rank_prob(2, 6, 3).value(), 3.0), "{s:?}");
    }

    #[test]
    fn pt_matches_closed_forms() {
        let s = estimate_pt(&rp(6, 2, 2, 2), 20_000, 2, 0).unwrap();
        assert!(s.consistent_with(p2_exact_d2(2, 10, 4, 2).value(), 3.0), "{s:?}");
        let s = estimate_pt(&rp(6, 3, 4, 2), 20_000, 3, 0).unwrap();
        assert!(s.consistent_with(p_opt_exact(2, 10, 4, 2).value(), 3.0), "{s:?}");
    }

    #[test]
    fn qt_reduction() {
        let p = rp(6, 3, 4, 2);
        let s = estimate_qt(&p, 20_000, 4, 0).unwrap();
        assert!(s.consistent_with(q_opt(2, 10, 4, 2).value(), 3.0), "{s:?}");
        let one = estimate_qt(&rp(6, 1, 2, 2), 10, 4, 0).unwrap();
        assert_eq!(one.successes, 10);
        assert!(estimate_qt(&rp(6, 2, 2, 6), 10, 4, 0).is_err());
    }

    #[test]
    fn infeasible_rank_flagged() {
        let s = estimate_pt(&rp(4, 3, 1, 2), 200, 0, 0).unwrap();
        assert_eq!(s.successes, 0);
        assert!(s.flags.contains(&"rank-infeasible".to_string()));
    }

    #[test]
    fn workers_do_not_change_results() {
        let p = rp(6, 2, 2, 2);
        let a = estimate_pt(&p, 3000, 9, 1).unwrap();
        let b = estimate_pt(&p, 3000, 9, 3).unwrap();
        let c = estimate_pt(&p, 3000, 9, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let sp = SimParams { q: 2, m: 24, n: 20, k: 10, d: 2, t: 2, r: 3 };
        let o1 = SimOptions { workers: 1, ..Default::default() };
        let o2 = SimOptions { workers: 2, ..Default::default() };
        assert_eq!(simulate_decoding(&sp, 60, 5, &o1).unwrap(), simulate_decoding(&sp, 60, 5, &o2).unwrap());
    }

    #[test]
    fn zero_errors_always_decode() {
        let sp = SimParams { q: 2, m: 37, n: 32, k: 16, d: 2, t: 2, r: 0 };
        let s = simulate_decoding(&sp, 50, 1, &SimOptions::default()).unwrap();
        assert_eq!(s.successes, 50);
    }

    #[test]
    fn stage_accounting_and_radius() {
        let sp = SimParams { q: 2, m: 24, n: 20, k: 10, d: 2, t: 2, r: 7 };
        assert!(simulate_decoding(&sp, 10, 1, &SimOptions::default()).is_err());
        let opts = SimOptions { force: true, diagnose: true, ..Default::default() };
        let s = simulate_decoding(&sp, 40, 1, &opts).unwrap();
        assert_eq!(s.successes + s.failures_total(), s.trials);
        assert!(s.flags.contains(&"beyond-radius".to_string()));
        assert!(s.diagnosis.is_some());
    }

    #[test]
    fn resampled_codes_decode() {
        let sp = SimParams { q: 2, m: 24, n: 20, k: 10, d: 2, t: 2, r: 2 };
        let opts = SimOptions { resample_code: true, diagnose: true, ..Default::default() };
        let s = simulate_decoding(&sp, 30, 3, &opts).unwrap();
        let diag = s.diagnosis.unwrap();
        assert_eq!(diag.both, diag.successes_given_both);
        assert!(s.successes >= 25);
    }

    #[test]
    fn csv_shape() {
        let s = estimate_pt(&rp(6, 2, 2, 1), 10, 0, 1).unwrap();
        assert_eq!(s.csv_row().len(), TrialStats::CSV_HEADER.len());
        assert_eq!(s.csv_row()[1], "");
    }
}
