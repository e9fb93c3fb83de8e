//! Dependency structure, local-lemma condition checker, and the constructive
//! resampling loop.
//!
//! The dependency ("path") graph has one vertex per unordered pair `{u, v}` with
//! `2 <= dist(u, v) <= ell0`; two pairs are adjacent when their tree paths share an
//! edge. It is never materialized globally — its size can be `Theta(N Delta^ell0)`
//! — neighborhoods are enumerated on demand around a pair's path.
//!
//! The condition checker works in log space over `ln N`: with the default
//! constants the smallest `N` passing all three sub-conditions has on the order of
//! `1e20` *digits*, so `N` itself never fits a float. Everything needed (weights,
//! degree bounds, probability bounds) is an elementary expression in `ln N`.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::PI;

use crate::embedder::{embed, EmbeddingParams, EmbeddingState, ResampleWhich};
use crate::normspace::{ConstantsConfig, NormedSpace};
use crate::tree::Tree;
use crate::verifier::{
    enumerate_l_violations_with, verify, LPairs, VerifyMode, VerifyOptions, ViolationReport,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Path-graph neighborhoods and the degree bound
// ---------------------------------------------------------------------------

/// Brute-force count of dependency-graph neighbors of `{u, v}` at stratum `k`:
/// pairs at tree distance exactly `k` whose path intersects `P(u, v)`.
pub fn neighborhood_count(
    tree: &Tree,
    u: usize,
    v: usize,
    k: usize,
    ell0: f64,
) -> Result<usize> {
    let range_max = ell0.floor() as usize;
    let ell = tree.dist(u, v);
    if !(2..=range_max).contains(&ell) {
        return Err(Error::InvalidParam(format!(
            "pair ({u},{v}) at distance {ell} is outside the event range [2, {range_max}]"
        )));
    }
    if !(2..=range_max).contains(&k) {
        return Err(Error::InvalidParam(format!("stratum {k} outside [2, {range_max}]")));
    }
    let own: HashSet<usize> = tree.path_edge_ids(u, v).into_iter().collect();
    let mut count = 0;
    for a in 0..tree.n() {
        for b in (a + 1)..tree.n() {
            if (a, b) == (u.min(v), u.max(v)) {
                continue;
            }
            if tree.dist(a, b) != k {
                continue;
            }
            if tree.path_edge_ids(a, b).iter().any(|e| own.contains(e)) {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim42Violation {
    pub u: usize,
    pub v: usize,
    pub ell: usize,
    pub k: usize,
    pub count: usize,
    pub bound: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim42Report {
    pub pairs_checked: usize,
    pub strata_checked: usize,
    /// max over all (pair, k) of count / bound.
    pub max_ratio: f64,
    pub violations: Vec<Claim42Violation>,
}

impl Claim42Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Degree bound `min(N^2, 5 l k (D-1)^{k-1})` for a pair at distance `l` against
/// stratum `k`.
pub fn claim42_bound(n: usize, delta: usize, ell: usize, k: usize) -> u128 {
    let n2 = (n as u128).saturating_mul(n as u128);
    let d1 = (delta.max(2) - 1) as u128;
    let mut pow: u128 = 1;
    for _ in 0..(k - 1) {
        pow = pow.saturating_mul(d1);
    }
    let analytic = (5 * ell as u128)
        .saturating_mul(k as u128)
        .saturating_mul(pow);
    n2.min(analytic)
}

/// Checks the degree bound for every pair in the event range and every stratum.
///
/// Counting goes through an edge-to-pairs index (each pair's path registers on its
/// edges; a pair's neighbors are the union over its path edges, deduplicated); the
/// per-pair brute force in [`neighborhood_count`] is the independent oracle this
/// route is cross-checked against in tests.
pub fn check_claim42(tree: &Tree, ell0: f64, delta: usize) -> Result<Claim42Report> {
    if delta < 2 {
        return Err(Error::InvalidParam("delta must be at least 2".into()));
    }
    if tree.max_degree() > delta {
        return Err(Error::InvalidParam(format!(
            "tree has max degree {} above the declared bound {delta}",
            tree.max_degree()
        )));
    }
    let pairs = LPairs::build(tree, ell0);
    let range_max = pairs.range_max;
    let mut edge_index: Vec<Vec<u32>> = vec![Vec::new(); tree.n()];
    let paths: Vec<Vec<usize>> = pairs
        .pairs
        .iter()
        .map(|&(u, v, _)| tree.path_edge_ids(u, v))
        .collect();
    for (i, path) in paths.iter().enumerate() {
        for &e in path {
            edge_index[e].push(i as u32);
        }
    }

    let mut stamp = vec![u32::MAX; pairs.pairs.len()];
    let mut counts = vec![0usize; range_max + 1];
    let mut report = Claim42Report {
        pairs_checked: pairs.pairs.len(),
        strata_checked: range_max.saturating_sub(1),
        max_ratio: 0.0,
        violations: Vec::new(),
    };
    for (i, &(u, v, ell)) in pairs.pairs.iter().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &e in &paths[i] {
            for &j in &edge_index[e] {
                let j = j as usize;
                if j != i && stamp[j] != i as u32 {
                    stamp[j] = i as u32;
                    counts[pairs.pairs[j].2] += 1;
                }
            }
        }
        for k in 2..=range_max {
            let bound = claim42_bound(tree.n(), delta, ell, k);
            let count = counts[k];
            let ratio = count as f64 / bound as f64;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
            }
            if (count as u128) > bound {
                report.violations.push(Claim42Violation { u, v, ell, k, count, bound });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Weight schedule
// ---------------------------------------------------------------------------

/// Event weight at distance `k`:
/// `1/(2^{k+1} 6 ell0 k (D-1)^k)` through `k1`, `3/(2 pi^2 k^2 N^2)` beyond.
pub fn weight_b(params: &EmbeddingParams, k: usize) -> f64 {
    assert!(k >= 2, "weights start at distance 2");
    let d1 = (params.delta - 1) as f64;
    if k <= params.k1 {
        1.0 / (2.0_f64.powi(k as i32 + 1) * 6.0 * params.ell0 * k as f64 * d1.powi(k as i32))
    } else {
        let n = params.n as f64;
        3.0 / (2.0 * PI * PI * (k as f64) * (k as f64) * n * n)
    }
}

/// `h({u,v}) = b_{dist(u,v)}` on the event range.
pub fn weight_h(params: &EmbeddingParams, tree: &Tree, u: usize, v: usize) -> Result<f64> {
    let d = tree.dist(u, v);
    if !(2..=params.ell0.floor() as usize).contains(&d) {
        return Err(Error::InvalidParam(format!(
            "pair ({u},{v}) at distance {d} carries no weight"
        )));
    }
    Ok(weight_b(params, d))
}

// ---------------------------------------------------------------------------
// Local-lemma condition checker (log space)
// ---------------------------------------------------------------------------

/// Inputs for the condition checker; `ln_n` is the natural log of the vertex
/// count, the only form the astronomically large crossover regime fits in.
#[derive(Debug, Clone, Copy)]
pub struct LllInputs {
    pub ln_n: f64,
    pub delta: usize,
    pub c1: f64,
    pub constants: ConstantsConfig,
}

impl LllInputs {
    pub fn with_defaults(ln_n: f64, delta: usize) -> Self {
        LllInputs { ln_n, delta, c1: 0.25, constants: ConstantsConfig::default() }
    }
}

/// Per-distance probability bounds fed to sub-condition (c).
pub enum ProbBounds<'a> {
    /// The short-range bound `exp(-m^{kappa/2})` through `k0`, then the long-range
    /// bound `exp(-(1/2)(1/2 - c1) m log k)`.
    Analytic,
    /// Empirical upper bounds per distance (e.g. Monte Carlo upper CI bounds).
    Empirical(&'a BTreeMap<usize, f64>),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CondResult {
    pub holds: bool,
    /// Margin in the natural scale of the sub-condition (see field docs on
    /// [`LllConditionReport`]).
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LllConditionReport {
    pub ln_n: f64,
    pub delta: usize,
    /// Theory dimension `ceil(64 ln N / ln ln N)`.
    pub m: f64,
    /// `ln ell0 = (ln N)^{c2}`.
    pub ln_ell0: f64,
    /// Top of the event range `floor(ell0)` (saturating).
    pub k_range_max: u64,
    pub k0: u64,
    pub k1: f64,
    /// (a) `sum_k b_k min(N^2, 6 ell0 k (D-1)^k) <= 1/2`; margin = 1/2 - sum.
    pub cond_a: CondResult,
    /// (b) `prod_k (1-b_k)^{min(N^2, 5 l k (D-1)^{k-1})} >= 1/2` at the worst
    /// distance l; margin = log-product - ln(1/2).
    pub cond_b: CondResult,
    /// (c) `P(k) <= b_k / 2` for every k in range; margin = min over k of
    /// `ln(b_k/2) - ln P(k)`.
    pub cond_c: CondResult,
    pub cond_c_worst_k: u64,
    /// The paper's degree-side assumption `6 k ell0 (D-1)^k <= N^2` on the
    /// first-branch range.
    pub degree_assumption_ok: bool,
    pub holds: bool,
}

const LOOP_CAP: u64 = 20_000;

fn ln_weight_b(k: u64, ln_n: f64, ln_ell0: f64, k1: f64, ln_d1: f64) -> f64 {
    let kf = k as f64;
    if kf <= k1 {
        -((kf + 1.0) * std::f64::consts::LN_2
            + 6.0_f64.ln()
            + ln_ell0
            + kf.ln()
            + kf * ln_d1)
    } else {
        (3.0 / (2.0 * PI * PI)).ln() - 2.0 * kf.ln() - 2.0 * ln_n
    }
}

/// Evaluates sub-conditions (a)-(c) at a single `ln N`.
pub fn check_lll_condition(
    inputs: &LllInputs,
    prob_bounds: &ProbBounds<'_>,
) -> Result<LllConditionReport> {
    let x = inputs.ln_n;
    if !(x > 1.0_f64.exp().ln() && x.ln() > 0.0) || x < 8.0_f64.ln() {
        return Err(Error::InvalidParam(format!("ln N = {x} too small (need N >= 8)")));
    }
    if x > 1e24 {
        return Err(Error::InvalidParam("ln N beyond supported range 1e24".into()));
    }
    if inputs.delta < 3 {
        return Err(Error::InvalidParam("delta must be at least 3".into()));
    }
    inputs.constants.validate()?;
    let c1 = inputs.c1;
    if !(c1 > 0.0 && c1 < 0.5) {
        return Err(Error::InvalidParam("c1 must lie in (0, 1/2)".into()));
    }
    let kappa = inputs.constants.kappa;
    let c2 = 0.25_f64.min(kappa / 4.0);
    let m = (64.0 * x / x.ln()).ceil();
    let ln_ell0 = x.powf(c2);
    let ell0 = ln_ell0.exp();
    let k_range_max = if ell0 >= u64::MAX as f64 { u64::MAX } else { ell0.floor() as u64 };
    let ln_d1 = ((inputs.delta - 1) as f64).ln();
    let k1 = (x / ln_d1).floor();
    let cbl = inputs.constants.cb_l_product;
    let k0 = 3.0_f64
        .max(cbl.powf(4.0 / (1.0 - 2.0 * c1)).ceil())
        .max(4.0_f64.powf(1.0 / c1).ceil()) as u64;

    // ln of the analytic probability bound at distance k.
    let ln_p = |k: u64| -> f64 {
        if k <= k0 {
            -m.powf(kappa / 2.0)
        } else {
            -0.5 * (0.5 - c1) * m * (k as f64).ln()
        }
    };
    let ln_p_of = |k: u64| -> Result<f64> {
        match prob_bounds {
            ProbBounds::Analytic => Ok(ln_p(k)),
            ProbBounds::Empirical(map) => map
                .get(&(k as usize))
                .map(|p| p.max(f64::MIN_POSITIVE).ln())
                .ok_or_else(|| {
                    Error::InvalidParam(format!("prob_bounds missing distance {k}"))
                }),
        }
    };

    // (a) and (b): loop the event range, capped; terms decay at least geometrically
    // in the first weight branch and the capped tail of the second branch is added
    // as a closed-form upper bound.
    let loop_top = k_range_max.min(LOOP_CAP);
    let mut sum_a = 0.0;
    let mut neg_log_prod_b = 0.0;
    let ln_worst_ell = (k_range_max as f64).min(ell0).ln();
    for k in 2..=loop_top {
        let kf = k as f64;
        let ln_b = ln_weight_b(k, x, ln_ell0, k1, ln_d1);
        let ln_deg_a = 6.0_f64.ln() + ln_ell0 + kf.ln() + kf * ln_d1;
        sum_a += (ln_deg_a.min(2.0 * x) + ln_b).exp();
        let ln_deg_b = 5.0_f64.ln() + ln_worst_ell + kf.ln() + (kf - 1.0) * ln_d1;
        let ln_neg_ln1mb = if ln_b < -30.0 {
            ln_b
        } else {
            let b = ln_b.exp();
            (-(-b).ln_1p()).ln()
        };
        neg_log_prod_b += (ln_deg_b.min(2.0 * x) + ln_neg_ln1mb).exp();
    }
    if k_range_max > LOOP_CAP && (k_range_max as f64) > k1 {
        // Second-branch tail: each term is at most 3/(2 pi^2 k^2); bound by the
        // integral tail.
        let tail = 3.0 / (2.0 * PI * PI * LOOP_CAP.max(k1 as u64) as f64);
        sum_a += tail;
        neg_log_prod_b += tail;
    }
    let cond_a = CondResult { holds: sum_a <= 0.5, margin: 0.5 - sum_a };
    let log_prod = -neg_log_prod_b;
    let cond_b =
        CondResult { holds: log_prod >= -std::f64::consts::LN_2, margin: log_prod + std::f64::consts::LN_2 };

    // (c): min over the range of ln(b_k/2) - ln P(k). The margin is concave in k on
    // each branch segment, so segment endpoints are enough; the capped loop covers
    // small ranges exactly anyway.
    let mut worst_margin = f64::INFINITY;
    let mut worst_k = 2;
    let mut consider = |k: u64| -> Result<()> {
        if !(2..=k_range_max).contains(&k) {
            return Ok(());
        }
        let margin =
            ln_weight_b(k, x, ln_ell0, k1, ln_d1) - std::f64::consts::LN_2 - ln_p_of(k)?;
        if margin < worst_margin {
            worst_margin = margin;
            worst_k = k;
        }
        Ok(())
    };
    for k in 2..=loop_top {
        consider(k)?;
    }
    if k_range_max > loop_top {
        for k in [
            k0,
            k0 + 1,
            k1 as u64,
            (k1 as u64).saturating_add(1),
            k_range_max,
        ] {
            if k > loop_top {
                consider(k)?;
            }
        }
    }
    let cond_c = CondResult { holds: worst_margin >= 0.0, margin: worst_margin };

    // Degree-side assumption at its binding point.
    let k_bind = (k1.min(k_range_max as f64)).max(2.0);
    let degree_assumption_ok =
        6.0_f64.ln() + ln_ell0 + k_bind.ln() + k_bind * ln_d1 <= 2.0 * x;

    let holds = cond_a.holds && cond_b.holds && cond_c.holds;
    Ok(LllConditionReport {
        ln_n: x,
        delta: inputs.delta,
        m,
        ln_ell0,
        k_range_max,
        k0,
        k1,
        cond_a,
        cond_b,
        cond_c,
        cond_c_worst_k: worst_k,
        degree_assumption_ok,
        holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct N0Report {
    pub delta: usize,
    /// Natural log of the smallest passing N.
    pub ln_n0: f64,
    /// Decimal digit count scale: `log10(N0)`.
    pub log10_n0: f64,
    /// Sign changes of the pass predicate over a coarse scan (1 = clean boundary).
    pub scan_flips: usize,
    pub report_at_n0: LllConditionReport,
}

/// Finds the smallest `ln N` at which all three sub-conditions hold, by doubling
/// then bisection. Deterministic; the same inputs always reproduce the same report.
pub fn smallest_passing_n(
    delta: usize,
    c1: f64,
    constants: ConstantsConfig,
) -> Result<N0Report> {
    let lo0 = 8.0_f64.ln() + 1e-9;
    let hi_cap = 1e24;
    let eval = |x: f64| -> Result<bool> {
        let inputs = LllInputs { ln_n: x, delta, c1, constants };
        Ok(check_lll_condition(&inputs, &ProbBounds::Analytic)?.holds)
    };
    if eval(lo0)? {
        let report = check_lll_condition(
            &LllInputs { ln_n: lo0, delta, c1, constants },
            &ProbBounds::Analytic,
        )?;
        return Ok(N0Report {
            delta,
            ln_n0: lo0,
            log10_n0: lo0 / std::f64::consts::LN_10,
            scan_flips: 0,
            report_at_n0: report,
        });
    }
    let mut lo = lo0;
    let mut hi = lo0 * 2.0;
    while !eval(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > hi_cap {
            return Err(Error::CheckFailed(format!(
                "no passing N found below ln N = {hi_cap:e}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) / hi < 1e-12 {
            break;
        }
    }
    // Coarse scan for non-monotone pockets below the boundary.
    let mut flips = 0;
    let mut prev = false;
    let mut t = lo0;
    while t < hi * 4.0 && t < hi_cap {
        let h = eval(t)?;
        if h != prev {
            flips += 1;
            prev = h;
        }
        t *= 2.0;
    }
    let report = check_lll_condition(
        &LllInputs { ln_n: hi, delta, c1, constants },
        &ProbBounds::Analytic,
    )?;
    Ok(N0Report {
        delta,
        ln_n0: hi,
        log10_n0: hi / std::f64::consts::LN_10,
        scan_flips: flips,
        report_at_n0: report,
    })
}

// ---------------------------------------------------------------------------
// Constructive resampling loop
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct MtOptions {
    pub max_rounds: u64,
    pub margin: f64,
    /// Consecutive failed Gaussian-only rescues of a pair before its path is
    /// redrawn entirely (ball + gaussian). The pure Gaussian restart mirrors the
    /// conditioning argument but stalls at desk scale when a pair's ball sum lands
    /// between the short-sum threshold and the `1/shrink` boundary.
    pub gaussian_patience: u32,
    pub verify_mode: VerifyMode,
    pub record_trace: bool,
}

impl Default for MtOptions {
    fn default() -> Self {
        MtOptions {
            max_rounds: 100_000,
            margin: 1e-9,
            gaussian_patience: 2,
            verify_mode: VerifyMode::Pruned,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MtOutcome {
    Success,
    Exhausted,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    pub round: u64,
    pub l_open: usize,
    pub a_open: usize,
}

#[derive(Debug)]
pub struct MtRun {
    pub outcome: MtOutcome,
    pub rounds: u64,
    pub state: EmbeddingState,
    /// Empty on success (by definition of success).
    pub final_report: ViolationReport,
    /// Violation counts over time when tracing was requested.
    pub trace: Vec<TracePoint>,
}

/// Resampling loop: clear short-sum events by redrawing ball vectors on the
/// offending path (lowest pair first), then verify the pair predicate; surviving
/// violations get their paths' Gaussians redrawn and the loop repeats. Pairs that
/// keep failing after `gaussian_patience` Gaussian redraws escalate to a full
/// redraw of their path variables.
pub fn moser_tardos_embed(
    tree: &Tree,
    space: &NormedSpace,
    params: &EmbeddingParams,
    seed: u64,
    opts: &MtOptions,
) -> Result<MtRun> {
    let lpairs = LPairs::build(tree, params.ell0);
    let mut state = embed(tree, space, params, seed)?;
    let vopts = VerifyOptions { margin: opts.margin, mode: opts.verify_mode };
    let mut rounds: u64 = 0;
    let mut trace = Vec::new();
    let mut streaks: BTreeMap<(usize, usize), u32> = BTreeMap::new();

    loop {
        // Stage 1: short-sum events, one at a time, lowest pair id first.
        loop {
            let viols = enumerate_l_violations_with(&lpairs, &state, space);
            if opts.record_trace {
                trace.push(TracePoint { round: rounds, l_open: viols.len(), a_open: 0 });
            }
            let Some(first) = viols.first() else { break };
            if rounds >= opts.max_rounds {
                let mut final_report = verify(state.points(), tree, space, &vopts)?;
                final_report.l_violations = viols;
                return Ok(MtRun {
                    outcome: MtOutcome::Exhausted,
                    rounds,
                    state,
                    final_report,
                    trace,
                });
            }
            let path = tree.path_edge_ids(first.u, first.v);
            state.resample_edges(tree, space, &path, ResampleWhich::Ball)?;
            rounds += 1;
        }

        // Stage 2: the pair predicate on the whole map.
        let report = verify(state.points(), tree, space, &vopts)?;
        let offending: Vec<(usize, usize)> = report
            .edge_violations
            .iter()
            .chain(report.nonedge_violations.iter())
            .map(|p| (p.u, p.v))
            .collect();
        if opts.record_trace {
            trace.push(TracePoint { round: rounds, l_open: 0, a_open: offending.len() });
        }
        if offending.is_empty() {
            return Ok(MtRun {
                outcome: MtOutcome::Success,
                rounds,
                state,
                final_report: report,
                trace,
            });
        }
        if rounds >= opts.max_rounds {
            return Ok(MtRun {
                outcome: MtOutcome::Exhausted,
                rounds,
                state,
                final_report: report,
                trace,
            });
        }

        let mut next_streaks = BTreeMap::new();
        let mut gauss_edges: BTreeSet<usize> = BTreeSet::new();
        let mut both_edges: BTreeSet<usize> = BTreeSet::new();
        for &(u, v) in &offending {
            let s = streaks.get(&(u, v)).copied().unwrap_or(0) + 1;
            next_streaks.insert((u, v), s);
            let sink = if s > opts.gaussian_patience { &mut both_edges } else { &mut gauss_edges };
            for e in tree.path_edge_ids(u, v) {
                sink.insert(e);
            }
        }
        streaks = next_streaks;
        let gauss_only: Vec<usize> = gauss_edges.difference(&both_edges).copied().collect();
        let both: Vec<usize> = both_edges.into_iter().collect();
        if !both.is_empty() {
            state.resample_edges(tree, space, &both, ResampleWhich::Both)?;
            rounds += 1;
        }
        if !gauss_only.is_empty() {
            state.resample_edges(tree, space, &gauss_only, ResampleWhich::Gaussian)?;
            rounds += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub success: bool,
    pub rounds: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuccessStats {
    pub successes: usize,
    pub trials: usize,
    pub mean_rounds: f64,
    pub per_trial: Vec<TrialOutcome>,
}

/// Independent seeded runs of the resampling loop.
pub fn success_probability(
    tree: &Tree,
    space: &NormedSpace,
    params: &EmbeddingParams,
    trials: usize,
    master_seed: u64,
    opts: &MtOptions,
) -> Result<SuccessStats> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be at least 1".into()));
    }
    let mut per_trial = Vec::with_capacity(trials);
    let mut successes = 0;
    let mut total_rounds = 0u64;
    for t in 0..trials {
        let seed = crate::rng::cell_seed(master_seed, "mt-trial", t as u64);
        let run = moser_tardos_embed(tree, space, params, seed, opts)?;
        let success = run.outcome == MtOutcome::Success;
        if success {
            successes += 1;
        }
        total_rounds += run.rounds;
        per_trial.push(TrialOutcome { seed, success, rounds: run.rounds });
    }
    Ok(SuccessStats {
        successes,
        trials,
        mean_rounds: total_rounds as f64 / trials as f64,
        per_trial,
    })
}
