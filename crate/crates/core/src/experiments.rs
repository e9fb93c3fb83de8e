//! Monte Carlo validators and the parameter sweep harness.
//!
//! Every estimator ships a binomial 95% confidence interval and assertions compare
//! CI bounds, never point estimates, against analytic bounds. The interval is the
//! normal-approximation (Wald) interval: at the event probabilities these bounds
//! live at (1e-5 and below), exact intervals are dominated by the 3/n resolution
//! floor of the trial budget rather than by the observed counts, and the validators
//! would report resolution, not evidence. With zero hits the Wald interval
//! collapses to the point estimate; the `hits` field keeps that visible.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::io::Write;

use crate::embedder::{derive_params, EmbeddingParams, Mode, Overrides};
use crate::lll::MtOptions;
use crate::normspace::{isotropic_scale_lp, ConstantsConfig, NormedSpace};
use crate::rng::{cell_seed, stream, StreamKind};
use crate::tree::Tree;
use crate::verifier::l_threshold;
use crate::{Error, Result};

/// Wald 95% binomial interval, clipped to `[0, 1]`.
pub fn binomial_ci(hits: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = hits as f64 / n;
    let half = 1.959964 * (p * (1.0 - p) / n).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

// ---------------------------------------------------------------------------
// Ball volume bound
// ---------------------------------------------------------------------------

/// `ln lambda(B_X)` for the isotropic `l_p` ball: the raw unit-ball volume
/// `2^m Gamma(1+1/p)^m / Gamma(1+m/p)` scaled by the whitening determinant.
pub fn lp_ball_log_volume(p: f64, m: usize) -> f64 {
    let mf = m as f64;
    let s = isotropic_scale_lp(p, m);
    if p.is_infinite() {
        return mf * (2.0 * s).ln();
    }
    mf * s.ln() + mf * 2.0_f64.ln() + mf * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + mf / p)
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeRow {
    pub m: usize,
    pub log_volume: f64,
    /// `lambda(B_X)^{1/m}`.
    pub per_dim_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub p: f64,
    pub rows: Vec<VolumeRow>,
    pub max_constant: f64,
    pub cap: f64,
    pub bounded: bool,
}

/// Evaluates the isotropic ball volume analytically over `m_list` and checks the
/// per-dimension constant stays below `cap`.
pub fn check_volume_bound(p: f64, m_list: &[usize], cap: f64) -> Result<VolumeReport> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParam(format!("p must lie in [1, inf], got {p}")));
    }
    if m_list.is_empty() {
        return Err(Error::InvalidParam("m_list must be nonempty".into()));
    }
    let rows: Vec<VolumeRow> = m_list
        .iter()
        .map(|&m| {
            let lv = lp_ball_log_volume(p, m);
            VolumeRow { m, log_volume: lv, per_dim_constant: (lv / m as f64).exp() }
        })
        .collect();
    let max_constant = rows.iter().map(|r| r.per_dim_constant).fold(0.0, f64::max);
    Ok(VolumeReport { p, rows, max_constant, cap, bounded: max_constant <= cap })
}

// ---------------------------------------------------------------------------
// Short-sum probability validators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub threshold: f64,
    /// Analytic right-hand side the estimate is compared to.
    pub bound: f64,
    /// Upper CI bound at or below the analytic bound.
    pub consistent: bool,
    /// Set when parameters leave the regime where the bound is claimed.
    pub caveat: Option<String>,
}

fn sum_of_samples(space: &NormedSpace, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let m = space.dim();
    let mut acc = vec![0.0; m];
    for _ in 0..k {
        let y = space.sample_ball(rng);
        for i in 0..m {
            acc[i] += y[i];
        }
    }
    acc
}

/// Estimates `P(||sum_{i=1}^k Y_i||_X <= k^{c1})` against the long-range analytic
/// bound `exp(-(1/2)(1/2 - c1) m log k)`.
///
/// The bound is claimed for `k >= (C_B L)^{4/(1-2 c1)}`; smaller `k` (down to 1)
/// runs only in exploratory mode and carries a caveat.
pub fn mc_lemma_sum_long(
    space: &NormedSpace,
    k: usize,
    c1: f64,
    trials: u64,
    seed: u64,
    constants: &ConstantsConfig,
    exploratory: bool,
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be positive".into()));
    }
    if !(c1 > 0.0 && c1 < 0.5) {
        return Err(Error::InvalidParam("c1 must lie in (0, 1/2)".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParam("k must be positive".into()));
    }
    let k_min = constants.cb_l_product.powf(4.0 / (1.0 - 2.0 * c1));
    let in_regime = (k as f64) >= k_min;
    if !in_regime && !exploratory {
        return Err(Error::InvalidParam(format!(
            "k = {k} below the bound's regime k >= {k_min:.1}; rerun exploratory"
        )));
    }
    let m = space.dim() as f64;
    let threshold = (k as f64).powf(c1);
    let bound = (-0.5 * (0.5 - c1) * m * (k as f64).ln()).exp();
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t, StreamKind::Aux, 1);
            let s = sum_of_samples(space, k, &mut rng);
            u64::from(space.norm(&s) <= threshold)
        })
        .sum::<u64>();
    let ci = binomial_ci(hits, trials);
    Ok(McReport {
        trials,
        hits,
        estimate: hits as f64 / trials as f64,
        ci,
        threshold,
        bound,
        consistent: ci.1 <= bound,
        caveat: (!in_regime).then(|| format!("k below regime threshold {k_min:.1}")),
    })
}

/// Estimates `P(||sum_{i=1}^k Y_i||_X <= 1 + 1/(2 m^{1-kappa}))` against the
/// short-range bound `exp(-m^{kappa/2})`. Valid for `k >= 2`; the bound needs the
/// dimension above an unspecified floor, so small `m` is flagged non-conclusive.
pub fn mc_lemma_sum_short(
    space: &NormedSpace,
    k: usize,
    kappa: f64,
    trials: u64,
    seed: u64,
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be positive".into()));
    }
    if k < 2 {
        return Err(Error::InvalidParam("k must be at least 2".into()));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParam("kappa must lie in (0,1)".into()));
    }
    let m = space.dim() as f64;
    let threshold = 1.0 + 0.5 / m.powf(1.0 - kappa);
    let bound = (-m.powf(kappa / 2.0)).exp();
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t, StreamKind::Aux, 2);
            let s = sum_of_samples(space, k, &mut rng);
            u64::from(space.norm(&s) <= threshold)
        })
        .sum::<u64>();
    let ci = binomial_ci(hits, trials);
    Ok(McReport {
        trials,
        hits,
        estimate: hits as f64 / trials as f64,
        ci,
        threshold,
        bound,
        consistent: ci.1 <= bound,
        caveat: (space.dim() < 16).then(|| "dimension below asymptotic regime".to_string()),
    })
}

// ---------------------------------------------------------------------------
// Per-distance-regime failure diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    /// Representative tree distance, when the regime is inhabited.
    pub dist: Option<usize>,
    pub pair: Option<(usize, usize)>,
    pub trials: u64,
    /// Samples surviving the short-sum conditioning.
    pub kept: u64,
    pub estimate: Option<f64>,
    pub ci: Option<(f64, f64)>,
    /// `1/N^2`, the per-pair budget the union bound needs.
    pub target: f64,
}

/// Estimates the conditional pair-failure frequency in each distance regime
/// (`k = 1`, `2..=k0`, `k0+1..=ell0`, `> ell0`), conditioning on the pair's own
/// short-sum event not holding. Purely diagnostic: at asymptotic parameters these
/// frequencies vanish; at desk scale they show where the construction is tight.
pub fn mc_case_bounds(
    tree: &Tree,
    space: &NormedSpace,
    params: &EmbeddingParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<CaseReport>> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be positive".into()));
    }
    if params.m != space.dim() {
        return Err(Error::DimensionMismatch { expected: params.m, got: space.dim() });
    }
    let range_max = params.ell0.floor() as usize;
    let mut representative: Vec<(String, Option<(usize, usize, usize)>)> = Vec::new();
    let find_pair = |lo: usize, hi: usize| -> Option<(usize, usize, usize)> {
        let mut best: Option<(usize, usize, usize)> = None;
        for u in 0..tree.n() {
            for v in (u + 1)..tree.n() {
                let d = tree.dist(u, v);
                if d >= lo && d <= hi && best.is_none_or(|(bu, bv, _)| (u, v) < (bu, bv)) {
                    best = Some((u, v, d));
                }
            }
        }
        best
    };
    representative.push(("edge".into(), find_pair(1, 1)));
    if range_max >= 2 {
        representative.push((
            "short-range".into(),
            find_pair(2, params.k0.min(range_max)),
        ));
        if range_max > params.k0 {
            representative.push(("mid-range".into(), find_pair(params.k0 + 1, range_max)));
        } else {
            representative.push(("mid-range".into(), None));
        }
    } else {
        representative.push(("short-range".into(), None));
        representative.push(("mid-range".into(), None));
    }
    representative.push(("long-range".into(), find_pair(range_max.max(1) + 1, usize::MAX)));

    let target = 1.0 / (params.n as f64 * params.n as f64);
    let mut out = Vec::new();
    for (case_idx, (case, found)) in representative.into_iter().enumerate() {
        let Some((u, v, dist)) = found else {
            out.push(CaseReport {
                case,
                dist: None,
                pair: None,
                trials,
                kept: 0,
                estimate: None,
                ci: None,
                target,
            });
            continue;
        };
        // The pair difference telescopes to a signed sum over P(u,v); by sign
        // symmetry of the per-edge draws it has the law of a straight sum of
        // `dist` fresh edge variables.
        let conditioned = dist >= 2 && dist <= range_max;
        let threshold = if conditioned { l_threshold(params, dist) } else { 0.0 };
        let results: Vec<(u64, u64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, t, StreamKind::Aux, 16 + case_idx as u64);
                let m = space.dim();
                let mut ball = vec![0.0; m];
                let mut reg = vec![0.0; m];
                for _ in 0..dist {
                    let y = space.sample_ball(&mut rng);
                    let g: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let big_g = space.regularizer(&g);
                    for i in 0..m {
                        ball[i] += y[i];
                        reg[i] += big_g[i];
                    }
                }
                if conditioned && space.norm(&ball) <= threshold {
                    return (0, 0); // short-sum event holds: sample discarded
                }
                let mut diff = vec![0.0; m];
                for i in 0..m {
                    diff[i] = params.shrink * ball[i] + params.delta_reg * reg[i];
                }
                let d = space.norm(&diff);
                let fail = if dist == 1 { d > 1.0 } else { d <= 1.0 };
                (1, u64::from(fail))
            })
            .collect();
        let kept: u64 = results.iter().map(|r| r.0).sum();
        let fails: u64 = results.iter().map(|r| r.1).sum();
        let (estimate, ci) = if kept > 0 {
            (Some(fails as f64 / kept as f64), Some(binomial_ci(fails, kept)))
        } else {
            (None, None)
        };
        out.push(CaseReport {
            case,
            dist: Some(dist),
            pair: Some((u, v)),
            trials,
            kept,
            estimate,
            ci,
            target,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sweep harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub norms: Vec<String>,
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<usize>,
    /// Explicit dimensions per cell; when absent the mode default applies.
    #[serde(default)]
    pub m_grid: Option<Vec<usize>>,
    pub mode: String,
    pub trials: usize,
    pub master_seed: u64,
    /// One of `binary`, `complete`, `part-a`, `random`, `path`.
    #[serde(default = "default_tree_kind")]
    pub tree_kind: String,
    #[serde(default)]
    pub max_rounds: Option<u64>,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub delta_scale: Option<f64>,
}

fn default_tree_kind() -> String {
    "binary".into()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.norms.is_empty() || self.n_grid.is_empty() || self.delta_grid.is_empty() {
            return Err(Error::InvalidParam("sweep grids must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("trials must be at least 1".into()));
        }
        if let Some(ms) = &self.m_grid {
            if ms.is_empty() {
                return Err(Error::InvalidParam("m_grid, when given, must be nonempty".into()));
            }
        }
        self.mode.parse::<Mode>()?;
        Ok(())
    }
}

/// One row of the sweep CSV. Column order is fixed:
/// `norm,N,delta,m,mode,seed,success,rounds,wallclock_ms,max_lip,min_holder`.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub norm: String,
    pub n: usize,
    pub delta: usize,
    pub m: usize,
    pub mode: String,
    pub seed: u64,
    pub success: bool,
    pub rounds: u64,
    pub wallclock_ms: u64,
    pub max_lip: Option<f64>,
    pub min_holder: Option<f64>,
}

pub const SWEEP_HEADER: &str = "norm,N,delta,m,mode,seed,success,rounds,wallclock_ms,max_lip,min_holder";

impl TrialRecord {
    pub fn key(&self) -> (String, usize, usize, usize, u64) {
        (self.norm.clone(), self.n, self.delta, self.m, self.seed)
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "nan".into());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.norm,
            self.n,
            self.delta,
            self.m,
            self.mode,
            self.seed,
            u8::from(self.success),
            self.rounds,
            self.wallclock_ms,
            opt(self.max_lip),
            opt(self.min_holder)
        )
    }

    pub fn from_csv_row(row: &str) -> Result<TrialRecord> {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Parse(format!("sweep row needs 11 fields: {row:?}")));
        }
        let opt = |s: &str| -> Option<f64> {
            if s == "nan" {
                None
            } else {
                s.parse().ok()
            }
        };
        Ok(TrialRecord {
            norm: f[0].to_string(),
            n: f[1].parse().map_err(|e| Error::Parse(format!("N: {e}")))?,
            delta: f[2].parse().map_err(|e| Error::Parse(format!("delta: {e}")))?,
            m: f[3].parse().map_err(|e| Error::Parse(format!("m: {e}")))?,
            mode: f[4].to_string(),
            seed: f[5].parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
            success: f[6] == "1",
            rounds: f[7].parse().map_err(|e| Error::Parse(format!("rounds: {e}")))?,
            wallclock_ms: f[8].parse().map_err(|e| Error::Parse(format!("wallclock: {e}")))?,
            max_lip: opt(f[9]),
            min_holder: opt(f[10]),
        })
    }
}

/// Builds the per-cell tree deterministically from the cell coordinates.
pub fn build_tree(kind: &str, n: usize, delta: usize, seed: u64) -> Result<Tree> {
    match kind {
        "binary" => {
            let height = (n + 1).ilog2().saturating_sub(1) as usize;
            let t = Tree::complete_ary(2, height)?;
            if t.n() != n {
                return Err(Error::InvalidParam(format!(
                    "binary tree sizes are 2^k - 1; got N = {n}"
                )));
            }
            Ok(t)
        }
        "complete" => {
            for h in 0..=n {
                let t = Tree::complete(delta, h)?;
                match t.n().cmp(&n) {
                    std::cmp::Ordering::Equal => return Ok(t),
                    std::cmp::Ordering::Greater => break,
                    std::cmp::Ordering::Less => {}
                }
            }
            Err(Error::InvalidParam(format!(
                "N = {n} is not a complete-tree size for delta = {delta}"
            )))
        }
        "part-a" => Ok(Tree::part_a(delta, n)?.0),
        "random" => {
            let mut rng = stream(seed, 0, StreamKind::Aux, 7);
            Tree::random(n, delta, &mut rng)
        }
        "path" => Tree::path_graph(n),
        other => Err(Error::Parse(format!("unknown tree kind {other:?}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCellSummary {
    pub norm: String,
    pub n: usize,
    pub delta: usize,
    /// Smallest m in the grid reaching at least 90% success, if any.
    pub m_star: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub records: usize,
    pub computed: usize,
    pub resumed: usize,
    pub cells: Vec<SweepCellSummary>,
}

/// Runs all grid cells (resumable: rows already present in `out_path` for a cell
/// key are kept), rewrites the CSV sorted by key, and returns the per-cell
/// threshold summary.
pub fn sweep(config: &SweepConfig, out_path: &std::path::Path) -> Result<SweepSummary> {
    config.validate()?;
    let mode: Mode = config.mode.parse()?;

    let mut existing: Vec<TrialRecord> = Vec::new();
    if out_path.exists() {
        let text = std::fs::read_to_string(out_path)?;
        for line in text.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            existing.push(TrialRecord::from_csv_row(line)?);
        }
    }
    let done: std::collections::HashSet<_> = existing.iter().map(|r| r.key()).collect();

    // Cell plan: norm x N x delta x m x trial.
    struct Cell {
        norm: String,
        n: usize,
        delta: usize,
        m: Option<usize>,
        trial: u64,
    }
    let mut plan = Vec::new();
    for norm in &config.norms {
        for &n in &config.n_grid {
            for &delta in &config.delta_grid {
                let ms: Vec<Option<usize>> = match &config.m_grid {
                    Some(g) => g.iter().map(|&m| Some(m)).collect(),
                    None => vec![None],
                };
                for m in ms {
                    for trial in 0..config.trials as u64 {
                        plan.push(Cell { norm: norm.clone(), n, delta, m, trial });
                    }
                }
            }
        }
    }

    let computed: Vec<Result<Option<TrialRecord>>> = plan
        .par_iter()
        .map(|cell| -> Result<Option<TrialRecord>> {
            let overrides = Overrides {
                m: cell.m,
                delta_scale: config.delta_scale,
                ..Default::default()
            };
            let params =
                derive_params(cell.n, cell.delta, mode, overrides, ConstantsConfig::default())?;
            let label = format!(
                "{}|n={}|d={}|m={}",
                cell.norm, cell.n, cell.delta, params.m
            );
            let seed = cell_seed(config.master_seed, &label, cell.trial);
            let key = (cell.norm.clone(), cell.n, cell.delta, params.m, seed);
            if done.contains(&key) {
                return Ok(None);
            }
            let tree = build_tree(&config.tree_kind, cell.n, cell.delta, seed)?;
            let space = NormedSpace::from_descriptor(&cell.norm, params.m, 100_000, seed)?;
            let opts = MtOptions {
                max_rounds: config.max_rounds.unwrap_or(100_000),
                margin: config.margin.unwrap_or(1e-9),
                ..Default::default()
            };
            let t0 = std::time::Instant::now();
            let run = crate::lll::moser_tardos_embed(&tree, &space, &params, seed, &opts)?;
            let wall = t0.elapsed().as_millis() as u64;
            let success = run.outcome == crate::lll::MtOutcome::Success;
            let (max_lip, min_holder) = if success {
                let prof = crate::verifier::distortion_profile(
                    run.state.points(),
                    &tree,
                    &space,
                    params.k0,
                )?;
                (Some(prof.max_lipschitz), prof.min_holder)
            } else {
                (None, None)
            };
            Ok(Some(TrialRecord {
                norm: cell.norm.clone(),
                n: cell.n,
                delta: cell.delta,
                m: params.m,
                mode: config.mode.clone(),
                seed,
                success,
                rounds: run.rounds,
                wallclock_ms: wall,
                max_lip,
                min_holder,
            }))
        })
        .collect();

    let mut rows = existing;
    let resumed = rows.len();
    let mut n_computed = 0;
    for r in computed {
        if let Some(rec) = r? {
            rows.push(rec);
            n_computed += 1;
        }
    }
    rows.sort_by_key(|r| r.key());

    let mut out = std::fs::File::create(out_path)?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in &rows {
        writeln!(out, "{}", r.to_csv_row())?;
    }

    // Threshold summary: smallest m with >= 90% success per (norm, N, delta).
    let mut groups: std::collections::BTreeMap<(String, usize, usize, usize), (usize, usize)> =
        std::collections::BTreeMap::new();
    for r in &rows {
        let e = groups.entry((r.norm.clone(), r.n, r.delta, r.m)).or_insert((0, 0));
        e.1 += 1;
        if r.success {
            e.0 += 1;
        }
    }
    let mut cells: std::collections::BTreeMap<(String, usize, usize), Option<usize>> =
        std::collections::BTreeMap::new();
    for ((norm, n, delta, m), (succ, total)) in &groups {
        let entry = cells.entry((norm.clone(), *n, *delta)).or_insert(None);
        if *succ as f64 >= 0.9 * *total as f64 {
            *entry = Some(entry.map_or(*m, |cur| cur.min(*m)));
        }
    }
    Ok(SweepSummary {
        records: rows.len(),
        computed: n_computed,
        resumed,
        cells: cells
            .into_iter()
            .map(|((norm, n, delta), m_star)| SweepCellSummary { norm, n, delta, m_star })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ci_basics() {
        let (lo, hi) = binomial_ci(0, 100_000);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 0.0, "Wald interval collapses at zero hits");
        let (lo, hi) = binomial_ci(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert_relative_eq!(hi - 0.5, 0.5 - lo, epsilon = 1e-12);
    }

    #[test]
    fn volume_examples() {
        // p=2, m=2: isotropic radius 2, area 4 pi.
        let r = check_volume_bound(2.0, &[2], 6.0).unwrap();
        assert_relative_eq!(r.rows[0].log_volume, (4.0 * std::f64::consts::PI).ln(), epsilon = 1e-10);
        assert_relative_eq!(r.rows[0].per_dim_constant, 3.544908, epsilon = 1e-5);
        // p=inf: constant is 2 sqrt(3) for every m.
        let r = check_volume_bound(f64::INFINITY, &[1, 4, 9, 64], 6.0).unwrap();
        for row in &r.rows {
            assert_relative_eq!(row.per_dim_constant, 2.0 * 3.0_f64.sqrt(), epsilon = 1e-9);
        }
        assert!(r.bounded);
    }

    #[test]
    fn volume_matches_classical_recursion_for_p2() {
        // V_m = 2 pi / m * V_{m-2}, unit ball; scaled by (m+2)^{m/2}.
        let mut v = vec![0.0; 20];
        v[0] = 1.0;
        v[1] = 2.0;
        for m in 2..20 {
            v[m] = 2.0 * std::f64::consts::PI / m as f64 * v[m - 2];
        }
        for m in 1..20 {
            let want = v[m].ln() + (m as f64) * 0.5 * ((m + 2) as f64).ln();
            assert_relative_eq!(lp_ball_log_volume(2.0, m), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn volume_constants_bounded_for_p_1_2_inf() {
        let ms: Vec<usize> = (1..=64).collect();
        for p in [1.0, 2.0, f64::INFINITY] {
            let r = check_volume_bound(p, &ms, 6.0).unwrap();
            assert!(r.bounded, "p={p}: max {}", r.max_constant);
        }
    }

    #[test]
    fn lemma_long_exploratory_k1_is_certain() {
        let space = NormedSpace::lp(2.0, 4).unwrap();
        let c = ConstantsConfig::default();
        // Non-exploratory below the regime threshold is an error.
        assert!(mc_lemma_sum_long(&space, 1, 0.25, 100, 3, &c, false).is_err());
        let r = mc_lemma_sum_long(&space, 1, 0.25, 500, 3, &c, true).unwrap();
        // ||Y_1|| <= 1 always.
        assert_eq!(r.hits, 500);
        assert!(r.caveat.is_some());
    }

    #[test]
    fn lemma_long_deterministic_given_seed() {
        let space = NormedSpace::lp(2.0, 6).unwrap();
        let c = ConstantsConfig::default();
        let a = mc_lemma_sum_long(&space, 300, 0.25, 2000, 5, &c, false).unwrap();
        let b = mc_lemma_sum_long(&space, 300, 0.25, 2000, 5, &c, false).unwrap();
        assert_eq!(a.hits, b.hits);
    }

    #[test]
    fn lemma_short_validator_small_m_flagged() {
        let space = NormedSpace::lp(2.0, 1).unwrap();
        let r = mc_lemma_sum_short(&space, 2, 0.25, 1000, 4).unwrap();
        assert!(r.caveat.is_some());
        assert!(mc_lemma_sum_short(&space, 2, 0.25, 0, 4).is_err());
        assert!(mc_lemma_sum_short(&space, 1, 0.25, 10, 4).is_err());
    }

    #[test]
    fn case_bounds_cover_regimes() {
        let tree = Tree::path_graph(12).unwrap();
        let space = NormedSpace::lp(2.0, 8).unwrap();
        let mut params = derive_params(
            64,
            3,
            Mode::Practical,
            Overrides { m: Some(8), ..Default::default() },
            ConstantsConfig::default(),
        )
        .unwrap();
        params.n = 12;
        let reports = mc_case_bounds(&tree, &space, &params, 2000, 9).unwrap();
        assert_eq!(reports.len(), 4);
        assert_eq!(reports[0].dist, Some(1)); // edge case present
        // ell0 ~ 3 and k0 = 8: the mid-range regime is empty on this tree.
        assert!(reports[2].dist.is_none());
        // long-range pairs exist on P12.
        assert!(reports[3].dist.is_some());
        for r in &reports {
            if let Some(e) = r.estimate {
                assert!((0.0..=1.0).contains(&e));
            }
        }
    }

    #[test]
    fn sweep_single_cell_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results.csv");
        let config = SweepConfig {
            norms: vec!["lp:inf".into()],
            n_grid: vec![15],
            delta_grid: vec![3],
            m_grid: Some(vec![10]),
            mode: "practical".into(),
            trials: 1,
            master_seed: 7,
            tree_kind: "binary".into(),
            max_rounds: Some(50_000),
            margin: None,
            delta_scale: None,
        };
        let s1 = sweep(&config, &out).unwrap();
        assert_eq!(s1.records, 1);
        assert_eq!(s1.computed, 1);
        let body1 = std::fs::read_to_string(&out).unwrap();
        // Resume: nothing recomputed, body unchanged except wallclock (none new).
        let s2 = sweep(&config, &out).unwrap();
        assert_eq!(s2.computed, 0);
        assert_eq!(s2.resumed, 1);
        let body2 = std::fs::read_to_string(&out).unwrap();
        assert_eq!(body1, body2);
        let rec = TrialRecord::from_csv_row(body1.lines().nth(1).unwrap()).unwrap();
        assert_eq!(rec.n, 15);
        assert_eq!(rec.m, 10);
        // Threshold summary reflects the single cell.
        assert_eq!(s2.cells.len(), 1);
        if rec.success {
            assert_eq!(s2.cells[0].m_star, Some(10));
        } else {
            assert_eq!(s2.cells[0].m_star, None);
        }
    }

    #[test]
    fn sweep_rows_round_trip() {
        let rec = TrialRecord {
            norm: "lp:2".into(),
            n: 255,
            delta: 3,
            m: 26,
            mode: "practical".into(),
            seed: 42,
            success: true,
            rounds: 17,
            wallclock_ms: 12,
            max_lip: Some(1.25),
            min_holder: None,
        };
        let row = rec.to_csv_row();
        let back = TrialRecord::from_csv_row(&row).unwrap();
        assert_eq!(back.key(), rec.key());
        assert_eq!(back.success, rec.success);
        assert_eq!(back.max_lip, rec.max_lip);
        assert_eq!(back.min_holder, None);
    }

    #[test]
    fn build_tree_kinds() {
        assert_eq!(build_tree("binary", 255, 3, 0).unwrap().n(), 255);
        assert!(build_tree("binary", 254, 3, 0).is_err());
        assert_eq!(build_tree("complete", 10, 3, 0).unwrap().n(), 10);
        assert!(build_tree("complete", 11, 3, 0).is_err());
        assert_eq!(build_tree("part-a", 40, 3, 0).unwrap().n(), 40);
        assert_eq!(build_tree("random", 40, 3, 1).unwrap().n(), 40);
        assert_eq!(build_tree("path", 9, 3, 0).unwrap().n(), 9);
        assert!(build_tree("hyperbolic", 9, 3, 0).is_err());
    }

    #[test]
    fn sweep_config_validation() {
        let mut c = SweepConfig {
            norms: vec!["lp:2".into()],
            n_grid: vec![15],
            delta_grid: vec![3],
            m_grid: None,
            mode: "practical".into(),
            trials: 1,
            master_seed: 0,
            tree_kind: "binary".into(),
            max_rounds: None,
            margin: None,
            delta_scale: None,
        };
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.mode = "mystic".into();
        assert!(c.validate().is_err());
    }
}
