//! Deciding whether a vertex map is a geometric embedding.
//!
//! The predicate is pairwise: with boundary margin `t >= 0`, an edge pair must
//! satisfy `||zeta(u) - zeta(v)||_X <= 1 - t` and a non-edge pair
//! `||zeta(u) - zeta(v)||_X > 1 + t`. The margin absorbs rounding noise when
//! verifying our own embeddings (default 1e-9) and is zero for external maps.
//!
//! Exact mode scans all `N(N-1)/2` pairs. Pruned mode buckets vertices on a grid in
//! auxiliary-norm coordinates: `||x||_2* <= ||x||_X`, so any pair at X-distance at
//! most `1 + t` lands in adjacent cells of side `1 + t` and only those candidates
//! get a full norm evaluation. Past 24 dimensions the grid has more cells than
//! points and a blocked double loop with early-exit norm evaluation takes over.
//! Both pruned paths classify pairs with the same float expressions as exact mode,
//! so the violation sets agree exactly.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

use crate::embedder::{EmbeddingParams, EmbeddingState};
use crate::normspace::NormedSpace;
use crate::tree::{part_a_h0, Tree};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exact,
    /// Grid pruning for m <= 24, blocked early-exit loop above.
    Pruned,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub margin: f64,
    pub mode: VerifyMode,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { margin: 1e-9, mode: VerifyMode::Exact }
    }
}

/// A pair outside its required distance range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairViolation {
    pub u: usize,
    pub v: usize,
    pub distance: f64,
}

/// A short-sum bad event: the un-regularized ball-sum difference of a pair at tree
/// distance `dist` fell at or below the distance-dependent threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LViolation {
    pub u: usize,
    pub v: usize,
    pub dist: usize,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ViolationReport {
    pub edge_violations: Vec<PairViolation>,
    pub nonedge_violations: Vec<PairViolation>,
    pub l_violations: Vec<LViolation>,
    /// Pairs that received a full distance evaluation.
    pub pairs_evaluated: u64,
    pub max_edge_distance: f64,
    /// Smallest fully-evaluated non-edge distance; global in exact mode,
    /// best-effort under pruning.
    pub min_nonedge_distance: Option<f64>,
}

impl ViolationReport {
    /// Empty report <=> the map is a geometric embedding (at the used margin).
    pub fn is_empty(&self) -> bool {
        self.edge_violations.is_empty()
            && self.nonedge_violations.is_empty()
            && self.l_violations.is_empty()
    }

    pub fn total(&self) -> usize {
        self.edge_violations.len() + self.nonedge_violations.len() + self.l_violations.len()
    }

    /// Copy with distances rounded to `sig` significant digits (report files pin 12).
    pub fn rounded(&self, sig: usize) -> ViolationReport {
        let r = |x: f64| round_sig(x, sig);
        ViolationReport {
            edge_violations: self
                .edge_violations
                .iter()
                .map(|p| PairViolation { distance: r(p.distance), ..*p })
                .collect(),
            nonedge_violations: self
                .nonedge_violations
                .iter()
                .map(|p| PairViolation { distance: r(p.distance), ..*p })
                .collect(),
            l_violations: self
                .l_violations
                .iter()
                .map(|l| LViolation { value: r(l.value), threshold: r(l.threshold), ..*l })
                .collect(),
            pairs_evaluated: self.pairs_evaluated,
            max_edge_distance: r(self.max_edge_distance),
            min_nonedge_distance: self.min_nonedge_distance.map(r),
        }
    }
}

pub fn round_sig(x: f64, sig: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", sig.saturating_sub(1), x).parse().unwrap_or(x)
}

fn edge_set(tree: &Tree) -> HashSet<(usize, usize)> {
    tree.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
}

fn validate_points(points: &[Vec<f64>], tree: &Tree, space: &NormedSpace) -> Result<()> {
    if points.len() != tree.n() {
        return Err(Error::InvalidParam(format!(
            "map covers {} vertices, tree has {}",
            points.len(),
            tree.n()
        )));
    }
    for (v, p) in points.iter().enumerate() {
        if p.len() != space.dim() {
            return Err(Error::InvalidVertex(v));
        }
    }
    Ok(())
}

/// Decides the embedding predicate for `points` against `tree` in `space`.
pub fn verify(
    points: &[Vec<f64>],
    tree: &Tree,
    space: &NormedSpace,
    opts: &VerifyOptions,
) -> Result<ViolationReport> {
    if opts.margin < 0.0 {
        return Err(Error::InvalidParam("margin must be nonnegative".into()));
    }
    validate_points(points, tree, space)?;
    let margin = opts.margin;
    let edges = edge_set(tree);

    let mut report = ViolationReport::default();

    // Edge pairs are always checked directly, in full.
    for &(u, v) in tree.edges() {
        let d = dist_between(space, &points[u], &points[v]);
        report.pairs_evaluated += 1;
        report.max_edge_distance = report.max_edge_distance.max(d);
        if d > 1.0 - margin {
            let (u, v) = (u.min(v), u.max(v));
            report.edge_violations.push(PairViolation { u, v, distance: d });
        }
    }
    report.edge_violations.sort_by_key(|p| (p.u, p.v));

    let use_grid = matches!(opts.mode, VerifyMode::Pruned) && space.dim() <= 24;
    let use_blocked = matches!(opts.mode, VerifyMode::Pruned) && space.dim() > 24;

    if use_grid {
        scan_nonedges_grid(points, space, &edges, margin, &mut report);
    } else {
        scan_nonedges_loop(points, space, &edges, margin, use_blocked, &mut report);
    }
    report.nonedge_violations.sort_by_key(|p| (p.u, p.v));
    Ok(report)
}

fn dist_between(space: &NormedSpace, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    space.norm(&diff)
}

fn scan_nonedges_loop(
    points: &[Vec<f64>],
    space: &NormedSpace,
    edges: &HashSet<(usize, usize)>,
    margin: f64,
    early_exit: bool,
    report: &mut ViolationReport,
) {
    let n = points.len();
    let cutoff = 1.0 + margin;
    let rows: Vec<(Vec<PairViolation>, u64, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut viol = Vec::new();
            let mut evaluated = 0u64;
            let mut min_d: Option<f64> = None;
            let mut diff = vec![0.0; space.dim()];
            for v in (u + 1)..n {
                if edges.contains(&(u, v)) {
                    continue;
                }
                for i in 0..space.dim() {
                    diff[i] = points[u][i] - points[v][i];
                }
                if early_exit {
                    match space.norm_exceeds(&diff, cutoff) {
                        None => {} // provably above cutoff: satisfied
                        Some(d) => {
                            evaluated += 1;
                            min_d = Some(min_d.map_or(d, |x: f64| x.min(d)));
                            if d <= cutoff {
                                viol.push(PairViolation { u, v, distance: d });
                            }
                        }
                    }
                } else {
                    let d = space.norm(&diff);
                    evaluated += 1;
                    min_d = Some(min_d.map_or(d, |x: f64| x.min(d)));
                    if d <= cutoff {
                        viol.push(PairViolation { u, v, distance: d });
                    }
                }
            }
            (viol, evaluated, min_d)
        })
        .collect();
    for (viol, evaluated, min_d) in rows {
        report.nonedge_violations.extend(viol);
        report.pairs_evaluated += evaluated;
        if let Some(d) = min_d {
            report.min_nonedge_distance =
                Some(report.min_nonedge_distance.map_or(d, |x| x.min(d)));
        }
    }
}

fn scan_nonedges_grid(
    points: &[Vec<f64>],
    space: &NormedSpace,
    edges: &HashSet<(usize, usize)>,
    margin: f64,
    report: &mut ViolationReport,
) {
    let cutoff = 1.0 + margin;
    let side = cutoff;
    // Cell keys in auxiliary-norm coordinates. ||.||_2* <= ||.||_X, so X-distance
    // <= side implies per-coordinate difference <= side: adjacent cells only.
    let mut cells: std::collections::HashMap<Vec<i64>, Vec<usize>> =
        std::collections::HashMap::new();
    for (v, p) in points.iter().enumerate() {
        let a = space.basis_coordinates(p);
        let key: Vec<i64> = a.iter().map(|x| (x / side).floor() as i64).collect();
        cells.entry(key).or_default().push(v);
    }
    let occupied: Vec<(&Vec<i64>, &Vec<usize>)> = {
        let mut o: Vec<_> = cells.iter().collect();
        o.sort_by(|a, b| a.0.cmp(b.0));
        o
    };
    let results: Vec<(Vec<PairViolation>, u64, Option<f64>)> = (0..occupied.len())
        .into_par_iter()
        .map(|i| {
            let mut viol = Vec::new();
            let mut evaluated = 0u64;
            let mut min_d: Option<f64> = None;
            let (key_i, pts_i) = occupied[i];
            let mut check = |u: usize, v: usize| {
                let (u, v) = (u.min(v), u.max(v));
                if edges.contains(&(u, v)) {
                    return;
                }
                let d = dist_between(space, &points[u], &points[v]);
                evaluated += 1;
                min_d = Some(min_d.map_or(d, |x: f64| x.min(d)));
                if d <= cutoff {
                    viol.push(PairViolation { u, v, distance: d });
                }
            };
            for a in 0..pts_i.len() {
                for b in (a + 1)..pts_i.len() {
                    check(pts_i[a], pts_i[b]);
                }
            }
            for (key_j, pts_j) in occupied.iter().skip(i + 1) {
                if key_i.iter().zip(key_j.iter()).all(|(a, b)| (a - b).abs() <= 1) {
                    for &u in pts_i {
                        for &v in *pts_j {
                            check(u, v);
                        }
                    }
                }
            }
            (viol, evaluated, min_d)
        })
        .collect();
    for (viol, evaluated, min_d) in results {
        report.nonedge_violations.extend(viol);
        report.pairs_evaluated += evaluated;
        if let Some(d) = min_d {
            report.min_nonedge_distance =
                Some(report.min_nonedge_distance.map_or(d, |x| x.min(d)));
        }
    }
}

/// Short-sum event threshold at tree distance `dist`: the thin-shell form
/// `1 + 1/(2 m^{1-kappa})` through `k0`, then `dist^{c1}` up to `ell0`.
pub fn l_threshold(params: &EmbeddingParams, dist: usize) -> f64 {
    if dist <= params.k0 {
        1.0 + 0.5 / (params.m as f64).powf(1.0 - params.kappa)
    } else {
        (dist as f64).powf(params.c1)
    }
}

/// Pairs at tree distance `2..=floor(ell0)`, cached for repeated enumeration.
#[derive(Debug, Clone)]
pub struct LPairs {
    /// `(u, v, dist)` with `u < v`, sorted.
    pub pairs: Vec<(usize, usize, usize)>,
    pub range_max: usize,
}

impl LPairs {
    pub fn build(tree: &Tree, ell0: f64) -> LPairs {
        let range_max = ell0.floor().max(0.0) as usize;
        let mut pairs = Vec::new();
        if range_max >= 2 {
            for u in 0..tree.n() {
                for (v, d) in tree.vertices_within(u, range_max) {
                    if v > u && d >= 2 {
                        pairs.push((u, v, d));
                    }
                }
            }
        }
        pairs.sort_unstable();
        LPairs { pairs, range_max }
    }
}

/// Scans pairs with `2 <= dist <= ell0` and reports those whose un-regularized
/// ball-sum difference has X-norm at or below the threshold (the bad event holds).
pub fn enumerate_l_violations(
    state: &EmbeddingState,
    tree: &Tree,
    space: &NormedSpace,
) -> Vec<LViolation> {
    let pairs = LPairs::build(tree, state.params().ell0);
    enumerate_l_violations_with(&pairs, state, space)
}

pub fn enumerate_l_violations_with(
    pairs: &LPairs,
    state: &EmbeddingState,
    space: &NormedSpace,
) -> Vec<LViolation> {
    let params = state.params();
    let mut out = Vec::new();
    for &(u, v, dist) in &pairs.pairs {
        let threshold = l_threshold(params, dist);
        let s = state.ball_sum_difference(u, v);
        let value = space.norm(&s);
        if value <= threshold {
            out.push(LViolation { u, v, dist, value, threshold });
        }
    }
    out
}

/// Full check of an embedding state: pair predicate plus short-sum events.
pub fn verify_state(
    state: &EmbeddingState,
    tree: &Tree,
    space: &NormedSpace,
    opts: &VerifyOptions,
) -> Result<ViolationReport> {
    let mut report = verify(state.points(), tree, space, opts)?;
    report.l_violations = enumerate_l_violations(state, tree, space);
    Ok(report)
}

/// Auxiliary norm `||x||_2*`: Euclidean length of the John-basis coordinates.
pub fn aux_norm_eval(space: &NormedSpace, x: &[f64]) -> Result<f64> {
    if x.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: x.len() });
    }
    Ok(space.aux_norm(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct DistBucket {
    pub dist: usize,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Distortion summary of an accepted embedding.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionProfile {
    /// max over pairs of `||zeta(u)-zeta(v)||_X / dist(u,v)`.
    pub max_lipschitz: f64,
    pub max_lipschitz_pair: (usize, usize),
    /// min over pairs with `dist > k0` of `||zeta(u)-zeta(v)||_X / dist^{1/10}`;
    /// reported, never thresholded (its constant is unspecified).
    pub min_holder: Option<f64>,
    pub min_holder_pair: Option<(usize, usize)>,
    pub per_distance: Vec<DistBucket>,
}

/// Profiles distortion over all pairs. Meaningful on maps that already passed
/// [`verify`].
pub fn distortion_profile(
    points: &[Vec<f64>],
    tree: &Tree,
    space: &NormedSpace,
    k0: usize,
) -> Result<DistortionProfile> {
    validate_points(points, tree, space)?;
    let n = tree.n();
    let mut max_lip = 0.0;
    let mut max_pair = (0, 0);
    let mut min_holder: Option<f64> = None;
    let mut holder_pair = None;
    let mut buckets: std::collections::BTreeMap<usize, (usize, f64, f64, f64)> =
        std::collections::BTreeMap::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let k = tree.dist(u, v);
            let d = dist_between(space, &points[u], &points[v]);
            let ratio = d / k as f64;
            if ratio > max_lip {
                max_lip = ratio;
                max_pair = (u, v);
            }
            if k > k0 {
                let h = d / (k as f64).powf(0.1);
                if min_holder.is_none_or(|x| h < x) {
                    min_holder = Some(h);
                    holder_pair = Some((u, v));
                }
            }
            let e = buckets.entry(k).or_insert((0, f64::INFINITY, f64::NEG_INFINITY, 0.0));
            e.0 += 1;
            e.1 = e.1.min(d);
            e.2 = e.2.max(d);
            e.3 += d;
        }
    }
    Ok(DistortionProfile {
        max_lipschitz: max_lip,
        max_lipschitz_pair: max_pair,
        min_holder,
        min_holder_pair: holder_pair,
        per_distance: buckets
            .into_iter()
            .map(|(dist, (count, min, max, sum))| DistBucket {
                dist,
                count,
                min,
                max,
                mean: sum / count as f64,
            })
            .collect(),
    })
}

/// Dimension estimate below which some bounded-degree tree fails to embed:
/// `alpha_0 log N / log log N` with `alpha_0 = 1/2`.
pub fn lower_bound_dim(n: usize) -> Result<f64> {
    if n < 8 {
        return Err(Error::InvalidParam(format!("N must be at least 8, got {n}")));
    }
    let x = (n as f64).ln();
    Ok(0.5 * x / x.ln())
}

/// Ingredients and verdict of the volumetric non-embeddability certificate.
#[derive(Debug, Clone, Serialize)]
pub struct PackingCertificate {
    pub n: usize,
    pub delta: usize,
    pub claimed_m: usize,
    /// `alpha_0 log N / log log N`.
    pub dim_bound: f64,
    /// `claimed_m` is below the bound, so some degree-bounded tree is asserted
    /// non-embeddable (asymptotic form of the statement).
    pub below_bound: bool,
    /// Height bound of the witness tree (the breadth-first-filled max-degree tree
    /// on `n` vertices).
    pub h0: usize,
    /// Guaranteed independent-set size in the witness (bipartition half).
    pub independent_set_at_least: usize,
    /// Disjoint half-balls around an independent set pack inside the radius
    /// `h0 + 1/2` ball, so any embedding forces
    /// `N/2 * lambda(B(0,1/2)) <= lambda(B(0,h0+1/2))`, i.e.
    /// `ln(N/2) <= m ln(2 h0 + 1)` after radii scaling (norm-independent).
    pub volume_lhs_log: f64,
    pub volume_rhs_log: f64,
    /// The packing inequality fails at `claimed_m`: rigorous finite-N witness.
    pub volume_inequality_violated: bool,
    /// Generator coordinates of the witness tree.
    pub witness: String,
}

/// Evaluates the packing certificate for the extremal tree on `n` vertices with
/// degree bound `delta` against a claimed embedding dimension.
pub fn packing_certificate(delta: usize, n: usize, claimed_m: usize) -> Result<PackingCertificate> {
    let dim_bound = lower_bound_dim(n)?;
    let h0 = part_a_h0(delta, n)?;
    let volume_lhs_log = (n as f64 / 2.0).ln();
    let volume_rhs_log = claimed_m as f64 * (2.0 * h0 as f64 + 1.0).ln();
    Ok(PackingCertificate {
        n,
        delta,
        claimed_m,
        dim_bound,
        below_bound: (claimed_m as f64) < dim_bound,
        h0,
        independent_set_at_least: n.div_ceil(2),
        volume_lhs_log,
        volume_rhs_log,
        volume_inequality_violated: volume_lhs_log > volume_rhs_log,
        witness: format!("gen-tree --kind part-a --delta {delta} --n {n}"),
    })
}
