//! The randomized embedding and its parameter schedule.
//!
//! Every edge `e` carries an independent vector `Y_e` uniform in the unit ball and
//! an independent standard-normal coefficient vector `g^e`; the regularizer is
//! `G_e = sum_i g_i^e x_i` over the John basis. A vertex embeds as
//!
//! ```text
//! zeta(v) = shrink * sum_{e in P(root, v)} Y_e + delta_reg * sum_{e in P(root, v)} G_e
//! ```
//!
//! with `shrink = 1 - 1/log N` and the empty sum at the root equal to zero.
//!
//! Theory mode instantiates every parameter by its defining formula (natural logs
//! throughout). Those values target asymptotics: at desk scale the regularizer
//! weight they produce is far too large for any edge event to hold, so practical
//! mode keeps the formula shapes and applies documented scale knobs instead.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::io::Write;

use crate::normspace::{ConstantsConfig, NormedSpace};
use crate::rng::{stream, StreamKind};
use crate::tree::Tree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Theory,
    Practical,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Mode::Theory),
            "practical" => Ok(Mode::Practical),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Theory => "theory",
            Mode::Practical => "practical",
        })
    }
}

/// Practical-mode knobs. Rejected in theory mode, where the formulas are final.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub k0: Option<usize>,
    pub delta_scale: Option<f64>,
    pub ell0_scale: Option<f64>,
}

/// Default multiplier applied to the regularizer weight in practical mode.
///
/// The formula value at desk scale (e.g. 0.66 at N = 255) would make
/// `delta_reg * ||G_e||_X` dwarf the `1 - shrink` edge margin; 0.01 keeps the
/// Gaussian stage active without breaking edges. Calibrated on the N = 255
/// complete binary tree across l1/l2/linf.
pub const PRACTICAL_DELTA_SCALE: f64 = 0.01;

/// Practical-mode dimension multiplier: `m = ceil(8 log N / log log N)`.
pub const PRACTICAL_M_FACTOR: f64 = 8.0;

/// Practical-mode short-distance cutoff.
pub const PRACTICAL_K0: usize = 8;

/// The full parameter schedule.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingParams {
    pub n: usize,
    pub delta: usize,
    pub m: usize,
    pub mode: Mode,
    pub alpha1: f64,
    pub c1: f64,
    pub kappa: f64,
    pub c2: f64,
    /// `1 - 1/log N`.
    pub shrink: f64,
    /// Regularizer weight (includes the practical scale).
    pub delta_reg: f64,
    /// Upper end of the short-sum event range (real-valued; events run over
    /// integer distances `2..=floor(ell0)`).
    pub ell0: f64,
    pub k0: usize,
    pub k1: usize,
    pub delta_scale: f64,
    pub ell0_scale: f64,
    pub constants: ConstantsConfig,
}

impl EmbeddingParams {
    /// Theory-mode dimension for the same `(N, kappa)`, for reference in reports.
    pub fn theory_m(&self) -> usize {
        let x = (self.n as f64).ln();
        (self.alpha1 * x / x.ln()).ceil() as usize
    }
}

/// Derives the schedule. Natural logarithms everywhere; `N >= 8` so that
/// `log log N` is safely positive, `delta >= 3`.
pub fn derive_params(
    n: usize,
    delta: usize,
    mode: Mode,
    overrides: Overrides,
    constants: ConstantsConfig,
) -> Result<EmbeddingParams> {
    constants.validate()?;
    if n < 8 {
        return Err(Error::InvalidParam(format!("N must be at least 8, got {n}")));
    }
    if delta < 3 {
        return Err(Error::InvalidParam(format!("delta must be at least 3, got {delta}")));
    }
    if mode == Mode::Theory
        && (overrides.m.is_some()
            || overrides.k0.is_some()
            || overrides.delta_scale.is_some()
            || overrides.ell0_scale.is_some())
    {
        return Err(Error::InvalidParam("theory mode takes no overrides".into()));
    }
    if let Some(s) = overrides.delta_scale {
        if !(s > 0.0) {
            return Err(Error::InvalidParam("delta_scale must be positive".into()));
        }
    }
    if let Some(s) = overrides.ell0_scale {
        if !(s > 0.0) {
            return Err(Error::InvalidParam("ell0_scale must be positive".into()));
        }
    }
    if let Some(m) = overrides.m {
        if m == 0 {
            return Err(Error::InvalidParam("override m must be positive".into()));
        }
    }

    let alpha1 = 64.0;
    let c1 = 0.25;
    let kappa = constants.kappa;
    let c2 = (0.25_f64).min(kappa / 4.0);
    let x = (n as f64).ln();
    let log_pow = x.powf(c2);
    let shrink = 1.0 - 1.0 / x;

    let (m, k0, delta_scale, ell0_scale) = match mode {
        Mode::Theory => {
            let m = (alpha1 * x / x.ln()).ceil() as usize;
            let cbl = constants.cb_l_product;
            let k0 = 3usize
                .max(cbl.powf(4.0 / (1.0 - 2.0 * c1)).ceil() as usize)
                .max(4.0_f64.powf(1.0 / c1).ceil() as usize);
            (m, k0, 1.0, 1.0)
        }
        Mode::Practical => {
            let m = overrides
                .m
                .unwrap_or_else(|| (PRACTICAL_M_FACTOR * x / x.ln()).ceil() as usize);
            let k0 = overrides.k0.unwrap_or(PRACTICAL_K0);
            (
                m,
                k0,
                overrides.delta_scale.unwrap_or(PRACTICAL_DELTA_SCALE),
                overrides.ell0_scale.unwrap_or(1.0),
            )
        }
    };

    let delta_reg = delta_scale * (-(0.5 - c1 / 2.0) * log_pow).exp();
    let ell0 = ell0_scale * log_pow.exp();
    let k1 = (x / ((delta - 1) as f64).ln()).floor() as usize;

    Ok(EmbeddingParams {
        n,
        delta,
        m,
        mode,
        alpha1,
        c1,
        kappa,
        c2,
        shrink,
        delta_reg,
        ell0,
        k0,
        k1,
        delta_scale,
        ell0_scale,
        constants,
    })
}

/// Which per-edge variables a resample redraws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleWhich {
    Ball,
    Gaussian,
    Both,
}

/// The embedding state: per-edge variables plus the derived vertex map.
///
/// Edges are addressed by their child vertex. Mutation happens only through
/// [`embed`] and [`EmbeddingState::resample_edges`]; reads are concurrency-safe
/// between mutations.
#[derive(Debug, Clone)]
pub struct EmbeddingState {
    params: EmbeddingParams,
    master_seed: u64,
    /// Ball vector per edge (index = child vertex; root slot unused).
    y: Vec<Vec<f64>>,
    /// Gaussian coefficients per edge.
    g: Vec<Vec<f64>>,
    /// Regularizer vectors `G_e = B g^e`.
    big_g: Vec<Vec<f64>>,
    /// Vertex map.
    zeta: Vec<Vec<f64>>,
    /// Ball-only prefix sums `sum_{e in P(root, v)} Y_e`.
    ysum: Vec<Vec<f64>>,
    /// Next draw counter per edge: `[ball, gaussian]`.
    counters: Vec<[u64; 2]>,
}

fn draw_ball(space: &NormedSpace, seed: u64, child: usize, counter: u64) -> Vec<f64> {
    let mut rng = stream(seed, child as u64, StreamKind::Ball, counter);
    space.sample_ball(&mut rng)
}

fn draw_gauss(m: usize, seed: u64, child: usize, counter: u64) -> Vec<f64> {
    let mut rng = stream(seed, child as u64, StreamKind::Gaussian, counter);
    (0..m).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Draws all edge variables and derives the vertex map by one preorder pass.
/// Deterministic in `master_seed`; each edge owns its own counter-keyed stream.
pub fn embed(
    tree: &Tree,
    space: &NormedSpace,
    params: &EmbeddingParams,
    master_seed: u64,
) -> Result<EmbeddingState> {
    if params.m != space.dim() {
        return Err(Error::DimensionMismatch { expected: params.m, got: space.dim() });
    }
    if params.n != tree.n() {
        return Err(Error::InvalidParam(format!(
            "params derived for N={} but tree has {} vertices",
            params.n,
            tree.n()
        )));
    }
    let n = tree.n();
    let m = params.m;
    let mut state = EmbeddingState {
        params: params.clone(),
        master_seed,
        y: vec![Vec::new(); n],
        g: vec![Vec::new(); n],
        big_g: vec![Vec::new(); n],
        zeta: vec![vec![0.0; m]; n],
        ysum: vec![vec![0.0; m]; n],
        counters: vec![[0, 0]; n],
    };
    for &v in tree.preorder() {
        if v == tree.root() {
            continue;
        }
        state.y[v] = draw_ball(space, master_seed, v, 0);
        state.g[v] = draw_gauss(m, master_seed, v, 0);
        state.big_g[v] = space.regularizer(&state.g[v]);
        state.counters[v] = [1, 1];
        state.accumulate_vertex(tree, v);
    }
    Ok(state)
}

impl EmbeddingState {
    /// `zeta(v) = zeta(parent) + shrink Y_e + delta_reg G_e`, and the matching
    /// ball-only prefix. Kept as the single site computing the recurrence so that
    /// incremental updates replay bit-identically.
    fn accumulate_vertex(&mut self, tree: &Tree, v: usize) {
        let p = tree.parent(v).expect("non-root vertex");
        let m = self.params.m;
        let shrink = self.params.shrink;
        let dreg = self.params.delta_reg;
        for i in 0..m {
            let z = self.zeta[p][i] + shrink * self.y[v][i] + dreg * self.big_g[v][i];
            let ys = self.ysum[p][i] + self.y[v][i];
            self.zeta[v][i] = z;
            self.ysum[v][i] = ys;
        }
    }

    pub fn params(&self) -> &EmbeddingParams {
        &self.params
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn zeta(&self, v: usize) -> &[f64] {
        &self.zeta[v]
    }

    /// All vertex images, indexed by vertex id.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.zeta
    }

    pub fn ball_vector(&self, child: usize) -> &[f64] {
        &self.y[child]
    }

    pub fn regularizer_vector(&self, child: usize) -> &[f64] {
        &self.big_g[child]
    }

    /// `zeta(u) - zeta(v)`.
    pub fn pair_difference(&self, u: usize, v: usize) -> Vec<f64> {
        assert_ne!(u, v, "pair_difference needs distinct vertices");
        self.zeta[u].iter().zip(&self.zeta[v]).map(|(a, b)| a - b).collect()
    }

    /// Un-regularized ball-sum difference `sum_{P(r,u)} Y - sum_{P(r,v)} Y`.
    pub fn ball_sum_difference(&self, u: usize, v: usize) -> Vec<f64> {
        self.ysum[u].iter().zip(&self.ysum[v]).map(|(a, b)| a - b).collect()
    }

    /// Deterministic per-edge stretch bound: by the triangle inequality every pair
    /// satisfies `||zeta(u) - zeta(v)||_X <= dist(u,v) * (shrink + delta_reg * max_e ||G_e||_X)`.
    pub fn lipschitz_upper_bound(&self, tree: &Tree, space: &NormedSpace) -> f64 {
        let mut max_g = 0.0_f64;
        for v in 0..tree.n() {
            if v != tree.root() {
                max_g = max_g.max(space.norm(&self.big_g[v]));
            }
        }
        self.params.shrink + self.params.delta_reg * max_g
    }

    /// Redraws the selected variables on `edges` (child vertex ids) and updates the
    /// vertex map on the affected subtrees. All other edges keep their replay.
    pub fn resample_edges(
        &mut self,
        tree: &Tree,
        space: &NormedSpace,
        edges: &[usize],
        which: ResampleWhich,
    ) -> Result<()> {
        if edges.is_empty() {
            return Ok(());
        }
        for &c in edges {
            if c >= tree.n() || c == tree.root() {
                return Err(Error::UnknownEdge(c));
            }
        }
        for &c in edges {
            if matches!(which, ResampleWhich::Ball | ResampleWhich::Both) {
                let counter = self.counters[c][0];
                self.y[c] = draw_ball(space, self.master_seed, c, counter);
                self.counters[c][0] += 1;
            }
            if matches!(which, ResampleWhich::Gaussian | ResampleWhich::Both) {
                let counter = self.counters[c][1];
                self.g[c] = draw_gauss(self.params.m, self.master_seed, c, counter);
                self.big_g[c] = space.regularizer(&self.g[c]);
                self.counters[c][1] += 1;
            }
        }
        // Recompute zeta/ysum on the union of affected subtrees, in global preorder,
        // with the same recurrence as the initial pass — bitwise identical to a full
        // recomputation.
        let n = tree.n();
        let mut affected = vec![false; n];
        for &c in edges {
            for &w in tree.subtree(c) {
                affected[w] = true;
            }
        }
        for &w in tree.preorder() {
            if affected[w] {
                self.accumulate_vertex(tree, w);
            }
        }
        Ok(())
    }

    /// Full recomputation of the vertex map from the current edge variables — the
    /// oracle incremental updates are tested against.
    pub fn recompute_full(&self, tree: &Tree) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut clone = self.clone();
        for &v in tree.preorder() {
            if v != tree.root() {
                clone.accumulate_vertex(tree, v);
            }
        }
        (clone.zeta, clone.ysum)
    }

    /// Embedding file: comment headers with the full parameter provenance, then one
    /// `vertex,x1,..,xm` row per vertex. Floats print in shortest round-trip form,
    /// so reruns with the same seed are byte-identical.
    pub fn write_csv<W: Write>(&self, norm_descriptor: &str, out: &mut W) -> Result<()> {
        let p = &self.params;
        writeln!(
            out,
            "# n={}, m={}, norm={}, seed={}, mode={}",
            p.n, p.m, norm_descriptor, self.master_seed, p.mode
        )?;
        writeln!(
            out,
            "# params: delta={}, shrink={}, delta_reg={}, ell0={}, k0={}, k1={}, c1={}, c2={}, kappa={}, cb_l={}, delta_scale={}, ell0_scale={}",
            p.delta,
            p.shrink,
            p.delta_reg,
            p.ell0,
            p.k0,
            p.k1,
            p.c1,
            p.c2,
            p.kappa,
            p.constants.cb_l_product,
            p.delta_scale,
            p.ell0_scale
        )?;
        for (v, z) in self.zeta.iter().enumerate() {
            write!(out, "{v}")?;
            for x in z {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Metadata recovered from an embedding file's comment headers.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingMeta {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub norm: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
}

/// Reads an embedding file back into per-vertex points plus header metadata.
pub fn read_embedding_csv(text: &str) -> Result<(Vec<Vec<f64>>, EmbeddingMeta)> {
    let mut meta = EmbeddingMeta::default();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for field in rest.split(',') {
                let field = field.trim();
                if let Some((k, v)) = field.split_once('=') {
                    match k.trim() {
                        "n" => meta.n = v.trim().parse().ok(),
                        "m" => meta.m = v.trim().parse().ok(),
                        "norm" => meta.norm = Some(v.trim().to_string()),
                        "seed" => meta.seed = v.trim().parse().ok(),
                        "mode" => meta.mode = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
            }
            continue;
        }
        let mut it = line.split(',');
        let v: usize = it
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: vertex id: {e}", lineno + 1)))?;
        let coords: std::result::Result<Vec<f64>, _> =
            it.map(|t| t.trim().parse::<f64>()).collect();
        rows.push((v, coords.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?));
    }
    rows.sort_by_key(|r| r.0);
    for (i, (v, _)) in rows.iter().enumerate() {
        if *v != i {
            return Err(Error::Parse(format!("vertex ids not contiguous at {v}")));
        }
    }
    let points: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
    if let Some(m) = meta.m {
        if points.iter().any(|p| p.len() != m) {
            return Err(Error::Parse("row width disagrees with header m".into()));
        }
    }
    Ok((points, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn l2(m: usize) -> NormedSpace {
        NormedSpace::lp(2.0, m).unwrap()
    }

    #[test]
    fn derive_params_examples() {
        let cfg = ConstantsConfig::default();
        let p = derive_params(1000, 3, Mode::Theory, Overrides::default(), cfg).unwrap();
        assert_relative_eq!(p.c2, 0.0625, epsilon = 1e-12);
        assert_relative_eq!(p.delta_reg, 0.654986, epsilon = 1e-4);
        assert_relative_eq!(p.ell0, 3.090665, epsilon = 1e-4);
        assert_eq!(p.k1, 9);
        assert_eq!(p.m, 229);
        // c1 = 1/4, cb_l = 2: exponent 4/(1-2c1) = 8, so k0 = max(3, 2^8, 4^4).
        assert_eq!(p.k0, 256);
        assert_relative_eq!(p.shrink, 1.0 - 1.0 / 1000.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn practical_mode_defaults_at_255() {
        let cfg = ConstantsConfig::default();
        let p = derive_params(255, 3, Mode::Practical, Overrides::default(), cfg).unwrap();
        assert_eq!(p.m, 26); // ceil(8 ln 255 / ln ln 255)
        assert_eq!(p.k0, 8);
        assert!(p.delta_reg < 0.1, "practical regularizer stays small: {}", p.delta_reg);
    }

    #[test]
    fn small_n_and_overrides_rejected() {
        let cfg = ConstantsConfig::default();
        assert!(derive_params(7, 3, Mode::Theory, Overrides::default(), cfg).is_err());
        assert!(derive_params(100, 2, Mode::Theory, Overrides::default(), cfg).is_err());
        let ov = Overrides { m: Some(10), ..Default::default() };
        assert!(derive_params(100, 3, Mode::Theory, ov, cfg).is_err());
        let ov = Overrides { delta_scale: Some(-1.0), ..Default::default() };
        assert!(derive_params(100, 3, Mode::Practical, ov, cfg).is_err());
    }

    fn quick_params(n_formula: usize, n_actual: usize, m: usize) -> EmbeddingParams {
        let mut p = derive_params(
            n_formula.max(8),
            3,
            Mode::Practical,
            Overrides { m: Some(m), ..Default::default() },
            ConstantsConfig::default(),
        )
        .unwrap();
        p.n = n_actual;
        p
    }

    #[test]
    fn two_vertex_expansion() {
        let tree = Tree::path_graph(2).unwrap();
        let space = l2(4);
        let params = quick_params(8, 2, 4);
        let st = embed(&tree, &space, &params, 11).unwrap();
        assert!(st.zeta(0).iter().all(|&x| x == 0.0), "root is anchored at zero");
        for i in 0..4 {
            let want = params.shrink * st.ball_vector(1)[i]
                + params.delta_reg * st.regularizer_vector(1)[i];
            assert_eq!(st.zeta(1)[i], want);
        }
    }

    #[test]
    fn path_telescoping_single_edge() {
        let tree = Tree::path_graph(3).unwrap();
        let space = l2(3);
        let params = quick_params(8, 3, 3);
        let st = embed(&tree, &space, &params, 5).unwrap();
        for i in 0..3 {
            let want = params.shrink * st.ball_vector(2)[i]
                + params.delta_reg * st.regularizer_vector(2)[i];
            assert_relative_eq!(
                st.zeta(2)[i] - st.zeta(1)[i],
                want,
                epsilon = 1e-14,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let tree = Tree::complete(3, 3).unwrap();
        let space = l2(5);
        let params = quick_params(tree.n(), tree.n(), 5);
        let a = embed(&tree, &space, &params, 99).unwrap();
        let b = embed(&tree, &space, &params, 99).unwrap();
        assert_eq!(a.zeta, b.zeta);
        let c = embed(&tree, &space, &params, 100).unwrap();
        assert_ne!(a.zeta, c.zeta);
    }

    #[test]
    fn pair_difference_matches_path_sums() {
        let mut rng = crate::rng::stream(17, 0, crate::rng::StreamKind::Aux, 0);
        let tree = Tree::random(50, 4, &mut rng).unwrap();
        let space = l2(6);
        let params = quick_params(50, 50, 6);
        let st = embed(&tree, &space, &params, 3).unwrap();
        for u in 0..50 {
            for v in 0..50 {
                if u == v {
                    continue;
                }
                let d = st.pair_difference(u, v);
                // Signed sum over P(u,v): edges on the u-side enter with +, on the
                // v-side with -.
                let mut want = vec![0.0; 6];
                for e in tree.path_edge_ids(u, v) {
                    let sign = if tree.in_subtree(e, u) { 1.0 } else { -1.0 };
                    for i in 0..6 {
                        want[i] += sign
                            * (params.shrink * st.ball_vector(e)[i]
                                + params.delta_reg * st.regularizer_vector(e)[i]);
                    }
                }
                for i in 0..6 {
                    assert!((d[i] - want[i]).abs() < 1e-10, "pair ({u},{v}) coord {i}");
                }
            }
        }
    }

    #[test]
    fn resample_empty_set_is_noop() {
        let tree = Tree::complete(3, 2).unwrap();
        let space = l2(4);
        let params = quick_params(tree.n(), tree.n(), 4);
        let mut st = embed(&tree, &space, &params, 1).unwrap();
        let before = st.zeta.clone();
        st.resample_edges(&tree, &space, &[], ResampleWhich::Both).unwrap();
        assert_eq!(st.zeta, before);
    }

    #[test]
    fn resample_leaf_touches_only_leaf() {
        let tree = Tree::complete(3, 2).unwrap();
        let space = l2(4);
        let params = quick_params(tree.n(), tree.n(), 4);
        let mut st = embed(&tree, &space, &params, 1).unwrap();
        let leaf = tree.n() - 1;
        assert!(tree.subtree(leaf).len() == 1);
        let before = st.zeta.clone();
        st.resample_edges(&tree, &space, &[leaf], ResampleWhich::Both).unwrap();
        for v in 0..tree.n() {
            if v == leaf {
                assert_ne!(st.zeta[v], before[v]);
            } else {
                assert_eq!(st.zeta[v], before[v], "vertex {v} moved");
            }
        }
    }

    #[test]
    fn resample_root_edge_matches_full_recompute_bitwise() {
        let tree = Tree::path_graph(6).unwrap();
        let space = l2(4);
        let params = quick_params(8, 6, 4);
        let mut st = embed(&tree, &space, &params, 2).unwrap();
        st.resample_edges(&tree, &space, &[1], ResampleWhich::Ball).unwrap();
        let (zeta, ysum) = st.recompute_full(&tree);
        assert_eq!(st.zeta, zeta);
        assert_eq!(st.ysum, ysum);
        // and everything below the root edge moved
        for v in 1..6 {
            assert!(st.zeta[v].iter().any(|&x| x != 0.0));
        }
    }

    #[test]
    fn resample_counters_give_fresh_draws_and_replay() {
        let tree = Tree::path_graph(2).unwrap();
        let space = l2(3);
        let params = quick_params(8, 2, 3);
        let mut a = embed(&tree, &space, &params, 7).unwrap();
        let y0 = a.y[1].clone();
        a.resample_edges(&tree, &space, &[1], ResampleWhich::Ball).unwrap();
        let y1 = a.y[1].clone();
        assert_ne!(y0, y1);
        // Replaying the same history reproduces the same draws.
        let mut b = embed(&tree, &space, &params, 7).unwrap();
        b.resample_edges(&tree, &space, &[1], ResampleWhich::Ball).unwrap();
        assert_eq!(b.y[1], y1);
    }

    #[test]
    fn ball_membership_survives_resampling() {
        let tree = Tree::complete(3, 3).unwrap();
        let space = NormedSpace::lp(1.0, 4).unwrap();
        let params = {
            let mut p = derive_params(
                tree.n(),
                3,
                Mode::Practical,
                Overrides { m: Some(4), ..Default::default() },
                ConstantsConfig::default(),
            )
            .unwrap();
            p.n = tree.n();
            p
        };
        let mut st = embed(&tree, &space, &params, 13).unwrap();
        let all: Vec<usize> = (1..tree.n()).collect();
        for _ in 0..5 {
            st.resample_edges(&tree, &space, &all, ResampleWhich::Ball).unwrap();
        }
        for v in 1..tree.n() {
            assert!(space.norm(st.ball_vector(v)) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn unknown_edge_rejected() {
        let tree = Tree::path_graph(3).unwrap();
        let space = l2(2);
        let params = quick_params(8, 3, 2);
        let mut st = embed(&tree, &space, &params, 0).unwrap();
        assert!(st.resample_edges(&tree, &space, &[0], ResampleWhich::Ball).is_err());
        assert!(st.resample_edges(&tree, &space, &[9], ResampleWhich::Ball).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let tree = Tree::complete(3, 2).unwrap();
        let space = l2(3);
        let params = quick_params(tree.n(), tree.n(), 3);
        let st = embed(&tree, &space, &params, 21).unwrap();
        let mut buf = Vec::new();
        st.write_csv("lp:2", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (points, meta) = read_embedding_csv(&text).unwrap();
        assert_eq!(meta.m, Some(3));
        assert_eq!(meta.norm.as_deref(), Some("lp:2"));
        assert_eq!(meta.seed, Some(21));
        assert_eq!(points.len(), tree.n());
        for v in 0..tree.n() {
            for i in 0..3 {
                assert_eq!(points[v][i], st.zeta(v)[i], "round trip must be exact");
            }
        }
    }
}
