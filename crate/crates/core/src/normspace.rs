//! Finite-dimensional normed spaces in isotropic position.
//!
//! A space is *isotropic* when the uniform distribution on its unit ball has zero
//! mean and identity covariance. All embedding machinery works in isotropic
//! coordinates; construction applies the required linear map once:
//!
//! - `l_p` balls: closed-form scalar map (the coordinate variance of the unit
//!   `l_p` ball is known analytically);
//! - ellipsoids: closed-form matrix map from the shape matrix;
//! - symmetric polytopes: empirical whitening from hit-and-run samples.
//!
//! Each space also carries a John-type basis `x_1..x_m` with
//! `|a|_2 <= ||sum a_i x_i||_X <= sqrt(m) |a|_2`, used to build the Gaussian
//! regularizer and the auxiliary norm.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Ball families supported by the artifact.
#[derive(Debug, Clone)]
pub enum BallKind {
    /// `l_p` ball, `p` in `[1, inf]` (`f64::INFINITY` for the cube).
    Lp { p: f64 },
    /// Symmetric polytope `{x : max_j |a_j . x| <= 1}` given by facet functionals.
    Polytope { facets: Vec<Vec<f64>> },
    /// Ellipsoid `{x : x^T S x <= 1}` with symmetric positive-definite `S`.
    Ellipsoid { shape: DMatrix<f64> },
}

/// Constants the analysis treats as absolute but never instantiates numerically.
///
/// `kappa` is the thin-shell exponent, `cb_l_product` the product of the ball-volume
/// and slicing constants, `thinshell_c` the concentration constant. They are
/// configuration, reported in every output that depends on them.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstantsConfig {
    pub kappa: f64,
    pub cb_l_product: f64,
    pub thinshell_c: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { kappa: 0.25, cb_l_product: 2.0, thinshell_c: 1.0 }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidParam(format!("kappa must lie in (0,1), got {}", self.kappa)));
        }
        if !(self.cb_l_product > 1.0) {
            return Err(Error::InvalidParam("cb_l_product must exceed 1".into()));
        }
        if !(self.thinshell_c > 0.0) {
            return Err(Error::InvalidParam("thinshell_c must be positive".into()));
        }
        Ok(())
    }
}

/// Linear map taking the raw ball to isotropic position.
#[derive(Debug, Clone)]
enum IsoMap {
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

/// John basis, kept in a fast scalar form when it is a multiple of the identity.
#[derive(Debug, Clone)]
enum Basis {
    Scalar(f64),
    Matrix { basis: DMatrix<f64>, inv: DMatrix<f64> },
}

/// An `m`-dimensional normed space in isotropic position.
///
/// Immutable after construction; sampling takes a caller-provided random stream, so
/// the value can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct NormedSpace {
    m: usize,
    kind: BallKind,
    descriptor: String,
    iso: IsoMap,
    basis: Basis,
    /// Facet functionals in isotropic coordinates (polytope kind only).
    iso_facets: Vec<Vec<f64>>,
    hit_and_run_burnin: usize,
}

/// Coordinate standard deviation scale for the isotropic `l_p` ball: the isotropic
/// map is `s * I` with `s = 1/sigma_p(m)`.
///
/// For finite `p`, `sigma_p^2 = Gamma(3/p) Gamma(1+m/p) / (Gamma(1/p) Gamma(1+(m+2)/p))`
/// (Dirichlet moment integral over the ball); for `p = inf` it is `1/3`.
pub fn isotropic_scale_lp(p: f64, m: usize) -> f64 {
    if p.is_infinite() {
        return 3.0_f64.sqrt();
    }
    let mf = m as f64;
    let log_var = ln_gamma(3.0 / p) - ln_gamma(1.0 / p) + ln_gamma(1.0 + mf / p)
        - ln_gamma(1.0 + (mf + 2.0) / p);
    (-0.5 * log_var).exp()
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParam(format!("lp exponent must satisfy p >= 1, got {p}")));
    }
    Ok(())
}

impl NormedSpace {
    /// `l_p` space of dimension `m` in isotropic position.
    pub fn lp(p: f64, m: usize) -> Result<Self> {
        validate_p(p)?;
        if m == 0 {
            return Err(Error::InvalidParam("dimension must be >= 1".into()));
        }
        let s = isotropic_scale_lp(p, m);
        let john = john_scale_lp(p, m, s);
        let descriptor =
            if p.is_infinite() { "lp:inf".to_string() } else { format!("lp:{p}") };
        Ok(NormedSpace {
            m,
            kind: BallKind::Lp { p },
            descriptor,
            iso: IsoMap::Scalar(s),
            basis: Basis::Scalar(john),
            iso_facets: Vec::new(),
            hit_and_run_burnin: 0,
        })
    }

    /// Ellipsoid `{x : x^T S x <= 1}`. The isotropic image of any ellipsoid is the
    /// Euclidean ball of radius `sqrt(m+2)`, so norm, sampler and basis coincide with
    /// the isotropic `l_2` ones; only the map itself depends on `S`.
    pub fn ellipsoid(shape: DMatrix<f64>) -> Result<Self> {
        let m = shape.nrows();
        if m == 0 || shape.ncols() != m {
            return Err(Error::InvalidParam("shape matrix must be square and nonempty".into()));
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::Singular("ellipsoid shape matrix"));
        }
        // Body = S^{-1/2} B_2 with covariance S^{-1}/(m+2); whitening = sqrt(m+2) S^{1/2}.
        let root = (m as f64 + 2.0).sqrt();
        let fwd = sym_pow(&eig, 0.5) * root;
        let s2 = isotropic_scale_lp(2.0, m);
        Ok(NormedSpace {
            m,
            kind: BallKind::Ellipsoid { shape: sym },
            descriptor: "ellipsoid".to_string(),
            iso: IsoMap::Matrix(fwd),
            basis: Basis::Scalar(s2),
            iso_facets: Vec::new(),
            hit_and_run_burnin: 0,
        })
    }

    /// Symmetric polytope from facet functionals, whitened empirically from
    /// `sample_budget` hit-and-run draws seeded by `seed`.
    ///
    /// The sampler is a random walk, so the position is approximate; the John basis
    /// is certified post hoc by a randomized check of the two-sided inequality.
    pub fn polytope(facets: Vec<Vec<f64>>, sample_budget: usize, seed: u64) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::InvalidParam("polytope needs at least one facet".into()));
        }
        let m = facets[0].len();
        if m == 0 || facets.iter().any(|f| f.len() != m) {
            return Err(Error::InvalidParam("facet rows must share a positive dimension".into()));
        }
        if sample_budget < 100 {
            return Err(Error::InvalidParam("sample_budget too small for whitening".into()));
        }
        let a = DMatrix::from_fn(facets.len(), m, |i, j| facets[i][j]);
        if a.rank(1e-10) < m {
            return Err(Error::InvalidParam(
                "facets do not span the space; polytope is unbounded".into(),
            ));
        }
        let burnin = 10 * m * m;
        // Whitening pass: one long chain in the raw body.
        let mut rng = crate::rng::stream(seed, 0, crate::rng::StreamKind::Aux, 0);
        let cov = {
            let mut x = vec![0.0; m];
            for _ in 0..burnin {
                hit_and_run_step(&facets, &mut x, &mut rng);
            }
            let mut acc = DMatrix::<f64>::zeros(m, m);
            for _ in 0..sample_budget {
                for _ in 0..m {
                    hit_and_run_step(&facets, &mut x, &mut rng);
                }
                for i in 0..m {
                    for j in 0..m {
                        acc[(i, j)] += x[i] * x[j];
                    }
                }
            }
            acc / sample_budget as f64
        };
        let eig = cov.symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l <= 1e-12) {
            return Err(Error::Singular("empirical covariance of polytope samples"));
        }
        let fwd = sym_pow(&eig, -0.5); // symmetric inverse square root
        let fwd_inv = sym_pow(&eig, 0.5);
        let iso_facets: Vec<Vec<f64>> = facets
            .iter()
            .map(|f| {
                let v = fwd_inv.transpose() * DVector::from_column_slice(f);
                v.iter().copied().collect()
            })
            .collect();
        let (basis, basis_inv) = john_basis_polytope(&iso_facets, m)?;
        let space = NormedSpace {
            m,
            kind: BallKind::Polytope { facets },
            descriptor: "polytope".to_string(),
            iso: IsoMap::Matrix(fwd),
            basis: Basis::Matrix { basis, inv: basis_inv },
            iso_facets,
            hit_and_run_burnin: burnin,
        };
        space.certify_john_basis(10_000, 1e-6, seed)?;
        Ok(space)
    }

    /// Parses a norm descriptor: `lp:<p>` (with `p` decimal or `inf`),
    /// `polytope:<csv>`, `ellipsoid:<csv>`. `m` fixes the dimension for `lp` kinds.
    pub fn from_descriptor(desc: &str, m: usize, sample_budget: usize, seed: u64) -> Result<Self> {
        if let Some(p_str) = desc.strip_prefix("lp:") {
            let p = if p_str == "inf" {
                f64::INFINITY
            } else {
                p_str
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad lp exponent {p_str:?}")))?
            };
            return Self::lp(p, m);
        }
        if let Some(path) = desc.strip_prefix("polytope:") {
            let rows = read_csv_matrix(path)?;
            return Self::polytope(rows, sample_budget, seed);
        }
        if let Some(path) = desc.strip_prefix("ellipsoid:") {
            let rows = read_csv_matrix(path)?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse("ellipsoid file must hold a square matrix".into()));
            }
            let shape = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            return Self::ellipsoid(shape);
        }
        Err(Error::Parse(format!("unknown norm descriptor {desc:?}")))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &BallKind {
        &self.kind
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// The isotropic map as a dense matrix (scalar kinds expand to `s * I`).
    pub fn iso_matrix(&self) -> DMatrix<f64> {
        match &self.iso {
            IsoMap::Scalar(s) => DMatrix::identity(self.m, self.m) * *s,
            IsoMap::Matrix(fwd) => fwd.clone(),
        }
    }

    /// Norm in isotropic position. Errors on dimension mismatch.
    pub fn norm_eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: x.len() });
        }
        Ok(self.norm(x))
    }

    /// Norm in isotropic position (length already validated by the caller).
    #[inline]
    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.m);
        match &self.kind {
            BallKind::Lp { p } => {
                let s = match self.iso {
                    IsoMap::Scalar(s) => s,
                    _ => unreachable!("lp kinds use scalar maps"),
                };
                lp_norm(x, *p) / s
            }
            BallKind::Ellipsoid { .. } => {
                let r = (self.m as f64 + 2.0).sqrt();
                lp_norm(x, 2.0) / r
            }
            BallKind::Polytope { .. } => {
                let mut best = 0.0_f64;
                for f in &self.iso_facets {
                    let mut acc = 0.0;
                    for (a, b) in f.iter().zip(x) {
                        acc += a * b;
                    }
                    best = best.max(acc.abs());
                }
                best
            }
        }
    }

    /// Norm with early exit: returns `None` as soon as the partial value provably
    /// exceeds `cutoff` (used by the pruned verifier; classification-equivalent to
    /// the full evaluation because the partial sums are monotone).
    #[inline]
    pub fn norm_exceeds(&self, x: &[f64], cutoff: f64) -> Option<f64> {
        match &self.kind {
            BallKind::Lp { p } => {
                let s = match self.iso {
                    IsoMap::Scalar(s) => s,
                    _ => unreachable!(),
                };
                if p.is_infinite() {
                    let c = cutoff * s;
                    let mut best = 0.0_f64;
                    for v in x {
                        best = best.max(v.abs());
                        if best > c {
                            return None;
                        }
                    }
                    Some(best / s)
                } else if (*p - 2.0).abs() < 1e-15 {
                    let c2 = (cutoff * s) * (cutoff * s);
                    let mut acc = 0.0;
                    for chunk in x.chunks(8) {
                        for v in chunk {
                            acc += v * v;
                        }
                        if acc > c2 {
                            return None;
                        }
                    }
                    Some(acc.sqrt() / s)
                } else {
                    let cp = (cutoff * s).powf(*p);
                    let mut acc = 0.0;
                    for chunk in x.chunks(8) {
                        for v in chunk {
                            acc += v.abs().powf(*p);
                        }
                        if acc > cp {
                            return None;
                        }
                    }
                    Some(acc.powf(1.0 / *p) / s)
                }
            }
            BallKind::Ellipsoid { .. } => {
                let r = (self.m as f64 + 2.0).sqrt();
                let c2 = (cutoff * r) * (cutoff * r);
                let mut acc = 0.0;
                for chunk in x.chunks(8) {
                    for v in chunk {
                        acc += v * v;
                    }
                    if acc > c2 {
                        return None;
                    }
                }
                Some(acc.sqrt() / r)
            }
            BallKind::Polytope { .. } => {
                let mut best = 0.0_f64;
                for f in &self.iso_facets {
                    let mut acc = 0.0;
                    for (a, b) in f.iter().zip(x) {
                        acc += a * b;
                    }
                    best = best.max(acc.abs());
                    if best > cutoff {
                        return None;
                    }
                }
                Some(best)
            }
        }
    }

    /// Gauge of the raw (pre-whitening) body.
    pub fn raw_norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: x.len() });
        }
        Ok(match &self.kind {
            BallKind::Lp { p } => lp_norm(x, *p),
            BallKind::Ellipsoid { shape } => {
                let v = DVector::from_column_slice(x);
                (v.transpose() * shape * &v)[(0, 0)].max(0.0).sqrt()
            }
            BallKind::Polytope { facets } => {
                let mut best = 0.0_f64;
                for f in facets {
                    let mut acc = 0.0;
                    for (a, b) in f.iter().zip(x) {
                        acc += a * b;
                    }
                    best = best.max(acc.abs());
                }
                best
            }
        })
    }

    /// One point uniform on the isotropic unit ball.
    pub fn sample_ball<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            BallKind::Lp { p } => {
                let s = match self.iso {
                    IsoMap::Scalar(s) => s,
                    _ => unreachable!(),
                };
                if p.is_infinite() {
                    (0..self.m).map(|_| s * (rng.random::<f64>() * 2.0 - 1.0)).collect()
                } else {
                    // Exact rejection-free scheme: coordinates from the generalized
                    // Gaussian exp(-|t|^p), normalized by (sum |t_i|^p + W)^{1/p}
                    // with W standard exponential.
                    let gamma = Gamma::new(1.0 / *p, 1.0).expect("valid gamma shape");
                    let mut y = vec![0.0; self.m];
                    let mut total = 0.0;
                    for yi in y.iter_mut() {
                        let g: f64 = gamma.sample(rng);
                        total += g;
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        *yi = sign * g.powf(1.0 / *p);
                    }
                    let w: f64 = Exp1.sample(rng);
                    let denom = (total + w).powf(1.0 / *p);
                    for yi in y.iter_mut() {
                        *yi = s * *yi / denom;
                    }
                    y
                }
            }
            BallKind::Ellipsoid { .. } => {
                let r = (self.m as f64 + 2.0).sqrt();
                euclidean_ball_sample(self.m, r, rng)
            }
            BallKind::Polytope { .. } => {
                let mut x = vec![0.0; self.m];
                for _ in 0..self.hit_and_run_burnin {
                    hit_and_run_step(&self.iso_facets, &mut x, rng);
                }
                x
            }
        }
    }

    /// John basis vectors `x_1..x_m` as columns.
    pub fn john_basis(&self) -> DMatrix<f64> {
        match &self.basis {
            Basis::Scalar(c) => DMatrix::identity(self.m, self.m) * *c,
            Basis::Matrix { basis, .. } => basis.clone(),
        }
    }

    /// `sum_i g_i x_i` for coefficients `g` — the Gaussian regularizer vector.
    pub fn regularizer(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.m);
        match &self.basis {
            Basis::Scalar(c) => g.iter().map(|v| c * v).collect(),
            Basis::Matrix { basis, .. } => {
                let v = basis * DVector::from_column_slice(g);
                v.iter().copied().collect()
            }
        }
    }

    /// Auxiliary norm: Euclidean length of the John-basis coordinates, satisfying
    /// `aux(x) <= ||x||_X <= sqrt(m) aux(x)`.
    #[inline]
    pub fn aux_norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.m);
        match &self.basis {
            Basis::Scalar(c) => lp_norm(x, 2.0) / c,
            Basis::Matrix { inv, .. } => {
                let v = inv * DVector::from_column_slice(x);
                v.norm()
            }
        }
    }

    /// John-basis coordinates of `x` (the `a` with `x = sum a_i x_i`).
    pub fn basis_coordinates(&self, x: &[f64]) -> Vec<f64> {
        match &self.basis {
            Basis::Scalar(c) => x.iter().map(|v| v / c).collect(),
            Basis::Matrix { inv, .. } => {
                let v = inv * DVector::from_column_slice(x);
                v.iter().copied().collect()
            }
        }
    }

    /// Randomized two-sided check of the John inequality on `trials` coefficient
    /// vectors; `tol` is relative slack.
    pub fn certify_john_basis(&self, trials: usize, tol: f64, seed: u64) -> Result<()> {
        let mut rng = crate::rng::stream(seed, 1, crate::rng::StreamKind::Aux, 0);
        for t in 0..trials {
            let a: Vec<f64> = (0..self.m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let l2 = lp_norm(&a, 2.0);
            if l2 == 0.0 {
                continue;
            }
            let v = self.regularizer(&a);
            let n = self.norm(&v);
            let root_m = (self.m as f64).sqrt();
            if n < l2 * (1.0 - tol) || n > root_m * l2 * (1.0 + tol) {
                return Err(Error::CheckFailed(format!(
                    "John inequality violated at trial {t}: |a|_2={l2:.6e}, ||Ba||_X={n:.6e}, sqrt(m)|a|_2={:.6e}",
                    root_m * l2
                )));
            }
        }
        Ok(())
    }

    /// Thin-shell and Gaussian-tail diagnostic.
    ///
    /// Reports the empirical fraction of ball samples with
    /// `| ||U||_2 - sqrt(m) | >= m^{1/2-kappa}` together with a norm histogram, and
    /// checks the Gaussian tail bound `P(||G||_2 > t) <= 2 exp(-(t-sqrt(m))^2/2)` on
    /// a synthetic standard normal stream at `t = 2 sqrt(m)`. Reporting only: the
    /// estimate is asymptotic in `m`, so small dimensions are flagged, never failed.
    pub fn thinshell_diagnostic(&self, trials: usize, kappa: f64, seed: u64) -> ThinShellReport {
        assert!(trials >= 1000, "thin-shell diagnostic needs at least 1e3 trials");
        let mf = self.m as f64;
        let root_m = mf.sqrt();
        let band = mf.powf(0.5 - kappa);
        let mut rng = crate::rng::stream(seed, 2, crate::rng::StreamKind::Aux, 0);
        let mut norms = Vec::with_capacity(trials);
        let mut exceed = 0usize;
        for _ in 0..trials {
            let u = self.sample_ball(&mut rng);
            let n = lp_norm(&u, 2.0);
            if (n - root_m).abs() >= band {
                exceed += 1;
            }
            norms.push(n);
        }
        let mean_norm = norms.iter().sum::<f64>() / trials as f64;
        let hist = histogram(&norms, 32);

        let t = 2.0 * root_m;
        let bound = 2.0 * (-(t - root_m) * (t - root_m) / 2.0).exp();
        let mut hits = 0usize;
        for _ in 0..trials {
            let g: Vec<f64> = (0..self.m).map(|_| StandardNormal.sample(&mut rng)).collect();
            if lp_norm(&g, 2.0) > t {
                hits += 1;
            }
        }
        ThinShellReport {
            dim: self.m,
            kappa,
            trials,
            exceed_fraction: exceed as f64 / trials as f64,
            mean_norm,
            hist,
            gaussian: GaussianTailCheck { t, bound, hits, trials },
            small_m: self.m < 16,
        }
    }
}

/// Output of [`NormedSpace::thinshell_diagnostic`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct ThinShellReport {
    pub dim: usize,
    pub kappa: f64,
    pub trials: usize,
    pub exceed_fraction: f64,
    pub mean_norm: f64,
    /// `(bucket lower edge, count)` pairs over the observed Euclidean norms.
    pub hist: Vec<(f64, usize)>,
    pub gaussian: GaussianTailCheck,
    /// Thin-shell is asymptotic; below m = 16 the fraction is reported but carries
    /// no pass/fail meaning.
    pub small_m: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GaussianTailCheck {
    pub t: f64,
    pub bound: f64,
    pub hits: usize,
    pub trials: usize,
}

#[inline]
pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    } else if (p - 2.0).abs() < 1e-15 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if (p - 1.0).abs() < 1e-15 {
        x.iter().map(|v| v.abs()).sum::<f64>()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn john_scale_lp(p: f64, m: usize, s: f64) -> f64 {
    let mf = m as f64;
    let exponent = if p.is_infinite() { 0.5 } else { (0.5 - 1.0 / p).max(0.0) };
    s * mf.powf(exponent)
}

fn euclidean_ball_sample<R: Rng + ?Sized>(m: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let n = lp_norm(&x, 2.0);
    let u: f64 = rng.random::<f64>();
    let scale = if n > 0.0 { radius * u.powf(1.0 / m as f64) / n } else { 0.0 };
    for v in x.iter_mut() {
        *v *= scale;
    }
    x
}

/// One hit-and-run step inside `{x : |f . x| <= 1 for all facets f}`.
fn hit_and_run_step<R: Rng + ?Sized>(facets: &[Vec<f64>], x: &mut [f64], rng: &mut R) {
    let m = x.len();
    let mut d: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let dn = lp_norm(&d, 2.0);
    if dn == 0.0 {
        return;
    }
    for v in d.iter_mut() {
        *v /= dn;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for f in facets {
        let mut fx = 0.0;
        let mut fd = 0.0;
        for i in 0..m {
            fx += f[i] * x[i];
            fd += f[i] * d[i];
        }
        if fd.abs() < 1e-300 {
            continue;
        }
        let a = (-1.0 - fx) / fd;
        let b = (1.0 - fx) / fd;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        // Degenerate chord; keep the current point rather than leave the body.
        return;
    }
    let t = lo + rng.random::<f64>() * (hi - lo);
    for i in 0..m {
        x[i] += t * d[i];
    }
}

/// Symmetric matrix power from a precomputed eigendecomposition.
fn sym_pow(eig: &nalgebra::SymmetricEigen<f64, nalgebra::Dyn>, pow: f64) -> DMatrix<f64> {
    let m = eig.eigenvalues.len();
    let mut d = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        d[(i, i)] = eig.eigenvalues[i].powf(pow);
    }
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// John basis for a symmetric polytope in isotropic position.
///
/// The maximal inscribed ellipsoid is obtained by polarity from the minimal
/// enclosing origin-centered ellipsoid of the facet functionals, solved as a
/// D-optimal design problem with the multiplicative update
/// `w_j <- w_j * (a_j^T F^{-1} a_j) / m` (self-normalizing, monotone in log det).
/// With `F = sum w_j a_j a_j^T` at the final weights, rescaled so the enclosing
/// ellipsoid contains every functional exactly, the basis matrix is `F^{-1/2}`.
/// Optimality is not certified; the two-sided norm inequality is, by the
/// randomized post-hoc check at construction.
fn john_basis_polytope(iso_facets: &[Vec<f64>], m: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let j = iso_facets.len();
    let pts = DMatrix::from_fn(m, j, |r, c| iso_facets[c][r]);
    let mut w = DVector::from_element(j, 1.0 / j as f64);
    let tol = 1e-9;
    let max_iter = 100_000;
    let mut kappa = DVector::zeros(j);
    let mut kmax = f64::INFINITY;
    for _ in 0..max_iter {
        let mut f = DMatrix::<f64>::zeros(m, m);
        for c in 0..j {
            let col = pts.column(c);
            for r in 0..m {
                for s in 0..m {
                    f[(r, s)] += w[c] * col[r] * col[s];
                }
            }
        }
        let f_inv = f.clone().try_inverse().ok_or(Error::Singular("design matrix"))?;
        kmax = f64::NEG_INFINITY;
        for c in 0..j {
            let col = pts.column(c);
            kappa[c] = (col.transpose() * &f_inv * col)[(0, 0)];
            kmax = kmax.max(kappa[c]);
        }
        if kmax <= m as f64 * (1.0 + tol) {
            break;
        }
        for c in 0..j {
            w[c] *= kappa[c] / m as f64;
        }
    }
    let mut f = DMatrix::<f64>::zeros(m, m);
    for c in 0..j {
        let col = pts.column(c);
        for r in 0..m {
            for s in 0..m {
                f[(r, s)] += w[c] * col[r] * col[s];
            }
        }
    }
    // Scale so that every functional satisfies a^T (mF)^{-1} a <= 1 exactly: the
    // polar ellipsoid then sits inside the body and the upper norm bound is safe
    // regardless of how tight the iteration got.
    f *= (kmax / m as f64).max(1.0);
    let eig = f.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Singular("design matrix eigenvalues"));
    }
    let basis = sym_pow(&eig, -0.5);
    let inv = sym_pow(&eig, 0.5);
    Ok((basis, inv))
}

fn read_csv_matrix(path: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Parse(format!("{path}:{}: {e}", lineno + 1)))?);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{path}: no data rows")));
    }
    Ok(rows)
}

fn histogram(values: &[f64], buckets: usize) -> Vec<(f64, usize)> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![(lo, values.len())];
    }
    let width = (hi - lo) / buckets as f64;
    let mut counts = vec![0usize; buckets];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(buckets - 1);
        counts[idx] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (lo + i as f64 * width, c)).collect()
}
