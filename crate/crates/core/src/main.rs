//! Command-line front end: tree generation, embedding, verification, analytic and
//! Monte Carlo checks, and the parameter sweep.
//!
//! Worker count for parallel sections comes from `GEOMTREE_WORKERS` when set.
//! Exit code is 0 only when every asserted check passed.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use geomtree::embedder::{self, derive_params, Mode, Overrides};
use geomtree::experiments;
use geomtree::lll;
use geomtree::normspace::{ConstantsConfig, NormedSpace};
use geomtree::tree::Tree;
use geomtree::verifier::{self, VerifyMode, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "geomtree",
    about = "Geometric embeddings of bounded-degree trees into normed spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a tree and write it as JSON.
    GenTree(GenTreeArgs),
    /// Draw (or construct by resampling) an embedding and write it as CSV.
    Embed(EmbedArgs),
    /// Verify an embedding file against a tree; exit 0 only if it embeds.
    Verify(VerifyArgs),
    /// Analytic and Monte Carlo checks; exit 0 only if asserted bounds hold.
    Check(CheckArgs),
    /// Run the (norm, N, delta, m) success-probability sweep.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenTreeArgs {
    /// One of: complete, binary, part-a, random, path.
    #[arg(long)]
    kind: String,
    /// Degree bound (complete/part-a/random kinds).
    #[arg(long, default_value_t = 3)]
    delta: usize,
    /// Vertex count (part-a, random, path, binary).
    #[arg(long)]
    n: Option<usize>,
    /// Height (complete, binary).
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Norm descriptor: lp:<p> | lp:inf | polytope:<csv> | ellipsoid:<csv>.
    #[arg(long)]
    norm: String,
    #[arg(long, default_value = "practical")]
    mode: String,
    /// Dimension override (practical mode; lp kinds need it or the mode default).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// draw = single sample of the random embedding; mt = resample until valid.
    #[arg(long, default_value = "draw")]
    strategy: String,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: u64,
    #[arg(long, default_value_t = 1e-9)]
    margin: f64,
    /// Practical-mode regularizer scale override.
    #[arg(long)]
    delta_scale: Option<f64>,
    /// Practical-mode short-distance cutoff override.
    #[arg(long)]
    k0: Option<usize>,
    /// Practical-mode event-range scale override.
    #[arg(long)]
    ell0_scale: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    embedding: PathBuf,
    #[arg(long)]
    norm: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Report JSON destination (violation distances to 12 significant digits).
    #[arg(long)]
    report: Option<PathBuf>,
    /// exact | pruned
    #[arg(long, default_value = "exact")]
    scan: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Structural checks: claim42 | lll-condition.
    #[arg(long)]
    what: Option<String>,
    /// Monte Carlo / analytic validators: 3.1 | 3.2 | 3.3 | cases.
    #[arg(long)]
    lemma: Option<String>,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    delta: usize,
    #[arg(long = "N")]
    n: Option<f64>,
    /// ln N, for the astronomically large regime.
    #[arg(long)]
    ln_n: Option<f64>,
    /// Search for the smallest N passing the local-lemma condition.
    #[arg(long, default_value_t = false)]
    find_n0: bool,
    #[arg(long, default_value_t = 0.25)]
    kappa: f64,
    #[arg(long, default_value_t = 2.0)]
    cbl: f64,
    #[arg(long, default_value_t = 0.25)]
    c1: f64,
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = false)]
    exploratory: bool,
    /// l_p exponent for the volume check (inf allowed).
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated dimensions for the volume check.
    #[arg(long)]
    m_list: Option<String>,
    /// Per-dimension volume constant cap.
    #[arg(long, default_value_t = 6.0)]
    cap: f64,
    #[arg(long, default_value = "practical")]
    mode: String,
    /// Also evaluate the packing certificate at this claimed dimension.
    #[arg(long)]
    claimed_m: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Ok(w) = std::env::var("GEOMTREE_WORKERS") {
        if let Ok(k) = w.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::GenTree(a) => gen_tree(a),
        Cmd::Embed(a) => embed_cmd(a),
        Cmd::Verify(a) => verify_cmd(a),
        Cmd::Check(a) => check_cmd(a),
        Cmd::Sweep(a) => sweep_cmd(a),
    }
}

fn load_tree(path: &PathBuf) -> anyhow::Result<Tree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    Ok(Tree::from_json(&text)?)
}

fn load_space(desc: &str, dim: usize, seed: u64) -> anyhow::Result<NormedSpace> {
    Ok(NormedSpace::from_descriptor(desc, dim, 100_000, seed)?)
}

fn gen_tree(a: GenTreeArgs) -> anyhow::Result<i32> {
    let mut info = serde_json::Map::new();
    let tree = match a.kind.as_str() {
        "complete" => {
            let h = a.height.context("--height required for kind complete")?;
            Tree::complete(a.delta, h)?
        }
        "binary" => match (a.height, a.n) {
            (Some(h), _) => Tree::complete_ary(2, h)?,
            (None, Some(n)) => experiments::build_tree("binary", n, a.delta, a.seed)?,
            _ => bail!("--height or --n required for kind binary"),
        },
        "part-a" => {
            let n = a.n.context("--n required for kind part-a")?;
            let (t, h0) = Tree::part_a(a.delta, n)?;
            info.insert("h0".into(), serde_json::json!(h0));
            t
        }
        "random" => {
            let n = a.n.context("--n required for kind random")?;
            let mut rng = geomtree::rng::stream(a.seed, 0, geomtree::rng::StreamKind::Aux, 7);
            Tree::random(n, a.delta, &mut rng)?
        }
        "path" => {
            let n = a.n.context("--n required for kind path")?;
            Tree::path_graph(n)?
        }
        other => bail!("unknown tree kind {other:?}"),
    };
    std::fs::write(&a.out, tree.to_json())?;
    info.insert("kind".into(), serde_json::json!(a.kind));
    info.insert("n".into(), serde_json::json!(tree.n()));
    info.insert("max_degree".into(), serde_json::json!(tree.max_degree()));
    info.insert("out".into(), serde_json::json!(a.out));
    println!("{}", serde_json::Value::Object(info));
    Ok(0)
}

fn embed_cmd(a: EmbedArgs) -> anyhow::Result<i32> {
    let tree = load_tree(&a.tree)?;
    let mode: Mode = a.mode.parse()?;
    let overrides = Overrides {
        m: a.dim,
        k0: a.k0,
        delta_scale: a.delta_scale,
        ell0_scale: a.ell0_scale,
    };
    let params = derive_params(tree.n(), tree.max_degree().max(3), mode, overrides, ConstantsConfig::default())?;
    let space = load_space(&a.norm, params.m, a.seed)?;

    match a.strategy.as_str() {
        "draw" => {
            let state = embedder::embed(&tree, &space, &params, a.seed)?;
            let mut buf = Vec::new();
            state.write_csv(&a.norm, &mut buf)?;
            std::fs::write(&a.out, buf)?;
            println!(
                "{}",
                serde_json::json!({
                    "strategy": "draw", "n": tree.n(), "m": params.m,
                    "norm": a.norm, "seed": a.seed, "out": a.out,
                })
            );
            Ok(0)
        }
        "mt" => {
            let opts = lll::MtOptions {
                max_rounds: a.max_rounds,
                margin: a.margin,
                ..Default::default()
            };
            let run = lll::moser_tardos_embed(&tree, &space, &params, a.seed, &opts)?;
            let success = run.outcome == lll::MtOutcome::Success;
            if success {
                let mut buf = Vec::new();
                run.state.write_csv(&a.norm, &mut buf)?;
                std::fs::write(&a.out, buf)?;
            }
            println!(
                "{}",
                serde_json::json!({
                    "strategy": "mt", "n": tree.n(), "m": params.m,
                    "norm": a.norm, "seed": a.seed,
                    "outcome": if success { "success" } else { "exhausted" },
                    "rounds": run.rounds,
                    "open_violations": run.final_report.total(),
                    "out": if success { Some(&a.out) } else { None },
                })
            );
            Ok(if success { 0 } else { 1 })
        }
        other => bail!("unknown strategy {other:?} (draw | mt)"),
    }
}

fn verify_cmd(a: VerifyArgs) -> anyhow::Result<i32> {
    let tree = load_tree(&a.tree)?;
    let text = std::fs::read_to_string(&a.embedding)?;
    let (points, meta) = embedder::read_embedding_csv(&text)?;
    let desc = a
        .norm
        .or(meta.norm)
        .context("norm descriptor missing: pass --norm or embed with headers")?;
    let m = meta.m.or_else(|| points.first().map(|p| p.len())).unwrap_or(0);
    let space = load_space(&desc, m, meta.seed.unwrap_or(0))?;
    let mode = match a.scan.as_str() {
        "exact" => VerifyMode::Exact,
        "pruned" => VerifyMode::Pruned,
        other => bail!("unknown scan mode {other:?}"),
    };
    let report = verifier::verify(&points, &tree, &space, &VerifyOptions { margin: a.margin, mode })?;
    if let Some(path) = &a.report {
        let rounded = report.rounded(12);
        std::fs::write(path, serde_json::to_string_pretty(&rounded)?)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "embeds": report.is_empty(),
            "edge_violations": report.edge_violations.len(),
            "nonedge_violations": report.nonedge_violations.len(),
            "pairs_evaluated": report.pairs_evaluated,
        })
    );
    Ok(if report.is_empty() { 0 } else { 1 })
}

fn parse_p(s: &str) -> anyhow::Result<f64> {
    if s == "inf" {
        Ok(f64::INFINITY)
    } else {
        Ok(s.parse::<f64>()?)
    }
}

fn check_cmd(a: CheckArgs) -> anyhow::Result<i32> {
    let code = check_dispatch(&a)?;
    if let Some(claimed_m) = a.claimed_m {
        let n = a.n.context("--N required with --claimed-m")? as usize;
        let cert = verifier::packing_certificate(a.delta, n, claimed_m)?;
        println!("{}", serde_json::to_string_pretty(&cert)?);
    }
    Ok(code)
}

fn check_dispatch(a: &CheckArgs) -> anyhow::Result<i32> {
    match (&a.what, &a.lemma) {
        (Some(_), Some(_)) | (None, None) => {
            bail!("pass exactly one of --what {{claim42|lll-condition}} or --lemma {{3.1|3.2|3.3|cases}}")
        }
        (Some(what), None) => match what.as_str() {
            "claim42" => {
                let tree = load_tree(a.tree.as_ref().context("--tree required")?)?;
                let n_for_ell0 = a.n.unwrap_or(tree.n() as f64).max(8.0);
                let ell0 = (n_for_ell0.ln().powf(0.25_f64.min(a.kappa / 4.0))).exp();
                let report = lll::check_claim42(&tree, ell0, a.delta)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(if report.holds() { 0 } else { 1 })
            }
            "lll-condition" => {
                let constants = ConstantsConfig {
                    kappa: a.kappa,
                    cb_l_product: a.cbl,
                    thinshell_c: 1.0,
                };
                if a.find_n0 {
                    let report = lll::smallest_passing_n(a.delta, a.c1, constants)?;
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    return Ok(0);
                }
                let ln_n = match (a.ln_n, a.n) {
                    (Some(x), _) => x,
                    (None, Some(n)) => n.ln(),
                    _ => bail!("--N or --ln-n required (or use --find-n0)"),
                };
                let inputs = lll::LllInputs { ln_n, delta: a.delta, c1: a.c1, constants };
                let report = lll::check_lll_condition(&inputs, &lll::ProbBounds::Analytic)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(0)
            }
            other => bail!("unknown check {other:?}"),
        },
        (None, Some(lemma)) => match lemma.as_str() {
            "3.1" => {
                let p = parse_p(a.p.as_deref().unwrap_or("2"))?;
                let m_list: Vec<usize> = match &a.m_list {
                    Some(s) => s
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<Result<_, _>>()?,
                    None => (1..=64).collect(),
                };
                let report = experiments::check_volume_bound(p, &m_list, a.cap)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(if report.bounded { 0 } else { 1 })
            }
            "3.2" => {
                let desc = a.norm.as_deref().unwrap_or("lp:2");
                let dim = a.dim.context("--dim required for lemma 3.2")?;
                let k = a.k.context("--k required for lemma 3.2")?;
                let constants =
                    ConstantsConfig { kappa: a.kappa, cb_l_product: a.cbl, thinshell_c: 1.0 };
                let space = load_space(desc, dim, a.seed)?;
                let report = experiments::mc_lemma_sum_long(
                    &space,
                    k,
                    a.c1,
                    a.trials,
                    a.seed,
                    &constants,
                    a.exploratory,
                )?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(if report.consistent || report.caveat.is_some() { 0 } else { 1 })
            }
            "3.3" => {
                let desc = a.norm.as_deref().unwrap_or("lp:2");
                let dim = a.dim.context("--dim required for lemma 3.3")?;
                let k = a.k.context("--k required for lemma 3.3")?;
                let space = load_space(desc, dim, a.seed)?;
                let report =
                    experiments::mc_lemma_sum_short(&space, k, a.kappa, a.trials, a.seed)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(if report.consistent || report.caveat.is_some() { 0 } else { 1 })
            }
            "cases" => {
                let tree = load_tree(a.tree.as_ref().context("--tree required")?)?;
                let mode: Mode = a.mode.parse()?;
                let overrides = Overrides { m: a.dim, ..Default::default() };
                let constants =
                    ConstantsConfig { kappa: a.kappa, cb_l_product: a.cbl, thinshell_c: 1.0 };
                let params = derive_params(
                    tree.n(),
                    tree.max_degree().max(3),
                    mode,
                    if mode == Mode::Theory { Overrides::default() } else { overrides },
                    constants,
                )?;
                let desc = a.norm.as_deref().unwrap_or("lp:2");
                let space = load_space(desc, params.m, a.seed)?;
                let report =
                    experiments::mc_case_bounds(&tree, &space, &params, a.trials, a.seed)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(0)
            }
            other => bail!("unknown lemma {other:?}"),
        },
    }
}

fn sweep_cmd(a: SweepArgs) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&a.config)?;
    let config: experiments::SweepConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {:?}", a.config))?;
    let summary = experiments::sweep(&config, &a.out)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(0)
}
