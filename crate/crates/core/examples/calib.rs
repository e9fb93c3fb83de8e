// Scratch calibration harness (not part of the deliverable surface): measures
// per-pair failure rates and MT convergence at the acceptance scale.

use geomtree::embedder::{derive_params, Mode, Overrides};
use geomtree::lll::{moser_tardos_embed, MtOptions, MtOutcome};
use geomtree::normspace::{ConstantsConfig, NormedSpace};
use geomtree::tree::Tree;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let height: usize = if args.len() > 4 { args[4].parse().unwrap() } else { 7 };
    let tree = Tree::complete_ary(2, height).unwrap();
    let n = tree.n();
    println!("tree n={n} maxdeg={}", tree.max_degree());

    let ms: Vec<usize> = if args.len() > 1 {
        args[1].split(',').map(|s| s.parse().unwrap()).collect()
    } else {
        vec![26, 32, 40]
    };
    let delta_scales: Vec<f64> = if args.len() > 2 {
        args[2].split(',').map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0.01]
    };
    let seeds: u64 = if args.len() > 3 { args[3].parse().unwrap() } else { 3 };

    for &m in &ms {
        for &ds in &delta_scales {
            let params = derive_params(
                n,
                3,
                Mode::Practical,
                Overrides { m: Some(m), delta_scale: Some(ds), ..Default::default() },
                ConstantsConfig::default(),
            )
            .unwrap();
            println!(
                "m={m} ds={ds}: shrink={:.4} delta_reg={:.5} ell0={:.3} k0={}",
                params.shrink, params.delta_reg, params.ell0, params.k0
            );
            for norm in ["lp:1", "lp:2", "lp:inf"] {
                let space = NormedSpace::from_descriptor(norm, m, 100_000, 7).unwrap();
                // fresh-draw failure fractions at dist 2 and 3
                use geomtree::verifier::{verify, VerifyMode, VerifyOptions};
                let st = geomtree::embedder::embed(&tree, &space, &params, 12345).unwrap();
                let rep = verify(
                    st.points(),
                    &tree,
                    &space,
                    &VerifyOptions { margin: 1e-9, mode: VerifyMode::Pruned },
                )
                .unwrap();
                let mut by_dist: std::collections::BTreeMap<usize, usize> = Default::default();
                for p in &rep.nonedge_violations {
                    *by_dist.entry(tree.dist(p.u, p.v)).or_default() += 1;
                }
                print!(
                    "  {norm}: fresh edge_viol={} nonedge_by_dist={:?}",
                    rep.edge_violations.len(),
                    by_dist
                );
                // MT runs
                let mut ok = 0;
                let mut rounds_all = Vec::new();
                let t0 = std::time::Instant::now();
                for s in 0..seeds {
                    let run = moser_tardos_embed(
                        &tree,
                        &space,
                        &params,
                        1000 + s,
                        &MtOptions { max_rounds: 100_000, ..Default::default() },
                    )
                    .unwrap();
                    if run.outcome == MtOutcome::Success {
                        ok += 1;
                    }
                    rounds_all.push(run.rounds);
                }
                println!(
                    "  mt {ok}/{seeds} rounds={rounds_all:?} wall={:.1}s",
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }
}
