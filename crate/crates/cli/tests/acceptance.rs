//! Acceptance run: one PASS/FAIL line per criterion, with supporting
//! detail lines indented below it. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tempfile::TempDir;
use toi_core::analytic::{self, optimal_rate, stage_delays};
use toi_core::optimizer::{random_instance, reference, run_baseline, solve_p1, verify_multiconvexity, InstanceSpec, P1Options, Strategy};
use toi_core::sim::{self, Model};
use toi_core::{DeviceProfile, Error, GmParams, MultiSourceRates, SimConfig, SimEstimate, TandemRates, ZeroWaitVariant};

const TASKS: usize = 1_000_000;
const SIM_TOL: f64 = 0.01;

struct Verdict {
    pass: bool,
    detail: Vec<String>,
}

impl Verdict {
    fn new(pass: bool) -> Self {
        Self { pass, detail: vec![] }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.detail.push(s.into());
        self
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn toi_sim(model: Model, zero_wait: bool, seed: u64) -> SimEstimate {
    let mut cfg = SimConfig::new(TASKS, seed);
    if zero_wait {
        cfg = cfg.zero_wait();
    }
    sim::simulate_toi(model, &cfg).unwrap()
}

/// Counts points within tolerance and reports the worst one.
fn agreement(label: &str, pairs: &[(f64, f64)]) -> (bool, String) {
    let errs: Vec<f64> = pairs.iter().map(|&(sim, want)| rel(sim, want)).collect();
    let ok = errs.iter().filter(|&&e| e <= SIM_TOL).count();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    (ok == pairs.len(), format!("{label}: {ok}/{} within 1%, worst rel. error {worst:.4}", pairs.len()))
}

fn criterion_1() -> Verdict {
    let mut r = rng(1);
    let edge: Vec<TandemRates> = (0..20)
        .map(|_| {
            let (t, c) = (r.random_range(2.0..10.0), r.random_range(2.0..10.0));
            TandemRates::new(r.random_range(0.1..0.8) * f64::min(t, c), t, c)
        })
        .collect();
    let zw: Vec<(f64, f64)> = (0..20)
        .map(|_| {
            let t = r.random_range(1.0..8.0);
            (t, t / r.random_range(0.3..0.8))
        })
        .collect();
    let mut fog = vec![];
    while fog.len() < 20 {
        let p = MultiSourceRates::new(r.random_range(0.5..4.0), r.random_range(0.5..3.0), 5.0, 9.0);
        if p.total_lambda() <= 0.8 * p.mu_c {
            fog.push(p);
        }
    }
    let fog_zw: Vec<(f64, f64, f64)> = (0..20)
        .map(|_| {
            let c = r.random_range(4.0..10.0);
            let load = r.random_range(0.3..0.8) * c;
            let t = r.random_range(0.3..0.9) * load;
            (t, c, load - t)
        })
        .collect();

    let e: Vec<(f64, f64)> = edge
        .par_iter()
        .enumerate()
        .map(|(i, &p)| (toi_sim(Model::Edge(p), false, 1000 + i as u64).mean, analytic::toi_edge(p).unwrap()))
        .collect();
    let z: Vec<(f64, f64, f64)> = zw
        .par_iter()
        .enumerate()
        .map(|(i, &(t, c))| {
            let s = toi_sim(Model::Edge(TandemRates::new(0.0, t, c)), true, 2000 + i as u64).mean;
            (s, analytic::toi_edge_zero_wait(t, c).unwrap(), analytic::toi_edge_zero_wait_exact(t, c).unwrap())
        })
        .collect();
    let f: Vec<(f64, f64)> = fog
        .par_iter()
        .enumerate()
        .map(|(i, &p)| (toi_sim(Model::Fog(p), false, 3000 + i as u64).mean, analytic::toi_fog(p).unwrap()))
        .collect();
    let fz: Vec<(f64, f64, f64)> = fog_zw
        .par_iter()
        .enumerate()
        .map(|(i, &(t, c, o))| {
            let s = toi_sim(Model::Fog(MultiSourceRates::new(0.0, o, t, c)), true, 4000 + i as u64).mean;
            (s, analytic::toi_fog_zero_wait(t, c, o).unwrap(), analytic::toi_fog_zero_wait_exact(t, c, o).unwrap())
        })
        .collect();

    let printed = |v: &[(f64, f64, f64)]| v.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>();
    let exact = |v: &[(f64, f64, f64)]| v.iter().map(|x| (x.0, x.2)).collect::<Vec<_>>();
    let parts = [
        agreement("edge, stochastic", &e),
        agreement("edge, zero-wait (published form)", &printed(&z)),
        agreement("fog, stochastic", &f),
        agreement("fog, zero-wait (published form)", &printed(&fz)),
    ];
    let mut v = Verdict::new(parts.iter().all(|p| p.0));
    for p in parts {
        v = v.note(p.1);
    }
    let (a, s) = agreement("info: edge, zero-wait (exact form)", &exact(&z));
    let (b, t) = agreement("info: fog, zero-wait (exact form)", &exact(&fz));
    v.note(format!("{s} [{}]", if a { "ok" } else { "off" }))
        .note(format!("{t} [{}]", if b { "ok" } else { "off" }))
}

fn criterion_2() -> Verdict {
    let mut r = rng(2);
    let mut pts = vec![(TandemRates::new(2.0, 5.0, 8.0), GmParams::new(1.0, 1.0))];
    while pts.len() < 10 {
        let (t, c) = (r.random_range(2.0..10.0), r.random_range(2.0..10.0));
        let p = TandemRates::new(r.random_range(0.1..0.8) * f64::min(t, c), t, c);
        pts.push((p, GmParams::new(r.random_range(0.5..2.0), r.random_range(0.2..3.0))));
    }
    let pairs: Vec<(f64, f64)> = pts
        .par_iter()
        .enumerate()
        .map(|(i, &(p, gm))| {
            let e = sim::simulate_vtoi(Model::Edge(p), gm, &SimConfig::new(TASKS, 5000 + i as u64)).unwrap();
            (e.mean, analytic::vtoi_edge(p, gm).unwrap())
        })
        .collect();
    let reference = pairs[0].1;
    let (ok, s) = agreement("process-related ToI", &pairs);
    let pinned = (reference - 0.540_270_429_159_317_9).abs() < 1e-12;
    Verdict::new(ok && pinned)
        .note(s)
        .note(format!("(2, 5, 8, 1, 1): closed form {reference}, simulated {}", pairs[0].0))
}

fn criterion_3() -> Verdict {
    let gm = GmParams::new(1.0, 1.0);
    let mut cfg = SimConfig::new(TASKS, 6000).zero_wait();
    cfg.replications = 4;
    let e = sim::simulate_vtoi(Model::Edge(TandemRates::new(0.0, 5.0, 8.0)), gm, &cfg).unwrap();
    let printed = analytic::vtoi_edge_zero_wait(5.0, 8.0, gm, ZeroWaitVariant::Printed).unwrap();
    let corrected = analytic::vtoi_edge_zero_wait(5.0, 8.0, gm, ZeroWaitVariant::Corrected).unwrap();
    let in_range = (0.0..=1.0).contains(&e.mean);
    let matches = rel(e.mean, corrected) <= SIM_TOL;
    let widths = (e.mean - printed).abs() / e.half_width_95;
    Verdict::new(in_range && matches && widths > 50.0)
        .note(format!("simulated {} +/- {}", e.mean, e.half_width_95))
        .note(format!("corrected {corrected} (rel. error {:.5})", rel(e.mean, corrected)))
        .note(format!("published {printed}, {widths:.0} half-widths away"))
}

fn criterion_4() -> Verdict {
    let mut r = rng(4);
    let mut worst = [0.0f64; 3];
    let mut worst_exact_zw = 0.0f64;
    for _ in 0..100 {
        let (t, c) = (r.random_range(0.5..10.0), r.random_range(0.5..10.0));
        let l = r.random_range(0.05..0.95) * f64::min(t, c);
        let a = analytic::toi_fog(MultiSourceRates::new(l, 0.0, t, c)).unwrap();
        worst[0] = worst[0].max(rel(a, analytic::toi_edge(TandemRates::new(l, t, c)).unwrap()));

        let (zt, zc) = (t.min(c), t.max(c) * r.random_range(1.05..2.0));
        let b = analytic::toi_fog_zero_wait(zt, zc, 0.0).unwrap();
        worst[1] = worst[1].max(rel(b, analytic::toi_edge_zero_wait(zt, zc).unwrap()));
        let bx = analytic::toi_fog_zero_wait_exact(zt, zc, 0.0).unwrap();
        worst_exact_zw = worst_exact_zw.max(rel(bx, analytic::toi_edge_zero_wait_exact(zt, zc).unwrap()));

        let classic = 1.0 / t + 1.0 / l + l * l / (t * t * (t - l));
        worst[2] = worst[2].max(rel(analytic::toi_edge(TandemRates::new(l, t, 1e14)).unwrap(), classic));
    }
    Verdict::new(worst.iter().all(|&w| w <= 1e-12))
        .note(format!("fog at no interference vs edge: worst rel. {:.2e}", worst[0]))
        .note(format!("fog zero-wait at no interference vs edge zero-wait: worst rel. {:.2e}", worst[1]))
        .note(format!("edge at mu_c = 1e14 vs single M/M/1 age: worst rel. {:.2e}", worst[2]))
        .note(format!("info: same reduction for the exact zero-wait forms: worst rel. {worst_exact_zw:.2e}"))
}

fn criterion_5() -> Verdict {
    let grid: Vec<f64> = (0..=80).map(|k| 0.5 + 0.05 * k as f64).collect();
    let toi: Vec<f64> = grid.iter().map(|&l| analytic::toi_edge(TandemRates::new(l, 5.0, 6.0)).unwrap()).collect();
    let delays: Vec<(f64, f64)> = grid.iter().map(|&l| stage_delays(TandemRates::new(l, 5.0, 6.0)).unwrap()).collect();
    let k = toi.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let interior = k > 0 && k < grid.len() - 1;
    let falls = toi[..=k].windows(2).all(|w| w[1] < w[0]);
    let rises = toi[k..].windows(2).all(|w| w[1] > w[0]);
    let increasing = delays.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    Verdict::new(interior && falls && rises && increasing)
        .note(format!("minimum {} at lambda = {:.2}", toi[k], grid[k]))
        .note(format!("stage delays strictly increasing: {increasing}"))
}

fn criterion_6() -> Verdict {
    let (_, best) = optimal_rate(2.0, 6.0).unwrap();
    let zw = analytic::toi_edge_zero_wait(2.0, 6.0).unwrap();
    let low = zw < best && (best - 1.928_575_899_315_406).abs() < 1e-9 && (zw - 1.25).abs() < 1e-12;
    let mut v = Verdict::new(low).note(format!("mu_t = 2: zero-wait {zw} vs best stochastic {best}"));
    for t in [5.5, 5.6, 5.7, 5.8, 5.9, 5.95] {
        let (_, b) = optimal_rate(t, 6.0).unwrap();
        let z = analytic::toi_edge_zero_wait(t, 6.0).unwrap();
        v.pass &= z > b;
        v = v.note(format!("mu_t = {t}: zero-wait {z:.4} vs best stochastic {b:.4}"));
    }
    v
}

fn criterion_7() -> Verdict {
    let mut r = rng(7);
    let mut ok = 0;
    for _ in 0..100 {
        let (t, c) = (r.random_range(0.5..10.0), r.random_range(0.5..10.0));
        let l = r.random_range(0.05..0.95) * f64::min(t, c);
        ok += verify_multiconvexity(l, t, c).unwrap().all_ok() as usize;
    }
    let rep = verify_multiconvexity(2.0, 5.0, 8.0).unwrap();
    let published = 0.597_61;
    let fd_vs_published = rel(rep.d2_lambda_fd, published);
    Verdict::new(ok == 100 && fd_vs_published <= 1e-4)
        .note(format!("multiconvexity checks: {ok}/100"))
        .note(format!(
            "(2, 5, 8): finite difference {} vs published {published}, rel. {fd_vs_published:.3}",
            rep.d2_lambda_fd
        ))
        .note(format!("info: exact second derivative {} (rel. {:.1e})", rep.d2_lambda_exact, rel(rep.d2_lambda_fd, rep.d2_lambda_exact)))
}

fn spread(d: &[f64]) -> f64 {
    d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min)
}

fn criterion_8() -> Verdict {
    let spec = InstanceSpec::default();
    let rows: Vec<(usize, f64, f64, bool, f64)> = (0..10u64)
        .into_par_iter()
        .map(|k| {
            let m = 2 + (k % 2) as usize;
            let (ps, b) = random_instance(&spec, m, 800 + k);
            let r = solve_p1(&ps, &b, P1Options::default()).unwrap();
            let (grid, _) = reference::grid_search_p1(&ps, &b, 50, 4).unwrap();
            let mono = r.history.windows(2).all(|w| w[1] <= w[0]);
            let a = r.allocation;
            (m, a.tau, grid, mono, spread(&a.delta) / a.tau)
        })
        .collect();
    let close = rows.iter().all(|x| rel(x.1, x.2) <= 0.02);
    let mono = rows.iter().all(|x| x.3);
    let fair = rows.iter().all(|x| x.4 <= 1e-4);
    let worst = rows.iter().map(|x| rel(x.1, x.2)).fold(0.0, f64::max);
    let worst_spread = rows.iter().map(|x| x.4).fold(0.0, f64::max);
    Verdict::new(close && mono && fair)
        .note(format!("worst rel. gap to grid search {worst:.2e} over 10 instances"))
        .note(format!("histories non-increasing: {mono}; worst spread / tau {worst_spread:.2e}"))
}

fn criterion_9() -> Verdict {
    let spec = InstanceSpec::default();
    let jobs: Vec<(usize, u64)> = [5, 10, 15, 20].iter().flat_map(|&m| (0..10).map(move |s| (m, 900 + 37 * m as u64 + s))).collect();
    let rows: Vec<(usize, bool, bool, f64)> = jobs
        .par_iter()
        .map(|&(m, seed)| {
            let (ps, b) = random_instance(&spec, m, seed);
            let tau = solve_p1(&ps, &b, P1Options::default()).unwrap().allocation.tau;
            let mut dominates = true;
            let mut best_baseline = (f64::INFINITY, Strategy::ProportionalUniform);
            for s in Strategy::ALL {
                let t = match run_baseline(s, &ps, &b) {
                    Ok(a) => a.tau,
                    Err(Error::Infeasible { .. }) => f64::INFINITY,
                    Err(e) => panic!("{s:?}: {e}"),
                };
                dominates &= tau <= t * (1.0 + 1e-9);
                if t < best_baseline.0 {
                    best_baseline = (t, s);
                }
            }
            let pu = run_baseline(Strategy::ProportionalUniform, &ps, &b).map_or(f64::INFINITY, |a| a.tau);
            // best among all strategies including the proposed one
            let pu_best = pu <= tau.min(best_baseline.0) && best_baseline.1 == Strategy::ProportionalUniform;
            (m, dominates, pu_best, tau / pu)
        })
        .collect();
    let dom = rows.iter().filter(|r| r.1).count();
    let pu_best = rows.iter().filter(|r| r.2).count();
    let mut v = Verdict::new(dom == rows.len() && pu_best == 0)
        .note(format!("proposed <= every baseline: {dom}/{}", rows.len()))
        .note(format!("proportional-uniform best: {pu_best}/{}", rows.len()));
    for m in [5, 10, 15, 20] {
        let rs: Vec<f64> = rows.iter().filter(|r| r.0 == m).map(|r| r.3).collect();
        v = v.note(format!("M = {m}: mean tau ratio to proportional-uniform {:.3}", rs.iter().sum::<f64>() / rs.len() as f64));
    }
    v
}

fn criterion_10() -> Verdict {
    let b = InstanceSpec::default().budget();
    let strong = DeviceProfile::new(0.25, 4e-6, 30.0, 150.0);
    let mut v = Verdict::new(true);
    for ratio in [1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0] {
        let weak = toi_cli::optimize::weaker(&strong, &b, ratio);
        let a = solve_p1(&[strong, weak], &b, P1Options::default()).unwrap().allocation;
        let lr = a.lambda[0] / a.lambda[1];
        v.pass &= a.beta[1] > a.beta[0] && (0.9..=1.1).contains(&lr);
        v = v.note(format!("ratio {ratio}: beta {:.4} / {:.4}, lambda ratio {lr:.4}", a.beta[0], a.beta[1]));
    }
    v
}

fn toi_bin(args: &[&str], threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_toi"))
        .args(args)
        .env("TOI_THREADS", threads)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_11() -> Verdict {
    let d = TempDir::new().unwrap();
    let w = |name: &str, body: &str| {
        let p = d.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let analyze = w("a.json", r#"{"kind":"edge","rates":{"lambda":2,"mu_t":5,"mu_c":8},"gm":{"sigma":1,"kappa":1}}"#);
    let sweep = w(
        "s.json",
        r#"{"kind":"fog","rates":{"lambda_i":1,"lambda_other":1,"mu_it":4,"mu_c":8},
            "sweep":{"axes":[{"param":"lambda_i","values":[0.5,1,2]},{"param":"lambda_other","values":[0,2]}],"metrics":["toi"],"simulate":true}}"#,
    );
    let optimize = w("o.json", r#"{"optimizer":{"random":{"devices":6,"seed":11}}}"#);
    let runs: [(&str, &Path, &[&str], &[&str]); 4] = [
        ("analyze", &analyze, &[], &["json"]),
        ("compare", &analyze, &["--tasks", "50000", "--seed", "4"], &["json"]),
        ("sweep", &sweep, &["--tasks", "20000", "--seed", "5", "--replications", "2"], &["csv"]),
        ("optimize", &optimize, &[], &["json", "csv"]),
    ];
    let mut v = Verdict::new(true);
    for (cmd, cfg, extra, exts) in runs {
        let mut outs = vec![];
        for (rep, threads) in ["1", "4"].iter().enumerate() {
            let out = d.path().join(format!("{cmd}_{rep}.{}", exts[0]));
            let mut a = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
            a.extend_from_slice(extra);
            v.pass &= toi_bin(&a, threads);
            outs.push(exts.iter().map(|e| std::fs::read(out.with_extension(e)).unwrap_or_default()).collect::<Vec<_>>());
        }
        let same = outs[0] == outs[1] && outs[0].iter().all(|b| !b.is_empty());
        v.pass &= same;
        v = v.note(format!("{cmd}: byte-identical across runs and thread counts: {same}"));
    }
    v
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("formula vs simulation", criterion_1),
        ("process-related agreement", criterion_2),
        ("zero-wait MSE adjudication", criterion_3),
        ("reductions", criterion_4),
        ("rate sweep shape", criterion_5),
        ("zero-wait crossover", criterion_6),
        ("convexity", criterion_7),
        ("optimizer vs grid search", criterion_8),
        ("baseline dominance", criterion_9),
        ("channel-ratio sweep", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        println!("criterion {:>2} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" });
        for d in &v.detail {
            println!("    {d}");
        }
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
