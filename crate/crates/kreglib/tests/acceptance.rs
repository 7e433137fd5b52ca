//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use kreglib::records::{read_csv, SizeRow};
use kreglib::{build, build_sizes, RunConfig};
use kreglib_core::library::{run_cc, run_wm, PipelineParams, SizeLibrary};
use kreglib_core::metrics::{
    clustering_coefficient, closeness_mean, edge_betweenness_mean, eigenvector_mean, known_quartic_count,
    max_clustering, mean_graph_distance, population_estimate_log10, vertex_betweenness_mean, LogBase,
};
use kreglib_core::pairing::{uniform_regular, DEFAULT_MAX_ATTEMPTS};
use kreglib_core::seed::rng_from_seed;
use kreglib_core::{cave_chain, Graph};

type Outcome = Result<String, String>;

const BIN: &str = env!("CARGO_BIN_EXE_kreglib");

fn desk(n: Vec<usize>, seed: u64, out: &Path) -> RunConfig {
    RunConfig { n, per_bin_target: 200, seed, out: out.to_path_buf(), ..RunConfig::default() }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kreglib(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn census_n10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("lib");
    let out_s = out.to_str().unwrap();
    let run = kreglib(&["build", "--n", "10", "--k", "4", "--seed", "1", "--out", out_s]);
    if !run.status.success() {
        return Err(format!("build failed: {}", String::from_utf8_lossy(&run.stderr)));
    }
    let sizes: Vec<SizeRow> = read_csv(&out.join("sizes.csv")).map_err(|e| e.to_string())?;
    let s = &sizes[0];
    let verified = kreglib(&["verify", "--lib", out_s]).status.success();
    check(
        s.merged == 59 && s.final_size == 59 && s.census_attempts >= 1_000_000 && verified,
        format!(
            "{} classes found, {} in the library, {} census attempts, last 1000000 without a new class, verify ok = {verified}",
            s.merged, s.final_size, s.census_attempts
        ),
    )
}

fn chi_max_attained() -> Outcome {
    let mut worst = 0.0f64;
    for n in [10, 15, 20, 25, 30, 50] {
        let chi = clustering_coefficient(&cave_chain(n, 4).unwrap()).unwrap();
        worst = worst.max((chi - 0.7).abs());
    }
    let params = PipelineParams { per_bin_target: 100, wm_draws: Some(500), ..PipelineParams::default() };
    let mut highest = 0.0f64;
    let mut graphs = 0;
    for n in [10, 15, 20, 25, 30, 50] {
        for run in 0..3 {
            for e in run_cc(n, &params, 2, run).unwrap().entries {
                highest = highest.max(e.chi);
                graphs += 1;
            }
        }
        for e in run_wm(n, &params, 2).unwrap() {
            highest = highest.max(e.chi);
            graphs += 1;
        }
    }
    check(
        worst <= 1e-12 && highest <= max_clustering(4) + 1e-12,
        format!("cave chains |chi - 0.7| <= {worst:.1e}; max chi over {graphs} generated graphs {highest:.15}"),
    )
}

fn r_squared(observed: &[f64], predicted: &[f64]) -> (f64, f64) {
    let m = observed.len() as f64;
    let (mo, mp) = (observed.iter().sum::<f64>() / m, predicted.iter().sum::<f64>() / m);
    let sxy: f64 = observed.iter().zip(predicted).map(|(o, p)| (o - mo) * (p - mp)).sum();
    let sxx: f64 = observed.iter().map(|o| (o - mo).powi(2)).sum();
    let syy: f64 = predicted.iter().map(|p| (p - mp).powi(2)).sum();
    let ss_res: f64 = observed.iter().zip(predicted).map(|(o, p)| (o - p).powi(2)).sum();
    (sxy * sxy / (sxx * syy), 1.0 - ss_res / sxx)
}

fn population_formula() -> Outcome {
    let ns: Vec<usize> = (10..=18).collect();
    let observed: Vec<f64> = ns.iter().map(|&n| (known_quartic_count(n).unwrap() as f64).log10()).collect();
    let predicted: Vec<f64> = ns.iter().map(|&n| population_estimate_log10(n, LogBase::Natural)).collect();
    let (r2, identity) = r_squared(&observed, &predicted);
    let at = |n| population_estimate_log10(n, LogBase::Natural);
    let magnitudes = [(20, 11.2), (30, 23.2), (50, 49.8)];
    let close = magnitudes.iter().all(|&(n, target)| (at(n) - target).abs() <= 0.5);
    check(
        r2 >= 0.999 && close,
        format!(
            "R^2 (n = 10..18) = {r2:.5} [1 - SSres/SStot against the identity line = {identity:.5}]; log10 estimates {:.2} / {:.2} / {:.2} at n = 20 / 30 / 50",
            at(20),
            at(30),
            at(50)
        ),
    )
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn centrality_identities() -> Outcome {
    let params = PipelineParams { batch_cap: 20, ..PipelineParams::default() };
    let mut worst_vb = 0.0f64;
    let mut worst_eb = 0.0f64;
    let mut worst_ev = 0.0f64;
    let mut corr = Vec::new();
    for n in [10, 15, 20] {
        // half uniform, half from walks, to span the clustering range
        let mut rng = rng_from_seed(n as u64);
        let mut graphs: Vec<Graph> =
            (0..500).map(|_| uniform_regular(n, 4, DEFAULT_MAX_ATTEMPTS, &mut rng).unwrap()).collect();
        let mut run = 0;
        while graphs.len() < 1000 {
            graphs.extend(run_cc(n, &params, 4, run).unwrap().entries.into_iter().map(|e| e.graph));
            run += 1;
        }
        graphs.truncate(1000);
        let (mut closeness, mut inverse) = (Vec::new(), Vec::new());
        for g in &graphs {
            let l = mean_graph_distance(g).unwrap();
            let nf = n as f64;
            worst_vb = worst_vb.max((vertex_betweenness_mean(g).unwrap() - (nf - 1.0) * (l - 1.0)).abs());
            worst_eb = worst_eb.max((edge_betweenness_mean(g).unwrap() - 2.0 * (nf - 1.0) * l / 4.0).abs());
            worst_ev = worst_ev.max((eigenvector_mean(g).unwrap() - 1.0 / nf).abs());
            closeness.push(closeness_mean(g).unwrap());
            inverse.push(1.0 / l);
        }
        corr.push(pearson(&closeness, &inverse));
    }
    let min_corr = corr.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        worst_vb <= 1e-9 && worst_eb <= 1e-9 && worst_ev <= 1e-12 && min_corr >= 0.98,
        format!(
            "3000 graphs: max vertex-betweenness error {worst_vb:.1e}, edge {worst_eb:.1e}, eigenvector {worst_ev:.1e}; closeness vs 1/l r = {:.4} / {:.4} / {:.4}",
            corr[0], corr[1], corr[2]
        ),
    )
}

fn complementarity() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for seed in [1, 2, 3] {
        let dir = tempfile::tempdir().unwrap();
        let lib = build_sizes(&desk(vec![20], seed, dir.path())).map_err(|e| e.to_string())?.remove(0);
        let wm: Vec<usize> = lib.bins.iter().filter(|b| b.counts.wm_raw > 0).map(|b| b.index).collect();
        let cc: Vec<usize> = lib.bins.iter().filter(|b| b.counts.cc_raw > 0).map(|b| b.index).collect();
        let wm_max = wm.iter().copied().max().unwrap_or(0);
        let wm_high = wm.iter().any(|&b| lib.assigner.bounds(b).0 >= 0.5 - 1e-12);
        let cc_top = cc.iter().any(|&b| lib.assigner.bounds(b).0 >= 0.6 - 1e-12);
        let above = cc.iter().filter(|&&b| b > wm_max).count();
        ok &= !wm_high && cc_top && above >= 10;
        details.push(format!(
            "seed {seed}: WM max chi {:.3}, CC max chi {:.3}, {above} CC bins above WM",
            lib.assigner.bounds(wm_max).1,
            lib.assigner.bounds(cc.iter().copied().max().unwrap_or(0)).1
        ));
    }
    check(ok, details.join("; "))
}

fn subsampling(lib: &SizeLibrary) -> Outcome {
    let (mut bins, mut p_ok, mut skew_ok, mut mean_ok, mut mean_strict) = (0, 0, 0, 0, 0);
    for b in lib.bins.iter().filter(|b| b.merged.len() > 100) {
        let (Some(m), Some(f)) = (b.merged_moments, b.final_moments) else { continue };
        bins += 1;
        p_ok += (f.cvm_p >= m.cvm_p) as usize;
        skew_ok += (f.skewness.abs() <= m.skewness.abs()) as usize;
        let size = b.merged.len() as f64;
        let diff = (f.mean - m.mean).abs();
        // spread of a 100-graph mean drawn without replacement from the merged bin
        let se_batch = m.std_dev / 10.0 * ((size - 100.0) / (size - 1.0)).sqrt();
        mean_ok += (diff <= 2.0 * se_batch) as usize;
        mean_strict += (diff <= 2.0 * m.std_dev / size.sqrt()) as usize;
    }
    check(
        bins > 0 && p_ok == bins && skew_ok * 5 >= bins * 4 && mean_ok == bins,
        format!(
            "{bins} bins over 100: p not lower in {p_ok}, |skewness| not higher in {skew_ok}, mean within 2 SE of a 100-graph batch mean in {mean_ok} [within 2 SE of the merged mean in {mean_strict}]"
        ),
    )
}

fn overlap(n15: &SizeLibrary) -> Outcome {
    let mut n25 = Vec::new();
    for seed in [1, 2, 3] {
        let dir = tempfile::tempdir().unwrap();
        n25.push(build_sizes(&desk(vec![25], seed, dir.path())).map_err(|e| e.to_string())?.remove(0).overlap());
    }
    check(
        n15.overlap() > 0 && n25.iter().all(|&o| o == 0),
        format!("n = 15 overlap {}; n = 25 overlaps {:?} (seeds 1, 2, 3)", n15.overlap(), n25),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lib");
    let cfg = RunConfig { census_window: 100_000, ..desk(vec![10, 15], 8, &out) };
    build(&cfg).map_err(|e| e.to_string())?;
    let first = dir.path().join("first");
    fs::rename(&out, &first).unwrap();
    build(&cfg).map_err(|e| e.to_string())?;
    let same = ["manifest.csv", "bins.csv", "merged.csv", "sizes.csv", "config.json"]
        .iter()
        .all(|f| fs::read(first.join(f)).ok() == fs::read(out.join(f)).ok());
    let mut lines = 0;
    let mut round_trip = true;
    for n in [10, 15] {
        for entry in fs::read_dir(out.join(format!("n{n}"))).unwrap() {
            let text = fs::read_to_string(entry.unwrap().path()).unwrap();
            for line in text.lines() {
                lines += 1;
                let g = kreglib_core::graph6::decode(line, 4).unwrap();
                round_trip &= kreglib_core::graph6::encode(&g).as_deref() == Some(line);
            }
        }
    }
    let verified = kreglib(&["verify", "--lib", out.to_str().unwrap()]).status.success();
    check(
        same && round_trip && verified && lines > 0,
        format!("byte-identical outputs {same}; graph6 round trip over {lines} graphs {round_trip}; verify exit 0 {verified}"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("acceptance {id} {tag} {name}: {detail}");
    };
    report(1, "exhaustive n=10 census", census_n10());
    report(2, "chi_max attainment", chi_max_attained());
    report(3, "population-estimate formula", population_formula());
    report(4, "centrality identities", centrality_identities());
    report(5, "sampler complementarity", complementarity());
    let dir = tempfile::tempdir().unwrap();
    let n15 = build_sizes(&desk(vec![15], 1, dir.path())).map(|mut v| v.remove(0));
    match &n15 {
        Ok(lib) => {
            report(6, "subsampling efficacy", subsampling(lib));
            report(7, "overlap pattern", overlap(lib));
        }
        Err(e) => {
            report(6, "subsampling efficacy", Err(e.to_string()));
            report(7, "overlap pattern", Err(e.to_string()));
        }
    }
    report(8, "determinism and round trip", determinism());
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
