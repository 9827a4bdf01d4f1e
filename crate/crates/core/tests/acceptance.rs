//! Acceptance criteria 1 to 10. Prints one PASS or FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::qp::qp_oracle;
use common::*;
use profileiq::analysis::{mean_baseline, nrmse_from, random_baseline, random_baseline_loo, rmse, spearman, TargetKind};
use profileiq::cli::{cmd_evaluate, cmd_extract, cmd_synth};
use profileiq::imagefeat::{
    colour_features, composition_features, extract_all, Extractor, FaceBodyAnnotation, FeatureGroup, ImageMatrix,
    FEATURE_DIM,
};
use profileiq::io::{FeatureSet, RunConfig};
use profileiq::pipeline::{mi_category, select_features_mi, select_features_pi};
use profileiq::reliability::{icc_from_groups, icc_one_way, znormalize_raters, RatingsTable};
use profileiq::svr::{solve_dual, svr_train, HyperParams, Kernel, SolverOptions};
use profileiq::synth::{generate, SynthConfig};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

fn c1_dimensions() -> Outcome {
    let start = Instant::now();
    let corpus = generate(&SynthConfig { n_images: 20, seed: 1, ..SynthConfig::default() }).map_err(|e| e.to_string())?;
    let want = [22, 5, 56, 12, 512, 944, 512, 2048];
    for im in &corpus.images {
        let v = extract_all(&im.image, &im.annotation).map_err(|e| e.to_string())?;
        check(v.values().len() == FEATURE_DIM && FEATURE_DIM == 4111, format!("{}: length {}", im.id, v.values().len()))?;
        let lens: Vec<usize> = FeatureGroup::ALL.iter().map(|g| v.group(*g).len()).collect();
        check(lens == want, format!("{}: group lengths {lens:?}", im.id))?;
    }
    let global: usize = FeatureGroup::ALL.iter().filter(|g| !g.is_local()).map(|g| g.len()).sum();
    check(global == 95, format!("global total {global}"))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("20 images x 4111 values, global 95, {:.1} s", start.elapsed().as_secs_f64()))
}

fn c2_icc() -> Outcome {
    let start = Instant::now();
    let records = balanced_ratings(&mut rng(20), 20, 24);
    let z = zscores_oracle(&records);
    let groups: Vec<Vec<f64>> = (0..20).map(|i| z[i * 24..(i + 1) * 24].to_vec()).collect();
    let want = balanced_icc_oracle(&groups);
    let table = znormalize_raters(&RatingsTable::new(records).map_err(|e| e.to_string())?);
    let got = icc_one_way(&table).map_err(|e| e.to_string())?.icc;
    check((got - want).abs() <= 1e-10, format!("oracle {want} vs {got}"))?;

    let mut r = rng(2024);
    let mut total = 0.0;
    for _ in 0..100 {
        total += icc_from_groups(&random_effects_groups(&mut r, 20, 24, 1.0, 1.0)).map_err(|e| e.to_string())?.icc;
    }
    let mean = total / 100.0;
    let target = 1.0 / (1.0 + 1.0 / 24.0);
    check((mean - target).abs() <= 0.02, format!("Monte-Carlo mean {mean:.4} vs {target:.4}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("|diff| {:.1e}; Monte-Carlo mean {mean:.4} (target {target:.4})", (got - want).abs()))
}

fn c3_nrmse() -> Outcome {
    let v = nrmse_from(14.50, &[64.9, 138.6]).map_err(|e| e.to_string())?;
    let want = 14.50 / (138.6 - 64.9);
    check(v == want, format!("{v} vs {want}"))?;
    check(format!("{v:.4}") == "0.1967", format!("4 places: {v:.4}"))?;
    check(format!("{v:.2}") == "0.20", format!("2 places: {v:.2}"))?;
    Ok(format!("NRMSE {v:.4} displays {v:.2}"))
}

fn c4_spearman() -> Outcome {
    let f = |p: &[usize]| p.iter().map(|&v| v as f64).collect::<Vec<_>>();
    let mut pairs = 0usize;
    for n in 3..=5 {
        let perms = permutations(n);
        for a in &perms {
            for b in &perms {
                let got = spearman(&f(a), &f(b)).map_err(|e| e.to_string())?.rho;
                check(got.to_bits() == spearman_permutation_oracle(a, b).to_bits(), format!("{a:?} {b:?}"))?;
                pairs += 1;
            }
        }
    }
    let perms = permutations(6);
    let mut r = rng(6);
    for _ in 0..10_000 {
        let a = &perms[r.random_range(0..720)];
        let b = &perms[r.random_range(0..720)];
        let got = spearman(&f(a), &f(b)).map_err(|e| e.to_string())?.rho;
        check(got.to_bits() == spearman_permutation_oracle(a, b).to_bits(), format!("{a:?} {b:?}"))?;
        pairs += 1;
    }
    Ok(format!("{pairs} pairs bit-identical"))
}

fn c5_svr() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for trial in 0..6 {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| normal(&mut r)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|x| x[0] - 0.5 * x[1] + 0.3 * normal(&mut r)).collect();
        let kernel = if trial % 2 == 0 { Kernel::Rbf { gamma: 0.5 } } else { Kernel::Linear };
        let k = kernel.matrix(&rows);
        let (c, eps) = ([0.5, 1.0, 10.0][trial % 3], [0.05, 0.1, 0.2][trial % 3]);
        let sol = solve_dual(&k, &y, c, eps, SolverOptions::default());
        let oracle = qp_oracle(&k, &y, c, eps);
        worst = worst.max((sol.objective - oracle).abs());
        worst_kkt = worst_kkt.max(sol.kkt_gap);
    }
    check(worst <= 1e-6, format!("objective gap {worst:e}"))?;
    check(worst_kkt <= 1e-3, format!("KKT residual {worst_kkt:e}"))?;

    let x = noise_matrix(&mut r, 12, 4);
    let m = svr_train(&x, &[107.3; 12], HyperParams { c: 1.0, epsilon: 0.1, kernel: Kernel::Rbf { gamma: 0.25 } })
        .map_err(|e| e.to_string())?;
    let probe = noise_matrix(&mut r, 5, 4);
    check(m.predict_rows(&probe).iter().all(|&p| p == 107.3), "constant target not reproduced exactly")?;
    Ok(format!("objective gap {worst:.1e}, KKT {worst_kkt:.1e}, constant exact"))
}

fn eval_config(seed: u64, shuffle: bool) -> RunConfig {
    RunConfig {
        seed,
        target: TargetKind::Mi,
        shuffle_target: shuffle,
        ..RunConfig::default()
    }
}

fn synth_corpus(dir: &Path, n: usize, seed: u64) -> Result<profileiq::io::Manifest, String> {
    let mut cfg = RunConfig { seed, ..RunConfig::default() };
    cfg.synth.n_images = n;
    cfg.synth.seed = seed;
    cmd_synth(&cfg, dir).map_err(|e| e.to_string())
}

fn c6_planted() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = synth_corpus(&tmp.path().join("corpus"), 100, 6)?;
    let feat = tmp.path().join("features");
    let ex = cmd_extract(&manifest, &eval_config(6, false), &feat).map_err(|e| e.to_string())?;
    check(ex.failures.is_empty(), format!("{} extraction failures", ex.failures.len()))?;
    let extracted = start.elapsed().as_secs_f64();
    let set = FeatureSet::load(&feat).map_err(|e| e.to_string())?;
    let real = cmd_evaluate(&set, &manifest, &eval_config(6, false), &tmp.path().join("eval"))
        .map_err(|e| e.to_string())?;
    let shuffled = cmd_evaluate(&set, &manifest, &eval_config(6, true), &tmp.path().join("shuffled"))
        .map_err(|e| e.to_string())?;
    let (rho, null) = (real.report.spearman.rho, shuffled.report.spearman.rho);
    check(rho >= 0.8, format!("LOOCV rho {rho:.3} < 0.8"))?;
    check(null.abs() <= 0.3, format!("shuffled |rho| {:.3} > 0.3", null.abs()))?;
    within(start.elapsed(), 300.0)?;
    Ok(format!(
        "rho {rho:.3}, shuffled {null:.3}, {:.1} s ({extracted:.1} s extraction)",
        start.elapsed().as_secs_f64()
    ))
}

fn c7_baselines() -> Outcome {
    let mut r = rng(77);
    let train: Vec<f64> = (0..1000).map(|_| 100.0 + 15.0 * normal(&mut r)).collect();
    let actual: Vec<f64> = (0..1000).map(|_| 100.0 + 15.0 * normal(&mut r)).collect();
    let b = random_baseline(&train, &actual, 10, 1234).map_err(|e| e.to_string())?;
    check(b.mean_rho.abs() <= 0.1, format!("random baseline mean rho {}", b.mean_rho))?;
    let loo = random_baseline_loo(&actual, 10, 1234).map_err(|e| e.to_string())?;
    check(loo.mean_rho.abs() <= 0.1, format!("leave-one-out random baseline mean rho {}", loo.mean_rho))?;

    let m = mean_baseline(&train, &train).map_err(|e| e.to_string())?;
    let lo = train.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for g in 0..100 {
        let c = lo + (hi - lo) * g as f64 / 99.0;
        let e = rmse(&vec![c; train.len()], &train).map_err(|e| e.to_string())?;
        check(m.rmse <= e, format!("constant {c} has RMSE {e} below the mean baseline {}", m.rmse))?;
    }
    Ok(format!("random mean rho {:.3} (leave-one-out {:.3}); mean RMSE {:.3} beats 100 constants", b.mean_rho, loo.mean_rho, m.rmse))
}

fn c8_selection() -> Outcome {
    let (mut pi_hits, mut mi_hits) = (0, 0);
    for seed in 0..100 {
        let (x, scores) = planted_columns(&mut rng(1000 + seed), 60);
        let labels: Vec<_> = scores.iter().map(|&s| mi_category(s)).collect();
        let pi = select_features_pi(&x, &scores, 10).map_err(|e| e.to_string())?;
        let mi = select_features_mi(&x, &scores, &labels, 10).map_err(|e| e.to_string())?;
        pi_hits += usize::from(pi.selected.contains(&0) && pi.selected.contains(&1));
        mi_hits += usize::from(mi.selected.contains(&0) && mi.selected.contains(&1));
    }
    check(pi_hits >= 95 && mi_hits >= 95, format!("PI {pi_hits}/100, MI {mi_hits}/100"))?;
    Ok(format!("PI {pi_hits}/100, MI {mi_hits}/100"))
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap_or_default()))
        .collect();
    v.sort();
    v
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = synth_corpus(&tmp.path().join("corpus"), 12, 9)?;
    let mut runs = Vec::new();
    for run in 0..2 {
        let feat = tmp.path().join(format!("features{run}"));
        let eval = tmp.path().join(format!("eval{run}"));
        cmd_extract(&manifest, &eval_config(9, false), &feat).map_err(|e| e.to_string())?;
        let set = FeatureSet::load(&feat).map_err(|e| e.to_string())?;
        cmd_evaluate(&set, &manifest, &eval_config(9, false), &eval).map_err(|e| e.to_string())?;
        runs.push((dir_bytes(&feat), dir_bytes(&eval)));
    }
    check(runs[0].0 == runs[1].0, "extract outputs differ")?;
    check(runs[0].1 == runs[1].1, "evaluate outputs differ")?;
    let files = runs[0].0.len() + runs[0].1.len();
    check(files >= 8, format!("only {files} output files"))?;
    Ok(format!("{files} output files byte-identical across runs"))
}

fn c10_trivial() -> Outcome {
    let img = ImageMatrix::constant(64, 64, [0.5; 3]).map_err(|e| e.to_string())?;
    let ex = Extractor::new(64).map_err(|e| e.to_string())?;
    let t = ex.texture_features(&img);
    let c = composition_features(&img);
    let col = colour_features(&img);
    check(t[0] == 0.0, format!("entropy {}", t[0]))?;
    check(c[0] == 0.0, format!("edge ratio {}", c[0]))?;
    check(col[8] == 0.0, format!("colourfulness {}", col[8]))?;
    check(c[3] == 1.0 && c[4] == 1.0, format!("symmetries {} {}", c[3], c[4]))?;
    for ch in 0..3 {
        let (contrast, energy) = (t[20 + 4 * ch], t[22 + 4 * ch]);
        check(energy == 1.0 && contrast == 0.0, format!("GLCM channel {ch}: energy {energy}, contrast {contrast}"))?;
    }
    let v = extract_all(&img, &FaceBodyAnnotation::default()).map_err(|e| e.to_string())?;
    for (b, block) in v.group(FeatureGroup::LocalLbp).chunks(59).enumerate() {
        let nonzero: Vec<usize> = (0..59).filter(|&i| block[i] != 0.0).collect();
        check(nonzero.len() == 1 && block[nonzero[0]] == 1.0, format!("LBP block {b}: bins {nonzero:?}"))?;
    }
    Ok("entropy 0, edges 0, colourfulness 0, symmetry 1, GLCM 1/0, one LBP bin".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("dimensional conformance", c1_dimensions),
        ("ICC oracle equivalence", c2_icc),
        ("NRMSE formula", c3_nrmse),
        ("Spearman exactness", c4_spearman),
        ("SVR correctness", c5_svr),
        ("planted-signal recovery", c6_planted),
        ("baseline properties", c7_baselines),
        ("selection recovery", c8_selection),
        ("determinism", c9_determinism),
        ("trivial-image values", c10_trivial),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail} [{secs:.2} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {label}: {why} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
