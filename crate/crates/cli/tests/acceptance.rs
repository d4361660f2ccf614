//! Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use kappa_ceiling::agreement::qwk_of_ints;
use kappa_ceiling::reliability::spearman_brown;
use kappa_ceiling::simulation::run_sweep_trials;
use kappa_ceiling::{
    ceiling_report, exact_qwk, icc_average, icc_single, load_csv, oneway_anova, AnovaSummary,
    DatasetSpec, Kappa, PairedScores, RaterMatrix, ScoreScale, SimulationConfig, TargetRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_kappa-ceiling");

/// Reported simulation means: sigma, r_true, kappa_true, kappa_max, kappa_HL, kappa_H.
const TABLE1: [[f64; 6]; 5] = [
    [0.25, 0.993, 0.990, 0.996, 0.989, 0.985],
    [0.50, 0.987, 0.982, 0.991, 0.974, 0.965],
    [1.00, 0.967, 0.961, 0.972, 0.919, 0.895],
    [2.00, 0.897, 0.890, 0.901, 0.749, 0.683],
    [3.00, 0.802, 0.797, 0.806, 0.563, 0.482],
];
const TABLE1_COLUMNS: [&str; 5] = [
    "r_true",
    "kappa_true",
    "kappa_max_hat",
    "kappa_hl_hat",
    "kappa_h_hat",
];

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>) -> Self {
        Self {
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }
}

fn run_json(args: &[&str]) -> (Value, Duration) {
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(args)
        .args(["--format", "json"])
        .env_remove("KAPPA_CEILING_SEED")
        .output()
        .expect("run kappa-ceiling");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (
        serde_json::from_slice(&out.stdout).expect("json report"),
        elapsed,
    )
}

fn table1_report() -> (Value, Duration) {
    run_json(&["simulate", "table1", "--seed", "42"])
}

fn criterion_1(report: &Value, elapsed: Duration) -> Outcome {
    let levels = report["aggregate"]["levels"].as_array().unwrap();
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for (row, level) in TABLE1.iter().zip(levels) {
        let sigma = row[0];
        assert_eq!(level["sigma_noise"].as_f64().unwrap(), sigma);
        let tol = if sigma <= 1.0 { 0.010 } else { 0.015 };
        for (col, &expected) in TABLE1_COLUMNS.iter().zip(&row[1..]) {
            let got = level[*col].as_f64().unwrap();
            let diff = (got - expected).abs();
            worst = worst.max(diff);
            if diff > tol {
                misses.push(format!(
                    "sigma={sigma} {col}: {got:.4} vs {expected:.3} (tol {tol})"
                ));
            }
        }
    }
    let fast = elapsed < Duration::from_secs(60);
    let mut detail = format!("25 cells, max |diff| {worst:.4}, runtime {:.2?}", elapsed);
    if !misses.is_empty() {
        detail.push_str("; out of tolerance: ");
        detail.push_str(&misses.join("; "));
    }
    Outcome::check(misses.is_empty() && fast, detail)
}

fn criterion_2(report: &Value) -> Outcome {
    let mut worst: f64 = 0.0;
    for level in report["aggregate"]["levels"].as_array().unwrap() {
        let d = (level["kappa_true"].as_f64().unwrap() - level["kappa_max_hat"].as_f64().unwrap())
            .abs();
        worst = worst.max(d);
    }
    Outcome::check(
        worst <= 0.01,
        format!("max |mean kappa_true - mean kappa_max| = {worst:.4}"),
    )
}

fn criterion_3(report: &Value) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for level in report["aggregate"]["levels"].as_array().unwrap() {
        let h = level["kappa_h_hat"].as_f64().unwrap();
        let hl = level["kappa_hl_hat"].as_f64().unwrap();
        let max = level["kappa_max_hat"].as_f64().unwrap();
        if !(h <= hl && hl <= max) {
            ok = false;
            notes.push(format!(
                "mean chain broken at sigma={}",
                level["sigma_noise"]
            ));
        }
    }
    let config = SimulationConfig::default();
    let trials = run_sweep_trials(&config).unwrap();
    let mut min_fraction: f64 = 1.0;
    for (sigma, level) in config.noise_levels.iter().zip(&trials) {
        if level.iter().any(|t| t.kappa_hl_hat > t.kappa_max_hat) {
            ok = false;
            notes.push(format!("kappa_HL > kappa_max in a trial at sigma={sigma}"));
        }
        let below = level
            .iter()
            .filter(|t| t.kappa_h_hat <= t.kappa_hl_hat)
            .count();
        min_fraction = min_fraction.min(below as f64 / level.len() as f64);
    }
    ok &= min_fraction >= 0.95;
    notes.push(format!(
        "min per-level share of trials with kappa_H <= kappa_HL: {:.2}",
        min_fraction
    ));
    Outcome::check(ok, notes.join("; "))
}

fn criterion_4(dir: &Path) -> Outcome {
    let points = dir.join("points.csv");
    let (report, _) = run_json(&[
        "simulate",
        "ccc-check",
        "--seed",
        "42",
        "--points-out",
        points.to_str().unwrap(),
    ]);
    let mae = report["ccc_check"]["mae"].as_f64().unwrap();
    let text = fs::read_to_string(&points).unwrap();
    let mut lines = text.lines();
    let header_ok = lines.next() == Some("kappa_ccc,kappa_true");
    let pairs: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let max_off = pairs.iter().map(|(c, t)| (c - t).abs()).fold(0.0, f64::max);
    Outcome::check(
        header_ok && pairs.len() == 100 && mae <= 0.010 && max_off <= 0.05,
        format!(
            "{} points, MAE {mae:.2e}, max |e| {max_off:.2e}",
            pairs.len()
        ),
    )
}

/// Normalized confusion-matrix QWK, independent of the integer fast path.
fn reference_qwk(a: &[i64], b: &[i64], lo: i64, k: usize) -> Option<f64> {
    let n = a.len() as f64;
    let mut observed = vec![vec![0.0; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        observed[(x - lo) as usize][(y - lo) as usize] += 1.0 / n;
    }
    let rows: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..k)
        .map(|j| observed.iter().map(|r| r[j]).sum())
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let w = ((i as f64 - j as f64) / (k as f64 - 1.0)).powi(2);
            num += w * observed[i][j];
            den += w * rows[i] * cols[j];
        }
    }
    (den > 0.0).then(|| 1.0 - num / den)
}

fn criterion_5(dir: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let mut notes = Vec::new();
    let mut ok = true;

    let mut sb_worst: f64 = 0.0;
    for _ in 0..1000 {
        let msb = rng.random_range(1e-3..100.0);
        let msw = rng.random_range(0.0..100.0);
        let k = rng.random_range(2..6);
        let a = AnovaSummary::new(msb, msw, rng.random_range(3..500), k).unwrap();
        let d = (icc_average(&a).unwrap() - spearman_brown(icc_single(&a).unwrap(), k)).abs();
        sb_worst = sb_worst.max(d);
    }
    ok &= sb_worst <= 1e-10;
    notes.push(format!("Spearman-Brown max err {sb_worst:.1e}"));

    let mut qwk_worst: f64 = 0.0;
    let mut qwk_mismatch = 0;
    let mut self_ok = true;
    for _ in 0..1000 {
        let k = rng.random_range(2..=12usize);
        let lo = rng.random_range(-3..4i64);
        let n = rng.random_range(2..=50usize);
        let a: Vec<i64> = (0..n).map(|_| lo + rng.random_range(0..k as i64)).collect();
        let b: Vec<i64> = (0..n).map(|_| lo + rng.random_range(0..k as i64)).collect();
        let scale = ScoreScale::new(lo, lo + k as i64 - 1).unwrap();
        let got = exact_qwk(&PairedScores::from_ints(&a, &b, scale).unwrap()).unwrap();
        match (got.value(), reference_qwk(&a, &b, lo, k)) {
            (Some(g), Some(r)) => qwk_worst = qwk_worst.max((g - r).abs()),
            (None, None) => {}
            _ => qwk_mismatch += 1,
        }
        if a.iter().any(|&x| x != a[0]) {
            self_ok &= exact_qwk(&PairedScores::from_ints(&a, &a, scale).unwrap()).unwrap()
                == Kappa::Value(1.0);
        }
    }
    ok &= qwk_worst <= 1e-12 && qwk_mismatch == 0 && self_ok;
    notes.push(format!(
        "QWK oracle max err {qwk_worst:.1e}, self-agreement ok: {self_ok}"
    ));

    // mean <-> sum target rules on the same file
    let path = dir.join("linear.csv");
    let mut body = String::from("r1,r2\n");
    for _ in 0..200 {
        let t: i64 = rng.random_range(0..=10);
        let noisy = |rng: &mut ChaCha8Rng| (t + rng.random_range(-2..=2i64)).clamp(0, 10);
        let (x1, x2) = (noisy(&mut rng), noisy(&mut rng));
        body.push_str(&format!("{x1},{x2}\n"));
    }
    fs::write(&path, body).unwrap();
    let load = |rule| {
        load_csv(&DatasetSpec {
            target_rule: rule,
            ..DatasetSpec::new(&path, "r1", "r2", ScoreScale::default())
        })
        .unwrap()
    };
    let (mean, sum) = (load(TargetRule::Mean), load(TargetRule::Sum));
    let same_ceilings =
        ceiling_report(&mean.raters).unwrap() == ceiling_report(&sum.raters).unwrap();
    let (x1, x2) = (mean.raters.column(0), mean.raters.column(1));
    let double = |v: &[i64]| v.iter().map(|x| 2 * x).collect::<Vec<_>>();
    let same_qwk = qwk_of_ints(&x1, &x2, &mean.target_scale)
        == qwk_of_ints(&double(&x1), &double(&x2), &sum.target_scale);
    ok &= same_ceilings && same_qwk;
    notes.push(format!(
        "mean/sum ceilings identical: {same_ceilings}, doubled-scale QWK identical: {same_qwk}"
    ));

    Outcome::check(ok, notes.join("; "))
}

fn criterion_6(dir: &Path) -> Outcome {
    let fixture =
        RaterMatrix::new(vec![[1, 2], [3, 3], [5, 4], [7, 8]], ScoreScale::default()).unwrap();
    let anova = oneway_anova(&fixture).unwrap();
    let rep = ceiling_report(&fixture).unwrap();
    let expected = [
        ("msb", anova.msb, 13.125),
        ("msw", anova.msw, 0.375),
        ("rho_1", rep.reliability.rho_1, 0.944444),
        ("rho_Y", rep.reliability.rho_y, 0.971429),
        ("kappa_max", rep.kappa_max, 0.985611),
        ("kappa_HL", rep.kappa_hl, 0.957851),
    ];
    let mut ok = expected
        .iter()
        .all(|(_, got, want)| (got - want).abs() <= 1e-5);

    let path = dir.join("fixture.csv");
    fs::write(&path, "r1,r2\n1,2\n3,3\n5,4\n7,8\n").unwrap();
    let (doc, _) = run_json(&[
        "analyze",
        "--data",
        path.to_str().unwrap(),
        "--r1",
        "r1",
        "--r2",
        "r2",
        "--scale-min",
        "0",
        "--scale-max",
        "10",
    ]);
    let cli_max = doc["ceiling_report"]["kappa_max"].as_f64().unwrap();
    let cli_hl = doc["ceiling_report"]["kappa_hl"].as_f64().unwrap();
    ok &= (cli_max - 0.985611).abs() <= 1e-5 && (cli_hl - 0.957851).abs() <= 1e-5;
    let detail = expected
        .iter()
        .map(|(name, got, _)| format!("{name}={got:.6}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::check(
        ok,
        format!("{detail}; CLI analyze agrees: kappa_max={cli_max:.6}"),
    )
}

/// Opt-in: `KAPPA_CEILING_REAL_DATA` names a manifest CSV with columns
/// `config,kappa_max,kappa_hl,kappa_h`; config paths are relative to it.
fn criterion_7() -> Outcome {
    let Ok(manifest) = std::env::var("KAPPA_CEILING_REAL_DATA") else {
        return Outcome {
            status: Status::Skip,
            detail: "KAPPA_CEILING_REAL_DATA not set (license-gated datasets)".into(),
        };
    };
    let manifest = PathBuf::from(manifest);
    let base = manifest.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(&manifest).expect("read manifest");
    let mut ok = true;
    let mut notes = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let conf = base.join(cells[0]);
        let want: Vec<f64> = cells[1..4].iter().map(|c| c.parse().unwrap()).collect();
        let (doc, _) = run_json(&["analyze", "--config", conf.to_str().unwrap()]);
        let c = &doc["ceiling_report"];
        let got = [
            c["kappa_max"].as_f64().unwrap(),
            c["kappa_hl"].as_f64().unwrap(),
            c["kappa_h"].as_f64().unwrap_or(f64::NAN),
        ];
        let row_ok = got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 0.002);
        ok &= row_ok;
        notes.push(format!(
            "{}: ({:.3}, {:.3}, {:.3}){}",
            cells[0],
            got[0],
            got[1],
            got[2],
            if row_ok { "" } else { " MISMATCH" }
        ));
    }
    Outcome::check(ok, notes.join("; "))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (table1, elapsed) = table1_report();
    let results = [
        ("1 noise-sweep reproduction", criterion_1(&table1, elapsed)),
        ("2 ceiling tracks ideal QWK", criterion_2(&table1)),
        ("3 ordering chain", criterion_3(&table1)),
        ("4 CCC accuracy", criterion_4(dir.path())),
        ("5 algebraic identities", criterion_5(dir.path())),
        ("6 hand-fixture regression", criterion_6(dir.path())),
        ("7 real-data tables", criterion_7()),
    ];
    let mut failed = 0;
    println!();
    for (name, outcome) in &results {
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("[{tag}] criterion {name}: {}", outcome.detail);
    }
    println!();
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all runnable criteria passed");
}
