use std::path::Path;
use std::process::Command;

use predinfer::datagen::{GenConfig, generate};
use predinfer::harness::{
    self, Design, ExperimentConfig, FhatId, FhatSource, RECORDS_HEADER, ReplicateRecord, SUMMARY_HEADER,
    prepare_fhats, run_records, run_replicate, summarize,
};
use predinfer::inference::{Method, estimate_classical};
use predinfer::predictor::PredictorModel;
use predinfer::rng::{self, purpose};
use predinfer::stats;
use rand::RngExt;
use rand_distr::StandardNormal;

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        n_grid: vec![(30, 300), (40, 400)],
        replicates: 3,
        bootstrap_b: 5,
        ..ExperimentConfig::default()
    }
}

#[test]
fn record_count_is_the_product_of_the_grid() {
    let cfg = small_config();
    let records = run_records(&cfg).unwrap();
    assert_eq!(
        records.len(),
        cfg.replicates * cfg.methods.len() * cfg.n_grid.len() * cfg.fhat_ids.len()
    );
    assert!(records.iter().all(ReplicateRecord::is_ok));

    let one = ExperimentConfig {
        n_grid: vec![(30, 300)],
        replicates: 2,
        methods: vec![Method::Ppi],
        fhat_ids: vec![FhatId::Oracle],
        ..ExperimentConfig::default()
    };
    assert_eq!(run_records(&one).unwrap().len(), 2);
}

#[test]
fn records_follow_cell_replicate_predictor_method_order() {
    let cfg = small_config();
    let records = run_records(&cfg).unwrap();
    let labels = cfg.fhat_labels();
    let mut it = records.iter();
    for &(n_lab, n_unlab) in &cfg.n_grid {
        for rep in 0..cfg.replicates {
            for f in &labels {
                for &m in &cfg.methods {
                    let r = it.next().unwrap();
                    assert_eq!((r.n_lab, r.n_unlab, r.replicate, &r.fhat_id, r.method), (n_lab, n_unlab, rep, f, m));
                }
            }
        }
    }
}

#[test]
fn record_flags_match_their_definitions() {
    let cfg = ExperimentConfig {
        beta1_star: 1.0,
        ..small_config()
    };
    for r in run_records(&cfg).unwrap() {
        assert_eq!(r.covered, r.ci_lo <= 1.0 && 1.0 <= r.ci_hi);
        assert_eq!(r.rejected_at_05, r.p_value < 0.05);
        assert!((r.t_stat - (r.beta_hat - 1.0) / r.se).abs() < 1e-12 * (1.0 + r.t_stat.abs()));
    }
}

#[test]
fn classical_record_is_the_classical_estimate() {
    let cfg = ExperimentConfig {
        n_grid: vec![(50, 500)],
        methods: vec![Method::Classical],
        fhat_ids: vec![FhatId::Oracle],
        ..ExperimentConfig::default()
    };
    let source = prepare_fhats(&cfg).unwrap();
    let recs = run_replicate(&cfg, &source, (50, 500), 4);
    assert_eq!(recs.len(), 1);
    let seed = rng::derive_seed(cfg.master_seed, &[purpose::LABELED, 50, 500, 4]);
    let lab = generate(&GenConfig::new(50, cfg.beta1_star, seed)).unwrap();
    let direct = estimate_classical(&lab).unwrap();
    assert_eq!(recs[0].beta_hat, direct.estimate());
    assert_eq!(recs[0].se, direct.se);
}

#[test]
fn replicates_are_reproducible() {
    for design in [Design::FixedFhat, Design::RetrainPerReplicate] {
        let cfg = ExperimentConfig {
            design,
            ..small_config()
        };
        let source = prepare_fhats(&cfg).unwrap();
        let a = run_replicate(&cfg, &source, (30, 300), 1);
        let b = run_replicate(&cfg, &source, (30, 300), 1);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let c = run_replicate(&cfg, &source, (30, 300), 2);
        assert_ne!(a[0].beta_hat, c[0].beta_hat);
    }
}

#[test]
fn failures_are_recorded_not_fatal() {
    let cfg = ExperimentConfig {
        n_grid: vec![(30, 300)],
        bootstrap_b: 5,
        ..ExperimentConfig::default()
    };
    let flat = PredictorModel::custom("flat", 4, |_| Some(0.0));
    let recs = run_replicate(&cfg, &FhatSource::Fixed(vec![flat]), (30, 300), 0);
    assert_eq!(recs.len(), cfg.methods.len());
    let status = |m: Method| recs.iter().find(|r| r.method == m).unwrap().status.clone();
    assert_eq!(status(Method::Classical), "ok");
    assert_eq!(status(Method::Ppi), "ok");
    assert_eq!(status(Method::Naive), "zero_se");
    assert_eq!(status(Method::WangAnalytic), "degenerate_input");
    assert_eq!(status(Method::WangBootstrapParametric), "degenerate_input");

    let s = summarize(&recs);
    let naive = s.cell(Method::Naive, "flat", 30, 300).unwrap();
    assert_eq!((naive.replicates, naive.failures), (0, 1));
}

// ---------------------------------------------------------------------------
// Summary oracles.

fn fake_records(t: &[f64]) -> Vec<ReplicateRecord> {
    t.iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = ReplicateRecord::failure(i, Method::Ppi, "f", 100, 1000, harness::STATUS_OK);
            r.t_stat = t;
            r.p_value = stats::two_sided_p(t);
            r.rejected_at_05 = r.p_value < 0.05;
            r.covered = !r.rejected_at_05;
            r.beta_hat = t;
            r.se = 1.0;
            r
        })
        .collect()
}

#[test]
fn ks_of_normal_statistics_stays_below_the_critical_value() {
    // Asymptotic 5% critical value for n = 1000 is 1.358 / sqrt(1000) = 0.0429.
    let trials = 200;
    let mut below = 0;
    for k in 0..trials {
        let mut r = rng::stream(900 + k);
        let t: Vec<f64> = (0..1000).map(|_| r.sample(StandardNormal)).collect();
        let c = &summarize(&fake_records(&t)).cells[0];
        assert!((0.0..=1.0).contains(&c.ks_stat));
        if c.ks_stat < 0.043 {
            below += 1;
        }
    }
    let frac = below as f64 / trials as f64;
    assert!((0.90..=0.99).contains(&frac), "{frac}");
}

#[test]
fn rejection_rate_of_uniform_p_values_is_binomial() {
    // With p-values uniform, rejections at 0.05 are Binomial(1000, 0.05):
    // the 95% band is 0.05 +- 0.014.
    let trials = 200;
    let mut inside = 0;
    for k in 0..trials {
        let mut r = rng::stream(1900 + k);
        let t: Vec<f64> = (0..1000).map(|_| r.sample(StandardNormal)).collect();
        let c = &summarize(&fake_records(&t)).cells[0];
        if (c.rejection_rate - 0.05).abs() <= 0.014 {
            inside += 1;
        }
        assert!((c.coverage + c.rejection_rate - 1.0).abs() < 1e-12);
    }
    let frac = inside as f64 / trials as f64;
    assert!((0.90..=0.995).contains(&frac), "{frac}");
}

#[test]
fn t_quantiles_track_the_normal_for_normal_statistics() {
    let mut r = rng::stream(5);
    let t: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
    let c = &summarize(&fake_records(&t)).cells[0];
    assert_eq!(c.t_quantiles.len(), harness::N_QUANTILES);
    for (p, q) in harness::quantile_probs().iter().zip(&c.t_quantiles) {
        assert!((q - stats::normal_quantile(*p)).abs() < 0.1, "p = {p}");
    }
}

// ---------------------------------------------------------------------------
// Files and the command line.

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_predinfer"))
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn experiment_writes_fixed_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness::run_experiment(&small_config(), &dir.path().join("nested")).unwrap();
    assert_eq!(header(&out.records), RECORDS_HEADER.join(","));
    assert_eq!(header(&out.summary), SUMMARY_HEADER.join(","));
    let rows = std::fs::read_to_string(&out.records).unwrap().lines().count() - 1;
    assert_eq!(rows, 3 * 6 * 2 * 4);
}

#[test]
fn output_bytes_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}"));
        let status = bin()
            .env("PREDINFER_THREADS", threads)
            .args(["simulate", "--n-lab", "30,40", "--n-unlab", "300,400", "--replicates", "6"])
            .args(["--bootstrap-b", "5", "--design", "retrain", "--out-dir"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (
            std::fs::read(out.join("records.csv")).unwrap(),
            std::fs::read(out.join("summary.csv")).unwrap(),
        )
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn preset_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["preset", "paper-s4-null", "--replicates", "50", "--seed", "7", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(records.lines().count() - 1, 50 * 6 * 4);
    assert!(dir.path().join("summary.csv").is_file());
}

#[test]
fn simulate_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# small\nn-lab = 20\nn-unlab = 200\nreplicates = 2\nmethods = ppi, naive\nfhat = oracle\n")
        .unwrap();
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--replicates", "3", "--out-dir"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("o/records.csv")).unwrap();
    assert_eq!(records.lines().count() - 1, 3 * 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["simulate", "--methods", "ppi,bogus", "--replicates", "1"]), Some(2));
    assert_eq!(code(&["preset", "paper-s9"]), Some(2));
    assert_eq!(code(&["simulate", "--frobnicate"]), Some(2));
    assert_eq!(code(&["launch"]), Some(2));
    assert_eq!(code(&["simulate", "--n-lab", "5", "--replicates", "1"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn runtime_errors_exit_with_one() {
    let out = bin()
        .args(["estimate", "--labeled", "/nonexistent/lab.csv", "--unlabeled", "/nonexistent/u.csv"])
        .args(["--predictions-labeled", "p", "--predictions-unlabeled", "p"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/lab.csv"));
}

fn write_csv(path: &Path, header: &[&str], cols: &[Vec<f64>]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(header).unwrap();
    for i in 0..cols[0].len() {
        w.write_record(cols.iter().map(|c| format!("{:?}", c[i]))).unwrap();
    }
    w.flush().unwrap();
}

fn parse_estimates(stdout: &[u8]) -> Vec<(String, f64, String)> {
    let mut r = csv::Reader::from_reader(stdout);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[4].parse().unwrap(), rec[10].to_string())
        })
        .collect()
}

#[test]
fn estimate_with_zero_predictions_reproduces_classical() {
    let dir = tempfile::tempdir().unwrap();
    let lab = generate(&GenConfig::new(200, 1.0, 31)).unwrap();
    let unlab = generate(&GenConfig::new(800, 1.0, 32)).unwrap();
    let lab_path = dir.path().join("lab.csv");
    let unlab_path = dir.path().join("unlab.csv");
    write_csv(&lab_path, &["y", "x", "pred"], &[lab.y.clone(), lab.x().to_vec(), vec![0.0; 200]]);
    write_csv(&unlab_path, &["x", "pred"], &[unlab.x().to_vec(), vec![0.0; 800]]);
    let out = bin()
        .args(["estimate", "--labeled"])
        .arg(&lab_path)
        .arg("--unlabeled")
        .arg(&unlab_path)
        .args(["--predictions-labeled", "pred", "--predictions-unlabeled", "pred", "--methods", "ppi,classical"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_estimates(&out.stdout);
    assert_eq!(rows.len(), 2);
    let direct = estimate_classical(&lab).unwrap().estimate();
    assert!((rows[0].1 - direct).abs() < 1e-10);
    assert!((rows[1].1 - direct).abs() < 1e-10);
    assert_eq!(rows[0].2, "ok");
}

#[test]
fn estimate_accepts_prediction_files_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let lab = generate(&GenConfig::new(100, 0.0, 33)).unwrap();
    let unlab = generate(&GenConfig::new(400, 0.0, 34)).unwrap();
    lab.write_csv(&dir.path().join("lab.csv")).unwrap();
    unlab.strip_labels().write_csv(&dir.path().join("unlab.csv")).unwrap();
    write_csv(&dir.path().join("pl.csv"), &["prediction"], &[vec![1.0; 100]]);
    write_csv(&dir.path().join("pu.csv"), &["prediction"], &[unlab.z.col(1).to_vec()]);
    let out = bin()
        .current_dir(dir.path())
        .args(["estimate", "--labeled", "lab.csv", "--unlabeled", "unlab.csv"])
        .args(["--predictions-labeled", "pl.csv", "--predictions-unlabeled", "pu.csv"])
        .args(["--bootstrap-b", "10"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_estimates(&out.stdout);
    assert_eq!(rows.len(), 6);
    let status = |m: &str| rows.iter().find(|r| r.0 == m).unwrap().2.clone();
    assert_eq!(status("classical"), "ok");
    assert_eq!(status("wang_analytic"), "degenerate_input");
    assert_eq!(status("wang_boot_nonparam"), "degenerate_input");
}
