use std::collections::HashMap;
use std::process::Command;

use pinching_core::{average_rate, single_antenna_closed_form, validate_pattern, Scenario, Schedule, Slot};
use pinching_sim::output::{significant, write_all};
use pinching_sim::{generate_users, run_sweep, summarize, ExperimentConfig, SchemeKind};

fn config(dir: &tempfile::TempDir, text: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse(text).unwrap();
    c.out = dir.path().join("results.csv");
    c
}

#[test]
fn single_bound_row_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir, "trials = 1\nschemes = bound\nm_list = 4\nn = 1\n");
    let out = run_sweep(&c).unwrap();
    assert_eq!(out.rows.len(), 1);
    let row = &out.rows[0];
    assert_eq!(row.scheme, SchemeKind::Bound);
    let s = Scenario::new(&c.scenario_params(1), generate_users(&c, 0)).unwrap();
    let closed = single_antenna_closed_form(&s).unwrap();
    assert!((row.sum_rate - closed).abs() <= 1e-9 * closed);
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(&dir, "trials = 4\nm_list = 1,3,10\nseed = 5\n");
    c.schedule_out = Some(dir.path().join("schedules.csv"));
    write_all(&c, &run_sweep(&c).unwrap()).unwrap();
    let first: Vec<Vec<u8>> = ["results.csv", "results_summary.csv", "schedules.csv"]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).unwrap())
        .collect();
    write_all(&c, &run_sweep(&c).unwrap()).unwrap();
    for (f, bytes) in ["results.csv", "results_summary.csv", "schedules.csv"].iter().zip(&first) {
        assert_eq!(&std::fs::read(dir.path().join(f)).unwrap(), bytes, "{f} changed");
    }
    let text = String::from_utf8(first[0].clone()).unwrap();
    assert!(text.starts_with("seed,trial,K,N,M,scheme,sum_rate_bps_hz,wallclock_ms\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 3 * 4);
}

#[test]
fn mean_dynamic_rate_grows_with_pattern_count() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&dir, "trials = 20\nschemes = dyn\nm_list = 1,2,3,4,5,6,7,8,9,10\n");
    let summary = summarize(&run_sweep(&c).unwrap().rows);
    assert_eq!(summary.len(), 10);
    for w in summary.windows(2) {
        assert!(w[1].mean >= w[0].mean - 1e-12, "{} -> {}", w[0].mean, w[1].mean);
    }
}

#[test]
fn rates_are_recomputable_from_emitted_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(&dir, "trials = 3\nsweep = n\nn_list = 1,2\nm = 3\n");
    let sched_path = dir.path().join("schedules.csv");
    c.schedule_out = Some(sched_path.clone());
    let out = run_sweep(&c).unwrap();
    write_all(&c, &out).unwrap();

    let mut slots: HashMap<(usize, usize, usize, String), Vec<Slot>> = HashMap::new();
    let mut reader = csv::Reader::from_path(&sched_path).unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let trial: usize = rec[0].parse().unwrap();
        let n: usize = rec[1].parse().unwrap();
        let m: usize = rec[2].parse().unwrap();
        let parse = |s: &str| s.split(';').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>();
        let s = Scenario::new(&c.scenario_params(n), generate_users(&c, trial)).unwrap();
        slots.entry((trial, n, m, rec[3].to_string())).or_default().push(Slot {
            pattern: validate_pattern(&s, &parse(&rec[6])).unwrap(),
            powers: parse(&rec[7]),
            duration: rec[5].parse().unwrap(),
        });
    }
    let mut results = csv::Reader::from_path(&c.out).unwrap();
    let mut checked = 0;
    for rec in results.records() {
        let rec = rec.unwrap();
        let trial: usize = rec[1].parse().unwrap();
        let n: usize = rec[3].parse().unwrap();
        let m: usize = rec[4].parse().unwrap();
        let rate: f64 = rec[6].parse().unwrap();
        let s = Scenario::new(&c.scenario_params(n), generate_users(&c, trial)).unwrap();
        let schedule = Schedule {
            slots: slots[&(trial, n, m, rec[5].to_string())].clone(),
            period: 1.0,
        };
        schedule.check(&s).unwrap();
        let again = average_rate(&s, &schedule);
        assert_eq!(significant(again), rec[6].to_string());
        assert!((again - rate).abs() <= 1e-11 * rate);
        checked += 1;
    }
    assert_eq!(checked, 3 * 2 * 4);
}

#[test]
fn timing_column_is_filled_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(&dir, "trials = 1\nm_list = 2\n");
    assert!(run_sweep(&c).unwrap().rows.iter().all(|r| r.wallclock_ms.is_none()));
    c.timing = true;
    assert!(run_sweep(&c).unwrap().rows.iter().all(|r| r.wallclock_ms.unwrap() >= 0.0));
}

#[test]
fn twelve_significant_digits() {
    assert_eq!(significant(7.018117054526458), "7.01811705453");
    assert_eq!(significant(12.5), "12.5000000000");
    assert_eq!(significant(0.0123456789012345), "0.0123456789012");
    assert_eq!(significant(0.0), "0");
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pinching-sim"))
}

#[test]
fn cli_simulate_validate_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "trials = 2\nm_list = 1,2\n# comment only\n").unwrap();
    let out = dir.path().join("o.csv");
    let status = cli()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--trials", "1", "--seed", "3", "--schemes", "cas,bound", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.lines().skip(1).all(|l| l.starts_with("3,0,10,1,")));
    assert!(dir.path().join("o_summary.csv").exists());

    let ok = cli().args(["validate-config", "--config"]).arg(&cfg).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("trials = 2"));

    let bound = cli().args(["bound", "--k", "4", "--n", "1"]).output().unwrap();
    assert!(bound.status.success());
    let stdout = String::from_utf8_lossy(&bound.stdout);
    let value = |key: &str| -> f64 {
        let line = stdout.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("bound_bps_hz") - value("closed_form_bps_hz")).abs() < 1e-9);
}

#[test]
fn cli_reports_errors_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "trials = 1\nwhat = 2\n").unwrap();
    let r = cli().args(["validate-config", "--config"]).arg(&bad).output().unwrap();
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("unknown key `what`"));

    let good = dir.path().join("good.cfg");
    std::fs::write(&good, "trials = 1\nm_list = 1\n").unwrap();
    let r = cli()
        .args(["simulate", "--config"])
        .arg(&good)
        .args(["--out", "/nonexistent-dir/x.csv"])
        .output()
        .unwrap();
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("/nonexistent-dir/x.csv"));

    let r = cli().args(["simulate", "--config"]).arg(dir.path().join("missing.cfg")).output().unwrap();
    assert!(!r.status.success());
    let r = cli().args(["simulate", "--config"]).arg(&good).args(["--sweep", "z"]).output().unwrap();
    assert!(!r.status.success());
}
