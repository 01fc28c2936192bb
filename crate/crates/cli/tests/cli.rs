use std::path::Path;
use std::process::{Command, Output};

use headalign_cli::commands::effective_train_config;
use headalign_cli::eval::{improvements, AverageRow, EvalReport, ImprovementRow, SCHEMA_VERSION};
use headalign_cli::report::{ae_csv, improvement_csv, load_report, report_json, text_table, IMPROVEMENT_HEADER};

fn headalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_headalign")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn still_scenario(dir: &Path, psi_deg: f64) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "name": "S1",
        "duration": 130.0,
        "lat": 32.5f64.to_radians(),
        "lon": 0.61,
        "psi0": psi_deg.to_radians(),
        "heading_osc": [{"amplitude_deg": 1.5, "period_s": 40.0, "phase_rad": 0.2}],
        "roll_osc": [{"amplitude_deg": 1.0, "period_s": 6.0, "phase_rad": 0.0}],
        "seed": 4
    });
    let p = dir.join("scenario.json");
    std::fs::write(&p, cfg.to_string()).unwrap();
    p
}

#[test]
fn simulate_bank_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = headalign(&["simulate", "--seed", "3", "--out-dir", path(a.path())]);
    let ob = headalign(&["simulate", "--seed", "3", "--out-dir", path(b.path())]);
    assert!(oa.status.success(), "{}", stderr(&oa));
    let digests = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{} {}", f[0], f[3])
            })
            .collect()
    };
    let da = digests(&oa);
    assert_eq!(da.len(), 15, "five recordings, three files each");
    assert_eq!(da, digests(&ob));
    for s in ["S1", "S2", "S3", "S4", "S5"] {
        assert!(a.path().join(format!("{s}.meta.json")).exists());
    }
}

#[test]
fn noise_free_i_oba_at_120_s_via_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = still_scenario(dir.path(), 250.0);
    let data = dir.path().join("data");
    let o = headalign(&["simulate", "--config", path(&cfg), "--sensors", "noise-free", "--out-dir", path(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("eval");
    let o = headalign(&[
        "evaluate", "--data-dir", path(&data), "--methods", "I-OBA,I-DVA", "--t-align", "10,120", "--out-dir", path(&out),
        "--format", "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = load_report(&out.join("eval_report.json")).unwrap();
    assert_eq!(report.averages.len(), 2 * 2);
    let i_oba_120 = report.averages.iter().find(|a| a.method == "I-OBA" && a.t_align == 120).unwrap();
    assert!(i_oba_120.mean_ae_deg < 0.1, "{}", i_oba_120.mean_ae_deg);
    // Averages recompute exactly from the per-recording rows.
    for a in &report.averages {
        let rows: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.method == a.method && r.t_align == a.t_align)
            .map(|r| r.mean_ae_deg)
            .collect();
        assert_eq!(rows.iter().sum::<f64>() / rows.len() as f64, a.mean_ae_deg);
    }
    let printed: EvalReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, report);
}

#[test]
fn align_prints_one_row_per_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = still_scenario(dir.path(), 30.0);
    let o = headalign(&["simulate", "--config", path(&cfg), "--sensors", "noise-free", "--out-dir", path(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = headalign(&["align", "--recording", path(&dir.path().join("S1")), "--methods", "I-DVA", "--t-align", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,window_start_s,t_align,psi_hat_deg,psi_gt_deg,ae_deg");
    assert_eq!(lines.len(), 1 + 4);
}

#[test]
fn training_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = headalign(&["train", "--variation", "10", "--data-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[seed-required]"));
}

#[test]
fn empty_method_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = headalign(&["evaluate", "--data-dir", path(dir.path()), "--methods", ""]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("error[usage]"), "{}", stderr(&o));
}

#[test]
fn missing_checkpoint_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = still_scenario(dir.path(), 10.0);
    assert!(headalign(&["simulate", "--config", path(&cfg), "--out-dir", path(dir.path())]).status.success());
    let o = headalign(&[
        "evaluate", "--data-dir", path(dir.path()), "--methods", "HeadingNet", "--t-align", "10", "--models-dir",
        path(&dir.path().join("none")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[missing-checkpoint]"));
}

#[test]
fn corrupt_report_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("eval_report.json");
    std::fs::write(&p, "{\"schema_version\": \"1\"").unwrap();
    let o = headalign(&["report", "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[bad-artifact]"));
    let o = headalign(&["report", "--out-dir", path(&dir.path().join("absent"))]);
    assert!(stderr(&o).contains("error[io]"));
}

#[test]
fn reference_hyperparameters_and_overrides() {
    let c = effective_train_config(10, 1, None, None, None, None, None, None).unwrap();
    assert_eq!((c.epochs, c.loss_scale, c.lr, c.weight_decay, c.scheduler_step), (1000, 10.0, 0.0009, 0.08, 120));
    let c = effective_train_config(90, 1, None, None, None, None, None, None).unwrap();
    assert_eq!((c.loss_scale, c.weight_decay, c.scheduler_step), (100.0, 0.8, 150));
    let c = effective_train_config(10, 1, Some(5), None, None, None, None, None).unwrap();
    assert_eq!(c.epochs, 5);
    assert_eq!(c.lr, 0.0009);
}

fn synthetic_report() -> EvalReport {
    let avg = |m: &str, t: u32, ae: f64| AverageRow {
        method: m.into(),
        t_align: t,
        mean_ae_deg: ae,
    };
    let averages = vec![
        avg("I-DVA", 10, 3.0),
        avg("I-OBA", 10, 2.5),
        avg("I-DVA", 90, 0.98),
        avg("I-OBA", 90, 1.26),
        avg("HeadingNet", 10, 1.0),
        avg("HeadingNet", 90, 0.98),
    ];
    EvalReport {
        schema_version: SCHEMA_VERSION.into(),
        start_s: 0.0,
        end_s: None,
        rows: Vec::new(),
        improvements: improvements(&averages),
        averages,
    }
}

#[test]
fn improvement_rows() {
    let r = synthetic_report();
    assert_eq!(
        r.improvements,
        [
            ImprovementRow {
                t_align: 10,
                best_baseline_name: "I-OBA".into(),
                best_ae: 2.5,
                nn_ae: 1.0,
                improvement_pct: 60.0,
            },
            ImprovementRow {
                t_align: 90,
                best_baseline_name: "I-DVA".into(),
                best_ae: 0.98,
                nn_ae: 0.98,
                improvement_pct: 0.0,
            },
        ]
    );
    let csv = improvement_csv(&r);
    assert_eq!(csv.lines().next(), Some(IMPROVEMENT_HEADER));
    assert_eq!(csv.lines().nth(1), Some("10,I-OBA,2.500000,1.000000,60.00"));
}

#[test]
fn report_outputs_are_byte_stable() {
    let r = synthetic_report();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("eval_report.json"), report_json(&r)).unwrap();
    let run = |out: &Path| {
        let o = headalign(&["report", "--eval", path(&dir.path().join("eval_report.json")), "--out-dir", path(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        ["report.txt", "ae_vs_talign.csv", "improvement.csv"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b);
    assert_eq!(a[1], ae_csv(&r).into_bytes());
    assert!(text_table(&r).contains("HeadingNet"));
}
