use std::path::Path;
use std::process::{Command, Output};

fn multipin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multipin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn free_energy_csv_row() {
    let o = multipin(&["free-energy", "--csv", "--delta", "1", "--T", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "delta,T,phi,residual,c_delta,m,s_T,C_delta");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "4");
    assert!(row[2].starts_with("0.310057"), "{row:?}");
}

#[test]
fn zero_pinning_single_interface() {
    let o = multipin(&["free-energy", "--csv", "--delta", "0", "--T", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[4], "NA");
    assert_eq!(row[5], "NA");
}

#[test]
fn kernel_table_and_transform() {
    let o = multipin(&["kernel", "--T", "4", "--n-max", "4"]);
    let text = stdout(&o);
    assert!(text.contains("4,2,0.5,0,0.5,0.5"), "{text}");
    assert!(text.contains("4,4,0.125,0.0625,0.25,0.25"), "{text}");
    let o = multipin(&["kernel", "--T", "4", "--lambda", "0.5"]);
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[2] - row[5]).abs() < 1e-8 && (row[3] - row[6]).abs() < 1e-8);
}

#[test]
fn validate_exit_codes() {
    let ok = multipin(&["validate", "--max-N", "120"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = multipin(&["validate", "--max-N", "120", "--phi-perturbation", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL renewal_identity"));
}

#[test]
fn sampling_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = multipin(&[
            "sample", "--delta", "1", "--T", "8", "--N", "300", "--M", "50", "--seed", "7", "--threads", threads,
            "--out", path(out),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["skeletons.txt", "stats.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let stats = std::fs::read_to_string(a.join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 51);
}

#[test]
fn smallest_spacing_runs_share_skeletons() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = multipin(&["sample", "--T", "2", "--N", "100", "--M", "20", "--seed", "3", "--out", path(&out)]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(out.join("skeletons.txt")).unwrap()
    };
    let (x, y) = (run("x"), run("y"));
    assert_eq!(x, y);
    assert_eq!(x.split("\n\n").count(), 20);
}

#[test]
fn sample_matches_exact_endpoint_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = multipin(&[
        "sample", "--T", "4", "--N", "60", "--M", "1e5", "--check-against-dp", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn zero_replicas_give_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = multipin(&["experiment", "regime-i", "--M", "0", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("regime-i.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(dir.path().join("regime-i.json").exists());
}

#[test]
fn tight_regime_writes_tail_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = multipin(&["experiment", "regime-iii", "--M", "100", "--N", "1e4", "--out", path(dir.path())]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let tails = std::fs::read_to_string(dir.path().join("regime-iii_tails.csv")).unwrap();
    assert!(tails.starts_with("N,T_N,L,prob\n10000,24,0,"));
    let csv = std::fs::read_to_string(dir.path().join("regime-iii.csv")).unwrap();
    assert!(csv.contains("percentile99_spread"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(multipin(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(multipin(&["free-energy", "--T", "3"]).status.code(), Some(2));
    assert_eq!(multipin(&["sample", "--M", "1.5"]).status.code(), Some(2));
    assert_eq!(multipin(&["free-energy", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\ndelta = 2\nT = 4\n").unwrap();
    let o = multipin(&["free-energy", "--csv", "--config", path(&cfg), "--delta", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "4");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(multipin(&["free-energy", "--config", path(&cfg)]).status.code(), Some(2));
}
