use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netmimo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netmimo"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const SMALL: &[&str] = &["--snr-db", "10,30,50", "--trials", "30", "--fit-points", "2"];

fn run_small(dir: &Path, prefix: &str, extra: &[&str]) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--policies", "perfect,distance,zero", "-o", prefix]);
    args.extend_from_slice(extra);
    if !extra.contains(&"--random") {
        args.extend_from_slice(&["--grid", "2"]);
    }
    netmimo(&args, dir)
}

#[test]
fn run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), "a", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "policy,alpha,snr_db,user,mean_rate_bits,stderr,trials,rejections"
    );
    // 3 policies x 3 SNR points x (4 users + avg)
    assert_eq!(lines.count(), 45);
    let meta = fs::read_to_string(dir.path().join("a.meta.toml")).unwrap();
    assert!(meta.contains("[config]"));
    assert!(meta.contains("[[sizes]]"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("avg slope"));
}

#[test]
fn metadata_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_small(dir.path(), "first", &["--random", "4", "--side", "2"])
        .status
        .success());
    let out = netmimo(&["run", "--config", "first.meta.toml", "-o", "second"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(dir.path().join("first.csv")).unwrap(),
        fs::read(dir.path().join("second.csv")).unwrap()
    );
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_small(dir.path(), "w1", &["--workers", "1"]).status.success());
    assert!(run_small(dir.path(), "w3", &["--workers", "3"]).status.success());
    assert_eq!(
        fs::read(dir.path().join("w1.csv")).unwrap(),
        fs::read(dir.path().join("w3.csv")).unwrap()
    );
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.toml"),
        r#"
seed = 7
gamma = 0.7
snr_db = [20, 40]
trials = 5

[layout]
kind = "grid"
side = 2

[policies]
names = ["conventional", "distance"]
alphas = [0.75, 1.25]
"#,
    )
    .unwrap();
    let out = netmimo(&["run", "-c", "exp.toml", "--trials", "1", "-o", "cfg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("cfg.csv")).unwrap();
    assert!(csv.contains("\ndistance,0.75,20,"));
    assert!(csv.contains("\ndistance,1.25,40,avg,"));
    // A single trial reports a zero standard error.
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(5) == Some("0.000000")));
}

#[test]
fn rejection_breach_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), "bad", &["--condition-threshold", "1.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rejection rate"));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = netmimo(&["run", "--policies", "nope", "-o", "x"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let out = netmimo(&["run", "--gamma", "1.5", "-o", "x"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sizes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = netmimo(
        &[
            "sizes",
            "--grid",
            "6",
            "--snr-db",
            "50",
            "--policies",
            "conventional,distance",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let distance = text.lines().find(|l| l.starts_with("distance,")).unwrap();
    let ratio: f64 = distance.split(',').nth(6).unwrap().parse().unwrap();
    assert!((0.05..=0.08).contains(&ratio), "{ratio}");
}

#[test]
fn verify_reports_table_and_matching_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = netmimo(
        &[
            "verify",
            "--trials",
            "100",
            "--resolvent-pairs",
            "50",
            "--csv",
            "checks.csv",
        ],
        dir.path(),
    );
    let csv = fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(csv.starts_with("check,measured,relation,bound,verdict"));
    assert!(csv.contains("resolvent_identity_max_error"));
    let any_fail = csv.lines().any(|l| l.ends_with(",FAIL"));
    assert_eq!(out.status.success(), !any_fail);
    if any_fail {
        assert_eq!(out.status.code(), Some(1));
    }
}

#[test]
fn layout_emit_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let out = netmimo(
        &["layout", "--random", "5", "--side", "3", "--seed", "9", "-o", "l.txt"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("l.txt")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    let out = netmimo(&["layout", "--input", "l.txt", "--gamma", "0.6"], dir.path());
    assert!(out.status.success());
    let info = String::from_utf8_lossy(&out.stderr);
    assert!(info.contains("nodes: 5"));
    assert!(info.contains("cooperation radius: 2.5"));

    let out = netmimo(&["layout", "--grid", "3"], dir.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 9);
}

#[test]
fn diagnostic_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = netmimo(
        &[
            "sizes",
            "--grid",
            "2",
            "--snr-db",
            "20,40",
            "--policies",
            "perfect,conventional",
            "--export-allocations",
            "alloc.csv",
            "--dump-channel",
            "h.csv",
            "--dump-trial",
            "2",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let alloc = fs::read_to_string(dir.path().join("alloc.csv")).unwrap();
    assert!(alloc.starts_with("policy,alpha,snr_db,j,k,i,bits\n"));
    // perfect is skipped: 2 SNR points x 4^3 entries
    assert_eq!(alloc.lines().count(), 1 + 2 * 64);
    let h = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(h.starts_with("k,i,re,im\n"));
    assert_eq!(h.lines().count(), 17);
}
