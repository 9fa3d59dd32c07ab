use std::path::Path;
use std::process::Command;

fn stvf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stvf"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("small.toml");
    std::fs::write(
        &p,
        "macro_n = 4\nfinal_time = 1e-3\ntau0 = 1e-4\nsnapshot_times = [0.0, 1e-3]\n",
    )
    .unwrap();
    p
}

#[test]
fn validate_oracles_succeeds() {
    let out = stvf().args(["validate", "oracles"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn run_twice_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let status = stvf()
            .args(["run", "--paths", "1", "--seed", "42", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success());
        csvs.push(std::fs::read(out_dir.join("indicators.csv")).unwrap());
        assert!(out_dir.join("summary.json").exists());
        assert!(out_dir.join("snapshots/path0_1.vtk").exists());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let status = stvf()
            .env("STVF_THREADS", threads)
            .args(["run", "--paths", "3", "--scheme", "fix3", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success());
        csvs.push(std::fs::read(out_dir.join("indicators.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn sweep_writes_one_table_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let status = stvf()
        .args(["sweep", "--paths", "1", "--no-adapt", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    for k in 0..3 {
        assert!(dir.path().join(format!("tol{k}/indicators.csv")).exists());
    }
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "epsilon = -1.0\n").unwrap();
    let out = stvf().args(["run", "--config"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&p, "unknown_key = 3\n").unwrap();
    let out = stvf().args(["run", "--config"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}
