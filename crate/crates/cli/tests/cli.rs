use std::path::Path;
use std::process::{Command, Output};

use cmtwist::output::OutputRecord;

fn cmtwist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmtwist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = cmtwist(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stderr.is_empty());
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn table_matches_golden_files() {
    assert_eq!(stdout_ok(&["table"]), golden("table.txt"));
    assert_eq!(
        stdout_ok(&["table", "--format", "csv"]),
        golden("table.csv")
    );
    assert_eq!(
        stdout_ok(&["isotropic", "--p", "2", "--flavor", "uni"]),
        golden("isotropic_p2_uni.txt")
    );
}

#[test]
fn csv_and_json_carry_the_same_record() {
    for args in [
        vec!["table"],
        vec!["moments", "--p", "5", "--flavor", "uni"],
        vec!["bounds", "--p", "7"],
        vec!["simulate", "--k", "3", "--samples", "2000", "--seed", "9"],
    ] {
        let csv: Vec<&str> = args.iter().copied().chain(["--format", "csv"]).collect();
        let json: Vec<&str> = args.iter().copied().chain(["--format", "json"]).collect();
        let a = OutputRecord::from_csv(&stdout_ok(&csv)).unwrap();
        let b = OutputRecord::from_json(&stdout_ok(&json)).unwrap();
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a.command, args[0]);
    }
}

#[test]
fn json_schema_keys() {
    let text = stdout_ok(&["isotropic", "--p", "3", "--n", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["command", "params", "rows"] {
        assert!(v.get(key).is_some());
    }
    let rec = OutputRecord::from_json(&text).unwrap();
    assert_eq!(rec.value("fiber_size"), Some("18"));
}

#[test]
fn simulation_is_reproducible() {
    let args = [
        "simulate",
        "--p",
        "3",
        "--flavor",
        "uni",
        "--k",
        "6",
        "--samples",
        "50000",
        "--seed",
        "5",
        "--format",
        "csv",
    ];
    let first = stdout_ok(&args);
    assert_eq!(first, stdout_ok(&args));
    let threaded: Vec<&str> = args.iter().copied().chain(["--threads", "3"]).collect();
    assert_eq!(first, stdout_ok(&threaded));
    let single: Vec<&str> = args.iter().copied().chain(["--threads", "1"]).collect();
    assert_eq!(first, stdout_ok(&single));
}

#[test]
fn zero_steps_give_a_point_mass() {
    let rec = OutputRecord::from_csv(&stdout_ok(&[
        "simulate",
        "--k",
        "0",
        "--samples",
        "1000",
        "--format",
        "csv",
    ]))
    .unwrap();
    assert_eq!(rec.value("tv_distance"), Some("0"));
    assert_eq!(rec.value("count[0]"), Some("1000"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(
        &cfg,
        "# demo\np = 5\nflavor = uni\nk = 4\nsamples = 3000\nshift = fd\n",
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let cfg_s = cfg.to_str().unwrap();
    let out_s = out.to_str().unwrap();
    let printed = stdout_ok(&[
        "simulate", cfg_s, "--k", "2", "--format", "json", "--out", out_s,
    ]);
    assert!(printed.is_empty());
    let rec = OutputRecord::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec.params["p"], "5");
    assert_eq!(rec.params["k"], "2");
    assert_eq!(rec.params["shift"], "fd");
    assert_eq!(rec.value("count[0]"), Some("0"));
}

#[test]
fn errors_go_to_stderr_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "p = 3\nsamples = lots\n").unwrap();
    let out = cmtwist(&["simulate", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("samples"), "{err}");

    for args in [
        vec!["table", "--p", "4"],
        vec!["dist", "--flavor", "orthogonal"],
        vec!["moments", "--format", "xml"],
        vec!["bounds", "--p", "2", "--flavor", "sym", "--degk", "0"],
        vec![
            "ladder",
            "--k",
            "1",
            "--density",
            "0.5",
            "--horizon",
            "1000",
        ],
        vec!["ladder", "--k", "1", "--cap", "10"],
    ] {
        let out = cmtwist(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
    let capped = cmtwist(&["ladder", "--k", "1", "--cap", "10"]);
    assert!(String::from_utf8_lossy(&capped.stderr).contains("exceeds the cap"));
}

#[test]
fn dist_and_ladder_output() {
    let rec = OutputRecord::from_csv(&stdout_ok(&[
        "dist", "--p", "2", "--flavor", "sym", "--rmax", "3", "--format", "csv",
    ]))
    .unwrap();
    assert_eq!(rec.rows.len(), 5);
    assert!(rec.value("D(0)").unwrap().starts_with("0.4194"));

    let rec =
        OutputRecord::from_csv(&stdout_ok(&["ladder", "--k", "0", "--format", "csv"])).unwrap();
    assert_eq!(rec.value("L_1"), Some("100"));
    assert_eq!(rec.value("D_1(10)"), Some("24"));
}
