use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_route-bench"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_report_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = tmp.path().join("suite");
    let results = tmp.path().join("results.csv");
    let plans = tmp.path().join("plans");
    let trace = tmp.path().join("trace.csv");
    let report = tmp.path().join("report");

    let out = bench(&[
        "gen-suite",
        "--grid",
        "6x6",
        "--maps",
        "3",
        "--assignments",
        "2",
        "--robots",
        "8",
        "--seed",
        "5",
        "--out",
        path(&suite),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(suite.join("map_02.txt").exists());

    let out = bench(&[
        "run",
        "--suite",
        path(&suite),
        "--variants",
        "CARP,CARP10,Proposed_3",
        "--fleet",
        "6",
        "--seeds",
        "0,1",
        "--plans-dir",
        path(&plans),
        "--trace",
        path(&trace),
        "--out",
        path(&results),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 3 * 2);
    assert!(fs::read_to_string(&trace)
        .unwrap()
        .starts_with("map,assignment,variant,seed,k,iteration"));

    for by in ["map", "k"] {
        let out = bench(&[
            "report",
            "--in",
            path(&results),
            "--by",
            by,
            "--out",
            path(&report),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for name in [
        "fail_rate.csv",
        "total_actions.csv",
        "time_to_plan.csv",
        "addition_times.csv",
    ] {
        assert!(report.join(name).exists(), "{name}");
    }

    let dump = fs::read_dir(&plans)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_str()
                .unwrap()
                .starts_with("map02")
        })
        .expect("a plan dump for the full grid");
    let out = bench(&["validate", "--suite", path(&suite), "--plans", path(&dump)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains(": 0 violations"));

    // Every robot's last visit moved onto robot 0's goal.
    let text = fs::read_to_string(&dump).unwrap();
    let goal = text
        .lines()
        .skip(2)
        .find(|l| l.starts_with("0,") && l.ends_with(",inf"))
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .unwrap();
    let broken: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() == 5 && f[4] == "inf" && f[0] != "robot" {
                format!("{},{},{goal},{},{}\n", f[0], f[1], f[3], f[4])
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let bad = tmp.path().join("broken.csv");
    fs::write(&bad, broken).unwrap();
    let out = bench(&[
        "validate",
        "--suite",
        path(&suite),
        "--plans",
        path(&bad),
        "--map",
        "2",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds"));

    let out = bench(&["validate", "--suite", path(&suite), "--plans", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rejects_bad_arguments() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bench(&["gen-suite", "--grid", "6by6", "--out", path(tmp.path())]);
    assert!(!out.status.success());
    let out = bench(&[
        "report",
        "--in",
        "missing.csv",
        "--by",
        "robot",
        "--out",
        path(tmp.path()),
    ]);
    assert!(!out.status.success());
}
