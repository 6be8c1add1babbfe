mod common;

use common::fixture;
use sbfem_seepage::io::parse_native_model;
use sbfem_seepage::recovery::HeadProbe;
use sbfem_seepage::solver::Simulation;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sbfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbfem")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn column_csv_has_exact_mid_nodes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let column = fixture("column.json");
    let o = sbfem(&["solve", "--model", path(&column), "--out", path(&out), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("heads.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,x,y,head"));
    let mut mids = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((f[3] - 5.0 * f[2]).abs() < 1e-12, "{line}");
        if f[2] == 1.0 {
            mids += 1;
            assert!((f[3] - 5.0).abs() < 1e-12);
        }
    }
    assert_eq!(mids, 2);
    let reactions = fs::read_to_string(out.join("reactions.csv")).unwrap();
    let net: f64 = reactions.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!(net.abs() < 1e-12, "{reactions}");
    assert!(out.join("solution.json").exists());
}

#[test]
fn verify_patch_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = sbfem(&["verify", "--suite", "patch", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("patch"));
    let files = listing(&out);
    assert!(files.contains(&"report.txt".to_string()) && files.contains(&"patch.csv".to_string()), "{files:?}");
}

#[test]
fn dam_monitor_ends_at_the_steady_head() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dam");
    let model_path = fixture("dam_analog.json");
    let o = sbfem(&["solve", "--model", path(&model_path), "--out", path(&out), "--monitor", "P=(40,20)"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("monitors.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,P"));
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let (t_last, h_last) = *rows.last().unwrap();

    let model = parse_native_model(&fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(t_last, model.transient.as_ref().unwrap().t_end);
    let sim = Simulation::new(&model).unwrap();
    let steady = sim.steady(t_last).unwrap().heads;
    let target = HeadProbe::new(&model.mesh, &sim.operators, sbfem_seepage::geometry::Point2::new(40.0, 20.0))
        .unwrap()
        .eval(&steady);
    assert!(((h_last - target) / target).abs() < 1e-3, "{h_last} vs {target}");
    assert!(listing(&out).iter().any(|n| n == "frames.csv"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let model = fixture("dam_analog.json");
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = tmp.path().join(name);
            let o = sbfem(&["solve", "--model", path(&model), "--out", path(&out), "--t-end", "200"]);
            assert!(o.status.success());
            out
        })
        .collect();
    let files = listing(&runs[0]);
    assert_eq!(files, listing(&runs[1]));
    for f in &files {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn export_reproduces_the_solve_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (run, again) = (tmp.path().join("run"), tmp.path().join("again"));
    let model = fixture("dam_analog.json");
    assert!(sbfem(&["solve", "--model", path(&model), "--out", path(&run), "--t-end", "100"]).status.success());
    let o = sbfem(&["export", "--model", path(&run), "--out", path(&again)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in listing(&again) {
        assert_eq!(fs::read(run.join(&f)).unwrap(), fs::read(again.join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_run_leaves_only_the_failure_log() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.inp");
    fs::write(&bad, "*NODE\n1, 0.0, 0.0\n*STEP\n").unwrap();
    let out = tmp.path().join("out");
    let o = sbfem(&["solve", "--model", path(&bad), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(listing(&out), vec!["failure.log".to_string()]);
    let log = fs::read_to_string(out.join("failure.log")).unwrap();
    assert!(log.starts_with("exit code 2") && log.contains('3'), "{log}");

    // A directory holding only a failure log may be reused.
    let column = fixture("column.json");
    assert!(sbfem(&["solve", "--model", path(&column), "--out", path(&out)]).status.success());
    assert!(!out.join("failure.log").exists());
}

#[test]
fn exit_codes_by_failure_class() {
    let tmp = tempfile::tempdir().unwrap();
    let column = fixture("column.json");

    // Arguments: unknown suite, bad monitor, non-empty output directory, steady model with only --dt.
    assert_eq!(sbfem(&["verify", "--suite", "bogus"]).status.code(), Some(1));
    let o = sbfem(&["solve", "--model", path(&column), "--out", path(&tmp.path().join("m")), "--monitor", "P=(1)"]);
    assert_eq!(o.status.code(), Some(1));
    fs::write(tmp.path().join("stray.txt"), "x").unwrap();
    assert_eq!(sbfem(&["solve", "--model", path(&column), "--out", path(tmp.path())]).status.code(), Some(1));
    let o = sbfem(&["solve", "--model", path(&column), "--out", path(&tmp.path().join("d")), "--dt", "1"]);
    assert_eq!(o.status.code(), Some(1));

    // Model: missing file.
    let o = sbfem(&["solve", "--model", "/nonexistent/model.json", "--out", path(&tmp.path().join("n"))]);
    assert_eq!(o.status.code(), Some(2));

    // Solver: no prescribed heads leaves the system singular.
    let mut model = parse_native_model(&fs::read_to_string(&column).unwrap()).unwrap();
    model.dirichlet.clear();
    let floating = tmp.path().join("floating.json");
    fs::write(&floating, sbfem_seepage::io::serialize_native_model(&model)).unwrap();
    let o = sbfem(&["solve", "--model", path(&floating), "--out", path(&tmp.path().join("f"))]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(sbfem(&["--help"]).status.code(), Some(0));
}
