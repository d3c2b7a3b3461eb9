//! End-to-end checks of the command-line surface: flags, file formats, and
//! reproducibility of emitted CSV.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sced() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sced"))
}

fn workspace_file(relative: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn run(args: &[&str]) -> Output {
    sced().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file written")
}

#[test]
fn pos_emits_generation_and_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pos.csv");
    let instance = workspace_file("crates/core/cases/2bus_base.json");
    let output = run(&[
        "pos",
        "--case",
        "2bus",
        "--instance",
        instance.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(
        read(&out),
        "bus,generation\n\
         1,100.000000\n\
         2,100.000000\n\
         cost_ed,cost_sc,pos\n\
         200.000000,300.000000,1.50000000\n"
    );
}

#[test]
fn solve_ed_writes_the_unconstrained_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ed.csv");
    let instance = workspace_file("crates/core/cases/2bus_base.json");
    let output = run(&[
        "solve-ed",
        "--case",
        "2bus",
        "--instance",
        instance.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(read(&out), "bus,generation\n1,200.000000\n2,0.00000000\n");
}

#[test]
fn solve_sced_respects_contingencies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sced.csv");
    let instance = workspace_file("crates/core/cases/pjm5_nominal.json");
    let output = run(&[
        "solve-sced",
        "--case",
        "pjm5",
        "--instance",
        instance.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = read(&out);
    assert!(csv.starts_with("bus,generation\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("study.json");
    std::fs::write(
        &spec,
        r#"{"mode":"random-distribution-study",
            "range":{"start":100.0,"stop":400.0,"step":100.0},
            "expensive_buses":[3,4,5],"runs":25,"seed":9}"#,
    )
    .unwrap();

    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let output = run(&[
            "sweep",
            "--case",
            "pjm5",
            "--mode",
            "random-distribution-study",
            "--spec",
            spec.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        outputs.push(read(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with("aggregate_demand_mw,status,feasible_runs,pos_max,pos_avg\n"));
}

#[test]
fn bundled_capacity_sweep_spec_reaches_the_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("capacity.csv");
    let spec = workspace_file("specs/capacity_sweep_2bus.json");
    let output = run(&[
        "sweep",
        "--case",
        "2bus",
        "--mode",
        "capacity-sweep",
        "--spec",
        spec.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = read(&out);
    assert!(csv.ends_with("300.000000,1.50000000,ok,200.000000,300.000000,1.50000000\n"));
}

#[test]
fn worst_case_reports_the_maximizer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("worst.csv");
    let output = run(&[
        "worst-case",
        "--case",
        "2bus",
        "--dstep",
        "50",
        "--dmax",
        "300",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(
        read(&out),
        "bus,demand,capacity\n\
         1,0.00000000,inf\n\
         2,200.000000,inf\n\
         cost_ed,cost_sc,pos\n\
         200.000000,300.000000,1.50000000\n"
    );
}

#[test]
fn two_bus_oracle_prints_the_analysis() {
    let output = run(&[
        "two-bus-oracle",
        "--alpha1", "1", "--alpha2", "2",
        "--limit1", "100", "--limit2", "100",
        "--b1", "1", "--b2", "1",
        "--d1", "0", "--d2", "200",
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("PoS = 1.50000000"), "{stdout}");
    assert!(stdout.contains("worst case"), "{stdout}");
}

#[test]
fn ablation_subcommand_runs_a_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ablation.csv");
    let output = run(&[
        "ablation",
        "--variant",
        "homogeneous",
        "--runs",
        "20",
        "--seed",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(read(&out).lines().count(), 21);
}

#[test]
fn missing_case_file_fails_cleanly() {
    let output = run(&[
        "solve-ed",
        "--case",
        "/nonexistent/case.json",
        "--instance",
        "/nonexistent/instance.json",
        "--output",
        "/tmp/never.csv",
    ]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("reading case"));
}

#[test]
fn infeasible_instance_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("short.json");
    std::fs::write(&instance, r#"{"gen_capacity":{"1":50.0,"2":50.0},"demand":{"2":200.0}}"#)
        .unwrap();
    let out = dir.path().join("out.csv");
    let output = run(&[
        "solve-ed",
        "--case",
        "2bus",
        "--instance",
        instance.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("total capacity"), "{stderr}");
}
