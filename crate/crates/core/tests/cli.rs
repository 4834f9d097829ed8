use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_friedrichs"));
    c.env_remove("FRIEDRICHS_QUAD_PROFILE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn config(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    root.to_str().unwrap().to_string()
}

/// Rows of the named table in a CSV report.
fn table(csv: &str, name: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines().skip_while(|l| *l != format!("# table: {name}")).skip(1);
    let _header = lines.next();
    lines.take_while(|l| !l.is_empty()).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn only_table(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn edges_default_path() {
    let o = run(&["edges"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("# schema: friedrichs/1\n# command: edges\n# config: {"));
    let rows = only_table(&s);
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0][4], "0.0000000000000000e0");
    assert_eq!(rows[19][4], "1.2000000000000000e1");
    assert_eq!(rows[19][5], "1.2000000000000000e1");
}

#[test]
fn mu0_constant_and_epsilon() {
    let s = stdout(&run(&["mu0"]));
    let row = &table(&s, "mu0")[0];
    let mu0: f64 = row[0].parse().unwrap();
    assert!((mu0 - 0.015_951_512_267_546).abs() / mu0 < 1e-9);
    assert_eq!(row[5], "zero_energy_resonance");
    let s = stdout(&run(&["mu0", "--set", "form_factor.kind=epsilon_type"]));
    let row = &table(&s, "mu0")[0];
    let mu0: f64 = row[0].parse().unwrap();
    assert!((mu0 * 12.0 * std::f64::consts::PI.powi(3) - 1.0).abs() < 1e-10);
    assert_eq!(row[5], "zero_eigenvalue");
}

#[test]
fn json_output_is_parseable() {
    let o = run(&["band", "--format", "json", "--set", "path.steps=4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "friedrichs/1");
    assert_eq!(v["config"]["mu"], "mu0");
    let rows = v["tables"]["band"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][6], "inconclusive");
    assert_eq!(rows[3][6], "present");
}

#[test]
fn subcritical_origin_has_no_state() {
    let s = stdout(&run(&["band", "--set", "mu=0.5*mu0", "--set", "path.points=G,R", "--set", "path.steps=3"]));
    let rows = only_table(&s);
    assert_eq!(rows[0][6], "absent");
    assert_eq!(rows[0][7], "");
    // the collapsed band always binds
    assert_eq!(rows[2][6], "present");
}

#[test]
fn config_files_run_clean() {
    for (cmd, file) in [("band", "band_gamma_r.cfg"), ("det-scan", "det_scan_w.cfg"), ("oracle", "oracle.cfg")] {
        let o = run(&[cmd, "--config", &config(file)]);
        assert_eq!(o.status.code(), Some(0), "{cmd} {file}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn epsilon_type_asymptotics_pass() {
    let o = run(&["asymptotics", "--config", &config("asymptotics_epsilon.cfg")]);
    assert_eq!(o.status.code(), Some(0));
    let checks = table(&stdout(&o), "checks");
    let names: Vec<&str> = checks.iter().map(|r| r[0].as_str()).collect();
    assert!(names.contains(&"lower_bound_positive"));
    assert!(names.contains(&"w_slope_vanishes"));
    assert!(checks.iter().all(|r| r[4] == "pass"));
}

#[test]
fn scaled_slopes_fail_with_exit_two() {
    let o = run(&["asymptotics", "--set", "asym.slope_scale=2"]);
    assert_eq!(o.status.code(), Some(2));
    let checks = table(&stdout(&o), "checks");
    let w = checks.iter().find(|r| r[0] == "w_slope").unwrap();
    assert_eq!(w[4], "fail");
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: w_slope"));
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(run(&["edges", "--set", "quad.n_grid=9"]).status.code(), Some(1));
    assert_eq!(run(&["edges", "--set", "bogus.key=1"]).status.code(), Some(1));
    assert_eq!(run(&["edges", "--config", "/nonexistent/friedrichs.cfg"]).status.code(), Some(1));
    assert_eq!(run(&["edges", "--format", "xml"]).status.code(), Some(1));
    let o = bin().args(["mu0"]).env("FRIEDRICHS_QUAD_PROFILE", "turbo").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn quadrature_profile_scales_the_grid() {
    let o = bin().args(["edges", "--format", "json"]).env("FRIEDRICHS_QUAD_PROFILE", "strict").output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["quad"]["n_grid"], 96);
    let o = bin().args(["edges", "--format", "json"]).env("FRIEDRICHS_QUAD_PROFILE", "fast").output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["quad"]["n_grid"], 24);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = std::env::temp_dir().join(format!("friedrichs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut outputs = vec![];
    for threads in ["1", "4", "1"] {
        let path = dir.join(format!("scan-{threads}-{}.csv", outputs.len()));
        let o = run(&["det-scan", "--threads", threads, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    std::fs::remove_dir_all(&dir).unwrap();
}
