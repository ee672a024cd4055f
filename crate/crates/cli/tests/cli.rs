use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use weaversim_cli::{execute, load_report, render_all, Body, ScenarioFile, Task};

const BIN: &str = env!("CARGO_BIN_EXE_weaversim");

fn reference_json() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.json")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn minimal(dir: &Path) -> PathBuf {
    write_scenario(dir, "{ \"schema_version\": 1 }\n")
}

/// Reference scenario with short bursts, for the slower link runs.
fn short_link(dir: &Path) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(reference_json()).unwrap()).unwrap();
    for m in v["modulations"].as_array_mut().unwrap() {
        m["n_symbols"] = 2000.into();
    }
    write_scenario(dir, &serde_json::to_string_pretty(&v).unwrap())
}

fn weaversim(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env_remove("WEAVERSIM_OUT").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = weaversim(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn report_value(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_default_has_three_gigahertz_weaver_range() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("out");
    let stdout = ok(&["plan", "--scenario", s(&scen), "--out", s(&out)]);
    assert!(stdout.starts_with("seed: 0\n"));
    let r = report_value(&out);
    assert_eq!(r["command"], "plan");
    assert_eq!(r["schema_version"], 1);
    let rows = r["results"]["architectures"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let weaver = rows.iter().find(|a| a["architecture"] == "weaver_shared").unwrap();
    assert_eq!(weaver["tuning_range"].as_f64().unwrap(), 3e9);
    assert!(out.join("plan_fbw.svg").exists());
    assert!(out.join("plan_architectures.csv").exists());
}

#[test]
fn plan_arch_filter_keeps_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("out");
    ok(&["plan", "--scenario", s(&scen), "--out", s(&out), "--arch", "direct"]);
    let r = report_value(&out);
    let rows = r["results"]["architectures"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["architecture"], "direct_conversion");
    assert!(r["results"]["weaver"].is_null());
}

#[test]
fn malformed_band_is_a_named_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = write_scenario(
        tmp.path(),
        r#"{
  "schema_version": 1,
  "band_plan": { "lower_band": [76e9, 71e9], "upper_band": [81e9, 86e9], "channel_width": 2e9 }
}"#,
    );
    let out = weaversim(&["plan", "--scenario", s(&scen), "--out", s(&tmp.path().join("o"))]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert_eq!(err["error"]["field"], "band_plan");
    assert!(!tmp.path().join("o/report.json").exists());
}

#[test]
fn schema_errors_point_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = write_scenario(tmp.path(), "{\n  \"schema_version\": 1,\n  \"array\": { \"rows\": 4, \"colz\": 4 }\n}\n");
    let out = weaversim(&["budget", "--scenario", s(&scen), "--out", s(&tmp.path().join("o"))]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "schema");
    assert_eq!(err["error"]["line"], 3);
    assert!(err["error"]["message"].as_str().unwrap().contains("colz"));
}

#[test]
fn schema_version_is_required_and_checked() {
    assert!(ScenarioFile::parse("{}").is_err());
    let err = ScenarioFile::parse(r#"{"schema_version": 9}"#).unwrap_err();
    assert!(err.to_string().contains("schema_version 9"));
    assert_eq!(weaversim_cli::error_json(&err)["error"]["kind"], "schema");
}

#[test]
fn budget_defaults_give_table_figures() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("out");
    ok(&["budget", "--scenario", s(&scen), "--out", s(&out)]);
    let r = report_value(&out);
    assert_eq!(r["results"]["table1"]["eirp_over_pdc_percent"].as_f64().unwrap(), 25.0);
    let steps: Vec<f64> = r["results"]["scaling"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|row| row["eirp_step_db"].as_f64())
        .collect();
    assert_eq!(steps.len(), 4);
    for st in steps {
        assert!((st - 20.0 * 2f64.log10()).abs() < 1e-12);
    }
}

#[test]
fn default_outputs_match_golden_files() {
    for cmd in ["plan", "budget"] {
        let tmp = tempfile::tempdir().unwrap();
        let scen = minimal(tmp.path());
        let out = tmp.path().join("out");
        ok(&[cmd, "--scenario", s(&scen), "--out", s(&out)]);
        let got = std::fs::read_to_string(out.join("report.json")).unwrap();
        let path = golden(&format!("{cmd}_report.json"));
        if std::env::var_os("WEAVERSIM_BLESS").is_some() {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &got).unwrap();
        }
        let want = std::fs::read_to_string(&path).unwrap();
        assert_eq!(got, want, "{cmd} report drifted from {}", path.display());
    }
}

#[test]
fn irr_grid_csv_within_half_db() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&["irr", "--grid", "--scenario", s(&reference_json()), "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("irr.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gain_imb_db,phase_imb_deg,analytic_db,simulated_db,delta_db"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().any(|r| r[0] == 1.0 && r[1] == 2.5));
    for r in &rows {
        assert!(r[4].abs() <= 0.5, "{r:?}");
        assert!((r[3] - r[2] - r[4]).abs() < 1e-9);
    }
}

#[test]
fn beam_angle_sweep_gives_thirteen_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&["beam", "--angles", "-30:5:30", "--scenario", s(&reference_json()), "--out", s(&out)]);
    let r = report_value(&out);
    let beams = r["results"]["beams"].as_array().unwrap();
    assert_eq!(beams.len(), 13);
    assert_eq!(beams[0]["report"]["steer_angle"], -30.0);
    assert_eq!(beams[12]["report"]["steer_angle"], 30.0);
    let svg = std::fs::read_to_string(out.join("beam_patterns.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    for a in (-30..=30).step_by(5) {
        assert!(svg.contains(&format!("\n{a}°\n")), "legend lacks {a}°");
    }
}

#[test]
fn seed_flag_overrides_file_and_is_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("out");
    let stdout = ok(&["beam", "--scenario", s(&scen), "--out", s(&out), "--seed", "17"]);
    assert!(stdout.starts_with("seed: 17\n"));
    let r = report_value(&out);
    assert_eq!(r["seed"], 17);
    assert_eq!(r["scenario"]["seed"], 17);
}

#[test]
fn env_var_sets_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("from_env");
    let status = Command::new(BIN)
        .args(["budget", "--scenario", s(&scen)])
        .env("WEAVERSIM_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("report.json").exists());
}

#[test]
fn replot_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let link = short_link(tmp.path());
    let cases: [(&str, &[&str], PathBuf); 5] = [
        ("plan", &[], reference_json()),
        ("irr", &["--grid"], reference_json()),
        ("beam", &["--angles=-20:10:20"], reference_json()),
        ("link", &[], link),
        ("budget", &[], reference_json()),
    ];
    for (cmd, extra, scen) in cases {
        let first = tmp.path().join(format!("{cmd}_a"));
        let again = tmp.path().join(format!("{cmd}_b"));
        let mut args = vec![cmd, "--scenario", s(&scen), "--out", s(&first)];
        args.extend_from_slice(extra);
        ok(&args);
        let report = first.join("report.json");
        ok(&[cmd, "--replot", s(&report), "--out", s(&again)]);
        let mut n = 0;
        for entry in std::fs::read_dir(&again).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                std::fs::read(again.join(&name)).unwrap(),
                std::fs::read(first.join(&name)).unwrap(),
                "{cmd}: {name:?}"
            );
            n += 1;
        }
        assert!(n >= 2, "{cmd} produced {n} plots");
        assert!(!again.join("report.json").exists());
    }
}

#[test]
fn replot_rejects_wrong_command() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = minimal(tmp.path());
    let out = tmp.path().join("out");
    ok(&["budget", "--scenario", s(&scen), "--out", s(&out)]);
    let res = weaversim(&["plan", "--replot", s(&out.join("report.json")), "--out", s(&out)]);
    assert!(!res.status.success());
}

#[test]
fn link_reports_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = short_link(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["link", "--scenario", s(&scen), "--out", s(&a), "--seed", "5"]);
    ok(&["link", "--scenario", s(&scen), "--out", s(&b), "--seed", "5"]);
    assert_eq!(
        std::fs::read(a.join("report.json")).unwrap(),
        std::fs::read(b.join("report.json")).unwrap()
    );
}

#[test]
fn reports_round_trip_through_the_library() {
    let file = ScenarioFile::load(&reference_json()).unwrap();
    let report = execute(&Task::Budget, &file).unwrap();
    let json = report.to_json().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("report.json");
    std::fs::write(&path, &json).unwrap();
    let back = load_report(&path).unwrap();
    assert_eq!(back, report);
    assert!(matches!(back.body, Body::Budget(_)));
    assert_eq!(render_all(&back).unwrap(), render_all(&report).unwrap());
}

#[test]
fn computation_failures_exit_nonzero_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = weaversim(&["beam", "--angles", "95", "--scenario", s(&reference_json()), "--out", s(&tmp.path().join("o"))]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("seed: 0"));
}

/// Paths to every JSON object in `v`.
fn object_paths(v: &Value, here: Vec<String>, acc: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) => {
            acc.push(here.clone());
            for (k, child) in map {
                let mut p = here.clone();
                p.push(k.clone());
                object_paths(child, p, acc);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                let mut p = here.clone();
                p.push(i.to_string());
                object_paths(child, p, acc);
            }
        }
        _ => {}
    }
}

fn at<'a>(v: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(v, |node, key| match node {
        Value::Array(items) => &mut items[key.parse::<usize>().unwrap()],
        other => &mut other[key.as_str()],
    })
}

fn reference_value() -> Value {
    serde_json::from_str(&std::fs::read_to_string(reference_json()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unknown_keys_rejected_anywhere(pick in any::<prop::sample::Index>(), key in "[a-z][a-z_]{0,11}") {
        let mut doc = reference_value();
        let mut paths = Vec::new();
        object_paths(&doc, Vec::new(), &mut paths);
        let path = pick.get(&paths).clone();
        let obj = at(&mut doc, &path).as_object_mut().unwrap();
        prop_assume!(!obj.contains_key(&key));
        obj.insert(key.clone(), Value::from(1));
        let err = ScenarioFile::parse(&serde_json::to_string_pretty(&doc).unwrap());
        prop_assert!(err.is_err(), "accepted `{key}` at {path:?}");
    }

    #[test]
    fn renamed_keys_rejected(pick in any::<prop::sample::Index>(), suffix in "[a-z]{1,3}") {
        let mut doc = reference_value();
        let mut paths = Vec::new();
        object_paths(&doc, Vec::new(), &mut paths);
        let path = pick.get(&paths).clone();
        let obj = at(&mut doc, &path).as_object_mut().unwrap();
        let keys: Vec<String> = obj.keys().cloned().collect();
        prop_assume!(!keys.is_empty());
        let old = &keys[suffix.len() % keys.len()];
        let value = obj.remove(old).unwrap();
        obj.insert(format!("{old}{suffix}"), value);
        prop_assert!(ScenarioFile::parse(&serde_json::to_string(&doc).unwrap()).is_err());
    }
}

#[test]
fn shipped_scenario_is_valid() {
    let file = ScenarioFile::load(&reference_json()).unwrap();
    file.scenario().validate().unwrap();
    let v = reference_value();
    assert_eq!(v["schema_version"], 1);
}
