use std::path::PathBuf;
use std::process::{Command, Output};

fn conegeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conegeom")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .find(|(k, _)| k.trim() == key)
        .unwrap_or_else(|| panic!("missing {key}"))
        .1
        .parse()
        .unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conegeom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn cone3d_report() {
    let o = conegeom(&["cone3d", "-1", "-1", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.trim() == "ric[2][3] = 3"));
    assert!(value(&text, "conelike_residual").abs() <= 1e-12);
    for key in ["eta[1][2]", "ew_s_plus", "ew_s_minus", "ric[1][1]"] {
        value(&text, key);
    }
    assert!((value(&text, "ew_s_plus") - 0.75f64.sqrt()).abs() < 1e-15);
}

#[test]
fn cone3d_json_parses() {
    let o = conegeom(&["cone3d", "-1", "1", "0.5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["ric[2][3]"].as_f64().unwrap() + 1.5).abs() < 1e-12);
}

#[test]
fn null_direction_exits_one() {
    let o = conegeom(&["cone3d", "0", "0", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NullDirection"));
}

#[test]
fn no_ew_branches_beyond_two() {
    let o = conegeom(&["cone3d", "-1", "-1", "2.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "ew_s_count"), 0.0);
    assert!(!text.contains("ew_s_plus"));
}

#[test]
fn geodesic_drift() {
    let o = conegeom(&["geodesic", "--family", "central", "--dim", "3", "--r0", "1", "--vperp", "1", "-T", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "c_sq_drift").unwrap();
    let mut rows = 0;
    let mut worst = 0.0f64;
    for l in lines {
        worst = worst.max(l.split(',').nth(col).unwrap().parse::<f64>().unwrap().abs());
        rows += 1;
    }
    assert_eq!(rows, 10001);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn collapsing_geodesic_is_an_input_error() {
    let o = conegeom(&["geodesic", "--r0", "0.8", "--vperp", "0", "--vr", "-1", "-T", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DomainViolation"));
}

#[test]
fn schwarzian_trace() {
    let o = conegeom(&["schwarzian", "--ode-step", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,f,"));
    for l in lines {
        let row: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((row[1] - 1.0 / (1.0 - row[0])).abs() < 1e-8);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [&["cone3d", "1", "0", "2"][..], &["lie", "aff1c", "--csv"], &["schwarzian", "--kappa", "0.3"]] {
        assert_eq!(conegeom(args).stdout, conegeom(args).stdout);
    }
}

#[test]
fn exit_two_iff_defect_above_tol() {
    let o = conegeom(&["cone3d", "-1", "-1", "1", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("defect above tolerance"));
    let o = conegeom(&["cone3d", "-1", "-1", "1", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    for args in [&["frobnicate"][..], &["cone3d", "1"], &["cone3d", "-1", "-1", "1", "--tol", "-1"], &[]] {
        assert_eq!(conegeom(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn lie_preset_and_file() {
    let o = conegeom(&["lie", "qa-im(-1,-1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "killing[1][1]"), -8.0);
    let p = scratch("bad.json", r#"{"dim":2,"c":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#);
    let o = conegeom(&["lie", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c[0][1][0]"));
}

#[test]
fn conelift_of_abelian_base() {
    let zeros = serde_json::to_string(&vec![vec![vec![0.0; 2]; 2]; 2]).unwrap();
    let p = scratch("base.json", &format!(r#"{{"frame":"abelian(2)","pi":{zeros},"omega":[[0,0.8],[-0.8,0]]}}"#));
    let o = conegeom(&["conelift", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!((value(&text, "ric[1][2]") + 1.2).abs() < 1e-14);
    assert!(value(&text, "ric_prediction_defect") <= 1e-12);
}

#[test]
fn ew_on_designated_berger() {
    let doc = r#"{"frame":"qa-im(-1,-1)","vertical":[1,0,0],
      "pi":[[[1,0,0],[0,1,1],[0,-1,1]],[[0,1,1],[-4,0,0],[0,0,0]],[[0,-1,1],[0,0,0],[-4,0,0]]]}"#;
    let p = scratch("berger.json", doc);
    let s = 0.75f64.sqrt().to_string();
    let o = conegeom(&["ew", p.to_str().unwrap(), "--s", &s, "--t", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(value(&text, "conservation").abs() <= 1e-10);
    assert!((value(&text, "alpha") + 0.25).abs() <= 1e-12);
}
