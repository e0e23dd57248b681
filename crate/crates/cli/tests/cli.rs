use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn welander(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_welander"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn smooth_model_needs_a() {
    let o = welander(&["simulate", "--model", "smooth", "--epsilon", "-0.05"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--a"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&welander(&["diagram", "--range", "0.1", "-0.1"])), 1);
    assert_eq!(code(&welander(&["diagram", "--n", "1"])), 1);
    assert_eq!(code(&welander(&["simulate"])), 1);
    assert_eq!(code(&welander(&["frobnicate"])), 1);
    assert_eq!(code(&welander(&[])), 1);
    assert_eq!(code(&welander(&["pseudo", "--epsilon", "0"])), 1);
    assert_eq!(code(&welander(&["smoothbif", "--a", "1e-4", "1e-3"])), 1);
    assert_eq!(code(&welander(&["--help"])), 0);
}

#[test]
fn simulate_writes_csv_and_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = welander(&["simulate", "--epsilon", "-0.05", "--x0", "0.5", "--y0", "0.3", "-o", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# welander simulate {"));
    assert!(header.contains("\"epsilon\":-0.05"));
    assert_eq!(lines.next(), Some("t,x,y,region"));
    let rows = data_rows(&text);
    assert!(rows.len() > 100);
    let last: Vec<f64> = rows.last().unwrap().split(',').take(3).map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 200.0);

    // the run settles onto the periodic orbit: late crossings alternate
    // between the two orbit abscissae
    let events = fs::read_to_string(dir.path().join("run.csv.events.jsonl")).unwrap();
    let xs: Vec<f64> = events
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["kind"] == "crossing")
        .map(|v| v["state"]["x"].as_f64().unwrap())
        .collect();
    assert!(xs.len() > 20);
    let n = xs.len();
    assert!((xs[n - 1] - xs[n - 3]).abs() < 1e-6);
    assert!((xs[n - 2] - xs[n - 4]).abs() < 1e-6);
    let left = xs[n - 1].min(xs[n - 2]);
    assert!((left - 0.5180017729).abs() < 1e-6);
}

#[test]
fn simulate_smooth_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smooth.csv");
    let o = welander(&[
        "simulate", "--model", "smooth", "--epsilon", "-0.0633", "--a", "1e-3", "--x0", "0.9", "--y0", "0.1",
        "--t-max", "50", "-o", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert!(rows.iter().any(|r| r.ends_with(",upper")));
    assert!(rows.iter().any(|r| r.ends_with(",lower")));
}

#[test]
fn diagram_two_rows() {
    let o = welander(&["diagram", "--range", "-0.1", "0.1", "--n", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "epsilon,attractor,x_left,x_right,amplitude"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("-0.1,real_equilibrium,0.5,0.5,0"));
    assert!(rows[1].starts_with("0.1,pseudoequilibrium,"));
}

#[test]
fn diagram_regime_transitions() {
    let o = welander(&["diagram", "--range", "-0.1", "0.25", "--n", "71"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let kinds: Vec<(f64, String)> = data_rows(&text)
        .iter()
        .map(|r| {
            let mut f = r.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().to_string())
        })
        .collect();
    assert_eq!(kinds.len(), 71);
    let changes: Vec<f64> = kinds.windows(2).filter(|w| w[0].1 != w[1].1).map(|w| w[1].0).collect();
    assert_eq!(changes.len(), 3);
    assert!(changes[0] > -1.0 / 15.0 && changes[0] < -1.0 / 15.0 + 0.005);
    assert!(changes[1].abs() < 1e-12);
    assert!((changes[2] - 0.2).abs() < 1e-12);
}

#[test]
fn pseudo_lists_one_unstable_pseudonode() {
    let o = welander(&["pseudo", "--epsilon", "-0.05"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let list = v["pseudoequilibria"].as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["classification"], "pseudonode");
    assert!(list[0]["flow_derivative"].as_f64().unwrap() > 0.0);
    let x = list[0]["x"].as_f64().unwrap();
    assert!((x - (3.25 + 2.5625f64.sqrt()) / 8.0).abs() < 1e-12);
}

#[test]
fn homoclinic_report_is_verified() {
    let o = welander(&["homoclinic", "--slide-times", "0", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["verified"], true);
    assert!(v["report"]["return_distance"].as_f64().unwrap() < 1e-5);
    assert_eq!(v["family"].as_array().unwrap().len(), 4);
}

#[test]
fn homoclinic_unverified_exits_three() {
    // a return tolerance below the launch offset cannot be met
    let o = welander(&["homoclinic", "--delta", "1e-4", "--tol", "1e-9"]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["verified"], false);
}

#[test]
fn smoothbif_rows() {
    let o = welander(&["smoothbif", "--a", "1e-3", "1e-4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1]["gap"].as_f64().unwrap() < rows[0]["gap"].as_f64().unwrap());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let p = dir.path().join(name);
        let o = welander(&["--threads", threads, "diagram", "--range", "-0.08", "0.05", "--n", "27", "-o", path_str(&p)]);
        assert_eq!(code(&o), 0);
        fs::read(&p).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    // the config echo names the output file, so compare past it
    let body = |v: &[u8]| String::from_utf8(v.to_vec()).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));

    let s1 = dir.path().join("s1.csv");
    let s2 = dir.path().join("s2.csv");
    for p in [&s1, &s2] {
        let o = welander(&["simulate", "--epsilon", "-0.03", "--t-max", "30", "-o", path_str(p)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(body(&fs::read(&s1).unwrap()), body(&fs::read(&s2).unwrap()));
    assert_eq!(
        fs::read(dir.path().join("s1.csv.events.jsonl")).unwrap(),
        fs::read(dir.path().join("s2.csv.events.jsonl")).unwrap()
    );
}
