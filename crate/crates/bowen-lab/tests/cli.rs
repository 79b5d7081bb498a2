use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bowen-lab"))
        .args(args)
        .env("BOWEN_LAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn systems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("systems")
}

const HEADER: &str = "system,eps,trunc,quantity,value,uncertainty";

#[test]
fn dim_csv_on_stdout() {
    let o = bin(&["dim", "--eps", "0", "--csv", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "dimension");
    let v: f64 = row[4].parse().unwrap();
    assert!((v - 2f64.ln() / 5f64.ln()).abs() < 1e-10);
}

#[test]
fn json_on_stdout_is_parseable() {
    let o = bin(&["dim", "--eps-grid", "1e-3:1e-1:4", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 4);
    assert_eq!(v["exit_code"], 0);
    let eps: Vec<f64> = v["results"].as_array().unwrap().iter().map(|r| r["eps"].as_f64().unwrap()).collect();
    assert!(eps.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_bowen-lab"))
            .args(["dim", "--registry", "linear_ifs2", "--eps-grid", "1e-4:1e-1:8", "--csv", "-"])
            .env("BOWEN_LAB_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
}

#[test]
fn csv_and_json_files() {
    let dir = std::env::temp_dir().join(format!("bowen-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("p.csv");
    let json = dir.join("p.json");
    let o = bin(&[
        "pressure",
        "--s",
        "0.5",
        "--eps",
        "0.01",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(HEADER));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["results"][0]["quantity"], "pressure");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["dim", "--eps", "5"]).status.code(), Some(2));
    assert_eq!(bin(&["dim", "--registry", "nope"]).status.code(), Some(2));
    assert_eq!(bin(&["dim", "--bogus-flag"]).status.code(), Some(2));
    assert_eq!(bin(&["pressure", "--s", "0"]).status.code(), Some(3));
    assert_eq!(bin(&["orderfit", "--a", "2.5", "--order", "1"]).status.code(), Some(4));
    assert_eq!(bin(&["list-systems"]).status.code(), Some(0));
}

#[test]
fn schema_errors_exit_2() {
    let dir = std::env::temp_dir().join(format!("bowen-lab-schema-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        ("unknown.json", r#"{"weight":{"kind":"linear_ifs2"},"colour":1}"#),
        ("malformed.json", "{\n \"weight\": \n"),
        ("kind.json", r#"{"weight":{"kind":"spiral"}}"#),
        ("graph.json", r#"{"graph":{"vertices":["a"],"edges":[{"id":"x","from":"a","to":"b"}]},"weight":{"kind":"tabulated","base":[0.5]}}"#),
    ];
    for (name, body) in cases {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        let o = bin(&["dim", "--system", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin(&["dim", "--system", dir.join("malformed.json").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bundled_system_files_solve() {
    for entry in std::fs::read_dir(systems_dir()).unwrap() {
        let p = entry.unwrap().path();
        let o = bin(&["dim", "--system", p.to_str().unwrap(), "--csv", "-"]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
        let row = stdout(&o).lines().nth(1).unwrap().to_string();
        let v: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(v > 0.0 && v <= 1.0 + 1e-9, "{row}");
    }
}

#[test]
fn expand_reports_oracle_rows() {
    let o = bin(&["expand", "--a", "10", "--order", "2", "--csv", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for q in ["s1", "s2", "s1_oracle", "s2_oracle", "s2_closed_form", "s2_displayed"] {
        assert!(text.lines().any(|l| l.split(',').nth(3) == Some(q)), "missing {q}");
    }
}

#[test]
fn verify_suites_exit_codes() {
    for suite in ["combinatorics", "gibbs", "appendixB"] {
        assert_eq!(bin(&["verify", "--suite", suite]).status.code(), Some(0), "{suite}");
    }
    // the first-order bound fails below s = 1/2
    assert_eq!(bin(&["verify", "--suite", "appendixC"]).status.code(), Some(1));
}

#[test]
fn list_systems_names_registry() {
    let text = stdout(&bin(&["list-systems"]));
    for name in ["linear_ifs1", "linear_ifs2", "cont_frac", "cont_frac_12", "gauss", "finite_markov"] {
        assert!(text.contains(name));
    }
}
