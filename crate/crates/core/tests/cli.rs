use std::fs;
use std::process::{Command, Output};

fn ballwidth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballwidth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_csv() {
    let o = ballwidth(&["table", "-p", "5", "-q", "8", "-r", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[0], "i,j,size,height");
    assert!(lines.contains(&"2,2,280,4"));
}

#[test]
fn table_sphere_and_tikz() {
    let o = ballwidth(&["table", "-p", "3", "-q", "5", "--sphere", "2", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sphere(2)"));

    let o = ballwidth(&["table", "-p", "9", "-q", "17", "-r", "10", "--format", "tikz"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert!(t.starts_with("\\begin{tikzpicture}"));
    assert!(t.contains("at (10,4) {1633632};"));
}

#[test]
fn width_json() {
    let o = ballwidth(&["width", "-p", "2", "-q", "2", "-r", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["width"], "2");
    assert_eq!(v["antichain"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["table", "-p", "0", "-q", "2", "-r", "1"],
        vec!["table", "-p", "5", "-q", "8", "-r", "4", "--format", "xml"],
        vec!["table", "-p", "5", "-q", "8"],
        vec!["width", "-p", "2", "-q", "2", "-r", "1", "--format", "tikz"],
        vec!["frobnicate"],
        vec!["width", "--budget", "0", "-p", "2", "-q", "2", "-r", "1"],
        vec!["sweep"],
        vec!["chains", "-n", "3", "-p", "2"],
    ] {
        let o = ballwidth(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn budget_refusal() {
    let o = ballwidth(&["width", "-p", "5", "-q", "8", "-r", "4", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1093"));
}

#[test]
fn custom_poset_klym() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(&path, r#"{"elements": 3, "relations": [[0, 1]]}"#).unwrap();
    let o = ballwidth(&["klym", "--custom-poset", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], false);
    assert_eq!(v["max_lym_sum"], "3/2");

    fs::write(&path, r#"{"elements": 2, "relations": [[0, 1], [1, 0]]}"#).unwrap();
    let o = ballwidth(&["width", "--custom-poset", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed order"));
}

#[test]
fn certify_exit_codes() {
    let o = ballwidth(&["certify", "-p", "1", "-q", "2", "-r", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "CERTIFIED_STRICT");
    assert_eq!(v["certificate"]["profiles"][0]["multiplicity"], "2");

    let o = ballwidth(&["certify", "-p", "4", "-q", "7", "-r", "4", "--zigzag"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("INFEASIBLE"));

    let o = ballwidth(&["certify", "-p", "5", "-q", "8", "-r", "4", "--strict"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("CERTIFIED_STRICT"));

    let o = ballwidth(&["certify", "-p", "2", "-q", "2", "-r", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("NOT_APPLICABLE"));
}

#[test]
fn chains_and_theorem() {
    let o = ballwidth(&["chains", "-n", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["chains"][0], serde_json::json!(["{}", "{1}", "{1,2}"]));
    assert_eq!(v["chains"][1], serde_json::json!(["{2}"]));

    let o = ballwidth(&["chains", "-p", "2", "-q", "2", "-r", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("B_1[2,2]: 2 chains"));

    let o = ballwidth(&["theorem", "-p", "5", "-q", "8", "-r", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bound"], "321");
    assert_eq!(v["width"], "321");
    assert_eq!(v["holds"], true);
}

#[test]
fn sweep_output_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let out_s = out.to_str().unwrap();
    let args = ["sweep", "--n-max", "6", "--no-timing", "--format", "csv", "--out", out_s];
    let first = ballwidth(&args);
    assert_eq!(first.status.code(), Some(0));
    let csv = stdout(&first);
    assert!(csv.contains("2,2,1,5,0,2,true,2,false,NOT_APPLICABLE,true,true,TIE,0"));
    let file = fs::read_to_string(&out).unwrap();

    let lines: Vec<&str> = file.lines().collect();
    fs::write(&out, format!("{}\n{}", lines[0], &lines[1][..10])).unwrap();
    let mut resume = args.to_vec();
    resume.push("--resume");
    let second = ballwidth(&resume);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(stdout(&second), csv);
    assert_eq!(fs::read_to_string(&out).unwrap(), file);

    let o = ballwidth(&["sweep", "--n-max", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = ballwidth(&["sweep", "--n-max", "4", "--out", "/nonexistent-dir/x.jsonl"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&out, format!("garbage\n{}\n", lines[0])).unwrap();
    let o = ballwidth(&resume);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = ballwidth(&["table", "-p", "1", "-q", "2", "-r", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&out).unwrap().starts_with("i,j,size,height\n"));
}

#[test]
fn help_exits_zero() {
    let o = ballwidth(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweep"));
}
