//! End-to-end tests of the binary: exit codes, examples and golden JSON.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    root().join("corpus").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobham-lab"))
        .args(args)
        .env_remove("COBHAM_LAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Same keys in the same order and the same value kinds, recursively.
fn same_shape(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    if kind(a) != kind(b) {
        return Err(format!("{path}: {} vs {}", kind(a), kind(b)));
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let (kx, ky): (Vec<_>, Vec<_>) = (x.keys().collect(), y.keys().collect());
            if kx != ky {
                return Err(format!("{path}: keys {kx:?} vs {ky:?}"));
            }
            for (k, v) in x {
                same_shape(v, &y[k], &format!("{path}.{k}"))?;
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                same_shape(v, w, &format!("{path}[{i}]"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// Compares JSON output with `tests/golden/<name>.json`: exactly, or only in
/// shape when the output carries floating-point diagnostics.
fn golden(name: &str, args: &[&str], exact: bool) {
    let o = run(args);
    assert!(o.status.success(), "{name}: {}", stderr(&o));
    let got: Value = serde_json::from_str(&stdout(&o)).expect("JSON output");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
        return;
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).expect("golden file")).unwrap();
    same_shape(&got, &want, name).unwrap();
    if exact {
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn classify_example() {
    let o = run(&["classify", &corpus("fig1b.aut"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "NonSparse");
    assert_eq!(v["tied"], serde_json::json!(["B", "C", "E"]));
    assert!(stdout(&o).trim_start().starts_with("{\n  \"verdict\": \"NonSparse\",\n  \"tied\""));
}

#[test]
fn rank_of_non_sparse_is_a_domain_error() {
    let o = run(&["rank", &corpus("fig1b.aut")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("non-sparse"));
}

#[test]
fn eval_example() {
    let o = run(&["eval", &corpus("fig1a.aut"), "13"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    let o = run(&["eval", "fig1b", "13", "100000000000000000000000000000"]);
    assert_eq!(stdout(&o).lines().next(), Some("1"));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "no/such/file.aut", "1"]).status.code(), Some(2));
    assert_eq!(run(&["count", "fig1a", "ten"]).status.code(), Some(2));
    assert_eq!(run(&["count", "fig1a", "10", "--method", "fast"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("cobham-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.aut");
    std::fs::write(&bad, "m 2\nstart q\nstate q 0\ntrans q 0 q\n").unwrap();
    let o = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"));
    assert_eq!(run(&["walks", "fib", "u", "nowhere", "3"]).status.code(), Some(2));
}

#[test]
fn invalid_automata_are_domain_errors() {
    let dir = std::env::temp_dir().join(format!("cobham-lab-cli-inv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("lz.aut");
    std::fs::write(&bad, "m 2\nstart a\nstate a 0\nstate b 1\ntrans a 0 b\ntrans a 1 b\ntrans b 0 b\ntrans b 1 b\n").unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("leading-zero-invariance"));
    assert_eq!(run(&["count", bad.to_str().unwrap(), "10"]).status.code(), Some(1));
    assert_eq!(run(&["validate", &corpus("fig1b.aut")]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_1() {
    assert_eq!(run(&["exponent", "fig1a"]).status.code(), Some(1));
    assert_eq!(run(&["arborize", "fig1b"]).status.code(), Some(1));
    assert_eq!(run(&["witness", "fig1a", "P", "2"]).status.code(), Some(1));
    assert_eq!(run(&["count", "fig1a", "1000", "--method", "matrix"]).status.code(), Some(1));
    assert_eq!(run(&["count", "fig1a", "1000", "--method", "brute", "--budget", "10"]).status.code(), Some(1));
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cobham-lab"))
        .args(["walks", "fib", "u", "u", "50"])
        .env("COBHAM_LAB_BUDGET", "20")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&run(&["walks", "fib", "u", "u", "4"])), "5\n");
}

#[test]
fn methods_agree() {
    let counts: Vec<String> = ["dp", "brute", "matrix"]
        .iter()
        .map(|m| stdout(&run(&["count", "fig1b", "4095", "--method", m])))
        .collect();
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
}

#[test]
fn output_file_and_sidecar() {
    let dir = std::env::temp_dir().join(format!("cobham-lab-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("tree.aut");
    let o = run(&["arborize", "fig1a", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(run(&["validate", out.to_str().unwrap()]).status.code(), Some(0));
    assert!(text.starts_with("m 2\n"));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("tree.json")).unwrap()).unwrap();
    assert_eq!(sidecar["height"], 2);
}

#[test]
fn report_reproduces_the_corpus() {
    let o = run(&["report", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = run(&["report", &corpus("fig4b.aut"), "--samples", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS fig4b count at 256"));
}

#[test]
fn golden_outputs() {
    let fig1a = corpus("fig1a.aut");
    let fig1b = corpus("fig1b.aut");
    let fib = corpus("fib.aut");
    golden("validate_fig1b", &["validate", &fig1b, "--json"], true);
    golden("eval_fig1b", &["eval", &fig1b, "0", "13", "64", "--json"], true);
    golden("classify_fig1a", &["classify", &fig1a, "--json"], true);
    golden("classify_fig1b", &["classify", &fig1b, "--json"], true);
    golden("rank_fig1a", &["rank", &fig1a, "--json"], true);
    golden("arborize_fig1a", &["arborize", &fig1a, "--json"], true);
    golden("exponent_fig1b", &["exponent", &fig1b, "--json"], false);
    golden("exponent_fib", &["exponent", &fib, "--json"], false);
    golden("perron_fig1b", &["perron", &fig1b, "--json"], false);
    golden("count_fig1b", &["count", &fig1b, "1000000", "--json"], true);
    golden("count_members_fig1a", &["count", &fig1a, "100", "--members", "--json"], true);
    golden("table_fig1b", &["table", &fig1b, "--k-max", "12", "--json"], false);
    golden("walks_fib", &["walks", &fib, "u", "u", "10", "--json"], true);
    golden("walks_table_fib", &["walks", &fib, "u", "u", "6", "--table", "--json"], true);
    golden("witness_fig1b", &["witness", &fig1b, "B", "3", "--json"], true);
    golden("wk_fig1b", &["wk", &fig1b, "8", "--states", "B,C", "--json"], true);
    golden("report_fig1a", &["report", "fig1a", "--samples", "3", "--json"], true);
}
