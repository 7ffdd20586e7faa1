use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use serde_json::{json, Value};
use tempfile::TempDir;

const QUERY: &str = r#"{
    "fixed": {"service_model": "IaaS"},
    "optimize": [
        {"dim": "latency", "importance": "very_important"},
        {"dim": "ongoing_cost", "importance":"extremely_important"},
        {"dim": "storage_space", "importance": "slightly_important"}
    ]
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skyfilter"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ids(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap().to_owned())
        .collect()
}

struct Fixture {
    dir: TempDir,
    catalog: PathBuf,
    query: PathBuf,
}

fn fixture(n: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.jsonl");
    let query = dir.path().join("query.json");
    ok(&["generate", "--n", &n.to_string(), "--seed", "5", "--out", p(&catalog)]);
    std::fs::write(&query, QUERY).unwrap();
    Fixture { dir, catalog, query }
}

fn zero_timings(mut v: Value) -> Value {
    v["timings"] = json!({"filter_ms": 0.0, "skyline_ms": 0.0, "electre_ms": 0.0, "total_ms": 0.0});
    v
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.csv");
    ok(&["generate", "--n", "300", "--seed", "9", "--out", p(&a)]);
    ok(&["generate", "--n", "300", "--seed", "9", "--out", p(&b)]);
    ok(&["generate", "--n", "300", "--seed", "9", "--out", p(&c)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 300);
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 301);
}

#[test]
fn query_writes_staged_result() {
    let f = fixture(2_000);
    let out = f.dir.path().join("result.json");
    ok(&["query", "--catalog", p(&f.catalog), "--query-file", p(&f.query), "--out", p(&out)]);
    let result = read_json(&out);
    let sky = ids(&result["skyline"]);
    let fin = ids(&result["final"]);
    assert!(!fin.is_empty());
    assert!(fin.iter().all(|id| sky.contains(id)));
    assert!(result["skyline_count"].as_u64() <= result["filtered_count"].as_u64());
    assert!(result["filtered_count"].as_u64().unwrap() < 2_000);

    let table = f.dir.path().join("result.txt");
    ok(&[
        "query",
        "--catalog",
        p(&f.catalog),
        "--query-file",
        p(&f.query),
        "--out",
        p(&table),
        "--format",
        "table",
    ]);
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("latency"));
    assert_eq!(text.lines().filter(|l| l.starts_with("svc-")).count(), fin.len());
}

#[test]
fn thresholds_file_sits_below_query_overrides() {
    let f = fixture(500);
    let thresholds = f.dir.path().join("thresholds.json");
    std::fs::write(&thresholds, r#"{"cut_level": 0.8, "criteria": {"latency": {"q": 1, "p": 2, "v": 3}}}"#).unwrap();
    let query = f.dir.path().join("q2.json");
    std::fs::write(
        &query,
        r#"{"optimize":[{"dim":"latency","importance":"extremely_important"},{"dim":"bandwidth","importance":"extremely_important"}],
            "electre":{"criteria":{"latency":{"v":null}}}}"#,
    )
    .unwrap();
    let out = f.dir.path().join("r.json");
    ok(&[
        "query",
        "--catalog",
        p(&f.catalog),
        "--query-file",
        p(&query),
        "--out",
        p(&out),
        "--thresholds",
        p(&thresholds),
    ]);
    let settings = &read_json(&out)["settings_used"];
    assert_eq!(settings["cut_level"], 0.8);
    let lat = &settings["criteria"][0];
    assert_eq!((lat["q_ind"].as_f64(), lat["p_pref"].as_f64()), (Some(1.0), Some(2.0)));
    assert!(lat["v_veto"].is_null());
}

#[test]
fn skyline_then_electre_equals_query() {
    let f = fixture(1_500);
    let full = f.dir.path().join("full.json");
    let sky = f.dir.path().join("sky.json");
    let settings = f.dir.path().join("settings.json");
    let fin = f.dir.path().join("final.json");
    ok(&["query", "--catalog", p(&f.catalog), "--query-file", p(&f.query), "--out", p(&full)]);
    ok(&[
        "skyline",
        "--catalog",
        p(&f.catalog),
        "--dims",
        "latency,ongoing_cost,storage_space",
        "--fixed",
        "service_model=IaaS",
        "--out",
        p(&sky),
    ]);
    std::fs::write(
        &settings,
        r#"{"criteria":[
            {"dimension_id":"latency","importance":"very_important"},
            {"dimension_id":"ongoing_cost","importance":"extremely_important"},
            {"dimension_id":"storage_space","importance":"slightly_important"}]}"#,
    )
    .unwrap();
    ok(&["electre", "--skyline-file", p(&sky), "--settings", p(&settings), "--out", p(&fin)]);

    let full = read_json(&full);
    let sky = read_json(&sky);
    let fin = read_json(&fin);
    assert_eq!(ids(&sky["services"]), ids(&full["skyline"]));
    assert_eq!(sky["filtered_count"], full["filtered_count"]);
    assert_eq!(ids(&fin["final"]), ids(&full["final"]));
    assert_eq!(fin["settings_used"], full["settings_used"]);
}

#[test]
fn bench_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out = dir.path().join("report.csv");
    std::fs::write(&plan, r#"{"sizes":[200],"dim_counts":[1,3],"seeds":[1,2]}"#).unwrap();
    ok(&["bench", "--plan", p(&plan), "--out", p(&out)]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "n,d,seed,filtered,skyline,final,t_skyline_ms,t_electre_ms");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("200,1,1,200,1,1,"));
    let summary = read_json(&dir.path().join("report.csv.summary.json"));
    assert_eq!(summary["n=200,d=3"]["runs"], 2);
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["generate", "--n", "5", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let query = dir.path().join("q.json");
    std::fs::write(&query, QUERY).unwrap();
    let out = run(&["query", "--catalog", p(&missing), "--query-file", p(&query), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{not json}\n").unwrap();
    let out = run(&["query", "--catalog", p(&bad), "--query-file", p(&query), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["generate", "--n", "0", "--seed", "1", "--out", p(&dir.path().join("x.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn http_post(addr: &str, path: &str, body: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "POST {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").unwrap();
    let status = head.split(' ').nth(1).unwrap().parse().unwrap();
    let body = if head.to_ascii_lowercase().contains("transfer-encoding: chunked") {
        dechunk(body)
    } else {
        body.to_owned()
    };
    (status, body)
}

fn dechunk(mut s: &str) -> String {
    let mut out = String::new();
    loop {
        let (size, rest) = s.split_once("\r\n").unwrap();
        let size = usize::from_str_radix(size.trim(), 16).unwrap();
        if size == 0 {
            return out;
        }
        out.push_str(&rest[..size]);
        s = &rest[size + 2..];
    }
}

#[test]
fn served_query_matches_cli_output() {
    let f = fixture(800);
    let cli_out = f.dir.path().join("cli.json");
    ok(&["query", "--catalog", p(&f.catalog), "--query-file", p(&f.query), "--out", p(&cli_out)]);

    let mut child = bin()
        .args(["serve", "--catalog", p(&f.catalog), "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .unwrap();
    let stdout = child.stdout.take().unwrap();
    let _server = Server(child);
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect(&line).to_owned();

    let (status, body) = http_post(&addr, "/query", QUERY);
    assert_eq!(status, 200);
    let served = zero_timings(serde_json::from_str(&body).unwrap());
    let local = zero_timings(read_json(&cli_out));
    assert_eq!(
        serde_json::to_string_pretty(&served).unwrap(),
        serde_json::to_string_pretty(&local).unwrap()
    );

    let (status, _) = http_post(&addr, "/query", "{}");
    assert_eq!(status, 422);
}
