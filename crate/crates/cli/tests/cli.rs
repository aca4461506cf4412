use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn erlab(args: &[&str], stdin: &str, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_erlab"));
    cmd.args(args)
        .env_remove("ERLAB_CACHE")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn profile_prints_the_four_fields() {
    let o = erlab(&["profile", "--n", "8", "--e", "22", "--r", "4"], "", &[]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v, serde_json::json!({ "k": 4, "a_star": [3, 2, 2, 1], "m_star": 1, "h_star": 6 }));
}

#[test]
fn oracle_reports_the_minimum() {
    let o = erlab(&["oracle", "--n", "5", "--e", "7", "--r", "3", "--no-timestamp"], "", &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = &json_lines(&o)[0];
    assert_eq!(v["g_min"], 2);
    assert!(v.get("timestamp").is_none());
}

#[test]
fn output_is_byte_identical_without_timestamps() {
    let args = ["verify", "--claim", "FACT21,LEMMA_D", "--n-max", "7", "--no-timestamp"];
    let a = erlab(&args, "", &[]);
    let b = erlab(&args, "", &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let stamped = erlab(&["oracle", "--n", "4", "--e", "5", "--r", "3"], "", &[]);
    assert!(json_lines(&stamped)[0]["timestamp"].is_u64());
}

#[test]
fn exit_codes() {
    assert_eq!(erlab(&["profile", "--n", "3", "--e", "9", "--r", "3"], "", &[]).status.code(), Some(2));
    assert_eq!(erlab(&["no-such-command"], "", &[]).status.code(), Some(2));
    assert_eq!(erlab(&["verify", "--claim", "NOT_A_CLAIM"], "", &[]).status.code(), Some(2));
    let o = erlab(&["--output-format", "json", "oracle", "--n", "11", "--e", "30", "--r", "3"], "", &[]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "capacity");
    let raised = erlab(&["--max-n-oracle", "11", "oracle", "--n", "11", "--e", "50", "--r", "3"], "", &[]);
    assert_eq!(raised.status.code(), Some(0));
}

#[test]
fn construct_then_count_reproduces_h_star() {
    for (n, e, r) in [(8, 22, 4), (14, 70, 4), (9, 25, 3)] {
        let (ns, es, rs) = (n.to_string(), e.to_string(), r.to_string());
        let p = erlab(&["profile", "--n", &ns, "--e", &es, "--r", &rs], "", &[]);
        let h_star = json_lines(&p)[0]["h_star"].as_u64().unwrap();
        let family = if r >= 4 { "h2" } else { "h1" };
        let c = erlab(&["construct", family, "--n", &ns, "--e", &es, "--all"], "", &[]);
        assert_eq!(c.status.code(), Some(0));
        let graphs = stdout(&c);
        assert!(!graphs.trim().is_empty());
        let counted = erlab(&["count", "--stdin", "--r", &rs], &graphs, &[]);
        for v in json_lines(&counted) {
            assert_eq!(v["count"].as_u64(), Some(h_star), "{v}");
        }
    }
}

#[test]
fn count_reads_witness_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.jsonl");
    let c = erlab(&["construct", "h1", "--n", "7", "--e", "15", "--all", "--witness", path.to_str().unwrap()], "", &[]);
    assert_eq!(c.status.code(), Some(0));
    let records = std::fs::read_to_string(&path).unwrap();
    assert_eq!(records.lines().count(), stdout(&c).lines().count());
    let counted = erlab(&["count", "--stdin", "--r", "3"], &records, &[]);
    assert_eq!(counted.status.code(), Some(0));
    assert_eq!(json_lines(&counted).len(), records.lines().count());
}

#[test]
fn normalize_reports_offsets() {
    let ok = erlab(&["normalize", "--stdin-partitioned"], "C~ 1 1 2 2\n", &[]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = erlab(&["--output-format", "json", "normalize", "--stdin-partitioned"], "C~ 1 x 2 2\n", &[]);
    assert_eq!(bad.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&bad.stderr).trim()).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn cache_from_environment_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let env_cache = dir.path().join("env.jsonl");
    let flag_cache = dir.path().join("flag.jsonl");
    let args = ["scan", "--n-min", "3", "--n-max", "6", "--r", "3", "--cache", flag_cache.to_str().unwrap()];
    let first = erlab(&args, "", &[("ERLAB_CACHE", env_cache.to_str().unwrap())]);
    assert_eq!(first.status.code(), Some(0));
    assert!(env_cache.exists());
    assert!(!flag_cache.exists());
    let again = erlab(&args, "", &[("ERLAB_CACHE", env_cache.to_str().unwrap())]);
    assert_eq!(first.stdout, again.stdout);

    let config = dir.path().join("erlab.conf");
    let conf_cache = dir.path().join("conf.jsonl");
    std::fs::write(&config, format!("cache = {}\noutput-format = csv\n", conf_cache.display())).unwrap();
    let o = erlab(&["--config", config.to_str().unwrap(), "oracle", "--n", "5", "--e", "7", "--r", "3"], "", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("n,e,r,g_min"));
    assert!(conf_cache.exists());
}

#[test]
fn verify_csv_summary() {
    let o = erlab(&["--output-format", "csv", "verify", "--claim", "LEMMA_D"], "", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().count() >= 2);
}
