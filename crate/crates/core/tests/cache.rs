use std::fs;
use std::io::Write;

use erlab_core::formulas::profile;
use erlab_core::oracle::{scan, Cache, EdgePolicy, ScanRequest};
use erlab_core::{Caps, Error};

fn request(limit: Option<usize>, jobs: usize) -> ScanRequest {
    ScanRequest {
        n_min: 4,
        n_max: 7,
        rs: vec![3],
        edges: EdgePolicy::All,
        jobs,
        limit,
    }
}

fn sorted_lines(path: &std::path::Path) -> Vec<String> {
    let mut lines: Vec<String> = fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    lines.sort();
    lines
}

#[test]
fn resumed_scan_matches_uninterrupted_scan() {
    let dir = tempfile::tempdir().unwrap();
    let caps = Caps::default();
    let straight = dir.path().join("straight.jsonl");
    let resumed = dir.path().join("resumed.jsonl");

    let mut cache = Cache::open(&straight, &caps).unwrap();
    scan(&request(None, 1), &caps, Some(&mut cache), |_, _| {}).unwrap();

    let mut cache = Cache::open(&resumed, &caps).unwrap();
    let first = scan(&request(Some(17), 3), &caps, Some(&mut cache), |_, _| {}).unwrap();
    assert!(first.interrupted);
    assert_eq!(first.computed, 17);
    drop(cache);
    let mut cache = Cache::open(&resumed, &caps).unwrap();
    let second = scan(&request(None, 3), &caps, Some(&mut cache), |_, _| {}).unwrap();
    assert!(!second.interrupted);
    assert_eq!(second.replayed, 17);

    assert_eq!(sorted_lines(&straight), sorted_lines(&resumed));
}

#[test]
fn completed_scan_is_replayed_without_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let caps = Caps::default();
    let path = dir.path().join("cache.jsonl");
    let mut cache = Cache::open(&path, &caps).unwrap();
    let mut first = Vec::new();
    scan(&request(None, 2), &caps, Some(&mut cache), |c, _| first.push(c.clone())).unwrap();
    drop(cache);
    let mut cache = Cache::open(&path, &caps).unwrap();
    let mut second = Vec::new();
    let summary = scan(&request(None, 2), &caps, Some(&mut cache), |c, cached| {
        assert!(cached);
        second.push(c.clone());
    })
    .unwrap();
    assert_eq!(summary.computed, 0);
    assert_eq!(first, second);
    for cell in &second {
        let h = profile(cell.n as u64, cell.e as u64, 3).unwrap().h_star;
        assert!(cell.g_min <= h, "cell {:?}", cell.key());
    }
}

#[test]
fn corrupt_and_partial_lines_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let caps = Caps::default();
    let path = dir.path().join("cache.jsonl");
    let mut cache = Cache::open(&path, &caps).unwrap();
    scan(&request(Some(5), 1), &caps, Some(&mut cache), |_, _| {}).unwrap();
    drop(cache);
    let mut text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // wrong g_min on line 3, garbage on line 4, a torn write at the end
    lines[2] = lines[2].replacen("\"g_min\":0", "\"g_min\":7", 1);
    lines.insert(3, "{not json".into());
    text = lines.join("\n") + "\n{\"n\":4,\"e\"";
    fs::write(&path, &text).unwrap();

    let mut cache = Cache::open(&path, &caps).unwrap();
    assert_eq!(cache.skipped_lines(), &[3, 4, 8]);
    assert_eq!(cache.len(), 4);
    let summary = scan(&request(Some(5), 1), &caps, Some(&mut cache), |_, _| {}).unwrap();
    assert_eq!((summary.computed, summary.replayed), (5, 4));
    drop(cache);
    let reopened = Cache::open(&path, &caps).unwrap();
    assert_eq!(reopened.len(), 9);
    assert_eq!(reopened.skipped_lines(), &[3, 4, 8]);
}

#[test]
fn header_mismatch_refuses_to_merge() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    drop(Cache::open(&path, &Caps::default()).unwrap());
    let other = Caps {
        max_n_oracle: 8,
        max_block: 12,
    };
    assert!(matches!(Cache::open(&path, &other), Err(Error::Cache(_))));

    let foreign = dir.path().join("foreign.jsonl");
    let mut f = fs::File::create(&foreign).unwrap();
    writeln!(f, "{{\"format\":\"erlab-oracle-cache\",\"generator_version\":0,\"caps\":{{\"max_n_oracle\":10,\"max_block\":12}}}}").unwrap();
    assert!(matches!(Cache::open(&foreign, &Caps::default()), Err(Error::Cache(_))));
}
