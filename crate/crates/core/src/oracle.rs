//! Exact minimum clique counts by exhaustive enumeration, and a resumable
//! JSON Lines cache of the results.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::CanonicalForm;
use crate::enumerate::for_each_graph_unfiltered;
use crate::error::{Error, Result};
use crate::formulas::{pairs, turan_edges};
use crate::graph::Graph;
use crate::Caps;

/// Bumped whenever enumeration or cell semantics change; cached cells from
/// another version are never mixed in.
pub const GENERATOR_VERSION: u32 = 1;

/// Extremal forms kept per cell before truncation.
pub const EXTREMAL_FORM_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCell {
    pub n: usize,
    pub e: usize,
    pub r: usize,
    pub g_min: u64,
    /// Exact number of extremal isomorphism classes.
    pub extremal_count: u64,
    /// Sorted canonical forms; shorter than `extremal_count` when truncated.
    pub extremal_forms: Vec<CanonicalForm>,
    pub generator_version: u32,
}

impl OracleCell {
    pub fn key(&self) -> CellKey {
        (self.n, self.e, self.r)
    }

    pub fn is_truncated(&self) -> bool {
        (self.extremal_forms.len() as u64) < self.extremal_count
    }

    /// Every stored form decodes to an `(n, e)`-graph with `g_min` cliques.
    pub fn check_integrity(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Cache(format!("cell ({}, {}, {}): {why}", self.n, self.e, self.r)));
        if self.generator_version != GENERATOR_VERSION {
            return bad(format!("generator version {}", self.generator_version));
        }
        if self.extremal_count == 0 || self.extremal_forms.len() as u64 > self.extremal_count {
            return bad("inconsistent extremal count".into());
        }
        if self.extremal_forms.windows(2).any(|w| w[0] >= w[1]) {
            return bad("extremal forms not strictly sorted".into());
        }
        for form in &self.extremal_forms {
            let g = form.to_graph();
            if g.n() != self.n || g.edge_count() != self.e {
                return bad(format!("form {form} has the wrong size"));
            }
            if g.count_cliques(self.r as i64)? != self.g_min {
                return bad(format!("form {form} does not attain g_min"));
            }
        }
        Ok(())
    }
}

pub type CellKey = (usize, usize, usize);

fn check_caps(n: usize, caps: &Caps) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    if n > caps.max_n_oracle {
        return Err(Error::Capacity {
            what: "oracle vertex count",
            value: n,
            cap: caps.max_n_oracle,
        });
    }
    Ok(())
}

/// One representative per isomorphism class of `(n, e)`-graphs, each in its
/// canonical labelling.
pub fn enumerate_graphs(n: usize, e: usize, caps: &Caps, visit: impl FnMut(&Graph)) -> Result<()> {
    check_caps(n, caps)?;
    if e as u64 > pairs(n as u64) {
        return Err(Error::Argument(format!("e = {e} exceeds C({n}, 2)")));
    }
    for_each_graph_unfiltered(n, e, visit);
    Ok(())
}

pub fn g_min(n: usize, e: usize, r: usize, caps: &Caps) -> Result<OracleCell> {
    Ok(g_min_many(n, e, &[r], caps)?.pop().expect("one cell per r"))
}

/// Cells for several `r` from a single enumeration pass.
pub fn g_min_many(n: usize, e: usize, rs: &[usize], caps: &Caps) -> Result<Vec<OracleCell>> {
    struct Best {
        value: u64,
        count: u64,
        forms: BTreeSet<CanonicalForm>,
    }
    let mut best: Vec<Option<Best>> = rs.iter().map(|_| None).collect();
    enumerate_graphs(n, e, caps, |g| {
        let mut form = None;
        for (slot, &r) in best.iter_mut().zip(rs) {
            let count = g.count_cliques(r as i64).expect("r is non-negative");
            let entry = slot.get_or_insert_with(|| Best {
                value: count,
                count: 0,
                forms: BTreeSet::new(),
            });
            if count < entry.value {
                *entry = Best {
                    value: count,
                    count: 0,
                    forms: BTreeSet::new(),
                };
            }
            if count == entry.value {
                entry.count += 1;
                let f = form.get_or_insert_with(|| CanonicalForm::from_canonical_graph(g)).clone();
                entry.forms.insert(f);
                if entry.forms.len() > EXTREMAL_FORM_CAP {
                    entry.forms.pop_last();
                }
            }
        }
    })?;
    Ok(best
        .into_iter()
        .zip(rs)
        .map(|(b, &r)| {
            let b = b.expect("every (n, e) with e <= C(n, 2) has a graph");
            OracleCell {
                n,
                e,
                r,
                g_min: b.value,
                extremal_count: b.count,
                extremal_forms: b.forms.into_iter().collect(),
                generator_version: GENERATOR_VERSION,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub generator_version: u32,
    pub caps: Caps,
}

const CACHE_FORMAT: &str = "erlab-oracle-cache";

impl CacheHeader {
    pub fn current(caps: &Caps) -> Self {
        CacheHeader {
            format: CACHE_FORMAT.to_string(),
            generator_version: GENERATOR_VERSION,
            caps: *caps,
        }
    }
}

/// Append-only cell store. Later lines win over earlier ones with the same
/// key; lines that fail to parse or to pass the integrity check are skipped
/// with a warning.
pub struct Cache {
    path: PathBuf,
    file: File,
    cells: BTreeMap<CellKey, OracleCell>,
    skipped: Vec<usize>,
}

impl Cache {
    pub fn open(path: impl AsRef<Path>, caps: &Caps) -> Result<Cache> {
        let path = path.as_ref().to_path_buf();
        let header = CacheHeader::current(caps);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cells = BTreeMap::new();
        let mut skipped = Vec::new();
        if file.metadata()?.len() == 0 {
            writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes"))?;
            file.flush()?;
        } else {
            let mut lines = BufReader::new(&file).lines();
            let first = lines.next().transpose()?.unwrap_or_default();
            let found: CacheHeader = serde_json::from_str(&first)
                .map_err(|e| Error::Cache(format!("{}: unreadable header: {e}", path.display())))?;
            if found != header {
                return Err(Error::Cache(format!(
                    "{}: header {} does not match this run ({}); refusing to merge",
                    path.display(),
                    first.trim(),
                    serde_json::to_string(&header).expect("header serializes")
                )));
            }
            for (idx, line) in lines.enumerate() {
                let number = idx + 2;
                let line = match line {
                    Ok(l) => l,
                    Err(err) => {
                        log::warn!("{}:{number}: unreadable line: {err}", path.display());
                        skipped.push(number);
                        continue;
                    }
                };
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<OracleCell>(&line)
                    .map_err(|e| Error::Cache(e.to_string()))
                    .and_then(|c| c.check_integrity().map(|_| c));
                match parsed {
                    Ok(cell) => {
                        cells.insert(cell.key(), cell);
                    }
                    Err(err) => {
                        log::warn!("{}:{number}: skipping corrupt cell: {err}", path.display());
                        skipped.push(number);
                    }
                }
            }
            // an interrupted write may leave a partial last line
            file.seek(SeekFrom::End(-1))?;
            let mut last = [0u8];
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
                file.flush()?;
            }
        }
        Ok(Cache {
            path,
            file,
            cells,
            skipped,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &CellKey) -> Option<&OracleCell> {
        self.cells.get(key)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Line numbers skipped while loading.
    pub fn skipped_lines(&self) -> &[usize] {
        &self.skipped
    }

    pub fn cells(&self) -> impl Iterator<Item = &OracleCell> {
        self.cells.values()
    }

    pub fn insert(&mut self, cell: OracleCell) -> Result<()> {
        let line = serde_json::to_string(&cell).expect("cell serializes");
        writeln!(self.file, "{line}")?;
        self.file.flush()?;
        self.cells.insert(cell.key(), cell);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgePolicy {
    /// Every `0 <= e <= C(n, 2)`.
    All,
    /// Only `e > t_{r-1}(n)`, where `g_r` is positive.
    AboveTuran,
}

#[derive(Clone, Debug)]
pub struct ScanRequest {
    pub n_min: usize,
    pub n_max: usize,
    pub rs: Vec<usize>,
    pub edges: EdgePolicy,
    pub jobs: usize,
    /// Stop after computing this many new `(n, e)` units.
    pub limit: Option<usize>,
}

impl ScanRequest {
    /// Every key the scan covers, in order.
    pub fn keys(&self) -> Vec<CellKey> {
        let mut keys = Vec::new();
        for n in self.n_min..=self.n_max {
            for e in 0..=pairs(n as u64) as usize {
                for &r in &self.rs {
                    let wanted = match self.edges {
                        EdgePolicy::All => true,
                        EdgePolicy::AboveTuran => e as u64 > turan_edges(r.saturating_sub(1) as u64, n as u64),
                    };
                    if wanted {
                        keys.push((n, e, r));
                    }
                }
            }
        }
        keys
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub computed: usize,
    pub replayed: usize,
    /// True when `limit` stopped the scan early.
    pub interrupted: bool,
}

/// Computes every missing cell of the request, storing each in `cache` as
/// soon as it is known, and reports all cells in key order through `emit`.
pub fn scan(
    request: &ScanRequest,
    caps: &Caps,
    mut cache: Option<&mut Cache>,
    mut emit: impl FnMut(&OracleCell, bool),
) -> Result<ScanSummary> {
    if request.n_min > request.n_max {
        return Err(Error::Argument(format!(
            "empty range: n_min {} > n_max {}",
            request.n_min, request.n_max
        )));
    }
    if request.rs.is_empty() {
        return Err(Error::Argument("no clique sizes requested".into()));
    }
    check_caps(request.n_min, caps)?;
    check_caps(request.n_max, caps)?;
    let keys = request.keys();
    let cached = |cache: &Option<&mut Cache>, key: &CellKey| cache.as_ref().and_then(|c| c.get(key)).cloned();
    // units of work: (n, e) with the r values still missing
    let mut units: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for key in &keys {
        if cached(&cache, key).is_none() {
            units.entry((key.0, key.1)).or_default().push(key.2);
        }
    }
    let mut units: Vec<((usize, usize), Vec<usize>)> = units.into_iter().collect();
    let interrupted = request.limit.is_some_and(|l| l < units.len());
    if let Some(limit) = request.limit {
        units.truncate(limit);
    }
    let mut summary = ScanSummary {
        interrupted,
        ..ScanSummary::default()
    };
    let mut fresh: BTreeMap<CellKey, OracleCell> = BTreeMap::new();
    let mut next = 0;
    // releases every key whose cell is known, in order
    let flush = |fresh: &mut BTreeMap<CellKey, OracleCell>,
                     cache: &Option<&mut Cache>,
                     summary: &mut ScanSummary,
                     next: &mut usize,
                     emit: &mut dyn FnMut(&OracleCell, bool)| {
        while *next < keys.len() {
            let key = keys[*next];
            if let Some(cell) = fresh.remove(&key) {
                summary.computed += 1;
                emit(&cell, false);
            } else if let Some(cell) = cached(cache, &key) {
                summary.replayed += 1;
                emit(&cell, true);
            } else {
                break;
            }
            *next += 1;
        }
    };
    let (tx, rx) = mpsc::channel::<Result<Vec<OracleCell>>>();
    let jobs = request.jobs.max(1);
    let caps_copy = *caps;
    std::thread::scope(|scope| -> Result<()> {
        let worker = scope.spawn(move || {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")));
            match pool {
                Ok(pool) => pool.install(|| {
                    units.par_iter().for_each_with(tx, |tx, ((n, e), rs)| {
                        let _ = tx.send(g_min_many(*n, *e, rs, &caps_copy));
                    })
                }),
                Err(err) => {
                    let _ = tx.send(Err(err));
                }
            }
        });
        let mut first_error = None;
        for result in rx {
            match result {
                Ok(cells) => {
                    for cell in cells {
                        if let Some(c) = cache.as_deref_mut() {
                            c.insert(cell.clone())?;
                        }
                        fresh.insert(cell.key(), cell);
                    }
                    flush(&mut fresh, &cache, &mut summary, &mut next, &mut emit);
                }
                Err(err) => {
                    first_error.get_or_insert(err);
                }
            }
        }
        worker.join().expect("scan worker panicked");
        match first_error {
            Some(err) => Err(err),
            None => Ok(()),
        }
    })?;
    flush(&mut fresh, &cache, &mut summary, &mut next, &mut emit);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn small_cells() {
        assert_eq!(g_min(5, 7, 3, &caps()).unwrap().g_min, 2);
        assert_eq!(g_min(6, 9, 3, &caps()).unwrap().g_min, 0);
        let cell = g_min(4, 3, 3, &caps()).unwrap();
        assert_eq!((cell.g_min, cell.extremal_count), (0, 2));
        cell.check_integrity().unwrap();
    }

    #[test]
    fn capacity_is_enforced() {
        let tight = Caps {
            max_n_oracle: 6,
            max_block: 12,
        };
        assert!(matches!(g_min(7, 3, 3, &tight), Err(Error::Capacity { cap: 6, .. })));
        assert!(enumerate_graphs(6, 16, &tight, |_| {}).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let mut count = 0;
        enumerate_graphs(4, 3, &caps(), |_| count += 1).unwrap();
        assert_eq!(count, 3);
    }

    #[test]
    fn tampered_cells_fail_integrity() {
        let mut cell = g_min(5, 7, 3, &caps()).unwrap();
        cell.g_min = 1;
        assert!(cell.check_integrity().is_err());
        let mut cell = g_min(5, 7, 3, &caps()).unwrap();
        cell.extremal_count = 0;
        assert!(cell.check_integrity().is_err());
    }

    #[test]
    fn scan_orders_output_with_many_jobs() {
        let request = ScanRequest {
            n_min: 3,
            n_max: 6,
            rs: vec![3, 4],
            edges: EdgePolicy::All,
            jobs: 4,
            limit: None,
        };
        let mut seen = Vec::new();
        let summary = scan(&request, &caps(), None, |c, _| seen.push(c.key())).unwrap();
        assert_eq!(seen, request.keys());
        assert_eq!(summary.computed, seen.len());
    }
}
