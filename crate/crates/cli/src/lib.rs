//! The `erlab` command line, as a library so it can be driven in-process.

pub mod input;

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use erlab_core::constructions::{build_h_star, enumerate_h1_star, enumerate_h2_star, normalize_h0, prop12_construction};
use erlab_core::formulas::profile;
use erlab_core::oracle::{self, Cache, EdgePolicy, OracleCell, ScanRequest};
use erlab_core::verify::{self, CheckParams, ClaimId, Severity, Verdict, VerificationReport};
use erlab_core::{graph6, Caps, Error, Result};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Environment variable naming the oracle cache; it takes precedence over
/// `--cache`.
pub const CACHE_ENV: &str = "ERLAB_CACHE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "erlab", version, about = "Minimum clique counts for graphs with n vertices and e edges")]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub output_format: Option<Format>,
    /// Leave the timestamp field out of JSON documents.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Optional `key = value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Largest n the oracle enumerates [default: 10].
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub max_n_oracle: Option<u64>,
    /// Largest triangle-free block enumerated [default: 12].
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub max_block: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Hstar,
    H1,
    H2,
}

#[derive(Debug, Args)]
pub struct Cell {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub e: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// k(n,e), a*, m* and h*_r(n,e).
    Profile {
        #[command(flatten)]
        cell: Cell,
        #[arg(long)]
        r: u64,
    },
    /// Print members of H*, H1* or H2* as graph6 lines.
    Construct {
        #[arg(value_enum)]
        family: Family,
        #[command(flatten)]
        cell: Cell,
        /// Every member instead of the first.
        #[arg(long)]
        all: bool,
        /// Write one JSON witness record per member to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Count r-cliques of graph6 graphs.
    Count {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        r: Vec<i64>,
        #[arg(long, conflicts_with = "stdin", required_unless_present = "stdin")]
        graph: Option<String>,
        /// Read graph6 lines (or JSON records with a graph6 field) from stdin.
        #[arg(long)]
        stdin: bool,
    },
    /// Normalize H0 witnesses read as `graph6 part part ...` lines.
    Normalize {
        #[arg(long, required = true)]
        stdin_partitioned: bool,
    },
    /// Exact minimum of N(K_r) over all (n,e)-graphs.
    Oracle {
        #[command(flatten)]
        cell: Cell,
        #[arg(long)]
        r: usize,
        /// Include the canonical forms of every extremal graph.
        #[arg(long)]
        extremal: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Oracle cells over a range of n, cached and resumable.
    Scan {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        /// Every e instead of only e > t_{r-1}(n).
        #[arg(long)]
        all_e: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Compute at most this many new (n, e) units, then stop.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        extremal: bool,
    },
    /// Run claim checks and print their reports.
    Verify {
        /// Claim id, a comma-separated list, or ALL.
        #[arg(long, value_delimiter = ',', required = true)]
        claim: Vec<String>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        e: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        a_max: Option<u64>,
        #[arg(long)]
        k_max: Option<u64>,
        #[arg(long)]
        lemma_n_max: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// The explicit (p, q, m) construction.
    Prop12 {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
    },
}

struct Settings {
    caps: Caps,
    format: Option<Format>,
    timestamp: bool,
    config_cache: Option<PathBuf>,
    config_seed: Option<u64>,
    config_jobs: Option<usize>,
}

impl Settings {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    // ERLAB_CACHE, then the flag, then the config file.
    fn cache_path(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| flag.clone())
            .or_else(|| self.config_cache.clone())
    }

    fn stamp(&self, mut value: Value) -> Value {
        if self.timestamp {
            if let Value::Object(map) = &mut value {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                map.insert("timestamp".into(), json!(secs));
            }
        }
        value
    }
}

fn parse_format(name: &str) -> Result<Format> {
    Format::from_str(name, true).map_err(|_| Error::Argument(format!("unknown output format {name:?}")))
}

fn settings(cli: &Cli) -> Result<Settings> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            input::parse_config(&text)?
        }
        None => input::ConfigFile::default(),
    };
    for key in file.unknown.keys() {
        log::warn!("ignoring unknown config key {key:?}");
    }
    let defaults = Caps::default();
    let caps = Caps {
        max_n_oracle: cli
            .max_n_oracle
            .map(|v| v as usize)
            .or(file.max_n_oracle)
            .unwrap_or(defaults.max_n_oracle),
        max_block: cli.max_block.map(|v| v as usize).or(file.max_block).unwrap_or(defaults.max_block),
    };
    if caps.max_n_oracle == 0 || caps.max_block == 0 {
        return Err(Error::Argument("caps must be at least 1".into()));
    }
    let format = match (cli.output_format, &file.output_format) {
        (Some(f), _) => Some(f),
        (None, Some(name)) => Some(parse_format(name)?),
        (None, None) => None,
    };
    Ok(Settings {
        caps,
        format,
        timestamp: !cli.no_timestamp,
        config_cache: file.cache.map(PathBuf::from),
        config_seed: file.seed,
        config_jobs: file.jobs,
    })
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Argument(_) => "argument",
        Error::Overflow(_) => "overflow",
        Error::Precondition(_) => "precondition",
        Error::Capacity { .. } => "capacity",
        Error::Parse { .. } => "parse",
        Error::NotApplicable(_) => "not-applicable",
        Error::Cache(_) => "cache",
        Error::Io(_) => "io",
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_USAGE,
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let json_errors = cli.output_format == Some(Format::Json);
    let result = settings(&cli).and_then(|s| execute(&cli.command, &s, stdin, out));
    match result {
        Ok(code) => code,
        Err(e) => {
            if json_errors {
                let _ = writeln!(err, "{}", json!({ "error": error_kind(&e), "message": e.to_string() }));
            } else {
                let _ = writeln!(err, "erlab: {e}");
            }
            exit_code(&e)
        }
    }
}

fn emit(out: &mut dyn Write, text: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", text.as_ref())?;
    Ok(())
}

fn execute(command: &Command, s: &Settings, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Profile { cell, r } => {
            let p = profile(cell.n as u64, cell.e as u64, *r)?;
            match s.format(Format::Json) {
                Format::Json => emit(
                    out,
                    json!({ "k": p.k, "a_star": p.a_star, "m_star": p.m_star, "h_star": p.h_star }).to_string(),
                )?,
                Format::Csv => {
                    emit(out, "n,e,r,k,a_star,m_star,h_star")?;
                    let parts: Vec<String> = p.a_star.iter().map(u64::to_string).collect();
                    emit(out, format!("{},{},{},{},{},{},{}", p.n, p.e, p.r, p.k, parts.join(" "), p.m_star, p.h_star))?;
                }
                Format::Text => {
                    let parts: Vec<String> = p.a_star.iter().map(u64::to_string).collect();
                    emit(out, format!("k={} a*=({}) m*={} h*={}", p.k, parts.join(","), p.m_star, p.h_star))?;
                }
            }
        }
        Command::Construct {
            family,
            cell,
            all,
            witness,
        } => {
            let members = match family {
                Family::Hstar => vec![build_h_star(cell.n, cell.e)?],
                Family::H1 => enumerate_h1_star(cell.n, cell.e, &s.caps)?,
                Family::H2 => enumerate_h2_star(cell.n, cell.e, &s.caps)?,
            };
            let take = if *all { members.len() } else { members.len().min(1) };
            let mut sidecar = String::new();
            for m in &members[..take] {
                let record = m.record();
                let line = serde_json::to_string(&record).expect("record serializes");
                match s.format(Format::Text) {
                    Format::Json => emit(out, &line)?,
                    Format::Csv | Format::Text => emit(out, &record.graph6)?,
                }
                sidecar.push_str(&line);
                sidecar.push('\n');
            }
            if let Some(path) = witness {
                fs::write(path, sidecar).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Count { r, graph, stdin: _ } => {
            let format = s.format(Format::Json);
            if format == Format::Csv {
                emit(out, "graph6,r,count")?;
            }
            let mut handle = |g6: &str| -> Result<()> {
                let g = graph6::decode(g6)?;
                for &order in r {
                    let count = g.count_cliques(order)?;
                    match format {
                        Format::Json => emit(out, json!({ "graph6": g6, "r": order, "count": count }).to_string())?,
                        Format::Csv => emit(out, format!("{g6},{order},{count}"))?,
                        Format::Text => emit(out, format!("{g6} {order} {count}"))?,
                    }
                }
                Ok(())
            };
            match graph {
                Some(g6) => handle(g6)?,
                None => {
                    for (idx, line) in stdin.lines().enumerate() {
                        let line = line?;
                        let text = line.trim();
                        if text.is_empty() {
                            continue;
                        }
                        let g6 = if text.starts_with('{') {
                            let v: Value = serde_json::from_str(text)
                                .map_err(|e| Error::Argument(format!("line {}: {e}", idx + 1)))?;
                            v["graph6"]
                                .as_str()
                                .ok_or_else(|| Error::Argument(format!("line {}: no graph6 field", idx + 1)))?
                                .to_string()
                        } else {
                            text.to_string()
                        };
                        handle(&g6).map_err(|e| line_error(idx + 1, e))?;
                    }
                }
            }
        }
        Command::Normalize { .. } => {
            let format = s.format(Format::Json);
            for (idx, line) in stdin.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let pg = input::parse_partitioned_line(&line).map_err(|e| line_error(idx + 1, e))?;
                let normalized = normalize_h0(&pg).map_err(|e| line_error(idx + 1, e))?;
                let g6 = graph6::encode(normalized.graph());
                let sizes = normalized.part_sizes();
                match format {
                    Format::Json => emit(
                        out,
                        json!({
                            "graph6": g6,
                            "part_sizes": sizes,
                            "part_of": normalized.part_of().iter().map(|p| p + 1).collect::<Vec<_>>(),
                        })
                        .to_string(),
                    )?,
                    Format::Csv | Format::Text => {
                        let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
                        emit(out, format!("{g6} {}", sizes.join(" ")))?
                    }
                }
            }
        }
        Command::Oracle {
            cell,
            r,
            extremal,
            cache,
        } => {
            let key = (cell.n, cell.e, *r);
            let result = match s.cache_path(cache) {
                Some(path) => {
                    let mut store = Cache::open(&path, &s.caps)?;
                    match store.get(&key).cloned() {
                        Some(c) => c,
                        None => {
                            let c = oracle::g_min(cell.n, cell.e, *r, &s.caps)?;
                            store.insert(c.clone())?;
                            c
                        }
                    }
                }
                None => oracle::g_min(cell.n, cell.e, *r, &s.caps)?,
            };
            match s.format(Format::Json) {
                Format::Json => emit(out, s.stamp(cell_json(&result, *extremal)).to_string())?,
                Format::Csv => {
                    emit(out, CELL_CSV_HEADER)?;
                    emit(out, cell_csv(&result))?;
                }
                Format::Text => emit(out, cell_text(&result))?,
            }
        }
        Command::Scan {
            n_min,
            n_max,
            r,
            all_e,
            cache,
            jobs,
            limit,
            extremal,
        } => {
            let request = ScanRequest {
                n_min: *n_min,
                n_max: *n_max,
                rs: r.clone(),
                edges: if *all_e { EdgePolicy::All } else { EdgePolicy::AboveTuran },
                jobs: jobs.or(s.config_jobs).unwrap_or(1),
                limit: *limit,
            };
            let format = s.format(Format::Json);
            if format == Format::Csv {
                emit(out, CELL_CSV_HEADER)?;
            }
            let mut store = match s.cache_path(cache) {
                Some(path) => Some(Cache::open(&path, &s.caps)?),
                None => None,
            };
            let mut write_error = None;
            let summary = oracle::scan(&request, &s.caps, store.as_mut(), |cell, _| {
                let line = match format {
                    Format::Json => cell_json(cell, *extremal).to_string(),
                    Format::Csv => cell_csv(cell),
                    Format::Text => cell_text(cell),
                };
                if let Err(e) = emit(out, line) {
                    write_error.get_or_insert(e);
                }
            })?;
            if let Some(e) = write_error {
                return Err(e);
            }
            log::info!(
                "scan: {} computed, {} replayed{}",
                summary.computed,
                summary.replayed,
                if summary.interrupted { ", stopped at the limit" } else { "" }
            );
        }
        Command::Verify {
            claim,
            n_min,
            n_max,
            e,
            r,
            trials,
            seed,
            a_max,
            k_max,
            lemma_n_max,
            jobs,
            cache,
        } => {
            let claims = parse_claims(claim)?;
            let mut store = match s.cache_path(cache) {
                Some(path) => Some(Cache::open(&path, &s.caps)?),
                None => None,
            };
            let mut reports = Vec::new();
            for &id in &claims {
                let defaults = CheckParams::default();
                let params = CheckParams {
                    n_min: n_min.unwrap_or(defaults.n_min),
                    n_max: n_max.unwrap_or(match id {
                        ClaimId::Fact21 => 12,
                        _ => defaults.n_max,
                    }),
                    e: *e,
                    rs: if r.is_empty() {
                        match id {
                            ClaimId::Thm11Value => vec![3, 4],
                            ClaimId::Fact21 => vec![3, 4, 5],
                            _ => defaults.rs.clone(),
                        }
                    } else {
                        r.clone()
                    },
                    trials: trials.unwrap_or(defaults.trials),
                    seed: seed.or(s.config_seed).unwrap_or(defaults.seed),
                    a_max: a_max.unwrap_or(defaults.a_max),
                    k_max: k_max.unwrap_or(defaults.k_max),
                    lemma_n_max: lemma_n_max.unwrap_or(defaults.lemma_n_max),
                    jobs: jobs.or(s.config_jobs).unwrap_or(defaults.jobs),
                };
                reports.push(verify::run(id, &params, &s.caps, store.as_mut())?);
            }
            match s.format(Format::Json) {
                Format::Json => {
                    for report in &reports {
                        let value = serde_json::to_value(report).expect("report serializes");
                        emit(out, s.stamp(value).to_string())?;
                    }
                }
                Format::Csv => {
                    let text = verify::csv_summary(&reports)?;
                    write!(out, "{text}")?;
                }
                Format::Text => {
                    for report in &reports {
                        emit(out, report_text(report))?;
                    }
                }
            }
            if reports.iter().any(|r| !r.passed()) {
                return Ok(EXIT_CLAIM_FAILED);
            }
        }
        Command::Prop12 { p, q, m } => {
            let inst = prop12_construction(*p, *q, *m)?;
            let g6 = graph6::encode(inst.member.graph.graph());
            match s.format(Format::Json) {
                Format::Json => emit(out, json!({ "n": inst.n, "e": inst.e, "graph6": g6 }).to_string())?,
                Format::Csv => {
                    emit(out, "n,e,graph6")?;
                    emit(out, format!("{},{},{g6}", inst.n, inst.e))?;
                }
                Format::Text => emit(out, format!("{} {} {g6}", inst.n, inst.e))?,
            }
        }
    }
    Ok(EXIT_OK)
}

fn line_error(line: usize, err: Error) -> Error {
    match err {
        Error::Parse { offset, message } => Error::Parse {
            offset,
            message: format!("line {line}: {message}"),
        },
        Error::Capacity { .. } => err,
        other => Error::Argument(format!("line {line}: {other}")),
    }
}

fn parse_claims(names: &[String]) -> Result<Vec<ClaimId>> {
    if names.len() == 1 && names[0].eq_ignore_ascii_case("all") {
        return Ok(ClaimId::ALL.to_vec());
    }
    names.iter().map(|n| n.parse()).collect()
}

const CELL_CSV_HEADER: &str = "n,e,r,g_min,h_star,extremal_count";

fn h_star_of(cell: &OracleCell) -> Option<u64> {
    profile(cell.n as u64, cell.e as u64, cell.r as u64).ok().map(|p| p.h_star)
}

fn cell_json(cell: &OracleCell, extremal: bool) -> Value {
    let mut value = serde_json::to_value(cell).expect("cell serializes");
    if let Value::Object(map) = &mut value {
        if !extremal {
            map.remove("extremal_forms");
        }
        if let Some(h) = h_star_of(cell) {
            map.insert("h_star".into(), json!(h));
        }
    }
    value
}

fn cell_csv(cell: &OracleCell) -> String {
    let h = h_star_of(cell).map_or(String::new(), |h| h.to_string());
    format!("{},{},{},{},{h},{}", cell.n, cell.e, cell.r, cell.g_min, cell.extremal_count)
}

fn cell_text(cell: &OracleCell) -> String {
    let h = h_star_of(cell).map_or("-".to_string(), |h| h.to_string());
    format!(
        "n={} e={} r={} g_min={} h*={h} extremal={}",
        cell.n, cell.e, cell.r, cell.g_min, cell.extremal_count
    )
}

fn report_text(report: &VerificationReport) -> String {
    let verdict = serde_json::to_value(report.verdict).expect("verdict serializes");
    let mut line = format!(
        "{} {} {} counterexamples={}",
        report.claim_id,
        verdict.as_str().unwrap_or_default(),
        report.params,
        report.counterexamples.len()
    );
    if report.severity == Severity::ImplementationBug {
        line.push_str(" severity=implementation-bug");
    } else if report.verdict == Verdict::ExploratoryMismatch {
        line.push_str(" severity=finding");
    }
    line
}
