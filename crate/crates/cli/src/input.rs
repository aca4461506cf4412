//! Text inputs read by the command line: the optional config file and the
//! partitioned-graph lines fed to `normalize`.

use std::collections::BTreeMap;

use erlab_core::graph::PartitionedGraph;
use erlab_core::{graph6, Error, Result};

/// Settings read from a `key = value` file. Blank lines and lines starting
/// with `#` are ignored, values may be quoted, and unknown keys are kept in
/// `unknown` so the caller can warn about them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub max_n_oracle: Option<usize>,
    pub max_block: Option<usize>,
    pub cache: Option<String>,
    pub output_format: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub unknown: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut config = ConfigFile::default();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let Some((key, value)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return Err(Error::Parse {
                offset: line_start,
                message: format!("expected key = value, found {line:?}"),
            });
        };
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.split(" #").next().unwrap_or_default().trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .or_else(|| value.strip_prefix('\'').and_then(|v| v.strip_suffix('\'')))
            .unwrap_or(value)
            .to_string();
        let number = |v: &str| -> Result<u64> {
            v.replace('_', "").parse::<u64>().map_err(|_| Error::Parse {
                offset: line_start,
                message: format!("{key} needs a non-negative integer, found {v:?}"),
            })
        };
        match key.as_str() {
            "max_n_oracle" | "max_n" => config.max_n_oracle = Some(number(&value)? as usize),
            "max_block" => config.max_block = Some(number(&value)? as usize),
            "cache" | "cache_path" => config.cache = Some(value),
            "output_format" | "format" => config.output_format = Some(value),
            "seed" => config.seed = Some(number(&value)?),
            "jobs" => config.jobs = Some(number(&value)? as usize),
            _ => {
                config.unknown.insert(key, value);
            }
        }
    }
    Ok(config)
}

/// One line of `normalize` input: a graph6 string followed by the part of
/// each vertex, separated by spaces or commas. Part labels are arbitrary
/// integers and are renumbered in order of first appearance.
pub fn parse_partitioned_line(line: &str) -> Result<PartitionedGraph> {
    let line = line.trim_end_matches(['\n', '\r']);
    let mut fields = line.split([' ', '\t', ',']).filter(|f| !f.is_empty());
    let g6 = fields.next().ok_or(Error::Parse {
        offset: 0,
        message: "empty line".into(),
    })?;
    let g6_start = line.find(g6).unwrap_or(0);
    let graph = graph6::decode(g6).map_err(|err| match err {
        Error::Parse { offset, message } => Error::Parse {
            offset: g6_start + offset,
            message,
        },
        other => other,
    })?;
    let mut labels: Vec<i64> = Vec::new();
    let mut part_of = Vec::with_capacity(graph.n());
    for field in fields {
        let offset = field.as_ptr() as usize - line.as_ptr() as usize;
        let label: i64 = field.parse().map_err(|_| Error::Parse {
            offset,
            message: format!("part label {field:?} is not an integer"),
        })?;
        let index = match labels.iter().position(|&l| l == label) {
            Some(i) => i,
            None => {
                labels.push(label);
                labels.len() - 1
            }
        };
        part_of.push(index);
    }
    if part_of.len() != graph.n() {
        return Err(Error::Parse {
            offset: line.len(),
            message: format!("{} part labels for {} vertices", part_of.len(), graph.n()),
        });
    }
    PartitionedGraph::new(graph, part_of)
}
