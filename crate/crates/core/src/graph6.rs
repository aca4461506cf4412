//! The graph6 text format: a size header followed by the upper triangle of
//! the adjacency matrix, column by column, six bits per printable byte.

use crate::error::{Error, Result};
use crate::graph::{Graph, MAX_VERTICES};

const OFFSET: u8 = 63;
const HEADER: &str = ">>graph6<<";

pub fn encode(g: &Graph) -> String {
    let n = g.n();
    let mut out = Vec::with_capacity(2 + (n * n.saturating_sub(1) / 2).div_ceil(6));
    if n <= 62 {
        out.push(n as u8 + OFFSET);
    } else {
        out.push(b'~');
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + OFFSET);
        }
    }
    let mut chunk = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            chunk = (chunk << 1) | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(chunk + OFFSET);
                chunk = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((chunk << (6 - filled)) + OFFSET);
    }
    String::from_utf8(out).expect("graph6 output is ASCII")
}

/// Parses one graph6 line. A leading `>>graph6<<` header and a trailing line
/// terminator are accepted; anything else that deviates from the format is a
/// [`Error::Parse`] carrying the offending byte offset.
pub fn decode(text: &str) -> Result<Graph> {
    let trimmed = text.trim_end_matches(['\n', '\r']);
    let (body, base) = match trimmed.strip_prefix(HEADER) {
        Some(rest) => (rest.as_bytes(), HEADER.len()),
        None => (trimmed.as_bytes(), 0),
    };
    let err = |offset: usize, message: &str| Error::Parse {
        offset: base + offset,
        message: message.to_string(),
    };
    for (i, &b) in body.iter().enumerate() {
        if !(OFFSET..=126).contains(&b) {
            return Err(err(i, "byte outside the printable graph6 range"));
        }
    }
    let (n, mut pos) = match body.first() {
        None => return Err(err(0, "empty input")),
        Some(&b'~') => {
            if body.get(1) == Some(&b'~') {
                return Err(err(1, "vertex count too large"));
            }
            if body.len() < 4 {
                return Err(err(body.len(), "truncated size header"));
            }
            let n = body[1..4]
                .iter()
                .fold(0usize, |acc, &b| (acc << 6) | (b - OFFSET) as usize);
            if n < 63 {
                return Err(err(1, "non-minimal size header"));
            }
            (n, 4)
        }
        Some(&b) => ((b - OFFSET) as usize, 1),
    };
    if n == 0 || n > MAX_VERTICES {
        return Err(err(0, &format!("vertex count {n} outside 1..={MAX_VERTICES}")));
    }
    let bits = n * (n - 1) / 2;
    let expected = pos + bits.div_ceil(6);
    if body.len() < expected {
        return Err(err(body.len(), "truncated adjacency data"));
    }
    if body.len() > expected {
        return Err(err(expected, "trailing bytes after adjacency data"));
    }
    let mut g = Graph::empty(n)?;
    let mut k = 0usize;
    'outer: for j in 1..n {
        for i in 0..j {
            let byte = body[pos + k / 6] - OFFSET;
            if byte & (0x20 >> (k % 6)) != 0 {
                g.add_edge(i, j);
            }
            k += 1;
            if k == bits {
                break 'outer;
            }
        }
    }
    pos += bits.div_ceil(6);
    if bits % 6 != 0 {
        let last = body[pos - 1] - OFFSET;
        let pad = 6 - bits % 6;
        if last & ((1u8 << pad) - 1) != 0 {
            return Err(err(pos - 1, "non-zero padding bits"));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_on_five() {
        assert_eq!(encode(&Graph::empty(5).unwrap()), "D??");
    }

    #[test]
    fn single_edge() {
        let k2 = Graph::complete(2).unwrap();
        assert_eq!(encode(&k2), "A_");
        assert_eq!(decode("A_").unwrap(), k2);
    }

    #[test]
    fn known_five_vertex_string() {
        // edges 0-2 0-4 1-3 3-4
        let g = Graph::from_edges(5, &[(0, 2), (0, 4), (1, 3), (3, 4)]).unwrap();
        assert_eq!(encode(&g), "DQc");
        assert_eq!(decode("DQc\n").unwrap(), g);
    }

    #[test]
    fn long_header_for_large_graphs() {
        let g = Graph::complete(64).unwrap();
        let text = encode(&g);
        assert!(text.starts_with("~?@?"));
        assert_eq!(decode(&text).unwrap(), g);
    }

    #[test]
    fn optional_header_is_accepted() {
        assert_eq!(decode(">>graph6<<A_").unwrap(), Graph::complete(2).unwrap());
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        assert!(matches!(decode(""), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(decode("?"), Err(Error::Parse { .. })));
        assert!(matches!(decode("D?"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(decode("D???"), Err(Error::Parse { offset: 3, .. })));
        // K2 with a stray padding bit
        assert!(matches!(decode("A`"), Err(Error::Parse { offset: 1, .. })));
        assert!(matches!(decode("A "), Err(Error::Parse { offset: 1, .. })));
        assert!(matches!(decode("~~??????"), Err(Error::Parse { .. })));
    }
}
