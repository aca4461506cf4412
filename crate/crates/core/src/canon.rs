//! Canonical labelling by partition refinement and individualization.
//!
//! The search tree is the usual one: refine the ordered unit partition to an
//! equitable partition, individualize each vertex of the first non-singleton
//! cell in turn, refine again, and recurse until the partition is discrete.
//! Every discrete leaf induces a relabelled adjacency matrix; the canonical
//! form is the largest of those. Children that are images of an already
//! explored sibling under a known automorphism fixing the current prefix are
//! skipped. Automorphisms come from twin vertices (seeded up front) and from
//! leaves whose certificate repeats an earlier one.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::graph::{bit, members, Graph};
use crate::graph6;

/// Isomorphism invariant: the graph6 string of the canonically relabelled
/// graph. Two graphs have equal forms iff they are isomorphic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    /// The canonical representative itself.
    pub fn to_graph(&self) -> Graph {
        graph6::decode(&self.0).expect("canonical forms are valid graph6")
    }

    /// Wraps a graph that is already in canonical labelling.
    pub(crate) fn from_canonical_graph(g: &Graph) -> Self {
        CanonicalForm(graph6::encode(g))
    }

    /// Re-canonicalizes the decoded graph, so arbitrary graph6 text is accepted.
    pub fn from_graph6(text: &str) -> Result<Self> {
        Ok(canonical_form(&graph6::decode(text)?))
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalForm({})", self.0)
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        CanonicalForm::from_graph6(&text).map_err(serde::de::Error::custom)
    }
}

/// Result of the canonical labelling search.
#[derive(Clone, Debug)]
pub struct Labeling {
    /// `order[i]` is the vertex placed at canonical position `i`.
    pub order: Vec<usize>,
    /// Automorphisms found along the way, as vertex maps `v -> gamma[v]`.
    pub generators: Vec<Vec<usize>>,
}

impl Labeling {
    /// `position[v]` is the canonical position of vertex `v`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

pub fn canonical_labeling(g: &Graph) -> Labeling {
    let mut search = Search::new(g);
    let cells = refine(g, vec![g.vertex_mask()], vec![g.vertex_mask()]);
    let mut prefix = Vec::new();
    search.descend(cells, &mut prefix);
    let (_, order) = search.best.expect("search reaches at least one leaf");
    Labeling {
        order,
        generators: search.generators,
    }
}

pub fn canonical_graph(g: &Graph) -> Graph {
    let labeling = canonical_labeling(g);
    g.relabel(&labeling.positions())
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    CanonicalForm(graph6::encode(&canonical_graph(g)))
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    a.n() == b.n() && a.edge_count() == b.edge_count() && canonical_form(a) == canonical_form(b)
}

// Ordered-partition refinement. `queue` holds splitter sets; each is a union
// of cells of some earlier partition, which keeps the procedure invariant
// under relabelling.
fn refine(g: &Graph, mut cells: Vec<u64>, mut queue: Vec<u64>) -> Vec<u64> {
    let n = g.n();
    let mut head = 0;
    let mut counts = vec![0u32; n];
    while head < queue.len() && cells.len() < n {
        let splitter = queue[head];
        head += 1;
        let mut next = Vec::with_capacity(n);
        for &cell in &cells {
            if cell.count_ones() == 1 {
                next.push(cell);
                continue;
            }
            let mut lo = u32::MAX;
            let mut hi = 0;
            for v in members(cell) {
                let c = (g.neighbors(v) & splitter).count_ones();
                counts[v] = c;
                lo = lo.min(c);
                hi = hi.max(c);
            }
            if lo == hi {
                next.push(cell);
                continue;
            }
            let mut values: Vec<u32> = members(cell).map(|v| counts[v]).collect();
            values.sort_unstable();
            values.dedup();
            for value in values {
                let piece = members(cell)
                    .filter(|&v| counts[v] == value)
                    .fold(0u64, |acc, v| acc | bit(v));
                next.push(piece);
                queue.push(piece);
            }
        }
        cells = next;
    }
    cells
}

// Column certificate of a discrete partition: entry `j` holds the adjacency
// of position `j` to positions `i < j`, with position 0 in the top bit so that
// numeric order matches graph6 byte order.
fn certificate(g: &Graph, order: &[usize]) -> Vec<u64> {
    let n = order.len();
    let mut pos = [0u8; 64];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i as u8;
    }
    (0..n)
        .map(|j| {
            let mut word = 0u64;
            for u in members(g.neighbors(order[j])) {
                let i = pos[u] as usize;
                if i < j {
                    word |= 1u64 << (63 - i);
                }
            }
            word
        })
        .collect()
}

struct Search<'a> {
    g: &'a Graph,
    first: Option<(Vec<u64>, Vec<usize>)>,
    best: Option<(Vec<u64>, Vec<usize>)>,
    generators: Vec<Vec<usize>>,
    max_generators: usize,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.n();
        let mut generators = Vec::new();
        // (u w) is an automorphism whenever N(u) - w == N(w) - u
        for u in 0..n {
            let nu = g.neighbors(u);
            if let Some(w) = (u + 1..n).find(|&w| nu & !bit(w) == g.neighbors(w) & !bit(u)) {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(u, w);
                generators.push(perm);
            }
        }
        Search {
            g,
            first: None,
            best: None,
            generators,
            max_generators: 4 * n + 16,
        }
    }

    fn descend(&mut self, cells: Vec<u64>, prefix: &mut Vec<usize>) {
        let Some(target_index) = cells.iter().position(|c| c.count_ones() > 1) else {
            let order: Vec<usize> = cells.iter().map(|c| c.trailing_zeros() as usize).collect();
            self.leaf(order);
            return;
        };
        let target = cells[target_index];
        let mut explored: Vec<usize> = Vec::new();
        for v in members(target) {
            if !explored.is_empty() && self.same_orbit_as_any(prefix, v, &explored) {
                continue;
            }
            let mut child = Vec::with_capacity(cells.len() + 1);
            child.extend_from_slice(&cells[..target_index]);
            child.push(bit(v));
            child.push(target & !bit(v));
            child.extend_from_slice(&cells[target_index + 1..]);
            let child = refine(self.g, child, vec![bit(v)]);
            prefix.push(v);
            self.descend(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    fn same_orbit_as_any(&self, prefix: &[usize], v: usize, explored: &[usize]) -> bool {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut any = false;
        for gamma in &self.generators {
            if prefix.iter().any(|&p| gamma[p] != p) {
                continue;
            }
            any = true;
            for (x, &y) in gamma.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == root)
    }

    fn leaf(&mut self, order: Vec<usize>) {
        let cert = certificate(self.g, &order);
        let Some((first_cert, first_order)) = &self.first else {
            self.first = Some((cert.clone(), order.clone()));
            self.best = Some((cert, order));
            return;
        };
        let mut found = Vec::new();
        if cert == *first_cert {
            found.push(map_between(first_order, &order));
        }
        let (best_cert, best_order) = self.best.as_ref().expect("set with first");
        match cert.cmp(best_cert) {
            Ordering::Greater => self.best = Some((cert, order)),
            Ordering::Equal if best_order != first_order => {
                found.push(map_between(best_order, &order));
            }
            _ => {}
        }
        for gamma in found {
            self.record(gamma);
        }
    }

    fn record(&mut self, gamma: Vec<usize>) {
        if self.generators.len() < self.max_generators
            && gamma.iter().enumerate().any(|(i, &x)| i != x)
        {
            self.generators.push(gamma);
        }
    }
}

// The vertex map sending from[i] to to[i].
fn map_between(from: &[usize], to: &[usize]) -> Vec<usize> {
    let mut gamma = vec![0; from.len()];
    for (&a, &b) in from.iter().zip(to) {
        gamma[a] = b;
    }
    gamma
}
