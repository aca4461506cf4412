//! Small simple graphs stored as one `u64` neighbourhood mask per vertex.
//!
//! Vertex sets are passed around as `u64` bit masks (bit `v` set iff vertex
//! `v` is in the set). Every graph has at most [`MAX_VERTICES`] vertices.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 64;

/// Mask with the lowest `n` bits set.
#[inline]
pub const fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub const fn bit(v: usize) -> u64 {
    1u64 << v
}

/// Iterates over the set bits of a mask in increasing order.
pub fn members(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

/// An undirected simple graph on `1..=64` vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    rows: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::Argument(format!(
                "vertex count must be in 1..={MAX_VERTICES}, got {n}"
            )));
        }
        Ok(Graph {
            n,
            rows: vec![0; n],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        let all = full_mask(n);
        for v in 0..n {
            g.rows[v] = all & !bit(v);
        }
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Argument(format!(
                    "edge ({u}, {v}) is not valid on {n} vertices"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from raw neighbourhood rows, checking symmetry and the
    /// zero diagonal.
    pub fn from_rows(rows: Vec<u64>) -> Result<Self> {
        let n = rows.len();
        let g = Graph { n, rows };
        Graph::empty(n)?;
        let all = full_mask(n);
        for u in 0..n {
            if g.rows[u] & !all != 0 || g.rows[u] & bit(u) != 0 {
                return Err(Error::Argument(format!("row {u} is out of range")));
            }
            for v in members(g.rows[u]) {
                if g.rows[v] & bit(u) == 0 {
                    return Err(Error::Argument(format!("row {u} is not symmetric")));
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn vertex_mask(&self) -> u64 {
        full_mask(self.n)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> u64 {
        self.rows[v]
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] & bit(v) != 0
    }

    /// Panics if `u == v` or either endpoint is out of range.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n, "invalid edge ({u}, {v})");
        self.rows[u] |= bit(v);
        self.rows[v] |= bit(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n, "invalid edge ({u}, {v})");
        self.rows[u] &= !bit(v);
        self.rows[v] &= !bit(u);
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Number of edges with both ends in `set`.
    pub fn edge_count_within(&self, set: u64) -> usize {
        members(set)
            .map(|v| (self.rows[v] & set).count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Edges `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            members(self.rows[u] & !full_mask(u + 1)).map(move |v| (u, v))
        })
    }

    pub fn complement(&self) -> Graph {
        let all = self.vertex_mask();
        Graph {
            n: self.n,
            rows: (0..self.n).map(|v| !self.rows[v] & all & !bit(v)).collect(),
        }
    }

    /// Subgraph induced by `set`, with vertices renumbered in increasing order.
    /// Also returns the original vertex of each new vertex.
    pub fn induced_subgraph(&self, set: u64) -> Result<(Graph, Vec<usize>)> {
        let set = set & self.vertex_mask();
        let map: Vec<usize> = members(set).collect();
        let mut sub = Graph::empty(map.len())?;
        for (i, &u) in map.iter().enumerate() {
            for (j, &v) in map.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    sub.add_edge(i, j);
                }
            }
        }
        Ok((sub, map))
    }

    /// Returns the graph whose vertex `perm[v]` plays the role of `v`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        debug_assert_eq!(perm.len(), self.n);
        let mut rows = vec![0u64; self.n];
        for (u, &pu) in perm.iter().enumerate() {
            let mut row = 0u64;
            for v in members(self.rows[u]) {
                row |= bit(perm[v]);
            }
            rows[pu] = row;
        }
        Graph { n: self.n, rows }
    }

    pub fn is_triangle_free(&self) -> bool {
        self.is_triangle_free_within(self.vertex_mask())
    }

    pub fn is_triangle_free_within(&self, set: u64) -> bool {
        for u in members(set) {
            let nu = self.rows[u] & set & !full_mask(u + 1);
            for v in members(nu) {
                if self.rows[v] & nu != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Is every pair with one end in `a` and the other in `b` an edge?
    pub fn is_complete_between(&self, a: u64, b: u64) -> bool {
        members(a).all(|u| self.rows[u] & b == b & !bit(u))
    }

    /// Number of `r`-cliques. `N(K_0) = 1` and `N(K_{-1}) = 0`.
    pub fn count_cliques(&self, r: i64) -> Result<u64> {
        self.count_cliques_within(self.vertex_mask(), r)
    }

    /// Number of `r`-cliques of the subgraph induced by `set`.
    pub fn count_cliques_within(&self, set: u64, r: i64) -> Result<u64> {
        if r < -1 {
            return Err(Error::Argument(format!("clique order must be >= -1, got {r}")));
        }
        let set = set & self.vertex_mask();
        match r {
            -1 => Ok(0),
            0 => Ok(1),
            1 => Ok(set.count_ones() as u64),
            _ => self.extend_cliques(set, r as usize),
        }
    }

    // Counts cliques of size `depth` inside `cand`, where every vertex of
    // `cand` is adjacent to the clique built so far.
    fn extend_cliques(&self, cand: u64, depth: usize) -> Result<u64> {
        if depth == 1 {
            return Ok(cand.count_ones() as u64);
        }
        if (cand.count_ones() as usize) < depth {
            return Ok(0);
        }
        let mut total = 0u64;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let next = rest & self.rows[v];
            if (next.count_ones() as usize) + 1 < depth {
                continue;
            }
            let sub = self.extend_cliques(next, depth - 1)?;
            total = total
                .checked_add(sub)
                .ok_or(Error::Overflow("clique count"))?;
        }
        Ok(total)
    }

    /// Whether `G[set]` has a proper colouring with `colors` colours.
    /// Plain backtracking, meant for small sets.
    pub fn is_colorable_within(&self, set: u64, colors: usize) -> bool {
        let verts: Vec<usize> = members(set).collect();
        let mut assigned = vec![usize::MAX; self.n];
        fn go(g: &Graph, verts: &[usize], i: usize, colors: usize, assigned: &mut [usize]) -> bool {
            if i == verts.len() {
                return true;
            }
            let v = verts[i];
            // symmetry: vertex i may only open colour classes up to the next unused one
            let used = verts[..i].iter().map(|&u| assigned[u] + 1).max().unwrap_or(0);
            for c in 0..colors.min(used + 1) {
                if members(g.rows[v]).any(|u| assigned[u] == c) {
                    continue;
                }
                assigned[v] = c;
                if go(g, verts, i + 1, colors, assigned) {
                    return true;
                }
                assigned[v] = usize::MAX;
            }
            false
        }
        go(self, &verts, 0, colors, &mut assigned)
    }

    /// Two-colouring of `G[set]` if one exists; returns the mask of colour 0
    /// (containing the lowest vertex of each component).
    pub fn bipartition_within(&self, set: u64) -> Option<u64> {
        let mut side0 = 0u64;
        let mut seen = 0u64;
        for start in members(set) {
            if seen & bit(start) != 0 {
                continue;
            }
            seen |= bit(start);
            side0 |= bit(start);
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                let u_side0 = side0 & bit(u) != 0;
                for v in members(self.rows[u] & set) {
                    if seen & bit(v) == 0 {
                        seen |= bit(v);
                        if !u_side0 {
                            side0 |= bit(v);
                        }
                        stack.push(v);
                    } else if (side0 & bit(v) != 0) == u_side0 {
                        return None;
                    }
                }
            }
        }
        Some(side0)
    }

    /// Connected components of the graph, lowest vertex first.
    pub fn components(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut seen = 0u64;
        for start in 0..self.n {
            if seen & bit(start) != 0 {
                continue;
            }
            let mut comp = bit(start);
            let mut frontier = bit(start);
            while frontier != 0 {
                let mut next = 0u64;
                for v in members(frontier) {
                    next |= self.rows[v];
                }
                next &= !comp;
                comp |= next;
                frontier = next;
            }
            seen |= comp;
            out.push(comp);
        }
        out
    }

    /// Is `set` a clique?
    pub fn is_clique(&self, set: u64) -> bool {
        members(set).all(|v| self.rows[v] & set == set & !bit(v))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        for (i, (u, v)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{u}-{v}")?;
        }
        write!(f, "])")
    }
}

/// A graph together with a labelling of its vertices by parts `0..ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedGraph {
    graph: Graph,
    part_of: Vec<usize>,
    parts: Vec<u64>,
}

impl PartitionedGraph {
    /// Every part index in `0..ℓ` must be used at least once.
    pub fn new(graph: Graph, part_of: Vec<usize>) -> Result<Self> {
        if part_of.len() != graph.n() {
            return Err(Error::Argument(format!(
                "part vector has length {} but graph has {} vertices",
                part_of.len(),
                graph.n()
            )));
        }
        let count = part_of.iter().max().map_or(0, |&m| m + 1);
        let mut parts = vec![0u64; count];
        for (v, &p) in part_of.iter().enumerate() {
            parts[p] |= bit(v);
        }
        if let Some(i) = parts.iter().position(|&p| p == 0) {
            return Err(Error::Argument(format!("part {} is empty", i + 1)));
        }
        Ok(PartitionedGraph {
            graph,
            part_of,
            parts,
        })
    }

    /// Builds from a graph and a list of disjoint masks covering every vertex.
    pub fn from_parts(graph: Graph, parts: &[u64]) -> Result<Self> {
        let mut part_of = vec![usize::MAX; graph.n()];
        for (i, &mask) in parts.iter().enumerate() {
            for v in members(mask) {
                if v >= graph.n() || part_of[v] != usize::MAX {
                    return Err(Error::Argument(format!(
                        "vertex {v} is out of range or in two parts"
                    )));
                }
                part_of[v] = i;
            }
        }
        if part_of.contains(&usize::MAX) {
            return Err(Error::Argument("parts do not cover every vertex".into()));
        }
        PartitionedGraph::new(graph, part_of)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn part_of(&self) -> &[usize] {
        &self.part_of
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.count_ones() as usize).collect()
    }

    /// Edges inside each part.
    pub fn internal_edges(&self) -> Vec<usize> {
        self.parts
            .iter()
            .map(|&p| self.graph.edge_count_within(p))
            .collect()
    }

    /// Every cross-part pair is adjacent.
    pub fn cross_complete(&self) -> bool {
        (0..self.graph.n()).all(|v| {
            let others = self.graph.vertex_mask() & !self.parts[self.part_of[v]];
            self.graph.neighbors(v) & others == others
        })
    }

    /// Complete multipartite with a triangle-free graph inside every part.
    pub fn is_h0_witness(&self) -> bool {
        self.cross_complete()
            && self
                .parts
                .iter()
                .all(|&p| self.graph.is_triangle_free_within(p))
    }
}

/// `K_{a_1,…,a_ℓ}` with parts laid out consecutively.
pub fn complete_multipartite(sizes: &[usize]) -> Result<PartitionedGraph> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Argument(format!(
            "part sizes must all be >= 1, got {sizes:?}"
        )));
    }
    let n: usize = sizes.iter().sum();
    let mut part_of = Vec::with_capacity(n);
    for (i, &s) in sizes.iter().enumerate() {
        part_of.extend(std::iter::repeat_n(i, s));
    }
    let mut g = Graph::empty(n)?;
    for u in 0..n {
        for v in u + 1..n {
            if part_of[u] != part_of[v] {
                g.add_edge(u, v);
            }
        }
    }
    PartitionedGraph::new(g, part_of)
}

fn term(g: &Graph, set: u64, r: i64) -> Result<u64> {
    if r < 0 {
        Ok(0)
    } else {
        g.count_cliques_within(set, r)
    }
}

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow("structured clique count"))
}

fn sum(terms: &[u64]) -> Result<u64> {
    terms.iter().try_fold(0u64, |acc, &t| {
        acc.checked_add(t)
            .ok_or(Error::Overflow("structured clique count"))
    })
}

/// `N(K_r, G)` when `G[S]` is triangle-free and `S` is completely joined to
/// its complement.
pub fn count_cliques_one_part(g: &Graph, s: u64, r: i64) -> Result<u64> {
    check_order(r)?;
    let s = s & g.vertex_mask();
    let rest = g.vertex_mask() & !s;
    if !g.is_triangle_free_within(s) {
        return Err(Error::Precondition("G[S] is not triangle-free".into()));
    }
    if !g.is_complete_between(s, rest) {
        return Err(Error::Precondition("G[S, S̄] is not complete bipartite".into()));
    }
    let inner = g.edge_count_within(s) as u64;
    let size = s.count_ones() as u64;
    sum(&[
        mul(inner, term(g, rest, r - 2)?)?,
        mul(size, term(g, rest, r - 1)?)?,
        term(g, rest, r)?,
    ])
}

/// `N(K_r, G)` when `G` is complete multipartite plus a triangle-free graph,
/// `V1` and `V2` being two of its parts.
pub fn count_cliques_two_parts(g: &Graph, v1: u64, v2: u64, r: i64) -> Result<u64> {
    check_order(r)?;
    let all = g.vertex_mask();
    let (v1, v2) = (v1 & all, v2 & all);
    if v1 & v2 != 0 {
        return Err(Error::Precondition("V1 and V2 overlap".into()));
    }
    let s = v1 | v2;
    let rest = all & !s;
    if !g.is_triangle_free_within(v1) {
        return Err(Error::Precondition("G[V1] is not triangle-free".into()));
    }
    if !g.is_triangle_free_within(v2) {
        return Err(Error::Precondition("G[V2] is not triangle-free".into()));
    }
    if !g.is_complete_between(v1, v2) {
        return Err(Error::Precondition("G[V1, V2] is not complete bipartite".into()));
    }
    if !g.is_complete_between(s, rest) {
        return Err(Error::Precondition("G[S, S̄] is not complete bipartite".into()));
    }
    let e1 = g.edge_count_within(v1) as u64;
    let e2 = g.edge_count_within(v2) as u64;
    let n1 = v1.count_ones() as u64;
    let n2 = v2.count_ones() as u64;
    let es = g.edge_count_within(s) as u64;
    let ns = s.count_ones() as u64;
    sum(&[
        mul(mul(e1, e2)?, term(g, rest, r - 4)?)?,
        mul(sum(&[mul(e1, n2)?, mul(e2, n1)?])?, term(g, rest, r - 3)?)?,
        mul(es, term(g, rest, r - 2)?)?,
        mul(ns, term(g, rest, r - 1)?)?,
        term(g, rest, r)?,
    ])
}

/// `N(K_r, G)` when `G[S]` is 3-partite and `S` is completely joined to its
/// complement.
pub fn count_cliques_three_parts(g: &Graph, s: u64, r: i64) -> Result<u64> {
    check_order(r)?;
    let s = s & g.vertex_mask();
    let rest = g.vertex_mask() & !s;
    if !g.is_colorable_within(s, 3) {
        return Err(Error::Precondition("G[S] is not 3-partite".into()));
    }
    if !g.is_complete_between(s, rest) {
        return Err(Error::Precondition("G[S, S̄] is not complete bipartite".into()));
    }
    let tri = g.count_cliques_within(s, 3)?;
    let inner = g.edge_count_within(s) as u64;
    let size = s.count_ones() as u64;
    sum(&[
        mul(tri, term(g, rest, r - 3)?)?,
        mul(inner, term(g, rest, r - 2)?)?,
        mul(size, term(g, rest, r - 1)?)?,
        term(g, rest, r)?,
    ])
}

fn check_order(r: i64) -> Result<()> {
    if r < -1 {
        Err(Error::Argument(format!("clique order must be >= -1, got {r}")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn naive(g: &Graph, r: usize) -> u64 {
        let n = g.n();
        (0u64..1 << n)
            .filter(|m| m.count_ones() as usize == r && g.is_clique(*m))
            .count() as u64
    }

    #[test]
    fn k4_has_four_triangles() {
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(k4.count_cliques(3).unwrap(), 4);
        assert_eq!(k4.count_cliques(4).unwrap(), 1);
    }

    #[test]
    fn conventions_for_small_orders() {
        let g = cycle(5);
        assert_eq!(g.count_cliques(0).unwrap(), 1);
        assert_eq!(g.count_cliques(-1).unwrap(), 0);
        assert_eq!(g.count_cliques(1).unwrap(), 5);
        assert_eq!(g.count_cliques(2).unwrap(), 5);
        assert!(g.count_cliques(-2).is_err());
    }

    #[test]
    fn k2222_four_cliques_match_subset_scan() {
        let g = complete_multipartite(&[2, 2, 2, 2]).unwrap();
        assert_eq!(g.graph().count_cliques(4).unwrap(), 16);
        assert_eq!(naive(g.graph(), 4), 16);
    }

    #[test]
    fn counts_on_k64_do_not_overflow() {
        let g = Graph::complete(64).unwrap();
        assert_eq!(g.count_cliques(2).unwrap(), 2016);
        assert_eq!(g.count_cliques(3).unwrap(), 41664);
    }

    #[test]
    fn one_part_on_wheel() {
        // C4 joined to an apex
        let mut g = Graph::empty(5).unwrap();
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4);
            g.add_edge(i, 4);
        }
        assert_eq!(naive(&g, 3), 4);
        assert_eq!(count_cliques_one_part(&g, 0b1111, 3).unwrap(), 4);
    }

    #[test]
    fn one_part_whole_vertex_set() {
        let g = cycle(5);
        assert_eq!(count_cliques_one_part(&g, g.vertex_mask(), 3).unwrap(), 0);
    }

    #[test]
    fn one_part_rejects_bad_input() {
        let k4 = Graph::complete(4).unwrap();
        let err = count_cliques_one_part(&k4, 0b0111, 3).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("triangle-free")));
        let c4 = cycle(4);
        let err = count_cliques_one_part(&c4, 0b0001, 3).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("complete bipartite")));
    }

    #[test]
    fn two_parts_on_k222() {
        let pg = complete_multipartite(&[2, 2, 2]).unwrap();
        let (g, p) = (pg.graph(), pg.parts());
        assert_eq!(count_cliques_two_parts(g, p[0], p[1], 3).unwrap(), 8);
        assert_eq!(
            count_cliques_two_parts(g, p[0], p[1], 2).unwrap(),
            g.edge_count() as u64
        );
    }

    #[test]
    fn three_parts_examples() {
        let k4 = complete_multipartite(&[1, 1, 1, 1]).unwrap();
        assert_eq!(count_cliques_three_parts(k4.graph(), 0b0111, 4).unwrap(), 1);
        let k222 = complete_multipartite(&[2, 2, 2]).unwrap();
        let all = k222.graph().vertex_mask();
        assert_eq!(count_cliques_three_parts(k222.graph(), all, 3).unwrap(), 8);
        assert!(count_cliques_three_parts(&Graph::complete(4).unwrap(), 0b1111, 3).is_err());
    }

    #[test]
    fn multipartite_and_helpers() {
        assert_eq!(complete_multipartite(&[2, 2]).unwrap().graph().edge_count(), 4);
        assert!(complete_multipartite(&[2, 0]).is_err());
        assert_eq!(Graph::complete(4).unwrap().complement().edge_count(), 0);
        assert!(cycle(5).is_triangle_free());
        assert!(!Graph::complete(3).unwrap().is_triangle_free());
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = cycle(5);
        let (sub, map) = g.induced_subgraph(0b10110).unwrap();
        assert_eq!(map, vec![1, 2, 4]);
        assert_eq!(sub.edge_count(), 1);
        assert!(sub.has_edge(0, 1));
    }

    #[test]
    fn bipartition_and_components() {
        let c6 = cycle(6);
        let side = c6.bipartition_within(c6.vertex_mask()).unwrap();
        assert_eq!(side, 0b010101);
        assert!(cycle(5).bipartition_within(0b11111).is_none());
        let g = Graph::from_edges(5, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![0b00011, 0b00100, 0b11000]);
    }

    #[test]
    fn partitioned_graph_validation() {
        let g = Graph::empty(3).unwrap();
        assert!(PartitionedGraph::new(g.clone(), vec![0, 2, 2]).is_err());
        assert!(PartitionedGraph::new(g, vec![0, 1]).is_err());
        let pg = complete_multipartite(&[3, 2]).unwrap();
        assert!(pg.is_h0_witness());
        assert_eq!(pg.part_sizes(), vec![3, 2]);
    }
}
