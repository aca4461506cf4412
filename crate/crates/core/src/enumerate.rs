//! Isomorph-free generation of graphs with a fixed number of vertices and
//! edges, by canonical augmentation one edge at a time.
//!
//! A child `H = G + x` is kept only when `x` is equivalent to the canonical
//! deletion edge `m(H)`, i.e. when `H - m(H)` is isomorphic to `G`. Every
//! isomorphism class then has exactly one parent class; siblings produced by
//! the same parent are deduplicated by canonical form. Property filters must
//! be closed under edge deletion (e.g. triangle-freeness) so that every
//! ancestor of an accepted graph also passes.

use std::collections::HashSet;

use crate::canon::{canonical_labeling, CanonicalForm};
use crate::graph::{full_mask, members, Graph};

/// Visits one representative (in canonical labelling) of every isomorphism
/// class of `n`-vertex graphs with `e` edges that satisfy `filter`.
pub fn for_each_graph<F, V>(n: usize, e: usize, filter: F, mut visit: V)
where
    F: Fn(&Graph) -> bool,
    V: FnMut(&Graph),
{
    let all_pairs = n * n.saturating_sub(1) / 2;
    if e > all_pairs {
        return;
    }
    let root = Graph::empty(n).expect("vertex count checked by callers");
    if !filter(&root) {
        return;
    }
    let (root, root_form, root_gens) = canonical(&root);
    let mut walker = Walker {
        target: e,
        filter: &filter,
        visit: &mut visit,
    };
    walker.descend(&root, &root_form, &root_gens);
}

/// As [`for_each_graph`] without a filter, generating the sparser of the
/// graph and its complement.
pub fn for_each_graph_unfiltered<V>(n: usize, e: usize, mut visit: V)
where
    V: FnMut(&Graph),
{
    let all_pairs = n * n.saturating_sub(1) / 2;
    if e > all_pairs {
        return;
    }
    if 2 * e > all_pairs {
        for_each_graph(n, all_pairs - e, |_| true, |g| {
            let complement = g.complement();
            visit(&complement_canonical(&complement));
        });
    } else {
        for_each_graph(n, e, |_| true, visit);
    }
}

fn complement_canonical(g: &Graph) -> Graph {
    canonical(g).0
}

struct Walker<'a, F, V> {
    target: usize,
    filter: &'a F,
    visit: &'a mut V,
}

impl<F, V> Walker<'_, F, V>
where
    F: Fn(&Graph) -> bool,
    V: FnMut(&Graph),
{
    fn descend(&mut self, g: &Graph, form: &CanonicalForm, gens: &[Vec<usize>]) {
        let depth = g.edge_count();
        if depth == self.target {
            (self.visit)(g);
            return;
        }
        let mut seen: HashSet<CanonicalForm> = HashSet::new();
        for (u, v) in non_edge_orbit_representatives(g, gens) {
            let mut child = g.clone();
            child.add_edge(u, v);
            if !(self.filter)(&child) {
                continue;
            }
            let Some(m_candidates) = max_invariant_edges(&child, (u, v)) else {
                continue;
            };
            let labeling = canonical_labeling(&child);
            let pos = labeling.positions();
            let deletion = if m_candidates.len() == 1 {
                m_candidates[0]
            } else {
                *m_candidates
                    .iter()
                    .max_by_key(|&&(a, b)| (pos[a].max(pos[b]), pos[a].min(pos[b])))
                    .expect("candidate list is non-empty")
            };
            if deletion != (u, v) {
                let mut parent = child.clone();
                parent.remove_edge(deletion.0, deletion.1);
                if canonical(&parent).1 != *form {
                    continue;
                }
            }
            let canon_child = child.relabel(&pos);
            let child_form = CanonicalForm::from_canonical_graph(&canon_child);
            if !seen.insert(child_form.clone()) {
                continue;
            }
            // generators of the relabelled graph
            let child_gens: Vec<Vec<usize>> = labeling
                .generators
                .iter()
                .map(|gamma| conjugate(gamma, &pos))
                .collect();
            self.descend(&canon_child, &child_form, &child_gens);
        }
    }
}

fn canonical(g: &Graph) -> (Graph, CanonicalForm, Vec<Vec<usize>>) {
    let labeling = canonical_labeling(g);
    let pos = labeling.positions();
    let cg = g.relabel(&pos);
    let gens = labeling
        .generators
        .iter()
        .map(|gamma| conjugate(gamma, &pos))
        .collect();
    let form = CanonicalForm::from_canonical_graph(&cg);
    (cg, form, gens)
}

// gamma acts on original labels; return the same automorphism on labels
// pos[v].
fn conjugate(gamma: &[usize], pos: &[usize]) -> Vec<usize> {
    let mut out = vec![0; gamma.len()];
    for (v, &gv) in gamma.iter().enumerate() {
        out[pos[v]] = pos[gv];
    }
    out
}

// Edge invariant: the degree pair of its ends, larger first.
fn edge_invariant(g: &Graph, (u, v): (usize, usize)) -> (usize, usize) {
    let (a, b) = (g.degree(u), g.degree(v));
    (a.max(b), a.min(b))
}

// Edges of `g` with the largest invariant, or None when `added` is not among
// them.
fn max_invariant_edges(g: &Graph, added: (usize, usize)) -> Option<Vec<(usize, usize)>> {
    let target = edge_invariant(g, added);
    let mut out = Vec::new();
    for edge in g.edges() {
        match edge_invariant(g, edge).cmp(&target) {
            std::cmp::Ordering::Greater => return None,
            std::cmp::Ordering::Equal => out.push(edge),
            std::cmp::Ordering::Less => {}
        }
    }
    Some(out)
}

// One non-edge per orbit of the group generated by `gens`.
fn non_edge_orbit_representatives(g: &Graph, gens: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = g.n();
    let non_edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| members(!g.neighbors(u) & g.vertex_mask() & !full_mask(u + 1)).map(move |v| (u, v)))
        .collect();
    if gens.is_empty() {
        return non_edges;
    }
    let index = |u: usize, v: usize| u * n + v;
    let mut parent: Vec<usize> = (0..n * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for gamma in gens {
        for &(u, v) in &non_edges {
            let (a, b) = (gamma[u], gamma[v]);
            let (a, b) = (a.min(b), a.max(b));
            let (x, y) = (find(&mut parent, index(u, v)), find(&mut parent, index(a, b)));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    non_edges
        .into_iter()
        .filter(|&(u, v)| find(&mut parent, index(u, v)) == index(u, v))
        .collect()
}
