//! The extremal graph families and their membership tests.
//!
//! Vertices of every constructed graph are laid out part by part, in the
//! order of the part-size vector that defines it. Family enumerations are
//! deduplicated by canonical form and returned sorted by it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, CanonicalForm};
use crate::enumerate::for_each_graph;
use crate::error::{Error, Result};
use crate::formulas::{self, pairs, profile, turan_edges, ExtremalProfile};
use crate::graph::{bit, complete_multipartite, members, Graph, PartitionedGraph};
use crate::graph6;
use crate::Caps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyTag {
    #[serde(rename = "HSTAR")]
    HStar,
    #[serde(rename = "H1STAR")]
    H1Star,
    #[serde(rename = "H2STAR")]
    H2Star,
    H0,
    KFamily,
}

/// Enough structure to re-derive membership without a search.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Index (into `a*`) of the part whose pair with the last part was
    /// replaced, for `H₁*`-type members.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designated_part: Option<usize>,
    /// Vertices of the triangle-free block, when there is one.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub block: Vec<usize>,
    /// Edges missing from the complete multipartite graph on the parts.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub removed_edges: Vec<(usize, usize)>,
    /// `(i, B_i)`: subsets of the last part and the part each one loses
    /// edges to.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub b_sets: Vec<(usize, Vec<usize>)>,
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub graph: PartitionedGraph,
    pub tag: FamilyTag,
    pub witness: Witness,
}

/// JSON sidecar row for one emitted member.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberRecord {
    pub graph6: String,
    pub family: FamilyTag,
    pub part_sizes: Vec<usize>,
    /// Part of each vertex, numbered from 1.
    pub part_of: Vec<usize>,
    pub witness: Witness,
}

impl FamilyMember {
    pub fn record(&self) -> MemberRecord {
        MemberRecord {
            graph6: graph6::encode(self.graph.graph()),
            family: self.tag,
            part_sizes: self.graph.part_sizes(),
            part_of: self.graph.part_of().iter().map(|p| p + 1).collect(),
            witness: self.witness.clone(),
        }
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canonical_form(self.graph.graph())
    }
}

fn to_usize(v: &[u64]) -> Vec<usize> {
    v.iter().map(|&x| x as usize).collect()
}

fn family_profile(n: usize, e: usize) -> Result<ExtremalProfile> {
    if e == 0 {
        return Err(Error::Argument("the families need e >= 1".into()));
    }
    profile(n as u64, e as u64, 3)
}

// Start offset of each part when parts are laid out consecutively.
fn offsets(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect()
}

/// `K[A*_1, …, A*_k]` minus an `m*`-edge star with centre in `A*_k` and
/// leaves in `A*_{k-1}`.
pub fn build_h_star(n: usize, e: usize) -> Result<FamilyMember> {
    if n == 0 || e > pairs(n as u64) as usize {
        return Err(Error::Argument(format!("need 1 <= n and e <= C(n, 2); got n = {n}, e = {e}")));
    }
    if e == 0 {
        let g = Graph::empty(n)?;
        return Ok(FamilyMember {
            graph: PartitionedGraph::new(g, vec![0; n])?,
            tag: FamilyTag::HStar,
            witness: Witness::default(),
        });
    }
    let p = family_profile(n, e)?;
    let sizes = to_usize(&p.a_star);
    let k = sizes.len();
    let pg = complete_multipartite(&sizes)?;
    let starts = offsets(&sizes);
    let centre = starts[k - 1];
    let removed: Vec<(usize, usize)> = (0..p.m_star as usize)
        .map(|j| (starts[k - 2] + j, centre))
        .collect();
    let mut g = pg.graph().clone();
    for &(u, v) in &removed {
        g.remove_edge(u, v);
    }
    let b_sets = if removed.is_empty() {
        Vec::new()
    } else {
        vec![(k - 2, vec![centre])]
    };
    Ok(FamilyMember {
        graph: PartitionedGraph::new(g, pg.part_of().to_vec())?,
        tag: FamilyTag::HStar,
        witness: Witness {
            designated_part: None,
            block: Vec::new(),
            removed_edges: removed,
            b_sets,
        },
    })
}

type TriangleFreeMemo = Mutex<HashMap<(usize, usize), Arc<Vec<Graph>>>>;

fn triangle_free_memo() -> &'static TriangleFreeMemo {
    static MEMO: OnceLock<TriangleFreeMemo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All triangle-free graphs on `v` vertices with `e` edges, one per
/// isomorphism class. Empty when `e > t₂(v)`. Results are memoized.
pub fn enumerate_triangle_free(v: usize, e: usize, caps: &Caps) -> Result<Arc<Vec<Graph>>> {
    if v > caps.max_block {
        return Err(Error::Capacity {
            what: "triangle-free block size",
            value: v,
            cap: caps.max_block,
        });
    }
    if v == 0 {
        return Err(Error::Argument("block needs at least one vertex".into()));
    }
    if e as u64 > turan_edges(2, v as u64) {
        return Ok(Arc::new(Vec::new()));
    }
    if let Some(hit) = triangle_free_memo().lock().expect("memo lock").get(&(v, e)) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    for_each_graph(v, e, |g| g.is_triangle_free(), |g| out.push(g.clone()));
    let out = Arc::new(out);
    triangle_free_memo()
        .lock()
        .expect("memo lock")
        .insert((v, e), out.clone());
    Ok(out)
}

// Complete multipartite graph on `others` (in order) plus one last part of
// `block.n()` vertices carrying `block` inside it.
fn join_with_block(others: &[usize], block: &Graph) -> Result<(PartitionedGraph, Vec<usize>)> {
    let mut sizes = others.to_vec();
    sizes.push(block.n());
    let pg = complete_multipartite(&sizes)?;
    let start = others.iter().sum::<usize>();
    let mut g = pg.graph().clone();
    for (u, v) in block.edges() {
        g.add_edge(start + u, start + v);
    }
    let block_vertices: Vec<usize> = (start..start + block.n()).collect();
    Ok((PartitionedGraph::new(g, pg.part_of().to_vec())?, block_vertices))
}

fn dedupe(members: Vec<FamilyMember>) -> Vec<FamilyMember> {
    let mut seen: BTreeMap<CanonicalForm, FamilyMember> = BTreeMap::new();
    for m in members {
        seen.entry(m.canonical_form()).or_insert(m);
    }
    seen.into_values().collect()
}

// (designated index i, block edge count) pairs allowed by the definition of H₁*.
fn h1_blocks(p: &ExtremalProfile) -> Vec<(usize, usize)> {
    let a = to_usize(&p.a_star);
    let k = a.len();
    let m = p.m_star as usize;
    if m == 0 {
        (0..k - 1).map(|i| (i, a[i] * a[k - 1])).collect()
    } else {
        vec![(k - 2, a[k - 2] * a[k - 1] - m)]
    }
}

fn without(a: &[usize], i: usize, j: usize) -> Vec<usize> {
    a.iter()
        .enumerate()
        .filter(|&(t, _)| t != i && t != j)
        .map(|(_, &x)| x)
        .collect()
}

/// Every `H₁*(n, e)` member up to isomorphism.
pub fn enumerate_h1_star(n: usize, e: usize, caps: &Caps) -> Result<Vec<FamilyMember>> {
    let p = family_profile(n, e)?;
    let a = to_usize(&p.a_star);
    let k = a.len();
    let mut out = Vec::new();
    let mut done_sizes = Vec::new();
    for (i, edges) in h1_blocks(&p) {
        if done_sizes.contains(&a[i]) {
            continue;
        }
        done_sizes.push(a[i]);
        let others = without(&a, i, k - 1);
        for block in enumerate_triangle_free(a[i] + a[k - 1], edges, caps)?.iter() {
            let (graph, block_vertices) = join_with_block(&others, block)?;
            out.push(FamilyMember {
                graph,
                tag: FamilyTag::H1Star,
                witness: Witness {
                    designated_part: Some(i),
                    block: block_vertices,
                    ..Witness::default()
                },
            });
        }
    }
    Ok(dedupe(out))
}

/// Every `H₂*(n, e)` member up to isomorphism: the `k`-partite members of
/// `H₁*` together with the removed-edge configurations.
pub fn enumerate_h2_star(n: usize, e: usize, caps: &Caps) -> Result<Vec<FamilyMember>> {
    let p = family_profile(n, e)?;
    let mut out: Vec<FamilyMember> = enumerate_h1_star(n, e, caps)?
        .into_iter()
        .filter(|m| {
            let block = m.witness.block.iter().fold(0u64, |acc, &v| acc | bit(v));
            m.graph.graph().bipartition_within(block).is_some()
        })
        .map(|mut m| {
            m.tag = FamilyTag::H2Star;
            m
        })
        .collect();
    for (sizes, m) in h2_configurations(&p) {
        out.extend(removed_edge_members(&sizes, m)?);
    }
    Ok(dedupe(out))
}

// Part-size vectors with the number of edges to remove.
fn h2_configurations(p: &ExtremalProfile) -> Vec<(Vec<usize>, usize)> {
    let mut configs = vec![(to_usize(&p.a_star), p.m_star as usize)];
    if let Some(resized) = p.resized_parts() {
        let k = p.a_star.len();
        let m = (p.a_star[0] - p.a_star[k - 1] - 1) as usize;
        configs.push((to_usize(&resized), m));
    }
    configs
}

// All graphs K[A_1..A_k] minus m edges, each joining some B_i ⊆ A_k to A_i
// with i ∈ I and the B_i pairwise disjoint.
fn removed_edge_members(sizes: &[usize], m: usize) -> Result<Vec<FamilyMember>> {
    let k = sizes.len();
    let base = complete_multipartite(sizes)?;
    let starts = offsets(sizes);
    let target_size = sizes[k - 2];
    let eligible: Vec<usize> = (0..k - 1).filter(|&i| sizes[i] == target_size).collect();
    let last: Vec<usize> = (starts[k - 1]..starts[k - 1] + sizes[k - 1]).collect();
    let mut out = Vec::new();
    // assignment[j] = index into eligible (or None) for vertex last[j];
    // neighbours[j] = removed neighbours of last[j] inside its part
    let mut assignment: Vec<Option<usize>> = vec![None; last.len()];
    let mut neighbours: Vec<u64> = vec![0; last.len()];
    struct Ctx<'a> {
        sizes: &'a [usize],
        starts: &'a [usize],
        eligible: &'a [usize],
        last: &'a [usize],
        base: &'a PartitionedGraph,
    }
    let ctx = Ctx {
        sizes,
        starts: &starts,
        eligible: &eligible,
        last: &last,
        base: &base,
    };
    fn go(
        ctx: &Ctx<'_>,
        j: usize,
        remaining: usize,
        prev_degree: usize,
        assignment: &mut Vec<Option<usize>>,
        neighbours: &mut Vec<u64>,
        out: &mut Vec<FamilyMember>,
    ) -> Result<()> {
        if remaining == 0 {
            out.push(assemble(ctx, assignment, neighbours)?);
            return Ok(());
        }
        if j == ctx.last.len() {
            return Ok(());
        }
        // vertices of A_k are interchangeable: removed degrees non-increasing
        for (slot, &part) in ctx.eligible.iter().enumerate() {
            let size = ctx.sizes[part];
            let start = ctx.starts[part];
            for subset in 1u64..(1u64 << size) {
                let d = subset.count_ones() as usize;
                if d > remaining || d > prev_degree {
                    continue;
                }
                assignment[j] = Some(slot);
                neighbours[j] = subset << start;
                go(ctx, j + 1, remaining - d, d, assignment, neighbours, out)?;
                assignment[j] = None;
                neighbours[j] = 0;
            }
        }
        Ok(())
    }
    fn assemble(ctx: &Ctx<'_>, assignment: &[Option<usize>], neighbours: &[u64]) -> Result<FamilyMember> {
        let mut g = ctx.base.graph().clone();
        let mut removed = Vec::new();
        let mut b_sets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (j, slot) in assignment.iter().enumerate() {
            if let Some(slot) = slot {
                let v = ctx.last[j];
                for u in members(neighbours[j]) {
                    g.remove_edge(u, v);
                    removed.push((u.min(v), u.max(v)));
                }
                b_sets.entry(ctx.eligible[*slot]).or_default().push(v);
            }
        }
        removed.sort_unstable();
        Ok(FamilyMember {
            graph: PartitionedGraph::new(g, ctx.base.part_of().to_vec())?,
            tag: FamilyTag::H2Star,
            witness: Witness {
                designated_part: None,
                block: Vec::new(),
                removed_edges: removed,
                b_sets: b_sets.into_iter().collect(),
            },
        })
    }
    go(&ctx, 0, m, usize::MAX, &mut assignment, &mut neighbours, &mut out)?;
    Ok(out)
}

/// Integer partitions of `n` into non-increasing parts, optionally with a
/// fixed number of parts.
pub fn partitions(n: usize, count: Option<usize>) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, count: Option<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if count.is_none_or(|c| c == cur.len()) {
                out.push(cur.clone());
            }
            return;
        }
        if count.is_some_and(|c| cur.len() >= c) {
            return;
        }
        for s in (1..=max.min(rest)).rev() {
            cur.push(s);
            go(rest - s, s, count, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, count, &mut Vec::new(), &mut out);
    out
}

/// Every graph of `K(n, e)` up to isomorphism: complete multipartite graphs
/// with a triangle-free graph added into one part.
pub fn enumerate_k_family(n: usize, e: usize, caps: &Caps) -> Result<Vec<FamilyMember>> {
    if n == 0 || e > pairs(n as u64) as usize {
        return Err(Error::Argument(format!("need 1 <= n and e <= C(n, 2); got n = {n}, e = {e}")));
    }
    let mut out = Vec::new();
    for sizes in partitions(n, None) {
        let base = pairs(n as u64) as usize - sizes.iter().map(|&s| pairs(s as u64) as usize).sum::<usize>();
        if base > e {
            continue;
        }
        let extra = e - base;
        let mut tried = Vec::new();
        for (i, &s) in sizes.iter().enumerate() {
            if tried.contains(&s) {
                continue;
            }
            tried.push(s);
            if extra as u64 > turan_edges(2, s as u64) {
                continue;
            }
            let mut others = sizes.clone();
            others.remove(i);
            let blocks = if extra == 0 {
                Arc::new(vec![Graph::empty(s)?])
            } else {
                enumerate_triangle_free(s, extra, caps)?
            };
            for block in blocks.iter() {
                let (graph, block_vertices) = join_with_block(&others, block)?;
                out.push(FamilyMember {
                    graph,
                    tag: FamilyTag::KFamily,
                    witness: Witness {
                        designated_part: Some(others.len()),
                        block: block_vertices,
                        ..Witness::default()
                    },
                });
            }
        }
    }
    Ok(dedupe(out))
}

/// Every graph of `H₀(n, e)` up to isomorphism: complete `(k-1)`-partite
/// graphs (non-empty parts) with a triangle-free graph inside each part.
pub fn enumerate_h0(n: usize, e: usize, caps: &Caps) -> Result<Vec<FamilyMember>> {
    let p = family_profile(n, e)?;
    let parts = p.k as usize - 1;
    let mut out = Vec::new();
    if parts == 0 {
        return Ok(out);
    }
    for sizes in partitions(n, Some(parts)) {
        let base = pairs(n as u64) as usize - sizes.iter().map(|&s| pairs(s as u64) as usize).sum::<usize>();
        if base > e {
            continue;
        }
        let extra = e - base;
        let caps_per_part: Vec<usize> = sizes.iter().map(|&s| turan_edges(2, s as u64) as usize).collect();
        let mut split = vec![0usize; parts];
        distribute(&sizes, &caps_per_part, 0, extra, &mut split, &mut |split| {
            let mut choices = Vec::with_capacity(parts);
            for (i, &x) in split.iter().enumerate() {
                let options = if x == 0 {
                    Arc::new(vec![Graph::empty(sizes[i])?])
                } else {
                    enumerate_triangle_free(sizes[i], x, caps)?
                };
                choices.push(options);
            }
            let mut pick = vec![0usize; parts];
            product(&sizes, split, &choices, 0, &mut pick, &mut |pick| {
                out.push(assemble_h0(&sizes, &choices, pick)?);
                Ok(())
            })
        })?;
    }
    Ok(dedupe(out))
}

// Splits `extra` edges over the parts, non-increasing within runs of equal
// part sizes.
fn distribute(
    sizes: &[usize],
    caps: &[usize],
    i: usize,
    extra: usize,
    split: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if i == sizes.len() {
        return if extra == 0 { emit(split) } else { Ok(()) };
    }
    let mut hi = caps[i].min(extra);
    if i > 0 && sizes[i] == sizes[i - 1] {
        hi = hi.min(split[i - 1]);
    }
    let room: usize = caps[i + 1..].iter().sum();
    for x in (0..=hi).rev() {
        if extra - x > room {
            break;
        }
        split[i] = x;
        distribute(sizes, caps, i + 1, extra - x, split, emit)?;
    }
    split[i] = 0;
    Ok(())
}

fn product(
    sizes: &[usize],
    split: &[usize],
    choices: &[Arc<Vec<Graph>>],
    i: usize,
    pick: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if i == sizes.len() {
        return emit(pick);
    }
    let lo = if i > 0 && sizes[i] == sizes[i - 1] && split[i] == split[i - 1] {
        pick[i - 1]
    } else {
        0
    };
    for c in lo..choices[i].len() {
        pick[i] = c;
        product(sizes, split, choices, i + 1, pick, emit)?;
    }
    Ok(())
}

fn assemble_h0(sizes: &[usize], choices: &[Arc<Vec<Graph>>], pick: &[usize]) -> Result<FamilyMember> {
    let pg = complete_multipartite(sizes)?;
    let starts = offsets(sizes);
    let mut g = pg.graph().clone();
    for (i, &c) in pick.iter().enumerate() {
        for (u, v) in choices[i][c].edges() {
            g.add_edge(starts[i] + u, starts[i] + v);
        }
    }
    Ok(FamilyMember {
        graph: PartitionedGraph::new(g, pg.part_of().to_vec())?,
        tag: FamilyTag::H0,
        witness: Witness::default(),
    })
}

fn matches_size_and_edges(g: &Graph, n: usize, e: usize) -> bool {
    g.n() == n && g.edge_count() == e
}

// Components of the complement: parts of any complete-multipartite-plus-
// something structure are unions of these.
fn co_components(g: &Graph) -> Vec<u64> {
    g.complement().components()
}

/// Membership in `K(n, e)`; the witness partition has the triangle-free part
/// last.
pub fn is_member_k_family(g: &Graph, n: usize, e: usize) -> Option<FamilyMember> {
    if !matches_size_and_edges(g, n, e) {
        return None;
    }
    let comps = co_components(g);
    let (with_edges, independent): (Vec<u64>, Vec<u64>) =
        comps.iter().partition(|&&c| g.edge_count_within(c) > 0);
    let mut parts = independent;
    match with_edges.as_slice() {
        [] => {}
        [block] if g.is_triangle_free_within(*block) => parts.push(*block),
        _ => return None,
    }
    let block = *parts.last().expect("at least one part");
    let pg = PartitionedGraph::from_parts(g.clone(), &parts).ok()?;
    Some(FamilyMember {
        graph: pg,
        tag: FamilyTag::KFamily,
        witness: Witness {
            designated_part: Some(parts.len() - 1),
            block: members(block).collect(),
            ..Witness::default()
        },
    })
}

/// Membership in `H₀(n, e)`.
pub fn is_member_h0(g: &Graph, n: usize, e: usize) -> Option<FamilyMember> {
    if !matches_size_and_edges(g, n, e) || e == 0 {
        return None;
    }
    let k = formulas::chromatic_threshold(n as u64, e as u64).ok()? as usize;
    let want = k - 1;
    let comps = co_components(g);
    if !comps.iter().all(|&c| g.is_triangle_free_within(c)) {
        return None;
    }
    let independent: Vec<u64> = comps.iter().copied().filter(|&c| g.edge_count_within(c) == 0).collect();
    let c = comps.len();
    if want > c || c - want > independent.len() / 2 {
        return None;
    }
    let merges = c - want;
    let mut parts: Vec<u64> = comps
        .iter()
        .copied()
        .filter(|comp| !independent[..2 * merges].contains(comp))
        .collect();
    for pair in independent[..2 * merges].chunks(2) {
        parts.push(pair[0] | pair[1]);
    }
    let pg = PartitionedGraph::from_parts(g.clone(), &parts).ok()?;
    Some(FamilyMember {
        graph: pg,
        tag: FamilyTag::H0,
        witness: Witness::default(),
    })
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Membership in `H₁*(n, e)` by matching part sizes and the block.
pub fn is_member_h1_star(g: &Graph, n: usize, e: usize) -> Option<FamilyMember> {
    if !matches_size_and_edges(g, n, e) || e == 0 {
        return None;
    }
    let p = family_profile(n, e).ok()?;
    let a = to_usize(&p.a_star);
    let k = a.len();
    let comps = co_components(g);
    let (with_edges, independent): (Vec<u64>, Vec<u64>) =
        comps.iter().partition(|&&c| g.edge_count_within(c) > 0);
    if with_edges.len() > 1 {
        return None;
    }
    for (i, edges) in h1_blocks(&p) {
        let rest = sorted(without(&a, i, k - 1));
        let block_size = a[i] + a[k - 1];
        let candidates: Vec<(u64, Vec<u64>)> = if let [block] = with_edges.as_slice() {
            vec![(*block, independent.clone())]
        } else {
            let mut v = Vec::new();
            for x in 0..independent.len() {
                for y in x + 1..independent.len() {
                    let others = independent
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| t != x && t != y)
                        .map(|(_, &c)| c)
                        .collect();
                    v.push((independent[x] | independent[y], others));
                }
            }
            v
        };
        for (block, others) in candidates {
            if block.count_ones() as usize != block_size
                || g.edge_count_within(block) != edges
                || !g.is_triangle_free_within(block)
            {
                continue;
            }
            let other_sizes = sorted(others.iter().map(|c| c.count_ones() as usize).collect());
            if other_sizes != rest {
                continue;
            }
            let mut parts = others.clone();
            parts.sort_by_key(|c| std::cmp::Reverse(c.count_ones()));
            parts.push(block);
            let pg = PartitionedGraph::from_parts(g.clone(), &parts).ok()?;
            return Some(FamilyMember {
                graph: pg,
                tag: FamilyTag::H1Star,
                witness: Witness {
                    designated_part: Some(i),
                    block: members(block).collect(),
                    ..Witness::default()
                },
            });
        }
    }
    None
}

/// Membership in `H₂*(n, e)`: either a `k`-partite member of `H₁*`, or a
/// complete `k`-partite graph with the prescribed removed-edge pattern.
pub fn is_member_h2_star(g: &Graph, n: usize, e: usize) -> Option<FamilyMember> {
    if !matches_size_and_edges(g, n, e) || e == 0 {
        return None;
    }
    if let Some(mut m) = is_member_h1_star(g, n, e) {
        let block = m.witness.block.iter().fold(0u64, |acc, &v| acc | bit(v));
        if g.bipartition_within(block).is_some() {
            m.tag = FamilyTag::H2Star;
            return Some(m);
        }
    }
    let p = family_profile(n, e).ok()?;
    h2_configurations(&p)
        .into_iter()
        .find_map(|(sizes, m)| match_removed_edge_pattern(g, &sizes, m))
}

fn match_removed_edge_pattern(g: &Graph, sizes: &[usize], m: usize) -> Option<FamilyMember> {
    let k = sizes.len();
    let comps = co_components(g);
    let co = g.complement();
    let head_sizes = sorted(sizes[..k - 1].to_vec());
    let last_size = sizes[k - 1];
    let eligible_size = sizes[k - 2];
    if m == 0 {
        if comps.iter().any(|&c| g.edge_count_within(c) > 0) {
            return None;
        }
        let mut all = sorted(comps.iter().map(|c| c.count_ones() as usize).collect());
        let want = sorted(sizes.to_vec());
        if all != want {
            return None;
        }
        all.clear();
        let mut parts = comps.clone();
        parts.sort_by_key(|c| std::cmp::Reverse(c.count_ones()));
        // a part of the last size goes last
        let idx = parts.iter().rposition(|c| c.count_ones() as usize == last_size)?;
        let tail = parts.remove(idx);
        parts.push(tail);
        let pg = PartitionedGraph::from_parts(g.clone(), &parts).ok()?;
        return Some(FamilyMember {
            graph: pg,
            tag: FamilyTag::H2Star,
            witness: Witness::default(),
        });
    }
    for (ci, &comp) in comps.iter().enumerate() {
        if comp.count_ones() as usize <= last_size {
            continue;
        }
        let others: Vec<u64> = comps
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != ci)
            .map(|(_, &c)| c)
            .collect();
        if others.iter().any(|&c| g.edge_count_within(c) > 0) {
            continue;
        }
        let mut found = None;
        independent_sets_of_size(g, comp, last_size, &mut |x| {
            if found.is_none() {
                found = check_split(g, &co, comp, x, &others, &head_sizes, eligible_size, m);
            }
            found.is_some()
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn check_split(
    g: &Graph,
    co: &Graph,
    comp: u64,
    last: u64,
    others: &[u64],
    head_sizes: &[usize],
    eligible_size: usize,
    m: usize,
) -> Option<FamilyMember> {
    let rest = comp & !last;
    let (sub, map) = co.induced_subgraph(rest).ok()?;
    let rest_parts: Vec<u64> = sub
        .components()
        .into_iter()
        .map(|c| members(c).fold(0u64, |acc, i| acc | bit(map[i])))
        .collect();
    if rest_parts
        .iter()
        .any(|&p| !co.is_clique(p) || p.count_ones() as usize != eligible_size)
    {
        return None;
    }
    let mut removed = Vec::new();
    let mut b_sets: Vec<(u64, Vec<usize>)> = Vec::new();
    for v in members(last) {
        let missing = co.neighbors(v) & rest;
        if missing == 0 {
            continue;
        }
        let touched: Vec<u64> = rest_parts.iter().copied().filter(|&p| p & missing != 0).collect();
        if touched.len() != 1 {
            return None;
        }
        for u in members(missing) {
            removed.push((u.min(v), u.max(v)));
        }
        match b_sets.iter_mut().find(|(p, _)| *p == touched[0]) {
            Some((_, b)) => b.push(v),
            None => b_sets.push((touched[0], vec![v])),
        }
    }
    if removed.len() != m {
        return None;
    }
    let mut head: Vec<u64> = others.iter().copied().chain(rest_parts.iter().copied()).collect();
    if sorted(head.iter().map(|c| c.count_ones() as usize).collect()) != head_sizes {
        return None;
    }
    head.sort_by_key(|c| std::cmp::Reverse(c.count_ones()));
    let mut parts = head.clone();
    parts.push(last);
    let pg = PartitionedGraph::from_parts(g.clone(), &parts).ok()?;
    removed.sort_unstable();
    let b_sets = b_sets
        .into_iter()
        .map(|(p, b)| (head.iter().position(|&h| h == p).expect("touched part is a head part"), b))
        .collect();
    Some(FamilyMember {
        graph: pg,
        tag: FamilyTag::H2Star,
        witness: Witness {
            designated_part: None,
            block: Vec::new(),
            removed_edges: removed,
            b_sets,
        },
    })
}

// Calls `visit` on every independent set of `g` of the given size inside
// `within`; stops early when `visit` returns true.
fn independent_sets_of_size(g: &Graph, within: u64, size: usize, visit: &mut dyn FnMut(u64) -> bool) {
    fn go(g: &Graph, cand: u64, chosen: u64, need: usize, visit: &mut dyn FnMut(u64) -> bool) -> bool {
        if need == 0 {
            return visit(chosen);
        }
        if (cand.count_ones() as usize) < need {
            return false;
        }
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if go(g, rest & !g.neighbors(v), chosen | bit(v), need - 1, visit) {
                return true;
            }
        }
        false
    }
    go(g, within, 0, size, visit);
}

/// Steps 1–4: re-lay the distinguished part of an `H₀` witness as a complete
/// bipartite graph minus a star, and split every full part into its two
/// sides. The result has the same vertex set, edge count and clique counts.
pub fn normalize_h0(pg: &PartitionedGraph) -> Result<PartitionedGraph> {
    let g = pg.graph();
    if !pg.is_h0_witness() {
        return Err(Error::Precondition(
            "input is not complete multipartite with triangle-free parts".into(),
        ));
    }
    let parts = pg.parts();
    let inner = pg.internal_edges();
    let full = |i: usize| inner[i] as u64 == turan_edges(2, parts[i].count_ones() as u64);
    let partial: Vec<usize> = (0..parts.len()).filter(|&i| inner[i] > 0 && !full(i)).collect();
    let chosen = match partial.as_slice() {
        [i] => *i,
        [] => (0..parts.len())
            .find(|&i| inner[i] > 0 && full(i))
            .ok_or_else(|| Error::NotApplicable("every part is internally empty".into()))?,
        _ => {
            return Err(Error::Precondition(format!(
                "{} partially full parts; at most one is allowed",
                partial.len()
            )))
        }
    };
    // step 2: the other parts split into independent sides
    let mut sides: Vec<u64> = Vec::new();
    for (i, &part) in parts.iter().enumerate() {
        if i == chosen {
            continue;
        }
        if inner[i] == 0 {
            sides.push(part);
        } else {
            let side = g
                .bipartition_within(part)
                .expect("full triangle-free parts are complete bipartite");
            sides.push(side);
            sides.push(part & !side);
        }
    }
    sides.sort_by_key(|&s| (std::cmp::Reverse(s.count_ones()), s.trailing_zeros()));
    // step 3: split B
    let b = parts[chosen];
    let b_size = b.count_ones() as usize;
    let b_edges = inner[chosen];
    let (big, small) = if full(chosen) {
        let side = g.bipartition_within(b).expect("full part is bipartite");
        let other = b & !side;
        if side.count_ones() >= other.count_ones() {
            (side, other)
        } else {
            (other, side)
        }
    } else {
        let small_size = (1..=b_size / 2)
            .rev()
            .find(|&t| {
                let s = b_size - t;
                (s + 1) * (t - 1) < b_edges && b_edges <= s * t
            })
            .ok_or_else(|| Error::Precondition("no split satisfies the sandwich bound".into()))?;
        let verts: Vec<usize> = members(b).collect();
        let big_size = b_size - small_size;
        let big = verts[..big_size].iter().fold(0u64, |acc, &v| acc | bit(v));
        (big, b & !big)
    };
    // step 4: K[sides.., big, small] minus an m'-edge star centred in `small`
    let removed = (big.count_ones() * small.count_ones()) as usize - b_edges;
    let centre = small.trailing_zeros() as usize;
    let leaves: Vec<usize> = members(big).take(removed).collect();
    let mut out = g.clone();
    for u in members(b) {
        for v in members(b) {
            if u < v {
                out.remove_edge(u, v);
            }
        }
    }
    for u in members(big) {
        for v in members(small) {
            out.add_edge(u, v);
        }
    }
    for &leaf in &leaves {
        out.remove_edge(leaf, centre);
    }
    let mut all_parts = sides;
    all_parts.push(big);
    all_parts.push(small);
    PartitionedGraph::from_parts(out, &all_parts)
}

/// Complete multipartite on the given parts, except for a star whose centre
/// lies in the last part and whose leaves lie in the second-to-last.
pub fn is_multipartite_minus_star(pg: &PartitionedGraph) -> bool {
    let g = pg.graph();
    let parts = pg.parts();
    let t = parts.len();
    if parts.iter().any(|&p| g.edge_count_within(p) > 0) {
        return false;
    }
    let mut missing = Vec::new();
    for (u, v) in (0..g.n()).flat_map(|u| (u + 1..g.n()).map(move |v| (u, v))) {
        if pg.part_of()[u] != pg.part_of()[v] && !g.has_edge(u, v) {
            missing.push((u, v));
        }
    }
    if missing.is_empty() {
        return true;
    }
    if t < 2 {
        return false;
    }
    let (big, small) = (parts[t - 2], parts[t - 1]);
    let centres: Vec<usize> = missing
        .iter()
        .map(|&(u, v)| if small & bit(u) != 0 { u } else { v })
        .collect();
    missing.iter().zip(&centres).all(|(&(u, v), &c)| {
        let leaf = if c == u { v } else { u };
        small & bit(c) != 0 && big & bit(leaf) != 0
    }) && centres.windows(2).all(|w| w[0] == w[1])
}

/// The explicit `(p, q, m)` instance: `p` parts of size `2q` and one of size
/// `q`, minus `m` disjoint pairs `{v_i, u_i}` with distinct `v_i` in the
/// small part and `u_i` spread round-robin over the large parts.
#[derive(Clone, Debug)]
pub struct Prop12Instance {
    pub n: usize,
    pub e: usize,
    pub member: FamilyMember,
}

pub fn prop12_construction(p: usize, q: usize, m: usize) -> Result<Prop12Instance> {
    if p < 3 || q < 2 || m < 2 || m > q {
        return Err(Error::Argument(format!(
            "need p >= 3, q >= 2 and 2 <= m <= q; got p = {p}, q = {q}, m = {m}"
        )));
    }
    let n = 2 * p * q + q;
    if n > crate::graph::MAX_VERTICES {
        return Err(Error::Capacity {
            what: "vertex count 2pq + q",
            value: n,
            cap: crate::graph::MAX_VERTICES,
        });
    }
    let e = pairs(p as u64) as usize * (2 * q) * (2 * q) + 2 * p * q * q - m;
    let mut sizes = vec![2 * q; p];
    sizes.push(q);
    let base = complete_multipartite(&sizes)?;
    let starts = offsets(&sizes);
    let mut g = base.graph().clone();
    let mut removed = Vec::new();
    let mut b_sets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let v = starts[p] + i;
        let part = i % p;
        let u = starts[part] + i / p;
        g.remove_edge(u, v);
        removed.push((u, v));
        b_sets.entry(part).or_default().push(v);
    }
    removed.sort_unstable();
    Ok(Prop12Instance {
        n,
        e,
        member: FamilyMember {
            graph: PartitionedGraph::new(g, base.part_of().to_vec())?,
            tag: FamilyTag::H2Star,
            witness: Witness {
                designated_part: None,
                block: Vec::new(),
                removed_edges: removed,
                b_sets: b_sets.into_iter().collect(),
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn h_star_small_examples() {
        let h = build_h_star(8, 22).unwrap();
        assert_eq!(h.graph.part_sizes(), vec![3, 2, 2, 1]);
        assert_eq!(h.graph.graph().edge_count(), 22);
        assert_eq!(h.graph.graph().count_cliques(4).unwrap(), 6);
        let h = build_h_star(14, 70).unwrap();
        assert_eq!(h.witness.removed_edges.len(), 2);
        assert_eq!(h.graph.graph().count_cliques(4).unwrap(), 96);
    }

    #[test]
    fn h_star_at_turan_number_is_turan_graph() {
        for (n, k) in [(7, 3), (9, 4), (10, 2)] {
            let e = turan_edges(k, n) as usize;
            let h = build_h_star(n as usize, e).unwrap();
            let pg = complete_multipartite(&to_usize(&formulas::balanced_parts(n, k))).unwrap();
            assert!(h.witness.removed_edges.is_empty());
            assert!(is_isomorphic(h.graph.graph(), pg.graph()));
        }
    }

    #[test]
    fn triangle_free_examples() {
        assert_eq!(enumerate_triangle_free(4, 4, &caps()).unwrap().len(), 1);
        assert!(enumerate_triangle_free(5, 7, &caps()).unwrap().is_empty());
        assert_eq!(enumerate_triangle_free(4, 0, &caps()).unwrap().len(), 1);
        assert!(matches!(
            enumerate_triangle_free(13, 3, &caps()),
            Err(Error::Capacity { cap: 12, .. })
        ));
    }

    #[test]
    fn h1_star_members_share_clique_count() {
        for (n, e) in [(4, 5), (8, 22)] {
            let members = enumerate_h1_star(n, e, &caps()).unwrap();
            assert!(!members.is_empty());
            for r in 3..=4 {
                let h = profile(n as u64, e as u64, r).unwrap().h_star;
                for m in &members {
                    assert_eq!(m.graph.graph().count_cliques(r as i64).unwrap(), h);
                }
            }
            let star = build_h_star(n, e).unwrap();
            let form = star.canonical_form();
            assert!(members.iter().any(|m| m.canonical_form() == form));
        }
    }

    #[test]
    fn split_star_is_h2_but_not_h1() {
        let inst = prop12_construction(3, 2, 2).unwrap();
        assert_eq!((inst.n, inst.e), (14, 70));
        let g = inst.member.graph.graph();
        assert_eq!(g.edge_count(), 70);
        assert_eq!(g.count_cliques(4).unwrap(), 96);
        assert!(is_member_h2_star(g, 14, 70).is_some());
        assert!(is_member_h1_star(g, 14, 70).is_none());
    }

    #[test]
    fn prop12_rejects_bad_parameters() {
        assert!(prop12_construction(2, 2, 2).is_err());
        assert!(prop12_construction(3, 2, 3).is_err());
        assert!(prop12_construction(3, 1, 1).is_err());
        assert!(matches!(prop12_construction(5, 7, 2), Err(Error::Capacity { .. })));
    }

    #[test]
    fn memberships_of_h_star() {
        let h = build_h_star(8, 22).unwrap();
        let g = h.graph.graph();
        assert!(is_member_h1_star(g, 8, 22).is_some());
        assert!(is_member_h2_star(g, 8, 22).is_some());
        assert!(is_member_k_family(g, 8, 22).is_some());
        assert!(is_member_h0(g, 8, 22).is_some());
    }

    #[test]
    fn five_cycle_memberships() {
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(is_member_k_family(&c5, 5, 5).is_some());
        assert!(is_member_h1_star(&c5, 5, 5).is_some());
        assert!(is_member_h2_star(&c5, 5, 5).is_none());
        assert!(is_member_k_family(&c5, 5, 6).is_none());
    }

    #[test]
    fn h2_star_example_at_8_22() {
        let members = enumerate_h2_star(8, 22, &caps()).unwrap();
        assert!(!members.is_empty());
        for m in &members {
            assert_eq!(m.graph.graph().edge_count(), 22);
            assert_eq!(m.graph.graph().count_cliques(4).unwrap(), 6);
            assert!(is_member_h2_star(m.graph.graph(), 8, 22).is_some());
        }
    }

    #[test]
    fn normalize_h_star_with_merged_last_parts() {
        let h = build_h_star(8, 22).unwrap();
        let merged: Vec<usize> = h.graph.part_of().iter().map(|&p| p.min(2)).collect();
        let pg = PartitionedGraph::new(h.graph.graph().clone(), merged).unwrap();
        let out = normalize_h0(&pg).unwrap();
        assert!(is_isomorphic(out.graph(), h.graph.graph()));
        assert!(is_multipartite_minus_star(&out));
    }

    #[test]
    fn normalize_rejects_bad_inputs() {
        let empty_parts = complete_multipartite(&[3, 3, 2]).unwrap();
        assert!(matches!(normalize_h0(&empty_parts), Err(Error::NotApplicable(_))));
        // two partially full parts of size 3 with one edge each
        let mut g = complete_multipartite(&[3, 3]).unwrap().graph().clone();
        g.add_edge(0, 1);
        g.add_edge(3, 4);
        let pg = PartitionedGraph::new(g, vec![0, 0, 0, 1, 1, 1]).unwrap();
        assert!(matches!(normalize_h0(&pg), Err(Error::Precondition(_))));
    }

    #[test]
    fn partitions_counts() {
        assert_eq!(partitions(5, None).len(), 7);
        assert_eq!(partitions(8, Some(3)).len(), 5);
        assert_eq!(partitions(9, None).len(), 30);
    }

    #[test]
    fn record_serializes_family_names() {
        let h = build_h_star(8, 22).unwrap();
        let json = serde_json::to_value(h.record()).unwrap();
        assert_eq!(json["family"], "HSTAR");
        assert_eq!(json["part_of"][7], 4);
        let k = is_member_k_family(h.graph.graph(), 8, 22).unwrap();
        assert_eq!(serde_json::to_value(k.record()).unwrap()["family"], "K_FAMILY");
    }
}
