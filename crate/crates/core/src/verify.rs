//! Executable checks over parameter boxes, with machine-readable verdicts.
//!
//! Every check is deterministic given its parameters and seed. A failed
//! proven claim is reported with severity `implementation-bug`; the
//! conjecture check only ever reports an exploratory verdict.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canon::{is_isomorphic, CanonicalForm};
use crate::constructions::{
    build_h_star, enumerate_h0, enumerate_h1_star, enumerate_h2_star, enumerate_k_family, is_member_h1_star,
    is_member_h2_star, is_multipartite_minus_star, normalize_h0, prop12_construction, FamilyMember,
};
use crate::error::{Error, Result};
use crate::formulas::{lemma_d_holds, pairs, profile, turan_edges, ExtremalProfile};
use crate::graph::{
    bit, complete_multipartite, count_cliques_one_part, count_cliques_three_parts, count_cliques_two_parts, members,
    Graph, PartitionedGraph,
};
use crate::graph6;
use crate::oracle::{self, Cache, EdgePolicy, OracleCell, ScanRequest};
use crate::Caps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClaimId {
    Thm11Value,
    Thm11Family,
    Prop12Value,
    Prop12Nonempty,
    Conj13,
    Fact21,
    Fact22,
    Fact23,
    Fact24,
    LemmaPartial,
    LemmaD,
    PropH0min,
    Normalization,
}

impl ClaimId {
    pub const ALL: [ClaimId; 13] = [
        ClaimId::Thm11Value,
        ClaimId::Thm11Family,
        ClaimId::Prop12Value,
        ClaimId::Prop12Nonempty,
        ClaimId::Conj13,
        ClaimId::Fact21,
        ClaimId::Fact22,
        ClaimId::Fact23,
        ClaimId::Fact24,
        ClaimId::LemmaPartial,
        ClaimId::LemmaD,
        ClaimId::PropH0min,
        ClaimId::Normalization,
    ];

    /// Proven claims may only pass or fail.
    pub fn is_proven(self) -> bool {
        self != ClaimId::Conj13
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .expect("claim ids serialize to strings")
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_ascii_uppercase())).map_err(|_| {
            let names: Vec<String> = ClaimId::ALL.iter().map(|c| c.name()).collect();
            Error::Argument(format!("unknown claim {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ExploratoryMatch,
    ExploratoryMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    None,
    /// A small-n observation about an asymptotic statement.
    Finding,
    /// A proven statement failed, so the code is wrong.
    ImplementationBug,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph6: Option<String>,
    pub expected: Value,
    pub actual: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: ClaimId,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub verdict: Verdict,
    pub severity: Severity,
    pub counterexamples: Vec<Counterexample>,
    pub details: Value,
}

impl VerificationReport {
    fn proven(claim_id: ClaimId, params: Value, seed: Option<u64>, counterexamples: Vec<Counterexample>, details: Value) -> Self {
        let failed = !counterexamples.is_empty();
        VerificationReport {
            claim_id,
            params,
            seed,
            verdict: if failed { Verdict::Fail } else { Verdict::Pass },
            severity: if failed { Severity::ImplementationBug } else { Severity::None },
            counterexamples,
            details,
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass | Verdict::ExploratoryMatch | Verdict::ExploratoryMismatch)
            && self.severity != Severity::ImplementationBug
    }
}

fn cell(n: usize, e: usize, r: usize) -> Value {
    json!({ "n": n, "e": e, "r": r })
}

fn forms_of(members: &[FamilyMember]) -> BTreeSet<CanonicalForm> {
    members.iter().map(|m| m.canonical_form()).collect()
}

fn forms_json(forms: &BTreeSet<CanonicalForm>) -> Value {
    json!(forms.iter().map(|f| f.as_str()).collect::<Vec<_>>())
}

fn h_star(n: usize, e: usize, r: usize) -> Result<ExtremalProfile> {
    profile(n as u64, e as u64, r as u64)
}

fn require_above_turan(n: usize, e: usize, r: usize) -> Result<()> {
    if r < 4 {
        return Err(Error::Argument(format!("this claim needs r >= 4, got r = {r}")));
    }
    if e as u64 <= turan_edges(r as u64 - 1, n as u64) || e as u64 > pairs(n as u64) {
        return Err(Error::Argument(format!(
            "this claim needs t_{}({n}) < e <= C({n}, 2), got e = {e}",
            r - 1
        )));
    }
    Ok(())
}

fn require_oracle_size(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.max_n_oracle {
        return Err(Error::Capacity {
            what: "vertex count for exhaustive family checks",
            value: n,
            cap: caps.max_n_oracle,
        });
    }
    Ok(())
}

// Members minimizing N(K_r), with the minimum.
fn minimizers(members: &[FamilyMember], r: usize) -> Result<(u64, BTreeSet<CanonicalForm>, Vec<&FamilyMember>)> {
    let mut best = u64::MAX;
    let mut winners = Vec::new();
    for m in members {
        let c = m.graph.graph().count_cliques(r as i64)?;
        if c < best {
            best = c;
            winners.clear();
        }
        if c == best {
            winners.push(m);
        }
    }
    let forms = winners.iter().map(|m| m.canonical_form()).collect();
    Ok((best, forms, winners))
}

fn set_difference_counterexamples(
    inputs: &Value,
    found: &BTreeSet<CanonicalForm>,
    wanted: &BTreeSet<CanonicalForm>,
    found_label: &str,
    wanted_label: &str,
) -> Vec<Counterexample> {
    let mut out = Vec::new();
    for f in found.difference(wanted) {
        out.push(Counterexample {
            inputs: inputs.clone(),
            graph6: Some(f.to_string()),
            expected: json!(format!("not in {found_label} (absent from {wanted_label})")),
            actual: json!(format!("in {found_label}")),
        });
    }
    for f in wanted.difference(found) {
        out.push(Counterexample {
            inputs: inputs.clone(),
            graph6: Some(f.to_string()),
            expected: json!(format!("in {found_label}")),
            actual: json!(format!("in {wanted_label} only")),
        });
    }
    out
}

/// The minimum of `N(K_r)` over `K(n, e)` equals `h*_r(n, e)`.
pub fn check_thm11_value(n: usize, e: usize, r: usize, caps: &Caps) -> Result<VerificationReport> {
    require_oracle_size(n, caps)?;
    let p = h_star(n, e, r)?;
    let members = enumerate_k_family(n, e, caps)?;
    let (min, _, winners) = minimizers(&members, r)?;
    let inputs = cell(n, e, r);
    let mut cx = Vec::new();
    if min != p.h_star {
        cx.push(Counterexample {
            inputs: inputs.clone(),
            graph6: winners.first().map(|m| graph6::encode(m.graph.graph())),
            expected: json!(p.h_star),
            actual: json!(min),
        });
    }
    let details = json!({ "min": min, "h_star": p.h_star, "family_size": members.len() });
    Ok(VerificationReport::proven(ClaimId::Thm11Value, inputs, None, cx, details))
}

/// The minimizers within `K(n, e)` are exactly `H₁*(n, e)`.
pub fn check_thm11_family(n: usize, e: usize, r: usize, caps: &Caps) -> Result<VerificationReport> {
    require_above_turan(n, e, r)?;
    require_oracle_size(n, caps)?;
    let members = enumerate_k_family(n, e, caps)?;
    let (min, winners, _) = minimizers(&members, r)?;
    let h1 = forms_of(&enumerate_h1_star(n, e, caps)?);
    let inputs = cell(n, e, r);
    let cx = set_difference_counterexamples(&inputs, &winners, &h1, "K-minimizers", "H1*");
    let details = json!({ "min": min, "minimizers": winners.len(), "h1_star": h1.len() });
    Ok(VerificationReport::proven(ClaimId::Thm11Family, inputs, None, cx, details))
}

/// Compares the oracle's extremal set with `H₁* ∪ H₂*`.
pub fn check_conj13(n: usize, e: usize, r: usize, caps: &Caps) -> Result<VerificationReport> {
    require_above_turan(n, e, r)?;
    let oracle_cell = oracle::g_min(n, e, r, caps)?;
    check_conj13_cell(&oracle_cell, caps)
}

/// As [`check_conj13`] for an already computed oracle cell.
pub fn check_conj13_cell(oracle_cell: &OracleCell, caps: &Caps) -> Result<VerificationReport> {
    let (n, e, r) = oracle_cell.key();
    require_above_turan(n, e, r)?;
    let p = h_star(n, e, r)?;
    let mut family = forms_of(&enumerate_h1_star(n, e, caps)?);
    family.extend(forms_of(&enumerate_h2_star(n, e, caps)?));
    let extremal: BTreeSet<CanonicalForm> = oracle_cell.extremal_forms.iter().cloned().collect();
    let complete = !oracle_cell.is_truncated();
    let matched = complete && extremal == family;
    let families_within_extremal = family.is_subset(&extremal);
    let inputs = cell(n, e, r);
    let mut severity = if matched { Severity::None } else { Severity::Finding };
    let mut flags = Vec::new();
    if oracle_cell.g_min < p.h_star {
        flags.push("g_min below h_star: the families are not extremal here");
    }
    if oracle_cell.g_min > p.h_star {
        // H* itself has h_star cliques, so the oracle missed a graph
        flags.push("g_min above h_star: contradicts the construction");
        severity = Severity::ImplementationBug;
    }
    if oracle_cell.g_min == p.h_star && !families_within_extremal {
        flags.push("a family member is not extremal although g_min = h_star");
        severity = Severity::ImplementationBug;
    }
    if !complete {
        flags.push("extremal set truncated");
    }
    let counterexamples = if matched {
        Vec::new()
    } else {
        set_difference_counterexamples(&inputs, &extremal, &family, "extremal set", "H1* u H2*")
    };
    Ok(VerificationReport {
        claim_id: ClaimId::Conj13,
        params: inputs,
        seed: None,
        verdict: if matched {
            Verdict::ExploratoryMatch
        } else {
            Verdict::ExploratoryMismatch
        },
        severity,
        counterexamples,
        details: json!({
            "g_min": oracle_cell.g_min,
            "h_star": p.h_star,
            "extremal_count": oracle_cell.extremal_count,
            "extremal_forms": forms_json(&extremal),
            "family_forms": forms_json(&family),
            "families_within_extremal": families_within_extremal,
            "flags": flags,
        }),
    })
}

/// The minimizers of `H₀(n, e)` are `H₁*(n, e)`, and each normalizes to a
/// copy of `H*(n, e)`.
pub fn check_h0_min(n: usize, e: usize, r: usize, caps: &Caps) -> Result<VerificationReport> {
    require_above_turan(n, e, r)?;
    require_oracle_size(n, caps)?;
    let members = enumerate_h0(n, e, caps)?;
    let (min, winners, winning_members) = minimizers(&members, r)?;
    let h1 = forms_of(&enumerate_h1_star(n, e, caps)?);
    let inputs = cell(n, e, r);
    let mut cx = set_difference_counterexamples(&inputs, &winners, &h1, "H0-minimizers", "H1*");
    let star = build_h_star(n, e)?;
    for m in &winning_members {
        let g6 = Some(graph6::encode(m.graph.graph()));
        match normalize_h0(&m.graph) {
            Ok(out) if is_isomorphic(out.graph(), star.graph.graph()) => {}
            Ok(out) => cx.push(Counterexample {
                inputs: inputs.clone(),
                graph6: g6,
                expected: json!({ "normalized": graph6::encode(star.graph.graph()) }),
                actual: json!({ "normalized": graph6::encode(out.graph()) }),
            }),
            Err(err) => cx.push(Counterexample {
                inputs: inputs.clone(),
                graph6: g6,
                expected: json!("normalization succeeds"),
                actual: json!(err.to_string()),
            }),
        }
    }
    let details = json!({ "min": min, "minimizers": winners.len(), "h0_size": members.len() });
    Ok(VerificationReport::proven(ClaimId::PropH0min, inputs, None, cx, details))
}

/// `H*(n, e)` has `e` edges and `h*_r(n, e)` cliques for every cell of the box.
pub fn check_fact21(n_min: usize, n_max: usize, rs: &[usize]) -> Result<VerificationReport> {
    let mut cx = Vec::new();
    let mut cells = 0;
    for n in n_min.max(1)..=n_max {
        for e in 1..=pairs(n as u64) as usize {
            let h = build_h_star(n, e)?;
            let g = h.graph.graph();
            for &r in rs {
                cells += 1;
                let predicted = h_star(n, e, r)?.h_star;
                let actual = g.count_cliques(r as i64)?;
                if g.edge_count() != e || actual != predicted {
                    cx.push(Counterexample {
                        inputs: cell(n, e, r),
                        graph6: Some(graph6::encode(g)),
                        expected: json!({ "edges": e, "cliques": predicted }),
                        actual: json!({ "edges": g.edge_count(), "cliques": actual }),
                    });
                }
            }
        }
    }
    let params = json!({ "n_min": n_min, "n_max": n_max, "r": rs });
    Ok(VerificationReport::proven(ClaimId::Fact21, params, None, cx, json!({ "cells": cells })))
}

/// `lemma_d_holds` on `1 <= a <= a_max`, `2 <= k <= k_max`, `ak <= n <= n_max`.
pub fn check_lemma_d(a_max: u64, k_max: u64, n_max: u64) -> Result<VerificationReport> {
    let mut cx = Vec::new();
    let mut cases = 0u64;
    for a in 1..=a_max {
        for k in 2..=k_max {
            for n in a * k..=n_max {
                cases += 1;
                if !lemma_d_holds(a, k, n)? {
                    cx.push(Counterexample {
                        inputs: json!({ "a": a, "k": k, "n": n }),
                        graph6: None,
                        expected: json!(true),
                        actual: json!(false),
                    });
                }
            }
        }
    }
    let params = json!({ "a_max": a_max, "k_max": k_max, "n_max": n_max });
    Ok(VerificationReport::proven(ClaimId::LemmaD, params, None, cx, json!({ "cases": cases })))
}

/// (a) every `H₂*` member has `h*_r` cliques on the cells `n <= n_members`,
/// `r = 4`, `e > t₃(n)`, and at `(14, 70)`; the split-star member is checked
/// against `H₁*` separately by [`check_prop12_nonempty`].
pub fn check_prop12_value(n_members: usize, caps: &Caps) -> Result<VerificationReport> {
    let r = 4;
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for n in 4..=n_members {
        for e in turan_edges(3, n as u64) as usize + 1..=pairs(n as u64) as usize {
            cells.push((n, e));
        }
    }
    cells.push((14, 70));
    let mut cx = Vec::new();
    let mut checked = 0usize;
    for &(n, e) in &cells {
        let predicted = h_star(n, e, r)?.h_star;
        for m in enumerate_h2_star(n, e, caps)? {
            checked += 1;
            let actual = m.graph.graph().count_cliques(r as i64)?;
            if actual != predicted {
                cx.push(Counterexample {
                    inputs: cell(n, e, r),
                    graph6: Some(graph6::encode(m.graph.graph())),
                    expected: json!(predicted),
                    actual: json!(actual),
                });
            }
        }
    }
    let params = json!({ "n_max": n_members, "r": r, "extra_cells": [[14, 70]] });
    Ok(VerificationReport::proven(ClaimId::Prop12Value, params, None, cx, json!({ "members_checked": checked })))
}

/// (b) finds cells with `a*_{k-2} = a*_{k-1}`, `m* >= 2`, `a*_k >= 2` and
/// `e > t₃(n)` up to `n_cap`, and at the first one exhibits a member of
/// `H₂* \ H₁*`; also replays the explicit `(3, 2, 2)` instance.
pub fn check_prop12_nonempty(n_cap: usize) -> Result<VerificationReport> {
    let r = 4usize;
    let mut cx = Vec::new();
    let mut witness_cell = None;
    'search: for n in 4..=n_cap.min(crate::graph::MAX_VERTICES) {
        for e in turan_edges(3, n as u64) as usize + 1..=pairs(n as u64) as usize {
            let p = h_star(n, e, r)?;
            let k = p.a_star.len();
            if k >= 3 && p.a_star[k - 3] == p.a_star[k - 2] && p.m_star >= 2 && p.a_star[k - 1] >= 2 {
                witness_cell = Some((n, e, p));
                break 'search;
            }
        }
    }
    let mut details = json!({ "n_cap": n_cap });
    match &witness_cell {
        None => cx.push(Counterexample {
            inputs: json!({ "n_cap": n_cap }),
            graph6: None,
            expected: json!("a cell satisfying the size conditions"),
            actual: json!("none found"),
        }),
        Some((n, e, p)) => {
            let g = split_star_member(p)?;
            let inputs = cell(*n, *e, r);
            let cliques = g.count_cliques(r as i64)?;
            let in_h2 = is_member_h2_star(&g, *n, *e).is_some();
            let in_h1 = is_member_h1_star(&g, *n, *e).is_some();
            if !in_h2 || in_h1 || cliques != p.h_star || g.edge_count() != *e {
                cx.push(Counterexample {
                    inputs: inputs.clone(),
                    graph6: Some(graph6::encode(&g)),
                    expected: json!({ "in_h2": true, "in_h1": false, "cliques": p.h_star, "edges": e }),
                    actual: json!({ "in_h2": in_h2, "in_h1": in_h1, "cliques": cliques, "edges": g.edge_count() }),
                });
            }
            details["first_cell"] = json!({ "n": n, "e": e, "a_star": p.a_star, "m_star": p.m_star, "graph6": graph6::encode(&g) });
        }
    }
    let inst = prop12_construction(3, 2, 2)?;
    let g = inst.member.graph.graph();
    let p = h_star(inst.n, inst.e, r)?;
    let in_h2 = is_member_h2_star(g, inst.n, inst.e).is_some();
    let in_h1 = is_member_h1_star(g, inst.n, inst.e).is_some();
    let cliques = g.count_cliques(r as i64)?;
    let profile_ok = p.k == 4 && p.a_star == [4, 4, 4, 2] && p.m_star == 2;
    if (inst.n, inst.e) != (14, 70) || !in_h2 || in_h1 || cliques != p.h_star || !profile_ok {
        cx.push(Counterexample {
            inputs: json!({ "p": 3, "q": 2, "m": 2 }),
            graph6: Some(graph6::encode(g)),
            expected: json!({ "n": 14, "e": 70, "in_h2": true, "in_h1": false, "cliques": p.h_star, "a_star": [4, 4, 4, 2], "m_star": 2 }),
            actual: json!({ "n": inst.n, "e": inst.e, "in_h2": in_h2, "in_h1": in_h1, "cliques": cliques, "a_star": p.a_star, "m_star": p.m_star }),
        });
    }
    details["construction"] = json!({ "p": 3, "q": 2, "m": 2, "n": inst.n, "e": inst.e, "graph6": graph6::encode(g) });
    let params = json!({ "n_cap": n_cap, "r": r });
    Ok(VerificationReport::proven(ClaimId::Prop12Nonempty, params, None, cx, details))
}

// K[a*] minus m* edges: m* − 1 from one vertex of A_k to A_{k-1} and one
// from another vertex of A_k to A_{k-2}.
fn split_star_member(p: &ExtremalProfile) -> Result<Graph> {
    let sizes: Vec<usize> = p.a_star.iter().map(|&a| a as usize).collect();
    let k = sizes.len();
    let pg = complete_multipartite(&sizes)?;
    let start = |i: usize| sizes[..i].iter().sum::<usize>();
    let mut g = pg.graph().clone();
    let (v1, v2) = (start(k - 1), start(k - 1) + 1);
    for j in 0..p.m_star as usize - 1 {
        g.remove_edge(v1, start(k - 2) + j);
    }
    g.remove_edge(v2, start(k - 3));
    Ok(g)
}

fn random_graph_on(rng: &mut ChaCha8Rng, g: &mut Graph, vertices: &[usize], density: f64) {
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if rng.gen_bool(density) {
                g.add_edge(u, v);
            }
        }
    }
}

// Adds a triangle-free graph with exactly `edges` edges on `vertices`;
// None when the random attempt got stuck.
fn random_triangle_free_on(rng: &mut ChaCha8Rng, g: &mut Graph, vertices: &[usize], edges: usize) -> Option<()> {
    let set = vertices.iter().fold(0u64, |a, &v| a | bit(v));
    let mut pairs: Vec<(usize, usize)> = vertices
        .iter()
        .enumerate()
        .flat_map(|(i, &u)| vertices[i + 1..].iter().map(move |&v| (u, v)))
        .collect();
    let mut scratch = g.clone();
    let mut added = 0;
    if rng.gen_bool(0.5) {
        // random subgraph of a random complete bipartite graph
        let side: u64 = vertices.iter().filter(|_| rng.gen_bool(0.5)).fold(0u64, |a, &v| a | bit(v));
        pairs.retain(|&(u, v)| (side & bit(u) != 0) != (side & bit(v) != 0));
    }
    pairs.shuffle(rng);
    for (u, v) in pairs {
        if added == edges {
            break;
        }
        if scratch.neighbors(u) & scratch.neighbors(v) & set == 0 {
            scratch.add_edge(u, v);
            added += 1;
        }
    }
    if added == edges {
        *g = scratch;
        Some(())
    } else {
        None
    }
}

fn random_order(rng: &mut ChaCha8Rng, n: usize) -> i64 {
    rng.gen_range(-1..=n as i64 + 1)
}

/// Facts 2.2–2.4: the structured counters agree with the generic counter on
/// random instances of each shape.
pub fn check_fact_counters(trials: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for claim in [ClaimId::Fact22, ClaimId::Fact23, ClaimId::Fact24] {
        let mut cx = Vec::new();
        for _ in 0..trials {
            let n = rng.gen_range(1..=14usize);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let density = rng.gen_range(0.0..=1.0);
            let (g, structured, r) = match claim {
                ClaimId::Fact22 => {
                    let s_len = rng.gen_range(0..=n);
                    let (s, rest) = order.split_at(s_len);
                    let mut g = join(n, &[s, rest]);
                    let cap = turan_edges(2, s.len() as u64) as usize;
                    let want = rng.gen_range(0..=cap);
                    if random_triangle_free_on(&mut rng, &mut g, s, want).is_none() {
                        random_triangle_free_on(&mut rng, &mut g, s, 0);
                    }
                    random_graph_on(&mut rng, &mut g, rest, density);
                    let r = random_order(&mut rng, n);
                    let mask = s.iter().fold(0u64, |a, &v| a | bit(v));
                    (g.clone(), count_cliques_one_part(&g, mask, r), r)
                }
                ClaimId::Fact23 => {
                    let a = rng.gen_range(0..=n);
                    let b = rng.gen_range(0..=n - a);
                    let (v1, tail) = order.split_at(a);
                    let (v2, rest) = tail.split_at(b);
                    let mut g = join(n, &[v1, v2, rest]);
                    for part in [v1, v2] {
                        let want = rng.gen_range(0..=turan_edges(2, part.len() as u64) as usize);
                        if random_triangle_free_on(&mut rng, &mut g, part, want).is_none() {
                            random_triangle_free_on(&mut rng, &mut g, part, 0);
                        }
                    }
                    random_graph_on(&mut rng, &mut g, rest, density);
                    let r = random_order(&mut rng, n);
                    let m1 = v1.iter().fold(0u64, |a, &v| a | bit(v));
                    let m2 = v2.iter().fold(0u64, |a, &v| a | bit(v));
                    (g.clone(), count_cliques_two_parts(&g, m1, m2, r), r)
                }
                _ => {
                    let s_len = rng.gen_range(0..=n);
                    let (s, rest) = order.split_at(s_len);
                    let mut g = join(n, &[s, rest]);
                    let colour: Vec<usize> = s.iter().map(|_| rng.gen_range(0..3)).collect();
                    let p = rng.gen_range(0.0..=1.0);
                    for i in 0..s.len() {
                        for j in i + 1..s.len() {
                            if colour[i] != colour[j] && rng.gen_bool(p) {
                                g.add_edge(s[i], s[j]);
                            }
                        }
                    }
                    random_graph_on(&mut rng, &mut g, rest, density);
                    let r = random_order(&mut rng, n);
                    let mask = s.iter().fold(0u64, |a, &v| a | bit(v));
                    (g.clone(), count_cliques_three_parts(&g, mask, r), r)
                }
            };
            let generic = g.count_cliques(r)?;
            match structured {
                Ok(v) if v == generic => {}
                other => cx.push(Counterexample {
                    inputs: json!({ "r": r }),
                    graph6: Some(graph6::encode(&g)),
                    expected: json!(generic),
                    actual: match other {
                        Ok(v) => json!(v),
                        Err(err) => json!(err.to_string()),
                    },
                }),
            }
        }
        let params = json!({ "trials": trials });
        out.push(VerificationReport::proven(claim, params, Some(seed), cx, json!({ "trials": trials })));
    }
    Ok(out)
}

// Empty graph with every pair across different groups joined.
fn join(n: usize, groups: &[&[usize]]) -> Graph {
    let mut g = Graph::empty(n.max(1)).expect("n <= 64");
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            for &u in *a {
                for &v in *b {
                    g.add_edge(u, v);
                }
            }
        }
    }
    g
}

// First `edges` pairs of the balanced complete bipartite graph on `block`.
fn relay_bipartite(g: &mut Graph, block: &[usize], edges: usize) {
    for (i, &u) in block.iter().enumerate() {
        for &v in &block[i + 1..] {
            if g.has_edge(u, v) {
                g.remove_edge(u, v);
            }
        }
    }
    let half = block.len().div_ceil(2);
    let (left, right) = block.split_at(half);
    let cross = left.iter().flat_map(|&u| right.iter().map(move |&v| (u, v)));
    for (u, v) in cross.take(edges) {
        g.add_edge(u, v);
    }
}

/// The second difference of `N(K_r)` under moving one edge between two
/// partially full parts equals `−2·N(K_{r−4}, H)`.
pub fn check_partially_full_convexity(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cx = Vec::new();
    let mut strict = 0usize;
    let mut done = 0usize;
    while done < trials {
        let r = [3i64, 4, 5][done % 3];
        let bi_len = rng.gen_range(3..=6usize);
        let bj_len = rng.gen_range(3..=6usize);
        let others: Vec<usize> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(1..=4)).collect();
        let mut sizes = vec![bi_len, bj_len];
        sizes.extend(&others);
        let n: usize = sizes.iter().sum();
        let pg = complete_multipartite(&sizes)?;
        let mut g = pg.graph().clone();
        let parts: Vec<Vec<usize>> = pg.parts().iter().map(|&p| members(p).collect()).collect();
        let (bi, bj) = (&parts[0], &parts[1]);
        let (ti, tj) = (turan_edges(2, bi_len as u64) as usize, turan_edges(2, bj_len as u64) as usize);
        // partially full and both moves possible: 1 < x+1 <= ti, and the same for j
        let x = rng.gen_range(1..ti);
        let y = rng.gen_range(1..tj);
        if random_triangle_free_on(&mut rng, &mut g, bi, x).is_none()
            || random_triangle_free_on(&mut rng, &mut g, bj, y).is_none()
        {
            continue;
        }
        for part in &parts[2..] {
            let want = rng.gen_range(0..=turan_edges(2, part.len() as u64) as usize);
            if random_triangle_free_on(&mut rng, &mut g, part, want).is_none() {
                random_triangle_free_on(&mut rng, &mut g, part, 0);
            }
        }
        done += 1;
        let mut gi = g.clone();
        relay_bipartite(&mut gi, bi, x + 1);
        relay_bipartite(&mut gi, bj, y - 1);
        let mut gj = g.clone();
        relay_bipartite(&mut gj, bi, x - 1);
        relay_bipartite(&mut gj, bj, y + 1);
        let h_mask = pg.parts()[2..].iter().fold(0u64, |a, &p| a | p);
        let base = g.count_cliques(r)? as i128;
        let ni = gi.count_cliques(r)? as i128;
        let nj = gj.count_cliques(r)? as i128;
        let h_term = g.count_cliques_within(h_mask, r - 4)? as i128;
        let lhs = ni + nj - 2 * base;
        let rhs = -2 * h_term;
        let inputs = json!({ "r": r, "sizes": sizes, "x": x, "sigma": x + y });
        if lhs != rhs {
            cx.push(Counterexample {
                inputs: inputs.clone(),
                graph6: Some(graph6::encode(&g)),
                expected: json!(rhs.to_string()),
                actual: json!(lhs.to_string()),
            });
        }
        let e = g.edge_count() as u64;
        if r >= 4 && e > turan_edges(r as u64 - 1, n as u64) {
            if ni.min(nj) < base {
                strict += 1;
            } else {
                cx.push(Counterexample {
                    inputs,
                    graph6: Some(graph6::encode(&g)),
                    expected: json!("one move strictly decreases the count"),
                    actual: json!({ "base": base.to_string(), "moved_in": ni.to_string(), "moved_out": nj.to_string() }),
                });
            }
        }
    }
    let params = json!({ "trials": trials });
    let details = json!({ "trials": trials, "strict_decreases": strict });
    Ok(VerificationReport::proven(ClaimId::LemmaPartial, params, Some(seed), cx, details))
}

/// `normalize_h0` keeps `n`, `e` and `N(K_r)` for `r ∈ {3, 4, 5}` on random
/// witnesses with one partially full part, and returns a complete
/// multipartite graph minus a star.
pub fn check_normalization(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cx = Vec::new();
    let mut done = 0usize;
    while done < trials {
        let parts_count = rng.gen_range(1..=4usize);
        let sizes: Vec<usize> = (0..parts_count).map(|_| rng.gen_range(1..=5)).collect();
        let pg = complete_multipartite(&sizes)?;
        let mut g = pg.graph().clone();
        let parts: Vec<Vec<usize>> = pg.parts().iter().map(|&p| members(p).collect()).collect();
        let special = rng.gen_range(0..parts_count);
        let cap = turan_edges(2, sizes[special] as u64) as usize;
        if cap == 0 {
            continue;
        }
        // partially full, or full when cap leaves no room
        let want = if cap > 1 { rng.gen_range(1..cap) } else { 1 };
        if random_triangle_free_on(&mut rng, &mut g, &parts[special], want).is_none() {
            continue;
        }
        for (i, part) in parts.iter().enumerate() {
            if i == special {
                continue;
            }
            let full = turan_edges(2, part.len() as u64) as usize;
            if rng.gen_bool(0.5) && full > 0 {
                relay_bipartite(&mut g, part, full);
            }
        }
        done += 1;
        let witness = PartitionedGraph::new(g.clone(), pg.part_of().to_vec())?;
        let inputs = json!({ "sizes": sizes, "special": special });
        match normalize_h0(&witness) {
            Ok(out) => {
                let mut ok = out.graph().n() == g.n()
                    && out.graph().edge_count() == g.edge_count()
                    && is_multipartite_minus_star(&out);
                for r in 3..=5 {
                    ok &= out.graph().count_cliques(r)? == g.count_cliques(r)?;
                }
                if !ok {
                    cx.push(Counterexample {
                        inputs,
                        graph6: Some(graph6::encode(&g)),
                        expected: json!("same n, e and clique counts; multipartite minus a star"),
                        actual: json!({ "graph6": graph6::encode(out.graph()), "part_sizes": out.part_sizes() }),
                    });
                }
            }
            Err(err) => cx.push(Counterexample {
                inputs,
                graph6: Some(graph6::encode(&g)),
                expected: json!("normalization succeeds"),
                actual: json!(err.to_string()),
            }),
        }
    }
    let params = json!({ "trials": trials });
    Ok(VerificationReport::proven(ClaimId::Normalization, params, Some(seed), cx, json!({ "trials": trials })))
}

/// Box and knobs for [`run`]. Fields that do not apply to a claim are
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub n_min: usize,
    pub n_max: usize,
    /// Restrict to one edge count; otherwise every admissible `e`.
    pub e: Option<usize>,
    pub rs: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub a_max: u64,
    pub k_max: u64,
    pub lemma_n_max: u64,
    pub jobs: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            n_min: 1,
            n_max: 8,
            e: None,
            rs: vec![4],
            trials: 1000,
            seed: 0,
            a_max: 8,
            k_max: 8,
            lemma_n_max: 60,
            jobs: 1,
        }
    }
}

impl CheckParams {
    fn cells(&self, above_turan: bool) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for n in self.n_min.max(1)..=self.n_max {
            for &r in &self.rs {
                let lo = if above_turan {
                    turan_edges(r.saturating_sub(1) as u64, n as u64) as usize + 1
                } else {
                    0
                };
                for e in lo..=pairs(n as u64) as usize {
                    if self.e.is_none_or(|x| x == e) {
                        out.push((n, e, r));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn box_json(&self, above_turan: bool) -> Value {
        json!({
            "n_min": self.n_min.max(1),
            "n_max": self.n_max,
            "e": self.e.map_or(if above_turan { json!("above t_{r-1}(n)") } else { json!("all") }, |e| json!(e)),
            "r": self.rs,
        })
    }
}

fn merge(claim_id: ClaimId, params: Value, seed: Option<u64>, parts: Vec<VerificationReport>) -> VerificationReport {
    let verdict = if claim_id.is_proven() {
        if parts.iter().any(|p| p.verdict == Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    } else if parts.iter().all(|p| p.verdict == Verdict::ExploratoryMatch) {
        Verdict::ExploratoryMatch
    } else {
        Verdict::ExploratoryMismatch
    };
    let severity = parts.iter().map(|p| p.severity).max().unwrap_or(Severity::None);
    let cells: Vec<Value> = parts
        .iter()
        .map(|p| json!({ "cell": p.params, "verdict": p.verdict, "severity": p.severity, "details": p.details }))
        .collect();
    let counterexamples = parts.into_iter().flat_map(|p| p.counterexamples).collect();
    VerificationReport {
        claim_id,
        params,
        seed,
        verdict,
        severity,
        counterexamples,
        details: json!({ "cells": cells }),
    }
}

/// Runs one claim over the box in `params`. Cell-based claims skip cells
/// outside their precondition unless `params.e` pins a single cell, in which
/// case a violated precondition is an argument error.
pub fn run(claim: ClaimId, params: &CheckParams, caps: &Caps, cache: Option<&mut Cache>) -> Result<VerificationReport> {
    let per_cell = |check: fn(usize, usize, usize, &Caps) -> Result<VerificationReport>, above: bool| {
        let cells = params.cells(above);
        if let (Some(e), true) = (params.e, above) {
            for n in params.n_min.max(1)..=params.n_max {
                for &r in &params.rs {
                    require_above_turan(n, e, r)?;
                }
            }
        }
        let reports = cells
            .iter()
            .map(|&(n, e, r)| check(n, e, r, caps))
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>(merge(claim, params.box_json(above), None, reports))
    };
    match claim {
        ClaimId::Thm11Value => per_cell(check_thm11_value, false),
        ClaimId::Thm11Family => {
            if params.rs.iter().any(|&r| r < 4) {
                return Err(Error::Argument("THM11_FAMILY needs r >= 4".into()));
            }
            per_cell(check_thm11_family, true)
        }
        ClaimId::PropH0min => {
            if params.rs.iter().any(|&r| r < 4) {
                return Err(Error::Argument("PROP_H0MIN needs r >= 4".into()));
            }
            per_cell(check_h0_min, true)
        }
        ClaimId::Conj13 => {
            if params.rs.iter().any(|&r| r < 4) {
                return Err(Error::Argument("CONJ13 needs r >= 4".into()));
            }
            let wanted = params.cells(true);
            let request = ScanRequest {
                n_min: params.n_min.max(1),
                n_max: params.n_max,
                rs: params.rs.clone(),
                edges: EdgePolicy::AboveTuran,
                jobs: params.jobs,
                limit: None,
            };
            let mut oracle_cells = Vec::new();
            oracle::scan(&request, caps, cache, |c, _| {
                if wanted.binary_search(&c.key()).is_ok() {
                    oracle_cells.push(c.clone());
                }
            })?;
            let reports = oracle_cells
                .iter()
                .map(|c| check_conj13_cell(c, caps))
                .collect::<Result<Vec<_>>>()?;
            Ok(merge(claim, params.box_json(true), None, reports))
        }
        ClaimId::Fact21 => check_fact21(params.n_min, params.n_max, &params.rs),
        ClaimId::Fact22 | ClaimId::Fact23 | ClaimId::Fact24 => Ok(check_fact_counters(params.trials, params.seed)?
            .into_iter()
            .find(|r| r.claim_id == claim)
            .expect("one report per fact")),
        ClaimId::LemmaPartial => check_partially_full_convexity(params.trials, params.seed),
        ClaimId::Normalization => check_normalization(params.trials, params.seed),
        ClaimId::LemmaD => check_lemma_d(params.a_max, params.k_max, params.lemma_n_max),
        ClaimId::Prop12Value => check_prop12_value(params.n_max.min(caps.max_n_oracle), caps),
        ClaimId::Prop12Nonempty => check_prop12_nonempty(params.n_max.max(14)),
    }
}

/// CSV with one row per report: claim, box, verdict, counterexample count.
pub fn csv_summary(reports: &[VerificationReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["claim", "box", "verdict", "counterexamples"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in reports {
        let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
        writer
            .write_record([
                r.claim_id.name(),
                r.params.to_string(),
                verdict.as_str().unwrap_or_default().to_string(),
                r.counterexamples.len().to_string(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
