use std::collections::BTreeSet;

use erlab_core::canon::{canonical_form, CanonicalForm};
use erlab_core::constructions::{
    build_h_star, enumerate_h0, enumerate_h1_star, enumerate_h2_star, enumerate_k_family, is_member_h0,
    is_member_h1_star, is_member_h2_star, is_member_k_family, FamilyMember, FamilyTag,
};
use erlab_core::enumerate::for_each_graph_unfiltered;
use erlab_core::formulas::{pairs, profile, turan_edges};
use erlab_core::graph::Graph;
use erlab_core::Caps;

fn forms(members: &[FamilyMember]) -> BTreeSet<CanonicalForm> {
    members.iter().map(|m| m.canonical_form()).collect()
}

fn all_graphs(n: usize, e: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for_each_graph_unfiltered(n, e, |g| out.push(g.clone()));
    out
}

type Test = fn(&Graph, usize, usize) -> Option<FamilyMember>;

#[test]
fn membership_tests_agree_with_enumerations() {
    let caps = Caps::default();
    for n in 2..=7 {
        for e in 1..=pairs(n as u64) as usize {
            let cases: [(&str, Vec<FamilyMember>, Test, FamilyTag); 4] = [
                ("h1", enumerate_h1_star(n, e, &caps).unwrap(), is_member_h1_star, FamilyTag::H1Star),
                ("h2", enumerate_h2_star(n, e, &caps).unwrap(), is_member_h2_star, FamilyTag::H2Star),
                ("k", enumerate_k_family(n, e, &caps).unwrap(), is_member_k_family, FamilyTag::KFamily),
                ("h0", enumerate_h0(n, e, &caps).unwrap(), is_member_h0, FamilyTag::H0),
            ];
            let graphs = all_graphs(n, e);
            for (name, members, test, tag) in &cases {
                let expected = forms(members);
                for g in &graphs {
                    let found = test(g, n, e);
                    let form = canonical_form(g);
                    assert_eq!(
                        found.is_some(),
                        expected.contains(&form),
                        "{name} at n={n} e={e} on {form}"
                    );
                    if let Some(m) = found {
                        assert_eq!(m.tag, *tag);
                        assert_eq!(m.graph.graph(), g);
                    }
                }
                for m in members {
                    assert_eq!(m.tag, *tag);
                    assert_eq!(m.graph.graph().edge_count(), e);
                }
            }
        }
    }
}

#[test]
fn family_inclusions() {
    let caps = Caps::default();
    for n in 3..=8 {
        for e in 1..=pairs(n as u64) as usize {
            let h1 = enumerate_h1_star(n, e, &caps).unwrap();
            let star = build_h_star(n, e).unwrap();
            assert!(forms(&h1).contains(&star.canonical_form()), "H* in H1* at ({n},{e})");
            for m in &h1 {
                let g = m.graph.graph();
                assert!(is_member_k_family(g, n, e).is_some(), "H1* in K at ({n},{e})");
                assert!(is_member_h0(g, n, e).is_some(), "H1* in H0 at ({n},{e})");
            }
        }
    }
}

#[test]
fn h1_members_attain_the_prediction() {
    let caps = Caps::default();
    for n in 3..=10 {
        for e in 1..=pairs(n as u64) as usize {
            let members = enumerate_h1_star(n, e, &caps).unwrap();
            for r in 3..=5 {
                let h = profile(n as u64, e as u64, r).unwrap().h_star;
                for m in &members {
                    assert_eq!(m.graph.graph().count_cliques(r as i64).unwrap(), h, "({n},{e},{r})");
                }
            }
        }
    }
}

#[test]
fn h2_members_attain_the_prediction_above_turan() {
    let caps = Caps::default();
    for n in 4..=10 {
        for e in 1..=pairs(n as u64) as usize {
            let members = enumerate_h2_star(n, e, &caps).unwrap();
            for r in 4..=5u64 {
                if (e as u64) <= turan_edges(r - 1, n as u64) {
                    continue;
                }
                let h = profile(n as u64, e as u64, r).unwrap().h_star;
                for m in &members {
                    assert_eq!(m.graph.graph().count_cliques(r as i64).unwrap(), h, "({n},{e},{r})");
                }
            }
        }
    }
}

#[test]
fn h2_extra_branch_is_empty_for_near_balanced_profiles() {
    let caps = Caps::default();
    for n in 3..=9u64 {
        for e in 1..=pairs(n) {
            let p = profile(n, e, 4).unwrap();
            let k = p.a_star.len();
            let head = &p.a_star[..k - 1];
            let near = head.iter().max().unwrap() - head.iter().min().unwrap() <= 1;
            if p.m_star != 0 || !near || p.resized_parts().is_some() {
                continue;
            }
            let h1: BTreeSet<_> = enumerate_h1_star(n as usize, e as usize, &caps)
                .unwrap()
                .into_iter()
                .filter(|m| {
                    let block = m.witness.block.iter().fold(0u64, |a, &v| a | 1 << v);
                    m.graph.graph().bipartition_within(block).is_some()
                })
                .map(|m| m.canonical_form())
                .collect();
            let h2 = forms(&enumerate_h2_star(n as usize, e as usize, &caps).unwrap());
            assert_eq!(h1, h2, "({n},{e})");
        }
    }
}
