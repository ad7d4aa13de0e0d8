//! Critical pairs and sufficient criteria for confluence of `⇉`.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::rewrite::{is_normal_form, step_parallel_innermost};
use crate::term::{unify, Position, Substitution, Term};
use crate::trs::{enumerate_basic_terms, rename_apart, Trs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalPair {
    pub left: Term,
    pub right: Term,
    /// `uσ`, the term rewritten in both ways.
    pub peak: Term,
    pub position: Position,
    /// Index of the rule applied at `position`.
    pub inner_rule: usize,
    /// Index of the rule applied at the root of the peak.
    pub outer_rule: usize,
    pub mgu: Substitution,
    pub is_overlay: bool,
    pub is_trivial: bool,
    pub is_innermost_overlay: bool,
}

/// All critical pairs. Overlays of two different rules appear once per
/// orientation.
pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    let rules = trs.rules();
    let mut out = Vec::new();
    for (j, outer) in rules.iter().enumerate() {
        for (i, inner) in rules.iter().enumerate() {
            let (l_rule, u_rule) = rename_apart(inner, outer);
            for (pos, sub) in u_rule.lhs.subterms() {
                if sub.is_var() {
                    continue;
                }
                if pos.is_root() && (i == j || inner.is_variant_of(outer)) {
                    continue;
                }
                let Some(sigma) = unify(&l_rule.lhs, sub) else { continue };
                let peak = u_rule.lhs.apply(&sigma);
                let left = peak
                    .replace_at(&pos, l_rule.rhs.apply(&sigma))
                    .expect("position taken from the term");
                let right = u_rule.rhs.apply(&sigma);
                let is_overlay = pos.is_root();
                let is_innermost_overlay = is_overlay && peak.args().iter().all(|a| is_normal_form(a, trs));
                out.push(CriticalPair {
                    is_trivial: left == right,
                    left,
                    right,
                    peak,
                    position: pos,
                    inner_rule: i,
                    outer_rule: j,
                    mgu: sigma,
                    is_overlay,
                    is_innermost_overlay,
                });
            }
        }
    }
    out
}

pub fn is_non_overlapping(trs: &Trs) -> bool {
    critical_pairs(trs).is_empty()
}

/// Critical overlays whose peak has only normal forms as proper subterms.
pub fn innermost_critical_overlays(trs: &Trs) -> Vec<CriticalPair> {
    critical_pairs(trs)
        .into_iter()
        .filter(|cp| cp.is_innermost_overlay)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfluenceVerdict {
    /// No critical pairs, so `⇉` is deterministic.
    NonOverlapping,
    /// All innermost critical overlays are trivial, so `⇉` is deterministic.
    TrivialInnermostOverlays,
    Unknown,
}

impl ConfluenceVerdict {
    /// Whether the verdict certifies that `⇉` (and `→i`) are confluent.
    pub fn is_confluent(self) -> bool {
        self != ConfluenceVerdict::Unknown
    }
}

pub fn check_confluence(trs: &Trs) -> ConfluenceVerdict {
    let cps = critical_pairs(trs);
    if cps.is_empty() {
        ConfluenceVerdict::NonOverlapping
    } else if cps.iter().filter(|cp| cp.is_innermost_overlay).all(|cp| cp.is_trivial) {
        ConfluenceVerdict::TrivialInnermostOverlays
    } else {
        ConfluenceVerdict::Unknown
    }
}

/// Largest start-term size tried by [`search_nonconfluence`].
pub const SEARCH_START_SIZE: usize = 4;

/// Looks for a term with two `⇉`-successors whose reachable sets are finite,
/// fully explored and disjoint. Start terms are the ground basic terms of
/// size up to [`SEARCH_START_SIZE`]; from each, `⇉`-reducts up to
/// `depth_budget` steps are inspected. `term_budget` bounds every
/// reachable-set computation. `None` is not a proof of confluence.
pub fn search_nonconfluence(trs: &Trs, term_budget: usize, depth_budget: usize) -> Option<(Term, Term, Term)> {
    let mut visited: HashSet<Term> = HashSet::new();
    for start in enumerate_basic_terms(trs, SEARCH_START_SIZE).take(term_budget) {
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((t, depth)) = queue.pop_front() {
            if !visited.insert(t.clone()) {
                continue;
            }
            let succ = step_parallel_innermost(&t, trs);
            if succ.len() > 1 {
                let closed: Vec<Option<HashSet<Term>>> =
                    succ.iter().map(|u| reachable_closed(u, trs, term_budget)).collect();
                for a in 0..succ.len() {
                    for b in a + 1..succ.len() {
                        if let (Some(ra), Some(rb)) = (&closed[a], &closed[b]) {
                            if ra.is_disjoint(rb) {
                                return Some((t, succ[a].clone(), succ[b].clone()));
                            }
                        }
                    }
                }
            }
            if depth < depth_budget {
                queue.extend(succ.into_iter().map(|u| (u, depth + 1)));
            }
        }
    }
    None
}

fn reachable_closed(t: &Term, trs: &Trs, budget: usize) -> Option<HashSet<Term>> {
    let mut seen = HashSet::from([t.clone()]);
    let mut stack = vec![t.clone()];
    while let Some(u) = stack.pop() {
        for s in step_parallel_innermost(&u, trs) {
            if seen.insert(s.clone()) {
                if seen.len() > budget {
                    return None;
                }
                stack.push(s);
            }
        }
    }
    Some(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pairs(trs: &Trs, cps: &[CriticalPair]) -> Vec<(String, String, String)> {
        let sig = trs.signature();
        let mut v: Vec<_> = cps
            .iter()
            .map(|cp| {
                (
                    sig.display(&cp.left).to_string(),
                    sig.display(&cp.right).to_string(),
                    cp.position.to_string(),
                )
            })
            .collect();
        v.sort();
        v
    }

    fn s(a: &str, b: &str, p: &str) -> (String, String, String) {
        (a.into(), b.into(), p.into())
    }

    #[test]
    fn critical_pair_example() {
        let trs = fixtures::critical_pairs();
        let cps = critical_pairs(&trs);
        assert_eq!(
            pairs(&trs, &cps),
            vec![s("b", "c", "ε"), s("c", "b", "ε"), s("f(d)", "b", "1")]
        );
        assert!(innermost_critical_overlays(&trs).is_empty());
        assert_eq!(check_confluence(&trs), ConfluenceVerdict::TrivialInnermostOverlays);
    }

    #[test]
    fn non_overlapping_fixtures() {
        for trs in [
            fixtures::size(),
            fixtures::doubles(),
            fixtures::modulo(),
            fixtures::plus_only(),
        ] {
            assert!(critical_pairs(&trs).is_empty());
            assert!(is_non_overlapping(&trs));
            assert_eq!(check_confluence(&trs), ConfluenceVerdict::NonOverlapping);
        }
    }

    #[test]
    fn max_has_one_trivial_overlay() {
        let trs = fixtures::max();
        let cps = critical_pairs(&trs);
        assert_eq!(pairs(&trs, &cps), vec![s("Zero", "Zero", "ε"), s("Zero", "Zero", "ε")]);
        assert!(cps.iter().all(|cp| cp.is_trivial && cp.is_innermost_overlay));
        assert_eq!(trs.signature().display(&cps[0].peak).to_string(), "max(Zero,Zero)");
        assert!(!is_non_overlapping(&trs));
        assert_eq!(innermost_critical_overlays(&trs).len(), 2);
        assert_eq!(check_confluence(&trs), ConfluenceVerdict::TrivialInnermostOverlays);
    }

    #[test]
    fn self_overlaps_below_the_root() {
        let trs = crate::tpdb::parse_trs("(VAR x)(RULES f(f(x)) -> g(x))").unwrap();
        let cps = critical_pairs(&trs);
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].position.to_string(), "1");
        assert_eq!(trs.signature().display(&cps[0].peak).to_string(), "f(f(f(x0)))");
    }

    #[test]
    fn overlays_are_symmetric() {
        for (_, trs) in fixtures::all() {
            let cps = critical_pairs(&trs);
            for cp in cps.iter().filter(|c| c.is_overlay) {
                assert!(cps
                    .iter()
                    .any(|d| d.is_overlay && d.left == cp.right && d.right == cp.left));
            }
        }
    }

    #[test]
    fn nonconfluence_witness() {
        let trs = fixtures::no_confluence();
        assert_eq!(check_confluence(&trs), ConfluenceVerdict::Unknown);
        let (t, u1, u2) = search_nonconfluence(&trs, 1000, 4).unwrap();
        let sig = trs.signature();
        let show = |x: &Term| sig.display(x).to_string();
        assert_eq!(
            (show(&t), show(&u1), show(&u2)),
            ("a".into(), "f(b,b)".into(), "f(b,c)".into())
        );
        assert_eq!(search_nonconfluence(&fixtures::size(), 1000, 4), None);
        assert_eq!(search_nonconfluence(&fixtures::max(), 1000, 4), None);
    }
}
