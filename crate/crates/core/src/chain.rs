//! Exact chain-tree complexity of sharp terms.
//!
//! The states are sharp terms whose arguments are `R`-normal. A chain-tree
//! node for state `s` uses a tuple `u♯ → Com_m(v1,...,vm)` with `u♯μ = s`;
//! a child for index `i` is any state reachable from `viμ` by `→i*_R`. Child
//! contributions are nonnegative, so the best tree attaches the best child at
//! every index:
//!
//! `value(s) = max over tuples of ([tuple ∈ S] + Σ_i max(0, max value(child)))`

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::dt::DtProblem;
use crate::rewrite::{is_normal_form, DerivationHeight, NormalForms};
use crate::term::{match_term, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("argument {0} of the start term is not in normal form")]
    ArgumentNotNormal(usize),
    #[error("start term is not rooted in a sharp symbol")]
    NotSharp,
}

/// One way to label a node: whether its tuple is counted, and the
/// candidate child states per right-hand side index.
struct Label {
    counted: bool,
    children: Vec<Vec<usize>>,
}

/// Computes `Cplx⟨D,S,R⟩` by exhaustive search, caching exact values across
/// calls.
pub struct ChainOracle<'a> {
    problem: &'a DtProblem,
    nfs: NormalForms<'a>,
    budget: usize,
    known: HashMap<Term, Option<u64>>,
}

impl<'a> ChainOracle<'a> {
    /// `budget` bounds the number of states per call and the size of each
    /// normal-form search.
    pub fn new(problem: &'a DtProblem, budget: usize) -> Self {
        ChainOracle {
            problem,
            nfs: NormalForms::new(problem.trs(), budget),
            budget,
            known: HashMap::new(),
        }
    }

    pub fn cplx(&mut self, t: &Term) -> Result<DerivationHeight, ChainError> {
        let Term::App(f, args) = t else {
            return Err(ChainError::NotSharp);
        };
        if !self.problem.dt_signature().is_sharp(*f) {
            return Err(ChainError::NotSharp);
        }
        if let Some(i) = args.iter().position(|a| !is_normal_form(a, self.problem.trs())) {
            return Err(ChainError::ArgumentNotNormal(i + 1));
        }
        if let Some(&v) = self.known.get(t) {
            return Ok(v.map_or(DerivationHeight::Omega, DerivationHeight::Finite));
        }

        let mut states: Vec<Term> = vec![t.clone()];
        let mut ids: HashMap<Term, usize> = HashMap::from([(t.clone(), 0)]);
        let mut options: Vec<Vec<Label>> = Vec::new();
        let mut truncated = false;
        let mut next = 0;
        while next < states.len() {
            if self.known.contains_key(&states[next]) {
                options.push(Vec::new());
                next += 1;
                continue;
            }
            if next >= self.budget {
                truncated = true;
                break;
            }
            let state = states[next].clone();
            let opts = match self.expand(&state, &mut states, &mut ids) {
                Some(o) => o,
                None => {
                    truncated = true;
                    Vec::new()
                }
            };
            options.push(opts);
            next += 1;
        }
        let expanded = options.len();

        let mut graph: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<NodeIndex> = (0..states.len()).map(|_| graph.add_node(())).collect();
        for (s, opts) in options.iter().enumerate() {
            for o in opts {
                for &c in o.children.iter().flatten() {
                    graph.add_edge(nodes[s], nodes[c], ());
                }
            }
        }

        // None encodes ω
        let mut value: Vec<Option<u64>> = states
            .iter()
            .map(|s| self.known.get(s).copied().unwrap_or(Some(0)))
            .collect();
        let eval = |s: usize, value: &[Option<u64>]| -> Option<u64> {
            if s >= expanded {
                return value[s];
            }
            let mut best = value[s];
            for o in &options[s] {
                let mut total = Some(u64::from(o.counted));
                for cands in &o.children {
                    let b = cands.iter().try_fold(0u64, |m, &c| value[c].map(|v| m.max(v)));
                    total = total.and_then(|t| b.map(|b| t + b));
                }
                best = match (best, total) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
            best
        };
        for scc in tarjan_scc(&graph) {
            let members: Vec<usize> = scc.iter().map(|n| n.index()).collect();
            let cyclic = members.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            let rounds = if cyclic { members.len() + 1 } else { 1 };
            for _ in 0..rounds {
                for &m in &members {
                    value[m] = eval(m, &value);
                }
            }
            if cyclic {
                let changed = members.iter().any(|&m| eval(m, &value) != value[m]);
                if changed {
                    for &m in &members {
                        value[m] = None;
                    }
                }
            }
        }

        let result = value[0];
        if truncated {
            return Ok(match result {
                None => DerivationHeight::Omega,
                Some(n) => DerivationHeight::AtLeast(n),
            });
        }
        for (s, v) in states.into_iter().zip(value) {
            self.known.entry(s).or_insert(v);
        }
        Ok(result.map_or(DerivationHeight::Omega, DerivationHeight::Finite))
    }

    /// Labelling options of a state, or `None` if a normal-form search ran
    /// out of budget.
    fn expand(&mut self, state: &Term, states: &mut Vec<Term>, ids: &mut HashMap<Term, usize>) -> Option<Vec<Label>> {
        let mut out = Vec::new();
        for (i, dt) in self.problem.dts().iter().enumerate() {
            let Some(mu) = match_term(&dt.lhs, state) else { continue };
            let mut children = Vec::with_capacity(dt.rhs.len());
            for v in &dt.rhs {
                let target = v.apply(&mu);
                let Term::App(g, args) = &target else {
                    unreachable!("tuple children are sharp terms")
                };
                let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
                for a in args {
                    let nfs = self.nfs.of(a).ok()?;
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            nfs.iter().map(move |n| {
                                let mut c = c.clone();
                                c.push(n.clone());
                                c
                            })
                        })
                        .collect();
                }
                let mut cands = Vec::with_capacity(combos.len());
                let mut seen = HashSet::new();
                for c in combos {
                    let s = Term::App(*g, c);
                    let id = *ids.entry(s.clone()).or_insert_with(|| {
                        states.push(s);
                        states.len() - 1
                    });
                    if seen.insert(id) {
                        cands.push(id);
                    }
                }
                children.push(cands);
            }
            out.push(Label {
                counted: self.problem.is_strict(i),
                children,
            });
        }
        Some(out)
    }
}

pub fn cplx_oracle(t_sharp: &Term, p: &DtProblem, budget: usize) -> Result<DerivationHeight, ChainError> {
    ChainOracle::new(p, budget).cplx(t_sharp)
}
