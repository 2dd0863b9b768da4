//! Computation steps, fair schedulers, traces and the reachable state graph.

use std::collections::HashMap;
use std::fmt;

use petgraph::dot::Dot;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::agent_program::Agent;
use crate::capabilities::{apply_m, enabled_cond, ConditionalAction};
use crate::mental_state::MentalState;

pub const DEFAULT_BUDGET: usize = 10_000;

/// `GOAL_BUDGET` if set and numeric, else [`DEFAULT_BUDGET`].
pub fn default_budget() -> usize {
    std::env::var("GOAL_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Step {
    pub from: MentalState,
    pub action: ConditionalAction,
    pub to: MentalState,
    pub executed: bool,
}

/// Executes `b` at `state` if it is enabled there, otherwise idles.
pub fn step(state: &MentalState, b: &ConditionalAction) -> Step {
    let next = if enabled_cond(b, state) { apply_m(b.action(), state) } else { None };
    Step {
        from: state.clone(),
        action: b.clone(),
        executed: next.is_some(),
        to: next.unwrap_or_else(|| state.clone()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scheduler {
    RoundRobin,
    /// Uniform draws, overridden whenever some action would otherwise risk
    /// an omission streak above |Π|.
    Random { seed: u64 },
    /// Uniform draws with no fairness enforcement. Not a trace of the agent.
    Unfair { seed: u64 },
}

impl Scheduler {
    pub fn id(&self) -> &'static str {
        match self {
            Scheduler::RoundRobin => "rr",
            Scheduler::Random { .. } => "random",
            Scheduler::Unfair { .. } => "unfair",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scheduler::RoundRobin => None,
            Scheduler::Random { seed } | Scheduler::Unfair { seed } => Some(*seed),
        }
    }

    pub fn is_fair(&self) -> bool {
        !matches!(self, Scheduler::Unfair { .. })
    }

    /// Largest omission streak the scheduler admits for `n` actions.
    pub fn streak_bound(&self, n: usize) -> usize {
        match self {
            Scheduler::RoundRobin => n.saturating_sub(1),
            _ => n,
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.seed() {
            Some(s) => write!(f, "{} (seed {s})", self.id()),
            None => f.write_str(self.id()),
        }
    }
}

/// Stateful rule picker for one run.
pub struct Picker {
    kind: Scheduler,
    rng: ChaCha8Rng,
    streaks: Vec<usize>,
    tick: usize,
}

impl Picker {
    pub fn new(kind: Scheduler, n: usize) -> Self {
        assert!(n > 0, "empty program");
        Picker { kind, rng: ChaCha8Rng::seed_from_u64(kind.seed().unwrap_or(0)), streaks: vec![0; n], tick: 0 }
    }

    /// Sorted descending, the k-th largest streak (1-based) is at most n-k+1.
    /// Picking the most starved action always keeps this, and it caps every
    /// streak at n.
    fn feasible_after(&self, pick: usize) -> bool {
        let n = self.streaks.len();
        let mut next: Vec<usize> =
            self.streaks.iter().enumerate().map(|(i, s)| if i == pick { 0 } else { s + 1 }).collect();
        next.sort_unstable_by(|a, b| b.cmp(a));
        next.iter().enumerate().all(|(k, s)| *s <= n - k)
    }

    pub fn pick(&mut self) -> usize {
        let n = self.streaks.len();
        let choice = match self.kind {
            Scheduler::RoundRobin => self.tick % n,
            Scheduler::Unfair { .. } => self.rng.gen_range(0..n),
            Scheduler::Random { .. } => {
                let r = self.rng.gen_range(0..n);
                if self.feasible_after(r) {
                    r
                } else {
                    let max = *self.streaks.iter().max().unwrap();
                    self.streaks.iter().position(|s| *s == max).unwrap()
                }
            }
        };
        for (i, s) in self.streaks.iter_mut().enumerate() {
            *s = if i == choice { 0 } else { *s + 1 };
        }
        self.tick += 1;
        choice
    }
}

/// A finite trace prefix: `states[i] --rules[i]--> states[i+1]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TracePrefix {
    pub states: Vec<MentalState>,
    pub rules: Vec<usize>,
    pub executed: Vec<bool>,
    pub scheduler: Scheduler,
    pub program_len: usize,
}

impl TracePrefix {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn last(&self) -> &MentalState {
        self.states.last().expect("a prefix has at least one state")
    }

    /// One line per step: `step <i> | <label> | executed|idle | beliefs: .. | goals: ..`,
    /// preceded by the initial state.
    pub fn dump(&self, agent: &Agent) -> String {
        let mut out = format!("init | {}\n", self.states[0]);
        for (i, r) in self.rules.iter().enumerate() {
            out += &format!(
                "step {} | {} | {} | {}\n",
                i + 1,
                agent.rule_label(*r),
                if self.executed[i] { "executed" } else { "idle" },
                self.states[i + 1]
            );
        }
        out
    }
}

pub fn run(agent: &Agent, sched: Scheduler, steps: usize) -> TracePrefix {
    let mut picker = Picker::new(sched, agent.program.len());
    let mut states = vec![agent.init_state().clone()];
    let mut rules = Vec::with_capacity(steps);
    let mut executed = Vec::with_capacity(steps);
    for _ in 0..steps {
        let r = picker.pick();
        let s = step(states.last().unwrap(), &agent.program[r]);
        rules.push(r);
        executed.push(s.executed);
        states.push(s.to);
    }
    TracePrefix { states, rules, executed, scheduler: sched, program_len: agent.program.len() }
}

/// Longest run of consecutive steps omitting some action, counted from the
/// start of the prefix.
pub fn max_omission_streak(prefix: &TracePrefix) -> usize {
    let mut cur = vec![0usize; prefix.program_len];
    let mut max = 0;
    for r in &prefix.rules {
        for (i, c) in cur.iter_mut().enumerate() {
            *c = if i == *r { 0 } else { *c + 1 };
            max = max.max(*c);
        }
    }
    max
}

/// Finite surrogate for weak fairness: no omission streak exceeds the bound
/// of the prefix's scheduler kind (`|Π|-1` for round robin, `|Π|` otherwise).
pub fn fairness_check(prefix: &TracePrefix) -> bool {
    max_omission_streak(prefix) <= prefix.scheduler.streak_bound(prefix.program_len)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("state budget of {budget} nodes exceeded")]
pub struct BudgetExceeded {
    pub budget: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub rule: usize,
    pub to: usize,
    pub executed: bool,
}

/// Every state reachable from the initial one. Node 0 is the initial state;
/// each node has one edge per rule, idle edges being self-loops.
#[derive(Clone, Debug)]
pub struct StateGraph {
    nodes: Vec<MentalState>,
    index: HashMap<MentalState, usize>,
    edges: Vec<Vec<Edge>>,
}

impl StateGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[MentalState] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &MentalState {
        &self.nodes[i]
    }

    pub fn index_of(&self, s: &MentalState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn edges(&self, i: usize) -> &[Edge] {
        &self.edges[i]
    }

    pub fn num_rules(&self) -> usize {
        self.edges.first().map_or(0, Vec::len)
    }

    /// Graphviz rendering with digests as node labels.
    pub fn to_dot(&self, agent: &Agent) -> String {
        let mut g = DiGraph::<String, String>::new();
        let ids: Vec<_> = self.nodes.iter().map(|s| g.add_node(s.digest())).collect();
        for (i, es) in self.edges.iter().enumerate() {
            for e in es {
                let label = if e.executed {
                    agent.rule_label(e.rule)
                } else {
                    format!("@{} idle", e.rule)
                };
                g.add_edge(ids[i], ids[e.to], label);
            }
        }
        format!("{}", Dot::new(&g))
    }
}

/// Breadth-first exploration, expanding each layer in parallel and inserting
/// new states in a fixed order so node numbering is deterministic.
pub fn reachable(agent: &Agent, budget: usize) -> Result<StateGraph, BudgetExceeded> {
    let init = agent.init_state().clone();
    let mut g = StateGraph { nodes: vec![init.clone()], index: HashMap::from([(init, 0)]), edges: vec![Vec::new()] };
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let succ: Vec<Vec<Option<MentalState>>> = frontier
            .par_iter()
            .map(|&i| {
                let s = &g.nodes[i];
                agent.program.iter().map(|b| enabled_cond(b, s).then(|| apply_m(b.action(), s)).flatten()).collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&i, outs) in frontier.iter().zip(succ) {
            let mut es = Vec::with_capacity(outs.len());
            for (rule, out) in outs.into_iter().enumerate() {
                let (to, executed) = match out {
                    None => (i, false),
                    Some(t) => match g.index.get(&t) {
                        Some(&j) => (j, true),
                        None => {
                            if g.nodes.len() >= budget {
                                return Err(BudgetExceeded { budget });
                            }
                            let j = g.nodes.len();
                            g.index.insert(t.clone(), j);
                            g.nodes.push(t);
                            g.edges.push(Vec::new());
                            next.push(j);
                            (j, true)
                        }
                    },
                };
                es.push(Edge { rule, to, executed });
            }
            g.edges[i] = es;
        }
        frontier = next;
    }
    Ok(g)
}
