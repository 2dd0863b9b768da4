//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Brute-force oracles here are written against the raw state graph and
//! direct formula evaluation, not against the verifier's own machinery.

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use goal_core::agent_program::{Agent, Property};
use goal_core::capabilities::{apply_m, enabled_cap, enabled_cond, Action, CapabilitySpec, ConditionalAction, EffectClause};
use goal_core::executor::{fairness_check, max_omission_streak, run, Scheduler, StateGraph, DEFAULT_BUDGET};
use goal_core::mental_state::{eval_msf, MentalState, MsFormula, Target};
use goal_core::oracle::{Bounds, Validity, ValidityOracle};
use goal_core::prop_logic::{models, tautology, Formula, Vocab};
use goal_core::shopping;
use goal_core::universe::Universe;
use goal_core::verifier::{
    check_ensures, check_hoare_basic, check_leadsto, check_unless, derive_hoare, search_leadsto, shopping_obligations,
    shopping_proof, verify_property, AgentModel, AxiomTable, HoareTriple, Scope, TemporalFormula, WlpCtx,
};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("shopping agent correctness", c1_shopping),
        ("invariant and stability obligations", c2_invariant),
        ("goal-operator weakness", c3_goal_weakness),
        ("belief, goal and enabledness axioms", c4_axioms),
        ("adopt/drop substitution", c5_substitution),
        ("wlp derivation agrees with semantic triples", c6_wlp),
        ("unless: per-rule triples vs fair traces", c7_unless),
        ("ensures soundness", c8_ensures),
        ("blind commitment and well-formed successors", c9_blind),
        ("fairness surrogate", c10_fairness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let t = Instant::now();
        let r = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn a(s: &str) -> Formula {
    Formula::atom(s)
}

fn pq() -> Vocab {
    Vocab::new(["p", "q"])
}

/// Propositional formulas over p, q up to depth 2: atoms, negations, and
/// every binary combination of atoms.
fn l2() -> Vec<Formula> {
    let l1 = [a("p"), a("q")];
    let mut out: Vec<Formula> = l1.to_vec();
    out.extend(l1.iter().map(|x| x.clone().not()));
    for x in &l1 {
        for y in &l1 {
            out.push(x.clone().and(y.clone()));
            out.push(x.clone().or(y.clone()));
            out.push(x.clone().implies(y.clone()));
        }
    }
    out
}

/// Mental-state formulas over p, q up to depth 3, counting the formula
/// inside B/G: constants, B/G of `l2()`, and ¬, ∧, ∨ over B/G of atoms.
fn ms_grammar() -> Vec<MsFormula> {
    let l1 = [a("p"), a("q")];
    let m2: Vec<MsFormula> = l1.iter().flat_map(|x| [MsFormula::b(x.clone()), MsFormula::g(x.clone())]).collect();
    let mut out = vec![MsFormula::True, MsFormula::False];
    for x in l2() {
        out.push(MsFormula::b(x.clone()));
        out.push(MsFormula::g(x));
    }
    out.extend(m2.iter().map(|m| m.clone().not()));
    for m in &m2 {
        for n in &m2 {
            out.push(m.clone().and(n.clone()));
            out.push(m.clone().or(n.clone()));
        }
    }
    out
}

fn universe() -> Universe {
    Universe::new(pq(), 2).expect("2-atom universe")
}

fn ev(s: &MentalState, f: &MsFormula) -> bool {
    eval_msf(s, f, None).expect("context-free formula")
}

fn first_reach(states: &[MentalState], goal: &MsFormula) -> Option<usize> {
    states.iter().position(|s| ev(s, goal))
}

fn c1_shopping() -> Result<String, String> {
    let start = Instant::now();
    let agent = shopping::fixture(false);
    let m = AgentModel::new(agent.clone(), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let (phi, psi) = shopping::correctness();

    let proof = shopping_proof();
    let r = check_leadsto(&proof, &m).map_err(|e| e.to_string())?;
    ensure(r.conclusion == (phi.clone(), psi.clone()), || "proof concludes something else".into())?;
    if let Some((x, y, e)) = r.leaves.iter().find(|(_, _, e)| !e.holds()) {
        return Err(format!("ensures {x}, {y} fails: {:?}", e.verdict.witness));
    }
    let named: Vec<String> = shopping::steps().iter().map(|s| s.name.clone()).collect();
    ensure(named.iter().filter(|n| n.starts_with("(7")).count() == 2, || "steps (7a)/(7b) missing".into())?;

    let facts: Vec<_> = shopping::steps().into_iter().map(|s| (s.pre, s.post)).collect();
    let found = search_leadsto(&phi, &psi, &facts).ok_or("proof search found no derivation")?;
    ensure(check_leadsto(&found, &m).map_err(|e| e.to_string())?.holds(), || "searched derivation fails".into())?;
    let trace_bad = m.eval_graph(&TemporalFormula::leadsto(phi.clone(), psi.clone())).map_err(|e| e.to_string())?;
    ensure(trace_bad.is_none(), || format!("fair-trace check fails at node {trace_bad:?}"))?;

    let mut worst = 0;
    let mut scheds: Vec<Scheduler> = (0..100).map(|seed| Scheduler::Random { seed }).collect();
    scheds.push(Scheduler::RoundRobin);
    for sched in scheds {
        let t = run(&agent, sched, 64);
        ensure(fairness_check(&t), || format!("{sched} prefix is not fair"))?;
        let k = first_reach(&t.states, &psi).ok_or_else(|| format!("{sched}: both books not bought within 64 steps"))?;
        ensure(ev(&t.states[0], &phi), || "initial state violates the precondition".into())?;
        worst = worst.max(k);
    }
    let rr = first_reach(&run(&agent, Scheduler::RoundRobin, 64).states, &psi).unwrap();
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{} ensures leaves (steps (1)-(7), both branches) hold, disjunction/transitivity composition checks, \
         fair-trace semantics agrees; 100 random traces + round robin buy both books (round robin at step {rr}, worst {worst} <= 64)",
        r.leaves.len()
    ))
}

fn c2_invariant() -> Result<String, String> {
    let m = AgentModel::new(shopping::fixture(false), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let mut obs = verify_property(&Property::Invariant(shopping::inv()), &m).map_err(|e| e.to_string())?;
    for book in shopping::BOOKS {
        obs.extend(verify_property(&Property::Unless(shopping::status(book), MsFormula::False), &m).map_err(|e| e.to_string())?);
    }
    let per_cap = shopping_obligations(&m).map_err(|e| e.to_string())?;
    let n_cap = per_cap.len();
    obs.extend(per_cap);
    if let Some(o) = obs.iter().find(|o| !o.verdict.holds) {
        return Err(format!("{} fails: {:?}", o.name, o.verdict.witness));
    }
    for tag in ["(1) T", "(2) T", "(3) T", "(4) T", "(1) I", "(2) I", "(3) I", "(4) I", "status(T)", "status(I)"] {
        ensure(obs.iter().any(|o| o.name.starts_with(tag)), || format!("no obligation {tag}"))?;
    }
    let broken = AgentModel::new(shopping::broken(), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let bad = shopping_obligations(&broken).map_err(|e| e.to_string())?;
    ensure(
        bad.iter().any(|o| o.name.starts_with("(3) T") && !o.verdict.holds && o.verdict.witness.is_some()),
        || "broken pay_cart not caught".into(),
    )?;
    Ok(format!(
        "{} obligations reported individually, all hold ({n_cap} per-capability/per-rule triples); broken pay_cart refuted with witness",
        obs.len()
    ))
}

fn c3_goal_weakness() -> Result<String, String> {
    let (p, q) = (a("p"), a("q"));
    let g = MsFormula::g;
    let oracle = Bounds::new(pq(), 2);
    let non_valid = [
        g(p.clone().implies(q.clone())).implies(g(p.clone()).implies(g(q.clone()))),
        g(p.clone().and(p.clone().implies(q.clone()))).implies(g(q.clone())),
        g(p.clone()).and(g(q.clone())).implies(g(p.clone().and(q.clone()))),
    ];
    for f in &non_valid {
        match oracle.validity(f).map_err(|e| e.to_string())? {
            Validity::Countermodel(s) => {
                ensure(s.check().is_ok(), || format!("countermodel {s} is ill-formed"))?;
                ensure(!ev(&s, f), || format!("countermodel {s} satisfies {f}"))?;
            }
            Validity::ValidWithinBounds => return Err(format!("no countermodel for {f}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = universe();
    let mut pairs = 0;
    while pairs < 1000 {
        let x = random_formula(&mut rng, 3);
        let y = rewrite(&mut rng, &x, 3);
        ensure(truth_table(&x) == truth_table(&y), || format!("rewrite broke equivalence: {x} vs {y}"))?;
        let f = g(x.clone()).iff(g(y.clone()));
        ensure(oracle.validity(&f).map_err(|e| e.to_string())?.is_valid(), || format!("oracle rejects {f}"))?;
        if let Some(s) = u.states().iter().find(|s| !ev(s, &f)) {
            return Err(format!("{f} fails at {s}"));
        }
        pairs += 1;
    }
    Ok(format!("3 non-validities refuted by checked countermodels; {pairs} equivalent pairs, 0 failures"))
}

fn truth_table(f: &Formula) -> Vec<bool> {
    let mut out = Vec::new();
    for p in [false, true] {
        for q in [false, true] {
            out.push(tt_eval(f, p, q));
        }
    }
    out
}

fn tt_eval(f: &Formula, p: bool, q: bool) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(x) => {
            if x.name() == "p" {
                p
            } else {
                q
            }
        }
        Formula::Not(x) => !tt_eval(x, p, q),
        Formula::And(x, y) => tt_eval(x, p, q) && tt_eval(y, p, q),
        Formula::Or(x, y) => tt_eval(x, p, q) || tt_eval(y, p, q),
        Formula::Implies(x, y) => !tt_eval(x, p, q) || tt_eval(y, p, q),
        Formula::Iff(x, y) => tt_eval(x, p, q) == tt_eval(y, p, q),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            2..=5 => a("p"),
            _ => a("q"),
        };
    }
    let x = random_formula(rng, depth - 1);
    let y = random_formula(rng, depth - 1);
    match rng.gen_range(0..5) {
        0 => x.not(),
        1 => x.and(y),
        2 => x.or(y),
        3 => x.implies(y),
        _ => x.iff(y),
    }
}

/// An equivalent formula by random textbook rewrites.
fn rewrite(rng: &mut ChaCha8Rng, f: &Formula, fuel: usize) -> Formula {
    let r = |rng: &mut ChaCha8Rng, x: &Formula| if fuel == 0 { x.clone() } else { rewrite(rng, x, fuel - 1) };
    let out = match f {
        Formula::Not(x) => match &**x {
            Formula::And(p, q) => r(rng, p).not().or(r(rng, q).not()),
            Formula::Or(p, q) => r(rng, p).not().and(r(rng, q).not()),
            Formula::Not(p) => r(rng, p),
            _ => r(rng, x).not(),
        },
        Formula::And(x, y) => match rng.gen_range(0..3) {
            0 => r(rng, y).and(r(rng, x)),
            1 => r(rng, x).not().or(r(rng, y).not()).not(),
            _ => r(rng, x).and(r(rng, y)),
        },
        Formula::Or(x, y) => match rng.gen_range(0..3) {
            0 => r(rng, y).or(r(rng, x)),
            1 => r(rng, x).not().implies(r(rng, y)),
            _ => r(rng, x).or(r(rng, y)),
        },
        Formula::Implies(x, y) => match rng.gen_range(0..3) {
            0 => r(rng, x).not().or(r(rng, y)),
            1 => r(rng, y).not().implies(r(rng, x).not()),
            _ => r(rng, x).implies(r(rng, y)),
        },
        Formula::Iff(x, y) => match rng.gen_range(0..2) {
            0 => r(rng, x).implies(r(rng, y)).and(r(rng, y).implies(r(rng, x))),
            _ => r(rng, y).iff(r(rng, x)),
        },
        other => other.clone(),
    };
    if rng.gen_bool(0.1) {
        out.not().not()
    } else {
        out
    }
}

fn c4_axioms() -> Result<String, String> {
    let u = universe();
    let fs = {
        let mut v = l2();
        v.extend([Formula::True, Formula::False, a("p").and(a("p").not())]);
        v
    };
    let b = MsFormula::b;
    let g = MsFormula::g;
    let adopt = |f: &Formula| MsFormula::Enabled(Target::Adopt(f.clone()));
    let mut instances: Vec<(String, MsFormula)> = vec![
        ("B consistent".into(), b(Formula::False).not()),
        ("G consistent".into(), g(Formula::False).not()),
    ];
    for x in &fs {
        instances.push(("B excludes G".into(), b(x.clone()).implies(g(x.clone()).not())));
        instances.push(("drop enabled".into(), MsFormula::Enabled(Target::Drop(x.clone()))));
        if truth_table(x).iter().any(|v| *v) {
            instances.push(("adopt enabled iff not believed".into(), b(x.clone()).not().iff(adopt(x))));
        } else {
            instances.push(("adopt of contradiction disabled".into(), adopt(x).not()));
        }
        for y in &fs {
            instances.push(("B closed under modus ponens".into(), b(x.clone().implies(y.clone())).implies(b(x.clone()).implies(b(y.clone())))));
            let entails = truth_table(x).iter().zip(truth_table(y)).all(|(a, b)| !a || b);
            if entails {
                instances.push(("G closed upward".into(), b(y.clone()).not().implies(g(x.clone()).implies(g(y.clone())))));
            }
        }
    }
    let violations: Vec<String> = instances
        .par_iter()
        .flat_map_iter(|(name, f)| u.states().iter().filter(|s| !ev(s, f)).map(move |s| format!("{name} {f} at {s}")))
        .collect();
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;

    // Enabledness of conditional actions and guarded capabilities.
    let caps = [
        CapabilitySpec::new("mk", vec![EffectClause { guard: Formula::True, add: vec![a("p")], del: vec![] }]),
        CapabilitySpec::new("swap", vec![EffectClause { guard: a("p"), add: vec![a("q")], del: vec![a("p")] }]),
    ];
    let mut actions: Vec<Action> = caps.iter().cloned().map(Action::cap).collect();
    for x in l2() {
        actions.push(Action::Adopt(x.clone()));
        actions.push(Action::Drop(x.clone()));
        actions.push(Action::cap(CapabilitySpec::ins(x.clone())));
        actions.push(Action::cap(CapabilitySpec::del(x)));
    }
    let conds: Vec<MsFormula> = ms_grammar().into_iter().step_by(3).collect();
    let mut e1 = 0usize;
    for c in &conds {
        for act in &actions {
            let rule = ConditionalAction::new(c.clone(), act.clone()).map_err(|e| e.to_string())?;
            for s in u.states() {
                e1 += 1;
                ensure(enabled_cond(&rule, s) == (ev(s, c) && enabled_cap(act, s)), || format!("conditional enabledness fails for {rule} at {s}"))?;
            }
        }
    }
    let mut r5 = 0usize;
    for act in &actions {
        for s in u.states() {
            if let Action::Cap(c) = act {
                r5 += 1;
                let defined = goal_core::capabilities::apply_t(c, s.beliefs()).is_some();
                ensure(enabled_cap(act, s) == defined, || format!("capability enabledness fails for {act} at {s}"))?;
            }
        }
    }
    let mut kinds: Vec<&str> = instances.iter().map(|(n, _)| n.as_str()).collect();
    kinds.sort();
    kinds.dedup();
    Ok(format!(
        "{} instances ({}) x {} states + {e1} conditional-action and {r5} capability enabledness cases, 0 violations",
        instances.len(),
        kinds.join(", "),
        u.len()
    ))
}

fn c5_substitution() -> Result<String, String> {
    let u = universe();
    let sigmas = ms_grammar();
    let mut checked = 0usize;
    for phi in l2() {
        let adopt = Action::Adopt(phi.clone());
        let drop = Action::Drop(phi.clone());
        let adopt_sub = |s: &MsFormula| {
            s.map_leaves(&mut |leaf| match leaf {
                MsFormula::G(chi) if tautology(&phi.clone().implies(chi.clone())) => MsFormula::b(chi.clone()).not(),
                other => other.clone(),
            })
        };
        let drop_sub = |s: &MsFormula| {
            s.map_leaves(&mut |leaf| match leaf {
                MsFormula::G(chi) if tautology(&chi.clone().implies(phi.clone())) => MsFormula::False,
                other => other.clone(),
            })
        };
        let results: Vec<Result<usize, String>> = u
            .states()
            .par_iter()
            .map(|s| {
                let mut n = 0;
                let after_drop = apply_m(&drop, s).ok_or("drop undefined")?;
                let after_adopt = apply_m(&adopt, s).filter(|_| enabled_cap(&adopt, s));
                for sigma in &sigmas {
                    if let Some(t) = &after_adopt {
                        n += 1;
                        if ev(s, &adopt_sub(sigma)) != ev(t, sigma) {
                            return Err(format!("adopt({phi}), {sigma} at {s}"));
                        }
                    }
                    n += 1;
                    if ev(s, &drop_sub(sigma)) != ev(&after_drop, sigma) {
                        return Err(format!("drop({phi}), {sigma} at {s}"));
                    }
                }
                Ok(n)
            })
            .collect();
        for r in results {
            checked += r?;
        }
    }
    Ok(format!("{} grammar formulas x 16 actions x {} states: {checked} equivalences, 0 failures", sigmas.len(), u.len()))
}

fn c6_wlp() -> Result<String, String> {
    let u = universe();
    let vocab = pq();
    let axioms = AxiomTable::new();
    let ctx = WlpCtx::new(&vocab, &axioms);
    let grammar = ms_grammar();
    let args = [a("p"), a("q"), a("p").not(), a("q").not(), a("p").and(a("q")), a("p").or(a("q")), u.canon().formula(&models(&a("p").iff(a("q")), &vocab)), a("p").and(a("p"))];
    let mut stmts = Vec::new();
    for x in &args {
        stmts.push(Action::cap(CapabilitySpec::ins(x.clone())));
        stmts.push(Action::cap(CapabilitySpec::del(x.clone())));
        stmts.push(Action::Adopt(x.clone()));
        stmts.push(Action::Drop(x.clone()));
    }
    let canonical_dels = args.iter().filter(|x| u.canon().formula(&models(x, &vocab)) == **x).count();
    let scope = Scope::Universe(&u);
    let tally: Vec<Result<(usize, usize), String>> = stmts
        .par_iter()
        .map(|act| {
            let (mut total, mut holds) = (0, 0);
            for pre in &grammar {
                for post in &grammar {
                    let t = HoareTriple::basic(pre.clone(), act.clone(), post.clone());
                    let sem = check_hoare_basic(&t, &scope).map_err(|e| e.to_string())?;
                    let der = derive_hoare(&t, &ctx, &u).map_err(|e| e.to_string())?;
                    if sem.holds != der.holds {
                        return Err(format!("{t}: semantic {} vs wlp {}", sem.holds, der.holds));
                    }
                    total += 1;
                    holds += sem.holds as usize;
                }
            }
            Ok((total, holds))
        })
        .collect();
    let (mut total, mut holds) = (0, 0);
    for r in tally {
        let (t, h) = r?;
        total += t;
        holds += h;
    }
    Ok(format!(
        "{total} triples ({} statements incl. {canonical_dels} canonical del arguments, {} pre/post formulas): {holds} hold, {} fail, 0 disagreements",
        stmts.len(),
        grammar.len(),
        total - holds
    ))
}

/// A small random agent over one or two atoms with up to three rules.
fn micro_agent(rng: &mut ChaCha8Rng) -> Option<Agent> {
    let names: &[&str] = if rng.gen_bool(0.3) { &["p"] } else { &["p", "q"] };
    let atoms: Vec<Formula> = names.iter().map(|n| a(n)).collect();
    let lits: Vec<Formula> = atoms.iter().flat_map(|x| [x.clone(), x.clone().not()]).collect();
    let pick = |rng: &mut ChaCha8Rng| lits.choose(rng).unwrap().clone();
    let beliefs: Vec<Formula> = lits.iter().filter(|_| rng.gen_bool(0.25)).cloned().collect();
    let goals: Vec<Formula> = (0..rng.gen_range(0..=2))
        .map(|_| if rng.gen_bool(0.7) { pick(rng) } else { pick(rng).and(pick(rng)) })
        .collect();
    let caps: Vec<CapabilitySpec> = (0..rng.gen_range(0..=2))
        .map(|i| {
            let clauses = (0..rng.gen_range(1..=2))
                .map(|_| EffectClause {
                    guard: if rng.gen_bool(0.5) { Formula::True } else { pick(rng) },
                    add: (0..rng.gen_range(0..=1)).map(|_| pick(rng)).collect(),
                    del: (0..rng.gen_range(0..=1)).map(|_| pick(rng)).collect(),
                })
                .collect();
            CapabilitySpec::new(format!("c{i}"), clauses)
        })
        .collect();
    let cond = |rng: &mut ChaCha8Rng| -> MsFormula {
        let leaf = |rng: &mut ChaCha8Rng| {
            let l = pick(rng);
            match rng.gen_range(0..4) {
                0 => MsFormula::b(l),
                1 => MsFormula::b(l).not(),
                2 => MsFormula::g(l),
                _ => MsFormula::g(l).not(),
            }
        };
        match rng.gen_range(0..4) {
            0 => MsFormula::True,
            1 => leaf(rng).and(leaf(rng)),
            _ => leaf(rng),
        }
    };
    let program: Vec<ConditionalAction> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let act = match rng.gen_range(0..6) {
                0 if !caps.is_empty() => Action::cap(caps.choose(rng).unwrap().clone()),
                0 | 1 => Action::cap(CapabilitySpec::ins(pick(rng))),
                2 => Action::cap(CapabilitySpec::del(pick(rng))),
                3 => Action::Adopt(pick(rng)),
                4 => Action::Drop(pick(rng)),
                _ => Action::Adopt(pick(rng)),
            };
            ConditionalAction::new(cond(rng), act).unwrap()
        })
        .collect();
    let caps = caps.into_iter().map(std::sync::Arc::new).collect();
    Agent::new(Vocab::new(names.iter().copied()), caps, program, beliefs, goals, vec![]).ok()
}

fn property_pool(agent: &Agent) -> Vec<MsFormula> {
    let mut out = vec![MsFormula::False, MsFormula::True];
    for x in agent.vocab.atoms() {
        let x = a(x.name());
        for l in [x.clone(), x.not()] {
            out.push(MsFormula::b(l.clone()));
            out.push(MsFormula::b(l.clone()).not());
            out.push(MsFormula::g(l.clone()));
            out.push(MsFormula::g(l.clone()).and(MsFormula::b(l).not()));
        }
    }
    out
}

/// Node-level view of a graph: successors grouped by target, with the set of
/// rules (bitmask) leading there.
struct Skeleton {
    succ: Vec<Vec<(usize, u32)>>,
    all: u32,
}

impl Skeleton {
    fn of(g: &StateGraph) -> Self {
        let mut succ = Vec::with_capacity(g.len());
        for i in 0..g.len() {
            let mut v: Vec<(usize, u32)> = Vec::new();
            for e in g.edges(i) {
                match v.iter_mut().find(|(t, _)| *t == e.to) {
                    Some((_, m)) => *m |= 1 << e.rule,
                    None => v.push((e.to, 1 << e.rule)),
                }
            }
            succ.push(v);
        }
        Skeleton { succ, all: (1u32 << g.num_rules()) - 1 }
    }

    /// Calls `f(nodes, loop_start)` for every fair lasso from node 0 with at
    /// most `max_len` distinct positions. A lasso is fair when the rules
    /// available along its cycle cover the program: repeating the cycle lets
    /// each pass take a different rule on each step.
    fn lassos(&self, max_len: usize, f: &mut impl FnMut(&[usize], usize)) {
        let mut nodes = vec![0usize];
        let mut masks: Vec<u32> = Vec::new();
        self.extend(max_len, &mut nodes, &mut masks, f);
    }

    fn extend(&self, max_len: usize, nodes: &mut Vec<usize>, masks: &mut Vec<u32>, f: &mut impl FnMut(&[usize], usize)) {
        let last = *nodes.last().unwrap();
        for &(to, m) in &self.succ[last] {
            for j in 0..nodes.len() {
                if nodes[j] == to {
                    let cover = masks[j..].iter().fold(m, |acc, x| acc | x);
                    if cover == self.all {
                        f(nodes, j);
                    }
                }
            }
            if nodes.len() < max_len {
                nodes.push(to);
                masks.push(m);
                self.extend(max_len, nodes, masks, f);
                nodes.pop();
                masks.pop();
            }
        }
    }
}

/// Positions reachable from `i` on the lasso, `i` first.
fn ahead(len: usize, loop_start: usize, i: usize) -> impl Iterator<Item = usize> {
    (i..len).chain(loop_start..i.max(loop_start))
}

/// Some position of the lasso violates `φ → (φ until ψ)`.
fn lasso_breaks_unless(nodes: &[usize], j: usize, phi: &[bool], psi: &[bool]) -> bool {
    (0..nodes.len()).any(|i| {
        phi[nodes[i]] && !psi[nodes[i]] && {
            let mut verdict = false;
            for k in ahead(nodes.len(), j, i) {
                let n = nodes[k];
                if psi[n] {
                    break;
                }
                if !phi[n] {
                    verdict = true;
                    break;
                }
            }
            verdict
        }
    })
}

/// Some position satisfies φ with ψ never holding from there on.
fn lasso_breaks_eventually(nodes: &[usize], j: usize, phi: &[bool], psi: &[bool]) -> bool {
    (0..nodes.len()).any(|i| phi[nodes[i]] && ahead(nodes.len(), j, i).all(|k| !psi[nodes[k]]))
}

fn truth(m: &AgentModel, f: &MsFormula) -> Vec<bool> {
    m.graph.nodes().iter().map(|s| eval_msf(s, f, Some(&m.agent)).unwrap()).collect()
}

struct Micro {
    model: AgentModel,
    pairs: Vec<(MsFormula, MsFormula)>,
    depth: usize,
}

fn micro_corpus() -> Vec<Micro> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while out.len() < 520 {
        let Some(agent) = micro_agent(&mut rng) else { continue };
        if !seen.insert(agent.to_string()) {
            continue;
        }
        let Ok(model) = AgentModel::new(agent, 200) else { continue };
        let pool = property_pool(&model.agent);
        let pairs = (0..6).map(|_| (pool.choose(&mut rng).unwrap().clone(), pool.choose(&mut rng).unwrap().clone())).collect();
        let n = model.graph.len();
        let depth = (2 * n + model.agent.program.len() + 1).min(12);
        out.push(Micro { model, pairs, depth });
    }
    out
}

fn c7_unless() -> Result<String, String> {
    let corpus = micro_corpus();
    let results: Vec<Result<(usize, usize, usize), String>> = corpus
        .par_iter()
        .map(|mc| {
            let m = &mc.model;
            let sk = Skeleton::of(&m.graph);
            let (mut agree, mut fails, mut lassos) = (0, 0, 0);
            for (phi, psi) in &mc.pairs {
                let hoare = check_unless(phi, psi, m).map_err(|e| e.to_string())?.holds();
                let graph = m.eval_graph(&TemporalFormula::unless(phi.clone(), psi.clone())).map_err(|e| e.to_string())?.is_none();
                let (tp, tq) = (truth(m, phi), truth(m, psi));
                let mut brute = true;
                sk.lassos(mc.depth, &mut |nodes, j| {
                    lassos += 1;
                    if lasso_breaks_unless(nodes, j, &tp, &tq) {
                        brute = false;
                    }
                });
                if hoare != brute || hoare != graph {
                    return Err(format!(
                        "{phi} unless {psi}: triples {hoare}, lassos {brute}, graph {graph} for agent\n{}",
                        m.agent
                    ));
                }
                agree += 1;
                fails += !hoare as usize;
            }
            Ok((agree, fails, lassos))
        })
        .collect();
    let (mut agree, mut fails, mut lassos) = (0, 0, 0);
    for r in results {
        let (x, y, z) = r?;
        agree += x;
        fails += y;
        lassos += z;
    }
    let max_nodes = corpus.iter().map(|m| m.model.graph.len()).max().unwrap_or(0);
    Ok(format!(
        "{} agents (<= 2 atoms, <= 3 rules, <= {max_nodes} states), {agree} unless properties ({fails} failing): \
         per-rule triples, fair-lasso enumeration ({lassos} lassos) and graph evaluation agree",
        corpus.len()
    ))
}

fn c8_ensures() -> Result<String, String> {
    let corpus = micro_corpus();
    let results: Vec<Result<(usize, usize), String>> = corpus
        .par_iter()
        .map(|mc| {
            let m = &mc.model;
            let sk = Skeleton::of(&m.graph);
            let (mut ok, mut live) = (0, 0);
            for (phi, psi) in &mc.pairs {
                let r = check_ensures(phi, psi, m).map_err(|e| e.to_string())?;
                if !r.holds() {
                    continue;
                }
                ok += 1;
                live += !r.vacuous as usize;
                let (tp, tq) = (truth(m, phi), truth(m, psi));
                let mut bad = false;
                sk.lassos(mc.depth, &mut |nodes, j| {
                    bad |= lasso_breaks_unless(nodes, j, &tp, &tq) || lasso_breaks_eventually(nodes, j, &tp, &tq);
                });
                let graph = m.eval_graph(&TemporalFormula::ensures(phi.clone(), psi.clone())).map_err(|e| e.to_string())?;
                if bad || graph.is_some() {
                    return Err(format!("false positive: {phi} ensures {psi} for agent\n{}", m.agent));
                }
            }
            Ok((ok, live))
        })
        .collect();
    let (mut ok, mut live) = (0, 0);
    for r in results {
        let (x, y) = r?;
        ok += x;
        live += y;
    }
    ensure(live > 0, || "no non-vacuous ensures success to confirm".into())?;
    Ok(format!(
        "{ok} ensures successes ({live} non-vacuous) over {} agents confirmed by fair lassos and graph evaluation; 0 false positives",
        corpus.len()
    ))
}

fn random_action(rng: &mut ChaCha8Rng, fs: &[Formula], allow_drop: bool) -> Action {
    let f = fs.choose(rng).unwrap().clone();
    match rng.gen_range(0..if allow_drop { 5 } else { 4 }) {
        0 => Action::cap(CapabilitySpec::ins(f)),
        1 => Action::cap(CapabilitySpec::del(f)),
        2 => Action::Adopt(f),
        3 => {
            let clauses = (0..rng.gen_range(1..=3))
                .map(|_| EffectClause {
                    guard: if rng.gen_bool(0.4) { Formula::True } else { fs.choose(rng).unwrap().clone() },
                    add: (0..rng.gen_range(0..=2)).map(|_| fs.choose(rng).unwrap().clone()).collect(),
                    del: (0..rng.gen_range(0..=2)).map(|_| fs.choose(rng).unwrap().clone()).collect(),
                })
                .collect();
            Action::cap(CapabilitySpec::new("c", clauses))
        }
        _ => Action::Drop(f),
    }
}

fn c9_blind() -> Result<String, String> {
    let u = universe();
    let fs = l2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut cases, mut with_goal, mut exclusions) = (0usize, 0usize, 0usize);
    while cases < 20_000 {
        // Reach states outside the universe too, including ones shaped by drop.
        let mut s = u.states().choose(&mut rng).unwrap().clone();
        for _ in 0..rng.gen_range(0..=3) {
            let act = random_action(&mut rng, &fs, true);
            if let Some(t) = apply_m(&act, &s).filter(|_| enabled_cap(&act, &s)) {
                ensure(t.check().is_ok(), || format!("{act} from {s} yields ill-formed {t}"))?;
                s = t;
            }
        }
        exclusions += s.goals().generators().any(|g| !g.except.is_empty()) as usize;
        let act = random_action(&mut rng, &fs, false);
        let phi = fs.choose(&mut rng).unwrap();
        let after = if enabled_cap(&act, &s) { apply_m(&act, &s) } else { None };
        if let Some(t) = &after {
            ensure(t.check().is_ok(), || format!("{act} from {s} yields ill-formed {t}"))?;
        }
        let t = after.unwrap_or_else(|| s.clone());
        let (g, b) = (MsFormula::g(phi.clone()), MsFormula::b(phi.clone()));
        if ev(&s, &g) {
            with_goal += 1;
            ensure(ev(&t, &b.or(g)), || format!("{{G({phi})}} {act} {{B({phi}) | G({phi})}} fails at {s}"))?;
        }
        cases += 1;
    }
    Ok(format!("{cases} cases ({with_goal} with the goal held, {exclusions} from states with drop exclusions), 0 violations"))
}

fn c10_fairness() -> Result<String, String> {
    let mut agents = vec![shopping::fixture(false)];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    while agents.len() < 40 {
        if let Some(a) = micro_agent(&mut rng) {
            agents.push(a);
        }
    }
    let (mut prefixes, mut random_runs, mut worst) = (0usize, 0usize, 0usize);
    for agent in &agents {
        let n = agent.program.len();
        let full = run(agent, Scheduler::RoundRobin, 200);
        for len in 0..=200 {
            let mut p = full.clone();
            p.states.truncate(len + 1);
            p.rules.truncate(len);
            p.executed.truncate(len);
            ensure(fairness_check(&p), || format!("round-robin prefix of length {len} fails"))?;
            prefixes += 1;
        }
        for seed in 0..50 {
            let t = run(agent, Scheduler::Random { seed }, 300);
            let s = max_omission_streak(&t);
            ensure(s <= n, || format!("random seed {seed}: streak {s} > {n}"))?;
            ensure(fairness_check(&t), || format!("random seed {seed} fails fairness_check"))?;
            worst = worst.max(s);
            random_runs += 1;
        }
    }
    let unfair_caught = (0..50).any(|seed| !fairness_check(&run(&agents[0], Scheduler::Unfair { seed }, 300)));
    ensure(unfair_caught, || "unfair scheduler never flagged".into())?;
    Ok(format!(
        "{prefixes} round-robin prefixes pass; {random_runs} random runs keep every omission streak <= |program| (worst {worst}); unfair runs are flagged"
    ))
}
