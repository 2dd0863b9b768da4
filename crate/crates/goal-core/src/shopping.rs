//! The shopping-assistant fixture and the formulas of its correctness proof.

use std::sync::Arc;

use crate::agent_program::{parse_agent, Agent, Property};
use crate::capabilities::{Action, CapabilitySpec};
use crate::mental_state::MsFormula;
use crate::prop_logic::Formula;

pub const SOURCE: &str = include_str!("../fixtures/shopping.goal");
pub const LITERAL_SOURCE: &str = include_str!("../fixtures/shopping-literal.goal");
pub const BROKEN_SOURCE: &str = include_str!("../fixtures/broken.goal");

pub const PAGES: [&str; 5] = ["hpage_user", "Am_com", "page_T", "page_I", "ContentCart"];
pub const BOOKS: [&str; 2] = ["T", "I"];

/// `literal` selects the variant whose goto rule ignores the cart.
pub fn fixture(literal: bool) -> Agent {
    parse_agent(if literal { LITERAL_SOURCE } else { SOURCE }).expect("embedded fixture parses")
}

pub fn broken() -> Agent {
    parse_agent(BROKEN_SOURCE).expect("embedded fixture parses")
}

/// Looks up an embedded fixture by name.
pub fn by_name(name: &str) -> Option<(&'static str, &'static str)> {
    match name {
        "shopping" => Some(("shopping.goal", SOURCE)),
        "shopping-literal" => Some(("shopping-literal.goal", LITERAL_SOURCE)),
        "broken" => Some(("broken.goal", BROKEN_SOURCE)),
        _ => None,
    }
}

fn a(name: &str) -> Formula {
    Formula::atom(name)
}

fn b(name: &str) -> MsFormula {
    MsFormula::b(a(name))
}

fn g(name: &str) -> MsFormula {
    MsFormula::g(a(name))
}

fn other(book: &str) -> &'static str {
    if book == "T" {
        "I"
    } else {
        "T"
    }
}

fn cart(book: &str) -> String {
    format!("in_cart_{book}")
}

fn bought(book: &str) -> String {
    format!("bought_{book}")
}

fn page(book: &str) -> String {
    format!("page_{book}")
}

/// At most one page atom.
pub fn excl() -> Formula {
    let mut parts = Vec::new();
    for (i, x) in PAGES.iter().enumerate() {
        for y in &PAGES[i + 1..] {
            parts.push(a(x).and(a(y)).not());
        }
    }
    Formula::conj(parts)
}

/// Exactly one page atom.
pub fn one_page() -> Formula {
    Formula::disj(PAGES.iter().map(|p| {
        Formula::conj(PAGES.iter().map(|q| if p == q { a(q) } else { a(q).not() }))
    }))
}

pub fn inv() -> MsFormula {
    MsFormula::b(one_page())
}

pub fn status(book: &str) -> MsFormula {
    b(&cart(book)).and(g(&bought(book))).or(b(&bought(book)))
}

pub fn bcond() -> MsFormula {
    MsFormula::conj([b("hpage_user"), b("in_cart_T").not(), b("in_cart_I").not(), MsFormula::b(excl())])
}

pub fn both_goal() -> MsFormula {
    MsFormula::g(a("bought_T").and(a("bought_I")))
}

pub fn both_believed() -> MsFormula {
    MsFormula::b(a("bought_T").and(a("bought_I")))
}

/// The correctness property `bcond ∧ G(bT ∧ bI) ↦ B(bT ∧ bI)`.
pub fn correctness() -> (MsFormula, MsFormula) {
    (bcond().and(both_goal()), both_believed())
}

fn at_with_goals(pg: &str) -> MsFormula {
    MsFormula::conj([b(pg), b("in_cart_T").not(), g("bought_T"), b("in_cart_I").not(), g("bought_I")])
}

fn at_book(book: &str) -> MsFormula {
    let o = other(book);
    MsFormula::conj([b(&page(book)), g(&bought(book)), b(&cart(o)).not(), g(&bought(o))])
}

fn carted(book: &str) -> MsFormula {
    let o = other(book);
    MsFormula::conj([b(&cart(book)), g(&bought(book)), b(&cart(o)).not(), g(&bought(o))])
}

fn done() -> MsFormula {
    b("bought_T").and(b("bought_I"))
}

/// One `ensures` obligation of the proof outline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub name: String,
    pub pre: MsFormula,
    pub post: MsFormula,
}

fn step(name: impl Into<String>, pre: MsFormula, post: MsFormula) -> Step {
    Step { name: name.into(), pre, post }
}

fn chain(book: &str) -> Vec<Step> {
    let o = other(book);
    let x = if book == "T" { "a" } else { "b" };
    let c3 = carted(book).and(b("ContentCart"));
    let s5 = MsFormula::conj([b("Am_com"), b(&cart(o)).not(), g(&bought(o)), status(book)]);
    let s6 = MsFormula::conj([b(&page(o)), g(&bought(o)), status(book)]);
    let s7 = MsFormula::conj([b(&cart(o)), g(&bought(o)), b("ContentCart"), status(book)]);
    vec![
        step(format!("(3{x})"), at_book(book), c3.clone()),
        step(format!("(3{x}->4{x})"), c3, carted(book)),
        step(format!("(4{x})"), carted(book), s5.clone()),
        step(format!("(5{x})"), s5, s6.clone()),
        step(format!("(6{x})"), s6, s7.clone()),
        step(format!("(7{x})"), s7, done()),
    ]
}

/// Entry, (1), (2), chain (a), chain (b), exit.
pub fn steps() -> Vec<Step> {
    let mut out = vec![
        step("(entry)", correctness().0, at_with_goals("hpage_user")),
        step("(1)", at_with_goals("hpage_user"), at_with_goals("Am_com")),
        step("(2)", at_with_goals("Am_com"), at_book("T").or(at_book("I"))),
    ];
    out.extend(chain("T"));
    out.extend(chain("I"));
    out.push(step("(exit)", done(), both_believed()));
    out
}

/// The properties the fixture file declares, in file order, given its `pay_cart`.
pub fn properties(pay: &Arc<CapabilitySpec>) -> Vec<Property> {
    let mut out = vec![
        Property::Invariant(inv()),
        Property::Unless(status("T"), MsFormula::False),
        Property::Unless(status("I"), MsFormula::False),
    ];
    for book in BOOKS {
        let pre = MsFormula::conj([b(&cart(book)), g(&bought(book)), b("ContentCart")]);
        out.push(Property::Hoare(pre, Action::Cap(pay.clone()), b(&bought(book))));
    }
    out.extend(steps().into_iter().map(|s| Property::Ensures(s.pre, s.post)));
    let (l, r) = correctness();
    out.push(Property::LeadsTo(l, r));
    out
}
