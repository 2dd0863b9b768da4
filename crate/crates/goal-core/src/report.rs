//! Rendering of verification results as text or JSON lines.

use std::fmt::Write as _;

use serde::Serialize;

use crate::verifier::Obligation;

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub obligation: String,
    pub rule: String,
    pub scope: String,
    pub verdict: &'static str,
    pub witness_state_digest: Option<String>,
    pub witness: Option<String>,
}

impl From<&Obligation> for Record {
    fn from(o: &Obligation) -> Self {
        let w = o.verdict.witness.as_ref();
        Record {
            obligation: o.name.clone(),
            rule: o.rule.clone(),
            scope: o.verdict.scope.clone(),
            verdict: if o.verdict.holds { "pass" } else { "fail" },
            witness_state_digest: w.map(|w| w.state().digest()),
            witness: w.map(|w| w.to_string()),
        }
    }
}

pub fn records(obs: &[Obligation]) -> String {
    let mut out = String::new();
    for o in obs {
        out.push_str(&serde_json::to_string(&Record::from(o)).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn text(header: &str, obs: &[Obligation]) -> String {
    let mut out = format!("{header}\n");
    for o in obs {
        let tag = if o.verdict.holds { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{tag}  {}", o.name);
        let _ = writeln!(out, "      by {} over {}", o.rule, o.verdict.scope);
        if let Some(w) = &o.verdict.witness {
            let _ = writeln!(out, "      witness [{}]: {w}", w.state().digest());
        }
    }
    let failed = obs.iter().filter(|o| !o.verdict.holds).count();
    let _ = writeln!(out, "{} obligations, {} passed, {failed} failed", obs.len(), obs.len() - failed);
    out
}
