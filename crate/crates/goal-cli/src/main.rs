use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use goal_core::agent_program::{parse_agent, parse_properties_for, Agent, Property};
use goal_core::capabilities::Action;
use goal_core::executor::{default_budget, fairness_check, max_omission_streak, reachable, run, Scheduler};
use goal_core::oracle::OracleError;
use goal_core::report;
use goal_core::shopping;
use goal_core::universe::Universe;
use goal_core::prop_logic::Vocab;
use goal_core::verifier::{
    check_hoare_basic, derive_hoare, verify_agent, verify_property, AgentModel, AxiomTable, HoareTriple, Obligation,
    Statement, VerifyError, WlpCtx,
};

#[derive(Parser)]
#[command(name = "goal", version, about = "Run and verify propositional GOAL agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for state exploration and obligation checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Maximum number of reachable states to explore [default: $GOAL_BUDGET or 10000].
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sched {
    Rr,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Semantic,
    Wlp,
}

#[derive(Args)]
struct Source {
    /// Agent file.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    path: Option<PathBuf>,
    /// Embedded fixture: shopping, shopping-literal or broken.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the agent under a scheduler and print the trace.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Sched::Rr)]
        sched: Sched,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Uniform draws with no fairness enforcement; the result is not a trace of the agent.
        #[arg(long)]
        unfair: bool,
    },
    /// Check the properties declared in the file, or the given ones instead.
    Verify {
        #[command(flatten)]
        source: Source,
        /// A property such as `unless B(p), B(q)`; repeatable.
        #[arg(long = "property")]
        properties: Vec<String>,
    },
    /// Write the reachable state graph in DOT format.
    Graph {
        #[command(flatten)]
        source: Source,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one Hoare triple `pre, action, post`.
    CheckTriple {
        #[command(flatten)]
        source: Source,
        /// `pre, action, post`, e.g. `G(p), adopt(q), G(p)`.
        #[arg(long)]
        triple: String,
        #[arg(long, value_enum, default_value_t = Mode::Semantic)]
        mode: Mode,
        /// Generator bound for the wlp validity check.
        #[arg(long, default_value_t = 2)]
        generators: usize,
    },
}

enum Failure {
    Usage(String),
    Bounds(String),
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Budget(_) | VerifyError::Oracle(OracleError::BoundsExceeded { .. }) => Failure::Bounds(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(src: &Source) -> Result<(String, Agent), Failure> {
    let (name, text) = match (&src.path, &src.fixture) {
        (_, Some(f)) => {
            let (name, text) = shopping::by_name(f).ok_or_else(|| {
                Failure::Usage(format!("unknown fixture `{f}` (expected shopping, shopping-literal or broken)"))
            })?;
            (name.to_string(), text.to_string())
        }
        (Some(p), None) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            (p.display().to_string(), text)
        }
        (None, None) => return Err(Failure::Usage("no agent given".into())),
    };
    let agent = parse_agent(&text).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    Ok((name, agent))
}

fn model(agent: Agent, budget: usize) -> Result<AgentModel, Failure> {
    AgentModel::new(agent, budget).map_err(|e| Failure::Bounds(e.to_string()))
}

fn emit(format: Format, header: &str, obs: &[Obligation]) -> Result<bool, Failure> {
    match format {
        Format::Text => print!("{}", report::text(header, obs)),
        Format::Records => print!("{}", report::records(obs)),
    }
    Ok(obs.iter().all(|o| o.verdict.holds))
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let budget = cli.budget.unwrap_or_else(default_budget);
    match cli.command {
        Command::Run { source, sched, seed, steps, unfair } => {
            let (_, agent) = load(&source)?;
            let kind = match (unfair, sched) {
                (true, _) => Scheduler::Unfair { seed },
                (false, Sched::Rr) => Scheduler::RoundRobin,
                (false, Sched::Random) => Scheduler::Random { seed },
            };
            let trace = run(&agent, kind, steps);
            print!("{}", trace.dump(&agent));
            if unfair {
                eprintln!(
                    "note: unfair schedule, longest omission streak {}, fairness check {}",
                    max_omission_streak(&trace),
                    if fairness_check(&trace) { "passed" } else { "failed" }
                );
            }
            Ok(true)
        }
        Command::Verify { source, properties } => {
            let (name, agent) = load(&source)?;
            let extra = if properties.is_empty() {
                None
            } else {
                let text: String = properties.iter().map(|p| format!("{p};\n")).collect();
                Some(parse_properties_for(&agent, &text).map_err(|e| Failure::Usage(format!("--property: {e}")))?)
            };
            let m = model(agent, budget)?;
            let obs = match extra {
                None => verify_agent(&m)?,
                Some(ps) => {
                    let mut out = Vec::new();
                    for p in &ps {
                        out.extend(verify_property(p, &m)?);
                    }
                    out
                }
            };
            let header = format!("agent {name}: {} rules, {} reachable states", m.agent.program.len(), m.graph.len());
            emit(cli.format, &header, &obs)
        }
        Command::Graph { source, out } => {
            let (_, agent) = load(&source)?;
            let g = reachable(&agent, budget).map_err(|e| Failure::Bounds(e.to_string()))?;
            let dot = g.to_dot(&agent);
            match out {
                Some(p) => fs::write(&p, dot).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                None => print!("{dot}"),
            }
            eprintln!("{} states, {} rules", g.len(), g.num_rules());
            Ok(true)
        }
        Command::CheckTriple { source, triple, mode, generators } => {
            let (name, agent) = load(&source)?;
            let parsed = parse_properties_for(&agent, &format!("hoare {triple};"))
                .map_err(|e| Failure::Usage(format!("triple: {e}")))?;
            let Some(Property::Hoare(pre, action, post)) = parsed.into_iter().next() else {
                return Err(Failure::Usage("triple: expected `pre, action, post`".into()));
            };
            let t = HoareTriple::basic(pre, action, post);
            let verdict = match mode {
                Mode::Semantic => {
                    let m = model(agent, budget)?;
                    check_hoare_basic(&t, &m.scope())?
                }
                Mode::Wlp => {
                    let axioms = declared_axioms(&agent);
                    let vocab = triple_vocab(&t);
                    let u = Universe::new(vocab.clone(), generators).map_err(VerifyError::from)?;
                    derive_hoare(&t, &WlpCtx::new(&vocab, &axioms), &u)?
                }
            };
            let rule = match mode {
                Mode::Semantic => "Hoare triple, semantic check",
                Mode::Wlp => "Hoare triple, weakest liberal precondition",
            };
            let ob = Obligation { name: t.to_string(), rule: rule.into(), verdict };
            emit(cli.format, &format!("agent {name}"), &[ob])
        }
    }
}

/// `hoare` properties on declared capabilities double as axioms for wlp.
fn declared_axioms(agent: &Agent) -> AxiomTable {
    let mut out = AxiomTable::new();
    for p in &agent.properties {
        if let Property::Hoare(pre, Action::Cap(c), post) = p {
            if c.builtin().is_none() {
                out.insert((c.name.clone(), post.clone()), pre.clone());
            }
        }
    }
    out
}

fn triple_vocab(t: &HoareTriple) -> Vocab {
    let mut fs = t.pre.prop_formulas();
    fs.extend(t.post.prop_formulas());
    if let Statement::Action(a) = &t.statement {
        match a {
            Action::Adopt(f) | Action::Drop(f) => fs.push(f.clone()),
            Action::Cap(c) => fs.extend(c.builtin().map(|(_, f)| f.clone())),
        }
    }
    Vocab::of(fs.iter())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Bounds(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
