use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pacrl_core::env::{Environment, Policy, SamplingSession};
use pacrl_core::gltl::GltlObjective;
use pacrl_core::ldba::{BozkurtObjective, BozkurtSpec};
use pacrl_core::objective::{compose_with_labeling, modulus_of_continuity, DEFAULT_ENUMERATION_CAP};
use pacrl_core::pac::{evaluate_policy, exact_plan, pac_learn, Budgets, LiftedMdp, Shortcut};
use pacrl_core::rational::{int, parse_rational, precision_for, to_decimal};
use pacrl_core::{check, BoundedProbe, Error, LassoWord, Objective, Rational, SharedObjective, SimpleRewardMachine};

#[derive(Parser)]
#[command(name = "pacrl", version, about = "Computable RL objectives, planning and PAC learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate an objective on a lasso word.
    Eval(EvalArgs),
    /// Modulus of continuity at a tolerance.
    Modulus(ModulusArgs),
    /// Solve an experiment manifest exactly with the known model.
    Plan(RunArgs),
    /// Learn a policy for an experiment manifest from samples.
    Learn(RunArgs),
    /// Run the randomized property sweeps.
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Srm,
    Ldba,
    Gltl,
}

#[derive(Args)]
struct EvalArgs {
    /// Objective file.
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Lasso word, e.g. `{};{a}^{b}`.
    #[arg(long)]
    word: String,
    #[arg(long)]
    n: u32,
    /// Cap on enumerated ε-choices or event streams.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModulusArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Tolerance `p/q`.
    #[arg(long)]
    eps: String,
    /// Cap on enumerated words (and on inner enumerations).
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment manifest (TOML).
    manifest: PathBuf,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the enumeration budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instances per sweep.
    #[arg(long, default_value_t = 50)]
    cases: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Manifest paths are relative to the manifest's directory.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    objective: PathBuf,
    kind: Kind,
    environment: PathBuf,
    eps: String,
    delta: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    budgets: ManifestBudgets,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ManifestBudgets {
    enumeration: Option<u64>,
    tree: Option<u64>,
    samples: Option<u64>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Budget { .. } => 3,
            Error::Invariant(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rational(what: &str, text: &str) -> Outcome<Rational> {
    parse_rational(text).map_err(|e| usage(format!("--{what}: {e}")))
}

fn exact(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "decimal": to_decimal(r, 20) })
}

enum Loaded {
    Srm(SimpleRewardMachine),
    Ldba(BozkurtObjective),
    Gltl(GltlObjective),
}

impl Loaded {
    fn load(path: &Path, kind: Kind, budget: u64) -> Outcome<Self> {
        let text = read(path)?;
        let at = |e: Error| match e {
            Error::Parse { line, column, message } => usage(format!("{}:{line}:{column}: {message}", path.display())),
            other => Failure::from(other),
        };
        Ok(match kind {
            Kind::Srm => Loaded::Srm(SimpleRewardMachine::parse(&text).map_err(at)?),
            Kind::Ldba => Loaded::Ldba(BozkurtObjective::new(BozkurtSpec::parse(&text).map_err(at)?).with_budget(budget)),
            Kind::Gltl => Loaded::Gltl(GltlObjective::parse(&text).map_err(at)?.with_budget(budget)),
        })
    }

    /// Adds `props` the labeling mentions but the formula does not (GLTL only).
    fn widen(self, props: &[String]) -> Outcome<Self> {
        match self {
            Loaded::Gltl(g) => {
                let mut all: Vec<String> = g.alphabet().props().unwrap_or(&[]).to_vec();
                for p in props {
                    if !all.contains(p) {
                        all.push(p.clone());
                    }
                }
                let budget = g.budget();
                Ok(Loaded::Gltl(GltlObjective::with_props(g.formula().clone(), &all)?.with_budget(budget)))
            }
            other => Ok(other),
        }
    }

    fn shared(self) -> SharedObjective {
        match self {
            Loaded::Srm(m) => Arc::new(m),
            Loaded::Ldba(l) => Arc::new(l),
            Loaded::Gltl(g) => Arc::new(g),
        }
    }

    fn objective(&self) -> &dyn Objective {
        match self {
            Loaded::Srm(m) => m,
            Loaded::Ldba(l) => l,
            Loaded::Gltl(g) => g,
        }
    }

    fn horizon(&self, n: u32) -> usize {
        match self {
            Loaded::Srm(m) => m.horizon(n),
            Loaded::Ldba(l) => l.horizon(n),
            Loaded::Gltl(g) => g.horizon(n),
        }
    }
}

fn eval(args: &EvalArgs) -> Outcome<Value> {
    let loaded = Loaded::load(&args.file, args.kind, args.budget)?;
    let f = loaded.objective();
    let word = LassoWord::parse(&args.word, f.alphabet().clone()).map_err(|e| usage(format!("--word: {e}")))?;
    let probe = BoundedProbe::unbounded(&word);
    let q = f.approx(&probe, args.n)?;
    Ok(json!({
        "command": "eval",
        "config": { "file": args.file, "kind": args.kind, "word": args.word, "n": args.n, "budget": args.budget },
        "n": args.n,
        "H": loaded.horizon(args.n),
        "max_index_read": probe.max_index_read(),
        "value": exact(&q),
    }))
}

fn modulus(args: &ModulusArgs) -> Outcome<Value> {
    let eps = rational("eps", &args.eps)?;
    let n = precision_for(&eps)?;
    let loaded = Loaded::load(&args.file, args.kind, args.budget)?;
    let h = modulus_of_continuity(loaded.objective(), &eps, args.budget)?;
    Ok(json!({
        "command": "modulus",
        "config": { "file": args.file, "kind": args.kind, "eps": eps.to_string(), "budget": args.budget },
        "n": n,
        "H": h,
    }))
}

struct Run {
    config: Value,
    env: Environment,
    objective: SharedObjective,
    eps: Rational,
    delta: Rational,
    seed: u64,
    budgets: Budgets,
}

fn resolve(args: &RunArgs) -> Outcome<Run> {
    let text = read(&args.manifest)?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", args.manifest.display())))?;
    let dir = args.manifest.parent().unwrap_or(Path::new("."));
    let eps = rational("eps", args.eps.as_deref().unwrap_or(&manifest.eps))?;
    let delta = rational("delta", args.delta.as_deref().or(manifest.delta.as_deref()).unwrap_or("1/10"))?;
    let (zero, one) = (int(0), int(1));
    if !(eps > zero && eps < one && delta > zero && delta < one) {
        return Err(usage("eps and delta must lie in (0, 1)"));
    }
    let seed = args.seed.or(manifest.seed).unwrap_or(0);
    let defaults = Budgets::default();
    let budgets = Budgets {
        enumeration: args.budget.or(manifest.budgets.enumeration).unwrap_or(defaults.enumeration),
        tree: manifest.budgets.tree.unwrap_or(defaults.tree),
        samples: manifest.budgets.samples.unwrap_or(defaults.samples),
    };
    let env_path = dir.join(&manifest.environment);
    let obj_path = dir.join(&manifest.objective);
    let env = Environment::parse(&read(&env_path)?).map_err(|e| match e {
        Error::Parse { line, column, message } => usage(format!("{}:{line}:{column}: {message}", env_path.display())),
        other => other.into(),
    })?;
    let loaded = Loaded::load(&obj_path, manifest.kind, budgets.enumeration)?.widen(&env.labeling.mentioned_props())?;
    let objective: SharedObjective = Arc::new(compose_with_labeling(loaded.shared(), &env.labeling)?);
    let config = json!({
        "manifest": args.manifest,
        "objective": obj_path,
        "kind": manifest.kind,
        "environment": env_path,
        "eps": eps.to_string(),
        "delta": delta.to_string(),
        "seed": seed,
        "budgets": { "enumeration": budgets.enumeration, "tree": budgets.tree, "samples": budgets.samples },
    });
    Ok(Run {
        config,
        env,
        objective,
        eps,
        delta,
        seed,
        budgets,
    })
}

fn policy_json(policy: &Policy, run: &Run) -> Value {
    Value::Array(policy.render(&run.env.mdp).lines().map(|l| Value::String(l.to_string())).collect())
}

/// The planner works on the same truncation the learner uses (tolerance `eps/4`).
fn lifted(run: &Run) -> Outcome<LiftedMdp> {
    let eps_prime = &run.eps / int(4);
    Ok(LiftedMdp::new(run.env.mdp.clone(), run.objective.clone(), &eps_prime, run.budgets.enumeration)?)
}

fn plan(args: &RunArgs) -> Outcome<Value> {
    let run = resolve(args)?;
    let lifted = lifted(&run)?;
    let plan = exact_plan(&lifted, run.budgets.tree)?;
    Ok(json!({
        "command": "plan",
        "config": run.config,
        "H": lifted.horizon(),
        "n": lifted.truncation().precision(),
        "eps_prime": (&run.eps / int(4)).to_string(),
        "nodes": plan.nodes,
        "planner_value_exact": exact(&plan.value),
        "policy": policy_json(&plan.policy, &run),
    }))
}

fn learn(args: &RunArgs) -> Outcome<Value> {
    let run = resolve(args)?;
    let mut session = SamplingSession::new(run.env.mdp.clone(), run.seed).without_transcript();
    let out = pac_learn(&mut session, run.objective.clone(), &run.eps, &run.delta, &run.budgets)?;
    let shortcut = out.shortcut.map(|s| match s {
        Shortcut::TrivialTolerance => "tolerance covers every policy; no samples drawn",
        Shortcut::ConstantReward => "truncated reward is constant; no samples drawn",
        Shortcut::SingleStep => "horizon 1; no samples needed",
    });
    let mut report = json!({
        "command": "learn",
        "config": run.config,
        "H": out.lifted.as_ref().map(|l| l.horizon()),
        "n": out.lifted.as_ref().map(|l| l.truncation().precision()),
        "samples_per_row": out.samples_per_row,
        "rows_estimated": out.rows_estimated,
        "samples_used": out.samples_used,
        "shortcut": shortcut,
        "policy": policy_json(&out.policy, &run),
    });
    if let Some(l) = &out.lifted {
        let best = exact_plan(l, run.budgets.tree)?.value;
        let learned = evaluate_policy(l, &out.policy, run.budgets.tree)?;
        report["planner_value_exact"] = exact(&best);
        report["learned_value_exact"] = exact(&learned);
        report["gap"] = exact(&(&best - &learned));
    }
    Ok(report)
}

fn check(args: &CheckArgs) -> Outcome<(Value, bool)> {
    let outcomes = check::run_all(args.seed, args.cases);
    let ok = outcomes.iter().all(|o| o.passed());
    let rows: Vec<Value> = outcomes
        .iter()
        .map(|o| json!({ "name": o.name, "cases": o.cases, "passed": o.passed(), "failures": o.failures }))
        .collect();
    Ok((json!({ "command": "check", "config": { "seed": args.seed, "cases": args.cases }, "sweeps": rows }), ok))
}

fn emit(report: &Value, out: Option<&Path>) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Failure {
        code: 4,
        message: e.to_string(),
    })?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            // A closed pipe downstream is not an error of the run.
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => eval(a).and_then(|r| emit(&r, a.out.as_deref())),
        Command::Modulus(a) => modulus(a).and_then(|r| emit(&r, a.out.as_deref())),
        Command::Plan(a) => plan(a).and_then(|r| emit(&r, a.out.as_deref())),
        Command::Learn(a) => learn(a).and_then(|r| emit(&r, a.out.as_deref())),
        Command::Check(a) => check(a).and_then(|(r, ok)| {
            emit(&r, a.out.as_deref())?;
            if ok {
                Ok(())
            } else {
                Err(Failure {
                    code: 4,
                    message: "property sweep failed".into(),
                })
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
