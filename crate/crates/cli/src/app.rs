//! Argument parsing and subcommand dispatch.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use spencer_core::catalog::{self, polynomial_solutions};
use spencer_core::checks::{run_all, run_criterion, CheckOptions};
use spencer_core::deltacohomology::{cartan_test, delta_complex, is_involutive, is_s_acyclic};
use spencer_core::exactalg::RankMode;
use spencer_core::sequence::{
    cc_at_order, cc_order_bound, euler_poincare, fundamental_diagram, janet_tabular, resolution, spencer_bundles,
    OperatorHandle, ResolutionOptions,
};
use spencer_core::system::LinearJetSystem;
use thiserror::Error;

use crate::dsl::{self, ParseError, SystemDocument};
use crate::render::{Report, SCHEMA};

/// Retries allowed when searching for δ-regular coordinates.
const REGULARITY_RETRIES: usize = 16;
/// Prolongations examined by integrability and acyclicity tests.
const CHECK_BOUND: usize = 4;

#[derive(Parser, Debug)]
#[command(name = "spencer", version, about = "Formal integrability, involution and differential sequences of linear PDE systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for random primes and coordinate changes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Compute every rank over ℚ instead of the modular fast path.
    #[arg(long, global = true)]
    exact: bool,
    /// Order or step bound; its meaning depends on the subcommand.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Emit a versioned JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// System document; `-` or absent reads standard input.
    #[arg(default_value = "-")]
    file: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jet, solution and symbol dimensions for `budget` prolongations (default 3).
    Dims(Input),
    /// Prints the prolonged system as a document.
    Prolong {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        by: usize,
    },
    /// Prints the equations induced on a lower jet order.
    Project {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        to: usize,
    },
    /// Dimension of the symbol at a level (default: the system order).
    Symbol {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: Option<usize>,
    },
    /// δ-complex table for `budget` levels above the order (default 2).
    Delta(Input),
    /// s-acyclicity of the top symbol, checking `budget` levels (default 4).
    Acyclic {
        #[command(flatten)]
        input: Input,
        /// Acyclicity degree; defaults to n (involutivity).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Cartan test cross-checked by δ-cohomology, plus formal integrability.
    Involution(Input),
    /// Prolongation-projection until involutive, at most `budget` steps (default 8).
    Complete(Input),
    /// Janet tabular. Subcommands from here to `diagram` first prolong a
    /// formally integrable input until involutive, at most `budget` times (default 4).
    Tabular(Input),
    /// Janet bundle dimensions by counting non-multiplicative variables.
    Janet(Input),
    /// Spencer bundle dimensions.
    Spencer(Input),
    /// Spencer, hybrid and Janet rows.
    Diagram(Input),
    /// Compatibility conditions: counts for orders up to `budget` (default 4), or the rows at one order.
    Cc {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Differential sequence built from successive compatibility conditions;
    /// `budget` caps the order searched per operator (default 4).
    Resolve {
        #[command(flatten)]
        input: Input,
        /// Prolong the system this many times before resolving.
        #[arg(long, default_value_t = 0)]
        prolong: usize,
    },
    /// Polynomial solutions up to a degree.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Lists the built-in systems, or prints one as a document.
    Catalog { name: Option<String> },
    /// Runs the acceptance suite.
    Check {
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Engine(#[from] spencer_core::Error),
    #[error("acceptance check failed")]
    Check(Box<Report>),
}

impl std::fmt::Debug for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Report({})", self.command)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Engine(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "E_USAGE",
            Failure::Parse(_) => "E_PARSE",
            Failure::Engine(e) => e.code(),
            Failure::Check(_) => "E_CHECK",
        }
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run(args: &[String], stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if informational {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 1;
        }
    };
    let json = cli.global.json;
    let outcome = dispatch(&cli, stdin);
    let emit = |out: &mut dyn Write, r: &Report| {
        let text = if json { format!("{:#}\n", r.json()) } else { r.text() };
        let _ = out.write_all(text.as_bytes());
    };
    match outcome {
        Ok(r) => {
            emit(out, &r);
            0
        }
        // The report itself explains which criteria failed.
        Err(f @ Failure::Check(_)) => {
            if let Failure::Check(r) = &f {
                emit(out, r);
            }
            let _ = writeln!(err, "error[{}]: {f}", f.code());
            f.exit_code()
        }
        Err(f) => {
            let _ = writeln!(err, "error[{}]: {f}", f.code());
            if json {
                let v = json!({"schema": SCHEMA, "error": {"code": f.code(), "message": f.to_string()}});
                let _ = writeln!(out, "{v:#}");
            }
            f.exit_code()
        }
    }
}

fn read_document(input: &Input, stdin: &mut dyn Read) -> Result<SystemDocument, Failure> {
    let mut text = String::new();
    if input.file == "-" {
        stdin.read_to_string(&mut text).map_err(|e| Failure::Usage(format!("cannot read standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(&input.file).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", input.file)))?;
    }
    Ok(dsl::parse(&text)?)
}

fn load(input: &Input, stdin: &mut dyn Read) -> Result<(SystemDocument, LinearJetSystem), Failure> {
    let doc = read_document(input, stdin)?;
    let sys = doc.to_system()?;
    Ok((doc, sys))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn document(sys: &LinearJetSystem, name: &str) -> String {
    let mut doc = SystemDocument::from_system(sys);
    doc.name = name.to_string();
    doc.to_string()
}

fn shape(r: &mut Report, sys: &LinearJetSystem) {
    r.set("n", sys.n()).set("m", sys.m()).set("order", sys.order());
}

fn rank_mode(g: &Global) -> RankMode {
    if g.exact {
        RankMode::Exact
    } else {
        RankMode::Modular { seed: g.seed, retries: 1, verify_below: 200 }
    }
}

/// Prolongs a formally integrable system until its symbol is involutive,
/// at most `budget` times. Returns the involutive system and the number of
/// prolongations used.
fn involutive_view(sys: &LinearJetSystem, budget: usize) -> Result<(LinearJetSystem, usize), Failure> {
    let fi = sys.is_formally_integrable(CHECK_BOUND)?;
    if !fi.integrable {
        return Err(spencer_core::Error::NotFormallyIntegrable { order: fi.first_failure.unwrap_or(sys.order()) }.into());
    }
    let mut cur = sys.clone();
    for k in 0..=budget {
        if is_involutive(&cur, CHECK_BOUND)?.holds {
            return Ok((cur, k));
        }
        if k < budget {
            cur = cur.prolong(1)?;
        }
    }
    Err(spencer_core::Error::NotInvolutive(format!("symbol still not involutive after {budget} prolongations; raise --budget")).into())
}

fn alternating(v: &[usize]) -> i64 {
    v.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) }).sum()
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> Result<Report, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Dims(input) => {
            let (doc, sys) = load(input, stdin)?;
            let mut r = Report::new("dims", Some(doc.name));
            shape(&mut r, &sys);
            let levels = g.budget.unwrap_or(3);
            let chain = sys.prolongations(levels)?;
            let rows: Vec<Value> = chain
                .iter()
                .map(|p| {
                    json!({
                        "order": p.order(),
                        "jet_dim": p.frame().len(),
                        "equations": p.rank(),
                        "solution_dim": p.solution_dim(),
                        "symbol_dim": p.top_symbol_dim(),
                    })
                })
                .collect();
            r.set("levels", rows);
            r.set("formally_integrable", to_value(&sys.is_formally_integrable(levels.max(1))?));
            Ok(r)
        }
        Command::Prolong { input, by } => {
            let (doc, sys) = load(input, stdin)?;
            let p = sys.prolong(*by)?;
            let mut r = Report::new("prolong", Some(doc.name.clone()));
            shape(&mut r, &p);
            r.set("equations", p.rank()).set("solution_dim", p.solution_dim()).set("symbol_dim", p.top_symbol_dim());
            r.preamble = Some(document(&p, &doc.name));
            Ok(r)
        }
        Command::Project { input, to } => {
            let (doc, sys) = load(input, stdin)?;
            let p = sys.project(*to)?;
            let mut r = Report::new("project", Some(doc.name.clone()));
            shape(&mut r, &p);
            r.set("equations", p.rank()).set("solution_dim", p.solution_dim());
            r.preamble = Some(document(&p, &doc.name));
            Ok(r)
        }
        Command::Symbol { input, level } => {
            let (doc, sys) = load(input, stdin)?;
            let level = level.unwrap_or(sys.order());
            let s = sys.symbol_at(level)?;
            let mut r = Report::new("symbol", Some(doc.name));
            shape(&mut r, &sys);
            r.set("level", level).set("dim", s.dim()).set("ambient_dim", s.ambient_dim());
            r.set("equations", s.annihilator.rows());
            Ok(r)
        }
        Command::Delta(input) => {
            let (doc, sys) = load(input, stdin)?;
            let mut r = Report::new("delta", Some(doc.name));
            shape(&mut r, &sys);
            r.set("cells", to_value(&delta_complex(&sys, g.budget.unwrap_or(2))?));
            Ok(r)
        }
        Command::Acyclic { input, degree } => {
            let (doc, sys) = load(input, stdin)?;
            let s = degree.unwrap_or(sys.n());
            let mut r = Report::new("acyclic", Some(doc.name));
            shape(&mut r, &sys);
            r.set("degree", s);
            r.set("verdict", to_value(&is_s_acyclic(&sys, s, g.budget.unwrap_or(CHECK_BOUND))?));
            Ok(r)
        }
        Command::Involution(input) => {
            let (doc, sys) = load(input, stdin)?;
            let bound = g.budget.unwrap_or(CHECK_BOUND);
            let mut r = Report::new("involution", Some(doc.name));
            shape(&mut r, &sys);
            r.set("formally_integrable", to_value(&sys.is_formally_integrable(bound.max(1))?));
            r.set("cartan", to_value(&cartan_test(&sys, bound, g.seed, REGULARITY_RETRIES)?));
            Ok(r)
        }
        Command::Complete(input) => {
            let (doc, sys) = load(input, stdin)?;
            let t = sys.involutive_completion(g.budget.unwrap_or(8).max(1), CHECK_BOUND)?;
            let mut r = Report::new("complete", Some(doc.name.clone()));
            r.set("completed", t.completed).set("prolongations", t.prolongations).set("projections", t.projections);
            r.set("steps", to_value(&t.steps));
            r.set("final_order", t.final_system.order()).set("final_solution_dim", t.final_system.solution_dim());
            r.preamble = Some(document(&t.final_system, &doc.name));
            Ok(r)
        }
        Command::Tabular(input) => {
            let (doc, sys) = load(input, stdin)?;
            let (sys, k) = involutive_view(&sys, g.budget.unwrap_or(CHECK_BOUND))?;
            let t = janet_tabular(&sys, CHECK_BOUND, g.seed, REGULARITY_RETRIES)?;
            let mut r = Report::new("tabular", Some(doc.name));
            shape(&mut r, &sys);
            r.set("prolonged_by", k).set("tabular", to_value(&t));
            Ok(r)
        }
        Command::Janet(input) => {
            let (doc, sys) = load(input, stdin)?;
            let (sys, k) = involutive_view(&sys, g.budget.unwrap_or(CHECK_BOUND))?;
            let t = janet_tabular(&sys, CHECK_BOUND, g.seed, REGULARITY_RETRIES)?;
            let mut seq = vec![sys.m()];
            seq.extend(&t.bundles);
            let mut r = Report::new("janet", Some(doc.name));
            shape(&mut r, &sys);
            r.set("prolonged_by", k);
            r.set("bundles", to_value(&t.bundles)).set("sequence", to_value(&seq));
            r.set("euler_poincare", euler_poincare(&seq)).set("convention", "-dim E + dim F0 - dim F1 + ...");
            Ok(r)
        }
        Command::Spencer(input) => {
            let (doc, sys) = load(input, stdin)?;
            let (sys, k) = involutive_view(&sys, g.budget.unwrap_or(CHECK_BOUND))?;
            let c = spencer_bundles(&sys)?;
            let mut r = Report::new("spencer", Some(doc.name));
            shape(&mut r, &sys);
            r.set("prolonged_by", k);
            r.set("solution_dim", sys.solution_dim()).set("bundles", to_value(&c));
            r.set("euler_poincare", alternating(&c)).set("convention", "C0 - C1 + C2 - ...");
            Ok(r)
        }
        Command::Diagram(input) => {
            let (doc, sys) = load(input, stdin)?;
            let (sys, k) = involutive_view(&sys, g.budget.unwrap_or(CHECK_BOUND))?;
            let d = fundamental_diagram(&sys, CHECK_BOUND, g.seed, REGULARITY_RETRIES)?;
            let mut r = Report::new("diagram", Some(doc.name));
            shape(&mut r, &sys);
            r.set("prolonged_by", k);
            r.set("solution_dim", d.solution_dim);
            r.set("spencer", to_value(&d.spencer)).set("hybrid", to_value(&d.hybrid)).set("janet", to_value(&d.janet));
            r.set("janet_sequence", to_value(&d.janet_with_source()));
            r.set("first_slot", to_value(&d.first_slot));
            r.set("tabular", to_value(&d.tabular.groups));
            Ok(r)
        }
        Command::Cc { input, order } => {
            let (doc, sys) = load(input, stdin)?;
            let op = OperatorHandle::from_system(&sys);
            let mut r = Report::new("cc", Some(doc.name));
            shape(&mut r, &sys);
            r.set("components", op.target_dim());
            match order {
                Some(k) => {
                    let rows = cc_at_order(&op, *k)?;
                    let frame = op.target_frame(*k)?;
                    let names: Vec<String> = (1..=op.target_dim()).map(|t| format!("z{t}")).collect();
                    let exprs: Vec<String> =
                        rows.row_vecs().iter().map(|row| dsl::expression(&dsl::row_terms(&frame, row), &names)).collect();
                    r.set("order", *k).set("count", rows.rows()).set("conditions", to_value(&exprs));
                }
                None => {
                    let top = g.budget.unwrap_or(4);
                    let counts: Vec<Value> = (1..=top)
                        .map(|k| cc_at_order(&op, k).map(|m| json!({"order": k, "count": m.rows()})))
                        .collect::<spencer_core::Result<_>>()?;
                    r.set("generators", counts);
                    let bound = match cc_order_bound(&sys, top, CHECK_BOUND) {
                        Ok(b) => to_value(&b),
                        Err(spencer_core::Error::NotFormallyIntegrable { .. }) => Value::Null,
                        Err(e) => return Err(e.into()),
                    };
                    r.set("predicted_order", bound);
                }
            }
            Ok(r)
        }
        Command::Resolve { input, prolong } => {
            let (doc, sys) = load(input, stdin)?;
            let sys = sys.prolong(*prolong)?;
            let opts = ResolutionOptions {
                mode: rank_mode(g),
                max_cc_order: g.budget.unwrap_or(4),
                ..ResolutionOptions::default()
            };
            let rep = resolution(&sys, &opts, None)?;
            let mut r = Report::new("resolve", Some(doc.name));
            shape(&mut r, &sys);
            r.set("bundles", to_value(&rep.bundles)).set("orders", to_value(&rep.orders));
            r.set("euler_poincare", rep.euler_poincare).set("convention", "-dim E + dim F0 - dim F1 + ...");
            r.set("complete", rep.complete).set("field", rep.field.clone());
            r.set("stages", to_value(&rep.stages));
            Ok(r)
        }
        Command::Solve { input, degree } => {
            let (doc, sys) = load(input, stdin)?;
            let s = polynomial_solutions(&sys, *degree)?;
            let mut r = Report::new("solve", Some(doc.name));
            shape(&mut r, &sys);
            r.set("degree_bound", s.degree_bound).set("dim", s.dim).set("certified", s.certified);
            r.set("basis", to_value(&s.basis.iter().map(ToString::to_string).collect::<Vec<_>>()));
            Ok(r)
        }
        Command::Catalog { name } => match name {
            None => {
                let mut r = Report::new("catalog", None);
                r.set("systems", to_value(&catalog::NAMES));
                Ok(r)
            }
            Some(name) => {
                let sys = catalog::by_name(name)?;
                let mut r = Report::new("catalog", Some(name.clone()));
                shape(&mut r, &sys);
                r.set("solution_dim", sys.solution_dim());
                r.preamble = Some(document(&sys, &dsl::identifier(name)));
                Ok(r)
            }
        },
        Command::Check { criterion } => {
            let opts = CheckOptions { seed: g.seed };
            let results = match criterion {
                Some(id) if (1..=10).contains(id) => vec![run_criterion(*id, &opts)],
                Some(id) => return Err(Failure::Usage(format!("no criterion {id}; expected 1..=10"))),
                None => run_all(&opts),
            };
            let ok = results.iter().all(|c| c.passed && c.within_limit());
            let mut r = Report::new("check", None);
            r.set("passed", ok);
            r.set("summary", to_value(&results.iter().map(ToString::to_string).collect::<Vec<_>>()));
            r.set("criteria", to_value(&results));
            if ok {
                Ok(r)
            } else {
                Err(Failure::Check(Box::new(r)))
            }
        }
    }
}
