use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypernet::machine::{run_with, Divergence, MachineState, Outcome, RunConfig, Token, Dir};
use hypernet::readback::readback;
use hypernet::translate::free_vars_ordered;
use hypernet::{
    alpha_eq, check_globalized, convert, foliate, fuse, gradient, hoist, infer, parse, parse_hypernet, print_hypernet,
    translate_typed, translate_untyped, validate_hypernet, ErrorKind, Hypernet, InferError, NodeId, Term,
};

mod render;

#[derive(Parser)]
#[command(name = "hypernet", version, about = "Hypernet translation, evaluation and graph passes")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Input {
    /// Term or hypernet file; standard input when absent or `-`.
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a hypernet.
    Check {
        #[command(flatten)]
        input: Input,
        /// Also print the canonical text.
        #[arg(long)]
        print: bool,
    },
    /// Translate a term to the canonical hypernet text.
    Translate {
        #[command(flatten)]
        input: Input,
        /// Use the typed translation (binders must be annotated).
        #[arg(long)]
        typed: bool,
    },
    /// Run the token machine.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        detect_cycles: bool,
        /// Dump every state and a summary table into this directory.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Infer a type by unification on the graph.
    Typecheck {
        #[command(flatten)]
        input: Input,
    },
    /// Print the foliation.
    Foliate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        fuse: bool,
    },
    /// Closure-convert and hoist.
    Cc {
        #[command(flatten)]
        input: Input,
        /// Print the readback term instead of the graph.
        #[arg(long)]
        readback: bool,
    },
    /// Gradient by reverse differentiation.
    Rad {
        #[command(flatten)]
        input: Input,
        /// Comma-separated variables to differentiate by.
        #[arg(long, value_delimiter = ',', required = true)]
        wrt: Vec<String>,
        /// Point as `name=value,...`.
        #[arg(long, value_delimiter = ',', required = true)]
        at: Vec<String>,
    },
    /// Emit Graphviz DOT.
    Render {
        #[command(flatten)]
        input: Input,
        /// Run the machine this many steps first and draw the token.
        #[arg(long)]
        step: Option<usize>,
    },
}

struct Fail {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl ToString) -> Fail {
    Fail { code, msg: msg.to_string() }
}

const SEMANTIC: u8 = 1;
const FORMAT: u8 = 2;
const DIVERGED: u8 = 3;
const INTERNAL: u8 = 4;

/// Output text plus the exit status to report after writing it.
type Output = (String, u8);

fn read_input(input: &Input) -> Result<String, Fail> {
    match input.file.as_deref() {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| fail(FORMAT, format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| fail(FORMAT, format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn is_graph_text(src: &str) -> bool {
    src.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| ["node ", "edge ", "left=", "right="].iter().any(|k| l.starts_with(k)))
}

fn term(src: &str) -> Result<Term, Fail> {
    parse(src).map_err(|e| fail(FORMAT, format!("parse error: {e}")))
}

/// The `# token <wire>/<dir>` comment written into trace states.
fn token_comment(src: &str) -> Option<Token> {
    let rest = src.lines().find_map(|l| l.strip_prefix("# token "))?;
    let (w, d) = rest.trim().split_once('/')?;
    let dir = match d {
        "eval" => Dir::Eval,
        "value" => Dir::Value,
        _ => return None,
    };
    Some(Token { wire: NodeId(w.parse().ok()?), dir })
}

/// A hypernet in canonical text, or a term translated without types.
fn load_graph(input: &Input) -> Result<(Hypernet, Option<Token>), Fail> {
    let src = read_input(input)?;
    if is_graph_text(&src) {
        let g = parse_hypernet(&src).map_err(|e| fail(FORMAT, format!("parse error: {e}")))?;
        Ok((g, token_comment(&src)))
    } else {
        Ok((translate_untyped(&term(&src)?), None))
    }
}

fn valid(g: &Hypernet) -> Result<(), Fail> {
    match validate_hypernet(g).first() {
        Some(v) => Err(fail(INTERNAL, format!("invalid hypernet: {v}"))),
        None => Ok(()),
    }
}

/// The last subterm of `source` that is α-equal to `t`, so that values
/// print with the programmer's names.
fn with_source_names(t: Term, source: Option<&Term>) -> Term {
    fn find<'a>(s: &'a Term, t: &Term) -> Option<&'a Term> {
        let kids: Vec<&Term> = match s {
            Term::Var(_) | Term::Const(_) => vec![],
            Term::Lam(_, _, b) | Term::PairLam(_, _, _, b) | Term::Rec(b) => vec![b],
            Term::Let(_, a, b) | Term::App(a, b) | Term::Pair(a, b) => vec![a, b],
            Term::Prim(_, args) => args.iter().collect(),
            Term::Ite(a, b, c) => vec![a, b, c],
        };
        kids.into_iter().rev().find_map(|k| find(k, t)).or_else(|| alpha_eq(s, t).then_some(s))
    }
    match source.and_then(|s| find(s, &t)) {
        Some(s) => s.clone(),
        None => t,
    }
}

fn state_text(s: &MachineState) -> String {
    format!("# step {}\n# token {}\n{}", s.steps, s.token, print_hypernet(&s.graph))
}

fn write_trace(dir: &Path, states: &[MachineState], trace: &[hypernet::machine::TraceEntry]) -> Result<(), Fail> {
    let io = |e: io::Error| fail(INTERNAL, format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for s in states {
        fs::write(dir.join(format!("state_{:05}.hn", s.steps)), state_text(s)).map_err(io)?;
    }
    let mut tsv = String::from("step\trule\ttoken\n");
    for t in trace {
        let _ = writeln!(tsv, "{}\t{}\t{}", t.step, t.rule, t.token);
    }
    fs::write(dir.join("summary.tsv"), tsv).map_err(io)
}

fn eval(input: &Input, max_steps: usize, detect_cycles: bool, trace: Option<&Path>) -> Result<Output, Fail> {
    let src = read_input(input)?;
    let (g, source) = if is_graph_text(&src) {
        (parse_hypernet(&src).map_err(|e| fail(FORMAT, format!("parse error: {e}")))?, None)
    } else {
        let t = term(&src)?;
        (translate_untyped(&t), Some(t))
    };
    let cfg = RunConfig { budget: max_steps, detect_cycles, record_states: trace.is_some() };
    let r = run_with(&g, cfg).map_err(|e| fail(SEMANTIC, e))?;
    if let Some(dir) = trace {
        write_trace(dir, &r.states, &r.trace)?;
    }
    match r.outcome {
        Outcome::Value(s) => {
            let t = readback(&s.graph).map_err(|e| fail(INTERNAL, e.0))?;
            Ok((format!("value: {}\n", with_source_names(t, source.as_ref())), 0))
        }
        Outcome::Diverged(Divergence::Cycle { step, .. }) => Ok((format!("diverged: cycle at step {step}\n"), DIVERGED)),
        Outcome::Diverged(Divergence::Budget) => {
            Ok((format!("diverged: no value within {max_steps} steps\n"), DIVERGED))
        }
        Outcome::Stuck(s, why) => Ok((format!("stuck: {why} at step {}\n", s.steps), SEMANTIC)),
    }
}

fn typecheck(input: &Input) -> Result<Output, Fail> {
    let t = term(&read_input(input)?)?;
    let g = translate_untyped(&t);
    match infer(&g) {
        Ok(ty) => {
            let (ins, outs) = ty.signature();
            let mut s = String::new();
            for (x, a) in free_vars_ordered(&t).iter().zip(&ins) {
                let _ = writeln!(s, "{x}: {a}");
            }
            let _ = writeln!(s, "type: {}", outs[0]);
            Ok((s, 0))
        }
        Err(InferError::Type(p)) => {
            let why = match p.kind {
                ErrorKind::Clash => "",
                ErrorKind::Occurs => " (occurs check)",
            };
            Ok((format!("type error: {p}{why}\n"), SEMANTIC))
        }
        Err(e @ InferError::NonPcf(..)) => Ok((format!("type error: {e}\n"), SEMANTIC)),
    }
}

fn rad(input: &Input, wrt: &[String], at: &[String]) -> Result<Output, Fail> {
    let t = term(&read_input(input)?)?;
    let mut point = Vec::new();
    for x in wrt {
        let v = at
            .iter()
            .find_map(|kv| kv.split_once('=').filter(|(k, _)| k.trim() == x).map(|(_, v)| v.trim()))
            .ok_or_else(|| fail(FORMAT, format!("no value for `{x}` in --at")))?;
        let v: f64 = v.parse().map_err(|_| fail(FORMAT, format!("bad number `{v}` for `{x}`")))?;
        point.push((x.clone(), v));
    }
    let free = free_vars_ordered(&t);
    if let Some(x) = free.iter().find(|x| !wrt.contains(x)) {
        return Err(fail(SEMANTIC, format!("free variable `{x}` is not in --wrt")));
    }
    let grad = gradient(&t, &point).map_err(|e| fail(SEMANTIC, e))?;
    let mut s = String::new();
    for ((x, _), d) in point.iter().zip(grad) {
        let _ = writeln!(s, "d/d{x} = {d}");
    }
    Ok((s, 0))
}

fn dispatch(cmd: &Command) -> Result<Output, Fail> {
    match cmd {
        Command::Check { input, print } => {
            let (g, _) = load_graph(input)?;
            let vs = validate_hypernet(&g);
            if !vs.is_empty() {
                let s: String = vs.iter().map(|v| format!("violation: {v}\n")).collect();
                return Ok((s, SEMANTIC));
            }
            let mut s = format!("ok: {} nodes, {} edges\n", g.node_count(), g.edge_count());
            if *print {
                s.push_str(&print_hypernet(&g));
            }
            Ok((s, 0))
        }
        Command::Translate { input, typed } => {
            let t = term(&read_input(input)?)?;
            let g = if *typed { translate_typed(&[], &t).map_err(|e| fail(SEMANTIC, e))? } else { translate_untyped(&t) };
            valid(&g)?;
            Ok((print_hypernet(&g), 0))
        }
        Command::Eval { input, max_steps, detect_cycles, trace } => {
            eval(input, *max_steps, *detect_cycles, trace.as_deref())
        }
        Command::Typecheck { input } => typecheck(input),
        Command::Foliate { input, fuse: f } => {
            let (g, _) = load_graph(input)?;
            let fol = foliate(&g).map_err(|e| fail(SEMANTIC, e))?;
            Ok(((if *f { fuse(&fol) } else { fol }).to_string(), 0))
        }
        Command::Cc { input, readback: rb } => {
            let (g, _) = load_graph(input)?;
            let c = convert(&g).map_err(|e| fail(SEMANTIC, e))?;
            let h = hoist(&c).map_err(|e| fail(INTERNAL, e))?;
            valid(&h)?;
            if !check_globalized(&h) {
                return Err(fail(INTERNAL, "hoisted graph is not globalized"));
            }
            if *rb {
                let t = readback(&h).map_err(|e| fail(INTERNAL, e.0))?;
                Ok((format!("{t}\n"), 0))
            } else {
                Ok((print_hypernet(&h), 0))
            }
        }
        Command::Rad { input, wrt, at } => rad(input, wrt, at),
        Command::Render { input, step } => {
            let (g, tok) = load_graph(input)?;
            valid(&g)?;
            match step {
                None => Ok((render::render(&g, tok), 0)),
                Some(n) => {
                    let cfg = RunConfig { budget: *n, detect_cycles: false, record_states: true };
                    let r = run_with(&g, cfg).map_err(|e| fail(SEMANTIC, e))?;
                    let s = r.states.last().expect("initial state");
                    Ok((render::render(&s.graph, Some(s.token)), 0))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match dispatch(&cli.cmd) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            return ExitCode::from(f.code);
        }
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, &text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(INTERNAL);
    }
    ExitCode::from(code)
}
