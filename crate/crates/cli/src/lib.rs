//! The `revrw` command line, callable in-process through [`run`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use revrw::reversible::{backward_run, backward_step, forward_run};
use revrw::rewrite::first_step;
use revrw::syntax::{parse_ground_term, parse_ground_terms};
use revrw::*;

#[derive(Parser, Debug)]
#[command(name = "revrw", version, about = "Reversible conditional term rewriting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a system and report which properties it has
    Check {
        #[command(flatten)]
        common: Common,
        /// Exit with status 1 unless this property holds (3ctrs, dctrs, constructor, pcdctrs)
        #[arg(long)]
        property: Option<Property>,
    },
    /// Rewrite a ground term, printing each step
    Rewrite {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Rewrite while recording a trace; prints the term and the trace
    Forward {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunOpts,
        /// Trace to extend (defaults to the empty trace)
        #[arg(long)]
        trace: Option<String>,
    },
    /// Undo steps by consuming a trace; prints the term and what is left of the trace
    Backward {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        term: String,
        #[arg(long)]
        trace: String,
        /// Number of steps to undo, or `normal` for all of them
        #[arg(long, default_value = "normal")]
        steps: Steps,
    },
    /// Turn a constructor DCTRS into a pure constructor DCTRS
    Flatten {
        #[command(flatten)]
        common: Common,
    },
    /// Build the injective forward system (flattening first when needed)
    Injectivize {
        #[command(flatten)]
        common: Common,
        /// Drop trace constructors where the ranges allow it
        #[arg(long)]
        improved: bool,
    },
    /// Build the backward system of an injectivized system
    Invert {
        #[command(flatten)]
        common: Common,
    },
    /// Print the system after every transformation step
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        improved: bool,
    },
    /// Evaluate a view function and propagate a view update back to its arguments
    Bidir {
        #[command(flatten)]
        common: Common,
        /// Source arguments, comma separated
        #[arg(long)]
        args: String,
        /// Updated view; without it the current view is printed
        #[arg(long)]
        new_view: Option<String>,
        /// View function (defaults to the root of the first rule)
        #[arg(long)]
        function: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Input system in the .trs format
    file: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 100)]
    max_depth: usize,
    /// Write the output here instead of standard output
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunOpts {
    #[arg(long)]
    term: String,
    /// any, innermost, constructor or top (default: constructor for pcDCTRSs, innermost otherwise)
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Number of steps, or `normal` to run to a normal form
    #[arg(long, default_value = "normal")]
    steps: Steps,
}

impl Common {
    fn bounds(&self) -> Bounds {
        Bounds { max_steps: self.max_steps, max_depth: self.max_depth }
    }
}

enum Failure {
    Usage(String),
    Domain(String),
}

macro_rules! domain_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Failure {
                Failure::Domain(e.to_string())
            }
        }
    )*};
}

domain_errors!(RewriteError, ReversibleError, TransformError);

/// Runs one invocation. `args` includes the program name. Returns the exit
/// status: 0 on success, 1 on a domain failure, 2 on usage or parse errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let common = common_of(&cli.command);
    let (text, status) = match execute(&cli.command) {
        Ok(done) => done,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 1;
        }
    };
    emit(common, &text, out, err).map_or(2, |()| status)
}

fn emit(common: &Common, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), ()> {
    let written = match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    written.map_err(|m| {
        let _ = writeln!(err, "error: {m}");
    })
}

fn common_of(command: &Command) -> &Common {
    match command {
        Command::Check { common, .. }
        | Command::Rewrite { common, .. }
        | Command::Forward { common, .. }
        | Command::Backward { common, .. }
        | Command::Flatten { common }
        | Command::Injectivize { common, .. }
        | Command::Invert { common }
        | Command::Pipeline { common, .. }
        | Command::Bidir { common, .. } => common,
    }
}

fn load(path: &Path) -> Result<RewriteSystem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_system_with(&text, ParseOptions::generated()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn ground(what: &str, text: &str) -> Result<Term, Failure> {
    parse_ground_term(text).map_err(|e| Failure::Usage(format!("--{what}: {e}")))
}

fn execute(command: &Command) -> Result<(String, i32), Failure> {
    let common = common_of(command);
    let system = load(&common.file)?;
    let bounds = common.bounds();
    let mut text = String::new();
    let mut status = 0;
    match command {
        Command::Check { property, .. } => {
            let class = system.classification();
            let _ = writeln!(text, "rules: {}", system.rules().len());
            let _ = writeln!(text, "trs: {}", if class.is_trs { "yes" } else { "no" });
            for p in Property::ALL {
                let _ = writeln!(text, "{}", system.validate(p));
            }
            if property.is_some_and(|p| !system.validate(p).holds()) {
                status = 1;
            }
        }
        Command::Rewrite { run, .. } => {
            let strategy = run.strategy.unwrap_or_else(|| Strategy::default_for(&system));
            let mut current = ground("term", &run.term)?;
            let _ = writeln!(text, "{current}");
            let limit = match run.steps {
                Steps::Count(n) => n,
                Steps::UntilNormal => bounds.max_steps,
            };
            for taken in 0.. {
                let Some(w) = first_step(&system, &current, strategy, bounds)? else { break };
                if taken == limit {
                    if run.steps == Steps::UntilNormal {
                        return Err(RewriteError::StepsExceeded(bounds.max_steps).into());
                    }
                    break;
                }
                let _ = writeln!(text, "-> {}  [{} at {}]", w.result, w.rule_label, w.position);
                current = w.result;
            }
        }
        Command::Forward { run, trace, .. } => {
            let strategy = run.strategy.unwrap_or_else(|| Strategy::default_for(&system));
            let start = Pair {
                term: ground("term", &run.term)?,
                trace: match trace {
                    Some(t) => parse_trace(t).map_err(|e| Failure::Usage(format!("--trace: {e}")))?,
                    None => Trace::new(),
                },
            };
            let end = forward_run(&system, &start, strategy, run.steps, bounds)?;
            let _ = writeln!(text, "{}\n{}", end.term, end.trace);
        }
        Command::Backward { term, trace, steps, .. } => {
            let mut pair = Pair {
                term: ground("term", term)?,
                trace: parse_trace(trace).map_err(|e| Failure::Usage(format!("--trace: {e}")))?,
            };
            match steps {
                Steps::UntilNormal => pair = backward_run(&system, &pair)?,
                Steps::Count(n) => {
                    for _ in 0..*n {
                        if pair.trace.is_empty() {
                            break;
                        }
                        pair = backward_step(&system, &pair)?;
                    }
                }
            }
            let _ = writeln!(text, "{}\n{}", pair.term, pair.trace);
        }
        Command::Flatten { .. } => text = format_system(&to_pcdctrs(&system)?.0),
        Command::Injectivize { improved, .. } => text = format_system(&forward_system(&system, *improved)?),
        Command::Invert { .. } => text = format_system(&invert(&system)?),
        Command::Pipeline { improved, .. } => {
            let (pc, report) = to_pcdctrs(&system)?;
            let rf = if *improved { injectivize_improved(&pc, &system)?.0 } else { injectivize(&pc)? };
            let rb = invert(&rf)?;
            let mut blocks = vec![block("input system", &[], &system)];
            for stage in &report.stages {
                blocks.push(block(&stage.name, &stage.changes, &stage.output));
            }
            blocks.push(block("injectivized", &[], &rf));
            blocks.push(block("inverse", &[], &rb));
            text = blocks.join("\n");
        }
        Command::Bidir { args, new_view, function, .. } => {
            let name = match function {
                Some(f) => f.clone(),
                None => system.rules().first().map(|r| r.root().to_string()).ok_or_else(|| Failure::Usage("empty system".into()))?,
            };
            let sources = parse_ground_terms(args).map_err(|e| Failure::Usage(format!("--args: {e}")))?;
            let bx = Bidirectional::new(&system, &name, bounds)?;
            match new_view {
                Some(v) => {
                    let updated = bx.put(&sources, &ground("new-view", v)?)?;
                    let _ = writeln!(text, "{}", format_arguments(&updated));
                }
                None => {
                    let _ = writeln!(text, "{}", bx.get(&sources)?.0);
                }
            }
        }
    }
    Ok((text, status))
}

fn forward_system(system: &RewriteSystem, improved: bool) -> Result<RewriteSystem, TransformError> {
    let (pc, _) = to_pcdctrs(system)?;
    if improved {
        Ok(injectivize_improved(&pc, system)?.0)
    } else {
        injectivize(&pc)
    }
}

/// A system preceded by a comment naming it, so every block is itself a
/// valid `.trs` document.
fn block(name: &str, changes: &[String], system: &RewriteSystem) -> String {
    let mut head = format!("(COMMENT {name}");
    for change in changes {
        head.push_str("\n  ");
        head.push_str(change);
    }
    head.push_str(")\n");
    head + &format_system(system)
}
