//! Browser bindings. Every export takes the system as `.trs` text and
//! returns plain text, or an error message for the page to display.

use revrw::reversible::{backward_run, forward_run};
use revrw::syntax::{parse_ground_term, parse_ground_terms};
use revrw::*;
use wasm_bindgen::prelude::*;

fn system(source: &str) -> Result<RewriteSystem, String> {
    parse_system_with(source, ParseOptions::generated()).map_err(|e| e.to_string())
}

fn ground(text: &str) -> Result<Term, String> {
    parse_ground_term(text).map_err(|e| e.to_string())
}

fn text<E: ToString>(e: E) -> String {
    e.to_string()
}

/// The system after each transformation step, one `.trs` block per step.
#[wasm_bindgen]
pub fn pipeline(source: &str) -> Result<String, String> {
    let input = system(source)?;
    let (pc, report) = to_pcdctrs(&input).map_err(text)?;
    let rf = injectivize(&pc).map_err(text)?;
    let rb = invert(&rf).map_err(text)?;
    let mut blocks = vec![format!("(COMMENT input system)\n{}", format_system(&input))];
    for stage in &report.stages {
        let notes: String = stage.changes.iter().map(|c| format!("\n  {c}")).collect();
        blocks.push(format!("(COMMENT {}{notes})\n{}", stage.name, format_system(&stage.output)));
    }
    blocks.push(format!("(COMMENT injectivized)\n{}", format_system(&rf)));
    blocks.push(format!("(COMMENT inverse)\n{}", format_system(&rb)));
    Ok(blocks.join("\n"))
}

/// Runs `term` to a normal form; returns the result and its trace on two lines.
/// An empty `strategy` picks the default for the system.
#[wasm_bindgen]
pub fn forward(source: &str, term: &str, strategy: &str) -> Result<String, String> {
    let system = system(source)?;
    let strategy = if strategy.is_empty() { Strategy::default_for(&system) } else { strategy.parse()? };
    let end = forward_run(&system, &Pair::new(ground(term)?), strategy, Steps::UntilNormal, Bounds::default()).map_err(text)?;
    Ok(format!("{}\n{}", end.term, end.trace))
}

/// Undoes every step recorded in `trace`.
#[wasm_bindgen]
pub fn backward(source: &str, term: &str, trace: &str) -> Result<String, String> {
    let system = system(source)?;
    let pair = Pair { term: ground(term)?, trace: parse_trace(trace).map_err(text)? };
    Ok(backward_run(&system, &pair).map_err(text)?.term.to_string())
}

/// With an empty `new_view`, the view of `args`; otherwise the updated arguments.
#[wasm_bindgen]
pub fn bidir(source: &str, function: &str, args: &str, new_view: &str) -> Result<String, String> {
    let bx = Bidirectional::new(&system(source)?, function, Bounds::default()).map_err(text)?;
    let args = parse_ground_terms(args).map_err(text)?;
    if new_view.trim().is_empty() {
        return Ok(bx.get(&args).map_err(text)?.0.to_string());
    }
    Ok(format_arguments(&bx.put(&args, &ground(new_view)?).map_err(text)?))
}
