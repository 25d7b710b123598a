//! Browser-facing bindings. Each export takes plain strings and returns a
//! JSON string, so the page needs no generated glue beyond the module
//! itself. The same functions compile natively, which is how they are
//! tested.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use kamlab::code::Code;
use kamlab::machine::{run, MachineKind, RunOptions};
use kamlab::machines::{execute, SpaceKam};
use kamlab::readback::constructor_at;
use kamlab::term::{parse, parse_address, render};
use kamlab::tm::{fixtures, run_encoded, SimOutcome, TmDesc};

fn err(msg: impl Into<String>) -> String {
    json!({ "ok": false, "error": msg.into() }).to_string()
}

/// Evaluate a closed term on one of the four machines. Returns the decoded
/// result (null when fuel ran out) and the run profile.
#[wasm_bindgen]
pub fn eval_term(src: &str, machine: &str, fuel: u64) -> String {
    let Some(kind) = MachineKind::parse(machine) else {
        return err(format!("unknown machine {machine:?} (naive|space|time|lam)"));
    };
    let t = match parse(src) {
        Ok(t) => t,
        Err(e) => return err(e.to_string()),
    };
    let code = match Code::build(&t) {
        Ok(c) => c,
        Err(e) => return err(e.to_string()),
    };
    let ex = match execute(kind, &code, &RunOptions::new(fuel)) {
        Ok(ex) => ex,
        Err(e) => return err(e.to_string()),
    };
    json!({
        "ok": true,
        "machine": kind.name(),
        "completed": ex.profile.completed(),
        "result": ex.result.as_deref().map(render),
        "beta_steps": ex.profile.beta_steps,
        "transitions": ex.profile.transitions,
        "max_bit_space": ex.profile.max_bit_space,
        "max_abstract_space": ex.profile.max_abstract_space,
        "heap_cells": ex.profile.heap_cells,
    })
    .to_string()
}

/// Run a closed term to its result on the space machine and read the
/// constructor at a bit-string tree address, without decoding.
#[wasm_bindgen]
pub fn constructor_label(src: &str, address: &str, fuel: u64) -> String {
    let addr = match parse_address(address) {
        Ok(a) => a,
        Err(e) => return err(e.to_string()),
    };
    let t = match parse(src) {
        Ok(t) => t,
        Err(e) => return err(e.to_string()),
    };
    let code = match Code::build(&t) {
        Ok(c) => c,
        Err(e) => return err(e.to_string()),
    };
    let mut m = SpaceKam::new(&code);
    let profile = match run(&mut m, &RunOptions::new(fuel)) {
        Ok(p) => p,
        Err(e) => return err(e.to_string()),
    };
    if !profile.completed() {
        return err(format!("no normal form within {fuel} transitions"));
    }
    let label = constructor_at(&code, &m.final_closure(), &addr);
    json!({ "ok": true, "label": label.to_string() }).to_string()
}

fn outcome_name(o: SimOutcome) -> &'static str {
    match o {
        SimOutcome::Accept => "accept",
        SimOutcome::Reject => "reject",
        SimOutcome::Stuck => "stuck",
        SimOutcome::OutOfFuel => "out-of-fuel",
    }
}

/// Parse a machine description, simulate it directly, compile it to a term,
/// run that on the space machine, and compare the verdicts. `fuel` counts
/// simulated steps on the direct side and machine transitions on the
/// compiled side.
#[wasm_bindgen]
pub fn tm_run(desc: &str, input: &str, fuel: u64) -> String {
    let desc = match TmDesc::parse(desc) {
        Ok(d) => d,
        Err(e) => return err(e.to_string()),
    };
    let report = match desc.simulate(input, fuel) {
        Ok(r) => r,
        Err(e) => return err(e.to_string()),
    };
    let direct = json!({
        "outcome": outcome_name(report.outcome),
        "steps": report.steps,
        "work_cells": report.work_cells,
    });
    let encoded = match run_encoded(&desc, input, MachineKind::Space, fuel) {
        Ok(r) => r,
        Err(e) => return err(e.to_string()),
    };
    let agree = match (report.accepted(), encoded.accepted) {
        (Some(a), Some(b)) => Value::Bool(a == b),
        _ => Value::Null,
    };
    json!({
        "ok": true,
        "direct": direct,
        "space_kam": {
            "accepted": encoded.accepted,
            "completed": encoded.profile.completed(),
            "beta_steps": encoded.profile.beta_steps,
            "transitions": encoded.profile.transitions,
            "max_bit_space": encoded.profile.max_bit_space,
        },
        "agree": agree,
    })
    .to_string()
}

/// Source text of a bundled machine description, for the page's presets.
#[wasm_bindgen]
pub fn tm_fixture(name: &str) -> String {
    match fixtures::by_name(name) {
        Some(src) => src.to_string(),
        None => String::new(),
    }
}
