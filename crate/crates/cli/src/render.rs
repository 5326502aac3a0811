use std::fmt::Write;

use qwhile::oracle::SuiteReport;
use qwhile::report::{RunOutput, TraceOutput};
use qwhile::state::StateEntry;

fn state(out: &mut String, entries: &[StateEntry]) {
    if entries.is_empty() {
        out.push_str("  (zero vector)\n");
        return;
    }
    for e in entries {
        let regs: Vec<String> = e.regs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "  {:+.6}{:+.6}i  |{}0…⟩ {}", e.re, e.im, e.ancillas, regs.join(" "));
    }
}

pub fn run(r: &RunOutput) -> String {
    let mut out = String::new();
    let mode = serde_json::to_value(r.mode).unwrap();
    let _ = writeln!(out, "mode {}, {} iteration(s), converged: {}", mode.as_str().unwrap_or("?"), r.iterations, r.converged);
    let _ = writeln!(out, "terminated mass {:.9}, running mass {:.9}, ancillas {}", r.terminated_mass, r.running_mass, r.ancillas_used);
    let _ = writeln!(out, "state ({} term(s)):", r.state.len());
    state(&mut out, &r.state);
    out
}

pub fn trace(t: &TraceOutput) -> String {
    let mut out = String::new();
    for s in &t.steps {
        let _ = writeln!(out, "{} (loop {}, mass {:.9}):", s.label, s.loop_index, s.norm_sqr);
        state(&mut out, &s.state);
    }
    out
}

pub fn suite(r: &SuiteReport) -> String {
    let mut out = String::new();
    for (name, p) in &r.properties {
        let _ = writeln!(out, "{} {name:<24} max deviation {:.3e}", if p.pass { "pass" } else { "FAIL" }, p.max_deviation);
    }
    out
}
