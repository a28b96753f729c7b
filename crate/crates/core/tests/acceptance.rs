//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::time::Instant;

use feynman_index::io::{run, Command, ExperimentConfig, Report};

const SEED: u64 = 20_240_917;

struct Criterion {
    id: u32,
    title: &'static str,
    /// Section whose wall-clock counts against the budget.
    section: &'static str,
    budget_s: f64,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "projector algebra", section: "propagator-check", budget_s: 10.0 },
    Criterion { id: 2, title: "delta identities", section: "dist-check", budget_s: 120.0 },
    Criterion { id: 3, title: "identity suite", section: "dist-check", budget_s: 300.0 },
    Criterion { id: 4, title: "structure constants", section: "dist-check", budget_s: 300.0 },
    Criterion { id: 5, title: "eta three routes", section: "eta", budget_s: 60.0 },
    Criterion { id: 6, title: "fundamental solution", section: "propagator-check", budget_s: 120.0 },
    Criterion { id: 7, title: "frequency splitting", section: "propagator-check", budget_s: 10.0 },
    Criterion { id: 8, title: "index theorem", section: "index", budget_s: 180.0 },
    Criterion { id: 9, title: "hadamard coefficients", section: "hadamard", budget_s: 30.0 },
    Criterion { id: 10, title: "index density", section: "hadamard", budget_s: 60.0 },
];

fn line(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id:02} {title}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn judge(report: &Report, c: &Criterion) -> bool {
    let checks: Vec<_> = report.checks.iter().filter(|k| k.criterion == c.id).collect();
    let failed: Vec<&str> = checks.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
    let secs = report.timing.get(c.section).copied().unwrap_or(f64::INFINITY);
    let in_budget = secs < c.budget_s;
    let worst = checks
        .iter()
        .filter(|k| k.tolerance > 0.0)
        .map(|k| k.deviation / k.tolerance)
        .fold(0.0, f64::max);
    let mut detail = format!(
        "{} checks, {} failed, worst deviation/tolerance {worst:.2e}, {} {secs:.1} s of {:.0} s",
        checks.len(),
        failed.len(),
        c.section,
        c.budget_s
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; failing: {}", failed.join(", ")));
    }
    line(c.id, c.title, !checks.is_empty() && failed.is_empty() && in_budget, &detail)
}

#[test]
fn acceptance() {
    let cfg = ExperimentConfig::default();
    let start = Instant::now();
    let first = run(Command::FullSuite, &cfg, Some(SEED)).expect("full suite runs");
    let second = run(Command::FullSuite, &cfg, Some(SEED)).expect("full suite runs");
    let total = start.elapsed().as_secs_f64();

    let mut all = true;
    for c in &CRITERIA {
        all &= judge(&first, c);
    }
    let a = first.to_json_string();
    let b = second.to_json_string();
    let same = a == b && first.tables == second.tables;
    let suite = first.timing.get("total").copied().unwrap_or(f64::INFINITY);
    all &= line(
        11,
        "determinism",
        same && suite < 900.0,
        &format!("{} report bytes, identical: {same}, suite {suite:.1} s, both runs {total:.1} s", a.len()),
    );
    assert!(all, "at least one acceptance criterion failed");
}
