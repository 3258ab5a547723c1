//! One test per acceptance criterion; each prints a one-line summary.

use std::time::{Duration, Instant};

use gtl_lab::cli::check_report;
use gtl_lab::report::{Check, Status};
use gtl_lab::suite::{Suite, DEFAULT_SEED};

struct Criterion {
    id: usize,
    title: &'static str,
    suite: Suite,
    budget: Option<Duration>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "oracle equivalence", suite: Suite::Oracle, budget: Some(Duration::from_secs(1)) },
    Criterion { id: 2, title: "classic-chain reduction", suite: Suite::Reduction, budget: None },
    Criterion { id: 3, title: "isospectrality and conserved quantities", suite: Suite::Isospectral, budget: Some(Duration::from_secs(5)) },
    Criterion { id: 4, title: "bracket coefficient resolution", suite: Suite::Bracket, budget: None },
    Criterion { id: 5, title: "involution and Jacobi identity", suite: Suite::Involution, budget: None },
    Criterion { id: 6, title: "bilinear identities", suite: Suite::Bilinear, budget: None },
    Criterion { id: 7, title: "epsilon-series solver", suite: Suite::Series, budget: Some(Duration::from_secs(30)) },
    Criterion { id: 8, title: "NLS link", suite: Suite::Nls, budget: None },
    Criterion { id: 9, title: "RK4 convergence order", suite: Suite::Convergence, budget: None },
    Criterion { id: 10, title: "r-matrix diagnostic", suite: Suite::RMatrix, budget: None },
];

fn summarize(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| {
            let mark = match c.status {
                Status::Pass => "ok",
                Status::Fail => "FAIL",
                Status::Measured => "measured",
            };
            format!("{}={:.3e} ({mark})", c.name, c.residual)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn r_matrix_extra(checks: &[Check]) -> Result<(), String> {
    if checks.is_empty() || checks.iter().any(|c| c.status != Status::Measured || !c.residual.is_finite()) {
        return Err("r-matrix entries missing, not measured, or non-finite".into());
    }
    let a = check_report(&[Suite::RMatrix], DEFAULT_SEED).to_json();
    let b = check_report(&[Suite::RMatrix], DEFAULT_SEED).to_json();
    if a != b {
        return Err("report differs between runs".into());
    }
    Ok(())
}

fn evaluate(id: usize) {
    let c = CRITERIA.iter().find(|c| c.id == id).expect("known criterion");
    let start = Instant::now();
    let checks = c.suite.run(DEFAULT_SEED);
    let elapsed = start.elapsed();
    let mut problems: Vec<String> =
        checks.iter().filter(|k| k.status == Status::Fail).map(|k| format!("{} failed", k.name)).collect();
    if checks.is_empty() {
        problems.push("no checks ran".into());
    }
    if let Some(b) = c.budget {
        if elapsed > b {
            problems.push(format!("took {elapsed:?}, budget {b:?}"));
        }
    }
    if c.suite == Suite::RMatrix {
        if let Err(e) = r_matrix_extra(&checks) {
            problems.push(e);
        }
    }
    let verdict = if problems.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {:>2} {verdict} {} [{elapsed:.2?}]: {}", c.id, c.title, summarize(&checks));
    assert!(problems.is_empty(), "criterion {id}: {}", problems.join("; "));
}

#[test]
fn criterion_01_oracle_equivalence() {
    evaluate(1);
}

#[test]
fn criterion_02_classic_chain_reduction() {
    evaluate(2);
}

#[test]
fn criterion_03_isospectrality() {
    evaluate(3);
}

#[test]
fn criterion_04_bracket_resolution() {
    evaluate(4);
}

#[test]
fn criterion_05_involution() {
    evaluate(5);
}

#[test]
fn criterion_06_bilinear_identities() {
    evaluate(6);
}

#[test]
fn criterion_07_epsilon_series() {
    evaluate(7);
}

#[test]
fn criterion_08_nls_link() {
    evaluate(8);
}

#[test]
fn criterion_09_rk4_convergence() {
    evaluate(9);
}

#[test]
fn criterion_10_r_matrix_diagnostic() {
    evaluate(10);
}
