//! Pass/fail bookkeeping for the acceptance suite.

use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct SubCheck {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// One numbered criterion: a set of sub-checks plus a runtime budget.
pub struct Criterion {
    pub number: usize,
    pub title: &'static str,
    budget: Duration,
    start: Instant,
    checks: Vec<SubCheck>,
    notes: Vec<String>,
}

impl Criterion {
    pub fn start(number: usize, title: &'static str, budget: Duration) -> Self {
        Self { number, title, budget, start: Instant::now(), checks: vec![], notes: vec![] }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push(SubCheck { name: name.into(), detail: detail.into(), pass });
        pass
    }

    /// `|value − reference| ≤ tol`.
    pub fn close(&mut self, name: &str, value: f64, reference: f64, tol: f64) -> bool {
        let err = (value - reference).abs();
        let pass = err <= tol;
        self.check(name, pass, format!("{value:.10e} vs {reference:.10e}, |diff| {err:.2e} (tol {tol:.0e})"))
    }

    /// `|value − reference| ≤ tol·|reference|`.
    pub fn close_rel(&mut self, name: &str, value: f64, reference: f64, tol: f64) -> bool {
        let err = (value - reference).abs() / reference.abs();
        let pass = err <= tol;
        self.check(name, pass, format!("{value:.10e} vs {reference:.10e}, rel {err:.2e} (tol {tol:.0e})"))
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// A computation that could not be carried out counts as a failed check.
    pub fn error(&mut self, name: &str, err: impl std::fmt::Display) {
        self.check(name, false, format!("error: {err}"));
    }

    /// Print the verdict line and the sub-check lines; returns the verdict.
    pub fn finish(mut self) -> bool {
        let elapsed = self.start.elapsed();
        let in_budget = elapsed <= self.budget;
        let has_checks = !self.checks.is_empty();
        self.check(
            "runtime",
            in_budget,
            format!("{:.2} s (budget {} s)", elapsed.as_secs_f64(), self.budget.as_secs()),
        );
        let pass = has_checks && self.checks.iter().all(|c| c.pass);
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        println!(
            "criterion {:>2}: {}  {} ({} checks, {} failed)",
            self.number,
            if pass { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            failed
        );
        for c in &self.checks {
            println!("    [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        for n in &self.notes {
            println!("    note: {n}");
        }
        pass
    }
}
