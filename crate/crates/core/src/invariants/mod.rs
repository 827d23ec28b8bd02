//! Executable checks of the structural facts and inequalities satisfied by
//! engine runs, the difference-inequality checker and the numeric
//! certificate.
//!
//! Property ids follow the lemma numbering used in the documentation, e.g.
//! `L4.3(vii)`. Inequalities with fractional coefficients are compared after
//! scaling to integers.

mod certificate;
mod pairs;
mod recurrence;
mod rounds;
mod trace;

pub use certificate::{verify_certificate, CertificateError, CertificateReport, ALPHA, THRESHOLD, THRESHOLD_PRINTED};
pub use pairs::{MonitorSummary, PairPlan};
pub use recurrence::{recurrence_check, RecurrenceError, RecurrenceOutcome};
pub use rounds::RoundChecker;
pub use trace::check_trace;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::colouring::{Colour, RestrictedColouring};
use crate::engine::{EngineError, EngineState, ReserveClock, RoundTrace};

/// Outcome of one evaluated property instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub round: usize,
    /// Second round of a two-round fact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<usize>,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

impl CheckReport {
    fn fail(property: &str, round: usize, lhs: f64, rhs: f64, detail: String) -> Self {
        CheckReport {
            property: property.to_string(),
            round,
            t_prime: None,
            passed: false,
            lhs,
            rhs,
            detail,
        }
    }
}

/// Tallies for one property id.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PropertyStats {
    /// Instances where the property was evaluated (hypothesis held).
    pub evaluated: u64,
    /// Instances considered, including those whose hypothesis did not hold.
    pub considered: u64,
    pub failed: u64,
}

/// Everything a checked run produced.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub rounds: usize,
    /// Failed instances (at most [`MAX_KEPT_FAILURES`] per property).
    pub failures: Vec<CheckReport>,
    pub stats: BTreeMap<String, PropertyStats>,
    /// Variants recorded for diagnosis only; never counted as failures.
    pub informational: BTreeMap<String, PropertyStats>,
    pub monitors: Vec<MonitorSummary>,
}

pub const MAX_KEPT_FAILURES: usize = 20;

impl SuiteReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.stats.values().all(|s| s.failed == 0)
    }

    /// Ids of properties with at least one failure.
    #[must_use]
    pub fn failing_properties(&self) -> Vec<String> {
        self.stats
            .iter()
            .filter(|(_, s)| s.failed > 0)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn merge(&mut self, other: &SuiteReport) {
        self.rounds += other.rounds;
        for f in &other.failures {
            let kept = self.failures.iter().filter(|g| g.property == f.property).count();
            if kept < MAX_KEPT_FAILURES {
                self.failures.push(f.clone());
            }
        }
        for (map, theirs) in [
            (&mut self.stats, &other.stats),
            (&mut self.informational, &other.informational),
        ] {
            for (k, s) in theirs {
                let e = map.entry(k.clone()).or_default();
                e.evaluated += s.evaluated;
                e.considered += s.considered;
                e.failed += s.failed;
            }
        }
        for m in &other.monitors {
            match self.monitors.iter_mut().find(|n| n.name == m.name) {
                Some(n) => n.absorb(m),
                None => self.monitors.push(m.clone()),
            }
        }
    }
}

/// Collects property outcomes, keeping counts and a bounded sample of failures.
#[derive(Debug, Default)]
pub(crate) struct Recorder {
    pub report: SuiteReport,
}

impl Recorder {
    /// Records an instance whose hypothesis held.
    pub fn check(&mut self, property: &str, ok: bool, make: impl FnOnce() -> CheckReport) {
        self.record(property, true, ok, make);
    }

    /// Records an instance; `fired` tells whether its hypothesis held.
    pub fn record(&mut self, property: &str, fired: bool, ok: bool, make: impl FnOnce() -> CheckReport) {
        let s = self.report.stats.entry(property.to_string()).or_default();
        s.considered += 1;
        if !fired {
            return;
        }
        s.evaluated += 1;
        if !ok {
            s.failed += 1;
            if s.failed as usize <= MAX_KEPT_FAILURES {
                self.report.failures.push(make());
            }
        }
    }

    pub fn note(&mut self, property: &str, fired: bool, ok: bool) {
        let s = self.report.informational.entry(property.to_string()).or_default();
        s.considered += 1;
        if fired {
            s.evaluated += 1;
            if !ok {
                s.failed += 1;
            }
        }
    }
}

/// Runs the engine with every check enabled, collecting all outcomes instead
/// of stopping at the first failure.
pub fn check_run(colouring: &RestrictedColouring, ell: usize, rounds: usize) -> Result<CheckedRun<'_>, EngineError> {
    check_run_with(colouring, ell, rounds, ReserveClock::default(), PairPlan::default())
}

pub fn check_run_with(
    colouring: &RestrictedColouring,
    ell: usize,
    rounds: usize,
    clock: ReserveClock,
    plan: PairPlan,
) -> Result<CheckedRun<'_>, EngineError> {
    let mut state = EngineState::init_with(colouring, ell, clock)?;
    let mut checker = RoundChecker::new(ell).with_pair_plan(plan);
    let mut trace = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let line = state.step()?;
        checker.observe(&state, &line);
        trace.push(line);
    }
    let report = checker.finish(&state);
    Ok(CheckedRun { trace, state, report })
}

#[derive(Debug, Clone)]
pub struct CheckedRun<'c> {
    pub trace: Vec<RoundTrace>,
    pub state: EngineState<'c>,
    pub report: SuiteReport,
}

/// `ℓ c ≥ (ℓ - 8)(t - z - x) - ℓ²/2`, scaled by `ℓ`.
pub(crate) fn coverage_bound_holds(ell: usize, c: usize, t: usize, x: usize, z: usize) -> (i64, i64) {
    let l = ell as i64;
    let lhs = l * c as i64;
    let rhs = (l - 8) * (t as i64 - x as i64 - z as i64) - l * l / 2;
    (lhs, rhs)
}

/// `2ℓ(c_R + c_B) + ℓ(ρ_R + ρ_B) ≥ 4(ℓ - 8)t - 2ℓ²`, scaled by `2ℓ`.
pub(crate) fn total_bound(ell: usize, line: &RoundTrace) -> (i64, i64) {
    let l = ell as i64;
    let lhs = 2 * l * (line.c_red + line.c_blue) as i64 + l * (line.rho_red + line.rho_blue) as i64;
    let rhs = 4 * (l - 8) * line.t as i64 - 2 * l * l;
    (lhs, rhs)
}

pub(crate) fn colour_tag(c: Colour) -> char {
    c.as_char()
}
