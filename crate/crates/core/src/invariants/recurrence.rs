//! The second-order difference inequality `s_{n+1} <= τ1 s_n - τ2 s_{n-1} + c0`.
//!
//! A strictly increasing sequence can satisfy it for all large `n` only if
//! `τ1² >= 4 τ2`. On a finite sequence the checker reports whether the
//! inequality holds on every index from `max(n0, 1)` to the end and whether
//! the discriminant condition holds.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RecurrenceError {
    #[error("sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("coefficients must satisfy tau1 > 0, tau2 > 0, c0 >= 0")]
    Coefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RecurrenceOutcome {
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    /// Smallest `n` at which the inequality fails.
    pub first_violation: Option<usize>,
}

pub fn recurrence_check(
    s: &[u64],
    tau1: f64,
    tau2: f64,
    c0: f64,
    n0: usize,
) -> Result<RecurrenceOutcome, RecurrenceError> {
    if !(tau1 > 0.0 && tau2 > 0.0 && c0 >= 0.0) || !(tau1.is_finite() && tau2.is_finite() && c0.is_finite()) {
        return Err(RecurrenceError::Coefficients);
    }
    if let Some(i) = (1..s.len()).find(|&i| s[i] <= s[i - 1]) {
        return Err(RecurrenceError::NotIncreasing(i));
    }
    let first_violation = (n0.max(1)..s.len().saturating_sub(1)).find(|&n| {
        let rhs = tau1 * s[n] as f64 - tau2 * s[n - 1] as f64 + c0;
        s[n + 1] as f64 > rhs
    });
    Ok(RecurrenceOutcome {
        hypothesis_holds: first_violation.is_none(),
        conclusion_holds: tau1 * tau1 >= 4.0 * tau2,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two() {
        let s: Vec<u64> = (0..40).map(|n| 1u64 << n).collect();
        let r = recurrence_check(&s, 3.0, 2.0, 0.0, 1).unwrap();
        assert!(r.hypothesis_holds && r.conclusion_holds);
    }

    #[test]
    fn linear_boundary_case() {
        let s: Vec<u64> = (0..100).collect();
        let r = recurrence_check(&s, 2.0, 1.0, 1.0, 1).unwrap();
        assert!(r.hypothesis_holds && r.conclusion_holds);
    }

    #[test]
    fn unit_coefficients_fail_after_short_prefix() {
        // s_{n+1} <= s_n - s_{n-1} + c0 forces s_{n-1} < c0
        let s: Vec<u64> = (1..60).map(|n| n * n).collect();
        let r = recurrence_check(&s, 1.0, 1.0, 5.0, 0).unwrap();
        assert!(!r.hypothesis_holds && !r.conclusion_holds);
        assert!(r.first_violation.unwrap() <= 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            recurrence_check(&[1, 3, 3], 1.0, 1.0, 0.0, 0),
            Err(RecurrenceError::NotIncreasing(2))
        );
        assert_eq!(
            recurrence_check(&[1, 2], 0.0, 1.0, 0.0, 0),
            Err(RecurrenceError::Coefficients)
        );
        assert_eq!(
            recurrence_check(&[1, 2], 1.0, 1.0, -1.0, 0),
            Err(RecurrenceError::Coefficients)
        );
    }
}
