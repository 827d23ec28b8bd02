//! Numeric verification of the density constant and the positivity
//! certificate behind it.

use serde::Serialize;
use thiserror::Error;

/// Least root of `8x² - 7x + 1`.
pub const ALPHA: f64 = 0.179_805_898_398_896_2;
/// `1 - α = (9 + √17) / 16`.
pub const THRESHOLD: f64 = 0.820_194_101_601_103_8;
/// The four-digit value the threshold is usually quoted with.
pub const THRESHOLD_PRINTED: f64 = 0.82019;

#[derive(Debug, Error, PartialEq)]
pub enum CertificateError {
    #[error("epsilon = {0} must lie strictly between 0 and 1/2")]
    Parameter(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub name: String,
    /// Residual or margin being tested.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub threshold: f64,
    pub matrix: [[f64; 4]; 4],
    pub y: [f64; 4],
    pub y_t_a: [f64; 4],
    pub closed_forms: [f64; 4],
    pub checks: Vec<CertificateCheck>,
}

impl CertificateReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// The coefficient matrix as a function of `ρ`.
#[must_use]
pub fn certificate_matrix(rho: f64) -> [[f64; 4]; 4] {
    [
        [8.0 * rho - 4.0, 2.0, 0.0, 1.0],
        [3.0, 8.0 * rho - 5.0, 0.0, 1.0],
        [7.0 * rho - 2.0, 1.0 + 2.0 * rho, 4.0 * rho - 3.0, 1.0 + rho],
        [3.0 + 6.0 * rho, 12.0 * rho - 5.0, 1.0, 10.0 * rho - 5.0],
    ]
}

pub fn verify_certificate(epsilon: f64) -> Result<CertificateReport, CertificateError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(CertificateError::Parameter(epsilon));
    }
    let sqrt17 = 17f64.sqrt();
    let alpha = (7.0 - sqrt17) / 16.0;
    let threshold = (9.0 + sqrt17) / 16.0;
    let delta = epsilon / 2.0;
    let rho = alpha + delta;
    let a = certificate_matrix(rho);
    let y = [7.0 - 12.0 * alpha, 2.0 - 4.0 * alpha, 1.0, 3.0 - 4.0 * alpha];
    let mut yta = [0.0; 4];
    for (j, out) in yta.iter_mut().enumerate() {
        *out = (0..4).map(|i| y[i] * a[i][j]).sum();
    }
    let closed = [
        (81.0 - 120.0 * alpha) * delta,
        (54.0 - 80.0 * alpha) * delta,
        4.0 * delta,
        (31.0 - 40.0 * alpha) * delta,
    ];

    let mut checks = Vec::new();
    let mut push = |name: String, value: f64, tolerance: f64, passed: bool| {
        checks.push(CertificateCheck {
            name,
            value,
            tolerance,
            passed,
        });
    };
    let root = 8.0 * alpha * alpha - 7.0 * alpha + 1.0;
    push("alpha is a root of 8x^2-7x+1".into(), root, 1e-12, root.abs() <= 1e-12);
    let other_root = (7.0 + sqrt17) / 16.0;
    push(
        "alpha is the smaller root".into(),
        other_root - alpha,
        0.0,
        alpha < other_root,
    );
    let ident = alpha + threshold - 1.0;
    push("1 - alpha = (9+sqrt17)/16".into(), ident, 1e-12, ident.abs() <= 1e-12);
    let printed = threshold - THRESHOLD_PRINTED;
    push("threshold matches 0.82019".into(), printed, 1e-5, printed.abs() <= 1e-5);
    for (i, &yi) in y.iter().enumerate() {
        push(format!("y[{i}] >= 0"), yi, 0.0, yi >= 0.0);
    }
    for j in 0..4 {
        let r = yta[j] - closed[j];
        push(format!("yTA[{j}] closed form"), r, 1e-10, r.abs() <= 1e-10);
        let margin = yta[j] - delta;
        push(format!("yTA[{j}] >= delta"), margin, 1e-12, margin >= -1e-12);
    }
    let quad = 7.0 * rho - 8.0 * rho * rho - 1.0;
    push("1 <= 7 rho - 8 rho^2".into(), quad, 0.0, quad >= 0.0);
    let ap = 3.0 - 2.0 * 2f64.sqrt();
    let r2 = 1.0 - 6.0 * ap + ap * ap;
    push("alpha' = 3-2sqrt2 solves 1-6x+x^2".into(), r2, 1e-12, r2.abs() <= 1e-12);

    Ok(CertificateReport {
        epsilon,
        delta,
        rho,
        alpha,
        threshold,
        matrix: a,
        y,
        y_t_a: yta,
        closed_forms: closed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_epsilon_passes() {
        let r = verify_certificate(0.1).unwrap();
        assert!(
            r.passed(),
            "{:?}",
            r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
        );
        assert!(r.y_t_a.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn constants_agree_with_closed_forms() {
        assert!((ALPHA - (7.0 - 17f64.sqrt()) / 16.0).abs() < 1e-15);
        assert!((THRESHOLD - (9.0 + 17f64.sqrt()) / 16.0).abs() < 1e-15);
        assert!((THRESHOLD - 0.82019).abs() < 1e-5);
    }

    #[test]
    fn components_vanish_with_epsilon() {
        let small = verify_certificate(1e-9).unwrap();
        assert!(small.y_t_a.iter().all(|v| v.abs() < 1e-7));
        let r = verify_certificate(0.2).unwrap();
        for j in 0..4 {
            assert!((r.y_t_a[j] / r.delta - r.closed_forms[j] / r.delta).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_epsilon() {
        for e in [0.0, 0.5, 0.6, -0.1, f64::NAN] {
            assert!(verify_certificate(e).is_err(), "{e}");
        }
    }

    #[test]
    fn sweep_passes() {
        for e in [0.01, 0.05, 0.1, 0.25, 0.49] {
            assert!(verify_certificate(e).unwrap().passed(), "{e}");
        }
    }
}
