//! Bounds on `max_c P(|z_n - y_n| <= h | c)` for the AR(1) chain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AbcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceBound {
    pub kind: BoundKind,
    pub value: f64,
}

/// For `|phi| > 1` and `|phi| = 1` an upper bound that decays with `n`; for
/// `|phi| < 1` a lower bound independent of `n`.
pub fn acceptance_bound(phi: f64, sigma2: f64, n: usize, h: f64) -> Result<AcceptanceBound> {
    if !(h > 0.0) || n == 0 || !(sigma2 > 0.0) {
        return Err(AbcError::usage(
            "acceptance bound needs h > 0, n >= 1, sigma2 > 0",
        ));
    }
    let base = 2f64.sqrt() * h / (PI * sigma2).sqrt();
    let a = phi.abs();
    let (kind, value) = if a > 1.0 {
        let p2 = phi * phi;
        // (phi^2 - 1)/(phi^{2n} - 1) = 1 / sum_{k<n} phi^{2k}
        let ratio = (p2 - 1.0) / (p2.powi(n as i32) - 1.0);
        (BoundKind::Upper, base * ratio.sqrt())
    } else if a == 1.0 {
        (BoundKind::Upper, base / (n as f64).sqrt())
    } else {
        (
            BoundKind::Lower,
            base * (1.0 - phi * phi).sqrt() * (-h * h / (2.0 * sigma2)).exp(),
        )
    };
    Ok(AcceptanceBound { kind, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_root_example() {
        let b = acceptance_bound(1.0, 1.0, 100, 0.1).unwrap();
        assert_eq!(b.kind, BoundKind::Upper);
        assert!((b.value - 0.00798).abs() < 5e-6);
    }

    #[test]
    fn regimes() {
        assert_eq!(
            acceptance_bound(1.5, 1.0, 10, 0.1).unwrap().kind,
            BoundKind::Upper
        );
        assert_eq!(
            acceptance_bound(-1.0, 1.0, 10, 0.1).unwrap().kind,
            BoundKind::Upper
        );
        assert_eq!(
            acceptance_bound(0.5, 1.0, 10, 0.1).unwrap().kind,
            BoundKind::Lower
        );
        assert!(acceptance_bound(0.5, 1.0, 10, 0.0).is_err());
    }

    #[test]
    fn explosive_bound_shrinks_with_n() {
        let a = acceptance_bound(1.5, 1.0, 10, 0.1).unwrap().value;
        let b = acceptance_bound(1.5, 1.0, 100, 0.1).unwrap().value;
        assert!(b < a);
    }
}
