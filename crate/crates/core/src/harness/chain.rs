//! Consistency of brackets along `C ≤ S ≤ min(A, K̂) ≤ K̃ ≤ K`.

use serde::{Deserialize, Serialize};

use super::scan::ScanRow;
use crate::geometry::ComplexVector;
use crate::metrics::{ext_real, MetricKind};

/// Relative slack allowed before a crossing is reported.
pub const CHAIN_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub delta: f64,
    pub x: ComplexVector,
    /// Metric whose lower bound is too large.
    pub lower_kind: MetricKind,
    pub lower: f64,
    /// Metric, at or above `lower_kind`, whose upper bound is too small.
    pub upper_kind: MetricKind,
    #[serde(with = "ext_real")]
    pub upper: f64,
}

/// Rows sharing `(δ, X)` are compared pairwise: the lower bound of a metric
/// may not exceed the upper bound of any metric at or above it.
pub fn chain_check(rows: &[ScanRow]) -> Vec<Violation> {
    let mut groups: Vec<Vec<&ScanRow>> = Vec::new();
    for r in rows.iter().filter(|r| !r.is_error()) {
        match groups.iter_mut().find(|g| g[0].delta == r.delta && g[0].x == r.x) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    let mut out = Vec::new();
    for g in &groups {
        for a in g {
            for b in g {
                if a.kind.below_or_equal(b.kind) && a.lower > b.upper * (1.0 + CHAIN_TOLERANCE) {
                    out.push(Violation {
                        delta: a.delta,
                        x: a.x.clone(),
                        lower_kind: a.kind,
                        lower: a.lower,
                        upper_kind: b.kind,
                        upper: b.upper,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(kind: MetricKind, lower: f64, upper: f64) -> ScanRow {
        ScanRow {
            delta: 1e-3,
            x: ComplexVector::from_re(&[1.0, 0.0]),
            kind,
            lower,
            upper,
            method: "test".into(),
            margin: None,
            wallclock_ms: 0,
        }
    }

    #[test]
    fn consistent_brackets_pass() {
        let rows = vec![
            row(MetricKind::Caratheodory, 1.0, 5.0),
            row(MetricKind::KTilde, 1.0, 3.0),
            row(MetricKind::Kobayashi, 2.0, 4.0),
        ];
        assert!(chain_check(&rows).is_empty());
    }

    #[test]
    fn injected_crossing_flagged() {
        let rows = vec![
            row(MetricKind::Caratheodory, 1.0, f64::INFINITY),
            row(MetricKind::Kobayashi, 0.5, 0.9),
        ];
        let v = chain_check(&rows);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].lower_kind, v[0].upper_kind), (MetricKind::Caratheodory, MetricKind::Kobayashi));
    }

    #[test]
    fn incomparable_and_tolerance() {
        // A and K̂ are not ordered
        let rows = vec![row(MetricKind::Azukawa, 2.0, 3.0), row(MetricKind::KobBuseman, 0.5, 1.0)];
        assert!(chain_check(&rows).is_empty());
        let rows = vec![row(MetricKind::Sibony, 1.0 + 5e-7, 2.0), row(MetricKind::KTilde, 0.0, 1.0)];
        assert!(chain_check(&rows).is_empty());
    }
}
