//! Shape diagnostics of a frontier on the normalized scale: slope at the
//! origin, area under the curve, and comparisons across runs.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::ParetoFrontier;

/// A normalized point `(z2 / z2_max, |z1| / |z1|_max)`.
pub type NormPoint = (f64, f64);

/// Normalizes raw `(z1, z2)` points sorted by `z2`.
///
/// If either maximum is zero the result is a single point at `z2 = 0`,
/// carrying `1` when there is any impact and `0` otherwise.
pub fn normalize(raw: &[(i64, i64)]) -> Vec<NormPoint> {
    let z1_max = raw.iter().map(|p| p.0.unsigned_abs()).max().unwrap_or(0);
    let z2_max = raw.iter().map(|p| p.1.unsigned_abs()).max().unwrap_or(0);
    if z1_max == 0 || z2_max == 0 {
        return vec![(0.0, if z1_max > 0 { 1.0 } else { 0.0 })];
    }
    let mut pts: Vec<NormPoint> = raw
        .iter()
        .map(|&(z1, z2)| {
            (
                z2 as f64 / z2_max as f64,
                z1.unsigned_abs() as f64 / z1_max as f64,
            )
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts
}

/// Rise over run of the first segment; `None` with fewer than two points.
pub fn slope_at_origin(pts: &[NormPoint]) -> Option<f64> {
    match pts {
        [a, b, ..] if b.0 > a.0 => Some((b.1 - a.1) / (b.0 - a.0)),
        _ => None,
    }
}

/// Trapezoidal area under the piecewise-linear curve.
pub fn concavity_index(pts: &[NormPoint]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    Some(
        pts.windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum(),
    )
}

/// The curve's value at `x`, interpolated linearly and held flat outside its
/// breakpoints.
pub fn interpolate(pts: &[NormPoint], x: f64) -> f64 {
    let Some(first) = pts.first() else { return 0.0 };
    if x <= first.0 {
        return first.1;
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x <= b.0 {
            if b.0 == a.0 {
                return b.1;
            }
            return a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
        }
    }
    pts[pts.len() - 1].1
}

/// Largest vertical gap between two normalized curves, checked at every
/// breakpoint of either.
pub fn shape_distance(a: &[NormPoint], b: &[NormPoint]) -> f64 {
    let mut xs: Vec<f64> = a.iter().chain(b).map(|p| p.0).collect();
    xs.extend([0.0, 1.0]);
    xs.iter()
        .map(|&x| (interpolate(a, x) - interpolate(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Run settings a report was produced under.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RunSettings {
    pub network: String,
    pub demand_veh_per_hr: u32,
    pub horizon_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityReport {
    pub label: String,
    pub settings: RunSettings,
    pub m: Option<f64>,
    pub concavity_index: Option<f64>,
    pub normalized_points: Vec<NormPoint>,
    /// Raw `(z1, z2)` frontier.
    pub raw_points: Vec<(i64, i64)>,
    pub z1_max: i64,
    pub z2_max: i64,
}

impl VulnerabilityReport {
    pub fn from_points(
        label: impl Into<String>,
        settings: RunSettings,
        raw: &[(i64, i64)],
    ) -> Self {
        let mut raw_points = raw.to_vec();
        raw_points.sort_by_key(|&(z1, z2)| (z2, -z1));
        let normalized_points = normalize(&raw_points);
        Self {
            label: label.into(),
            settings,
            m: slope_at_origin(&normalized_points),
            concavity_index: concavity_index(&normalized_points),
            z1_max: raw_points.iter().map(|p| p.0.abs()).max().unwrap_or(0),
            z2_max: raw_points.iter().map(|p| p.1).max().unwrap_or(0),
            normalized_points,
            raw_points,
        }
    }

    pub fn new(label: impl Into<String>, settings: RunSettings, frontier: &ParetoFrontier) -> Self {
        Self::from_points(label, settings, &frontier.values())
    }

    pub fn n_points(&self) -> usize {
        self.raw_points.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Network,
    Demand,
    Duration,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Network => "network",
            Axis::Demand => "demand",
            Axis::Duration => "duration",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("need at least two reports, got {0}")]
    TooFew(usize),
    #[error("reports {a} and {b} differ in {field}, which is not the compared axis")]
    Mismatched {
        a: String,
        b: String,
        field: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub settings: RunSettings,
    pub m: Option<f64>,
    pub concavity_index: Option<f64>,
    pub z1_max: i64,
    pub z2_max: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub axis: Axis,
    /// Sorted by settings, then label.
    pub rows: Vec<ComparisonRow>,
    /// `distances[i][j]` is the shape distance between rows `i` and `j`.
    pub distances: Vec<Vec<f64>>,
}

impl ComparisonTable {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Labels ordered by decreasing slope; reports without one go last.
    pub fn slope_ranking(&self) -> Vec<&str> {
        let mut rows: Vec<&ComparisonRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| match (a.m, b.m) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        });
        rows.into_iter().map(|r| r.label.as_str()).collect()
    }

    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Tabulates reports that differ only along `axis`.
pub fn compare(
    reports: &[VulnerabilityReport],
    axis: Axis,
) -> Result<ComparisonTable, CompareError> {
    if reports.len() < 2 {
        return Err(CompareError::TooFew(reports.len()));
    }
    let base = &reports[0];
    for r in &reports[1..] {
        let (a, b) = (&base.settings, &r.settings);
        let field = if axis != Axis::Network && a.network != b.network {
            Some("network")
        } else if axis != Axis::Demand && a.demand_veh_per_hr != b.demand_veh_per_hr {
            Some("demand")
        } else if axis != Axis::Duration && a.horizon_steps != b.horizon_steps {
            Some("duration")
        } else {
            None
        };
        if let Some(field) = field {
            return Err(CompareError::Mismatched {
                a: base.label.clone(),
                b: r.label.clone(),
                field,
            });
        }
    }
    let mut sorted: Vec<&VulnerabilityReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        a.settings
            .cmp(&b.settings)
            .then_with(|| a.label.cmp(&b.label))
    });
    let distances = sorted
        .iter()
        .map(|a| {
            sorted
                .iter()
                .map(|b| shape_distance(&a.normalized_points, &b.normalized_points))
                .collect()
        })
        .collect();
    let rows = sorted
        .iter()
        .map(|r| ComparisonRow {
            label: r.label.clone(),
            settings: r.settings.clone(),
            m: r.m,
            concavity_index: r.concavity_index,
            z1_max: r.z1_max,
            z2_max: r.z2_max,
        })
        .collect();
    Ok(ComparisonTable {
        axis,
        rows,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(net: &str, demand: u32, steps: u32) -> RunSettings {
        RunSettings {
            network: net.into(),
            demand_veh_per_hr: demand,
            horizon_steps: steps,
        }
    }

    #[test]
    fn two_point_normalization() {
        assert_eq!(normalize(&[(0, 0), (-10, 5)]), vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn degenerate_frontiers() {
        assert_eq!(normalize(&[(0, 0)]), vec![(0.0, 0.0)]);
        assert_eq!(normalize(&[(-3, 0)]), vec![(0.0, 1.0)]);
        let r = VulnerabilityReport::from_points("x", settings("A", 400, 450), &[(0, 0)]);
        assert_eq!(r.m, None);
        assert_eq!(r.concavity_index, None);
    }

    #[test]
    fn slope_arithmetic() {
        assert_eq!(
            slope_at_origin(&[(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)]),
            Some(4.0)
        );
        assert_eq!(slope_at_origin(&[(0.0, 0.0), (1.0, 1.0)]), Some(1.0));
    }

    #[test]
    fn trapezoid_arithmetic() {
        assert_eq!(concavity_index(&[(0.0, 0.0), (1.0, 1.0)]), Some(0.5));
        let c = concavity_index(&[(0.0, 0.0), (0.1, 1.0), (1.0, 1.0)]).unwrap();
        assert!((c - 0.95).abs() < 1e-12);
    }

    #[test]
    fn held_impact_at_origin_is_kept() {
        let r = VulnerabilityReport::from_points("x", settings("A", 400, 450), &[(-2, 0), (-4, 2)]);
        assert_eq!(r.normalized_points, vec![(0.0, 0.5), (1.0, 1.0)]);
        assert_eq!(r.m, Some(0.5));
        assert_eq!(r.concavity_index, Some(0.75));
    }

    #[test]
    fn interpolation_and_distance() {
        let a = [(0.0, 0.0), (1.0, 1.0)];
        let b = [(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)];
        assert_eq!(interpolate(&a, 0.25), 0.25);
        assert_eq!(interpolate(&b, 0.25), 0.5);
        assert_eq!(shape_distance(&a, &b), 0.5);
        assert_eq!(shape_distance(&a, &a), 0.0);
    }

    #[test]
    fn compare_checks_settings() {
        let a = VulnerabilityReport::from_points("A", settings("A", 400, 450), &[(0, 0), (-4, 2)]);
        let b = VulnerabilityReport::from_points(
            "B",
            settings("B", 400, 450),
            &[(0, 0), (-4, 1), (-5, 3)],
        );
        let c = VulnerabilityReport::from_points("C", settings("C", 800, 450), &[(0, 0), (-4, 2)]);
        assert!(compare(&[a.clone(), b.clone()], Axis::Network).is_ok());
        assert!(matches!(
            compare(&[a.clone(), c.clone()], Axis::Network),
            Err(CompareError::Mismatched {
                field: "demand",
                ..
            })
        ));
        assert!(matches!(
            compare(std::slice::from_ref(&a), Axis::Network),
            Err(CompareError::TooFew(1))
        ));
        let t = compare(&[b, a.clone()], Axis::Network).unwrap();
        assert_eq!(t.rows[0].label, "A");
        assert_eq!(t.slope_ranking(), vec!["B", "A"]);
    }

    #[test]
    fn duplicated_reports_have_zero_distance() {
        let a = VulnerabilityReport::from_points(
            "A",
            settings("A", 400, 450),
            &[(0, 0), (-4, 1), (-5, 3)],
        );
        let mut b = a.clone();
        b.label = "A'".into();
        assert_eq!(compare(&[a, b], Axis::Network).unwrap().max_distance(), 0.0);
    }
}
