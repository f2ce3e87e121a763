//! Classic DV-Hop: per-anchor average hop distance, hop-based distance
//! estimates, and a least-squares multilateration baseline.
//!
//! The average hop distance of anchor `i` is the total Euclidean distance to
//! the other reachable anchors divided by the total hop count to them; an
//! unknown's distance to `i` is then that average times the hop count.
//! Positions are recovered by linearized least squares: subtracting the last
//! anchor's circle equation from the others yields a linear system solved
//! via normal equations.

use std::fmt;

use crate::net::{HopMatrix, Network, Point};

/// Which estimator produced a distance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    ClassicDvHop,
    Demn,
}

/// Estimated distance between an anchor and an unknown node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub anchor: usize,
    pub unknown: usize,
    pub distance: f64,
    pub source: EstimateSource,
}

/// Per-anchor average meters-per-hop values; `None` marks an anchor that
/// reaches no other anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct AvgHopDistance {
    per_anchor: Vec<Option<f64>>,
}

impl AvgHopDistance {
    /// Average hop distance of `anchor`, or `None` if it is isolated from
    /// every other anchor.
    pub fn get(&self, anchor: usize) -> Option<f64> {
        self.per_anchor.get(anchor).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_anchor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_anchor.is_empty()
    }
}

/// Errors from the DV-Hop estimators.
#[derive(Debug)]
pub enum DvHopError {
    /// Fewer than two anchors: no anchor pair exists to average over.
    TooFewAnchors(usize),
    /// The anchor reaches no other anchor, so it has no average hop distance.
    IsolatedAnchor(usize),
    /// The (anchor, unknown) pair is disconnected.
    Unreachable { anchor: usize, unknown: usize },
    /// Fewer than three anchor estimates for multilateration.
    TooFewEstimates(usize),
    /// The linearized system is rank deficient (collinear anchors).
    SingularSystem,
}

impl fmt::Display for DvHopError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DvHopError::TooFewAnchors(n) => write!(f, "need at least 2 anchors, got {n}"),
            DvHopError::IsolatedAnchor(i) => {
                write!(f, "anchor {i} reaches no other anchor (no average hop distance)")
            }
            DvHopError::Unreachable { anchor, unknown } => {
                write!(f, "no path between anchor {anchor} and node {unknown}")
            }
            DvHopError::TooFewEstimates(n) => {
                write!(f, "multilateration needs at least 3 anchor estimates, got {n}")
            }
            DvHopError::SingularSystem => {
                write!(f, "linearized system is singular (anchors collinear)")
            }
        }
    }
}

impl std::error::Error for DvHopError {}

/// Computes each anchor's average hop distance over all other anchors it
/// reaches. Anchors isolated from every other anchor get a per-anchor
/// `None` marker rather than failing the whole computation.
pub fn avg_hop_distance(network: &Network, hops: &HopMatrix) -> Result<AvgHopDistance, DvHopError> {
    let n_anchors = network.n_anchors();
    if n_anchors < 2 {
        return Err(DvHopError::TooFewAnchors(n_anchors));
    }
    let anchors = network.anchor_positions();
    let mut per_anchor = Vec::with_capacity(n_anchors);
    for i in 0..n_anchors {
        let mut meters = 0.0;
        let mut hop_sum = 0u64;
        for j in 0..n_anchors {
            if i == j {
                continue;
            }
            if let Some(h) = hops.get(i, j) {
                meters += anchors[i].dist(anchors[j]);
                hop_sum += h as u64;
            }
        }
        per_anchor.push(if hop_sum > 0 { Some(meters / hop_sum as f64) } else { None });
    }
    Ok(AvgHopDistance { per_anchor })
}

/// Classic DV-Hop distance estimate: average hop distance of the anchor
/// times the hop count to the unknown.
pub fn classic_distance(
    avg: &AvgHopDistance,
    hops: &HopMatrix,
    anchor: usize,
    unknown: usize,
) -> Result<DistanceEstimate, DvHopError> {
    let avg_i = avg.get(anchor).ok_or(DvHopError::IsolatedAnchor(anchor))?;
    let h = hops.get(anchor, unknown).ok_or(DvHopError::Unreachable { anchor, unknown })?;
    Ok(DistanceEstimate {
        anchor,
        unknown,
        distance: avg_i * h as f64,
        source: EstimateSource::ClassicDvHop,
    })
}

/// Solves the linearized multilateration system for one unknown from
/// `(anchor position, estimated distance)` pairs: the last anchor's circle
/// equation is subtracted from the others and the resulting overdetermined
/// linear system is solved via 2×2 normal equations.
pub fn least_squares_position(estimates: &[(Point, f64)]) -> Result<Point, DvHopError> {
    let m = estimates.len();
    if m < 3 {
        return Err(DvHopError::TooFewEstimates(m));
    }
    let (pm, dm) = estimates[m - 1];
    // Rows: 2(x_m - x_i)·x + 2(y_m - y_i)·y = d_i² - d_m² + x_m² - x_i² + y_m² - y_i²
    let mut ata = [0.0f64; 3]; // [a11, a12, a22]
    let mut atb = [0.0f64; 2];
    for &(pi, di) in &estimates[..m - 1] {
        let ax = 2.0 * (pm.x - pi.x);
        let ay = 2.0 * (pm.y - pi.y);
        let b = di * di - dm * dm + pm.x * pm.x - pi.x * pi.x + pm.y * pm.y - pi.y * pi.y;
        ata[0] += ax * ax;
        ata[1] += ax * ay;
        ata[2] += ay * ay;
        atb[0] += ax * b;
        atb[1] += ay * b;
    }
    let det = ata[0] * ata[2] - ata[1] * ata[1];
    let scale = ata[0].abs().max(ata[2].abs()).max(ata[1].abs());
    if det.abs() <= 1e-10 * scale * scale {
        return Err(DvHopError::SingularSystem);
    }
    Ok(Point::new(
        (atb[0] * ata[2] - atb[1] * ata[1]) / det,
        (atb[1] * ata[0] - atb[0] * ata[1]) / det,
    ))
}

/// End-to-end classic DV-Hop placement of every unknown node.
///
/// Per unknown: least squares over the classic estimates from all reachable
/// anchors; with fewer than three usable estimates (or a singular system)
/// the fallback is the centroid of the reachable anchors, and an unknown
/// reaching no anchor at all is placed at the area center. The baseline
/// therefore always produces a full placement.
pub fn baseline_placement(network: &Network, hops: &HopMatrix) -> Vec<Point> {
    let n_anchors = network.n_anchors();
    let anchors = network.anchor_positions();
    let avg = avg_hop_distance(network, hops).ok();
    let mut placement = Vec::with_capacity(network.n_unknowns());
    for k in n_anchors..network.len() {
        let mut estimates = Vec::new();
        let mut reachable = Vec::new();
        for i in 0..n_anchors {
            if hops.get(i, k).is_none() {
                continue;
            }
            reachable.push(anchors[i]);
            if let Some(avg) = &avg {
                if let Ok(est) = classic_distance(avg, hops, i, k) {
                    estimates.push((anchors[i], est.distance));
                }
            }
        }
        let fallback = || centroid(&reachable).unwrap_or_else(|| network.area().center());
        placement.push(least_squares_position(&estimates).unwrap_or_else(|_| fallback()));
    }
    placement
}

fn centroid(points: &[Point]) -> Option<Point> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Some(Point::new(sx / n, sy / n))
}
