//! Objective functions scoring a candidate placement of the unknown nodes.
//!
//! A placement is scored on two axes. The *distance loss* `f1` compares each
//! placed unknown against its table of estimated anchor distances — the
//! classic hop-count products, selectively replaced by expected-distance
//! values where an unknown is detected by two anchors. The *hop loss* `f2`
//! rebuilds the connectivity a placement would induce and penalizes squared
//! deviations from the hop counts actually observed, restricted to the
//! short-range (one- and two-hop) pairs whose counts carry geometric
//! information.

use crate::demn::{demn_estimates, UpperBoundModel};
use crate::dvhop::{avg_hop_distance, DistanceEstimate, DvHopError, EstimateSource};
use crate::net::{hop_matrix_from_positions, Area, HopMatrix, Network, Point};

/// Candidate coordinates for the unknown nodes, ordered as in the network.
pub type Placement = Vec<Point>;

/// The two objective values of a placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValues {
    /// Squared deviation from the estimated anchor distances.
    pub f1: f64,
    /// Squared deviation from the observed short-range hop counts.
    pub f2: f64,
}

/// Per-unknown anchor-distance estimates, the reference data for `f1`.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n_anchors: usize,
    per_unknown: Vec<Vec<DistanceEstimate>>,
}

impl DistanceTable {
    /// Assembles a table directly from per-unknown estimate lists (row `u`
    /// belongs to the unknown at node index `n_anchors + u`).
    pub fn from_parts(n_anchors: usize, per_unknown: Vec<Vec<DistanceEstimate>>) -> Self {
        DistanceTable { n_anchors, per_unknown }
    }

    pub fn n_anchors(&self) -> usize {
        self.n_anchors
    }

    pub fn n_unknowns(&self) -> usize {
        self.per_unknown.len()
    }

    /// Estimates for unknown `u` (indexed relative to the first unknown).
    pub fn estimates(&self, u: usize) -> &[DistanceEstimate] {
        &self.per_unknown[u]
    }

    /// Total number of estimates across all unknowns.
    pub fn len(&self) -> usize {
        self.per_unknown.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the per-unknown distance table. Every reachable (anchor, unknown)
/// pair gets the classic estimate — average hop distance times hop count.
/// With an upper-bound model, pairs detected by two anchors are upgraded to
/// the cross-domain expected distance.
pub fn distance_table(
    network: &Network,
    hops: &HopMatrix,
    demn: Option<&UpperBoundModel>,
) -> Result<DistanceTable, DvHopError> {
    let avg = avg_hop_distance(network, hops)?;
    let n_anchors = network.n_anchors();
    let mut per_unknown: Vec<Vec<DistanceEstimate>> = (n_anchors..network.len())
        .map(|k| {
            (0..n_anchors)
                .filter_map(|i| {
                    let h = hops.get(i, k)?;
                    let avg_i = avg.get(i)?;
                    Some(DistanceEstimate {
                        anchor: i,
                        unknown: k,
                        distance: avg_i * h as f64,
                        source: EstimateSource::ClassicDvHop,
                    })
                })
                .collect()
        })
        .collect();
    if let Some(model) = demn {
        for est in demn_estimates(network, hops, model) {
            let row = &mut per_unknown[est.unknown - n_anchors];
            match row.iter_mut().find(|e| e.anchor == est.anchor) {
                Some(slot) => *slot = est,
                None => row.push(est),
            }
        }
        for row in &mut per_unknown {
            row.sort_by_key(|e| e.anchor);
        }
    }
    Ok(DistanceTable { n_anchors, per_unknown })
}

/// Places every unknown by least squares over its table row, mirroring the
/// classic solve step but accepting any distance table. Fallbacks per
/// unknown: centroid of the row's anchors, then the area center.
pub fn least_squares_placement(table: &DistanceTable, network: &Network) -> Placement {
    let anchors = network.anchor_positions();
    (0..table.n_unknowns())
        .map(|u| {
            let ests: Vec<(Point, f64)> = table
                .estimates(u)
                .iter()
                .map(|e| (anchors[e.anchor], e.distance))
                .collect();
            crate::dvhop::least_squares_position(&ests).unwrap_or_else(|_| {
                if ests.is_empty() {
                    network.area().center()
                } else {
                    let n = ests.len() as f64;
                    Point::new(
                        ests.iter().map(|(p, _)| p.x).sum::<f64>() / n,
                        ests.iter().map(|(p, _)| p.y).sum::<f64>() / n,
                    )
                }
            })
        })
        .collect()
}

/// `f1`: sum of squared residuals between placed-position distances and the
/// table's estimates.
pub fn distance_loss(placement: &[Point], anchors: &[Point], table: &DistanceTable) -> f64 {
    assert_eq!(placement.len(), table.n_unknowns(), "placement size mismatch");
    let mut loss = 0.0;
    for (u, pos) in placement.iter().enumerate() {
        for est in table.estimates(u) {
            let r = anchors[est.anchor].dist(*pos) - est.distance;
            loss += r * r;
        }
    }
    loss
}

/// Hop counts the network would have if the unknowns sat at `placement`.
pub fn predicted_hops(anchors: &[Point], placement: &[Point], radius: f64) -> HopMatrix {
    let mut positions = Vec::with_capacity(anchors.len() + placement.len());
    positions.extend_from_slice(anchors);
    positions.extend_from_slice(placement);
    hop_matrix_from_positions(&positions, radius)
}

/// Hop count substituted when a pair is disconnected under a candidate
/// placement: one more than any path across the deployment area can need.
pub fn diameter_hop_bound(area: Area, radius: f64) -> u32 {
    (area.diagonal() / radius).ceil() as u32 + 1
}

/// `f2`: sum of squared hop-count deviations over unordered pairs whose
/// observed count is one or two hops. Anchor–anchor pairs are fixed by the
/// placement and excluded; pairs disconnected under the candidate placement
/// contribute with `h_max` in place of the missing count.
pub fn hop_loss(pred: &HopMatrix, real: &HopMatrix, n_anchors: usize, h_max: u32) -> f64 {
    assert_eq!(pred.len(), real.len(), "hop matrix size mismatch");
    let n = real.len();
    let mut loss = 0.0;
    for i in 0..n {
        for k in (i + 1).max(n_anchors)..n {
            let Some(h) = real.get(i, k) else { continue };
            if h > 2 {
                continue;
            }
            let p = pred.get(i, k).unwrap_or(h_max);
            let diff = p as f64 - h as f64;
            loss += diff * diff;
        }
    }
    loss
}
