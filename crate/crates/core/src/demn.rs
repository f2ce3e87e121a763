//! Expected-distance estimation over the cross domain of two anchors (DEMN).
//!
//! When an unknown node is detected by two anchors — `m` hops from anchor
//! `a_i` and one hop from anchor `a_j` — it must lie in the intersection of
//! the disk of radius `R` around `a_j` with the disk of radius `UB(m)`
//! around `a_i` (the *cross domain*). The expected distance from `a_i` to a
//! point uniform over that region replaces the classic hop-count product and
//! narrows the search space.
//!
//! Coordinates place `a_i` at the origin and `a_j` at `(d, 0)`; by symmetry
//! only the upper half-plane is integrated. The region splits at the
//! crossing abscissa `x* = (ub² + d² − R²) / (2d)` into
//!
//! * `D1`: under the `a_j` circle, `x ∈ [d−R, x*]`,
//! * `D2`: under the `ub` circle, `x ∈ [x*, ub]`,
//!
//! and for `m = 2` (regime `R < d < ub`) additionally
//!
//! * `D3`: between the two `R`-circles, `x ∈ [d/2, R]`
//!
//! (`D3` overlaps `D1`; both the analytic evaluation and the Monte Carlo
//! oracle count that overlap per region, so they estimate the same
//! functional). The expectation is the area-weighted mean
//! `E = (Σ Iᵣ) / (Σ Dᵣ)` with `Iᵣ = ∬ √(x²+y²)` and `Dᵣ` the region area.
//!
//! The inner integral in `y` has the closed antiderivative
//! `∫√(x²+y²) dy = ½·(y·√(x²+y²) + x²·asinh(y/|x|))`, so each region
//! reduces to a 1-D integral in `x`; an angular substitution removes the
//! square-root endpoint singularities before adaptive Simpson quadrature.
//!
//! When the circles nest instead of crossing, the decomposition degenerates
//! continuously: `ub ≥ d+R` caps `x*` at `d+R` (only `D1`, the `a_j`
//! half-disk) and `ub ≤ R−d` drops `D1` (only `D2`, the `a_i` half-disk).

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dvhop::{DistanceEstimate, EstimateSource};
use crate::net::{HopMatrix, Network};
use crate::quad::{adaptive_simpson, QuadError};

/// Relative tolerance for the region integrals.
const REL_TOL: f64 = 1e-8;

/// Minimum Monte Carlo acceptance rate before sampling is declared failed.
const MIN_ACCEPT_RATE: f64 = 1e-6;

/// Errors from cross-domain construction and evaluation.
#[derive(Debug)]
pub enum DemnError {
    /// A case parameter is non-positive or non-finite.
    InvalidParameter { name: &'static str, value: f64 },
    /// Only hop counts 1 and 2 have expected-distance formulas.
    UnsupportedHopCount(u32),
    /// The circles do not intersect or nest: `d − R ≥ ub`.
    EmptyCrossDomain { d: f64, radius: f64, ub: f64 },
    /// The two-hop decomposition requires `R < d < ub`.
    RegimeViolation { d: f64, radius: f64, ub: f64 },
    /// A region integral failed to converge.
    Quadrature(QuadError),
    /// Monte Carlo acceptance rate fell below the minimum.
    Sampling { accepted: u64, samples: u64 },
    /// A custom upper-bound table is empty, non-positive, or decreasing.
    InvalidUpperBoundTable(String),
}

impl fmt::Display for DemnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemnError::InvalidParameter { name, value } => {
                write!(f, "{name} must be positive and finite, got {value}")
            }
            DemnError::UnsupportedHopCount(m) => {
                write!(f, "expected distance is defined for hop counts 1 and 2, got {m}")
            }
            DemnError::EmptyCrossDomain { d, radius, ub } => {
                write!(f, "empty cross domain: d={d}, R={radius}, ub={ub} (need d − R < ub)")
            }
            DemnError::RegimeViolation { d, radius, ub } => {
                write!(f, "two-hop regime needs R < d < ub, got d={d}, R={radius}, ub={ub}")
            }
            DemnError::Quadrature(e) => write!(f, "quadrature error: {e}"),
            DemnError::Sampling { accepted, samples } => {
                write!(f, "sampling error: {accepted} of {samples} draws accepted")
            }
            DemnError::InvalidUpperBoundTable(msg) => write!(f, "invalid upper-bound table: {msg}"),
        }
    }
}

impl std::error::Error for DemnError {}

impl From<QuadError> for DemnError {
    fn from(e: QuadError) -> Self {
        DemnError::Quadrature(e)
    }
}

/// A validated cross-domain configuration: anchor separation `d`, detection
/// radius `R` around `a_j`, reach bound `ub` around `a_i`, and hop count `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossDomainCase {
    d: f64,
    radius: f64,
    ub: f64,
    m: u32,
}

impl CrossDomainCase {
    /// Validates positivity, `m ∈ {1, 2}`, and a non-empty cross domain
    /// (`d − R < ub`).
    pub fn new(d: f64, radius: f64, ub: f64, m: u32) -> Result<Self, DemnError> {
        for (name, value) in [("d", d), ("radius", radius), ("ub", ub)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DemnError::InvalidParameter { name, value });
            }
        }
        if m != 1 && m != 2 {
            return Err(DemnError::UnsupportedHopCount(m));
        }
        if d - radius >= ub {
            return Err(DemnError::EmptyCrossDomain { d, radius, ub });
        }
        Ok(CrossDomainCase { d, radius, ub, m })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn ub(&self) -> f64 {
        self.ub
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Open interval every expected distance must lie in.
    pub fn bounds(&self) -> (f64, f64) {
        ((self.d - self.radius).max(0.0), self.ub)
    }
}

/// How the anchor-distance upper bound `ub(m)` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum UpperBoundModel {
    /// The geometric bound `ub(m) = m·R`: no node `m` hops away can be
    /// farther than `m` radio ranges.
    HopTimesRadius,
    /// Calibrated per-hop bounds in meters, `table[m-1]` for hop count `m`.
    Custom(Vec<f64>),
}

impl UpperBoundModel {
    /// Validates a calibrated table: non-empty, positive, non-decreasing.
    pub fn custom(table: Vec<f64>) -> Result<Self, DemnError> {
        if table.is_empty() {
            return Err(DemnError::InvalidUpperBoundTable("empty table".into()));
        }
        for (i, &v) in table.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(DemnError::InvalidUpperBoundTable(format!(
                    "entry {i} is {v}, must be positive"
                )));
            }
            if i > 0 && v < table[i - 1] {
                return Err(DemnError::InvalidUpperBoundTable(format!(
                    "entry {i} ({v}) decreases below entry {} ({})",
                    i - 1,
                    table[i - 1]
                )));
            }
        }
        Ok(UpperBoundModel::Custom(table))
    }

    /// Upper bound for `m` hops at radio radius `radius`. Values are capped
    /// at the geometric bound `m·R`, which no reachable node can exceed.
    /// `None` if the table has no entry for `m`.
    pub fn ub(&self, m: u32, radius: f64) -> Option<f64> {
        if m == 0 {
            return None;
        }
        let geometric = m as f64 * radius;
        match self {
            UpperBoundModel::HopTimesRadius => Some(geometric),
            UpperBoundModel::Custom(table) => {
                table.get(m as usize - 1).map(|&v| v.min(geometric))
            }
        }
    }
}

/// Areas of the decomposition regions, in m²; `d3` is zero unless `m = 2`
/// with `d < 2R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionAreas {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl RegionAreas {
    pub fn total(&self) -> f64 {
        self.d1 + self.d2 + self.d3
    }
}

/// Analytic evaluation of a cross-domain case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossDomainEval {
    /// Area-weighted expected distance from `a_i`, in meters.
    pub expected: f64,
    /// Region areas.
    pub areas: RegionAreas,
    /// Effective crossing abscissa after nesting caps.
    pub x_cross: f64,
}

/// How the region decomposition splits along `x`.
#[derive(Clone, Copy)]
enum Split {
    /// Circles cross: `D1` left of `x*`, `D2` right of it.
    TwoRegion { x_cross: f64 },
    /// `a_j`'s disk nests inside the `ub` circle: only `D1`.
    NestedJ,
    /// The `ub` disk nests inside `a_j`'s circle: only `D2`.
    NestedI,
}

fn split(d: f64, radius: f64, ub: f64) -> Split {
    if ub >= d + radius {
        Split::NestedJ
    } else if ub <= radius - d {
        Split::NestedI
    } else {
        Split::TwoRegion { x_cross: (ub * ub + d * d - radius * radius) / (2.0 * d) }
    }
}

/// `∫₀^y √(x² + t²) dt` — closed antiderivative of the inner integral.
fn dist_antideriv(x: f64, y: f64) -> f64 {
    let ax = x.abs();
    if ax * 1e15 < y {
        // x² asinh(y/|x|) → 0 as x → 0; avoids 0·∞ when y/|x| overflows.
        return 0.5 * y * y;
    }
    0.5 * (y * (x * x + y * y).sqrt() + x * x * (y / ax).asinh())
}

fn asin_clamped(v: f64) -> f64 {
    v.clamp(-1.0, 1.0).asin()
}

/// Integral pair (∬√(x²+y²), area) over `x ∈ [lo, hi]`, `y ∈ [0, yc(x)]`
/// where `yc(x) = √(r² − (x−cx)²)` is a circle of radius `r` centered at
/// `(cx, 0)`. Substituting `x = cx + r·sin θ` removes the endpoint
/// singularities of `yc`.
fn under_circle(cx: f64, r: f64, lo: f64, hi: f64) -> Result<(f64, f64), DemnError> {
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let t_lo = asin_clamped((lo - cx) / r);
    let t_hi = asin_clamped((hi - cx) / r);
    let moment = adaptive_simpson(
        |t| {
            let (s, c) = t.sin_cos();
            dist_antideriv(cx + r * s, r * c) * r * c
        },
        t_lo,
        t_hi,
        REL_TOL,
    )?;
    let area = adaptive_simpson(
        |t| {
            let c = t.cos();
            r * c * r * c
        },
        t_lo,
        t_hi,
        REL_TOL,
    )?;
    Ok((moment, area))
}

/// Integral pair over the sliver between the two `R`-circles:
/// `x ∈ [d/2, R]`, `y` from `√(R²−x²)` up to `√(R²−(x−d)²)`. Substituting
/// `x = R·sin θ` removes the lower bound's singularity at `x = R`.
fn between_circles(d: f64, r: f64) -> Result<(f64, f64), DemnError> {
    let lo = d / 2.0;
    if lo >= r {
        return Ok((0.0, 0.0)); // interval [d/2, R] collapses at d ≥ 2R
    }
    let t_lo = asin_clamped(lo / r);
    let t_hi = std::f64::consts::FRAC_PI_2;
    let y_upper = move |x: f64| (r * r - (x - d) * (x - d)).max(0.0).sqrt();
    let moment = adaptive_simpson(
        |t| {
            let (s, c) = t.sin_cos();
            let x = r * s;
            (dist_antideriv(x, y_upper(x)) - dist_antideriv(x, r * c)) * r * c
        },
        t_lo,
        t_hi,
        REL_TOL,
    )?;
    let area = adaptive_simpson(
        |t| {
            let (s, c) = t.sin_cos();
            let x = r * s;
            (y_upper(x) - r * c) * r * c
        },
        t_lo,
        t_hi,
        REL_TOL,
    )?;
    Ok((moment, area))
}

/// Analytic expected distance and region areas for a case.
pub fn evaluate(case: &CrossDomainCase) -> Result<CrossDomainEval, DemnError> {
    let (d, r, ub) = (case.d, case.radius, case.ub);
    if case.m == 2 && !(d > r && d < ub) {
        return Err(DemnError::RegimeViolation { d, radius: r, ub });
    }
    let (x_cross, d1_hi, d2_lo) = match split(d, r, ub) {
        Split::TwoRegion { x_cross } => (x_cross, x_cross, x_cross),
        Split::NestedJ => (d + r, d + r, ub), // D2 empty
        Split::NestedI => (-ub, d - r, -ub),  // D1 empty
    };
    let (i1, d1) = under_circle(d, r, d - r, d1_hi)?;
    let (i2, d2) = under_circle(0.0, ub, d2_lo, ub)?;
    let (i3, d3) = if case.m == 2 { between_circles(d, r)? } else { (0.0, 0.0) };
    let total_area = d1 + d2 + d3;
    if !(total_area > 0.0) {
        return Err(DemnError::EmptyCrossDomain { d, radius: r, ub });
    }
    Ok(CrossDomainEval {
        expected: (i1 + i2 + i3) / total_area,
        areas: RegionAreas { d1, d2, d3 },
        x_cross,
    })
}

/// Expected distance for the one-hop case.
pub fn expected_distance_m1(case: &CrossDomainCase) -> Result<f64, DemnError> {
    if case.m != 1 {
        return Err(DemnError::UnsupportedHopCount(case.m));
    }
    Ok(evaluate(case)?.expected)
}

/// Expected distance for the two-hop case (regime `R < d < ub`).
pub fn expected_distance_m2(case: &CrossDomainCase) -> Result<f64, DemnError> {
    if case.m != 2 {
        return Err(DemnError::UnsupportedHopCount(case.m));
    }
    Ok(evaluate(case)?.expected)
}

/// Region areas of a case.
pub fn region_areas(case: &CrossDomainCase) -> Result<RegionAreas, DemnError> {
    Ok(evaluate(case)?.areas)
}

/// Monte Carlo estimate of a cross-domain case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEval {
    /// Sample mean of √(x²+y²) over the region decomposition.
    pub expected: f64,
    /// Per-region area estimates.
    pub areas: RegionAreas,
    /// Draws that landed in at least one region.
    pub accepted: u64,
    /// Standard error of the mean (treating weighted draws as iid).
    pub std_error: f64,
}

/// Uniform rejection sampling over the case's region decomposition: each
/// draw contributes its distance once per region containing it, mirroring
/// the analytic per-region accounting. Deterministic per seed.
pub fn monte_carlo_eval(
    case: &CrossDomainCase,
    samples: u64,
    seed: u64,
) -> Result<McEval, DemnError> {
    let (d, r, ub) = (case.d, case.radius, case.ub);
    if case.m == 2 && !(d > r && d < ub) {
        return Err(DemnError::RegimeViolation { d, radius: r, ub });
    }
    let sp = split(d, r, ub);
    let x_lo = d - r;
    let x_hi = ub.min(d + r);
    let y_hi = r.min(ub);
    let box_area = (x_hi - x_lo) * y_hi;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut weight = 0u64;
    let mut accepted = 0u64;
    let mut counts = [0u64; 3];
    for _ in 0..samples {
        let x: f64 = rng.gen_range(x_lo..=x_hi);
        let y: f64 = rng.gen_range(0.0..=y_hi);
        let in_j = (x - d) * (x - d) + y * y <= r * r;
        let in_i = x * x + y * y <= ub * ub;
        let (d1, d2) = match sp {
            Split::TwoRegion { x_cross } => (in_j && x <= x_cross, in_i && x >= x_cross),
            Split::NestedJ => (in_j, false),
            Split::NestedI => (false, in_i),
        };
        let d3 = case.m == 2 && x >= d / 2.0 && x <= r && in_j && x * x + y * y >= r * r;
        let mult = d1 as u64 + d2 as u64 + d3 as u64;
        if mult > 0 {
            let dist = x.hypot(y);
            sum += dist * mult as f64;
            sum_sq += dist * dist * mult as f64;
            weight += mult;
            accepted += 1;
            counts[0] += d1 as u64;
            counts[1] += d2 as u64;
            counts[2] += d3 as u64;
        }
    }
    if (accepted as f64) < MIN_ACCEPT_RATE * samples as f64 {
        return Err(DemnError::Sampling { accepted, samples });
    }
    let mean = sum / weight as f64;
    let variance = (sum_sq / weight as f64 - mean * mean).max(0.0);
    let per_count = |c: u64| box_area * c as f64 / samples as f64;
    Ok(McEval {
        expected: mean,
        areas: RegionAreas {
            d1: per_count(counts[0]),
            d2: per_count(counts[1]),
            d3: per_count(counts[2]),
        },
        accepted,
        std_error: (variance / weight as f64).sqrt(),
    })
}

/// Monte Carlo expected distance (see [`monte_carlo_eval`]).
pub fn monte_carlo_expected_distance(
    case: &CrossDomainCase,
    samples: u64,
    seed: u64,
) -> Result<f64, DemnError> {
    Ok(monte_carlo_eval(case, samples, seed)?.expected)
}

/// Expected-distance estimates for every (anchor, unknown) pair detected by
/// two anchors: anchor `i` at hop `m ∈ {1, 2}` from the unknown, plus some
/// other anchor `j` one hop away. Among qualifying `j` the one closest to
/// `i` is used (tightest cross domain); pairs whose geometry falls outside
/// the formulas' regime are skipped and fall back to classic estimates
/// downstream.
pub fn demn_estimates(
    network: &Network,
    hops: &HopMatrix,
    ub_model: &UpperBoundModel,
) -> Vec<DistanceEstimate> {
    let n_anchors = network.n_anchors();
    let anchors = network.anchor_positions();
    let radius = network.radius();
    let mut estimates = Vec::new();
    for k in n_anchors..network.len() {
        for i in 0..n_anchors {
            let m = match hops.get(i, k) {
                Some(m @ (1 | 2)) => m,
                _ => continue,
            };
            let mut best: Option<(f64, usize)> = None;
            for j in 0..n_anchors {
                if j == i || hops.get(j, k) != Some(1) {
                    continue;
                }
                let d = anchors[i].dist(anchors[j]);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            let Some((d, _)) = best else { continue };
            let Some(ub) = ub_model.ub(m, radius) else { continue };
            let Ok(case) = CrossDomainCase::new(d, radius, ub, m) else { continue };
            let Ok(eval) = evaluate(&case) else { continue };
            estimates.push(DistanceEstimate {
                anchor: i,
                unknown: k,
                distance: eval.expected,
                source: EstimateSource::Demn,
            });
        }
    }
    estimates
}
