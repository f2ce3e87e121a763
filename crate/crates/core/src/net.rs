//! Sensor-network model: node layouts over topology masks, network file IO,
//! and all-pairs minimum hop counts.
//!
//! A [`Network`] is a dense list of node positions inside a rectangular
//! deployment area. The first `n_anchors` nodes are anchors (known
//! positions); the rest are unknowns whose stored coordinates serve as
//! ground truth for evaluation. Two nodes communicate iff their Euclidean
//! distance is at most the radio radius `R` (boundary inclusive — one
//! consistent predicate is used everywhere hop counts are computed, so
//! real and predicted hop matrices are comparable).

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A point in the deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to another point.
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangular deployment area `[0, width] × [0, height]`, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn new(width: f64, height: f64) -> Self {
        Area { width, height }
    }

    /// Whether `p` lies inside the rectangle (boundary inclusive).
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    /// Center of the rectangle.
    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    /// Length of the diagonal.
    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

/// Mask describing where nodes may be placed inside the area rectangle.
///
/// `Random` admits the whole rectangle. The letter shapes carve the
/// rectangle with parametrized cutouts; the defaults produce a C with a
/// right-opening notch, an O annulus, and an X of two diagonal bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyShape {
    Random,
    /// Rectangle minus a notch opening to the right: the notch spans the
    /// rightmost `notch_w_frac` of the width and the middle `notch_h_frac`
    /// of the height.
    CShape { notch_w_frac: f64, notch_h_frac: f64 },
    /// Annulus between concentric circles centered in the area, with radii
    /// given as fractions of `min(width, height)`.
    OShape { outer_frac: f64, inner_frac: f64 },
    /// Union of the two diagonal bands, each of half-width
    /// `half_width_frac · min(width, height)`.
    XShape { half_width_frac: f64 },
}

impl TopologyShape {
    /// C shape with the default notch (right 60% × middle 50%).
    pub fn c_default() -> Self {
        TopologyShape::CShape { notch_w_frac: 0.6, notch_h_frac: 0.5 }
    }

    /// O shape with default radii 0.5/0.2 of `min(width, height)`.
    pub fn o_default() -> Self {
        TopologyShape::OShape { outer_frac: 0.5, inner_frac: 0.2 }
    }

    /// X shape with default band half-width 0.15 of `min(width, height)`.
    pub fn x_default() -> Self {
        TopologyShape::XShape { half_width_frac: 0.15 }
    }

    /// Parse a shape name (`random`, `c`, `o`, `x`) with default parameters.
    pub fn from_name(name: &str) -> Result<Self, NetError> {
        match name.to_ascii_lowercase().as_str() {
            "random" => Ok(TopologyShape::Random),
            "c" => Ok(Self::c_default()),
            "o" => Ok(Self::o_default()),
            "x" => Ok(Self::x_default()),
            other => Err(NetError::UnknownShape(other.to_string())),
        }
    }

    /// Canonical short name used in seeds, CSV rows, and the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            TopologyShape::Random => "random",
            TopologyShape::CShape { .. } => "c",
            TopologyShape::OShape { .. } => "o",
            TopologyShape::XShape { .. } => "x",
        }
    }

    /// Whether `p` satisfies the mask inside `area`.
    pub fn contains(&self, p: Point, area: Area) -> bool {
        if !area.contains(p) {
            return false;
        }
        let side = area.width.min(area.height);
        match *self {
            TopologyShape::Random => true,
            TopologyShape::CShape { notch_w_frac, notch_h_frac } => {
                let x0 = area.width * (1.0 - notch_w_frac);
                let y0 = area.height * (1.0 - notch_h_frac) / 2.0;
                let y1 = area.height * (1.0 + notch_h_frac) / 2.0;
                !(p.x >= x0 && p.y >= y0 && p.y <= y1)
            }
            TopologyShape::OShape { outer_frac, inner_frac } => {
                let r = p.dist(area.center());
                r <= outer_frac * side && r >= inner_frac * side
            }
            TopologyShape::XShape { half_width_frac } => {
                let (w, h) = (area.width, area.height);
                let norm = w.hypot(h);
                // Distances to the two diagonals (0,0)-(w,h) and (0,h)-(w,0).
                let d1 = (w * p.y - h * p.x).abs() / norm;
                let d2 = (h * p.x + w * p.y - w * h).abs() / norm;
                d1 <= half_width_frac * side || d2 <= half_width_frac * side
            }
        }
    }
}

/// Errors from network construction, generation, and file IO.
#[derive(Debug)]
pub enum NetError {
    /// The anchor/unknown partition is invalid (`0 < n_anchors < n` required).
    InvalidPartition { n: usize, n_anchors: usize },
    /// Non-positive radius.
    InvalidRadius(f64),
    /// Non-positive area dimensions.
    InvalidArea { width: f64, height: f64 },
    /// A node lies outside the declared area.
    OutOfArea { index: usize, x: f64, y: f64 },
    /// Unrecognized shape name.
    UnknownShape(String),
    /// Rejection sampling could not place a node within the attempt budget
    /// (degenerate mask such as an annulus with inner ≥ outer radius).
    MaskExhausted { node: usize, attempts: u32 },
    /// Underlying IO failure.
    Io(std::io::Error),
    /// Malformed network file.
    Parse(String),
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::InvalidPartition { n, n_anchors } => {
                write!(f, "invalid partition: {n_anchors} anchors of {n} nodes (need 0 < anchors < nodes)")
            }
            NetError::InvalidRadius(r) => write!(f, "radius must be positive, got {r}"),
            NetError::InvalidArea { width, height } => {
                write!(f, "area dimensions must be positive, got {width}×{height}")
            }
            NetError::OutOfArea { index, x, y } => {
                write!(f, "node {index} at ({x}, {y}) lies outside the declared area")
            }
            NetError::UnknownShape(s) => write!(f, "unknown shape '{s}' (expected random, c, o, or x)"),
            NetError::MaskExhausted { node, attempts } => {
                write!(f, "could not place node {node} after {attempts} attempts (degenerate shape mask)")
            }
            NetError::Io(e) => write!(f, "io error: {e}"),
            NetError::Parse(msg) => write!(f, "network file parse error: {msg}"),
        }
    }
}

impl std::error::Error for NetError {}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        NetError::Io(e)
    }
}

/// An immutable sensor network: positions, anchor partition, radio radius,
/// and deployment area.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    positions: Vec<Point>,
    n_anchors: usize,
    radius: f64,
    area: Area,
}

impl Network {
    /// Validates the invariants: `0 < n_anchors < n`, positive radius and
    /// area, every node inside the area.
    pub fn new(
        positions: Vec<Point>,
        n_anchors: usize,
        radius: f64,
        area: Area,
    ) -> Result<Self, NetError> {
        if area.width <= 0.0 || area.height <= 0.0 {
            return Err(NetError::InvalidArea { width: area.width, height: area.height });
        }
        if radius <= 0.0 {
            return Err(NetError::InvalidRadius(radius));
        }
        if n_anchors == 0 || n_anchors >= positions.len() {
            return Err(NetError::InvalidPartition { n: positions.len(), n_anchors });
        }
        for (index, p) in positions.iter().enumerate() {
            if !area.contains(*p) || !p.x.is_finite() || !p.y.is_finite() {
                return Err(NetError::OutOfArea { index, x: p.x, y: p.y });
            }
        }
        Ok(Network { positions, n_anchors, radius, area })
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of anchor nodes (the first `n_anchors` indices).
    pub fn n_anchors(&self) -> usize {
        self.n_anchors
    }

    /// Number of unknown nodes.
    pub fn n_unknowns(&self) -> usize {
        self.positions.len() - self.n_anchors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> Area {
        self.area
    }

    /// All node positions, anchors first.
    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Anchor positions (known coordinates).
    pub fn anchor_positions(&self) -> &[Point] {
        &self.positions[..self.n_anchors]
    }

    /// Ground-truth positions of the unknown nodes.
    pub fn unknown_positions(&self) -> &[Point] {
        &self.positions[self.n_anchors..]
    }
}

/// Attempts per node before generation gives up on a mask.
const MAX_PLACEMENT_ATTEMPTS: u32 = 10_000;

/// Generates `n` nodes uniformly over the shape mask by rejection sampling
/// over the area rectangle; the first `n_anchors` nodes are the anchors.
/// Deterministic for a fixed seed.
pub fn generate_network(
    shape: TopologyShape,
    n: usize,
    n_anchors: usize,
    radius: f64,
    area: Area,
    seed: u64,
) -> Result<Network, NetError> {
    if area.width <= 0.0 || area.height <= 0.0 {
        return Err(NetError::InvalidArea { width: area.width, height: area.height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n);
    for node in 0..n {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Point::new(
                rng.gen_range(0.0..=area.width),
                rng.gen_range(0.0..=area.height),
            );
            if shape.contains(p, area) {
                positions.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(NetError::MaskExhausted { node, attempts: MAX_PLACEMENT_ATTEMPTS });
        }
    }
    Network::new(positions, n_anchors, radius, area)
}

/// Serialized form of a network file.
#[derive(Serialize, Deserialize)]
struct NetworkFile {
    area: Area,
    radius: f64,
    n_anchors: usize,
    nodes: Vec<(f64, f64)>,
}

/// Writes a network to a structured-text file with full round-trip
/// precision on coordinates.
pub fn save_network(network: &Network, path: impl AsRef<Path>) -> Result<(), NetError> {
    let file = NetworkFile {
        area: network.area,
        radius: network.radius,
        n_anchors: network.n_anchors,
        nodes: network.positions.iter().map(|p| (p.x, p.y)).collect(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| NetError::Parse(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Loads a network file, validating the same invariants as [`Network::new`];
/// parse errors name the offending record.
pub fn load_network(path: impl AsRef<Path>) -> Result<Network, NetError> {
    let text = std::fs::read_to_string(path)?;
    let file: NetworkFile =
        serde_json::from_str(&text).map_err(|e| NetError::Parse(e.to_string()))?;
    let positions = file.nodes.iter().map(|&(x, y)| Point::new(x, y)).collect();
    Network::new(positions, file.n_anchors, file.radius, file.area)
}

/// Hop-count sentinel for disconnected pairs.
const UNREACHABLE: u32 = u32::MAX;

/// Symmetric matrix of minimum hop counts; disconnected pairs are
/// `None` through [`HopMatrix::get`].
#[derive(Debug, Clone, PartialEq)]
pub struct HopMatrix {
    n: usize,
    hops: Vec<u32>,
}

impl HopMatrix {
    fn unreachable(n: usize) -> Self {
        HopMatrix { n, hops: vec![UNREACHABLE; n * n] }
    }

    /// Number of nodes the matrix covers.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Minimum hop count between `i` and `j`, or `None` if unreachable.
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        match self.hops[i * self.n + j] {
            UNREACHABLE => None,
            h => Some(h),
        }
    }

    fn set(&mut self, i: usize, j: usize, h: u32) {
        self.hops[i * self.n + j] = h;
    }
}

/// All-pairs minimum hop counts for a network (BFS from every node over the
/// `distance ≤ R` adjacency graph).
pub fn hop_matrix(network: &Network) -> HopMatrix {
    hop_matrix_from_positions(network.positions(), network.radius())
}

/// All-pairs minimum hop counts for an arbitrary position list. Shared by
/// network construction and by predicted-hop evaluation of candidate
/// placements, so both sides use the identical edge predicate.
pub fn hop_matrix_from_positions(positions: &[Point], radius: f64) -> HopMatrix {
    let n = positions.len();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if positions[i].dist(positions[j]) <= radius {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }

    let mut matrix = HopMatrix::unreachable(n);
    let mut queue = VecDeque::new();
    for source in 0..n {
        matrix.set(source, source, 0);
        queue.clear();
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            let next = matrix.hops[source * n + u as usize] + 1;
            for &v in &adjacency[u as usize] {
                if matrix.hops[source * n + v as usize] == UNREACHABLE {
                    matrix.set(source, v as usize, next);
                    queue.push_back(v);
                }
            }
        }
    }
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_area() -> Area {
        Area::new(100.0, 100.0)
    }

    #[test]
    fn chain_hop_counts() {
        let pts = [Point::new(0.0, 0.0), Point::new(20.0, 0.0), Point::new(40.0, 0.0)];
        let hops = hop_matrix_from_positions(&pts, 25.0);
        let expected = [[0, 1, 2], [1, 0, 1], [2, 1, 0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(hops.get(i, j), Some(expected[i][j]));
            }
        }
    }

    #[test]
    fn boundary_distance_is_one_hop() {
        let pts = [Point::new(0.0, 0.0), Point::new(25.0, 0.0)];
        let hops = hop_matrix_from_positions(&pts, 25.0);
        assert_eq!(hops.get(0, 1), Some(1));
    }

    #[test]
    fn disconnected_pair_is_unreachable() {
        let pts = [Point::new(0.0, 0.0), Point::new(90.0, 90.0)];
        let hops = hop_matrix_from_positions(&pts, 25.0);
        assert_eq!(hops.get(0, 1), None);
        assert_eq!(hops.get(0, 0), Some(0));
    }

    #[test]
    fn generate_random_network() {
        let net = generate_network(TopologyShape::Random, 100, 20, 25.0, unit_area(), 7).unwrap();
        assert_eq!(net.len(), 100);
        assert_eq!(net.n_anchors(), 20);
        assert_eq!(net.n_unknowns(), 80);
        for p in net.positions() {
            assert!(unit_area().contains(*p));
        }
    }

    #[test]
    fn generate_minimal_network() {
        let net = generate_network(TopologyShape::Random, 2, 1, 25.0, unit_area(), 3).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.n_anchors(), 1);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_network(TopologyShape::Random, 50, 10, 25.0, unit_area(), 11).unwrap();
        let b = generate_network(TopologyShape::Random, 50, 10, 25.0, unit_area(), 11).unwrap();
        let c = generate_network(TopologyShape::Random, 50, 10, 25.0, unit_area(), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_o_mask_fails() {
        let shape = TopologyShape::OShape { outer_frac: 0.2, inner_frac: 0.5 };
        let err = generate_network(shape, 10, 2, 25.0, unit_area(), 1).unwrap_err();
        assert!(matches!(err, NetError::MaskExhausted { .. }));
    }

    #[test]
    fn shape_masks_hold_for_generated_nodes() {
        for shape in [
            TopologyShape::c_default(),
            TopologyShape::o_default(),
            TopologyShape::x_default(),
        ] {
            let net = generate_network(shape, 200, 20, 25.0, unit_area(), 5).unwrap();
            for p in net.positions() {
                assert!(shape.contains(*p, unit_area()), "{:?} violates {:?}", p, shape);
            }
        }
    }

    #[test]
    fn c_mask_excludes_notch() {
        let shape = TopologyShape::c_default();
        let area = unit_area();
        assert!(shape.contains(Point::new(10.0, 50.0), area)); // left spine
        assert!(shape.contains(Point::new(90.0, 90.0), area)); // upper arm
        assert!(!shape.contains(Point::new(70.0, 50.0), area)); // inside the notch
    }

    #[test]
    fn partition_invariants_rejected() {
        let pts = vec![Point::new(1.0, 1.0), Point::new(2.0, 2.0)];
        assert!(matches!(
            Network::new(pts.clone(), 0, 25.0, unit_area()),
            Err(NetError::InvalidPartition { .. })
        ));
        assert!(matches!(
            Network::new(pts, 2, 25.0, unit_area()),
            Err(NetError::InvalidPartition { .. })
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let net = generate_network(TopologyShape::Random, 100, 20, 25.0, unit_area(), 7).unwrap();
        let path = std::env::temp_dir().join("hoploc_net_roundtrip.json");
        save_network(&net, &path).unwrap();
        let loaded = load_network(&path).unwrap();
        assert_eq!(net, loaded);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn load_rejects_bad_anchor_count() {
        let path = std::env::temp_dir().join("hoploc_net_bad_anchors.json");
        std::fs::write(
            &path,
            r#"{"area":{"width":100.0,"height":100.0},"radius":25.0,"n_anchors":3,"nodes":[[1.0,1.0],[2.0,2.0],[3.0,3.0]]}"#,
        )
        .unwrap();
        let err = load_network(&path).unwrap_err();
        assert!(matches!(err, NetError::InvalidPartition { .. }));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn load_names_offending_out_of_area_record() {
        let path = std::env::temp_dir().join("hoploc_net_out_of_area.json");
        std::fs::write(
            &path,
            r#"{"area":{"width":100.0,"height":100.0},"radius":25.0,"n_anchors":1,"nodes":[[1.0,1.0],[200.0,5.0],[3.0,3.0]]}"#,
        )
        .unwrap();
        let err = load_network(&path).unwrap_err();
        match err {
            NetError::OutOfArea { index, .. } => assert_eq!(index, 1),
            other => panic!("expected OutOfArea, got {other}"),
        }
        assert!(err.to_string().contains("node 1"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn load_reports_malformed_file() {
        let path = std::env::temp_dir().join("hoploc_net_malformed.json");
        std::fs::write(&path, "{\"area\": oops").unwrap();
        let err = load_network(&path).unwrap_err();
        assert!(matches!(err, NetError::Parse(_)));
        std::fs::remove_file(&path).ok();
    }

    /// Independent O(N³) shortest-path oracle.
    fn floyd_warshall(positions: &[Point], radius: f64) -> Vec<Vec<Option<u32>>> {
        let n = positions.len();
        let inf = u64::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
            for j in 0..n {
                if i != j && positions[i].dist(positions[j]) <= radius {
                    d[i][j] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| if v >= inf { None } else { Some(v as u32) })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn hop_matrix_matches_floyd_warshall() {
        for seed in 0..20 {
            let net =
                generate_network(TopologyShape::Random, 30, 5, 25.0, unit_area(), seed).unwrap();
            let hops = hop_matrix(&net);
            let oracle = floyd_warshall(net.positions(), net.radius());
            for i in 0..30 {
                for j in 0..30 {
                    assert_eq!(hops.get(i, j), oracle[i][j], "seed {seed} pair ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn hop_matrix_symmetric_zero_diagonal() {
        let net = generate_network(TopologyShape::Random, 40, 8, 25.0, unit_area(), 2).unwrap();
        let hops = hop_matrix(&net);
        for i in 0..40 {
            assert_eq!(hops.get(i, i), Some(0));
            for j in 0..40 {
                assert_eq!(hops.get(i, j), hops.get(j, i));
            }
        }
    }

    #[test]
    fn reachable_distance_bounded_by_hops_times_radius() {
        let net = generate_network(TopologyShape::Random, 60, 10, 25.0, unit_area(), 9).unwrap();
        let hops = hop_matrix(&net);
        for i in 0..net.len() {
            for j in 0..net.len() {
                if let Some(h) = hops.get(i, j) {
                    let d = net.positions()[i].dist(net.positions()[j]);
                    assert!(d <= h as f64 * net.radius() + 1e-9);
                }
            }
        }
    }
}
