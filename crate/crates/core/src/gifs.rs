//! Generic verifier for graph-directed iterated function systems in the
//! plane: open set condition and linear condition on polygonal feasible
//! open sets, plus polyline approximation of arc-like attractors.
//!
//! The maps are input data loaded from JSON; the verifier checks that all
//! linear parts are contractions and the edge graph is strongly connected,
//! that the images of the feasible sets nest disjointly (open set
//! condition), and that per vertex the image pieces chain into a path
//! whose consecutive closures meet in single points (linear condition).
//! The attractor approximant orders depth-n pieces along that chain.

use serde_json::{json, Value};
use thiserror::Error;

use crate::num::scalar::DEFAULT_EPSILON;

#[derive(Debug, Error)]
pub enum GifsError {
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("depth budget exceeded: {0}")]
    DepthBudgetExceeded(String),
    #[error("linear condition does not hold; no arc ordering available")]
    NotLinear,
}

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub translation: Point,
}

impl AffineMap {
    pub fn apply(&self, p: Point) -> Point {
        [
            self.linear[0][0] * p[0] + self.linear[0][1] * p[1] + self.translation[0],
            self.linear[1][0] * p[0] + self.linear[1][1] * p[1] + self.translation[1],
        ]
    }

    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let a = &self.linear;
        let b = &inner.linear;
        AffineMap {
            linear: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            translation: self.apply(inner.translation),
        }
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        // eigenvalues of AᵀA
        let p = a * a + c * c;
        let q = a * b + c * d;
        let r = b * b + d * d;
        let mean = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + disc).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub map: AffineMap,
}

#[derive(Debug, Clone)]
pub struct GifsSystem {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

/// Candidate feasible open sets: one convex polygon (counterclockwise
/// vertex list; the open set is its interior) per graph vertex.
#[derive(Debug, Clone)]
pub struct FeasibleSets {
    pub polygons: Vec<Vec<Point>>,
}

impl GifsSystem {
    /// Validate contractivity of every edge map and strong connectivity of
    /// the edge graph.
    pub fn validate(&self) -> Result<(), GifsError> {
        if self.vertices == 0 {
            return Err(GifsError::Invalid("no vertices".into()));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.from >= self.vertices || e.to >= self.vertices {
                return Err(GifsError::Invalid(format!("edge {k} out of range")));
            }
            let norm = e.map.operator_norm();
            if norm >= 1.0 {
                return Err(GifsError::Invalid(format!(
                    "edge {k} is not contractive (operator norm {norm:.6})"
                )));
            }
        }
        let reach = |reverse: bool| -> usize {
            let mut seen = vec![false; self.vertices];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for e in &self.edges {
                    let (a, b) = if reverse { (e.to, e.from) } else { (e.from, e.to) };
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.iter().filter(|&&s| s).count()
        };
        if reach(false) != self.vertices || reach(true) != self.vertices {
            return Err(GifsError::Invalid("edge graph is not strongly connected".into()));
        }
        Ok(())
    }

    pub fn edges_from(&self, vertex: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].from == vertex)
            .collect()
    }

    /// Number of depth-`n` walks starting at `vertex` (transfer-matrix count).
    pub fn walk_count(&self, vertex: usize, depth: usize) -> u64 {
        let n = self.vertices;
        let mut counts = vec![vec![0u64; n]; n];
        for e in &self.edges {
            counts[e.from][e.to] += 1;
        }
        let mut row = vec![0u64; n];
        row[vertex] = 1;
        for _ in 0..depth {
            let mut next = vec![0u64; n];
            for (i, &c) in row.iter().enumerate() {
                if c > 0 {
                    for (j, &m) in counts[i].iter().enumerate() {
                        next[j] += c * m;
                    }
                }
            }
            row = next;
        }
        row.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Polygon helpers
// ---------------------------------------------------------------------------

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        acc += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    acc.abs() * 0.5
}

fn centroid(poly: &[Point]) -> Point {
    let n = poly.len() as f64;
    let mut c = [0.0, 0.0];
    for p in poly {
        c[0] += p[0];
        c[1] += p[1];
    }
    [c[0] / n, c[1] / n]
}

/// Signed distance of a point to a convex CCW polygon boundary: positive
/// outside, negative inside (approximate: max over edge half-planes).
fn signed_distance(poly: &[Point], p: Point) -> f64 {
    let n = poly.len();
    let mut max_d = f64::NEG_INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        // outward normal of a CCW edge is (ey, -ex)
        let d = ((p[0] - a[0]) * ey - (p[1] - a[1]) * ex) / len;
        max_d = max_d.max(d);
    }
    max_d
}

fn point_in_polygon(poly: &[Point], p: Point, eps: f64) -> bool {
    signed_distance(poly, p) <= eps
}

/// Convex polygon containment: every vertex of the inner polygon inside
/// the outer one (both convex).
fn polygon_contained(inner: &[Point], outer: &[Point], eps: f64) -> bool {
    inner.iter().all(|&p| point_in_polygon(outer, p, eps))
}

/// Sutherland-Hodgman clip of `subject` by convex CCW `clip`.
fn clip_polygon(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let inside = |p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let intersect = |p: Point, q: Point| -> Point {
            let dx = q[0] - p[0];
            let dy = q[1] - p[1];
            let denom = (b[0] - a[0]) * dy - (b[1] - a[1]) * dx;
            if denom.abs() < 1e-300 {
                return p;
            }
            let t = -((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / denom;
            [p[0] + t * dx, p[1] + t * dy]
        };
        let input = output.clone();
        output.clear();
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            if inside(cur) {
                if !inside(prev) {
                    output.push(intersect(prev, cur));
                }
                output.push(cur);
            } else if inside(prev) {
                output.push(intersect(prev, cur));
            }
        }
    }
    output
}

fn dist(p: Point, q: Point) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let abx = b[0] - a[0];
    let aby = b[1] - a[1];
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * abx, a[1] + t * aby])
}

/// Distance from a point to a convex polygon (0 when inside).
fn point_polygon_distance(p: Point, poly: &[Point]) -> f64 {
    if signed_distance(poly, p) <= 0.0 {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Minimal distance between two convex polygons (0 when they overlap).
fn polygon_distance(a: &[Point], b: &[Point], samples: usize) -> f64 {
    let mut best = f64::INFINITY;
    let walk = |poly: &[Point], other: &[Point], best: &mut f64| {
        let n = poly.len();
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                *best = best.min(point_polygon_distance(x, other));
            }
        }
    };
    walk(a, b, &mut best);
    walk(b, a, &mut best);
    best
}

/// Diameter of the contact set of two convex polygons: the farthest pair
/// of boundary points of either polygon lying within `tol` of the other.
fn contact_diameter(a: &[Point], b: &[Point], tol: f64, samples: usize) -> f64 {
    let mut contact: Vec<Point> = Vec::new();
    let collect = |poly: &[Point], other: &[Point], out: &mut Vec<Point>| {
        let n = poly.len();
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                if point_polygon_distance(x, other) <= tol {
                    out.push(x);
                }
            }
        }
    };
    collect(a, b, &mut contact);
    collect(b, a, &mut contact);
    let mut diam: f64 = 0.0;
    for i in 0..contact.len() {
        for j in i + 1..contact.len() {
            diam = diam.max(dist(contact[i], contact[j]));
        }
    }
    diam
}

// ---------------------------------------------------------------------------
// Open set condition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OscViolation {
    pub vertex: usize,
    pub kind: String,
    pub edges: (usize, usize),
    pub detail: f64,
}

#[derive(Debug, Clone)]
pub struct OscReport {
    pub pass: bool,
    pub violations: Vec<OscViolation>,
}

/// Check `⋃ f_e(U_{t(e)}) ⊆ U_i` with pairwise disjoint image interiors.
/// Containment allows boundary contact within `eps`; two images are
/// disjoint when their intersection area is at most `eps · min(areas)`.
pub fn verify_osc(sys: &GifsSystem, u: &FeasibleSets, eps: f64) -> Result<OscReport, GifsError> {
    sys.validate()?;
    if u.polygons.len() != sys.vertices {
        return Err(GifsError::Invalid("one feasible polygon per vertex required".into()));
    }
    for (i, poly) in u.polygons.iter().enumerate() {
        if poly.len() < 3 || polygon_area(poly) <= 0.0 {
            return Err(GifsError::Invalid(format!("polygon {i} is degenerate")));
        }
    }
    let mut violations = Vec::new();
    for i in 0..sys.vertices {
        let edges = sys.edges_from(i);
        let images: Vec<Vec<Point>> = edges
            .iter()
            .map(|&k| {
                u.polygons[sys.edges[k].to]
                    .iter()
                    .map(|&p| sys.edges[k].map.apply(p))
                    .collect()
            })
            .collect();
        for (idx, img) in images.iter().enumerate() {
            if !polygon_contained(img, &u.polygons[i], eps) {
                violations.push(OscViolation {
                    vertex: i,
                    kind: "image escapes feasible set".into(),
                    edges: (edges[idx], edges[idx]),
                    detail: img
                        .iter()
                        .map(|&p| signed_distance(&u.polygons[i], p))
                        .fold(f64::MIN, f64::max),
                });
            }
        }
        for x in 0..images.len() {
            for y in x + 1..images.len() {
                let inter = clip_polygon(&images[x], &images[y]);
                if inter.len() >= 3 {
                    let area = polygon_area(&inter);
                    let min_area = polygon_area(&images[x]).min(polygon_area(&images[y]));
                    if area > eps * min_area {
                        violations.push(OscViolation {
                            vertex: i,
                            kind: "image interiors overlap".into(),
                            edges: (edges[x], edges[y]),
                            detail: area,
                        });
                    }
                }
            }
        }
    }
    Ok(OscReport { pass: violations.is_empty(), violations })
}

// ---------------------------------------------------------------------------
// Linear condition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VertexChain {
    pub vertex: usize,
    /// Edge indices ordered along the path graph.
    pub order: Vec<usize>,
    /// Junction points between consecutive pieces.
    pub junctions: Vec<Point>,
    pub junction_diameters: Vec<f64>,
    pub pass: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LinearReport {
    pub pass: bool,
    pub chains: Vec<VertexChain>,
}

const EDGE_SAMPLES: usize = 256;

/// Check the linear condition: per vertex, the piece-adjacency graph (an
/// edge when image closures meet) must be a path, and each consecutive
/// pair must meet in a set of diameter at most `eps`.
pub fn verify_linear_condition(
    sys: &GifsSystem,
    u: &FeasibleSets,
    eps: f64,
) -> Result<LinearReport, GifsError> {
    sys.validate()?;
    let mut chains = Vec::new();
    let mut all_pass = true;
    for i in 0..sys.vertices {
        let edges = sys.edges_from(i);
        let images: Vec<Vec<Point>> = edges
            .iter()
            .map(|&k| {
                u.polygons[sys.edges[k].to]
                    .iter()
                    .map(|&p| sys.edges[k].map.apply(p))
                    .collect()
            })
            .collect();
        let n = images.len();
        let mut adjacency = vec![vec![false; n]; n];
        for x in 0..n {
            for y in x + 1..n {
                if polygon_distance(&images[x], &images[y], EDGE_SAMPLES) <= eps {
                    adjacency[x][y] = true;
                    adjacency[y][x] = true;
                }
            }
        }
        let chain = order_as_path(&adjacency);
        match chain {
            Some(order) if order.len() == n => {
                let mut junctions = Vec::new();
                let mut diameters = Vec::new();
                let mut ok = true;
                let mut reason = None;
                for w in order.windows(2) {
                    let a = &images[w[0]];
                    let b = &images[w[1]];
                    let diam = contact_diameter(a, b, eps, EDGE_SAMPLES);
                    diameters.push(diam);
                    if diam > eps {
                        ok = false;
                        reason = Some(format!(
                            "closures of pieces {} and {} meet in a set of diameter {diam:.3e}",
                            w[0], w[1]
                        ));
                    }
                    junctions.push(closest_pair_midpoint(a, b));
                }
                if !ok {
                    all_pass = false;
                }
                chains.push(VertexChain {
                    vertex: i,
                    order: order.iter().map(|&x| edges[x]).collect(),
                    junctions,
                    junction_diameters: diameters,
                    pass: ok,
                    reason,
                });
            }
            _ => {
                all_pass = false;
                chains.push(VertexChain {
                    vertex: i,
                    order: Vec::new(),
                    junctions: Vec::new(),
                    junction_diameters: Vec::new(),
                    pass: false,
                    reason: Some("piece-adjacency graph is not a path".into()),
                });
            }
        }
    }
    Ok(LinearReport { pass: all_pass, chains })
}

/// Order the nodes of an undirected graph into a Hamiltonian path when the
/// graph is exactly a path (all degrees <= 2, connected, acyclic).
fn order_as_path(adjacency: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = adjacency.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(vec![0]);
    }
    let degree: Vec<usize> = adjacency
        .iter()
        .map(|row| row.iter().filter(|&&b| b).count())
        .collect();
    if degree.iter().any(|&d| d > 2) {
        return None;
    }
    let endpoints: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    if endpoints.len() != 2 {
        return None;
    }
    let mut order = vec![endpoints[0]];
    let mut prev = usize::MAX;
    while order.len() < n {
        let cur = *order.last().unwrap();
        let next = (0..n).find(|&j| adjacency[cur][j] && j != prev)?;
        prev = cur;
        order.push(next);
    }
    // a cycle would have revisited a node; verify all distinct
    let mut seen = vec![false; n];
    for &x in &order {
        if seen[x] {
            return None;
        }
        seen[x] = true;
    }
    Some(order)
}

fn closest_pair_midpoint(a: &[Point], b: &[Point]) -> Point {
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let n = a.len();
    for i in 0..n {
        let p = a[i];
        let q = a[(i + 1) % n];
        for s in 0..=EDGE_SAMPLES {
            let t = s as f64 / EDGE_SAMPLES as f64;
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            let d = point_polygon_distance(x, b);
            if d < best.0 {
                best = (d, x);
            }
        }
    }
    best.1
}

// ---------------------------------------------------------------------------
// Attractor approximation
// ---------------------------------------------------------------------------

const MAX_DEPTH: usize = 16;
const MAX_PIECES: u64 = 1 << 22;

#[derive(Debug, Clone)]
pub struct Polyline {
    pub vertex: usize,
    pub points: Vec<Point>,
    pub piece_count: u64,
}

/// Approximate each attractor arc by the ordered junction polyline of all
/// depth-`n` pieces. Requires a passing linear condition (the chain
/// orders the pieces).
pub fn attractor_approx(
    sys: &GifsSystem,
    u: &FeasibleSets,
    depth: usize,
    eps: f64,
) -> Result<Vec<Polyline>, GifsError> {
    if depth > MAX_DEPTH {
        return Err(GifsError::DepthBudgetExceeded(format!(
            "depth {depth} exceeds {MAX_DEPTH}"
        )));
    }
    for i in 0..sys.vertices {
        let count = sys.walk_count(i, depth);
        if count > MAX_PIECES {
            return Err(GifsError::DepthBudgetExceeded(format!(
                "{count} pieces at vertex {i}"
            )));
        }
    }
    let report = verify_linear_condition(sys, u, eps)?;
    if !report.pass {
        return Err(GifsError::NotLinear);
    }
    let order_of: Vec<Vec<usize>> = report.chains.iter().map(|c| c.order.clone()).collect();

    // arc endpoints: fixed points of the extreme walk compositions
    let mut p_end: Vec<Point> = u.polygons.iter().map(|poly| centroid(poly)).collect();
    let mut q_end = p_end.clone();
    for _ in 0..200 {
        let prev_p: Vec<Point> = p_end.clone();
        let prev_q: Vec<Point> = q_end.clone();
        for i in 0..sys.vertices {
            let first = *order_of[i].first().expect("nonempty chain");
            let last = *order_of[i].last().expect("nonempty chain");
            p_end[i] = sys.edges[first].map.apply(prev_p[sys.edges[first].to]);
            q_end[i] = sys.edges[last].map.apply(prev_q[sys.edges[last].to]);
        }
    }

    // static sub-arc orientation per edge: does f_e map the child's p-end
    // onto the left end of its slot in the chain?
    let mut reversed_edge = vec![false; sys.edges.len()];
    for i in 0..sys.vertices {
        let order = &order_of[i];
        let mut left = p_end[i];
        for (slot, &k) in order.iter().enumerate() {
            let e = &sys.edges[k];
            let fp = e.map.apply(p_end[e.to]);
            let fq = e.map.apply(q_end[e.to]);
            let (near, far) = (dist(fp, left), dist(fq, left));
            reversed_edge[k] = far < near;
            let right = if reversed_edge[k] { fp } else { fq };
            let _ = slot;
            left = right;
        }
        // the chain must land on the other arc endpoint
        if dist(left, q_end[i]) > 1e-6 * (1.0 + dist(p_end[i], q_end[i])) {
            return Err(GifsError::NotLinear);
        }
    }

    let identity = AffineMap { linear: [[1.0, 0.0], [0.0, 1.0]], translation: [0.0, 0.0] };
    let mut out = Vec::with_capacity(sys.vertices);
    for i in 0..sys.vertices {
        let mut points = Vec::new();
        emit_arc(
            sys,
            &order_of,
            &reversed_edge,
            &p_end,
            &q_end,
            i,
            depth,
            false,
            &identity,
            &mut points,
        );
        let final_point = identity.apply(q_end[i]);
        points.push(final_point);
        out.push(Polyline {
            vertex: i,
            points,
            piece_count: sys.walk_count(i, depth),
        });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn emit_arc(
    sys: &GifsSystem,
    order_of: &[Vec<usize>],
    reversed_edge: &[bool],
    p_end: &[Point],
    q_end: &[Point],
    vertex: usize,
    depth: usize,
    reversed: bool,
    transform: &AffineMap,
    out: &mut Vec<Point>,
) {
    if depth == 0 {
        let start = if reversed { q_end[vertex] } else { p_end[vertex] };
        out.push(transform.apply(start));
        return;
    }
    let order = &order_of[vertex];
    let iter: Vec<usize> = if reversed {
        order.iter().rev().copied().collect()
    } else {
        order.clone()
    };
    for k in iter {
        let e = &sys.edges[k];
        let child_rev = reversed ^ reversed_edge[k];
        let composed = transform.compose(&e.map);
        emit_arc(
            sys,
            order_of,
            reversed_edge,
            p_end,
            q_end,
            e.to,
            depth - 1,
            child_rev,
            &composed,
            out,
        );
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

pub fn system_from_json(v: &Value) -> Result<(GifsSystem, FeasibleSets), GifsError> {
    let vertices = v
        .get("vertices")
        .and_then(Value::as_u64)
        .ok_or_else(|| GifsError::Invalid("vertices missing".into()))? as usize;
    let edges_json = v
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| GifsError::Invalid("edges missing".into()))?;
    let mut edges = Vec::with_capacity(edges_json.len());
    for (k, e) in edges_json.iter().enumerate() {
        let from = e.get("from").and_then(Value::as_u64).ok_or_else(|| {
            GifsError::Invalid(format!("edge {k}: from missing"))
        })? as usize;
        let to = e.get("to").and_then(Value::as_u64).ok_or_else(|| {
            GifsError::Invalid(format!("edge {k}: to missing"))
        })? as usize;
        let matrix = e
            .get("matrix")
            .and_then(Value::as_array)
            .ok_or_else(|| GifsError::Invalid(format!("edge {k}: matrix missing")))?;
        let get = |r: usize, c: usize| -> Result<f64, GifsError> {
            matrix
                .get(r)
                .and_then(Value::as_array)
                .and_then(|row| row.get(c))
                .and_then(Value::as_f64)
                .ok_or_else(|| GifsError::Invalid(format!("edge {k}: bad matrix")))
        };
        let translation = e
            .get("translation")
            .and_then(Value::as_array)
            .ok_or_else(|| GifsError::Invalid(format!("edge {k}: translation missing")))?;
        let t = |idx: usize| -> Result<f64, GifsError> {
            translation
                .get(idx)
                .and_then(Value::as_f64)
                .ok_or_else(|| GifsError::Invalid(format!("edge {k}: bad translation")))
        };
        edges.push(Edge {
            from,
            to,
            map: AffineMap {
                linear: [[get(0, 0)?, get(0, 1)?], [get(1, 0)?, get(1, 1)?]],
                translation: [t(0)?, t(1)?],
            },
        });
    }
    let polys_json = v
        .get("polygons")
        .and_then(Value::as_array)
        .ok_or_else(|| GifsError::Invalid("polygons missing".into()))?;
    let mut polygons = Vec::with_capacity(polys_json.len());
    for (i, poly) in polys_json.iter().enumerate() {
        let pts = poly
            .as_array()
            .ok_or_else(|| GifsError::Invalid(format!("polygon {i} must be an array")))?;
        let mut out = Vec::with_capacity(pts.len());
        for p in pts {
            let arr = p
                .as_array()
                .ok_or_else(|| GifsError::Invalid(format!("polygon {i}: bad point")))?;
            let x = arr.first().and_then(Value::as_f64);
            let y = arr.get(1).and_then(Value::as_f64);
            match (x, y) {
                (Some(x), Some(y)) => out.push([x, y]),
                _ => return Err(GifsError::Invalid(format!("polygon {i}: bad point"))),
            }
        }
        polygons.push(out);
    }
    Ok((GifsSystem { vertices, edges }, FeasibleSets { polygons }))
}

pub fn system_to_json(sys: &GifsSystem, u: &FeasibleSets) -> Value {
    json!({
        "vertices": sys.vertices,
        "edges": sys
            .edges
            .iter()
            .map(|e| {
                json!({
                    "from": e.from,
                    "to": e.to,
                    "matrix": e.map.linear,
                    "translation": e.map.translation,
                })
            })
            .collect::<Vec<_>>(),
        "polygons": u.polygons,
    })
}

/// The default tolerance used by the CLI for polygon predicates.
pub fn default_eps() -> f64 {
    DEFAULT_EPSILON
}
