//! Planar geometry over simple polygons: ego footprints, boundary distance
//! and containment in a union of polygons.
//!
//! Classification tolerance is [`GEOM_TOL`] meters throughout.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EgoDims, EgoState};

/// Distances at or below this value count as touching.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("edges {0} and {1} intersect; polygon is not simple")]
    NotSimple(usize, usize),
    #[error("vertices must be in counter-clockwise order (signed area {0})")]
    NotCounterClockwise(f64),
}

/// A simple polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Polygon {
    type Error = PolygonError;

    fn try_from(v: Vec<Point>) -> Result<Self, Self::Error> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if let Some(i) = vertices
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(PolygonError::NonFinite(i));
        }
        let poly = Polygon { vertices };
        for i in 0..n {
            // Zero-length edges and edges folding back onto their predecessor.
            let prev = poly.vertices[(i + n - 1) % n];
            let cur = poly.vertices[i];
            let next = poly.vertices[(i + 1) % n];
            let (u, w) = (prev.sub(cur), next.sub(cur));
            let folded = u.cross(w).abs() <= GEOM_TOL * u.norm().max(w.norm()) && u.dot(w) > 0.0;
            if u.norm() <= GEOM_TOL || w.norm() <= GEOM_TOL || folded {
                return Err(PolygonError::NotSimple((i + n - 1) % n, i));
            }
        }
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a0, a1) = poly.edge(i);
                let (b0, b1) = poly.edge(j);
                if segments_intersect(a0, a1, b0, b1) {
                    return Err(PolygonError::NotSimple(i, j));
                }
            }
        }
        let area = poly.signed_area();
        if area <= 0.0 {
            return Err(PolygonError::NotCounterClockwise(area));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, PolygonError> {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(|i| self.edge(i))
    }

    /// Shoelace area, positive for counter-clockwise order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let a = self.signed_area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    pub fn translate(&self, d: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|p| p.add(d)).collect(),
        }
    }

    /// Closed containment test (boundary points count as inside).
    pub fn contains_point(&self, p: Point) -> bool {
        if self
            .edges()
            .any(|(a, b)| point_segment_distance(p, a, b) <= GEOM_TOL)
        {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn y_range(&self) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.y), hi.max(p.y))
            })
    }

    /// Intervals where the horizontal line at `y` meets the polygon interior.
    /// `y` must not coincide with a vertex ordinate.
    fn scanline(&self, y: f64) -> Vec<(f64, f64)> {
        let mut xs: Vec<f64> = self
            .edges()
            .filter(|(a, b)| (a.y > y) != (b.y > y))
            .map(|(a, b)| a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    point_segment_distance(p, a, b) <= GEOM_TOL
}

/// Closed segment intersection, touching included.
pub fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a0, b0, b1) || on_segment(a1, b0, b1) || on_segment(b0, a0, a1) || on_segment(b1, a0, a1)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

pub fn segment_distance(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    if segments_intersect(a0, a1, b0, b1) {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

/// Oriented `length × width` rectangle centred on the pose, long side along
/// the heading.
pub fn footprint(state: &EgoState, dims: &EgoDims) -> Polygon {
    let (s, c) = state.heading.sin_cos();
    let (hl, hw) = (dims.length / 2.0, dims.width / 2.0);
    let corner = |lx: f64, ly: f64| Point::new(state.x + c * lx - s * ly, state.y + s * lx + c * ly);
    Polygon {
        vertices: vec![
            corner(hl, -hw),
            corner(hl, hw),
            corner(-hl, hw),
            corner(-hl, -hw),
        ],
    }
}

/// Minimum Euclidean distance between two polygons, zero when they overlap
/// or touch.
pub fn min_distance(a: &Polygon, b: &Polygon) -> f64 {
    let mut best = f64::INFINITY;
    for (a0, a1) in a.edges() {
        for (b0, b1) in b.edges() {
            best = best.min(segment_distance(a0, a1, b0, b1));
            if best <= GEOM_TOL {
                return 0.0;
            }
        }
    }
    // Disjoint boundaries: either nested or separated.
    if a.contains_point(b.vertices[0]) || b.contains_point(a.vertices[0]) {
        return 0.0;
    }
    best
}

/// Whether `inner` lies entirely inside the union of `outer`.
///
/// The plane is cut into horizontal slabs at every vertex ordinate and every
/// pairwise edge crossing. No edges cross inside a slab, so the order of edge
/// abscissae is fixed there and one scanline per slab decides coverage for
/// the whole slab.
pub fn contained(inner: &Polygon, outer: &[Polygon]) -> bool {
    let (y_lo, y_hi) = inner.y_range();
    let relevant: Vec<&Polygon> = outer
        .iter()
        .filter(|p| {
            let (lo, hi) = p.y_range();
            hi >= y_lo - GEOM_TOL && lo <= y_hi + GEOM_TOL
        })
        .collect();
    if relevant.is_empty() {
        return false;
    }

    let mut cuts: Vec<f64> = inner.vertices.iter().map(|p| p.y).collect();
    let mut all_edges: Vec<(Point, Point)> = inner.edges().collect();
    for p in &relevant {
        cuts.extend(p.vertices.iter().map(|v| v.y));
        all_edges.extend(p.edges());
    }
    for i in 0..all_edges.len() {
        for j in i + 1..all_edges.len() {
            if let Some(y) = crossing_ordinate(all_edges[i], all_edges[j]) {
                cuts.push(y);
            }
        }
    }
    cuts.retain(|&y| y >= y_lo && y <= y_hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

    for w in cuts.windows(2) {
        if w[1] - w[0] <= 1e-12 {
            continue;
        }
        let y = 0.5 * (w[0] + w[1]);
        let mut cover: Vec<(f64, f64)> = relevant.iter().flat_map(|p| p.scanline(y)).collect();
        cover.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in cover {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + GEOM_TOL => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        for (lo, hi) in inner.scanline(y) {
            let covered = merged
                .iter()
                .any(|&(c0, c1)| c0 <= lo + GEOM_TOL && c1 >= hi - GEOM_TOL);
            if !covered {
                return false;
            }
        }
    }
    true
}

/// Ordinate of a proper crossing between two segments, if any.
fn crossing_ordinate((a0, a1): (Point, Point), (b0, b1): (Point, Point)) -> Option<f64> {
    let r = a1.sub(a0);
    let s = b1.sub(b0);
    let denom = r.cross(s);
    if denom.abs() < 1e-15 {
        return None;
    }
    let qp = b0.sub(a0);
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(a0.y + t * r.y)
    } else {
        None
    }
}
