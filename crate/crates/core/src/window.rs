//! Observation windows: disks and polygons that are star-shaped with respect
//! to the origin, together with the geometric functionals the asymptotic
//! constants are built from (chords, projections, set covariogram, and the
//! radial function of the difference body).
//!
//! Lines are parametrised as `g(p, φ) = {x : ⟨v(φ), x⟩ = p}` with the unit
//! normal `v(φ) = (cos φ, sin φ)`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate tolerance for polygon predicates.
pub const COORD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        Point2::new(self * p.x, self * p.y)
    }
}

/// A direction given by its angle, normalised to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    angle: f64,
}

impl Direction {
    pub fn new(angle: f64) -> Self {
        Direction {
            angle: normalize_angle(angle),
        }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    /// `v(φ) = (cos φ, sin φ)`.
    pub fn unit(self) -> Point2 {
        let (s, c) = self.angle.sin_cos();
        Point2::new(c, s)
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Config-level description of a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowSpec {
    Disk { radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl WindowSpec {
    pub fn build(&self) -> Result<Window> {
        match self {
            WindowSpec::Disk { radius } => Window::disk(*radius),
            WindowSpec::Polygon { vertices } => {
                Window::star_polygon(vertices.iter().map(|v| Point2::new(v[0], v[1])).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    /// Counter-clockwise vertices; the origin sees every edge from inside.
    StarPolygon { vertices: Vec<Point2>, convex: bool },
}

/// A horizontal slice of the window with flags marking endpoints that lie on
/// a curved part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSegment {
    pub lo: f64,
    pub hi: f64,
    pub lo_curved: bool,
    pub hi_curved: bool,
}

/// Compact window, star-shaped with respect to the origin, which is an
/// interior point. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    shape: Shape,
    area: f64,
    diameter: f64,
    outer_radius: f64,
    y_range: (f64, f64),
}

impl Window {
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("window.radius", "must be finite and positive"));
        }
        Ok(Window {
            shape: Shape::Disk { radius },
            area: PI * radius * radius,
            diameter: 2.0 * radius,
            outer_radius: radius,
            y_range: (-radius, radius),
        })
    }

    /// Builds a polygon window. Vertices may be given in either orientation;
    /// the polygon must be star-shaped with the origin strictly inside the
    /// kernel (every ray from the origin crosses the boundary exactly once).
    pub fn star_polygon(mut vertices: Vec<Point2>) -> Result<Self> {
        const FIELD: &str = "window.vertices";
        if vertices.len() < 3 {
            return Err(Error::invalid(FIELD, "a polygon needs at least three vertices"));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::invalid(FIELD, "coordinates must be finite"));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        let mut winding = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let cr = a.cross(b);
            if cr <= COORD_EPS * a.norm().max(b.norm()).max(1.0) {
                return Err(Error::invalid(
                    FIELD,
                    format!(
                        "not star-shaped about the origin with the origin in its interior (edge {i})"
                    ),
                ));
            }
            winding += cr.atan2(a.dot(b));
        }
        if (winding - TAU).abs() > 1e-6 {
            return Err(Error::invalid(
                FIELD,
                "boundary winds around the origin more than once",
            ));
        }
        let convex = (0..n).all(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -COORD_EPS
        });
        let area = signed_area(&vertices);
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let outer_radius = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let ymin = vertices.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
        let ymax = vertices.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);
        Ok(Window {
            shape: Shape::StarPolygon { vertices, convex },
            area,
            diameter,
            outer_radius,
            y_range: (ymin, ymax),
        })
    }

    /// The square `[-h, h]²`.
    pub fn square(half_side: f64) -> Result<Self> {
        let h = half_side;
        Window::star_polygon(vec![
            Point2::new(-h, -h),
            Point2::new(h, -h),
            Point2::new(h, h),
            Point2::new(-h, h),
        ])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `max_{x ∈ K} ‖x‖`.
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::Disk { .. })
    }

    /// The dilated window `ρK`.
    pub fn scaled(&self, rho: f64) -> Result<Window> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid("rho", "scale must be finite and positive"));
        }
        match &self.shape {
            Shape::Disk { radius } => Window::disk(radius * rho),
            Shape::StarPolygon { vertices, .. } => {
                Window::star_polygon(vertices.iter().map(|v| rho * *v).collect())
            }
        }
    }

    pub fn contains(&self, x: Point2) -> bool {
        match &self.shape {
            Shape::Disk { radius } => x.x * x.x + x.y * x.y <= radius * radius,
            Shape::StarPolygon { vertices, .. } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a.y <= x.y) != (b.y <= x.y) {
                        let t = (x.y - a.y) / (b.y - a.y);
                        if x.x < a.x + t * (b.x - a.x) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Length of `g(p, φ) ∩ K`. Sums the pieces when the intersection is not
    /// connected.
    pub fn chord_length(&self, p: f64, phi: f64) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => {
                let h = radius * radius - p * p;
                if h > 0.0 {
                    2.0 * h.sqrt()
                } else {
                    0.0
                }
            }
            Shape::StarPolygon { vertices, .. } => {
                let (s, c) = phi.sin_cos();
                let normal = Point2::new(c, s);
                let along = Point2::new(-s, c);
                let mut ts = Vec::with_capacity(4);
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let da = normal.dot(a) - p;
                    let db = normal.dot(b) - p;
                    if (da <= 0.0) != (db <= 0.0) {
                        let t = da / (da - db);
                        ts.push(along.dot(a + t * (b - a)));
                    }
                }
                paired_length(&mut ts)
            }
        }
    }

    /// `[ℓ(φ), r(φ)]`, the set of `p` for which `g(p, φ)` meets `K`.
    pub fn projection_interval(&self, phi: f64) -> (f64, f64) {
        match &self.shape {
            Shape::Disk { radius } => (-radius, *radius),
            Shape::StarPolygon { vertices, .. } => {
                let v = Direction::new(phi).unit();
                vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    let d = v.dot(*x);
                    (lo.min(d), hi.max(d))
                })
            }
        }
    }

    /// Set covariogram `|K ∩ (K + t)|₂`.
    pub fn covariogram(&self, t: Point2) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => lens_area(*radius, t.norm()),
            Shape::StarPolygon { vertices, convex } => {
                if *convex {
                    let shifted: Vec<Point2> = vertices.iter().map(|v| *v + t).collect();
                    polygon_area(&clip_convex(vertices, &shifted))
                } else {
                    let n = vertices.len();
                    let mut total = 0.0;
                    for i in 0..n {
                        let ti = [Point2::ORIGIN, vertices[i], vertices[(i + 1) % n]];
                        for j in 0..n {
                            let tj = [
                                t,
                                vertices[j] + t,
                                vertices[(j + 1) % n] + t,
                            ];
                            total += polygon_area(&clip_convex(&ti, &tj));
                        }
                    }
                    total
                }
            }
        }
    }

    /// `r_K(ψ) = max{r ≥ 0 : r v(ψ) ∈ K ⊕ (−K)}`.
    pub fn r_k(&self, psi: f64) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => 2.0 * radius,
            Shape::StarPolygon { vertices, convex } => {
                let dir = Direction::new(psi).unit();
                if *convex {
                    let mut diffs = Vec::with_capacity(vertices.len() * vertices.len());
                    for a in vertices {
                        for b in vertices {
                            diffs.push(*a - *b);
                        }
                    }
                    ray_exit(&convex_hull(diffs), dir)
                } else {
                    // K ⊕ (−K) is the union of the fan-triangle difference bodies,
                    // each a convex set containing the origin.
                    let n = vertices.len();
                    let mut best: f64 = 0.0;
                    for i in 0..n {
                        let ti = [Point2::ORIGIN, vertices[i], vertices[(i + 1) % n]];
                        for j in 0..n {
                            let tj = [Point2::ORIGIN, vertices[j], vertices[(j + 1) % n]];
                            let mut diffs = Vec::with_capacity(9);
                            for a in &ti {
                                for b in &tj {
                                    diffs.push(*a - *b);
                                }
                            }
                            best = best.max(ray_exit(&convex_hull(diffs), dir));
                        }
                    }
                    best
                }
            }
        }
    }

    /// `{x : (x, y) ∈ K}` as ordered disjoint intervals.
    pub fn scanline_intervals(&self, y: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.scan_segments(y, &mut out);
        out.into_iter().map(|s| (s.lo, s.hi)).collect()
    }

    pub(crate) fn scan_segments(&self, y: f64, out: &mut Vec<ScanSegment>) {
        out.clear();
        match &self.shape {
            Shape::Disk { radius } => {
                let h = radius * radius - y * y;
                if h > 0.0 {
                    let w = h.sqrt();
                    out.push(ScanSegment {
                        lo: -w,
                        hi: w,
                        lo_curved: true,
                        hi_curved: true,
                    });
                }
            }
            Shape::StarPolygon { vertices, .. } => {
                let n = vertices.len();
                let mut xs = Vec::with_capacity(4);
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a.y <= y) != (b.y <= y) {
                        let t = (y - a.y) / (b.y - a.y);
                        xs.push(a.x + t * (b.x - a.x));
                    }
                }
                xs.sort_by(f64::total_cmp);
                for pair in xs.chunks_exact(2) {
                    if pair[1] > pair[0] {
                        out.push(ScanSegment {
                            lo: pair[0],
                            hi: pair[1],
                            lo_curved: false,
                            hi_curved: false,
                        });
                    }
                }
            }
        }
    }

    /// Half-width of the curved boundary at height `y` (disk only, else 0).
    pub(crate) fn curved_half_width(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => (radius * radius - y * y).max(0.0).sqrt(),
            Shape::StarPolygon { .. } => 0.0,
        }
    }

    /// `∫_{y0}^{y1}` of [`Self::curved_half_width`].
    pub(crate) fn curved_half_width_integral(&self, y0: f64, y1: f64) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => {
                let r = *radius;
                let prim = |y: f64| {
                    let y = y.clamp(-r, r);
                    0.5 * (y * (r * r - y * y).max(0.0).sqrt() + r * r * (y / r).clamp(-1.0, 1.0).asin())
                };
                prim(y1) - prim(y0)
            }
            Shape::StarPolygon { .. } => 0.0,
        }
    }

    /// Heights at which the horizontal cross-section of `K` changes its
    /// combinatorial structure.
    pub(crate) fn structural_heights(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Disk { radius } => vec![-radius, *radius],
            Shape::StarPolygon { vertices, .. } => vertices.iter().map(|v| v.y).collect(),
        }
    }

    /// Heights where the line `x = a + b·y` crosses the boundary of `K`.
    pub(crate) fn line_boundary_heights(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        match &self.shape {
            Shape::Disk { radius } => {
                // (a + b y)² + y² = R²
                let qa = 1.0 + b * b;
                let qb = 2.0 * a * b;
                let qc = a * a - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    let q = -0.5 * (qb + qb.signum() * sq);
                    if q != 0.0 {
                        out.push(q / qa);
                        out.push(qc / q);
                    } else {
                        out.push(0.0);
                    }
                }
            }
            Shape::StarPolygon { vertices, .. } => {
                let n = vertices.len();
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let fp = p.x - b * p.y - a;
                    let fq = q.x - b * q.y - a;
                    if (fp <= 0.0) != (fq <= 0.0) {
                        let t = fp / (fp - fq);
                        out.push(p.y + t * (q.y - p.y));
                    }
                }
            }
        }
    }
}

/// Area of the intersection of two disks of radius `r` at center distance `d`.
pub fn lens_area(r: f64, d: f64) -> f64 {
    if d >= 2.0 * r {
        return 0.0;
    }
    let half = 0.5 * d;
    2.0 * r * r * (half / r).acos() - half * (4.0 * r * r - d * d).sqrt()
}

fn paired_length(ts: &mut [f64]) -> f64 {
    ts.sort_by(f64::total_cmp);
    ts.chunks_exact(2).map(|p| p[1] - p[0]).sum()
}

pub(crate) fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

fn polygon_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        0.0
    } else {
        signed_area(poly).abs()
    }
}

/// Sutherland–Hodgman clip of `subject` by the convex counter-clockwise `clip`.
pub(crate) fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output: Vec<Point2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let edge = b - a;
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let cur_in = edge.cross(cur - a) >= 0.0;
            let prev_in = edge.cross(prev - a) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(segment_line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(segment_line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

fn segment_line_intersection(p: Point2, q: Point2, a: Point2, b: Point2) -> Point2 {
    let edge = b - a;
    let dp = edge.cross(p - a);
    let dq = edge.cross(q - a);
    let t = dp / (dp - dq);
    p + t * (q - p)
}

/// Counter-clockwise convex hull (Andrew's monotone chain).
pub(crate) fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() <= COORD_EPS && (a.y - b.y).abs() <= COORD_EPS);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - b) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Largest `r` with `r·dir` inside the convex CCW polygon `hull` that
/// contains the origin.
fn ray_exit(hull: &[Point2], dir: Point2) -> f64 {
    let n = hull.len();
    if n < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let e = b - a;
        // Outward normal of a CCW edge.
        let normal = Point2::new(e.y, -e.x);
        let offset = normal.dot(a).max(0.0);
        let rate = normal.dot(dir);
        if rate > 0.0 {
            best = best.min(offset / rate);
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Window {
        Window::square(1.0).unwrap()
    }

    /// An L-free "arrow" that is star-shaped about the origin but not convex.
    fn notched() -> Window {
        Window::star_polygon(vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 0.3),
            Point2::new(-1.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn disk_chords() {
        let k = Window::disk(1.0).unwrap();
        assert!((k.chord_length(0.0, 0.7) - 2.0).abs() < 1e-15);
        assert!((k.chord_length(0.6, 1.3) - 1.6).abs() < 1e-12);
        assert_eq!(k.chord_length(1.5, 0.2), 0.0);
    }

    #[test]
    fn disk_chord_matches_point_sampling_along_the_line() {
        let k = Window::disk(1.0).unwrap();
        let (p, phi) = (0.6, 0.9);
        let v = Direction::new(phi).unit();
        let u = Point2::new(-v.y, v.x);
        let n = 200_000;
        let span = 4.0;
        let hits = (0..n)
            .filter(|i| {
                let t = -2.0 + span * (*i as f64 + 0.5) / n as f64;
                k.contains(p * v + t * u)
            })
            .count();
        let est = span * hits as f64 / n as f64;
        assert!((est - 1.6).abs() < 1e-4, "{est}");
    }

    #[test]
    fn projection_intervals() {
        assert_eq!(Window::disk(1.0).unwrap().projection_interval(0.3), (-1.0, 1.0));
        assert_eq!(Window::disk(3.0).unwrap().projection_interval(2.0), (-3.0, 3.0));
        let (lo, hi) = unit_square().projection_interval(PI / 4.0);
        assert!((lo + 2f64.sqrt()).abs() < 1e-12 && (hi - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn square_projection_matches_boundary_sampling() {
        let k = unit_square();
        for phi in [0.1, 0.7, 2.0, 3.0] {
            let v = Direction::new(phi).unit();
            let mut hi = f64::NEG_INFINITY;
            for i in 0..4000 {
                let s = -1.0 + 2.0 * i as f64 / 3999.0;
                for b in [
                    Point2::new(s, -1.0),
                    Point2::new(s, 1.0),
                    Point2::new(-1.0, s),
                    Point2::new(1.0, s),
                ] {
                    hi = hi.max(v.dot(b));
                }
            }
            assert!((k.projection_interval(phi).1 - hi).abs() < 1e-9);
        }
    }

    #[test]
    fn disk_covariogram_values() {
        let k = Window::disk(1.0).unwrap();
        assert!((k.covariogram(Point2::ORIGIN) - PI).abs() < 1e-15);
        assert_eq!(k.covariogram(Point2::new(2.5, 0.0)), 0.0);
        // d = 1: 2 acos(1/2) - (1/2)√3
        let expected = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((k.covariogram(Point2::new(0.6, 0.8)) - expected).abs() < 1e-14);
    }

    #[test]
    fn disk_lens_matches_hit_or_miss() {
        // Deterministic low-discrepancy grid in the bounding box of K.
        let k = Window::disk(1.0).unwrap();
        let t = Point2::new(0.9, 0.4);
        let shifted = |x: Point2| k.contains(x - t);
        let n = 3000;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = Point2::new(
                    -1.0 + 2.0 * (i as f64 + 0.5) / n as f64,
                    -1.0 + 2.0 * (j as f64 + 0.5) / n as f64,
                );
                if k.contains(x) && shifted(x) {
                    hits += 1;
                }
            }
        }
        let est = 4.0 * hits as f64 / (n * n) as f64;
        assert!((est - k.covariogram(t)).abs() < 2e-3, "{est} vs {}", k.covariogram(t));
    }

    #[test]
    fn square_covariogram_is_product_of_overlaps() {
        let k = unit_square();
        let c = k.covariogram(Point2::new(0.5, -0.25));
        assert!((c - 1.5 * 1.75).abs() < 1e-12);
        assert_eq!(k.covariogram(Point2::new(2.5, 0.0)), 0.0);
    }

    #[test]
    fn nonconvex_covariogram_agrees_at_zero_and_with_grid() {
        let k = notched();
        assert!((k.covariogram(Point2::ORIGIN) - k.area()).abs() < 1e-12);
        let t = Point2::new(0.3, -0.2);
        let n = 1500;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = Point2::new(
                    -1.0 + 2.0 * (i as f64 + 0.5) / n as f64,
                    -1.0 + 2.0 * (j as f64 + 0.5) / n as f64,
                );
                if k.contains(x) && k.contains(x - t) {
                    hits += 1;
                }
            }
        }
        let est = 4.0 * hits as f64 / (n * n) as f64;
        assert!((est - k.covariogram(t)).abs() < 5e-3, "{est} vs {}", k.covariogram(t));
    }

    #[test]
    fn r_k_values() {
        assert_eq!(Window::disk(1.0).unwrap().r_k(0.4), 2.0);
        assert_eq!(Window::disk(2.5).unwrap().r_k(0.4), 5.0);
        assert!((unit_square().r_k(0.0) - 2.0).abs() < 1e-12);
        assert!((unit_square().r_k(PI / 4.0) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn r_k_matches_covariogram_support_by_bisection() {
        for k in [unit_square(), notched()] {
            for psi in [0.0, 0.3, 1.1, 2.5] {
                let v = Direction::new(psi).unit();
                let (mut lo, mut hi) = (0.0, 2.0 * k.diameter());
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if k.covariogram(mid * v) > 1e-14 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                assert!((k.r_k(psi) - lo).abs() < 1e-6, "psi={psi}: {} vs {lo}", k.r_k(psi));
            }
        }
    }

    #[test]
    fn scanlines() {
        let k = Window::disk(1.0).unwrap();
        assert_eq!(k.scanline_intervals(0.0), vec![(-1.0, 1.0)]);
        let s = k.scanline_intervals(0.8);
        assert_eq!(s.len(), 1);
        assert!((s[0].0 + 0.6).abs() < 1e-12 && (s[0].1 - 0.6).abs() < 1e-12);
        assert!(k.scanline_intervals(1.2).is_empty());
        assert_eq!(notched().scanline_intervals(0.8).len(), 2);
    }

    #[test]
    fn rejects_invalid_windows() {
        assert!(Window::disk(0.0).is_err());
        assert!(Window::disk(f64::NAN).is_err());
        // Origin outside.
        let off = vec![
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 1.0),
            Point2::new(2.0, 2.0),
        ];
        assert!(Window::star_polygon(off).is_err());
        // Origin on the boundary.
        let edge = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(Window::star_polygon(edge).is_err());
        // Not star-shaped about the origin: a spiral-like zigzag.
        let zig = vec![
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -1.0),
            Point2::new(0.5, 0.2),
            Point2::new(0.9, -0.5),
        ];
        assert!(Window::star_polygon(zig).is_err());
    }

    #[test]
    fn clockwise_input_is_accepted() {
        let cw = vec![
            Point2::new(-1.0, -1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, -1.0),
        ];
        let k = Window::star_polygon(cw).unwrap();
        assert!((k.area() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn direction_normalises() {
        let d = Direction::new(-0.5);
        assert!((d.angle() - (TAU - 0.5)).abs() < 1e-15);
        assert!((d.unit().norm() - 1.0).abs() < 1e-12);
    }
}
