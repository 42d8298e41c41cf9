//! Strip unions restricted to a scaled window, and their exact area.
//!
//! The default area method cuts the window into horizontal slabs at every
//! height where the cross-section can change combinatorially: window
//! vertices, crossings of strip edges with each other inside the window and
//! with the window boundary, and edges of near-horizontal strips. Inside a
//! slab the covered length is affine in `y` plus a multiple of the disk
//! half-width, so one midpoint evaluation per slab integrates it exactly.
//! An adaptive Gauss–Kronrod integration over scanlines is kept as a second,
//! independent method.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{GroundProcess, StripSample};
use crate::marks::{OrientationModel, RadiusModel};
use crate::quad::{integrate_with_breaks, QuadSpec};
use crate::window::{Point2, ScanSegment, Window};

/// `|cos φ|` at or below this is treated as a horizontal strip.
pub const HORIZONTAL_EPS: f64 = 1e-9;

/// `{x : |⟨v(φ), x⟩ − p| ≤ r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub p: f64,
    pub phi: f64,
    pub r: f64,
}

/// Intersection of a strip with a horizontal line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slice {
    Empty,
    Interval(f64, f64),
    Full,
}

impl Strip {
    pub fn contains(&self, x: Point2) -> bool {
        let (s, c) = self.phi.sin_cos();
        (x.x * c + x.y * s - self.p).abs() <= self.r
    }

    pub fn horizontal_slice(&self, y: f64) -> Slice {
        let (s, c) = self.phi.sin_cos();
        let off = self.p - y * s;
        if c.abs() > HORIZONTAL_EPS {
            let a = (off - self.r) / c;
            let b = (off + self.r) / c;
            Slice::Interval(a.min(b), a.max(b))
        } else if off.abs() <= self.r {
            Slice::Full
        } else {
            Slice::Empty
        }
    }
}

/// How `area_in_window` integrates over scanlines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanlineSpec {
    /// Slab decomposition; exact up to rounding.
    #[default]
    Exact,
    /// Adaptive Gauss–Kronrod over `y`, capped at `max_ordinates` scanlines.
    Adaptive {
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
        #[serde(default = "default_max_ordinates")]
        max_ordinates: usize,
    },
}

fn default_rel_tol() -> f64 {
    1e-6
}

fn default_max_ordinates() -> usize {
    400_000
}

impl ScanlineSpec {
    pub fn validate(&self) -> Result<()> {
        if let ScanlineSpec::Adaptive { rel_tol, max_ordinates } = *self {
            if !(rel_tol.is_finite() && rel_tol > 0.0) {
                return Err(Error::invalid("quadrature.rel_tol", "must be finite and positive"));
            }
            if max_ordinates < 15 {
                return Err(Error::invalid("quadrature.max_ordinates", "must be at least 15"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaResult {
    pub area: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Scanlines evaluated (slabs for the exact method).
    pub ordinates: usize,
    pub converged: bool,
}

/// A strip union together with the scaled window `ρK`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderRealization {
    pub strips: Vec<Strip>,
    window: Window,
    rho: f64,
    truncation: f64,
}

/// `ρ · R_out(K) + r_max`: strips with `|p|` beyond this cannot reach `ρK`.
pub fn truncation_half_range(window: &Window, rho: f64, r_max: f64) -> f64 {
    rho * window.outer_radius() + r_max
}

/// Samples `Ξ` on `ρK`.
pub fn build_realization<R: Rng + ?Sized>(
    ground: &GroundProcess,
    radius: &RadiusModel,
    orientation: &OrientationModel,
    window: &Window,
    rho: f64,
    rng: &mut R,
) -> Result<CylinderRealization> {
    if !(rho.is_finite() && rho >= 1.0) {
        return Err(Error::invalid("rho", "must be finite and at least 1"));
    }
    let m = truncation_half_range(window, rho, radius.r_max());
    let sample = StripSample::draw(ground, radius, orientation, m, rng)?;
    let mut real = CylinderRealization::new(sample.strips, window, rho)?;
    real.truncation = m;
    Ok(real)
}

impl CylinderRealization {
    /// `window` is the unscaled `K`.
    pub fn new(strips: Vec<Strip>, window: &Window, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid("rho", "must be finite and positive"));
        }
        let r_max = strips.iter().map(|s| s.r).fold(0.0, f64::max);
        Ok(CylinderRealization {
            strips,
            window: window.scaled(rho)?,
            rho,
            truncation: truncation_half_range(window, rho, r_max),
        })
    }

    /// The scaled window `ρK`.
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn is_covered(&self, x: Point2) -> bool {
        self.strips.iter().any(|s| s.contains(x))
    }

    fn meets_window(&self, s: &Strip) -> bool {
        let (lo, hi) = self.window.projection_interval(s.phi);
        s.p - s.r <= hi && s.p + s.r >= lo
    }

    /// Covered length of the scanline at height `y` inside `ρK`.
    pub fn scanline_length(&self, y: f64) -> f64 {
        let mut segs = Vec::new();
        self.window.scan_segments(y, &mut segs);
        if segs.is_empty() {
            return 0.0;
        }
        let mut ivs = Vec::new();
        for s in &self.strips {
            match s.horizontal_slice(y) {
                Slice::Empty => {}
                Slice::Full => return segs.iter().map(|g| g.hi - g.lo).sum(),
                Slice::Interval(a, b) => ivs.push((a, b)),
            }
        }
        ivs.sort_by(|u, v| u.0.total_cmp(&v.0));
        let mut cov = Coverage::new(&segs);
        let mut it = ivs.into_iter();
        if let Some((mut lo, mut hi)) = it.next() {
            for (a, b) in it {
                if a > hi {
                    cov.run(lo, hi);
                    lo = a;
                    hi = b;
                } else {
                    hi = hi.max(b);
                }
            }
            cov.run(lo, hi);
        }
        cov.length
    }

    pub fn area_in_window(&self, spec: &ScanlineSpec) -> Result<AreaResult> {
        spec.validate()?;
        let res = match *spec {
            ScanlineSpec::Exact => self.area_exact(),
            ScanlineSpec::Adaptive { rel_tol, max_ordinates } => self.area_adaptive(rel_tol, max_ordinates),
        };
        Ok(AreaResult {
            area: res.area.clamp(0.0, self.window.area()),
            ..res
        })
    }

    fn area_adaptive(&self, rel_tol: f64, max_ordinates: usize) -> AreaResult {
        let (ylo, yhi) = self.window.y_range();
        let mut breaks = vec![ylo, yhi];
        breaks.extend(self.window.structural_heights());
        for s in &self.strips {
            let (sn, c) = s.phi.sin_cos();
            if c.abs() <= HORIZONTAL_EPS {
                breaks.push((s.p - s.r) / sn);
                breaks.push((s.p + s.r) / sn);
            }
        }
        breaks.retain(|y| *y >= ylo && *y <= yhi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let q = QuadSpec {
            rel_tol,
            abs_tol: 1e-13 * self.window.area(),
            max_evals: max_ordinates,
            ..QuadSpec::default()
        };
        let r = integrate_with_breaks(|y| self.scanline_length(y), &breaks, &q);
        AreaResult {
            area: r.value,
            error: r.error,
            ordinates: r.evaluations,
            converged: r.converged,
        }
    }

    fn area_exact(&self) -> AreaResult {
        let w = &self.window;
        let (ylo, yhi) = w.y_range();
        let mut lines: Vec<Line> = Vec::new();
        let mut bands: Vec<(f64, f64)> = Vec::new();
        for (k, s) in self.strips.iter().enumerate() {
            if !self.meets_window(s) {
                continue;
            }
            let (sn, c) = s.phi.sin_cos();
            if c.abs() > HORIZONTAL_EPS {
                let a1 = (s.p - s.r) / c;
                let a2 = (s.p + s.r) / c;
                let b = -sn / c;
                lines.push(Line { a: a1.min(a2), b, strip: k, delta: 1 });
                lines.push(Line { a: a1.max(a2), b, strip: k, delta: -1 });
            } else {
                let y1 = (s.p - s.r) / sn;
                let y2 = (s.p + s.r) / sn;
                bands.push((y1.min(y2), y1.max(y2)));
            }
        }

        let mut ys = w.structural_heights();
        ys.push(ylo);
        ys.push(yhi);
        for l in &lines {
            w.line_boundary_heights(l.a, l.b, &mut ys);
        }
        for &(lo, hi) in &bands {
            ys.push(lo);
            ys.push(hi);
        }
        // Only crossings inside the circumscribed disk can change the
        // cross-section of the window.
        let r_out = w.outer_radius() * (1.0 + 1e-9);
        let r2 = r_out * r_out;
        for (i, li) in lines.iter().enumerate() {
            for lj in &lines[i + 1..] {
                if li.strip == lj.strip {
                    continue;
                }
                let db = li.b - lj.b;
                if db == 0.0 {
                    continue;
                }
                let y = (lj.a - li.a) / db;
                if !(y > ylo && y < yhi) {
                    continue;
                }
                let x = li.a + li.b * y;
                if x * x + y * y <= r2 {
                    ys.push(y);
                }
            }
        }
        ys.retain(|y| *y >= ylo && *y <= yhi);
        ys.sort_by(f64::total_cmp);
        ys.dedup();

        // Lines kept in x-order at the previous slab, so each re-sort is
        // nearly linear.
        let mut live: Vec<Edge> = lines
            .iter()
            .map(|l| Edge { x: 0.0, a: l.a, b: l.b, delta: l.delta })
            .collect();
        let mut segs: Vec<ScanSegment> = Vec::new();
        let mut total = 0.0;
        let mut slabs = 0usize;
        for win in ys.windows(2) {
            let (y0, y1) = (win[0], win[1]);
            let h = y1 - y0;
            if h <= 0.0 {
                continue;
            }
            let ym = 0.5 * (y0 + y1);
            w.scan_segments(ym, &mut segs);
            if segs.is_empty() {
                continue;
            }
            slabs += 1;
            let banded = bands.iter().any(|&(lo, hi)| ym >= lo && ym <= hi);
            let (len, curved) = if banded {
                let len = segs.iter().map(|g| g.hi - g.lo).sum();
                let curved = segs.iter().map(|g| g.lo_curved as usize + g.hi_curved as usize).sum();
                (len, curved)
            } else {
                for e in live.iter_mut() {
                    e.x = e.a + e.b * ym;
                }
                insertion_sort(&mut live);
                let right_end = segs[segs.len() - 1].hi;
                let mut cov = Coverage::new(&segs);
                let mut depth = 0i32;
                let mut start = 0.0;
                for e in &live {
                    let before = depth;
                    depth += e.delta;
                    if before <= 0 && depth > 0 {
                        if e.x >= right_end {
                            break;
                        }
                        start = e.x;
                    } else if before > 0 && depth <= 0 {
                        cov.run(start, e.x);
                    }
                }
                (cov.length, cov.curved)
            };
            let c = curved as f64;
            total += h * (len - c * w.curved_half_width(ym)) + c * w.curved_half_width_integral(y0, y1);
        }
        AreaResult {
            area: total,
            error: f64::EPSILON * (slabs.max(1) as f64) * w.area(),
            ordinates: slabs,
            converged: true,
        }
    }

    /// One `p φ r` line per strip, preceded by `#` header lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("# rho {}\n# truncation {}\n", self.rho, self.truncation);
        for s in &self.strips {
            let _ = writeln!(out, "{:e} {:e} {:e}", s.p, s.phi, s.r);
        }
        out
    }
}

/// Parses the strip lines of [`CylinderRealization::to_text`]; `#` lines and
/// blank lines are skipped.
pub fn parse_strips(text: &str) -> Result<Vec<Strip>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::invalid(format!("line {}", n + 1), format!("{e}")))?;
        if vals.len() != 3 {
            return Err(Error::invalid(format!("line {}", n + 1), "expected `p phi r`"));
        }
        out.push(Strip { p: vals[0], phi: vals[1], r: vals[2] });
    }
    Ok(out)
}

/// Boundary line `x = a + b·y` of a strip; `delta` is +1 on the left edge.
#[derive(Debug, Clone, Copy)]
struct Line {
    a: f64,
    b: f64,
    strip: usize,
    delta: i32,
}

/// A boundary line with its abscissa at the current slab.
#[derive(Debug, Clone, Copy)]
struct Edge {
    x: f64,
    a: f64,
    b: f64,
    delta: i32,
}

fn insertion_sort(v: &mut [Edge]) {
    for i in 1..v.len() {
        if v[i - 1].x <= v[i].x {
            continue;
        }
        let cur = v[i];
        let mut j = i;
        while j > 0 && v[j - 1].x > cur.x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = cur;
    }
}

/// Accumulates covered runs (ascending, disjoint) clipped to window segments.
struct Coverage<'a> {
    segs: &'a [ScanSegment],
    next: usize,
    length: f64,
    /// Curved window endpoints that bound a covered piece.
    curved: usize,
}

impl<'a> Coverage<'a> {
    fn new(segs: &'a [ScanSegment]) -> Self {
        Coverage { segs, next: 0, length: 0.0, curved: 0 }
    }

    fn run(&mut self, lo: f64, hi: f64) {
        while self.next < self.segs.len() && self.segs[self.next].hi <= lo {
            self.next += 1;
        }
        for s in &self.segs[self.next..] {
            if s.lo >= hi {
                break;
            }
            let a = lo.max(s.lo);
            let b = hi.min(s.hi);
            if b > a {
                self.length += b - a;
                self.curved += (s.lo_curved && lo <= s.lo) as usize + (s.hi_curved && hi >= s.hi) as usize;
            }
        }
    }
}
