#![allow(dead_code)]

use std::f64::consts::PI;

use cylsim_core::cylinder::{CylinderRealization, Strip};
use cylsim_core::rng::stream;
use cylsim_core::window::{Point2, Window};
use rand::Rng;

pub fn notched() -> Window {
    Window::star_polygon(vec![
        Point2::new(-1.0, -1.0),
        Point2::new(1.0, -1.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 0.3),
        Point2::new(-1.0, 1.0),
    ])
    .unwrap()
}

/// Star polygon with vertices at jittered equispaced angles and radii in
/// `[0.3, 1.5]`.
pub fn star_from(angles_jitter: &[f64], radii: &[f64]) -> Window {
    let n = radii.len();
    let spacing = 2.0 * PI / n as f64;
    let vs = (0..n)
        .map(|i| {
            let a = spacing * (i as f64 + 0.2 * angles_jitter[i]);
            Point2::new(radii[i] * a.cos(), radii[i] * a.sin())
        })
        .collect();
    Window::star_polygon(vs).unwrap()
}

/// Uniform random strips whose centre lines meet the disk of radius
/// `reach` around the origin.
pub fn random_strips(seed: u64, n: usize, reach: f64, r_max: f64) -> Vec<Strip> {
    let mut r = stream(seed, 17, 0);
    (0..n)
        .map(|_| Strip {
            p: reach * (2.0 * r.random::<f64>() - 1.0),
            phi: PI * r.random::<f64>(),
            r: r_max * r.random::<f64>(),
        })
        .collect()
}

/// Stratified hit-or-miss estimate of the covered area of `ρK`: one
/// uniform point per cell of an `n × n` grid over the bounding square of
/// the window. Returns the estimate and a conservative (binomial) σ.
pub fn hit_or_miss(real: &CylinderRealization, n: usize, seed: u64) -> (f64, f64) {
    let w = real.window();
    let r_out = w.outer_radius();
    let side = 2.0 * r_out;
    let h = side / n as f64;
    let mut rng = stream(seed, 23, 0);
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            let x = Point2::new(
                -r_out + h * (i as f64 + rng.random::<f64>()),
                -r_out + h * (j as f64 + rng.random::<f64>()),
            );
            if w.contains(x) && real.is_covered(x) {
                hits += 1;
            }
        }
    }
    let total = (n * n) as f64;
    let p = hits as f64 / total;
    let box_area = side * side;
    (box_area * p, box_area * (p * (1.0 - p) / total).sqrt())
}
