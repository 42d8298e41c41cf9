//! Theoretical targets: the coverage limit, the window constants `C₁`, `C₂`,
//! the asymptotic variance `σ²`, and exact Poisson coverage probabilities.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::GroundProcess;
use crate::marks::{OrientationModel, RadiusModel};
use crate::quad::{gauss_legendre_piecewise, integrate_with_breaks, QuadResult, QuadSpec};
use crate::window::{lens_area, Point2, Shape, Window};

/// Rel. disagreement above which the two `C₁` evaluations are reported.
pub const C1_CROSSCHECK_TOL: f64 = 1e-4;

/// `1 − exp(−λ E|Ξ₀|₁)`.
pub fn lln_limit(lambda: f64, radius: &RadiusModel) -> f64 {
    -(-lambda * radius.xi_moments().m1).exp_m1()
}

/// A quadrature-evaluated constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceConstants {
    pub c1: f64,
    pub c2: f64,
    pub sigma_sq: f64,
    /// `λ e^{−2λm₁} m₁² γ₂ C₁`.
    pub term1: f64,
    /// `λ e^{−2λm₁} 2 m₂ C₂`.
    pub term2: f64,
    pub lambda: f64,
    pub gamma2: f64,
    pub m1: f64,
    pub m2: f64,
    pub lln_limit: f64,
    /// Largest estimated absolute quadrature error of `C₁`, `C₂`.
    pub quad_error: f64,
    pub converged: bool,
}

/// Angles `φ ∈ (0, π)` with `⟨v(φ), x⟩ = c`.
fn angles_with_projection(x: Point2, c: f64, out: &mut Vec<f64>) {
    let n = x.norm();
    if n == 0.0 || c.abs() > n {
        return;
    }
    let theta = x.y.atan2(x.x);
    let delta = (c / n).acos();
    for a in [theta + delta, theta - delta] {
        let a = a.rem_euclid(2.0 * PI);
        if a > 0.0 && a < PI {
            out.push(a);
        }
    }
}

/// `E f(Φ₀)` for continuous `G`, using a composite rule with panel breaks at
/// the images `G(φ)` of the given kink angles.
fn g_expectation<F: FnMut(f64) -> f64>(
    g: &OrientationModel,
    mut f: F,
    kinks: &[f64],
    spec: &QuadSpec,
) -> QuadResult {
    if !g.is_continuous() {
        return g.expectation(f, spec);
    }
    let mut us: Vec<f64> = kinks.iter().map(|&phi| g.cdf(phi)).collect();
    us.push(0.0);
    us.push(1.0);
    us.sort_by(f64::total_cmp);
    us.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    gauss_legendre_piecewise(|u| f(g.quantile(u)), &us, spec)
}

fn vertices(k: &Window) -> &[Point2] {
    match k.shape() {
        Shape::Disk { .. } => &[],
        Shape::StarPolygon { vertices, .. } => vertices,
    }
}

/// `E_G |g(p, Φ₀) ∩ K|₁`.
fn mean_chord(k: &Window, g: &OrientationModel, p: f64, spec: &QuadSpec) -> QuadResult {
    let mut kinks = Vec::new();
    for v in vertices(k) {
        angles_with_projection(*v, p, &mut kinks);
    }
    g_expectation(g, |phi| k.chord_length(p, phi), &kinks, spec)
}

/// `C₁ = ∫ (E_G |g(p, Φ₀) ∩ K|₁)² dp`.
pub fn compute_c1(k: &Window, g: &OrientationModel, spec: &QuadSpec) -> Constant {
    let r = k.outer_radius();
    let mut breaks = vec![-r, 0.0, r];
    for v in vertices(k) {
        breaks.push(v.norm());
        breaks.push(-v.norm());
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut inner_err: f64 = 0.0;
    let mut inner_ok = true;
    let outer = integrate_with_breaks(
        |p| {
            let m = mean_chord(k, g, p, spec);
            inner_err = inner_err.max(m.error);
            inner_ok &= m.converged;
            m.value * m.value
        },
        &breaks,
        spec,
    );
    Constant {
        value: outer.value,
        error: outer.error + 2.0 * r * 4.0 * r * inner_err,
        converged: outer.converged && inner_ok,
    }
}

/// `C₁` for uniform `G` via the double-angle form
/// `π⁻² ∫ (∫₀^π |g(p, φ) ∩ K|₁ dφ)² dp`, with adaptive integration in `φ`.
pub fn compute_c1_uniform_form(k: &Window, spec: &QuadSpec) -> Constant {
    let r = k.outer_radius();
    let mut breaks = vec![-r, 0.0, r];
    for v in vertices(k) {
        breaks.push(v.norm());
        breaks.push(-v.norm());
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut ok = true;
    let outer = integrate_with_breaks(
        |p| {
            let mut kinks = vec![0.0, PI];
            for v in vertices(k) {
                angles_with_projection(*v, p, &mut kinks);
            }
            kinks.sort_by(f64::total_cmp);
            let inner = integrate_with_breaks(|phi| k.chord_length(p, phi), &kinks, spec);
            ok &= inner.converged;
            let m = inner.value / PI;
            m * m
        },
        &breaks,
        spec,
    );
    Constant {
        value: outer.value,
        error: outer.error,
        converged: outer.converged && ok,
    }
}

/// Both `C₁` evaluations for uniform `G`; fails when they disagree beyond
/// [`C1_CROSSCHECK_TOL`].
pub fn c1_crosscheck(k: &Window, spec: &QuadSpec) -> Result<(Constant, Constant)> {
    let a = compute_c1(k, &OrientationModel::Uniform, spec);
    let b = compute_c1_uniform_form(k, spec);
    if (a.value - b.value).abs() > C1_CROSSCHECK_TOL * a.value.abs() {
        return Err(Error::ConstantMismatch {
            constant: "C1",
            primary: a.value,
            alternative: b.value,
        });
    }
    Ok((a, b))
}

/// Directions `ψ ∈ (0, π)` of vertex differences, where `s ↦ |K ∩ (K + s v(ψ))|₂`
/// changes its piecewise form.
fn difference_directions(k: &Window) -> Vec<f64> {
    let vs = vertices(k);
    let mut out = Vec::new();
    for a in vs {
        for b in vs {
            let d = *a - *b;
            if d.norm() > 0.0 {
                let psi = d.y.atan2(d.x).rem_euclid(PI);
                out.push(psi);
            }
        }
    }
    out
}

/// `∫₀^{r_K(ψ)} |K ∩ (K + s v(ψ))|₂ ds`.
fn covariogram_ray_integral(k: &Window, psi: f64, spec: &QuadSpec) -> QuadResult {
    let (s, c) = psi.sin_cos();
    let dir = Point2::new(c, s);
    let reach = k.r_k(psi);
    integrate_with_breaks(|t| k.covariogram(t * dir), &[0.0, reach], spec)
}

/// `C₂ = ∫₀^π ∫₀^{r_K(φ+π/2)} |K ∩ (K + s v(φ+π/2))|₂ ds dG(φ)`.
pub fn compute_c2(k: &Window, g: &OrientationModel, spec: &QuadSpec) -> Constant {
    let kinks: Vec<f64> = difference_directions(k)
        .into_iter()
        .map(|psi| (psi - FRAC_PI_2).rem_euclid(PI))
        .collect();
    let mut inner_ok = true;
    let mut inner_err: f64 = 0.0;
    let outer = g_expectation(
        g,
        |phi| {
            let q = covariogram_ray_integral(k, phi + FRAC_PI_2, spec);
            inner_ok &= q.converged;
            inner_err = inner_err.max(q.error);
            q.value
        },
        &kinks,
        spec,
    );
    Constant {
        value: outer.value,
        error: outer.error + inner_err,
        converged: outer.converged && inner_ok,
    }
}

/// Assembles `σ²_P(K, F, G)` and its two components.
pub fn sigma_sq(
    ground: &GroundProcess,
    radius: &RadiusModel,
    orientation: &OrientationModel,
    k: &Window,
    spec: &QuadSpec,
) -> Result<VarianceConstants> {
    orientation.require_continuous()?;
    let lambda = ground.intensity();
    let gamma2 = ground.gamma2_total();
    let mo = radius.xi_moments();
    let c1 = compute_c1(k, orientation, spec);
    let c2 = compute_c2(k, orientation, spec);
    let mut v = assemble(lambda, gamma2, mo.m1, mo.m2, c1.value, c2.value)?;
    v.lln_limit = lln_limit(lambda, radius);
    v.quad_error = c1.error.max(c2.error);
    v.converged = c1.converged && c2.converged;
    Ok(v)
}

fn assemble(lambda: f64, gamma2: f64, m1: f64, m2: f64, c1: f64, c2: f64) -> Result<VarianceConstants> {
    let pre = lambda * (-2.0 * lambda * m1).exp();
    let term1 = pre * m1 * m1 * gamma2 * c1;
    let term2 = pre * 2.0 * m2 * c2;
    let sigma_sq = term1 + term2;
    if !(sigma_sq > 0.0) {
        return Err(Error::NonPositiveVariance { term1, term2 });
    }
    Ok(VarianceConstants {
        c1,
        c2,
        sigma_sq,
        term1,
        term2,
        lambda,
        gamma2,
        m1,
        m2,
        lln_limit: -(-lambda * m1).exp_m1(),
        quad_error: 0.0,
        converged: true,
    })
}

/// Radii at which `r ↦ max(0, 2r − |t|)` integrated against `F` has a kink.
fn radius_kinks(radius: &RadiusModel) -> Vec<f64> {
    match radius {
        RadiusModel::Deterministic { r } => vec![*r],
        RadiusModel::Uniform { a, b } => vec![*a, *b],
        RadiusModel::TruncatedExponential { r_max, .. } => vec![*r_max],
        RadiusModel::Discrete { values, .. } => values.clone(),
    }
}

/// `E max(0, 2R₀ − |⟨v(Φ₀), d⟩|)`.
pub fn expected_overlap(
    radius: &RadiusModel,
    orientation: &OrientationModel,
    d: Point2,
    spec: &QuadSpec,
) -> QuadResult {
    let mut kinks = Vec::new();
    angles_with_projection(d, 0.0, &mut kinks);
    for r in radius_kinks(radius) {
        angles_with_projection(d, 2.0 * r, &mut kinks);
        angles_with_projection(d, -2.0 * r, &mut kinks);
    }
    g_expectation(
        orientation,
        |phi| {
            let (s, c) = phi.sin_cos();
            radius.overlap_expectation(c * d.x + s * d.y)
        },
        &kinks,
        spec,
    )
}

/// `P(Ξ ∩ X ≠ ∅)` for a Poisson ground process and `X` of one or two points.
pub fn poisson_coverage(
    ground: &GroundProcess,
    radius: &RadiusModel,
    orientation: &OrientationModel,
    points: &[Point2],
    spec: &QuadSpec,
) -> Result<f64> {
    let GroundProcess::Poisson { lambda } = *ground else {
        return Err(Error::NotPoisson("poisson_coverage"));
    };
    let m1 = radius.xi_moments().m1;
    match points {
        [_] => Ok(lln_limit(lambda, radius)),
        [x1, x2] => {
            let ov = expected_overlap(radius, orientation, *x2 - *x1, spec);
            Ok(-(-lambda * (2.0 * m1 - ov.value)).exp_m1())
        }
        _ => Err(Error::invalid("points", "exactly one or two points are supported")),
    }
}

/// Exact `Var |Ξ ∩ ρK|₂` at finite `ρ` for a Poisson ground process,
/// `e^{−2λm₁} ∫ |ρK ∩ (ρK + t)|₂ (e^{λ ov(t)} − 1) dt` with
/// `ov(t) = E max(0, 2R₀ − |⟨v(Φ₀), t⟩|)`. Disk windows and uniform `G` only,
/// where `ov` depends on `|t|` alone.
pub fn poisson_area_variance(
    ground: &GroundProcess,
    radius: &RadiusModel,
    orientation: &OrientationModel,
    k: &Window,
    rho: f64,
    spec: &QuadSpec,
) -> Result<Constant> {
    let GroundProcess::Poisson { lambda } = *ground else {
        return Err(Error::NotPoisson("poisson_area_variance"));
    };
    let Shape::Disk { radius: kr } = *k.shape() else {
        return Err(Error::invalid("window", "finite-ρ variance is implemented for disks only"));
    };
    if *orientation != OrientationModel::Uniform {
        return Err(Error::invalid("G", "finite-ρ variance is implemented for uniform G only"));
    }
    let big_r = rho * kr;
    let m1 = radius.xi_moments().m1;
    let ov = |s: f64| -> f64 {
        match *radius {
            RadiusModel::Deterministic { r } => {
                if s <= 2.0 * r {
                    2.0 * r - 2.0 * s / PI
                } else {
                    2.0 / PI * (2.0 * r * (2.0 * r / s).asin() - s + (s * s - 4.0 * r * r).sqrt())
                }
            }
            _ => expected_overlap(radius, orientation, Point2::new(s, 0.0), spec).value,
        }
    };
    let mut breaks = vec![0.0, 2.0 * big_r];
    for r in radius_kinks(radius) {
        if 2.0 * r < 2.0 * big_r {
            breaks.push(2.0 * r);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = integrate_with_breaks(
        |s| 2.0 * PI * s * lens_area(big_r, s) * (lambda * ov(s)).exp_m1(),
        &breaks,
        spec,
    );
    let scale = (-2.0 * lambda * m1).exp();
    Ok(Constant {
        value: scale * q.value,
        error: scale * q.error,
        converged: q.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn disk_constants() {
        let k = Window::disk(1.0).unwrap();
        let g = OrientationModel::Uniform;
        let c1 = compute_c1(&k, &g, &spec());
        let c2 = compute_c2(&k, &g, &spec());
        assert!((c1.value - 16.0 / 3.0).abs() < 1e-10, "{c1:?}");
        assert!((c2.value - 8.0 / 3.0).abs() < 1e-10, "{c2:?}");
    }

    #[test]
    fn disk_ray_integral_matches_primitive() {
        // ∫ lens = 2R²(d acos(d/2R) − √(4R² − d²)) + (4R² − d²)^{3/2}/6.
        let r: f64 = 1.3;
        let prim = |d: f64| {
            let root = (4.0 * r * r - d * d).max(0.0).sqrt();
            2.0 * r * r * (d * (d / (2.0 * r)).min(1.0).acos() - root) + root.powi(3) / 6.0
        };
        let k = Window::disk(r).unwrap();
        let c = covariogram_ray_integral(&k, 0.4, &spec());
        let want = prim(2.0 * r) - prim(0.0);
        assert!((want - 8.0 / 3.0 * r.powi(3)).abs() < 1e-12);
        assert!((c.value - want).abs() < 1e-10 * want, "{} {want}", c.value);
    }

    #[test]
    fn poisson_sigma_sq() {
        let gp = GroundProcess::poisson(1.0).unwrap();
        let f = RadiusModel::deterministic(0.25).unwrap();
        let v = sigma_sq(&gp, &f, &OrientationModel::Uniform, &Window::disk(1.0).unwrap(), &spec()).unwrap();
        assert_eq!(v.term1, 0.0);
        assert!((v.sigma_sq - 4.0 / 3.0 * (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn discrete_orientation_rejected() {
        let gp = GroundProcess::poisson(1.0).unwrap();
        let f = RadiusModel::deterministic(0.25).unwrap();
        let g = OrientationModel::discrete(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let err = sigma_sq(&gp, &f, &g, &Window::disk(1.0).unwrap(), &spec()).unwrap_err();
        assert!(matches!(err, Error::DiscontinuousOrientation));
    }

    #[test]
    fn non_positive_variance_is_rejected() {
        // Unreachable for valid models; exercised with a synthetic γ₂ < −1.
        let r = assemble(1.0, -2.0, 0.5, 0.25, 16.0 / 3.0, 8.0 / 3.0);
        match r {
            Err(Error::NonPositiveVariance { term1, term2 }) => assert!(term1 < 0.0 && term2 > 0.0),
            other => panic!("{other:?}"),
        }
        // Erlang with large shape approaches the boundary from above.
        let gp = GroundProcess::renewal_erlang(1000, 1000.0).unwrap();
        let f = RadiusModel::deterministic(0.25).unwrap();
        let v = sigma_sq(&gp, &f, &OrientationModel::Uniform, &Window::disk(1.0).unwrap(), &spec()).unwrap();
        assert!(v.sigma_sq > 0.0 && v.sigma_sq < 1e-3);
    }

    #[test]
    fn coverage_limits() {
        let gp = GroundProcess::poisson(1.0).unwrap();
        let f = RadiusModel::deterministic(0.25).unwrap();
        let g = OrientationModel::Uniform;
        let one = poisson_coverage(&gp, &f, &g, &[Point2::new(0.3, 0.1)], &spec()).unwrap();
        assert_eq!(one, lln_limit(1.0, &f));
        assert!((one - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let x = Point2::new(0.2, -0.4);
        let same = poisson_coverage(&gp, &f, &g, &[x, x], &spec()).unwrap();
        assert!((same - one).abs() < 1e-12);
        let far = poisson_coverage(&gp, &f, &g, &[x, Point2::new(1e9, 0.0)], &spec()).unwrap();
        assert!((far - (1.0 - (-1.0f64).exp())).abs() < 1e-8);
        let ns = GroundProcess::neyman_scott(1.0, crate::ground::ClusterSize::Fixed { n: 2 }, 1.0).unwrap();
        assert!(poisson_coverage(&ns, &f, &g, &[x], &spec()).is_err());
    }

    #[test]
    fn deterministic_overlap_closed_form() {
        let f = RadiusModel::deterministic(0.25).unwrap();
        let g = OrientationModel::Uniform;
        for s in [0.1, 0.5, 0.9, 3.0] {
            let q = expected_overlap(&f, &g, Point2::new(0.0, s), &spec());
            let want = if s <= 0.5 {
                0.5 - 2.0 * s / PI
            } else {
                2.0 / PI * (0.5 * (0.5 / s).asin() - s + (s * s - 0.25).sqrt())
            };
            assert!((q.value - want).abs() < 1e-10, "{s}: {} vs {want}", q.value);
        }
    }

    #[test]
    fn finite_rho_variance_approaches_limit() {
        let gp = GroundProcess::poisson(1.0).unwrap();
        let f = RadiusModel::deterministic(0.25).unwrap();
        let k = Window::disk(1.0).unwrap();
        let sigma2 = 4.0 / 3.0 * (-1.0f64).exp();
        let mut prev = f64::INFINITY;
        for rho in [25.0, 50.0, 100.0, 400.0] {
            let v = poisson_area_variance(&gp, &f, &OrientationModel::Uniform, &k, rho, &spec()).unwrap();
            let dev = (v.value / (rho * rho * rho) - sigma2).abs();
            assert!(dev < prev);
            prev = dev;
        }
        assert!(prev < 2e-3);
    }
}
