//! Mark distributions: the half-thickness law `F` of `R₀` and the orientation
//! law `G` of `Φ₀`, with samplers and the exact moments of the typical
//! cross-section `Ξ₀ = [−R₀, R₀]`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre_unit, QuadResult, QuadSpec};

/// Default truncation of exponential radii, in multiples of the mean.
pub const DEFAULT_EXP_TRUNCATION: f64 = 20.0;

/// `E|Ξ₀|₁ = 2 E R₀` and `E|Ξ₀|₁² = 4 E R₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiMoments {
    pub m1: f64,
    pub m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusSpec {
    Deterministic { r: f64 },
    Uniform { a: f64, b: f64 },
    Exponential {
        mean: f64,
        #[serde(default)]
        r_max: Option<f64>,
    },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl RadiusSpec {
    pub fn build(&self) -> Result<RadiusModel> {
        match self {
            RadiusSpec::Deterministic { r } => RadiusModel::deterministic(*r),
            RadiusSpec::Uniform { a, b } => RadiusModel::uniform(*a, *b),
            RadiusSpec::Exponential { mean, r_max } => RadiusModel::truncated_exponential(
                *mean,
                r_max.unwrap_or(DEFAULT_EXP_TRUNCATION * mean),
            ),
            RadiusSpec::Discrete { values, weights } => {
                RadiusModel::discrete(values.clone(), weights.clone())
            }
        }
    }
}

/// Distribution `F` of the cylinder half-thickness `R₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiusModel {
    Deterministic { r: f64 },
    Uniform { a: f64, b: f64 },
    /// Exponential with the given (untruncated) mean, conditioned on `R₀ ≤ r_max`.
    TruncatedExponential { mean: f64, r_max: f64 },
    Discrete { values: Vec<f64>, cumulative: Vec<f64> },
}

impl RadiusModel {
    pub fn deterministic(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid("F.r", "must be finite and non-negative"));
        }
        Self::checked(RadiusModel::Deterministic { r })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::invalid("F.a", "must be finite and non-negative"));
        }
        if !(b.is_finite() && b > a) {
            return Err(Error::invalid("F.b", "must be finite and greater than `a`"));
        }
        Self::checked(RadiusModel::Uniform { a, b })
    }

    pub fn truncated_exponential(mean: f64, r_max: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::invalid("F.mean", "must be finite and positive"));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::invalid("F.r_max", "must be finite and positive"));
        }
        Self::checked(RadiusModel::TruncatedExponential { mean, r_max })
    }

    pub fn discrete(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::invalid(
                "F.weights",
                "values and weights must be non-empty and of equal length",
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("F.values", "radii must be finite and non-negative"));
        }
        let cumulative = normalized_cumulative(&weights).ok_or_else(|| {
            Error::invalid("F.weights", "weights must be non-negative with a positive sum")
        })?;
        Self::checked(RadiusModel::Discrete { values, cumulative })
    }

    fn checked(model: Self) -> Result<Self> {
        let (m1, m2) = (model.mean(), model.mean_sq());
        if m2 < m1 * m1 * (1.0 - 1e-12) {
            return Err(Error::invalid("F", "second moment below squared mean"));
        }
        Ok(model)
    }

    /// Upper end of the support.
    pub fn r_max(&self) -> f64 {
        match self {
            RadiusModel::Deterministic { r } => *r,
            RadiusModel::Uniform { b, .. } => *b,
            RadiusModel::TruncatedExponential { r_max, .. } => *r_max,
            RadiusModel::Discrete { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            RadiusModel::Deterministic { r } => *r,
            RadiusModel::Uniform { a, b } => 0.5 * (a + b),
            RadiusModel::TruncatedExponential { mean, r_max } => {
                let th = *mean;
                let tail = (-r_max / th).exp();
                (th - (r_max + th) * tail) / (1.0 - tail)
            }
            RadiusModel::Discrete { values, cumulative } => {
                weights_of(cumulative).zip(values).map(|(w, v)| w * v).sum()
            }
        }
    }

    pub fn mean_sq(&self) -> f64 {
        match self {
            RadiusModel::Deterministic { r } => r * r,
            RadiusModel::Uniform { a, b } => (a * a + a * b + b * b) / 3.0,
            RadiusModel::TruncatedExponential { mean, r_max } => {
                let (th, c) = (*mean, *r_max);
                let tail = (-c / th).exp();
                (2.0 * th * th - (c * c + 2.0 * c * th + 2.0 * th * th) * tail) / (1.0 - tail)
            }
            RadiusModel::Discrete { values, cumulative } => {
                weights_of(cumulative).zip(values).map(|(w, v)| w * v * v).sum()
            }
        }
    }

    pub fn xi_moments(&self) -> XiMoments {
        XiMoments {
            m1: 2.0 * self.mean(),
            m2: 4.0 * self.mean_sq(),
        }
    }

    /// `E max(0, 2R₀ − |t|)`: the expected overlap of `Ξ₀` with its own
    /// translate by `t`.
    pub fn overlap_expectation(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            RadiusModel::Deterministic { r } => (2.0 * r - t).max(0.0),
            RadiusModel::Uniform { a, b } => {
                let lo = a.max(0.5 * t);
                if lo >= *b {
                    return 0.0;
                }
                let prim = |r: f64| r * r - t * r;
                (prim(*b) - prim(lo)) / (b - a)
            }
            RadiusModel::TruncatedExponential { mean, r_max } => {
                let (th, c) = (*mean, *r_max);
                let lo = 0.5 * t;
                if lo >= c {
                    return 0.0;
                }
                let el = (-lo / th).exp();
                let ec = (-c / th).exp();
                let first = (lo + th) * el - (c + th) * ec;
                let mass = el - ec;
                (2.0 * first - t * mass) / (1.0 - ec)
            }
            RadiusModel::Discrete { values, cumulative } => weights_of(cumulative)
                .zip(values)
                .map(|(w, v)| w * (2.0 * v - t).max(0.0))
                .sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RadiusModel::Deterministic { r } => *r,
            RadiusModel::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            RadiusModel::TruncatedExponential { mean, r_max } => {
                let z = -(-r_max / mean).exp_m1();
                let u: f64 = rng.random();
                (-mean * (-u * z).ln_1p()).min(*r_max)
            }
            RadiusModel::Discrete { values, cumulative } => {
                values[pick(cumulative, rng.random())]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrientationSpec {
    Uniform,
    /// Density values on an equispaced grid over `[0, π]` (not necessarily
    /// normalised), linearly interpolated.
    Table { density: Vec<f64> },
    /// `π·B` with `B ~ Beta(a, b)`, `a, b ≥ 1`.
    Beta { a: f64, b: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl OrientationSpec {
    pub fn build(&self) -> Result<OrientationModel> {
        match self {
            OrientationSpec::Uniform => Ok(OrientationModel::Uniform),
            OrientationSpec::Table { density } => OrientationModel::from_density(density),
            OrientationSpec::Beta { a, b } => OrientationModel::beta(*a, *b),
            OrientationSpec::Discrete { values, weights } => {
                OrientationModel::discrete(values.clone(), weights.clone())
            }
        }
    }
}

/// Distribution `G` of the orientation `Φ₀` on `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientationModel {
    Uniform,
    /// Piecewise-linear CDF through `(grid[i], cdf[i])`.
    Table { grid: Vec<f64>, cdf: Vec<f64> },
    Discrete { values: Vec<f64>, cumulative: Vec<f64> },
}

const TABLE_RESOLUTION: usize = 4096;

impl OrientationModel {
    /// Tabulates the distribution with the given density samples on an
    /// equispaced grid over `[0, π]`.
    pub fn from_density(density: &[f64]) -> Result<Self> {
        if density.len() < 2 {
            return Err(Error::invalid("G.density", "need at least two density values"));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("G.density", "values must be finite and non-negative"));
        }
        let segments = density.len() - 1;
        Self::tabulate(|phi| {
            let x = phi / PI * segments as f64;
            let i = (x.floor() as usize).min(segments - 1);
            let f = x - i as f64;
            density[i] * (1.0 - f) + density[i + 1] * f
        })
        .ok_or_else(|| Error::invalid("G.density", "density must have positive mass"))
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 1.0) {
            return Err(Error::invalid("G.a", "must be finite and at least 1"));
        }
        if !(b.is_finite() && b >= 1.0) {
            return Err(Error::invalid("G.b", "must be finite and at least 1"));
        }
        Self::tabulate(|phi| {
            let x = (phi / PI).clamp(0.0, 1.0);
            x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0)
        })
        .ok_or_else(|| Error::invalid("G", "degenerate beta density"))
    }

    fn tabulate(density: impl Fn(f64) -> f64) -> Option<Self> {
        let n = TABLE_RESOLUTION;
        let grid: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        let mut prev = density(0.0);
        for w in grid.windows(2) {
            // Simpson on each cell keeps smooth densities accurate.
            let mid = density(0.5 * (w[0] + w[1]));
            let next = density(w[1]);
            acc += (w[1] - w[0]) * (prev + 4.0 * mid + next) / 6.0;
            cdf.push(acc);
            prev = next;
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return None;
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        *cdf.last_mut()? = 1.0;
        Some(OrientationModel::Table { grid, cdf })
    }

    pub fn discrete(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::invalid(
                "G.weights",
                "values and weights must be non-empty and of equal length",
            ));
        }
        if values.iter().any(|v| !(0.0..=PI).contains(v)) {
            return Err(Error::invalid("G.values", "angles must lie in [0, π]"));
        }
        let cumulative = normalized_cumulative(&weights).ok_or_else(|| {
            Error::invalid("G.weights", "weights must be non-negative with a positive sum")
        })?;
        Ok(OrientationModel::Discrete { values, cumulative })
    }

    /// True iff the distribution function has no jumps.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, OrientationModel::Discrete { .. })
    }

    pub fn require_continuous(&self) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::DiscontinuousOrientation)
        }
    }

    pub fn cdf(&self, phi: f64) -> f64 {
        match self {
            OrientationModel::Uniform => (phi / PI).clamp(0.0, 1.0),
            OrientationModel::Table { grid, cdf } => {
                if phi <= 0.0 {
                    return 0.0;
                }
                if phi >= PI {
                    return 1.0;
                }
                let i = grid.partition_point(|g| *g <= phi).clamp(1, grid.len() - 1);
                let f = (phi - grid[i - 1]) / (grid[i] - grid[i - 1]);
                cdf[i - 1] + f * (cdf[i] - cdf[i - 1])
            }
            OrientationModel::Discrete { values, cumulative } => weights_of(cumulative)
                .zip(values)
                .filter(|(_, v)| **v <= phi)
                .map(|(w, _)| w)
                .sum(),
        }
    }

    /// Generalised inverse of the CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            OrientationModel::Uniform => PI * u,
            OrientationModel::Table { grid, cdf } => {
                let i = cdf.partition_point(|c| *c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                if c1 <= c0 {
                    grid[i]
                } else {
                    grid[i - 1] + (u - c0) / (c1 - c0) * (grid[i] - grid[i - 1])
                }
            }
            OrientationModel::Discrete { values, cumulative } => values[pick(cumulative, u)],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random())
    }

    /// `E f(Φ₀)`: Gauss–Legendre in the probability scale for continuous
    /// laws, an exact weighted sum for discrete ones.
    pub fn expectation<F: FnMut(f64) -> f64>(&self, mut f: F, spec: &QuadSpec) -> QuadResult {
        match self {
            OrientationModel::Discrete { values, cumulative } => QuadResult {
                value: weights_of(cumulative).zip(values).map(|(w, v)| w * f(*v)).sum(),
                error: 0.0,
                evaluations: values.len(),
                converged: true,
            },
            _ => gauss_legendre_unit(|u| f(self.quantile(u)), spec),
        }
    }
}

/// Draws `n` independent mark pairs `(r, φ)`.
pub fn sample_marks<R: Rng + ?Sized>(
    radius: &RadiusModel,
    orientation: &OrientationModel,
    n: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let r = radius.sample(rng);
            let phi = orientation.sample(rng);
            (r, phi)
        })
        .collect()
}

fn normalized_cumulative(weights: &[f64]) -> Option<Vec<f64>> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return None;
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    *out.last_mut()? = 1.0;
    Some(out)
}

fn weights_of(cumulative: &[f64]) -> impl Iterator<Item = f64> + '_ {
    cumulative.iter().scan(0.0, |prev, c| {
        let w = c - *prev;
        *prev = *c;
        Some(w)
    })
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .partition_point(|c| *c <= u)
        .min(cumulative.len() - 1)
}
