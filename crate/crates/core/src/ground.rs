//! Stationary point processes on the line that position the cylinders
//! (the signed distances `Pᵢ`), their intensities, and the total mass
//! `γ₂ = γ_red^{(2)}(ℝ¹)` of the reduced second factorial cumulant measure.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::Strip;
use crate::error::{Error, Result};
use crate::marks::{OrientationModel, RadiusModel};
use crate::rng;
use crate::stats;

/// Minimum separation between sampled points; closer pairs are merged so the
/// counting measure stays simple.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Below this many replicates the dispersion estimate is flagged.
pub const MIN_GAMMA2_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSizeKind {
    #[default]
    Poisson,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroundSpec {
    Poisson {
        lambda: f64,
    },
    NeymanScott {
        kappa: f64,
        mu: f64,
        disp_half_width: f64,
        #[serde(default)]
        cluster_size: ClusterSizeKind,
    },
    GaussPoisson {
        singleton_rate: f64,
        pair_rate: f64,
        pair_separation: f64,
    },
    RenewalErlang {
        shape: u32,
        rate: f64,
    },
}

impl GroundSpec {
    pub fn build(&self) -> Result<GroundProcess> {
        match *self {
            GroundSpec::Poisson { lambda } => GroundProcess::poisson(lambda),
            GroundSpec::NeymanScott {
                kappa,
                mu,
                disp_half_width,
                cluster_size,
            } => {
                let size = match cluster_size {
                    ClusterSizeKind::Poisson => ClusterSize::Poisson { mean: mu },
                    ClusterSizeKind::Fixed => {
                        if mu.fract() != 0.0 || mu < 1.0 {
                            return Err(Error::invalid(
                                "ground.mu",
                                "fixed cluster size must be a positive integer",
                            ));
                        }
                        ClusterSize::Fixed { n: mu as u32 }
                    }
                };
                GroundProcess::neyman_scott(kappa, size, disp_half_width)
            }
            GroundSpec::GaussPoisson {
                singleton_rate,
                pair_rate,
                pair_separation,
            } => GroundProcess::gauss_poisson(singleton_rate, pair_rate, pair_separation),
            GroundSpec::RenewalErlang { shape, rate } => GroundProcess::renewal_erlang(shape, rate),
        }
    }
}

/// Number of points per cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterSize {
    Poisson { mean: f64 },
    Fixed { n: u32 },
}

impl ClusterSize {
    pub fn mean(self) -> f64 {
        match self {
            ClusterSize::Poisson { mean } => mean,
            ClusterSize::Fixed { n } => n as f64,
        }
    }

    /// `E N(N − 1)`.
    pub fn second_factorial_moment(self) -> f64 {
        match self {
            ClusterSize::Poisson { mean } => mean * mean,
            ClusterSize::Fixed { n } => n as f64 * (n as f64 - 1.0),
        }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        match self {
            ClusterSize::Poisson { mean } => poisson_count(mean, rng),
            ClusterSize::Fixed { n } => n as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundProcess {
    Poisson {
        lambda: f64,
    },
    /// Parents at rate `kappa`; each has a cluster of daughters displaced
    /// uniformly on `[−h, h]`.
    NeymanScott {
        kappa: f64,
        size: ClusterSize,
        disp_half_width: f64,
    },
    /// Singletons at rate `singleton_rate` and point pairs at rate
    /// `pair_rate`, the two points of a pair `D ~ U(0, pair_separation)` apart.
    GaussPoisson {
        singleton_rate: f64,
        pair_rate: f64,
        pair_separation: f64,
    },
    /// Stationary renewal process with Erlang(`shape`, `rate`) gaps.
    RenewalErlang { shape: u32, rate: f64 },
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite and positive"))
    }
}

impl GroundProcess {
    pub fn poisson(lambda: f64) -> Result<Self> {
        positive("ground.lambda", lambda)?;
        Ok(GroundProcess::Poisson { lambda })
    }

    pub fn neyman_scott(kappa: f64, size: ClusterSize, disp_half_width: f64) -> Result<Self> {
        positive("ground.kappa", kappa)?;
        positive("ground.mu", size.mean())?;
        positive("ground.disp_half_width", disp_half_width)?;
        Ok(GroundProcess::NeymanScott {
            kappa,
            size,
            disp_half_width,
        })
    }

    pub fn gauss_poisson(singleton_rate: f64, pair_rate: f64, pair_separation: f64) -> Result<Self> {
        if !(singleton_rate.is_finite() && singleton_rate >= 0.0) {
            return Err(Error::invalid("ground.singleton_rate", "must be finite and non-negative"));
        }
        if !(pair_rate.is_finite() && pair_rate >= 0.0) {
            return Err(Error::invalid("ground.pair_rate", "must be finite and non-negative"));
        }
        positive("ground.singleton_rate + 2 pair_rate", singleton_rate + 2.0 * pair_rate)?;
        positive("ground.pair_separation", pair_separation)?;
        Ok(GroundProcess::GaussPoisson {
            singleton_rate,
            pair_rate,
            pair_separation,
        })
    }

    pub fn renewal_erlang(shape: u32, rate: f64) -> Result<Self> {
        if shape == 0 {
            return Err(Error::invalid("ground.shape", "must be at least 1"));
        }
        positive("ground.rate", rate)?;
        Ok(GroundProcess::RenewalErlang { shape, rate })
    }

    pub fn is_poisson(&self) -> bool {
        matches!(self, GroundProcess::Poisson { .. })
    }

    /// Mean number of points per unit length.
    pub fn intensity(&self) -> f64 {
        match *self {
            GroundProcess::Poisson { lambda } => lambda,
            GroundProcess::NeymanScott { kappa, size, .. } => kappa * size.mean(),
            GroundProcess::GaussPoisson {
                singleton_rate,
                pair_rate,
                ..
            } => singleton_rate + 2.0 * pair_rate,
            GroundProcess::RenewalErlang { shape, rate } => rate / shape as f64,
        }
    }

    /// `γ_red^{(2)}(ℝ¹)`, so that `Var Ψ(B) ≈ λ|B|(1 + γ₂)` for long intervals.
    pub fn gamma2_total(&self) -> f64 {
        match *self {
            GroundProcess::Poisson { .. } => 0.0,
            GroundProcess::NeymanScott { size, .. } => {
                size.second_factorial_moment() / size.mean()
            }
            GroundProcess::GaussPoisson { pair_rate, .. } => 2.0 * pair_rate / self.intensity(),
            // Squared coefficient of variation of an Erlang gap is 1/k.
            GroundProcess::RenewalErlang { shape, .. } => 1.0 / shape as f64 - 1.0,
        }
    }

    /// A realization restricted to `(−M, M)`, sorted, with no two points
    /// closer than [`MIN_SEPARATION`].
    pub fn sample_on_interval<R: Rng + ?Sized>(&self, half_length: f64, rng: &mut R) -> Result<Vec<f64>> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::invalid("M", "interval half-length must be finite and positive"));
        }
        let m = half_length;
        let mut pts = Vec::new();
        match *self {
            GroundProcess::Poisson { lambda } => {
                uniform_points(lambda, -m, m, rng, &mut pts);
            }
            GroundProcess::NeymanScott {
                kappa,
                size,
                disp_half_width: h,
            } => {
                // Parents beyond ±M still reach the interval when within h.
                let mut parents = Vec::new();
                uniform_points(kappa, -m - h, m + h, rng, &mut parents);
                for c in parents {
                    for _ in 0..size.sample(rng) {
                        let x = c + h * (2.0 * rng.random::<f64>() - 1.0);
                        if x > -m && x < m {
                            pts.push(x);
                        }
                    }
                }
            }
            GroundProcess::GaussPoisson {
                singleton_rate,
                pair_rate,
                pair_separation: d,
            } => {
                uniform_points(singleton_rate, -m, m, rng, &mut pts);
                let mut centers = Vec::new();
                uniform_points(pair_rate, -m - 0.5 * d, m + 0.5 * d, rng, &mut centers);
                for c in centers {
                    let half = 0.5 * d * rng.random::<f64>();
                    for x in [c - half, c + half] {
                        if x > -m && x < m {
                            pts.push(x);
                        }
                    }
                }
            }
            GroundProcess::RenewalErlang { shape, rate } => {
                let gap = Gamma::new(shape as f64, 1.0 / rate).expect("validated parameters");
                // Forward recurrence time: uniform fraction of a length-biased gap,
                // and a length-biased Erlang(k) gap is Erlang(k + 1).
                let biased = Gamma::new(shape as f64 + 1.0, 1.0 / rate).expect("validated parameters");
                let mut x = -m + rng.random::<f64>() * biased.sample(rng);
                while x < m {
                    if x > -m {
                        pts.push(x);
                    }
                    x += gap.sample(rng);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < MIN_SEPARATION);
        Ok(pts)
    }

    /// Estimates `γ₂` from replicated counts on `(−W, W)` using
    /// `Var Ψ((−W, W)) ≈ 2Wλ(1 + γ₂)`. Replicate `i` uses stream
    /// `(seed, GAMMA2_CELL, i)`.
    pub fn estimate_gamma2(&self, half_length: f64, reps: usize, seed: u64) -> Result<Gamma2Estimate> {
        if reps < 3 {
            return Err(Error::invalid("gamma2.reps", "need at least three replicates"));
        }
        let counts: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, GAMMA2_CELL, i as u64);
                self.sample_on_interval(half_length, &mut r).map(|p| p.len() as f64)
            })
            .collect::<Result<_>>()?;
        let (estimate, loo) = stats::dispersion_excess(&counts);
        Ok(Gamma2Estimate {
            estimate,
            stderr: stats::jackknife_stderr(&loo),
            mean_count: stats::mean(&counts),
            reps,
            half_length,
            underpowered: reps < MIN_GAMMA2_REPS,
        })
    }

    /// `10³/λ`.
    pub fn default_gamma2_half_length(&self) -> f64 {
        1e3 / self.intensity()
    }
}

/// Stream cell reserved for dispersion estimates.
pub const GAMMA2_CELL: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma2Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub mean_count: f64,
    pub reps: usize,
    pub half_length: f64,
    /// Fewer than [`MIN_GAMMA2_REPS`] replicates.
    pub underpowered: bool,
}

/// Marked ground points `(p, φ, r)` on `(−M, M)`, sorted by `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripSample {
    pub strips: Vec<Strip>,
    pub half_range: f64,
}

impl StripSample {
    pub fn draw<R: Rng + ?Sized>(
        ground: &GroundProcess,
        radius: &RadiusModel,
        orientation: &OrientationModel,
        half_range: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let ps = ground.sample_on_interval(half_range, rng)?;
        let strips = ps
            .into_iter()
            .map(|p| {
                let r = radius.sample(rng);
                let phi = orientation.sample(rng);
                Strip { p, phi, r }
            })
            .collect();
        Ok(StripSample { strips, half_range })
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    let k: f64 = d.sample(rng);
    k as u64
}

fn uniform_points<R: Rng + ?Sized>(rate: f64, lo: f64, hi: f64, rng: &mut R, out: &mut Vec<f64>) {
    let n = poisson_count(rate * (hi - lo), rng);
    out.extend((0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()));
}
