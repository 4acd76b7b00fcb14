//! Seeded random variate generation and sample statistics.

mod stats;

pub use stats::{acf, harmonic_mean, mean, median, moments, sd, AcfResult, Moments};

use crate::error::{Error, Result};
use crate::real::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Open01, StandardNormal, Weibull};

/// Generator used for every simulation in the crate.
pub type SimRng = ChaCha20Rng;

/// Returns the generator for substream `stream` of the master `seed`.
///
/// Each Monte-Carlo replicate gets its own substream, so results do not
/// depend on how replicates are scheduled across threads.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs a two-level replicate coordinate into one stream id.
pub fn stream_id(group: u32, index: u32) -> u64 {
    ((group as u64) << 32) | index as u64
}

/// A vector of observations with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub values: Vec<T>,
    pub label: String,
    pub seed: Option<u64>,
}

impl<T: Real> Sample<T> {
    pub fn new(values: Vec<T>, label: impl Into<String>) -> Self {
        Self { values, label: label.into(), seed: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cast<U: Real>(&self) -> Sample<U> {
        Sample {
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            label: self.label.clone(),
            seed: self.seed,
        }
    }
}

/// Distribution families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        df: f64,
    },
    /// Standard Pareto with minimum 1.
    Pareto {
        alpha: f64,
    },
    Exponential {
        rate: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Fernandez–Steel two-piece skewed t; `gamma = 1` is symmetric.
    SkewedT {
        df: f64,
        gamma: f64,
    },
    /// Azzalini skew normal with location, scale and slant.
    SkewNormal {
        location: f64,
        scale: f64,
        slant: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Param(format!("{name} must be finite, got {v}")))
    }
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Normal { mean, sd } => {
                finite("mean", mean)?;
                positive("sd", sd)
            }
            DistSpec::StudentT { df } => positive("df", df),
            DistSpec::Pareto { alpha } => positive("alpha", alpha),
            DistSpec::Exponential { rate } => positive("rate", rate),
            DistSpec::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            DistSpec::SkewedT { df, gamma } => {
                positive("df", df)?;
                positive("gamma", gamma)
            }
            DistSpec::SkewNormal { location, scale, slant } => {
                finite("location", location)?;
                positive("scale", scale)?;
                finite("slant", slant)
            }
        }
    }

    /// Short family name used in CSV output.
    pub fn family(&self) -> &'static str {
        match self {
            DistSpec::Normal { .. } => "normal",
            DistSpec::StudentT { .. } => "student_t",
            DistSpec::Pareto { .. } => "pareto",
            DistSpec::Exponential { .. } => "exponential",
            DistSpec::Weibull { .. } => "weibull",
            DistSpec::SkewedT { .. } => "skewed_t",
            DistSpec::SkewNormal { .. } => "skew_normal",
        }
    }

    /// Human-readable label including parameters.
    pub fn label(&self) -> String {
        match *self {
            DistSpec::Normal { mean, sd } => format!("normal(mean={mean},sd={sd})"),
            DistSpec::StudentT { df } => format!("student_t(df={df})"),
            DistSpec::Pareto { alpha } => format!("pareto(alpha={alpha})"),
            DistSpec::Exponential { rate } => format!("exponential(rate={rate})"),
            DistSpec::Weibull { shape, scale } => format!("weibull(shape={shape},scale={scale})"),
            DistSpec::SkewedT { df, gamma } => format!("skewed_t(df={df},gamma={gamma})"),
            DistSpec::SkewNormal { location, scale, slant } => {
                format!("skew_normal(location={location},scale={scale},slant={slant})")
            }
        }
    }
}

fn student_t_variate<R: Rng + ?Sized>(rng: &mut R, chi: &ChiSquared<f64>, df: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let v: f64 = chi.sample(rng);
    z / (v / df).sqrt()
}

/// Draws `n` variates from `spec` using the supplied generator.
pub fn draw_with<R: Rng + ?Sized>(spec: &DistSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(n);
    match *spec {
        DistSpec::Normal { mean, sd } => {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                out.push(mean + sd * z);
            }
        }
        DistSpec::StudentT { df } => {
            let chi = ChiSquared::new(df).map_err(|e| Error::Param(e.to_string()))?;
            for _ in 0..n {
                out.push(student_t_variate(rng, &chi, df));
            }
        }
        DistSpec::Pareto { alpha } => {
            let floor = 1.0f64.next_up();
            for _ in 0..n {
                let u: f64 = rng.sample(Open01);
                out.push((1.0 - u).powf(-1.0 / alpha).max(floor));
            }
        }
        DistSpec::Exponential { rate } => {
            let d = Exp::new(rate).map_err(|e| Error::Param(e.to_string()))?;
            out.extend((0..n).map(|_| d.sample(rng)));
        }
        DistSpec::Weibull { shape, scale } => {
            let d = Weibull::new(scale, shape).map_err(|e| Error::Param(e.to_string()))?;
            out.extend((0..n).map(|_| d.sample(rng)));
        }
        DistSpec::SkewedT { df, gamma } => {
            let chi = ChiSquared::new(df).map_err(|e| Error::Param(e.to_string()))?;
            let g2 = gamma * gamma;
            let p_right = g2 / (1.0 + g2);
            for _ in 0..n {
                let t = student_t_variate(rng, &chi, df).abs();
                let side: f64 = rng.random();
                out.push(if side < p_right { t * gamma } else { -t / gamma });
            }
        }
        DistSpec::SkewNormal { location, scale, slant } => {
            let delta = slant / (1.0 + slant * slant).sqrt();
            let comp = (1.0 - delta * delta).sqrt();
            for _ in 0..n {
                let u0: f64 = rng.sample(StandardNormal);
                let v: f64 = rng.sample(StandardNormal);
                out.push(location + scale * (delta * u0.abs() + comp * v));
            }
        }
    }
    Ok(out)
}

/// Draws `n` i.i.d. variates; identical `(spec, n, seed)` give identical
/// bits.
pub fn draw(spec: &DistSpec, n: usize, seed: u64) -> Result<Sample<f64>> {
    if n == 0 {
        return Err(Error::Param("n must be at least 1".into()));
    }
    let mut rng = substream(seed, 0);
    let values = draw_with(spec, n, &mut rng)?;
    Ok(Sample { values, label: spec.label(), seed: Some(seed) })
}
