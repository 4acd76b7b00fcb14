//! Forward Lambert W × F location-scale transform and its inverse.

use crate::error::{Error, Result};
use crate::lambertw::{branch_point, lambert_w, Branch};
use crate::real::Real;
use crate::sampling::substream;
use rand::Rng;

/// Location, scale and skewness of a Lambert W × F family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwfParams<T> {
    pub mu: T,
    pub sigma: T,
    pub gamma: T,
}

impl<T: Real> LwfParams<T> {
    pub fn new(mu: T, sigma: T, gamma: T) -> Result<Self> {
        let p = Self { mu, sigma, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            return Err(Error::Param(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !self.mu.is_finite() || !self.gamma.is_finite() {
            return Err(Error::Param("mu and gamma must be finite".into()));
        }
        Ok(())
    }

    /// Euclidean distance between two parameter triples.
    pub fn distance(&self, other: &Self) -> T {
        let dm = self.mu - other.mu;
        let ds = self.sigma - other.sigma;
        let dg = self.gamma - other.gamma;
        (dm * dm + ds * ds + dg * dg).sqrt()
    }
}

/// What to do with points that fall beyond the principal-branch domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversePolicy {
    #[default]
    Strict,
    /// Map such points to the branch-point preimage `−1/γ` and record them.
    Clamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseReport<T> {
    pub values: Vec<T>,
    pub clamped_count: usize,
    pub clamped_indices: Vec<usize>,
}

/// `y = u·exp(γu)·σ + μ`, elementwise.
pub fn forward<T: Real>(u: &[T], params: &LwfParams<T>) -> Result<Vec<T>> {
    params.validate()?;
    Ok(u.iter().map(|&v| v * (params.gamma * v).exp() * params.sigma + params.mu).collect())
}

/// Inverse of [`forward`] on the principal branch: `u = W₀(γz)/γ` with
/// `z = (y − μ)/σ`.
pub fn inverse<T: Real>(y: &[T], params: &LwfParams<T>, policy: InversePolicy) -> Result<InverseReport<T>> {
    params.validate()?;
    let LwfParams { mu, sigma, gamma } = *params;
    let mut values = Vec::with_capacity(y.len());
    let mut clamped_indices = Vec::new();
    if gamma == T::zero() {
        values.extend(y.iter().map(|&v| (v - mu) / sigma));
        return Ok(InverseReport { values, clamped_count: 0, clamped_indices });
    }
    let bp = branch_point::<T>();
    for (i, &v) in y.iter().enumerate() {
        let a = gamma * (v - mu) / sigma;
        match lambert_w(a, Branch::Principal) {
            Ok(w) => values.push(w / gamma),
            Err(_) if policy == InversePolicy::Clamp && a < bp => {
                values.push(-gamma.recip());
                clamped_indices.push(i);
            }
            Err(e) => return Err(Error::Domain(format!("point {i} (y = {v}) is outside the invertible region: {e}"))),
        }
    }
    Ok(InverseReport { values, clamped_count: clamped_indices.len(), clamped_indices })
}

/// Treatment of exact zeros in return series before taking logs or ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZerosPolicy {
    Drop,
    /// Replace each zero by a uniform draw on (0, m), where m is the
    /// smallest nonzero absolute value in the series.
    UniformFill {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZerosOutcome {
    pub values: Vec<f64>,
    pub zeros: usize,
}

pub fn apply_zeros_policy(values: &[f64], policy: ZerosPolicy) -> Result<ZerosOutcome> {
    let zeros = values.iter().filter(|&&v| v == 0.0).count();
    match policy {
        ZerosPolicy::Drop => Ok(ZerosOutcome { values: values.iter().copied().filter(|&v| v != 0.0).collect(), zeros }),
        ZerosPolicy::UniformFill { seed } => {
            if zeros == 0 {
                return Ok(ZerosOutcome { values: values.to_vec(), zeros });
            }
            let upper = values.iter().filter(|&&v| v != 0.0).map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            if !upper.is_finite() {
                return Err(Error::Degenerate("series contains only zeros".into()));
            }
            let mut rng = substream(seed, 0);
            let values = values
                .iter()
                .map(|&v| {
                    if v == 0.0 {
                        let mut f: f64 = rng.random::<f64>() * upper;
                        while f == 0.0 {
                            f = rng.random::<f64>() * upper;
                        }
                        f
                    } else {
                        v
                    }
                })
                .collect();
            Ok(ZerosOutcome { values, zeros })
        }
    }
}
