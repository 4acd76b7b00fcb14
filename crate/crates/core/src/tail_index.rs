//! Harmonic-moment tail-index estimators, modified Hill plots, Monte-Carlo
//! regime bands and the Pareto t-score estimators.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sampling::{draw_with, harmonic_mean, stream_id, substream, DistSpec};
use rayon::prelude::*;
use std::ops::RangeInclusive;

/// `|β − 1|` below which the Hill estimator is used instead.
pub const HILL_SWITCH: f64 = 1e-8;
/// Below this `|β − 1|` paths are computed term by term; above it the
/// prefix-sum shortcut is accurate.
const PREFIX_SUM_MIN_GAP: f64 = 0.1;

fn sorted_ascending<T: Real>(x: &[T]) -> Vec<T> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    v
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::Range(format!("k must be in 1..={}, got {k}", n.saturating_sub(1))));
    }
    Ok(())
}

/// Reciprocal tail index `H*` from the top `k` order statistics of an
/// ascending sample; `None` when the value is degenerate (zero) or not
/// finite.
fn hstar_sorted<T: Real>(sorted: &[T], k: usize, beta: T) -> Result<Option<T>> {
    let n = sorted.len();
    check_k(n, k)?;
    let threshold = sorted[n - k - 1];
    if !(threshold > T::zero()) {
        return Err(Error::Domain(format!("threshold order statistic {threshold} is not positive")));
    }
    let top = &sorted[n - k..];
    let kt = T::from_usize_lossy(k);
    let b = beta - T::one();
    let ln_t = threshold.ln();
    let h = if b.abs() < T::lit(HILL_SWITCH) {
        top.iter().map(|&x| x.ln() - ln_t).sum::<T>() / kt
    } else {
        // mean of (r^b − 1), r = threshold / x, then H* = −m / ((1 + m) b)
        let m = top.iter().map(|&x| (b * (ln_t - x.ln())).exp_m1()).sum::<T>() / kt;
        -m / ((T::one() + m) * b)
    };
    Ok(if h > T::zero() && h.is_finite() { Some(h) } else { None })
}

fn alpha_from<T: Real>(h: Option<T>) -> Result<T> {
    match h {
        Some(v) => Ok(v.recip()),
        None => Err(Error::Degenerate("top order statistics are tied; tail index is infinite".into())),
    }
}

/// Harmonic-moment tail index `α̂ = 1/H*(β)` from the top `k` order
/// statistics. `β` within [`HILL_SWITCH`] of 1 gives the Hill estimator.
pub fn harmonic_moment_estimator<T: Real>(x: &[T], k: usize, beta: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(Error::Param(format!("beta must be positive, got {beta}")));
    }
    alpha_from(hstar_sorted(&sorted_ascending(x), k, beta)?)
}

/// Hill estimator from the top `k` order statistics.
pub fn hill_estimator<T: Real>(x: &[T], k: usize) -> Result<T> {
    harmonic_moment_estimator(x, k, T::one())
}

/// The `β = 2` member of the harmonic-moment family.
pub fn t_hill<T: Real>(x: &[T], k: usize) -> Result<T> {
    harmonic_moment_estimator(x, k, T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathTransform {
    AbsoluteValues,
    Raw,
}

/// Tail-index estimates for every `k = 1, …, n−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailIndexPath<T> {
    pub k_values: Vec<usize>,
    /// `None` where the estimate is undefined (non-positive threshold or
    /// tied top order statistics).
    pub alpha_hat: Vec<Option<T>>,
    pub beta: T,
    pub n: usize,
}

impl<T: Real> TailIndexPath<T> {
    pub fn at(&self, k: usize) -> Option<T> {
        if k == 0 || k > self.alpha_hat.len() {
            None
        } else {
            self.alpha_hat[k - 1]
        }
    }

    /// `1/α̂` per k, the quantity averaged when building bands.
    pub fn reciprocal(&self) -> Vec<Option<T>> {
        self.alpha_hat.iter().map(|a| a.map(|v| v.recip())).collect()
    }
}

/// `H*` for every k of an ascending sample.
fn hstar_path_sorted<T: Real>(sorted: &[T], beta: T) -> Vec<Option<T>> {
    let n = sorted.len();
    let b = beta - T::one();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    if b.abs() < T::lit(HILL_SWITCH) || b.abs() >= T::lit(PREFIX_SUM_MIN_GAP) {
        let hill = b.abs() < T::lit(HILL_SWITCH);
        // running sum over the top order statistics, largest first
        let mut acc = T::zero();
        for k in 1..n {
            let top = sorted[n - k];
            let threshold = sorted[n - k - 1];
            if hill {
                acc += top.ln();
            } else {
                acc += top.powf(-b);
            }
            if !(threshold > T::zero()) || !(top > T::zero()) {
                out.push(None);
                continue;
            }
            let kt = T::from_usize_lossy(k);
            let h = if hill {
                acc / kt - threshold.ln()
            } else {
                let m = threshold.powf(b) * acc / kt - T::one();
                -m / ((T::one() + m) * b)
            };
            out.push(if h > T::zero() && h.is_finite() { Some(h) } else { None });
        }
    } else {
        for k in 1..n {
            out.push(hstar_sorted(sorted, k, beta).ok().flatten());
        }
    }
    out
}

fn prepare<T: Real>(x: &[T], transform: PathTransform) -> Vec<T> {
    match transform {
        PathTransform::AbsoluteValues => sorted_ascending(&x.iter().map(|v| v.abs()).collect::<Vec<_>>()),
        PathTransform::Raw => sorted_ascending(x),
    }
}

/// Modified Hill plot: `α̂_k(β)` for all `k = 1, …, n−1`.
pub fn modified_hill_path<T: Real>(x: &[T], beta: T, transform: PathTransform) -> Result<TailIndexPath<T>> {
    if x.len() < 3 {
        return Err(Error::Input(format!("a tail path needs at least 3 values, got {}", x.len())));
    }
    if !(beta > T::zero()) {
        return Err(Error::Param(format!("beta must be positive, got {beta}")));
    }
    let sorted = prepare(x, transform);
    let n = sorted.len();
    let h = hstar_path_sorted(&sorted, beta);
    Ok(TailIndexPath {
        k_values: (1..n).collect(),
        alpha_hat: h.into_iter().map(|v| v.map(|h| h.recip())).collect(),
        beta,
        n,
    })
}

/// Student-t degrees of freedom whose averaged paths delimit the regimes.
pub const BAND_DF: [f64; 3] = [5.0, 2.0, 1.0];

/// Averaged tail-index curves for Student-t samples with 5, 2 and 1
/// degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeBands<T> {
    pub nu_levels: [f64; 3],
    /// One curve per entry of `nu_levels`, in the same order.
    pub band_curves: Vec<TailIndexPath<T>>,
    pub replicates: usize,
    pub n: usize,
}

impl<T: Real> RegimeBands<T> {
    pub fn curve(&self, nu: f64) -> Option<&TailIndexPath<T>> {
        self.nu_levels.iter().position(|&v| v == nu).map(|i| &self.band_curves[i])
    }
}

/// Simulates `replicates` Student-t samples per band, averages `H*`
/// pointwise over replicates (skipping degenerate entries) and inverts
/// the average.
///
/// Replicate `r` of band `i` uses its own RNG substream, so the result
/// does not depend on thread scheduling.
pub fn build_regime_bands<T: Real>(n: usize, replicates: usize, beta: T, seed: u64) -> Result<RegimeBands<T>> {
    if n < 10 {
        return Err(Error::Param(format!("band sample size must be at least 10, got {n}")));
    }
    if replicates == 0 {
        return Err(Error::Param("replicates must be at least 1".into()));
    }
    if !(beta > T::zero()) {
        return Err(Error::Param(format!("beta must be positive, got {beta}")));
    }
    let jobs: Vec<(usize, usize)> = (0..BAND_DF.len()).flat_map(|i| (0..replicates).map(move |r| (i, r))).collect();
    let paths: Vec<Result<Vec<Option<T>>>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let mut rng = substream(seed, stream_id(i as u32, r as u32));
            let x = draw_with(&DistSpec::StudentT { df: BAND_DF[i] }, n, &mut rng)?;
            let x: Vec<T> = x.into_iter().map(T::lit).collect();
            Ok(hstar_path_sorted(&prepare(&x, PathTransform::AbsoluteValues), beta))
        })
        .collect();
    let mut band_curves = Vec::with_capacity(BAND_DF.len());
    for i in 0..BAND_DF.len() {
        let mut sum = vec![T::zero(); n - 1];
        let mut count = vec![0usize; n - 1];
        for path in &paths[i * replicates..(i + 1) * replicates] {
            let path = path.as_ref().map_err(Clone::clone)?;
            for (j, h) in path.iter().enumerate() {
                if let Some(h) = h {
                    sum[j] += *h;
                    count[j] += 1;
                }
            }
        }
        let alpha_hat = sum
            .iter()
            .zip(&count)
            .map(|(&s, &c)| if c == 0 { None } else { Some(T::from_usize_lossy(c) / s) })
            .collect();
        band_curves.push(TailIndexPath { k_values: (1..n).collect(), alpha_hat, beta, n });
    }
    Ok(RegimeBands { nu_levels: BAND_DF, band_curves, replicates, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RegimeI,
    RegimeII,
    RegimeIII,
    Indeterminate,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::RegimeI => "RegimeI",
            Regime::RegimeII => "RegimeII",
            Regime::RegimeIII => "RegimeIII",
            Regime::Indeterminate => "Indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeClassification {
    pub regime: Regime,
    /// Shares of classified k falling in Regime I, II and III.
    pub fractions: [f64; 3],
    /// Number of k values where both the data and all bands were defined.
    pub counted: usize,
}

/// Region of one estimate relative to the band midpoints at the same k.
pub fn region_at<T: Real>(alpha: T, band5: T, band2: T, band1: T) -> Regime {
    let half = T::lit(0.5);
    let mid12 = half * (band1 + band2);
    let mid25 = half * (band2 + band5);
    if alpha < mid12 {
        Regime::RegimeIII
    } else if alpha < mid25 {
        Regime::RegimeII
    } else {
        Regime::RegimeI
    }
}

/// Default k window for classification: from 5% to 50% of the sample.
pub fn default_k_range(n: usize) -> RangeInclusive<usize> {
    let lo = ((n as f64) * 0.05).ceil().max(1.0) as usize;
    let hi = ((n as f64) * 0.5).floor() as usize;
    lo..=hi.max(lo)
}

/// Assigns each k in `k_range` to the band region containing the data
/// estimate and returns the majority region (more than half of the
/// classified k), or `Indeterminate`.
pub fn classify_regime<T: Real>(
    data: &TailIndexPath<T>,
    bands: &RegimeBands<T>,
    k_range: RangeInclusive<usize>,
) -> Result<RegimeClassification> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    let limit = data.alpha_hat.len().min(bands.band_curves.iter().map(|c| c.alpha_hat.len()).min().unwrap_or(0));
    if lo == 0 || lo > hi || hi > limit {
        return Err(Error::Range(format!("k range {lo}..={hi} is outside 1..={limit}")));
    }
    let mut counts = [0usize; 3];
    for k in lo..=hi {
        let vals = (data.at(k), bands.band_curves[0].at(k), bands.band_curves[1].at(k), bands.band_curves[2].at(k));
        if let (Some(a), Some(b5), Some(b2), Some(b1)) = vals {
            match region_at(a, b5, b2, b1) {
                Regime::RegimeI => counts[0] += 1,
                Regime::RegimeII => counts[1] += 1,
                _ => counts[2] += 1,
            }
        }
    }
    let counted: usize = counts.iter().sum();
    let fractions = if counted == 0 { [0.0; 3] } else { counts.map(|c| c as f64 / counted as f64) };
    let regime = match fractions.iter().position(|&f| f > 0.5) {
        Some(0) => Regime::RegimeI,
        Some(1) => Regime::RegimeII,
        Some(2) => Regime::RegimeIII,
        _ => Regime::Indeterminate,
    };
    Ok(RegimeClassification { regime, fractions, counted })
}

/// Support of Johnson's normalizing transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support<T> {
    RealLine,
    HalfLine(T),
    UnitInterval,
}

pub fn johnson_eta<T: Real>(x: T, support: Support<T>) -> Result<T> {
    match support {
        Support::RealLine if x.is_finite() => Ok(x),
        Support::HalfLine(a) if x > a && x.is_finite() => Ok((x - a).ln()),
        Support::UnitInterval if x > T::zero() && x < T::one() => Ok((x / (T::one() - x)).ln()),
        _ => Err(Error::Domain(format!("{x} is outside the support"))),
    }
}

/// Pareto t-score `α(1 − (α+1)/(αx))`.
pub fn pareto_t_score<T: Real>(x: T, alpha: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(x > T::one()) {
        return Err(Error::Domain(format!("Pareto support is x > 1, got {x}")));
    }
    Ok(alpha * (T::one() - (alpha + T::one()) / (alpha * x)))
}

fn check_pareto_support<T: Real>(x: &[T]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Input("empty sample".into()));
    }
    match x.iter().find(|&&v| !(v > T::one())) {
        Some(v) => Err(Error::Domain(format!("Pareto support is x > 1, got {v}"))),
        None => Ok(()),
    }
}

/// t-score estimator `α̂ = 1/(harmonic mean − 1)`.
pub fn pareto_alpha_tscore<T: Real>(x: &[T]) -> Result<T> {
    check_pareto_support(x)?;
    let hm = harmonic_mean(x)?;
    let d = hm - T::one();
    if !(d > T::zero()) {
        return Err(Error::Degenerate("harmonic mean equals 1".into()));
    }
    Ok(d.recip())
}

/// Maximum-likelihood estimator `α̂ = n / Σ ln xᵢ`.
pub fn pareto_alpha_mle<T: Real>(x: &[T]) -> Result<T> {
    check_pareto_support(x)?;
    let s: T = x.iter().map(|v| v.ln()).sum();
    Ok(T::from_usize_lossy(x.len()) / s)
}
