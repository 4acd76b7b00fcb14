//! Robust Jarque–Bera, Kolmogorov–Smirnov against a fitted Student-t
//! (asymptotic and parametric-bootstrap p-values) and Ljung–Box.

mod tfit;

pub use tfit::{fit_student_t, TFit, DF_RANGE};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sampling::{acf, draw_with, median, substream, DistSpec};
use crate::special::{chi2_sf, kolmogorov_sf, student_t_cdf};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    RobustJb,
    KsNaiveT,
    KsBootstrapT,
    LjungBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    /// Method-specific details in insertion order.
    pub extra: Vec<(String, f64)>,
}

impl TestResult {
    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn require_len<T>(x: &[T], min: usize) -> Result<()> {
    if x.len() < min {
        return Err(Error::Input(format!("test needs at least {min} observations, got {}", x.len())));
    }
    Ok(())
}

/// Seed used when `robust_jb` builds its own null calibration.
pub const RJB_CALIBRATION_SEED: u64 = 0x005e_ed0f_4ab0;

/// Median-centered skewness and kurtosis analogues `(m̃₃/J³, m̃₄/J⁴)`,
/// with `J = √(π/2)·mean|x − median|`.
fn robust_shape<T: Real>(x: &[T]) -> Result<(f64, f64)> {
    let med = median(x);
    let n = T::from_usize_lossy(x.len());
    let (mut a1, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in x {
        let d = v - med;
        a1 += d.abs();
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let j = (T::FRAC_PI_2()).sqrt() * a1 / n;
    if !(j > T::zero()) {
        return Err(Error::Degenerate("zero spread around the median".into()));
    }
    let j3 = j * j * j;
    Ok(((m3 / n / j3).as_f64(), (m4 / n / (j3 * j)).as_f64()))
}

/// Monte-Carlo null distribution of the robust JB statistic at a fixed
/// sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustJbCalibration {
    pub n: usize,
    pub replicates: usize,
    /// Normalizers of the squared skewness and kurtosis terms.
    pub c1: f64,
    pub c2: f64,
    null_sorted: Vec<f64>,
}

impl RobustJbCalibration {
    /// Simulates `replicates` standard normal samples of size `n`. The
    /// normalizers are `n` times the null second moments of the two shape
    /// terms, so each term has unit null mean.
    pub fn new(n: usize, replicates: usize, seed: u64) -> Result<Self> {
        if n < 8 {
            return Err(Error::Input(format!("robust JB needs n >= 8, got {n}")));
        }
        if replicates == 0 {
            return Err(Error::Param("calibration needs at least one replicate".into()));
        }
        let shapes: Vec<(f64, f64)> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = substream(seed, r as u64);
                let x = draw_with(&DistSpec::Normal { mean: 0.0, sd: 1.0 }, n, &mut rng)?;
                robust_shape(&x)
            })
            .collect::<Result<_>>()?;
        let nf = n as f64;
        let rf = replicates as f64;
        let c1 = nf * shapes.iter().map(|(s, _)| s * s).sum::<f64>() / rf;
        let c2 = nf * shapes.iter().map(|(_, k)| (k - 3.0) * (k - 3.0)).sum::<f64>() / rf;
        let mut null_sorted: Vec<f64> =
            shapes.iter().map(|&(s, k)| nf * (s * s / c1 + (k - 3.0) * (k - 3.0) / c2)).collect();
        null_sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { n, replicates, c1, c2, null_sorted })
    }

    /// Robust JB test of `x` against this calibration (`x.len()` must
    /// equal `n`).
    pub fn test<T: Real>(&self, x: &[T]) -> Result<TestResult> {
        if x.len() != self.n {
            return Err(Error::Input(format!("calibration is for n = {}, sample has {}", self.n, x.len())));
        }
        let (s, k) = robust_shape(x)?;
        let nf = self.n as f64;
        let stat = nf * (s * s / self.c1 + (k - 3.0) * (k - 3.0) / self.c2);
        let below = self.null_sorted.partition_point(|&v| v < stat);
        let exceed = self.null_sorted.len() - below;
        let p = (1 + exceed) as f64 / (self.replicates + 1) as f64;
        Ok(TestResult {
            statistic: stat,
            p_value: p.min(1.0),
            method: TestMethod::RobustJb,
            extra: vec![
                ("robust_skewness".into(), s),
                ("robust_kurtosis".into(), k),
                ("c1".into(), self.c1),
                ("c2".into(), self.c2),
                ("replicates".into(), self.replicates as f64),
            ],
        })
    }
}

/// Robust Jarque–Bera normality test with a Monte-Carlo p-value from
/// `mc_calibration` normal samples of the same size.
pub fn robust_jb<T: Real>(x: &[T], mc_calibration: usize) -> Result<TestResult> {
    require_len(x, 8)?;
    robust_shape(x)?;
    RobustJbCalibration::new(x.len(), mc_calibration, RJB_CALIBRATION_SEED)?.test(x)
}

/// Kolmogorov–Smirnov distance between the sample and a location-scale
/// Student-t.
fn ks_distance<T: Real>(x: &[T], fit: &TFit<T>) -> f64 {
    let mut v: Vec<T> = x.iter().map(|&xi| (xi - fit.location) / fit.scale).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &z) in v.iter().enumerate() {
        let f = student_t_cdf(z, fit.df).as_f64();
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

fn fit_extra<T: Real>(fit: &TFit<T>, n: usize) -> Vec<(String, f64)> {
    vec![
        ("df".into(), fit.df.as_f64()),
        ("location".into(), fit.location.as_f64()),
        ("scale".into(), fit.scale.as_f64()),
        ("n".into(), n as f64),
    ]
}

/// KS test against a Student-t fitted to the same data, with the
/// asymptotic Kolmogorov p-value that ignores the estimation step.
pub fn ks_naive_t<T: Real>(x: &[T]) -> Result<TestResult> {
    require_len(x, 8)?;
    let fit = fit_student_t(x)?;
    let d = ks_distance(x, &fit);
    let lambda = (x.len() as f64).sqrt() * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        method: TestMethod::KsNaiveT,
        extra: fit_extra(&fit, x.len()),
    })
}

/// `(1 + #{D* ≥ D}) / (R + 1)`.
pub fn bootstrap_p_value(d_obs: f64, d_star: &[f64]) -> f64 {
    let exceed = d_star.iter().filter(|&&d| d >= d_obs).count();
    (1 + exceed) as f64 / (d_star.len() + 1) as f64
}

/// KS test against a fitted Student-t with a parametric-bootstrap p-value:
/// each replicate simulates from the fitted law, refits and recomputes D.
/// Replicates whose refit fails are dropped and counted.
pub fn ks_bootstrap_t<T: Real>(x: &[T], replicates: usize, seed: u64) -> Result<TestResult> {
    require_len(x, 8)?;
    if replicates < 99 {
        return Err(Error::Param(format!("bootstrap needs at least 99 replicates, got {replicates}")));
    }
    let fit = fit_student_t(x)?;
    let d_obs = ks_distance(x, &fit);
    let n = x.len();
    let (df, loc, scale) = (fit.df.as_f64(), fit.location.as_f64(), fit.scale.as_f64());
    let d_star: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let sim = draw_with(&DistSpec::StudentT { df }, n, &mut rng).ok()?;
            let sim: Vec<T> = sim.into_iter().map(|v| T::lit(loc + scale * v)).collect();
            let refit = fit_student_t(&sim).ok()?;
            Some(ks_distance(&sim, &refit))
        })
        .collect();
    let ok: Vec<f64> = d_star.iter().flatten().copied().collect();
    let failed = replicates - ok.len();
    if ok.is_empty() {
        return Err(Error::Fit("every bootstrap refit failed".into()));
    }
    let mut extra = fit_extra(&fit, n);
    extra.push(("replicates".into(), replicates as f64));
    extra.push(("failed_replicates".into(), failed as f64));
    Ok(TestResult { statistic: d_obs, p_value: bootstrap_p_value(d_obs, &ok), method: TestMethod::KsBootstrapT, extra })
}

/// Ljung–Box portmanteau test over the listed lags, with a chi-square
/// p-value on `lags.len()` degrees of freedom. `extra` holds `acf_<k>`
/// and `flag_<k>` (1 when outside the ±1.96/√n band) per lag.
pub fn ljung_box<T: Real>(x: &[T], lags: &[usize]) -> Result<TestResult> {
    let n = x.len();
    let max_lag = lags.iter().copied().max().ok_or_else(|| Error::Param("no lags given".into()))?;
    if lags.contains(&0) {
        return Err(Error::Param("lags start at 1".into()));
    }
    if 4 * max_lag >= n {
        return Err(Error::Range(format!("largest lag {max_lag} must be below n/4 = {}", n / 4)));
    }
    let r = acf(x, max_lag)?;
    let nf = n as f64;
    let band = r.band.as_f64();
    let mut q = 0.0;
    let mut extra = Vec::with_capacity(2 * lags.len() + 1);
    for &k in lags {
        let rk = r.values[k - 1].as_f64();
        q += rk * rk / (nf - k as f64);
        extra.push((format!("acf_{k}"), rk));
        extra.push((format!("flag_{k}"), if rk.abs() > band { 1.0 } else { 0.0 }));
    }
    q *= nf * (nf + 2.0);
    extra.push(("band".into(), band));
    Ok(TestResult {
        statistic: q,
        p_value: chi2_sf(q, lags.len() as f64).clamp(0.0, 1.0),
        method: TestMethod::LjungBox,
        extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::draw;
    use rand_distr::{Distribution, StandardNormal};

    fn normal(n: usize, seed: u64) -> Vec<f64> {
        draw(&DistSpec::Normal { mean: 0.0, sd: 1.0 }, n, seed).unwrap().values
    }

    #[test]
    fn robust_jb_affine_invariant() {
        let x = draw(&DistSpec::StudentT { df: 3.0 }, 300, 1).unwrap().values;
        let y: Vec<f64> = x.iter().map(|v| -7.0 + 0.3 * v).collect();
        let cal = RobustJbCalibration::new(300, 199, 4).unwrap();
        let a = cal.test(&x).unwrap();
        let b = cal.test(&y).unwrap();
        assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn robust_jb_detects_cauchy() {
        let x = draw(&DistSpec::StudentT { df: 1.0 }, 1421, 3).unwrap().values;
        let r = robust_jb(&x, 199).unwrap();
        assert_eq!(r.p_value, 1.0 / 200.0);
        assert_eq!(r.method, TestMethod::RobustJb);
    }

    #[test]
    fn robust_jb_size_is_nominal() {
        let cal = RobustJbCalibration::new(500, 999, 21).unwrap();
        let rejections = (0..300).filter(|&s| cal.test(&normal(500, 1000 + s)).unwrap().p_value <= 0.05).count();
        let rate = rejections as f64 / 300.0;
        assert!((rate - 0.05).abs() <= 0.03, "{rate}");
    }

    #[test]
    fn robust_jb_bounded_under_contamination() {
        // One point sent to infinity: the statistic saturates at a level
        // set by n instead of growing with the outlier.
        for n in [100usize, 1000] {
            let cal = RobustJbCalibration::new(n, 99, 2).unwrap();
            for seed in 0..20 {
                let mut x = normal(n, seed);
                x[0] = 1e6;
                let a = cal.test(&x).unwrap().statistic;
                x[0] = 1e9;
                let b = cal.test(&x).unwrap().statistic;
                assert!(a.is_finite() && b.is_finite());
                assert!((b - a).abs() <= 0.01 * a, "n={n} {a} {b}");
            }
        }
    }

    #[test]
    fn robust_jb_errors() {
        assert!(matches!(robust_jb(&[1.0f64; 20], 99), Err(Error::Degenerate(_))));
        assert!(matches!(robust_jb(&[1.0f64, 2.0, 3.0], 99), Err(Error::Input(_))));
    }

    #[test]
    fn bootstrap_arithmetic() {
        assert_eq!(bootstrap_p_value(1.0, &[0.5; 99]), 0.01);
        assert_eq!(bootstrap_p_value(0.1, &[0.5; 99]), 1.0);
        assert!(bootstrap_p_value(0.5, &[0.5; 9]) == 1.0);
    }

    #[test]
    fn ks_variants_share_the_statistic() {
        let x = draw(&DistSpec::StudentT { df: 5.0 }, 200, 8).unwrap().values;
        let a = ks_naive_t(&x).unwrap();
        let b = ks_bootstrap_t(&x, 99, 1).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.extra("df"), b.extra("df"));
        assert!(b.p_value > 0.0 && b.p_value <= 1.0);
        assert_eq!(b.extra("failed_replicates"), Some(0.0));
        assert!(ks_bootstrap_t(&x, 50, 1).is_err());
    }

    #[test]
    fn ks_naive_rejects_strong_skew() {
        let x = draw(&DistSpec::SkewedT { df: 4.0, gamma: 0.2 }, 1000, 3).unwrap().values;
        assert!(ks_naive_t(&x).unwrap().p_value < 0.01);
        let y = draw(&DistSpec::StudentT { df: 4.0 }, 1000, 3).unwrap().values;
        assert!(ks_naive_t(&y).unwrap().p_value > 0.05);
    }

    #[test]
    fn ks_distance_matches_brute_force() {
        let x = draw(&DistSpec::StudentT { df: 3.0 }, 50, 2).unwrap().values;
        let fit = fit_student_t(&x).unwrap();
        let d = ks_distance(&x, &fit);
        // sup over a fine grid of |F_n − F| approaches D from below
        let mut brute: f64 = 0.0;
        for i in 0..=20_000 {
            let t = -30.0 + 60.0 * i as f64 / 20_000.0;
            let fn_ = x.iter().filter(|&&v| v <= t).count() as f64 / 50.0;
            let f = student_t_cdf((t - fit.location) / fit.scale, fit.df);
            brute = brute.max((fn_ - f).abs());
        }
        assert!(brute <= d + 1e-12 && d - brute < 0.01, "{d} {brute}");
    }

    #[test]
    fn ljung_box_detects_ar1() {
        let mut rng = substream(5, 0);
        let mut x = vec![0.0f64; 2000];
        for t in 1..x.len() {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[t] = 0.5 * x[t - 1] + e;
        }
        let lags: Vec<usize> = (1..=30).collect();
        let r = ljung_box(&x, &lags).unwrap();
        assert!(r.p_value < 0.01);
        assert_eq!(r.extra("flag_1"), Some(1.0));
    }

    #[test]
    fn ljung_box_size() {
        let lags: Vec<usize> = (1..=30).collect();
        let seeds = 200;
        let rej = (0..seeds).filter(|&s| ljung_box(&normal(10_000, s), &lags).unwrap().p_value <= 0.05).count();
        let rate = rej as f64 / seeds as f64;
        assert!((rate - 0.05).abs() <= 0.03, "{rate}");
    }

    #[test]
    fn ljung_box_errors() {
        let x = normal(100, 1);
        assert!(matches!(ljung_box(&x, &[25]), Err(Error::Range(_))));
        assert!(matches!(ljung_box(&x, &[]), Err(Error::Param(_))));
        assert!(matches!(ljung_box(&[1.0f64; 100], &[1, 2]), Err(Error::Degenerate(_))));
    }
}
