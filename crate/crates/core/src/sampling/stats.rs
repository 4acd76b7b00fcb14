use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub sd: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

pub fn mean<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len())
}

/// Standard deviation with the divide-by-n convention.
pub fn sd<T: Real>(x: &[T]) -> T {
    let m = mean(x);
    let ss: T = x.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::from_usize_lossy(x.len())).sqrt()
}

pub fn median<T: Real>(x: &[T]) -> T {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Mean, sd, skewness and excess kurtosis from divide-by-n central moments.
pub fn moments<T: Real>(x: &[T]) -> Result<Moments<T>> {
    if x.len() < 3 {
        return Err(Error::Input(format!("moments need at least 3 values, got {}", x.len())));
    }
    let n = T::from_usize_lossy(x.len());
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if !(m2 > T::zero()) {
        return Err(Error::Degenerate("all values are equal".into()));
    }
    Ok(Moments {
        mean: m,
        sd: m2.sqrt(),
        skewness: m3 / (m2 * m2.sqrt()),
        excess_kurtosis: m4 / (m2 * m2) - T::lit(3.0),
    })
}

/// `n / Σ(1/xᵢ)` for strictly positive values.
pub fn harmonic_mean<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return Err(Error::Input("harmonic mean of an empty sample".into()));
    }
    let mut inv = T::zero();
    for &v in x {
        if !(v > T::zero()) {
            return Err(Error::Domain(format!("harmonic mean needs positive values, got {v}")));
        }
        inv += v.recip();
    }
    Ok(T::from_usize_lossy(x.len()) / inv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult<T> {
    /// r₁ … r_max_lag.
    pub values: Vec<T>,
    /// Half-width 1.96/√n of the white-noise band.
    pub band: T,
}

impl<T: Real> AcfResult<T> {
    pub fn flagged(&self) -> Vec<bool> {
        self.values.iter().map(|r| r.abs() > self.band).collect()
    }
}

/// Sample autocorrelations at lags 1..=max_lag (biased estimator).
pub fn acf<T: Real>(x: &[T], max_lag: usize) -> Result<AcfResult<T>> {
    let n = x.len();
    if max_lag == 0 || max_lag >= n {
        return Err(Error::Range(format!("max_lag must be in 1..{n}, got {max_lag}")));
    }
    let m = mean(x);
    let d: Vec<T> = x.iter().map(|&v| v - m).collect();
    let c0: T = d.iter().map(|&v| v * v).sum();
    if !(c0 > T::zero()) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let values = (1..=max_lag).map(|k| d[..n - k].iter().zip(&d[k..]).map(|(&a, &b)| a * b).sum::<T>() / c0).collect();
    Ok(AcfResult { values, band: T::lit(1.96) / T::from_usize_lossy(n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{draw, DistSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_sample_has_zero_skewness() {
        let m = moments(&[-1.0f64, 0.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert_abs_diff_eq!(m.sd, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.excess_kurtosis, 1.5 - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(moments(&[1.0f64; 4]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn moments_match_hand_computation() {
        let x = [1.0f64, 2.0, 2.0, 3.0, 9.0];
        let n = 5.0;
        let m = 17.0 / n;
        let c = |p: i32| x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / n;
        let r = moments(&x).unwrap();
        assert_abs_diff_eq!(r.skewness, c(3) / c(2).powf(1.5), epsilon = 1e-12);
        assert_abs_diff_eq!(r.excess_kurtosis, c(4) / c(2).powi(2) - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_eq!(harmonic_mean(&[2.0f64, 2.0, 2.0]).unwrap(), 2.0);
        assert_abs_diff_eq!(harmonic_mean(&[1.0f64, 4.0]).unwrap(), 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(harmonic_mean(&[1.0f64, 2.0, 4.0]).unwrap(), 12.0 / 7.0, epsilon = 1e-15);
        assert!(matches!(harmonic_mean(&[1.0f64, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn acf_of_trend_and_periodic_series() {
        let trend: Vec<f64> = (0..5000).map(|i| i as f64).collect();
        assert!(acf(&trend, 1).unwrap().values[0] > 0.99);
        let periodic: Vec<f64> = (0..6000).map(|i| ((i % 7) as f64).sin()).collect();
        let r = acf(&periodic, 7).unwrap();
        assert!(r.values[6] > 0.99);
        assert!(acf(&[1.0f64; 10], 2).is_err());
        assert!(acf(&trend[..5], 5).is_err());
    }

    #[test]
    fn acf_white_noise_band_rate() {
        let mut flagged = 0usize;
        let seeds = 100;
        for seed in 0..seeds {
            let s = draw(&DistSpec::Normal { mean: 0.0, sd: 1.0 }, 10_000, seed).unwrap();
            flagged += acf(&s.values, 30).unwrap().flagged().iter().filter(|&&f| f).count();
        }
        let rate = flagged as f64 / (30 * seeds) as f64;
        assert!(rate <= 0.07, "{rate}");
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0f64, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0f64, 1.0, 2.0, 3.0]), 2.5);
    }
}
