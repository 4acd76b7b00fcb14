//! Iterative moment-matching fit of `(μ, σ, γ)` for Lambert W × F data.
//!
//! Each sweep standardizes the data with the current location and scale,
//! picks the skewness parameter that makes the back-transformed sample
//! symmetric, and refreshes location and scale from the mean and sd of the
//! back-transformed values on the original scale.

use crate::error::{Error, Result};
use crate::lambertw::{branch_point, lambert_w, Branch};
use crate::real::Real;
use crate::sampling::{mean, median, sd};
use crate::transform::LwfParams;

/// Interval width at which the skewness root search stops.
pub const GAMMA_SOLVER_TOL: f64 = 1e-6;
const GAMMA_FIRST_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgmmConfig<T> {
    /// Stop once the Euclidean step in `(μ, σ, γ)` is at most this.
    pub tol: T,
    pub max_iter: usize,
    pub gamma_bounds: (T, T),
    /// Flag the fit as diverged once `|μ|` or `σ` exceeds this.
    pub divergence_guard: T,
}

impl<T: Real> Default for IgmmConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            max_iter: 100,
            gamma_bounds: (T::lit(-2.0), T::lit(2.0)),
            divergence_guard: T::lit(1e8),
        }
    }
}

impl<T: Real> IgmmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::Param("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Param("max_iter must be at least 1".into()));
        }
        let (lo, hi) = self.gamma_bounds;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Param("gamma_bounds must be a finite, non-empty interval".into()));
        }
        if !(self.divergence_guard > T::zero()) {
            return Err(Error::Param("divergence_guard must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    MaxIterReached,
    Diverged,
}

impl FitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitStatus::Converged => "Converged",
            FitStatus::MaxIterReached => "MaxIterReached",
            FitStatus::Diverged => "Diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    /// Final iterate, reported even when the fit diverged.
    pub tau_hat: LwfParams<T>,
    pub iterations: usize,
    /// Iterates including the starting point; `iterations + 1` entries.
    pub trace: Vec<LwfParams<T>>,
    pub status: FitStatus,
    /// Share of points clamped at the branch point in the final sweep.
    pub clamped_fraction: T,
}

/// Score of the normal location model, `(x − μ)/σ²`.
pub fn normal_score<T: Real>(x: T, mu: T, sigma: T) -> T {
    (x - mu) / (sigma * sigma)
}

/// Writes `W₀(γz)/γ` into `out`, clamping points past the branch point to
/// `−1/γ`. Returns how many points were clamped.
fn back_transform<T: Real>(z: &[T], gamma: T, out: &mut Vec<T>) -> usize {
    out.clear();
    if gamma == T::zero() {
        out.extend_from_slice(z);
        return 0;
    }
    let bp = branch_point::<T>();
    let mut clamped = 0;
    for &v in z {
        let a = gamma * v;
        match lambert_w(a, Branch::Principal) {
            Ok(w) => out.push(w / gamma),
            Err(_) => {
                debug_assert!(a < bp || a.is_nan());
                clamped += 1;
                out.push(-gamma.recip());
            }
        }
    }
    clamped
}

fn skewness<T: Real>(x: &[T]) -> T {
    let n = T::from_usize_lossy(x.len());
    let m = mean(x);
    let (mut m2, mut m3) = (T::zero(), T::zero());
    for &v in x {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if !(m2 > T::zero()) {
        return T::nan();
    }
    m3 / (m2 * m2.sqrt())
}

/// Range of γ for which every `γ·zᵢ` stays on the principal-branch domain,
/// intersected with `bounds`.
fn admissible_gamma<T: Real>(z: &[T], bounds: (T, T)) -> (T, T) {
    let inv_e = -branch_point::<T>();
    let zmax = z.iter().copied().fold(T::neg_infinity(), T::max);
    let zmin = z.iter().copied().fold(T::infinity(), T::min);
    let (mut lo, mut hi) = bounds;
    if zmax > T::zero() {
        lo = lo.max(-inv_e / zmax);
    }
    if zmin < T::zero() {
        hi = hi.min(inv_e / -zmin);
    }
    if lo > hi {
        // bounds exclude every admissible value; fall back to the raw bounds
        return bounds;
    }
    (lo, hi)
}

/// Chooses γ so that the back-transformed standardized data have zero
/// sample skewness.
///
/// The search starts at γ = 0 (or the nearest admissible value), steps
/// with doubling width in the direction that reduces the skewness until
/// the sign changes, then bisects. Only γ values keeping every point on
/// the principal branch are considered. Without a sign change the
/// admissible endpoint with the smaller |skewness| is returned.
pub fn solve_gamma<T: Real>(z: &[T], bounds: (T, T)) -> T {
    let (lo, hi) = admissible_gamma(z, bounds);
    let mut buf = Vec::with_capacity(z.len());
    let mut f = |g: T| {
        back_transform(z, g, &mut buf);
        skewness(&buf)
    };
    let start = T::zero().max(lo).min(hi);
    let f0 = f(start);
    if f0 == T::zero() || f0.is_nan() {
        return start;
    }
    let dir = if f0 > T::zero() { T::one() } else { -T::one() };
    let end = if f0 > T::zero() { hi } else { lo };
    let (mut a, mut fa) = (start, f0);
    let mut h = T::lit(GAMMA_FIRST_STEP);
    let mut bracket = None;
    while a != end {
        let mut b = a + dir * h;
        if (b - end) * dir >= T::zero() {
            b = end;
        }
        let fb = f(b);
        if fb.is_nan() {
            break;
        }
        if (fa > T::zero()) != (fb > T::zero()) || fb == T::zero() {
            bracket = Some((a, fa, b));
            break;
        }
        a = b;
        fa = fb;
        h *= T::lit(2.0);
    }
    match bracket {
        Some((mut a, mut fa, mut b)) => {
            let tol = T::lit(GAMMA_SOLVER_TOL);
            while (b - a).abs() > tol {
                let mid = (a + b) / T::lit(2.0);
                let fm = f(mid);
                if fm == T::zero() {
                    return mid;
                }
                if (fm > T::zero()) == (fa > T::zero()) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            (a + b) / T::lit(2.0)
        }
        None => {
            let (flo, fhi) = (f(lo).abs(), f(hi).abs());
            if fhi.is_nan() || flo <= fhi {
                lo
            } else {
                hi
            }
        }
    }
}

/// Fits `(μ, σ, γ)` by iterated skewness matching.
///
/// Starts from the sample median, the sample sd and γ = 0. A diverging
/// fit is not an error: the report carries the last iterate and the
/// `Diverged` status.
pub fn fit<T: Real>(y: &[T], config: &IgmmConfig<T>) -> Result<FitReport<T>> {
    config.validate()?;
    if y.len() < 10 {
        return Err(Error::Input(format!("IGMM needs at least 10 observations, got {}", y.len())));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("observation {i} is not finite")));
    }
    let n = T::from_usize_lossy(y.len());
    let sigma0 = sd(y);
    if !(sigma0 > T::zero()) {
        return Err(Error::Degenerate("all observations are equal".into()));
    }
    let (glo, ghi) = config.gamma_bounds;
    let mut tau = LwfParams { mu: median(y), sigma: sigma0, gamma: T::zero().max(glo).min(ghi) };
    let mut trace = vec![tau];
    let mut status = FitStatus::MaxIterReached;
    let mut clamped_fraction = T::zero();
    let mut z = Vec::with_capacity(y.len());
    let mut u = Vec::with_capacity(y.len());
    for _ in 0..config.max_iter {
        z.clear();
        z.extend(y.iter().map(|&v| (v - tau.mu) / tau.sigma));
        let gamma = solve_gamma(&z, config.gamma_bounds);
        let clamped = back_transform(&z, gamma, &mut u);
        clamped_fraction = T::from_usize_lossy(clamped) / n;
        for v in u.iter_mut() {
            *v = *v * tau.sigma + tau.mu;
        }
        let next = LwfParams { mu: mean(&u), sigma: sd(&u), gamma };
        trace.push(next);
        let guard = config.divergence_guard;
        if !next.mu.is_finite()
            || !next.sigma.is_finite()
            || next.mu.abs() > guard
            || next.sigma > guard
            || !(next.sigma > T::zero())
        {
            status = FitStatus::Diverged;
            tau = next;
            break;
        }
        let step = next.distance(&tau);
        tau = next;
        if step <= config.tol {
            status = FitStatus::Converged;
            break;
        }
    }
    Ok(FitReport { tau_hat: tau, iterations: trace.len() - 1, trace, status, clamped_fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{draw, moments, DistSpec};
    use crate::transform::forward;
    use approx::assert_abs_diff_eq;

    fn simulate(spec: DistSpec, tau: LwfParams<f64>, seed: u64) -> Vec<f64> {
        let u = draw(&spec, 1000, seed).unwrap();
        forward(&u.values, &tau).unwrap()
    }

    #[test]
    fn normal_score_examples() {
        assert_eq!(normal_score(1.3f64, 1.3, 2.0), 0.0);
        assert_eq!(normal_score(3.0f64, 1.0, 2.0), 0.5);
        assert_eq!(normal_score(0.0f64, 1.0, 1.0), -1.0);
    }

    #[test]
    fn input_validation() {
        let cfg = IgmmConfig::default();
        assert!(matches!(fit(&[1.0f64; 5], &cfg), Err(Error::Input(_))));
        let mut y = vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        y[3] = f64::INFINITY;
        assert!(matches!(fit(&y, &cfg), Err(Error::Input(_))));
        assert!(matches!(fit(&[2.0f64; 12], &cfg), Err(Error::Degenerate(_))));
        let bad = IgmmConfig { gamma_bounds: (1.0, 1.0), ..cfg };
        assert!(matches!(fit(&[1.0f64; 12], &bad), Err(Error::Param(_))));
    }

    #[test]
    fn solved_gamma_zeroes_skewness() {
        let y = simulate(DistSpec::Normal { mean: 0.0, sd: 1.0 }, LwfParams::new(0.0, 1.0, 0.2).unwrap(), 4);
        let g = solve_gamma(&y, (-2.0, 2.0));
        let mut u = Vec::new();
        back_transform(&y, g, &mut u);
        assert!(skewness(&u).abs() < 1e-4, "{}", skewness(&u));
        assert!(g > 0.0);
    }

    #[test]
    fn trace_length_matches_iterations() {
        for (spec, seed) in [(DistSpec::StudentT { df: 5.0 }, 1), (DistSpec::StudentT { df: 1.0 }, 2)] {
            let y = simulate(spec, LwfParams::new(0.2, 1.5, 0.1).unwrap(), seed);
            let r = fit(&y, &IgmmConfig::default()).unwrap();
            assert_eq!(r.trace.len(), r.iterations + 1);
            assert_eq!(*r.trace.last().unwrap(), r.tau_hat);
            assert!(r.clamped_fraction >= 0.0 && r.clamped_fraction <= 1.0);
        }
    }

    #[test]
    fn regime_one_recovery() {
        let tau = LwfParams::new(0.2, 1.5, 0.1).unwrap();
        let y = simulate(DistSpec::StudentT { df: 5.0 }, tau, 7);
        let r = fit(&y, &IgmmConfig::default()).unwrap();
        assert_eq!(r.status, FitStatus::Converged);
        assert!((r.tau_hat.gamma - 0.1).abs() < 0.1);
        assert!((r.tau_hat.mu - 0.2).abs() < 0.2);
        assert_eq!(r.clamped_fraction, 0.0);
    }

    #[test]
    fn symmetric_input_needs_no_skew_correction() {
        let mut g: Vec<f64> = (0..50)
            .map(|seed| {
                let s = draw(&DistSpec::Normal { mean: 0.0, sd: 1.0 }, 1000, seed).unwrap();
                fit(&s.values, &IgmmConfig::default()).unwrap().tau_hat.gamma.abs()
            })
            .collect();
        g.sort_by(|a, b| a.total_cmp(b));
        assert!(g[25] < 0.05, "{}", g[25]);
    }

    #[test]
    fn gamma_step_is_affine_invariant() {
        let y = simulate(DistSpec::StudentT { df: 5.0 }, LwfParams::new(0.2, 1.5, 0.15).unwrap(), 9);
        let (mu, sigma) = (0.3, 1.7);
        let z: Vec<f64> = y.iter().map(|v| (v - mu) / sigma).collect();
        let (a, b) = (-4.0, 2.5);
        let z2: Vec<f64> = y.iter().map(|v| ((a + b * v) - (a + b * mu)) / (b * sigma)).collect();
        let g1 = solve_gamma(&z, (-2.0, 2.0));
        let g2 = solve_gamma(&z2, (-2.0, 2.0));
        assert_abs_diff_eq!(g1, g2, epsilon = 2.0 * GAMMA_SOLVER_TOL);
    }

    #[test]
    fn fit_is_location_scale_equivariant() {
        let y = simulate(DistSpec::StudentT { df: 5.0 }, LwfParams::new(0.2, 1.5, 0.1).unwrap(), 10);
        let (a, b) = (3.0, 0.5);
        let y2: Vec<f64> = y.iter().map(|v| a + b * v).collect();
        let r1 = fit(&y, &IgmmConfig::default()).unwrap();
        let r2 = fit(&y2, &IgmmConfig::default()).unwrap();
        assert_abs_diff_eq!(r2.tau_hat.gamma, r1.tau_hat.gamma, epsilon = 1e-4);
        assert_abs_diff_eq!(r2.tau_hat.mu, a + b * r1.tau_hat.mu, epsilon = 1e-4);
        assert_abs_diff_eq!(r2.tau_hat.sigma, b * r1.tau_hat.sigma, epsilon = 1e-4);
    }

    #[test]
    fn back_transformed_fit_is_nearly_symmetric() {
        let tau = LwfParams::new(0.0, 1.0, 0.3).unwrap();
        let y = simulate(DistSpec::Normal { mean: 0.0, sd: 1.0 }, tau, 12);
        let r = fit(&y, &IgmmConfig::default()).unwrap();
        let u = crate::transform::inverse(&y, &r.tau_hat, crate::transform::InversePolicy::Clamp).unwrap();
        assert!(moments(&u.values).unwrap().skewness.abs() < 0.01);
    }

    #[test]
    fn single_precision_fit_runs() {
        let y = simulate(DistSpec::StudentT { df: 5.0 }, LwfParams::new(0.2, 1.5, 0.1).unwrap(), 3);
        let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
        let cfg = IgmmConfig::<f32> { tol: 1e-4, ..IgmmConfig::default() };
        let r = fit(&y32, &cfg).unwrap();
        assert!((r.tau_hat.gamma - 0.1).abs() < 0.15);
    }
}
