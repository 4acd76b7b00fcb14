use crate::error::{Error, Result};
use crate::real::Real;
use crate::sampling::{median, sd};
use crate::special::ln_gamma;

/// Degrees-of-freedom search interval for the Student-t fit.
pub const DF_RANGE: (f64, f64) = (0.5, 50.0);
const GRID_POINTS: usize = 9;
const GOLDEN_TOL: f64 = 1e-4;
const EM_MAX_ITER: usize = 2000;

/// Maximum-likelihood location-scale Student-t fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TFit<T> {
    pub df: T,
    pub location: T,
    pub scale: T,
    pub loglik: T,
}

/// Location and scale maximizing the likelihood for fixed `df`.
///
/// Fixed-point iteration on the weighted mean and weighted variance; the
/// variance is normalized by the weight total, which shares its fixed
/// point with the plain likelihood equations but converges faster.
fn location_scale<T: Real>(x: &[T], df: T, start: (T, T)) -> (T, T) {
    let (mut m, mut s) = start;
    let one = T::one();
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(16.0));
    for _ in 0..EM_MAX_ITER {
        let s2 = s * s;
        let (mut sw, mut swx) = (T::zero(), T::zero());
        for &v in x {
            let d = v - m;
            let w = (df + one) / (df + d * d / s2);
            sw += w;
            swx += w * v;
        }
        let m_new = swx / sw;
        let mut sws = T::zero();
        for &v in x {
            let d = v - m;
            let w = (df + one) / (df + d * d / s2);
            let e = v - m_new;
            sws += w * e * e;
        }
        let s_new = (sws / sw).sqrt();
        let step = (m_new - m).abs() + (s_new - s).abs();
        m = m_new;
        s = s_new;
        if !(step > tol * s) {
            break;
        }
    }
    (m, s)
}

fn loglik<T: Real>(x: &[T], df: T, m: T, s: T) -> T {
    let half = T::lit(0.5);
    let n = T::from_usize_lossy(x.len());
    let c = ln_gamma(half * (df + T::one())) - ln_gamma(half * df) - half * (df * T::PI()).ln() - s.ln();
    let tail: T = x
        .iter()
        .map(|&v| {
            let d = (v - m) / s;
            (d * d / df).ln_1p()
        })
        .sum();
    n * c - half * (df + T::one()) * tail
}

struct Profile<'a, T> {
    x: &'a [T],
    start: (T, T),
}

impl<T: Real> Profile<'_, T> {
    fn eval(&mut self, ln_df: T) -> (T, T, T) {
        let df = ln_df.exp();
        let (m, s) = location_scale(self.x, df, self.start);
        if m.is_finite() && s.is_finite() && s > T::zero() {
            self.start = (m, s);
        }
        (loglik(self.x, df, m, s), m, s)
    }
}

/// Fits a location-scale Student-t by profile likelihood: golden-section
/// search over `ln df` on [`DF_RANGE`], bracketed by a coarse grid, with
/// location and scale maximized for each candidate `df`.
pub fn fit_student_t<T: Real>(x: &[T]) -> Result<TFit<T>> {
    if x.len() < 3 {
        return Err(Error::Input("t fit needs at least 3 observations".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("t fit needs finite observations".into()));
    }
    let spread = sd(x);
    if !(spread > T::zero()) {
        return Err(Error::Degenerate("all observations are equal".into()));
    }
    let mut prof = Profile { x, start: (median(x), spread) };
    let lo = T::lit(DF_RANGE.0.ln());
    let hi = T::lit(DF_RANGE.1.ln());
    let step = (hi - lo) / T::from_usize_lossy(GRID_POINTS - 1);
    let grid: Vec<T> = (0..GRID_POINTS).map(|i| lo + step * T::from_usize_lossy(i)).collect();
    // sweep from heavy to light tails so each start is a nearby solution
    let mut best = (0, T::neg_infinity());
    for (i, &g) in grid.iter().enumerate() {
        let (ll, _, _) = prof.eval(g);
        if ll > best.1 {
            best = (i, ll);
        }
    }
    let i = best.0;
    let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(GRID_POINTS - 1)]);
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    prof.start = (median(x), spread);
    let mut fc = prof.eval(c).0;
    let mut fd = prof.eval(d).0;
    while (b - a).abs() > T::lit(GOLDEN_TOL) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = prof.eval(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = prof.eval(d).0;
        }
    }
    let ln_df = (a + b) / T::lit(2.0);
    let (ll, m, s) = prof.eval(ln_df);
    if !(ll.is_finite() && m.is_finite() && s.is_finite() && s > T::zero()) {
        return Err(Error::Fit("Student-t likelihood did not converge".into()));
    }
    Ok(TFit { df: ln_df.exp(), location: m, scale: s, loglik: ll })
}
