//! Real branches of the Lambert W function and the `G_u` functionals.

use crate::error::{Error, Result};
use crate::real::Real;

/// Real branch selector: `Principal` is W₀ (values ≥ −1), `NonPrincipal`
/// is W₋₁ (values ≤ −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    NonPrincipal,
}

/// Shape parameter `u > 0` of `G_u(x) = x − u ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuParams<T> {
    pub u: T,
}

impl<T: Real> GuParams<T> {
    pub fn new(u: T) -> Result<Self> {
        if !(u > T::zero()) || !u.is_finite() {
            return Err(Error::Param(format!("u must be positive and finite, got {u}")));
        }
        Ok(Self { u })
    }
}

// 1/e split into a leading double and its rounding remainder, so that
// z + 1/e can be formed without cancellation near the branch point.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_977_6e-17;

/// Inputs this far below −1/e are treated as sitting on the branch point.
pub const BRANCH_POINT_SLACK: f64 = 1e-14;

/// Returns −1/e in the working precision.
pub fn branch_point<T: Real>() -> T {
    -T::lit(INV_E_HI)
}

/// p = √(2(e·z + 1)), computed from the distance of z to −1/e.
fn branch_distance<T: Real>(z: T) -> T {
    let d = (z + T::lit(INV_E_HI)) + T::lit(INV_E_LO);
    let d = d.max(T::zero());
    (T::lit(2.0) * T::E() * d).sqrt()
}

/// Series for W around the branch point in powers of `p`; pass `-p`
/// for the lower branch.
fn branch_series<T: Real>(p: T) -> T {
    const C: [f64; 9] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17_280.0,
        -221.0 / 8_505.0,
        680_863.0 / 43_545_600.0,
        -1_963.0 / 204_120.0,
    ];
    let mut acc = T::lit(C[8]);
    for &c in C[..8].iter().rev() {
        acc = acc * p + T::lit(c);
    }
    acc
}

fn halley<T: Real>(z: T, mut w: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - z;
        if f == T::zero() {
            break;
        }
        let wp1 = w + one;
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= tol * (one + w.abs()) {
            break;
        }
    }
    w
}

/// Evaluates the real Lambert W function on the requested branch.
///
/// Arguments slightly below −1/e (within [`BRANCH_POINT_SLACK`]) are
/// snapped to the branch point.
pub fn lambert_w<T: Real>(z: T, branch: Branch) -> Result<T> {
    let one = T::one();
    let bp = branch_point::<T>();
    if z.is_nan() {
        return Err(Error::Domain("lambert_w of NaN".into()));
    }
    let mut z = z;
    if z < bp {
        let slack = T::lit(BRANCH_POINT_SLACK).max(T::epsilon() * T::lit(2.0));
        if bp - z <= slack {
            z = bp;
        } else {
            return Err(Error::Domain(format!("z = {z} is below -1/e")));
        }
    }
    match branch {
        Branch::Principal => {
            if z == T::zero() {
                return Ok(T::zero());
            }
            if z == T::infinity() {
                return Ok(z);
            }
            let p = branch_distance(z);
            if p < T::lit(1e-3) {
                return Ok(branch_series(p));
            }
            let w0 = if z < T::lit(-0.25) {
                branch_series(p)
            } else if z < T::lit(3.0) {
                let l = z.ln_1p();
                l * (one - l.ln_1p() / (T::lit(2.0) + l))
            } else {
                let l1 = z.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            };
            Ok(halley(z, w0).max(-one))
        }
        Branch::NonPrincipal => {
            if z >= T::zero() {
                return Err(Error::Domain(format!("lower branch needs -1/e <= z < 0, got {z}")));
            }
            let p = branch_distance(z);
            if p < T::lit(1e-3) {
                return Ok(branch_series(-p));
            }
            let w0 = if z < T::lit(-0.25) {
                branch_series(-p)
            } else {
                let l1 = (-z).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            };
            Ok(halley(z, w0).min(-one))
        }
    }
}

/// `G_u(x) = x − u ln x` for `x > 0`.
pub fn g_u<T: Real>(x: T, params: GuParams<T>) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("g_u needs x > 0, got {x}")));
    }
    Ok(x - params.u * x.ln())
}

/// Absolute gap between `−u ln(x·exp(−x/u))` and `G_u(x)`.
///
/// The product is formed directly while it stays a normal float; once it
/// would underflow the logarithm is taken term by term.
pub fn g_u_relation_check<T: Real>(x: T, params: GuParams<T>) -> Result<T> {
    let g = g_u(x, params)?;
    let u = params.u;
    let y = x * (-x / u).exp();
    let ln_y = if y >= T::min_positive_value() && y.is_finite() { y.ln() } else { x.ln() - x / u };
    Ok((-u * ln_y - g).abs())
}

/// I-divergence `Σ [G_u(θ yᵢ) − G_u(u)]`.
///
/// Each term is evaluated as `u·(r − 1 − ln r)` with `r = θyᵢ/u`, which is
/// the same quantity without the cancellation of the direct difference.
pub fn i_divergence<T: Real>(y: &[T], theta: T, params: GuParams<T>) -> Result<T> {
    if !(theta > T::zero()) {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    let u = params.u;
    let mut total = T::zero();
    for &yi in y {
        if !(yi > T::zero()) {
            return Err(Error::Domain(format!("i_divergence needs y > 0, got {yi}")));
        }
        let d = theta * yi / u - T::one();
        let term = u * (d - d.ln_1p());
        total += term.max(T::zero());
    }
    Ok(total)
}
