//! Special functions backing the distribution-based tests.

use crate::real::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos approximation).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn cf_tolerance<T: Real>() -> T {
    T::epsilon() * T::lit(4.0)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);
    let tol = cf_tolerance::<T>();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=500 {
        let m = T::from_usize_lossy(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h *= del;
        if (del - one).abs() <= tol {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn beta_reg<T: Real>(a: T, b: T, x: T) -> T {
    let zero = T::zero();
    let one = T::one();
    if x <= zero {
        return zero;
    }
    if x >= one {
        return one;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + one) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        one - front * beta_cf(b, a, one - x) / b
    }
}

/// CDF of the standard Student-t distribution with `df` degrees of freedom.
pub fn student_t_cdf<T: Real>(t: T, df: T) -> T {
    let half = T::lit(0.5);
    if t.is_nan() {
        return t;
    }
    if t.is_infinite() {
        return if t > T::zero() { T::one() } else { T::zero() };
    }
    let x = df / (df + t * t);
    let tail = half * beta_reg(half * df, half, x);
    if t > T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

/// Upper regularized incomplete gamma function Q(a, x).
pub fn gamma_reg_upper<T: Real>(a: T, x: T) -> T {
    let zero = T::zero();
    let one = T::one();
    if x <= zero {
        return one;
    }
    if x.is_infinite() {
        return zero;
    }
    let tol = cf_tolerance::<T>();
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + one {
        let mut ap = a;
        let mut del = one / a;
        let mut sum = del;
        for _ in 0..1000 {
            ap += one;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * tol {
                break;
            }
        }
        (one - sum * ln_front.exp()).max(zero)
    } else {
        let tiny = T::min_positive_value() / T::epsilon();
        let mut b = x + one - a;
        let mut c = one / tiny;
        let mut d = one / b;
        let mut h = d;
        for i in 1..=1000 {
            let i = T::from_usize_lossy(i);
            let an = -i * (i - a);
            b += T::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = one / d;
            let del = d * c;
            h *= del;
            if (del - one).abs() <= tol {
                break;
            }
        }
        (ln_front.exp() * h).min(one)
    }
}

/// Survival function of the chi-square distribution.
pub fn chi2_sf<T: Real>(q: T, df: T) -> T {
    let half = T::lit(0.5);
    gamma_reg_upper(half * df, half * q)
}

/// Asymptotic Kolmogorov survival function P(K > lambda).
///
/// Uses the alternating series for `lambda >= 1.18` and the equivalent
/// theta-function form below it, where the alternating series converges
/// too slowly.
pub fn kolmogorov_sf<T: Real>(lambda: T) -> T {
    let zero = T::zero();
    let one = T::one();
    if lambda.is_nan() {
        return lambda;
    }
    if lambda <= zero {
        return one;
    }
    let term_tol = T::lit(1e-10);
    let p = if lambda < T::lit(1.18) {
        let pi = T::PI();
        let c = -(pi * pi) / (T::lit(8.0) * lambda * lambda);
        let mut sum = zero;
        for k in 1..=100 {
            let odd = T::from_usize_lossy(2 * k - 1);
            let term = (odd * odd * c).exp();
            sum += term;
            if term < term_tol * T::lit(1e-6) {
                break;
            }
        }
        one - (T::lit(2.0) * pi).sqrt() / lambda * sum
    } else {
        let c = T::lit(-2.0) * lambda * lambda;
        let mut sum = zero;
        let mut sign = one;
        for k in 1..=100 {
            let kk = T::from_usize_lossy(k);
            let term = (c * kk * kk).exp();
            sum += sign * term;
            if term < term_tol {
                break;
            }
            sign = -sign;
        }
        T::lit(2.0) * sum
    };
    p.max(zero).min(one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert_relative_eq!(ln_gamma(n as f64), fact.ln(), epsilon = 1e-12, max_relative = 1e-13);
            fact *= n as f64;
        }
        assert_relative_eq!(ln_gamma(0.5f64), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-13);
    }

    #[test]
    fn ln_gamma_agrees_with_statrs() {
        for &x in &[0.01, 0.3, 0.75, 1.5, 3.3, 12.25, 77.0, 400.5] {
            assert_relative_eq!(
                ln_gamma(x),
                statrs::function::gamma::ln_gamma(x),
                epsilon = 1e-11,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn beta_reg_symmetry_and_oracle() {
        for &(a, b, x) in &[(0.5, 0.5, 0.3), (2.0, 3.0, 0.4), (10.0, 0.5, 0.93), (25.0, 0.5, 0.999)] {
            let v: f64 = beta_reg(a, b, x);
            assert_relative_eq!(v + beta_reg(b, a, 1.0 - x), 1.0, epsilon = 1e-12);
            assert_relative_eq!(v, statrs::function::beta::beta_reg(a, b, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn t_cdf_agrees_with_statrs() {
        for &df in &[0.5, 1.0, 2.5, 4.0, 30.0, 50.0] {
            let d = StudentsT::new(0.0, 1.0, df).unwrap();
            for &t in &[-40.0, -3.0, -1.0, -0.1, 0.0, 0.2, 1.7, 5.0, 100.0] {
                assert_relative_eq!(student_t_cdf(t, df), d.cdf(t), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn t_cdf_cauchy_closed_form() {
        for &t in &[-5.0f64, -0.5, 0.0, 0.5, 3.0] {
            let exact = 0.5 + t.atan() / std::f64::consts::PI;
            assert_relative_eq!(student_t_cdf(t, 1.0), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn chi2_sf_agrees_with_statrs() {
        for &df in &[1.0, 2.0, 7.0, 30.0] {
            let d = ChiSquared::new(df).unwrap();
            for &q in &[0.01, 0.5, 3.0, 10.0, 29.0, 60.0] {
                assert_relative_eq!(chi2_sf(q, df), 1.0 - d.cdf(q), epsilon = 1e-11);
            }
        }
        // df = 2 has the closed form exp(-q/2)
        assert_relative_eq!(chi2_sf(3.0f64, 2.0), (-1.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn kolmogorov_branches_agree_at_switch() {
        // evaluate both series directly on either side of the switch
        for &l in &[0.9f64, 1.0, 1.1, 1.18, 1.3] {
            let alt: f64 = 2.0
                * (1..=100)
                    .map(|k| {
                        let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                        s * (-2.0 * (k * k) as f64 * l * l).exp()
                    })
                    .sum::<f64>();
            assert_relative_eq!(kolmogorov_sf(l), alt, epsilon = 1e-12);
        }
    }

    #[test]
    fn kolmogorov_known_quantiles() {
        // classical critical values of the limiting distribution
        assert_relative_eq!(kolmogorov_sf(1.3581f64), 0.05, epsilon = 1e-4);
        assert_relative_eq!(kolmogorov_sf(1.6276f64), 0.01, epsilon = 1e-4);
        assert_relative_eq!(kolmogorov_sf(1.2238f64), 0.10, epsilon = 1e-4);
        assert_eq!(kolmogorov_sf(0.0f64), 1.0);
        assert!(kolmogorov_sf(0.05f64) <= 1.0);
    }

    #[test]
    fn f32_paths_are_usable() {
        let v = student_t_cdf(1.0f32, 3.0);
        assert!((v - 0.804_5).abs() < 1e-3);
        assert!((chi2_sf(2.0f32, 2.0) - (-1.0f32).exp()).abs() < 1e-5);
    }
}
