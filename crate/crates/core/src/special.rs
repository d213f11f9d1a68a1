//! Complementary error function and the df = 1 chi-squared tail.

use crate::scalar::Scalar;

/// erfc(x) to roughly machine precision.
///
/// Uses the all-positive series `erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`
/// below 3 and the Laplace continued fraction (modified Lentz) above.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let two = T::lit(2.0);
    if x < T::zero() {
        return two - erfc(-x);
    }
    if x < T::lit(3.0) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

pub fn erf<T: Scalar>(x: T) -> T {
    T::one() - erfc(x)
}

fn erf_series<T: Scalar>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = T::zero();
    for _ in 0..200 {
        n = n + T::one();
        term = term * T::lit(2.0) * x2 / (T::lit(2.0) * n + T::one());
        sum = sum + term;
        if term < sum * T::epsilon() {
            break;
        }
    }
    T::lit(2.0) * T::FRAC_2_SQRT_PI() * T::lit(0.5) * (-x2).exp() * sum
}

// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..500 {
        let a = T::from_count(k) / T::lit(2.0);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x * x).exp() * T::FRAC_2_SQRT_PI() * T::lit(0.5) / f
}

/// Upper tail of the chi-squared distribution with one degree of freedom.
pub fn chi2_sf_df1<T: Scalar>(statistic: T) -> T {
    if statistic <= T::zero() {
        return T::one();
    }
    erfc((statistic / T::lit(2.0)).sqrt()).min(T::one()).max(T::zero())
}
