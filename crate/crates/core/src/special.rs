//! Special functions needed by the image-plane model.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const SINC_SERIES_THRESHOLD: f64 = 1e-4;

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // reduce to r in [-1, 1]
    let r = x - 2.0 * (x / 2.0).round();
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let v = if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (0.5 - r)).cos()
    } else {
        (PI * (1.0 - r)).sin()
    };
    sign * v
}

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let z = (PI * x) * (PI * x);
        1.0 - z / 6.0 + z * z / 120.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x <= 4.0 {
        // alternating power series; at x = 4 the largest term is ~6 so ~1 digit is lost
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0usize;
        loop {
            k += 1;
            let n = (2 * k) as f64;
            term *= -x2 / (n * (n + 1.0));
            let add = term / (n + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // continued fraction for E1(ix), modified Lentz
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -((i - 1) as f64).powi(2);
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        let h = Complex64::new(x.cos(), -x.sin()) * h;
        FRAC_PI_2 + h.im
    }
}

/// `∫₀ʸ sinc²(t) dt`, an odd function tending to ±½.
pub fn sinc2_antiderivative(y: f64) -> f64 {
    if y < 0.0 {
        return -sinc2_antiderivative(-y);
    }
    if y < 1e-3 {
        let p2 = PI * PI;
        return y - p2 * y.powi(3) / 9.0 + 2.0 * p2 * p2 * y.powi(5) / 225.0;
    }
    let s = sin_pi(y);
    sine_integral(2.0 * PI * y) / PI - s * s / (PI * PI * y)
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

/// Binomial coefficient as a float.
pub(crate) fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= (n - k + i) as f64 / i as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(sinc(1.0), 0.0);
        assert_eq!(sinc(-3.0), 0.0);
        assert_abs_diff_eq!(sinc(0.5), 2.0 / PI, epsilon = 1e-15);
        // series and direct branches meet smoothly
        let x = SINC_SERIES_THRESHOLD;
        let direct = (PI * x).sin() / (PI * x);
        assert_abs_diff_eq!(sinc(x * (1.0 - 1e-12)), direct, epsilon = 3e-16);
    }

    #[test]
    fn sin_pi_matches_std() {
        for i in -400..400 {
            let x = i as f64 * 0.0137 + 0.003;
            assert_abs_diff_eq!(sin_pi(x), (PI * x).sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn sine_integral_branches_agree() {
        // both branches evaluated around the switch point through a tiny step
        let below = sine_integral(4.0);
        let above = sine_integral(4.0 + 1e-12);
        assert_abs_diff_eq!(below, above, epsilon = 1e-12);
        // Si(π) = 1.851937051982466...
        assert_abs_diff_eq!(sine_integral(PI), 1.851_937_051_982_466, epsilon = 1e-14);
        // Si(10) = 1.658347594218874...
        assert_abs_diff_eq!(sine_integral(10.0), 1.658_347_594_218_874, epsilon = 1e-13);
        assert_abs_diff_eq!(sine_integral(1e6), FRAC_PI_2, epsilon = 1e-6);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        for &y in &[0.0005, 0.3, 1.0, 2.7, 15.25] {
            let n = 20_000;
            let h = y / n as f64;
            // composite Simpson
            let mut acc = sinc(0.0).powi(2) + sinc(y).powi(2);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * sinc(i as f64 * h).powi(2);
            }
            assert_abs_diff_eq!(sinc2_antiderivative(y), acc * h / 3.0, epsilon = 1e-11);
        }
        assert_abs_diff_eq!(sinc2_antiderivative(1e7), 0.5, epsilon = 1e-7);
    }

    #[test]
    fn binomials() {
        assert_eq!(choose(5, 2), 10.0);
        assert_abs_diff_eq!(ln_choose(30, 12).exp(), 86_493_225.0, epsilon = 1e-4);
        assert_eq!(choose(3, 5), 0.0);
    }
}
