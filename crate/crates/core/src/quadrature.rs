//! Numerical integration: adaptive Gauss–Kronrod for smooth integrands and
//! fixed-level tanh-sinh rules for integrands with endpoint cusps.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Integral {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Integral {
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    const MAX_INTERVALS: usize = 2000;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = gk15(&f, a, b);
    let mut parts = vec![(a, b, first)];
    let mut total = first;
    loop {
        let tol = abs_tol.max(rel_tol * total.value.abs());
        if total.error <= tol {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: total.error,
                tolerance: tol,
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("at least one interval");
        let (lo, hi, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        parts.push((lo, mid, left));
        parts.push((mid, hi, right));
        total = parts.iter().fold(
            Integral {
                value: 0.0,
                error: 0.0,
            },
            |acc, p| Integral {
                value: acc.value + p.2.value,
                error: acc.error + p.2.error,
            },
        );
    }
}

/// Tanh-sinh nodes on the reference interval, stored as distance from the
/// nearer endpoint so that nodes hugging an endpoint keep full precision.
#[derive(Debug, Clone)]
pub struct TanhSinhRule {
    step: f64,
    /// (1 − |x|, weight, side) with side = −1 for the left half, +1 right, 0 centre
    nodes: Vec<(f64, f64, i8)>,
}

impl TanhSinhRule {
    /// Rule with step `2^-level` truncated at `|t| ≤ 4`.
    pub fn new(level: u32) -> Self {
        Self::with_range(level, 4.0)
    }

    /// Rule with step `2^-level` truncated at `|t| ≤ t_max`.
    pub fn with_range(level: u32, t_max: f64) -> Self {
        let step = 0.5f64.powi(level as i32);
        let count = (t_max / step).round() as i64;
        let mut nodes = Vec::with_capacity(2 * count as usize + 1);
        nodes.push((1.0, FRAC_PI_2, 0));
        for k in 1..=count {
            let t = k as f64 * step;
            let u = FRAC_PI_2 * t.sinh();
            // 1 - tanh(u) without cancellation
            let comp = 2.0 / ((2.0 * u).exp() + 1.0);
            let ch = u.cosh();
            let w = FRAC_PI_2 * t.cosh() / (ch * ch);
            if comp == 0.0 || w == 0.0 {
                break;
            }
            nodes.push((comp, w, 1));
            nodes.push((comp, w, -1));
        }
        Self { step, nodes }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Abscissae and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().map(move |&(comp, w, side)| {
            let y = match side {
                0 => mid,
                1 => b - half * comp,
                _ => a + half * comp,
            };
            (y, w * half * self.step)
        })
    }

    /// Nodes on `[a, b]` as `(y, w, w_coarse)`, where `w_coarse` is the weight
    /// of the rule one level coarser (zero on nodes it does not contain).
    pub fn mapped_nested(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.mapped(a, b).enumerate().map(|(j, (y, w))| {
            let coarse = if j.div_ceil(2) % 2 == 0 { 2.0 * w } else { 0.0 };
            (y, w, coarse)
        })
    }

    /// Integrate `f` over `[a, b]` with this rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(y, w)| w * f(y)).sum()
    }
}

/// Tanh-sinh integration, refining the step until two successive levels agree.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    let mut previous = TanhSinhRule::new(2).integrate(&f, a, b);
    for level in 3..=9 {
        let current = TanhSinhRule::new(level).integrate(&f, a, b);
        let error = (current - previous).abs();
        if error <= tol.max(1e-15 * current.abs()) {
            return Ok(Integral {
                value: current,
                error,
            });
        }
        previous = current;
    }
    let last = TanhSinhRule::new(10).integrate(&f, a, b);
    Err(Error::Quadrature {
        estimate: (last - previous).abs(),
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gk_polynomial_exact() {
        let r = gauss_kronrod(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14, 0.0).unwrap();
        // ∫ = [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-13);
    }

    #[test]
    fn gk_oscillatory() {
        let r = gauss_kronrod(|x| (10.0 * x).sin(), 0.0, 3.0, 1e-13, 1e-13).unwrap();
        assert_abs_diff_eq!(r.value, (1.0 - 30f64.cos()) / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn gk_reports_nonconvergence() {
        let r = gauss_kronrod(|x| 1.0 / x, 0.0, 1.0, 1e-10, 0.0);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn tanh_sinh_endpoint_cusp() {
        // ∫₀¹ x^0.01 dx = 1/1.01
        let r = tanh_sinh(|x: f64| x.powf(0.01), 0.0, 1.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 / 1.01, epsilon = 1e-14);
        let r = tanh_sinh(|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn rule_weights_sum_to_length() {
        let rule = TanhSinhRule::new(4);
        let total: f64 = rule.mapped(2.0, 5.0).map(|(_, w)| w).sum();
        assert_abs_diff_eq!(total, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn nested_weights_reproduce_coarser_rule() {
        let fine = TanhSinhRule::new(5);
        let coarse = TanhSinhRule::new(4);
        let f = |x: f64| (x * 1.3).cos() + x.sqrt();
        let nested: f64 = fine.mapped_nested(0.0, 2.0).map(|(y, _, wc)| wc * f(y)).sum();
        assert_abs_diff_eq!(nested, coarse.integrate(f, 0.0, 2.0), epsilon = 1e-14);
    }
}
