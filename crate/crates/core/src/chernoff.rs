//! Chernoff exponents: optimization over `s`, discrete distributions, and the
//! focal-plane-array exponents in the continuum and pixelated limits.

use crate::error::{invalid, Error, Result};
use crate::optics::{check_mu, density_p0, density_p1, pixel_grid_with_extent, PixelGrid};
use crate::optimize::{maximize_unit_interval, minimize_unit_interval, EndpointLimits};
use crate::quadrature::TanhSinhRule;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Tolerance on the optimizing `s`.
pub const S_TOL: f64 = 1e-10;

/// Largest tail mass a distribution may carry into [`discrete_chernoff`].
pub const MAX_TAIL_MASS: f64 = 1e-9;

/// A Chernoff exponent; perfectly distinguishable hypotheses get a tagged
/// infinite value rather than a floating-point infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `½ exp(−scale·ξ)`, zero for an infinite exponent and positive scale.
    pub fn bound(self, scale: f64) -> f64 {
        match self {
            Exponent::Finite(v) => bound_at_scale(v, scale),
            Exponent::Infinite if scale > 0.0 => 0.0,
            Exponent::Infinite => 0.5,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffResult {
    pub exponent: Exponent,
    /// Optimizing `s`; may be an endpoint reached as a limit.
    pub s_star: f64,
    /// True when the exponent is per photon rather than per temporal mode.
    pub normalized: bool,
}

impl ChernoffResult {
    /// Finite exponent value; `f64::INFINITY` is never produced.
    pub fn value(&self) -> Option<f64> {
        self.exponent.finite()
    }

    /// Error-probability bound after `scale` units: temporal modes for a
    /// per-mode exponent, photons for a normalized one.
    pub fn bound_at(&self, scale: f64) -> f64 {
        self.exponent.bound(scale)
    }
}

/// Chernoff bound `½ exp(−m·ξ)` after `m` temporal modes.
pub fn bound_at(exponent: f64, m: u64) -> f64 {
    bound_at_scale(exponent, m as f64)
}

/// Chernoff bound `½ exp(−n·ξ)` for a real multiplier such as `N = M·N₀`.
pub fn bound_at_scale(exponent: f64, n: f64) -> f64 {
    if n == 0.0 || exponent == 0.0 {
        return 0.5;
    }
    0.5 * (-n * exponent).exp()
}

/// Global minimizer of `f` on `[0, 1]` with explicit endpoint limits.
pub fn optimize_unit_interval<F>(f: F, limits: EndpointLimits, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let m = minimize_unit_interval(f, limits, tol)?;
    Ok((m.s, m.value))
}

/// `[s·e^u + 1 − s − e^{su}]`, the per-unit-`q` Chernoff deficit for
/// log-ratio `u = ln(p/q)`, evaluated without cancellation for small `u`.
fn deficit_factor(u: f64, s: f64) -> f64 {
    if u.abs() < 0.1 {
        // Σ_{n≥2} (s − sⁿ) uⁿ / n!
        let mut pow_u = u;
        let mut pow_s = s;
        let mut fact = 1.0;
        let mut sum = 0.0;
        for n in 2..40 {
            pow_u *= u;
            pow_s *= s;
            fact *= n as f64;
            let term = (s - pow_s) * pow_u / fact;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        s * u.exp_m1() - (s * u).exp_m1()
    }
}

/// `s·p + (1−s)·q − pˢ q^{1−s}` with `0ˢ = 0` on the open interval.
pub fn chernoff_term(p: f64, q: f64, s: f64) -> f64 {
    if q == 0.0 {
        return s * p;
    }
    if p == 0.0 {
        return (1.0 - s) * q;
    }
    term_with_log_ratio(p, q, (p / q).ln(), s)
}

#[inline]
fn term_with_log_ratio(p: f64, q: f64, u: f64, s: f64) -> f64 {
    if q == 0.0 {
        s * p
    } else if p == 0.0 {
        (1.0 - s) * q
    } else if u > 600.0 {
        s * p + (1.0 - s) * q - (s * p.ln() + (1.0 - s) * q.ln()).exp()
    } else {
        q * deficit_factor(u, s)
    }
}

/// Weighted collection of `(p, q)` pairs whose Chernoff deficit
/// `Σ w·[s p + (1−s) q − pˢ q^{1−s}]` is evaluated repeatedly.
#[derive(Debug, Clone, Default)]
struct DeficitTerms {
    p: Vec<f64>,
    q: Vec<f64>,
    u: Vec<f64>,
}

impl DeficitTerms {
    fn push(&mut self, p: f64, q: f64) {
        let u = if p > 0.0 && q > 0.0 { (p / q).ln() } else { 0.0 };
        self.p.push(p);
        self.q.push(q);
        self.u.push(u);
    }

    fn len(&self) -> usize {
        self.p.len()
    }

    fn term(&self, i: usize, s: f64) -> f64 {
        term_with_log_ratio(self.p[i], self.q[i], self.u[i], s)
    }

    fn sum(&self, weights: &[f64], s: f64) -> f64 {
        (0..self.len())
            .filter(|&i| weights[i] != 0.0)
            .map(|i| weights[i] * self.term(i, s))
            .sum()
    }
}

/// Probability mass function over ordered keys, carrying the mass lost to
/// truncation and a label naming its outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf<K: Ord> {
    space: String,
    probs: BTreeMap<K, f64>,
    tail_mass: f64,
}

impl<K: Ord + Clone> DiscretePmf<K> {
    /// Repeated keys accumulate. Fails unless every probability is finite and
    /// non-negative and the total including the tail is one within 1e-9.
    pub fn new(
        space: impl Into<String>,
        entries: impl IntoIterator<Item = (K, f64)>,
        tail_mass: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(invalid("tail_mass", tail_mass, "must lie in [0, 1]"));
        }
        let mut probs = BTreeMap::new();
        for (k, p) in entries {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(invalid("probability", p, "must be finite and non-negative"));
            }
            *probs.entry(k).or_insert(0.0) += p;
        }
        let total: f64 = probs.values().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("total probability", total, "must equal 1 within 1e-9"));
        }
        Ok(Self {
            space: space.into(),
            probs,
            tail_mass,
        })
    }

    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn prob(&self, k: &K) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.probs.iter().map(|(k, &p)| (k, p))
    }

    /// Keys with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.probs.iter().filter(|(_, &p)| p > 0.0).map(|(k, _)| k)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Chernoff exponent `−ln min_s Σ_k p(k)ˢ q(k)^{1−s}` between two PMFs.
///
/// The endpoint values are the support-restricted limits `Σ_{supp p} q` at
/// `s → 0` and `Σ_{supp q} p` at `s → 1`.
pub fn discrete_chernoff<K: Ord + Clone>(
    p: &DiscretePmf<K>,
    q: &DiscretePmf<K>,
) -> Result<ChernoffResult> {
    if p.space != q.space {
        return Err(Error::MismatchedSpaces {
            left: p.space.clone(),
            right: q.space.clone(),
        });
    }
    for tail in [p.tail_mass, q.tail_mass] {
        if tail >= MAX_TAIL_MASS {
            return Err(invalid("tail_mass", tail, "must be below 1e-9"));
        }
    }
    let mut terms = DeficitTerms::default();
    let mut overlap = false;
    let mut q_outside_p = 0.0;
    let mut p_outside_q = 0.0;
    for (k, pk) in p.iter() {
        let qk = q.prob(k);
        overlap |= pk > 0.0 && qk > 0.0;
        if qk == 0.0 {
            p_outside_q += pk;
        }
        terms.push(pk, qk);
    }
    for (k, qk) in q.iter() {
        if !p.probs.contains_key(k) {
            q_outside_p += qk;
            terms.push(0.0, qk);
        }
    }
    for (k, pk) in p.iter() {
        if pk == 0.0 {
            q_outside_p += q.prob(k);
        }
    }
    if !overlap {
        return Ok(ChernoffResult {
            exponent: Exponent::Infinite,
            s_star: 0.5,
            normalized: false,
        });
    }
    let weights = vec![1.0; terms.len()];
    let (tp, tq) = (p.tail_mass, q.tail_mass);
    // B(s) = Σ pˢq^{1−s} = 1 − [deficit + s·t_p + (1−s)·t_q]
    let neg_log_b = |deficit: f64| -(-deficit).ln_1p();
    let objective = |s: f64| neg_log_b(terms.sum(&weights, s) + s * tp + (1.0 - s) * tq);
    let limits = EndpointLimits::new(
        neg_log_b(q_outside_p + tq),
        neg_log_b(p_outside_q + tp),
    );
    let best = maximize_unit_interval(objective, limits, S_TOL)?;
    let exponent = if best.value.is_finite() {
        Exponent::Finite(best.value.max(0.0))
    } else {
        Exponent::Infinite
    };
    Ok(ChernoffResult {
        exponent,
        s_star: best.s,
        normalized: false,
    })
}

/// Resolution settings for [`continuum_exponent_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumConfig {
    /// Tanh-sinh level; the level below provides the error estimate.
    pub level: u32,
    /// Minimum number of unit cells integrated explicitly on `y ≥ 0`.
    pub min_cells: usize,
    /// Maximum tolerated error estimate on the exponent.
    pub tolerance: f64,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        Self {
            level: 5,
            min_cells: 128,
            tolerance: 1e-9,
        }
    }
}

const TAIL_FIT_DEGREE: usize = 6;

/// Hurwitz zeta `Σ_{k≥a} k^{−n}` for integer `n ≥ 2` and `a ≥ 16`.
fn hurwitz_zeta(n: u32, a: f64) -> f64 {
    const B2K_OVER_FACT: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
    ];
    let n_f = n as f64;
    let head = a.powf(1.0 - n_f) / (n_f - 1.0) + 0.5 * a.powf(-n_f);
    // B₂ⱼ/(2j)! · n(n+1)…(n+2j−2) · a^{−n−2j+1}
    let corrections: f64 = B2K_OVER_FACT
        .iter()
        .enumerate()
        .map(|(j, c)| c * rising_factorial(n_f, 2 * j + 1) * a.powf(-n_f - (2 * j + 1) as f64))
        .sum();
    head + corrections
}

fn rising_factorial(x: f64, count: usize) -> f64 {
    (0..count).map(|i| x + i as f64).product()
}

/// Linear functional mapping cell integrals `F_k`, `k ∈ [K/2, K)`, onto an
/// estimate of `Σ_{k≥K} F_k` under the model `k²F_k = Σ_j a_j (K/2k)^j`.
fn tail_functional(cells: usize, degree: usize) -> Vec<f64> {
    let start = cells / 2;
    let half = start as f64;
    let rows = cells - start;
    let design = DMatrix::from_fn(rows, degree + 1, |r, j| (half / (start + r) as f64).powi(j as i32));
    let z = DVector::from_fn(degree + 1, |j, _| half.powi(j as i32) * hurwitz_zeta(j as u32 + 2, cells as f64));
    let pinv = design
        .svd(true, true)
        .pseudo_inverse(1e-14)
        .expect("SVD with both factors computed");
    let coef = pinv.transpose() * z;
    (0..rows)
        .map(|r| {
            let k = (start + r) as f64;
            coef[r] * k * k
        })
        .collect()
}

/// Precomputed quadrature of `∫ [s p₀ + (1−s) p₁ − p₀ˢ p₁^{1−s}] dy` for one `μ`.
#[derive(Debug, Clone)]
pub struct ContinuumDeficit {
    terms: DeficitTerms,
    /// Fine-level weights with evenness and tail extrapolation folded in.
    fine: Vec<f64>,
    coarse: Vec<f64>,
    /// Node ranges of the cells used by the tail fit.
    fit_cells: Vec<std::ops::Range<usize>>,
    raw_fine: Vec<f64>,
    alt_tail: Vec<f64>,
    main_tail: Vec<f64>,
}

impl ContinuumDeficit {
    pub fn new(mu: f64, config: &ContinuumConfig) -> Result<Self> {
        check_mu(mu)?;
        if config.level < 2 || config.level > 12 {
            return Err(invalid("level", config.level as f64, "must lie in 2..=12"));
        }
        let cells = config.min_cells.max(2 * (16.0 * mu).ceil() as usize).max(32);
        let cells = cells + cells % 2;
        let rule = TanhSinhRule::with_range(config.level, 3.5);

        // breakpoints inside each unit cell: zeros of the shifted sincs
        let frac = mu - mu.floor();
        let mut inner: Vec<f64> = [frac, 1.0 - frac]
            .into_iter()
            .filter(|&x| x > 1e-12 && x < 1.0 - 1e-12)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let main_tail = tail_functional(cells, TAIL_FIT_DEGREE);
        let alt_tail = tail_functional(cells, TAIL_FIT_DEGREE - 1);
        let mut terms = DeficitTerms::default();
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        let mut fit_cells = Vec::new();
        for k in 0..cells {
            let base = k as f64;
            let mut edges = vec![base];
            edges.extend(inner.iter().map(|x| base + x));
            edges.push(base + 1.0);
            let factor = if k >= cells / 2 {
                1.0 + main_tail[k - cells / 2]
            } else {
                1.0
            };
            let first = terms.len();
            for pair in edges.windows(2) {
                for (y, w, wc) in rule.mapped_nested(pair[0], pair[1]) {
                    terms.push(density_p0(y), density_p1(y, mu));
                    // even integrand: integrate y ≥ 0 and double
                    fine.push(2.0 * w * factor);
                    coarse.push(2.0 * wc * factor);
                }
            }
            if k >= cells / 2 {
                fit_cells.push(first..terms.len());
            }
        }
        let raw_fine = rule_weights_without_tail(&fine, &fit_cells, &main_tail);
        Ok(Self {
            terms,
            fine,
            coarse,
            fit_cells,
            raw_fine,
            alt_tail,
            main_tail,
        })
    }

    /// `C_μ(s)` at the fine level.
    pub fn at(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        self.terms.sum(&self.fine, s)
    }

    /// Error estimate at `s` from the coarser level and a lower-degree tail fit.
    pub fn error_at(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let level = (self.terms.sum(&self.coarse, s) - self.at(s)).abs();
        let tail = self
            .fit_cells
            .iter()
            .enumerate()
            .map(|(i, range)| {
                let cell: f64 = range
                    .clone()
                    .map(|j| self.raw_fine[j] * self.terms.term(j, s))
                    .sum();
                cell * (self.alt_tail[i] - self.main_tail[i])
            })
            .sum::<f64>()
            .abs();
        level + tail
    }

    /// `∫ p₀ˢ p₁^{1−s} dy = 1 − C_μ(s)`.
    pub fn overlap(&self, s: f64) -> f64 {
        1.0 - self.at(s)
    }
}

fn rule_weights_without_tail(
    fine: &[f64],
    fit_cells: &[std::ops::Range<usize>],
    tail: &[f64],
) -> Vec<f64> {
    let mut raw = fine.to_vec();
    for (i, range) in fit_cells.iter().enumerate() {
        for j in range.clone() {
            raw[j] /= 1.0 + tail[i];
        }
    }
    raw
}

/// Normalized exponent `C_μ = max_s [1 − ∫ p₀ˢ p₁^{1−s} dy]` of the ideal
/// continuum photon-counting focal plane.
pub fn continuum_exponent(mu: f64) -> Result<ChernoffResult> {
    continuum_exponent_with(mu, &ContinuumConfig::default())
}

pub fn continuum_exponent_with(mu: f64, config: &ContinuumConfig) -> Result<ChernoffResult> {
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(ChernoffResult {
            exponent: Exponent::Finite(0.0),
            s_star: 0.5,
            normalized: true,
        });
    }
    let deficit = ContinuumDeficit::new(mu, config)?;
    let best = maximize_unit_interval(|s| deficit.at(s), EndpointLimits::new(0.0, 0.0), S_TOL)?;
    let error = deficit.error_at(best.s);
    if error > config.tolerance {
        return Err(Error::Quadrature {
            estimate: error,
            tolerance: config.tolerance,
        });
    }
    Ok(ChernoffResult {
        exponent: Exponent::Finite(best.value.max(0.0)),
        s_star: best.s,
        normalized: true,
    })
}

/// Chernoff deficit `Σₙ w·[s q₀ + (1−s) q₁ − q₀ˢ q₁^{1−s}]` over pixel masses.
#[derive(Debug, Clone)]
pub struct PixelDeficit {
    terms: DeficitTerms,
    weights: Vec<f64>,
}

impl PixelDeficit {
    /// Terms of the retained pixels of `grid`; tails are ignored.
    pub fn from_grid(grid: &PixelGrid) -> Self {
        let (q0, q1) = grid.right_half();
        let mut terms = DeficitTerms::default();
        let mut weights = Vec::with_capacity(q0.len());
        for (n, (&a, &b)) in q0.iter().zip(q1).enumerate() {
            terms.push(a, b);
            weights.push(if n == 0 { 1.0 } else { 2.0 });
        }
        Self { terms, weights }
    }

    /// Terms of `grid` extrapolated to infinite extent from the truncation at
    /// `inner` pixels, assuming the neglected sum decays like `1/Y`.
    fn extrapolated(grid: &PixelGrid, inner: usize) -> Self {
        let mut this = Self::from_grid(grid);
        let y1 = (inner as f64 + 0.5) * grid.delta;
        let y2 = grid.extent();
        let boost = 1.0 + y1 / (y2 - y1);
        for w in &mut this.weights[inner + 1..] {
            *w *= boost;
        }
        this
    }

    pub fn at(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        self.terms.sum(&self.weights, s)
    }
}

/// Pixel count of the inner truncation used by [`pixelated_exponent`].
fn pixel_truncation(mu: f64, delta: f64) -> usize {
    let y = 1024.0 + 64.0 * mu;
    ((y / delta).round() as usize).max(4)
}

/// Normalized exponent `C_μ(Δ)` of a focal plane of pixels of width `delta`.
pub fn pixelated_exponent(mu: f64, delta: f64) -> Result<ChernoffResult> {
    check_mu(mu)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", delta, "pixel width must be positive and finite"));
    }
    if mu == 0.0 {
        return Ok(ChernoffResult {
            exponent: Exponent::Finite(0.0),
            s_star: 0.5,
            normalized: true,
        });
    }
    let inner = pixel_truncation(mu, delta);
    let grid = pixel_grid_with_extent(delta, mu, 2 * inner)?;
    let deficit = PixelDeficit::extrapolated(&grid, inner);
    pixel_optimum(&deficit)
}

/// Normalized exponent over the retained pixels of `grid` without
/// extrapolation of the truncated tails.
pub fn pixelated_exponent_on_grid(grid: &PixelGrid) -> Result<ChernoffResult> {
    pixel_optimum(&PixelDeficit::from_grid(grid))
}

fn pixel_optimum(deficit: &PixelDeficit) -> Result<ChernoffResult> {
    let best = maximize_unit_interval(|s| deficit.at(s), EndpointLimits::new(0.0, 0.0), S_TOL)?;
    Ok(ChernoffResult {
        exponent: Exponent::Finite(best.value.max(0.0)),
        s_star: best.s,
        normalized: true,
    })
}
