//! The sorted-mode photon-counting receiver: exact click distributions, the
//! closed-form exponent and a brute-force Chernoff oracle.

use crate::chernoff::{discrete_chernoff, ChernoffResult, DiscretePmf, Exponent};
use crate::error::{invalid, Error, Result};
use crate::optics::{check_mu, mode_geometry, sinc, ModeGeometry};
use crate::special::ln_choose;
use serde::{Deserialize, Serialize};

/// Photon counts in the three sorted spatial modes for one temporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct ClickRecord {
    pub k1: u32,
    pub k2: u32,
    pub k3: u32,
}

impl ClickRecord {
    pub fn new(k1: u32, k2: u32, k3: u32) -> Self {
        Self { k1, k2, k3 }
    }

    /// Counts clipped to {0, 1}, as registered by on-off detectors.
    pub fn on_off(self) -> Self {
        Self::new(self.k1.min(1), self.k2.min(1), self.k3.min(1))
    }
}

/// Bose–Einstein mass `nᵏ / (1+n)^{k+1}`.
pub fn thermal_pmf(k: u32, n: f64) -> f64 {
    if n == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * (n / (1.0 + n)).ln() - n.ln_1p()).exp()
}

/// Binomial mass `C(t, k) ηᵏ (1−η)^{t−k}` with `0⁰ = 1`.
pub fn binomial_pmf(k: u32, t: u32, eta: f64) -> f64 {
    if k > t {
        return 0.0;
    }
    let up = if k == 0 { 0.0 } else { k as f64 * eta.ln() };
    let down = if k == t { 0.0 } else { (t - k) as f64 * (-eta).ln_1p() };
    (ln_choose(t as u64, k as u64) + up + down).exp()
}

/// Click distribution with one source on axis.
pub fn pmf_h0(rec: ClickRecord, n0: f64) -> f64 {
    if rec.k2 != 0 || rec.k3 != 0 {
        return 0.0;
    }
    thermal_pmf(rec.k1, n0)
}

/// Click distribution with two sources at `±μ`: a thermal(`N₁`) total in the
/// first and third modes split binomially with `η`, and thermal(`N₂`) in the
/// second.
pub fn pmf_h1(rec: ClickRecord, geom: &ModeGeometry) -> f64 {
    let t = rec.k1 + rec.k3;
    thermal_pmf(t, geom.n1) * binomial_pmf(rec.k1, t, geom.eta) * thermal_pmf(rec.k2, geom.n2)
}

fn check_n0(n0: f64) -> Result<()> {
    if n0 > 0.0 && n0.is_finite() {
        Ok(())
    } else {
        Err(invalid("n0", n0, "must be positive and finite"))
    }
}

/// `ξ_R = ln(1 + N₂) + ln(1 + (1−η)N₁)`, the receiver's per-mode exponent.
pub fn receiver_exponent(mu: f64, n0: f64) -> Result<ChernoffResult> {
    check_mu(mu)?;
    check_n0(n0)?;
    let g = mode_geometry(mu, n0)?;
    // (1−η)N₁ = N₀(1 + sinc 2μ − 2 sinc²μ)/2
    let xi = g.n2.ln_1p() + (0.5 * n0 * g.gram()).ln_1p();
    Ok(ChernoffResult {
        exponent: Exponent::Finite(xi),
        s_star: 0.0,
        normalized: false,
    })
}

/// Detector model used when building click distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Detection {
    #[default]
    NumberResolving,
    OnOff,
}

/// Smallest count cutoff `K` with `(n/(1+n))^{K+1} < tol`.
pub fn count_cutoff(n: f64, tol: f64) -> u32 {
    if n <= 0.0 {
        return 1;
    }
    let r = n / (1.0 + n);
    ((tol.ln() / r.ln()).ceil() as u32).max(2)
}

fn tail_beyond(n: f64, cutoff: u32) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n / (1.0 + n)).powi(cutoff as i32 + 1)
    }
}

fn pmfs_for(
    mu: f64,
    n0: f64,
    cutoff: u32,
    detection: Detection,
) -> Result<(DiscretePmf<ClickRecord>, DiscretePmf<ClickRecord>)> {
    let g = mode_geometry(mu, n0)?;
    let tail0 = tail_beyond(n0, cutoff);
    // H₁ is truncated on k₁ + k₃ ≤ K and k₂ ≤ K
    let tail1 = 1.0 - (1.0 - tail_beyond(g.n1, cutoff)) * (1.0 - tail_beyond(g.n2, cutoff));
    let space = match detection {
        Detection::NumberResolving => "sorted-mode counts",
        Detection::OnOff => "sorted-mode on-off clicks",
    };
    let clip = |r: ClickRecord| match detection {
        Detection::NumberResolving => r,
        Detection::OnOff => r.on_off(),
    };
    let h0 = (0..=cutoff).map(|k| {
        let r = ClickRecord::new(k, 0, 0);
        (clip(r), pmf_h0(r, n0))
    });
    let mut h1 = Vec::new();
    for t in 0..=cutoff {
        for k1 in 0..=t {
            for k2 in 0..=cutoff {
                let r = ClickRecord::new(k1, k2, t - k1);
                h1.push((clip(r), pmf_h1(r, &g)));
            }
        }
    }
    Ok((
        DiscretePmf::new(space, h0, tail0)?,
        DiscretePmf::new(space, h1, tail1)?,
    ))
}

/// Receiver exponent from the click distributions by direct Chernoff
/// optimization, including the support-restricted endpoint limits.
pub fn receiver_exponent_bruteforce(mu: f64, n0: f64, cutoff: u32) -> Result<ChernoffResult> {
    receiver_exponent_bruteforce_with(mu, n0, cutoff, Detection::NumberResolving)
}

pub fn receiver_exponent_bruteforce_with(
    mu: f64,
    n0: f64,
    cutoff: u32,
    detection: Detection,
) -> Result<ChernoffResult> {
    check_mu(mu)?;
    check_n0(n0)?;
    let tail = tail_beyond(n0, cutoff);
    if tail >= 1e-10 {
        return Err(Error::CutoffTooSmall {
            deficit: tail,
            limit: 1e-10,
        });
    }
    let (p0, p1) = pmfs_for(mu, n0, cutoff, detection)?;
    discrete_chernoff(&p0, &p1)
}

/// `R_μ = lim_{N₀→0} ξ_R/N₀ = 1 − sinc²μ`, checked against the closed form
/// at `N₀ = 1e-6`.
pub fn normalized_receiver_exponent(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let s = sinc(mu);
    let r = 1.0 - s * s;
    let n0 = 1e-6;
    let sampled = receiver_exponent(mu, n0)?
        .value()
        .expect("closed form is finite")
        / n0;
    if (sampled - r).abs() > 1e-5 * r.abs().max(f64::MIN_POSITIVE) && r != 0.0 {
        return Err(Error::NotConverged {
            what: "per-photon receiver exponent",
            first: sampled,
            second: r,
        });
    }
    Ok(r)
}

/// Measurement basis for counting in the two-mode beamsplitter problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountingBasis {
    /// Modes in which the one-source state is a product.
    H0Product,
    /// Modes in which the two-source state is a product.
    H1Product,
}

fn split_thermal_pmf(
    space: &str,
    n: f64,
    eta: f64,
    cutoff: u32,
) -> Result<DiscretePmf<(u32, u32)>> {
    let mut entries = Vec::new();
    for t in 0..=cutoff {
        let mass = thermal_pmf(t, n);
        for k in 0..=t {
            entries.push(((k, t - k), mass * binomial_pmf(k, t, eta)));
        }
    }
    DiscretePmf::new(space, entries, tail_beyond(n, cutoff))
}

fn first_mode_pmf(space: &str, n: f64, cutoff: u32) -> Result<DiscretePmf<(u32, u32)>> {
    let entries = (0..=cutoff).map(|k| ((k, 0), thermal_pmf(k, n)));
    DiscretePmf::new(space, entries, tail_beyond(n, cutoff))
}

/// Classical Chernoff exponent of photon counting after a beamsplitter of
/// transmissivity `eta`, for `thermal(n1) ⊗ vac` against the mixed
/// `thermal(n2) ⊗ vac`.
pub fn two_mode_counting_exponent(
    n1: f64,
    n2: f64,
    eta: f64,
    basis: CountingBasis,
) -> Result<ChernoffResult> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", eta, "transmissivity must lie in [0, 1]"));
    }
    for (name, v) in [("n1", n1), ("n2", n2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, v, "must be positive and finite"));
        }
    }
    let cutoff = count_cutoff(n1.max(n2), 1e-14);
    let space = "two-mode counts";
    let (p0, p1) = match basis {
        CountingBasis::H0Product => (
            first_mode_pmf(space, n1, cutoff)?,
            split_thermal_pmf(space, n2, eta, cutoff)?,
        ),
        CountingBasis::H1Product => (
            split_thermal_pmf(space, n1, eta, cutoff)?,
            first_mode_pmf(space, n2, cutoff)?,
        ),
    };
    discrete_chernoff(&p0, &p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h0_masses() {
        assert_abs_diff_eq!(pmf_h0(ClickRecord::new(0, 0, 0), 0.01), 1.0 / 1.01, epsilon = 1e-16);
        assert_eq!(pmf_h0(ClickRecord::new(1, 1, 0), 0.01), 0.0);
        let total: f64 = (0..=200).map(|k| pmf_h0(ClickRecord::new(k, 0, 0), 0.01)).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn h1_pair_marginal_is_thermal() {
        let g = mode_geometry(0.3, 0.05).unwrap();
        for t in 0..=30 {
            let m: f64 = (0..=t).map(|k1| pmf_h1(ClickRecord::new(k1, 0, t - k1), &g)).sum();
            let expected = thermal_pmf(t, g.n1) / (1.0 + g.n2);
            assert!((m - expected).abs() <= 1e-14 * expected, "t = {t}");
        }
    }

    #[test]
    fn h1_at_unit_separation() {
        let g = mode_geometry(1.0, 0.02).unwrap();
        assert_eq!(pmf_h1(ClickRecord::new(1, 0, 0), &g), 0.0);
        let r = ClickRecord::new(0, 2, 3);
        let expected = thermal_pmf(2, 0.01) * thermal_pmf(3, 0.01);
        assert_abs_diff_eq!(pmf_h1(r, &g), expected, epsilon = 1e-18);
    }

    #[test]
    fn h1_total_mass() {
        let g = mode_geometry(0.7, 0.1).unwrap();
        let mut total = 0.0;
        for t in 0..=40 {
            for k1 in 0..=t {
                for k2 in 0..=40 {
                    total += pmf_h1(ClickRecord::new(k1, k2, t - k1), &g);
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_special_points() {
        assert_eq!(receiver_exponent(0.0, 0.01).unwrap().value(), Some(0.0));
        let xi = receiver_exponent(1.0, 0.01).unwrap().value().unwrap();
        assert_abs_diff_eq!(xi, 2.0 * 0.005f64.ln_1p(), epsilon = 1e-17);
        let product_form = |mu: f64, n0: f64| {
            let (s1, s2) = (sinc(mu), sinc(2.0 * mu));
            let s = 2.0 / (n0 * (1.0 - s2) + 2.0) * 2.0 / (n0 * (1.0 + s2 - 2.0 * s1 * s1) + 2.0);
            -s.ln()
        };
        for &(mu, n0) in &[(0.1, 1e-3), (0.6, 0.05), (2.2, 0.1)] {
            let xi = receiver_exponent(mu, n0).unwrap().value().unwrap();
            assert!((xi - product_form(mu, n0)).abs() <= 1e-9 * xi);
        }
    }

    #[test]
    fn bruteforce_matches_closed_form() {
        for &(mu, n0) in &[(0.1, 1e-3), (0.5, 0.01), (2.0, 0.1)] {
            let cutoff = count_cutoff(n0, 1e-13);
            let b = receiver_exponent_bruteforce(mu, n0, cutoff).unwrap();
            let c = receiver_exponent(mu, n0).unwrap();
            assert_abs_diff_eq!(b.value().unwrap(), c.value().unwrap(), epsilon = 1e-12);
            assert_eq!(b.s_star, 0.0);
        }
        assert!(receiver_exponent_bruteforce(0.0, 0.01, 20).unwrap().value().unwrap() < 1e-15);
    }

    #[test]
    fn on_off_detection_loses_little_at_low_flux() {
        let full = receiver_exponent_bruteforce(0.4, 1e-3, 8).unwrap().value().unwrap();
        let clipped = receiver_exponent_bruteforce_with(0.4, 1e-3, 8, Detection::OnOff)
            .unwrap()
            .value()
            .unwrap();
        assert!(clipped <= full + 1e-15);
        assert!((full - clipped) / full < 1e-2);
    }

    #[test]
    fn small_cutoff_rejected() {
        assert!(matches!(
            receiver_exponent_bruteforce(0.5, 0.1, 3),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn normalized_values() {
        assert_eq!(normalized_receiver_exponent(0.0).unwrap(), 0.0);
        assert_eq!(normalized_receiver_exponent(1.0).unwrap(), 1.0);
        assert_eq!(normalized_receiver_exponent(3.0).unwrap(), 1.0);
        let r = normalized_receiver_exponent(1.43).unwrap();
        assert!(r < 1.0 && r > 0.9);
    }

    #[test]
    fn two_mode_identical_states() {
        let r = two_mode_counting_exponent(0.01, 0.01, 1.0, CountingBasis::H0Product).unwrap();
        assert!(r.value().unwrap() < 1e-15);
    }
}
