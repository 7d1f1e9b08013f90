//! Image-plane photon densities, pixel masses and the spatial-mode overlap
//! geometry of the one-vs-two source problem.
//!
//! Coordinates are scaled so that the point spread function of the 1-D hard
//! aperture is `sinc(y)` and the sources sit at `±mu`.

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_kronrod;
use crate::special::sinc2_antiderivative;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use crate::special::sinc;

/// The three free parameters of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    /// Half-separation of the two sources in units of the diffraction scale.
    pub mu: f64,
    /// Mean photon number per temporal mode.
    pub n0: f64,
    /// Number of temporal modes collected.
    pub m: u64,
}

impl SceneParams {
    pub fn new(mu: f64, n0: f64, m: u64) -> Result<Self> {
        check_mu(mu)?;
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(invalid("n0", n0, "must be positive and finite"));
        }
        if m < 1 {
            return Err(invalid("m", m as f64, "must be at least 1"));
        }
        Ok(Self { mu, n0, m })
    }

    /// Total mean photon number `N = m·n0`.
    pub fn total_photons(&self) -> f64 {
        self.m as f64 * self.n0
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(invalid("mu", mu, "must be finite and non-negative"))
    }
}

/// One-source image density `sinc²(y)`.
pub fn density_p0(y: f64) -> f64 {
    let s = sinc(y);
    s * s
}

/// Two-source image density `½[sinc²(y−μ) + sinc²(y+μ)]`.
pub fn density_p1(y: f64, mu: f64) -> f64 {
    0.5 * (density_p0(y - mu) + density_p0(y + mu))
}

/// Upper bound on the mass of either density outside `[-y, y]`, from the
/// envelope `1/(π²(|y|−μ)²)`. Valid for `y > mu + 1`.
pub fn tail_mass_bound(y: f64, mu: f64) -> f64 {
    2.0 / (PI * PI * (y - mu))
}

/// Exact mass of `p0` outside `[-y, y]`.
pub fn tail_mass_p0(y: f64) -> f64 {
    1.0 - 2.0 * sinc2_antiderivative(y)
}

/// Exact mass of `p1` outside `[-y, y]`.
pub fn tail_mass_p1(y: f64, mu: f64) -> f64 {
    1.0 - (sinc2_antiderivative(y - mu) + sinc2_antiderivative(y + mu))
}

/// Derived overlap constants of the Gram–Schmidt mode basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    pub mu: f64,
    pub n0: f64,
    /// `sinc(μ)`
    pub s1: f64,
    /// `sinc(2μ)`
    pub s2: f64,
    /// `2 sinc(μ)`
    pub big_a: f64,
    /// `√(2(1 + sinc 2μ − 2 sinc²μ))`
    pub big_b: f64,
    pub a: f64,
    pub b: f64,
    /// Beamsplitter transmissivity `a²`.
    pub eta: f64,
    /// Thermal photon number of the symmetric combination under two sources.
    pub n1: f64,
    /// Thermal photon number of the antisymmetric mode under two sources.
    pub n2: f64,
}

/// Overlap geometry for half-separation `mu` and per-mode photon number `n0`.
pub fn mode_geometry(mu: f64, n0: f64) -> Result<ModeGeometry> {
    check_mu(mu)?;
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(invalid("n0", n0, "must be finite and non-negative"));
    }
    let s1 = sinc(mu);
    let s2 = sinc(2.0 * mu);
    // Gram determinant of the three aperture modes; non-negative up to rounding
    let gram = (1.0 + s2 - 2.0 * s1 * s1).max(0.0);
    let norm = (1.0 + s2).sqrt();
    let a = std::f64::consts::SQRT_2 * s1 / norm;
    let b = gram.sqrt() / norm;
    Ok(ModeGeometry {
        mu,
        n0,
        s1,
        s2,
        big_a: 2.0 * s1,
        big_b: (2.0 * gram).sqrt(),
        a,
        b,
        eta: (2.0 * s1 * s1 / (1.0 + s2)).min(1.0),
        n1: n0 * (1.0 + s2) / 2.0,
        n2: n0 * (1.0 - s2) / 2.0,
    })
}

impl ModeGeometry {
    /// `1 + sinc 2μ − 2 sinc²μ`, the squared norm of the unnormalized third mode.
    pub fn gram(&self) -> f64 {
        (1.0 + self.s2 - 2.0 * self.s1 * self.s1).max(0.0)
    }
}

/// Photon masses of both densities over a uniform pixel array with a pixel
/// centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pub delta: f64,
    pub mu: f64,
    /// Pixels `-half_extent ..= half_extent` are retained.
    pub half_extent: usize,
    q0: Vec<f64>,
    q1: Vec<f64>,
    pub tail_mass0: f64,
    pub tail_mass1: f64,
}

/// Upper limit on retained pixels; guards against runaway tail tolerances.
pub const MAX_PIXELS: usize = 1 << 24;

impl PixelGrid {
    pub fn q0(&self, n: i64) -> f64 {
        self.index(n).map_or(0.0, |i| self.q0[i])
    }

    pub fn q1(&self, n: i64) -> f64 {
        self.index(n).map_or(0.0, |i| self.q1[i])
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.half_extent as i64;
        (i >= 0 && (i as usize) < self.q0.len()).then_some(i as usize)
    }

    /// Masses of the non-negative pixels `0..=half_extent`.
    pub fn right_half(&self) -> (&[f64], &[f64]) {
        let c = self.half_extent;
        (&self.q0[c..], &self.q1[c..])
    }

    /// All retained `(n, q0[n], q1[n])` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        let k = self.half_extent as i64;
        self.q0
            .iter()
            .zip(&self.q1)
            .enumerate()
            .map(move |(i, (&a, &b))| (i as i64 - k, a, b))
    }

    /// Half-width of the covered region, `(half_extent + ½)Δ`.
    pub fn extent(&self) -> f64 {
        (self.half_extent as f64 + 0.5) * self.delta
    }

    pub fn len(&self) -> usize {
        self.q0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q0.is_empty()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(invalid("delta", delta, "pixel width must be positive and finite"))
    }
}

/// Pixel masses with `half_extent` chosen so both tail masses fall below
/// `tail_tol` according to the analytic envelope.
pub fn pixel_masses(delta: f64, mu: f64, tail_tol: f64) -> Result<PixelGrid> {
    check_delta(delta)?;
    check_mu(mu)?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(invalid("tail_tol", tail_tol, "must lie in (0, 1)"));
    }
    let y = (mu + 2.0 / (PI * PI * tail_tol)).max(mu + 1.0);
    let half = (y / delta - 0.5).ceil().max(0.0);
    if 2.0 * half + 1.0 > MAX_PIXELS as f64 {
        return Err(Error::MemoryBudget {
            requested: (2.0 * half + 1.0) as usize * 16,
            budget: MAX_PIXELS * 16,
        });
    }
    pixel_grid_with_extent(delta, mu, half as usize)
}

/// Pixel masses for pixels `-half_extent ..= half_extent`.
pub fn pixel_grid_with_extent(delta: f64, mu: f64, half_extent: usize) -> Result<PixelGrid> {
    check_delta(delta)?;
    check_mu(mu)?;
    if 2 * half_extent + 1 > MAX_PIXELS {
        return Err(Error::MemoryBudget {
            requested: (2 * half_extent + 1) * 16,
            budget: MAX_PIXELS * 16,
        });
    }
    let mut right0 = Vec::with_capacity(half_extent + 1);
    let mut right1 = Vec::with_capacity(half_extent + 1);
    for n in 0..=half_extent {
        let lo = (n as f64 - 0.5) * delta;
        let hi = (n as f64 + 0.5) * delta;
        right0.push(gauss_kronrod(density_p0, lo, hi, 1e-300, 1e-12)?.value);
        right1.push(gauss_kronrod(|y| density_p1(y, mu), lo, hi, 1e-300, 1e-12)?.value);
    }
    let mirror = |right: Vec<f64>| -> Vec<f64> {
        let mut full = Vec::with_capacity(2 * half_extent + 1);
        full.extend(right[1..].iter().rev());
        full.extend(right.iter());
        full
    };
    let extent = (half_extent as f64 + 0.5) * delta;
    Ok(PixelGrid {
        delta,
        mu,
        half_extent,
        q0: mirror(right0),
        q1: mirror(right1),
        tail_mass0: tail_mass_p0(extent),
        tail_mass1: tail_mass_p1(extent, mu),
    })
}
