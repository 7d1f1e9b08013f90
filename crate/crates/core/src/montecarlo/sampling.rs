//! Samplers for the three receivers' raw outputs.

use crate::error::{invalid, Result};
use crate::optics::{tail_mass_p0, ModeGeometry, PixelGrid, SceneParams};
use crate::special::{sin_pi, sinc2_antiderivative};
use crate::receiver::ClickRecord;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Which hypothesis generated a sample. `H0` is one source, `H1` two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Half-width of the tabulated central region of `sinc²`.
pub const TABLE_HALF_WIDTH: f64 = 64.0;
/// Abscissa spacing of the inverse-CDF table.
pub const TABLE_STEP: f64 = 1e-3;

/// Inverse-CDF sampler for the density `sinc²(y)`.
///
/// Inside `[-Y, Y]` the exact CDF is tabulated and inverted by linear
/// interpolation; outside, `|y|` is drawn from the envelope `1/(π²y²)` and
/// accepted with probability `sin²(πy)`, which is exact.
#[derive(Debug, Clone)]
pub struct Sinc2Sampler {
    cdf: Vec<f64>,
    tail: f64,
}

impl Sinc2Sampler {
    pub fn new() -> Self {
        let count = (2.0 * TABLE_HALF_WIDTH / TABLE_STEP).round() as usize;
        let cdf = (0..=count)
            .map(|i| sinc2_antiderivative(-TABLE_HALF_WIDTH + i as f64 * TABLE_STEP))
            .collect();
        Self {
            cdf,
            tail: tail_mass_p0(TABLE_HALF_WIDTH),
        }
    }

    /// Shared instance; the table does not depend on any parameter.
    pub fn global() -> &'static Self {
        static SAMPLER: OnceLock<Sinc2Sampler> = OnceLock::new();
        SAMPLER.get_or_init(Self::new)
    }

    /// Mass of `sinc²` outside the table.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.tail {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            loop {
                let y = TABLE_HALF_WIDTH / (1.0 - rng.random::<f64>());
                let s = sin_pi(y);
                if rng.random::<f64>() < s * s {
                    return sign * y;
                }
            }
        }
        let (lo, hi) = (self.cdf[0], self.cdf[self.cdf.len() - 1]);
        let u = lo + (hi - lo) * rng.random::<f64>();
        // first index with cdf > u; the table is strictly increasing
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        -TABLE_HALF_WIDTH + (j as f64 - 1.0 + frac) * TABLE_STEP
    }
}

impl Default for Sinc2Sampler {
    fn default() -> Self {
        Self::new()
    }
}

/// One photon position under `hyp`; under `H1` each photon comes from either
/// source with equal probability.
pub fn sample_position<R: Rng + ?Sized>(hyp: Hypothesis, mu: f64, rng: &mut R) -> f64 {
    let y = Sinc2Sampler::global().sample(rng);
    match hyp {
        Hypothesis::H0 => y,
        Hypothesis::H1 => {
            if rng.random::<bool>() {
                y + mu
            } else {
                y - mu
            }
        }
    }
}

/// Poisson draw that accepts a zero mean.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| invalid("mean", mean, "Poisson mean out of range"))?;
    Ok(dist.sample(rng) as u64)
}

/// Photon positions of one exposure of the ideal focal-plane counter.
pub fn sample_continuum<R: Rng + ?Sized>(
    hyp: Hypothesis,
    scene: &SceneParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let count = sample_poisson(scene.total_photons(), rng)?;
    Ok((0..count).map(|_| sample_position(hyp, scene.mu, rng)).collect())
}

/// Sparse photon counts of a pixel array.
///
/// Photons landing beyond the retained pixels are pooled in `outside`, whose
/// mean is `N` times the grid's tail mass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelCounts {
    pub counts: BTreeMap<i64, u32>,
    pub outside: u32,
}

impl PixelCounts {
    pub fn get(&self, n: i64) -> u32 {
        self.counts.get(&n).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum::<u64>() + self.outside as u64
    }
}

/// Pixel index of position `y` on a grid of width `delta`, or `None` beyond
/// the retained pixels.
pub fn pixel_of(y: f64, grid: &PixelGrid) -> Option<i64> {
    let n = (y / grid.delta).round();
    (n.abs() <= grid.half_extent as f64).then_some(n as i64)
}

/// Pixel counts of one exposure. Binning a Poisson point process yields
/// independent Poisson counts with means `N·q[n]`.
pub fn sample_pixelated<R: Rng + ?Sized>(
    hyp: Hypothesis,
    grid: &PixelGrid,
    scene: &SceneParams,
    rng: &mut R,
) -> Result<PixelCounts> {
    let mut out = PixelCounts::default();
    for y in sample_continuum(hyp, scene, rng)? {
        match pixel_of(y, grid) {
            Some(n) => *out.counts.entry(n).or_insert(0) += 1,
            None => out.outside += 1,
        }
    }
    Ok(out)
}

/// Geometric law on `{0, 1, ...}` with `P(k) = (1−r) rᵏ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ratio {
    ratio: f64,
    plain: Option<Geometric>,
    positive: Option<Geometric>,
}

impl Ratio {
    pub(crate) fn new(ratio: f64) -> Self {
        let dist = |p: f64| (p > 0.0).then(|| Geometric::new(p).expect("probability in (0, 1]"));
        Self {
            ratio,
            plain: dist(1.0 - ratio),
            positive: dist(ratio),
        }
    }

    /// Bose–Einstein law with mean occupation `n`.
    pub(crate) fn thermal(n: f64) -> Self {
        Self::new(n / (1.0 + n))
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.plain.map_or(0, |g| g.sample(rng))
    }

    /// Draw conditioned on a positive outcome.
    pub(crate) fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        1 + self.sample(rng)
    }

    /// Number of zero outcomes before the first positive one, or `None` when
    /// the law is a point mass at zero.
    pub(crate) fn zeros_before_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u64> {
        self.positive.map(|g| g.sample(rng))
    }

    pub(crate) fn ratio(&self) -> f64 {
        self.ratio
    }
}

/// Per-mode record generator. Most records are all-zero when the mean
/// photon number is small, so draws skip directly to the next nonzero one.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RecordSource {
    hyp: Hypothesis,
    eta: f64,
    first: Ratio,
    second: Ratio,
    // a record is nonzero with probability `nonzero.ratio()`
    nonzero: Ratio,
    first_given_nonzero: f64,
}

impl RecordSource {
    pub(crate) fn new(hyp: Hypothesis, geom: &ModeGeometry) -> Self {
        let (n_first, n_second) = match hyp {
            Hypothesis::H0 => (geom.n0, 0.0),
            Hypothesis::H1 => (geom.n1, geom.n2),
        };
        let first = Ratio::thermal(n_first);
        let second = Ratio::thermal(n_second);
        // P(zero record) = P(t = 0) P(k₂ = 0)
        let zero = (1.0 - first.ratio()) * (1.0 - second.ratio());
        let nonzero = 1.0 - zero;
        Self {
            hyp,
            eta: geom.eta,
            first,
            second,
            nonzero: Ratio::new(nonzero),
            first_given_nonzero: if nonzero > 0.0 { first.ratio() / nonzero } else { 0.0 },
        }
    }

    /// Calls `visit(zeros, record)` for each nonzero record preceded by
    /// `zeros` all-zero ones, then returns the trailing zero count. The
    /// zeros and records together number exactly `m`.
    pub(crate) fn for_each<R: Rng + ?Sized>(
        &self,
        m: u64,
        rng: &mut R,
        mut visit: impl FnMut(u64, ClickRecord),
    ) -> Result<u64> {
        let mut left = m;
        while left > 0 {
            let gap = match self.nonzero.zeros_before_positive(rng) {
                Some(g) if g < left => g,
                _ => return Ok(left),
            };
            left -= gap + 1;
            let rec = self.nonzero_record(rng)?;
            visit(gap, rec);
        }
        Ok(0)
    }

    fn nonzero_record<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ClickRecord> {
        let (t, k2) = if rng.random::<f64>() < self.first_given_nonzero {
            (self.first.sample_positive(rng), self.second.sample(rng))
        } else {
            (0, self.second.sample_positive(rng))
        };
        let k1 = match self.hyp {
            Hypothesis::H0 => t,
            Hypothesis::H1 if t == 0 => 0,
            Hypothesis::H1 => Binomial::new(t, self.eta)
                .map_err(|_| invalid("eta", self.eta, "must lie in [0, 1]"))?
                .sample(rng),
        };
        Ok(ClickRecord::new(k1 as u32, k2 as u32, (t - k1) as u32))
    }
}

/// Click records of `m` temporal modes of the sorted-mode receiver.
pub fn sample_mode_records<R: Rng + ?Sized>(
    hyp: Hypothesis,
    geom: &ModeGeometry,
    m: u64,
    rng: &mut R,
) -> Result<Vec<ClickRecord>> {
    let mut out = Vec::with_capacity(m as usize);
    let source = RecordSource::new(hyp, geom);
    let trailing = source.for_each(m, rng, |zeros, rec| {
        out.extend(std::iter::repeat_n(ClickRecord::default(), zeros as usize));
        out.push(rec);
    })?;
    out.extend(std::iter::repeat_n(ClickRecord::default(), trailing as usize));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{mode_geometry, pixel_masses};
    use crate::receiver::pmf_h1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    fn rng(stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(2024);
        r.set_stream(stream);
        r
    }

    /// Pearson statistic and its 99% critical value.
    fn chi_square(observed: &[f64], expected: &[f64]) -> (f64, f64) {
        let stat = observed
            .iter()
            .zip(expected)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        let df = (observed.len() - 1) as f64;
        (stat, ChiSquared::new(df).unwrap().inverse_cdf(0.99))
    }

    #[test]
    fn table_interpolation_error_is_small() {
        let s = Sinc2Sampler::global();
        let mut worst = 0.0f64;
        for i in (0..s.cdf.len() - 1).step_by(97) {
            let y = -TABLE_HALF_WIDTH + (i as f64 + 0.5) * TABLE_STEP;
            let interp = 0.5 * (s.cdf[i] + s.cdf[i + 1]);
            worst = worst.max((interp - sinc2_antiderivative(y)).abs());
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn sinc2_goodness_of_fit() {
        let mut r = rng(1);
        let n = 100_000;
        let width = 0.25;
        let edges: Vec<f64> = (0..=32).map(|i| -4.0 + i as f64 * width).collect();
        let mut observed = vec![0.0; edges.len() + 1];
        for _ in 0..n {
            let y = Sinc2Sampler::global().sample(&mut r);
            let bin = edges.partition_point(|&e| e <= y);
            observed[bin] += 1.0;
        }
        let cdf = |y: f64| 0.5 + sinc2_antiderivative(y);
        let mut expected = vec![cdf(edges[0])];
        expected.extend(edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])));
        expected.push(1.0 - cdf(edges[edges.len() - 1]));
        let expected: Vec<f64> = expected.iter().map(|p| p * n as f64).collect();
        let (stat, crit) = chi_square(&observed, &expected);
        assert!(stat < crit, "{stat} >= {crit}");
    }

    #[test]
    fn tail_draws_follow_the_density() {
        // beyond the table the conditional law of |y| has CDF ratio given by the exact tail mass
        let mut r = rng(2);
        let s = Sinc2Sampler::global();
        let (mut beyond_128, mut beyond_64) = (0.0, 0.0);
        while beyond_64 < 20_000.0 {
            let y = s.sample(&mut r).abs();
            if y > TABLE_HALF_WIDTH {
                beyond_64 += 1.0;
                if y > 128.0 {
                    beyond_128 += 1.0;
                }
            }
        }
        let p = tail_mass_p0(128.0) / tail_mass_p0(64.0);
        let sigma = (p * (1.0 - p) / beyond_64).sqrt();
        assert!((beyond_128 / beyond_64 - p).abs() < 4.0 * sigma);
    }

    #[test]
    fn continuum_count_is_poisson() {
        let scene = SceneParams::new(0.3, 0.003, 1000).unwrap();
        let mut r = rng(3);
        let draws = 100_000;
        let total: usize = (0..draws)
            .map(|_| sample_poisson(scene.total_photons(), &mut r).unwrap() as usize)
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 3.0).abs() < 4.0 * (3.0 / draws as f64).sqrt(), "{mean}");
    }

    #[test]
    fn continuum_positions_under_h1_are_symmetric_mixtures() {
        let scene = SceneParams::new(2.0, 1.0, 50).unwrap();
        let mut r = rng(4);
        let ys: Vec<f64> = (0..400)
            .flat_map(|_| sample_continuum(Hypothesis::H1, &scene, &mut r).unwrap())
            .collect();
        // the two lobes sit at ±μ
        let near = |c: f64| ys.iter().filter(|y| (*y - c).abs() < 0.5).count() as f64;
        let (left, right) = (near(-2.0), near(2.0));
        assert!((left - right).abs() < 4.0 * (left + right).sqrt());
        assert!(near(0.0) < 0.2 * left);
    }

    #[test]
    fn empty_exposure() {
        let scene = SceneParams { mu: 0.2, n0: 0.0, m: 10 };
        let grid = pixel_masses(0.5, 0.2, 1e-2).unwrap();
        let mut r = rng(5);
        assert!(sample_continuum(Hypothesis::H1, &scene, &mut r).unwrap().is_empty());
        assert_eq!(sample_pixelated(Hypothesis::H0, &grid, &scene, &mut r).unwrap().total(), 0);
    }

    #[test]
    fn pixel_counts_are_poisson() {
        let scene = SceneParams::new(0.4, 0.01, 200).unwrap();
        let grid = pixel_masses(0.5, 0.4, 1e-2).unwrap();
        let mut r = rng(6);
        let draws = 50_000;
        let (mut inside, mut centre, mut centre_sq) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let counts = sample_pixelated(Hypothesis::H1, &grid, &scene, &mut r).unwrap();
            inside += (counts.total() - counts.outside as u64) as f64;
            let c = counts.get(0) as f64;
            centre += c;
            centre_sq += c * c;
        }
        let n = scene.total_photons();
        let expect_inside = n * (1.0 - grid.tail_mass1);
        let mean_inside = inside / draws as f64;
        assert!((mean_inside - expect_inside).abs() < 4.0 * (expect_inside / draws as f64).sqrt());
        let mean = centre / draws as f64;
        let var = centre_sq / draws as f64 - mean * mean;
        let expect = n * grid.q1(0);
        assert!((mean - expect).abs() < 4.0 * (expect / draws as f64).sqrt());
        assert!((var / mean - 1.0).abs() < 0.05, "{var} vs {mean}");
    }

    #[test]
    fn unit_transmission_leaves_third_mode_dark() {
        let mut geom = mode_geometry(0.5, 0.2).unwrap();
        geom.eta = 1.0;
        let mut r = rng(7);
        let recs = sample_mode_records(Hypothesis::H1, &geom, 20_000, &mut r).unwrap();
        assert_eq!(recs.len(), 20_000);
        assert!(recs.iter().all(|c| c.k3 == 0));
        assert!(recs.iter().any(|c| c.k1 > 0));
    }

    #[test]
    fn h0_records_use_only_the_first_mode() {
        let geom = mode_geometry(0.5, 0.2).unwrap();
        let mut r = rng(8);
        let recs = sample_mode_records(Hypothesis::H0, &geom, 5_000, &mut r).unwrap();
        assert!(recs.iter().all(|c| c.k2 == 0 && c.k3 == 0));
    }

    #[test]
    fn h1_records_goodness_of_fit() {
        let geom = mode_geometry(0.7, 0.5).unwrap();
        let mut r = rng(9);
        let n = 1_000_000;
        let mut hist: HashMap<ClickRecord, f64> = HashMap::new();
        for rec in sample_mode_records(Hypothesis::H1, &geom, n, &mut r).unwrap() {
            *hist.entry(rec).or_insert(0.0) += 1.0;
        }
        let (mut observed, mut expected) = (Vec::new(), Vec::new());
        let (mut pooled_obs, mut pooled_exp) = (n as f64, n as f64);
        for k1 in 0..12 {
            for k2 in 0..12 {
                for k3 in 0..12 {
                    let rec = ClickRecord::new(k1, k2, k3);
                    let e = pmf_h1(rec, &geom) * n as f64;
                    if e >= 5.0 {
                        let o = hist.get(&rec).copied().unwrap_or(0.0);
                        observed.push(o);
                        expected.push(e);
                        pooled_obs -= o;
                        pooled_exp -= e;
                    }
                }
            }
        }
        observed.push(pooled_obs);
        expected.push(pooled_exp);
        assert!(observed.len() > 10);
        let (stat, crit) = chi_square(&observed, &expected);
        assert!(stat < crit, "{stat} >= {crit}");
    }

    #[test]
    fn h1_mean_photon_number_matches_h0() {
        let geom = mode_geometry(0.5, 0.05).unwrap();
        let mut r = rng(10);
        let n = 1_000_000u64;
        let recs = sample_mode_records(Hypothesis::H1, &geom, n, &mut r).unwrap();
        let (sum, sum_sq) = recs.iter().fold((0.0, 0.0), |(a, b), c| {
            let k = (c.k1 + c.k2 + c.k3) as f64;
            (a + k, b + k * k)
        });
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((mean - 0.05).abs() < 4.0 * (var / n as f64).sqrt(), "{mean}");
    }
}
