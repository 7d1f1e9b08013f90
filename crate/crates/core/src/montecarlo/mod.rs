//! Monte Carlo simulation of the three receivers with maximum-likelihood
//! decisions, for checking the Chernoff bounds empirically.
//!
//! Every (trial, hypothesis) pair draws from its own ChaCha8 stream keyed by
//! the root seed, so results do not depend on the number of worker threads.

mod sampling;

pub use sampling::{
    pixel_of, sample_continuum, sample_mode_records, sample_pixelated, sample_poisson,
    sample_position, Hypothesis, PixelCounts, Sinc2Sampler, TABLE_HALF_WIDTH, TABLE_STEP,
};

use crate::chernoff::{continuum_exponent, pixelated_exponent, ChernoffResult};
use crate::error::{invalid, Error, Result};
use crate::optics::{check_mu, density_p0, density_p1, mode_geometry, pixel_grid_with_extent};
use crate::optics::{ModeGeometry, SceneParams};
use crate::receiver::{pmf_h0, pmf_h1, receiver_exponent, ClickRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sampling::{Ratio, RecordSource};
use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Half-width, beyond the outermost source, of the pixel array used in
/// simulation. Photons further out share one pooled outcome.
pub const SIM_PIXEL_REACH: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Receiver {
    /// Ideal focal-plane counter recording exact photon positions.
    Continuum,
    /// Focal-plane counter with pixels of width `delta`.
    Pixelated { delta: f64 },
    /// Three-mode sorter followed by photon counters.
    ModeSorted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    /// Direct simulation under each hypothesis.
    #[default]
    Plain,
    /// Importance sampling from the tilted law `∝ p₀ˢ p₁^{1−s}` of the
    /// sorted-mode records, reweighted by likelihood ratios. Reaches error
    /// probabilities far below `1/trials`.
    Tilted { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// `m = 0` is accepted here and means no data at all.
    pub scene: SceneParams,
    pub receiver: Receiver,
    /// Trials per hypothesis.
    pub trials: u64,
    pub seed: u64,
    pub estimator: Estimator,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl TrialConfig {
    pub fn new(scene: SceneParams, receiver: Receiver, trials: u64, seed: u64) -> Result<Self> {
        let config = Self {
            scene,
            receiver,
            trials,
            seed,
            estimator: Estimator::Plain,
            threads: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_mu(self.scene.mu)?;
        if !(self.scene.n0 >= 0.0 && self.scene.n0.is_finite()) {
            return Err(invalid("n0", self.scene.n0, "must be non-negative and finite"));
        }
        if self.trials < 1 {
            return Err(invalid("trials", self.trials as f64, "must be at least 1"));
        }
        if let Receiver::Pixelated { delta } = self.receiver {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(invalid("delta", delta, "pixel width must be positive and finite"));
            }
        }
        match self.estimator {
            Estimator::Plain => {}
            Estimator::Tilted { s } => {
                if self.receiver != Receiver::ModeSorted {
                    return Err(invalid(
                        "estimator",
                        s,
                        "tilted sampling is implemented for the sorted-mode receiver only",
                    ));
                }
                if !(0.0..=1.0).contains(&s) {
                    return Err(invalid("s", s, "tilt must lie in [0, 1]"));
                }
            }
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Equal-prior error probability.
    pub p_hat: f64,
    /// 95% interval: Wilson for the plain estimator, normal for the tilted one.
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    /// Trials decided wrongly under each hypothesis. For the tilted estimator
    /// these count proposal draws landing in each error region.
    pub errors_h0: u64,
    pub errors_h1: u64,
    pub estimator: Estimator,
}

impl ErrorEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the interval always contains p; clamping only absorbs rounding at p = 0 or 1
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Maximum-likelihood decision from `ln(L₁/L₀)`. Ties go to `H0`.
pub fn ml_decide(loglr: f64) -> Result<Hypothesis> {
    if loglr.is_nan() {
        Err(Error::NanLikelihood)
    } else if loglr > 0.0 {
        Ok(Hypothesis::H1)
    } else {
        Ok(Hypothesis::H0)
    }
}

/// `ln(a/b)` for probabilities, with `0/0` read as no evidence.
fn log_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        (a / b).ln()
    }
}

/// Per-photon log-likelihood ratio of the ideal focal-plane counter.
pub fn continuum_log_ratio(y: f64, mu: f64) -> f64 {
    log_ratio(density_p1(y, mu), density_p0(y))
}

/// Per-record log-likelihood ratio of the sorted-mode counter.
pub fn record_log_ratio(rec: ClickRecord, geom: &ModeGeometry) -> f64 {
    log_ratio(pmf_h1(rec, geom), pmf_h0(rec, geom.n0))
}

/// Precomputed likelihood model of one receiver; built once per run.
#[allow(clippy::large_enum_variant)]
enum Model {
    Continuum {
        mu: f64,
    },
    Pixelated {
        delta: f64,
        half: i64,
        llr: Vec<f64>,
        outside: f64,
    },
    Mode {
        geom: ModeGeometry,
        sources: [RecordSource; 2],
        zero_llr: f64,
    },
}

impl Model {
    fn new(config: &TrialConfig) -> Result<Self> {
        let mu = config.scene.mu;
        Ok(match config.receiver {
            Receiver::Continuum => Model::Continuum { mu },
            Receiver::Pixelated { delta } => {
                let half = ((SIM_PIXEL_REACH + mu) / delta - 0.5).ceil().max(0.0) as usize;
                let grid = pixel_grid_with_extent(delta, mu, half)?;
                Model::Pixelated {
                    delta,
                    half: half as i64,
                    llr: grid.iter().map(|(_, a, b)| log_ratio(b, a)).collect(),
                    outside: log_ratio(grid.tail_mass1, grid.tail_mass0),
                }
            }
            Receiver::ModeSorted => {
                let geom = mode_geometry(mu, config.scene.n0)?;
                Model::Mode {
                    geom,
                    sources: [
                        RecordSource::new(Hypothesis::H0, &geom),
                        RecordSource::new(Hypothesis::H1, &geom),
                    ],
                    zero_llr: geom.n0.ln_1p() - geom.n1.ln_1p() - geom.n2.ln_1p(),
                }
            }
        })
    }

    /// `ln(L₁/L₀)` of one simulated exposure under `hyp`.
    fn trial_llr(&self, hyp: Hypothesis, scene: &SceneParams, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self {
            Model::Continuum { mu } => {
                let count = sample_poisson(scene.total_photons(), rng)?;
                Ok((0..count)
                    .map(|_| continuum_log_ratio(sample_position(hyp, *mu, rng), *mu))
                    .sum())
            }
            Model::Pixelated {
                delta,
                half,
                llr,
                outside,
            } => {
                // both rates sum to N over all outcomes, so only the counts enter
                let count = sample_poisson(scene.total_photons(), rng)?;
                Ok((0..count)
                    .map(|_| {
                        let n = (sample_position(hyp, scene.mu, rng) / delta).round();
                        if n.abs() <= *half as f64 {
                            llr[(n as i64 + half) as usize]
                        } else {
                            *outside
                        }
                    })
                    .sum())
            }
            Model::Mode {
                geom,
                sources,
                zero_llr,
            } => {
                let mut total = 0.0;
                let mut zeros = 0u64;
                let trailing = sources[hyp.index() as usize].for_each(scene.m, rng, |gap, rec| {
                    zeros += gap;
                    total += record_log_ratio(rec, geom);
                })?;
                zeros += trailing;
                if zeros > 0 {
                    total += zeros as f64 * zero_llr;
                }
                Ok(total)
            }
        }
    }
}

/// Generator for one independent stream under a root seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|_| invalid("threads", n as f64, "could not start worker pool"))?;
            Ok(pool.install(job))
        }
    }
}

/// Simulated equal-prior error probability of the maximum-likelihood decision.
pub fn estimate_error(config: &TrialConfig) -> Result<ErrorEstimate> {
    config.validate()?;
    match config.estimator {
        Estimator::Plain => estimate_plain(config),
        Estimator::Tilted { s } => estimate_tilted(config, s),
    }
}

fn estimate_plain(config: &TrialConfig) -> Result<ErrorEstimate> {
    let model = Model::new(config)?;
    if matches!(config.receiver, Receiver::Continuum | Receiver::Pixelated { .. }) {
        // build the shared table outside the timed parallel section
        Sinc2Sampler::global();
    }
    let scene = config.scene;
    let (errors_h0, errors_h1) = run_in_pool(config.threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| -> Result<(u64, u64)> {
                let mut wrong = [0u64; 2];
                for hyp in Hypothesis::BOTH {
                    let mut rng = stream_rng(config.seed, 2 * trial + hyp.index());
                    let decided = ml_decide(model.trial_llr(hyp, &scene, &mut rng)?)?;
                    wrong[hyp.index() as usize] = (decided != hyp) as u64;
                }
                Ok((wrong[0], wrong[1]))
            })
            // integer sums do not depend on the reduction order
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
    })??;
    let n = 2 * config.trials;
    let (ci_low, ci_high) = wilson_interval(errors_h0 + errors_h1, n, Z_95);
    Ok(ErrorEstimate {
        p_hat: (errors_h0 + errors_h1) as f64 / n as f64,
        ci_low,
        ci_high,
        trials: config.trials,
        errors_h0,
        errors_h1,
        estimator: Estimator::Plain,
    })
}

/// Importance sampling for the sorted-mode receiver.
///
/// Records are drawn i.i.d. from `p_s(k,0,0) = (1−ρ)ρᵏ` with
/// `ρ = r₀ˢ r₁^{1−s}`, the normalized `p₀ˢ p₁^{1−s}` on the common support.
/// Every error event of either hypothesis lies in that support: a record
/// with a click in the second or third mode proves `H1`.
fn estimate_tilted(config: &TrialConfig, s: f64) -> Result<ErrorEstimate> {
    let scene = config.scene;
    let geom = mode_geometry(scene.mu, scene.n0)?;
    let r0 = geom.n0 / (1.0 + geom.n0);
    let r1 = geom.eta * geom.n1 / (1.0 + geom.n1);
    let rho = match (r0 == 0.0, r1 == 0.0) {
        (true, true) => 0.0,
        _ if s == 0.0 => r1,
        _ if s == 1.0 => r0,
        _ => r0.powf(s) * r1.powf(1.0 - s),
    };
    let proposal = Ratio::new(rho);
    let ln_ps = |k: u32| -> f64 {
        let base = (-rho).ln_1p();
        if k == 0 {
            base
        } else {
            base + k as f64 * rho.ln()
        }
    };
    let ln_p0 = |rec: ClickRecord| pmf_h0(rec, geom.n0).ln();
    let ln_p1 = |rec: ClickRecord| pmf_h1(rec, &geom).ln();
    let zero = ClickRecord::default();
    let zero_terms = [
        ln_p0(zero) - ln_ps(0),
        ln_p1(zero) - ln_ps(0),
        geom.n0.ln_1p() - geom.n1.ln_1p() - geom.n2.ln_1p(),
    ];

    let contributions = run_in_pool(config.threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| -> Result<(f64, Hypothesis)> {
                let mut rng = stream_rng(config.seed, 2 * trial);
                // ln w₀, ln w₁, ln(L₁/L₀)
                let mut acc = [0.0f64; 3];
                let mut zeros = 0u64;
                let mut left = scene.m;
                while left > 0 {
                    let gap = match proposal.zeros_before_positive(&mut rng) {
                        Some(g) if g < left => g,
                        _ => break,
                    };
                    zeros += gap;
                    left -= gap + 1;
                    let k = proposal.sample_positive(&mut rng) as u32;
                    let rec = ClickRecord::new(k, 0, 0);
                    let (a, b) = (ln_p0(rec), ln_p1(rec));
                    acc[0] += a - ln_ps(k);
                    acc[1] += b - ln_ps(k);
                    acc[2] += log_ratio(pmf_h1(rec, &geom), pmf_h0(rec, geom.n0));
                }
                zeros += left;
                if zeros > 0 {
                    for (a, z) in acc.iter_mut().zip(zero_terms) {
                        *a += zeros as f64 * z;
                    }
                }
                let decided = ml_decide(acc[2])?;
                // an H0 exposure errs when H1 is decided, and vice versa
                let weight = match decided {
                    Hypothesis::H1 => acc[0].exp(),
                    Hypothesis::H0 => acc[1].exp(),
                };
                Ok((0.5 * weight, decided))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let n = contributions.len() as f64;
    let mean = contributions.iter().map(|c| c.0).sum::<f64>() / n;
    let var = contributions.iter().map(|c| (c.0 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let half = Z_95 * (var / n).sqrt();
    let errors_h0 = contributions.iter().filter(|c| c.1 == Hypothesis::H1).count() as u64;
    Ok(ErrorEstimate {
        p_hat: mean,
        ci_low: (mean - half).max(0.0),
        ci_high: mean + half,
        trials: config.trials,
        errors_h0,
        errors_h1: config.trials - errors_h0,
        estimator: config.estimator,
    })
}

/// Chernoff exponent matching a receiver, with the multiplier it applies to:
/// the photon number for focal-plane receivers, the mode count otherwise.
pub fn receiver_chernoff(scene: &SceneParams, receiver: Receiver) -> Result<(ChernoffResult, f64)> {
    Ok(match receiver {
        Receiver::Continuum => (continuum_exponent(scene.mu)?, scene.total_photons()),
        Receiver::Pixelated { delta } => {
            (pixelated_exponent(scene.mu, delta)?, scene.total_photons())
        }
        Receiver::ModeSorted => (receiver_exponent(scene.mu, scene.n0)?, scene.m as f64),
    })
}

/// Chernoff upper bound `½e^{−scale·ξ}` on the receiver's error probability.
pub fn receiver_bound(scene: &SceneParams, receiver: Receiver) -> Result<f64> {
    let (result, scale) = receiver_chernoff(scene, receiver)?;
    Ok(result.bound_at(scale))
}
