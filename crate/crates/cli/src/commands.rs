//! Single-point, sweep and simulation commands.

use crate::args::{EstimatorKind, ReceiverKind, Scale, Variable};
use crate::error::{CliError, Result};
use crate::output::Row;
use qlimit_core::montecarlo::receiver_chernoff;
use qlimit_core::{
    bound_at_scale, continuum_exponent, estimate_error, normalized_quantum_exponent,
    normalized_receiver_exponent, pixelated_exponent, quantum_exponent, receiver_exponent,
    Estimator, Receiver, SceneParams, TrialConfig,
};
use rayon::prelude::*;

/// Slack allowed when checking that pixelation lowers the exponent.
pub const COARSE_GRAINING_SLACK: f64 = 1e-9;

/// Parameters of one exponent evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub mu: f64,
    pub n0: f64,
    pub delta: Option<f64>,
    pub m: Option<u64>,
}

/// Exponents that depend on `mu` alone, reusable across rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationExponents {
    pub c_mu: f64,
    pub z_mu: f64,
    pub r_mu: f64,
}

impl SeparationExponents {
    pub fn compute(mu: f64) -> Result<Self> {
        Ok(Self {
            c_mu: finite(continuum_exponent(mu)?.value(), "c_mu")?,
            z_mu: normalized_quantum_exponent(mu)?,
            r_mu: normalized_receiver_exponent(mu)?,
        })
    }
}

fn finite(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| CliError::Check(format!("{name} is infinite")))
}

/// Row with every exponent at `point`. `shared` must belong to `point.mu`.
pub fn exponent_row(point: Point, shared: Option<SeparationExponents>) -> Result<Row> {
    let Point { mu, n0, delta, m } = point;
    SceneParams::new(mu, n0, m.unwrap_or(1))?;
    let shared = match shared {
        Some(s) => s,
        None => SeparationExponents::compute(mu)?,
    };
    let c_mu_delta = match delta {
        Some(d) => {
            let c = finite(pixelated_exponent(mu, d)?.value(), "c_mu_delta")?;
            if c > shared.c_mu + COARSE_GRAINING_SLACK {
                return Err(CliError::Check(format!(
                    "pixelated exponent {c} exceeds the continuum exponent {} at mu = {mu}, delta = {d}",
                    shared.c_mu
                )));
            }
            Some(c)
        }
        None => None,
    };
    let xi_q = quantum_exponent(mu, n0)?.exponent;
    let xi_r = finite(receiver_exponent(mu, n0)?.value(), "xi_r")?;

    let mut row = Row::new()
        .real("mu", mu)
        .real("n0", n0)
        .real_opt("delta", delta);
    if let Some(m) = m {
        row = row.int("m", m);
    }
    row = row
        .real("c_mu", shared.c_mu)
        .real_opt("c_mu_delta", c_mu_delta)
        .real("xi_q", xi_q)
        .real("xi_r", xi_r)
        .real("z_mu", shared.z_mu)
        .real("r_mu", shared.r_mu);
    if let Some(m) = m {
        let photons = m as f64 * n0;
        row = row
            .real("bound_fpa", bound_at_scale(shared.c_mu, photons))
            .real_opt("bound_pixelated", c_mu_delta.map(|c| bound_at_scale(c, photons)))
            .real("bound_mode_sorted", bound_at_scale(xi_r, m as f64))
            .real("bound_qcb", bound_at_scale(xi_q, m as f64));
    }
    Ok(row)
}

/// Values of a one-parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(variable: Variable, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CliError::Invalid("sweep needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Invalid("sweep values must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Invalid("sweep values must be strictly increasing".into()));
        }
        if variable == Variable::M && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(CliError::Invalid("mode counts must be positive integers".into()));
        }
        Ok(Self { variable, values })
    }

    /// `count` points from `start` to `stop` inclusive.
    pub fn from_range(variable: Variable, start: f64, stop: f64, count: usize, scale: Scale) -> Result<Self> {
        let values = match scale {
            Scale::Linear => linear_space(start, stop, count),
            Scale::Log => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(CliError::Invalid("log-spaced sweeps need positive bounds".into()));
                }
                log_space(start, stop, count)
            }
        };
        let values = if variable == Variable::M {
            values.into_iter().map(f64::round).collect()
        } else {
            values
        };
        Self::new(variable, values)
    }
}

pub fn linear_space(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn log_space(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), stop.ln());
    let mut out: Vec<f64> = linear_space(a, b, count).into_iter().map(f64::exp).collect();
    // pin the end points exactly
    if let Some(first) = out.first_mut() {
        *first = start;
    }
    if count > 1 {
        out[count - 1] = stop;
    }
    out
}

/// Exponent rows along `spec`, in sweep order.
pub fn sweep_rows(spec: &SweepSpec, base: Point) -> Result<Vec<Row>> {
    let shared = if spec.variable == Variable::Mu {
        None
    } else {
        Some(SeparationExponents::compute(base.mu)?)
    };
    spec.values
        .par_iter()
        .map(|&v| {
            let mut p = base;
            match spec.variable {
                Variable::Mu => p.mu = v,
                Variable::N0 => p.n0 = v,
                Variable::Delta => p.delta = Some(v),
                Variable::M => p.m = Some(v as u64),
            }
            exponent_row(p, shared)
        })
        .collect()
}

/// Inputs of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateRequest {
    pub receiver: ReceiverKind,
    pub mu: f64,
    pub n0: f64,
    pub m: u64,
    pub delta: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub tilt: f64,
}

impl SimulateRequest {
    pub fn config(&self) -> Result<TrialConfig> {
        let receiver = match (self.receiver, self.delta) {
            (ReceiverKind::Continuum, _) => Receiver::Continuum,
            (ReceiverKind::ModeSorted, _) => Receiver::ModeSorted,
            (ReceiverKind::Pixelated, Some(delta)) => Receiver::Pixelated { delta },
            (ReceiverKind::Pixelated, None) => {
                return Err(CliError::Invalid("the pixelated receiver needs --delta".into()))
            }
        };
        let scene = SceneParams::new(self.mu, self.n0, self.m)?;
        let estimator = match self.estimator {
            EstimatorKind::Plain => Estimator::Plain,
            EstimatorKind::Tilted => Estimator::Tilted { s: self.tilt },
        };
        let config = TrialConfig::new(scene, receiver, self.trials, self.seed)?.with_estimator(estimator);
        config.validate()?;
        Ok(config)
    }
}

pub fn receiver_name(kind: ReceiverKind) -> &'static str {
    match kind {
        ReceiverKind::Continuum => "continuum",
        ReceiverKind::Pixelated => "pixelated",
        ReceiverKind::ModeSorted => "mode-sorted",
    }
}

/// Simulated error probability with the matching Chernoff bound.
pub fn simulate_row(request: &SimulateRequest) -> Result<Row> {
    let config = request.config()?;
    let estimate = estimate_error(&config)?;
    let (chernoff, scale) = receiver_chernoff(&config.scene, config.receiver)?;
    let bound = chernoff.bound_at(scale);
    let row = Row::new()
        .text("receiver", receiver_name(request.receiver))
        .text(
            "estimator",
            match request.estimator {
                EstimatorKind::Plain => "plain",
                EstimatorKind::Tilted => "tilted",
            },
        )
        .real("mu", request.mu)
        .real("n0", request.n0)
        .int("m", request.m)
        .real_opt("delta", request.delta.filter(|_| request.receiver == ReceiverKind::Pixelated))
        .int("trials", request.trials)
        .int("seed", request.seed)
        .real("p_hat", estimate.p_hat)
        .real("ci_low", estimate.ci_low)
        .real("ci_high", estimate.ci_high)
        .int("errors_h0", estimate.errors_h0)
        .int("errors_h1", estimate.errors_h1)
        .real_opt("exponent", chernoff.value())
        .real("bound", bound);
    Ok(row.real_opt("ratio", (bound > 0.0).then(|| estimate.p_hat / bound)))
}
