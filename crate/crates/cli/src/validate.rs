//! Cross-checks between independent computations of the same quantities.

use crate::args::Level;
use crate::output::Row;
use qlimit_core::fock::FockPair;
use qlimit_core::montecarlo::{sample_mode_records, stream_rng, Hypothesis, Sinc2Sampler};
use qlimit_core::receiver::{pmf_h1, receiver_exponent_bruteforce};
use qlimit_core::special::sinc2_antiderivative;
use qlimit_core::{
    appendix_b_qcb, continuum_exponent, hypothesis_h0, hypothesis_h1, mode_geometry,
    normalized_quantum_exponent, normalized_receiver_exponent, pixelated_exponent, q_of_s,
    quantum_exponent, receiver_exponent, two_mode_counting_exponent, ClickRecord, CountingBasis,
    GaussianHypothesis,
};
use std::collections::HashMap;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst observed deviation, or the test statistic.
    pub observed: Option<f64>,
    /// Largest acceptable value of `observed`.
    pub limit: f64,
    pub cases: usize,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn from_worst(name: &'static str, limit: f64, outcome: qlimit_core::Result<(f64, usize, String)>) -> Self {
        match outcome {
            Ok((worst, cases, note)) => Self {
                name,
                observed: Some(worst),
                limit,
                cases,
                passed: worst <= limit,
                note,
            },
            Err(e) => Self {
                name,
                observed: None,
                limit,
                cases: 0,
                passed: false,
                note: e.to_string(),
            },
        }
    }

    pub fn row(&self) -> Row {
        Row::new()
            .text("check", self.name)
            .real_opt("observed", self.observed.filter(|v| v.is_finite()))
            .real("limit", self.limit)
            .int("cases", self.cases as u64)
            .text("status", if self.passed { "PASS" } else { "FAIL" })
            .text("note", self.note.clone())
    }
}

/// Separations of the full exponent grid.
pub const MU_GRID: [f64; 7] = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0];
/// Photon numbers of the full exponent grid.
pub const N0_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

fn exponent_grid(level: Level) -> Vec<(f64, f64)> {
    let (mus, n0s): (&[f64], &[f64]) = match level {
        Level::Quick => (&[0.1, 1.0, 3.0], &[1e-3, 1e-1]),
        Level::Full => (&MU_GRID, &N0_GRID),
    };
    mus.iter().flat_map(|&m| n0s.iter().map(move |&n| (m, n))).collect()
}

/// Largest deviation over a set of cases, with the case that attains it.
struct Worst {
    value: f64,
    cases: usize,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, cases: 0, at: String::new() }
    }

    fn record(&mut self, deviation: f64, at: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN must register as a failure
        if deviation.is_nan() || deviation > self.value {
            self.value = if deviation.is_nan() { f64::INFINITY } else { deviation };
            self.at = at();
        }
    }

    fn done(self) -> qlimit_core::Result<(f64, usize, String)> {
        Ok((self.value, self.cases, self.at))
    }
}

pub fn fock_vs_gaussian(level: Level) -> Check {
    let (mus, ss, cutoff): (&[f64], &[f64], u32) = match level {
        Level::Quick => (&[0.5], &[0.5], 20),
        Level::Full => (&[0.1, 0.5, 1.0], &[0.3, 0.5, 0.7], 25),
    };
    let outcome = (|| {
        let mut worst = Worst::new();
        for &mu in mus {
            let g = mode_geometry(mu, 0.01)?;
            let (h0, h1) = (hypothesis_h0(&g), hypothesis_h1(&g)?);
            let pair = FockPair::new(&h0, &h1, cutoff)?;
            for &s in ss {
                let d = (pair.q(s)? - q_of_s(&h0, &h1, s)?).abs();
                worst.record(d, || format!("mu={mu} s={s} cutoff={cutoff}"));
            }
        }
        worst.done()
    })();
    Check::from_worst("fock_oracle_vs_gaussian_formula", 1e-8, outcome)
}

pub fn receiver_closed_vs_bruteforce(level: Level) -> Check {
    let outcome = (|| {
        let mut worst = Worst::new();
        for (mu, n0) in exponent_grid(level) {
            let closed = receiver_exponent(mu, n0)?.value().unwrap_or(f64::INFINITY);
            let brute = receiver_exponent_bruteforce(mu, n0, 40)?.value().unwrap_or(f64::INFINITY);
            worst.record((closed - brute).abs(), || format!("mu={mu} n0={n0}"));
        }
        worst.done()
    })();
    Check::from_worst("receiver_closed_form_vs_bruteforce", 1e-9, outcome)
}

pub fn receiver_equals_quantum(level: Level) -> Check {
    let outcome = (|| {
        let mut worst = Worst::new();
        for (mu, n0) in exponent_grid(level) {
            let xi_r = receiver_exponent(mu, n0)?.value().unwrap_or(f64::INFINITY);
            let xi_q = quantum_exponent(mu, n0)?.exponent;
            worst.record((xi_r - xi_q).abs() / xi_q, || format!("mu={mu} n0={n0}"));
        }
        worst.done()
    })();
    Check::from_worst("receiver_exponent_equals_qcb", 1e-6, outcome)
}

pub fn thermal_vs_vacuum() -> Check {
    let outcome = (|| {
        let mut worst = Worst::new();
        for n0 in [1e-4, 1e-3, 1e-2, 1e-1] {
            let h0 = GaussianHypothesis::product(vec![n0])?;
            let h1 = GaussianHypothesis::product(vec![0.0])?;
            let xi = qlimit_core::gaussian::qcb(&h0, &h1)?.exponent;
            worst.record((xi - n0.ln_1p()).abs(), || format!("n0={n0}"));
        }
        worst.done()
    })();
    Check::from_worst("thermal_vs_vacuum_exponent", 1e-10, outcome)
}

pub fn integer_separation_limits() -> Vec<Check> {
    let receiver = (|| {
        let mut worst = Worst::new();
        for mu in [1.0, 2.0, 3.0] {
            worst.record((normalized_receiver_exponent(mu)? - 1.0).abs(), || format!("mu={mu}"));
        }
        worst.done()
    })();
    let quantum = (|| {
        let mut worst = Worst::new();
        for mu in [1.0, 2.0, 3.0] {
            worst.record((normalized_quantum_exponent(mu)? - 1.0).abs(), || format!("mu={mu}"));
        }
        worst.done()
    })();
    vec![
        Check::from_worst("normalized_receiver_at_integer_mu", 0.0, receiver),
        Check::from_worst("normalized_qcb_at_integer_mu", 1e-5, quantum),
    ]
}

pub fn two_mode_counting_vs_qcb(level: Level) -> Check {
    let (ns, etas): (&[f64], &[f64]) = match level {
        Level::Quick => (&[0.005, 0.02], &[0.1, 0.5, 0.9]),
        Level::Full => (&[0.005, 0.01, 0.02], &[0.1, 0.3, 0.5, 0.7, 0.9]),
    };
    let outcome = (|| {
        let mut worst = Worst::new();
        for &n1 in ns {
            for &n2 in ns.iter().filter(|&&n2| n2 < n1) {
                for &eta in etas {
                    let counting = two_mode_counting_exponent(n1, n2, eta, CountingBasis::H0Product)?
                        .value()
                        .unwrap_or(f64::INFINITY);
                    let quantum = appendix_b_qcb(n1, n2, eta)?.exponent;
                    worst.record((counting - quantum).abs(), || {
                        format!("n1={n1} n2={n2} eta={eta}: counting {counting:.6e} vs qcb {quantum:.6e}")
                    });
                }
            }
        }
        worst.done()
    })();
    Check::from_worst("two_mode_counting_equals_qcb", 1e-6, outcome)
}

pub fn coarse_graining() -> Check {
    let outcome = (|| {
        let mut worst = Worst::new();
        for mu in [0.1, 0.6] {
            let c = continuum_exponent(mu)?.value().unwrap_or(f64::INFINITY);
            for delta in [0.1, 0.4, 1.0] {
                let cd = pixelated_exponent(mu, delta)?.value().unwrap_or(f64::INFINITY);
                // positive when pixelation would raise the exponent
                worst.record((cd - c).max(0.0), || format!("mu={mu} delta={delta}"));
            }
        }
        worst.done()
    })();
    Check::from_worst("pixelation_lowers_exponent", 1e-9, outcome)
}

/// 99% quantile of the chi-square law by the Wilson–Hilferty approximation.
pub fn chi_square_critical_99(df: f64) -> f64 {
    const Z_99: f64 = 2.326_347_874_040_841;
    let k = 2.0 / (9.0 * df);
    df * (1.0 - k + Z_99 * k.sqrt()).powi(3)
}

fn pearson(observed: &[f64], expected: &[f64]) -> f64 {
    observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum()
}

/// Chi-square statistic divided by its 99% critical value; below one passes.
pub fn sinc2_sampler_fit(level: Level) -> Check {
    let draws = match level {
        Level::Quick => 100_000,
        Level::Full => 1_000_000,
    };
    let edges: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    let mut observed = vec![0.0; edges.len() + 1];
    let mut rng = stream_rng(20_240_601, 0);
    let sampler = Sinc2Sampler::global();
    for _ in 0..draws {
        let y = sampler.sample(&mut rng);
        observed[edges.partition_point(|&e| e <= y)] += 1.0;
    }
    let cdf = |y: f64| 0.5 + sinc2_antiderivative(y);
    let mut expected = vec![cdf(edges[0])];
    expected.extend(edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])));
    expected.push(1.0 - cdf(edges[edges.len() - 1]));
    let expected: Vec<f64> = expected.iter().map(|p| p * draws as f64).collect();
    let crit = chi_square_critical_99((observed.len() - 1) as f64);
    let stat = pearson(&observed, &expected);
    Check::from_worst(
        "sinc2_sampler_goodness_of_fit",
        1.0,
        Ok((stat / crit, observed.len(), format!("chi2={stat:.3} critical={crit:.3} draws={draws}"))),
    )
}

pub fn mode_record_fit(level: Level) -> Check {
    let draws: u64 = match level {
        Level::Quick => 200_000,
        Level::Full => 1_000_000,
    };
    let outcome = (|| {
        let g = mode_geometry(0.7, 0.5)?;
        let mut rng = stream_rng(20_240_601, 1);
        let mut hist: HashMap<ClickRecord, f64> = HashMap::new();
        for rec in sample_mode_records(Hypothesis::H1, &g, draws, &mut rng)? {
            *hist.entry(rec).or_insert(0.0) += 1.0;
        }
        let (mut observed, mut expected) = (Vec::new(), Vec::new());
        let (mut rest_obs, mut rest_exp) = (draws as f64, draws as f64);
        for k1 in 0..12 {
            for k2 in 0..12 {
                for k3 in 0..12 {
                    let rec = ClickRecord::new(k1, k2, k3);
                    let e = pmf_h1(rec, &g) * draws as f64;
                    if e >= 5.0 {
                        let o = hist.get(&rec).copied().unwrap_or(0.0);
                        observed.push(o);
                        expected.push(e);
                        rest_obs -= o;
                        rest_exp -= e;
                    }
                }
            }
        }
        observed.push(rest_obs);
        expected.push(rest_exp.max(f64::MIN_POSITIVE));
        let crit = chi_square_critical_99((observed.len() - 1) as f64);
        let stat = pearson(&observed, &expected);
        Ok((stat / crit, observed.len(), format!("chi2={stat:.3} critical={crit:.3} draws={draws}")))
    })();
    Check::from_worst("mode_record_goodness_of_fit", 1.0, outcome)
}

/// Every check at the given level, in report order.
pub fn run_checks(level: Level) -> Vec<Check> {
    let mut checks = vec![
        fock_vs_gaussian(level),
        receiver_closed_vs_bruteforce(level),
        receiver_equals_quantum(level),
        thermal_vs_vacuum(),
    ];
    checks.extend(integer_separation_limits());
    checks.push(two_mode_counting_vs_qcb(level));
    checks.push(coarse_graining());
    checks.push(sinc2_sampler_fit(level));
    checks.push(mode_record_fit(level));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_hilferty_quantiles() {
        // reference 99% quantiles of the chi-square law
        for (df, q) in [(10.0, 23.209), (30.0, 50.892), (41.0, 64.950)] {
            assert!((chi_square_critical_99(df) / q - 1.0).abs() < 2e-3, "{df}");
        }
    }

    #[test]
    fn failed_computation_is_reported_not_raised() {
        let c = Check::from_worst("x", 1.0, Err(qlimit_core::Error::NanLikelihood));
        assert!(!c.passed);
        assert!(c.row().get("observed").is_none());
    }

    #[test]
    fn nan_deviation_fails() {
        let mut w = Worst::new();
        w.record(f64::NAN, || "here".into());
        let (v, _, at) = w.done().unwrap();
        assert!(v.is_infinite());
        assert_eq!(at, "here");
    }
}
