//! End-to-end acceptance criteria. Each test prints one PASS or FAIL line.

use qlimit_cli::args::FigureId;
use qlimit_cli::figures::{self, pixel_width_grid, separation_grid};
use qlimit_cli::output::Row;
use qlimit_core::fock::FockPair;
use qlimit_core::gaussian::qcb;
use qlimit_core::receiver::CountingBasis;
use qlimit_core::{
    appendix_b_qcb, continuum_exponent, estimate_error, hypothesis_h0, hypothesis_h1, mode_geometry,
    normalized_quantum_exponent, normalized_receiver_exponent, pixelated_exponent, q_of_s, quantum_exponent,
    receiver_bound, receiver_exponent, receiver_exponent_bruteforce, two_mode_counting_exponent, Estimator,
    GaussianHypothesis, Receiver, SceneParams, TrialConfig,
};
use rayon::prelude::*;

const MU_GRID: [f64; 7] = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0];
const N0_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

fn report(criterion: u32, passed: bool, detail: String) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("{status} criterion {criterion}: {detail}");
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn grid() -> Vec<(f64, f64)> {
    MU_GRID.iter().flat_map(|&mu| N0_GRID.iter().map(move |&n0| (mu, n0))).collect()
}

/// Largest value of `f` over `cases`, with the case attaining it.
fn worst<T: Copy + Sync + std::fmt::Debug + Send>(cases: &[T], f: impl Fn(T) -> f64 + Sync) -> (f64, T) {
    cases
        .par_iter()
        .map(|&c| {
            let v = f(c);
            (if v.is_nan() { f64::INFINITY } else { v }, c)
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .expect("nonempty case list")
}

fn continuum(mu: f64) -> f64 {
    continuum_exponent(mu).unwrap().value().unwrap()
}

fn pixelated(mu: f64, delta: f64) -> f64 {
    pixelated_exponent(mu, delta).unwrap().value().unwrap()
}

#[test]
fn criterion_1_mode_sorting_reaches_the_quantum_exponent() {
    let (dev, at) = worst(&grid(), |(mu, n0)| {
        let q = quantum_exponent(mu, n0).unwrap().exponent;
        let r = receiver_exponent(mu, n0).unwrap().value().unwrap();
        ((r - q) / q).abs()
    });
    report(1, dev < 1e-6, format!("max |xi_r - xi_q| / xi_q = {dev:.3e} at (mu, n0) = {at:?}, limit 1e-6"));
}

#[test]
fn criterion_2_gaussian_formula_matches_fock_oracle() {
    let cases: Vec<f64> = vec![0.1, 0.5, 1.0];
    let per_mu: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .map(|&mu| {
            let geom = mode_geometry(mu, 0.01).unwrap();
            let h0 = hypothesis_h0(&geom);
            let h1 = hypothesis_h1(&geom).unwrap();
            let pair = FockPair::new(&h0, &h1, 25).unwrap();
            [0.3, 0.5, 0.7]
                .into_iter()
                .map(|s| ((q_of_s(&h0, &h1, s).unwrap() - pair.q(s).unwrap()).abs(), mu, s))
                .fold((0.0, mu, 0.0), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    let (dev, mu, s) = per_mu.into_iter().fold((0.0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    report(2, dev < 1e-8, format!("max |q_of_s - fock| = {dev:.3e} at mu = {mu}, s = {s}, cutoff 25, limit 1e-8"));
}

#[test]
fn criterion_3_calibration_limits() {
    let mut worst_thermal: f64 = 0.0;
    for n0 in N0_GRID {
        let h0 = GaussianHypothesis::product(vec![n0]).unwrap();
        let h1 = GaussianHypothesis::product(vec![0.0]).unwrap();
        let xi = qcb(&h0, &h1).unwrap().exponent;
        worst_thermal = worst_thermal.max((xi - n0.ln_1p()).abs());
    }
    let mut r_exact = true;
    let mut worst_z: f64 = 0.0;
    for mu in [1.0, 2.0, 3.0, 4.0, 5.0] {
        r_exact &= normalized_receiver_exponent(mu).unwrap() == 1.0;
        worst_z = worst_z.max((normalized_quantum_exponent(mu).unwrap() - 1.0).abs());
    }
    let passed = worst_thermal < 1e-10 && r_exact && worst_z < 1e-5;
    report(
        3,
        passed,
        format!(
            "thermal-vs-vacuum deviation {worst_thermal:.3e} (limit 1e-10); R = 1 exactly at integer mu: {r_exact}; \
             max |Z - 1| = {worst_z:.3e} (limit 1e-5)"
        ),
    );
}

#[test]
fn criterion_4_closed_form_matches_bruteforce() {
    let (dev, at) = worst(&grid(), |(mu, n0)| {
        let closed = receiver_exponent(mu, n0).unwrap().value().unwrap();
        let brute = receiver_exponent_bruteforce(mu, n0, 40).unwrap().value().unwrap();
        (closed - brute).abs()
    });
    report(4, dev < 1e-9, format!("max |closed - bruteforce| = {dev:.3e} at (mu, n0) = {at:?}, limit 1e-9"));
}

/// Index pairs `(i, j)`, `i < j`, where `values` has a strict local minimum at
/// `i` and a strict local maximum at `j`.
fn min_then_max(values: &[f64]) -> Option<(usize, usize)> {
    let interior = 1..values.len().saturating_sub(1);
    let is_min = |i: usize| values[i] < values[i - 1] && values[i] < values[i + 1];
    let is_max = |i: usize| values[i] > values[i - 1] && values[i] > values[i + 1];
    let first_min = interior.clone().find(|&i| is_min(i))?;
    let next_max = (first_min + 1..values.len() - 1).find(|&i| is_max(i))?;
    Some((first_min, next_max))
}

#[test]
fn criterion_5_focal_plane_is_suboptimal_and_pixelation_costs() {
    let mus = separation_grid();
    let (excess, at_mu) = worst(&mus, |mu| {
        normalized_c(mu) - normalized_quantum_exponent(mu).unwrap()
    });
    let gap = normalized_quantum_exponent(0.1).unwrap() - normalized_c(0.1);

    let c_mu = continuum(0.1);
    let fine = pixelated(0.1, 1e-3);
    let widths = pixel_width_grid();
    let pixel: Vec<f64> = widths.par_iter().map(|&d| pixelated(0.1, d)).collect();
    let max_pixel = pixel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let oscillation = min_then_max(&pixel);

    let passed = excess <= 0.0 && gap > 0.0 && (fine - c_mu).abs() < 1e-4 && max_pixel <= c_mu && oscillation.is_some();
    report(
        5,
        passed,
        format!(
            "max (C - Z) = {excess:.3e} at mu = {at_mu:.4}; gap Z - C at mu = 0.1 is {gap:.3e}; \
             |C(delta=1e-3) - C| = {:.3e}; max C(delta) - C = {:.3e}; local min then max at widths {:?}",
            (fine - c_mu).abs(),
            max_pixel - c_mu,
            oscillation.map(|(i, j)| (widths[i], widths[j])),
        ),
    );
}

/// Continuum exponent per detected photon.
fn normalized_c(mu: f64) -> f64 {
    let r = continuum_exponent(mu).unwrap();
    assert!(r.normalized);
    r.value().unwrap()
}

#[test]
fn criterion_6_two_mode_counting_is_quantum_optimal() {
    let levels = [0.005, 0.01, 0.02];
    let cases: Vec<(f64, f64, f64)> = levels
        .iter()
        .flat_map(|&n1| levels.iter().map(move |&n2| (n1, n2)))
        .filter(|&(n1, n2)| n2 < n1)
        .flat_map(|(n1, n2)| [0.1, 0.3, 0.5, 0.7, 0.9].map(|eta| (n1, n2, eta)))
        .collect();
    let (dev, at) = worst(&cases, |(n1, n2, eta)| {
        let counting = two_mode_counting_exponent(n1, n2, eta, CountingBasis::H0Product)
            .unwrap()
            .value()
            .unwrap();
        let quantum = appendix_b_qcb(n1, n2, eta).unwrap().exponent;
        (counting - quantum).abs()
    });
    report(
        6,
        dev < 1e-6,
        format!("max |counting - qcb| = {dev:.3e} at (n1, n2, eta) = {at:?} over {} cases, limit 1e-6", cases.len()),
    );
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn criterion_7_monte_carlo_respects_the_bounds() {
    let (mu, n0, m, trials) = (0.5, 0.01, 2000, 100_000);
    let scene = SceneParams::new(mu, n0, m).unwrap();
    let receivers = [Receiver::Continuum, Receiver::Pixelated { delta: 0.4 }, Receiver::ModeSorted];
    let mut details = Vec::new();
    let mut passed = true;
    for (i, receiver) in receivers.into_iter().enumerate() {
        let estimate = estimate_error(&TrialConfig::new(scene, receiver, trials, 700 + i as u64).unwrap()).unwrap();
        let bound = receiver_bound(&scene, receiver).unwrap();
        let ok = estimate.p_hat <= bound + 3.0 * estimate.half_width();
        passed &= ok;
        details.push(format!("{receiver:?}: p_hat {:.4e} vs bound {bound:.4e}", estimate.p_hat));
    }

    let modes: Vec<f64> = (1..=6).map(|k| 1000.0 * k as f64).collect();
    let logs: Vec<f64> = modes
        .iter()
        .map(|&m| {
            let scene = SceneParams::new(mu, n0, m as u64).unwrap();
            let config = TrialConfig::new(scene, Receiver::ModeSorted, trials, 900)
                .unwrap()
                .with_estimator(Estimator::Tilted { s: 0.5 });
            estimate_error(&config).unwrap().p_hat.ln()
        })
        .collect();
    let xi_r = receiver_exponent(mu, n0).unwrap().value().unwrap();
    let fitted = slope(&modes, &logs);
    let slope_ok = ((fitted + xi_r) / xi_r).abs() < 0.1;
    passed &= slope_ok;
    details.push(format!("mode-sorted slope {fitted:.5e} vs -xi_r {:.5e}", -xi_r));
    report(7, passed, details.join("; "));
}

fn numbers(rows: &[Row], column: &str) -> Vec<f64> {
    rows.iter().map(|r| r.number(column).unwrap_or_else(|| panic!("missing {column}"))).collect()
}

#[test]
fn criterion_8_figure_tables_show_the_expected_shapes() {
    let fig3 = figures::figure_rows(FigureId::ReceiverBounds).unwrap();
    let fpa = numbers(&fig3, "bound_fpa");
    let sorted = numbers(&fig3, "bound_mode_sorted");
    let quantum = numbers(&fig3, "bound_qcb");
    let coincide = sorted.iter().zip(&quantum).all(|(a, b)| ((a - b) / b).abs() < 1e-6);
    let below = sorted.iter().zip(&fpa).all(|(a, b)| a < b);

    // photon numbers are listed in increasing order, so walk the table backwards
    let fig4 = figures::figure_rows(FigureId::PhotonNumber).unwrap();
    let mut converging = true;
    for column in ["xi_q_over_n0", "xi_r_over_n0"] {
        let mut values = numbers(&fig4, column);
        values.reverse();
        let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        converging &= steps.windows(2).all(|w| w[1] < w[0]);
    }
    let q_small = numbers(&fig4, "xi_q_over_n0")[0];
    let r_small = numbers(&fig4, "xi_r_over_n0")[0];
    let common = ((q_small - r_small) / q_small).abs() < 1e-6;

    let fig5 = figures::figure_rows(FigureId::Normalized).unwrap();
    let last = fig5.last().unwrap();
    let c5 = last.number("c_mu").unwrap();
    let r5 = last.number("r_mu").unwrap();
    let z5 = last.number("z_mu").unwrap();
    // the curves oscillate, so compare the envelope of |1 - v| on two bands
    let mus = numbers(&fig5, "mu");
    let envelope = |v: &[f64], lo: f64, hi: f64| {
        mus.iter()
            .zip(v)
            .filter(|(&mu, _)| mu >= lo && mu < hi)
            .map(|(_, &x)| (1.0 - x).abs())
            .fold(0.0, f64::max)
    };
    let approach = ["c_mu", "z_mu", "r_mu"].iter().all(|col| {
        let v = numbers(&fig5, col);
        envelope(&v, 2.5, 5.5) < envelope(&v, 1.0, 2.5)
    });
    let fig5_ok = c5 < 0.99 && r5 == 1.0 && (z5 - 1.0).abs() < 1e-5 && approach;

    let passed = coincide && below && converging && common && fig5_ok;
    report(
        8,
        passed,
        format!(
            "fig 3 curves coincide: {coincide}, below FPA: {below}; fig 4 converging: {converging}, \
             common limit: {common}; fig 5 C(5) = {c5:.5}, R(5) = {r5}, Z(5) = {z5:.8}, approach 1: {approach}"
        ),
    );
}
