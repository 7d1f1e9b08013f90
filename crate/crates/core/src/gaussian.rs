//! Quantum Chernoff bound between zero-mean, phase-insensitive Gaussian
//! states given by their thermal occupations and a real orthogonal mixing.

use crate::error::{invalid, Error, Result};
use crate::optics::{check_mu, mode_geometry, ModeGeometry};
use crate::optimize::{minimize_unit_interval_with_margin, EndpointLimits};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Endpoint approach sequence used to evaluate `Q(s)` limits at `s = 0, 1`.
pub const ENDPOINT_EPS: [f64; 3] = [1e-3, 1e-5, 1e-7];

const ORTHOGONALITY_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-10;

/// An `n`-mode Gaussian state `U(mix) [⊗ₖ thermal(occupation_k)] U(mix)†`.
///
/// Its single-quadrature covariance block is `mix · diag(ν) · mixᵀ` with
/// `ν_k = 2·occupation_k + 1` (vacuum = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHypothesis {
    occupations: Vec<f64>,
    mix: DMatrix<f64>,
}

impl GaussianHypothesis {
    /// State from thermal occupations; `mix` must be square, orthogonal and
    /// match the number of modes.
    pub fn from_occupations(occupations: Vec<f64>, mix: DMatrix<f64>) -> Result<Self> {
        let n = occupations.len();
        if n == 0 {
            return Err(invalid("modes", 0.0, "at least one mode is required"));
        }
        if mix.nrows() != n || mix.ncols() != n {
            return Err(invalid("mix", mix.nrows() as f64, "must be square with one row per mode"));
        }
        for &occ in &occupations {
            if !(occ >= 0.0 && occ.is_finite()) {
                return Err(invalid("occupation", occ, "must be finite and non-negative"));
            }
        }
        let defect = (&mix * mix.transpose() - DMatrix::identity(n, n)).amax();
        if defect > ORTHOGONALITY_TOL {
            return Err(invalid("mix", defect, "is not orthogonal"));
        }
        Ok(Self { occupations, mix })
    }

    /// State from symplectic eigenvalues in the vacuum = 1 convention.
    pub fn new(nu: &[f64], mix: DMatrix<f64>) -> Result<Self> {
        let mut occupations = Vec::with_capacity(nu.len());
        for &x in nu {
            if !(x >= 1.0 - 1e-12 && x.is_finite()) {
                return Err(invalid("nu", x, "symplectic eigenvalues must be at least 1"));
            }
            occupations.push(((x - 1.0) / 2.0).max(0.0));
        }
        Self::from_occupations(occupations, mix)
    }

    /// Product of thermal states with the identity mixing.
    pub fn product(occupations: Vec<f64>) -> Result<Self> {
        let n = occupations.len();
        Self::from_occupations(occupations, DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.occupations.len()
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    /// Symplectic eigenvalues `2·occupation + 1`.
    pub fn nu(&self) -> Vec<f64> {
        self.occupations.iter().map(|n| 2.0 * n + 1.0).collect()
    }

    pub fn mix(&self) -> &DMatrix<f64> {
        &self.mix
    }

    /// Single-quadrature covariance block `mix · diag(ν) · mixᵀ`.
    pub fn covariance_block(&self) -> DMatrix<f64> {
        let nu = DVector::from_vec(self.nu());
        &self.mix * DMatrix::from_diagonal(&nu) * self.mix.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcbResult {
    pub q_min: f64,
    pub s_star: f64,
    /// `−ln q_min`
    pub exponent: f64,
}

/// How the two-source state distributes energy between the sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum H1Convention {
    /// Each source radiates `N₀/2`, so both hypotheses carry `N₀` photons per
    /// mode and coincident sources reproduce the one-source state.
    #[default]
    EqualEnergy,
    /// Each source radiates `N₀`; the two-source state then carries `2N₀`.
    PerSourceN0,
}

/// One source on axis: thermal light in the symmetric mode, vacuum elsewhere.
pub fn hypothesis_h0(geom: &ModeGeometry) -> GaussianHypothesis {
    GaussianHypothesis::product(vec![geom.n0, 0.0, 0.0]).expect("valid thermal product")
}

/// Two sources at `±μ` under the equal-energy convention.
pub fn hypothesis_h1(geom: &ModeGeometry) -> Result<GaussianHypothesis> {
    hypothesis_h1_with(geom, H1Convention::EqualEnergy)
}

/// Mixing matrix whose columns are the eigenvectors of the two-source block.
pub fn h1_mix(geom: &ModeGeometry) -> DMatrix<f64> {
    let (a, b) = (geom.a, geom.b);
    DMatrix::from_row_slice(3, 3, &[a, 0.0, -b, 0.0, 1.0, 0.0, b, 0.0, a])
}

/// Two-source state. The construction is checked against the covariance
/// block written directly in terms of `A` and `B`, and against a numerical
/// eigendecomposition of that block.
pub fn hypothesis_h1_with(geom: &ModeGeometry, convention: H1Convention) -> Result<GaussianHypothesis> {
    let per_source = match convention {
        H1Convention::EqualEnergy => geom.n0 / 2.0,
        H1Convention::PerSourceN0 => geom.n0,
    };
    let occupations = vec![
        per_source * (1.0 + geom.s2),
        per_source * (1.0 - geom.s2),
        0.0,
    ];
    let state = GaussianHypothesis::from_occupations(occupations, h1_mix(geom))?;

    let (ba, bb, n) = (geom.big_a, geom.big_b, per_source);
    let direct = DMatrix::from_row_slice(
        3,
        3,
        &[
            n * ba * ba + 1.0,
            0.0,
            n * ba * bb,
            0.0,
            2.0 * n * (1.0 - geom.s2) + 1.0,
            0.0,
            n * ba * bb,
            0.0,
            n * bb * bb + 1.0,
        ],
    );
    let built = state.covariance_block();
    let scale = 1.0 + direct.amax();
    let residual = (&built - &direct).amax() / scale;
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::Reconstruction { residual });
    }
    check_eigenvectors(&direct, &state)?;
    Ok(state)
}

/// Compare a numerical eigendecomposition of `block` with the analytic
/// spectrum and, for non-degenerate eigenvalues, the analytic eigenvectors.
fn check_eigenvectors(block: &DMatrix<f64>, state: &GaussianHypothesis) -> Result<()> {
    let eig = SymmetricEigen::new(block.clone());
    let nu = state.nu();
    let scale = 1.0 + block.amax();
    let mut numeric: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut analytic = nu.clone();
    numeric.sort_by(f64::total_cmp);
    analytic.sort_by(f64::total_cmp);
    let spectrum = numeric
        .iter()
        .zip(&analytic)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale;
    if spectrum > 1e-9 {
        return Err(Error::Reconstruction { residual: spectrum });
    }
    for (k, &value) in nu.iter().enumerate() {
        let isolated = nu
            .iter()
            .enumerate()
            .all(|(j, &other)| j == k || (other - value).abs() > 1e-6 * scale);
        if !isolated {
            continue;
        }
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - value).abs().total_cmp(&(y.1 - value).abs()))
            .expect("non-empty spectrum");
        let overlap = eig.eigenvectors.column(idx).dot(&state.mix.column(k)).abs();
        if (1.0 - overlap) > 1e-9 {
            return Err(Error::Reconstruction {
                residual: 1.0 - overlap,
            });
        }
    }
    Ok(())
}

/// `(n+1)^p − n^p` without cancellation for small `p` or small `n`.
fn power_gap(p: f64, occ: f64) -> f64 {
    if occ == 0.0 {
        return 1.0;
    }
    (p * occ.ln_1p()).exp_m1() - (p * occ.ln()).exp_m1()
}

fn power_sum(p: f64, occ: f64) -> f64 {
    if occ == 0.0 {
        return 1.0;
    }
    (p * occ.ln_1p()).exp() + (p * occ.ln()).exp()
}

fn occupation_of(x: f64) -> Result<f64> {
    if !(x >= 1.0 && x.is_finite()) {
        return Err(invalid("x", x, "symplectic eigenvalue must be at least 1"));
    }
    Ok((x - 1.0) / 2.0)
}

fn check_power(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(invalid("p", p, "must lie in (0, 1]"))
    }
}

/// `G_p(x) = 2^p / ((x+1)^p − (x−1)^p)`.
pub fn g_factor(p: f64, x: f64) -> Result<f64> {
    check_power(p)?;
    Ok(1.0 / power_gap(p, occupation_of(x)?))
}

/// `Λ_p(x) = ((x+1)^p + (x−1)^p) / ((x+1)^p − (x−1)^p)`.
pub fn lambda_factor(p: f64, x: f64) -> Result<f64> {
    check_power(p)?;
    let occ = occupation_of(x)?;
    Ok(power_sum(p, occ) / power_gap(p, occ))
}

fn check_pair(h0: &GaussianHypothesis, h1: &GaussianHypothesis) -> Result<()> {
    if h0.n() != h1.n() {
        return Err(invalid("modes", h1.n() as f64, "hypotheses must have the same mode count"));
    }
    Ok(())
}

fn check_open_unit(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(invalid("s", s, "must lie in the open interval (0, 1)"))
    }
}

/// `mix · diag(Λ_p(ν)) · mixᵀ` and `Σ ln G_p(ν)`.
fn powered_block(h: &GaussianHypothesis, p: f64) -> (DMatrix<f64>, f64) {
    let mut lambda = DVector::zeros(h.n());
    let mut ln_g = 0.0;
    for (k, &occ) in h.occupations.iter().enumerate() {
        let gap = power_gap(p, occ);
        lambda[k] = power_sum(p, occ) / gap;
        ln_g -= gap.ln();
    }
    (&h.mix * DMatrix::from_diagonal(&lambda) * h.mix.transpose(), ln_g)
}

/// `ln((n+1)^p − n^p)` and `n^p / ((n+1)^p − n^p)`, the latter being half of
/// `Λ_p − 1`. Both stay accurate as `n → 0` and as `p → 0`.
fn log_gap_and_excess(p: f64, occ: f64) -> (f64, f64) {
    if occ == 0.0 {
        return (0.0, 0.0);
    }
    // x = (n/(n+1))^p ∈ (0, 1)
    let r = p * (occ.ln() - occ.ln_1p());
    let x = r.exp();
    let one_minus_x = -r.exp_m1();
    let ln_one_minus_x = if x < 0.5 { (-x).ln_1p() } else { one_minus_x.ln() };
    (p * occ.ln_1p() + ln_one_minus_x, x / one_minus_x)
}

/// `ln Q(s)` from the factored determinant.
///
/// With `M_h = mix_h · diag(Λ) · mix_hᵀ` the sum `M₀ + M₁` equals `2(I + A)`
/// for a positive semidefinite `A`, so `ln Q = −Σ ln gap − Σ ln(1 + λ(A))`
/// is assembled from small terms only.
pub fn ln_q_of_s(h0: &GaussianHypothesis, h1: &GaussianHypothesis, s: f64) -> Result<f64> {
    check_pair(h0, h1)?;
    check_open_unit(s)?;
    let n = h0.n();
    let mut a = DMatrix::zeros(n, n);
    let mut ln_gaps = 0.0;
    for (h, p) in [(h0, s), (h1, 1.0 - s)] {
        let mut excess = DVector::zeros(n);
        for (k, &occ) in h.occupations.iter().enumerate() {
            let (ln_gap, e) = log_gap_and_excess(p, occ);
            ln_gaps += ln_gap;
            excess[k] = e;
        }
        a += &h.mix * DMatrix::from_diagonal(&excess) * h.mix.transpose();
    }
    // eigenvalues carry absolute error ~ ε‖A‖, so the spectral form is only
    // used while A is small
    let ln_det: f64 = if a.amax() <= 1.0 {
        SymmetricEigen::new(a).eigenvalues.iter().map(|&l| l.ln_1p()).sum()
    } else {
        let chol = (a + DMatrix::identity(n, n))
            .cholesky()
            .ok_or(Error::NonFinite { at: s })?;
        2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    };
    let ln_q = -ln_gaps - ln_det;
    if !ln_q.is_finite() {
        return Err(Error::NonFinite { at: s });
    }
    Ok(ln_q)
}

/// `Q(s) = Tr ρ₀ˢ ρ₁^{1−s}` from symplectic data.
///
/// Both quadrature blocks are equal with no cross block, so the square root
/// of the `2n × 2n` determinant equals the `n × n` determinant.
pub fn q_of_s(h0: &GaussianHypothesis, h1: &GaussianHypothesis, s: f64) -> Result<f64> {
    Ok(ln_q_of_s(h0, h1, s)?.exp())
}

/// `Q(s)` assembled from the full `2n × 2n` quadrature covariance sum.
pub fn q_of_s_full(h0: &GaussianHypothesis, h1: &GaussianHypothesis, s: f64) -> Result<f64> {
    check_pair(h0, h1)?;
    check_open_unit(s)?;
    let n = h0.n();
    let (m0, g0) = powered_block(h0, s);
    let (m1, g1) = powered_block(h1, 1.0 - s);
    let block = m0 + m1;
    let mut full = DMatrix::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&block);
    full.view_mut((n, n), (n, n)).copy_from(&block);
    let det = full.determinant();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::NonFinite { at: s });
    }
    Ok((n as f64 * std::f64::consts::LN_2 + g0 + g1).exp() / det.sqrt())
}

/// Closest approach to an endpoint during refinement. Nearer than this the
/// powered blocks are dominated by `ln s` terms and lose digits.
const ENDPOINT_MARGIN: f64 = 1e-6;

/// Agreement required between the exact endpoint limit and the extrapolated
/// approach sequence.
const ENDPOINT_AGREEMENT: f64 = 1e-6;

/// Endpoint limit of `ln Q` from the approach sequence, extrapolated linearly
/// from its last two points. Fails when successive differences grow.
fn endpoint_ln_q<F: Fn(f64) -> Result<f64>>(ln_q: F, towards_one: bool) -> Result<f64> {
    let mut values = [0.0; 3];
    for (v, &eps) in values.iter_mut().zip(&ENDPOINT_EPS) {
        *v = ln_q(if towards_one { 1.0 - eps } else { eps })?;
    }
    let d1 = values[1] - values[0];
    let d2 = values[2] - values[1];
    if d2.abs() > d1.abs() + 1e-13 {
        return Err(Error::NotConverged {
            what: "endpoint limit of Q(s)",
            first: d1,
            second: d2,
        });
    }
    let (e2, e3) = (ENDPOINT_EPS[1], ENDPOINT_EPS[2]);
    Ok(values[2] - e3 * (values[1] - values[2]) / (e2 - e3))
}

/// `ln Tr(Π ρ₁)` with `Π` the support projector of `ρ₀`, which is the `s → 0`
/// limit of `ln Q(s)`. `Π` keeps the modes where `ρ₀` is vacuum empty, so the
/// trace is the vacuum probability of `ρ₁` reduced to those modes.
pub fn support_overlap_ln(h0: &GaussianHypothesis, h1: &GaussianHypothesis) -> Result<f64> {
    check_pair(h0, h1)?;
    let dark: Vec<usize> = (0..h0.n()).filter(|&k| h0.occupations[k] == 0.0).collect();
    if dark.is_empty() {
        return Ok(0.0);
    }
    let occ = DVector::from_column_slice(&h1.occupations);
    let excess = &h1.mix * DMatrix::from_diagonal(&occ) * h1.mix.transpose();
    let basis = h0.mix.select_columns(dark.iter());
    let reduced = basis.transpose() * excess * &basis;
    Ok(-SymmetricEigen::new(reduced)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).ln_1p())
        .sum::<f64>())
}

fn endpoint_limit(h0: &GaussianHypothesis, h1: &GaussianHypothesis, towards_one: bool) -> Result<f64> {
    let exact = if towards_one {
        support_overlap_ln(h1, h0)?
    } else {
        support_overlap_ln(h0, h1)?
    };
    let approach = endpoint_ln_q(|s| ln_q_of_s(h0, h1, s), towards_one)?;
    if (approach - exact).abs() > ENDPOINT_AGREEMENT * (1.0 + exact.abs()) {
        return Err(Error::NotConverged {
            what: "endpoint limit of Q(s) against the support overlap",
            first: approach,
            second: exact,
        });
    }
    Ok(exact)
}

/// Quantum Chernoff bound `min_s Tr ρ₀ˢ ρ₁^{1−s}` between two states.
pub fn qcb(h0: &GaussianHypothesis, h1: &GaussianHypothesis) -> Result<QcbResult> {
    check_pair(h0, h1)?;
    let at_zero = endpoint_limit(h0, h1, false)?;
    let at_one = endpoint_limit(h0, h1, true)?;
    // ln Q is well defined on the open interval once the pair is valid
    let best = minimize_unit_interval_with_margin(
        |s| ln_q_of_s(h0, h1, s).unwrap_or(f64::NAN),
        EndpointLimits::new(at_zero, at_one),
        1e-10,
        ENDPOINT_MARGIN,
    )?;
    let ln_min = best.value.min(0.0);
    Ok(QcbResult {
        q_min: ln_min.exp(),
        s_star: best.s,
        exponent: -ln_min,
    })
}

/// Per-mode quantum Chernoff exponent `ξ_Q` of the imaging problem.
pub fn quantum_exponent(mu: f64, n0: f64) -> Result<QcbResult> {
    quantum_exponent_with(mu, n0, H1Convention::EqualEnergy)
}

pub fn quantum_exponent_with(mu: f64, n0: f64, convention: H1Convention) -> Result<QcbResult> {
    check_mu(mu)?;
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(invalid("n0", n0, "must be positive and finite"));
    }
    if mu == 0.0 && convention == H1Convention::EqualEnergy {
        return Ok(QcbResult {
            q_min: 1.0,
            s_star: 0.5,
            exponent: 0.0,
        });
    }
    let geom = mode_geometry(mu, n0)?;
    qcb(&hypothesis_h0(&geom), &hypothesis_h1_with(&geom, convention)?)
}

/// Photon numbers at which the per-photon limit is sampled.
pub const NORMALIZATION_N0: [f64; 2] = [1e-5, 1e-6];

/// `Z_μ = lim_{N₀→0} ξ_Q/N₀`, linearly extrapolated in `N₀`.
pub fn normalized_quantum_exponent(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let [na, nb] = NORMALIZATION_N0;
    let fa = quantum_exponent(mu, na)?.exponent / na;
    let fb = quantum_exponent(mu, nb)?.exponent / nb;
    extrapolate_to_zero(na, fa, nb, fb, "per-photon quantum exponent")
}

pub(crate) fn extrapolate_to_zero(
    na: f64,
    fa: f64,
    nb: f64,
    fb: f64,
    what: &'static str,
) -> Result<f64> {
    if fa == 0.0 && fb == 0.0 {
        return Ok(0.0);
    }
    if (fa - fb).abs() > 1e-5 * fa.abs().max(fb.abs()) {
        return Err(Error::NotConverged {
            what,
            first: fa,
            second: fb,
        });
    }
    Ok(fb - nb * (fa - fb) / (na - nb))
}

/// Two-mode problem: `thermal(n1) ⊗ vacuum` against `thermal(n2) ⊗ vacuum`
/// after a beamsplitter of transmissivity `eta`.
pub fn appendix_b_hypotheses(n1: f64, n2: f64, eta: f64) -> Result<(GaussianHypothesis, GaussianHypothesis)> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", eta, "transmissivity must lie in [0, 1]"));
    }
    for (name, v) in [("n1", n1), ("n2", n2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, v, "must be positive and finite"));
        }
    }
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let h0 = GaussianHypothesis::product(vec![n1, 0.0])?;
    let rotation = DMatrix::from_row_slice(2, 2, &[t, r, -r, t]);
    let h1 = GaussianHypothesis::from_occupations(vec![n2, 0.0], rotation)?;
    Ok((h0, h1))
}

/// Quantum Chernoff bound of the two-mode beamsplitter problem.
pub fn appendix_b_qcb(n1: f64, n2: f64, eta: f64) -> Result<QcbResult> {
    let (h0, h1) = appendix_b_hypotheses(n1, n2, eta)?;
    qcb(&h0, &h1)
}
