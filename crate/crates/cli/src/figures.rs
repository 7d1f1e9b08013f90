//! Data tables behind the standard plots.

use crate::args::FigureId;
use crate::commands::{log_space, SeparationExponents};
use crate::error::Result;
use crate::output::Row;
use qlimit_core::{
    bound_at_scale, continuum_exponent, normalized_quantum_exponent, normalized_receiver_exponent,
    pixelated_exponent, quantum_exponent, receiver_exponent,
};
use rayon::prelude::*;

/// Separation used by the pixel-width and mode-count tables.
pub const FIGURE_MU: f64 = 0.1;
/// Photon number per mode used by the pixel-width and mode-count tables.
pub const FIGURE_N0: f64 = 1e-3;
/// Pixel widths of the bound-versus-modes table; zero means no pixelation.
pub const BOUND_DELTAS: [f64; 4] = [0.0, 0.3, 0.4, 0.5];

/// Pixel widths `0.02, 0.04, ..., 1.5`.
pub fn pixel_width_grid() -> Vec<f64> {
    (1..=75).map(|i| 0.02 * i as f64).collect()
}

/// Mode counts `10⁴ .. 10⁸`, ten per decade.
pub fn pixel_bound_modes() -> Vec<f64> {
    log_space(1e4, 1e8, 41)
}

/// Mode counts `10³ .. 10⁶`, ten per decade.
pub fn receiver_bound_modes() -> Vec<f64> {
    log_space(1e3, 1e6, 31)
}

/// Photon numbers per mode `10⁻⁶ .. 10⁻¹`, five per decade.
pub fn photon_number_grid() -> Vec<f64> {
    log_space(1e-6, 1e-1, 26)
}

/// Separations `0.01 .. 5`, 60 points log-spaced.
pub fn separation_grid() -> Vec<f64> {
    log_space(0.01, 5.0, 60)
}

fn value(result: qlimit_core::ChernoffResult) -> f64 {
    result.value().unwrap_or(f64::INFINITY)
}

pub fn figure_rows(id: FigureId) -> Result<Vec<Row>> {
    match id {
        FigureId::PixelWidth => pixel_width_rows(),
        FigureId::PixelBounds => pixel_bound_rows(),
        FigureId::ReceiverBounds => receiver_bound_rows(),
        FigureId::PhotonNumber => photon_number_rows(),
        FigureId::Normalized => normalized_rows(),
    }
}

/// Parameters shared by every row of a figure, for the metadata block.
pub fn figure_parameters(id: FigureId) -> Vec<(String, String)> {
    let fixed = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    match id {
        FigureId::PixelWidth => fixed(&[("mu", FIGURE_MU), ("delta_start", 0.02), ("delta_stop", 1.5), ("delta_step", 0.02)]),
        FigureId::PixelBounds => fixed(&[("mu", FIGURE_MU), ("n0", FIGURE_N0), ("m_start", 1e4), ("m_stop", 1e8)]),
        FigureId::ReceiverBounds => fixed(&[("mu", FIGURE_MU), ("n0", FIGURE_N0), ("m_start", 1e3), ("m_stop", 1e6)]),
        FigureId::PhotonNumber => fixed(&[("mu", FIGURE_MU), ("n0_start", 1e-6), ("n0_stop", 1e-1)]),
        FigureId::Normalized => fixed(&[("mu_start", 0.01), ("mu_stop", 5.0)]),
    }
}

fn pixel_width_rows() -> Result<Vec<Row>> {
    let c_mu = value(continuum_exponent(FIGURE_MU)?);
    pixel_width_grid()
        .par_iter()
        .map(|&delta| {
            Ok(Row::new()
                .real("delta", delta)
                .real("mu", FIGURE_MU)
                .real("c_mu_delta", value(pixelated_exponent(FIGURE_MU, delta)?))
                .real("c_mu", c_mu))
        })
        .collect()
}

fn pixel_bound_rows() -> Result<Vec<Row>> {
    let exponents: Vec<f64> = BOUND_DELTAS
        .par_iter()
        .map(|&delta| {
            Ok(value(if delta == 0.0 {
                continuum_exponent(FIGURE_MU)?
            } else {
                pixelated_exponent(FIGURE_MU, delta)?
            }))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (&delta, &c) in BOUND_DELTAS.iter().zip(&exponents) {
        for m in pixel_bound_modes() {
            rows.push(
                Row::new()
                    .real("delta", delta)
                    .int("m", m.round() as u64)
                    .real("mu", FIGURE_MU)
                    .real("n0", FIGURE_N0)
                    .real("c_mu_delta", c)
                    .real("bound", bound_at_scale(c, m.round() * FIGURE_N0)),
            );
        }
    }
    Ok(rows)
}

fn receiver_bound_rows() -> Result<Vec<Row>> {
    let c_mu = value(continuum_exponent(FIGURE_MU)?);
    let xi_r = value(receiver_exponent(FIGURE_MU, FIGURE_N0)?);
    let xi_q = quantum_exponent(FIGURE_MU, FIGURE_N0)?.exponent;
    Ok(receiver_bound_modes()
        .into_iter()
        .map(|m| {
            let m = m.round();
            Row::new()
                .int("m", m as u64)
                .real("mu", FIGURE_MU)
                .real("n0", FIGURE_N0)
                .real("bound_fpa", bound_at_scale(c_mu, m * FIGURE_N0))
                .real("bound_mode_sorted", bound_at_scale(xi_r, m))
                .real("bound_qcb", bound_at_scale(xi_q, m))
        })
        .collect())
}

fn photon_number_rows() -> Result<Vec<Row>> {
    let z_mu = normalized_quantum_exponent(FIGURE_MU)?;
    let r_mu = normalized_receiver_exponent(FIGURE_MU)?;
    photon_number_grid()
        .par_iter()
        .map(|&n0| {
            let xi_q = quantum_exponent(FIGURE_MU, n0)?.exponent;
            let xi_r = value(receiver_exponent(FIGURE_MU, n0)?);
            Ok(Row::new()
                .real("n0", n0)
                .real("mu", FIGURE_MU)
                .real("xi_q", xi_q)
                .real("xi_r", xi_r)
                .real("xi_q_over_n0", xi_q / n0)
                .real("xi_r_over_n0", xi_r / n0)
                .real("z_mu", z_mu)
                .real("r_mu", r_mu))
        })
        .collect()
}

fn normalized_rows() -> Result<Vec<Row>> {
    separation_grid()
        .par_iter()
        .map(|&mu| {
            let e = SeparationExponents::compute(mu)?;
            Ok(Row::new()
                .real("mu", mu)
                .real("c_mu", e.c_mu)
                .real("z_mu", e.z_mu)
                .real("r_mu", e.r_mu))
        })
        .collect()
}
