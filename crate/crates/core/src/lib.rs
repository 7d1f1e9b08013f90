//! Chernoff exponents for deciding between one and two closely spaced
//! incoherent point sources seen through a hard 1-D aperture.
//!
//! The crate covers three receivers: an ideal or pixelated focal-plane photon
//! counter, and a three-mode sorted-mode photon counter. It also evaluates
//! the quantum Chernoff bound of the underlying Gaussian states, both from
//! symplectic data and from a truncated Fock-space oracle, and simulates the
//! receivers by Monte Carlo.

pub mod chernoff;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod montecarlo;
pub mod optics;
pub mod optimize;
pub mod quadrature;
pub mod receiver;
pub mod special;

pub use chernoff::{
    bound_at, bound_at_scale, continuum_exponent, discrete_chernoff, optimize_unit_interval,
    pixelated_exponent, ChernoffResult, DiscretePmf, Exponent,
};
pub use error::{Error, Result};
pub use fock::fock_oracle_q;
pub use gaussian::{
    appendix_b_qcb, g_factor, hypothesis_h0, hypothesis_h1, lambda_factor,
    normalized_quantum_exponent, q_of_s, quantum_exponent, GaussianHypothesis, QcbResult,
};
pub use montecarlo::{
    estimate_error, ml_decide, receiver_bound, sample_continuum, sample_mode_records,
    sample_pixelated, ErrorEstimate, Estimator, Hypothesis, Receiver, TrialConfig,
};
pub use optics::{
    density_p0, density_p1, mode_geometry, pixel_masses, sinc, ModeGeometry, PixelGrid,
    SceneParams,
};
pub use receiver::{
    normalized_receiver_exponent, pmf_h0, pmf_h1, receiver_exponent,
    receiver_exponent_bruteforce, two_mode_counting_exponent, ClickRecord, CountingBasis,
};
