//! Truncated number-basis evaluation of `Tr ρ₀ˢ ρ₁^{1−s}` for passive
//! mixtures of thermal modes, independent of the symplectic formula.
//!
//! A passive transformation conserves total photon number, so each state is
//! block diagonal with one block per total `t`. Within a block the state is
//! `U_t diag(w) U_tᵀ`, where `w` are the product-thermal weights of the
//! diagonal-mode number states and `U_t` maps them through the mixing.

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianHypothesis;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Largest tolerated neglected probability mass.
pub const MAX_TRACE_DEFICIT: f64 = 1e-8;

/// Default ceiling on the bytes held by the block matrices of one pair.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// Occupation vectors of `modes` modes with total `t`, in lexicographic order.
fn compositions(modes: usize, t: u32) -> Vec<Vec<u32>> {
    fn rec(modes: usize, t: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if modes == 1 {
            prefix.push(t);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=t).rev() {
            prefix.push(first);
            rec(modes - 1, t - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, t, &mut Vec::with_capacity(modes), &mut out);
    out
}

fn block_dim(modes: usize, t: u32) -> usize {
    crate::special::choose(t as u64 + modes as u64 - 1, modes as u64 - 1).round() as usize
}

/// Eigendecomposition of one photon-number block of a state.
#[derive(Debug, Clone)]
struct Block {
    weights: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Number-basis blocks of one state up to a total photon cutoff.
#[derive(Debug, Clone)]
pub struct FockState {
    blocks: Vec<Block>,
    deficit: f64,
}

impl FockState {
    pub fn new(h: &GaussianHypothesis, cutoff: u32) -> Result<Self> {
        let modes = h.n();
        let occ = h.occupations();
        let mix = h.mix();
        let sqrt_fact: Vec<f64> = (0..=cutoff)
            .scan(1.0f64, |acc, k| {
                if k > 0 {
                    *acc *= k as f64;
                }
                Some(acc.sqrt())
            })
            .collect();
        let vacuum_weight: f64 = occ.iter().map(|n| 1.0 / (1.0 + n)).product();
        let ratio: Vec<f64> = occ.iter().map(|n| n / (1.0 + n)).collect();
        let mut blocks = Vec::with_capacity(cutoff as usize + 1);
        let mut kept = 0.0;
        for t in 0..=cutoff {
            let basis = compositions(modes, t);
            let index: HashMap<&[u32], usize> =
                basis.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
            let dim = basis.len();
            let mut vectors = DMatrix::zeros(dim, dim);
            let mut weights = Vec::with_capacity(dim);
            for (col, m) in basis.iter().enumerate() {
                let w = vacuum_weight
                    * m.iter()
                        .zip(&ratio)
                        .map(|(&k, &r)| if k == 0 { 1.0 } else { r.powi(k as i32) })
                        .product::<f64>();
                weights.push(w);
                kept += w;
                // expand ∏ₖ (Σᵢ mix[i,k] xᵢ)^{mₖ} as a polynomial in x
                let mut poly: HashMap<Vec<u32>, f64> = HashMap::from([(vec![0; modes], 1.0)]);
                for (k, &mk) in m.iter().enumerate() {
                    for _ in 0..mk {
                        let mut next: HashMap<Vec<u32>, f64> = HashMap::with_capacity(poly.len() * modes);
                        for (mono, c) in &poly {
                            for i in 0..modes {
                                let coef = mix[(i, k)];
                                if coef == 0.0 {
                                    continue;
                                }
                                let mut grown = mono.clone();
                                grown[i] += 1;
                                *next.entry(grown).or_insert(0.0) += c * coef;
                            }
                        }
                        poly = next;
                    }
                }
                let norm_in: f64 = m.iter().map(|&k| sqrt_fact[k as usize]).product();
                for (mono, c) in poly {
                    let norm_out: f64 = mono.iter().map(|&k| sqrt_fact[k as usize]).product();
                    vectors[(index[mono.as_slice()], col)] = c * norm_out / norm_in;
                }
            }
            blocks.push(Block { weights, vectors });
        }
        Ok(Self {
            blocks,
            deficit: (1.0 - kept).max(0.0),
        })
    }

    /// Probability mass beyond the cutoff.
    pub fn trace_deficit(&self) -> f64 {
        self.deficit
    }

    /// Largest deviation of any block transform from orthogonality.
    pub fn orthogonality_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.vectors.ncols();
                (b.vectors.transpose() * &b.vectors - DMatrix::identity(n, n)).amax()
            })
            .fold(0.0, f64::max)
    }

    /// Density matrix of photon-number block `t` in the output number basis.
    pub fn block_matrix(&self, t: usize) -> DMatrix<f64> {
        let b = &self.blocks[t];
        let mut scaled = b.vectors.clone();
        for (j, w) in b.weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*w);
        }
        scaled * b.vectors.transpose()
    }
}

/// A pair of truncated states with the block overlaps `(U₀ᵀU₁)²` cached, so
/// that `Q(s)` costs one pass over the block spectra per `s`.
#[derive(Debug, Clone)]
pub struct FockPair {
    weights0: Vec<Vec<f64>>,
    weights1: Vec<Vec<f64>>,
    overlaps: Vec<DMatrix<f64>>,
}

impl FockPair {
    pub fn new(h0: &GaussianHypothesis, h1: &GaussianHypothesis, cutoff: u32) -> Result<Self> {
        Self::with_budget(h0, h1, cutoff, DEFAULT_MEMORY_BUDGET)
    }

    pub fn with_budget(
        h0: &GaussianHypothesis,
        h1: &GaussianHypothesis,
        cutoff: u32,
        budget: usize,
    ) -> Result<Self> {
        if h0.n() != h1.n() {
            return Err(invalid("modes", h1.n() as f64, "hypotheses must have the same mode count"));
        }
        // two transforms plus one overlap matrix per block
        let requested: usize = (0..=cutoff)
            .map(|t| 3 * block_dim(h0.n(), t).pow(2) * std::mem::size_of::<f64>())
            .sum();
        if requested > budget {
            return Err(Error::MemoryBudget { requested, budget });
        }
        let s0 = FockState::new(h0, cutoff)?;
        let s1 = FockState::new(h1, cutoff)?;
        for deficit in [s0.deficit, s1.deficit] {
            if deficit > MAX_TRACE_DEFICIT {
                return Err(Error::CutoffTooSmall {
                    deficit,
                    limit: MAX_TRACE_DEFICIT,
                });
            }
        }
        let overlaps = s0
            .blocks
            .iter()
            .zip(&s1.blocks)
            .map(|(a, b)| (a.vectors.transpose() * &b.vectors).map(|x| x * x))
            .collect();
        Ok(Self {
            weights0: s0.blocks.into_iter().map(|b| b.weights).collect(),
            weights1: s1.blocks.into_iter().map(|b| b.weights).collect(),
            overlaps,
        })
    }

    /// `Σ_t Σ_{ij} w₀ᵢˢ w₁ⱼ^{1−s} (U₀ᵀU₁)ᵢⱼ²`.
    pub fn q(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", s, "must lie in the open interval (0, 1)"));
        }
        let mut total = 0.0;
        for ((w0, w1), overlap) in self.weights0.iter().zip(&self.weights1).zip(&self.overlaps) {
            let a: Vec<f64> = w0.iter().map(|w| w.powf(s)).collect();
            let b: Vec<f64> = w1.iter().map(|w| w.powf(1.0 - s)).collect();
            for (j, bj) in b.iter().enumerate() {
                if *bj == 0.0 {
                    continue;
                }
                let col: f64 = overlap.column(j).iter().zip(&a).map(|(o, ai)| o * ai).sum();
                total += col * bj;
            }
        }
        Ok(total)
    }
}

/// `Tr ρ₀ˢ ρ₁^{1−s}` with both states truncated at total photon number `cutoff`.
pub fn fock_oracle_q(
    h0: &GaussianHypothesis,
    h1: &GaussianHypothesis,
    s: f64,
    cutoff: u32,
) -> Result<f64> {
    FockPair::new(h0, h1, cutoff)?.q(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{hypothesis_h0, hypothesis_h1, q_of_s};
    use crate::optics::mode_geometry;
    use approx::assert_abs_diff_eq;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 25).len(), 351);
        assert_eq!(block_dim(3, 25), 351);
        assert_eq!(compositions(2, 4).len(), 5);
    }

    #[test]
    fn thermal_against_vacuum() {
        let h0 = GaussianHypothesis::product(vec![0.01]).unwrap();
        let h1 = GaussianHypothesis::product(vec![0.0]).unwrap();
        let q = fock_oracle_q(&h0, &h1, 0.5, 25).unwrap();
        assert_abs_diff_eq!(q, 1.01f64.powf(-0.5), epsilon = 1e-10);
    }

    #[test]
    fn identical_states() {
        let geom = mode_geometry(0.5, 0.01).unwrap();
        let h = hypothesis_h1(&geom).unwrap();
        assert_abs_diff_eq!(fock_oracle_q(&h, &h, 0.4, 20).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn block_transforms_are_orthogonal() {
        let geom = mode_geometry(0.3, 0.05).unwrap();
        let state = FockState::new(&hypothesis_h1(&geom).unwrap(), 12).unwrap();
        assert!(state.orthogonality_defect() < 1e-12);
    }

    #[test]
    fn block_matrix_is_a_density_block() {
        let geom = mode_geometry(0.3, 0.05).unwrap();
        let state = FockState::new(&hypothesis_h1(&geom).unwrap(), 6).unwrap();
        let rho = state.block_matrix(2);
        assert!((rho.clone() - rho.transpose()).amax() < 1e-15);
        let eig = nalgebra::SymmetricEigen::new(rho);
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-15));
    }

    #[test]
    fn agrees_with_symplectic_formula() {
        let geom = mode_geometry(0.5, 0.01).unwrap();
        let (h0, h1) = (hypothesis_h0(&geom), hypothesis_h1(&geom).unwrap());
        let pair = FockPair::new(&h0, &h1, 12).unwrap();
        for &s in &[0.3, 0.5, 0.7] {
            assert_abs_diff_eq!(pair.q(s).unwrap(), q_of_s(&h0, &h1, s).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn small_cutoff_detected() {
        let h0 = GaussianHypothesis::product(vec![0.5, 0.0]).unwrap();
        let h1 = GaussianHypothesis::product(vec![0.0, 0.5]).unwrap();
        assert!(matches!(
            fock_oracle_q(&h0, &h1, 0.5, 5),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn memory_budget_enforced() {
        let h = GaussianHypothesis::product(vec![0.01, 0.0, 0.0]).unwrap();
        assert!(matches!(
            FockPair::with_budget(&h, &h, 25, 1 << 20),
            Err(Error::MemoryBudget { .. })
        ));
    }
}
