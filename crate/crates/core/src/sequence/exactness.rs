//! Exactness of a chain of operators, checked on jets of a fixed order and on symbols.

use num_traits::Zero;
use serde::Serialize;

use super::operator::{prolonged_matrix, OperatorHandle};
use crate::error::{Error, Result};
use crate::exactalg::{rank, QField, RankMode, RationalMatrix};
use crate::jetspace::JetFrame;

/// Dimensions and ranks of `0 → R → J_{N₀}(E) → J_{N₁}(F₀) → … → J_r(F_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    /// Jet (or symbol) orders `N₀ > N₁ > … > N_{k+1} = r`.
    pub levels: Vec<usize>,
    /// Dimension of each space in the chain.
    pub dims: Vec<usize>,
    /// Ranks of the successive maps.
    pub ranks: Vec<usize>,
    /// Kernel of the first map.
    pub kernel_dim: usize,
    /// Homology at each space after the first; the last entry is the cokernel.
    pub defects: Vec<usize>,
    /// `dim ker − dims[0] + dims[1] − …`
    pub alternating_sum: i64,
    /// Consecutive compositions vanish.
    pub is_complex: bool,
    pub exact: bool,
}

/// Exactness of the prolonged chain ending at jets of order `r` of the last bundle.
pub fn check_jet_exactness(chain: &[OperatorHandle], r: usize, mode: RankMode) -> Result<ExactnessReport> {
    check(chain, r, mode, false)
}

/// The same test on principal symbols: `0 → g → S_{N₀}(E) → S_{N₁}(F₀) → … → S_r(F_k)`.
pub fn check_symbol_exactness(chain: &[OperatorHandle], r: usize, mode: RankMode) -> Result<ExactnessReport> {
    let principal: Vec<OperatorHandle> = chain.iter().map(OperatorHandle::principal_part).collect();
    check(&principal, r, mode, true)
}

fn check(chain: &[OperatorHandle], r: usize, mode: RankMode, symbol: bool) -> Result<ExactnessReport> {
    if chain.is_empty() {
        return Err(Error::InvalidArgument("empty operator chain".into()));
    }
    for w in chain.windows(2) {
        if w[0].target_dim() != w[1].source_dim() || w[0].n() != w[1].n() {
            return Err(Error::Shape { expected: "composable operators".into(), got: "mismatched bundles".into() });
        }
    }
    let k = chain.len();
    let mut levels = vec![r; k + 1];
    for i in (0..k).rev() {
        levels[i] = levels[i + 1] + chain[i].order();
    }
    let mut mats: Vec<RationalMatrix> = Vec::with_capacity(k);
    for (i, op) in chain.iter().enumerate() {
        let full = prolonged_matrix(&QField, op, levels[i + 1])?;
        mats.push(if symbol {
            let src = JetFrame::new(op.n(), op.source_dim(), levels[i])?;
            let tgt = op.target_frame(levels[i + 1])?;
            let rows: Vec<usize> = tgt.degree_range(levels[i + 1]).collect();
            let cols: Vec<usize> = src.degree_range(levels[i]).collect();
            full.select_rows(&rows).select_columns(&cols)
        } else {
            full
        });
    }
    let mut is_complex = true;
    for w in mats.windows(2) {
        if !w[1].mul(&w[0])?.is_zero() {
            is_complex = false;
        }
    }
    let mut dims = vec![mats[0].cols()];
    dims.extend(mats.iter().map(|m| m.rows()));
    let ranks: Vec<usize> = mats.iter().map(|m| rank(m, mode)).collect::<Result<_>>()?;
    let kernel_dim = dims[0] - ranks[0];
    let mut defects = Vec::with_capacity(k);
    for i in 1..=k {
        let out = if i < k { ranks[i] } else { 0 };
        let kernel = dims[i] - out;
        defects.push(kernel.saturating_sub(ranks[i - 1]));
    }
    let mut alternating_sum = kernel_dim as i64;
    for (i, &d) in dims.iter().enumerate() {
        alternating_sum += if i % 2 == 0 { -(d as i64) } else { d as i64 };
    }
    let exact = is_complex && defects.iter().all(Zero::is_zero);
    Ok(ExactnessReport { levels, dims, ranks, kernel_dim, defects, alternating_sum, is_complex, exact })
}
