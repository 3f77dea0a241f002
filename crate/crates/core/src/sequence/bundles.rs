//! Janet tabulars and the three rows of bundle dimensions attached to an
//! involutive system: Spencer, hybrid (the same construction on `J_q(E)`) and Janet.

use serde::Serialize;

use crate::deltacohomology::{ambient_delta, cartan_test, delta_matrix, CartanVerdict, SymbolTower};
use crate::error::{Error, Result};
use crate::exactalg::{rank_exact, Matrix, Rational, RationalMatrix};
use crate::jetspace::{binomial, dim_jet, JetFrame};
use crate::system::LinearJetSystem;

/// Rows of the tabular sharing an order and a class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TabularGroup {
    pub order: usize,
    /// Class of the leading derivative; `None` for rows below the top order.
    pub class: Option<usize>,
    pub rows: usize,
    /// Non-multiplicative variables per row.
    pub dots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JanetTabular {
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub groups: Vec<TabularGroup>,
    /// `F₀, …, F_n` with `F_r = Σ_rows C(dots, r)`.
    pub bundles: Vec<usize>,
    /// Integer change of variables that made the coordinates δ-regular, if one was needed.
    pub coordinate_change: Option<Vec<Vec<i64>>>,
}

fn binom(n: usize, k: usize) -> Result<usize> {
    binomial(n, k).ok_or(Error::Overflow("binomial coefficient"))
}

/// Tabular of an involutive system in δ-regular coordinates. Top-order rows of
/// class `i` have `1..=i` multiplicative; lower-order rows have none.
pub fn janet_tabular(sys: &LinearJetSystem, bound: usize, seed: u64, retries: usize) -> Result<JanetTabular> {
    let report = cartan_test(sys, bound, seed, retries)?;
    if report.verdict != CartanVerdict::Involutive {
        return Err(Error::NotInvolutive(format!("Cartan verdict {:?}", report.verdict)));
    }
    let work = match &report.coordinate_change {
        Some(a) => sys.change_coordinates(&RationalMatrix::from_i64_rows(a))?,
        None => sys.clone(),
    };
    let mut t = tabular_in_given_coordinates(&work)?;
    t.coordinate_change = report.coordinate_change;
    Ok(t)
}

/// Tabular read off the reduced equations without any regularity check.
pub fn tabular_in_given_coordinates(sys: &LinearJetSystem) -> Result<JanetTabular> {
    let (n, q) = (sys.n(), sys.order());
    let mut groups: Vec<TabularGroup> = Vec::new();
    for jet in sys.leading_jets() {
        let order = jet.order();
        let (class, dots) = if order == q {
            match jet.index.class() {
                Some(c) => (Some(c), n - c),
                None => (None, 0),
            }
        } else {
            (None, n)
        };
        match groups.iter_mut().find(|g| g.order == order && g.class == class) {
            Some(g) => g.rows += 1,
            None => groups.push(TabularGroup { order, class, rows: 1, dots }),
        }
    }
    groups.sort_by(|a, b| b.order.cmp(&a.order).then(b.class.cmp(&a.class)));
    let mut bundles = vec![0usize; n + 1];
    for g in &groups {
        for (r, b) in bundles.iter_mut().enumerate() {
            *b += g.rows * binom(g.dots, r)?;
        }
    }
    Ok(JanetTabular { n, m: sys.m(), order: q, groups, bundles, coordinate_change: None })
}

/// `C_r = C(n,r)·dim R_q − rank δ(∧^{r−1}T*⊗g_{q+1})` for `r = 0..=n`.
pub fn spencer_bundles(sys: &LinearJetSystem) -> Result<Vec<usize>> {
    let (n, q) = (sys.n(), sys.order());
    let tower = SymbolTower::new(sys, q + 1)?;
    let g = tower.get(q + 1);
    let rq = sys.solution_dim();
    (0..=n)
        .map(|r| {
            let rank = if r == 0 || g.dim() == 0 { 0 } else { rank_exact(&delta_matrix(g, r - 1)?) };
            Ok(binom(n, r)? * rq - rank)
        })
        .collect()
}

/// `C_r(E) = C(n,r)·dim J_q(E) − rank δ(∧^{r−1}T*⊗S_{q+1}T*⊗E)` for `r = 0..=n`.
pub fn hybrid_bundles(n: usize, m: usize, q: usize) -> Result<Vec<usize>> {
    let jq = dim_jet(n, m, q)?;
    (0..=n)
        .map(|r| {
            let rank = if r == 0 { 0 } else { rank_exact(&ambient_delta(n, m, q + 1, r - 1)?) };
            Ok(binom(n, r)? * jq - rank)
        })
        .collect()
}

/// Dimensions in `0 → J_{q+1}(E) → J₁(J_q(E)) → C₁(E) → 0`, with the cokernel
/// computed from the rank of the explicit inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FirstSlot {
    pub jet_dim: usize,
    pub first_jets_dim: usize,
    pub inclusion_rank: usize,
    pub cokernel_dim: usize,
}

pub fn hybrid_first_slot(n: usize, m: usize, q: usize) -> Result<FirstSlot> {
    let big = JetFrame::new(n, m, q + 1)?;
    let small = JetFrame::new(n, m, q)?;
    let len = small.len();
    // Rows: block 0 is J_q itself, block i holds the formal i-th derivatives.
    let mut mat: RationalMatrix = Matrix::try_filled((n + 1) * len, big.len(), Rational::from_integer(0.into()))?;
    let one = Rational::from_integer(1.into());
    for p in 0..big.len() {
        let j = big.jet(p);
        if let Some(row) = small.position(j.unknown, &j.index) {
            mat.set(row, p, one.clone());
        }
        for i in 1..=n {
            if let Some(mu) = j.index.sub(i) {
                if let Some(row) = small.position(j.unknown, &mu) {
                    mat.set(i * len + row, p, one.clone());
                }
            }
        }
    }
    let rank = rank_exact(&mat);
    Ok(FirstSlot {
        jet_dim: big.len(),
        first_jets_dim: (n + 1) * len,
        inclusion_rank: rank,
        cokernel_dim: (n + 1) * len - rank,
    })
}

/// The three rows of the fundamental diagram of an involutive system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramReport {
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub solution_dim: usize,
    /// `C₀, …, C_n`
    pub spencer: Vec<usize>,
    /// `C₀(E), …, C_n(E)`
    pub hybrid: Vec<usize>,
    /// `F₀, …, F_n` as `C_r(E) − C_r`, confirmed by the tabular.
    pub janet: Vec<usize>,
    pub tabular: JanetTabular,
    pub first_slot: FirstSlot,
}

impl DiagramReport {
    /// The Janet row prefixed by `dim E`, as it reads when `E` heads the sequence.
    pub fn janet_with_source(&self) -> Vec<usize> {
        std::iter::once(self.m).chain(self.janet.iter().copied()).collect()
    }
}

/// Computes the three rows, checks `F_r = C_r(E) − C_r` against the counts of
/// non-multiplicative variables, and checks the first hybrid slot by rank.
pub fn fundamental_diagram(sys: &LinearJetSystem, bound: usize, seed: u64, retries: usize) -> Result<DiagramReport> {
    let fi = sys.is_formally_integrable(bound)?;
    if !fi.integrable {
        return Err(Error::NotFormallyIntegrable { order: fi.first_failure.unwrap_or(sys.order()) });
    }
    let tabular = janet_tabular(sys, bound, seed, retries)?;
    let (n, m, q) = (sys.n(), sys.m(), sys.order());
    let spencer = spencer_bundles(sys)?;
    let hybrid = hybrid_bundles(n, m, q)?;
    let mut janet = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let f = hybrid[r]
            .checked_sub(spencer[r])
            .ok_or_else(|| Error::Inconsistent(format!("Spencer bundle {r} exceeds the hybrid one")))?;
        janet.push(f);
    }
    if janet != tabular.bundles {
        return Err(Error::Inconsistent(format!(
            "Janet bundles {:?} disagree with the tabular count {:?}",
            janet, tabular.bundles
        )));
    }
    let first_slot = hybrid_first_slot(n, m, q)?;
    if n >= 1 && first_slot.cokernel_dim != hybrid[1] {
        return Err(Error::Inconsistent("first hybrid slot does not match C₁(E)".into()));
    }
    Ok(DiagramReport { n, m, order: q, solution_dim: sys.solution_dim(), spencer, hybrid, janet, tabular, first_slot })
}

