//! Linear differential operators with constant coefficients, stored as rows over
//! a jet frame of the source bundle, and their prolonged matrices.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactalg::{Field, Matrix, QField, Rational, RationalMatrix};
use crate::jetspace::{JetFrame, MultiIndex};
use crate::system::LinearJetSystem;

/// A linear operator `E → F` of order `s`: row `τ` is the component `Φ^τ`,
/// written against the frame `J_s(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<E> {
    n: usize,
    source_dim: usize,
    order: usize,
    rows: Vec<Vec<E>>,
}

/// Operator with exact rational coefficients.
pub type OperatorHandle = Operator<Rational>;

impl<E: Clone> Operator<E> {
    /// Rows must have length `dim J_s(E)`.
    pub fn from_rows(n: usize, source_dim: usize, order: usize, rows: Vec<Vec<E>>) -> Result<Self> {
        let len = JetFrame::new(n, source_dim, order)?.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != len) {
            return Err(Error::Shape { expected: format!("{len} entries per row"), got: bad.len().to_string() });
        }
        Ok(Operator { n, source_dim, order, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `dim E`.
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// `dim F`, the number of components.
    pub fn target_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> &[Vec<E>] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [Vec<E>] {
        &mut self.rows
    }

    pub fn source_frame(&self) -> JetFrame {
        JetFrame::new(self.n, self.source_dim, self.order).expect("validated at construction")
    }

    /// Frame `J_r(F)` indexing the rows of the prolongation of order `r`.
    pub fn target_frame(&self, r: usize) -> Result<JetFrame> {
        JetFrame::new(self.n, self.target_dim(), r)
    }
}

impl OperatorHandle {
    /// The operator whose components are the reduced equations of `sys`.
    pub fn from_system(sys: &LinearJetSystem) -> Self {
        Operator {
            n: sys.n(),
            source_dim: sys.m(),
            order: sys.order(),
            rows: sys.equations().row_vecs(),
        }
    }

    pub fn from_matrix(n: usize, source_dim: usize, order: usize, m: &RationalMatrix) -> Result<Self> {
        Self::from_rows(n, source_dim, order, m.row_vecs())
    }

    pub fn to_matrix(&self) -> RationalMatrix {
        let cols = self.source_frame().len();
        Matrix::from_rows(cols, self.rows.clone()).expect("uniform width")
    }

    /// The system `Φ = 0` on `J_s(E)`.
    pub fn kernel_system(&self, label: &str) -> Result<LinearJetSystem> {
        LinearJetSystem::from_matrix(self.source_frame(), &self.to_matrix(), label)
    }

    /// Image in another field; `None` if a denominator vanishes there.
    pub fn reduce<F: Field>(&self, f: &F) -> Option<Operator<F::Elem>> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|q| f.from_rational(q)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(Operator { n: self.n, source_dim: self.source_dim, order: self.order, rows })
    }

    /// Principal part: the same operator with every term below order `s` dropped.
    pub fn principal_part(&self) -> Self {
        let frame = self.source_frame();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(p, c)| if frame.degree_of(p) == self.order { c.clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Operator { n: self.n, source_dim: self.source_dim, order: self.order, rows }
    }

    /// `self ∘ inner`, i.e. `Φ(Ψ(y))`.
    pub fn compose(&self, inner: &OperatorHandle) -> Result<OperatorHandle> {
        if inner.target_dim() != self.source_dim || inner.n != self.n {
            return Err(Error::Shape { expected: "composable operators".into(), got: "mismatched bundles".into() });
        }
        let rows = prolonged_matrix(&QField, inner, self.order)?;
        let out_frame = JetFrame::new(self.n, inner.source_dim, inner.order + self.order)?;
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut v = vec![Rational::zero(); out_frame.len()];
            for (p, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (j, e) in rows.row(p).iter().enumerate() {
                    if !e.is_zero() {
                        v[j] += c * e;
                    }
                }
            }
            out.push(v);
        }
        Operator::from_rows(self.n, inner.source_dim, inner.order + self.order, out)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(Zero::is_zero))
    }
}

/// For each `ν` with `|ν| ≤ r`, the map `J_s → J_{s+r}` sending `y^k_μ` to `y^k_{μ+ν}`.
fn shift_maps(src: &JetFrame, dst: &JetFrame, r: usize) -> HashMap<MultiIndex, Vec<usize>> {
    let mut out = HashMap::new();
    for d in 0..=r {
        for nu in MultiIndex::of_degree(src.n(), d) {
            let map = (0..src.len())
                .map(|p| {
                    let j = src.jet(p);
                    dst.position(j.unknown, &j.index.plus(&nu)).expect("target order is high enough")
                })
                .collect();
            out.insert(nu, map);
        }
    }
    out
}

/// Matrix of the prolongation `J_{s+r}(E) → J_r(F)`: row `(τ, ν)` (in the
/// frame order of `J_r(F)`) holds `d_ν Φ^τ` against `J_{s+r}(E)`.
pub fn prolonged_matrix<F: Field>(f: &F, op: &Operator<F::Elem>, r: usize) -> Result<Matrix<F::Elem>> {
    let src = op.source_frame();
    let dst = JetFrame::new(op.n, op.source_dim, op.order + r)?;
    let tgt = op.target_frame(r)?;
    let shifts = shift_maps(&src, &dst, r);
    let mut m = Matrix::try_filled(tgt.len(), dst.len(), f.zero())?;
    for pos in 0..tgt.len() {
        let j = tgt.jet(pos);
        let map = &shifts[&j.index];
        let row = m.row_mut(pos);
        for (p, c) in op.rows[j.unknown].iter().enumerate() {
            if !f.is_zero(c) {
                row[map[p]] = c.clone();
            }
        }
    }
    Ok(m)
}

/// Rows of `src` and all their first derivatives, written against `dst`.
pub(crate) fn prolong_rows<F: Field>(f: &F, src: &JetFrame, dst: &JetFrame, rows: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    let shifts = shift_maps(src, dst, 1);
    let mut keys: Vec<&MultiIndex> = shifts.keys().collect();
    keys.sort_by(|a, b| a.frame_cmp(b));
    let mut out = Vec::with_capacity(rows.len() * keys.len());
    for row in rows {
        for k in &keys {
            let map = &shifts[*k];
            let mut v = vec![f.zero(); dst.len()];
            for (p, c) in row.iter().enumerate() {
                if !f.is_zero(c) {
                    v[map[p]] = c.clone();
                }
            }
            out.push(v);
        }
    }
    out
}

/// `λ · M` for a row vector `λ`.
pub(crate) fn row_times<F: Field>(f: &F, lambda: &[F::Elem], m: &Matrix<F::Elem>) -> Vec<F::Elem> {
    let mut out = vec![f.zero(); m.cols()];
    for (i, c) in lambda.iter().enumerate() {
        if !f.is_zero(c) {
            let row = m.row(i);
            for (o, e) in out.iter_mut().zip(row) {
                if !f.is_zero(e) {
                    *o = f.add(o, &f.mul(c, e));
                }
            }
        }
    }
    out
}
