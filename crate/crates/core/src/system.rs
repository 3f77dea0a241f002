//! Linear constant-coefficient systems `R_q ⊂ J_q(E)`.
//!
//! A system is stored as the reduced row echelon form of its equation matrix,
//! with columns in frame order. Because frame order lists higher jets first,
//! pivots are leading jets, non-pivot columns are parametric jets, and the rows
//! whose pivot has degree `≤ t` are exactly the equations induced on `J_t(E)`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::deltacohomology;
use crate::error::{Error, Result};
use crate::exactalg::{kernel_basis, rank_exact, rref_natural, Rational, RationalMatrix};
use crate::jetspace::{Jet, JetFrame, MultiIndex, SymbolFrame};

/// A linear combination `Σ c·y^k_μ`.
pub type LinearForm = Vec<(Rational, Jet)>;

/// Homogeneous linear system with constant coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearJetSystem {
    frame: JetFrame,
    equations: RationalMatrix,
    pivots: Vec<usize>,
    label: String,
}

/// The symbol `g_d = R_d ∩ S_dT*⊗E` as an explicit subspace.
#[derive(Clone, Debug)]
pub struct SymbolSpace {
    pub frame: SymbolFrame,
    /// Top-degree parts of the equations, in reduced echelon form.
    pub annihilator: RationalMatrix,
    /// Columns span `g_d`.
    pub basis: RationalMatrix,
}

impl SymbolSpace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.len()
    }
}

/// Outcome of the bounded formal-integrability test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiVerdict {
    pub integrable: bool,
    /// Order `q+r` of the first system whose projection from `R_{q+r+1}` is not onto.
    pub first_failure: Option<usize>,
    /// Number of prolongations checked.
    pub bound: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Prolong,
    Project,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionStep {
    pub kind: StepKind,
    pub order: usize,
    pub solution_dim: usize,
    pub symbol_dim: usize,
}

#[derive(Clone, Debug)]
pub struct CompletionTrace {
    pub steps: Vec<CompletionStep>,
    pub final_system: LinearJetSystem,
    pub completed: bool,
    /// Number of prolongations and projections applied.
    pub prolongations: usize,
    pub projections: usize,
}

impl LinearJetSystem {
    /// Builds a system from linear forms; rows are reduced and zero rows dropped.
    pub fn new(frame: JetFrame, equations: &[LinearForm], label: impl Into<String>) -> Result<Self> {
        let mut rows = Vec::with_capacity(equations.len());
        for form in equations {
            let mut row = vec![Rational::zero(); frame.len()];
            for (c, jet) in form {
                let p = frame.position_of(jet)?;
                row[p] += c;
            }
            rows.push(row);
        }
        let m = RationalMatrix::from_rows(frame.len(), rows)?;
        Self::from_matrix(frame, &m, label)
    }

    /// Builds a system from an equation matrix over the frame's columns.
    pub fn from_matrix(frame: JetFrame, equations: &RationalMatrix, label: impl Into<String>) -> Result<Self> {
        if equations.cols() != frame.len() {
            return Err(Error::Shape {
                expected: format!("{} columns", frame.len()),
                got: format!("{} columns", equations.cols()),
            });
        }
        let (equations, pivots) = rref_natural(equations);
        Ok(LinearJetSystem {
            frame,
            equations,
            pivots,
            label: label.into(),
        })
    }

    /// No equations: the whole of `J_q(E)`.
    pub fn full(frame: JetFrame, label: impl Into<String>) -> Self {
        let cols = frame.len();
        LinearJetSystem {
            frame,
            equations: RationalMatrix::zeros(0, cols),
            pivots: Vec::new(),
            label: label.into(),
        }
    }

    pub fn frame(&self) -> &JetFrame {
        &self.frame
    }

    pub fn order(&self) -> usize {
        self.frame.q()
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    pub fn m(&self) -> usize {
        self.frame.m()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn equations(&self) -> &RationalMatrix {
        &self.equations
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solution_dim(&self) -> usize {
        self.frame.len() - self.rank()
    }

    /// Equations as linear forms, one per reduced row.
    pub fn forms(&self) -> Vec<LinearForm> {
        (0..self.equations.rows())
            .map(|i| {
                self.equations
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(p, c)| (c.clone(), self.frame.jet(p)))
                    .collect()
            })
            .collect()
    }

    /// Non-pivot coordinates, listed in frame order.
    pub fn parametric_jets(&self) -> Vec<Jet> {
        let mut is_pivot = vec![false; self.frame.len()];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.frame.len()).filter(|&p| !is_pivot[p]).map(|p| self.frame.jet(p)).collect()
    }

    /// Leading jets of the reduced rows.
    pub fn leading_jets(&self) -> Vec<Jet> {
        self.pivots.iter().map(|&p| self.frame.jet(p)).collect()
    }

    /// Number of reduced rows whose leading jet has degree `d`.
    pub fn rows_of_degree(&self, d: usize) -> usize {
        self.pivots.iter().filter(|&&p| self.frame.degree_of(p) == d).count()
    }

    /// `ρ_r(R_q)`: adjoins every formal derivative of order `≤ r`.
    pub fn prolong(&self, r: usize) -> Result<Self> {
        let mut cur = self.clone();
        for _ in 0..r {
            cur = cur.prolong_once()?;
        }
        Ok(cur)
    }

    /// `R_q, ρ_1(R_q), …, ρ_r(R_q)`.
    pub fn prolongations(&self, r: usize) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(r + 1);
        out.push(self.clone());
        for _ in 0..r {
            let next = out.last().expect("nonempty").prolong_once()?;
            out.push(next);
        }
        Ok(out)
    }

    fn prolong_once(&self) -> Result<Self> {
        let target = self.frame.with_order(self.order() + 1)?;
        let rows = derivative_rows(&self.frame, &target, &self.equations, true);
        let m = RationalMatrix::from_rows(target.len(), rows)?;
        Self::from_matrix(target, &m, self.label.clone())
    }

    /// Equations induced on `J_target(E)` by elimination of higher jets.
    pub fn project(&self, target: usize) -> Result<Self> {
        if target > self.order() {
            return Err(Error::InvalidArgument(format!(
                "projection target {target} exceeds system order {}",
                self.order()
            )));
        }
        let frame = self.frame.with_order(target)?;
        let range = self.frame.up_to_degree(target);
        let keep: Vec<usize> = (0..self.pivots.len()).filter(|&i| self.pivots[i] >= range.start).collect();
        let cols: Vec<usize> = range.clone().collect();
        let eq = self.equations.select_rows(&keep).select_columns(&cols);
        let pivots = keep.iter().map(|&i| self.pivots[i] - range.start).collect();
        Ok(LinearJetSystem {
            frame,
            equations: eq,
            pivots,
            label: self.label.clone(),
        })
    }

    /// Symbol at level `d ≥ q`, prolonging as needed.
    pub fn symbol_at(&self, level: usize) -> Result<SymbolSpace> {
        if level < self.order() {
            return Err(Error::InvalidArgument(format!(
                "symbol level {level} is below the system order {}",
                self.order()
            )));
        }
        self.prolong(level - self.order())?.top_symbol()
    }

    /// Symbol at the system's own order.
    pub fn top_symbol(&self) -> Result<SymbolSpace> {
        let q = self.order();
        let sframe = SymbolFrame::new(self.n(), self.m(), q)?;
        let range = self.frame.degree_range(q);
        let top_rows: Vec<usize> = (0..self.pivots.len()).filter(|&i| self.pivots[i] < range.end).collect();
        let cols: Vec<usize> = range.collect();
        let annihilator = self.equations.select_rows(&top_rows).select_columns(&cols);
        let basis = kernel_basis(&annihilator);
        Ok(SymbolSpace {
            frame: sframe,
            annihilator,
            basis,
        })
    }

    /// `dim g_q` without building a basis.
    pub fn top_symbol_dim(&self) -> usize {
        let top = self.frame.degree_range(self.order());
        top.len() - self.pivots.iter().filter(|&&p| p < top.end).count()
    }

    /// Checks `dim π(R_{q+r+1}) = dim R_{q+r}` for `r < bound`.
    pub fn is_formally_integrable(&self, bound: usize) -> Result<FiVerdict> {
        if bound == 0 {
            return Err(Error::InvalidArgument("formal integrability bound must be at least 1".into()));
        }
        let chain = self.prolongations(bound)?;
        for r in 0..bound {
            let upper = &chain[r + 1];
            let projected = upper.solution_dim() - upper.top_symbol_dim();
            if projected != chain[r].solution_dim() {
                return Ok(FiVerdict {
                    integrable: false,
                    first_failure: Some(chain[r].order()),
                    bound,
                });
            }
        }
        Ok(FiVerdict {
            integrable: true,
            first_failure: None,
            bound,
        })
    }

    /// Prolongation-projection until the system is formally integrable with an
    /// involutive symbol, or `max_steps` operations have been applied.
    pub fn involutive_completion(&self, max_steps: usize, bound: usize) -> Result<CompletionTrace> {
        if max_steps == 0 {
            return Err(Error::InvalidArgument("completion needs at least one step".into()));
        }
        let mut cur = self.clone();
        let mut steps = Vec::new();
        let (mut prolongations, mut projections) = (0, 0);
        for _ in 0..max_steps {
            let up = cur.prolong_once()?;
            let back = up.project(cur.order())?;
            if back.rank() > cur.rank() {
                cur = back;
                projections += 1;
                steps.push(CompletionStep {
                    kind: StepKind::Project,
                    order: cur.order(),
                    solution_dim: cur.solution_dim(),
                    symbol_dim: cur.top_symbol_dim(),
                });
                continue;
            }
            let involutive = deltacohomology::is_involutive(&cur, bound)?.holds;
            if involutive && cur.is_formally_integrable(bound)?.integrable {
                return Ok(CompletionTrace {
                    steps,
                    final_system: cur,
                    completed: true,
                    prolongations,
                    projections,
                });
            }
            cur = up;
            prolongations += 1;
            steps.push(CompletionStep {
                kind: StepKind::Prolong,
                order: cur.order(),
                solution_dim: cur.solution_dim(),
                symbol_dim: cur.top_symbol_dim(),
            });
        }
        Ok(CompletionTrace {
            steps,
            final_system: cur,
            completed: false,
            prolongations,
            projections,
        })
    }

    /// Linear change of independent variables acting by `∂ᵢ ↦ Σⱼ Aᵢⱼ ∂ⱼ`.
    pub fn change_coordinates(&self, a: &RationalMatrix) -> Result<Self> {
        let n = self.n();
        if a.rows() != n || a.cols() != n {
            return Err(Error::Shape {
                expected: format!("{n}×{n}"),
                got: format!("{}×{}", a.rows(), a.cols()),
            });
        }
        if rank_exact(a) < n {
            return Err(Error::Singular);
        }
        let mut cache: HashMap<MultiIndex, Vec<(MultiIndex, Rational)>> = HashMap::new();
        let mut out = RationalMatrix::zeros(self.equations.rows(), self.frame.len());
        for i in 0..self.equations.rows() {
            for (p, c) in self.equations.row(i).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let jet = self.frame.jet(p);
                let image = cache.entry(jet.index.clone()).or_insert_with(|| substitute(&jet.index, a));
                for (nu, coeff) in image.iter() {
                    let q = self.frame.position(jet.unknown, nu).expect("degree preserved");
                    let v = out.get(i, q) + c * coeff;
                    out.set(i, q, v);
                }
            }
        }
        Self::from_matrix(self.frame.clone(), &out, self.label.clone())
    }
}

/// Expands `Πᵢ (Σⱼ Aᵢⱼ ∂ⱼ)^{μᵢ}` into monomials.
fn substitute(mu: &MultiIndex, a: &RationalMatrix) -> Vec<(MultiIndex, Rational)> {
    let n = mu.n();
    let mut poly: HashMap<MultiIndex, Rational> = HashMap::from([(MultiIndex::zero(n), Rational::one())]);
    for i in 1..=n {
        for _ in 0..mu.exponent(i) {
            let mut next: HashMap<MultiIndex, Rational> = HashMap::new();
            for (mono, c) in &poly {
                for j in 1..=n {
                    let aij = a.get(i - 1, j - 1);
                    if aij.is_zero() {
                        continue;
                    }
                    *next.entry(mono.add(j)).or_insert_with(Rational::zero) += c * aij;
                }
            }
            next.retain(|_, c| !c.is_zero());
            poly = next;
        }
    }
    poly.into_iter().collect()
}

/// Rows of `source` rewritten in `target` (an order at least one higher)
/// together with their first formal derivatives `dᵢ`, `i = 1..n`.
pub(crate) fn derivative_rows(
    source: &JetFrame,
    target: &JetFrame,
    rows: &RationalMatrix,
    keep_original: bool,
) -> Vec<Vec<Rational>> {
    let embed: Vec<usize> = (0..source.len())
        .map(|p| {
            let j = source.jet(p);
            target.position(j.unknown, &j.index).expect("target contains source")
        })
        .collect();
    let shifts: Vec<Vec<usize>> = (1..=source.n())
        .map(|i| {
            (0..source.len())
                .map(|p| {
                    let j = source.jet(p);
                    target.position(j.unknown, &j.index.add(i)).expect("target order is high enough")
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(rows.rows() * (source.n() + 1));
    for r in 0..rows.rows() {
        let row = rows.row(r);
        let maps = keep_original.then_some(&embed).into_iter().chain(shifts.iter());
        for map in maps {
            let mut v = vec![Rational::zero(); target.len()];
            for (p, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    v[map[p]] = c.clone();
                }
            }
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(n: usize, vars: &[usize]) -> Jet {
        Jet::new(0, MultiIndex::from_variables(n, vars).unwrap())
    }

    fn one(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn hidden() -> LinearJetSystem {
        let f = JetFrame::new(2, 1, 2).unwrap();
        LinearJetSystem::new(
            f,
            &[
                vec![(one(1), jet(2, &[2, 2]))],
                vec![(one(1), jet(2, &[1, 2])), (one(-1), jet(2, &[]))],
            ],
            "hidden",
        )
        .unwrap()
    }

    #[test]
    fn parametric_jets_small() {
        let s = hidden();
        assert_eq!(s.solution_dim(), 4);
        let p: Vec<Jet> = s.parametric_jets();
        assert_eq!(p, vec![jet(2, &[1, 1]), jet(2, &[2]), jet(2, &[1]), jet(2, &[])]);
    }

    #[test]
    fn prolong_zero_is_identity() {
        let s = hidden();
        assert_eq!(s.prolong(0).unwrap(), s);
        assert_eq!(s.project(2).unwrap(), s);
    }

    #[test]
    fn projection_reveals_hidden_equation() {
        let s = hidden();
        let p = s.prolong(1).unwrap().project(2).unwrap();
        assert!(p.rank() > s.rank());
        assert!(!s.is_formally_integrable(2).unwrap().integrable);
    }

    #[test]
    fn empty_system() {
        let s = LinearJetSystem::new(JetFrame::new(1, 1, 1).unwrap(), &[], "free").unwrap();
        assert_eq!(s.solution_dim(), 2);
        assert!(s.is_formally_integrable(3).unwrap().integrable);
    }

    #[test]
    fn out_of_frame_is_rejected() {
        let f = JetFrame::new(2, 1, 1).unwrap();
        let e = LinearJetSystem::new(f, &[vec![(one(1), jet(2, &[1, 1]))]], "bad");
        assert!(matches!(e, Err(Error::CoordinateOutOfFrame { .. })));
    }

    #[test]
    fn coordinate_change_keeps_dimensions() {
        let s = hidden();
        let a = RationalMatrix::from_i64_rows(&[vec![1, 2], vec![0, 1]]);
        let t = s.change_coordinates(&a).unwrap();
        for r in 0..3 {
            assert_eq!(s.prolong(r).unwrap().solution_dim(), t.prolong(r).unwrap().solution_dim());
        }
        assert_eq!(s.change_coordinates(&RationalMatrix::identity(2)).unwrap(), s);
        let sing = RationalMatrix::from_i64_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(s.change_coordinates(&sing), Err(Error::Singular));
    }
}
