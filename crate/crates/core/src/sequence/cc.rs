//! Compatibility conditions and formal resolutions.
//!
//! The compatibility conditions of order `≤ r` of an operator `D` are the left
//! kernel of its prolonged matrix `J_{s+r}(E) → J_r(F₀)`. Conditions that are
//! not derivatives of earlier ones are the new generators at order `r`.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use super::operator::{prolong_rows, prolonged_matrix, row_times, Operator, OperatorHandle};
use crate::deltacohomology::is_s_acyclic;
use crate::error::{Error, Result};
use crate::exactalg::{prime_schedule, Field, Matrix, PrimeField, QField, RankMode, Rational, RationalMatrix};
use crate::jetspace::{dim_jet, JetFrame};
use crate::system::LinearJetSystem;

/// Rank data of one prolongation of an operator's kernel system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProlongationDims {
    /// Order `s + r` of the prolonged system.
    pub order: usize,
    /// `dim R_{s+r}`.
    pub solution_dim: usize,
    /// `dim g_{s+r}`.
    pub symbol_dim: usize,
}

/// Incremental search for compatibility conditions, order by order.
struct CcSearch<'a, F: Field> {
    f: &'a F,
    op: &'a Operator<F::Elem>,
    /// Next order to examine.
    r: usize,
    /// Reduced basis of all conditions of order `≤ r − 1`, over `J_{r−1}(F₀)`.
    known: Vec<Vec<F::Elem>>,
    /// Generators found so far, each over `J_order(F₀)`.
    generators: Vec<(usize, Vec<F::Elem>)>,
    dims: Vec<ProlongationDims>,
}

struct Step<E> {
    new: usize,
    fresh: Vec<Vec<E>>,
    matrix: Matrix<E>,
}

impl<'a, F: Field> CcSearch<'a, F> {
    fn new(f: &'a F, op: &'a Operator<F::Elem>) -> Self {
        CcSearch { f, op, r: 0, known: Vec::new(), generators: Vec::new(), dims: Vec::new() }
    }

    fn cells(&self, r: usize) -> Result<usize> {
        let rows = dim_jet(self.op.n(), self.op.target_dim(), r)?;
        let cols = dim_jet(self.op.n(), self.op.source_dim(), self.op.order() + r)?;
        rows.checked_mul(cols).ok_or(Error::Overflow("prolonged matrix size"))
    }

    fn step(&mut self) -> Result<Step<F::Elem>> {
        let f = self.f;
        let r = self.r;
        let n = self.op.n();
        let m = prolonged_matrix(f, self.op, r)?;
        let rank = f.rank_of(m.clone());

        let src = JetFrame::new(n, self.op.source_dim(), self.op.order() + r)?;
        let top: Vec<usize> = src.degree_range(self.op.order() + r).collect();
        let top_rank = f.rank_of(m.select_columns(&top));
        self.dims.push(ProlongationDims {
            order: self.op.order() + r,
            solution_dim: src.len() - rank,
            symbol_dim: top.len() - top_rank,
        });

        let tgt = self.op.target_frame(r)?;
        let carried: Vec<Vec<F::Elem>> = if self.known.is_empty() {
            Vec::new()
        } else {
            let prev = self.op.target_frame(r - 1)?;
            let rows = prolong_rows(f, &prev, &tgt, &self.known);
            let mat = Matrix::from_rows(tgt.len(), rows)?;
            let (red, piv) = f.rref_of(mat);
            red.row_vecs().into_iter().take(piv.len()).collect()
        };
        let kernel_dim = m.rows() - rank;
        if kernel_dim < carried.len() {
            return Err(Error::Inconsistent("derived conditions exceed the left kernel".into()));
        }
        let new = kernel_dim - carried.len();
        let mut fresh = Vec::new();
        if new > 0 {
            let kernel = f.left_kernel_of(m.clone());
            let pivots: Vec<usize> = carried
                .iter()
                .map(|row| row.iter().position(|c| !f.is_zero(c)).expect("reduced rows are nonzero"))
                .collect();
            let mut rest = Vec::new();
            for mut v in kernel.iter().cloned() {
                for (row, &p) in carried.iter().zip(&pivots) {
                    if !f.is_zero(&v[p]) {
                        let c = v[p].clone();
                        f.sub_mul_row(&mut v, row, &c, 0);
                    }
                }
                if v.iter().any(|c| !f.is_zero(c)) {
                    rest.push(v);
                }
            }
            if !rest.is_empty() {
                let (red, piv) = f.rref_of(Matrix::from_rows(tgt.len(), rest)?);
                fresh = red.row_vecs().into_iter().take(piv.len()).collect();
            }
            if fresh.len() != new {
                return Err(Error::Inconsistent(format!(
                    "expected {new} new conditions at order {r}, reduction produced {}",
                    fresh.len()
                )));
            }
            self.known = kernel;
        } else {
            self.known = carried;
        }
        self.generators.extend(fresh.iter().cloned().map(|v| (r, v)));
        self.r += 1;
        Ok(Step { new, fresh, matrix: m })
    }
}

/// New compatibility conditions of `op` at exactly order `r`, as reduced rows
/// over `J_r(F₀)`. Every returned row annihilates the prolonged matrix.
pub fn cc_at_order(op: &OperatorHandle, r: usize) -> Result<RationalMatrix> {
    let mut search = CcSearch::new(&QField, op);
    let tgt = op.target_frame(r)?;
    loop {
        let step = search.step()?;
        if search.r > r {
            for row in &step.fresh {
                if row_times(&QField, row, &step.matrix).iter().any(|c| !num_traits::Zero::is_zero(c)) {
                    return Err(Error::Inconsistent("condition does not annihilate the operator".into()));
                }
            }
            return Matrix::from_rows(tgt.len(), step.fresh);
        }
    }
}

/// All compatibility conditions of order `≤ r` (the full left kernel), exact.
pub fn cc_space(op: &OperatorHandle, r: usize) -> Result<RationalMatrix> {
    let m = prolonged_matrix(&QField, op, r)?;
    let rows = QField.left_kernel_of(m);
    Matrix::from_rows(op.target_frame(r)?.len(), rows)
}

/// Compatibility conditions obtained by substitution: when some `L` recovers
/// the unknowns from the components (`L ∘ D = id`), the operator `D ∘ L − id`
/// vanishes on the image of `D`. Returns `None` when no left inverse of order
/// `≤ max_order` exists. `L` is reduced against the conditions of its order, so
/// the result is canonical.
pub fn cc_by_substitution(op: &OperatorHandle, max_order: usize) -> Result<Option<(OperatorHandle, OperatorHandle)>> {
    let f = QField;
    for s in 0..=max_order {
        let m = prolonged_matrix(&f, op, s)?;
        let src = JetFrame::new(op.n(), op.source_dim(), op.order() + s)?;
        let zero_index = crate::jetspace::MultiIndex::zero(op.n());
        // Solve λ·M = e_{y^k} for each unknown k via the augmented transpose.
        let mt = m.transpose();
        let mut lambdas = Vec::new();
        for k in 0..op.source_dim() {
            let target = src.position(k, &zero_index).expect("order-zero jet");
            let rhs: Vec<Rational> = (0..src.len()).map(|p| if p == target { one() } else { zero() }).collect();
            match solve_left(&mt, &rhs)? {
                Some(l) => lambdas.push(l),
                None => break,
            }
        }
        if lambdas.len() < op.source_dim() {
            continue;
        }
        // Canonical representative modulo the left kernel.
        let ker_rows = f.left_kernel_of(m.clone());
        let ker = if ker_rows.is_empty() {
            ker_rows
        } else {
            let (red, piv) = f.rref_of(Matrix::from_rows(m.rows(), ker_rows)?);
            red.row_vecs().into_iter().take(piv.len()).collect()
        };
        for l in lambdas.iter_mut() {
            for row in &ker {
                let p = row.iter().position(|c| !num_traits::Zero::is_zero(c)).expect("nonzero");
                if !num_traits::Zero::is_zero(&l[p]) {
                    let c = l[p].clone();
                    f.sub_mul_row(l, row, &c, 0);
                }
            }
        }
        let left = Operator::from_rows(op.n(), op.target_dim(), s, lambdas)?;
        let mut comp = op.compose(&left)?;
        let frame = comp.source_frame();
        for tau in 0..op.target_dim() {
            let p = frame.position(tau, &zero_index).expect("order-zero jet");
            comp.rows_mut()[tau][p] -= one();
        }
        return Ok(Some((left, comp)));
    }
    Ok(None)
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

fn zero() -> Rational {
    Rational::from_integer(0.into())
}

/// Some `x` with `A x = b` (columns of `A` are the unknowns), or `None`.
fn solve_left(a: &RationalMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    let cols = a.cols();
    let aug: Vec<Vec<Rational>> = (0..a.rows())
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    let (red, piv) = QField.rref_of(Matrix::from_rows(cols + 1, aug)?);
    if piv.contains(&cols) {
        return Ok(None);
    }
    let mut x = vec![zero(); cols];
    for (i, &p) in piv.iter().enumerate() {
        x[p] = red.get(i, cols).clone();
    }
    Ok(Some(x))
}

/// `1 + s` for the least `s` such that `g_{q+s}` is 2-acyclic: the order up to
/// which compatibility conditions of a formally integrable system can occur.
/// Systems failing the integrability test are rejected; complete them first.
pub fn cc_order_bound(sys: &LinearJetSystem, max_s: usize, bound: usize) -> Result<Option<usize>> {
    let fi = sys.is_formally_integrable(bound.max(1))?;
    if !fi.integrable {
        return Err(Error::NotFormallyIntegrable { order: fi.first_failure.unwrap_or(sys.order()) });
    }
    for s in 0..=max_s {
        let p = sys.prolong(s)?;
        if is_s_acyclic(&p, 2, bound)?.holds {
            return Ok(Some(s + 1));
        }
    }
    Ok(None)
}

/// Knobs for [`resolution`].
#[derive(Clone, Debug)]
pub struct ResolutionOptions {
    pub mode: RankMode,
    /// Largest order at which conditions are sought for a single operator.
    pub max_cc_order: usize,
    /// Orders examined past the first one that produced conditions.
    pub slack: usize,
    /// Maximum number of operators, the initial one included.
    pub max_length: usize,
    /// Cap on entries of a single prolonged matrix.
    pub max_cells: usize,
}

impl Default for ResolutionOptions {
    fn default() -> Self {
        ResolutionOptions {
            mode: RankMode::Modular { seed: 0, retries: 1, verify_below: 0 },
            max_cc_order: 4,
            slack: 1,
            max_length: 12,
            max_cells: 40_000_000,
        }
    }
}

/// One operator of a resolution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub source_dim: usize,
    pub target_dim: usize,
    pub order: usize,
    /// Formal integrability of the operator's kernel system, checked on the
    /// prolongations computed during the search; `None` when too few were seen.
    pub formally_integrable: Option<bool>,
    pub dims: Vec<ProlongationDims>,
    /// Highest order examined for conditions of this operator.
    pub searched_to: usize,
    /// The search stopped on the size cap rather than by the stopping rule.
    pub truncated: bool,
    /// `(order, count)` of generating conditions that are not derivatives of lower ones.
    pub generators_by_order: Vec<(usize, usize)>,
}

/// Outcome of [`resolution`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceReport {
    /// `dim E, dim F₀, dim F₁, …`
    pub bundles: Vec<usize>,
    /// Orders of the successive operators.
    pub orders: Vec<usize>,
    pub stages: Vec<StageReport>,
    /// `−dim E + dim F₀ − dim F₁ + …`
    pub euler_poincare: i64,
    /// The last operator has no compatibility conditions up to the searched order.
    pub complete: bool,
    /// Field the ranks were computed in: `"Q"` or `"F_p"` with the primes used.
    pub field: String,
}

/// `−b₀ + b₁ − b₂ + …`
pub fn euler_poincare(bundles: &[usize]) -> i64 {
    bundles
        .iter()
        .enumerate()
        .map(|(i, &b)| if i % 2 == 0 { -(b as i64) } else { b as i64 })
        .sum()
}

/// Builds the sequence `E → F₀ → F₁ → …` of the operator of `sys`. Each next
/// operator is the full system of compatibility conditions at the highest order
/// where generators appear, so it includes derivatives of lower-order ones.
pub fn resolution(sys: &LinearJetSystem, opts: &ResolutionOptions, cancel: Option<&AtomicBool>) -> Result<SequenceReport> {
    let op = OperatorHandle::from_system(sys);
    resolve_operator(&op, opts, cancel)
}

/// [`resolution`] for an arbitrary operator.
pub fn resolve_operator(op: &OperatorHandle, opts: &ResolutionOptions, cancel: Option<&AtomicBool>) -> Result<SequenceReport> {
    match opts.mode {
        RankMode::Exact => run(&QField, op.clone(), opts, cancel, "Q".into()),
        RankMode::Modular { seed, retries, .. } => {
            let mut reports = Vec::new();
            for p in prime_schedule(seed, retries) {
                let f = PrimeField::new(p);
                let Some(red) = op.reduce(&f) else { continue };
                reports.push((p, run(&f, red, opts, cancel, format!("F_{p}"))?));
            }
            let Some((_, first)) = reports.first().cloned() else {
                return Err(Error::Indeterminate { retries });
            };
            if reports.iter().all(|(_, r)| r.bundles == first.bundles && r.orders == first.orders) {
                let primes: Vec<String> = reports.iter().map(|(p, _)| p.to_string()).collect();
                Ok(SequenceReport { field: format!("F_p, p in {{{}}}", primes.join(", ")), ..first })
            } else {
                // Primes disagree: some prime divides a minor. Fall back to ℚ.
                run(&QField, op.clone(), opts, cancel, "Q".into())
            }
        }
    }
}

fn run<F: Field>(
    f: &F,
    op: Operator<F::Elem>,
    opts: &ResolutionOptions,
    cancel: Option<&AtomicBool>,
    field: String,
) -> Result<SequenceReport> {
    let mut bundles = vec![op.source_dim(), op.target_dim()];
    let mut orders = vec![op.order()];
    let mut stages = Vec::new();
    let mut current = op;
    let mut complete = false;
    while stages.len() < opts.max_length {
        let mut search = CcSearch::new(f, &current);
        let mut first_found: Option<usize> = None;
        let mut truncated = false;
        // Full condition space at the highest order that produced generators.
        let mut full: Option<(usize, Vec<Vec<F::Elem>>)> = None;
        let mut generators_by_order = Vec::new();
        loop {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Err(Error::Cancelled);
            }
            let r = search.r;
            let limit = first_found.map_or(opts.max_cc_order, |o| (o + opts.slack).min(opts.max_cc_order.max(o)));
            if r > limit {
                break;
            }
            if search.cells(r)? > opts.max_cells {
                truncated = true;
                break;
            }
            let step = search.step()?;
            if step.new > 0 {
                first_found.get_or_insert(r);
                generators_by_order.push((r, step.new));
                full = Some((r, search.known.clone()));
            }
        }
        let dims = search.dims.clone();
        let fi = (dims.len() >= 2).then(|| {
            dims.windows(2).all(|w| w[0].solution_dim == w[1].solution_dim - w[1].symbol_dim)
        });
        stages.push(StageReport {
            source_dim: current.source_dim(),
            target_dim: current.target_dim(),
            order: current.order(),
            formally_integrable: fi,
            dims,
            searched_to: search.r.saturating_sub(1),
            truncated,
            generators_by_order,
        });
        let Some((order, rows)) = full else {
            complete = !truncated;
            break;
        };
        let n = current.n();
        let target = current.target_dim();
        current = Operator::from_rows(n, target, order, rows)?;
        bundles.push(current.target_dim());
        orders.push(order);
    }
    Ok(SequenceReport { euler_poincare: euler_poincare(&bundles), bundles, orders, stages, complete, field })
}
