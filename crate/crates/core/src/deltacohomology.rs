//! Spencer δ-complexes of symbols, acyclicity, and the Cartan character test.
//!
//! Elements of `∧ˢT*⊗S_dT*⊗E` are indexed by `(I, k, μ)` with the exterior
//! multi-index `I` most significant; exterior bases are lexicographic on
//! increasing tuples. The map sends `dx^I ⊗ y^k_μ` to
//! `Σᵢ dxⁱ∧dx^I ⊗ y^k_{μ−1ᵢ}`, which in coordinates reads
//! `(δv)^k_{μ,J} = Σ ± v^k_{μ+1ᵢ, J∖i}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{rank_exact, Rational, RationalMatrix};
use crate::jetspace::{binomial, class_count, exterior_basis, SymbolFrame};
use crate::system::{LinearJetSystem, SymbolSpace};

/// `δ: ∧ˢ⊗S_d⊗E → ∧^{s+1}⊗S_{d−1}⊗E` on the full spaces (columns = domain).
pub fn ambient_delta(n: usize, m: usize, d: usize, s: usize) -> Result<RationalMatrix> {
    let src = SymbolFrame::new(n, m, d)?;
    let ext_src = exterior_basis(n, s);
    let ext_dst = exterior_basis(n, s + 1);
    if d == 0 {
        return Ok(RationalMatrix::zeros(0, ext_src.len() * src.len()));
    }
    let dst = SymbolFrame::new(n, m, d - 1)?;
    let dst_lookup = dst.lookup();
    let ext_lookup: std::collections::HashMap<Vec<usize>, usize> =
        ext_dst.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let rows = ext_dst.len() * dst.len();
    let cols = ext_src.len() * src.len();
    let mut out = RationalMatrix::zeros(rows, cols);
    let one = Rational::from_integer(1.into());
    for (ii, big_i) in ext_src.iter().enumerate() {
        for p in 0..src.len() {
            let jet = src.jet(p);
            let col = ii * src.len() + p;
            for i in 1..=n {
                if big_i.contains(&i) {
                    continue;
                }
                let Some(lower) = jet.index.sub(i) else { continue };
                let mut j = big_i.clone();
                let pos = j.partition_point(|&x| x < i);
                j.insert(pos, i);
                let jj = ext_lookup[&j];
                let row = jj * dst.len() + dst_lookup[&lower] * m + jet.unknown;
                let v = if pos % 2 == 0 { one.clone() } else { -one.clone() };
                out.set(row, col, v);
            }
        }
    }
    Ok(out)
}

/// `δ` restricted to `∧ˢT*⊗g_d`; columns are `e_I ⊗ b_j` for basis vectors `b_j`.
pub fn delta_matrix(g: &SymbolSpace, s: usize) -> Result<RationalMatrix> {
    let n = g.frame.n();
    let m = g.frame.m();
    let d = g.frame.degree();
    let amb = ambient_delta(n, m, d, s)?;
    let ext = binomial(n, s).ok_or(Error::Overflow("exterior dimension"))?;
    let k = g.dim();
    let len = g.ambient_dim();
    // Multiply by the block-diagonal I_ext ⊗ B without forming it.
    let mut out = RationalMatrix::zeros(amb.rows(), ext * k);
    for r in 0..amb.rows() {
        let row = amb.row(r);
        for blk in 0..ext {
            for (p, a) in row[blk * len..(blk + 1) * len].iter().enumerate() {
                if num_traits::Zero::is_zero(a) {
                    continue;
                }
                for j in 0..k {
                    let b = g.basis.get(p, j);
                    if !num_traits::Zero::is_zero(b) {
                        let v = out.get(r, blk * k + j) + a * b;
                        out.set(r, blk * k + j, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One cell of the δ-complex table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaCell {
    pub level: usize,
    pub s: usize,
    /// `dim ∧ˢT*⊗g_level`
    pub dim: usize,
    /// Rank of the outgoing `δ`.
    pub rank_out: usize,
    /// Rank of the incoming `δ` from `∧^{s−1}T*⊗g_{level+1}`.
    pub rank_in: usize,
    pub cohomology: usize,
}

/// Symbols `g_from, …, g_to` of a system, prolonging once for the whole range.
#[derive(Clone, Debug)]
pub struct SymbolTower {
    pub start: usize,
    pub levels: Vec<SymbolSpace>,
}

impl SymbolTower {
    pub fn new(sys: &LinearJetSystem, to: usize) -> Result<Self> {
        let q = sys.order();
        if to < q {
            return Err(Error::InvalidArgument(format!("tower top {to} below system order {q}")));
        }
        let chain = sys.prolongations(to - q)?;
        let levels = chain.iter().map(LinearJetSystem::top_symbol).collect::<Result<_>>()?;
        Ok(SymbolTower { start: q, levels })
    }

    pub fn top(&self) -> usize {
        self.start + self.levels.len() - 1
    }

    pub fn get(&self, level: usize) -> &SymbolSpace {
        &self.levels[level - self.start]
    }

    /// First level at which the symbol vanishes, if reached.
    pub fn vanishing_level(&self) -> Option<usize> {
        self.levels.iter().position(|g| g.dim() == 0).map(|i| self.start + i)
    }

    /// `H^s` at `∧ˢT*⊗g_level`; needs `level + 1 ≤ top` unless `g_level = 0`.
    pub fn cell(&self, level: usize, s: usize) -> Result<DeltaCell> {
        let g = self.get(level);
        let n = g.frame.n();
        let ext = binomial(n, s).unwrap_or(0);
        let dim = ext * g.dim();
        if dim == 0 {
            return Ok(DeltaCell {
                level,
                s,
                dim: 0,
                rank_out: 0,
                rank_in: 0,
                cohomology: 0,
            });
        }
        let rank_out = rank_exact(&delta_matrix(g, s)?);
        let rank_in = if s == 0 {
            0
        } else {
            if level + 1 > self.top() {
                return Err(Error::InvalidArgument(format!(
                    "cohomology at level {level} needs the symbol at level {}",
                    level + 1
                )));
            }
            rank_exact(&delta_matrix(self.get(level + 1), s - 1)?)
        };
        Ok(DeltaCell {
            level,
            s,
            dim,
            rank_out,
            rank_in,
            cohomology: dim - rank_out - rank_in,
        })
    }
}

/// `dim H^s` at `∧ˢT*⊗g_level` for the symbol of `sys`.
pub fn cohomology(sys: &LinearJetSystem, level: usize, s: usize) -> Result<usize> {
    let tower = SymbolTower::new(sys, level + 1)?;
    Ok(tower.cell(level, s)?.cohomology)
}

/// δ-complex table for levels `q..=q+r_max` and `s = 0..=n`.
pub fn delta_complex(sys: &LinearJetSystem, r_max: usize) -> Result<Vec<DeltaCell>> {
    let q = sys.order();
    let tower = SymbolTower::new(sys, q + r_max + 1)?;
    let mut out = Vec::new();
    for level in q..=q + r_max {
        for s in 0..=sys.n() {
            out.push(tower.cell(level, s)?);
        }
    }
    Ok(out)
}

/// Verdict of a bounded acyclicity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AcyclicityVerdict {
    pub holds: bool,
    /// True when the symbol vanished within the range, so no bound applies.
    pub certified: bool,
    /// `(level, s)` of the first nonzero cohomology found.
    pub witness: Option<(usize, usize)>,
    /// Highest level examined.
    pub checked_up_to: usize,
}

/// Whether `g_q` of `sys` is `s`-acyclic, checking levels `q..=q+bound`.
pub fn is_s_acyclic(sys: &LinearJetSystem, s: usize, bound: usize) -> Result<AcyclicityVerdict> {
    if s > sys.n() {
        return Err(Error::InvalidArgument(format!("acyclicity degree {s} exceeds n = {}", sys.n())));
    }
    let q = sys.order();
    let mut tower = SymbolTower::new(sys, q)?;
    let mut level = q;
    loop {
        if tower.get(level).dim() == 0 {
            return Ok(AcyclicityVerdict {
                holds: true,
                certified: true,
                witness: None,
                checked_up_to: level,
            });
        }
        if level > q + bound {
            return Ok(AcyclicityVerdict {
                holds: true,
                certified: false,
                witness: None,
                checked_up_to: level - 1,
            });
        }
        if tower.top() < level + 1 {
            tower = SymbolTower::new(sys, level + 1)?;
        }
        for t in 1..=s {
            if tower.cell(level, t)?.cohomology != 0 {
                return Ok(AcyclicityVerdict {
                    holds: false,
                    certified: true,
                    witness: Some((level, t)),
                    checked_up_to: level,
                });
            }
        }
        level += 1;
    }
}

/// δ-route involutivity: `n`-acyclicity of the top symbol.
pub fn is_involutive(sys: &LinearJetSystem, bound: usize) -> Result<AcyclicityVerdict> {
    is_s_acyclic(sys, sys.n(), bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CartanVerdict {
    Involutive,
    NotInvolutive,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanReport {
    /// `α⁽¹⁾..α⁽ⁿ⁾`, parametric top jets by class.
    pub characters: Vec<usize>,
    /// `Σ i·α⁽ⁱ⁾`
    pub weighted_sum: usize,
    pub next_symbol_dim: usize,
    pub equality: bool,
    pub delta_involutive: bool,
    pub verdict: CartanVerdict,
    /// Integer change of variables used, row-major; `None` for the given coordinates.
    pub coordinate_change: Option<Vec<Vec<i64>>>,
    pub attempts: usize,
}

/// Characters of the top symbol and the Cartan sum, in the given coordinates.
pub fn characters(sys: &LinearJetSystem) -> Result<(Vec<usize>, usize, usize)> {
    let (n, m, q) = (sys.n(), sys.m(), sys.order());
    let mut beta = vec![0usize; n + 1];
    for jet in sys.leading_jets() {
        if jet.order() == q {
            if let Some(c) = jet.index.class() {
                beta[c] += 1;
            }
        }
    }
    let alpha: Vec<usize> = (1..=n).map(|i| class_count(n, q, i) * m - beta[i]).collect();
    if q == 0 {
        // Order-zero symbols have no classes; all parameters sit at class n.
        let mut a = vec![0; n];
        a[n - 1] = m - beta.iter().sum::<usize>().min(m);
        let next = sys.prolong(1)?.top_symbol_dim();
        let weighted = n * a[n - 1];
        return Ok((a, weighted, next));
    }
    let weighted = alpha.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
    let next = sys.prolong(1)?.top_symbol_dim();
    Ok((alpha, weighted, next))
}

/// Cartan's test cross-checked against the δ-route, with random
/// unimodular changes of coordinates when the two disagree.
pub fn cartan_test(sys: &LinearJetSystem, bound: usize, seed: u64, retries: usize) -> Result<CartanReport> {
    let delta_involutive = is_involutive(sys, bound)?.holds;
    let (characters, weighted_sum, next) = self::characters(sys)?;
    let equality = weighted_sum == next;
    let mut report = CartanReport {
        characters,
        weighted_sum,
        next_symbol_dim: next,
        equality,
        delta_involutive,
        verdict: if delta_involutive {
            CartanVerdict::Involutive
        } else {
            CartanVerdict::NotInvolutive
        },
        coordinate_change: None,
        attempts: 1,
    };
    if equality && !delta_involutive {
        return Err(Error::Inconsistent(
            "Cartan equality holds but δ-cohomology does not vanish".into(),
        ));
    }
    if equality || !delta_involutive {
        return Ok(report);
    }
    // δ says involutive but the coordinates are not δ-regular.
    match random_regularizing_change(sys, seed, retries)? {
        Some((a, t, attempts)) => {
            let (ch, w, nx) = self::characters(&t)?;
            report.characters = ch;
            report.weighted_sum = w;
            report.next_symbol_dim = nx;
            report.equality = true;
            report.coordinate_change = Some(a);
            report.attempts = attempts + 1;
        }
        None => {
            report.verdict = CartanVerdict::Indeterminate;
            report.attempts = retries + 1;
        }
    }
    Ok(report)
}

/// Draws unimodular integer matrices with entries in `[−3, 3]` until Cartan's
/// equality holds; returns the matrix, the transformed system and the number of draws.
#[allow(clippy::type_complexity)]
pub fn random_regularizing_change(
    sys: &LinearJetSystem,
    seed: u64,
    retries: usize,
) -> Result<Option<(Vec<Vec<i64>>, LinearJetSystem, usize)>> {
    let n = sys.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=retries {
        let a = random_unimodular(n, &mut rng);
        let am = RationalMatrix::from_i64_rows(&a);
        let t = sys.change_coordinates(&am)?;
        let (_, w, next) = characters(&t)?;
        if w == next {
            return Ok(Some((a, t, attempt)));
        }
    }
    Ok(None)
}

/// A random integer matrix with entries in `[−3, 3]` and determinant ±1.
pub fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    loop {
        let a: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        if det_i64(&a).map(i128::abs) == Some(1) {
            return a;
        }
    }
}

fn det_i64(a: &[Vec<i64>]) -> Option<i128> {
    // Bareiss on i128; entries are tiny so this never overflows for n ≤ 8.
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        let p = (k..n).find(|&i| m[i][k] != 0)?;
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j].checked_mul(m[k][k])? - m[i][k].checked_mul(m[k][j])?) / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * if n == 0 { 1 } else { m[n - 1][n - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetspace::{Jet, JetFrame, MultiIndex};

    fn sys(n: usize, q: usize, eqs: &[&[usize]]) -> LinearJetSystem {
        let f = JetFrame::new(n, 1, q).unwrap();
        let forms: Vec<_> = eqs
            .iter()
            .map(|v| vec![(Rational::from_integer(1.into()), Jet::new(0, MultiIndex::from_variables(n, v).unwrap()))])
            .collect();
        LinearJetSystem::new(f, &forms, "t").unwrap()
    }

    #[test]
    fn delta_squares_to_zero_on_ambient() {
        for n in 1..4 {
            for d in 2..4 {
                for s in 0..n {
                    let a = ambient_delta(n, 2, d, s).unwrap();
                    let b = ambient_delta(n, 2, d - 1, s + 1).unwrap();
                    assert!(b.mul(&a).unwrap().is_zero(), "n={n} d={d} s={s}");
                }
            }
        }
    }

    #[test]
    fn first_slot_injective() {
        for n in 1..4 {
            let a = ambient_delta(n, 1, 3, 0).unwrap();
            assert_eq!(rank_exact(&a), a.cols());
        }
    }

    #[test]
    fn determinant_helper() {
        assert_eq!(det_i64(&[vec![2, 1], vec![1, 1]]), Some(1));
        assert_eq!(det_i64(&[vec![0, 1], vec![1, 0]]), Some(-1));
        assert_eq!(det_i64(&[vec![1, 2], vec![2, 4]]), None);
    }

    #[test]
    fn full_frame_characters() {
        let s = sys(2, 1, &[]);
        let (a, w, next) = characters(&s).unwrap();
        assert_eq!(a, vec![1, 1]);
        assert_eq!(w, next);
        let r = cartan_test(&s, 3, 0, 10).unwrap();
        assert_eq!(r.verdict, CartanVerdict::Involutive);
        assert!(r.coordinate_change.is_none());
    }

    #[test]
    fn delta_irregular_coordinates_are_repaired() {
        let s = sys(2, 2, &[&[1, 1]]);
        let (_, w, next) = characters(&s).unwrap();
        assert_ne!(w, next);
        let r = cartan_test(&s, 3, 7, 50).unwrap();
        assert_eq!(r.verdict, CartanVerdict::Involutive);
        assert!(r.coordinate_change.is_some());
        assert!(r.equality);
        let again = cartan_test(&s, 3, 7, 50).unwrap();
        assert_eq!(r.coordinate_change, again.coordinate_change);
    }
}
