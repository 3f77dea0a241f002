//! Multi-indices, jet coordinates and their fixed total order.
//!
//! Coordinates `(k, μ)` with `|μ| ≤ q` are listed by degree descending, then
//! class descending, then reverse-lexicographically (exponent of the last
//! variable first, larger first), then unknown index ascending. Row reduction
//! in this order makes the highest jets of the highest class the pivots, which
//! is what the Janet tabulars and the parametric-jet lists rely on.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector `(μ₁, …, μₙ)` with its cached degree `|μ|`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    exps: Vec<u32>,
    degree: usize,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().map(|&e| e as usize).sum();
        MultiIndex { exps, degree }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex {
            exps: vec![0; n],
            degree: 0,
        }
    }

    /// Builds `1_{i₁} + 1_{i₂} + …` from 1-based variable indices.
    pub fn from_variables(n: usize, vars: &[usize]) -> Result<Self> {
        let mut exps = vec![0u32; n];
        for &v in vars {
            if v == 0 || v > n {
                return Err(Error::InvalidArgument(format!("variable index {v} outside 1..={n}")));
            }
            exps[v - 1] += 1;
        }
        Ok(MultiIndex::new(exps))
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    /// Exponent of the 1-based variable `i`.
    pub fn exponent(&self, i: usize) -> u32 {
        self.exps[i - 1]
    }

    /// Smallest 1-based `i` with `μᵢ ≠ 0`; `None` for `μ = 0`.
    pub fn class(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e != 0).map(|p| p + 1)
    }

    /// `μ + 1ᵢ` for the 1-based variable `i`.
    pub fn add(&self, i: usize) -> Self {
        assert!(i >= 1 && i <= self.n(), "variable index {i} outside 1..={}", self.n());
        let mut exps = self.exps.clone();
        exps[i - 1] += 1;
        MultiIndex {
            exps,
            degree: self.degree + 1,
        }
    }

    /// `μ − 1ᵢ`, if `μᵢ ≥ 1`.
    pub fn sub(&self, i: usize) -> Option<Self> {
        if self.exps[i - 1] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[i - 1] -= 1;
        Some(MultiIndex {
            exps,
            degree: self.degree - 1,
        })
    }

    pub fn plus(&self, other: &MultiIndex) -> Self {
        debug_assert_eq!(self.n(), other.n());
        MultiIndex {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            degree: self.degree + other.degree,
        }
    }

    /// `self − other` when componentwise nonnegative.
    pub fn minus(&self, other: &MultiIndex) -> Option<Self> {
        let exps: Option<Vec<u32>> = self.exps.iter().zip(&other.exps).map(|(a, b)| a.checked_sub(*b)).collect();
        exps.map(MultiIndex::new)
    }

    /// Variables with multiplicity, ascending and 1-based (e.g. `y₁₁₃` → `[1,1,3]`).
    pub fn variables(&self) -> Vec<usize> {
        self.exps
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i + 1, e as usize))
            .collect()
    }

    /// `μ! = Π μᵢ!`, as needed for Taylor coefficients.
    pub fn factorial(&self) -> u128 {
        self.exps.iter().map(|&e| (1..=e as u128).product::<u128>()).product()
    }

    /// Comparison in the frame order: `Less` means "listed earlier".
    pub fn frame_cmp(&self, other: &MultiIndex) -> Ordering {
        other
            .degree
            .cmp(&self.degree)
            .then_with(|| other.class().cmp(&self.class()))
            .then_with(|| {
                for (a, b) in self.exps.iter().rev().zip(other.exps.iter().rev()) {
                    match b.cmp(a) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }

    /// All multi-indices of degree exactly `d` in `n` variables, in frame order.
    pub fn of_degree(n: usize, d: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut cur, 0, d as u32, &mut out);
        out.sort_by(MultiIndex::frame_cmp);
        out
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex::new(cur.clone()));
        return;
    }
    if cur.is_empty() {
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        fill(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.variables() {
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    usize::try_from(acc).ok()
}

fn checked_binomial(n: usize, k: usize, what: &'static str) -> Result<usize> {
    binomial(n, k).ok_or(Error::Overflow(what))
}

/// `dim J_q(E) = m·C(n+q, n)`.
pub fn dim_jet(n: usize, m: usize, q: usize) -> Result<usize> {
    let b = checked_binomial(n.checked_add(q).ok_or(Error::Overflow("jet dimension"))?, n, "jet dimension")?;
    b.checked_mul(m).ok_or(Error::Overflow("jet dimension"))
}

/// `dim S_qT*⊗E = m·C(n+q−1, n−1)`.
pub fn dim_symbol(n: usize, m: usize, q: usize) -> Result<usize> {
    if n == 0 {
        return Ok(if q == 0 { m } else { 0 });
    }
    let b = checked_binomial(n - 1 + q, n - 1, "symbol dimension")?;
    b.checked_mul(m).ok_or(Error::Overflow("symbol dimension"))
}

/// Number of degree-`q` multi-indices of class `i` (1-based): `C(n−i+q−1, q−1)`.
pub fn class_count(n: usize, q: usize, i: usize) -> usize {
    if q == 0 || i == 0 || i > n {
        return 0;
    }
    binomial(n - i + q - 1, q - 1).expect("class count fits")
}

/// Strictly increasing 1-based tuples of length `s` from `1..=n`, lexicographic.
pub fn exterior_basis(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < left {
                break;
            }
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, s, &mut Vec::with_capacity(s), &mut out);
    out
}

/// A jet coordinate `y^k_μ` with a 0-based unknown index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Jet {
    pub unknown: usize,
    pub index: MultiIndex,
}

impl Jet {
    pub fn new(unknown: usize, index: MultiIndex) -> Self {
        Jet { unknown, index }
    }

    pub fn order(&self) -> usize {
        self.index.degree()
    }

    /// Frame order on jets: multi-index order, then unknown ascending.
    pub fn frame_cmp(&self, other: &Jet) -> Ordering {
        self.index.frame_cmp(&other.index).then(self.unknown.cmp(&other.unknown))
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.unknown + 1)?;
        if self.index.degree() > 0 {
            write!(f, "_{}", self.index)?;
        }
        Ok(())
    }
}

/// The ordered coordinate list of `J_q(E)` for `n` variables and `m` unknowns.
#[derive(Clone, Debug)]
pub struct JetFrame {
    n: usize,
    m: usize,
    q: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `degree_start[d]` = position of the first multi-index of degree `d`.
    degree_start: Vec<usize>,
}

impl PartialEq for JetFrame {
    fn eq(&self, other: &Self) -> bool {
        (self.n, self.m, self.q) == (other.n, other.m, other.q)
    }
}

impl Eq for JetFrame {}

impl JetFrame {
    pub fn new(n: usize, m: usize, q: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("a frame needs n ≥ 1 and m ≥ 1".into()));
        }
        dim_jet(n, m, q)?;
        let mut indices = Vec::new();
        let mut degree_start = vec![0; q + 1];
        for d in (0..=q).rev() {
            degree_start[d] = indices.len();
            indices.extend(MultiIndex::of_degree(n, d));
        }
        let lookup = indices.iter().cloned().enumerate().map(|(i, mu)| (mu, i)).collect();
        Ok(JetFrame {
            n,
            m,
            q,
            indices,
            lookup,
            degree_start,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.indices.len() * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same `n`, `m`, with a different order.
    pub fn with_order(&self, q: usize) -> Result<Self> {
        JetFrame::new(self.n, self.m, q)
    }

    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Column position of `(k, μ)`, or `None` if outside the frame.
    pub fn position(&self, unknown: usize, mu: &MultiIndex) -> Option<usize> {
        if unknown >= self.m || mu.n() != self.n {
            return None;
        }
        self.lookup.get(mu).map(|&p| p * self.m + unknown)
    }

    pub fn position_of(&self, jet: &Jet) -> Result<usize> {
        self.position(jet.unknown, &jet.index).ok_or_else(|| Error::CoordinateOutOfFrame {
            coordinate: jet.to_string(),
            n: self.n,
            m: self.m,
            q: self.q,
        })
    }

    pub fn jet(&self, pos: usize) -> Jet {
        Jet::new(pos % self.m, self.indices[pos / self.m].clone())
    }

    pub fn degree_of(&self, pos: usize) -> usize {
        self.indices[pos / self.m].degree()
    }

    /// All coordinates in frame order.
    pub fn enumerate(&self) -> Vec<Jet> {
        (0..self.len()).map(|p| self.jet(p)).collect()
    }

    /// Column range holding jets of degree exactly `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        assert!(d <= self.q);
        let start = self.degree_start[d];
        let end = if d == 0 { self.indices.len() } else { self.degree_start[d - 1] };
        start * self.m..end * self.m
    }

    /// Columns of degree at most `d` (a suffix of the frame).
    pub fn up_to_degree(&self, d: usize) -> std::ops::Range<usize> {
        let start = if d >= self.q { 0 } else { self.degree_start[d] * self.m };
        start..self.len()
    }
}

/// Coordinates of `S_dT*⊗E`: degree-`d` jets in frame order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolFrame {
    n: usize,
    m: usize,
    d: usize,
    indices: Vec<MultiIndex>,
}

impl SymbolFrame {
    pub fn new(n: usize, m: usize, d: usize) -> Result<Self> {
        dim_symbol(n, m, d)?;
        Ok(SymbolFrame {
            n,
            m,
            d,
            indices: MultiIndex::of_degree(n, d),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.indices.len() * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn jet(&self, pos: usize) -> Jet {
        Jet::new(pos % self.m, self.indices[pos / self.m].clone())
    }

    /// Position of `(k, μ)`; linear search is avoided via the frame's lookup map.
    pub fn lookup(&self) -> HashMap<MultiIndex, usize> {
        self.indices.iter().cloned().enumerate().map(|(i, mu)| (mu, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_jet(3, 1, 4).unwrap(), 35);
        assert_eq!(dim_jet(2, 2, 3).unwrap(), 20);
        assert_eq!(dim_jet(1, 1, 0).unwrap(), 1);
        assert_eq!(dim_symbol(3, 1, 2).unwrap(), 6);
        assert_eq!(dim_symbol(3, 3, 4).unwrap(), 45);
        assert_eq!(dim_symbol(5, 4, 0).unwrap(), 4);
        assert!(dim_jet(usize::MAX, 1, 3).is_err());
    }

    #[test]
    fn add_and_class() {
        assert_eq!(MultiIndex::zero(3).add(2), mi(&[0, 1, 0]));
        assert_eq!(mi(&[1, 0, 2]).add(1), mi(&[2, 0, 2]));
        assert_eq!(mi(&[0, 0, 2]).class(), Some(3));
        assert_eq!(mi(&[0, 0, 2]).add(1).class(), Some(1));
        assert_eq!(MultiIndex::zero(2).class(), None);
    }

    #[test]
    fn class_counts_sum_to_symbol_dim() {
        for n in 1..5 {
            for q in 1..5 {
                let total: usize = (1..=n).map(|i| class_count(n, q, i)).sum();
                assert_eq!(total, dim_symbol(n, 1, q).unwrap());
                for i in 1..=n {
                    let direct = MultiIndex::of_degree(n, q).iter().filter(|m| m.class() == Some(i)).count();
                    assert_eq!(direct, class_count(n, q, i));
                }
            }
        }
    }

    #[test]
    fn enumerate_orders() {
        let f = JetFrame::new(1, 1, 3).unwrap();
        let names: Vec<String> = f.enumerate().iter().map(|j| j.to_string()).collect();
        assert_eq!(names, ["y1_111", "y1_11", "y1_1", "y1"]);

        let f = JetFrame::new(2, 1, 1).unwrap();
        let idx: Vec<MultiIndex> = f.enumerate().into_iter().map(|j| j.index).collect();
        assert_eq!(idx, vec![mi(&[0, 1]), mi(&[1, 0]), mi(&[0, 0])]);

        let f = JetFrame::new(3, 1, 2).unwrap();
        assert_eq!(f.len(), 10);
        assert_eq!(f.jet(0).index, mi(&[0, 0, 2]));
        let d2: Vec<MultiIndex> = f.enumerate().into_iter().take(6).map(|j| j.index).collect();
        assert_eq!(
            d2,
            vec![
                mi(&[0, 0, 2]),
                mi(&[0, 1, 1]),
                mi(&[0, 2, 0]),
                mi(&[1, 0, 1]),
                mi(&[1, 1, 0]),
                mi(&[2, 0, 0])
            ]
        );
    }

    #[test]
    fn positions_roundtrip() {
        let f = JetFrame::new(3, 2, 3).unwrap();
        assert_eq!(f.len(), 40);
        for p in 0..f.len() {
            assert_eq!(f.position_of(&f.jet(p)).unwrap(), p);
        }
        assert_eq!(f.degree_range(3), 0..20);
        assert_eq!(f.degree_range(0), 38..40);
        assert_eq!(f.up_to_degree(1), 32..40);
        assert!(f.position(0, &mi(&[4, 0, 0])).is_none());
    }

    #[test]
    fn exterior() {
        assert_eq!(exterior_basis(3, 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(exterior_basis(3, 0), vec![Vec::<usize>::new()]);
        assert!(exterior_basis(2, 3).is_empty());
    }
}
