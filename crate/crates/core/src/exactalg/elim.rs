//! Elimination: rank, reduced row echelon form, kernels.
//!
//! Exact routines over ℚ work on integer rows (denominators cleared) and stay
//! fraction-free until the final normalisation. They run on `i128` first and
//! restart on `BigInt` if an intermediate value overflows. The generic
//! [`Field`] routines serve the prime-field fast path.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::field::{is_prime_u64, Field, PrimeField};
use super::{Matrix, Rational, RationalMatrix, DEFAULT_PRIME};
use crate::error::{Error, Result};

/// Above this many entries, row updates are spread over the rayon pool.
const PAR_THRESHOLD: usize = 1 << 15;

/// How [`rank`] obtains its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMode {
    /// Fraction-free (Bareiss) elimination over the integers.
    Exact,
    /// Rank over 𝔽ₚ for the default prime plus `retries` fresh random primes
    /// drawn from `seed`; the maximum is returned. Matrices whose larger side is
    /// below `verify_below` are recomputed exactly.
    Modular {
        seed: u64,
        retries: usize,
        verify_below: usize,
    },
}

impl Default for RankMode {
    fn default() -> Self {
        RankMode::Modular {
            seed: 0,
            retries: 2,
            verify_below: 200,
        }
    }
}

/// Rank over ℚ.
///
/// Modular ranks never exceed the rational rank; a prime dividing every
/// maximal nonzero minor can only lower it. Taking the maximum over several
/// independent primes makes an undercount vanishingly unlikely.
pub fn rank(m: &RationalMatrix, mode: RankMode) -> Result<usize> {
    m.rows()
        .checked_mul(m.cols())
        .ok_or(Error::Overflow("rank input size"))?;
    match mode {
        RankMode::Exact => Ok(rank_exact(m)),
        RankMode::Modular {
            seed,
            retries,
            verify_below,
        } => {
            if m.rows().max(m.cols()) < verify_below {
                return Ok(rank_exact(m));
            }
            let mut best = 0;
            for p in prime_schedule(seed, retries) {
                if let Some(r) = rank_mod_p(m, p) {
                    best = best.max(r);
                }
            }
            Ok(best)
        }
    }
}

/// The default prime followed by `retries` random 62-bit primes from `seed`.
pub fn prime_schedule(seed: u64, retries: usize) -> Vec<u64> {
    let mut out = vec![DEFAULT_PRIME];
    out.extend(random_primes(seed, retries));
    out
}

/// `count` random primes in `[2⁶¹, 2⁶²)`, deterministic in `seed`.
pub fn random_primes(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_0000_0001);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let cand = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime_u64(cand) && cand != DEFAULT_PRIME && !out.contains(&cand) {
            out.push(cand);
        }
    }
    out
}

/// Rank modulo `p`; `None` if some denominator vanishes mod `p`.
pub fn rank_mod_p(m: &RationalMatrix, p: u64) -> Option<usize> {
    let f = PrimeField::new(p);
    let mm = m.try_map(|q| f.from_rational(q))?;
    Some(rank_in(&f, mm))
}

/// Rank by forward elimination over any field.
pub fn rank_in<F: Field>(f: &F, m: Matrix<F::Elem>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut data: Vec<Vec<F::Elem>> = split_rows(m);
    let par = rows * cols >= PAR_THRESHOLD;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !f.is_zero(&data[i][c])) else {
            continue;
        };
        data.swap(r, i);
        let inv = f.inv(&data[r][c]);
        let (head, tail) = data.split_at_mut(r + 1);
        let pivot = &head[r];
        let update = |row: &mut Vec<F::Elem>| {
            if !f.is_zero(&row[c]) {
                let factor = f.mul(&row[c], &inv);
                f.sub_mul_row(row, pivot, &factor, c);
            }
        };
        if par {
            tail.par_iter_mut().for_each(update);
        } else {
            tail.iter_mut().for_each(update);
        }
        r += 1;
    }
    r
}

/// Reduced row echelon form over any field. Pivots are searched column by
/// column following `order`; returned rows are the nonzero rows in pivot order.
pub fn rref_in<F: Field>(f: &F, m: Matrix<F::Elem>, order: &[usize]) -> (Matrix<F::Elem>, Vec<usize>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut data = split_rows(m);
    let par = rows * cols >= PAR_THRESHOLD;
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in order {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !f.is_zero(&data[i][c])) else {
            continue;
        };
        data.swap(r, i);
        let inv = f.inv(&data[r][c]);
        f.scale_row(&mut data[r], &inv, 0);
        let pivot = data[r].clone();
        let update = |(j, row): (usize, &mut Vec<F::Elem>)| {
            if j != r && !f.is_zero(&row[c]) {
                let factor = row[c].clone();
                f.sub_mul_row(row, &pivot, &factor, 0);
            }
        };
        if par {
            data.par_iter_mut().enumerate().for_each(update);
        } else {
            data.iter_mut().enumerate().for_each(update);
        }
        pivots.push(c);
        r += 1;
    }
    data.truncate(r);
    (join_rows(data, cols), pivots)
}

/// Basis of the right kernel as rows (each row `v` satisfies `M v = 0`).
pub fn kernel_rows_in<F: Field>(f: &F, m: Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let cols = m.cols();
    let order: Vec<usize> = (0..cols).collect();
    let (r, pivots) = rref_in(f, m, &order);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![f.zero(); cols];
            v[free] = f.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, free));
            }
            v
        })
        .collect()
}

/// Basis of the left kernel (`λ M = 0`) as rows in reduced echelon form.
pub fn left_kernel_rows_in<F: Field>(f: &F, m: Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let (rows, cols) = (m.rows(), m.cols());
    // Eliminate on [M | I]; rows whose M-part vanishes carry left-kernel vectors.
    let mut data: Vec<Vec<F::Elem>> = split_rows(m)
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..rows).map(|j| if i == j { f.one() } else { f.zero() }));
            row
        })
        .collect();
    let par = rows * (cols + rows) >= PAR_THRESHOLD;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(i) = (r..rows).find(|&i| !f.is_zero(&data[i][c])) else {
            continue;
        };
        data.swap(r, i);
        let inv = f.inv(&data[r][c]);
        let (head, tail) = data.split_at_mut(r + 1);
        let pivot = &head[r];
        let update = |row: &mut Vec<F::Elem>| {
            if !f.is_zero(&row[c]) {
                let factor = f.mul(&row[c], &inv);
                f.sub_mul_row(row, pivot, &factor, c);
            }
        };
        if par {
            tail.par_iter_mut().for_each(update);
        } else {
            tail.iter_mut().for_each(update);
        }
        r += 1;
    }
    let kernel: Vec<F::Elem> = data[r..].iter().flat_map(|row| row[cols..].iter().cloned()).collect();
    let k = Matrix::from_data(rows - r, rows, kernel);
    let order: Vec<usize> = (0..rows).collect();
    split_rows(rref_in(f, k, &order).0)
}

fn split_rows<T: Clone>(m: Matrix<T>) -> Vec<Vec<T>> {
    let cols = m.cols();
    if cols == 0 {
        return vec![Vec::new(); m.rows()];
    }
    let data = m.into_data();
    data.chunks(cols).map(<[T]>::to_vec).collect()
}

fn join_rows<T: Clone>(rows: Vec<Vec<T>>, cols: usize) -> Matrix<T> {
    let n = rows.len();
    Matrix::from_data(n, cols, rows.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Exact routines over ℚ.

/// Integer arithmetic used by the fraction-free paths. `i128` reports overflow
/// through `None`; `BigInt` never fails.
trait IntLike: Clone + Send + Sync + Sized {
    fn is_zero(&self) -> bool;
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    fn is_unit(&self) -> bool;
    fn size_key(&self) -> u64;
    fn to_rational(&self) -> Rational;
}

impl IntLike for i128 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn size_key(&self) -> u64 {
        self.unsigned_abs().min(u64::MAX as u128) as u64
    }
    fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(*self))
    }
}

impl IntLike for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn size_key(&self) -> u64 {
        self.bits()
    }
    fn to_rational(&self) -> Rational {
        Rational::from_integer(self.clone())
    }
}

/// Clears denominators row by row.
fn integer_rows(m: &RationalMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect()
}

fn to_small(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    // Leave headroom so that the first products cannot overflow silently.
    rows.iter()
        .map(|r| r.iter().map(|v| v.to_i128().filter(|x| x.unsigned_abs() < (1u128 << 60))).collect())
        .collect()
}

fn normalize_content<R: IntLike>(row: &mut [R]) {
    let mut g: Option<R> = None;
    for v in row.iter().filter(|v| !v.is_zero()) {
        g = Some(match g {
            None => v.clone(),
            Some(acc) => acc.gcd(v),
        });
        if g.as_ref().is_some_and(IntLike::is_unit) {
            return;
        }
    }
    if let Some(g) = g {
        if !g.is_unit() {
            for v in row.iter_mut().filter(|v| !v.is_zero()) {
                *v = v.div_exact(&g);
            }
        }
    }
}

fn ff_rref<R: IntLike>(mut rows: Vec<Vec<R>>, cols: usize, order: &[usize]) -> Option<(Vec<Vec<R>>, Vec<usize>)> {
    let n = rows.len();
    let par = n * cols >= PAR_THRESHOLD;
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in order {
        if r == n {
            break;
        }
        let Some(i) = (r..n)
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].size_key())
        else {
            continue;
        };
        rows.swap(r, i);
        normalize_content(&mut rows[r]);
        let pivot = rows[r].clone();
        let a = pivot[c].clone();
        let update = |(j, row): (usize, &mut Vec<R>)| -> Option<()> {
            if j == r || row[c].is_zero() {
                return Some(());
            }
            let g = a.gcd(&row[c]);
            let a1 = a.div_exact(&g);
            let b1 = row[c].div_exact(&g);
            for (x, y) in row.iter_mut().zip(&pivot) {
                if x.is_zero() && y.is_zero() {
                    continue;
                }
                *x = R::mul_sub(&a1, x, &b1, y)?;
            }
            normalize_content(row);
            Some(())
        };
        let ok = if par {
            rows.par_iter_mut().enumerate().map(update).all(|o| o.is_some())
        } else {
            rows.iter_mut().enumerate().map(update).all(|o| o.is_some())
        };
        if !ok {
            return None;
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Some((rows, pivots))
}

fn finish_rref<R: IntLike>(rows: Vec<Vec<R>>, pivots: &[usize], cols: usize) -> RationalMatrix {
    let out: Vec<Vec<Rational>> = rows
        .into_iter()
        .zip(pivots)
        .map(|(row, &p)| {
            let lead = row[p].to_rational();
            row.iter()
                .map(|v| if v.is_zero() { Rational::zero() } else { v.to_rational() / &lead })
                .collect()
        })
        .collect();
    Matrix::from_rows(cols, out).expect("rows have uniform width")
}

/// Reduced row echelon form over ℚ with pivot search following `column_order`.
///
/// The pivot set is the lexicographically earliest independent set of columns
/// in that order; rows are returned in pivot order with unit pivots.
pub fn rref(m: &RationalMatrix, column_order: &[usize]) -> Result<(RationalMatrix, Vec<usize>)> {
    let cols = m.cols();
    let mut seen = vec![false; cols];
    if column_order.len() != cols {
        return Err(Error::InvalidArgument(format!(
            "column order has {} entries for {cols} columns",
            column_order.len()
        )));
    }
    for &c in column_order {
        if c >= cols || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidArgument("column order is not a permutation".into()));
        }
    }
    let big = integer_rows(m);
    if let Some(small) = to_small(&big) {
        if let Some((rows, pivots)) = ff_rref(small, cols, column_order) {
            return Ok((finish_rref(rows, &pivots, cols), pivots));
        }
    }
    let (rows, pivots) = ff_rref(big, cols, column_order).expect("BigInt elimination cannot overflow");
    Ok((finish_rref(rows, &pivots, cols), pivots))
}

/// [`rref`] in the natural column order.
pub fn rref_natural(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let order: Vec<usize> = (0..m.cols()).collect();
    rref(m, &order).expect("natural order is a permutation")
}

fn bareiss_rank<R: IntLike>(mut rows: Vec<Vec<R>>, cols: usize) -> Option<usize> {
    let n = rows.len();
    let mut prev: Option<R> = None;
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(i) = (r..n).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, i);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot = &head[r];
        for row in tail.iter_mut() {
            let b = row[c].clone();
            for j in c + 1..cols {
                if row[j].is_zero() && (b.is_zero() || pivot[j].is_zero()) {
                    continue;
                }
                let v = R::mul_sub(&pivot[c], &row[j], &b, &pivot[j])?;
                row[j] = match &prev {
                    Some(p) => v.div_exact(p),
                    None => v,
                };
            }
            row[c] = R::mul_sub(&b, &pivot[c], &pivot[c], &b)?;
        }
        prev = Some(pivot[c].clone());
        r += 1;
    }
    Some(r)
}

/// Exact rank by fraction-free Bareiss elimination.
pub fn rank_exact(m: &RationalMatrix) -> usize {
    let cols = m.cols();
    let big = integer_rows(m);
    if let Some(small) = to_small(&big) {
        if let Some(r) = bareiss_rank(small, cols) {
            return r;
        }
    }
    bareiss_rank(big, cols).expect("BigInt elimination cannot overflow")
}

/// Right kernel basis as columns, in reduced column echelon form.
pub fn kernel_basis(m: &RationalMatrix) -> RationalMatrix {
    let cols = m.cols();
    let (r, pivots) = rref_natural(m);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let vecs: Vec<Vec<Rational>> = (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free).clone();
            }
            v
        })
        .collect();
    let k = Matrix::from_rows(cols, vecs).expect("uniform width");
    // Column echelon form of K is the transpose of the row echelon form of Kᵀ.
    let (kt, _) = rref_natural(&k);
    Matrix::from_fn(cols, kt.rows(), |i, j| kt.get(j, i).clone())
}

/// Left kernel basis as rows (`λ M = 0`), in reduced row echelon form.
pub fn left_kernel_basis(m: &RationalMatrix) -> RationalMatrix {
    // Reduced column echelon form of ker(Mᵀ), transposed, is a reduced row echelon form.
    kernel_basis(&m.transpose()).transpose()
}

/// Solves `B x = v` for each column `v` of `targets`, where the columns of `basis`
/// are independent. Returns coordinates as columns, or `None` if some target
/// is outside the span.
pub fn coordinates_in_basis(basis: &RationalMatrix, targets: &RationalMatrix) -> Option<RationalMatrix> {
    let k = basis.cols();
    let t = targets.cols();
    // Row-reduce [B | T]; consistency requires no pivot in the T block.
    let aug = Matrix::from_fn(basis.rows(), k + t, |i, j| {
        if j < k {
            basis.get(i, j).clone()
        } else {
            targets.get(i, j - k).clone()
        }
    });
    let (r, pivots) = rref_natural(&aug);
    if pivots.iter().any(|&p| p >= k) || pivots.len() != k {
        return None;
    }
    Some(Matrix::from_fn(k, t, |i, j| r.get(i, k + j).clone()))
}
