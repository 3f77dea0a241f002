//! Coefficient fields: the rationals and word-sized prime fields.
//!
//! Elimination routines are written against [`Field`] so the same code path runs
//! over ℚ (exact) and over 𝔽ₚ (fast rank and kernel dimensions).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{elim, Matrix, Rational};

/// A field with an explicit context object, so runtime-chosen primes work.
// The field value carries the modulus, so conversions take `self`.
#[allow(clippy::wrong_self_convention)]
pub trait Field: Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; callers guarantee `a != 0`.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// Image of a rational; `None` when the denominator vanishes in the field.
    fn from_rational(&self, q: &Rational) -> Option<Self::Elem>;

    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_rational(&Rational::from_integer(BigInt::from(v)))
            .expect("integers embed in every field")
    }

    /// `dst[j] -= f * src[j]` for `j >= start`.
    fn sub_mul_row(&self, dst: &mut [Self::Elem], src: &[Self::Elem], f: &Self::Elem, start: usize) {
        for (d, s) in dst[start..].iter_mut().zip(&src[start..]) {
            if !self.is_zero(s) {
                *d = self.sub(d, &self.mul(f, s));
            }
        }
    }

    /// `row[j] *= f` for `j >= start`.
    fn scale_row(&self, row: &mut [Self::Elem], f: &Self::Elem, start: usize) {
        for v in row[start..].iter_mut() {
            if !self.is_zero(v) {
                *v = self.mul(v, f);
            }
        }
    }

    /// Rank of a matrix over this field.
    fn rank_of(&self, m: Matrix<Self::Elem>) -> usize
    where
        Self: Sized,
    {
        elim::rank_in(self, m)
    }

    /// Reduced row echelon form in the natural column order.
    fn rref_of(&self, m: Matrix<Self::Elem>) -> (Matrix<Self::Elem>, Vec<usize>)
    where
        Self: Sized,
    {
        let order: Vec<usize> = (0..m.cols()).collect();
        elim::rref_in(self, m, &order)
    }

    /// Left kernel basis rows in reduced echelon form.
    fn left_kernel_of(&self, m: Matrix<Self::Elem>) -> Vec<Vec<Self::Elem>>
    where
        Self: Sized,
    {
        elim::left_kernel_rows_in(self, m)
    }
}

/// The field ℚ with arbitrary-precision canonical fractions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QField;

impl Field for QField {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn inv(&self, a: &Rational) -> Rational {
        a.recip()
    }
    fn from_rational(&self, q: &Rational) -> Option<Rational> {
        Some(q.clone())
    }

    // Exact work goes through the fraction-free integer routines.
    fn rank_of(&self, m: Matrix<Rational>) -> usize {
        elim::rank_exact(&m)
    }

    fn rref_of(&self, m: Matrix<Rational>) -> (Matrix<Rational>, Vec<usize>) {
        elim::rref_natural(&m)
    }

    fn left_kernel_of(&self, m: Matrix<Rational>) -> Vec<Vec<Rational>> {
        elim::left_kernel_basis(&m).row_vecs()
    }
}

/// 𝔽ₚ for an odd prime `p < 2^63`, elements kept in Montgomery form.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    /// -p⁻¹ mod 2⁶⁴
    p_neg_inv: u64,
    /// 2¹²⁸ mod p, used to enter Montgomery form.
    r2: u64,
    one: u64,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeField({})", self.p)
    }
}

impl PrimeField {
    /// Panics if `p` is even or not below 2⁶³; primality is the caller's contract.
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1u64 << 63) && p > 2, "modulus must be an odd prime below 2^63");
        // Newton iteration for p⁻¹ mod 2⁶⁴.
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        PrimeField {
            p,
            p_neg_inv: inv.wrapping_neg(),
            r2,
            one: r,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.p_neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mont_mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    /// Residue `v mod p` converted into Montgomery form.
    pub fn from_u64(&self, v: u64) -> u64 {
        self.mont_mul(v % self.p, self.r2)
    }

    /// Canonical residue in `0..p` (leaves Montgomery form).
    pub fn to_u64(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = self.one;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mont_mul(acc, base);
            }
            base = self.mont_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn reduce_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let r = v.mod_floor(&m);
        self.from_u64(r.to_u64().expect("residue fits in u64"))
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        self.one
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mont_mul(*a, *b)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        debug_assert!(*a != 0);
        self.pow(*a, self.p - 2)
    }
    fn from_rational(&self, q: &Rational) -> Option<u64> {
        let num = self.reduce_bigint(q.numer());
        let den = self.reduce_bigint(q.denom());
        if den == 0 {
            return None;
        }
        Some(self.mont_mul(num, self.inv(&den)))
    }
    fn from_i64(&self, v: i64) -> u64 {
        let r = self.from_u64(v.unsigned_abs());
        if v < 0 {
            self.neg(&r)
        } else {
            r
        }
    }

    #[inline]
    fn sub_mul_row(&self, dst: &mut [u64], src: &[u64], f: &u64, start: usize) {
        let f = *f;
        let p = self.p;
        for (d, &s) in dst[start..].iter_mut().zip(&src[start..]) {
            if s != 0 {
                let t = self.mont_mul(f, s);
                *d = if *d >= t { *d - t } else { *d + p - t };
            }
        }
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery_roundtrip_and_inverse() {
        let f = PrimeField::new(super::super::DEFAULT_PRIME);
        for v in [0u64, 1, 2, 12345, f.modulus() - 1] {
            assert_eq!(f.to_u64(f.from_u64(v)), v);
        }
        let a = f.from_u64(987654321);
        let ai = f.inv(&a);
        assert_eq!(f.mul(&a, &ai), f.one());
        let half = f.from_rational(&Rational::new(1.into(), 2.into())).unwrap();
        assert_eq!(f.add(&half, &half), f.one());
        assert_eq!(f.from_i64(-3), f.neg(&f.from_u64(3)));
    }

    #[test]
    fn small_prime_rejects_bad_denominator() {
        let f = PrimeField::new(7);
        assert!(f.from_rational(&Rational::new(1.into(), 14.into())).is_none());
    }

    #[test]
    fn miller_rabin() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_007u64 * 3));
        assert!(is_prime_u64(super::super::DEFAULT_PRIME));
        assert!(!is_prime_u64(561)); // Carmichael
    }
}
