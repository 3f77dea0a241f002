//! Exact linear algebra over ℚ, with prime-field acceleration for ranks.

mod elim;
mod field;
mod matrix;

pub use elim::{
    coordinates_in_basis, kernel_basis, kernel_rows_in, left_kernel_basis, left_kernel_rows_in, prime_schedule,
    random_primes, rank, rank_exact, rank_in, rank_mod_p, rref, rref_in, rref_natural, RankMode,
};
pub use field::{is_prime_u64, Field, PrimeField, QField};
pub use matrix::{Matrix, RationalMatrix};

/// Arbitrary-precision rational number in canonical form.
pub type Rational = num_rational::BigRational;

/// 2⁶² − 57, the largest prime below 2⁶².
pub const DEFAULT_PRIME: u64 = 4_611_686_018_427_387_847;
