//! Polynomials with rational coefficients, polynomial vector fields, and jet sections.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactalg::Rational;
use crate::jetspace::{JetFrame, MultiIndex};

/// Polynomial in `n` variables; terms keyed by exponent vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    /// The coordinate function `xⁱ` (1-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i - 1] = 1;
        Self::monomial(n, e, Rational::one())
    }

    pub fn monomial(n: usize, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), n);
        let mut p = Polynomial::zero(n);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&v| v as usize).sum()).max()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n);
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `∂ᵢ` for the 1-based variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            if e[i - 1] > 0 {
                let mut f = e.clone();
                f[i - 1] -= 1;
                out.add_term(f, c * Rational::from_integer(BigInt::from(e[i - 1])));
            }
        }
        out
    }

    /// `∂^μ`.
    pub fn derivative_multi(&self, mu: &MultiIndex) -> Polynomial {
        let mut out = self.clone();
        for v in mu.variables() {
            out = out.derivative(v);
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.clone();
                for (xi, &k) in x.iter().zip(e) {
                    for _ in 0..k {
                        v *= xi;
                    }
                }
                v
            })
            .sum()
    }
}

fn fmt_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first for readability.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", fmt_rational(&abs))?;
                }
                write!(f, "{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `Σₖ aᵏ(x) ∂ₖ`, or more generally a section with `m` polynomial components.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PolyVectorField {
    pub components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Self {
        PolyVectorField { components }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        PolyVectorField {
            components: vec![Polynomial::zero(n); m],
        }
    }

    /// The constant field `∂ᵢ` in `n` variables.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n, n);
        f.components[i - 1] = Polynomial::constant(n, Rational::one());
        f
    }

    pub fn n(&self) -> usize {
        self.components.first().map_or(0, Polynomial::n)
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.components.iter().map(|a| a.scale(c)).collect())
    }

    /// `∂ᵣ aʳ`.
    pub fn divergence(&self) -> Polynomial {
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::zero(self.n()), |acc, (r, c)| acc.add(&c.derivative(r + 1)))
    }

    /// `(a·∇)f` applied componentwise.
    fn directional(&self, f: &PolyVectorField) -> PolyVectorField {
        let n = self.n();
        PolyVectorField::new(
            f.components
                .iter()
                .map(|fk| {
                    (1..=n).fold(Polynomial::zero(n), |acc, i| acc.add(&self.components[i - 1].mul(&fk.derivative(i))))
                })
                .collect(),
        )
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})*d{}", k + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `[a, b] = (a·∇)b − (b·∇)a` for vector fields on the same `n`-space.
pub fn lie_bracket(a: &PolyVectorField, b: &PolyVectorField) -> Result<PolyVectorField> {
    let n = a.n();
    if a.m() != n || b.m() != n || b.n() != n {
        return Err(Error::Shape {
            expected: format!("vector fields with {n} components in {n} variables"),
            got: format!("{} and {} components", a.m(), b.m()),
        });
    }
    Ok(a.directional(b).sub(&b.directional(a)))
}

/// A section `(x) ↦ ξ^k_μ(x)` of `J_q(E)` with polynomial entries, indexed by frame position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JetSection {
    pub frame: JetFrame,
    pub entries: Vec<Polynomial>,
}

impl JetSection {
    pub fn new(frame: JetFrame, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != frame.len() {
            return Err(Error::Shape {
                expected: format!("{} entries", frame.len()),
                got: format!("{}", entries.len()),
            });
        }
        Ok(JetSection { frame, entries })
    }

    /// The holonomic section `j_q(ξ)`.
    pub fn holonomic(xi: &PolyVectorField, q: usize) -> Result<Self> {
        let frame = JetFrame::new(xi.n(), xi.m(), q)?;
        let entries = (0..frame.len())
            .map(|p| {
                let jet = frame.jet(p);
                xi.components[jet.unknown].derivative_multi(&jet.index)
            })
            .collect();
        Ok(JetSection { frame, entries })
    }

    pub fn get(&self, unknown: usize, mu: &MultiIndex) -> Option<&Polynomial> {
        self.frame.position(unknown, mu).map(|p| &self.entries[p])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }
}

/// Spencer operator `d: J_{q+1}(E) → T*⊗J_q(E)`, one section per `dxⁱ`:
/// `(dξ)^k_{μ,i} = ∂ᵢξ^k_μ − ξ^k_{μ+1ᵢ}`.
pub fn spencer_operator(s: &JetSection) -> Result<Vec<JetSection>> {
    let q1 = s.frame.q();
    if q1 == 0 {
        return Err(Error::InvalidArgument("the Spencer operator needs a section of order at least 1".into()));
    }
    let low = s.frame.with_order(q1 - 1)?;
    (1..=s.frame.n())
        .map(|i| {
            let entries = (0..low.len())
                .map(|p| {
                    let jet = low.jet(p);
                    let here = s.get(jet.unknown, &jet.index).expect("lower frame is contained");
                    let up = s.get(jet.unknown, &jet.index.add(i)).expect("order q+1 entry exists");
                    here.derivative(i).sub(up)
                })
                .collect();
            JetSection::new(low.clone(), entries)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn arithmetic_and_display() {
        let x1 = Polynomial::var(2, 1);
        let x2 = Polynomial::var(2, 2);
        let p = x1.mul(&x1).scale(&r(1, 2)).sub(&x2.mul(&x2).scale(&r(1, 2)));
        assert_eq!(p.to_string(), "1/2*x1^2 - 1/2*x2^2");
        assert_eq!(p.derivative(1), x1);
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.eval(&[r(2, 1), r(1, 1)]), r(3, 2));
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let x1 = Polynomial::var(2, 1);
        let a = PolyVectorField::new(vec![x1.clone(), Polynomial::zero(2)]);
        let b = PolyVectorField::coordinate(2, 1);
        let ab = lie_bracket(&a, &b).unwrap();
        let ba = lie_bracket(&b, &a).unwrap();
        assert_eq!(ab.add(&ba), PolyVectorField::zero(2, 2));
        assert!(lie_bracket(&a, &a).unwrap().is_zero());
    }

    #[test]
    fn spencer_operator_kills_holonomic_sections() {
        let x = Polynomial::var(1, 1);
        let xi = PolyVectorField::new(vec![x.mul(&x).mul(&x)]);
        let s = JetSection::holonomic(&xi, 3).unwrap();
        assert!(spencer_operator(&s).unwrap().iter().all(JetSection::is_zero));
    }
}
