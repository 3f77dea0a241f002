//! Built-in systems, flat metrics, conformal generators, and polynomial solution spaces.

mod poly;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

pub use poly::{lie_bracket, spencer_operator, JetSection, PolyVectorField, Polynomial};

use crate::error::{Error, Result};
use crate::exactalg::{kernel_basis, Rational, RationalMatrix};
use crate::jetspace::{Jet, JetFrame, MultiIndex};
use crate::system::{LinearForm, LinearJetSystem};

/// Constant diagonal metric `ω = diag(±1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatMetric {
    signature: Vec<i8>,
}

impl FlatMetric {
    pub fn new(signature: Vec<i8>) -> Result<Self> {
        if signature.is_empty() || signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("metric signature must be a nonempty list of ±1".into()));
        }
        Ok(FlatMetric { signature })
    }

    pub fn euclidean(n: usize) -> Self {
        FlatMetric {
            signature: vec![1; n],
        }
    }

    /// Signature `(+,…,+,−)`.
    pub fn minkowski(n: usize) -> Self {
        let mut signature = vec![1; n];
        if let Some(last) = signature.last_mut() {
            *last = -1;
        }
        FlatMetric { signature }
    }

    pub fn n(&self) -> usize {
        self.signature.len()
    }

    /// `ω_ii` (1-based); off-diagonal entries vanish.
    pub fn diag(&self, i: usize) -> i64 {
        self.signature[i - 1] as i64
    }

    /// `ω^{ii}`, equal to `ω_ii` for a ±1 diagonal.
    pub fn inverse_diag(&self, i: usize) -> i64 {
        self.diag(i)
    }

    /// `x² = ω_ij xⁱxʲ`.
    pub fn square_norm(&self) -> Polynomial {
        let n = self.n();
        (1..=n).fold(Polynomial::zero(n), |acc, i| {
            let xi = Polynomial::var(n, i);
            acc.add(&xi.mul(&xi).scale(&int(self.diag(i))))
        })
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn jet1(n: usize, k: usize, vars: &[usize]) -> Jet {
    Jet::new(k - 1, MultiIndex::from_variables(n, vars).expect("indices within range"))
}

/// `Ω_ij = ω_jj ξʲᵢ + ω_ii ξⁱⱼ` for `i ≤ j`, optionally with the trace term `−(2/n) ω_ij ξʳᵣ`.
fn killing_forms(metric: &FlatMetric, conformal: bool) -> Vec<LinearForm> {
    let n = metric.n();
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            let mut form: LinearForm = vec![
                (int(metric.diag(j)), jet1(n, j, &[i])),
                (int(metric.diag(i)), jet1(n, i, &[j])),
            ];
            if conformal && i == j {
                let c = -int(2 * metric.diag(i)) / int(n as i64);
                form.extend((1..=n).map(|r| (c.clone(), jet1(n, r, &[r]))));
            }
            out.push(form);
        }
    }
    out
}

/// Infinitesimal isometries of a flat metric: first order, `m = n`.
pub fn killing_flat(metric: &FlatMetric) -> Result<LinearJetSystem> {
    let n = metric.n();
    LinearJetSystem::new(JetFrame::new(n, n, 1)?, &killing_forms(metric, false), format!("killing{n}"))
}

/// Infinitesimal conformal transformations of a flat metric, `n ≥ 3`, with the
/// trace-free coefficient `2/n`.
pub fn conformal_killing_flat(metric: &FlatMetric) -> Result<LinearJetSystem> {
    let n = metric.n();
    if n < 3 {
        return Err(Error::InvalidArgument(
            "the first-order conformal system needs n ≥ 3; use conformal_n1 or conformal_n2".into(),
        ));
    }
    LinearJetSystem::new(JetFrame::new(n, n, 1)?, &killing_forms(metric, true), format!("conformal{n}"))
}

/// `ξ_xxx = 0`, the linearized projective equation on the line.
pub fn conformal_n1() -> Result<LinearJetSystem> {
    LinearJetSystem::new(JetFrame::new(1, 1, 3)?, &[vec![(int(1), jet1(1, 1, &[1, 1, 1]))]], "conformal1")
}

/// Cauchy–Riemann equations, their four second-order consequences written via
/// the Laplacian, and all eight third-order jets set to zero.
pub fn conformal_n2() -> Result<LinearJetSystem> {
    let n = 2;
    let mut eqs: Vec<LinearForm> = Vec::new();
    for k in 1..=2 {
        for mu in MultiIndex::of_degree(n, 3) {
            eqs.push(vec![(int(1), Jet::new(k - 1, mu))]);
        }
    }
    let j = |k, v: &[usize]| jet1(n, k, v);
    eqs.push(vec![(int(1), j(2, &[2, 2])), (int(-1), j(1, &[1, 2]))]);
    eqs.push(vec![(int(1), j(1, &[2, 2])), (int(1), j(2, &[1, 2]))]);
    eqs.push(vec![(int(1), j(2, &[1, 2])), (int(-1), j(1, &[1, 1]))]);
    eqs.push(vec![(int(1), j(1, &[1, 2])), (int(1), j(2, &[1, 1]))]);
    eqs.push(vec![(int(1), j(2, &[2])), (int(-1), j(1, &[1]))]);
    eqs.push(vec![(int(1), j(1, &[2])), (int(1), j(2, &[1]))]);
    LinearJetSystem::new(JetFrame::new(n, 2, 3)?, &eqs, "conformal2")
}

/// The two Cauchy–Riemann equations alone (first order, infinite type).
pub fn cauchy_riemann() -> Result<LinearJetSystem> {
    let j = |k, v: &[usize]| jet1(2, k, v);
    let eqs = vec![
        vec![(int(1), j(2, &[2])), (int(-1), j(1, &[1]))],
        vec![(int(1), j(1, &[2])), (int(1), j(2, &[1]))],
    ];
    LinearJetSystem::new(JetFrame::new(2, 2, 1)?, &eqs, "cauchy-riemann")
}

fn scalar_system(n: usize, q: usize, eqs: &[&[(i64, &[usize])]], label: &str) -> Result<LinearJetSystem> {
    let forms: Vec<LinearForm> = eqs
        .iter()
        .map(|e| e.iter().map(|(c, v)| (int(*c), jet1(n, 1, v))).collect())
        .collect();
    LinearJetSystem::new(JetFrame::new(n, 1, q)?, &forms, label)
}

/// `y₃₃ = 0, y₂₃ − y₁₁ = 0, y₂₂ = 0`.
pub fn macaulay() -> Result<LinearJetSystem> {
    scalar_system(
        3,
        2,
        &[&[(1, &[3, 3])], &[(1, &[2, 3]), (-1, &[1, 1])], &[(1, &[2, 2])]],
        "macaulay",
    )
}

/// `y₃₃ − y₁₁ = 0, y₂₃ = 0, y₂₂ − y₁₁ = 0`.
pub fn macaulay_variant() -> Result<LinearJetSystem> {
    scalar_system(
        3,
        2,
        &[&[(1, &[3, 3]), (-1, &[1, 1])], &[(1, &[2, 3])], &[(1, &[2, 2]), (-1, &[1, 1])]],
        "macaulay-variant",
    )
}

/// `y₂₂ = 0, y₁₂ − y = 0`: projections of its prolongations keep producing
/// new lower-order equations until only the zero solution is left.
pub fn hidden_conditions() -> Result<LinearJetSystem> {
    scalar_system(2, 2, &[&[(1, &[2, 2])], &[(1, &[1, 2]), (-1, &[])]], "hidden")
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "killing2",
    "killing3",
    "killing4",
    "killing5",
    "minkowski-killing4",
    "conformal1",
    "conformal2",
    "conformal3",
    "conformal4",
    "conformal5",
    "conformal6",
    "minkowski-conformal4",
    "cauchy-riemann",
    "macaulay",
    "macaulay-variant",
    "hidden",
];

/// Looks up a built-in system.
pub fn by_name(name: &str) -> Result<LinearJetSystem> {
    let numbered = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
    match name {
        "minkowski-killing4" => return Ok(killing_flat(&FlatMetric::minkowski(4))?.with_label(name)),
        "minkowski-conformal4" => return Ok(conformal_killing_flat(&FlatMetric::minkowski(4))?.with_label(name)),
        "cauchy-riemann" => return cauchy_riemann(),
        "macaulay" => return macaulay(),
        "macaulay-variant" => return macaulay_variant(),
        "hidden" => return hidden_conditions(),
        "conformal1" => return conformal_n1(),
        "conformal2" => return conformal_n2(),
        _ => {}
    }
    if let Some(n) = numbered("killing").filter(|&n| (1..=8).contains(&n)) {
        return killing_flat(&FlatMetric::euclidean(n));
    }
    if let Some(n) = numbered("conformal").filter(|&n| (3..=8).contains(&n)) {
        return conformal_killing_flat(&FlatMetric::euclidean(n));
    }
    Err(Error::InvalidArgument(format!(
        "unknown catalog system `{name}`; known: {}",
        NAMES.join(", ")
    )))
}

/// The `n` elations `θ_s = −½x²∂_s + ω_ss xˢ xʳ∂_r`.
pub fn elations(metric: &FlatMetric) -> Vec<PolyVectorField> {
    let n = metric.n();
    let half_sq = metric.square_norm().scale(&Rational::new(BigInt::from(-1), BigInt::from(2)));
    (1..=n)
        .map(|s| {
            let xs = Polynomial::var(n, s).scale(&int(metric.diag(s)));
            PolyVectorField::new(
                (1..=n)
                    .map(|r| {
                        let mut c = xs.mul(&Polynomial::var(n, r));
                        if r == s {
                            c = c.add(&half_sq);
                        }
                        c
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Polynomial solutions of a system up to a degree bound.
#[derive(Clone, Debug)]
pub struct PolynomialSolutions {
    pub dim: usize,
    pub basis: Vec<PolyVectorField>,
    pub degree_bound: usize,
    /// True when the bound provably captures every solution: the equations are
    /// homogeneous in order and the symbol vanishes at level `≤ degree_bound + 1`.
    pub certified: bool,
}

/// Solves the system on polynomials of degree `≤ d` by imposing every
/// equation as a polynomial identity in the unknown coefficients.
pub fn polynomial_solutions(sys: &LinearJetSystem, d: usize) -> Result<PolynomialSolutions> {
    let (n, m) = (sys.n(), sys.m());
    let monos: Vec<MultiIndex> = (0..=d).rev().flat_map(|k| MultiIndex::of_degree(n, k)).collect();
    let mono_pos: std::collections::HashMap<&MultiIndex, usize> =
        monos.iter().enumerate().map(|(i, mu)| (mu, i)).collect();
    let cols = m * monos.len();
    let forms = sys.forms();
    let mut rows = Vec::with_capacity(forms.len() * monos.len());
    for form in &forms {
        // Coefficient of x^β in Σ c ∂^μ ξ^k, as a row over the unknown coefficients.
        let mut block = vec![vec![Rational::zero(); cols]; monos.len()];
        for (c, jet) in form {
            for (ai, alpha) in monos.iter().enumerate() {
                let Some(beta) = alpha.minus(&jet.index) else { continue };
                let falling: u128 = alpha.factorial() / beta.factorial();
                let col = jet.unknown * monos.len() + ai;
                let row = mono_pos[&beta];
                block[row][col] += c * Rational::from_integer(BigInt::from(falling));
            }
        }
        rows.extend(block.into_iter().filter(|r| r.iter().any(|v| !v.is_zero())));
    }
    let mat = RationalMatrix::from_rows(cols, rows)?;
    let kernel = kernel_basis(&mat);
    let basis = (0..kernel.cols())
        .map(|j| {
            PolyVectorField::new(
                (0..m)
                    .map(|k| {
                        monos.iter().enumerate().fold(Polynomial::zero(n), |acc, (ai, alpha)| {
                            let c = kernel.get(k * monos.len() + ai, j);
                            acc.add(&Polynomial::monomial(n, alpha.exponents().to_vec(), c.clone()))
                        })
                    })
                    .collect(),
            )
        })
        .collect::<Vec<_>>();
    let certified = is_order_homogeneous(sys) && vanishing_level(sys, d + 1)?.is_some_and(|l| l <= d + 1);
    Ok(PolynomialSolutions {
        dim: basis.len(),
        basis,
        degree_bound: d,
        certified,
    })
}

/// Every equation involves jets of a single order.
fn is_order_homogeneous(sys: &LinearJetSystem) -> bool {
    sys.forms().iter().all(|f| {
        let first = f.first().map(|(_, j)| j.order());
        f.iter().all(|(_, j)| Some(j.order()) == first)
    })
}

/// First level `≤ limit` at which the symbol vanishes.
pub fn vanishing_level(sys: &LinearJetSystem, limit: usize) -> Result<Option<usize>> {
    let q = sys.order();
    if limit < q {
        return Ok(None);
    }
    let chain = sys.prolongations(limit - q)?;
    Ok(chain.iter().find(|s| s.top_symbol_dim() == 0).map(LinearJetSystem::order))
}

/// Checks that a polynomial field satisfies every equation identically.
pub fn satisfies(sys: &LinearJetSystem, xi: &PolyVectorField) -> bool {
    sys.forms().iter().all(|form| {
        let n = sys.n();
        form.iter()
            .fold(Polynomial::zero(n), |acc, (c, jet)| {
                acc.add(&xi.components[jet.unknown].derivative_multi(&jet.index).scale(c))
            })
            .is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_dimensions() {
        assert_eq!(killing_flat(&FlatMetric::euclidean(3)).unwrap().rank(), 6);
        assert_eq!(killing_flat(&FlatMetric::euclidean(1)).unwrap().rank(), 1);
        assert_eq!(conformal_killing_flat(&FlatMetric::euclidean(3)).unwrap().rank(), 5);
        assert!(conformal_killing_flat(&FlatMetric::euclidean(2)).is_err());
        assert_eq!(conformal_n2().unwrap().rank(), 14);
        assert_eq!(conformal_n2().unwrap().solution_dim(), 6);
        assert_eq!(macaulay().unwrap().solution_dim(), 7);
        for name in NAMES {
            assert!(by_name(name).is_ok(), "{name}");
        }
        assert!(by_name("killing0").is_err());
    }

    #[test]
    fn elation_example() {
        let th = elations(&FlatMetric::euclidean(2));
        assert_eq!(th[0].components[0].to_string(), "1/2*x1^2 - 1/2*x2^2");
        assert_eq!(th[0].components[1].to_string(), "x1*x2");
    }

    #[test]
    fn line_solutions() {
        let s = polynomial_solutions(&conformal_n1().unwrap(), 2).unwrap();
        assert_eq!(s.dim, 3);
        assert!(s.certified);
        assert!(s.basis.iter().all(|b| satisfies(&conformal_n1().unwrap(), b)));
    }
}
