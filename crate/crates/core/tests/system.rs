use num_bigint::BigInt;
use proptest::prelude::*;
use spencer_core::catalog::{by_name, hidden_conditions, killing_flat, macaulay, FlatMetric};
use spencer_core::exactalg::{Rational, RationalMatrix};
use spencer_core::jetspace::{Jet, JetFrame, MultiIndex};
use spencer_core::system::{LinearForm, LinearJetSystem, StepKind};
use spencer_core::Error;

fn q(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn y(n: usize, vars: &[usize]) -> Jet {
    Jet::new(0, MultiIndex::from_variables(n, vars).unwrap())
}

fn form(n: usize, terms: &[(i64, &[usize])]) -> LinearForm {
    terms.iter().map(|&(c, v)| (q(c), y(n, v))).collect()
}

/// Random systems with `n, m, q ≤ 2`, at most three equations and small coefficients.
fn small_system() -> impl Strategy<Value = LinearJetSystem> {
    (1usize..=2, 1usize..=2, 1usize..=2).prop_flat_map(|(n, m, order)| {
        let len = JetFrame::new(n, m, order).unwrap().len();
        proptest::collection::vec(proptest::collection::vec(-2i64..=2, len), 0..=3).prop_map(move |rows| {
            let frame = JetFrame::new(n, m, order).unwrap();
            let mat = RationalMatrix::from_rows(len, rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect())
                .unwrap();
            LinearJetSystem::from_matrix(frame, &mat, "random").unwrap()
        })
    })
}

#[test]
fn construction_reduces_and_counts() {
    let m = macaulay().unwrap();
    assert_eq!((m.rank(), m.solution_dim()), (3, 7));
    let h = hidden_conditions().unwrap();
    assert_eq!(h.solution_dim(), 4);
    let free = LinearJetSystem::new(JetFrame::new(1, 1, 1).unwrap(), &[], "free").unwrap();
    assert_eq!(free.solution_dim(), 2);
    // Duplicated and zero equations are dropped.
    let f = JetFrame::new(2, 1, 1).unwrap();
    let dup = LinearJetSystem::new(f, &[form(2, &[(1, &[1])]), form(2, &[(2, &[1])]), vec![]], "dup").unwrap();
    assert_eq!(dup.rank(), 1);
}

#[test]
fn macaulay_first_prolongation_adds_the_nine_equations() {
    let r3 = macaulay().unwrap().prolong(1).unwrap();
    assert_eq!(r3.rows_of_degree(3), 9);
    assert_eq!(r3.solution_dim(), 8);
    let mut eqs = vec![
        form(3, &[(1, &[3, 3])]),
        form(3, &[(1, &[2, 3]), (-1, &[1, 1])]),
        form(3, &[(1, &[2, 2])]),
    ];
    for t in [&[3, 3, 3][..], &[2, 3, 3], &[2, 2, 3], &[2, 2, 2], &[1, 3, 3], &[1, 2, 2], &[1, 1, 3], &[1, 1, 2]] {
        eqs.push(form(3, &[(1, t)]));
    }
    eqs.push(form(3, &[(1, &[1, 2, 3]), (-1, &[1, 1, 1])]));
    let listed = LinearJetSystem::new(JetFrame::new(3, 1, 3).unwrap(), &eqs, "macaulay").unwrap();
    assert_eq!(r3.equations(), listed.equations());
}

#[test]
fn macaulay_second_prolongation_kills_fourth_order() {
    let r4 = macaulay().unwrap().prolong(2).unwrap();
    assert_eq!(r4.rows_of_degree(4), 15);
    assert_eq!(r4.symbol_at(4).unwrap().dim(), 0);
    assert_eq!(r4.solution_dim(), 8);
}

#[test]
fn parametric_jets_of_catalog_systems() {
    let idx = |s: &LinearJetSystem| {
        let mut v: Vec<Vec<usize>> = s.parametric_jets().into_iter().map(|j| j.index.variables()).collect();
        v.sort();
        v
    };
    let h = hidden_conditions().unwrap();
    assert_eq!(idx(&h), vec![vec![], vec![1], vec![1, 1], vec![2]]);
    let h3 = h.prolong(1).unwrap();
    assert_eq!(idx(&h3), vec![vec![], vec![1], vec![1, 1], vec![1, 1, 1]]);
    let m = macaulay().unwrap();
    assert_eq!(idx(&m), vec![vec![], vec![1], vec![1, 1], vec![1, 2], vec![1, 3], vec![2], vec![3]]);
}

#[test]
fn projection_cascade_of_the_hidden_system() {
    let h = hidden_conditions().unwrap();
    let zero = h.prolong(2).unwrap().project(0).unwrap();
    assert_eq!(zero.rank(), 1, "y = 0 appears");
    assert_eq!(zero.equations().row(0), &[q(1)][..]);
    assert!(h.prolong(1).unwrap().project(5).is_err());
    let h2 = h.prolong(4).unwrap().project(2).unwrap();
    assert_eq!(h2.solution_dim(), 0);
}

#[test]
fn symbols_of_killing_and_conformal() {
    let k = killing_flat(&FlatMetric::euclidean(3)).unwrap();
    assert_eq!(k.symbol_at(1).unwrap().dim(), 3);
    assert_eq!(k.symbol_at(2).unwrap().dim(), 0);
    assert!(k.symbol_at(0).is_err());
    let c = by_name("conformal3").unwrap();
    assert_eq!(c.symbol_at(3).unwrap().dim(), 0);
    for level in 1..=3 {
        let g = c.symbol_at(level).unwrap();
        assert!(g.annihilator.mul(&g.basis).map_or(g.dim() == 0, |p| p.is_zero()));
    }
}

#[test]
fn formal_integrability_verdicts() {
    let k = killing_flat(&FlatMetric::euclidean(3)).unwrap();
    assert!(k.is_formally_integrable(4).unwrap().integrable);
    let h = hidden_conditions().unwrap();
    let v = h.is_formally_integrable(4).unwrap();
    assert!(!v.integrable);
    assert_eq!(v.first_failure, Some(2));
    assert!(matches!(h.is_formally_integrable(0), Err(Error::InvalidArgument(_))));
}

#[test]
fn completion_of_the_hidden_system_reaches_zero() {
    let t = hidden_conditions().unwrap().involutive_completion(12, 4).unwrap();
    assert!(t.completed);
    assert_eq!(t.final_system.solution_dim(), 0);
    assert!(t.final_system.order() <= 2);
    assert!(t.projections > 0);
}

#[test]
fn completion_of_macaulay_stops_at_order_four() {
    let t = macaulay().unwrap().involutive_completion(6, 4).unwrap();
    assert!(t.completed);
    assert_eq!(t.final_system.order(), 4);
    assert_eq!(t.final_system.top_symbol_dim(), 0);
    assert_eq!(t.projections, 0);
    assert!(t.steps.iter().all(|s| s.kind == StepKind::Prolong));
}

#[test]
fn completion_of_involutive_input_is_identity() {
    let cr = by_name("cauchy-riemann").unwrap();
    let t = cr.involutive_completion(3, 4).unwrap();
    assert!(t.completed && t.steps.is_empty());
    assert_eq!(t.final_system, cr);
}

#[test]
fn catalog_completions_stabilize_within_six_steps() {
    for name in ["killing2", "killing3", "conformal1", "conformal2", "conformal3", "cauchy-riemann", "macaulay", "macaulay-variant", "hidden"] {
        let t = by_name(name).unwrap().involutive_completion(6, 4).unwrap();
        assert!(t.completed, "{name} did not complete");
    }
}

#[test]
fn unimodular_change_preserves_macaulay_dimensions() {
    let m = macaulay().unwrap();
    let a = RationalMatrix::from_i64_rows(&[vec![1, 2, -1], vec![0, 1, 3], vec![0, 0, 1]]);
    let t = m.change_coordinates(&a).unwrap();
    let dims = |s: &LinearJetSystem| (0..3).map(|r| s.prolong(r).unwrap().solution_dim()).collect::<Vec<_>>();
    assert_eq!(dims(&m), vec![7, 8, 8]);
    assert_eq!(dims(&t), vec![7, 8, 8]);
    assert!(matches!(m.change_coordinates(&RationalMatrix::identity(2)), Err(Error::Shape { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prolongation_composes(s in small_system(), a in 0usize..=2, b in 0usize..=2) {
        prop_assert_eq!(s.prolong(a).unwrap().prolong(b).unwrap(), s.prolong(a + b).unwrap());
    }

    #[test]
    fn symbol_is_the_kernel_of_projection(s in small_system(), r in 1usize..=2) {
        let upper = s.prolong(r).unwrap();
        let projected = upper.project(upper.order() - 1).unwrap();
        prop_assert_eq!(upper.top_symbol().unwrap().dim(), upper.solution_dim() - projected.solution_dim());
        prop_assert!(projected.solution_dim() <= s.prolong(r - 1).unwrap().solution_dim());
    }

    #[test]
    fn coordinate_changes_preserve_dimensions(s in small_system(), t in -3i64..=3) {
        let n = s.n();
        let a = if n == 1 { RationalMatrix::from_i64_rows(&[vec![-1]]) } else { RationalMatrix::from_i64_rows(&[vec![1, t], vec![0, 1]]) };
        let c = s.change_coordinates(&a).unwrap();
        for r in 0..=2 {
            let (p, pc) = (s.prolong(r).unwrap(), c.prolong(r).unwrap());
            prop_assert_eq!(p.solution_dim(), pc.solution_dim());
            prop_assert_eq!(p.top_symbol_dim(), pc.top_symbol_dim());
        }
    }
}
