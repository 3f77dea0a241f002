use std::sync::atomic::AtomicBool;

use num_bigint::BigInt;
use num_traits::Zero;
use spencer_core::catalog::{by_name, conformal_n1, conformal_n2, hidden_conditions, killing_flat, macaulay, FlatMetric};
use spencer_core::exactalg::{rref_natural, RankMode, Rational, RationalMatrix};
use spencer_core::jetspace::{Jet, JetFrame, MultiIndex};
use spencer_core::sequence::{
    cc_at_order, cc_by_substitution, cc_order_bound, cc_space, check_jet_exactness, check_symbol_exactness,
    euler_poincare, fundamental_diagram, hybrid_bundles, hybrid_first_slot, janet_tabular, prolonged_matrix, resolution,
    resolve_operator, spencer_bundles, OperatorHandle, ResolutionOptions,
};
use spencer_core::exactalg::QField;
use spencer_core::Error;

fn q(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// A row over `J_order` of `m` unknowns in `n` variables, from `(coefficient, unknown, variables)`.
fn row(n: usize, m: usize, order: usize, terms: &[(i64, usize, &[usize])]) -> Vec<Rational> {
    let f = JetFrame::new(n, m, order).unwrap();
    let mut v = vec![Rational::zero(); f.len()];
    for &(c, k, vars) in terms {
        v[f.position_of(&Jet::new(k, MultiIndex::from_variables(n, vars).unwrap())).unwrap()] += q(c);
    }
    v
}

fn same_rows(a: &RationalMatrix, b: &RationalMatrix) -> bool {
    rref_natural(a).0 == rref_natural(b).0
}

fn exact() -> ResolutionOptions {
    ResolutionOptions { mode: RankMode::Exact, ..ResolutionOptions::default() }
}

/// Minimal order at which the operator of `name` has a compatibility condition.
fn first_cc_order(name: &str, limit: usize) -> Option<usize> {
    let op = OperatorHandle::from_system(&by_name(name).unwrap());
    (1..=limit).find(|&r| cc_at_order(&op, r).unwrap().rows() > 0)
}

#[test]
fn hidden_operator_condition_at_order_two() {
    let op = OperatorHandle::from_system(&hidden_conditions().unwrap());
    assert_eq!(cc_at_order(&op, 0).unwrap().rows(), 0);
    assert_eq!(cc_at_order(&op, 1).unwrap().rows(), 0);
    let c = cc_at_order(&op, 2).unwrap();
    let want = RationalMatrix::from_rows(12, vec![row(2, 2, 2, &[(1, 0, &[1, 2]), (-1, 0, &[]), (-1, 1, &[2, 2])])]).unwrap();
    assert!(same_rows(&c, &want));
    let d1 = OperatorHandle::from_matrix(2, 2, 2, &c).unwrap();
    assert!(d1.compose(&op).unwrap().is_zero());
}

#[test]
fn hidden_operator_fourth_order_pair() {
    let op = OperatorHandle::from_system(&hidden_conditions().unwrap());
    let (left, uv) = cc_by_substitution(&op, 4).unwrap().unwrap();
    assert_eq!(left.order(), 2);
    assert_eq!(uv.order(), 4);
    assert_eq!(uv.target_dim(), 2);
    assert!(uv.compose(&op).unwrap().is_zero());
    let u = row(2, 2, 4, &[(1, 0, &[1, 1, 2, 2]), (-1, 1, &[1, 2, 2, 2]), (-1, 1, &[2, 2]), (-1, 0, &[])]);
    let v = row(2, 2, 4, &[(1, 0, &[1, 1, 1, 2]), (-1, 0, &[1, 1]), (-1, 1, &[1, 1, 2, 2])]);
    assert_eq!(uv.rows(), &[u, v][..]);
    // Both lie in the full space of fourth-order conditions.
    let space = cc_space(&op, 4).unwrap();
    let stacked = space.vstack(&uv.to_matrix()).unwrap();
    assert!(same_rows(&stacked, &space));
}

#[test]
fn order_bound_predicts_first_conditions() {
    let cases = [("killing2", 2), ("killing3", 2), ("killing4", 2), ("conformal3", 3), ("conformal4", 2), ("macaulay", 2)];
    for (name, want) in cases {
        let sys = by_name(name).unwrap();
        assert_eq!(cc_order_bound(&sys, 4, 4).unwrap(), Some(want), "{name}");
        assert_eq!(first_cc_order(name, 4), Some(want), "{name}");
    }
    let h = hidden_conditions().unwrap();
    assert!(matches!(cc_order_bound(&h, 4, 4), Err(Error::NotFormallyIntegrable { .. })));
}

#[test]
fn conditions_annihilate_the_operator() {
    for name in ["killing3", "conformal3", "macaulay", "hidden"] {
        let op = OperatorHandle::from_system(&by_name(name).unwrap());
        for r in 1..=3 {
            let c = cc_at_order(&op, r).unwrap();
            if c.rows() == 0 {
                continue;
            }
            let m = prolonged_matrix(&QField, &op, r).unwrap();
            assert!(c.mul(&m).unwrap().is_zero(), "{name} r={r}");
            assert!(OperatorHandle::from_matrix(op.n(), op.target_dim(), r, &c).unwrap().compose(&op).unwrap().is_zero());
        }
    }
}

#[test]
fn exact_and_modular_resolutions_agree() {
    for name in ["killing3", "conformal3", "macaulay", "killing2"] {
        let sys = by_name(name).unwrap();
        let a = resolution(&sys, &exact(), None).unwrap();
        let b = resolution(&sys, &ResolutionOptions::default(), None).unwrap();
        assert_eq!((a.bundles.clone(), a.orders.clone()), (b.bundles.clone(), b.orders.clone()), "{name}");
        assert_eq!(a.field, "Q");
        assert!(b.field.starts_with("F_p"), "{}", b.field);
        if a.complete {
            assert_eq!(a.euler_poincare, 0, "{name}");
        }
    }
}

#[test]
fn known_resolutions() {
    let k4 = killing_flat(&FlatMetric::minkowski(4)).unwrap();
    let rep = resolution(&k4, &ResolutionOptions::default(), None).unwrap();
    assert_eq!((rep.bundles.clone(), rep.orders.clone()), (vec![4, 10, 20, 20, 6], vec![1, 2, 1, 1]));
    assert_eq!(rep.euler_poincare, 0);
    let c3 = by_name("conformal3").unwrap();
    let rep = resolution(&c3, &ResolutionOptions::default(), None).unwrap();
    assert_eq!((rep.bundles, rep.orders), (vec![3, 5, 5, 3], vec![1, 3, 1]));
    let m = macaulay().unwrap();
    let rep = resolution(&m, &ResolutionOptions::default(), None).unwrap();
    assert_eq!((rep.bundles, rep.orders), (vec![1, 3, 3, 1], vec![2, 2, 2]));
}

#[test]
fn stage_reports_track_integrability() {
    let rep = resolution(&hidden_conditions().unwrap(), &exact(), None).unwrap();
    assert_eq!(rep.stages[0].formally_integrable, Some(false));
    assert_eq!(rep.stages[0].generators_by_order.first(), Some(&(2, 1)));
    let rep = resolution(&by_name("killing3").unwrap(), &exact(), None).unwrap();
    assert_eq!(rep.stages[0].formally_integrable, Some(true));
}

#[test]
fn cancellation_and_size_cap() {
    let sys = by_name("conformal4").unwrap();
    let stop = AtomicBool::new(true);
    assert_eq!(resolution(&sys, &ResolutionOptions::default(), Some(&stop)), Err(Error::Cancelled));
    let tiny = ResolutionOptions { max_cells: 1_000, ..ResolutionOptions::default() };
    let rep = resolution(&sys, &tiny, None).unwrap();
    assert!(rep.stages.iter().any(|s| s.truncated));
    assert!(!rep.complete);
}

#[test]
fn euler_poincare_convention() {
    assert_eq!(euler_poincare(&[1, 12, 21, 46, 72, 48, 12]), 0);
    assert_eq!(euler_poincare(&[1, 27, 60, 46, 12]), 0);
    // A zero operator of order 1 from a line bundle: −dim E + dim F₀.
    let zero = OperatorHandle::from_rows(2, 1, 1, vec![vec![Rational::zero(); 3]]).unwrap();
    let rep = resolve_operator(&zero, &exact(), None).unwrap();
    assert_eq!(rep.bundles[..2], [1, 1]);
    assert_eq!(euler_poincare(&rep.bundles[..2]), 0);
}

#[test]
fn janet_tabulars() {
    let rows = |t: &spencer_core::sequence::JanetTabular| t.groups.iter().map(|g| g.rows).collect::<Vec<_>>();
    let r4 = macaulay().unwrap().prolong(2).unwrap();
    let t = janet_tabular(&r4, 4, 0, 8).unwrap();
    assert_eq!(rows(&t), vec![1, 4, 10, 9, 3]);
    let classes: Vec<Option<usize>> = t.groups.iter().map(|g| g.class).collect();
    assert_eq!(classes, vec![Some(3), Some(2), Some(1), None, None]);
    assert_eq!(t.bundles[1..], [60, 46, 12]);
    let t2 = janet_tabular(&conformal_n2().unwrap(), 4, 0, 8).unwrap();
    assert_eq!(rows(&t2), vec![2, 6, 4, 2]);
    assert_eq!(t2.bundles[1..], [18, 6]);
    let t3 = janet_tabular(&by_name("conformal3").unwrap().prolong(2).unwrap(), 4, 0, 8).unwrap();
    assert_eq!(rows(&t3), vec![3, 9, 18, 15, 5]);
    assert_eq!(t3.bundles[1..], [105, 78, 20]);
    let k = by_name("killing3").unwrap();
    assert!(matches!(janet_tabular(&k, 4, 0, 8), Err(Error::NotInvolutive(_))));
}

#[test]
fn spencer_and_hybrid_rows() {
    let r4 = macaulay().unwrap().prolong(2).unwrap();
    assert_eq!(spencer_bundles(&r4).unwrap(), vec![8, 24, 24, 8]);
    let c3 = by_name("conformal3").unwrap().prolong(2).unwrap();
    assert_eq!(spencer_bundles(&c3).unwrap(), vec![10, 30, 30, 10]);
    assert_eq!(spencer_bundles(&conformal_n1().unwrap()).unwrap(), vec![3, 3]);
    // With a vanishing symbol the row is C(n, r)·dim R_q.
    for sys in [&r4, &c3] {
        let binom = |n: usize, r: usize| (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1));
        let direct: Vec<usize> = (0..=sys.n()).map(|r| binom(sys.n(), r) * sys.solution_dim()).collect();
        assert_eq!(spencer_bundles(sys).unwrap(), direct);
    }
    assert_eq!(hybrid_bundles(3, 1, 4).unwrap(), vec![35, 84, 70, 20]);
    assert_eq!(hybrid_bundles(3, 3, 3).unwrap(), vec![60, 135, 108, 30]);
    assert_eq!(hybrid_bundles(1, 1, 3).unwrap(), vec![4, 3]);
    let slot = hybrid_first_slot(3, 1, 4).unwrap();
    assert_eq!((slot.jet_dim, slot.first_jets_dim, slot.cokernel_dim), (56, 140, 84));
}

#[test]
fn fundamental_diagrams() {
    let d2 = fundamental_diagram(&conformal_n2().unwrap(), 4, 0, 8).unwrap();
    assert_eq!((d2.spencer, d2.hybrid, d2.janet), (vec![6, 12, 6], vec![20, 30, 12], vec![14, 18, 6]));
    let d3 = fundamental_diagram(&by_name("conformal3").unwrap().prolong(2).unwrap(), 4, 0, 8).unwrap();
    assert_eq!(
        (d3.spencer, d3.hybrid, d3.janet),
        (vec![10, 30, 30, 10], vec![60, 135, 108, 30], vec![50, 105, 78, 20])
    );
    let dm = fundamental_diagram(&macaulay().unwrap().prolong(2).unwrap(), 4, 0, 8).unwrap();
    assert_eq!((dm.spencer.clone(), dm.hybrid.clone(), dm.janet.clone()), (vec![8, 24, 24, 8], vec![35, 84, 70, 20], vec![27, 60, 46, 12]));
    assert_eq!(dm.janet_with_source(), vec![1, 27, 60, 46, 12]);
    let d1 = fundamental_diagram(&conformal_n1().unwrap(), 4, 0, 8).unwrap();
    assert_eq!(d1.janet_with_source(), vec![1, 1, 0]);
}

#[test]
fn diagram_preconditions() {
    let h = hidden_conditions().unwrap();
    assert!(matches!(fundamental_diagram(&h, 4, 0, 8), Err(Error::NotFormallyIntegrable { .. })));
    let k = by_name("killing3").unwrap();
    assert!(matches!(fundamental_diagram(&k, 4, 0, 8), Err(Error::NotInvolutive(_))));
}

#[test]
fn columns_of_every_involutive_catalog_system() {
    for (name, r) in [("cauchy-riemann", 0), ("conformal1", 0), ("conformal2", 0), ("killing2", 1), ("killing3", 1), ("conformal3", 2), ("macaulay", 2)] {
        let sys = by_name(name).unwrap().prolong(r).unwrap();
        let d = fundamental_diagram(&sys, 4, 0, 16).unwrap();
        for i in 0..d.janet.len() {
            assert_eq!(d.janet[i], d.hybrid[i] - d.spencer[i], "{name} column {i}");
        }
        assert_eq!(d.janet, d.tabular.bundles, "{name}");
    }
}

#[test]
fn jet_and_symbol_exactness_of_the_hidden_sequences() {
    let op = OperatorHandle::from_system(&hidden_conditions().unwrap());
    let c = OperatorHandle::from_matrix(2, 2, 2, &cc_at_order(&op, 2).unwrap()).unwrap();
    for r in 0..=3usize {
        let rep = check_jet_exactness(&[op.clone(), c.clone()], r, RankMode::Exact).unwrap();
        assert_eq!(rep.alternating_sum, 0);
        let formula = 4 - ((r + 5) * (r + 6) / 2) as i64 + ((r + 3) * (r + 4)) as i64 - ((r + 1) * (r + 2) / 2) as i64;
        assert_eq!(formula, 0);
        assert_eq!(rep.dims, vec![(r + 5) * (r + 6) / 2, (r + 3) * (r + 4), (r + 1) * (r + 2) / 2]);
        assert!(rep.exact && rep.is_complex);
        assert_eq!(rep.kernel_dim, 4);
    }
    let sym = check_symbol_exactness(&[op.clone(), c.clone()], 0, RankMode::Exact).unwrap();
    assert_eq!(sym.alternating_sum, 1);
    assert!(!sym.exact);
    let (_, uv) = cc_by_substitution(&op, 4).unwrap().unwrap();
    let w = OperatorHandle::from_rows(2, 2, 2, vec![row(2, 2, 2, &[(1, 1, &[1, 2]), (1, 1, &[]), (-1, 0, &[1, 1])])]).unwrap();
    assert!(w.compose(&uv).unwrap().is_zero());
    let long = check_jet_exactness(&[op.clone(), uv, w], 0, RankMode::Exact).unwrap();
    assert_eq!(long.levels, vec![8, 6, 2, 0]);
    assert_eq!(long.dims, vec![45, 56, 12, 1]);
    assert_eq!(long.alternating_sum, 4);
    let modular = check_jet_exactness(&[op, c.clone()], 2, RankMode::default()).unwrap();
    assert_eq!(modular.alternating_sum, 0);
    assert!(matches!(check_jet_exactness(&[], 0, RankMode::Exact), Err(Error::InvalidArgument(_))));
    assert!(matches!(check_jet_exactness(&[c.clone(), c], 0, RankMode::Exact), Err(Error::Shape { .. })));
}
