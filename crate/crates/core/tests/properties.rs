//! Randomized properties of the algebra layer and the lattice calculus.

use std::sync::Arc;

use proptest::prelude::*;

use kisinlab::algebra::{FieldCtor, FieldElem, FieldParams, Mat2, Series, Valuation};
use kisinlab::kisin::{iwasawa_normal_form, BasisChange, Params};
use kisinlab::lemmas::decrement_chain;
use kisinlab::moduli::{enumerate_models, valid_a_vectors, DEFAULT_BUDGET};

fn f9() -> Arc<FieldParams> {
    FieldParams::new(3, 2).unwrap()
}

fn params_3_2_4() -> Params {
    Params::new(f9(), 4).unwrap()
}

fn arb_elem(field: Arc<FieldParams>) -> impl Strategy<Value = FieldElem> {
    let q = field.q();
    (0..q).prop_map(move |v| {
        let p = field.p();
        let digits: Vec<u64> = (0..field.r())
            .scan(v, |acc, _| {
                let d = *acc % p;
                *acc /= p;
                Some(d)
            })
            .collect();
        field.elem(&digits)
    })
}

fn arb_series(field: Arc<FieldParams>) -> impl Strategy<Value = Series> {
    let f = Arc::clone(&field);
    prop::collection::vec((-6i64..=8, arb_elem(field)), 0..6)
        .prop_map(move |terms| Series::from_terms(&f, terms))
}

fn arb_mat(field: Arc<FieldParams>) -> impl Strategy<Value = Mat2> {
    let s = || arb_series(Arc::clone(&field));
    (s(), s(), s(), s()).prop_map(|(a, b, c, d)| Mat2::from_rows(a, b, c, d))
}

/// Integral polynomial with constant term zero (so 1 + it is a unit).
fn arb_integral_tail(field: Arc<FieldParams>) -> impl Strategy<Value = Series> {
    let f = Arc::clone(&field);
    prop::collection::vec((1i64..=5, arb_elem(field)), 0..4)
        .prop_map(move |terms| Series::from_terms(&f, terms))
}

/// An integral matrix with constant determinant, as a product of
/// elementary factors: (1, t; 0, 1) (1, 0; s, 1) diag(c, d).
fn arb_unit_matrix(field: Arc<FieldParams>) -> impl Strategy<Value = Mat2> {
    let f = Arc::clone(&field);
    let q = field.q();
    (
        arb_integral_tail(Arc::clone(&field)),
        arb_integral_tail(Arc::clone(&field)),
        1..q,
        1..q,
    )
        .prop_map(move |(t, s, c, d)| {
            let one = Series::one(&f);
            let zero = Series::zero(&f);
            let upper = Mat2::from_rows(one.clone(), t, zero.clone(), one.clone());
            let lower = Mat2::from_rows(one.clone(), zero.clone(), s, one.clone());
            let scale = |v: u64| {
                let digits: Vec<u64> = (0..f.r())
                    .scan(v, |acc, _| {
                        let dd = *acc % f.p();
                        *acc /= f.p();
                        Some(dd)
                    })
                    .collect();
                Series::monomial(&f, f.elem(&digits), 0)
            };
            upper.mul(&lower).mul(&Mat2::diag(scale(c), scale(d)))
        })
}

/// Triangular factor (u^-a, v; 0, u^a) with determinant one.
fn arb_triangular(field: Arc<FieldParams>) -> impl Strategy<Value = (i64, Series, Mat2)> {
    let f = Arc::clone(&field);
    (-2i64..=4, arb_series(field)).prop_map(move |(a, v)| {
        let t = Mat2::from_rows(
            Series::u_pow(&f, -a),
            v.clone(),
            Series::zero(&f),
            Series::u_pow(&f, a),
        );
        (a, v, t)
    })
}

proptest! {
    #[test]
    fn series_ring_axioms(
        f in arb_series(f9()),
        g in arb_series(f9()),
        h in arb_series(f9()),
    ) {
        prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
        prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
        prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
        prop_assert_eq!(f.add(&g), g.add(&f));
        prop_assert_eq!(f.mul(&g), g.mul(&f));
        prop_assert_eq!(f.sub(&f), Series::zero(f.field()));
    }

    #[test]
    fn frobenius_is_ring_homomorphism(
        f in arb_series(f9()),
        g in arb_series(f9()),
    ) {
        prop_assert_eq!(f.add(&g).frobenius(), f.frobenius().add(&g.frobenius()));
        prop_assert_eq!(f.mul(&g).frobenius(), f.frobenius().mul(&g.frobenius()));
        let field = f9();
        prop_assert_eq!(Series::u_pow(&field, 1).frobenius(), Series::u_pow(&field, 3));
    }

    #[test]
    fn frobenius_fixes_constants(c in arb_elem(f9())) {
        let field = f9();
        let s = Series::monomial(&field, c, 0);
        prop_assert_eq!(s.frobenius(), s);
    }

    #[test]
    fn valuation_is_additive(
        f in arb_series(f9()),
        g in arb_series(f9()),
    ) {
        prop_assume!(!f.is_zero() && !g.is_zero());
        let vf = f.valuation().unwrap().finite().unwrap();
        let vg = g.valuation().unwrap().finite().unwrap();
        prop_assert_eq!(f.mul(&g).valuation().unwrap(), Valuation::Finite(vf + vg));
    }

    #[test]
    fn inverse_multiplies_to_one(f in arb_series(f9()), prec in 4i64..=12) {
        prop_assume!(!f.is_zero());
        let inv = f.inverse(prec).unwrap();
        let diff = f.mul(&inv).sub(&Series::one(f.field()));
        // All authoritative coefficients of f * f^{-1} - 1 vanish.
        prop_assert_eq!(diff.terms().count(), 0);
    }

    #[test]
    fn adjugate_and_determinant(
        m in arb_mat(f9()),
        n in arb_mat(f9()),
    ) {
        let d = m.det();
        prop_assert_eq!(m.mul(&m.adjugate()), Mat2::diag(d.clone(), d));
        prop_assert_eq!(m.mul(&n).det(), m.det().mul(&n.det()));
    }

    #[test]
    fn iwasawa_round_trip(
        q in arb_unit_matrix(f9()),
        (a, v, t) in arb_triangular(f9()),
    ) {
        let params = params_3_2_4();
        let b = q.mul(&t);
        let nf = iwasawa_normal_form(&b, params.work_prec()).unwrap();
        prop_assert_eq!(nf.a, a);
        prop_assert_eq!(&nf.v, &v.reduced_below(a).unwrap());
        prop_assert_eq!(nf.unit.mul(&nf.triangular()), b.clone());
        // The reconstructed triangular factor generates the same lattice.
        let r = params.r();
        let b_tuple = BasisChange::new(params.clone(), vec![b.clone(); r]).unwrap();
        let t_tuple = BasisChange::new(params.clone(), vec![nf.triangular(); r]).unwrap();
        prop_assert!(b_tuple.same_lattice(&t_tuple).unwrap());
    }

    #[test]
    fn same_lattice_is_an_equivalence(
        u1 in arb_unit_matrix(f9()),
        u2 in arb_unit_matrix(f9()),
        (_a, _v, t) in arb_triangular(f9()),
    ) {
        let params = params_3_2_4();
        let r = params.r();
        let b1 = BasisChange::new(params.clone(), vec![t.clone(); r]).unwrap();
        let b2 = BasisChange::new(params.clone(), vec![u1.mul(&t); r]).unwrap();
        let b3 = BasisChange::new(params.clone(), vec![u2.mul(&u1).mul(&t); r]).unwrap();
        prop_assert!(b1.same_lattice(&b1).unwrap());
        prop_assert!(b1.same_lattice(&b2).unwrap());
        prop_assert!(b2.same_lattice(&b1).unwrap());
        prop_assert!(b2.same_lattice(&b3).unwrap());
        prop_assert!(b1.same_lattice(&b3).unwrap());
    }

    #[test]
    fn change_basis_composition_and_determinants(
        u1 in arb_unit_matrix(f9()),
        u2 in arb_unit_matrix(f9()),
        (_a1, _v1, t1) in arb_triangular(f9()),
        (_a2, _v2, t2) in arb_triangular(f9()),
    ) {
        let params = params_3_2_4();
        let base = params.base_model();
        let b = BasisChange::new(params.clone(), vec![u1.mul(&t1), u2.mul(&t2)]).unwrap();
        let b2 = BasisChange::new(params.clone(), vec![u2.mul(&t2), u1.mul(&t1)]).unwrap();
        // Composition: applying b then b2 equals applying b2 o b, where
        // (b2 o b)_i = b2_i * b_i.
        let two_step = base.change_basis(&b).unwrap().change_basis(&b2).unwrap();
        let one_step = base.change_basis(&b2.compose(&b).unwrap()).unwrap();
        prop_assert_eq!(two_step, one_step);
        // det A'_i = phi(det B_i) * det A_i * det(B_{i+1})^{-1}, and its
        // valuation stays e for unit-determinant changes of basis.
        let changed = base.change_basis(&b).unwrap();
        for i in 0..params.r() {
            let j = (i + 1) % params.r();
            let lhs = changed.mats()[i].det();
            let det_next_inv = b.mats()[j].det().inverse(params.work_prec()).unwrap();
            let rhs = b.mats()[i]
                .det()
                .frobenius()
                .mul(&base.mats()[i].det())
                .mul(&det_next_inv);
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(lhs.valuation().unwrap(), Valuation::Finite(params.e()));
        }
    }
}

#[test]
fn decrement_chain_edges_exist_in_graph() {
    // Every shift edge traced by a decrement chain is present in the
    // component graph.
    let params = Params::new(FieldParams::new(3, 2).unwrap(), 8).unwrap();
    let ms = enumerate_models(&params, params.e(), DEFAULT_BUDGET).unwrap();
    let graph = kisinlab::connect::build_component_graph(&ms).unwrap();
    let has_edge = |from: &[i64], to: &[i64]| {
        graph.edges().iter().any(|e| {
            let a = ms.point(e.from).a().coords();
            let b = ms.point(e.to).a().coords();
            matches!(e.kind, kisinlab::connect::MoveKind::Shift { .. })
                && ((a == from && b == to) || (a == to && b == from))
        })
    };
    for a in valid_a_vectors(&params) {
        if !a.is_interior(&params) {
            continue;
        }
        let chain = decrement_chain(&a, &params).unwrap();
        let mut cur = a.clone();
        for j in chain {
            let next = cur.decremented(j - 1);
            assert!(
                has_edge(cur.coords(), next.coords()),
                "missing edge {:?} -- {:?}",
                cur.coords(),
                next.coords()
            );
            cur = next;
        }
        assert!(cur.coords().iter().all(|&x| x == 1));
    }
}
