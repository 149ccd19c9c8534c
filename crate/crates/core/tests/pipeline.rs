//! End-to-end exercise of the public API: build an algebra from matrices,
//! run the Hopf suite, assemble a pair with samples, push sections through
//! the pullback calculus, and finish with a subpair verdict.

use std::collections::BTreeMap;
use std::sync::Arc;

use sgk_core::envelope::{Enveloping, ExtElement, TensorElement, UeaElement};
use sgk_core::exactnum::Scalar;
use sgk_core::groupmodel::{FunctionExpr, GroupModel, MaskEntry, SampleSet};
use sgk_core::homogeneous::{coset_membership, split_homogeneous_check, HcSubpair, SplitHomogeneous};
use sgk_core::liesuper::{elementary, LieSuperAlgebra, Parity};
use sgk_core::linalg::Mat;
use sgk_core::supergroup::{
    eps_star, field_apply, group_axiom_check, mu_star, translate, Alpha, HcPair, Section, Side,
};

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

#[test]
fn matrices_to_split_verdict() {
    // a 2|1 block algebra with odd directions in the bottom row
    let alg = LieSuperAlgebra::from_matrix_basis(
        vec![
            "a11".into(),
            "a12".into(),
            "a21".into(),
            "a22".into(),
            "d".into(),
            "o1".into(),
            "o2".into(),
        ],
        vec![
            (Parity::Even, elementary(3, 0, 0)),
            (Parity::Even, elementary(3, 0, 1)),
            (Parity::Even, elementary(3, 1, 0)),
            (Parity::Even, elementary(3, 1, 1)),
            (Parity::Even, elementary(3, 2, 2)),
            (Parity::Odd, elementary(3, 2, 0)),
            (Parity::Odd, elementary(3, 2, 1)),
        ],
        2,
        1,
    )
    .unwrap();
    assert!(alg.check_jacobi().passed());

    let env = Enveloping::new(Arc::new(alg.clone()));
    assert!(env.hopf_axiom_check(2).all_pass());
    // gamma is multiplicative here (the odd brackets vanish)
    assert!(env.gamma_algebra_morphism_witness().is_none());
    // and a PBW factorization round-trips
    let o1 = UeaElement::letter(env.algebra(), 5);
    let o2 = UeaElement::letter(env.algebra(), 6);
    let elem = env.mul(&o1, &o2).add(&UeaElement::scalar(s(3)));
    assert_eq!(env.pbw_reconstruct(&env.pbw_factorize(&elem)), elem);
    // the coproduct of the odd pair matches the wedge coproduct through gamma
    let w = ExtElement::from_term(vec![5, 6], Scalar::one());
    let gw = env.gamma(&w);
    assert_eq!(env.mul(&o1, &o2), gw, "split case: gamma of a wedge is the product");

    // group model on the matching block pattern
    let f = MaskEntry::Free;
    let z = MaskEntry::Zero;
    let pattern = vec![vec![f, f, z], vec![f, f, z], vec![z, z, f]];
    let model = GroupModel::new(3, pattern.clone(), Arc::new(alg)).unwrap();
    let pair = HcPair::new(model, Alpha::Conjugation);
    let pt = |rows: [[i64; 3]; 3]| {
        pair.model()
            .point(
                Mat::from_rows(
                    rows.iter()
                        .map(|r| r.iter().map(|&v| s(v)).collect())
                        .collect(),
                )
                .unwrap(),
            )
            .unwrap()
    };
    let samples = SampleSet::generate(
        pair.model(),
        &[
            pt([[1, 1, 0], [0, 1, 0], [0, 0, 2]]),
            pt([[0, 1, 0], [1, 0, 0], [0, 0, 1]]),
        ],
        1,
    )
    .unwrap();
    assert!(pair.validate(&samples).all_pass());
    // degree 1 keeps this test fast; the degree-2 grid runs in the
    // acceptance suite on the smaller pair
    assert!(group_axiom_check(&pair, &samples, 1).unwrap().all_pass());

    // a degree-1 section, its field image and translations
    let f1 = Section::indicator(Arc::clone(&pair), vec![5], FunctionExpr::coord(2, 2)).unwrap();
    assert_eq!(eps_star(&f1).unwrap(), Scalar::zero());
    let g0 = &samples.points[1];
    let moved = translate(Side::Right, g0, &f1).unwrap();
    let back = translate(
        Side::Right,
        &pair.model().group_inv(g0).unwrap(),
        &moved,
    )
    .unwrap();
    assert!(back.eq_on(&f1, &samples).unwrap());

    let dim = pair.dim();
    let mut x = vec![Scalar::zero(); dim];
    x[6] = Scalar::one();
    let df = field_apply(&pair, &x, &f1).unwrap();
    // the field of an odd direction turns a degree-1 section into degree 0 + 2
    assert!(df.table().keys().all(|w| w.len() != 1));

    // evaluate the multiplication pullback at a mixed tensor
    let m = mu_star(&f1);
    let t = TensorElement::pure(
        vec![
            sgk_core::envelope::PbwMonomial { even: vec![], odd: vec![5] },
            sgk_core::envelope::PbwMonomial::unit(),
        ],
        Scalar::one(),
    );
    let g = &samples.points[1];
    let h = &samples.points[2];
    let gh = pair.model().group_mul(g, h).unwrap();
    assert_eq!(
        m.eval(&t, &[g.clone(), h.clone()]).unwrap(),
        f1.eval(&UeaElement::letter(pair.algebra(), 5), &gh).unwrap()
    );

    // subgroup: upper-triangular block with one odd direction; split verdict
    let sub_pattern = vec![vec![f, f, z], vec![z, f, z], vec![z, z, f]];
    let mut span = Vec::new();
    for name in ["a11", "a12", "a22", "d", "o2"] {
        let mut v = vec![Scalar::zero(); dim];
        v[pair.algebra().basis().index_of(name).unwrap()] = Scalar::one();
        span.push(v);
    }
    let sub = HcSubpair::build(Arc::clone(&pair), sub_pattern, span).unwrap();
    let hs = SampleSet::generate(
        sub.sub_pair().model(),
        &[pt([[2, 0, 0], [0, 1, 0], [0, 0, 1]])],
        1,
    )
    .unwrap();
    match split_homogeneous_check(&sub, &hs).unwrap() {
        SplitHomogeneous::Split { quotient_dim, psi } => {
            assert_eq!(quotient_dim, 1);
            assert!(psi.homomorphism_check(&sub).unwrap().all_pass());
        }
        other => panic!("expected split, got {other:?}"),
    }
    // constants are coset members; a section touching the odd subalgebra is not
    let member = Section::constant(Arc::clone(&pair), s(5));
    assert!(coset_membership(&sub, &member, &samples, &hs).unwrap().is_member());
    let mut table = BTreeMap::new();
    table.insert(vec![6usize], FunctionExpr::one());
    let non_member = Section::new(Arc::clone(&pair), table).unwrap();
    assert!(!coset_membership(&sub, &non_member, &samples, &hs).unwrap().is_member());
}
