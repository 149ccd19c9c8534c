//! Shipped example pairs: gl(1|1) on the diagonal torus, purely odd abelian
//! groups, the full even GL(2), and the 3x3 block pair realizing the
//! projective superspace quotient with its parabolic and torus subgroups.

use std::sync::Arc;

use crate::exactnum::Scalar;
use crate::groupmodel::{GroupModel, GroupPoint, MaskEntry, SampleSet};
use crate::homogeneous::HcSubpair;
use crate::liesuper::{abelian_odd, elementary, gl11, gl_super, LieSuperAlgebra, Parity};
use crate::linalg::Mat;
use crate::supergroup::{Alpha, HcPair};

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

/// gl(1|1) over the diagonal torus of GL(2).
pub fn gl11_pair() -> Arc<HcPair> {
    let pattern = vec![
        vec![MaskEntry::Free, MaskEntry::Zero],
        vec![MaskEntry::Zero, MaskEntry::Free],
    ];
    let model = GroupModel::new(2, pattern, Arc::new(gl11())).expect("gl(1|1) model");
    HcPair::new(model, Alpha::Conjugation)
}

pub fn gl11_samples(pair: &Arc<HcPair>) -> SampleSet {
    let m = pair.model();
    let d = |a: Scalar, b: Scalar| {
        let mut mm = Mat::zeros(2, 2);
        mm[(0, 0)] = a;
        mm[(1, 1)] = b;
        m.point(mm).expect("diagonal point")
    };
    SampleSet::generate(
        m,
        &[
            d(s(2), s(1)),
            d(s(1), s(3)),
            d(Scalar::from_ratio(1, 2), s(1)),
        ],
        1,
    )
    .expect("closure")
}

/// Purely odd abelian pair C^{0|n}: trivial reduced group inside GL(1+n).
pub fn abelian_pair(n: usize) -> Arc<HcPair> {
    let alg = abelian_odd(n);
    let model = GroupModel::new(n + 1, GroupModel::identity_pattern(n + 1), Arc::new(alg))
        .expect("trivial model");
    HcPair::new(model, Alpha::Conjugation)
}

pub fn abelian_samples(pair: &Arc<HcPair>) -> SampleSet {
    SampleSet::from_points(vec![pair.model().identity()])
}

/// Classical GL(2) carrying the all-even gl(2).
pub fn gl2_pair() -> Arc<HcPair> {
    let model = GroupModel::new(2, GroupModel::full_pattern(2), Arc::new(gl_super(2, 0)))
        .expect("gl(2) model");
    HcPair::new(model, Alpha::Conjugation)
}

/// The block group of the projective-superspace example: invertible
/// (2+1)-blocks with odd directions at entries (3,1) and (3,2).
pub fn gprime_algebra() -> LieSuperAlgebra {
    LieSuperAlgebra::from_matrix_basis(
        vec![
            "e11".into(),
            "e12".into(),
            "e21".into(),
            "e22".into(),
            "e33".into(),
            "q31".into(),
            "q32".into(),
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
    .expect("block algebra closes")
}

pub fn gprime_pair() -> Arc<HcPair> {
    let f = MaskEntry::Free;
    let z = MaskEntry::Zero;
    let pattern = vec![vec![f, f, z], vec![f, f, z], vec![z, z, f]];
    let model = GroupModel::new(3, pattern, Arc::new(gprime_algebra())).expect("block model");
    HcPair::new(model, Alpha::Conjugation)
}

pub fn gprime_point(pair: &Arc<HcPair>, rows: [[i64; 3]; 3]) -> GroupPoint {
    let m = Mat::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| s(v)).collect())
            .collect(),
    )
    .expect("3x3");
    pair.model().point(m).expect("pattern point")
}

pub fn gprime_samples(pair: &Arc<HcPair>) -> SampleSet {
    SampleSet::generate(
        pair.model(),
        &[
            gprime_point(pair, [[1, 1, 0], [0, 1, 0], [0, 0, 2]]),
            gprime_point(pair, [[2, 0, 0], [1, 1, 0], [0, 0, 1]]),
            gprime_point(pair, [[3, 0, 0], [0, 1, 0], [0, 0, 1]]),
        ],
        1,
    )
    .expect("closure")
}

/// The parabolic subgroup of the block pair: upper-triangular 2x2 block,
/// odd direction only at (3,2).
pub fn pprime_subpair(parent: &Arc<HcPair>) -> HcSubpair {
    let f = MaskEntry::Free;
    let z = MaskEntry::Zero;
    let pattern = vec![vec![f, f, z], vec![z, f, z], vec![z, z, f]];
    let alg = parent.algebra();
    let dim = alg.dim();
    let unit = |name: &str| {
        let mut v = vec![Scalar::zero(); dim];
        v[alg.basis().index_of(name).expect("basis name")] = Scalar::one();
        v
    };
    let span = vec![unit("e11"), unit("e12"), unit("e22"), unit("e33"), unit("q32")];
    HcSubpair::build(Arc::clone(parent), pattern, span).expect("parabolic subpair")
}

pub fn pprime_samples(sub: &HcSubpair) -> SampleSet {
    let m = sub.sub_pair().model();
    let pt = |rows: [[i64; 3]; 3]| {
        let mm = Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| s(v)).collect())
                .collect(),
        )
        .unwrap();
        m.point(mm).expect("subgroup point")
    };
    SampleSet::generate(
        m,
        &[
            pt([[2, 0, 0], [0, 1, 0], [0, 0, 1]]),
            pt([[1, 1, 0], [0, 1, 0], [0, 0, 1]]),
            pt([[1, 0, 0], [0, 3, 0], [0, 0, 2]]),
        ],
        1,
    )
    .expect("closure")
}

/// Torus subgroup diag(1,1,*) of the block pair, with purely even algebra;
/// its coset has full odd dimension, so coset sections are plentiful.
pub fn dtorus_subpair(parent: &Arc<HcPair>) -> HcSubpair {
    let z = MaskEntry::Zero;
    let o = MaskEntry::One;
    let f = MaskEntry::Free;
    let pattern = vec![vec![o, z, z], vec![z, o, z], vec![z, z, f]];
    let alg = parent.algebra();
    let dim = alg.dim();
    let mut e33 = vec![Scalar::zero(); dim];
    e33[alg.basis().index_of("e33").expect("e33")] = Scalar::one();
    HcSubpair::build(Arc::clone(parent), pattern, vec![e33]).expect("torus subpair")
}

pub fn dtorus_samples(sub: &HcSubpair) -> SampleSet {
    let m = sub.sub_pair().model();
    let pt = |t: i64| {
        let mut mm = Mat::identity(3);
        mm[(2, 2)] = s(t);
        m.point(mm).expect("torus point")
    };
    SampleSet::from_points(vec![m.identity(), pt(2), pt(3), pt(-1)])
}
