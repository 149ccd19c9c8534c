//! Harish-Chandra subpairs, coset-sheaf membership, the isotropy
//! representation on the dual odd quotient, split-homogeneity verdicts and
//! homogeneous-bundle equivariance checks.
//!
//! Membership in the coset sheaf is the sample-level instance of the
//! invariance condition
//!   f(X^r . Ad(g)(Y^q))(gh) = 0 for q >= 1,   f(X^r)(gh) = f(X^r)(g),
//! with X^r ranging over increasing odd words of the big algebra and Y^q
//! over increasing odd words of the subalgebra.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::envelope::{ext_mul, ExtElement, UeaElement};
use crate::error::{Error, Result};
use crate::exactnum::Scalar;
use crate::groupmodel::{FunctionExpr, GroupModel, GroupPoint, MaskEntry, SampleSet};
use crate::liesuper::{odd_quotient, LieSuperAlgebra, OddQuotient, Parity, SuperSubspace};
use crate::linalg::{coords_in_span, Mat};
use crate::report::Report;
use crate::supergroup::{split_check, Alpha, HcPair, Section, SplitVerdict};

/// Subpair data: the subgroup model (same ambient size, restricted pattern)
/// carrying the subalgebra, plus the subalgebra's embedding into the parent.
#[derive(Clone)]
pub struct HcSubpair {
    parent: Arc<HcPair>,
    sub: Arc<HcPair>,
    /// h-basis in parent coordinates, evens first (order of `sub`'s basis).
    span: Vec<Vec<Scalar>>,
    /// Odd part of h as a parent subspace.
    h1: SuperSubspace,
}

impl HcSubpair {
    /// Builds a subpair, requiring independence, parity homogeneity, bracket
    /// closure and first-order tangency of the even part to the pattern
    /// (the last is enforced by the subgroup model construction).
    pub fn build(
        parent: Arc<HcPair>,
        sub_pattern: Vec<Vec<MaskEntry>>,
        span: Vec<Vec<Scalar>>,
    ) -> Result<HcSubpair> {
        let alg = parent.algebra();
        // evens first for a valid subalgebra basis
        let mut ordered: Vec<Vec<Scalar>> = Vec::with_capacity(span.len());
        for pass in [Parity::Even, Parity::Odd] {
            for v in &span {
                let sub = SuperSubspace::new(alg, vec![v.clone()])?;
                if sub.parities[0] == pass {
                    ordered.push(v.clone());
                }
            }
        }
        let subspace = SuperSubspace::new(alg, ordered.clone())?;
        if let Err((a, b)) = alg.bracket_closed(&subspace.span) {
            return Err(Error::NotClosed(format!(
                "subalgebra span not closed at generator pair ({a}, {b})"
            )));
        }
        // subalgebra as its own algebra, realized by the same ambient matrices
        let real = alg.realization().ok_or_else(|| {
            Error::Invalid("subpair requires a parent matrix realization".into())
        })?;
        let names: Vec<String> = (0..subspace.span.len()).map(|k| format!("h{}", k + 1)).collect();
        let mats: Vec<(Parity, Mat)> = subspace
            .span
            .iter()
            .zip(&subspace.parities)
            .map(|(v, p)| Ok((*p, real.realize(v)?)))
            .collect::<Result<_>>()?;
        let halg = LieSuperAlgebra::from_matrix_basis(names, mats, real.m, real.n)?;
        let model = GroupModel::new(parent.model().n(), sub_pattern, Arc::new(halg))?;
        let sub = HcPair::new(model, Alpha::Conjugation);
        let h1_span: Vec<Vec<Scalar>> = subspace
            .span
            .iter()
            .zip(&subspace.parities)
            .filter(|(_, p)| **p == Parity::Odd)
            .map(|(v, _)| v.clone())
            .collect();
        let h1 = SuperSubspace::new(alg, h1_span)?;
        Ok(HcSubpair {
            parent,
            sub,
            span: subspace.span,
            h1,
        })
    }

    pub fn parent(&self) -> &Arc<HcPair> {
        &self.parent
    }

    pub fn sub_pair(&self) -> &Arc<HcPair> {
        &self.sub
    }

    pub fn span(&self) -> &[Vec<Scalar>] {
        &self.span
    }

    pub fn h1(&self) -> &SuperSubspace {
        &self.h1
    }

    /// Odd quotient g1 / h1 of the parent.
    pub fn quotient(&self) -> Result<OddQuotient> {
        odd_quotient(&self.parent.algebra().odd_part(), &self.h1)
    }

    /// Matrix of the isotropy representation at a subgroup point:
    /// `psi(h)(v)(X + h1) = v(Ad(h^{-1})(X) + h1)` on the dual quotient,
    /// i.e. the transpose of the projected `Ad(h^{-1})` on representatives.
    pub fn psi(&self, h: &GroupPoint) -> Result<Mat> {
        let q = self.quotient()?;
        let model = self.parent.model();
        let hinv = model.group_inv(h)?;
        let dim_q = q.dim();
        let mut p = Mat::zeros(dim_q, dim_q);
        for (j, rep) in q.complement.iter().enumerate() {
            let moved = model.ad_g(&hinv, rep)?;
            // Ad(H) must keep h1 invariant for the projection to descend
            let in_span = coords_in_span(
                &self
                    .h1
                    .span
                    .iter()
                    .cloned()
                    .chain(q.complement.iter().cloned())
                    .collect::<Vec<_>>(),
                &moved,
            );
            if in_span.is_err() {
                return Err(Error::Invalid(
                    "Ad(h) leaves the odd subalgebra non-invariant".into(),
                ));
            }
            let proj = q.project(&moved)?;
            for (i, c) in proj.iter().enumerate() {
                p[(i, j)] = c.clone();
            }
        }
        Ok(p.transpose())
    }
}

/// Verifies the subpair conditions on raw candidate data, reporting instead
/// of failing: bracket closure (with witness), even-part tangency and
/// dimension match against the pattern, and alpha-invariance of the span on
/// subgroup samples.
pub fn subpair_check(
    parent: &Arc<HcPair>,
    sub_pattern: &[Vec<MaskEntry>],
    span: &[Vec<Scalar>],
    h_samples: &SampleSet,
) -> Report {
    let mut rep = Report::new();
    let alg = parent.algebra();
    // bracket closure
    match alg.bracket_closed(span) {
        Ok(()) => rep.pass("subpair.bracket-closure", format!("{} generators", span.len())),
        Err((a, b)) => rep.fail(
            "subpair.bracket-closure",
            format!("bracket of generators {a} and {b} leaves the span"),
        ),
    }
    // even tangency + dimension: free pattern entries parameterize Lie H
    let real = alg.realization().expect("parent carries a realization");
    let mut tangent_ok = true;
    let mut n_even = 0usize;
    for v in span {
        let sub = match SuperSubspace::new(alg, vec![v.clone()]) {
            Ok(s) => s,
            Err(_) => {
                tangent_ok = false;
                continue;
            }
        };
        if sub.parities[0] == Parity::Even {
            n_even += 1;
            let x = real.realize(v).expect("realizable");
            for (i, row) in sub_pattern.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if !matches!(e, MaskEntry::Free) && !x[(i, j)].is_zero() {
                        tangent_ok = false;
                    }
                }
            }
        }
    }
    rep.record(
        tangent_ok,
        "subpair.h0-tangent",
        "even generators tangent to the subgroup pattern",
    );
    let free_count: usize = sub_pattern
        .iter()
        .flatten()
        .filter(|e| matches!(e, MaskEntry::Free))
        .count();
    rep.record(
        n_even == free_count,
        "subpair.h0-dimension",
        format!("dim h0 = {n_even}, pattern parameters = {free_count}"),
    );
    // alpha restricted to H keeps h invariant
    let mut alpha_ok = true;
    for h in &h_samples.points {
        for v in span {
            match parent.alpha_apply(h, v) {
                Ok(img) => {
                    if coords_in_span(span, &img).is_err() {
                        alpha_ok = false;
                    }
                }
                Err(_) => alpha_ok = false,
            }
        }
    }
    rep.record(
        alpha_ok,
        "subpair.alpha-invariance",
        "alpha_G(H) preserves the subalgebra on samples",
    );
    rep
}

/// Outcome of a coset-membership check.
#[derive(Debug, Clone)]
pub enum Membership {
    Member,
    Violation {
        x_word: Vec<usize>,
        /// Number of subalgebra odd letters in the failing condition
        /// (0 marks an invariance failure).
        q: usize,
        g: GroupPoint,
        h: GroupPoint,
    },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

fn odd_words_of(alg: &LieSuperAlgebra) -> Vec<Vec<usize>> {
    let odd: Vec<usize> = alg.basis().odd_indices().collect();
    let mut out = Vec::with_capacity(1 << odd.len());
    for mask in 0u32..(1u32 << odd.len()) {
        out.push(
            odd.iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect(),
        );
    }
    out
}

/// Increasing words over the subalgebra's odd generators, as U(g) products
/// of the embedded span vectors.
fn h1_words(sub: &HcSubpair) -> Vec<(usize, UeaElement)> {
    let alg = sub.parent().algebra();
    let env = sub.parent().env();
    let gens: Vec<UeaElement> = sub
        .h1()
        .span
        .iter()
        .map(|v| {
            let mut e = UeaElement::zero();
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    e = e.add(&UeaElement::letter(alg, i).scale(c));
                }
            }
            e
        })
        .collect();
    let k = gens.len();
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u32..(1u32 << k) {
        let mut prod = UeaElement::unit();
        let mut q = 0;
        for (idx, gen) in gens.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                prod = env.mul(&prod, gen);
                q += 1;
            }
        }
        out.push((q, prod));
    }
    out
}

/// Checks the coset-sheaf invariance condition on the sample grid.
pub fn coset_membership(
    sub: &HcSubpair,
    f: &Section,
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<Membership> {
    let parent = sub.parent();
    let env = parent.env();
    let x_words = odd_words_of(parent.algebra());
    let y_words = h1_words(sub);
    for xw in &x_words {
        let x_elem = {
            let mut prod = UeaElement::unit();
            for &l in xw {
                prod = env.mul(&prod, &UeaElement::letter(parent.algebra(), l));
            }
            prod
        };
        for g in &g_samples.points {
            let fx_g = f.eval(&x_elem, g)?;
            for h in &h_samples.points {
                let gh = parent.model().group_mul(g, h)?;
                for (q, yprod) in &y_words {
                    if *q == 0 {
                        // invariance branch
                        if f.eval(&x_elem, &gh)? != fx_g {
                            return Ok(Membership::Violation {
                                x_word: xw.clone(),
                                q: 0,
                                g: g.clone(),
                                h: h.clone(),
                            });
                        }
                    } else {
                        let ad_y = parent.alpha_apply_uea(g, yprod)?;
                        let arg = env.mul(&x_elem, &ad_y);
                        if !f.eval(&arg, &gh)?.is_zero() {
                            return Ok(Membership::Violation {
                                x_word: xw.clone(),
                                q: *q,
                                g: g.clone(),
                                h: h.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(Membership::Member)
}

/// Isotropy representation data: quotient plus psi matrices per sample.
#[derive(Debug, Clone)]
pub struct IsotropyRep {
    pub quotient: OddQuotient,
    pub entries: Vec<(GroupPoint, Mat)>,
}

pub fn isotropy_rep(sub: &HcSubpair, h_samples: &SampleSet) -> Result<IsotropyRep> {
    let quotient = sub.quotient()?;
    let mut entries = Vec::with_capacity(h_samples.len());
    for h in &h_samples.points {
        entries.push((h.clone(), sub.psi(h)?));
    }
    Ok(IsotropyRep { quotient, entries })
}

impl IsotropyRep {
    /// psi(e) = id and psi(h1 h2) = psi(h1) psi(h2) on sample pairs.
    pub fn homomorphism_check(&self, sub: &HcSubpair) -> Result<Report> {
        let mut rep = Report::new();
        let model = sub.sub_pair().model();
        let e_mat = sub.psi(&model.identity())?;
        rep.record(
            e_mat == Mat::identity(self.quotient.dim()),
            "isotropy.identity",
            "psi(e) = id",
        );
        let mut hom_ok = true;
        for (h1, m1) in &self.entries {
            for (h2, m2) in &self.entries {
                let prod = model.group_mul(h1, h2)?;
                let lhs = sub.psi(&prod)?;
                let rhs = m1.mul(m2)?;
                if lhs != rhs {
                    hom_ok = false;
                }
            }
        }
        rep.record(hom_ok, "isotropy.homomorphism", "psi(h1 h2) = psi(h1) psi(h2)");
        Ok(rep)
    }
}

/// Split verdict plus bundle data for a homogeneous space.
#[derive(Debug, Clone)]
pub enum SplitHomogeneous {
    Split {
        quotient_dim: usize,
        psi: IsotropyRep,
    },
    CriterionInapplicable {
        witness: (usize, usize),
    },
}

/// Split criterion for the pair plus, when it holds, the bundle data of the
/// coset: quotient dimension and isotropy matrices. With a trivial subgroup
/// this degenerates to the statement that the supergroup itself is split
/// with the full odd dual as fibre.
pub fn split_homogeneous_check(sub: &HcSubpair, h_samples: &SampleSet) -> Result<SplitHomogeneous> {
    match split_check(sub.parent().algebra()) {
        SplitVerdict::Witness(i, j) => Ok(SplitHomogeneous::CriterionInapplicable { witness: (i, j) }),
        SplitVerdict::Split => {
            let psi = isotropy_rep(sub, h_samples)?;
            Ok(SplitHomogeneous::Split {
                quotient_dim: psi.quotient.dim(),
                psi,
            })
        }
    }
}

/// Function into a representation space of the subgroup: a vector of
/// coordinate expressions over the big group plus the representing matrix of
/// expressions in the subgroup coordinates.
#[derive(Debug, Clone)]
pub struct HomBundleFn {
    /// dim E x dim E matrix of expressions in subgroup coordinates.
    pub theta: Vec<Vec<FunctionExpr>>,
    /// E-vector of expressions over the big group.
    pub components: Vec<FunctionExpr>,
}

impl HomBundleFn {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    fn theta_at(&self, parent: &HcPair, h: &GroupPoint) -> Result<Mat> {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = parent.model().eval_expr(&self.theta[i][j], h)?;
            }
        }
        Ok(m)
    }

    fn value_at(&self, parent: &HcPair, g: &GroupPoint) -> Result<Vec<Scalar>> {
        self.components
            .iter()
            .map(|e| parent.model().eval_expr(e, g))
            .collect()
    }
}

/// Equivariance check `theta(h) f(gh) = f(g)` on all sample pairs, plus the
/// wedge-square compatibility on decomposables: the pairwise wedge of two
/// equivariant functions is equivariant for the wedge-square representation.
pub fn hom_bundle_fn_check(
    parent: &Arc<HcPair>,
    b: &HomBundleFn,
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<Report> {
    let mut rep = Report::new();
    let mut ok = true;
    let mut witness = String::new();
    for g in &g_samples.points {
        for h in &h_samples.points {
            let gh = parent.model().group_mul(g, h)?;
            let theta = b.theta_at(parent, h)?;
            let fgh = b.value_at(parent, &gh)?;
            let fg = b.value_at(parent, g)?;
            let lhs: Vec<Scalar> = (0..b.dim())
                .map(|i| {
                    (0..b.dim())
                        .map(|j| theta[(i, j)].clone() * fgh[j].clone())
                        .fold(Scalar::zero(), |a, x| a + x)
                })
                .collect();
            if lhs != fg && ok {
                ok = false;
                witness = format!("at g={g:?}, h={h:?}");
            }
        }
    }
    rep.record(
        ok,
        "bundle.equivariance",
        if ok { "theta(h) f(gh) = f(g)".to_string() } else { witness },
    );
    Ok(rep)
}

/// Wedge-square equivariance of two equivariant functions for one theta:
/// checks `(wedge^2 theta)(h) (f1 ^ f2)(gh) = (f1 ^ f2)(g)` on samples.
pub fn wedge_square_check(
    parent: &Arc<HcPair>,
    theta: &[Vec<FunctionExpr>],
    f1: &[FunctionExpr],
    f2: &[FunctionExpr],
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<bool> {
    let d = f1.len();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let eval_vec = |fs: &[FunctionExpr], g: &GroupPoint| -> Result<Vec<Scalar>> {
        fs.iter().map(|e| parent.model().eval_expr(e, g)).collect()
    };
    for g in &g_samples.points {
        for h in &h_samples.points {
            let gh = parent.model().group_mul(g, h)?;
            let t = {
                let mut m = Mat::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] = parent.model().eval_expr(&theta[i][j], h)?;
                    }
                }
                m
            };
            let wedge = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
                pairs
                    .iter()
                    .map(|&(i, j)| a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone())
                    .collect()
            };
            let w_g = wedge(&eval_vec(f1, g)?, &eval_vec(f2, g)?);
            let w_gh = wedge(&eval_vec(f1, &gh)?, &eval_vec(f2, &gh)?);
            // wedge-square matrix on index pairs
            let lhs: Vec<Scalar> = pairs
                .iter()
                .map(|&(i, j)| {
                    pairs
                        .iter()
                        .zip(&w_gh)
                        .map(|(&(k, l), v)| {
                            (t[(i, k)].clone() * t[(j, l)].clone()
                                - t[(i, l)].clone() * t[(j, k)].clone())
                                * v.clone()
                        })
                        .fold(Scalar::zero(), |a, x| a + x)
                })
                .collect();
            if lhs != w_g {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pointwise value of the identification chain at a sample: the bundle-side
/// data is paired against the projected, `Ad(g^{-1})`-pulled argument with
/// the sign of the dual-exterior isomorphism,
/// `s(v)(g) = (-1)^{p(p-1)/2} < b(g), proj(Ad(g^{-1}) v) >`.
pub fn chain_value(
    sub: &HcSubpair,
    bundle: &HomBundleFn,
    degree: usize,
    v: &ExtElement,
    g: &GroupPoint,
) -> Result<Scalar> {
    let parent = sub.parent();
    let q = sub.quotient()?;
    let model = parent.model();
    let ginv = model.group_inv(g)?;
    // quotient-side wedge words of length `degree`, in complement coordinates
    let dim_q = q.dim();
    let mut out = Scalar::zero();
    let bundle_vals = bundle.value_at(parent, g)?;
    // basis words of /\^degree(quotient) indexed consistently with bundle components
    let mut words: Vec<Vec<usize>> = Vec::new();
    {
        // increasing index words over 0..dim_q of the given length
        fn rec(start: usize, len: usize, dim: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if len == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..dim {
                cur.push(i);
                rec(i + 1, len - 1, dim, cur, out);
                cur.pop();
            }
        }
        rec(0, degree, dim_q, &mut Vec::new(), &mut words);
    }
    if words.len() != bundle_vals.len() {
        return Err(Error::DimensionMismatch(
            "bundle components vs quotient wedge words".into(),
        ));
    }
    for (word, c) in &v.terms {
        // Ad(g^{-1}) on the wedge word, then project each letter
        let moved = parent.alpha_apply_ext(&ginv, word)?;
        for (w2, c2) in &moved.terms {
            // project letters into quotient coordinates
            let dim = parent.algebra().dim();
            let mut proj_ext = ExtElement::unit();
            let mut zero = false;
            for &letter in w2 {
                let mut lv = vec![Scalar::zero(); dim];
                lv[letter] = Scalar::one();
                let p = q.project(&lv)?;
                let mut lin = ExtElement::zero();
                for (i, pc) in p.iter().enumerate() {
                    if !pc.is_zero() {
                        lin = lin.add(&ExtElement::generator(i).scale(pc));
                    }
                }
                if lin.is_zero() {
                    zero = true;
                    break;
                }
                proj_ext = ext_mul(&proj_ext, &lin);
            }
            if zero {
                continue;
            }
            for (qw, qc) in &proj_ext.terms {
                if qw.len() != degree {
                    continue;
                }
                let slot = words.iter().position(|w| w == qw).expect("word indexed");
                out += c.clone() * c2.clone() * qc.clone() * bundle_vals[slot].clone();
            }
        }
    }
    // dual-exterior sign
    if (degree * degree.saturating_sub(1) / 2) % 2 == 1 {
        out = -out;
    }
    Ok(out)
}

/// Wedge-form invariance condition: subalgebra odd letters on the right
/// annihilate the section and the reduced dependence is H-invariant.
pub fn wedge_invariance_check(
    sub: &HcSubpair,
    f: &Section,
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<bool> {
    Ok(coset_membership(sub, f, g_samples, h_samples)?.is_member())
}

/// Quotient-kernel form of the invariance condition: arguments whose image
/// in the odd quotient vanishes annihilate the section, and the remaining
/// values are right-H-invariant. Agrees with the wedge form.
pub fn quotient_invariance_check(
    sub: &HcSubpair,
    f: &Section,
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<bool> {
    let parent = sub.parent();
    let q = sub.quotient()?;
    let dim = parent.algebra().dim();
    let words = odd_words_of(parent.algebra());
    for w in &words {
        // quotient image of the wedge word
        let mut proj_ext = ExtElement::unit();
        let mut in_kernel = false;
        for &letter in w {
            let mut lv = vec![Scalar::zero(); dim];
            lv[letter] = Scalar::one();
            let p = q.project(&lv)?;
            let mut lin = ExtElement::zero();
            for (i, pc) in p.iter().enumerate() {
                if !pc.is_zero() {
                    lin = lin.add(&ExtElement::generator(i).scale(pc));
                }
            }
            proj_ext = ext_mul(&proj_ext, &lin);
        }
        if proj_ext.is_zero() {
            in_kernel = true;
        }
        for g in &g_samples.points {
            let moved = parent.alpha_apply_ext(g, w)?;
            // evaluate f on the moved wedge through gamma
            let arg = parent.env().gamma(&moved);
            let at_g = f.eval(&arg, g)?;
            for h in &h_samples.points {
                let gh = parent.model().group_mul(g, h)?;
                let at_gh = f.eval(&arg, &gh)?;
                let ok = if in_kernel {
                    at_gh.is_zero()
                } else {
                    at_gh == at_g
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Grading compatibility of members: each graded projection of a member is
/// again a member (checked on the grid).
pub fn member_grading_check(
    sub: &HcSubpair,
    f: &Section,
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<bool> {
    if !coset_membership(sub, f, g_samples, h_samples)?.is_member() {
        return Ok(true);
    }
    let max = sub.parent().algebra().basis().n_odd();
    for p in 0..=max {
        let fp = f.grading_project(p);
        if !coset_membership(sub, &fp, g_samples, h_samples)?.is_member() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Expression-level basis of grid members: solves the linear system that the
/// membership conditions impose on a finite expression family, returning
/// sections spanning the solution space (constants always included).
pub fn member_basis_on_grid(
    sub: &HcSubpair,
    expr_family: &[FunctionExpr],
    g_samples: &SampleSet,
    h_samples: &SampleSet,
) -> Result<Vec<Section>> {
    let parent = sub.parent();
    let env = parent.env();
    let words = odd_words_of(parent.algebra());
    // unknowns: one coefficient per (word, family expression)
    let unknowns: Vec<(Vec<usize>, usize)> = words
        .iter()
        .flat_map(|w| (0..expr_family.len()).map(move |k| (w.clone(), k)))
        .collect();
    let section_of = |coeffs: &[Scalar]| -> Result<Section> {
        let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
        for ((w, k), c) in unknowns.iter().zip(coeffs) {
            if c.is_zero() {
                continue;
            }
            let term = expr_family[*k].clone().scale(c);
            let entry = table
                .remove(w)
                .map(|prev| prev.add(term.clone()))
                .unwrap_or(term);
            table.insert(w.clone(), entry);
        }
        Section::new(Arc::clone(parent), table)
    };
    // rows: every scalar membership condition evaluated on the unit sections
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let x_words = odd_words_of(parent.algebra());
    let y_words = h1_words(sub);
    // precompute per-unknown sections
    let unit_sections: Vec<Section> = unknowns
        .iter()
        .map(|(w, k)| {
            Section::indicator(Arc::clone(parent), w.clone(), expr_family[*k].clone())
                .expect("indicator")
        })
        .collect();
    for xw in &x_words {
        let x_elem = {
            let mut prod = UeaElement::unit();
            for &l in xw {
                prod = env.mul(&prod, &UeaElement::letter(parent.algebra(), l));
            }
            prod
        };
        for g in &g_samples.points {
            for h in &h_samples.points {
                let gh = parent.model().group_mul(g, h)?;
                for (qn, yprod) in &y_words {
                    let mut row = Vec::with_capacity(unknowns.len());
                    if *qn == 0 {
                        for s in &unit_sections {
                            row.push(s.eval(&x_elem, &gh)? - s.eval(&x_elem, g)?);
                        }
                    } else {
                        let ad_y = parent.alpha_apply_uea(g, yprod)?;
                        let arg = env.mul(&x_elem, &ad_y);
                        for s in &unit_sections {
                            row.push(s.eval(&arg, &gh)?);
                        }
                    }
                    if !row.iter().all(Scalar::is_zero) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let kernel = if rows.is_empty() {
        // no constraints: all unknowns free
        (0..unknowns.len())
            .map(|k| {
                let mut v = vec![Scalar::zero(); unknowns.len()];
                v[k] = Scalar::one();
                v
            })
            .collect()
    } else {
        Mat::from_rows(rows)?.kernel()
    };
    kernel.iter().map(|v| section_of(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn parabolic_subpair_passes() {
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let hs = pprime_samples(&sub);
        let rep = subpair_check(
            parent.model().n().eq(&3).then(|| &parent).unwrap(),
            sub.sub_pair().model().pattern(),
            sub.span(),
            &hs,
        );
        assert!(rep.all_pass(), "{}", rep.render());
        // improper subpair h = g also passes
        let dim = parent.algebra().dim();
        let full_span: Vec<Vec<Scalar>> = (0..dim)
            .map(|i| {
                let mut v = vec![Scalar::zero(); dim];
                v[i] = Scalar::one();
                v
            })
            .collect();
        let gs = gprime_samples(&parent);
        let rep = subpair_check(&parent, parent.model().pattern(), &full_span, &gs);
        assert!(rep.all_pass(), "{}", rep.render());
    }

    #[test]
    fn non_closed_candidate_reports_witness() {
        let parent = gprime_pair();
        let alg = parent.algebra();
        let dim = alg.dim();
        let unit = |name: &str| {
            let mut v = vec![Scalar::zero(); dim];
            v[alg.basis().index_of(name).unwrap()] = Scalar::one();
            v
        };
        // e12 and q31: [e12, q31]-type brackets leave the span
        let span = vec![unit("e12"), unit("q31")];
        let hs = SampleSet::from_points(vec![parent.model().identity()]);
        let f = MaskEntry::Free;
        let z = MaskEntry::Zero;
        let pattern = vec![vec![f, f, z], vec![z, f, z], vec![z, z, f]];
        let rep = subpair_check(&parent, &pattern, &span, &hs);
        let closure = rep
            .checks
            .iter()
            .find(|c| c.name == "subpair.bracket-closure")
            .unwrap();
        assert!(!closure.pass, "{}", rep.render());
        assert!(HcSubpair::build(Arc::clone(&parent), pattern, span).is_err());
    }

    #[test]
    fn isotropy_examples() {
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let hs = pprime_samples(&sub);
        // quotient is one-dimensional, spanned by the (3,1) direction
        let q = sub.quotient().unwrap();
        assert_eq!(q.dim(), 1);
        let iq31 = parent.algebra().basis().index_of("q31").unwrap();
        assert_eq!(q.complement[0][iq31], Scalar::one());
        // psi(e) = id
        let e = sub.sub_pair().model().identity();
        assert_eq!(sub.psi(&e).unwrap(), Mat::identity(1));
        // psi(diag(t,1,1)) = t id
        for t in [2i64, 3, 5] {
            let mut m = Mat::identity(3);
            m[(0, 0)] = s(t);
            let h = sub.sub_pair().model().point(m).unwrap();
            let psi = sub.psi(&h).unwrap();
            assert_eq!(psi[(0, 0)], s(t), "psi(diag({t},1,1))");
        }
        // homomorphism property over the sample set
        let rep = isotropy_rep(&sub, &hs).unwrap();
        let hom = rep.homomorphism_check(&sub).unwrap();
        assert!(hom.all_pass(), "{}", hom.render());
    }

    #[test]
    fn dimension_bookkeeping() {
        let parent = gprime_pair();
        let psub = pprime_subpair(&parent);
        let n_odd = parent.algebra().basis().n_odd();
        assert_eq!(
            psub.quotient().unwrap().dim(),
            n_odd - psub.h1().rank()
        );
        // trivial subgroup: bundle has rank dim g1
        let tsub = trivial_subpair(&parent);
        assert_eq!(tsub.quotient().unwrap().dim(), n_odd);
    }

    fn trivial_subpair(parent: &Arc<HcPair>) -> HcSubpair {
        HcSubpair::build(
            Arc::clone(parent),
            GroupModel::identity_pattern(parent.model().n()),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn split_homogeneous_examples() {
        // the block pair splits with a 1-dim quotient over the parabolic
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let hs = pprime_samples(&sub);
        match split_homogeneous_check(&sub, &hs).unwrap() {
            SplitHomogeneous::Split { quotient_dim, psi } => {
                assert_eq!(quotient_dim, 1);
                assert!(!psi.entries.is_empty());
            }
            other => panic!("expected split, got {other:?}"),
        }
        // gl(1|1) fails the criterion
        let gp = gl11_pair();
        let tsub = trivial_subpair(&gp);
        let e = SampleSet::from_points(vec![gp.model().identity()]);
        match split_homogeneous_check(&tsub, &e).unwrap() {
            SplitHomogeneous::CriterionInapplicable { witness } => {
                let (i, j) = witness;
                assert_eq!(
                    (gp.algebra().basis().name(i), gp.algebra().basis().name(j)),
                    ("e12", "e21")
                );
            }
            other => panic!("expected inapplicable, got {other:?}"),
        }
        // abelian odd pair, trivial subgroup: split
        let ab = abelian_pair(2);
        let asub = trivial_subpair(&ab);
        let ae = SampleSet::from_points(vec![ab.model().identity()]);
        assert!(matches!(
            split_homogeneous_check(&asub, &ae).unwrap(),
            SplitHomogeneous::Split { quotient_dim: 2, .. }
        ));
    }

    #[test]
    fn coset_membership_examples() {
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let gs = gprime_samples(&parent);
        let hs = pprime_samples(&sub);
        // constants are members
        let c = Section::constant(Arc::clone(&parent), s(4));
        assert!(coset_membership(&sub, &c, &gs, &hs).unwrap().is_member());
        // a section meeting h1 with h-independent values fails at q = 1
        let iq32 = parent.algebra().basis().index_of("q32").unwrap();
        let bad = Section::indicator(Arc::clone(&parent), vec![iq32], FunctionExpr::one()).unwrap();
        match coset_membership(&sub, &bad, &gs, &hs).unwrap() {
            Membership::Violation { q, .. } => assert_eq!(q, 1),
            Membership::Member => panic!("h1-supported section cannot be a member"),
        }
    }

    #[test]
    fn torus_coset_has_rich_members_built_through_the_chain() {
        let parent = gprime_pair();
        let sub = dtorus_subpair(&parent);
        let gs = gprime_samples(&parent);
        let hs = dtorus_samples(&sub);
        // equivariant bundle function: f_i = x33 * P_i(block), theta = psi
        // (the torus scales both odd directions by 1/t)
        let x33 = FunctionExpr::coord(2, 2);
        let bundle = HomBundleFn {
            theta: vec![
                vec![FunctionExpr::DetInv.mul(FunctionExpr::coord(0, 0).mul(FunctionExpr::coord(1, 1)).sub(FunctionExpr::coord(0, 1).mul(FunctionExpr::coord(1, 0)))), FunctionExpr::zero()],
                vec![FunctionExpr::zero(), FunctionExpr::DetInv.mul(FunctionExpr::coord(0, 0).mul(FunctionExpr::coord(1, 1)).sub(FunctionExpr::coord(0, 1).mul(FunctionExpr::coord(1, 0))))],
            ],
            components: vec![
                x33.clone().mul(FunctionExpr::coord(0, 0)),
                x33.clone().mul(FunctionExpr::coord(0, 1)),
            ],
        };
        // theta(h) = det(block)/det = 1/h33 on the torus: equivariance holds
        let rep = hom_bundle_fn_check(&parent, &bundle, &gs, &hs).unwrap();
        assert!(rep.all_pass(), "{}", rep.render());

        // chain-built member: s(E3j) = sum_k g_{jk} f_k(g) / g33-free form;
        // here directly: s(q31-word) = x11*x11 + x12*x12-style expressions
        let iq31 = parent.algebra().basis().index_of("q31").unwrap();
        let iq32 = parent.algebra().basis().index_of("q32").unwrap();
        // s(E31) = x11 P1 + x12 P2, s(E32) = x21 P1 + x22 P2 with
        // P_k = bundle components / x33
        let p1 = FunctionExpr::coord(0, 0);
        let p2 = FunctionExpr::coord(0, 1);
        let mut table = BTreeMap::new();
        table.insert(
            vec![iq31],
            FunctionExpr::coord(0, 0).mul(p1.clone()).add(FunctionExpr::coord(0, 1).mul(p2.clone())),
        );
        table.insert(
            vec![iq32],
            FunctionExpr::coord(1, 0).mul(p1).add(FunctionExpr::coord(1, 1).mul(p2)),
        );
        let member = Section::new(Arc::clone(&parent), table).unwrap();
        // the expression table matches the pointwise chain on every sample
        for g in &gs.points {
            for (w, expr) in &member.table {
                let via_chain =
                    chain_value(&sub, &bundle, 1, &ExtElement::from_term(w.clone(), Scalar::one()), g)
                        .unwrap();
                let via_table = parent.model().eval_expr(expr, g).unwrap();
                assert_eq!(via_chain, via_table, "chain at {w:?} over {g:?}");
            }
        }
        // and it is a member
        assert!(coset_membership(&sub, &member, &gs, &hs).unwrap().is_member());
    }

    #[test]
    fn bundle_negative_and_wedge_cases() {
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let gs = gprime_samples(&parent);
        let hs = pprime_samples(&sub);
        // character theta = x11 x22 with f = x33 detinv: equivariant
        let det_block_inv = FunctionExpr::coord(2, 2).mul(FunctionExpr::DetInv);
        let theta_char = FunctionExpr::coord(0, 0).mul(FunctionExpr::coord(1, 1));
        let good = HomBundleFn {
            theta: vec![vec![theta_char.clone()]],
            components: vec![det_block_inv],
        };
        let rep = hom_bundle_fn_check(&parent, &good, &gs, &hs).unwrap();
        assert!(rep.all_pass(), "{}", rep.render());
        // at diag(t,1,1) the character evaluates to t
        let mut m = Mat::identity(3);
        m[(0, 0)] = s(7);
        let h = sub.sub_pair().model().point(m).unwrap();
        assert_eq!(parent.model().eval_expr(&theta_char, &h).unwrap(), s(7));
        // constant f with nontrivial theta fails with a witness pair
        let bad = HomBundleFn {
            theta: vec![vec![theta_char]],
            components: vec![FunctionExpr::one()],
        };
        let rep = hom_bundle_fn_check(&parent, &bad, &gs, &hs).unwrap();
        assert!(!rep.all_pass());
        // trivial theta with constant f passes
        let trivial = HomBundleFn {
            theta: vec![vec![FunctionExpr::one()]],
            components: vec![FunctionExpr::constant(s(5))],
        };
        assert!(hom_bundle_fn_check(&parent, &trivial, &gs, &hs).unwrap().all_pass());

        // wedge-square compatibility on the torus bundle
        let tsub = dtorus_subpair(&parent);
        let ths = dtorus_samples(&tsub);
        let theta2 = {
            let db = FunctionExpr::DetInv.mul(
                FunctionExpr::coord(0, 0)
                    .mul(FunctionExpr::coord(1, 1))
                    .sub(FunctionExpr::coord(0, 1).mul(FunctionExpr::coord(1, 0))),
            );
            vec![
                vec![db.clone(), FunctionExpr::zero()],
                vec![FunctionExpr::zero(), db],
            ]
        };
        let f1 = vec![
            FunctionExpr::coord(2, 2).mul(FunctionExpr::coord(0, 0)),
            FunctionExpr::coord(2, 2).mul(FunctionExpr::coord(0, 1)),
        ];
        let f2 = vec![
            FunctionExpr::coord(2, 2).mul(FunctionExpr::coord(1, 0)),
            FunctionExpr::coord(2, 2).mul(FunctionExpr::coord(1, 1)),
        ];
        assert!(wedge_square_check(&parent, &theta2, &f1, &f2, &gs, &ths).unwrap());
    }

    #[test]
    fn psi_v_with_expression_coefficients() {
        // the sign isomorphism over coordinate-function coefficients:
        // multiplicativity checked by evaluation on group samples
        use crate::envelope::{hom_table_mul, psi_v_iso};
        let parent = gprime_pair();
        let gs = gprime_samples(&parent);
        let neg = |e: FunctionExpr| e.neg();
        let h1 = FunctionExpr::coord(0, 0);
        let h2 = FunctionExpr::coord(1, 1).add(FunctionExpr::one());
        let t1 = psi_v_iso(h1.clone(), &[0], neg).unwrap();
        let t2 = psi_v_iso(h2.clone(), &[1], neg).unwrap();
        let emul = |a: &FunctionExpr, b: &FunctionExpr, negate: bool| {
            let p = a.clone().mul(b.clone());
            if negate {
                p.neg()
            } else {
                p
            }
        };
        let eadd = |a: FunctionExpr, b: FunctionExpr| a.add(b);
        let prod = hom_table_mul(&t1, &t2, emul, eadd);
        // dual-side wedge: (h1 x0*) ^ (h2 x1*) = h1 h2 (x0 ^ x1)*, and
        // Psi_V carries (-1)^{k(k-1)/2} = -1 at k = 2
        let direct = psi_v_iso(h1.mul(h2), &[0, 1], neg).unwrap();
        for (w, e) in &direct.entries {
            let other = prod.entries.get(w).expect("same support");
            for g in gs.points.iter().take(5) {
                assert_eq!(
                    parent.model().eval_expr(e, g).unwrap(),
                    parent.model().eval_expr(other, g).unwrap(),
                    "at word {w:?}"
                );
            }
        }
    }

    #[test]
    fn invariance_formulations_agree_on_fixtures() {
        let parent = gprime_pair();
        let gs = gprime_samples(&parent);
        let iq31 = parent.algebra().basis().index_of("q31").unwrap();
        let iq32 = parent.algebra().basis().index_of("q32").unwrap();
        let candidates = |pair: &Arc<HcPair>| -> Vec<Section> {
            vec![
                Section::constant(Arc::clone(pair), s(3)),
                Section::indicator(Arc::clone(pair), vec![iq31], FunctionExpr::one()).unwrap(),
                Section::indicator(Arc::clone(pair), vec![iq32], FunctionExpr::one()).unwrap(),
                Section::indicator(Arc::clone(pair), vec![iq31], FunctionExpr::coord(2, 2)).unwrap(),
                Section::indicator(Arc::clone(pair), vec![iq31, iq32], FunctionExpr::one()).unwrap(),
                Section::indicator(
                    Arc::clone(pair),
                    vec![iq31],
                    FunctionExpr::coord(0, 0).mul(FunctionExpr::coord(0, 0)),
                )
                .unwrap(),
            ]
        };
        for (sub, hs) in [
            {
                let sub = pprime_subpair(&parent);
                let hs = pprime_samples(&sub);
                (sub, hs)
            },
            {
                let sub = dtorus_subpair(&parent);
                let hs = dtorus_samples(&sub);
                (sub, hs)
            },
        ] {
            let mut seen_member = false;
            let mut seen_violation = false;
            for f in candidates(&parent) {
                let a = wedge_invariance_check(&sub, &f, &gs, &hs).unwrap();
                let b = quotient_invariance_check(&sub, &f, &gs, &hs).unwrap();
                assert_eq!(a, b, "verdicts diverge on {f:?}");
                seen_member |= a;
                seen_violation |= !a;
            }
            assert!(seen_member && seen_violation, "test family not discriminating");
        }
    }

    #[test]
    fn subpair_inclusion_restricts_tables() {
        // the pullback along the inclusion morphism evaluates target tables
        // on subalgebra arguments at subgroup points
        use crate::envelope::TensorElement;
        use crate::supergroup::{GroupMap, HcMorphism};
        let parent = gprime_pair();
        let sub = pprime_subpair(&parent);
        let hs = pprime_samples(&sub);
        // embedding matrix: columns are the span vectors
        let dimp = parent.algebra().dim();
        let dims = sub.sub_pair().dim();
        let phi = Mat::from_fn(dimp, dims, |i, j| sub.span()[j][i].clone());
        let incl = HcMorphism::new_unchecked(
            Arc::clone(sub.sub_pair()),
            Arc::clone(&parent),
            GroupMap::Identity,
            phi,
        );
        assert!(incl.validate(&hs).all_pass(), "{}", incl.validate(&hs).render());
        // pull back sections and compare with direct evaluation along the span
        let iq31 = parent.algebra().basis().index_of("q31").unwrap();
        let iq32 = parent.algebra().basis().index_of("q32").unwrap();
        let f = Section::indicator(Arc::clone(&parent), vec![iq31], FunctionExpr::coord(0, 0))
            .unwrap()
            .add(&Section::indicator(Arc::clone(&parent), vec![iq32], FunctionExpr::coord(1, 1)).unwrap())
            .unwrap();
        let pulled = incl.pullback(&f).unwrap();
        let env_s = sub.sub_pair().env();
        let env_p = parent.env();
        for m in env_s.pbw_monomials_up_to(2) {
            let t = TensorElement::pure(vec![m.clone()], Scalar::one());
            let u_sub = crate::envelope::UeaElement::from_term(m.clone(), Scalar::one());
            let u_parent = env_s.map_letters(env_p, &u_sub, &incl.phi_alg).unwrap();
            for h in hs.points.iter().take(4) {
                let lhs = pulled.eval(&t, &[h.clone()]).unwrap();
                let rhs = f.eval(&u_parent, h).unwrap();
                assert_eq!(lhs, rhs, "restriction at {m:?}");
            }
        }
    }

    #[test]
    fn improper_and_zero_quotient_degenerations() {
        // h = g: rank-0 bundle, psi is the empty matrix, constants remain members
        let parent = gprime_pair();
        let dim = parent.algebra().dim();
        let full_span: Vec<Vec<Scalar>> = (0..dim)
            .map(|i| {
                let mut v = vec![Scalar::zero(); dim];
                v[i] = Scalar::one();
                v
            })
            .collect();
        let improper = HcSubpair::build(
            Arc::clone(&parent),
            parent.model().pattern().to_vec(),
            full_span,
        )
        .unwrap();
        let q = improper.quotient().unwrap();
        assert_eq!(q.dim(), 0);
        let gs = gprime_samples(&parent);
        let psi = improper.psi(&gs.points[1]).unwrap();
        assert_eq!((psi.rows, psi.cols), (0, 0));
        let c = Section::constant(Arc::clone(&parent), s(2));
        assert!(coset_membership(&improper, &c, &gs, &gs).unwrap().is_member());
        // and a reduced-level non-invariant section fails through the q = 0 branch
        let bad = Section::indicator(Arc::clone(&parent), vec![], FunctionExpr::coord(0, 0)).unwrap();
        assert!(!coset_membership(&improper, &bad, &gs, &gs).unwrap().is_member());
    }

    #[test]
    fn membership_closed_under_product_and_grading() {
        let parent = gprime_pair();
        let sub = dtorus_subpair(&parent);
        let gs = gprime_samples(&parent);
        let hs = dtorus_samples(&sub);
        let family = vec![
            FunctionExpr::one(),
            FunctionExpr::coord(0, 0),
            FunctionExpr::coord(0, 1),
            FunctionExpr::coord(1, 1),
            FunctionExpr::coord(2, 2),
            FunctionExpr::coord(2, 2).mul(FunctionExpr::DetInv),
        ];
        let members = member_basis_on_grid(&sub, &family, &gs, &hs).unwrap();
        assert!(members.len() > 1, "expected nontrivial member space");
        for f in &members {
            assert!(coset_membership(&sub, f, &gs, &hs).unwrap().is_member());
        }
        // closure under the section product on a few pairs
        for (i, a) in members.iter().enumerate().take(4) {
            for b in members.iter().skip(i).take(4) {
                let prod = a.mul(b).unwrap();
                assert!(
                    coset_membership(&sub, &prod, &gs, &hs).unwrap().is_member(),
                    "product of members must be a member"
                );
                assert!(member_grading_check(&sub, &prod, &gs, &hs).unwrap());
            }
        }
    }
}
