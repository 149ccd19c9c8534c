//! Harish-Chandra pairs and the section calculus of the associated structure
//! sheaf: sections are stored by their restriction to the exterior algebra of
//! the odd part (one expression per increasing odd word) and extended to all
//! of U(g) through the PBW factorization and iterated right-invariant
//! derivations.
//!
//! The supergroup morphism pullbacks are
//!   mu*(f)(X (x) Y)(g,h) = f(X . alpha(g)(Y))(gh)
//!   iota*(f)(X)(g)       = f(alpha(g^{-1})(S(X)))(g^{-1})
//!   eps*(f)              = f(1)(e)
//! and a right-invariant field acts by
//!   field_X(f)(u) = (-1)^{p(X)p(f)} f(X . u),
//! the sign being forced by the super-Leibniz rule (the plain candidate
//! without the Koszul factor fails it; the suite checks both).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::envelope::{Enveloping, ExtElement, PbwMonomial, TensorElement, UeaElement};
use crate::error::{Error, Result};
use crate::exactnum::{Jet1, Scalar};
use crate::groupmodel::{FunctionExpr, GroupModel, GroupPoint, SampleSet};
use crate::liesuper::{LieSuperAlgebra, Parity};
use crate::linalg::Mat;
use crate::report::Report;

/// Representation of the reduced group on the algebra. `Conjugation` is the
/// default (alpha = Ad); `OddScaledConjugation` multiplies the image of odd
/// vectors by a coordinate function and exists to build deliberately broken
/// pairs for the negative suites (it fails the pair invariants unless the
/// factor is constantly one).
#[derive(Clone, Debug)]
pub enum Alpha {
    Conjugation,
    OddScaledConjugation { factor: FunctionExpr },
}

/// Harish-Chandra pair: a matrix group model plus its Lie superalgebra and a
/// group representation on it.
pub struct HcPair {
    model: GroupModel,
    alpha: Alpha,
    env: Enveloping,
    // evaluator pullbacks hit the same points over and over
    alpha_cache: Mutex<HashMap<Vec<Scalar>, Mat>>,
    alpha_uea_cache: Mutex<HashMap<(Vec<Scalar>, PbwMonomial), UeaElement>>,
    inv_cache: Mutex<HashMap<Vec<Scalar>, GroupPoint>>,
}

fn point_key(g: &GroupPoint) -> Vec<Scalar> {
    let mut v = Vec::with_capacity(g.mat.rows * g.mat.cols);
    for i in 0..g.mat.rows {
        for j in 0..g.mat.cols {
            v.push(g.mat[(i, j)].clone());
        }
    }
    v
}

impl fmt::Debug for HcPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HcPair(n={}, {:?})", self.model.n(), self.model.algebra())
    }
}

impl HcPair {
    pub fn new(model: GroupModel, alpha: Alpha) -> Arc<HcPair> {
        let env = Enveloping::new(model.algebra_arc());
        Arc::new(HcPair {
            model,
            alpha,
            env,
            alpha_cache: Mutex::new(HashMap::new()),
            alpha_uea_cache: Mutex::new(HashMap::new()),
            inv_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Cached group inverse.
    pub fn inv_point(&self, g: &GroupPoint) -> Result<GroupPoint> {
        let key = point_key(g);
        if let Some(hit) = self.inv_cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let inv = self.model.group_inv(g)?;
        self.inv_cache.lock().unwrap().insert(key, inv.clone());
        Ok(inv)
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn env(&self) -> &Enveloping {
        &self.env
    }

    pub fn algebra(&self) -> &LieSuperAlgebra {
        self.model.algebra()
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.algebra().dim()
    }

    /// alpha(g) on a coefficient vector.
    pub fn alpha_apply(&self, g: &GroupPoint, x: &[Scalar]) -> Result<Vec<Scalar>> {
        match &self.alpha {
            Alpha::Conjugation => self.model.ad_g(g, x),
            Alpha::OddScaledConjugation { factor } => {
                let dim = self.dim();
                let mut even = vec![Scalar::zero(); dim];
                let mut odd = vec![Scalar::zero(); dim];
                for (i, c) in x.iter().enumerate() {
                    match self.algebra().parity(i) {
                        Parity::Even => even[i] = c.clone(),
                        Parity::Odd => odd[i] = c.clone(),
                    }
                }
                let s = self.model.eval_expr(factor, g)?;
                let ce = self.model.ad_g(g, &even)?;
                let co = self.model.ad_g(g, &odd)?;
                Ok(ce
                    .into_iter()
                    .zip(co)
                    .map(|(a, b)| a + &(b * s.clone()))
                    .collect())
            }
        }
    }

    /// Matrix of alpha(g) (columns are images of basis vectors); cached per
    /// point.
    pub fn alpha_matrix(&self, g: &GroupPoint) -> Result<Mat> {
        let key = point_key(g);
        if let Some(hit) = self.alpha_cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let dim = self.dim();
        let mut m = Mat::zeros(dim, dim);
        for j in 0..dim {
            let mut x = vec![Scalar::zero(); dim];
            x[j] = Scalar::one();
            let img = self.alpha_apply(g, &x)?;
            for i in 0..dim {
                m[(i, j)] = img[i].clone();
            }
        }
        self.alpha_cache.lock().unwrap().insert(key, m.clone());
        Ok(m)
    }

    /// Multiplicative extension of alpha(g) from g to U(g), memoized per
    /// (point, monomial).
    pub fn alpha_apply_uea(&self, g: &GroupPoint, u: &UeaElement) -> Result<UeaElement> {
        let key_g = point_key(g);
        let mut out = UeaElement::zero();
        for (mono, c) in &u.terms {
            let key = (key_g.clone(), mono.clone());
            let hit = self.alpha_uea_cache.lock().unwrap().get(&key).cloned();
            let img = match hit {
                Some(v) => v,
                None => {
                    let m = self.alpha_matrix(g)?;
                    let v = self.env.map_letters(
                        &self.env,
                        &UeaElement::from_term(mono.clone(), Scalar::one()),
                        &m,
                    )?;
                    self.alpha_uea_cache
                        .lock()
                        .unwrap()
                        .insert(key, v.clone());
                    v
                }
            };
            out = out.add(&img.scale(c));
        }
        Ok(out)
    }

    /// alpha(g) extended to wedge words of the odd part.
    pub fn alpha_apply_ext(&self, g: &GroupPoint, word: &[usize]) -> Result<ExtElement> {
        let dim = self.dim();
        let mut acc = ExtElement::unit();
        for &letter in word {
            let mut x = vec![Scalar::zero(); dim];
            x[letter] = Scalar::one();
            let img = self.alpha_apply(g, &x)?;
            let mut lin = ExtElement::zero();
            for (i, c) in img.iter().enumerate() {
                if !c.is_zero() {
                    if self.algebra().parity(i) != Parity::Odd {
                        return Err(Error::ParityViolation(
                            "alpha does not preserve parity".into(),
                        ));
                    }
                    lin = lin.add(&ExtElement::generator(i).scale(c));
                }
            }
            acc = crate::envelope::ext_mul(&acc, &lin);
        }
        Ok(acc)
    }

    /// Derivative of `t -> alpha(I + tX)` at zero, applied to basis vector
    /// `y`; the pair axioms demand this equals `[X, y]`.
    fn alpha_differential(&self, x_even: usize, y: usize) -> Result<Vec<Scalar>> {
        let real = self.algebra().realization().expect("model has realization");
        let xm = &real.matrices[x_even];
        let ym = &real.matrices[y];
        let comm = xm.mul(ym)?.add(&ym.mul(xm)?.neg())?;
        let mut base = real.coords(&comm)?;
        if let Alpha::OddScaledConjugation { factor } = &self.alpha {
            if self.algebra().parity(y) == Parity::Odd {
                // product rule: the scaling factor contributes f'(e) y
                let jet = self.model.jet_point(&self.model.identity(), xm);
                let d = self.model.jet_eval(factor, &jet)?.der;
                base[y] += d;
            }
        }
        Ok(base)
    }

    /// Pair invariants: alpha(e) = id, parity preservation, restriction to
    /// Ad on the even part (on samples), and (d alpha)_e = ad (via jets).
    pub fn validate(&self, samples: &SampleSet) -> Report {
        let mut rep = Report::new();
        let dim = self.dim();
        let e = self.model.identity();
        // alpha(e) = id
        let mut id_ok = true;
        for j in 0..dim {
            let mut x = vec![Scalar::zero(); dim];
            x[j] = Scalar::one();
            match self.alpha_apply(&e, &x) {
                Ok(img) => {
                    if img != x {
                        id_ok = false;
                    }
                }
                Err(_) => id_ok = false,
            }
        }
        rep.record(id_ok, "pair.alpha-identity", "alpha(e) = id");
        // parity preservation and Ad-restriction on samples
        let mut parity_ok = true;
        let mut ad_ok = true;
        for g in &samples.points {
            for j in 0..dim {
                let mut x = vec![Scalar::zero(); dim];
                x[j] = Scalar::one();
                let Ok(img) = self.alpha_apply(g, &x) else {
                    parity_ok = false;
                    continue;
                };
                let p = self.algebra().parity(j);
                for (i, c) in img.iter().enumerate() {
                    if !c.is_zero() && self.algebra().parity(i) != p {
                        parity_ok = false;
                    }
                }
                if p == Parity::Even {
                    if let Ok(ad) = self.model.ad_g(g, &x) {
                        if ad != img {
                            ad_ok = false;
                        }
                    } else {
                        ad_ok = false;
                    }
                }
            }
        }
        rep.record(parity_ok, "pair.alpha-parity", "alpha preserves parity");
        rep.record(ad_ok, "pair.alpha-restricts-to-ad", "alpha = Ad on the even part");
        // (d alpha)_e = ad
        let mut dal_ok = true;
        let mut witness = String::new();
        for xi in 0..dim {
            if self.algebra().parity(xi) == Parity::Odd {
                continue;
            }
            for y in 0..dim {
                let lhs = match self.alpha_differential(xi, y) {
                    Ok(v) => v,
                    Err(_) => {
                        dal_ok = false;
                        continue;
                    }
                };
                let mut xv = vec![Scalar::zero(); dim];
                xv[xi] = Scalar::one();
                let mut yv = vec![Scalar::zero(); dim];
                yv[y] = Scalar::one();
                let rhs = self.algebra().bracket(&xv, &yv).expect("sized");
                if lhs != rhs && witness.is_empty() {
                    dal_ok = false;
                    witness = format!(
                        "at (X, Y) = ({}, {})",
                        self.algebra().basis().name(xi),
                        self.algebra().basis().name(y)
                    );
                }
            }
        }
        rep.record(
            dal_ok,
            "pair.alpha-differential",
            if dal_ok { "(d alpha)_e = ad".to_string() } else { witness },
        );
        rep
    }
}

/// Section of the structure sheaf, stored by its restriction to increasing
/// odd words (the `f . gamma` picture): one expression per supported word.
pub struct Section {
    pair: Arc<HcPair>,
    pub(crate) table: BTreeMap<Vec<usize>, FunctionExpr>,
    // per-monomial values of the U(g)-extension, built on demand
    mono_cache: Mutex<HashMap<PbwMonomial, FunctionExpr>>,
}

impl Clone for Section {
    fn clone(&self) -> Self {
        Section::raw(Arc::clone(&self.pair), self.table.clone())
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self
            .table
            .iter()
            .map(|(w, e)| format!("{w:?} -> {e}"))
            .collect();
        write!(f, "Section{{{}}}", entries.join(", "))
    }
}

impl Section {
    fn raw(pair: Arc<HcPair>, table: BTreeMap<Vec<usize>, FunctionExpr>) -> Section {
        Section {
            pair,
            table,
            mono_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn new(pair: Arc<HcPair>, table: BTreeMap<Vec<usize>, FunctionExpr>) -> Result<Section> {
        let alg = pair.algebra();
        for w in table.keys() {
            if !w.windows(2).all(|p| p[0] < p[1]) {
                return Err(Error::Invalid(format!("table word not increasing: {w:?}")));
            }
            for &i in w {
                if i >= alg.dim() || alg.parity(i) != Parity::Odd {
                    return Err(Error::Invalid(format!(
                        "table word {w:?} uses a non-odd index {i}"
                    )));
                }
            }
        }
        Ok(Section::raw(pair, table))
    }

    pub fn constant(pair: Arc<HcPair>, c: Scalar) -> Section {
        let mut table = BTreeMap::new();
        table.insert(Vec::new(), FunctionExpr::constant(c));
        Section::raw(pair, table)
    }

    pub fn unit(pair: Arc<HcPair>) -> Section {
        Section::constant(pair, Scalar::one())
    }

    pub fn zero(pair: Arc<HcPair>) -> Section {
        Section::raw(pair, BTreeMap::new())
    }

    /// Indicator of one wedge word with the given coefficient expression.
    pub fn indicator(pair: Arc<HcPair>, word: Vec<usize>, expr: FunctionExpr) -> Result<Section> {
        let mut table = BTreeMap::new();
        table.insert(word, expr);
        Section::new(pair, table)
    }

    pub fn pair(&self) -> &Arc<HcPair> {
        &self.pair
    }

    /// The stored restriction to odd wedge words.
    pub fn table(&self) -> &BTreeMap<Vec<usize>, FunctionExpr> {
        &self.table
    }

    fn same_pair(&self, other: &Section) -> Result<()> {
        if !Arc::ptr_eq(&self.pair, &other.pair) {
            return Err(Error::Invalid("sections over different pairs".into()));
        }
        Ok(())
    }

    /// Parity of a homogeneous section, `None` when table words mix parity.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.table.keys().map(|w| {
            if w.len() % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            }
        });
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Splits into (even, odd) table parts.
    pub fn parity_components(&self) -> (Section, Section) {
        let mut even = BTreeMap::new();
        let mut odd = BTreeMap::new();
        for (w, e) in &self.table {
            if w.len() % 2 == 0 {
                even.insert(w.clone(), e.clone());
            } else {
                odd.insert(w.clone(), e.clone());
            }
        }
        (
            Section::raw(Arc::clone(&self.pair), even),
            Section::raw(Arc::clone(&self.pair), odd),
        )
    }

    /// Keeps table words of length `p` (the Z-grading projection).
    pub fn grading_project(&self, p: usize) -> Section {
        Section::raw(
            Arc::clone(&self.pair),
            self.table
                .iter()
                .filter(|(w, _)| w.len() == p)
                .map(|(w, e)| (w.clone(), e.clone()))
                .collect(),
        )
    }

    pub fn max_word_len(&self) -> usize {
        self.table.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        self.same_pair(other)?;
        let mut table = self.table.clone();
        for (w, e) in &other.table {
            let entry = table
                .remove(w)
                .map(|prev| prev.add(e.clone()))
                .unwrap_or_else(|| e.clone());
            table.insert(w.clone(), entry);
        }
        Ok(Section::raw(Arc::clone(&self.pair), table))
    }

    pub fn scale(&self, c: &Scalar) -> Section {
        Section::raw(
            Arc::clone(&self.pair),
            self.table
                .iter()
                .map(|(w, e)| (w.clone(), e.clone().scale(c)))
                .collect(),
        )
    }

    /// Applies an even PBW element as iterated right-invariant derivations.
    /// The monomial `X1...Xk` acts as `D_{Xk} . ... . D_{X1}` (first letter
    /// innermost): since the derivations satisfy `[D_X, D_Y] = -D_{[X,Y]}`,
    /// this is the unique anti-homomorphic extension and so is independent of
    /// how a product is re-ordered before application.
    fn apply_even(&self, u0: &UeaElement, expr: &FunctionExpr) -> Result<FunctionExpr> {
        let model = self.pair.model();
        let dim = self.pair.dim();
        let mut out = FunctionExpr::zero();
        for (mono, c) in &u0.terms {
            debug_assert!(mono.odd.is_empty());
            let mut acc = expr.clone();
            for &letter in mono.even.iter() {
                let mut x = vec![Scalar::zero(); dim];
                x[letter] = Scalar::one();
                acc = model.riv_derive(&x, &acc)?;
            }
            out = out.add(acc.scale(c));
        }
        Ok(out)
    }

    /// The section's value at `u` as a coordinate expression: factorize
    /// `u = sum_w u0_w gamma(w)` and act with the even parts on the stored
    /// expressions. Per-monomial results are cached.
    pub fn eval_expr(&self, u: &UeaElement) -> Result<FunctionExpr> {
        let mut out = FunctionExpr::zero();
        for (mono, c) in &u.terms {
            out = out.add(self.mono_expr(mono)?.scale(c));
        }
        Ok(out)
    }

    fn mono_expr(&self, mono: &PbwMonomial) -> Result<FunctionExpr> {
        if let Some(hit) = self.mono_cache.lock().unwrap().get(mono) {
            return Ok(hit.clone());
        }
        let env = self.pair.env();
        let parts = env.pbw_factorize(&UeaElement::from_term(mono.clone(), Scalar::one()));
        let mut out = FunctionExpr::zero();
        for (w, u0) in &parts {
            let Some(expr) = self.table.get(w) else {
                continue;
            };
            out = out.add(self.apply_even(u0, expr)?);
        }
        self.mono_cache
            .lock()
            .unwrap()
            .insert(mono.clone(), out.clone());
        Ok(out)
    }

    /// Value of the section at an arbitrary element of U(g) at a point.
    pub fn eval(&self, u: &UeaElement, g: &GroupPoint) -> Result<Scalar> {
        let expr = self.eval_expr(u)?;
        self.pair.model().eval_expr(&expr, g)
    }

    /// Supercommutative product `Mult . (f1 (x) f2) . Delta` computed on
    /// tables: each disjoint word pair contributes with the shuffle sign
    /// times the Koszul evaluation sign `(-1)^{|w1||w2|}`.
    pub fn mul(&self, other: &Section) -> Result<Section> {
        self.same_pair(other)?;
        let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
        for (w1, e1) in &self.table {
            for (w2, e2) in &other.table {
                if w1.iter().any(|i| w2.contains(i)) {
                    continue;
                }
                let mut sign = crate::exactnum::shuffle_sign(w1, w2).expect("disjoint increasing");
                if (w1.len() * w2.len()) % 2 == 1 {
                    sign = -sign;
                }
                let mut merged: Vec<usize> = w1.iter().chain(w2.iter()).copied().collect();
                merged.sort_unstable();
                let term = e1
                    .clone()
                    .mul(e2.clone())
                    .scale(&crate::exactnum::sign_scalar(sign));
                let entry = table
                    .remove(&merged)
                    .map(|prev| prev.add(term.clone()))
                    .unwrap_or(term);
                table.insert(merged, entry);
            }
        }
        Ok(Section::raw(Arc::clone(&self.pair), table))
    }

    /// Table-level equality decided by evaluating entries on samples.
    pub fn eq_on(&self, other: &Section, samples: &SampleSet) -> Result<bool> {
        self.same_pair(other)?;
        let words: Vec<Vec<usize>> = self
            .table
            .keys()
            .chain(other.table.keys())
            .cloned()
            .collect();
        let zero = FunctionExpr::zero();
        for w in words {
            let a = self.table.get(&w).unwrap_or(&zero);
            let b = other.table.get(&w).unwrap_or(&zero);
            if !self.pair.model().expr_eq_on(a, b, samples)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluator view (arity-1 product section).
    pub fn lift(&self) -> ProductSection {
        let (even, odd) = self.parity_components();
        let mut comps = Vec::new();
        for (p, part) in [(Parity::Even, even), (Parity::Odd, odd)] {
            if part.table.is_empty() {
                continue;
            }
            let captured = part.clone();
            comps.push(ProdComp {
                parity: p,
                eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                    captured.eval(
                        &UeaElement::from_term(monos[0].clone(), Scalar::one()),
                        &pts[0],
                    )
                }),
            });
        }
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity: 1,
            comps,
        }
    }
}

type EvalFn = dyn Fn(&[PbwMonomial], &[GroupPoint]) -> Result<Scalar> + Send + Sync;

/// One homogeneous component of an evaluator section over a product of
/// copies of the group.
#[derive(Clone)]
pub struct ProdComp {
    pub parity: Parity,
    pub eval: Arc<EvalFn>,
}

/// Section over `G x ... x G` represented by exact evaluators on
/// `U(g)^{(x) arity}`, decomposed into parity-homogeneous components so the
/// Koszul signs of the product are available.
#[derive(Clone)]
pub struct ProductSection {
    pair: Arc<HcPair>,
    pub arity: usize,
    comps: Vec<ProdComp>,
}

impl ProductSection {
    pub fn pair(&self) -> &Arc<HcPair> {
        &self.pair
    }

    fn from_comp(
        pair: Arc<HcPair>,
        arity: usize,
        parity: Parity,
        eval: Arc<EvalFn>,
    ) -> ProductSection {
        ProductSection {
            pair,
            arity,
            comps: vec![ProdComp { parity, eval }],
        }
    }

    /// Value on a tensor element at a point tuple.
    pub fn eval(&self, t: &TensorElement, pts: &[GroupPoint]) -> Result<Scalar> {
        if t.factors != self.arity || pts.len() != self.arity {
            return Err(Error::DimensionMismatch("product section evaluation".into()));
        }
        let mut out = Scalar::zero();
        for comp in &self.comps {
            for (key, c) in &t.terms {
                out += c.clone() * (comp.eval)(key, pts)?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ProductSection) -> Result<ProductSection> {
        if !Arc::ptr_eq(&self.pair, &other.pair) || self.arity != other.arity {
            return Err(Error::Invalid("incompatible product sections".into()));
        }
        let mut comps = self.comps.clone();
        comps.extend(other.comps.iter().cloned());
        Ok(ProductSection {
            pair: Arc::clone(&self.pair),
            arity: self.arity,
            comps,
        })
    }

    pub fn scale(&self, c: &Scalar) -> ProductSection {
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let cc = c.clone();
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |m: &[PbwMonomial], p: &[GroupPoint]| {
                        Ok(cc.clone() * inner(m, p)?)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity: self.arity,
            comps,
        }
    }

    /// Product of two evaluator sections through the tensor coproduct with
    /// Koszul signs.
    pub fn mul(&self, other: &ProductSection) -> Result<ProductSection> {
        if !Arc::ptr_eq(&self.pair, &other.pair) || self.arity != other.arity {
            return Err(Error::Invalid("incompatible product sections".into()));
        }
        let mut comps = Vec::new();
        for a in &self.comps {
            for b in &other.comps {
                let ea = Arc::clone(&a.eval);
                let eb = Arc::clone(&b.eval);
                let pb = b.parity;
                let env = self.pair.env().clone();
                comps.push(ProdComp {
                    parity: a.parity.add(b.parity),
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        // Delta on each slot, with the regrouping Koszul sign
                        let mut total = Scalar::zero();
                        let mut terms: Vec<(Vec<PbwMonomial>, Vec<PbwMonomial>, Scalar)> =
                            vec![(Vec::new(), Vec::new(), Scalar::one())];
                        for m in monos {
                            let d = env.coproduct(&UeaElement::from_term(m.clone(), Scalar::one()));
                            let mut next = Vec::with_capacity(terms.len() * d.terms.len());
                            for (left, right, c) in &terms {
                                for (pairm, pc) in &d.terms {
                                    // moving pairm[0] (the new first-slot part)
                                    // left past the accumulated second-slot parts
                                    let mut sign = Scalar::one();
                                    if pairm[0].parity() == Parity::Odd {
                                        let swaps = right
                                            .iter()
                                            .filter(|m| m.parity() == Parity::Odd)
                                            .count();
                                        if swaps % 2 == 1 {
                                            sign = -sign;
                                        }
                                    }
                                    let mut l2 = left.clone();
                                    l2.push(pairm[0].clone());
                                    let mut r2 = right.clone();
                                    r2.push(pairm[1].clone());
                                    next.push((l2, r2, c.clone() * pc * sign));
                                }
                            }
                            terms = next;
                        }
                        for (left, right, c) in terms {
                            // Koszul evaluation sign (-1)^{p(f2) p(left)}
                            let pl: u8 = left
                                .iter()
                                .map(|m| m.parity().as_u8())
                                .fold(0, |a, b| a ^ b);
                            let mut sign = c;
                            if pb == Parity::Odd && pl == 1 {
                                sign = -sign;
                            }
                            let va = ea(&left, pts)?;
                            if va.is_zero() {
                                continue;
                            }
                            let vb = eb(&right, pts)?;
                            total += sign * va * vb;
                        }
                        Ok(total)
                    }),
                });
            }
        }
        Ok(ProductSection {
            pair: Arc::clone(&self.pair),
            arity: self.arity,
            comps,
        })
    }

    /// Pullback along multiplication of slots `slot, slot+1`:
    /// `F(..., X . alpha(g)(Y), ...)((..., gh, ...))`.
    pub fn mu_star_at(&self, slot: usize) -> ProductSection {
        let arity = self.arity + 1;
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let pair = Arc::clone(&self.pair);
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        let g = &pts[slot];
                        let h = &pts[slot + 1];
                        let y = UeaElement::from_term(monos[slot + 1].clone(), Scalar::one());
                        let ay = pair.alpha_apply_uea(g, &y)?;
                        let x = UeaElement::from_term(monos[slot].clone(), Scalar::one());
                        let merged = pair.env().mul(&x, &ay);
                        let gh = pair.model().group_mul(g, h)?;
                        let mut pts2: Vec<GroupPoint> = Vec::with_capacity(pts.len() - 1);
                        pts2.extend_from_slice(&pts[..slot]);
                        pts2.push(gh);
                        pts2.extend_from_slice(&pts[slot + 2..]);
                        let mut out = Scalar::zero();
                        for (m, c) in &merged.terms {
                            let mut key: Vec<PbwMonomial> = Vec::with_capacity(monos.len() - 1);
                            key.extend_from_slice(&monos[..slot]);
                            key.push(m.clone());
                            key.extend_from_slice(&monos[slot + 2..]);
                            out += c.clone() * inner(&key, &pts2)?;
                        }
                        Ok(out)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity,
            comps,
        }
    }

    /// Pullback along the unit in slot `slot` (drops one factor).
    pub fn eps_star_at(&self, slot: usize) -> ProductSection {
        let arity = self.arity - 1;
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let pair = Arc::clone(&self.pair);
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        let mut key: Vec<PbwMonomial> = Vec::with_capacity(monos.len() + 1);
                        key.extend_from_slice(&monos[..slot]);
                        key.push(PbwMonomial::unit());
                        key.extend_from_slice(&monos[slot..]);
                        let mut pts2: Vec<GroupPoint> = Vec::with_capacity(pts.len() + 1);
                        pts2.extend_from_slice(&pts[..slot]);
                        pts2.push(pair.model().identity());
                        pts2.extend_from_slice(&pts[slot..]);
                        inner(&key, &pts2)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity,
            comps,
        }
    }

    /// Pullback along inversion in slot `slot`:
    /// `F(..., alpha(g^{-1})(S(X)), ...)(..., g^{-1}, ...)`.
    pub fn iota_star_at(&self, slot: usize) -> ProductSection {
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let pair = Arc::clone(&self.pair);
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        let g_inv = pair.inv_point(&pts[slot])?;
                        let s = pair
                            .env()
                            .antipode(&UeaElement::from_term(monos[slot].clone(), Scalar::one()));
                        let arg = pair.alpha_apply_uea(&g_inv, &s)?;
                        let mut pts2 = pts.to_vec();
                        pts2[slot] = g_inv;
                        let mut out = Scalar::zero();
                        for (m, c) in &arg.terms {
                            let mut key = monos.to_vec();
                            key[slot] = m.clone();
                            out += c.clone() * inner(&key, &pts2)?;
                        }
                        Ok(out)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity: self.arity,
            comps,
        }
    }

    /// Pullback along the diagonal merging slots `slot, slot+1` into one:
    /// the argument is spread by the coproduct.
    pub fn diag_star_at(&self, slot: usize) -> ProductSection {
        let arity = self.arity - 1;
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let pair = Arc::clone(&self.pair);
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        let d = pair
                            .env()
                            .coproduct(&UeaElement::from_term(monos[slot].clone(), Scalar::one()));
                        let mut pts2: Vec<GroupPoint> = Vec::with_capacity(pts.len() + 1);
                        pts2.extend_from_slice(&pts[..=slot]);
                        pts2.push(pts[slot].clone());
                        pts2.extend_from_slice(&pts[slot + 1..]);
                        let mut out = Scalar::zero();
                        for (pairm, c) in &d.terms {
                            let mut key: Vec<PbwMonomial> = Vec::with_capacity(monos.len() + 1);
                            key.extend_from_slice(&monos[..slot]);
                            key.push(pairm[0].clone());
                            key.push(pairm[1].clone());
                            key.extend_from_slice(&monos[slot + 1..]);
                            out += c.clone() * inner(&key, &pts2)?;
                        }
                        Ok(out)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity,
            comps,
        }
    }

    /// Pullback along the projection that forgets slot `slot` of the source:
    /// inserts a slot that must carry the unit (otherwise the value is zero).
    pub fn pr_star_insert(&self, slot: usize) -> ProductSection {
        let arity = self.arity + 1;
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        if !monos[slot].is_unit() {
                            return Ok(Scalar::zero());
                        }
                        let mut key: Vec<PbwMonomial> = Vec::with_capacity(monos.len() - 1);
                        key.extend_from_slice(&monos[..slot]);
                        key.extend_from_slice(&monos[slot + 1..]);
                        let mut pts2: Vec<GroupPoint> = Vec::with_capacity(pts.len() - 1);
                        pts2.extend_from_slice(&pts[..slot]);
                        pts2.extend_from_slice(&pts[slot + 1..]);
                        inner(&key, &pts2)
                    }),
                }
            })
            .collect();
        ProductSection {
            pair: Arc::clone(&self.pair),
            arity,
            comps,
        }
    }
}

/// Multiplication pullback of a table section, as a two-factor evaluator.
pub fn mu_star(f: &Section) -> ProductSection {
    f.lift().mu_star_at(0)
}

/// Inversion pullback (arity-1 evaluator).
pub fn iota_star(f: &Section) -> ProductSection {
    f.lift().iota_star_at(0)
}

/// Identity-morphism pullback: `eps*(f) = f(1)(e)`.
pub fn eps_star(f: &Section) -> Result<Scalar> {
    f.eval(&UeaElement::unit(), &f.pair().model().identity())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Translation pullbacks in closed form on tables:
/// `l_g*(f)(u)(h) = f(alpha(g)(u))(gh)` and `r_g*(f)(u)(h) = f(u)(hg)`.
pub fn translate(side: Side, g: &GroupPoint, f: &Section) -> Result<Section> {
    let pair = Arc::clone(f.pair());
    let n = pair.model().n();
    let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
    match side {
        Side::Right => {
            for (w, e) in &f.table {
                table.insert(w.clone(), e.subst_translate(None, Some(&g.mat), n)?);
            }
        }
        Side::Left => {
            // T'[w] = sum_{w'} [alpha(g) w]_{w'} f.table[w'] composed with
            // left multiplication: the argument word is expanded, not the
            // support (the two differ once alpha(g) is non-diagonal)
            for w in all_odd_words(pair.algebra()) {
                let img = pair.alpha_apply_ext(g, &w)?;
                let mut expr = FunctionExpr::zero();
                for (w2, c) in &img.terms {
                    if let Some(e) = f.table.get(w2) {
                        expr = expr.add(e.subst_translate(Some(&g.mat), None, n)?.scale(c));
                    }
                }
                if !expr.is_zero_literal() {
                    table.insert(w, expr);
                }
            }
        }
    }
    Section::new(pair, table)
}

/// Conjugation pullback `omega_g* = r_{g^{-1}}* . l_g*`.
pub fn omega_star(g: &GroupPoint, f: &Section) -> Result<Section> {
    let g_inv = f.pair().model().group_inv(g)?;
    let lg = translate(Side::Left, g, f)?;
    translate(Side::Right, &g_inv, &lg)
}

/// Extracts the matrix of `(d omega_g)_e` from translated sections: odd
/// columns from indicator tables, even columns from jet derivatives of
/// translated coordinate sections; asserts agreement with the conjugation
/// route `ad_g` and returns the matrix.
pub fn ad_from_translations(pair: &Arc<HcPair>, g: &GroupPoint) -> Result<Mat> {
    let alg = pair.algebra();
    let dim = alg.dim();
    let model = pair.model();
    let real = alg.realization().expect("model has realization");
    let mut m = Mat::zeros(dim, dim);
    let e = model.identity();
    // odd part: pair translated indicators against single odd letters
    for j in alg.basis().odd_indices() {
        let f_j = Section::indicator(Arc::clone(pair), vec![j], FunctionExpr::one())?;
        let w = omega_star(g, &f_j)?;
        for i in alg.basis().odd_indices() {
            if let Some(expr) = w.table.get(&vec![i]) {
                m[(j, i)] = model.eval_expr(expr, &e)?;
            }
        }
    }
    // even part: jet-differentiate translated coordinate sections
    let n = model.n();
    let mut der = vec![Mat::zeros(n, n); dim];
    for a in 0..n {
        for b in 0..n {
            let f_ab = Section::indicator(Arc::clone(pair), vec![], FunctionExpr::coord(a, b))?;
            let w = omega_star(g, &f_ab)?;
            let expr = w.table.get(&vec![]).cloned().unwrap_or_else(FunctionExpr::zero);
            for k in 0..dim {
                if alg.parity(k) == Parity::Even {
                    let jet = model.jet_point(&e, &real.matrices[k]);
                    der[k][(a, b)] = model.jet_eval(&expr, &jet)?.der;
                }
            }
        }
    }
    for k in 0..dim {
        if alg.parity(k) == Parity::Even {
            let coords = real.coords(&der[k])?;
            for i in 0..dim {
                m[(i, k)] = coords[i].clone();
            }
        }
    }
    // the two routes to Ad must agree
    for k in 0..dim {
        let mut x = vec![Scalar::zero(); dim];
        x[k] = Scalar::one();
        let via_conj = model.ad_g(g, &x)?;
        let via_trans: Vec<Scalar> = (0..dim).map(|i| m[(i, k)].clone()).collect();
        if via_conj != via_trans {
            return Err(Error::Invalid(format!(
                "Ad routes disagree at basis {} over {g:?}",
                alg.basis().name(k)
            )));
        }
    }
    Ok(m)
}

/// Sign convention for the right-invariant field action on sections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSign {
    /// `field_X(f)(u) = (-1)^{p(X)p(f)} f(X u)` (passes super-Leibniz).
    Koszul,
    /// `field_X(f)(u) = f(X u)` with no sign (fails super-Leibniz; kept so
    /// the suite can reject it explicitly).
    Plain,
}

/// Adjoint derivation of an even direction on U(g): each letter is bracketed
/// in place (no Koszul signs, the direction is even).
fn ad_even_derivation(env: &Enveloping, x: &[Scalar], u: &UeaElement) -> UeaElement {
    let alg = env.algebra();
    let mut out = UeaElement::zero();
    for (mono, c) in &u.terms {
        let word = mono.word();
        for pos in 0..word.len() {
            let mut lv = vec![Scalar::zero(); alg.dim()];
            lv[word[pos]] = Scalar::one();
            let br = alg.bracket(x, &lv).expect("sized");
            for (k, bc) in br.iter().enumerate() {
                if bc.is_zero() {
                    continue;
                }
                let mut w2 = word.clone();
                w2[pos] = k;
                out = out.add(&env.normalize_word(&w2, c.clone() * bc));
            }
        }
    }
    out
}

/// Right-invariant vector field of a homogeneous algebra element applied to
/// a section, computed on tables through the PBW factorization.
///
/// Both cases come from pairing the tangent vector at the identity with the
/// first slot of the multiplication pullback `f(X . alpha(g)(Y))(gh)`:
///   odd X:  pure argument insertion, `field_X(f)(u) = sigma f(X u)` with
///           `sigma = (-1)^{p(X)p(f)}`;
///   even X: the product rule hits the alpha twist and the point, giving
///           `field_X(f)(u) = f(ad_X(u)) + D_X(f(u))`.
pub fn field_apply_with_sign(
    pair: &Arc<HcPair>,
    x: &[Scalar],
    f: &Section,
    sign: FieldSign,
) -> Result<Section> {
    let alg = pair.algebra();
    let dim = alg.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch("field direction".into()));
    }
    let env = pair.env();
    let mut out = Section::zero(Arc::clone(pair));
    let odd_words = all_odd_words(alg);

    // even component: f(ad_X(gamma(w))) + D_X(f(gamma(w)))
    let mut x_even = vec![Scalar::zero(); dim];
    let mut has_even = false;
    for (i, c) in x.iter().enumerate() {
        if alg.parity(i) == Parity::Even && !c.is_zero() {
            x_even[i] = c.clone();
            has_even = true;
        }
    }
    if has_even {
        let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
        for w in &odd_words {
            let gw = env.gamma(&ExtElement::from_term(w.clone(), Scalar::one()));
            let ad_part = ad_even_derivation(env, &x_even, &gw);
            let mut expr = f.eval_expr(&ad_part)?;
            if let Some(stored) = f.table.get(w) {
                expr = expr.add(pair.model().riv_derive(&x_even, stored)?);
            }
            if !expr.is_zero_literal() {
                table.insert(w.clone(), expr);
            }
        }
        out = out.add(&Section::new(Arc::clone(pair), table)?)?;
    }

    // odd component: sigma f(X gamma(w)) per parity part of f
    let mut x_odd = UeaElement::zero();
    let mut has_odd = false;
    for (i, c) in x.iter().enumerate() {
        if alg.parity(i) == Parity::Odd && !c.is_zero() {
            x_odd = x_odd.add(&UeaElement::letter(alg, i).scale(c));
            has_odd = true;
        }
    }
    if has_odd {
        let (f_even, f_odd) = f.parity_components();
        for (f_parity, part) in [(Parity::Even, f_even), (Parity::Odd, f_odd)] {
            if part.table.is_empty() {
                continue;
            }
            let negate = sign == FieldSign::Koszul && f_parity == Parity::Odd;
            let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
            for w in &odd_words {
                let gw = env.gamma(&ExtElement::from_term(w.clone(), Scalar::one()));
                let xg = env.mul(&x_odd, &gw);
                let mut expr = part.eval_expr(&xg)?;
                if negate {
                    expr = expr.neg();
                }
                if !expr.is_zero_literal() {
                    table.insert(w.clone(), expr);
                }
            }
            out = out.add(&Section::new(Arc::clone(pair), table)?)?;
        }
    }
    Ok(out)
}

/// Canonical field action (Koszul sign).
pub fn field_apply(pair: &Arc<HcPair>, x: &[Scalar], f: &Section) -> Result<Section> {
    field_apply_with_sign(pair, x, f, FieldSign::Koszul)
}

fn all_odd_words(alg: &LieSuperAlgebra) -> Vec<Vec<usize>> {
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

/// Split verdict for a pair (or bare algebra): the odd-odd bracket either
/// vanishes identically or a witness pair of odd basis vectors is returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitVerdict {
    Split,
    Witness(usize, usize),
}

pub fn split_check(alg: &LieSuperAlgebra) -> SplitVerdict {
    let odd: Vec<usize> = alg.basis().odd_indices().collect();
    for &i in &odd {
        for &j in &odd {
            if i <= j && !alg.bracket_basis(i, j).is_empty() {
                return SplitVerdict::Witness(i, j);
            }
        }
    }
    SplitVerdict::Split
}

/// For split pairs, checks that the multiplication pullback preserves the
/// Z-grading on a sample suite: evaluating `mu*(f)` of a degree-p section on
/// tensor monomials of odd total degree different from p gives zero.
pub fn split_degree_preservation(
    pair: &Arc<HcPair>,
    samples: &SampleSet,
    sections: &[Section],
) -> Result<Report> {
    let mut rep = Report::new();
    let alg = pair.algebra();
    let words = all_odd_words(alg);
    let mut ok = true;
    let mut witness = String::new();
    for f in sections {
        let degrees: Vec<usize> = f.table.keys().map(Vec::len).collect();
        let Some(&p) = degrees.first() else { continue };
        if degrees.iter().any(|d| *d != p) {
            continue;
        }
        let m = mu_star(f);
        for w1 in &words {
            for w2 in &words {
                if w1.len() + w2.len() == p {
                    continue;
                }
                let t = TensorElement::pure(
                    vec![
                        PbwMonomial { even: vec![], odd: w1.clone() },
                        PbwMonomial { even: vec![], odd: w2.clone() },
                    ],
                    Scalar::one(),
                );
                for g in &samples.points {
                    for h in &samples.points {
                        let v = m.eval(&t, &[g.clone(), h.clone()])?;
                        if !v.is_zero() && ok {
                            ok = false;
                            witness = format!("degree {p} section leaks to {:?}/{:?}", w1, w2);
                        }
                    }
                }
            }
        }
    }
    rep.record(
        ok,
        "split.mu-star-preserves-degree",
        if ok { "graded on samples".to_string() } else { witness },
    );
    Ok(rep)
}

/// Test family: wedge-word indicators times a few reduced coordinate
/// expressions, enough to separate the structure maps on samples.
pub fn test_sections(pair: &Arc<HcPair>) -> Vec<Section> {
    let model = pair.model();
    let n = model.n();
    let mut exprs = vec![FunctionExpr::one()];
    'outer: for i in 0..n {
        for j in 0..n {
            if matches!(model.pattern()[i][j], crate::groupmodel::MaskEntry::Free) {
                exprs.push(FunctionExpr::coord(i, j));
                if exprs.len() >= 3 {
                    break 'outer;
                }
            }
        }
    }
    exprs.push(FunctionExpr::DetInv);
    let mut out = Vec::new();
    for w in all_odd_words(pair.algebra()) {
        for e in &exprs {
            out.push(
                Section::indicator(Arc::clone(pair), w.clone(), e.clone())
                    .expect("valid indicator"),
            );
        }
    }
    out
}

/// Group-object axioms verified as identities of evaluated pullbacks:
/// associativity, both unit laws and both inverse laws, on all tensor
/// monomials up to the degree bound over the sample grid.
pub fn group_axiom_check(
    pair: &Arc<HcPair>,
    samples: &SampleSet,
    degree: usize,
) -> Result<Report> {
    let mut rep = Report::new();
    let env = pair.env();
    let monos = env.pbw_monomials_up_to(degree);
    let sections = test_sections(pair);
    // cap the evaluation grid at desk scale
    let pts: Vec<GroupPoint> = samples.points.iter().take(4).cloned().collect();
    let e = pair.model().identity();

    // associativity: (mu x id)* mu* = (id x mu)* mu*
    let mut assoc_ok = true;
    let mut assoc_witness = String::new();
    'assoc: for f in &sections {
        let m = mu_star(f);
        let left = m.mu_star_at(0);
        let right = m.mu_star_at(1);
        for m1 in &monos {
            for m2 in &monos {
                for m3 in &monos {
                    if m1.degree() + m2.degree() + m3.degree() > degree {
                        continue;
                    }
                    let t = TensorElement::pure(
                        vec![m1.clone(), m2.clone(), m3.clone()],
                        Scalar::one(),
                    );
                    for g in &pts {
                        for h in &pts {
                            for k in &pts {
                                let tuple = [g.clone(), h.clone(), k.clone()];
                                if left.eval(&t, &tuple)? != right.eval(&t, &tuple)? {
                                    assoc_ok = false;
                                    assoc_witness = format!(
                                        "at {m1:?} (x) {m2:?} (x) {m3:?}, ({g:?},{h:?},{k:?})"
                                    );
                                    break 'assoc;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rep.record(assoc_ok, "group.associativity", if assoc_ok { "exact".into() } else { assoc_witness });

    // unit laws
    let mut unit_ok = true;
    let mut unit_witness = String::new();
    'unit: for f in &sections {
        let m = mu_star(f);
        let left = m.eps_star_at(0);
        let right = m.eps_star_at(1);
        for mono in &monos {
            let t = TensorElement::pure(vec![mono.clone()], Scalar::one());
            for g in &pts {
                let want = f.eval(&UeaElement::from_term(mono.clone(), Scalar::one()), g)?;
                if left.eval(&t, &[g.clone()])? != want || right.eval(&t, &[g.clone()])? != want {
                    unit_ok = false;
                    unit_witness = format!("at {mono:?}, {g:?}");
                    break 'unit;
                }
            }
        }
    }
    rep.record(unit_ok, "group.unit-laws", if unit_ok { "exact".into() } else { unit_witness });

    // inverse laws: diag* (iota x id)* mu* (f) = eps*(f) . counit
    let mut inv_ok = true;
    let mut inv_witness = String::new();
    'inv: for f in &sections {
        let m = mu_star(f);
        let left = m.iota_star_at(0).diag_star_at(0);
        let right = m.iota_star_at(1).diag_star_at(0);
        let c = eps_star(f)?;
        for mono in &monos {
            let t = TensorElement::pure(vec![mono.clone()], Scalar::one());
            let want = c.clone()
                * env.counit(&UeaElement::from_term(mono.clone(), Scalar::one()));
            for g in &pts {
                if left.eval(&t, &[g.clone()])? != want || right.eval(&t, &[g.clone()])? != want {
                    inv_ok = false;
                    inv_witness = format!("at {mono:?}, {g:?}");
                    break 'inv;
                }
            }
        }
        let _ = e;
    }
    rep.record(inv_ok, "group.inverse-laws", if inv_ok { "exact".into() } else { inv_witness });

    Ok(rep)
}

/// Reduced-group part of a pair morphism, evaluable on points and jets.
#[derive(Clone, Debug)]
pub enum GroupMap {
    Identity,
    /// `g -> a g a^{-1}`.
    Conjugation(Mat),
    Compose(Box<GroupMap>, Box<GroupMap>),
}

impl GroupMap {
    pub fn apply(&self, m: &Mat) -> Result<Mat> {
        match self {
            GroupMap::Identity => Ok(m.clone()),
            GroupMap::Conjugation(a) => a.mul(m)?.mul(&a.inverse()?),
            GroupMap::Compose(f, g) => f.apply(&g.apply(m)?),
        }
    }

    pub fn apply_jet(&self, m: &Mat<Jet1>) -> Result<Mat<Jet1>> {
        match self {
            GroupMap::Identity => Ok(m.clone()),
            GroupMap::Conjugation(a) => {
                let lift = |x: &Mat| Mat::from_fn(x.rows, x.cols, |i, j| Jet1::constant(x[(i, j)].clone()));
                lift(a).mul(m)?.mul(&lift(&a.inverse()?))
            }
            GroupMap::Compose(f, g) => f.apply_jet(&g.apply_jet(m)?),
        }
    }
}

/// Morphism of Harish-Chandra pairs: a group map and a compatible algebra
/// map (columns of `phi_alg` are images of source basis vectors in target
/// coordinates).
#[derive(Clone)]
pub struct HcMorphism {
    pub src: Arc<HcPair>,
    pub dst: Arc<HcPair>,
    pub phi_red: GroupMap,
    pub phi_alg: Mat,
}

impl HcMorphism {
    /// Constructor that does not verify the morphism invariants; used for
    /// mutation fixtures. Use [`HcMorphism::validate`] before trusting one.
    pub fn new_unchecked(
        src: Arc<HcPair>,
        dst: Arc<HcPair>,
        phi_red: GroupMap,
        phi_alg: Mat,
    ) -> HcMorphism {
        HcMorphism {
            src,
            dst,
            phi_red,
            phi_alg,
        }
    }

    pub fn identity(pair: &Arc<HcPair>) -> HcMorphism {
        HcMorphism {
            src: Arc::clone(pair),
            dst: Arc::clone(pair),
            phi_red: GroupMap::Identity,
            phi_alg: Mat::identity(pair.dim()),
        }
    }

    pub fn apply_red(&self, g: &GroupPoint) -> Result<GroupPoint> {
        self.dst.model().point(self.phi_red.apply(&g.mat)?)
    }

    pub fn apply_alg(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.src.dim() {
            return Err(Error::DimensionMismatch("morphism algebra map".into()));
        }
        Ok((0..self.dst.dim())
            .map(|i| {
                (0..self.src.dim())
                    .map(|j| self.phi_alg[(i, j)].clone() * x[j].clone())
                    .fold(Scalar::zero(), |a, b| a + b)
            })
            .collect())
    }

    /// Morphism invariants: parity preservation, bracket preservation,
    /// `(d Phi)_e = phi` on the even part (jets), the intertwining law
    /// `phi . alpha_G(g) = alpha_H(Phi g) . phi` on samples, and that the
    /// reduced map is a homomorphism on samples.
    pub fn validate(&self, samples: &SampleSet) -> Report {
        let mut rep = Report::new();
        let sdim = self.src.dim();
        let salg = self.src.algebra();
        let dalg = self.dst.algebra();
        // parity preservation
        let mut parity_ok = true;
        for j in 0..sdim {
            for i in 0..self.dst.dim() {
                if !self.phi_alg[(i, j)].is_zero() && salg.parity(j) != dalg.parity(i) {
                    parity_ok = false;
                }
            }
        }
        rep.record(parity_ok, "morphism.parity", "phi preserves parity");
        // bracket preservation
        let mut bracket_ok = true;
        for a in 0..sdim {
            for b in 0..sdim {
                let mut xa = vec![Scalar::zero(); sdim];
                xa[a] = Scalar::one();
                let mut xb = vec![Scalar::zero(); sdim];
                xb[b] = Scalar::one();
                let lhs = self
                    .apply_alg(&salg.bracket(&xa, &xb).expect("sized"))
                    .expect("sized");
                let rhs = dalg
                    .bracket(&self.apply_alg(&xa).unwrap(), &self.apply_alg(&xb).unwrap())
                    .expect("sized");
                if lhs != rhs {
                    bracket_ok = false;
                }
            }
        }
        rep.record(bracket_ok, "morphism.bracket", "phi preserves brackets");
        // (d Phi)_e = phi restricted to the even part
        let mut diff_ok = true;
        let sreal = salg.realization().expect("model has realization");
        let dreal = dalg.realization().expect("model has realization");
        for j in 0..sdim {
            if salg.parity(j) == Parity::Odd {
                continue;
            }
            let jet = self
                .src
                .model()
                .jet_point(&self.src.model().identity(), &sreal.matrices[j]);
            match self.phi_red.apply_jet(&jet) {
                Ok(img) => {
                    let der = Mat::from_fn(img.rows, img.cols, |a, b| img[(a, b)].der.clone());
                    match dreal.coords(&der) {
                        Ok(coords) => {
                            let mut x = vec![Scalar::zero(); sdim];
                            x[j] = Scalar::one();
                            if coords != self.apply_alg(&x).unwrap() {
                                diff_ok = false;
                            }
                        }
                        Err(_) => diff_ok = false,
                    }
                }
                Err(_) => diff_ok = false,
            }
        }
        rep.record(diff_ok, "morphism.differential", "(d Phi)_e = phi on g0");
        // intertwining with alpha on samples
        let mut twine_ok = true;
        for g in &samples.points {
            let Ok(pg) = self.apply_red(g) else {
                twine_ok = false;
                continue;
            };
            for j in 0..sdim {
                let mut x = vec![Scalar::zero(); sdim];
                x[j] = Scalar::one();
                let lhs = self
                    .apply_alg(&self.src.alpha_apply(g, &x).unwrap())
                    .unwrap();
                let rhs = self
                    .dst
                    .alpha_apply(&pg, &self.apply_alg(&x).unwrap())
                    .unwrap();
                if lhs != rhs {
                    twine_ok = false;
                }
            }
        }
        rep.record(twine_ok, "morphism.alpha-intertwine", "phi alpha_G = alpha_H phi");
        // reduced homomorphism on samples
        let mut hom_ok = true;
        for a in &samples.points {
            for b in &samples.points {
                let lhs = self
                    .apply_red(&self.src.model().group_mul(a, b).unwrap())
                    .unwrap();
                let rhs = self
                    .dst
                    .model()
                    .group_mul(&self.apply_red(a).unwrap(), &self.apply_red(b).unwrap())
                    .unwrap();
                if lhs != rhs {
                    hom_ok = false;
                }
            }
        }
        rep.record(hom_ok, "morphism.reduced-homomorphism", "Phi(ab) = Phi(a)Phi(b)");
        rep
    }

    /// Pullback `Psi*(f)(X)(g) = f(phi(X))(Phi(g))` as an evaluator over the
    /// source pair.
    pub fn pullback(&self, f: &Section) -> Result<ProductSection> {
        if !Arc::ptr_eq(f.pair(), &self.dst) {
            return Err(Error::Invalid("pullback of a section over the wrong pair".into()));
        }
        let parity = f.parity().unwrap_or(Parity::Even);
        let morphism = self.clone();
        let captured = f.clone();
        Ok(ProductSection::from_comp(
            Arc::clone(&self.src),
            1,
            parity,
            Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                let u = UeaElement::from_term(monos[0].clone(), Scalar::one());
                let mapped = morphism
                    .src
                    .env()
                    .map_letters(morphism.dst.env(), &u, &morphism.phi_alg)?;
                let target_point = morphism.apply_red(&pts[0])?;
                captured.eval(&mapped, &target_point)
            }),
        ))
    }

    /// Pullback of a two-factor evaluator along `Psi x Psi`.
    pub fn pullback_product(&self, f2: &ProductSection) -> Result<ProductSection> {
        if !Arc::ptr_eq(f2.pair(), &self.dst) || f2.arity != 2 {
            return Err(Error::Invalid("pullback_product expects arity 2 over dst".into()));
        }
        let comps = f2
            .comps
            .iter()
            .map(|comp| {
                let inner = Arc::clone(&comp.eval);
                let morphism = self.clone();
                ProdComp {
                    parity: comp.parity,
                    eval: Arc::new(move |monos: &[PbwMonomial], pts: &[GroupPoint]| {
                        let mut out = Scalar::zero();
                        let u = morphism.src.env().map_letters(
                            morphism.dst.env(),
                            &UeaElement::from_term(monos[0].clone(), Scalar::one()),
                            &morphism.phi_alg,
                        )?;
                        let v = morphism.src.env().map_letters(
                            morphism.dst.env(),
                            &UeaElement::from_term(monos[1].clone(), Scalar::one()),
                            &morphism.phi_alg,
                        )?;
                        let pg = morphism.apply_red(&pts[0])?;
                        let ph = morphism.apply_red(&pts[1])?;
                        for (mu, cu) in &u.terms {
                            for (mv, cv) in &v.terms {
                                let key = [mu.clone(), mv.clone()];
                                out += cu.clone()
                                    * cv.clone()
                                    * inner(&key, &[pg.clone(), ph.clone()])?;
                            }
                        }
                        Ok(out)
                    }),
                }
            })
            .collect();
        Ok(ProductSection {
            pair: Arc::clone(&self.src),
            arity: 2,
            comps,
        })
    }

    /// Checks `Psi . mu_G = mu_H . (Psi x Psi)` on the sample grid.
    pub fn homomorphism_check(&self, samples: &SampleSet, degree: usize) -> Result<Report> {
        let mut rep = Report::new();
        let monos = self.src.env().pbw_monomials_up_to(degree);
        let sections = test_sections(&self.dst);
        let pts: Vec<GroupPoint> = samples.points.iter().take(4).cloned().collect();
        let mut ok = true;
        let mut witness = String::new();
        'outer: for f in &sections {
            let lhs = self.pullback(f)?.mu_star_at(0);
            let rhs = self.pullback_product(&mu_star(f))?;
            for m1 in &monos {
                for m2 in &monos {
                    if m1.degree() + m2.degree() > degree {
                        continue;
                    }
                    let t =
                        TensorElement::pure(vec![m1.clone(), m2.clone()], Scalar::one());
                    for g in &pts {
                        for h in &pts {
                            let tuple = [g.clone(), h.clone()];
                            if lhs.eval(&t, &tuple)? != rhs.eval(&t, &tuple)? {
                                ok = false;
                                witness = format!("at {m1:?} (x) {m2:?}");
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        rep.record(ok, "morphism.mu-compatibility", if ok { "exact".into() } else { witness });
        Ok(rep)
    }
}

/// Instance-level morphism uniqueness: when two morphisms share the reduced
/// map (on samples) and the algebra map, their pullbacks agree on every
/// basis monomial and sample; otherwise the lowest-degree disagreement is
/// reported.
pub fn morphism_uniqueness_check(
    m1: &HcMorphism,
    m2: &HcMorphism,
    samples: &SampleSet,
    degree: usize,
) -> Result<Report> {
    let mut rep = Report::new();
    if !Arc::ptr_eq(&m1.src, &m2.src) || !Arc::ptr_eq(&m1.dst, &m2.dst) {
        rep.fail("uniqueness.setup", "morphisms relate different pairs");
        return Ok(rep);
    }
    let mut red_eq = true;
    for g in &samples.points {
        if m1.apply_red(g)? != m2.apply_red(g)? {
            red_eq = false;
        }
    }
    let alg_eq = m1.phi_alg == m2.phi_alg;
    rep.record(red_eq, "uniqueness.reduced-maps-agree", "Phi1 = Phi2 on samples");
    rep.record(alg_eq, "uniqueness.algebra-maps-agree", "phi1 = phi2");

    let monos = m1.src.env().pbw_monomials_up_to(degree);
    let sections = test_sections(&m1.dst);
    let mut pull_eq = true;
    let mut witness = String::new();
    let mut witness_degree = usize::MAX;
    for f in &sections {
        let p1 = m1.pullback(f)?;
        let p2 = m2.pullback(f)?;
        for mono in &monos {
            let t = TensorElement::pure(vec![mono.clone()], Scalar::one());
            for g in &samples.points {
                if p1.eval(&t, &[g.clone()])? != p2.eval(&t, &[g.clone()])? {
                    pull_eq = false;
                    if mono.degree() < witness_degree {
                        witness_degree = mono.degree();
                        witness = format!("disagree at {mono:?} over {g:?}");
                    }
                }
            }
        }
    }
    let agree_expected = red_eq && alg_eq;
    if agree_expected {
        rep.record(pull_eq, "uniqueness.pullbacks-agree", if pull_eq { "all monomials and samples".into() } else { witness });
    } else {
        // data differ: the pullbacks must expose it
        rep.record(
            !pull_eq,
            "uniqueness.perturbation-detected",
            if pull_eq {
                "distinct data with identical pullbacks".to_string()
            } else {
                format!("{witness} (degree {witness_degree})")
            },
        );
    }
    Ok(rep)
}
