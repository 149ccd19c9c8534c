//! The enveloping superalgebra U(g): PBW normal form via adjacent-transposition
//! rewriting, the Hopf operations (coproduct, antipode, counit), the exterior
//! coalgebra on the odd part, the symmetrization map gamma, and the PBW
//! factorization U(g) = U(g0) (x) /\g1.
//!
//! Sign conventions: tensor factors multiply with the Koszul exchange sign
//! `(a (x) b)(c (x) d) = (-1)^{p(b)p(c)} ac (x) bd`, the twist is
//! `T^s(a (x) b) = (-1)^{p(a)p(b)} b (x) a`, and the antipode satisfies
//! `S(X) = -X` on generators with `S(YZ) = (-1)^{p(Y)p(Z)} S(Z) S(Y)`.
//! The Hopf axiom suite pins all of these down; mutated conventions are
//! injectable there so the suite's discriminating power is itself tested.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exactnum::{shuffle_sign, sign_scalar, Scalar};
use crate::liesuper::{LieSuperAlgebra, Parity};
use crate::linalg::Mat;
use crate::report::Report;

/// PBW basis monomial: sorted even letters, strictly increasing odd letters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PbwMonomial {
    pub even: Vec<usize>,
    pub odd: Vec<usize>,
}

impl PbwMonomial {
    pub fn unit() -> Self {
        PbwMonomial::default()
    }

    pub fn is_unit(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn parity(&self) -> Parity {
        if self.odd.len() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Letters in normal order (evens then odds).
    pub fn word(&self) -> Vec<usize> {
        let mut w = self.even.clone();
        w.extend_from_slice(&self.odd);
        w
    }

    fn from_sorted_word(alg: &LieSuperAlgebra, word: &[usize]) -> Self {
        let split = word.partition_point(|&x| alg.parity(x) == Parity::Even);
        PbwMonomial {
            even: word[..split].to_vec(),
            odd: word[split..].to_vec(),
        }
    }
}

impl fmt::Debug for PbwMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .even
            .iter()
            .chain(self.odd.iter())
            .map(|i| format!("x{i}"))
            .collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Element of U(g) in PBW normal form; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UeaElement {
    pub terms: BTreeMap<PbwMonomial, Scalar>,
}

impl UeaElement {
    pub fn zero() -> Self {
        UeaElement::default()
    }

    pub fn unit() -> Self {
        UeaElement::from_term(PbwMonomial::unit(), Scalar::one())
    }

    pub fn scalar(c: Scalar) -> Self {
        UeaElement::from_term(PbwMonomial::unit(), c)
    }

    pub fn from_term(m: PbwMonomial, c: Scalar) -> Self {
        let mut e = UeaElement::zero();
        e.add_term(m, c);
        e
    }

    /// Single basis letter as an element.
    pub fn letter(alg: &LieSuperAlgebra, idx: usize) -> Self {
        let m = match alg.parity(idx) {
            Parity::Even => PbwMonomial {
                even: vec![idx],
                odd: vec![],
            },
            Parity::Odd => PbwMonomial {
                even: vec![],
                odd: vec![idx],
            },
        };
        UeaElement::from_term(m, Scalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: PbwMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            // find and remove the zero entry
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &UeaElement) -> UeaElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &UeaElement) -> UeaElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> UeaElement {
        let mut out = UeaElement::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * s);
        }
        out
    }

    pub fn coeff(&self, m: &PbwMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(PbwMonomial::degree).max().unwrap_or(0)
    }

    /// Parity when all terms agree, `None` for inhomogeneous elements.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(PbwMonomial::parity);
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }
}

impl fmt::Debug for UeaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c})*{m:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Element of U(g)^{(x)k}, stored flat as k-tuples of monomials.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    pub factors: usize,
    pub terms: BTreeMap<Vec<PbwMonomial>, Scalar>,
}

impl TensorElement {
    pub fn zero(factors: usize) -> Self {
        TensorElement {
            factors,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(factors: usize) -> Self {
        let mut t = TensorElement::zero(factors);
        t.add_term(vec![PbwMonomial::unit(); factors], Scalar::one());
        t
    }

    pub fn add_term(&mut self, key: Vec<PbwMonomial>, c: Scalar) {
        debug_assert_eq!(key.len(), self.factors);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        debug_assert_eq!(self.factors, other.factors);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        debug_assert_eq!(self.factors, other.factors);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> TensorElement {
        let mut out = TensorElement::zero(self.factors);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone() * s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Pure tensor with a single nonzero monomial per slot.
    pub fn pure(monos: Vec<PbwMonomial>, c: Scalar) -> Self {
        let mut t = TensorElement::zero(monos.len());
        t.add_term(monos, c);
        t
    }
}

impl fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let slots: Vec<String> = k.iter().map(|m| format!("{m:?}")).collect();
                format!("({c})*{}", slots.join(" (x) "))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Element of the exterior algebra on the odd part: strictly increasing odd
/// index words with scalar coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ExtElement {
    pub terms: BTreeMap<Vec<usize>, Scalar>,
}

impl ExtElement {
    pub fn zero() -> Self {
        ExtElement::default()
    }

    pub fn unit() -> Self {
        ExtElement::from_term(vec![], Scalar::one())
    }

    pub fn from_term(word: Vec<usize>, c: Scalar) -> Self {
        let mut e = ExtElement::zero();
        e.add_term(word, c);
        e
    }

    pub fn generator(idx: usize) -> Self {
        ExtElement::from_term(vec![idx], Scalar::one())
    }

    pub fn add_term(&mut self, word: Vec<usize>, c: Scalar) {
        debug_assert!(word.windows(2).all(|w| w[0] < w[1]), "word not increasing");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(word).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &ExtElement) -> ExtElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> ExtElement {
        let mut out = ExtElement::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.clone() * s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Debug for ExtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                if w.is_empty() {
                    format!("({c})")
                } else {
                    let s: Vec<String> = w.iter().map(|i| format!("x{i}")).collect();
                    format!("({c})*{}", s.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Tensor square of the exterior coalgebra.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ExtTensor {
    pub terms: BTreeMap<(Vec<usize>, Vec<usize>), Scalar>,
}

impl ExtTensor {
    pub fn add_term(&mut self, key: (Vec<usize>, Vec<usize>), c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
}

/// Wedge product with alternation built into canonical form.
pub fn ext_mul(a: &ExtElement, b: &ExtElement) -> ExtElement {
    let mut out = ExtElement::zero();
    for (wa, ca) in &a.terms {
        for (wb, cb) in &b.terms {
            if wa.iter().any(|i| wb.contains(i)) {
                continue;
            }
            let sign = shuffle_sign(wa, wb).expect("disjoint increasing words");
            let mut merged: Vec<usize> = wa.iter().chain(wb.iter()).copied().collect();
            merged.sort_unstable();
            out.add_term(merged, sign_scalar(sign) * ca.clone() * cb);
        }
    }
    out
}

/// Coproduct of the exterior coalgebra: multiplicative extension of the
/// primitive coproduct, which on a word is the signed sum over splits.
pub fn ext_coproduct(a: &ExtElement) -> ExtTensor {
    let mut out = ExtTensor::default();
    for (w, c) in &a.terms {
        for (left, right) in splits(w) {
            let sign = shuffle_sign(&left, &right).expect("split of increasing word");
            out.add_term((left, right), sign_scalar(sign) * c.clone());
        }
    }
    out
}

/// All two-block splits of an increasing word, preserving order.
pub fn splits(w: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = w.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for (k, &x) in w.iter().enumerate() {
            if mask & (1 << k) != 0 {
                l.push(x);
            } else {
                r.push(x);
            }
        }
        out.push((l, r));
    }
    out
}

/// Sign conventions threaded through the Hopf operations. The default is the
/// canonical convention; the other fields exist so the axiom suite can be run
/// against deliberately mutated conventions, which must all fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopfConventions {
    /// Sign of the antipode on primitives (canonical: -1).
    pub antipode_sign: i64,
    /// Sign on the `1 (x) X` term of the primitive coproduct (canonical: +1).
    pub coproduct_right_sign: i64,
    /// Apply the Koszul exchange sign in tensor multiplication (canonical: true).
    pub koszul_tensor_sign: bool,
    /// Apply the exchange sign in the super twist T^s (canonical: true).
    pub twist_sign: bool,
}

impl Default for HopfConventions {
    fn default() -> Self {
        HopfConventions {
            antipode_sign: -1,
            coproduct_right_sign: 1,
            koszul_tensor_sign: true,
            twist_sign: true,
        }
    }
}

impl HopfConventions {
    /// The canonical convention plus every single-sign mutation of it,
    /// labeled. Used by the mutation suites.
    pub fn mutations() -> Vec<(&'static str, HopfConventions)> {
        let base = HopfConventions::default();
        vec![
            (
                "antipode-sign-flipped",
                HopfConventions {
                    antipode_sign: 1,
                    ..base
                },
            ),
            (
                "coproduct-right-sign-flipped",
                HopfConventions {
                    coproduct_right_sign: -1,
                    ..base
                },
            ),
            (
                "koszul-sign-dropped",
                HopfConventions {
                    koszul_tensor_sign: false,
                    ..base
                },
            ),
            (
                "twist-sign-dropped",
                HopfConventions {
                    twist_sign: false,
                    ..base
                },
            ),
        ]
    }
}

/// Context for U(g) computations over one algebra. Immutable apart from
/// internally synchronized memo tables (pair rewrites, gamma images and
/// monomial coproducts).
pub struct Enveloping {
    alg: Arc<LieSuperAlgebra>,
    pair_memo: Mutex<HashMap<(usize, usize), Vec<(Vec<usize>, Scalar)>>>,
    gamma_memo: Mutex<HashMap<Vec<usize>, UeaElement>>,
    coproduct_memo: Mutex<HashMap<PbwMonomial, TensorElement>>,
    mul_memo: Mutex<HashMap<(PbwMonomial, PbwMonomial), UeaElement>>,
    factorize_memo: Mutex<HashMap<PbwMonomial, BTreeMap<Vec<usize>, UeaElement>>>,
}

impl Clone for Enveloping {
    fn clone(&self) -> Self {
        Enveloping::new(Arc::clone(&self.alg))
    }
}

impl fmt::Debug for Enveloping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Enveloping({:?})", self.alg)
    }
}

impl Enveloping {
    pub fn new(alg: Arc<LieSuperAlgebra>) -> Self {
        Enveloping {
            alg,
            pair_memo: Mutex::new(HashMap::new()),
            gamma_memo: Mutex::new(HashMap::new()),
            coproduct_memo: Mutex::new(HashMap::new()),
            mul_memo: Mutex::new(HashMap::new()),
            factorize_memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &LieSuperAlgebra {
        &self.alg
    }

    pub fn algebra_arc(&self) -> Arc<LieSuperAlgebra> {
        Arc::clone(&self.alg)
    }

    fn parity(&self, idx: usize) -> Parity {
        self.alg.parity(idx)
    }

    /// The rewrite of an out-of-order or odd-square adjacent pair `a.b`:
    /// list of replacement words (length <= 2) with coefficients.
    fn pair_rewrite(&self, a: usize, b: usize) -> Vec<(Vec<usize>, Scalar)> {
        if let Some(hit) = self.pair_memo.lock().unwrap().get(&(a, b)) {
            return hit.clone();
        }
        let mut out: Vec<(Vec<usize>, Scalar)> = Vec::new();
        if a == b {
            // odd square: x.x = 1/2 [x,x]
            debug_assert_eq!(self.parity(a), Parity::Odd);
            let half = Scalar::from_ratio(1, 2);
            for (k, c) in self.alg.bracket_basis(a, a) {
                out.push((vec![*k], half.clone() * c.clone()));
            }
        } else {
            debug_assert!(a > b);
            let sign = if self.parity(a) == Parity::Odd && self.parity(b) == Parity::Odd {
                -Scalar::one()
            } else {
                Scalar::one()
            };
            out.push((vec![b, a], sign));
            for (k, c) in self.alg.bracket_basis(a, b) {
                out.push((vec![*k], c.clone()));
            }
        }
        self.pair_memo.lock().unwrap().insert((a, b), out.clone());
        out
    }

    /// PBW normal form of a word with coefficient, rewriting adjacent pairs
    /// chosen by `choose` (given the word, return a violating position).
    /// Terminates because every rewrite lowers (length, inversion count).
    pub fn normalize_word_with(
        &self,
        letters: &[usize],
        coeff: Scalar,
        choose: &mut dyn FnMut(&[usize], &[usize]) -> usize,
    ) -> UeaElement {
        let mut out = UeaElement::zero();
        let mut stack: Vec<(Vec<usize>, Scalar)> = vec![(letters.to_vec(), coeff)];
        while let Some((word, c)) = stack.pop() {
            if c.is_zero() {
                continue;
            }
            let violations: Vec<usize> = (0..word.len().saturating_sub(1))
                .filter(|&p| {
                    word[p] > word[p + 1]
                        || (word[p] == word[p + 1] && self.parity(word[p]) == Parity::Odd)
                })
                .collect();
            if violations.is_empty() {
                out.add_term(PbwMonomial::from_sorted_word(&self.alg, &word), c);
                continue;
            }
            let p = choose(&word, &violations);
            debug_assert!(violations.contains(&p));
            for (repl, rc) in self.pair_rewrite(word[p], word[p + 1]) {
                let mut w = Vec::with_capacity(word.len() - 2 + repl.len());
                w.extend_from_slice(&word[..p]);
                w.extend_from_slice(&repl);
                w.extend_from_slice(&word[p + 2..]);
                stack.push((w, c.clone() * rc));
            }
        }
        out
    }

    /// PBW normal form, innermost (leftmost) rewriting.
    pub fn normalize_word(&self, letters: &[usize], coeff: Scalar) -> UeaElement {
        self.normalize_word_with(letters, coeff, &mut |_, v| v[0])
    }

    /// Associative product with PBW renormalization; monomial products are
    /// memoized per algebra.
    pub fn mul(&self, a: &UeaElement, b: &UeaElement) -> UeaElement {
        let mut out = UeaElement::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let key = (ma.clone(), mb.clone());
                let hit = self.mul_memo.lock().unwrap().get(&key).cloned();
                let prod = match hit {
                    Some(p) => p,
                    None => {
                        let mut word = ma.word();
                        word.extend(mb.word());
                        let p = self.normalize_word(&word, Scalar::one());
                        self.mul_memo.lock().unwrap().insert(key, p.clone());
                        p
                    }
                };
                out = out.add(&prod.scale(&(ca.clone() * cb)));
            }
        }
        out
    }

    pub fn mul_many(&self, factors: &[&UeaElement]) -> UeaElement {
        let mut acc = UeaElement::unit();
        for f in factors {
            acc = self.mul(&acc, f);
        }
        acc
    }

    /// Tensor product multiplication with the Koszul exchange sign
    /// `prod_{i<j} (-1)^{p(b_i) p(a_j)}`.
    pub fn tensor_mul(&self, a: &TensorElement, b: &TensorElement) -> TensorElement {
        self.tensor_mul_with(a, b, HopfConventions::default())
    }

    pub fn tensor_mul_with(
        &self,
        a: &TensorElement,
        b: &TensorElement,
        conv: HopfConventions,
    ) -> TensorElement {
        debug_assert_eq!(a.factors, b.factors);
        let k = a.factors;
        let mut out = TensorElement::zero(k);
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let mut sign = Scalar::one();
                if conv.koszul_tensor_sign {
                    let mut exp = 0u8;
                    for i in 0..k {
                        for j in i + 1..k {
                            exp ^= kb[i].parity().as_u8() & ka[j].parity().as_u8();
                        }
                    }
                    if exp == 1 {
                        sign = -sign;
                    }
                }
                // slotwise products, each renormalized
                let mut parts: Vec<UeaElement> = Vec::with_capacity(k);
                for i in 0..k {
                    let mut word = ka[i].word();
                    word.extend(kb[i].word());
                    parts.push(self.normalize_word(&word, Scalar::one()));
                }
                // distribute the slotwise sums
                let coeff = sign * ca.clone() * cb;
                let mut keys: Vec<(Vec<PbwMonomial>, Scalar)> = vec![(Vec::new(), coeff)];
                for part in &parts {
                    let mut next = Vec::with_capacity(keys.len() * part.terms.len());
                    for (prefix, c) in &keys {
                        for (m, mc) in &part.terms {
                            let mut key = prefix.clone();
                            key.push(m.clone());
                            next.push((key, c.clone() * mc));
                        }
                    }
                    keys = next;
                }
                for (key, c) in keys {
                    out.add_term(key, c);
                }
            }
        }
        out
    }

    /// Comultiplication: multiplicative extension of `X -> X(x)1 + 1(x)X`.
    pub fn coproduct(&self, a: &UeaElement) -> TensorElement {
        self.coproduct_with(a, HopfConventions::default())
    }

    pub fn coproduct_with(&self, a: &UeaElement, conv: HopfConventions) -> TensorElement {
        let default_conv = conv == HopfConventions::default();
        let mut out = TensorElement::zero(2);
        for (m, c) in &a.terms {
            if default_conv {
                if let Some(hit) = self.coproduct_memo.lock().unwrap().get(m) {
                    out = out.add(&hit.scale(c));
                    continue;
                }
            }
            let acc = self.coproduct_monomial(m, conv);
            if default_conv {
                self.coproduct_memo
                    .lock()
                    .unwrap()
                    .insert(m.clone(), acc.clone());
            }
            out = out.add(&acc.scale(c));
        }
        out
    }

    fn coproduct_monomial(&self, m: &PbwMonomial, conv: HopfConventions) -> TensorElement {
        let mut acc = TensorElement::unit(2);
        for letter in m.word() {
            let lm = if self.parity(letter) == Parity::Even {
                PbwMonomial {
                    even: vec![letter],
                    odd: vec![],
                }
            } else {
                PbwMonomial {
                    even: vec![],
                    odd: vec![letter],
                }
            };
            let mut prim = TensorElement::zero(2);
            prim.add_term(vec![lm.clone(), PbwMonomial::unit()], Scalar::one());
            prim.add_term(
                vec![PbwMonomial::unit(), lm],
                sign_scalar(conv.coproduct_right_sign),
            );
            acc = self.tensor_mul_with(&acc, &prim, conv);
        }
        acc
    }

    /// Iterated coproduct on the chosen factor (no sign: the coproduct is an
    /// even map), growing a k-tensor into a (k+1)-tensor.
    pub fn coproduct_on_factor(&self, t: &TensorElement, slot: usize) -> TensorElement {
        self.coproduct_on_factor_with(t, slot, HopfConventions::default())
    }

    pub fn coproduct_on_factor_with(
        &self,
        t: &TensorElement,
        slot: usize,
        conv: HopfConventions,
    ) -> TensorElement {
        let mut out = TensorElement::zero(t.factors + 1);
        for (key, c) in &t.terms {
            let inner = self.coproduct_with(&UeaElement::from_term(key[slot].clone(), c.clone()), conv);
            for (pair, pc) in &inner.terms {
                let mut k2: Vec<PbwMonomial> = Vec::with_capacity(t.factors + 1);
                k2.extend_from_slice(&key[..slot]);
                k2.push(pair[0].clone());
                k2.push(pair[1].clone());
                k2.extend_from_slice(&key[slot + 1..]);
                out.add_term(k2, pc.clone());
            }
        }
        out
    }

    /// Antipode: `S(x1...xr) = (-1)^r (-1)^{sum_{i<j} p_i p_j} xr...x1`,
    /// renormalized.
    pub fn antipode(&self, a: &UeaElement) -> UeaElement {
        self.antipode_with(a, HopfConventions::default())
    }

    pub fn antipode_with(&self, a: &UeaElement, conv: HopfConventions) -> UeaElement {
        let mut out = UeaElement::zero();
        for (m, c) in &a.terms {
            let word = m.word();
            let r = word.len();
            let mut sign = if r % 2 == 0 { Scalar::one() } else { sign_scalar(conv.antipode_sign) };
            let odd_count = m.odd.len();
            // pairwise odd exchanges in the reversal
            if (odd_count * odd_count.saturating_sub(1) / 2) % 2 == 1 {
                sign = -sign;
            }
            let reversed: Vec<usize> = word.into_iter().rev().collect();
            out = out.add(&self.normalize_word(&reversed, sign * c.clone()));
        }
        out
    }

    /// Counit: coefficient of the empty monomial.
    pub fn counit(&self, a: &UeaElement) -> Scalar {
        a.coeff(&PbwMonomial::unit())
    }

    /// Super twist `T^s` on a 2-tensor.
    pub fn twist(&self, t: &TensorElement) -> TensorElement {
        self.twist_with(t, HopfConventions::default())
    }

    pub fn twist_with(&self, t: &TensorElement, conv: HopfConventions) -> TensorElement {
        debug_assert_eq!(t.factors, 2);
        let mut out = TensorElement::zero(2);
        for (key, c) in &t.terms {
            let mut sign = Scalar::one();
            if conv.twist_sign
                && key[0].parity() == Parity::Odd
                && key[1].parity() == Parity::Odd
            {
                sign = -sign;
            }
            out.add_term(vec![key[1].clone(), key[0].clone()], sign * c.clone());
        }
        out
    }

    /// Multiplies all tensor slots together (the algebra multiplication map).
    pub fn tensor_collapse(&self, t: &TensorElement) -> UeaElement {
        let mut out = UeaElement::zero();
        for (key, c) in &t.terms {
            let mut word = Vec::new();
            for m in key {
                word.extend(m.word());
            }
            out = out.add(&self.normalize_word(&word, c.clone()));
        }
        out
    }

    /// Applies the antipode to one slot of a tensor (even map, no sign).
    pub fn antipode_on_factor(&self, t: &TensorElement, slot: usize) -> TensorElement {
        self.antipode_on_factor_with(t, slot, HopfConventions::default())
    }

    pub fn antipode_on_factor_with(
        &self,
        t: &TensorElement,
        slot: usize,
        conv: HopfConventions,
    ) -> TensorElement {
        let mut out = TensorElement::zero(t.factors);
        for (key, c) in &t.terms {
            let sa = self.antipode_with(&UeaElement::from_term(key[slot].clone(), c.clone()), conv);
            for (m, mc) in &sa.terms {
                let mut k2 = key.clone();
                k2[slot] = m.clone();
                out.add_term(k2, mc.clone());
            }
        }
        out
    }

    /// Drops a factor by applying the counit to it.
    pub fn counit_on_factor(&self, t: &TensorElement, slot: usize) -> TensorElement {
        let mut out = TensorElement::zero(t.factors - 1);
        for (key, c) in &t.terms {
            if key[slot].is_unit() {
                let mut k2 = key.clone();
                k2.remove(slot);
                out.add_term(k2, c.clone());
            }
        }
        out
    }

    /// Direct signed-shuffle coproduct of a product of odd generators,
    /// independent of the multiplicative extension of the comultiplication.
    pub fn coproduct_shuffle_oracle(&self, letters: &[usize]) -> Result<TensorElement> {
        for &l in letters {
            if self.parity(l) != Parity::Odd {
                return Err(Error::ParityViolation(format!(
                    "shuffle oracle letter {l} is even"
                )));
            }
        }
        for (k, l) in letters.iter().enumerate() {
            if letters[k + 1..].contains(l) {
                return Err(Error::Invalid(format!(
                    "shuffle oracle letters repeat index {l}"
                )));
            }
        }
        let positions: Vec<usize> = (1..=letters.len()).collect();
        let mut out = TensorElement::zero(2);
        for (lpos, rpos) in splits(&positions) {
            let sign = shuffle_sign(&lpos, &rpos).expect("positions increasing");
            let lword: Vec<usize> = lpos.iter().map(|&p| letters[p - 1]).collect();
            let rword: Vec<usize> = rpos.iter().map(|&p| letters[p - 1]).collect();
            let left = self.normalize_word(&lword, sign_scalar(sign));
            let right = self.normalize_word(&rword, Scalar::one());
            for (lm, lc) in &left.terms {
                for (rm, rc) in &right.terms {
                    out.add_term(vec![lm.clone(), rm.clone()], lc.clone() * rc);
                }
            }
        }
        Ok(out)
    }

    /// Symmetrization `gamma(X1 ^ ... ^ Xr) = (1/r!) sum_s (-1)^{|s|} X_{s(1)}...X_{s(r)}`.
    pub fn gamma(&self, w: &ExtElement) -> UeaElement {
        let mut out = UeaElement::zero();
        for (word, c) in &w.terms {
            let img = self.gamma_word(word);
            out = out.add(&img.scale(c));
        }
        out
    }

    fn gamma_word(&self, word: &[usize]) -> UeaElement {
        if let Some(hit) = self.gamma_memo.lock().unwrap().get(word) {
            return hit.clone();
        }
        let r = word.len();
        let img = if r == 0 {
            UeaElement::unit()
        } else {
            let mut factorial = Scalar::one();
            for k in 2..=r {
                factorial *= Scalar::from_int(k as i64);
            }
            let scale = factorial.inv().expect("r! nonzero");
            let mut acc = UeaElement::zero();
            for (perm, sign) in permutations_with_sign(r) {
                let permuted: Vec<usize> = perm.iter().map(|&p| word[p]).collect();
                acc = acc.add(&self.normalize_word(&permuted, sign_scalar(sign) * scale.clone()));
            }
            acc
        };
        self.gamma_memo
            .lock()
            .unwrap()
            .insert(word.to_vec(), img.clone());
        img
    }

    /// Unique decomposition `a = sum_w u_w . gamma(w)` with `u_w` in U(g0),
    /// solved as a triangular system from the top odd length down; results
    /// are memoized per monomial and combined linearly.
    pub fn pbw_factorize(&self, a: &UeaElement) -> BTreeMap<Vec<usize>, UeaElement> {
        let mut out: BTreeMap<Vec<usize>, UeaElement> = BTreeMap::new();
        for (mono, c) in &a.terms {
            let hit = self.factorize_memo.lock().unwrap().get(mono).cloned();
            let parts = match hit {
                Some(p) => p,
                None => {
                    let p = self.factorize_raw(&UeaElement::from_term(mono.clone(), Scalar::one()));
                    self.factorize_memo
                        .lock()
                        .unwrap()
                        .insert(mono.clone(), p.clone());
                    p
                }
            };
            for (w, u) in parts {
                let slot = out.entry(w).or_insert_with(UeaElement::zero);
                *slot = slot.add(&u.scale(c));
            }
        }
        out.retain(|_, u| !u.is_zero());
        out
    }

    fn factorize_raw(&self, a: &UeaElement) -> BTreeMap<Vec<usize>, UeaElement> {
        let mut rest = a.clone();
        let mut out: BTreeMap<Vec<usize>, UeaElement> = BTreeMap::new();
        loop {
            let Some(top) = rest.terms.keys().map(|m| m.odd.len()).max() else {
                break;
            };
            let mut level: BTreeMap<Vec<usize>, UeaElement> = BTreeMap::new();
            for (m, c) in &rest.terms {
                if m.odd.len() == top {
                    let even_part = UeaElement::from_term(
                        PbwMonomial {
                            even: m.even.clone(),
                            odd: vec![],
                        },
                        c.clone(),
                    );
                    level
                        .entry(m.odd.clone())
                        .or_insert_with(UeaElement::zero)
                        .terms
                        .extend(even_part.terms);
                }
            }
            for (w, u) in level {
                let gw = self.gamma(&ExtElement::from_term(w.clone(), Scalar::one()));
                rest = rest.sub(&self.mul(&u, &gw));
                let slot = out.entry(w).or_insert_with(UeaElement::zero);
                *slot = slot.add(&u);
            }
            if top == 0 {
                break;
            }
        }
        debug_assert!(rest.is_zero());
        out.retain(|_, u| !u.is_zero());
        out
    }

    /// Rebuilds `sum_w u_w . gamma(w)`; inverse of `pbw_factorize`.
    pub fn pbw_reconstruct(&self, parts: &BTreeMap<Vec<usize>, UeaElement>) -> UeaElement {
        let mut out = UeaElement::zero();
        for (w, u) in parts {
            let gw = self.gamma(&ExtElement::from_term(w.clone(), Scalar::one()));
            out = out.add(&self.mul(u, &gw));
        }
        out
    }

    /// Maps every letter through a linear map (columns = images of basis
    /// elements of the source) into `target`, multiplying images in order.
    /// Used for morphism pullbacks and for extending group representations
    /// from g to U(g) multiplicatively.
    pub fn map_letters(
        &self,
        target: &Enveloping,
        a: &UeaElement,
        m: &Mat,
    ) -> Result<UeaElement> {
        let src_dim = self.alg.dim();
        let dst_dim = target.alg.dim();
        if m.cols != src_dim || m.rows != dst_dim {
            return Err(Error::DimensionMismatch("map_letters matrix".into()));
        }
        let mut out = UeaElement::zero();
        for (mono, c) in &a.terms {
            let mut acc = UeaElement::scalar(c.clone());
            for letter in mono.word() {
                let mut image = UeaElement::zero();
                for i in 0..dst_dim {
                    let coeff = m[(i, letter)].clone();
                    if !coeff.is_zero() {
                        image = image.add(&UeaElement::letter(&target.alg, i).scale(&coeff));
                    }
                }
                acc = target.mul(&acc, &image);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// All PBW basis monomials of total degree <= `max_degree`.
    pub fn pbw_monomials_up_to(&self, max_degree: usize) -> Vec<PbwMonomial> {
        let n_even = self.alg.basis().n_even();
        let odd_idx: Vec<usize> = self.alg.basis().odd_indices().collect();
        let mut evens: Vec<Vec<usize>> = vec![vec![]];
        let mut out = Vec::new();
        // even multisets by non-decreasing words
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..max_degree {
            let mut next = Vec::new();
            for w in &frontier {
                let start = w.last().copied().unwrap_or(0);
                for e in start..n_even {
                    let mut w2 = w.clone();
                    w2.push(e);
                    next.push(w2);
                }
            }
            evens.extend(next.clone());
            frontier = next;
        }
        // odd subsets as increasing words
        let mut odds: Vec<Vec<usize>> = vec![vec![]];
        for mask in 1u32..(1u32 << odd_idx.len()) {
            let w: Vec<usize> = odd_idx
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect();
            odds.push(w);
        }
        for e in &evens {
            for o in &odds {
                if e.len() + o.len() <= max_degree {
                    out.push(PbwMonomial {
                        even: e.clone(),
                        odd: o.clone(),
                    });
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Verifies coassociativity, the counit laws, both antipode laws and
    /// super-cocommutativity on all PBW monomials up to `max_degree`.
    pub fn hopf_axiom_check(&self, max_degree: usize) -> Report {
        self.hopf_axiom_check_with(max_degree, HopfConventions::default())
    }

    pub fn hopf_axiom_check_with(&self, max_degree: usize, conv: HopfConventions) -> Report {
        let mut rep = Report::new();
        let monos = self.pbw_monomials_up_to(max_degree);
        let mut coassoc_bad = Vec::new();
        let mut counit_bad = Vec::new();
        let mut antipode_bad = Vec::new();
        let mut cocomm_bad = Vec::new();
        for m in &monos {
            let e = UeaElement::from_term(m.clone(), Scalar::one());
            let delta = self.coproduct_with(&e, conv);
            // (Delta (x) id) Delta = (id (x) Delta) Delta
            let left = self.coproduct_on_factor_with(&delta, 0, conv);
            let right = self.coproduct_on_factor_with(&delta, 1, conv);
            if left != right {
                coassoc_bad.push(format!("{m:?}"));
            }
            // counit laws
            let cl = self.counit_on_factor(&delta, 0);
            let cr = self.counit_on_factor(&delta, 1);
            let want = TensorElement::pure(vec![m.clone()], Scalar::one());
            if cl != want || cr != want {
                counit_bad.push(format!("{m:?}"));
            }
            // antipode laws: mul (S (x) id) Delta = unit . counit = mul (id (x) S) Delta
            let s_left = self.tensor_collapse(&self.antipode_on_factor_with(&delta, 0, conv));
            let s_right = self.tensor_collapse(&self.antipode_on_factor_with(&delta, 1, conv));
            let want_u = UeaElement::scalar(self.counit(&e));
            if s_left != want_u || s_right != want_u {
                antipode_bad.push(format!("{m:?}"));
            }
            // super-cocommutativity
            if self.twist_with(&delta, conv) != delta {
                cocomm_bad.push(format!("{m:?}"));
            }
        }
        let detail = |bad: &Vec<String>| {
            if bad.is_empty() {
                format!("{} monomials", monos.len())
            } else {
                format!("violations at {}", bad.join(", "))
            }
        };
        rep.record(coassoc_bad.is_empty(), "hopf.coassociativity", detail(&coassoc_bad));
        rep.record(counit_bad.is_empty(), "hopf.counit", detail(&counit_bad));
        rep.record(antipode_bad.is_empty(), "hopf.antipode", detail(&antipode_bad));
        rep.record(
            cocomm_bad.is_empty(),
            "hopf.super-cocommutativity",
            detail(&cocomm_bad),
        );
        rep
    }

    /// Checks that gamma is a coalgebra morphism on all wedge words up to
    /// length `max_len`: `Delta_U(gamma(w)) = (gamma (x) gamma)(Delta_ext(w))`.
    pub fn gamma_coalgebra_check(&self, max_len: usize) -> Report {
        let odd_idx: Vec<usize> = self.alg.basis().odd_indices().collect();
        let mut rep = Report::new();
        let mut bad = Vec::new();
        let mut count = 0;
        for mask in 0u32..(1u32 << odd_idx.len()) {
            let w: Vec<usize> = odd_idx
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect();
            if w.len() > max_len {
                continue;
            }
            count += 1;
            let ext = ExtElement::from_term(w.clone(), Scalar::one());
            let lhs = self.coproduct(&self.gamma(&ext));
            let mut rhs = TensorElement::zero(2);
            for ((a, b), c) in ext_coproduct(&ext).terms {
                let ga = self.gamma(&ExtElement::from_term(a, Scalar::one()));
                let gb = self.gamma(&ExtElement::from_term(b, Scalar::one()));
                for (ma, ca) in &ga.terms {
                    for (mb, cb) in &gb.terms {
                        rhs.add_term(vec![ma.clone(), mb.clone()], c.clone() * ca.clone() * cb);
                    }
                }
            }
            if lhs != rhs {
                bad.push(format!("{w:?}"));
            }
        }
        rep.record(
            bad.is_empty(),
            "gamma.coalgebra-morphism",
            if bad.is_empty() {
                format!("{count} wedge words")
            } else {
                format!("violations at {}", bad.join(", "))
            },
        );
        rep
    }

    /// Whether gamma is multiplicative, `gamma(w1 ^ w2) = gamma(w1) gamma(w2)`;
    /// returns the first violating pair of wedge words otherwise. Holds
    /// exactly when the odd-odd brackets vanish.
    pub fn gamma_algebra_morphism_witness(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let odd_idx: Vec<usize> = self.alg.basis().odd_indices().collect();
        let words: Vec<Vec<usize>> = {
            let mut ws = Vec::new();
            for mask in 0u32..(1u32 << odd_idx.len()) {
                ws.push(
                    odd_idx
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask & (1 << k) != 0)
                        .map(|(_, &i)| i)
                        .collect(),
                );
            }
            ws
        };
        for w1 in &words {
            for w2 in &words {
                let e1 = ExtElement::from_term(w1.clone(), Scalar::one());
                let e2 = ExtElement::from_term(w2.clone(), Scalar::one());
                let lhs = self.gamma(&ext_mul(&e1, &e2));
                let rhs = self.mul(&self.gamma(&e1), &self.gamma(&e2));
                if lhs != rhs {
                    return Some((w1.clone(), w2.clone()));
                }
            }
        }
        None
    }
}

/// All permutations of 0..r with their signs (brute force; r stays small).
pub fn permutations_with_sign(r: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if k <= 1 {
            let mut inv = 0;
            for a in 0..cur.len() {
                for b in a + 1..cur.len() {
                    if cur[a] > cur[b] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(r, &mut cur, &mut out);
    out
}

/// Table in Hom(/\V, R): finitely many increasing words with values in a
/// commutative coefficient ring R (scalars here, expressions elsewhere).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomTable<T> {
    pub entries: BTreeMap<Vec<usize>, T>,
}

impl<T> Default for HomTable<T> {
    fn default() -> Self {
        HomTable {
            entries: BTreeMap::new(),
        }
    }
}

/// The sign isomorphism `Psi_V(h xi*_{i1} ^ ... ^ xi*_{ik}) =
/// (-1)^{k(k-1)/2} h f^{xi_{i1} ^ ... ^ xi_{ik}}`: maps a coefficient and an
/// increasing dual word to the signed indicator table.
pub fn psi_v_iso<T: Clone>(h: T, dual_word: &[usize], negate: impl Fn(T) -> T) -> Result<HomTable<T>> {
    if !dual_word.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::BadPermutation(format!(
            "dual word not strictly increasing: {dual_word:?}"
        )));
    }
    let k = dual_word.len();
    let value = if (k * k.saturating_sub(1) / 2) % 2 == 1 {
        negate(h)
    } else {
        h
    };
    let mut t = HomTable::default();
    t.entries.insert(dual_word.to_vec(), value);
    Ok(t)
}

/// Product on Hom(/\V, R): `Mult . (f1 (x) f2) . Delta_ext` with the Koszul
/// evaluation sign, which for homogeneous table entries comes out as
/// `shuffle_sign(w1, w2) * (-1)^{|w1| |w2|}` on each disjoint pair.
pub fn hom_table_mul<T, M, A>(f1: &HomTable<T>, f2: &HomTable<T>, mul: M, add: A) -> HomTable<T>
where
    T: Clone,
    M: Fn(&T, &T, bool) -> T,
    A: Fn(T, T) -> T,
{
    let mut out: BTreeMap<Vec<usize>, T> = BTreeMap::new();
    for (w1, v1) in &f1.entries {
        for (w2, v2) in &f2.entries {
            if w1.iter().any(|i| w2.contains(i)) {
                continue;
            }
            let mut sign = shuffle_sign(w1, w2).expect("disjoint increasing");
            if (w1.len() * w2.len()) % 2 == 1 {
                sign = -sign;
            }
            let term = mul(v1, v2, sign < 0);
            let mut merged: Vec<usize> = w1.iter().chain(w2.iter()).copied().collect();
            merged.sort_unstable();
            out.insert(
                merged.clone(),
                match out.get(&merged) {
                    None => term,
                    Some(prev) => add(prev.clone(), term),
                },
            );
        }
    }
    HomTable { entries: out }
}
