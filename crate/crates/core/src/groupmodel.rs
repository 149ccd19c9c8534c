//! Concrete matrix Lie groups over exact scalars: membership patterns,
//! coordinate-function expressions modeling the reduced function sheaf,
//! right-invariant derivations realized through first-order jets, and the
//! adjoint action with re-expansion in a matrix realization.
//!
//! Derivatives use `I + tX` in place of `exp(tX)`: at `t = 0` they agree, and
//! the substitute stays inside exact matrix arithmetic.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{Jet1, RingElem, Scalar};
use crate::liesuper::{LieSuperAlgebra, Parity};
use crate::linalg::Mat;

/// Expression over matrix coordinates: constants, entries `x_ij`, sums,
/// products and the inverse determinant of the ambient matrix.
#[derive(Clone, PartialEq, Eq)]
pub enum FunctionExpr {
    Const(Scalar),
    /// 0-based entry (i, j).
    Coord(usize, usize),
    Add(Box<FunctionExpr>, Box<FunctionExpr>),
    Mul(Box<FunctionExpr>, Box<FunctionExpr>),
    DetInv,
}

impl FunctionExpr {
    pub fn zero() -> Self {
        FunctionExpr::Const(Scalar::zero())
    }

    pub fn one() -> Self {
        FunctionExpr::Const(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        FunctionExpr::Const(c)
    }

    pub fn coord(i: usize, j: usize) -> Self {
        FunctionExpr::Coord(i, j)
    }

    pub fn add(self, rhs: FunctionExpr) -> Self {
        match (&self, &rhs) {
            (FunctionExpr::Const(a), _) if a.is_zero() => rhs,
            (_, FunctionExpr::Const(b)) if b.is_zero() => self,
            (FunctionExpr::Const(a), FunctionExpr::Const(b)) => {
                FunctionExpr::Const(a.clone() + b)
            }
            _ => FunctionExpr::Add(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn mul(self, rhs: FunctionExpr) -> Self {
        match (&self, &rhs) {
            (FunctionExpr::Const(a), _) if a.is_zero() => FunctionExpr::zero(),
            (_, FunctionExpr::Const(b)) if b.is_zero() => FunctionExpr::zero(),
            (FunctionExpr::Const(a), _) if a.is_one() => rhs,
            (_, FunctionExpr::Const(b)) if b.is_one() => self,
            (FunctionExpr::Const(a), FunctionExpr::Const(b)) => {
                FunctionExpr::Const(a.clone() * b)
            }
            _ => FunctionExpr::Mul(Box::new(self), Box::new(rhs)),
        }
    }

    pub fn scale(self, c: &Scalar) -> Self {
        FunctionExpr::Const(c.clone()).mul(self)
    }

    pub fn neg(self) -> Self {
        self.scale(&-Scalar::one())
    }

    pub fn sub(self, rhs: FunctionExpr) -> Self {
        self.add(rhs.neg())
    }

    pub fn sum(terms: impl IntoIterator<Item = FunctionExpr>) -> Self {
        terms
            .into_iter()
            .fold(FunctionExpr::zero(), FunctionExpr::add)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, FunctionExpr::Const(c) if c.is_zero())
    }

    /// Exact evaluation at a point matrix over `Scalar` or `Jet1`.
    pub fn eval<T: RingElem>(&self, point: &Mat<T>) -> Result<T> {
        match self {
            FunctionExpr::Const(c) => Ok(T::from_scalar(c)),
            FunctionExpr::Coord(i, j) => {
                if *i >= point.rows || *j >= point.cols {
                    return Err(Error::BadExpression(format!(
                        "coordinate x{}{} outside a {}x{} matrix",
                        i + 1,
                        j + 1,
                        point.rows,
                        point.cols
                    )));
                }
                Ok(point[(*i, *j)].clone())
            }
            FunctionExpr::Add(a, b) => Ok(a.eval(point)?.ring_add(&b.eval(point)?)),
            FunctionExpr::Mul(a, b) => Ok(a.eval(point)?.ring_mul(&b.eval(point)?)),
            FunctionExpr::DetInv => point
                .det_laplace()?
                .ring_inv()
                .map_err(|_| Error::Singular("detinv at singular point".into())),
        }
    }

    /// Substitution `x -> L x R` for numeric translations; `detinv` picks up
    /// the constant factor `det(L)^{-1} det(R)^{-1}`.
    pub fn subst_translate(&self, left: Option<&Mat>, right: Option<&Mat>, n: usize) -> Result<FunctionExpr> {
        match self {
            FunctionExpr::Const(c) => Ok(FunctionExpr::Const(c.clone())),
            FunctionExpr::Coord(i, j) => {
                let mut sum = FunctionExpr::zero();
                for k in 0..n {
                    for l in 0..n {
                        let mut c = Scalar::one();
                        match left {
                            Some(lm) => c *= lm[(*i, k)].clone(),
                            None => {
                                if *i != k {
                                    continue;
                                }
                            }
                        }
                        match right {
                            Some(rm) => c *= rm[(l, *j)].clone(),
                            None => {
                                if l != *j {
                                    continue;
                                }
                            }
                        }
                        if !c.is_zero() {
                            sum = sum.add(FunctionExpr::coord(k, l).scale(&c));
                        }
                    }
                }
                Ok(sum)
            }
            FunctionExpr::Add(a, b) => Ok(a
                .subst_translate(left, right, n)?
                .add(b.subst_translate(left, right, n)?)),
            FunctionExpr::Mul(a, b) => Ok(a
                .subst_translate(left, right, n)?
                .mul(b.subst_translate(left, right, n)?)),
            FunctionExpr::DetInv => {
                let mut c = Scalar::one();
                if let Some(lm) = left {
                    c *= lm.det()?.inv()?;
                }
                if let Some(rm) = right {
                    c *= rm.det()?.inv()?;
                }
                Ok(FunctionExpr::DetInv.scale(&c))
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            FunctionExpr::Const(c) => {
                let s = c.to_string();
                if s.contains('+') || s.contains('-') || s.contains('*') {
                    write!(f, "({s})")
                } else {
                    write!(f, "{s}")
                }
            }
            FunctionExpr::Coord(i, j) => write!(f, "x{}{}", i + 1, j + 1),
            FunctionExpr::DetInv => write!(f, "detinv"),
            FunctionExpr::Add(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, "+")?;
                b.fmt_prec(f, 1)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            FunctionExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 2)?;
                Ok(())
            }
        }
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str) -> Self {
        ExprParser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<FunctionExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    acc = acc.add(self.term()?);
                }
                Some(b'-') => {
                    self.bump();
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<FunctionExpr> {
        let mut acc = self.primary()?;
        while let Some(b'*') = self.peek() {
            self.bump();
            acc = acc.mul(self.primary()?);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<FunctionExpr> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let inner = self.expr()?;
                match self.bump() {
                    Some(b')') => Ok(inner),
                    _ => Err(Error::Parse("expected ')'".into())),
                }
            }
            Some(b'-') => {
                self.bump();
                Ok(self.primary()?.neg())
            }
            Some(b'x') => {
                self.bump();
                let i = self.digit()?;
                let j = self.digit()?;
                if i == 0 || j == 0 {
                    return Err(Error::Parse("coordinates are 1-based".into()));
                }
                Ok(FunctionExpr::coord(i - 1, j - 1))
            }
            Some(b'd') => {
                let word = b"detinv";
                for &w in word {
                    if self.bump() != Some(w) {
                        return Err(Error::Parse("expected 'detinv'".into()));
                    }
                }
                Ok(FunctionExpr::DetInv)
            }
            Some(b'i') => {
                self.bump();
                Ok(FunctionExpr::Const(Scalar::i()))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_digit() || *c == b'/')
                {
                    self.pos += 1;
                }
                let tok = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let s: Scalar = tok.parse()?;
                Ok(FunctionExpr::Const(s))
            }
            other => Err(Error::Parse(format!(
                "unexpected {:?} in expression",
                other.map(|c| c as char)
            ))),
        }
    }

    fn digit(&mut self) -> Result<usize> {
        match self.bump() {
            Some(c) if c.is_ascii_digit() => Ok((c - b'0') as usize),
            other => Err(Error::Parse(format!(
                "expected digit, found {:?}",
                other.map(|c| c as char)
            ))),
        }
    }
}

impl FromStr for FunctionExpr {
    type Err = Error;

    /// Grammar: sums/products of `x{i}{j}` (single-digit, 1-based), rational
    /// literals, `i`, `detinv`, with parentheses and unary minus.
    fn from_str(s: &str) -> Result<FunctionExpr> {
        let mut p = ExprParser::new(s);
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!(
                "trailing input at byte {} of {s:?}",
                p.pos
            )));
        }
        Ok(e)
    }
}

/// Entry constraint in a membership pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskEntry {
    Free,
    Zero,
    One,
}

/// Matrix Lie group over exact scalars: ambient size, a membership pattern
/// (free / zero / unit-diagonal entries), and the Lie superalgebra whose even
/// part must be tangent to the pattern at first order.
#[derive(Debug, Clone)]
pub struct GroupModel {
    n: usize,
    pattern: Vec<Vec<MaskEntry>>,
    alg: Arc<LieSuperAlgebra>,
}

/// Point of a group model; the matrix is invertible and pattern-conformant.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupPoint {
    pub mat: Mat,
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.mat.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.mat.cols).map(|j| self.mat[(i, j)].to_string()).collect();
                format!("[{}]", r.join(","))
            })
            .collect();
        write!(f, "g{}", rows.join(""))
    }
}

impl GroupModel {
    /// Builds a model and validates it: the identity must satisfy the
    /// pattern, the algebra must carry a matrix realization of ambient size,
    /// and each even basis matrix must be tangent to the pattern (so that
    /// `I + tX` stays conformant at first order).
    pub fn new(
        n: usize,
        pattern: Vec<Vec<MaskEntry>>,
        alg: Arc<LieSuperAlgebra>,
    ) -> Result<Self> {
        if pattern.len() != n || pattern.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("pattern size".into()));
        }
        for (i, row) in pattern.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let id_val = i == j;
                match e {
                    MaskEntry::One if !id_val => {
                        return Err(Error::PatternViolation(
                            "unit-diagonal constraint off the diagonal".into(),
                        ))
                    }
                    MaskEntry::Zero if id_val => {
                        return Err(Error::PatternViolation(
                            "identity violates a zero constraint on the diagonal".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        let Some(real) = alg.realization() else {
            return Err(Error::Invalid(
                "group model requires a matrix realization of its algebra".into(),
            ));
        };
        if real.ambient() != n {
            return Err(Error::DimensionMismatch(
                "realization ambient size vs model".into(),
            ));
        }
        // even generators tangent to the pattern at first order
        for i in 0..alg.dim() {
            if alg.parity(i) == Parity::Even {
                let x = &real.matrices[i];
                for r in 0..n {
                    for c in 0..n {
                        let constrained = !matches!(pattern[r][c], MaskEntry::Free);
                        if constrained && !x[(r, c)].is_zero() {
                            return Err(Error::PatternViolation(format!(
                                "even generator {} not tangent to the pattern at ({r},{c})",
                                alg.basis().name(i)
                            )));
                        }
                    }
                }
            }
        }
        Ok(GroupModel { n, pattern, alg })
    }

    /// Full GL(n) pattern (all entries free).
    pub fn full_pattern(n: usize) -> Vec<Vec<MaskEntry>> {
        vec![vec![MaskEntry::Free; n]; n]
    }

    /// Identity-only pattern (the trivial group inside GL(n)).
    pub fn identity_pattern(n: usize) -> Vec<Vec<MaskEntry>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { MaskEntry::One } else { MaskEntry::Zero })
                    .collect()
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern(&self) -> &[Vec<MaskEntry>] {
        &self.pattern
    }

    pub fn algebra(&self) -> &LieSuperAlgebra {
        &self.alg
    }

    pub fn algebra_arc(&self) -> Arc<LieSuperAlgebra> {
        Arc::clone(&self.alg)
    }

    fn check_pattern(&self, m: &Mat) -> Result<()> {
        if m.rows != self.n || m.cols != self.n {
            return Err(Error::DimensionMismatch("point size".into()));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                match self.pattern[i][j] {
                    MaskEntry::Free => {}
                    MaskEntry::Zero => {
                        if !m[(i, j)].is_zero() {
                            return Err(Error::PatternViolation(format!(
                                "entry ({},{}) must vanish",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                    MaskEntry::One => {
                        if !m[(i, j)].is_one() {
                            return Err(Error::PatternViolation(format!(
                                "entry ({},{}) must be one",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Validated point constructor: pattern conformance plus invertibility.
    pub fn point(&self, mat: Mat) -> Result<GroupPoint> {
        self.check_pattern(&mat)?;
        if mat.det()?.is_zero() {
            return Err(Error::Singular("point has zero determinant".into()));
        }
        Ok(GroupPoint { mat })
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint {
            mat: Mat::identity(self.n),
        }
    }

    /// Exact product with the pattern revalidated.
    pub fn group_mul(&self, a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
        self.point(a.mat.mul(&b.mat)?)
    }

    /// Exact inverse with the pattern revalidated.
    pub fn group_inv(&self, a: &GroupPoint) -> Result<GroupPoint> {
        self.point(a.mat.inverse()?)
    }

    /// Adjoint action `Ad(g) X = g X g^{-1}` re-expanded in the realization
    /// basis. Errors when the result leaves the span (inconsistent model).
    pub fn ad_g(&self, g: &GroupPoint, x: &[Scalar]) -> Result<Vec<Scalar>> {
        let real = self.alg.realization().expect("validated at construction");
        let xm = real.realize(x)?;
        let conj = g.mat.mul(&xm)?.mul(&g.mat.inverse()?)?;
        real.coords(&conj)
    }

    /// Right-invariant derivation along even `X`:
    /// `(X f)(g) = d/dt f((I + tX) g)` at `t = 0`, returned as an expression.
    /// Coordinates map to `sum_k X_{ik} x_{kj}` and `detinv` to
    /// `-tr(X) detinv`; odd directions are rejected.
    pub fn riv_derive(&self, x: &[Scalar], f: &FunctionExpr) -> Result<FunctionExpr> {
        for (i, c) in x.iter().enumerate() {
            if !c.is_zero() && self.alg.parity(i) == Parity::Odd {
                return Err(Error::ParityViolation(
                    "riv_derive along an odd direction".into(),
                ));
            }
        }
        let real = self.alg.realization().expect("validated at construction");
        let xm = real.realize(x)?;
        self.derive_with_matrix(&xm, f)
    }

    fn derive_with_matrix(&self, xm: &Mat, f: &FunctionExpr) -> Result<FunctionExpr> {
        Ok(match f {
            FunctionExpr::Const(_) => FunctionExpr::zero(),
            FunctionExpr::Coord(i, j) => {
                let mut sum = FunctionExpr::zero();
                for k in 0..self.n {
                    if !xm[(*i, k)].is_zero() {
                        sum = sum.add(FunctionExpr::coord(k, *j).scale(&xm[(*i, k)]));
                    }
                }
                sum
            }
            FunctionExpr::Add(a, b) => self
                .derive_with_matrix(xm, a)?
                .add(self.derive_with_matrix(xm, b)?),
            FunctionExpr::Mul(a, b) => {
                let da = self.derive_with_matrix(xm, a)?;
                let db = self.derive_with_matrix(xm, b)?;
                da.mul((**b).clone()).add((**a).clone().mul(db))
            }
            FunctionExpr::DetInv => FunctionExpr::DetInv.scale(&-xm.trace()),
        })
    }

    /// Jet point `(I + eps X) g` for derivatives along `X` at `g`.
    pub fn jet_point(&self, g: &GroupPoint, x_mat: &Mat) -> Mat<Jet1> {
        let xg = x_mat.mul(&g.mat).expect("sizes validated");
        Mat::from_fn(self.n, self.n, |i, j| {
            Jet1::new(g.mat[(i, j)].clone(), xg[(i, j)].clone())
        })
    }

    pub fn eval_expr(&self, f: &FunctionExpr, g: &GroupPoint) -> Result<Scalar> {
        f.eval(&g.mat)
    }

    /// Evaluates value and first derivative at a jet matrix.
    pub fn jet_eval(&self, f: &FunctionExpr, point: &Mat<Jet1>) -> Result<Jet1> {
        f.eval(point)
    }

    /// Expression equality decided by evaluation on a sample set.
    pub fn expr_eq_on(&self, a: &FunctionExpr, b: &FunctionExpr, samples: &SampleSet) -> Result<bool> {
        for g in &samples.points {
            if self.eval_expr(a, g)? != self.eval_expr(b, g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Finite set of exactly representable points, closed under products and
/// inverses up to a stated depth; always contains the identity.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<GroupPoint>,
}

impl SampleSet {
    pub fn generate(model: &GroupModel, generators: &[GroupPoint], depth: usize) -> Result<SampleSet> {
        let mut pts: Vec<GroupPoint> = vec![model.identity()];
        for g in generators {
            model.check_pattern(&g.mat)?;
            if !pts.contains(g) {
                pts.push(g.clone());
            }
        }
        for _ in 0..depth {
            let snapshot = pts.clone();
            for a in &snapshot {
                let inv = model.group_inv(a)?;
                if !pts.contains(&inv) {
                    pts.push(inv);
                }
                for b in &snapshot {
                    let ab = model.group_mul(a, b)?;
                    if !pts.contains(&ab) {
                        pts.push(ab);
                    }
                }
            }
        }
        Ok(SampleSet { points: pts })
    }

    pub fn from_points(points: Vec<GroupPoint>) -> SampleSet {
        SampleSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
