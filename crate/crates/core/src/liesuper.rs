//! Finite-dimensional Lie superalgebras given by structure constants:
//! construction from bracket tables or matrix realizations, super-Jacobi
//! verification, subspaces and odd quotients.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Scalar;
use crate::linalg::{coords_in_span, independent, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Ordered basis with parities; even labels precede odd labels (the order
/// the PBW normal form relies on).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperBasis {
    names: Vec<String>,
    parities: Vec<Parity>,
    n_even: usize,
}

impl SuperBasis {
    pub fn new(items: Vec<(String, Parity)>) -> Result<Self> {
        let mut names = Vec::with_capacity(items.len());
        let mut parities = Vec::with_capacity(items.len());
        for (n, p) in items {
            if names.contains(&n) {
                return Err(Error::Invalid(format!("duplicate basis label {n:?}")));
            }
            names.push(n);
            parities.push(p);
        }
        let n_even = parities.iter().filter(|p| **p == Parity::Even).count();
        if parities[..n_even].iter().any(|p| *p == Parity::Odd) {
            return Err(Error::Invalid(
                "even basis labels must precede odd labels".into(),
            ));
        }
        Ok(SuperBasis {
            names,
            parities,
            n_even,
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn n_even(&self) -> usize {
        self.n_even
    }

    pub fn n_odd(&self) -> usize {
        self.dim() - self.n_even
    }

    pub fn parity(&self, idx: usize) -> Parity {
        self.parities[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Indices of the odd basis elements (all >= n_even).
    pub fn odd_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_even..self.dim()
    }
}

/// Lie superalgebra with exact structure constants.
///
/// The bracket table is supplied for index pairs `i <= j` only; the other
/// half is derived from super-antisymmetry, so inconsistent inputs cannot be
/// expressed. Parity homogeneity and the even-diagonal-vanishing rule are
/// enforced at construction; the super-Jacobi identity is verified by
/// [`LieSuperAlgebra::check_jacobi`], not assumed.
#[derive(Clone)]
pub struct LieSuperAlgebra {
    basis: SuperBasis,
    /// Full lookup table, index (i*dim+j) -> sparse coefficient vector.
    table: Vec<Vec<(usize, Scalar)>>,
    realization: Option<MatrixRealization>,
}

/// Matrix model of an algebra inside gl(m|n).
#[derive(Debug, Clone)]
pub struct MatrixRealization {
    pub m: usize,
    pub n: usize,
    /// One ambient (m+n)-square matrix per basis element, same order.
    pub matrices: Vec<Mat>,
    /// Precomputed solver for `coords`: row-reduction of the flattened basis
    /// recorded once, so each lookup is a matrix-vector product.
    coords_proj: Mat,
    coords_null: Mat,
}

impl MatrixRealization {
    /// Builds the realization and precomputes the coordinate solver.
    /// Requires linearly independent matrices.
    pub fn new(m: usize, n: usize, matrices: Vec<Mat>) -> Result<Self> {
        let size = (m + n) * (m + n);
        let d = matrices.len();
        for mat in &matrices {
            if mat.rows != m + n || mat.cols != m + n {
                return Err(Error::DimensionMismatch("realization matrix size".into()));
            }
        }
        let flat: Vec<Vec<Scalar>> = matrices.iter().map(flatten).collect();
        if !independent(&flat) {
            return Err(Error::Invalid("matrix basis not linearly independent".into()));
        }
        // rref([B | I]) = [E B | E]; with full column rank the top block of
        // E B is the identity, so coords(v) = E[0..d] v with membership
        // condition E[d..] v = 0.
        let aug = Mat::from_fn(size, d + size, |i, j| {
            if j < d {
                flat[j][i].clone()
            } else if j - d == i {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < d || pivots[..d] != (0..d).collect::<Vec<_>>()[..] {
            return Err(Error::Invalid("realization basis solver failed".into()));
        }
        let coords_proj = Mat::from_fn(d, size, |i, j| r[(i, j + d)].clone());
        let coords_null = Mat::from_fn(size - d, size, |i, j| r[(i + d, j + d)].clone());
        Ok(MatrixRealization {
            m,
            n,
            matrices,
            coords_proj,
            coords_null,
        })
    }

    pub fn ambient(&self) -> usize {
        self.m + self.n
    }

    /// Parity a matrix must have to sit at block position (i, j).
    pub fn block_parity(&self, i: usize, j: usize) -> Parity {
        let top_i = i < self.m;
        let top_j = j < self.m;
        if top_i == top_j {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Checks that `mat` is supported on blocks of the stated parity.
    pub fn parity_consistent(&self, mat: &Mat, parity: Parity) -> bool {
        for i in 0..self.ambient() {
            for j in 0..self.ambient() {
                if !mat[(i, j)].is_zero() && self.block_parity(i, j) != parity {
                    return false;
                }
            }
        }
        true
    }

    /// Matrix of the linear combination with the given coefficients.
    pub fn realize(&self, coeffs: &[Scalar]) -> Result<Mat> {
        if coeffs.len() != self.matrices.len() {
            return Err(Error::DimensionMismatch("realize coefficients".into()));
        }
        let mut out = Mat::zeros(self.ambient(), self.ambient());
        for (c, m) in coeffs.iter().zip(&self.matrices) {
            out = out.add(&m.scale(c))?;
        }
        Ok(out)
    }

    /// Coefficients of `mat` in the realization basis, or error if outside the span.
    pub fn coords(&self, mat: &Mat) -> Result<Vec<Scalar>> {
        let v = flatten(mat);
        let apply = |m: &Mat| -> Vec<Scalar> {
            (0..m.rows)
                .map(|i| {
                    (0..m.cols)
                        .map(|j| m[(i, j)].clone() * v[j].clone())
                        .fold(Scalar::zero(), |a, b| a + b)
                })
                .collect()
        };
        if !apply(&self.coords_null).iter().all(Scalar::is_zero) {
            return Err(Error::NotInSpan("matrix outside realization span".into()));
        }
        Ok(apply(&self.coords_proj))
    }
}

fn flatten(m: &Mat) -> Vec<Scalar> {
    let mut v = Vec::with_capacity(m.rows * m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            v.push(m[(i, j)].clone());
        }
    }
    v
}

/// Supercommutator `xy - (-1)^{p(x)p(y)} yx`.
pub fn supercommutator(x: &Mat, px: Parity, y: &Mat, py: Parity) -> Result<Mat> {
    let xy = x.mul(y)?;
    let yx = y.mul(x)?;
    if px == Parity::Odd && py == Parity::Odd {
        xy.add(&yx)
    } else {
        xy.add(&yx.neg())
    }
}

/// Outcome of a Jacobi verification: violations are data, not errors.
#[derive(Debug, Clone, Default)]
pub struct JacobiReport {
    /// Basis index triples where the graded Jacobi identity fails.
    pub violations: Vec<(usize, usize, usize)>,
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LieSuperAlgebra {
    /// Builds an algebra from bracket entries `(i, j, coefficients)` with
    /// `i <= j`; entries with `i > j` are rejected, the mirrored half is
    /// derived from super-antisymmetry.
    pub fn new(
        basis: SuperBasis,
        entries: Vec<(usize, usize, Vec<(usize, Scalar)>)>,
    ) -> Result<Self> {
        let dim = basis.dim();
        let mut upper: BTreeMap<(usize, usize), Vec<(usize, Scalar)>> = BTreeMap::new();
        for (i, j, coeffs) in entries {
            if i >= dim || j >= dim || coeffs.iter().any(|(k, _)| *k >= dim) {
                return Err(Error::DimensionMismatch("bracket entry index".into()));
            }
            if i > j {
                return Err(Error::BadBracket(format!(
                    "entry ({}, {}) out of order: store brackets for i <= j only",
                    basis.name(i),
                    basis.name(j)
                )));
            }
            if upper.contains_key(&(i, j)) {
                return Err(Error::BadBracket(format!(
                    "duplicate entry for ({}, {})",
                    basis.name(i),
                    basis.name(j)
                )));
            }
            upper.insert((i, j), normalize_sparse(coeffs));
        }
        // diagonal even brackets must vanish: [x,x] = -[x,x]
        for i in 0..dim {
            if basis.parity(i) == Parity::Even {
                if let Some(v) = upper.get(&(i, i)) {
                    if !v.is_empty() {
                        return Err(Error::BadBracket(format!(
                            "[{0}, {0}] must vanish for even {0}",
                            basis.name(i)
                        )));
                    }
                }
            }
        }
        // parity homogeneity
        for ((i, j), coeffs) in &upper {
            let want = basis.parity(*i).add(basis.parity(*j));
            for (k, c) in coeffs {
                if !c.is_zero() && basis.parity(*k) != want {
                    return Err(Error::ParityViolation(format!(
                        "[{}, {}] has a component on {} of wrong parity",
                        basis.name(*i),
                        basis.name(*j),
                        basis.name(*k)
                    )));
                }
            }
        }
        let mut table = vec![Vec::new(); dim * dim];
        for ((i, j), coeffs) in upper {
            table[i * dim + j] = coeffs.clone();
            if i != j {
                // [y,x] = -(-1)^{p(x)p(y)} [x,y]
                let sign_neg = basis.parity(i) == Parity::Odd && basis.parity(j) == Parity::Odd;
                let mirrored = coeffs
                    .iter()
                    .map(|(k, c)| {
                        let c = if sign_neg { c.clone() } else { -c.clone() };
                        (*k, c)
                    })
                    .collect();
                table[j * dim + i] = mirrored;
            }
        }
        Ok(LieSuperAlgebra {
            basis,
            table,
            realization: None,
        })
    }

    /// The abelian superalgebra on the given basis (all brackets zero).
    pub fn abelian(basis: SuperBasis) -> Self {
        let dim = basis.dim();
        LieSuperAlgebra {
            basis,
            table: vec![Vec::new(); dim * dim],
            realization: None,
        }
    }

    /// Builds the algebra spanned by the given matrices inside gl(m|n),
    /// computing structure constants from supercommutators. Errors with the
    /// offending pair when the span is not bracket-closed.
    pub fn from_matrix_basis(
        names: Vec<String>,
        mats: Vec<(Parity, Mat)>,
        m: usize,
        n: usize,
    ) -> Result<Self> {
        if names.len() != mats.len() {
            return Err(Error::DimensionMismatch("names vs matrices".into()));
        }
        let items: Vec<(String, Parity)> = names
            .iter()
            .cloned()
            .zip(mats.iter().map(|(p, _)| *p))
            .collect();
        let basis = SuperBasis::new(items)?;
        for (k, (_, mat)) in mats.iter().enumerate() {
            if mat.rows != m + n || mat.cols != m + n {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is not {}x{}",
                    names[k],
                    m + n,
                    m + n
                )));
            }
        }
        let realization =
            MatrixRealization::new(m, n, mats.iter().map(|(_, mat)| mat.clone()).collect())?;
        for (k, (p, mat)) in mats.iter().enumerate() {
            if !realization.parity_consistent(mat, *p) {
                return Err(Error::ParityViolation(format!(
                    "matrix {} not supported on its parity blocks",
                    names[k]
                )));
            }
        }
        let flat: Vec<Vec<Scalar>> = realization.matrices.iter().map(flatten).collect();
        let dim = basis.dim();
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let sc = supercommutator(
                    &realization.matrices[i],
                    basis.parity(i),
                    &realization.matrices[j],
                    basis.parity(j),
                )?;
                let coeffs = coords_in_span(&flat, &flatten(&sc)).map_err(|_| {
                    Error::NotClosed(format!(
                        "[{}, {}] falls outside the span",
                        basis.name(i),
                        basis.name(j)
                    ))
                })?;
                let sparse: Vec<(usize, Scalar)> = coeffs
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if !sparse.is_empty() {
                    entries.push((i, j, sparse));
                }
            }
        }
        let mut alg = LieSuperAlgebra::new(basis, entries)?;
        alg.realization = Some(realization);
        Ok(alg)
    }

    pub fn basis(&self) -> &SuperBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn parity(&self, idx: usize) -> Parity {
        self.basis.parity(idx)
    }

    pub fn realization(&self) -> Option<&MatrixRealization> {
        self.realization.as_ref()
    }

    pub fn set_realization(&mut self, r: MatrixRealization) {
        self.realization = Some(r);
    }

    /// Sparse bracket of two basis elements.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.table[i * self.dim() + j]
    }

    /// Bilinear extension of the bracket table to coefficient vectors.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Result<Vec<Scalar>> {
        let dim = self.dim();
        if x.len() != dim || y.len() != dim {
            return Err(Error::DimensionMismatch("bracket operands".into()));
        }
        let mut out = vec![Scalar::zero(); dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi.clone() * yj;
                for (k, ck) in self.bracket_basis(i, j) {
                    out[*k] += c.clone() * ck;
                }
            }
        }
        Ok(out)
    }

    /// Graded Jacobi identity on all basis triples:
    /// `(-1)^{p(x)p(z)}[x,[y,z]] + (-1)^{p(y)p(x)}[y,[z,x]] + (-1)^{p(z)p(y)}[z,[x,y]] = 0`.
    pub fn check_jacobi(&self) -> JacobiReport {
        let dim = self.dim();
        let mut rep = JacobiReport::default();
        let e = |i: usize| -> Vec<Scalar> {
            let mut v = vec![Scalar::zero(); dim];
            v[i] = Scalar::one();
            v
        };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let sgn = |a: usize, b: usize| -> Scalar {
                        if self.parity(a) == Parity::Odd && self.parity(b) == Parity::Odd {
                            -Scalar::one()
                        } else {
                            Scalar::one()
                        }
                    };
                    let t1 = self.bracket(&e(i), &self.bracket(&e(j), &e(k)).unwrap()).unwrap();
                    let t2 = self.bracket(&e(j), &self.bracket(&e(k), &e(i)).unwrap()).unwrap();
                    let t3 = self.bracket(&e(k), &self.bracket(&e(i), &e(j)).unwrap()).unwrap();
                    let mut total = vec![Scalar::zero(); dim];
                    for (t, s) in [(t1, sgn(i, k)), (t2, sgn(j, i)), (t3, sgn(k, j))] {
                        for (slot, v) in total.iter_mut().zip(t) {
                            *slot += s.clone() * v;
                        }
                    }
                    if !total.iter().all(Scalar::is_zero) {
                        rep.violations.push((i, j, k));
                    }
                }
            }
        }
        rep
    }

    /// The odd part as a subspace (span of the odd basis vectors).
    pub fn odd_part(&self) -> SuperSubspace {
        let dim = self.dim();
        let span = self
            .basis
            .odd_indices()
            .map(|i| {
                let mut v = vec![Scalar::zero(); dim];
                v[i] = Scalar::one();
                v
            })
            .collect();
        SuperSubspace {
            dim,
            span,
            parities: self.basis.odd_indices().map(|_| Parity::Odd).collect(),
        }
    }

    /// Checks `[x, y]` lands in the span of `span` for all generator pairs
    /// (bracket closure of a candidate subalgebra); returns the first
    /// offending pair on failure.
    pub fn bracket_closed(&self, span: &[Vec<Scalar>]) -> std::result::Result<(), (usize, usize)> {
        for (a, x) in span.iter().enumerate() {
            for (b, y) in span.iter().enumerate() {
                let br = self.bracket(x, y).expect("span vectors sized");
                if coords_in_span(span, &br).is_err() {
                    return Err((a, b));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LieSuperAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LieSuperAlgebra(dim {}|{}, basis [{}])",
            self.basis.n_even(),
            self.basis.n_odd(),
            self.basis.names.join(", ")
        )
    }
}

/// Parity-homogeneous subspace of an algebra's coordinate space.
#[derive(Debug, Clone)]
pub struct SuperSubspace {
    /// Dimension of the parent coordinate space.
    pub dim: usize,
    /// Linearly independent generators (parent coordinates).
    pub span: Vec<Vec<Scalar>>,
    /// Parity of each generator.
    pub parities: Vec<Parity>,
}

impl SuperSubspace {
    pub fn new(alg: &LieSuperAlgebra, span: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = alg.dim();
        let mut parities = Vec::with_capacity(span.len());
        for v in &span {
            if v.len() != dim {
                return Err(Error::DimensionMismatch("subspace generator".into()));
            }
            let mut parity = None;
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    match parity {
                        None => parity = Some(alg.parity(i)),
                        Some(p) if p != alg.parity(i) => {
                            return Err(Error::ParityViolation(
                                "subspace generator mixes parities".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
            parities.push(parity.unwrap_or(Parity::Even));
        }
        if !independent(&span) {
            return Err(Error::Invalid("subspace generators not independent".into()));
        }
        Ok(SuperSubspace { dim, span, parities })
    }

    pub fn rank(&self) -> usize {
        self.span.len()
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        coords_in_span(&self.span, v).is_ok()
    }

    /// True when every generator of `other` lies in this span.
    pub fn contains_subspace(&self, other: &SuperSubspace) -> bool {
        other.span.iter().all(|v| self.contains(v))
    }
}

/// Complement data for `g1 / h1`: representatives and the projection matrix.
#[derive(Debug, Clone)]
pub struct OddQuotient {
    /// Complement representatives, in parent coordinates.
    pub complement: Vec<Vec<Scalar>>,
    /// Projection: parent coordinates -> quotient coordinates (rows = quotient dim).
    pub proj: Mat,
}

impl OddQuotient {
    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    /// Quotient coordinates of `v` (parent coordinates).
    pub fn project(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.proj.cols {
            return Err(Error::DimensionMismatch("quotient projection".into()));
        }
        Ok((0..self.proj.rows)
            .map(|i| {
                (0..self.proj.cols)
                    .map(|j| self.proj[(i, j)].clone() * v[j].clone())
                    .fold(Scalar::zero(), |a, b| a + b)
            })
            .collect())
    }
}

/// Quotient of odd subspaces `g1 / h1` with `h1` contained in `g1`: picks a
/// complement basis greedily from `g1`'s generators and returns the
/// projection `X -> X + h1` in complement coordinates.
pub fn odd_quotient(g1: &SuperSubspace, h1: &SuperSubspace) -> Result<OddQuotient> {
    if g1.dim != h1.dim {
        return Err(Error::DimensionMismatch("odd_quotient spaces".into()));
    }
    if !g1.contains_subspace(h1) {
        return Err(Error::Invalid("h1 is not contained in g1".into()));
    }
    // grow h1's basis to a basis of g1
    let mut combined: Vec<Vec<Scalar>> = h1.span.clone();
    let mut complement = Vec::new();
    for v in &g1.span {
        let mut trial = combined.clone();
        trial.push(v.clone());
        if independent(&trial) {
            combined = trial;
            complement.push(v.clone());
        }
    }
    let q = complement.len();
    let k = h1.span.len();
    // extend (h1 ++ complement) to a basis of the whole parent space so the
    // projection is a genuine linear map; extra directions project to zero
    let mut full = combined.clone();
    for col in 0..g1.dim {
        let mut unit = vec![Scalar::zero(); g1.dim];
        unit[col] = Scalar::one();
        let mut trial = full.clone();
        trial.push(unit.clone());
        if independent(&trial) {
            full = trial;
        }
    }
    let mut proj = Mat::zeros(q, g1.dim);
    for col in 0..g1.dim {
        let mut unit = vec![Scalar::zero(); g1.dim];
        unit[col] = Scalar::one();
        let coords = coords_in_span(&full, &unit).expect("full basis spans");
        for row in 0..q {
            proj[(row, col)] = coords[k + row].clone();
        }
    }
    Ok(OddQuotient { complement, proj })
}

/// Convenience: elementary matrix with a one at (i, j), zero elsewhere.
pub fn elementary(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = Scalar::one();
    m
}

/// The algebra gl(1|1) with basis (e11, e22 | e12, e21), structure constants
/// computed from 2x2 supercommutators.
pub fn gl11() -> LieSuperAlgebra {
    LieSuperAlgebra::from_matrix_basis(
        vec!["e11".into(), "e22".into(), "e12".into(), "e21".into()],
        vec![
            (Parity::Even, elementary(2, 0, 0)),
            (Parity::Even, elementary(2, 1, 1)),
            (Parity::Odd, elementary(2, 0, 1)),
            (Parity::Odd, elementary(2, 1, 0)),
        ],
        1,
        1,
    )
    .expect("gl(1|1) closes")
}

/// Full gl(m|n) on elementary matrices, even basis first.
pub fn gl_super(m: usize, n: usize) -> LieSuperAlgebra {
    let size = m + n;
    let mut names = Vec::new();
    let mut mats = Vec::new();
    for parity_pass in [Parity::Even, Parity::Odd] {
        for i in 0..size {
            for j in 0..size {
                let even = (i < m) == (j < m);
                let p = if even { Parity::Even } else { Parity::Odd };
                if p == parity_pass {
                    names.push(format!("e{}{}", i + 1, j + 1));
                    mats.push((p, elementary(size, i, j)));
                }
            }
        }
    }
    LieSuperAlgebra::from_matrix_basis(names, mats, m, n).expect("gl(m|n) closes")
}

/// Purely odd abelian algebra C^{0|n}, realized inside gl(1|n) so that a
/// trivial-group model can carry it.
pub fn abelian_odd(n: usize) -> LieSuperAlgebra {
    let names = (1..=n).map(|k| format!("xi{k}")).collect();
    let mats = (0..n)
        .map(|k| (Parity::Odd, elementary(n + 1, 0, k + 1)))
        .collect();
    LieSuperAlgebra::from_matrix_basis(names, mats, 1, n).expect("abelian odd closes")
}

fn normalize_sparse(coeffs: Vec<(usize, Scalar)>) -> Vec<(usize, Scalar)> {
    let mut map: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (k, c) in coeffs {
        let slot = map.entry(k).or_insert_with(Scalar::zero);
        *slot += c;
    }
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); dim];
        v[i] = Scalar::one();
        v
    }

    #[test]
    fn gl11_bracket_matches_matrix_oracle() {
        let g = gl11();
        let r = g.realization().unwrap();
        // oracle: recompute every bracket directly from 2x2 matrices
        for i in 0..4 {
            for j in 0..4 {
                let sc = supercommutator(
                    &r.matrices[i],
                    g.parity(i),
                    &r.matrices[j],
                    g.parity(j),
                )
                .unwrap();
                let via_table = g.bracket(&unit(4, i), &unit(4, j)).unwrap();
                let back = r.realize(&via_table).unwrap();
                assert_eq!(back, sc, "bracket ({i},{j})");
            }
        }
        // [e12, e21] = e11 + e22 (odd-odd supercommutator)
        let br = g.bracket(&unit(4, 2), &unit(4, 3)).unwrap();
        assert_eq!(br, vec![Scalar::one(), Scalar::one(), Scalar::zero(), Scalar::zero()]);
    }

    #[test]
    fn abelian_and_even_square_brackets() {
        let a = abelian_odd(2);
        let z = a.bracket(&unit(2, 0), &unit(2, 1)).unwrap();
        assert!(z.iter().all(Scalar::is_zero));
        let g = gl11();
        let sq = g.bracket(&unit(4, 0), &unit(4, 0)).unwrap();
        assert!(sq.iter().all(Scalar::is_zero), "[x,x]=0 for even x");
    }

    #[test]
    fn jacobi_passes_on_examples_and_detects_perturbation() {
        assert!(gl11().check_jacobi().passed());
        assert!(abelian_odd(3).check_jacobi().passed());
        assert!(gl_super(2, 1).check_jacobi().passed());

        // perturb [e12,e21] to e11 + 2 e22
        let basis = SuperBasis::new(vec![
            ("e11".into(), Parity::Even),
            ("e22".into(), Parity::Even),
            ("e12".into(), Parity::Odd),
            ("e21".into(), Parity::Odd),
        ])
        .unwrap();
        let one = Scalar::one;
        let entries = vec![
            (0, 2, vec![(2, one())]),
            (0, 3, vec![(3, -one())]),
            (1, 2, vec![(2, -one())]),
            (1, 3, vec![(3, one())]),
            (2, 3, vec![(0, one()), (1, Scalar::from_int(2))]),
        ];
        let bad = LieSuperAlgebra::new(basis, entries).unwrap();
        let rep = bad.check_jacobi();
        assert!(!rep.passed());
        assert!(
            rep.violations.contains(&(2, 3, 2)),
            "expected (e12,e21,e12) violation, got {:?}",
            rep.violations
        );
    }

    #[test]
    fn every_plus_one_mutation_of_gl11_fails_some_axiom() {
        let g = gl11();
        let dim = g.dim();
        let names: Vec<String> = (0..dim).map(|i| g.basis().name(i).to_string()).collect();
        let mut mutants = 0;
        for i in 0..dim {
            for j in i..dim {
                for k in 0..dim {
                    // rebuild the upper table with c[i][j][k] += 1
                    let mut entries = Vec::new();
                    for a in 0..dim {
                        for b in a..dim {
                            let mut coeffs: Vec<(usize, Scalar)> =
                                g.bracket_basis(a, b).to_vec();
                            if (a, b) == (i, j) {
                                coeffs.push((k, Scalar::one()));
                            }
                            if !coeffs.is_empty() {
                                entries.push((a, b, coeffs));
                            }
                        }
                    }
                    let basis = SuperBasis::new(
                        names
                            .iter()
                            .cloned()
                            .zip((0..dim).map(|t| g.parity(t)))
                            .collect(),
                    )
                    .unwrap();
                    mutants += 1;
                    match LieSuperAlgebra::new(basis, entries) {
                        // parity-inhomogeneous or diagonal-even mutants are rejected at construction
                        Err(_) => {}
                        Ok(alg) => {
                            assert!(
                                !alg.check_jacobi().passed(),
                                "mutation c[{i}][{j}] += {k} passed Jacobi"
                            );
                        }
                    }
                }
            }
        }
        assert_eq!(mutants, 40);
    }

    #[test]
    fn parity_homogeneity_of_brackets() {
        for g in [gl11(), gl_super(2, 1), abelian_odd(3)] {
            let dim = g.dim();
            for i in 0..dim {
                for j in 0..dim {
                    let want = g.parity(i).add(g.parity(j));
                    for (k, c) in g.bracket_basis(i, j) {
                        assert!(c.is_zero() || g.parity(*k) == want);
                    }
                }
            }
        }
    }

    #[test]
    fn from_matrix_basis_rejects_open_spans() {
        // {E12 odd} alone is closed ([E12,E12] = 2 E12^2 = 0), but adding E21
        // without the evens leaves the span open.
        let e12 = elementary(2, 0, 1);
        let e21 = elementary(2, 1, 0);
        let ok = LieSuperAlgebra::from_matrix_basis(
            vec!["x".into()],
            vec![(Parity::Odd, e12.clone())],
            1,
            1,
        );
        assert!(ok.is_ok());
        let err = LieSuperAlgebra::from_matrix_basis(
            vec!["x".into(), "y".into()],
            vec![(Parity::Odd, e12), (Parity::Odd, e21)],
            1,
            1,
        );
        match err {
            Err(Error::NotClosed(msg)) => assert!(msg.contains('x') && msg.contains('y')),
            other => panic!("expected NotClosed, got {other:?}"),
        }
    }

    #[test]
    fn quotient_examples() {
        let g = gl_super(2, 1); // odd part 4-dim
        let g1 = g.odd_part();
        // full/zero quotients
        let zero = SuperSubspace::new(&g, vec![]).unwrap();
        let q_full = odd_quotient(&g1, &g1).unwrap();
        assert_eq!(q_full.dim(), 0);
        let q_zero = odd_quotient(&g1, &zero).unwrap();
        assert_eq!(q_zero.dim(), 4);
        // projection of a complement rep is a unit vector
        let p = q_zero.project(&q_zero.complement[2]).unwrap();
        assert_eq!(p[2], Scalar::one());
        assert!(p.iter().enumerate().all(|(t, c)| t == 2 || c.is_zero()));
        // h1 not inside g1 is rejected
        let not_odd = SuperSubspace::new(&g, vec![unit(g.dim(), 0)]).unwrap();
        assert!(odd_quotient(&g1, &not_odd).is_err());
    }
}
