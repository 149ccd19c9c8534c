//! Exact dense linear algebra over Q(i): Gaussian elimination with
//! nonzero-first pivoting, solves, inverses, kernels. No rank tolerance is
//! needed because arithmetic is exact.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::{RingElem, Scalar};

/// Dense matrix over a ring (usually `Scalar`, also `Jet1` for jet points).
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T = Scalar> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: RingElem> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::ring_zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = T::ring_one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].ring_add(&a.ring_mul(&rhs[(k, j)]));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix add".into()));
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a.ring_add(b))
                .collect(),
        })
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.ring_mul(s)).collect(),
        }
    }

    pub fn neg(&self) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.ring_neg()).collect(),
        }
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Determinant by Laplace expansion along the first row. Exponential in
    /// n, used only at ambient sizes (n <= 6); works over jets where Gaussian
    /// division may hit zero value parts.
    pub fn det_laplace(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("det of non-square".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(T::ring_one());
        }
        if n == 1 {
            return Ok(self[(0, 0)].clone());
        }
        let mut acc = T::ring_zero();
        for j in 0..n {
            let minor = Mat::from_fn(n - 1, n - 1, |r, c| {
                let cc = if c < j { c } else { c + 1 };
                self[(r + 1, cc)].clone()
            });
            let term = self[(0, j)].ring_mul(&minor.det_laplace()?);
            acc = if j % 2 == 0 {
                acc.ring_add(&term)
            } else {
                acc.ring_add(&term.ring_neg())
            };
        }
        Ok(acc)
    }

    pub fn trace(&self) -> T {
        let mut t = T::ring_zero();
        for k in 0..self.rows.min(self.cols) {
            t = t.ring_add(&self[(k, k)]);
        }
        t
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.data[i * self.cols + j]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat<Scalar> {
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Reduced row echelon form; returns (rref, pivot columns, det-of-square-part sign tracking not kept).
    pub fn rref(&self) -> (Mat<Scalar>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    let tmp = m[(p, j)].clone();
                    m[(p, j)] = m[(r, j)].clone();
                    m[(r, j)] = tmp;
                }
            }
            let inv = m[(r, c)].inv().expect("pivot nonzero");
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let s = m[(r, j)].clone() * f.clone();
                        m[(i, j)] = m[(i, j)].clone() - s;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves `A x = b` for one solution, or reports inconsistency.
    pub fn solve(&self, b: &[Scalar]) -> Result<Vec<Scalar>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch("solve rhs".into()));
        }
        let mut aug = Mat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        aug = r;
        if pivots.contains(&self.cols) {
            return Err(Error::NotInSpan("inconsistent linear system".into()));
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug[(row, self.cols)].clone();
        }
        Ok(x)
    }

    /// Basis of the null space of `A`.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![Scalar::zero(); self.cols];
            v[fc] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, fc)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Exact inverse; errors on singular input.
    pub fn inverse(&self) -> Result<Mat<Scalar>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of non-square".into()));
        }
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return Err(Error::Singular("matrix not invertible".into()));
        }
        Ok(Mat::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn det(&self) -> Result<Scalar> {
        self.det_laplace()
    }

    /// Stacks row vectors into a matrix.
    pub fn from_row_vectors(vs: &[Vec<Scalar>]) -> Result<Mat<Scalar>> {
        Mat::from_rows(vs.to_vec())
    }
}

/// Expresses `target` in the span of `basis` (each a flat vector), or errors.
pub fn coords_in_span(basis: &[Vec<Scalar>], target: &[Scalar]) -> Result<Vec<Scalar>> {
    if basis.is_empty() {
        return if target.iter().all(Scalar::is_zero) {
            Ok(Vec::new())
        } else {
            Err(Error::NotInSpan("empty basis, nonzero target".into()))
        };
    }
    let dim = basis[0].len();
    if target.len() != dim || basis.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("coords_in_span".into()));
    }
    // columns are basis vectors
    let a = Mat::from_fn(dim, basis.len(), |i, j| basis[j][i].clone());
    a.solve(target)
}

/// True when the given vectors are linearly independent.
pub fn independent(vs: &[Vec<Scalar>]) -> bool {
    if vs.is_empty() {
        return true;
    }
    let m = Mat::from_rows(vs.to_vec()).expect("ragged vectors");
    m.rank() == vs.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn inverse_and_det() {
        let m = Mat::from_rows(vec![
            vec![s(2), s(1)],
            vec![s(1), s(1)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(2));
        assert_eq!(m.det().unwrap(), s(1));
        let sing = Mat::from_rows(vec![vec![s(1), s(2)], vec![s(2), s(4)]]).unwrap();
        assert!(sing.inverse().is_err());
        assert_eq!(sing.det().unwrap(), s(0));
    }

    #[test]
    fn solve_and_kernel() {
        let m = Mat::from_rows(vec![vec![s(1), s(2), s(3)], vec![s(0), s(1), s(1)]]).unwrap();
        let x = m.solve(&[s(6), s(2)]).unwrap();
        // check A x = b
        let ax: Vec<Scalar> = (0..2)
            .map(|i| {
                (0..3)
                    .map(|j| m[(i, j)].clone() * x[j].clone())
                    .fold(Scalar::zero(), |a, b| a + b)
            })
            .collect();
        assert_eq!(ax, vec![s(6), s(2)]);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        for v in &k {
            let av: Vec<Scalar> = (0..2)
                .map(|i| {
                    (0..3)
                        .map(|j| m[(i, j)].clone() * v[j].clone())
                        .fold(Scalar::zero(), |a, b| a + b)
                })
                .collect();
            assert!(av.iter().all(Scalar::is_zero));
        }
    }

    #[test]
    fn span_coords() {
        let b1 = vec![s(1), s(0), s(1)];
        let b2 = vec![s(0), s(1), s(1)];
        let t = vec![s(2), s(3), s(5)];
        let c = coords_in_span(&[b1, b2], &t).unwrap();
        assert_eq!(c, vec![s(2), s(3)]);
        assert!(coords_in_span(&[vec![s(1), s(0), s(0)]], &[s(0), s(1), s(0)]).is_err());
    }
}
