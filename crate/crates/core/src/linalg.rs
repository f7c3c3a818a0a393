//! Dense linear algebra for the small (N ≲ 100) matrices used throughout the
//! crate: symmetric eigendecomposition by cyclic Jacobi rotations, LU solves,
//! column-wise Kronecker products and the handful of norms the estimators and
//! bounds need.
//!
//! Everything here is a pure function of its inputs.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{input, Error, Result};

/// Row-major dense matrix of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return input(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return input("ragged rows");
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Single-column matrix.
    pub fn column_vector(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product. Panics when the inner dimensions disagree.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "t_matmul dimension mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · rhsᵀ` without materializing the transpose.
    pub fn matmul_t(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "matmul_t dimension mismatch");
        Self::from_fn(self.rows, rhs.rows, |i, j| dot(self.row(i), rhs.row(j)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for v in &mut out.data[i * self.cols..(i + 1) * self.cols] {
                *v *= s;
            }
        }
        out
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.cols.max(1)) {
            for (v, &s) in row.iter_mut().zip(d) {
                *v *= s;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise asymmetry `|A_ij − A_ji|`; `inf` for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `‖AᵀA − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.t_matmul(self)
            .sub(&Self::identity(self.cols))
            .frobenius_norm()
    }
}

/// Serialized as a JSON array of rows.
impl serde::Serialize for DenseMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = (0..self.rows()).map(|i| self.row(i)).collect();
        serde::Serialize::serialize(&rows, s)
    }
}

impl<'de> serde::Deserialize<'de> for DenseMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <Vec<Vec<f64>> as serde::Deserialize>::deserialize(d)?;
        DenseMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_THRESHOLD: f64 = 1e-12;

/// Eigendecomposition `S = V diag(λ) Vᵀ` of a symmetric matrix.
///
/// Cyclic Jacobi rotations until the off-diagonal Frobenius mass drops below
/// `1e-12·‖S‖_F` (at most 100 sweeps). Eigenvalues come back ascending, and
/// each eigenvector is signed so that its largest-magnitude entry is positive
/// (the first such entry on ties).
pub fn eigh_symmetric(s: &DenseMatrix, tol: f64) -> Result<(Vec<f64>, DenseMatrix)> {
    if !s.is_square() {
        return input(format!(
            "eigh needs a square matrix, got {}x{}",
            s.rows, s.cols
        ));
    }
    let asym = s.asymmetry();
    if asym > tol {
        return input(format!(
            "matrix not symmetric: max |S_ij - S_ji| = {asym:e}"
        ));
    }
    let n = s.rows;
    // Work on the exactly symmetrized copy.
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = DenseMatrix::identity(n);
    let threshold = JACOBI_REL_THRESHOLD * s.frobenius_norm();

    let off = |a: &DenseMatrix| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        acc.sqrt()
    };

    let mut converged = off(&a) <= threshold;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Rotation angle annihilating a_pq (Golub & Van Loan 8.4.2).
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off(&a) <= threshold;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal {:e})",
            off(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = a.diagonal();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        sorted.set_column(dst, &col);
    }
    Ok((eigenvalues, sorted))
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is
/// positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Solves `A X = B` with partial-pivot LU.
pub fn solve_linear(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return input(format!(
            "solve needs a square matrix, got {}x{}",
            a.rows, a.cols
        ));
    }
    if b.rows != a.rows {
        return input(format!(
            "right-hand side has {} rows, expected {}",
            b.rows, a.rows
        ));
    }
    let n = a.rows;
    let floor = 1e-12 * a.frobenius_norm();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (piv, piv_val) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if piv_val <= floor || piv_val == 0.0 {
            return Err(Error::Numerical(format!(
                "singular matrix: pivot {k} has magnitude {piv_val:e}"
            )));
        }
        if piv != k {
            for j in 0..n {
                lu.data.swap(k * n + j, piv * n + j);
            }
            for j in 0..x.cols {
                x.data.swap(k * x.cols + j, piv * x.cols + j);
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                lu[(i, j)] -= factor * lu[(k, j)];
            }
            for j in 0..x.cols {
                x[(i, j)] -= factor * x[(k, j)];
            }
        }
    }
    for j in 0..x.cols {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Column-wise Kronecker product: column `k` of the result is `a_k ⊗ b_k`.
pub fn khatri_rao_columns(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return input(format!(
            "Khatri-Rao needs equal column counts, got {} and {}",
            a.cols, b.cols
        ));
    }
    let (m, p) = (a.rows, b.rows);
    Ok(DenseMatrix::from_fn(m * p, a.cols, |r, k| {
        a[(r / p, k)] * b[(r % p, k)]
    }))
}

/// Entrywise absolute sum.
pub fn norm_1_1(a: &DenseMatrix) -> f64 {
    a.data.iter().map(|v| v.abs()).sum()
}

/// Largest column ℓ2 norm.
pub fn norm_1to2(a: &DenseMatrix) -> f64 {
    let mut sq = vec![0.0; a.cols];
    for row in a.data.chunks(a.cols.max(1)) {
        for (s, v) in sq.iter_mut().zip(row) {
            *s += v * v;
        }
    }
    sq.into_iter().fold(0.0, f64::max).sqrt()
}

const POWER_MAX_ITERS: usize = 10_000;
const POWER_SQUARINGS: usize = 4;

/// Largest singular value by power iteration on `AᵀA`.
///
/// The Gram matrix is first raised to the 16th power by repeated squaring
/// (rescaled each time) which widens the spectral gap seen by the iteration;
/// the Rayleigh quotient is always taken against the unpowered `AᵀA`.
pub fn spectral_norm(a: &DenseMatrix, tol: f64) -> f64 {
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    let gram = a.t_matmul(a);
    let mut powered = gram.clone();
    for _ in 0..POWER_SQUARINGS {
        let sq = powered.matmul(&powered);
        let s = sq.max_abs();
        if s == 0.0 || !s.is_finite() {
            break;
        }
        powered = sq.scale(1.0 / s);
    }
    // Start from the powered Gram column with the most energy.
    let start = (0..powered.cols)
        .max_by(|&i, &j| norm2(&powered.column(i)).total_cmp(&norm2(&powered.column(j))))
        .unwrap_or(0);
    let mut x = powered.column(start);
    let nx = norm2(&x);
    if nx == 0.0 {
        x = vec![1.0; powered.cols];
    }
    normalize(&mut x);

    let rayleigh = |x: &[f64]| dot(x, &gram.matvec(x));
    let mut lambda = rayleigh(&x);
    for _ in 0..POWER_MAX_ITERS {
        let mut y = powered.matvec(&x);
        if norm2(&y) == 0.0 {
            break;
        }
        normalize(&mut y);
        let next = rayleigh(&y);
        let change = (next - lambda).abs();
        x = y;
        lambda = next;
        if change <= tol * lambda.abs() {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// `x − mean(x)·1`, the projection onto the complement of the all-ones vector.
pub fn project_ones_complement(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Modified Gram–Schmidt on the columns of `a`, returning a matrix with
/// orthonormal columns spanning the same nested subspaces.
pub fn orthonormalize_columns(a: &DenseMatrix) -> Result<DenseMatrix> {
    let mut q = a.clone();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for j in 0..q.cols {
        let mut col = q.column(j);
        // Two passes keep the loss of orthogonality at machine level.
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k);
                let r = dot(&qk, &col);
                col.iter_mut().zip(&qk).for_each(|(c, q)| *c -= r * q);
            }
        }
        let n = norm2(&col);
        if n <= 1e-14 * scale {
            return Err(Error::Numerical(format!(
                "column {j} is linearly dependent on its predecessors"
            )));
        }
        col.iter_mut().for_each(|c| *c /= n);
        q.set_column(j, &col);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = SeededRng::new(seed);
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.normal());
        b.add(&b.transpose()).scale(0.5)
    }

    #[test]
    fn eigh_identity_is_canonical() {
        let (vals, v) = eigh_symmetric(&DenseMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        assert_eq!(v, DenseMatrix::identity(3));
    }

    #[test]
    fn eigh_two_node_path() {
        let s = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (vals, v) = eigh_symmetric(&s, 1e-12).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[(0, 0)] - r).abs() < 1e-14 && (v[(1, 0)] + r).abs() < 1e-14);
        assert!((v[(0, 1)] - r).abs() < 1e-14 && (v[(1, 1)] - r).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_symmetric() {
        let s = random_symmetric(5, 3);
        let (vals, v) = eigh_symmetric(&s, 1e-12).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(v.orthonormality_defect() <= 1e-10);
        let rec = v.scale_cols(&vals).matmul_t(&v);
        assert!(rec.sub(&s).frobenius_norm() <= 1e-8 * s.frobenius_norm());
    }

    #[test]
    fn eigh_rejects_bad_input() {
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(eigh_symmetric(&rect, 1e-12), Err(Error::Input(_))));
        let asym = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(eigh_symmetric(&asym, 1e-12), Err(Error::Input(_))));
    }

    #[test]
    fn construction_rejects_nan() {
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn solve_identity_and_scaled() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(solve_linear(&DenseMatrix::identity(2), &b).unwrap(), b);
        let x = solve_linear(
            &DenseMatrix::identity(3).scale(2.0),
            &DenseMatrix::identity(3),
        )
        .unwrap();
        assert!(x.sub(&DenseMatrix::identity(3).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn solve_random_residual() {
        let mut rng = SeededRng::new(11);
        let a = DenseMatrix::from_fn(6, 6, |i, j| rng.normal() + if i == j { 4.0 } else { 0.0 });
        let b = DenseMatrix::from_fn(6, 3, |_, _| rng.normal());
        let x = solve_linear(&a, &b).unwrap();
        assert!(a.matmul(&x).sub(&b).frobenius_norm() < 1e-10 * b.frobenius_norm());
    }

    #[test]
    fn solve_singular_names_pivot() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let err = solve_linear(&a, &DenseMatrix::identity(2)).unwrap_err();
        assert!(err.to_string().contains("pivot 1"), "{err}");
    }

    #[test]
    fn khatri_rao_examples() {
        let kr = khatri_rao_columns(&DenseMatrix::identity(2), &DenseMatrix::identity(2)).unwrap();
        let expected = DenseMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(kr, expected);
        let a = DenseMatrix::column_vector(&[1.0, 2.0]);
        let b = DenseMatrix::column_vector(&[3.0, 4.0]);
        assert_eq!(
            khatri_rao_columns(&a, &b).unwrap().column(0),
            vec![3.0, 4.0, 6.0, 8.0]
        );
        assert!(khatri_rao_columns(&DenseMatrix::zeros(2, 2), &DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn norms_of_trivial_matrices() {
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(
            (norm_1_1(&z), norm_1to2(&z), spectral_norm(&z, 1e-10)),
            (0.0, 0.0, 0.0)
        );
        let i = DenseMatrix::identity(4);
        assert_eq!(norm_1_1(&i), 4.0);
        assert_eq!(norm_1to2(&i), 1.0);
        assert!((spectral_norm(&i, 1e-10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_eigh() {
        for seed in 0..20 {
            let mut rng = SeededRng::new(100 + seed);
            let a = DenseMatrix::from_fn(4, 4, |_, _| rng.normal());
            let (vals, _) = eigh_symmetric(&a.t_matmul(&a), 1e-10).unwrap();
            let expected = vals.last().unwrap().sqrt();
            assert!((spectral_norm(&a, 1e-10) - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn ones_complement_examples() {
        assert!(project_ones_complement(&[1.0; 5])
            .iter()
            .all(|v| v.abs() < 1e-15));
        assert_eq!(project_ones_complement(&[1.0, -1.0]), vec![1.0, -1.0]);
        assert_eq!(project_ones_complement(&[2.0, 0.0]), vec![1.0, -1.0]);
    }

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let mut rng = SeededRng::new(5);
        let a = DenseMatrix::from_fn(7, 7, |_, _| rng.normal());
        let q = orthonormalize_columns(&a).unwrap();
        assert!(q.orthonormality_defect() < 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ones_complement_idempotent(x in proptest::collection::vec(-1e3f64..1e3, 1..30)) {
                let p = project_ones_complement(&x);
                let pp = project_ones_complement(&p);
                let scale = norm2(&x).max(1.0);
                prop_assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() <= 1e-12 * scale));
                prop_assert!(p.iter().sum::<f64>().abs() <= 1e-12 * scale * x.len() as f64);
            }

            #[test]
            fn khatri_rao_column_norms(seed in any::<u64>(), m in 1usize..5, p in 1usize..5, n in 1usize..4) {
                let mut rng = SeededRng::new(seed);
                let a = DenseMatrix::from_fn(m, n, |_, _| rng.normal());
                let b = DenseMatrix::from_fn(p, n, |_, _| rng.normal());
                let kr = khatri_rao_columns(&a, &b).unwrap();
                for k in 0..n {
                    let lhs = norm2(&kr.column(k));
                    let rhs = norm2(&a.column(k)) * norm2(&b.column(k));
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
                }
            }

            #[test]
            fn eigh_contract(seed in any::<u64>(), n in 1usize..12) {
                let s = random_symmetric(n, seed);
                let (vals, v) = eigh_symmetric(&s, 1e-12).unwrap();
                prop_assert!(v.orthonormality_defect() <= 1e-10);
                let rec = v.scale_cols(&vals).matmul_t(&v);
                prop_assert!(rec.sub(&s).frobenius_norm() <= 1e-8 * s.frobenius_norm());
            }
        }
    }
}
