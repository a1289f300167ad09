//! Dense complex linear algebra for small matrices.
//!
//! Everything in the simulator is at most a handful of antennas wide, so the
//! kernels here favour clarity over blocking or SIMD: LU inversion with
//! partial pivoting, power iteration for the dominant eigenpair, and a
//! one-sided Jacobi sweep for singular values.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative pivot threshold (against the largest entry magnitude) below which
/// LU declares the matrix singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;
/// Iteration cap for [`dominant_eigenpair`].
pub const POWER_ITERATION_CAP: usize = 10_000;
/// Power iteration stops once successive phase-aligned iterates differ by less than this.
pub const POWER_ITERATION_TOL: f64 = 1e-12;

/// Complex column vector.
#[derive(Clone, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![ZERO; dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn dot(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, c: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    /// Returns `self / ‖self‖`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows * cols");
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged rows");
                row.iter().map(|&v| C64::new(v, 0.0))
            })
            .collect();
        Self::from_row_major(r, c, data)
    }

    /// Stacks vectors as the columns of a matrix.
    pub fn from_columns(columns: &[CVector]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, CVector::dim);
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.dim(), rows, "columns must share a dimension");
            for i in 0..rows {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn mul_vec(&self, x: &CVector) -> CVector {
        assert_eq!(self.cols, x.dim(), "dimension mismatch in matrix-vector product");
        CVector(
            self.data
                .chunks_exact(self.cols.max(1))
                .take(self.rows)
                .map(|row| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn mul_mat(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.mul_mat(rhs)
    }
}

impl Mul<&CVector> for &CMatrix {
    type Output = CVector;
    fn mul(self, rhs: &CVector) -> CVector {
        self.mul_vec(rhs)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`, packed in place.
struct Lu {
    n: usize,
    packed: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Self> {
        assert!(a.is_square(), "LU requires a square matrix");
        let n = a.rows;
        let mut packed = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = PIVOT_THRESHOLD * a.max_abs();

        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, packed[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > threshold) {
                return Err(Error::SingularMatrix { column: k });
            }
            if p != k {
                for j in 0..n {
                    packed.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = packed[(k, k)];
            for i in k + 1..n {
                let factor = packed[(i, k)] / pivot;
                packed[(i, k)] = factor;
                for j in k + 1..n {
                    let t = packed[(k, j)];
                    packed[(i, j)] -= factor * t;
                }
            }
        }
        Ok(Self { n, packed, perm })
    }

    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.packed[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.packed[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.packed[(i, i)];
        }
        x
    }
}

/// Inverts a square matrix by LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when no pivot exceeds
/// `PIVOT_THRESHOLD · max|aᵢⱼ|`.
pub fn invert(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::LengthMismatch { expected: a.rows, found: a.cols });
    }
    let n = a.rows;
    let lu = Lu::factor(a)?;
    let mut inv = CMatrix::zeros(n, n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = ZERO);
        e[j] = ONE;
        for (i, v) in lu.solve(&e).into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

/// Solves `A x = b` for square `A`.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if !a.is_square() || a.rows != b.dim() {
        return Err(Error::LengthMismatch { expected: a.rows, found: b.dim() });
    }
    Ok(CVector(Lu::factor(a)?.solve(b.as_slice())))
}

/// Eigenvalue of largest modulus and a unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: C64,
    pub vector: CVector,
}

/// Dominant eigenpair by power iteration from the all-ones vector.
///
/// Each new iterate is rotated onto the phase of the previous one so that a
/// complex dominant eigenvalue does not look like non-convergence. The
/// eigenvalue is the Rayleigh quotient of the final iterate, and the returned
/// vector has its largest-modulus entry real and positive.
pub fn dominant_eigenpair(a: &CMatrix) -> Result<Eigenpair> {
    if !a.is_square() {
        return Err(Error::LengthMismatch { expected: a.rows, found: a.cols });
    }
    let n = a.rows;
    let start = 1.0 / (n as f64).sqrt();
    let mut x = CVector(vec![C64::new(start, 0.0); n]);

    for _ in 0..POWER_ITERATION_CAP {
        let y = a.mul_vec(&x);
        let Some(mut next) = y.normalized() else {
            // A·x = 0: the start vector sits in the null space.
            return Err(Error::NoConvergence { iterations: 0 });
        };
        let overlap = x.dot(&next);
        if overlap.norm() > 0.0 {
            next = next.scale(overlap.conj() / overlap.norm());
        }
        let delta = (&next - &x).norm();
        x = next;
        if delta < POWER_ITERATION_TOL {
            let lambda = x.dot(&a.mul_vec(&x));
            return Ok(Eigenpair { lambda, vector: canonical_phase(&x) });
        }
    }
    Err(Error::NoConvergence { iterations: POWER_ITERATION_CAP })
}

/// Rotates `v` so that its largest-modulus entry is real and positive.
pub fn canonical_phase(v: &CVector) -> CVector {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if pivot.norm() == 0.0 {
        return v.clone();
    }
    v.scale(pivot.conj() / pivot.norm())
}

/// All singular values, descending, by one-sided (Hestenes) Jacobi.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    // Work on whichever orientation has no more columns than rows.
    let work = if a.cols > a.rows { a.adjoint() } else { a.clone() };
    let (m, n) = (work.rows, work.cols);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| work.column(j).into_inner()).collect();

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate column q onto a real inner product, then apply a real Jacobi rotation.
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let xp = cols[p][i];
                    let xq = cols[q][i] * phase;
                    cols[p][i] = xp * c - xq * s;
                    cols[q][i] = xp * s + xq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Smallest singular value; zero for an empty matrix.
pub fn min_singular(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn invert_identity_and_diagonal() {
        let i3 = CMatrix::identity(3);
        assert_eq!(invert(&i3).unwrap(), i3);

        let d = CMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let inv = invert(&d).unwrap();
        assert!((inv[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((inv[(1, 1)] - c(0.25, 0.0)).norm() < 1e-15);
        assert_eq!(inv[(0, 1)], ZERO);
    }

    #[test]
    fn invert_rejects_singular() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(invert(&a), Err(Error::SingularMatrix { .. })));
        assert!(matches!(invert(&CMatrix::zeros(2, 2)), Err(Error::SingularMatrix { column: 0 })));
    }

    #[test]
    fn invert_needs_pivoting() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(invert(&a).unwrap(), a);
    }

    #[test]
    fn solve_matches_inverse() {
        let a = CMatrix::from_row_major(2, 2, vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let b = CVector::new(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let x = solve(&a, &b).unwrap();
        let r = &a.mul_vec(&x) - &b;
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn eigen_diagonal_dominant() {
        let a = CMatrix::diag(&[c(3.0, 0.0), c(1.0, 0.0)]);
        let e = dominant_eigenpair(&a).unwrap();
        assert!((e.lambda - c(3.0, 0.0)).norm() < 1e-12);
        assert!((e.vector[0] - ONE).norm() < 1e-12);
        assert!(e.vector[1].norm() < 1e-12);
    }

    #[test]
    fn eigen_identity_is_immediate() {
        let e = dominant_eigenpair(&CMatrix::identity(3)).unwrap();
        assert!((e.lambda - ONE).norm() < 1e-15);
        assert!((e.vector.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_complex_dominant_value() {
        // Rotation-scaled block: eigenvalues 2i·(1±...) handled through phase alignment.
        let a = CMatrix::diag(&[c(0.0, 2.0), c(1.0, 0.0)]);
        let e = dominant_eigenpair(&a).unwrap();
        assert!((e.lambda - c(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn eigen_equal_modulus_fails() {
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(dominant_eigenpair(&a), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn singular_values_basic() {
        assert!((min_singular(&CMatrix::identity(3)) - 1.0).abs() < 1e-15);
        let repeated = CMatrix::from_row_major(
            3,
            3,
            vec![c(1.0, 1.0), c(1.0, 1.0), c(0.3, 0.0), c(2.0, -1.0), c(2.0, -1.0), c(0.0, 1.0), c(0.5, 0.0), c(0.5, 0.0), c(4.0, 0.0)],
        );
        assert!(min_singular(&repeated) < 1e-12 * repeated.frobenius_norm());
        let d = CMatrix::diag(&[c(0.0, 3.0), c(-0.5, 0.0)]);
        let sv = singular_values(&d);
        assert!((sv[0] - 3.0).abs() < 1e-15 && (sv[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_values_rectangular() {
        let tall = CMatrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 4.0], &[0.0, 0.0]]);
        assert_eq!(singular_values(&tall), vec![4.0, 3.0]);
        let wide = tall.adjoint();
        assert_eq!(singular_values(&wide), vec![4.0, 3.0]);
    }

    #[test]
    #[should_panic(expected = "entry count")]
    fn from_row_major_checks_shape() {
        let _ = CMatrix::from_row_major(2, 2, vec![ONE; 3]);
    }
}
