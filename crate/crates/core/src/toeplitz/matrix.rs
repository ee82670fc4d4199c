//! Dense complex matrices with the handful of factorizations the crate needs:
//! LU with partial pivoting (log-determinants, solves, inverses) and cyclic
//! Jacobi for Hermitian eigenproblems.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pivots with modulus below this are treated as exact zeros.
pub const SINGULAR_PIVOT: f64 = 1e-300;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Real matrix from nested rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    /// `[[a, b], [c, d]]`.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let (r0, c0) = (a.rows, a.cols);
        Self::from_fn(a.rows + c.rows, a.cols + b.cols, |i, j| match (i < r0, j < c0) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - c0)],
            (false, true) => c[(i - r0, j)],
            (false, false) => d[(i - r0, j - c0)],
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[i])
    }

    /// `self + diag(d)`.
    pub fn add_real_diagonal(&self, d: &[f64]) -> Self {
        assert!(self.is_square() && d.len() == self.rows);
        let mut m = self.clone();
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] += v;
        }
        m
    }

    /// Principal submatrix on the given (ordered) indices.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Squared Frobenius (Hilbert–Schmidt) norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M*|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Matrix determinant in log form.
    pub fn log_det(&self) -> Result<LogDet> {
        Ok(Lu::new(self)?.log_det())
    }

    pub fn inverse(&self) -> Result<Self> {
        Lu::new(self)?.inverse()
    }

    /// Comma-separated `re+imi` dump, one row per line.
    #[cfg(feature = "csv-debug")]
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:e}{:+e}i", z.re, z.im))
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Determinant as `exp(log_abs) · phase` with `|phase| = 1`. A singular
/// matrix has `log_abs = -inf` and `phase = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub const SINGULAR: LogDet = LogDet {
        log_abs: f64::NEG_INFINITY,
        phase: ZERO,
    };

    pub fn is_singular(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> Complex64 {
        if self.is_singular() {
            ZERO
        } else {
            self.phase * self.log_abs.exp()
        }
    }
}

/// `P A = L U` with unit lower `L`, stored compactly.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn new(m: &ComplexMatrix) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax < SINGULAR_PIVOT {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Lu {
            lu,
            perm,
            swaps,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn log_det(&self) -> LogDet {
        if self.singular {
            return LogDet::SINGULAR;
        }
        let mut log_abs = 0.0;
        let mut phase = if self.swaps % 2 == 0 { ONE } else { -ONE };
        for i in 0..self.lu.rows {
            let d = self.lu[(i, i)];
            let r = d.norm();
            log_abs += r.ln();
            phase *= d / r;
        }
        // Renormalize the accumulated phase against drift.
        phase /= phase.norm();
        LogDet { log_abs, phase }
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.singular {
            return Err(Error::Singular("cannot solve with a singular LU factor".into()));
        }
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut x = ComplexMatrix::from_fn(n, b.cols, |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.lu.rows))
    }
}

/// Eigen-decomposition `A = V diag(λ) V*` of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Cyclic Jacobi; the input is symmetrized as `(A + A*)/2` first.
    pub fn new(a: &ComplexMatrix) -> Result<HermitianEigen> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("eigensolver needs a square matrix".into()));
        }
        let n = a.rows;
        let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
        let mut v = ComplexMatrix::identity(n);
        let scale = m.frobenius_sq().sqrt();
        if n > 1 && scale > 0.0 {
            for _sweep in 0..100 {
                let off: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| m[(i, j)].norm_sqr())
                    .sum();
                if off.sqrt() <= 1e-15 * scale {
                    break;
                }
                for p in 0..n - 1 {
                    for q in (p + 1)..n {
                        rotate(&mut m, &mut v, p, q);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }

    /// `V diag(f(λ)) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * fl[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// One Jacobi rotation zeroing `m[p][q]`; accumulates the unitary into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = m.rows;
    let u = apq / b;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // Unitary block acting on (p, q): [[c, s], [-s ū, c ū]].
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = -u.conj() * s;
    let uqq = u.conj() * c;
    for k in 0..n {
        let (kp, kq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = kp * upp + kq * uqp;
        m[(k, q)] = kp * upq + kq * uqq;
    }
    for k in 0..n {
        let (pk, qk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = upp.conj() * pk + uqp.conj() * qk;
        m[(q, k)] = upq.conj() * pk + uqq.conj() * qk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let (kp, kq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = kp * upp + kq * uqp;
        v[(k, q)] = kp * upq + kq * uqq;
    }
}

/// Trace norm `Σ σ_i`, with singular values from the Hermitian eigenvalues of `M* M`.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let gram = m.adjoint().matmul(m);
    let eig = HermitianEigen::new(&gram)?;
    Ok(eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}
