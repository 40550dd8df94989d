//! Small dense helpers shared by the chain engines.
//!
//! Probability vectors are row vectors stored as plain `Vec<f64>`; matrices
//! are column-major `nalgebra::DMatrix<f64>`. All matrices in this crate are
//! small enough that dense arithmetic is the right tool.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Condition numbers above this trigger a log warning on factorization.
pub const CONDITION_WARNING: f64 = 1e12;

/// `out = v * m` for a row vector `v`.
pub fn vec_mat_into(v: &[f64], m: &Matrix, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(v.len(), n);
    debug_assert_eq!(out.len(), m.ncols());
    let data = m.as_slice();
    for (j, o) in out.iter_mut().enumerate() {
        let col = &data[j * n..(j + 1) * n];
        *o = dot(v, col);
    }
}

pub fn vec_mat(v: &[f64], m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.ncols()];
    vec_mat_into(v, m, &mut out);
    out
}

/// `m * c` for a column vector `c`.
pub fn mat_vec(m: &Matrix, c: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    let data = m.as_slice();
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        let col = &data[j * n..(j + 1) * n];
        for (o, &a) in out.iter_mut().zip(col) {
            *o += a * cj;
        }
    }
    out
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn row_sums(m: &Matrix) -> Vec<f64> {
    m.row_iter().map(|r| r.sum()).collect()
}

/// `m^k` by repeated multiplication. Exponents here stay in the hundreds, and
/// avoiding eigendecompositions keeps defective matrices exact.
pub fn mat_pow(m: &Matrix, k: u32) -> Matrix {
    let mut out = Matrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// `v * m^k` without forming the power.
pub fn vec_mat_pow(v: &[f64], m: &Matrix, k: u64) -> Vec<f64> {
    let mut cur = v.to_vec();
    let mut next = vec![0.0; v.len()];
    for _ in 0..k {
        vec_mat_into(&cur, m, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn one_norm(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral radius estimate from Gelfand's formula `||A^k||^(1/k)` with
/// `k = 2^m`, renormalizing after every squaring so long powers neither
/// underflow nor overflow. Handles periodic and nilpotent matrices, where
/// plain power iteration would not settle.
pub fn spectral_radius(m: &Matrix) -> f64 {
    const REL_TOL: f64 = 1e-10;
    const MAX_SQUARINGS: u32 = 200;

    if m.nrows() == 0 {
        return 0.0;
    }
    let mut x = m.clone();
    let mut log_scale = 0.0_f64;
    let mut exponent = 1.0_f64;
    // Nilpotent parts of an n x n matrix vanish once the power reaches n.
    let min_squarings = usize::BITS - m.nrows().leading_zeros() + 1;
    let mut prev = f64::NAN;
    for step in 0..MAX_SQUARINGS {
        let n = inf_norm(&x);
        if n == 0.0 {
            return 0.0;
        }
        x /= n;
        log_scale += n.ln();
        let est = (log_scale / exponent).exp();
        if step >= min_squarings && (est - prev).abs() <= REL_TOL * est {
            return est;
        }
        prev = est;
        x = &x * &x;
        log_scale *= 2.0;
        exponent *= 2.0;
    }
    prev
}

/// LU factorization of `I - A` with a condition check, used for every
/// fundamental-matrix product in the crate.
#[derive(Debug, Clone)]
pub struct Fundamental {
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
    condition: f64,
}

impl Fundamental {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.nrows();
        let m = Matrix::identity(n, n) - a;
        let lu = m.clone().lu();
        let inverse = lu
            .try_inverse()
            .ok_or_else(|| Error::Singular("I - A is not invertible".into()))?;
        let condition = one_norm(&m) * one_norm(&inverse);
        if !condition.is_finite() {
            return Err(Error::Singular("I - A is numerically singular".into()));
        }
        if condition > CONDITION_WARNING {
            log::warn!("fundamental matrix is ill-conditioned (cond ~ {condition:.3e})");
        }
        let lu_t = m.transpose().lu();
        Ok(Self {
            lu,
            lu_t,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `(I - A)^{-1} c` for a column vector `c`.
    pub fn solve_col(&self, c: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(c);
        self.lu
            .solve(&b)
            .expect("factorization checked nonsingular")
            .as_slice()
            .to_vec()
    }

    /// `v (I - A)^{-1}` for a row vector `v`.
    pub fn solve_row(&self, v: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(v);
        self.lu_t
            .solve(&b)
            .expect("factorization checked nonsingular")
            .as_slice()
            .to_vec()
    }

    /// `(I - A)^{-1} B` for a matrix `B`.
    pub fn solve_mat(&self, b: &Matrix) -> Matrix {
        self.lu.solve(b).expect("factorization checked nonsingular")
    }
}
