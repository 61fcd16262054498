//! Unit-norm frames, their Gram matrices and classical coherence measures.

mod construct;
mod io;

pub use construct::{
    harmonic_etf, nearest_utf, random_frame, repeated_onb, simplex_etf, NearestUtf,
};
pub use io::{FrameFile, FrameMeta};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column norms must be 1 within this tolerance for a frame to load at all.
pub const UNIT_NORM_TOL: f64 = 1e-8;

/// Default tolerance for the tight / equiangular classification predicates.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// An `m × n` matrix with unit-norm columns, `n >= m >= 1`.
///
/// Real frames are stored with exactly zero imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    field: Field,
    data: DMatrix<Complex64>,
}

impl Frame {
    pub fn new(field: Field, data: DMatrix<Complex64>) -> Result<Self> {
        let (m, n) = data.shape();
        if m == 0 || n < m {
            return Err(Error::InvalidDimensions { m, n });
        }
        if field == Field::Real {
            if let Some((idx, _)) = data.iter().enumerate().find(|(_, z)| z.im != 0.0) {
                return Err(Error::NotReal {
                    row: idx % m,
                    column: idx / m,
                });
            }
        }
        for (column, col) in data.column_iter().enumerate() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
                return Err(Error::NotUnitNorm { column, norm });
            }
        }
        Ok(Self { field, data })
    }

    /// Builds a real frame from row-major entries.
    pub fn from_real_rows(m: usize, n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != m * n {
            return Err(Error::DataLength {
                expected: m * n,
                found: entries.len(),
            });
        }
        let data = DMatrix::from_fn(m, n, |r, c| Complex64::new(entries[r * n + c], 0.0));
        Self::new(Field::Real, data)
    }

    /// Normalizes every column, then validates.
    pub(crate) fn from_unnormalized(field: Field, mut data: DMatrix<Complex64>) -> Result<Self> {
        for mut col in data.column_iter_mut() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidParameter(
                    "zero column cannot be normalized".into(),
                ));
            }
            col.iter_mut().for_each(|z| *z /= norm);
        }
        Self::new(field, data)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.data.nrows()
    }

    /// Number of frame vectors.
    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Aspect ratio `m / n`.
    pub fn gamma(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    /// `n/m - 1`, the Welch quantity `x`.
    pub fn redundancy_excess(&self) -> f64 {
        self.n() as f64 / self.m() as f64 - 1.0
    }

    /// `(n - m) / ((n - 1) m)`; zero when `n = 1`.
    pub fn welch_floor(&self) -> f64 {
        welch_floor(self.m(), self.n())
    }

    /// The `m × m` frame operator `F F'`.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        &self.data * self.data.adjoint()
    }
}

pub fn welch_floor(m: usize, n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    (n - m) as f64 / ((n - 1) as f64 * m as f64)
}

/// Hermitian `n × n` matrix of cross-correlations `c_ij = <f_i, f_j>`.
///
/// Only the upper triangle is computed; the lower triangle is its conjugate
/// mirror and the diagonal is exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    data: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn abs_sq(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)].norm_sqr()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn principal_submatrix(&self, indices: &[usize]) -> DMatrix<Complex64> {
        let k = indices.len();
        DMatrix::from_fn(k, k, |r, c| self.data[(indices[r], indices[c])])
    }
}

pub fn gram(frame: &Frame) -> GramMatrix {
    let n = frame.n();
    let f = frame.matrix();
    let mut data = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        data[(i, i)] = Complex64::new(1.0, 0.0);
        let fi = f.column(i);
        for j in (i + 1)..n {
            let c: Complex64 = fi
                .iter()
                .zip(f.column(j).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            data[(i, j)] = c;
            data[(j, i)] = c.conj();
        }
    }
    GramMatrix { data }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// Mean squared off-diagonal correlation.
    pub rms_sq: f64,
    /// Largest squared off-diagonal correlation.
    pub max_sq: f64,
    pub welch_floor: f64,
}

pub fn coherence(frame: &Frame) -> Result<CoherenceReport> {
    let n = frame.n();
    if n < 2 {
        return Err(Error::TooFewVectors { n, needed: 2 });
    }
    let g = gram(frame);
    let mut total = crate::numeric::CompensatedSum::new();
    let mut max_sq = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = g.abs_sq(i, j);
            total.add(2.0 * v);
            max_sq = max_sq.max(v);
        }
    }
    Ok(CoherenceReport {
        rms_sq: total.value() / (n * (n - 1)) as f64,
        max_sq,
        welch_floor: frame.welch_floor(),
    })
}

/// `‖F F' − (n/m) I‖_F / ((n/m) √m)`; zero exactly for a tight frame.
pub fn utf_residual(frame: &Frame) -> f64 {
    let m = frame.m();
    let scale = frame.n() as f64 / m as f64;
    let mut s = frame.frame_operator();
    for i in 0..m {
        s[(i, i)] -= Complex64::new(scale, 0.0);
    }
    s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (scale * (m as f64).sqrt())
}

/// Tight (uniform) frame test: `F F' = (n/m) I` up to `tol` relative Frobenius error.
pub fn is_utf(frame: &Frame, tol: f64) -> bool {
    utf_residual(frame) <= tol
}

/// Equiangular tight frame test.
///
/// At `n = m` the Welch floor is zero, so this reduces to "orthonormal basis".
pub fn is_etf(frame: &Frame, tol: f64) -> bool {
    if !is_utf(frame, tol) {
        return false;
    }
    let floor = frame.welch_floor();
    let g = gram(frame);
    let n = frame.n();
    (0..n).all(|i| ((i + 1)..n).all(|j| (g.abs_sq(i, j) - floor).abs() <= tol))
}

#[cfg(test)]
pub(crate) use tests::{identity_frame, mercedes_benz};
