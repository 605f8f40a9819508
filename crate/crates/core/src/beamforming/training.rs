//! Training matrices and least-squares channel estimation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingKind {
    /// `A[l][n] = e^{-j 2 pi n l / L}`.
    Dft,
    /// One node per slot (time-multiplexed training).
    Identity,
    Custom,
}

/// `L x N` matrix whose column `n` is the weight sequence sent by node `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix {
    kind: TrainingKind,
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl TrainingMatrix {
    pub fn dft(length: usize, nodes: usize) -> Result<Self> {
        check_shape(length, nodes)?;
        let mut entries = Vec::with_capacity(length * nodes);
        for l in 0..length {
            for n in 0..nodes {
                // reduce the exponent first so large L*N keeps full precision
                let k = (n * l) % length;
                entries.push(Complex64::from_polar(1.0, -2.0 * PI * k as f64 / length as f64));
            }
        }
        Ok(TrainingMatrix {
            kind: TrainingKind::Dft,
            rows: length,
            cols: nodes,
            entries,
        })
    }

    pub fn identity(nodes: usize) -> Result<Self> {
        check_shape(nodes, nodes)?;
        let mut entries = vec![Complex64::new(0.0, 0.0); nodes * nodes];
        for n in 0..nodes {
            entries[n * nodes + n] = Complex64::new(1.0, 0.0);
        }
        Ok(TrainingMatrix {
            kind: TrainingKind::Identity,
            rows: nodes,
            cols: nodes,
            entries,
        })
    }

    /// Row-major `length x nodes` entries.
    pub fn custom(length: usize, nodes: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_shape(length, nodes)?;
        if entries.len() != length * nodes {
            return Err(Error::DimensionMismatch {
                expected: length * nodes,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("training", "entries must be finite"));
        }
        Ok(TrainingMatrix {
            kind: TrainingKind::Custom,
            rows: length,
            cols: nodes,
            entries,
        })
    }

    pub fn kind(&self) -> TrainingKind {
        self.kind
    }

    /// Training length `L`.
    pub fn length(&self) -> usize {
        self.rows
    }

    pub fn nodes(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, l: usize, n: usize) -> Complex64 {
        self.entries[l * self.cols + n]
    }

    /// Weights transmitted in slot `l`, one per node.
    pub fn row(&self, l: usize) -> &[Complex64] {
        &self.entries[l * self.cols..(l + 1) * self.cols]
    }

    /// Weight sequence of node `n`.
    pub fn column(&self, n: usize) -> Vec<Complex64> {
        (0..self.rows).map(|l| self.entry(l, n)).collect()
    }

    /// Gram matrix `A^H A`, row-major `N x N`.
    pub fn gram(&self) -> Vec<Complex64> {
        let n = self.cols;
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..self.rows {
            let row = self.row(l);
            for i in 0..n {
                let ai = row[i].conj();
                for j in 0..n {
                    g[i * n + j] += ai * row[j];
                }
            }
        }
        g
    }

    /// True when `A^H A` is diagonal to within `tol` relative to its diagonal.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = self.cols;
        let g = self.gram();
        let scale = (0..n).map(|i| g[i * n + i].norm()).fold(0.0, f64::max);
        (0..n).all(|i| (0..n).all(|j| i == j || g[i * n + j].norm() <= tol * scale))
    }

    pub(crate) fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

fn check_shape(length: usize, nodes: usize) -> Result<()> {
    if nodes == 0 {
        return Err(invalid("nodes", "at least one node is required"));
    }
    if length < nodes {
        return Err(Error::TrainingTooShort { length, nodes });
    }
    Ok(())
}

/// `h_hat = (A^H A)^{-1} A^H y`.
pub fn least_squares_estimate(y: &[Complex64], training: &TrainingMatrix) -> Result<Vec<Complex64>> {
    if y.len() != training.length() {
        return Err(Error::DimensionMismatch {
            expected: training.length(),
            actual: y.len(),
        });
    }
    let a = training.to_matrix();
    let ah = a.adjoint();
    let gram = &ah * &a;
    let rhs = &ah * DMatrix::from_column_slice(y.len(), 1, y);
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    // Cholesky succeeds on numerically singular Gram matrices; reject those too.
    let diag = chol.l_dirty().diagonal();
    let max = diag.iter().map(|d| d.re).fold(0.0, f64::max);
    let min = diag.iter().map(|d| d.re).fold(f64::INFINITY, f64::min);
    if min.is_nan() || min <= 1e-7 * max {
        return Err(Error::RankDeficient);
    }
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// Per-node correlation estimate `a_n^H y / (a_n^H a_n)`; equals the least
/// squares estimate when the training is orthogonal.
pub fn correlation_estimate(y: &[Complex64], training: &TrainingMatrix, node: usize) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut energy = 0.0;
    for (l, yl) in y.iter().enumerate() {
        let a = training.entry(l, node);
        num += a.conj() * yl;
        energy += a.norm_sqr();
    }
    num / energy
}
