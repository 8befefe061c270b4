//! Dense complex linear algebra used by the pursuit and certificate code.
//!
//! Only three things are needed: an orthonormal basis for a column space,
//! orthogonal projection against a set of dictionary columns, and the
//! least-squares coefficients on a support. Projections are always applied
//! through a thin QR factor, never through an explicit `m x m` projector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Complex double precision scalar.
pub type C64 = Complex<f64>;

/// Default relative singular-value threshold used for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Absolute entry floor below which a matrix is treated as zero.
pub const ZERO_FLOOR: f64 = 1e-14;

/// Dense complex matrix with at least one row and column and only finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix must be nonempty, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(inner))
    }

    /// Builds a matrix from entries listed column by column.
    pub fn from_column_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "entry count",
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_vec(rows, cols, entries))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    /// `n x n` identity.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn column(&self, col: usize) -> DVector<C64> {
        self.0.column(col).into_owned()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.adjoint())
    }

    /// Sub-matrix formed by the listed columns, in the order given.
    pub fn select_columns(&self, indices: &[usize]) -> Result<ComplexMatrix> {
        check_indices(indices, self.cols())?;
        ComplexMatrix::new(gather_columns(&self.0, indices))
    }
}

/// Orthonormal basis `U` of a column space: `U^H U = I`.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    matrix: ComplexMatrix,
}

impl OrthonormalBasis {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Orthonormal basis of the column space of `m`.
///
/// The rank is the number of singular values above `rtol` times the largest
/// one; the basis is made of the matching left singular vectors.
pub fn orthonormal_basis(m: &ComplexMatrix, rtol: f64) -> Result<OrthonormalBasis> {
    if !(rtol > 0.0) {
        return Err(Error::InvalidArgument(format!("rtol must be positive, got {rtol}")));
    }
    let u = orth(m.as_matrix(), rtol)?;
    Ok(OrthonormalBasis {
        matrix: ComplexMatrix(u),
    })
}

/// `M - A_S (A_S^+ M)`, the component of `m` orthogonal to the columns of `a` listed in `support`.
pub fn project_out(a: &ComplexMatrix, support: &[usize], m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_rows(a.rows(), m.rows())?;
    if support.is_empty() {
        return Ok(m.clone());
    }
    check_indices(support, a.cols())?;
    let space = ColumnSpace::new(&gather_columns(a.as_matrix(), support), DEFAULT_RANK_TOL)
        .map_err(|e| relabel_rank_error(e, support))?;
    Ok(ComplexMatrix(space.project_out(m.as_matrix())))
}

/// Least-squares coefficients `A_S^+ Y` for a full-column-rank `a_s`.
pub fn least_squares(a_s: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_rows(a_s.rows(), y.rows())?;
    let space = ColumnSpace::new(a_s.as_matrix(), DEFAULT_RANK_TOL)?;
    Ok(ComplexMatrix(space.solve(y.as_matrix())))
}

/// Thin QR factor of a full-column-rank matrix.
#[derive(Clone, Debug)]
pub(crate) struct ColumnSpace {
    q: DMatrix<C64>,
    r: DMatrix<C64>,
}

impl ColumnSpace {
    pub(crate) fn new(a: &DMatrix<C64>, rtol: f64) -> Result<Self> {
        let k = a.ncols();
        if numerical_rank(a, rtol) < k {
            return Err(Error::RankDeficientSupport {
                support: (0..k).collect(),
            });
        }
        let qr = a.clone().qr();
        Ok(ColumnSpace {
            q: qr.q(),
            r: qr.r(),
        })
    }

    pub(crate) fn project_out(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let coeffs = self.q.adjoint() * m;
        m - &self.q * coeffs
    }

    pub(crate) fn solve(&self, y: &DMatrix<C64>) -> DMatrix<C64> {
        let qty = self.q.adjoint() * y;
        self.r
            .solve_upper_triangular(&qty)
            .expect("triangular factor of a full-rank matrix is invertible")
    }
}

/// Number of singular values above `rtol` times the largest.
pub(crate) fn numerical_rank(a: &DMatrix<C64>, rtol: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}

pub(crate) fn orth(m: &DMatrix<C64>, rtol: f64) -> Result<DMatrix<C64>> {
    if m.iter().all(|z| z.norm() < ZERO_FLOOR) {
        return Err(Error::ZeroMatrix);
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::NonFinite)?;
    let u = svd.U();
    let sv: Vec<f64> = (0..u.ncols()).map(|i| svd.S()[i].re).collect();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut order: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rtol * smax).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    Ok(DMatrix::from_fn(m.nrows(), order.len(), |i, j| {
        let z = u[(i, order[j])];
        C64::new(z.re, z.im)
    }))
}

/// Singular values, largest first. nalgebra's complex SVD is inaccurate on
/// some rank-deficient inputs, so every SVD goes through faer.
fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let mut sv: Vec<f64> = match to_faer(a).singular_values() {
        Ok(sv) => sv,
        Err(_) => return Vec::new(),
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

fn to_faer(a: &DMatrix<C64>) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

/// An `m x m` matrix `R` with `R R^H = Y Y^H`, used in place of a wide `Y`.
pub(crate) fn gram_root(y: &DMatrix<C64>) -> DMatrix<C64> {
    let r = y.adjoint().qr().r();
    r.adjoint()
}

pub(crate) fn gather_columns(a: &DMatrix<C64>, indices: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(a.nrows(), indices.len(), |i, j| a[(i, indices[j])])
}

pub(crate) fn check_indices(indices: &[usize], cols: usize) -> Result<()> {
    match indices.iter().find(|&&i| i >= cols) {
        Some(&bad) => Err(Error::InvalidArgument(format!(
            "column index {bad} out of range for {cols} columns"
        ))),
        None => Ok(()),
    }
}

fn check_rows(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what: "row count",
            expected,
            found,
        });
    }
    Ok(())
}

fn relabel_rank_error(err: Error, support: &[usize]) -> Error {
    match err {
        Error::RankDeficientSupport { .. } => Error::RankDeficientSupport {
            support: support.to_vec(),
        },
        other => other,
    }
}
