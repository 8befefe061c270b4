//! Measurement matrices and their incoherence metrics.
//!
//! Two generators are provided: MIMO-radar steering dictionaries built from
//! random transmitter/receiver positions on a uniform angle grid, and i.i.d.
//! complex Gaussian matrices. Both are returned with unit-norm columns.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::combinatorics::{binomial, check_budget, Combinations};
use crate::error::{Error, Result};
use crate::numlin::{gather_columns, numerical_rank, ComplexMatrix, C64, DEFAULT_RANK_TOL};

/// Default cap on the number of subsets `spark_exceeds` may examine.
pub const DEFAULT_SUBSET_BUDGET: u64 = 1_000_000;

const UNIT_NORM_TOL: f64 = 1e-10;

/// Linear transmit and receive arrays.
///
/// Element positions are normalized to `[-0.5, 0.5]`; the physical position
/// of an element is `aperture * position / 2` wavelengths.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    tx: Vec<f64>,
    rx: Vec<f64>,
    aperture: f64,
}

impl ArrayGeometry {
    pub fn new(tx: Vec<f64>, rx: Vec<f64>, aperture: f64) -> Result<Self> {
        if tx.is_empty() || rx.is_empty() {
            return Err(Error::InvalidArgument(
                "geometry needs at least one transmitter and one receiver".into(),
            ));
        }
        if !(aperture > 0.0) || !aperture.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "aperture must be positive, got {aperture}"
            )));
        }
        if let Some(p) = tx.iter().chain(&rx).find(|p| !(-0.5..=0.5).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "element position {p} outside [-0.5, 0.5]"
            )));
        }
        Ok(ArrayGeometry { tx, rx, aperture })
    }

    pub fn tx_positions(&self) -> &[f64] {
        &self.tx
    }

    pub fn rx_positions(&self) -> &[f64] {
        &self.rx
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Number of virtual elements, `M * N`.
    pub fn measurements(&self) -> usize {
        self.tx.len() * self.rx.len()
    }
}

/// Where a dictionary came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    MimoRadar {
        geometry: ArrayGeometry,
        grid: Vec<f64>,
    },
    Gaussian {
        seed: u64,
    },
    UserSupplied,
}

#[derive(Clone, Debug)]
pub struct Dictionary {
    matrix: ComplexMatrix,
    provenance: Provenance,
    normalized: bool,
}

impl Dictionary {
    /// Wraps a matrix as-is; the normalized flag reflects its actual column norms.
    pub fn from_matrix(matrix: ComplexMatrix) -> Self {
        let normalized = has_unit_columns(matrix.as_matrix());
        Dictionary {
            matrix,
            provenance: Provenance::UserSupplied,
            normalized,
        }
    }

    /// Wraps a matrix after scaling every column to unit norm.
    pub fn normalized_from(matrix: ComplexMatrix) -> Result<Self> {
        Ok(Dictionary {
            matrix: normalize_columns(matrix.into_inner())?,
            provenance: Provenance::UserSupplied,
            normalized: true,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of atoms.
    pub fn atoms(&self) -> usize {
        self.matrix.cols()
    }

    pub fn atom(&self, g: usize) -> DVector<C64> {
        self.matrix.column(g)
    }

    pub(crate) fn raw(&self) -> &DMatrix<C64> {
        self.matrix.as_matrix()
    }
}

/// Uniform grid of `2/Z`-spaced points covering `[-1, 1]`, both endpoints included.
pub fn angle_grid(aperture: usize) -> Vec<f64> {
    (0..=aperture)
        .map(|g| -1.0 + 2.0 * g as f64 / aperture as f64)
        .collect()
}

/// Unnormalized virtual-array response `c(theta) ⊗ b(theta)`; its norm is `sqrt(M N)`.
pub fn steering_vector(geometry: &ArrayGeometry, theta: f64) -> DVector<C64> {
    let z = geometry.aperture;
    let n_rx = geometry.rx.len();
    DVector::from_fn(geometry.measurements(), |row, _| {
        let (i, j) = (row / n_rx, row % n_rx);
        let phase = 2.0 * PI * z * theta * (geometry.tx[i] + geometry.rx[j]);
        C64::from_polar(1.0, phase)
    })
}

/// Column-normalized MIMO-radar dictionary over the `Z + 1` point angle grid.
pub fn mimo_radar_dictionary(geometry: &ArrayGeometry) -> Result<Dictionary> {
    let z = geometry.aperture;
    if z.fract() != 0.0 || z < 1.0 {
        return Err(Error::NonIntegerAperture(z));
    }
    let grid = angle_grid(z as usize);
    let scale = 1.0 / (geometry.measurements() as f64).sqrt();
    let mut a = DMatrix::zeros(geometry.measurements(), grid.len());
    for (g, &phi) in grid.iter().enumerate() {
        a.set_column(g, &(steering_vector(geometry, phi) * C64::from(scale)));
    }
    Ok(Dictionary {
        matrix: ComplexMatrix::new(a)?,
        provenance: Provenance::MimoRadar {
            geometry: geometry.clone(),
            grid,
        },
        normalized: true,
    })
}

/// Element positions drawn i.i.d. uniform on `[-0.5, 0.5]`.
pub fn random_geometry(n_tx: usize, n_rx: usize, aperture: f64, seed: u64) -> Result<ArrayGeometry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_geometry_with(n_tx, n_rx, aperture, &mut rng)
}

pub(crate) fn random_geometry_with<R: Rng>(
    n_tx: usize,
    n_rx: usize,
    aperture: f64,
    rng: &mut R,
) -> Result<ArrayGeometry> {
    let tx = (0..n_tx).map(|_| rng.random_range(-0.5..=0.5)).collect();
    let rx = (0..n_rx).map(|_| rng.random_range(-0.5..=0.5)).collect();
    ArrayGeometry::new(tx, rx, aperture)
}

/// i.i.d. standard complex Gaussian entries (real and imaginary parts each
/// `N(0, 1/2)`), columns then scaled to unit norm.
pub fn gaussian_dictionary(m: usize, n: usize, seed: u64) -> Result<Dictionary> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "dictionary must be nonempty, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5_f64.sqrt()).expect("valid standard deviation");
    let a = DMatrix::from_fn(m, n, |_, _| {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        C64::new(re, im)
    });
    Ok(Dictionary {
        matrix: normalize_columns(a)?,
        provenance: Provenance::Gaussian { seed },
        normalized: true,
    })
}

/// Mutual coherence `max_{i != j} |a_i^H a_j|`.
pub fn coherence(dict: &Dictionary) -> f64 {
    AbsGram::new(dict).coherence()
}

/// Cumulative coherence (Babel function) `mu_1(K)`.
///
/// For each atom the `K` largest correlations with the other atoms are
/// summed; the result is the maximum over atoms.
pub fn babel(dict: &Dictionary, k: usize) -> Result<f64> {
    AbsGram::new(dict).babel(k)
}

/// True iff every set of `s` columns is linearly independent, i.e. `spark(A) > s`.
pub fn spark_exceeds(dict: &Dictionary, s: usize, budget: u64) -> Result<bool> {
    let n = dict.atoms();
    if s > n {
        return Err(Error::InvalidArgument(format!(
            "subset size {s} exceeds atom count {n}"
        )));
    }
    if s == 0 {
        return Ok(true);
    }
    if s > dict.rows() {
        return Ok(false);
    }
    check_budget(binomial(n, s), budget)?;
    for subset in Combinations::new(n, s) {
        let cols = gather_columns(dict.raw(), &subset);
        if numerical_rank(&cols, DEFAULT_RANK_TOL) < s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Element-wise absolute Gram matrix `|A^H A|`, computed once per dictionary.
#[derive(Clone, Debug)]
pub struct AbsGram {
    dim: usize,
    entries: Vec<f64>,
}

impl AbsGram {
    pub fn new(dict: &Dictionary) -> Self {
        Self::from_columns(dict.raw())
    }

    pub(crate) fn from_columns(a: &DMatrix<C64>) -> Self {
        let g = a.adjoint() * a;
        let dim = g.nrows();
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                // Average the two triangles so the stored matrix is exactly symmetric.
                entries[i * dim + j] = 0.5 * (g[(i, j)].norm() + g[(j, i)].norm());
            }
        }
        AbsGram { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coherence(&self) -> f64 {
        let mut mu = 0.0_f64;
        for i in 0..self.dim {
            for (j, &v) in self.row(i).iter().enumerate() {
                if i != j {
                    mu = mu.max(v);
                }
            }
        }
        mu
    }

    /// Babel function; `k = 0` yields 0 so that `mu_1(K - 1)` is defined for `K = 1`.
    pub fn babel(&self, k: usize) -> Result<f64> {
        if k >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "Babel order {k} must be below the atom count {}",
                self.dim
            )));
        }
        if k == 0 {
            return Ok(0.0);
        }
        let mut best = 0.0_f64;
        let mut scratch = Vec::with_capacity(self.dim);
        for g in 0..self.dim {
            scratch.clear();
            scratch.extend(
                self.row(g)
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != g)
                    .map(|(_, &v)| v),
            );
            scratch.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
            let mut top = scratch[..k].to_vec();
            top.sort_by(|a, b| b.total_cmp(a));
            best = best.max(top.iter().sum());
        }
        Ok(best)
    }
}

fn has_unit_columns(a: &DMatrix<C64>) -> bool {
    a.column_iter().all(|c| (c.norm() - 1.0).abs() <= UNIT_NORM_TOL)
}

fn normalize_columns(mut a: DMatrix<C64>) -> Result<ComplexMatrix> {
    for (j, mut col) in a.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm <= 0.0 {
            return Err(Error::InvalidArgument(format!("column {j} is zero")));
        }
        col.unscale_mut(norm);
    }
    ComplexMatrix::new(a)
}
