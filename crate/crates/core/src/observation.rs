use crate::error::{Error, Result};
use crate::numlin::ComplexMatrix;

/// Known signal behind a synthetic observation.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// Sorted row indices of the nonzero rows of `X`.
    pub support: Vec<usize>,
    /// Nonzero rows of `X`, one per support index (`K x l`).
    pub signal: ComplexMatrix,
}

/// Snapshot matrix `Y` (`m x l`), optionally with the truth that generated it.
#[derive(Clone, Debug)]
pub struct ObservationSet {
    y: ComplexMatrix,
    truth: Option<GroundTruth>,
}

impl ObservationSet {
    pub fn new(y: ComplexMatrix) -> Self {
        ObservationSet { y, truth: None }
    }

    pub fn with_truth(y: ComplexMatrix, truth: GroundTruth) -> Result<Self> {
        if truth.signal.rows() != truth.support.len() {
            return Err(Error::DimensionMismatch {
                what: "ground-truth rows",
                expected: truth.support.len(),
                found: truth.signal.rows(),
            });
        }
        if truth.signal.cols() != y.cols() {
            return Err(Error::DimensionMismatch {
                what: "ground-truth snapshots",
                expected: y.cols(),
                found: truth.signal.cols(),
            });
        }
        Ok(ObservationSet {
            y,
            truth: Some(truth),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn rows(&self) -> usize {
        self.y.rows()
    }

    /// Number of snapshots `l`.
    pub fn snapshots(&self) -> usize {
        self.y.cols()
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }
}

impl From<ComplexMatrix> for ObservationSet {
    fn from(y: ComplexMatrix) -> Self {
        ObservationSet::new(y)
    }
}
