//! Seeded Monte Carlo experiments: synthetic scenes, baseline estimators,
//! condition-probability and recovery-error sweeps, and their CSV reports.
//!
//! Every random draw of a trial comes from one generator seeded by
//! [`trial_seed`], so a trial depends only on the master seed and its
//! position in the sweep.

mod config;
mod sweep;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numlin::{orth, ComplexMatrix, C64, DEFAULT_RANK_TOL};
use crate::observation::{GroundTruth, ObservationSet};
use crate::pursuit::rank_candidates;

pub use config::{DictionaryKind, ExperimentConfig, ExperimentKind, Grid};
pub use sweep::{
    run_condition_sweep, run_experiment, run_recovery_sweep, ConditionRow, Method, RecoveryRow,
    CONDITION_HEADER, RECOVERY_HEADER,
};

/// Planted support with unit-modulus gains.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetScene {
    /// Sorted support indices.
    pub support: Vec<usize>,
    /// `K x l` gains `exp(-j phi)`, rows following `support`.
    pub gains: ComplexMatrix,
}

impl TargetScene {
    pub fn snapshots(&self) -> usize {
        self.gains.cols()
    }

    /// Noiseless observations `A_S X`.
    pub fn observe(&self, dict: &Dictionary) -> Result<ComplexMatrix> {
        let a_s = dict.matrix().select_columns(&self.support)?;
        ComplexMatrix::new(a_s.as_matrix() * self.gains.as_matrix())
    }
}

/// Support drawn uniformly without replacement from `0..n`, phases i.i.d. uniform.
pub fn generate_scene(n: usize, k: usize, l: usize, seed: u64) -> Result<TargetScene> {
    generate_scene_with(n, k, l, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn generate_scene_with<R: Rng>(
    n: usize,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<TargetScene> {
    if k == 0 || k > n || l == 0 {
        return Err(Error::InvalidArgument(format!(
            "scene needs 1 <= K <= n and l >= 1, got K = {k}, n = {n}, l = {l}"
        )));
    }
    let mut support = rand::seq::index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let gains = DMatrix::from_fn(k, l, |_, _| {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        C64::from_polar(1.0, -phi)
    });
    Ok(TargetScene {
        support,
        gains: ComplexMatrix::new(gains)?,
    })
}

/// Noise variance for a given SNR in dB with unit-modulus gains.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// `Y0 + E` with `E` i.i.d. circular complex Gaussian of variance `10^(-snr_db/10)`.
pub fn add_noise(y0: &ComplexMatrix, snr_db: f64, seed: u64) -> Result<ObservationSet> {
    add_noise_with(y0, snr_db, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn add_noise_with<R: Rng>(
    y0: &ComplexMatrix,
    snr_db: f64,
    rng: &mut R,
) -> Result<ObservationSet> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!("invalid SNR {snr_db}")));
    }
    let var = noise_variance(snr_db);
    if var == 0.0 {
        return Ok(ObservationSet::new(y0.clone()));
    }
    let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("valid standard deviation");
    let y = y0.as_matrix().map(|z| z + C64::new(normal.sample(rng), normal.sample(rng)));
    Ok(ObservationSet::new(ComplexMatrix::new(y)?))
}

/// Attaches the scene as ground truth to a noisy observation.
pub(crate) fn with_truth(obs: ObservationSet, scene: &TargetScene) -> Result<ObservationSet> {
    ObservationSet::with_truth(
        obs.matrix().clone(),
        GroundTruth {
            support: scene.support.clone(),
            signal: scene.gains.clone(),
        },
    )
}

/// Discrete MUSIC: the `K` atoms with the largest `||a_g^H U||`, `U = orth(Y)`.
pub fn music_discrete(obs: &ObservationSet, dict: &Dictionary, k: usize) -> Result<Vec<usize>> {
    if obs.snapshots() < 2 {
        return Err(Error::InvalidArgument(
            "MUSIC needs at least two snapshots".into(),
        ));
    }
    let u = orth(obs.matrix().as_matrix(), DEFAULT_RANK_TOL)?;
    let scores = crate::pursuit::column_norms(&(u.adjoint() * dict.matrix().as_matrix()));
    top_k(&scores, k)
}

/// Beamforming: the `K` atoms with the largest `|a_g^H y|`.
pub fn beamform_smv(obs: &ObservationSet, dict: &Dictionary, k: usize) -> Result<Vec<usize>> {
    if obs.snapshots() != 1 {
        return Err(Error::InvalidArgument(
            "beamforming takes a single snapshot".into(),
        ));
    }
    let scores = crate::pursuit::column_norms(
        &(obs.matrix().as_matrix().adjoint() * dict.matrix().as_matrix()),
    );
    top_k(&scores, k)
}

fn top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    let mut picks: Vec<usize> = rank_candidates(scores.iter().copied().enumerate(), k)?
        .into_iter()
        .map(|(g, _)| g)
        .collect();
    picks.sort_unstable();
    Ok(picks)
}

/// True iff the estimated support differs from the truth as a set.
pub fn support_error(estimated: &[usize], truth: &[usize]) -> Result<bool> {
    if estimated.len() != truth.len() {
        return Err(Error::CardinalityMismatch {
            estimated: estimated.len(),
            truth: truth.len(),
        });
    }
    let mut a = estimated.to_vec();
    let mut b = truth.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    Ok(a != b)
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Wilson score interval at 95% confidence for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests;
