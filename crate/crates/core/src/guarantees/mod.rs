//! Recovery certificates for the multi-branch pursuit.
//!
//! Every condition is reported as `lhs < threshold`, strictly, with no slack.
//! The coherence-type conditions depend only on the dictionary; the
//! energy-ratio and exact-recovery conditions also need the true support.

mod design;
mod mip;
mod scan;

use std::fmt;

use nalgebra::DMatrix;

use crate::dictionary::{AbsGram, Dictionary};
use crate::error::{Error, Result};
use crate::numlin::{check_indices, gather_columns, orth, project_out, ColumnSpace, C64};
use crate::observation::ObservationSet;
use crate::pursuit::{
    column_norms, d_max, refined_dictionary, remaining_support, PursuitConfig,
};

pub use design::{design_branch_vector, DesignMethod, DesignStrategy};
pub use mip::{smallest_d_mip, DEFAULT_NODE_BUDGET};
pub use scan::{mb_coherence, mb_coherence_profile, smallest_d_bruteforce, RefinedGram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    Coherence,
    CumulativeCoherence,
    NeumanErc,
    MbErc,
    MbCoherence,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::Coherence => "coherence",
            CertificateKind::CumulativeCoherence => "cumulative-coherence",
            CertificateKind::NeumanErc => "neuman-erc",
            CertificateKind::MbErc => "mb-erc",
            CertificateKind::MbCoherence => "mb-coherence",
        })
    }
}

/// Parameters a certificate was evaluated at.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateContext {
    /// Provisional support `C`.
    pub provisional: Vec<usize>,
    /// Branch count (1 for single-branch conditions).
    pub d: usize,
    /// Sparsity `K`.
    pub k: usize,
    /// Energy ratio, or the noise-to-signal ratio for the Neuman condition.
    pub oir: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub lhs: f64,
    pub threshold: f64,
    pub holds: bool,
    pub context: CertificateContext,
}

impl CertificateReport {
    fn new(kind: CertificateKind, lhs: f64, threshold: f64, context: CertificateContext) -> Self {
        CertificateReport {
            kind,
            lhs,
            threshold,
            holds: lhs < threshold,
            context,
        }
    }

    /// `kind;lhs;threshold;holds`
    pub fn csv_row(&self) -> String {
        format!("{};{};{};{}", self.kind, self.lhs, self.threshold, self.holds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OirMode {
    /// Computed from the known true support.
    Oracle,
    /// Supplied by the caller as an estimate.
    Assumed,
}

/// Out-of-support to in-support energy ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OirValue {
    pub value: f64,
    pub mode: OirMode,
}

impl OirValue {
    pub fn assumed(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "energy ratio must be finite and nonnegative, got {value}"
            )));
        }
        Ok(OirValue {
            value,
            mode: OirMode::Assumed,
        })
    }

    /// The noiseless value 0.
    pub fn zero() -> Self {
        OirValue {
            value: 0.0,
            mode: OirMode::Assumed,
        }
    }

    pub(crate) fn checked(&self) -> Result<f64> {
        if self.value >= 1.0 {
            return Err(Error::OirTooLarge(self.value));
        }
        Ok(self.value)
    }
}

/// Energy ratio at a node with provisional support `c ⊂ s_star`.
///
/// Scores use refined atoms against `U` (the residual itself for a single
/// snapshot, an orthonormal basis of it otherwise). Out-of-support atoms are
/// first projected off the span of the refined in-support atoms, so the ratio
/// is zero for noiseless data at every correct node.
pub fn oir(
    dict: &Dictionary,
    obs: &ObservationSet,
    s_star: &[usize],
    c: &[usize],
    cfg: &PursuitConfig,
) -> Result<OirValue> {
    let rest = remaining_support(s_star, c, dict.atoms())?;
    if obs.rows() != dict.rows() {
        return Err(Error::DimensionMismatch {
            what: "observation rows",
            expected: dict.rows(),
            found: obs.rows(),
        });
    }
    let residual = project_out(dict.matrix(), c, obs.matrix())?.into_inner();
    let u = if residual.ncols() > 1 {
        orth(&residual, cfg.rank_tolerance).map_err(|e| match e {
            Error::ZeroMatrix => Error::DegenerateDenominator,
            other => other,
        })?
    } else {
        residual
    };
    let (refined, _) = refined_dictionary(dict, c, cfg.zero_atom_floor)?;
    let in_scores = column_norms(&(u.adjoint() * &refined));
    let denom = rest.iter().map(|&g| in_scores[g]).fold(0.0_f64, f64::max);
    if denom <= 1e-14 {
        return Err(Error::DegenerateDenominator);
    }
    let space = ColumnSpace::new(&gather_columns(&refined, &rest), cfg.rank_tolerance).map_err(
        |_| Error::RankDeficientSupport {
            support: rest.clone(),
        },
    )?;
    let outside = outside_indices(dict.atoms(), s_star, c);
    let out_atoms = space.project_out(&gather_columns(&refined, &outside));
    let numer = column_norms(&(u.adjoint() * out_atoms))
        .into_iter()
        .fold(0.0_f64, f64::max);
    Ok(OirValue {
        value: numer / denom,
        mode: OirMode::Oracle,
    })
}

/// Multi-branch exact recovery condition at node `c ⊂ s_star` with `d` branches:
/// the `d`-th largest `||(A_S)^+ a_g||_1` over refined atoms outside `S ∪ C`,
/// against `1 - oir`. With `c` empty, `d = 1` and `oir = 0` this is the
/// classical exact recovery condition.
pub fn mb_erc(
    dict: &Dictionary,
    s_star: &[usize],
    c: &[usize],
    d: usize,
    oir: &OirValue,
) -> Result<CertificateReport> {
    let ratio = oir.checked()?;
    let rest = remaining_support(s_star, c, dict.atoms())?;
    let (refined, _) = refined_dictionary(dict, c, PursuitConfig::default().zero_atom_floor)?;
    let space = ColumnSpace::new(&gather_columns(&refined, &rest), crate::numlin::DEFAULT_RANK_TOL)
        .map_err(|_| Error::RankDeficientSupport {
            support: rest.clone(),
        })?;
    let coeffs: DMatrix<C64> = space.solve(&refined);
    let l1: Vec<f64> = coeffs
        .column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum())
        .collect();
    let mut excluded: Vec<usize> = rest.clone();
    excluded.extend_from_slice(c);
    let (_, lhs) = d_max(&l1, &excluded, d)?;
    Ok(CertificateReport::new(
        CertificateKind::MbErc,
        lhs,
        1.0 - ratio,
        CertificateContext {
            provisional: c.to_vec(),
            d,
            k: s_star.len(),
            oir: ratio,
        },
    ))
}

/// `mu(A) < 1 / (2K - 1)`.
pub fn coherence_condition(dict: &Dictionary, k: usize) -> Result<CertificateReport> {
    check_sparsity(dict, k)?;
    let mu = AbsGram::new(dict).coherence();
    Ok(CertificateReport::new(
        CertificateKind::Coherence,
        mu,
        1.0 / (2 * k - 1) as f64,
        single_branch(k, 0.0),
    ))
}

/// `mu_1(K - 1) + mu_1(K) < 1` with the Babel function `mu_1`.
pub fn cumulative_coherence_condition(dict: &Dictionary, k: usize) -> Result<CertificateReport> {
    check_sparsity(dict, k)?;
    let gram = AbsGram::new(dict);
    let lhs = gram.babel(k - 1)? + gram.babel(k)?;
    Ok(CertificateReport::new(
        CertificateKind::CumulativeCoherence,
        lhs,
        1.0,
        single_branch(k, 0.0),
    ))
}

/// Weak exact recovery condition
/// `max_S (max_{g in S} ||A_S^H a_g||_1 + max_{g not in S} ||A_S^H a_g||_1) < 2 (1 - nsr)`,
/// scanned over every support of size `K`.
pub fn neuman_erc(dict: &Dictionary, k: usize, nsr: f64, budget: u64) -> Result<CertificateReport> {
    check_sparsity(dict, k)?;
    if !(nsr >= 0.0) || !nsr.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise-to-signal ratio must be nonnegative, got {nsr}"
        )));
    }
    let gram = RefinedGram::new(dict, &[])?;
    let lhs = gram.profile(k, 0.0, 1, budget)?[0];
    Ok(CertificateReport::new(
        CertificateKind::NeumanErc,
        lhs,
        2.0 * (1.0 - nsr),
        single_branch(k, nsr),
    ))
}

fn single_branch(k: usize, oir: f64) -> CertificateContext {
    CertificateContext {
        provisional: Vec::new(),
        d: 1,
        k,
        oir,
    }
}

fn check_sparsity(dict: &Dictionary, k: usize) -> Result<()> {
    if k == 0 || k >= dict.atoms() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} must lie in 1..{}",
            dict.atoms()
        )));
    }
    Ok(())
}

fn outside_indices(n: usize, s_star: &[usize], c: &[usize]) -> Vec<usize> {
    (0..n)
        .filter(|g| !s_star.contains(g) && !c.contains(g))
        .collect()
}

pub(crate) fn check_provisional(c: &[usize], n: usize) -> Result<()> {
    check_indices(c, n)?;
    let mut sorted = c.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != c.len() {
        return Err(Error::InvalidArgument(format!(
            "provisional support {c:?} repeats an index"
        )));
    }
    Ok(())
}
