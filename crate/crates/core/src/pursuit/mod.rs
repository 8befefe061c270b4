//! Multi-branch matching pursuit and the greedy pursuits it contains.
//!
//! [`mbmp`] grows a tree of provisional supports. Each node at level `i`
//! scores the atoms it may still use and spawns `d_i` children, one per
//! top-ranked atom. With a branch vector of all ones the tree is a chain
//! and the search is exactly the classical greedy pursuit picked by the two
//! refinement flags in [`PursuitConfig`]:
//!
//! | dictionary refinement | subspace refinement | pursuit |
//! |---|---|---|
//! | on | on | RA-ORMP (ORMP when `l = 1`) |
//! | off | on | RA-OMP |
//! | on | off | ORMP-style selection on the raw residual |
//! | off | off | SOMP (OMP when `l = 1`) |
//!
//! Indices are 0-based throughout. Ties between equal scores always go to
//! the smaller atom index.

mod tree;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::combinatorics::{binomial, check_budget, Combinations};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numlin::{
    gather_columns, least_squares, project_out, ColumnSpace, ComplexMatrix, C64, DEFAULT_RANK_TOL,
};
use crate::observation::ObservationSet;

pub use tree::{expand_node, mbmp, mbmp_traced, Leaf};

/// Default cap on the number of supports [`exhaustive_l0`] may evaluate.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

/// Per-level branch counts `[d_1, ..., d_K]`.
///
/// The last entry is always 1: a second child at the final level can never
/// beat the first one, so any other value is replaced on construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BranchVector(Vec<usize>);

impl BranchVector {
    pub fn new(mut widths: Vec<usize>) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::InvalidArgument("branch vector must be nonempty".into()));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "branch counts must be positive, got {widths:?}"
            )));
        }
        *widths.last_mut().expect("nonempty") = 1;
        Ok(BranchVector(widths))
    }

    /// `[1, ..., 1]` of length `k`: the single-path greedy pursuit.
    pub fn chain(k: usize) -> Result<Self> {
        Self::new(vec![1; k])
    }

    /// `[d, ..., d, 1]` of length `k`.
    pub fn uniform(d: usize, k: usize) -> Result<Self> {
        Self::new(vec![d; k])
    }

    pub fn widths(&self) -> &[usize] {
        &self.0
    }

    /// Sparsity level `K`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of leaves, `prod_j d_j`.
    pub fn leaves(&self) -> usize {
        self.0.iter().product()
    }
}

impl fmt::Display for BranchVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for BranchVector {
    type Err = Error;

    /// Parses `2,2,2,2,1`, optionally wrapped in brackets.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let widths = body
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad branch vector `{s}`: {e}")))?;
        Self::new(widths)
    }
}

/// Selection rule used at every tree node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PursuitConfig {
    /// Score atoms after projecting out the provisional support and renormalizing.
    pub dictionary_refinement: bool,
    /// Score against an orthonormal basis of the residual (only when `l > 1`).
    pub subspace_refinement: bool,
    pub rank_tolerance: f64,
    /// Projected atoms with norm at or below this are treated as zero.
    pub zero_atom_floor: f64,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        PursuitConfig {
            dictionary_refinement: true,
            subspace_refinement: true,
            rank_tolerance: DEFAULT_RANK_TOL,
            zero_atom_floor: 1e-10,
        }
    }
}

impl PursuitConfig {
    pub fn with_refinements(dictionary_refinement: bool, subspace_refinement: bool) -> Self {
        PursuitConfig {
            dictionary_refinement,
            subspace_refinement,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rank_tolerance > 0.0) || !(self.zero_atom_floor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive, got rank {} and floor {}",
                self.rank_tolerance, self.zero_atom_floor
            )));
        }
        Ok(())
    }
}

/// One node of the search tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeState {
    /// Tree level, 1 at the root.
    pub level: usize,
    /// Provisional support in selection order; `support.len() == level - 1`.
    pub support: Vec<usize>,
    /// Atoms this node and its descendants may not select. Contains `support`.
    pub excluded: Vec<usize>,
}

impl NodeState {
    pub fn root() -> Self {
        NodeState {
            level: 1,
            support: Vec::new(),
            excluded: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// Sorted support estimate.
    pub support: Vec<usize>,
    /// The same indices in the order the winning path selected them.
    pub selection_order: Vec<usize>,
    /// Least-squares coefficients on `support` (`K x l`, rows follow `support`).
    pub coefficients: ComplexMatrix,
    /// `||Y - A_S X||_F` for the returned support.
    pub residual_norm: f64,
    /// Every node visited, leaves included.
    pub nodes_expanded: usize,
    /// Provisional supports from the root down to the winning leaf.
    pub winning_leaf_path: Vec<Vec<usize>>,
}

/// Nodes in the first `K` levels of the tree: `1 + sum_{i=2..K} prod_{j<i} d_j`.
pub fn node_count(d: &BranchVector) -> usize {
    let mut total = 1;
    let mut level_nodes = 1;
    for &w in &d.widths()[..d.len() - 1] {
        level_nodes *= w;
        total += level_nodes;
    }
    total
}

/// Index and value of the `d`-th largest entry of `values` outside `excluded`.
pub fn d_max(values: &[f64], excluded: &[usize], d: usize) -> Result<(usize, f64)> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    let ranked = rank_candidates(
        values
            .iter()
            .enumerate()
            .filter(|(g, _)| !excluded.contains(g))
            .map(|(g, &v)| (g, v)),
        d,
    )?;
    Ok(ranked[d - 1])
}

/// The `d` best `(index, score)` pairs, highest score first, ties to the smaller index.
pub(crate) fn rank_candidates(
    candidates: impl Iterator<Item = (usize, f64)>,
    d: usize,
) -> Result<Vec<(usize, f64)>> {
    let mut all: Vec<(usize, f64)> = candidates.collect();
    if all.len() < d {
        return Err(Error::NotEnoughCandidates {
            needed: d,
            available: all.len(),
        });
    }
    let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if d < all.len() {
        all.select_nth_unstable_by(d - 1, order);
        all.truncate(d);
    }
    all.sort_by(order);
    Ok(all)
}

/// Refined atom: `a_g` with the span of `A_C` removed, scaled to unit norm,
/// or the zero vector when nothing above `cfg.zero_atom_floor` is left.
pub fn refine_atom(
    dict: &Dictionary,
    support: &[usize],
    g: usize,
    cfg: &PursuitConfig,
) -> Result<DVector<C64>> {
    if g >= dict.atoms() {
        return Err(Error::InvalidArgument(format!("atom {g} out of range")));
    }
    if support.contains(&g) {
        return Err(Error::InvalidArgument(format!(
            "atom {g} belongs to the provisional support"
        )));
    }
    let atom = ComplexMatrix::new(DMatrix::from_column_slice(
        dict.rows(),
        1,
        dict.atom(g).as_slice(),
    ))?;
    let projected = project_out(dict.matrix(), support, &atom)?.into_inner();
    let norm = projected.norm();
    if norm <= cfg.zero_atom_floor {
        return Ok(DVector::zeros(dict.rows()));
    }
    Ok(DVector::from_column_slice(projected.as_slice()) / C64::from(norm))
}

/// All refined atoms for provisional support `support` as an `m x n` matrix.
///
/// Columns in `support`, and any atom lying in its span, are zero. The second
/// value flags which columns are zero.
pub(crate) fn refined_dictionary(
    dict: &Dictionary,
    support: &[usize],
    zero_atom_floor: f64,
) -> Result<(DMatrix<C64>, Vec<bool>)> {
    let mut atoms = if support.is_empty() {
        dict.matrix().as_matrix().clone()
    } else {
        let space = ColumnSpace::new(&gather_columns(dict.matrix().as_matrix(), support), DEFAULT_RANK_TOL)
            .map_err(|_| Error::RankDeficientSupport {
                support: support.to_vec(),
            })?;
        space.project_out(dict.matrix().as_matrix())
    };
    let mut zero = vec![false; atoms.ncols()];
    for (g, mut col) in atoms.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm <= zero_atom_floor || support.contains(&g) {
            col.fill(C64::new(0.0, 0.0));
            zero[g] = true;
        } else {
            col.unscale_mut(norm);
        }
    }
    Ok((atoms, zero))
}

/// Ratio of the `d`-th best out-of-support score to the best in-support score
/// at a node with provisional support `support ⊂ true_support`, scoring with
/// `||U^H a_g||` over refined atoms. A value below 1 means at least one of the
/// node's `d` children adds a correct index.
pub fn selection_margin(
    dict: &Dictionary,
    true_support: &[usize],
    support: &[usize],
    subspace: &ComplexMatrix,
    d: usize,
) -> Result<f64> {
    let remaining = remaining_support(true_support, support, dict.atoms())?;
    if subspace.rows() != dict.rows() {
        return Err(Error::DimensionMismatch {
            what: "subspace rows",
            expected: dict.rows(),
            found: subspace.rows(),
        });
    }
    let cfg = PursuitConfig::default();
    let (atoms, _) = refined_dictionary(dict, support, cfg.zero_atom_floor)?;
    let scores = column_norms(&(subspace.as_matrix().adjoint() * atoms));
    let denom = remaining
        .iter()
        .map(|&g| scores[g])
        .fold(0.0_f64, f64::max);
    let mut outside: Vec<usize> = true_support.to_vec();
    outside.extend_from_slice(support);
    let (_, numer) = d_max(&scores, &outside, d)?;
    if denom <= 1e-14 {
        return Err(Error::InfiniteMargin);
    }
    Ok(numer / denom)
}

/// Global minimizer of `||Pi_{A_S}^perp Y||_F` over all supports of size `k`.
///
/// Supports whose columns are numerically dependent are skipped. Ties go to
/// the lexicographically first support.
pub fn exhaustive_l0(
    obs: &ObservationSet,
    dict: &Dictionary,
    k: usize,
    budget: u64,
) -> Result<RecoveryResult> {
    check_shapes(obs, dict, k)?;
    let n = dict.atoms();
    check_budget(binomial(n, k), budget)?;
    let a = dict.matrix().as_matrix();
    let y = obs.matrix().as_matrix();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    for s in Combinations::new(n, k) {
        evaluated += 1;
        let Ok(space) = ColumnSpace::new(&gather_columns(a, &s), DEFAULT_RANK_TOL) else {
            continue;
        };
        let f = space.project_out(y).norm();
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, s));
        }
    }
    let (_, support) = best.ok_or(Error::RankDeficientSupport { support: Vec::new() })?;
    let mut result = finish(obs, dict, support.clone(), evaluated)?;
    result.winning_leaf_path = vec![support];
    Ok(result)
}

pub(crate) fn check_shapes(obs: &ObservationSet, dict: &Dictionary, k: usize) -> Result<()> {
    if obs.rows() != dict.rows() {
        return Err(Error::DimensionMismatch {
            what: "observation rows",
            expected: dict.rows(),
            found: obs.rows(),
        });
    }
    if k == 0 || k > dict.rows() || k > dict.atoms() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} must lie in 1..={}",
            dict.rows().min(dict.atoms())
        )));
    }
    Ok(())
}

/// Builds the result for a chosen support given in selection order.
pub(crate) fn finish(
    obs: &ObservationSet,
    dict: &Dictionary,
    selection_order: Vec<usize>,
    nodes_expanded: usize,
) -> Result<RecoveryResult> {
    let mut support = selection_order.clone();
    support.sort_unstable();
    let a_s = dict.matrix().select_columns(&support)?;
    let coefficients = least_squares(&a_s, obs.matrix())?;
    let residual_norm = project_out(dict.matrix(), &support, obs.matrix())?.frobenius_norm();
    let winning_leaf_path = (0..=selection_order.len())
        .map(|i| selection_order[..i].to_vec())
        .collect();
    Ok(RecoveryResult {
        support,
        selection_order,
        coefficients,
        residual_norm,
        nodes_expanded,
        winning_leaf_path,
    })
}

/// `S* \ C`, validating that `C ⊂ S*` and that something is left.
pub(crate) fn remaining_support(
    true_support: &[usize],
    support: &[usize],
    n: usize,
) -> Result<Vec<usize>> {
    crate::numlin::check_indices(true_support, n)?;
    if let Some(c) = support.iter().find(|c| !true_support.contains(c)) {
        return Err(Error::InvalidArgument(format!(
            "provisional index {c} is not in the true support"
        )));
    }
    let rest: Vec<usize> = true_support
        .iter()
        .copied()
        .filter(|g| !support.contains(g))
        .collect();
    if rest.is_empty() {
        return Err(Error::InvalidArgument(
            "provisional support already covers the true support".into(),
        ));
    }
    Ok(rest)
}

pub(crate) fn column_norms(m: &DMatrix<C64>) -> Vec<f64> {
    m.column_iter().map(|c| c.norm()).collect()
}
