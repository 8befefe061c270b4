//! Depth-first evaluation of the branching tree.
//!
//! Every node keeps an orthonormal basis of its provisional support together
//! with the dictionary and residual already projected against it, so a child
//! costs one rank-one update instead of a fresh factorization.

use nalgebra::{DMatrix, DVector};

use super::{
    check_shapes, column_norms, finish, rank_candidates, refined_dictionary, BranchVector,
    NodeState, PursuitConfig, RecoveryResult,
};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numlin::{gram_root, orth, project_out, C64};
use crate::observation::ObservationSet;

/// A complete provisional support reached by the search.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    /// Indices in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
}

/// Runs the multi-branch pursuit with branch vector `d` (sparsity `K = d.len()`).
pub fn mbmp(
    obs: &ObservationSet,
    dict: &Dictionary,
    d: &BranchVector,
    cfg: &PursuitConfig,
) -> Result<RecoveryResult> {
    Ok(search(obs, dict, d, cfg, false)?.0)
}

/// Same as [`mbmp`], also returning every leaf in visiting order.
pub fn mbmp_traced(
    obs: &ObservationSet,
    dict: &Dictionary,
    d: &BranchVector,
    cfg: &PursuitConfig,
) -> Result<(RecoveryResult, Vec<Leaf>)> {
    search(obs, dict, d, cfg, true)
}

/// Children of `node` computed from scratch, in child order.
///
/// This is the reference evaluation of one tree step; [`mbmp`] reaches the
/// same children through incremental updates.
pub fn expand_node(
    obs: &ObservationSet,
    dict: &Dictionary,
    node: &NodeState,
    width: usize,
    cfg: &PursuitConfig,
) -> Result<Vec<NodeState>> {
    cfg.validate()?;
    check_shapes(obs, dict, node.support.len() + 1)?;
    crate::numlin::check_indices(&node.excluded, dict.atoms())?;
    let residual = project_out(dict.matrix(), &node.support, obs.matrix())?.into_inner();
    let projected = project_out(dict.matrix(), &node.support, dict.matrix())?.into_inner();
    let scores = if cfg.dictionary_refinement {
        let (refined, _) = refined_dictionary(dict, &node.support, cfg.zero_atom_floor)?;
        scores_against(&residual, &refined, cfg)?
    } else {
        scores_against(&residual, &projected, cfg)?
    };
    let norms = column_norms(&projected);
    let picks = pick(&scores, &norms, &node.excluded, &node.support, width, cfg)?;
    Ok(children(node, &picks))
}

struct Work {
    state: NodeState,
    basis: Vec<DVector<C64>>,
    projected: DMatrix<C64>,
    residual: DMatrix<C64>,
}

struct Search<'a> {
    widths: &'a [usize],
    cfg: &'a PursuitConfig,
    nodes: usize,
    best: Option<(f64, Vec<usize>, Vec<Vec<usize>>)>,
    trace: Option<Vec<Leaf>>,
}

fn search(
    obs: &ObservationSet,
    dict: &Dictionary,
    d: &BranchVector,
    cfg: &PursuitConfig,
    traced: bool,
) -> Result<(RecoveryResult, Vec<Leaf>)> {
    cfg.validate()?;
    let k = d.len();
    check_shapes(obs, dict, k)?;
    let y = obs.matrix().as_matrix();
    // A wide snapshot matrix is replaced by an m x m factor with the same
    // Gram matrix; every residual norm and score is unchanged.
    let residual = if y.ncols() > y.nrows() {
        gram_root(y)
    } else {
        y.clone()
    };
    let root = Work {
        state: NodeState::root(),
        basis: Vec::new(),
        projected: dict.matrix().as_matrix().clone(),
        residual,
    };
    let mut s = Search {
        widths: d.widths(),
        cfg,
        nodes: 0,
        best: None,
        trace: traced.then(Vec::new),
    };
    s.visit(root, &mut Vec::new())?;
    let (_, order, path) = s.best.expect("a tree of positive depth has leaves");
    let mut result = finish(obs, dict, order, s.nodes)?;
    result.winning_leaf_path = path;
    Ok((result, s.trace.unwrap_or_default()))
}

impl Search<'_> {
    fn visit(&mut self, node: Work, path: &mut Vec<Vec<usize>>) -> Result<()> {
        self.nodes += 1;
        path.push(node.state.support.clone());
        let k = self.widths.len();
        if node.state.support.len() == k {
            let f = node.residual.norm();
            if let Some(trace) = self.trace.as_mut() {
                trace.push(Leaf {
                    support: node.state.support.clone(),
                    residual_norm: f,
                });
            }
            if self.best.as_ref().is_none_or(|(b, _, _)| f < *b) {
                self.best = Some((f, node.state.support.clone(), path.clone()));
            }
            path.pop();
            return Ok(());
        }

        let width = self.widths[node.state.level - 1];
        let norms = column_norms(&node.projected);
        let raw = scores_against(&node.residual, &node.projected, self.cfg)?;
        let scores: Vec<f64> = if self.cfg.dictionary_refinement {
            raw.iter()
                .zip(&norms)
                .map(|(&s, &n)| if n > self.cfg.zero_atom_floor { s / n } else { 0.0 })
                .collect()
        } else {
            raw
        };
        let picks = pick(
            &scores,
            &norms,
            &node.state.excluded,
            &node.state.support,
            width,
            self.cfg,
        )?;
        let child_is_leaf = node.state.support.len() + 1 == k;
        for state in children(&node.state, &picks) {
            let g = *state.support.last().expect("child adds an index");
            let q = new_direction(&node.basis, node.projected.column(g).into_owned());
            let residual = rank_one_out(&q, &node.residual);
            let (basis, projected) = if child_is_leaf {
                (Vec::new(), DMatrix::zeros(0, 0))
            } else {
                let mut basis = node.basis.clone();
                let projected = rank_one_out(&q, &node.projected);
                basis.push(q);
                (basis, projected)
            };
            self.visit(
                Work {
                    state,
                    basis,
                    projected,
                    residual,
                },
                path,
            )?;
        }
        path.pop();
        Ok(())
    }
}

/// `||U^H b_g||` for every column `b_g` of `atoms`, with `U` built from `residual`.
fn scores_against(
    residual: &DMatrix<C64>,
    atoms: &DMatrix<C64>,
    cfg: &PursuitConfig,
) -> Result<Vec<f64>> {
    let scale = residual.norm();
    if scale <= crate::numlin::ZERO_FLOOR {
        return Ok(vec![0.0; atoms.ncols()]);
    }
    let u = if cfg.subspace_refinement && residual.ncols() > 1 {
        match orth(residual, cfg.rank_tolerance) {
            Ok(u) => u,
            Err(Error::ZeroMatrix) => return Ok(vec![0.0; atoms.ncols()]),
            Err(e) => return Err(e),
        }
    } else {
        residual.clone()
    };
    Ok(column_norms(&(u.adjoint() * atoms)))
}

/// The `width` best eligible atoms. Atoms in `excluded`, in `support`, or
/// whose projection is at or below the zero floor are not eligible.
fn pick(
    scores: &[f64],
    projected_norms: &[f64],
    excluded: &[usize],
    support: &[usize],
    width: usize,
    cfg: &PursuitConfig,
) -> Result<Vec<usize>> {
    let eligible = scores.iter().enumerate().filter_map(|(g, &s)| {
        (!excluded.contains(&g) && !support.contains(&g) && projected_norms[g] > cfg.zero_atom_floor)
            .then_some((g, s))
    });
    Ok(rank_candidates(eligible, width)?
        .into_iter()
        .map(|(g, _)| g)
        .collect())
}

fn children(node: &NodeState, picks: &[usize]) -> Vec<NodeState> {
    let mut excluded = node.excluded.clone();
    picks
        .iter()
        .map(|&g| {
            excluded.push(g);
            let mut support = node.support.clone();
            support.push(g);
            NodeState {
                level: node.level + 1,
                support,
                excluded: excluded.clone(),
            }
        })
        .collect()
}

/// Unit vector along `v` after one more pass of orthogonalization against `basis`.
fn new_direction(basis: &[DVector<C64>], mut v: DVector<C64>) -> DVector<C64> {
    for b in basis {
        let c = b.dotc(&v);
        v.axpy(-c, b, C64::new(1.0, 0.0));
    }
    let n = v.norm();
    v.unscale(n)
}

fn rank_one_out(q: &DVector<C64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    let coeffs = q.adjoint() * m;
    m - q * coeffs
}
