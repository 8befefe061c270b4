//! Smallest branch count as a binary program, solved by branch and bound.
//!
//! Variables: `s` (support minus one distinguished index), `y` (the
//! distinguished index `j`), `z` (atoms outside the support). An atom `g` may
//! have `z_g = 1` only if `(q_j + gamma q_g)^T (s + y) >= 2`, i.e. it violates
//! the coherence condition together with `j`. The optimum of `sum z` plus one
//! is the smallest width at which the condition holds.
//!
//! The constraint is imposed only where `y_j = z_g = 1` (right-hand side
//! `2 (y_j + z_g - 1)`); pairs with either variable zero are unconstrained.
//! Once `T = s + y` is fixed the best `y` is the index maximizing
//! `alpha_j = q_j^T T`, and `z` marks every violating atom, so the search
//! branches only over membership of `T`.

use super::scan::{remaining_sparsity, violations, RefinedGram};
use super::OirValue;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

/// Default cap on branch-and-bound nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Smallest width for which the multi-branch coherence condition holds at
/// provisional support `c`, from the binary program; `None` if no admissible
/// width works.
pub fn smallest_d_mip(
    dict: &Dictionary,
    c: &[usize],
    k: usize,
    oir: &OirValue,
    node_budget: u64,
) -> Result<Option<usize>> {
    let ratio = oir.checked()?;
    let rest = remaining_sparsity(c, k)?;
    let gram = RefinedGram::new(dict, c)?;
    gram.check(rest, u64::MAX)?;
    let mut solver = Solver::new(&gram, rest, 1.0 - ratio, node_budget);
    let n = gram.gram().dim();
    let mut chosen = Vec::with_capacity(rest);
    solver.branch(0, &mut chosen, &vec![0.0; n])?;
    let d = 1 + solver.best;
    Ok((d <= gram.max_width(rest)).then_some(d))
}

struct Solver<'a> {
    gram: &'a RefinedGram,
    k: usize,
    denom: f64,
    /// Largest contribution any other candidate can add to a row sum at `g`.
    colmax: Vec<f64>,
    cap: usize,
    best: usize,
    nodes: u64,
    budget: u64,
}

impl<'a> Solver<'a> {
    fn new(gram: &'a RefinedGram, k: usize, denom: f64, budget: u64) -> Self {
        let q = gram.gram();
        let mut colmax = vec![0.0_f64; q.dim()];
        for &g in gram.candidates() {
            colmax[g] = gram
                .candidates()
                .iter()
                .filter(|&&l| l != g)
                .map(|&l| q.get(l, g))
                .fold(0.0, f64::max);
        }
        Solver {
            gram,
            k,
            denom,
            colmax,
            cap: gram.max_width(k),
            best: 0,
            nodes: 0,
            budget,
        }
    }

    fn branch(&mut self, pos: usize, chosen: &mut Vec<usize>, v: &[f64]) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::TooLarge {
                required: self.nodes as u128,
                budget: self.budget,
            });
        }
        let cands = self.gram.candidates();
        if chosen.len() == self.k {
            let count = violations(chosen, v, cands, self.denom);
            self.best = self.best.max(count);
            return Ok(());
        }
        let left = self.k - chosen.len();
        if cands.len() - pos < left || self.best >= self.cap {
            return Ok(());
        }
        if self.upper_bound(pos, chosen, v) <= self.best {
            return Ok(());
        }
        let g = cands[pos];
        let with: Vec<f64> = v
            .iter()
            .zip(self.gram.gram().row(g))
            .map(|(&a, &q)| a + q)
            .collect();
        chosen.push(g);
        self.branch(pos + 1, chosen, &with)?;
        chosen.pop();
        self.branch(pos + 1, chosen, v)
    }

    /// Violation count no completion of `chosen` from `cands[pos..]` can exceed.
    fn upper_bound(&self, pos: usize, chosen: &[usize], v: &[f64]) -> usize {
        let q = self.gram.gram();
        let cands = self.gram.candidates();
        let r = (self.k - chosen.len()) as f64;
        let fixed = chosen.iter().map(|&j| v[j] + r * self.colmax[j]);
        let open = cands[pos..]
            .iter()
            .map(|&j| q.get(j, j) + v[j] + (r - 1.0) * self.colmax[j]);
        let alpha = fixed.chain(open).fold(f64::NEG_INFINITY, f64::max);
        // Slack absorbs rounding differences between the bound and the exact sums.
        let slack = 1e-9;
        let count = cands
            .iter()
            .filter(|&&g| {
                !chosen.contains(&g) && alpha + (v[g] + r * self.colmax[g]) / self.denom >= 2.0 - slack
            })
            .count();
        count.min(self.cap)
    }
}
