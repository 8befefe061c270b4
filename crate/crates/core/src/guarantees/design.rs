//! Branch-vector design from the noiseless multi-branch coherence condition.

use std::str::FromStr;

use super::mip::smallest_d_mip;
use super::scan::RefinedGram;
use super::OirValue;
use crate::combinatorics::{binomial, check_budget, Combinations};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::pursuit::BranchVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignStrategy {
    /// `[d_1, ..., d_1, 1]` with `d_1` the smallest width certified at the root.
    Level1Uniform,
    /// `d_i` is the largest smallest-width over every provisional support of
    /// size `i - 1`. Cost grows like `n^(K-1)`; small dictionaries only.
    PerNode,
}

impl FromStr for DesignStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level1" | "level1-uniform" | "level1_uniform" => Ok(DesignStrategy::Level1Uniform),
            "per-node" | "per_node" => Ok(DesignStrategy::PerNode),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignMethod {
    /// Exhaustive support scan.
    BruteForce,
    /// Branch and bound on the binary program.
    Mip,
}

impl FromStr for DesignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bruteforce" | "brute-force" => Ok(DesignMethod::BruteForce),
            "mip" => Ok(DesignMethod::Mip),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Designs a branch vector of length `k` for noiseless data.
///
/// `budget` caps the support scans (brute force) or branch-and-bound nodes
/// (MIP) of each individual smallest-width computation.
pub fn design_branch_vector(
    dict: &Dictionary,
    k: usize,
    strategy: DesignStrategy,
    method: DesignMethod,
    budget: u64,
) -> Result<BranchVector> {
    if k == 0 || k >= dict.atoms() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} must lie in 1..{}",
            dict.atoms()
        )));
    }
    if k == 1 {
        return BranchVector::chain(1);
    }
    let smallest = |c: &[usize]| -> Result<Option<usize>> {
        match method {
            DesignMethod::BruteForce => {
                RefinedGram::new(dict, c)?.smallest_d(k - c.len(), 0.0, budget)
            }
            DesignMethod::Mip => smallest_d_mip(dict, c, k, &OirValue::zero(), budget),
        }
    };
    let d1 = smallest(&[])?.ok_or(Error::Infeasible { level: 1 })?;
    match strategy {
        DesignStrategy::Level1Uniform => BranchVector::uniform(d1, k),
        DesignStrategy::PerNode => {
            let mut widths = vec![d1];
            for level in 2..k {
                check_budget(binomial(dict.atoms(), level - 1), budget)?;
                let mut worst = 1;
                for c in Combinations::new(dict.atoms(), level - 1) {
                    match smallest(&c) {
                        Ok(Some(d)) => worst = worst.max(d),
                        Ok(None) => return Err(Error::Infeasible { level }),
                        // A dependent provisional support is never a correct one.
                        Err(Error::RankDeficientSupport { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                widths.push(worst);
            }
            widths.push(1);
            BranchVector::new(widths)
        }
    }
}
