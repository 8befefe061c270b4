//! Exhaustive support scans over the absolute Gram matrix of refined atoms.
//!
//! For a support `S` write `v = sum_{l in S} Q_l` (rows of `Q = |A^H A|`),
//! `alpha = max_{j in S} v_j` and `beta_g = v_g` for `g` outside `S`. The
//! multi-branch coherence of `S` at width `d` is `alpha + d-th largest beta / (1 - oir)`.

use super::{check_provisional, CertificateContext, CertificateKind, CertificateReport, OirValue};
use crate::combinatorics::{binomial, check_budget};
use crate::dictionary::{AbsGram, Dictionary};
use crate::error::{Error, Result};
use crate::pursuit::{refined_dictionary, PursuitConfig};

/// `|(A^C)^H A^C|` for the refined dictionary at provisional support `C`,
/// with the atoms still available as support candidates.
#[derive(Clone, Debug)]
pub struct RefinedGram {
    gram: AbsGram,
    candidates: Vec<usize>,
    provisional: Vec<usize>,
}

impl RefinedGram {
    pub fn new(dict: &Dictionary, provisional: &[usize]) -> Result<Self> {
        check_provisional(provisional, dict.atoms())?;
        let gram = if provisional.is_empty() && dict.is_normalized() {
            AbsGram::new(dict)
        } else {
            let floor = PursuitConfig::default().zero_atom_floor;
            let (refined, _) = refined_dictionary(dict, provisional, floor)?;
            AbsGram::from_columns(&refined)
        };
        let candidates = (0..dict.atoms())
            .filter(|g| !provisional.contains(g))
            .collect();
        Ok(RefinedGram {
            gram,
            candidates,
            provisional: provisional.to_vec(),
        })
    }

    pub fn gram(&self) -> &AbsGram {
        &self.gram
    }

    /// Atoms outside the provisional support, ascending.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn provisional(&self) -> &[usize] {
        &self.provisional
    }

    /// Largest admissible branch count for supports of size `k`.
    pub(crate) fn max_width(&self, k: usize) -> usize {
        self.candidates.len().saturating_sub(k)
    }

    pub(crate) fn check(&self, k: usize, budget: u64) -> Result<()> {
        if k == 0 || k >= self.candidates.len() {
            return Err(Error::InvalidArgument(format!(
                "remaining sparsity {k} must lie in 1..{}",
                self.candidates.len()
            )));
        }
        check_budget(binomial(self.candidates.len(), k), budget)
    }

    /// Calls `visit(S, v)` for every `k`-subset `S` of the candidates in
    /// lexicographic order, with `v` the row sum accumulated in that order.
    pub(crate) fn for_each_support(&self, k: usize, mut visit: impl FnMut(&[usize], &[f64])) {
        let n = self.gram.dim();
        let mut sums = vec![vec![0.0; n]; k + 1];
        let mut chosen = Vec::with_capacity(k);
        self.descend(0, k, &mut chosen, &mut sums, &mut visit);
    }

    fn descend(
        &self,
        start: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        sums: &mut [Vec<f64>],
        visit: &mut impl FnMut(&[usize], &[f64]),
    ) {
        let depth = chosen.len();
        if depth == k {
            visit(chosen, &sums[depth]);
            return;
        }
        let last_start = self.candidates.len() - (k - depth);
        for pos in start..=last_start {
            let g = self.candidates[pos];
            let (lo, hi) = sums.split_at_mut(depth + 1);
            for ((dst, &acc), &q) in hi[0].iter_mut().zip(&lo[depth]).zip(self.gram.row(g)) {
                *dst = acc + q;
            }
            chosen.push(g);
            self.descend(pos + 1, k, chosen, sums, visit);
            chosen.pop();
        }
    }

    /// `max_S lhs(S, d)` for `d = 1..=widths`.
    pub fn profile(&self, k: usize, oir: f64, widths: usize, budget: u64) -> Result<Vec<f64>> {
        self.check(k, budget)?;
        if widths == 0 || widths > self.max_width(k) {
            return Err(Error::NotEnoughCandidates {
                needed: widths,
                available: self.max_width(k),
            });
        }
        let denom = 1.0 - oir;
        let mut best = vec![f64::NEG_INFINITY; widths];
        let mut top = vec![f64::NEG_INFINITY; widths];
        self.for_each_support(k, |s, v| {
            let alpha = support_alpha(s, v);
            top.fill(f64::NEG_INFINITY);
            for &g in &self.candidates {
                if s.contains(&g) {
                    continue;
                }
                let beta = v[g];
                if beta > top[widths - 1] {
                    let mut i = widths - 1;
                    while i > 0 && top[i - 1] < beta {
                        top[i] = top[i - 1];
                        i -= 1;
                    }
                    top[i] = beta;
                }
            }
            for (b, &t) in best.iter_mut().zip(&top) {
                *b = b.max(alpha + t / denom);
            }
        });
        Ok(best)
    }

    /// `max_S #{g outside S : alpha + beta_g / (1 - oir) >= 2}`: the width
    /// at which the condition first fails is one more than this.
    pub fn max_violations(&self, k: usize, oir: f64, budget: u64) -> Result<usize> {
        self.check(k, budget)?;
        let denom = 1.0 - oir;
        let mut worst = 0;
        self.for_each_support(k, |s, v| {
            worst = worst.max(violations(s, v, &self.candidates, denom));
        });
        Ok(worst)
    }

    /// Smallest `d` with `max_S lhs(S, d) < 2`, or `None` when even the
    /// widest admissible `d` fails.
    pub fn smallest_d(&self, k: usize, oir: f64, budget: u64) -> Result<Option<usize>> {
        let d = 1 + self.max_violations(k, oir, budget)?;
        Ok((d <= self.max_width(k)).then_some(d))
    }
}

pub(crate) fn support_alpha(s: &[usize], v: &[f64]) -> f64 {
    s.iter().map(|&j| v[j]).fold(f64::NEG_INFINITY, f64::max)
}

/// Out-of-support atoms whose term would push the condition to 2 or more.
pub(crate) fn violations(s: &[usize], v: &[f64], candidates: &[usize], denom: f64) -> usize {
    let alpha = support_alpha(s, v);
    candidates
        .iter()
        .filter(|&&g| !s.contains(&g) && alpha + v[g] / denom >= 2.0)
        .count()
}

/// Multi-branch coherence at provisional support `c` for total sparsity `k`
/// and width `d`: scans every support of size `k - |c|` disjoint from `c`.
pub fn mb_coherence(
    dict: &Dictionary,
    c: &[usize],
    k: usize,
    d: usize,
    oir: &OirValue,
    budget: u64,
) -> Result<CertificateReport> {
    let lhs = *mb_coherence_profile(dict, c, k, d, oir, budget)?
        .last()
        .expect("profile has d entries");
    Ok(CertificateReport::new(
        CertificateKind::MbCoherence,
        lhs,
        2.0,
        CertificateContext {
            provisional: c.to_vec(),
            d,
            k,
            oir: oir.value,
        },
    ))
}

/// Left-hand sides of [`mb_coherence`] for `d = 1..=widths` in one scan.
pub fn mb_coherence_profile(
    dict: &Dictionary,
    c: &[usize],
    k: usize,
    widths: usize,
    oir: &OirValue,
    budget: u64,
) -> Result<Vec<f64>> {
    let ratio = oir.checked()?;
    let rest = remaining_sparsity(c, k)?;
    RefinedGram::new(dict, c)?.profile(rest, ratio, widths, budget)
}

/// Smallest width for which [`mb_coherence`] holds, found by exhaustive scan;
/// `None` if no admissible width works.
pub fn smallest_d_bruteforce(
    dict: &Dictionary,
    c: &[usize],
    k: usize,
    oir: &OirValue,
    budget: u64,
) -> Result<Option<usize>> {
    let ratio = oir.checked()?;
    let rest = remaining_sparsity(c, k)?;
    RefinedGram::new(dict, c)?.smallest_d(rest, ratio, budget)
}

pub(crate) fn remaining_sparsity(c: &[usize], k: usize) -> Result<usize> {
    if c.len() >= k {
        return Err(Error::InvalidArgument(format!(
            "provisional support of size {} leaves nothing to select for K = {k}",
            c.len()
        )));
    }
    Ok(k - c.len())
}
