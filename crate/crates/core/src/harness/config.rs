//! Flat `key=value` experiment configuration.
//!
//! ```text
//! kind=recovery
//! Z=250
//! K=5
//! l=5
//! snr_db=20
//! mn=4x4,5x5,6x6
//! branch_vectors=[2,2,2,2,1]|[1,1,1,1,1]
//! baselines=music
//! trials=500
//! seed=7
//! out=sweep.csv
//! ```
//!
//! Text after `#` is a comment and blank lines are ignored. A `mn` list turns a
//! recovery run into a sweep over array sizes at the first `snr_db` value;
//! without it the sweep runs over `snr_db` at the single `M x N` array.
//! An `mn` entry is either `MxN` or a product `p`, which is split as
//! `M x p/M` with `M` the largest divisor of `p` not above `sqrt(p)`.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pursuit::BranchVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Probability that dictionary conditions hold, over random geometries.
    Condition,
    /// Support-recovery error probability of each method.
    Recovery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictionaryKind {
    /// MIMO-radar steering dictionary with `Z + 1` grid atoms and random arrays.
    Mimo,
    /// i.i.d. complex Gaussian with `M N` rows and `n` atoms.
    Gaussian,
}

/// Array size `M x N` at one sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub m: usize,
    pub n: usize,
}

impl Grid {
    pub fn measurements(&self) -> usize {
        self.m * self.n
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad array size `{s}`"));
        let s = s.trim();
        let grid = match s.split_once(['x', 'X']) {
            Some((m, n)) => Grid {
                m: m.trim().parse().map_err(|_| bad())?,
                n: n.trim().parse().map_err(|_| bad())?,
            },
            None => {
                let p: usize = s.parse().map_err(|_| bad())?;
                let m = (1..=p)
                    .take_while(|d| d * d <= p)
                    .filter(|d| p.is_multiple_of(*d))
                    .last()
                    .ok_or_else(bad)?;
                Grid { m, n: p / m }
            }
        };
        if grid.m == 0 || grid.n == 0 {
            return Err(bad());
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dictionary: DictionaryKind,
    /// Aperture `Z` of the MIMO grid.
    pub aperture: usize,
    /// Atom count of Gaussian dictionaries.
    pub atoms: usize,
    pub k: usize,
    pub snapshots: usize,
    pub snr_db: Vec<f64>,
    /// Array sizes; a single entry unless the run sweeps over sizes.
    pub grids: Vec<Grid>,
    /// True when `grids` is the swept parameter.
    pub sweep_grids: bool,
    pub branch_vectors: Vec<BranchVector>,
    pub baselines: Vec<String>,
    /// Branch counts evaluated by condition sweeps.
    pub d1: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Support-scan budget for condition sweeps.
    pub budget: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut dictionary = DictionaryKind::Mimo;
        let mut aperture = None;
        let mut atoms = None;
        let (mut m, mut n) = (None, None);
        let mut k = None;
        let mut snapshots = 1;
        let mut snr_db = vec![f64::INFINITY];
        let mut mn: Option<Vec<Grid>> = None;
        let mut branch_vectors = Vec::new();
        let mut baselines = Vec::new();
        let mut d1 = vec![1, 2, 3, 4];
        let mut trials = 200;
        let mut seed = 0;
        let mut budget = crate::pursuit::DEFAULT_SUPPORT_BUDGET;
        let mut out = None;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| -> Result<usize> {
                v.parse()
                    .map_err(|_| err(format!("`{key}` needs a nonnegative integer, got `{v}`")))
            };
            match key {
                "kind" => {
                    kind = Some(match value {
                        "condition" => ExperimentKind::Condition,
                        "recovery" => ExperimentKind::Recovery,
                        other => return Err(err(format!("unknown kind `{other}`"))),
                    })
                }
                "dictionary" => {
                    dictionary = match value {
                        "mimo" => DictionaryKind::Mimo,
                        "gaussian" => DictionaryKind::Gaussian,
                        other => return Err(err(format!("unknown dictionary `{other}`"))),
                    }
                }
                "Z" => aperture = Some(number(value)?),
                "n" => atoms = Some(number(value)?),
                "M" => m = Some(number(value)?),
                "N" => n = Some(number(value)?),
                "K" => k = Some(number(value)?),
                "l" => snapshots = number(value)?,
                "trials" => trials = number(value)?,
                "seed" => {
                    seed = value
                        .parse()
                        .map_err(|_| err(format!("bad seed `{value}`")))?
                }
                "budget" => budget = number(value)? as u64,
                "snr_db" => {
                    snr_db = list(value)
                        .map(|v| match v {
                            "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
                            _ => v.parse::<f64>().map_err(|_| err(format!("bad SNR `{v}`"))),
                        })
                        .collect::<Result<_>>()?
                }
                "mn" => {
                    mn = Some(
                        list(value)
                            .map(|v| v.parse::<Grid>().map_err(|e| err(e.to_string())))
                            .collect::<Result<_>>()?,
                    )
                }
                "branch_vectors" => {
                    branch_vectors = value
                        .split('|')
                        .filter(|v| !v.trim().is_empty())
                        .map(|v| v.parse::<BranchVector>().map_err(|e| err(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "baselines" => baselines = list(value).map(str::to_string).collect(),
                "d1" => d1 = list(value).map(number).collect::<Result<_>>()?,
                "out" => out = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        let missing = |what: &str| Error::InvalidArgument(format!("config is missing `{what}`"));
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let k = k.ok_or_else(|| missing("K"))?;
        let (grids, sweep_grids) = match mn {
            Some(g) => (g, true),
            None => match (m, n) {
                (Some(m), Some(n)) if m > 0 && n > 0 => (vec![Grid { m, n }], false),
                _ => return Err(missing("mn or M and N")),
            },
        };
        let aperture = match dictionary {
            DictionaryKind::Mimo => aperture.ok_or_else(|| missing("Z"))?,
            DictionaryKind::Gaussian => aperture.unwrap_or(0),
        };
        let atoms = match dictionary {
            DictionaryKind::Mimo => aperture + 1,
            DictionaryKind::Gaussian => atoms.ok_or_else(|| missing("n"))?,
        };
        let cfg = ExperimentConfig {
            kind,
            dictionary,
            aperture,
            atoms,
            k,
            snapshots,
            snr_db,
            grids,
            sweep_grids,
            branch_vectors,
            baselines,
            d1,
            trials,
            seed,
            budget,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.grids.is_empty() || self.snr_db.is_empty() {
            return bad("sweeps must be nonempty".into());
        }
        if self.k == 0 || self.k >= self.atoms {
            return bad(format!("K = {} must lie in 1..{}", self.k, self.atoms));
        }
        if self.snapshots == 0 {
            return bad("l must be at least 1".into());
        }
        if self.dictionary == DictionaryKind::Mimo && self.aperture == 0 {
            return bad("Z must be positive".into());
        }
        match self.kind {
            ExperimentKind::Condition => {
                if self.d1.is_empty() || self.d1.contains(&0) {
                    return bad("d1 must list positive branch counts".into());
                }
            }
            ExperimentKind::Recovery => {
                if self.branch_vectors.is_empty() && self.baselines.is_empty() {
                    return bad("recovery runs need branch_vectors or baselines".into());
                }
                if let Some(d) = self.branch_vectors.iter().find(|d| d.len() != self.k) {
                    return bad(format!("branch vector {d} does not have K = {} entries", self.k));
                }
                for b in &self.baselines {
                    match b.as_str() {
                        "music" if self.snapshots < 2 => {
                            return bad("music needs l >= 2".into());
                        }
                        "beamform" if self.snapshots != 1 => {
                            return bad("beamform needs l = 1".into());
                        }
                        "music" | "beamform" => {}
                        other => return bad(format!("unknown baseline `{other}`")),
                    }
                }
            }
        }
        Ok(())
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty())
}
