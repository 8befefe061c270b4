use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DictionaryKind, ExperimentConfig, ExperimentKind, Grid};
use super::{
    add_noise_with, beamform_smv, generate_scene_with, music_discrete, support_error, trial_seed,
    wilson_interval, with_truth,
};
use crate::dictionary::{
    gaussian_dictionary, mimo_radar_dictionary, random_geometry_with, Dictionary,
};
use crate::error::Result;
use crate::guarantees::{coherence_condition, cumulative_coherence_condition, RefinedGram};
use crate::observation::ObservationSet;
use crate::pursuit::{mbmp, BranchVector, PursuitConfig};

pub const CONDITION_HEADER: &str = "MN;d1;prob;ci95;trials";
pub const RECOVERY_HEADER: &str = "method;param;error_prob;ci95;mean_ms;mean_nodes";

/// Fraction of dictionary draws meeting one condition at one array size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRow {
    pub measurements: usize,
    /// Branch count, or `coherence` / `babel` for the single-branch conditions.
    pub label: String,
    pub successes: usize,
    pub trials: usize,
}

impl ConditionRow {
    pub fn probability(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

impl fmt::Display for ConditionRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = wilson_interval(self.successes, self.trials);
        write!(
            f,
            "{};{};{:.6};{:.6},{:.6};{}",
            self.measurements,
            self.label,
            self.probability(),
            lo,
            hi,
            self.trials
        )
    }
}

/// Support-recovery error statistics of one method at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryRow {
    pub method: String,
    pub param: String,
    pub errors: usize,
    pub trials: usize,
    pub mean_ms: f64,
    /// Mean tree nodes per solve; `None` for the baselines.
    pub mean_nodes: Option<f64>,
}

impl RecoveryRow {
    pub fn error_probability(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials)
    }
}

impl fmt::Display for RecoveryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.interval();
        let nodes = self
            .mean_nodes
            .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        write!(
            f,
            "{};{};{:.6};{:.6},{:.6};{:.4};{}",
            self.method,
            self.param,
            self.error_probability(),
            lo,
            hi,
            self.mean_ms,
            nodes
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Mbmp(BranchVector),
    Music,
    Beamform,
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::Mbmp(d) => format!("mbmp[{d}]"),
            Method::Music => "music".into(),
            Method::Beamform => "beamform".into(),
        }
    }

    /// Estimated support and the number of tree nodes visited.
    fn estimate(&self, obs: &ObservationSet, dict: &Dictionary, k: usize) -> Result<(Vec<usize>, Option<usize>)> {
        match self {
            Method::Mbmp(d) => {
                let r = mbmp(obs, dict, d, &PursuitConfig::default())?;
                Ok((r.support, Some(r.nodes_expanded)))
            }
            Method::Music => Ok((music_discrete(obs, dict, k)?, None)),
            Method::Beamform => Ok((beamform_smv(obs, dict, k)?, None)),
        }
    }
}

fn draw_dictionary(cfg: &ExperimentConfig, grid: Grid, rng: &mut ChaCha8Rng) -> Result<Dictionary> {
    match cfg.dictionary {
        DictionaryKind::Mimo => {
            let geometry = random_geometry_with(grid.m, grid.n, cfg.aperture as f64, rng)?;
            mimo_radar_dictionary(&geometry)
        }
        DictionaryKind::Gaussian => gaussian_dictionary(grid.measurements(), cfg.atoms, rng.random()),
    }
}

/// For each array size and trial, draws a dictionary and records whether the
/// multi-branch coherence condition holds at the root for each configured
/// `d1`, and whether the coherence and cumulative-coherence conditions hold.
pub fn run_condition_sweep(cfg: &ExperimentConfig) -> Result<Vec<ConditionRow>> {
    let mut rows = Vec::new();
    for (p, &grid) in cfg.grids.iter().enumerate() {
        let mut holds = vec![0; cfg.d1.len()];
        let (mut coh, mut babel) = (0, 0);
        for t in 0..cfg.trials {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, p as u64, t as u64));
            let dict = draw_dictionary(cfg, grid, &mut rng)?;
            let smallest = RefinedGram::new(&dict, &[])?.smallest_d(cfg.k, 0.0, cfg.budget)?;
            for (count, &d) in holds.iter_mut().zip(&cfg.d1) {
                if smallest.is_some_and(|s| s <= d) {
                    *count += 1;
                }
            }
            coh += usize::from(coherence_condition(&dict, cfg.k)?.holds);
            babel += usize::from(cumulative_coherence_condition(&dict, cfg.k)?.holds);
        }
        let row = |label: String, successes| ConditionRow {
            measurements: grid.measurements(),
            label,
            successes,
            trials: cfg.trials,
        };
        for (&d, &count) in cfg.d1.iter().zip(&holds) {
            rows.push(row(d.to_string(), count));
        }
        rows.push(row("coherence".into(), coh));
        rows.push(row("babel".into(), babel));
    }
    Ok(rows)
}

/// Runs every configured method on shared random trials at each sweep point.
pub fn run_recovery_sweep(cfg: &ExperimentConfig) -> Result<Vec<RecoveryRow>> {
    let mut methods: Vec<Method> = cfg.branch_vectors.iter().cloned().map(Method::Mbmp).collect();
    for b in &cfg.baselines {
        methods.push(if b == "music" { Method::Music } else { Method::Beamform });
    }
    let points: Vec<(Grid, f64, String)> = if cfg.sweep_grids {
        cfg.grids
            .iter()
            .map(|&g| (g, cfg.snr_db[0], g.measurements().to_string()))
            .collect()
    } else {
        cfg.snr_db
            .iter()
            .map(|&s| (cfg.grids[0], s, format_snr(s)))
            .collect()
    };

    let mut rows = Vec::new();
    for (p, (grid, snr, param)) in points.into_iter().enumerate() {
        let mut errors = vec![0; methods.len()];
        let mut millis = vec![0.0; methods.len()];
        let mut nodes = vec![0usize; methods.len()];
        for t in 0..cfg.trials {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, p as u64, t as u64));
            let dict = draw_dictionary(cfg, grid, &mut rng)?;
            let scene = generate_scene_with(dict.atoms(), cfg.k, cfg.snapshots, &mut rng)?;
            let noisy = add_noise_with(&scene.observe(&dict)?, snr, &mut rng)?;
            let obs = with_truth(noisy, &scene)?;
            for (i, method) in methods.iter().enumerate() {
                let start = Instant::now();
                let (support, visited) = method.estimate(&obs, &dict, cfg.k)?;
                millis[i] += start.elapsed().as_secs_f64() * 1e3;
                nodes[i] += visited.unwrap_or(0);
                errors[i] += usize::from(support_error(&support, &scene.support)?);
            }
        }
        for (i, method) in methods.iter().enumerate() {
            rows.push(RecoveryRow {
                method: method.id(),
                param: param.clone(),
                errors: errors[i],
                trials: cfg.trials,
                mean_ms: millis[i] / cfg.trials as f64,
                mean_nodes: matches!(method, Method::Mbmp(_))
                    .then(|| nodes[i] as f64 / cfg.trials as f64),
            });
        }
    }
    Ok(rows)
}

fn format_snr(s: f64) -> String {
    if s.is_infinite() {
        "inf".into()
    } else {
        s.to_string()
    }
}

/// Runs the configured experiment and returns the CSV report, header included.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<String> {
    let (header, lines): (&str, Vec<String>) = match cfg.kind {
        ExperimentKind::Condition => (
            CONDITION_HEADER,
            run_condition_sweep(cfg)?.iter().map(|r| r.to_string()).collect(),
        ),
        ExperimentKind::Recovery => (
            RECOVERY_HEADER,
            run_recovery_sweep(cfg)?.iter().map(|r| r.to_string()).collect(),
        ),
    };
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
