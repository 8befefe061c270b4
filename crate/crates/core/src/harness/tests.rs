use super::*;
use rand_chacha::ChaCha8Rng;
use crate::numlin::orthonormal_basis;

fn identity(n: usize) -> Dictionary {
    Dictionary::from_matrix(ComplexMatrix::identity(n).unwrap())
}

#[test]
fn scenes_are_seeded_with_unit_gains() {
    let a = generate_scene(50, 4, 3, 9).unwrap();
    assert_eq!(a, generate_scene(50, 4, 3, 9).unwrap());
    assert_ne!(a, generate_scene(50, 4, 3, 10).unwrap());
    assert!(a.support.windows(2).all(|w| w[0] < w[1]));
    for z in a.gains.as_matrix().iter() {
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }
    assert!(generate_scene(3, 4, 1, 0).is_err());
}

#[test]
fn support_draws_are_uniform() {
    let (n, k, draws) = (10, 3, 100_000);
    let mut counts = vec![0f64; n];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..draws {
        for g in generate_scene_with(n, k, 1, &mut rng).unwrap().support {
            counts[g] += 1.0;
        }
    }
    let p = k as f64 / n as f64;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c - mean).abs() < 3.0 * sigma, "{c} vs {mean}");
    }
}

#[test]
fn noise_has_requested_variance() {
    let y0 = ComplexMatrix::new(DMatrix::zeros(1000, 100)).unwrap();
    for snr in [0.0, 10.0] {
        let y = add_noise(&y0, snr, 3).unwrap();
        let var = y.matrix().as_matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e5;
        let want = noise_variance(snr);
        assert!((var / want - 1.0).abs() < 0.02, "snr {snr}: {var}");
    }
    assert_eq!(noise_variance(0.0), 1.0);
    let clean = add_noise(&y0, f64::INFINITY, 3).unwrap();
    assert_eq!(clean.matrix(), &y0);
}

#[test]
fn music_finds_noiseless_support_in_orthonormal_dictionary() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q = ComplexMatrix::from_fn(12, 12, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
    let dict = Dictionary::from_matrix(orthonormal_basis(&q, 1e-10).unwrap().into_matrix());
    let scene = generate_scene(12, 3, 4, 5).unwrap();
    let obs = ObservationSet::new(scene.observe(&dict).unwrap());
    assert_eq!(music_discrete(&obs, &dict, 3).unwrap(), scene.support);
    assert!(music_discrete(&ObservationSet::new(q.select_columns(&[0]).unwrap()), &dict, 3).is_err());
}

#[test]
fn beamforming_on_identity_takes_largest_entries() {
    let y = ComplexMatrix::from_column_major(
        5,
        1,
        vec![
            C64::new(0.1, 0.0),
            C64::new(0.0, -3.0),
            C64::new(0.5, 0.5),
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    let obs = ObservationSet::new(y);
    assert_eq!(beamform_smv(&obs, &identity(5), 2).unwrap(), vec![1, 3]);
    assert_eq!(beamform_smv(&obs, &identity(5), 1).unwrap(), vec![1]);
}

#[test]
fn support_error_uses_set_semantics() {
    assert!(!support_error(&[1, 4, 7], &[1, 4, 7]).unwrap());
    assert!(!support_error(&[7, 1, 4], &[1, 4, 7]).unwrap());
    assert!(support_error(&[1, 4, 8], &[1, 4, 7]).unwrap());
    assert!(matches!(
        support_error(&[1, 4], &[1, 4, 7]),
        Err(Error::CardinalityMismatch { estimated: 2, truth: 3 })
    ));
}

#[test]
fn wilson_interval_matches_closed_forms() {
    // With no successes the interval is [0, z^2 / (n + z^2)].
    let z2 = 1.959963984540054f64.powi(2);
    let (lo, hi) = wilson_interval(0, 10);
    assert_eq!(lo, 0.0);
    assert!((hi - z2 / (10.0 + z2)).abs() < 1e-12);
    // At p = 1/2 the interval is symmetric about 1/2.
    let (lo, hi) = wilson_interval(5, 10);
    assert!((lo + hi - 1.0).abs() < 1e-12);
    assert!((lo - 0.236593).abs() < 1e-6);
    let (lo, hi) = wilson_interval(10, 10);
    assert!((1.0 - lo - z2 / (10.0 + z2)).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
}

#[test]
fn trial_seeds_depend_on_every_coordinate() {
    let s = trial_seed(1, 2, 3);
    assert_eq!(s, trial_seed(1, 2, 3));
    assert_ne!(s, trial_seed(0, 2, 3));
    assert_ne!(s, trial_seed(1, 3, 3));
    assert_ne!(s, trial_seed(1, 2, 4));
    assert_ne!(trial_seed(0, 1, 0), trial_seed(0, 0, 1));
}

#[test]
fn grid_entries_parse() {
    assert_eq!("4x4".parse::<Grid>().unwrap(), Grid { m: 4, n: 4 });
    assert_eq!("16".parse::<Grid>().unwrap(), Grid { m: 4, n: 4 });
    assert_eq!("18".parse::<Grid>().unwrap(), Grid { m: 3, n: 6 });
    assert_eq!("7".parse::<Grid>().unwrap(), Grid { m: 1, n: 7 });
    assert!("0".parse::<Grid>().is_err());
    assert!("4x".parse::<Grid>().is_err());
}

#[test]
fn config_parses_documented_keys() {
    let text = "# recovery run\nkind=recovery   # inline note\nZ=250\nK=5\nl=5\nsnr_db=20\nmn=4x4,25,6x6\n\
                branch_vectors=[2,2,2,2,1]|[1,1,1,1,1]\nbaselines=music\ntrials=500\nseed=7\nout=r.csv\n";
    let cfg = ExperimentConfig::parse(text).unwrap();
    assert_eq!(cfg.kind, ExperimentKind::Recovery);
    assert_eq!(cfg.atoms, 251);
    assert!(cfg.sweep_grids);
    assert_eq!(cfg.grids[1], Grid { m: 5, n: 5 });
    assert_eq!(cfg.branch_vectors.len(), 2);
    assert_eq!(cfg.branch_vectors[0].widths(), &[2, 2, 2, 2, 1]);
    assert_eq!(cfg.snr_db, vec![20.0]);
    assert_eq!(cfg.out.as_deref(), Some(std::path::Path::new("r.csv")));
}

#[test]
fn config_rejects_bad_input() {
    let base = "kind=recovery\nZ=20\nK=2\nM=3\nN=3\nbranch_vectors=1,1\n";
    assert!(ExperimentConfig::parse(base).is_ok());
    assert!(ExperimentConfig::parse(&format!("{base}colour=red\n")).is_err());
    assert!(ExperimentConfig::parse(&format!("{base}trials=0\n")).is_err());
    assert!(ExperimentConfig::parse(&format!("{base}baselines=music\n")).is_err());
    assert!(ExperimentConfig::parse("kind=recovery\nZ=20\nK=2\nM=3\nN=3\nbranch_vectors=1,1,1\n").is_err());
    assert!(ExperimentConfig::parse("kind=recovery\nK=2\nM=3\nN=3\nbranch_vectors=1,1\n").is_err());
    let err = ExperimentConfig::parse("kind=recovery\nZ=x\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
}

#[test]
fn nearly_orthogonal_dictionaries_always_pass() {
    let cfg = ExperimentConfig::parse(
        "kind=condition\ndictionary=gaussian\nn=6\nK=2\nmn=2000\nd1=1,2\ntrials=5\nseed=1\n",
    )
    .unwrap();
    let rows = run_condition_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.successes, 5, "{r}");
    }
}

#[test]
fn condition_probabilities_grow_with_width() {
    let cfg = ExperimentConfig::parse("kind=condition\nZ=20\nK=3\nmn=36,49\ntrials=20\nseed=3\n").unwrap();
    let rows = run_condition_sweep(&cfg).unwrap();
    for point in rows.chunks(6) {
        for w in point[..4].windows(2) {
            assert!(w[0].successes <= w[1].successes);
        }
    }
}

#[test]
fn noiseless_rank_aware_recovery_never_fails() {
    let cfg = ExperimentConfig::parse(
        "kind=recovery\nZ=20\nK=3\nl=3\nM=4\nN=4\nsnr_db=inf\nbranch_vectors=1,1,1\nbaselines=music\ntrials=50\nseed=2\n",
    )
    .unwrap();
    let rows = run_recovery_sweep(&cfg).unwrap();
    assert_eq!(rows[0].method, "mbmp[1,1,1]");
    assert_eq!(rows[0].errors, 0);
    assert_eq!(rows[0].mean_nodes, Some(4.0));
    assert_eq!(rows[1].method, "music");
    assert_eq!(rows[1].mean_nodes, None);
}

#[test]
fn reports_are_reproducible() {
    let cfg = ExperimentConfig::parse(
        "kind=recovery\nZ=30\nK=2\nl=1\nM=3\nN=3\nsnr_db=5,15\nbranch_vectors=2,1\nbaselines=beamform\ntrials=30\nseed=11\n",
    )
    .unwrap();
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(';').collect();
                f.remove(4);
                f.join(";")
            })
            .collect()
    };
    let a = strip(run_experiment(&cfg).unwrap());
    let b = strip(run_experiment(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a[0], "method;param;error_prob;ci95;mean_nodes");
    assert_eq!(a.len(), 5);
    assert!(a[1].starts_with("mbmp[2,1];5;"));
}
