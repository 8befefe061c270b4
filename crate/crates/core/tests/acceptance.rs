//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.
//!
//! Run with `cargo test -p mbmp --test acceptance -- --nocapture`.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use mbmp::dictionary::{gaussian_dictionary, mimo_radar_dictionary, random_geometry};
use mbmp::guarantees::{
    coherence_condition, cumulative_coherence_condition, design_branch_vector, mb_coherence,
    mb_coherence_profile, neuman_erc, smallest_d_bruteforce, smallest_d_mip, DesignMethod,
    DesignStrategy, OirValue, DEFAULT_NODE_BUDGET,
};
use mbmp::harness::{
    add_noise, generate_scene, run_condition_sweep, run_experiment, run_recovery_sweep,
    ExperimentConfig, RecoveryRow,
};
use mbmp::numlin::C64;
use mbmp::observation::ObservationSet;
use mbmp::pursuit::{d_max, mbmp, node_count, BranchVector, PursuitConfig, DEFAULT_SUPPORT_BUDGET};

type Outcome = (bool, String);

const BUDGET: u64 = DEFAULT_SUPPORT_BUDGET;

fn d_max_golden_values() -> Outcome {
    // Excluding the entry 1.4 (index 1), the largest remaining is 1.1 and the
    // second largest is 0.9.
    let z = [0.7, 1.4, 1.1, 0.8, 0.9];
    let first = d_max(&z, &[1], 1).unwrap();
    let second = d_max(&z, &[1], 2).unwrap();
    let ok = first == (2, 1.1) && second == (4, 0.9);
    (ok, format!("d=1 -> {first:?}, d=2 -> {second:?}"))
}

/// Greedy rank-aware order-recursive matching pursuit written directly from
/// explicit projectors.
fn ra_ormp_oracle(a: &DMatrix<C64>, y: &DMatrix<C64>, k: usize) -> Vec<usize> {
    let (m, n) = a.shape();
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..k {
        let perp = if chosen.is_empty() {
            DMatrix::<C64>::identity(m, m)
        } else {
            let a_s = a.select_columns(&chosen);
            let gram_inv = (a_s.adjoint() * &a_s).try_inverse().expect("independent support");
            DMatrix::<C64>::identity(m, m) - &a_s * gram_inv * a_s.adjoint()
        };
        let r = &perp * y;
        let range = if y.ncols() > 1 {
            let inv = (r.adjoint() * &r).try_inverse().expect("full-rank residual");
            &r * inv * r.adjoint()
        } else {
            &r * r.adjoint()
        };
        let mut best: Option<(usize, f64)> = None;
        for g in (0..n).filter(|g| !chosen.contains(g)) {
            let b: DVector<C64> = &perp * a.column(g);
            let norm = b.norm();
            if norm <= 1e-10 {
                continue;
            }
            let score = (b.adjoint() * &range * &b)[(0, 0)].re.max(0.0).sqrt() / norm;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((g, score));
            }
        }
        chosen.push(best.expect("candidate left").0);
    }
    chosen.sort_unstable();
    chosen
}

fn chain_matches_greedy_oracle() -> Outcome {
    let mut agree = 0;
    for seed in 0..100u64 {
        let k = 3 + (seed % 3) as usize;
        let l = [1, 2, 4][(seed / 3 % 3) as usize];
        let dict = gaussian_dictionary(16, 40, seed).unwrap();
        // Separate seeds keep the noise independent of the dictionary draws.
        let scene = generate_scene(40, k, l, seed + 5_000).unwrap();
        let obs = add_noise(&scene.observe(&dict).unwrap(), 10.0, seed + 9_000).unwrap();
        let ours = mbmp(&obs, &dict, &BranchVector::chain(k).unwrap(), &PursuitConfig::default()).unwrap();
        let theirs = ra_ormp_oracle(dict.matrix().as_matrix(), obs.matrix().as_matrix(), k);
        agree += usize::from(ours.support == theirs);
    }
    (agree == 100, format!("{agree}/100 supports identical"))
}

fn rank_aware_noiseless_recovery() -> Outcome {
    let d = BranchVector::chain(4).unwrap();
    let mut exact = 0;
    for seed in 0..200u64 {
        let dict = gaussian_dictionary(20, 60, seed).unwrap();
        let scene = generate_scene(60, 4, 4, seed + 10_000).unwrap();
        let obs = ObservationSet::new(scene.observe(&dict).unwrap());
        let r = mbmp(&obs, &dict, &d, &PursuitConfig::default()).unwrap();
        exact += usize::from(r.support == scene.support);
    }
    (exact == 200, format!("{exact}/200 exact"))
}

fn integer_program_matches_bruteforce() -> Outcome {
    let (mut agree, mut total, mut feasible) = (0, 0, 0);
    for seed in 0..50u64 {
        let dict = gaussian_dictionary(8, 12, seed).unwrap();
        for k in [2, 3] {
            for oir in [0.0, 0.2] {
                let oir = OirValue::assumed(oir).unwrap();
                let brute = smallest_d_bruteforce(&dict, &[], k, &oir, BUDGET).unwrap();
                let mip = smallest_d_mip(&dict, &[], k, &oir, DEFAULT_NODE_BUDGET).unwrap();
                total += 1;
                agree += usize::from(brute == mip);
                feasible += usize::from(brute.is_some());
            }
        }
    }
    (
        agree == total,
        format!("{agree}/{total} equal ({feasible} feasible)"),
    )
}

fn certificate_implication_chain() -> Outcome {
    let mut failures = Vec::new();
    let (mut coh, mut cum, mut neu) = (0, 0, 0);
    for seed in 0..200u64 {
        let m = 24 + 8 * (seed % 6) as usize;
        let k = 1 + (seed % 3) as usize;
        let dict = gaussian_dictionary(m, 48, seed).unwrap();
        let c10 = coherence_condition(&dict, k).unwrap();
        let c11 = cumulative_coherence_condition(&dict, k).unwrap();
        let c12 = neuman_erc(&dict, k, 0.0, BUDGET).unwrap();
        let profile = mb_coherence_profile(&dict, &[], k, 4, &OirValue::zero(), BUDGET).unwrap();
        coh += usize::from(c10.holds);
        cum += usize::from(c11.holds);
        neu += usize::from(c12.holds);
        if c10.holds && !c11.holds {
            failures.push(format!("seed {seed}: coherence without cumulative coherence"));
        }
        if c11.holds && !c12.holds {
            failures.push(format!("seed {seed}: cumulative coherence without Neuman"));
        }
        if (c12.lhs - profile[0]).abs() > 1e-12 {
            failures.push(format!("seed {seed}: Neuman {} vs {}", c12.lhs, profile[0]));
        }
        if profile.windows(2).any(|w| w[1] > w[0]) {
            failures.push(format!("seed {seed}: profile {profile:?} increases"));
        }
    }
    let nonvacuous = coh > 0 && cum > coh;
    (
        failures.is_empty() && nonvacuous,
        format!("holding counts coherence {coh}, cumulative {cum}, Neuman {neu}; violations {failures:?}"),
    )
}

fn certified_width_recovers_support() -> Outcome {
    let (mut instances, mut recovered, mut widths) = (0, 0, Vec::new());
    let mut failures = Vec::new();
    for seed in 0.. {
        let dict = mimo_radar_dictionary(&random_geometry(10, 10, 30.0, seed).unwrap()).unwrap();
        let Ok(d) = design_branch_vector(
            &dict,
            3,
            DesignStrategy::Level1Uniform,
            DesignMethod::BruteForce,
            BUDGET,
        ) else {
            continue;
        };
        let d1 = d.widths()[0];
        if !mb_coherence(&dict, &[], 3, d1, &OirValue::zero(), BUDGET).unwrap().holds {
            failures.push(format!("seed {seed}: designed width {d1} not certified"));
            continue;
        }
        let scene = generate_scene(dict.atoms(), 3, 1, seed + 1000).unwrap();
        let obs = ObservationSet::new(scene.observe(&dict).unwrap());
        instances += 1;
        widths.push(d1);
        match mbmp(&obs, &dict, &d, &PursuitConfig::default()) {
            Ok(r) if r.support == scene.support => recovered += 1,
            Ok(r) => failures.push(format!("seed {seed}: {:?} vs {:?}", r.support, scene.support)),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
        if instances == 100 {
            break;
        }
    }
    let widest = widths.iter().max().copied().unwrap_or(0);
    (
        recovered == 100 && failures.is_empty(),
        format!("{recovered}/{instances} recovered, widths 1..={widest}; {failures:?}"),
    )
}

fn condition_probability_ordering() -> Outcome {
    let mns: Vec<String> = (0..12).map(|i| (144 + 16 * i).to_string()).collect();
    let cfg = ExperimentConfig::parse(&format!(
        "kind=condition\nZ=100\nK=3\nmn={}\nd1=1,2,3,4\ntrials=200\nseed=1\n",
        mns.join(",")
    ))
    .unwrap();
    let rows = run_condition_sweep(&cfg).unwrap();
    let mut monotone = true;
    let mut first_reach = [None::<usize>; 4];
    for point in rows.chunks(6) {
        monotone &= point[..4].windows(2).all(|w| w[0].successes <= w[1].successes);
        for (i, row) in point[..4].iter().enumerate() {
            if first_reach[i].is_none() && row.probability() >= 0.95 {
                first_reach[i] = Some(row.measurements);
            }
        }
    }
    let decreasing = matches!(first_reach, [Some(a), Some(b), Some(c), _] if a > b && b > c);
    (
        monotone && decreasing,
        format!("non-decreasing in d1: {monotone}; MN reaching 95% for d1=1..4: {first_reach:?}"),
    )
}

fn recovery_error_ordering() -> Outcome {
    let cfg = ExperimentConfig::parse(
        "kind=recovery\nZ=250\nK=5\nl=5\nsnr_db=20\nmn=4x4,5x5,6x6\n\
         branch_vectors=2,2,2,2,1|1,1,1,1,1\nbaselines=music\ntrials=500\nseed=1\n",
    )
    .unwrap();
    let rows = run_recovery_sweep(&cfg).unwrap();
    let mut ordered = true;
    let mut detail = Vec::new();
    for point in rows.chunks(3) {
        let [tree, chain, music]: &[RecoveryRow; 3] = point.try_into().unwrap();
        ordered &= tree.errors <= chain.errors && chain.errors <= music.errors;
        detail.push(format!(
            "MN={}: {}/{}/{}",
            tree.param, tree.errors, chain.errors, music.errors
        ));
    }
    let separated = rows[0].interval().1 < rows[2].interval().0;
    (
        ordered && separated,
        format!(
            "errors out of 500 (tree/chain/music) {}; 4x4 intervals separated: {separated}",
            detail.join(", ")
        ),
    )
}

fn node_counts_and_runtime() -> Outcome {
    let wide = node_count(&"2,2,2,2,1".parse().unwrap());
    let narrow = node_count(&"2,1,1,1,1".parse().unwrap());
    let cfg = ExperimentConfig::parse(
        "kind=recovery\nZ=250\nK=5\nl=1\nsnr_db=20\nmn=5x5,8x8,10x10\n\
         branch_vectors=2,2,2,2,1|1,1,1,1,1\ntrials=100\nseed=2\n",
    )
    .unwrap();
    let rows = run_recovery_sweep(&cfg).unwrap();
    let ratios: Vec<f64> = rows.chunks(2).map(|p| p[0].mean_ms / p[1].mean_ms).collect();
    let ok = wide == 31 && narrow == 9 && ratios.iter().all(|r| (3.0..=12.0).contains(r));
    (
        ok,
        format!("node counts {wide} and {narrow}; runtime ratios at MN 25/64/100: {ratios:.2?}"),
    )
}

fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(';').collect();
            if fields.len() == 6 {
                fields.remove(4);
            }
            fields.join(";")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn experiments_are_deterministic() -> Outcome {
    let configs = [
        "kind=recovery\nZ=60\nK=3\nl=3\nsnr_db=0,10,20\nM=4\nN=4\nbranch_vectors=2,2,1|1,1,1\n\
         baselines=music\ntrials=100\nseed=9\n",
        "kind=recovery\nZ=60\nK=3\nl=1\nsnr_db=15\nmn=3x3,4x4\nbranch_vectors=2,1,1\n\
         baselines=beamform\ntrials=100\nseed=9\n",
        "kind=condition\nZ=40\nK=2\nmn=16,25\ntrials=50\nseed=9\n",
    ];
    let mut same = 0;
    for text in configs {
        let cfg = ExperimentConfig::parse(text).unwrap();
        let a = strip_timing(&run_experiment(&cfg).unwrap());
        let b = strip_timing(&run_experiment(&cfg).unwrap());
        same += usize::from(a == b);
    }
    (same == configs.len(), format!("{same}/{} configs reproduced", configs.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("d_max golden values", d_max_golden_values),
        ("single-branch tree equals greedy oracle", chain_matches_greedy_oracle),
        ("rank-aware noiseless recovery", rank_aware_noiseless_recovery),
        ("integer program equals brute force", integer_program_matches_bruteforce),
        ("certificate implication chain", certificate_implication_chain),
        ("certified width recovers support", certified_width_recovers_support),
        ("condition probability ordering", condition_probability_ordering),
        ("recovery error ordering", recovery_error_ordering),
        ("node counts and runtime ratio", node_counts_and_runtime),
        ("experiment determinism", experiments_are_deterministic),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        let line = format!(
            "criterion {:>2} {}: {} ({detail}) [{:.1}s]\n",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        // Written past the test harness capture so the summary always shows.
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
