use mbmp::dictionary::{gaussian_dictionary, mimo_radar_dictionary, random_geometry, Dictionary};
use mbmp::guarantees::{design_branch_vector, DesignMethod, DesignStrategy, DEFAULT_NODE_BUDGET};
use mbmp::pursuit::DEFAULT_SUPPORT_BUDGET;

fn draw(seed: u64) -> Dictionary {
    if seed.is_multiple_of(2) {
        gaussian_dictionary(12, 16, seed).unwrap()
    } else {
        mimo_radar_dictionary(&random_geometry(5, 5, 20.0, seed).unwrap()).unwrap()
    }
}

#[test]
fn per_node_widths_never_exceed_root_width() {
    let mut compared = 0;
    for seed in 0..300u64 {
        let dict = draw(seed);
        let design = |strategy| {
            design_branch_vector(&dict, 3, strategy, DesignMethod::BruteForce, DEFAULT_SUPPORT_BUDGET)
        };
        let (uniform, per_node) = (design(DesignStrategy::Level1Uniform), design(DesignStrategy::PerNode));
        assert_eq!(uniform.is_ok(), per_node.is_ok(), "seed {seed}");
        let (Ok(uniform), Ok(per_node)) = (uniform, per_node) else {
            continue;
        };
        let d1 = uniform.widths()[0];
        assert_eq!(per_node.widths()[0], d1, "seed {seed}");
        assert!(per_node.widths().iter().all(|&w| w <= d1), "seed {seed}: {per_node}");
        assert_eq!(*per_node.widths().last().unwrap(), 1);
        compared += 1;
    }
    assert!(compared >= 30, "{compared}");
}

#[test]
fn per_node_design_agrees_across_methods() {
    for seed in 0..20u64 {
        let dict = draw(seed);
        let brute = design_branch_vector(
            &dict,
            3,
            DesignStrategy::PerNode,
            DesignMethod::BruteForce,
            DEFAULT_SUPPORT_BUDGET,
        );
        let mip = design_branch_vector(&dict, 3, DesignStrategy::PerNode, DesignMethod::Mip, DEFAULT_NODE_BUDGET);
        assert_eq!(brute.ok(), mip.ok(), "seed {seed}");
    }
}
