use proptest::prelude::*;

use reg4dof::bnb::{bnb_register, DEFAULT_MIN_HALF_SIDE};
use reg4dof::fmp::fmp_prune;
use reg4dof::io::{format_matches, parse_matches};
use reg4dof::pipeline::{register_pair, Method, PipelineConfig};
use reg4dof::ransac::{ransac_4dof, RansacConfig};
use reg4dof::rotation::rotation_consensus;
use reg4dof::synth::{generate_planted, grid_oracle};
use reg4dof::{objective, InlierConfig, Point3, Pose4DOF};

fn cfg(eps: f64) -> InlierConfig {
    InlierConfig::new(eps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bnb_consensus_is_attained(seed in 0u64..10_000, m in 5usize..60, frac in 0.1f64..1.0) {
        let c = cfg(0.05);
        let k = ((m as f64 * frac).ceil() as usize).min(m);
        let inst = generate_planted(m, k, &c, seed).unwrap();
        let sol = bnb_register(&inst.matches, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        prop_assert_eq!(objective(&sol.pose, &inst.matches, &c), sol.consensus);
        prop_assert!(sol.consensus >= k);
        prop_assert!(sol.exact);
    }

    #[test]
    fn pruning_keeps_the_optimum(seed in 0u64..10_000, m in 10usize..120, frac in 0.05f64..0.6) {
        let c = cfg(0.05);
        let k = ((m as f64 * frac).ceil() as usize).max(2);
        let inst = generate_planted(m, k.min(m), &c, seed).unwrap();
        let full = bnb_register(&inst.matches, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        let pruned = fmp_prune(&inst.matches, &c);
        let reduced = bnb_register(&pruned.kept, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        prop_assert_eq!(full.consensus, reduced.consensus);
        prop_assert!(pruned.lower_bound <= full.consensus);
        prop_assert_eq!(objective(&reduced.pose, &inst.matches, &c), full.consensus);
    }

    #[test]
    fn ransac_never_beats_bnb(seed in 0u64..10_000, rseed in 0u64..1000) {
        let c = cfg(0.05);
        let inst = generate_planted(40, 8, &c, seed).unwrap();
        let best = bnb_register(&inst.matches, &c, DEFAULT_MIN_HALF_SIDE).unwrap().consensus;
        let rc = RansacConfig::new(c).with_seed(rseed).with_max_iterations(2000);
        prop_assert!(ransac_4dof(&inst.matches, &rc).unwrap().consensus <= best);
    }

    #[test]
    fn rotation_search_matches_objective(seed in 0u64..10_000, tx in -3.0f64..3.0, ty in -3.0f64..3.0) {
        let c = cfg(0.1);
        let inst = generate_planted(50, 20, &c, seed).unwrap();
        let t = inst.truth.t + Point3::new(tx, ty, 0.0) * 0.02;
        let stab = rotation_consensus(t, &inst.matches, &c);
        let at = objective(&Pose4DOF::new(stab.theta, t), &inst.matches, &c);
        prop_assert_eq!(at, stab.count);
    }

    #[test]
    fn report_consistency(seed in 0u64..10_000, fmp in any::<bool>(), ransac in any::<bool>()) {
        let c = cfg(0.05);
        let inst = generate_planted(60, 12, &c, seed).unwrap();
        let mut pc = PipelineConfig::new(c);
        pc.fmp = fmp;
        pc.method = if ransac { Method::Ransac } else { Method::Bnb };
        let r = register_pair(&inst.matches, &pc).unwrap();
        prop_assert!(r.consensus <= r.pruned_size && r.pruned_size <= r.input_size);
        prop_assert_eq!(objective(&r.pose, &inst.matches, &c), r.consensus);
        if ransac {
            prop_assert!(!r.exact);
        }
    }
}

#[test]
fn file_round_trip_preserves_solution() {
    let c = cfg(0.05);
    for seed in 0..10 {
        let inst = generate_planted(120, 15, &c, seed).unwrap();
        let text = format_matches(&inst.matches, "round trip");
        let back = parse_matches(&text, std::path::Path::new("mem")).unwrap();
        assert_eq!(back.len(), inst.matches.len());
        let a = bnb_register(&inst.matches, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        let b = bnb_register(&back, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        assert!(a.consensus.abs_diff(b.consensus) <= 1, "seed {seed}");
    }
}

#[test]
fn oracle_never_exceeds_bnb() {
    let c = cfg(0.05);
    for seed in 0..20 {
        let inst = generate_planted(25, 5, &c, 50 + seed).unwrap();
        let oracle = grid_oracle(&inst.matches, &c, 180, 0.025);
        let best = bnb_register(&inst.matches, &c, DEFAULT_MIN_HALF_SIDE).unwrap();
        assert!(
            oracle <= best.consensus,
            "seed {seed}: {oracle} > {}",
            best.consensus
        );
    }
}
