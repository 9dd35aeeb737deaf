mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigtamper_core::adversary::{extreme_nondominated, impact, noticeability};
use sigtamper_core::{
    check_feasible, compare, concavity_index, encode_objectives, frontier_audit, normalize,
    optimal_control, pareto_frontier, slope_at_origin, travel_time_costs, verify_optimality, Axis,
    RunSettings, VulnerabilityReport,
};

fn raw_frontier() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-10_000i64..=0, 0i64..=10_000), 1..12)
        .prop_map(|pts| extreme_nondominated(pts.into_iter().chain([(0, 0)])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_ignores_uniform_scaling(pts in raw_frontier(), k in 1i64..1000) {
        let scaled: Vec<(i64, i64)> = pts.iter().map(|&(a, b)| (a * k, b * k)).collect();
        prop_assert_eq!(normalize(&pts), normalize(&scaled));
    }

    #[test]
    fn normalized_points_stay_in_unit_square(pts in raw_frontier()) {
        for (x, y) in normalize(&pts) {
            prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn convex_frontiers_have_concavity_at_least_half(pts in raw_frontier()) {
        if let Some(ci) = concavity_index(&normalize(&pts)) {
            prop_assert!(ci >= 0.5 - 1e-12, "ci = {ci}");
            prop_assert!(ci <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn slope_is_nonnegative(pts in raw_frontier()) {
        if let Some(m) = slope_at_origin(&normalize(&pts)) {
            prop_assert!(m >= 0.0);
        }
    }

    #[test]
    fn comparison_ignores_report_order(
        fronts in prop::collection::vec(raw_frontier(), 2..6),
        seed in any::<u64>(),
    ) {
        let reports: Vec<VulnerabilityReport> = fronts
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let settings = RunSettings {
                    network: format!("n{k}"),
                    demand_veh_per_hr: 400,
                    horizon_steps: 450,
                };
                VulnerabilityReport::from_points(format!("n{k}"), settings, f)
            })
            .collect();
        let mut shuffled = reports.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut rng);
        let a = compare(&reports, Axis::Network).unwrap();
        let b = compare(&shuffled, Axis::Network).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_control_is_integral_feasible_and_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (label, g) = common::random_grid_instance(&mut rng);
        let opt = optimal_control(&g).unwrap();
        prop_assert!(check_feasible(&g, &opt.flow.flow).is_ok(), "{label}");
        prop_assert!(verify_optimality(&g, &travel_time_costs(&g), &opt.flow.flow), "{label}");
        prop_assert!(opt.conflict_flows.iter().all(|&x| x == 0 || x == 1), "{label}");
    }

    #[test]
    fn linearized_noticeability_matches_hamming_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (label, g) = common::micro_instance(&mut rng);
        let opt = optimal_control(&g).unwrap();
        let enc = encode_objectives(&opt, &g).unwrap();
        for _ in 0..64 {
            let mut x = vec![0i64; g.arc_count()];
            let mut hamming = 0i128;
            for (&a, &star) in g.conflict_arcs().iter().zip(&opt.conflict_flows) {
                x[a] = rand::Rng::gen_range(&mut rng, 0..=1);
                hamming += (x[a] != star) as i128;
            }
            prop_assert_eq!(enc.z2(&x), hamming, "{}", label);
            prop_assert_eq!(enc.z2(&x), noticeability(&x, &opt, &g) as i128, "{}", label);
        }
        prop_assert_eq!(enc.z1(&opt.flow.flow), impact(&opt.flow.flow, &opt, &g) as i128);
    }

    #[test]
    fn frontier_is_audit_clean_on_micro_instances(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (label, g) = common::micro_instance(&mut rng);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let audit = frontier_audit(&f, Some((&g, &opt)));
        prop_assert!(audit.is_clean(), "{label}: {:?}", audit.issues);
        prop_assert!(f.points.iter().all(|p| p.z1 <= 0 && p.z2 >= 0), "{label}");
    }
}
