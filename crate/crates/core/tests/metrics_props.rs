mod common;

use common::{oracle, random_image, random_map};
use proptest::prelude::*;
use spix_core::metrics::boundary::{boundary_recall, mean_distance_to_edge};
use spix_core::metrics::overlap::{asa, undersegmentation_bergh, undersegmentation_levin, undersegmentation_np};
use spix_core::metrics::variation::{compactness, explained_variation, intra_cluster_variation};
use spix_core::metrics::{evaluate_entry, MetricConfig};
use spix_core::LabelMap;

const TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..14, 2usize..14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_match_brute_force((w, h) in dims(), a in any::<u64>(), b in any::<u64>(), r in 0usize..3, channels in prop_oneof![Just(1usize), Just(3usize)]) {
        let gt = random_map(a, w, h);
        let sp = random_map(b, w, h);
        let image = random_image(b, w, h, channels);
        prop_assert!(close(boundary_recall(&gt, &sp, r).unwrap(), oracle::recall(&gt, &sp, r)));
        prop_assert!(close(undersegmentation_np(&gt, &sp).unwrap(), oracle::ue_np(&gt, &sp)));
        prop_assert!(close(undersegmentation_levin(&gt, &sp).unwrap(), oracle::ue_levin(&gt, &sp)));
        prop_assert!(close(undersegmentation_bergh(&gt, &sp).unwrap(), oracle::ue_bergh(&gt, &sp)));
        prop_assert!(close(asa(&gt, &sp).unwrap(), oracle::asa(&gt, &sp)));
        prop_assert!(close(explained_variation(&image, &sp).unwrap(), oracle::ev(&image, &sp)));
        prop_assert!(close(compactness(&sp), oracle::co(&sp)));
        prop_assert!(close(intra_cluster_variation(&image, &sp).unwrap(), oracle::icv(&image, &sp)));
        prop_assert!(close(mean_distance_to_edge(&gt, &sp).unwrap(), oracle::mde(&gt, &sp)));
    }

    #[test]
    fn self_comparison_is_perfect((w, h) in dims(), seed in any::<u64>(), r in 0usize..3) {
        let g = random_map(seed, w, h);
        prop_assert_eq!(boundary_recall(&g, &g, r).unwrap(), 1.0);
        prop_assert_eq!(undersegmentation_np(&g, &g).unwrap(), 0.0);
        prop_assert_eq!(undersegmentation_levin(&g, &g).unwrap(), 0.0);
        prop_assert_eq!(undersegmentation_bergh(&g, &g).unwrap(), 0.0);
        prop_assert_eq!(asa(&g, &g).unwrap(), 1.0);
        prop_assert_eq!(mean_distance_to_edge(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn asa_and_bergh_sum_to_one((w, h) in dims(), a in any::<u64>(), b in any::<u64>()) {
        let gt = random_map(a, w, h);
        let sp = random_map(b, w, h);
        let sum = asa(&gt, &sp).unwrap() + undersegmentation_bergh(&gt, &sp).unwrap();
        prop_assert!((sum - 1.0).abs() <= TOL);
    }

    #[test]
    fn recall_is_monotone_in_radius((w, h) in dims(), a in any::<u64>(), b in any::<u64>()) {
        let gt = random_map(a, w, h);
        let sp = random_map(b, w, h);
        let values: Vec<f64> = (0..5).map(|r| boundary_recall(&gt, &sp, r).unwrap()).collect();
        prop_assert!(values.windows(2).all(|p| p[0] <= p[1]), "{values:?}");
    }

    #[test]
    fn refinement_never_lowers_asa_or_ev((w, h) in dims(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let gt = random_map(a, w, h);
        let coarse = random_map(b, w, h);
        // Intersecting with any other partition refines `coarse`.
        let other = random_map(c, w, h);
        let fine = LabelMap::new(
            w,
            h,
            coarse.labels().iter().zip(other.labels()).map(|(&x, &y)| x.wrapping_mul(1031).wrapping_add(y)).collect(),
        )
        .unwrap();
        prop_assume!(oracle::same_partition(
            fine.labels(),
            &coarse.labels().iter().zip(other.labels()).map(|(&x, &y)| (x, y)).collect::<Vec<_>>()
        ));
        let image = random_image(c, w, h, 3);
        prop_assert!(asa(&gt, &fine).unwrap() >= asa(&gt, &coarse).unwrap());
        prop_assert!(explained_variation(&image, &fine).unwrap() >= explained_variation(&image, &coarse).unwrap() - TOL);
    }

    #[test]
    fn bounded_ranges((w, h) in dims(), a in any::<u64>(), b in any::<u64>()) {
        let gt = random_map(a, w, h);
        let sp = random_map(b, w, h);
        let image = random_image(a, w, h, 3);
        let m = evaluate_entry(&image, &[gt], &sp, &MetricConfig::default()).unwrap();
        for v in [m.rec, m.asa, m.ev, m.ue_np, m.ue_bergh] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(m.co > 0.0 && m.co <= 1.0);
        prop_assert!(m.ue_levin >= 0.0 && m.icv >= 0.0 && m.mde >= 0.0);
    }

    #[test]
    fn worst_case_over_ground_truths((w, h) in dims(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let gts = [random_map(a, w, h), random_map(b, w, h)];
        let sp = random_map(c, w, h);
        let image = random_image(c, w, h, 1);
        let config = MetricConfig::default();
        let r = config.radius(w, h);
        let m = evaluate_entry(&image, &gts, &sp, &config).unwrap();
        let rec: Vec<f64> = gts.iter().map(|g| oracle::recall(g, &sp, r)).collect();
        let ue: Vec<f64> = gts.iter().map(|g| oracle::ue_np(g, &sp)).collect();
        prop_assert!(close(m.rec, rec[0].min(rec[1])));
        prop_assert!(close(m.ue_np, ue[0].max(ue[1])));
    }
}

#[test]
fn hand_instance_values() {
    let gt = LabelMap::from_rows(&[[0, 0, 1, 1]; 4]).unwrap();
    let sp = LabelMap::from_rows(&[[0, 0, 0, 1]; 4]).unwrap();
    for (lib, reference, expected) in [
        (undersegmentation_np(&gt, &sp).unwrap(), oracle::ue_np(&gt, &sp), 0.5),
        (undersegmentation_levin(&gt, &sp).unwrap(), oracle::ue_levin(&gt, &sp), 0.75),
        (undersegmentation_bergh(&gt, &sp).unwrap(), oracle::ue_bergh(&gt, &sp), 0.25),
        (asa(&gt, &sp).unwrap(), oracle::asa(&gt, &sp), 0.75),
    ] {
        assert_eq!(reference, expected);
        assert_eq!(lib, expected);
    }
}
