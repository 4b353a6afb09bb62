use armpose::camera::projection_consistency;
use armpose::heatmap::heatmap_argmax;
use armpose::kinematics::forward_kinematics;
use armpose::refine::refine_labels;
use armpose::solver::SolverOptions;
use armpose::synth::{render_heatmaps, sample_scene_seeded, HeatmapLayout, NoiseSpec, SampleRanges};
use armpose::{ArmModel, CameraIntrinsics, Keypoints2D};
use proptest::prelude::*;

fn mean_error(a: &Keypoints2D, b: &Keypoints2D) -> f64 {
    a.points.iter().zip(&b.points).map(|(p, q)| (p - q).norm()).sum::<f64>() / a.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clean_heatmaps_refine_no_worse_than_argmax(seed in any::<u64>()) {
        let model = ArmModel::owi535();
        let intr = CameraIntrinsics::default();
        let s = sample_scene_seeded(seed, 0, &SampleRanges::default(), &model, &intr).unwrap();
        let h = render_heatmaps(&s.y, &NoiseSpec::noiseless(), &HeatmapLayout::default(), 0).unwrap();
        let argmax = heatmap_argmax(&h).unwrap();
        let r = refine_labels(&h, &intr, &model, &SolverOptions::default()).unwrap();
        prop_assert!(mean_error(&r.y_refined, &s.y) <= mean_error(&argmax, &s.y) + 1e-6);
        let z = forward_kinematics(&model, &r.pose.joints).unwrap();
        prop_assert!(projection_consistency(&intr, &r.pose, &z, &r.y_refined).unwrap() < 1e-9);
    }

    #[test]
    fn noisy_labels_stay_geometric(seed in any::<u64>()) {
        let model = ArmModel::owi535();
        let intr = CameraIntrinsics::default();
        let s = sample_scene_seeded(seed, 1, &SampleRanges::default(), &model, &intr).unwrap();
        let noise = NoiseSpec { seed, ..NoiseSpec::default() };
        let h = render_heatmaps(&s.y, &noise, &HeatmapLayout::default(), 1).unwrap();
        if let Ok(r) = refine_labels(&h, &intr, &model, &SolverOptions::default()) {
            let z = forward_kinematics(&model, &r.pose.joints).unwrap();
            prop_assert!(projection_consistency(&intr, &r.pose, &z, &r.y_refined).unwrap() < 1e-9);
            prop_assert!(r.meta.inlier_mask.iter().filter(|&&m| m).count() >= 6);
        }
    }
}
