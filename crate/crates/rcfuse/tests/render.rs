use image::Rgb;
use rcfuse::render::{render_image, RenderConfig, DET_COLOR, DET_VELOCITY_COLOR, GT_COLOR};
use rcfuse::synth::{generate_scene, SynthConfig};
use rcfuse_core::geometry::{Box3D, Dims, Vec3};

fn pixels_of(img: &image::RgbImage, color: Rgb<u8>) -> Vec<(u32, u32)> {
    img.enumerate_pixels().filter(|(_, _, p)| **p == color).map(|(x, y, _)| (x, y)).collect()
}

#[test]
fn rendering_is_deterministic() {
    let scene = generate_scene(&SynthConfig::default(), 5).unwrap();
    let cfg = RenderConfig::default();
    assert_eq!(render_image(&scene, &scene.gt_boxes, &cfg), render_image(&scene, &scene.gt_boxes, &cfg));
}

#[test]
fn arrow_length_follows_velocity() {
    let mut scene = generate_scene(&SynthConfig::noiseless(), 0).unwrap();
    scene.gt_boxes.clear();
    scene.radar_sweeps.clear();
    let cfg = RenderConfig::default();
    // 5 m/s straight ahead from 30 m: the arrow spans 30..35 m, 40 pixels
    let det = Box3D::new(Vec3::new(30.0, 0.0, 1.0), Dims::new(1.0, 1.0, 1.0), 0.0, 0)
        .unwrap()
        .with_velocity([5.0, 0.0]);
    let img = render_image(&scene, &[det], &cfg);
    let blue = pixels_of(&img, DET_VELOCITY_COLOR);
    assert!(!blue.is_empty());
    let col = ((cfg.y_range[1] - 0.0) * cfg.pixels_per_meter) as u32;
    let top = blue.iter().filter(|p| p.0 == col).map(|p| p.1).min().unwrap();
    let bottom = blue.iter().filter(|p| p.0 == col).map(|p| p.1).max().unwrap();
    let expected_top = ((cfg.x_range[1] - 35.0) * cfg.pixels_per_meter) as u32;
    assert!(top.abs_diff(expected_top) <= 1, "tip row {top}, expected {expected_top}");
    assert!(bottom - top >= 38, "shaft spans {} pixels", bottom - top);
}

#[test]
fn layers_use_their_colors() {
    let scene = generate_scene(&SynthConfig::default(), 2).unwrap();
    let cfg = RenderConfig::default();
    let only_gt = render_image(&scene, &[], &cfg);
    assert!(!pixels_of(&only_gt, GT_COLOR).is_empty());
    assert!(pixels_of(&only_gt, DET_COLOR).is_empty());
    let shifted: Vec<Box3D> = scene
        .gt_boxes
        .iter()
        .map(|b| Box3D { center: b.center + Vec3::new(0.0, 1.5, 0.0), ..*b })
        .collect();
    let both = render_image(&scene, &shifted, &cfg);
    assert!(!pixels_of(&both, DET_COLOR).is_empty());
}

#[test]
fn stationary_objects_draw_no_arrow() {
    let mut scene = generate_scene(&SynthConfig::noiseless(), 0).unwrap();
    scene.gt_boxes.clear();
    let det = Box3D::new(Vec3::new(20.0, 5.0, 1.0), Dims::new(2.0, 4.0, 1.5), 0.3, 0).unwrap();
    let img = render_image(&scene, &[det], &RenderConfig::default());
    assert!(pixels_of(&img, DET_VELOCITY_COLOR).is_empty());
}
