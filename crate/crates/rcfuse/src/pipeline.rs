//! One scene through the fusion chain: sweep aggregation, pillar expansion,
//! frustum association, radar feature rasterization and box decoding.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rcfuse_core::decoder::{cell_and_offset, decode_box, write_regression, DetectionRecord, SecondaryOutputs};
use rcfuse_core::features::{
    render_gt_heatmap, rasterize_radar_features, FeatureMapStack, HeatmapAnnotation, RadarFeatureParams,
    RadarFeatureSource, DEFAULT_MIN_OVERLAP, DEFAULT_STRIDE,
};
use rcfuse_core::frustum::{associate_with, multi_claim_count, Association, AssociationOptions, FrustumMode, Membership};
use rcfuse_core::geometry::Box3D;
use rcfuse_core::radar::{aggregate_sweeps, expand_pillars, select_sweeps, AggregationConfig, PillarDims, RadarPillar};

use crate::detector::{record_from_box, DetectorNoise};
use crate::error::{Error, Result};
use crate::schema::Scene;
use crate::synth::NUM_ATTRIBUTES;

pub const RADAR_DEPTH: &str = "radar_depth";
pub const RADAR_VX: &str = "radar_vx";
pub const RADAR_VY: &str = "radar_vy";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub association: AssociationOptions,
    pub pillar: PillarDims,
    pub radar_features: RadarFeatureParams,
    pub aggregation: AggregationConfig,
    pub stride: usize,
    /// When false the radar is ignored and boxes come from the primary outputs only.
    pub fusion: bool,
    /// Also render keypoint heatmaps and regression channels into the stack.
    pub full_stack: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            association: AssociationOptions::default(),
            pillar: PillarDims::default(),
            radar_features: RadarFeatureParams::default(),
            aggregation: AggregationConfig::default(),
            stride: DEFAULT_STRIDE,
            fusion: true,
            full_stack: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub aggregate: Duration,
    pub expand: Duration,
    pub associate: Duration,
    pub rasterize: Duration,
    pub decode: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub total_objects: usize,
    pub matched: usize,
    pub unmatched: usize,
    /// Pillars claimed by more than one object.
    pub multi_claim: usize,
    pub radar_points: usize,
    pub timings: StageTimings,
}

impl Diagnostics {
    pub fn association_rate(&self) -> f64 {
        if self.total_objects == 0 {
            0.0
        } else {
            self.matched as f64 / self.total_objects as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub detections: Vec<Box3D>,
    /// Input records with the secondary outputs filled in where associated.
    pub records: Vec<DetectionRecord>,
    pub associations: Vec<Association>,
    pub pillars: Vec<RadarPillar>,
    /// Ground-truth owner of each pillar's anchor, when the scene records one.
    pub pillar_owners: Vec<Option<usize>>,
    pub features: FeatureMapStack,
    pub diagnostics: Diagnostics,
}

impl PipelineOutput {
    /// Per object, whether it was associated with a pillar from its own
    /// ground-truth object. Record `i` is taken to describe `gt_boxes[i]`,
    /// which is how synthetic scenes are laid out.
    pub fn association_correct(&self) -> Vec<bool> {
        self.associations
            .iter()
            .map(|a| {
                a.pillar_index
                    .is_some_and(|p| self.pillar_owners.get(p).copied().flatten() == Some(a.object_index))
            })
            .collect()
    }
}

/// Records for Train mode when the scene carries none: noiseless projections
/// of the ground truth.
fn records_from_ground_truth(scene: &Scene, stride: usize) -> Result<Vec<DetectionRecord>> {
    let noise = DetectorNoise::noiseless();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    scene
        .gt_boxes
        .iter()
        .map(|gt| record_from_box(gt, &scene.camera, stride, &noise, NUM_ATTRIBUTES, &mut rng))
        .collect()
}

pub fn run_pipeline(scene: &Scene, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let ctx = |e: rcfuse_core::Error| Error::in_scene(&scene.scene_id, e);
    let cam = &scene.camera;
    let mut timings = StageTimings::default();

    let mut records = match (&scene.preliminary_dets, cfg.association.mode) {
        (Some(d), _) => d.clone(),
        (None, FrustumMode::Train) => records_from_ground_truth(scene, cfg.stride)?,
        (None, FrustumMode::Test) => {
            return Err(Error::Format(format!(
                "scene {} has no preliminary detections",
                scene.scene_id
            )))
        }
    };
    for r in &mut records {
        r.secondary = None;
    }

    let t = Instant::now();
    let (points, owners) = if cfg.fusion {
        let points = aggregate_sweeps(&scene.radar_sweeps, &scene.ego_pose, scene.timestamp, &cfg.aggregation);
        let owners: Vec<Option<usize>> = select_sweeps(&scene.radar_sweeps, scene.timestamp, &cfg.aggregation)
            .into_iter()
            .flat_map(|i| match scene.radar_owners.get(i) {
                Some(o) => o.clone(),
                None => vec![None; scene.radar_sweeps[i].points.len()],
            })
            .collect();
        (points, owners)
    } else {
        (Vec::new(), Vec::new())
    };
    timings.aggregate = t.elapsed();

    let t = Instant::now();
    let pillars = expand_pillars(&points, cfg.pillar);
    timings.expand = t.elapsed();

    let t = Instant::now();
    let associations = associate_with(&records, &pillars, cam, &cfg.association).map_err(ctx)?;
    timings.associate = t.elapsed();

    let t = Instant::now();
    let mut sources = Vec::new();
    for a in &associations {
        let Some(p) = a.pillar_index else { continue };
        let anchor = pillars[p].anchor;
        let depth = cam.ego_to_camera(anchor.position).z;
        let rec = &mut records[a.object_index];
        rec.secondary = Some(SecondaryOutputs {
            depth,
            orientation: rec.primary.orientation,
            velocity: anchor.velocity,
            attribute_scores: rec.attribute_scores.clone(),
        });
        sources.push(RadarFeatureSource {
            center_px: rec.center_px,
            box2d: rec.box2d,
            depth,
            velocity: anchor.velocity,
        });
    }
    let mut features = FeatureMapStack::for_image(cam.intrinsics().width, cam.intrinsics().height, cfg.stride);
    let planes = rasterize_radar_features(
        &sources,
        features.width(),
        features.height(),
        cfg.stride,
        &cfg.radar_features,
    )
    .map_err(ctx)?;
    features.insert(RADAR_DEPTH, planes.depth).map_err(ctx)?;
    features.insert(RADAR_VX, planes.vx).map_err(ctx)?;
    features.insert(RADAR_VY, planes.vy).map_err(ctx)?;
    if cfg.full_stack {
        let annotations: Vec<HeatmapAnnotation> = records
            .iter()
            .map(|r| HeatmapAnnotation {
                center_px: r.center_px,
                class_id: r.class_id,
                box2d: r.box2d,
            })
            .collect();
        let num_classes = records.iter().map(|r| r.class_id + 1).max().unwrap_or(0);
        let heatmaps = render_gt_heatmap(
            &annotations,
            features.width(),
            features.height(),
            num_classes,
            cfg.stride,
            DEFAULT_MIN_OVERLAP,
        );
        for (c, plane) in heatmaps.into_iter().enumerate() {
            features.insert(format!("heatmap_{c}"), plane).map_err(ctx)?;
        }
        for r in &records {
            let ([x, y], _) = cell_and_offset(r.center_px, cfg.stride);
            if x < features.width() && y < features.height() {
                write_regression(&mut features, r).map_err(ctx)?;
            }
        }
    }
    timings.rasterize = t.elapsed();

    let t = Instant::now();
    let detections = records
        .iter()
        .enumerate()
        .map(|(i, r)| decode_box(&r.peak(cfg.stride), r, cfg.stride, cam, r.secondary.is_some(), i))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ctx)?;
    timings.decode = t.elapsed();

    let matched = associations.iter().filter(|a| a.pillar_index.is_some()).count();
    let pillar_owners = if owners.len() == pillars.len() {
        owners
    } else {
        vec![None; pillars.len()]
    };
    Ok(PipelineOutput {
        diagnostics: Diagnostics {
            total_objects: records.len(),
            matched,
            unmatched: records.len() - matched,
            multi_claim: multi_claim_count(&associations),
            radar_points: points.len(),
            timings,
        },
        detections,
        records,
        associations,
        pillars,
        pillar_owners,
        features,
    })
}

/// Pipeline settings for the association ablations.
pub fn with_membership(mut cfg: PipelineConfig, membership: Membership, radial_gate: bool) -> PipelineConfig {
    cfg.association.membership = membership;
    cfg.association.radial_gate = radial_gate;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_scene, SynthConfig};

    #[test]
    fn diagnostics_conserve_objects() {
        let cfg = SynthConfig::default();
        for seed in 0..10 {
            let scene = generate_scene(&cfg, seed).unwrap();
            let out = run_pipeline(&scene, &PipelineConfig::default()).unwrap();
            let d = &out.diagnostics;
            assert_eq!(d.matched + d.unmatched, d.total_objects);
            assert_eq!(d.total_objects, scene.gt_boxes.len());
            assert_eq!(out.detections.len(), d.total_objects);
        }
    }

    #[test]
    fn no_radar_means_primary_only() {
        let mut scene = generate_scene(&SynthConfig::default(), 4).unwrap();
        scene.radar_sweeps.clear();
        scene.radar_owners.clear();
        let fused = run_pipeline(&scene, &PipelineConfig::default()).unwrap();
        let plain = run_pipeline(
            &scene,
            &PipelineConfig {
                fusion: false,
                ..PipelineConfig::default()
            },
        )
        .unwrap();
        assert_eq!(fused.detections, plain.detections);
        assert!(fused.detections.iter().all(|b| b.velocity == [0.0, 0.0]));
        assert_eq!(fused.diagnostics.matched, 0);
    }

    #[test]
    fn noiseless_scene_decodes_to_ground_truth() {
        let cfg = SynthConfig::noiseless();
        let scene = generate_scene(&cfg, 17).unwrap();
        let out = run_pipeline(&scene, &PipelineConfig::default()).unwrap();
        for (d, g) in out.detections.iter().zip(&scene.gt_boxes) {
            assert!((d.center - g.center).norm() < 1e-6);
            assert_eq!(d.class_id, g.class_id);
            assert_eq!(d.attribute_id, g.attribute_id);
        }
    }

    #[test]
    fn train_mode_without_detections_uses_ground_truth() {
        let mut scene = generate_scene(&SynthConfig::noiseless(), 2).unwrap();
        scene.preliminary_dets = None;
        let mut cfg = PipelineConfig::default();
        assert!(matches!(run_pipeline(&scene, &cfg), Err(Error::Format(_))));
        cfg.association.mode = FrustumMode::Train;
        let out = run_pipeline(&scene, &cfg).unwrap();
        assert_eq!(out.detections.len(), scene.gt_boxes.len());
    }

    #[test]
    fn full_stack_has_heatmaps_and_regression() {
        let scene = generate_scene(&SynthConfig::default(), 8).unwrap();
        let cfg = PipelineConfig {
            full_stack: true,
            ..PipelineConfig::default()
        };
        let out = run_pipeline(&scene, &cfg).unwrap();
        assert!(out.features.get("heatmap_0").is_some() || scene.gt_boxes.iter().all(|b| b.class_id != 0));
        assert!(out.features.get(rcfuse_core::decoder::channels::DEPTH).is_some());
        assert_eq!(out.features.width(), 200);
        assert_eq!(out.features.height(), 112);
    }
}
