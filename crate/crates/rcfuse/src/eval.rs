//! Directory-level evaluation and report output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rcfuse_core::geometry::Box3D;
use rcfuse_core::metrics::{EvalConfig, Evaluator, MetricReport};
use serde::{Deserialize, Serialize};

use crate::batch::list_json;
use crate::error::{Error, Result};
use crate::schema::{load_detections, load_scene, to_json};

/// Scores every ground-truth scene in `gt_dir` against the detection file
/// with the same scene id in `pred_dir`. Scenes without detections count as
/// empty predictions.
pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, cfg: &EvalConfig) -> Result<MetricReport> {
    let mut preds: BTreeMap<String, Vec<Box3D>> = BTreeMap::new();
    for path in list_json(pred_dir)? {
        let file = load_detections(&path)?;
        let boxes = file.boxes().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if preds.insert(file.scene_id.clone(), boxes).is_some() {
            return Err(Error::Format(format!("duplicate detections for scene {}", file.scene_id)));
        }
    }
    let mut ev = Evaluator::new(cfg.clone());
    for path in list_json(gt_dir)? {
        let scene = load_scene(&path)?;
        let p = preds.remove(&scene.scene_id).unwrap_or_default();
        ev.add_scene(&p, &scene.gt_boxes);
    }
    for id in preds.keys() {
        log::warn!("detections for scene {id} have no ground truth and were ignored");
    }
    Ok(ev.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReportDto {
    pub class: usize,
    pub num_gt: usize,
    pub num_pred: usize,
    /// AP per distance threshold, keyed like `"0.5"`.
    pub ap: BTreeMap<String, f64>,
    pub mean_ap: f64,
    pub ate: f64,
    pub ase: f64,
    pub aoe: f64,
    pub ave: f64,
    pub aae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDto {
    pub nds: f64,
    pub map: f64,
    pub mate: f64,
    pub mase: f64,
    pub maoe: f64,
    pub mave: f64,
    pub maae: f64,
    pub thresholds: Vec<f64>,
    pub classes: Vec<ClassReportDto>,
}

impl From<&MetricReport> for ReportDto {
    fn from(r: &MetricReport) -> Self {
        Self {
            nds: r.nds,
            map: r.map,
            mate: r.mate,
            mase: r.mase,
            maoe: r.maoe,
            mave: r.mave,
            maae: r.maae,
            thresholds: r.thresholds.clone(),
            classes: r
                .classes
                .iter()
                .map(|c| ClassReportDto {
                    class: c.class_id,
                    num_gt: c.num_gt,
                    num_pred: c.num_pred,
                    ap: r.thresholds.iter().zip(&c.ap).map(|(t, ap)| (format!("{t}"), *ap)).collect(),
                    mean_ap: c.mean_ap,
                    ate: c.errors.ate,
                    ase: c.errors.ase,
                    aoe: c.errors.aoe,
                    ave: c.errors.ave,
                    aae: c.errors.aae,
                })
                .collect(),
        }
    }
}

pub fn report_json(r: &MetricReport) -> String {
    to_json(&ReportDto::from(r))
}

/// Fixed-width table: one summary row, then one row per class.
pub fn report_table(r: &MetricReport) -> String {
    let mut s = String::new();
    let header = ["", "NDS", "mAP", "mATE", "mASE", "mAOE", "mAVE", "mAAE"];
    let row = |s: &mut String, cells: &[String]| {
        let _ = write!(s, "{:<10}", cells[0]);
        for c in &cells[1..] {
            let _ = write!(s, "{c:>8}");
        }
        s.push('\n');
    };
    row(&mut s, &header.map(String::from));
    let f = |v: f64| format!("{v:.3}");
    row(
        &mut s,
        &[
            "all".into(),
            f(r.nds),
            f(r.map),
            f(r.mate),
            f(r.mase),
            f(r.maoe),
            f(r.mave),
            f(r.maae),
        ],
    );
    for c in &r.classes {
        let e = &c.errors;
        row(
            &mut s,
            &[
                format!("class {}", c.class_id),
                "-".into(),
                f(c.mean_ap),
                f(e.ate),
                f(e.ase),
                f(e.aoe),
                f(e.ave),
                e.aae.map_or("-".into(), f),
            ],
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rcfuse_core::geometry::{Dims, Vec3};

    #[test]
    fn table_is_aligned() {
        let b = Box3D::new(Vec3::new(10.0, 0.0, 0.8), Dims::new(1.9, 4.6, 1.6), 0.0, 0)
            .unwrap()
            .with_attribute(Some(0));
        let mut ev = Evaluator::new(EvalConfig::default());
        ev.add_scene(&[b], &[b]);
        let r = ev.finish();
        let t = report_table(&r);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
        assert!(lines[1].starts_with("all") && lines[1].contains("1.000"));
        let dto: ReportDto = serde_json::from_str(&report_json(&r)).unwrap();
        assert_eq!(dto.nds, 1.0);
        assert_eq!(dto.classes[0].ap["0.5"], 1.0);
    }
}
