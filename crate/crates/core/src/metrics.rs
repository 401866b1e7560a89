//! Center-distance detection metrics: greedy matching, AP per class and
//! distance threshold, true-positive error means and the NDS composite.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::Box3D;
use crate::math::{self, angle_diff};

pub const DISTANCE_THRESHOLDS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const TP_THRESHOLD: f64 = 2.0;
pub const MIN_RECALL: f64 = 0.1;
pub const MIN_PRECISION: f64 = 0.1;
/// Recall samples used when integrating the precision-recall curve.
pub const RECALL_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pred: usize,
    pub gt: usize,
    /// Ground-plane center distance, meters.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    /// In the order predictions were processed (descending score).
    pub matches: Vec<Match>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

fn bev_distance(a: &Box3D, b: &Box3D) -> f64 {
    math::hypot(a.center.x - b.center.x, a.center.y - b.center.y)
}

/// Prediction indices by descending score; equal scores keep input order.
fn score_order(preds: &[Box3D]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
    order
}

/// Greedy one-to-one matching in descending score order. Each prediction
/// takes the nearest unmatched ground truth of its class within `threshold`.
pub fn match_detections(preds: &[Box3D], gts: &[Box3D], threshold: f64) -> MatchResult {
    let mut taken = vec![false; gts.len()];
    let mut out = MatchResult::default();
    for p in score_order(preds) {
        let best = gts
            .iter()
            .enumerate()
            .filter(|(g, gt)| !taken[*g] && gt.class_id == preds[p].class_id)
            .map(|(g, gt)| (g, bev_distance(&preds[p], gt)))
            .filter(|(_, d)| *d <= threshold)
            .fold(None::<(usize, f64)>, |best, cur| match best {
                Some((_, d)) if d <= cur.1 => best,
                _ => Some(cur),
            });
        match best {
            Some((g, distance)) => {
                taken[g] = true;
                out.matches.push(Match { pred: p, gt: g, distance });
            }
            None => out.unmatched_preds.push(p),
        }
    }
    out.unmatched_gts = (0..gts.len()).filter(|g| !taken[*g]).collect();
    out
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` must be non-decreasing.
/// Left of the data the first value is held, right of it the result is 0.
fn interp(x: f64, xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n == 0 || x > xs[n - 1] {
        return 0.0;
    }
    if x < xs[0] {
        return ys[0];
    }
    // last index with xs[j] <= x
    let j = xs.partition_point(|&v| v <= x) - 1;
    if j == n - 1 {
        return ys[j];
    }
    let t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + t * (ys[j + 1] - ys[j])
}

/// Area under the precision-recall curve for one class and threshold.
///
/// `scored` holds `(score, is_true_positive)` for every prediction of the
/// class. Precision is sampled at 101 evenly spaced recalls, samples at or
/// below `MIN_RECALL` are dropped, and the remainder is shifted by
/// `MIN_PRECISION`, floored at zero and renormalized to `[0, 1]`.
pub fn average_precision(scored: &[(f64, bool)], num_gt: usize) -> f64 {
    if num_gt == 0 || scored.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut recall = Vec::with_capacity(order.len());
    let mut precision = Vec::with_capacity(order.len());
    for i in order {
        if scored[i].1 {
            tp += 1;
        } else {
            fp += 1;
        }
        precision.push(tp as f64 / (tp + fp) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    let first = math::floor(100.0 * MIN_RECALL + 0.5) as usize + 1;
    let samples = RECALL_SAMPLES - first;
    let total: f64 = (first..RECALL_SAMPLES)
        .map(|k| {
            let r = k as f64 / (RECALL_SAMPLES - 1) as f64;
            let p = interp(r, &recall, &precision);
            ((p - MIN_PRECISION) / (1.0 - MIN_PRECISION)).max(0.0)
        })
        .sum();
    total / samples as f64
}

/// Mean true-positive errors. `aae` is `None` when no ground truth in the
/// set carries an attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpErrors {
    pub ate: f64,
    pub ase: f64,
    pub aoe: f64,
    pub ave: f64,
    pub aae: Option<f64>,
}

impl TpErrors {
    /// Errors for an empty match set.
    pub const WORST: TpErrors = TpErrors {
        ate: 1.0,
        ase: 1.0,
        aoe: 1.0,
        ave: 1.0,
        aae: Some(1.0),
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.ate, self.ase, self.aoe, self.ave, self.aae.unwrap_or(1.0)]
    }
}

/// IoU of two boxes after aligning their centers and headings.
pub fn aligned_iou(a: &Box3D, b: &Box3D) -> f64 {
    let inter = a.dims.w.min(b.dims.w) * a.dims.l.min(b.dims.l) * a.dims.h.min(b.dims.h);
    inter / (a.dims.volume() + b.dims.volume() - inter)
}

/// Error means over `(prediction, ground truth)` pairs.
pub fn tp_errors(pairs: &[(Box3D, Box3D)]) -> TpErrors {
    if pairs.is_empty() {
        return TpErrors::WORST;
    }
    let n = pairs.len() as f64;
    let mean = |f: &dyn Fn(&Box3D, &Box3D) -> f64| pairs.iter().map(|(p, g)| f(p, g)).sum::<f64>() / n;
    let ate = mean(&|p, g| bev_distance(p, g));
    let ase = mean(&|p, g| 1.0 - aligned_iou(p, g));
    let aoe = mean(&|p, g| angle_diff(p.yaw, g.yaw));
    let ave = mean(&|p, g| math::hypot(p.velocity[0] - g.velocity[0], p.velocity[1] - g.velocity[1]));
    let with_attr: Vec<bool> = pairs
        .iter()
        .filter_map(|(p, g)| g.attribute_id.map(|ga| p.attribute_id == Some(ga)))
        .collect();
    let aae = if with_attr.is_empty() {
        None
    } else {
        Some(1.0 - with_attr.iter().filter(|&&ok| ok).count() as f64 / with_attr.len() as f64)
    };
    TpErrors { ate, ase, aoe, ave, aae }
}

/// nuScenes detection score: `(5·mAP + Σ (1 - min(1, err))) / 10`.
pub fn nds(map: f64, errors: &[f64; 5]) -> f64 {
    let tp: f64 = errors.iter().map(|e| 1.0 - e.min(1.0)).sum();
    (5.0 * map + tp) / 10.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub thresholds: Vec<f64>,
    pub tp_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            thresholds: DISTANCE_THRESHOLDS.to_vec(),
            tp_threshold: TP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class_id: usize,
    pub num_gt: usize,
    pub num_pred: usize,
    /// AP per distance threshold, in config order.
    pub ap: Vec<f64>,
    pub mean_ap: f64,
    pub errors: TpErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub thresholds: Vec<f64>,
    pub classes: Vec<ClassMetrics>,
    pub map: f64,
    pub mate: f64,
    pub mase: f64,
    pub maoe: f64,
    pub mave: f64,
    pub maae: f64,
    pub nds: f64,
}

impl MetricReport {
    pub fn errors(&self) -> [f64; 5] {
        [self.mate, self.mase, self.maoe, self.mave, self.maae]
    }
}

#[derive(Debug, Clone, Default)]
struct ClassAccumulator {
    num_gt: usize,
    num_pred: usize,
    scored: Vec<Vec<(f64, bool)>>,
    tp_pairs: Vec<(Box3D, Box3D)>,
}

/// Accumulates scenes and produces a [`MetricReport`]. Matching never
/// crosses scene boundaries.
#[derive(Debug, Clone)]
pub struct Evaluator {
    cfg: EvalConfig,
    classes: BTreeMap<usize, ClassAccumulator>,
}

impl Evaluator {
    pub fn new(cfg: EvalConfig) -> Self {
        Self {
            cfg,
            classes: BTreeMap::new(),
        }
    }

    pub fn add_scene(&mut self, preds: &[Box3D], gts: &[Box3D]) {
        let n_thr = self.cfg.thresholds.len();
        for g in gts {
            let acc = self.classes.entry(g.class_id).or_default();
            acc.num_gt += 1;
        }
        for p in preds {
            self.classes.entry(p.class_id).or_default().num_pred += 1;
        }
        for (t, &thr) in self.cfg.thresholds.iter().enumerate() {
            let res = match_detections(preds, gts, thr);
            let mut tp_flag = vec![false; preds.len()];
            for m in &res.matches {
                tp_flag[m.pred] = true;
            }
            for (i, p) in preds.iter().enumerate() {
                let acc = self.classes.entry(p.class_id).or_default();
                if acc.scored.len() < n_thr {
                    acc.scored.resize_with(n_thr, Vec::new);
                }
                acc.scored[t].push((p.score, tp_flag[i]));
            }
        }
        for m in match_detections(preds, gts, self.cfg.tp_threshold).matches {
            let acc = self.classes.entry(preds[m.pred].class_id).or_default();
            acc.tp_pairs.push((preds[m.pred], gts[m.gt]));
        }
    }

    pub fn finish(&self) -> MetricReport {
        let n_thr = self.cfg.thresholds.len();
        let classes: Vec<ClassMetrics> = self
            .classes
            .iter()
            .filter(|(_, acc)| acc.num_gt > 0)
            .map(|(&class_id, acc)| {
                let ap: Vec<f64> = (0..n_thr)
                    .map(|t| {
                        let scored = acc.scored.get(t).map(Vec::as_slice).unwrap_or(&[]);
                        average_precision(scored, acc.num_gt)
                    })
                    .collect();
                let mean_ap = mean(&ap).unwrap_or(0.0);
                ClassMetrics {
                    class_id,
                    num_gt: acc.num_gt,
                    num_pred: acc.num_pred,
                    ap,
                    mean_ap,
                    errors: tp_errors(&acc.tp_pairs),
                }
            })
            .collect();

        let all_ap: Vec<f64> = classes.iter().flat_map(|c| c.ap.iter().copied()).collect();
        let map = mean(&all_ap).unwrap_or(0.0);
        let pick = |f: &dyn Fn(&TpErrors) -> Option<f64>| -> f64 {
            let vals: Vec<f64> = classes.iter().filter_map(|c| f(&c.errors)).collect();
            mean(&vals).unwrap_or(1.0)
        };
        let mate = pick(&|e| Some(e.ate));
        let mase = pick(&|e| Some(e.ase));
        let maoe = pick(&|e| Some(e.aoe));
        let mave = pick(&|e| Some(e.ave));
        let maae = pick(&|e| e.aae);
        let nds = nds(map, &[mate, mase, maoe, mave, maae]);
        MetricReport {
            thresholds: self.cfg.thresholds.clone(),
            classes,
            map,
            mate,
            mase,
            maoe,
            mave,
            maae,
            nds,
        }
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Largest possible orientation error, radians.
pub const MAX_ORIENTATION_ERROR: f64 = PI;
