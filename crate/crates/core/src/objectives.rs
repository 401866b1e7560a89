//! Training objectives as plain functions of predictions and targets, each
//! paired with its analytic gradient with respect to the predictions.
//!
//! Probabilities are clamped to `[EPS, 1 - EPS]` before any logarithm.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

pub const EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 4.0,
        }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, actual })
    }
}

#[inline]
fn clamp_prob(p: f64) -> f64 {
    p.clamp(EPS, 1.0 - EPS)
}

/// Penalty-reduced focal loss over a heatmap. Cells with target exactly 1 are
/// positives; the sum is divided by `max(1, #positives)`.
pub fn focal_loss(pred: &[f64], gt: &[f64], cfg: &LossConfig) -> Result<f64> {
    check_len(gt.len(), pred.len())?;
    let (a, b) = (cfg.alpha, cfg.beta);
    let mut sum = 0.0;
    let mut positives = 0usize;
    for (&p, &y) in pred.iter().zip(gt) {
        let p = clamp_prob(p);
        if y == 1.0 {
            positives += 1;
            sum += math::powf(1.0 - p, a) * math::ln(p);
        } else {
            sum += math::powf(1.0 - y, b) * math::powf(p, a) * math::ln(1.0 - p);
        }
    }
    Ok(-sum / positives.max(1) as f64)
}

/// Gradient of [`focal_loss`] with respect to each prediction, evaluated at
/// the clamped value.
pub fn focal_loss_grad(pred: &[f64], gt: &[f64], cfg: &LossConfig) -> Result<Vec<f64>> {
    check_len(gt.len(), pred.len())?;
    let (a, b) = (cfg.alpha, cfg.beta);
    let n = gt.iter().filter(|&&y| y == 1.0).count().max(1) as f64;
    Ok(pred
        .iter()
        .zip(gt)
        .map(|(&p, &y)| {
            let p = clamp_prob(p);
            let dt = if y == 1.0 {
                -a * math::powf(1.0 - p, a - 1.0) * math::ln(p) + math::powf(1.0 - p, a) / p
            } else {
                math::powf(1.0 - y, b)
                    * (a * math::powf(p, a - 1.0) * math::ln(1.0 - p) - math::powf(p, a) / (1.0 - p))
            };
            -dt / n
        })
        .collect())
}

/// Mean absolute error over the masked entries; 0 when nothing is masked in.
pub fn l1_loss(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<f64> {
    check_len(pred.len(), target.len())?;
    check_len(pred.len(), mask.len())?;
    let (sum, n) = pred
        .iter()
        .zip(target)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), ((p, t), _)| (s + (p - t).abs(), n + 1));
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

pub fn l1_loss_grad(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    check_len(pred.len(), target.len())?;
    check_len(pred.len(), mask.len())?;
    let n = mask.iter().filter(|&&m| m).count();
    if n == 0 {
        return Ok(vec![0.0; pred.len()]);
    }
    Ok(pred
        .iter()
        .zip(target)
        .zip(mask)
        .map(|((p, t), &m)| {
            if !m || p == t {
                0.0
            } else if p > t {
                1.0 / n as f64
            } else {
                -1.0 / n as f64
            }
        })
        .collect())
}

/// Mean binary cross-entropy over the masked entries; 0 when nothing is masked in.
pub fn bce_loss(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<f64> {
    check_len(pred.len(), target.len())?;
    check_len(pred.len(), mask.len())?;
    let (sum, n) = pred
        .iter()
        .zip(target)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), ((&p, &t), _)| {
            let p = clamp_prob(p);
            (s - (t * math::ln(p) + (1.0 - t) * math::ln(1.0 - p)), n + 1)
        });
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

pub fn bce_loss_grad(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    check_len(pred.len(), target.len())?;
    check_len(pred.len(), mask.len())?;
    let n = mask.iter().filter(|&&m| m).count().max(1) as f64;
    Ok(pred
        .iter()
        .zip(target)
        .zip(mask)
        .map(|((&p, &t), &m)| {
            if !m {
                return 0.0;
            }
            let p = clamp_prob(p);
            (-t / p + (1.0 - t) / (1.0 - p)) / n
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn focal_examples() {
        let cfg = LossConfig::default();
        let l = focal_loss(&[0.5], &[1.0], &cfg).unwrap();
        assert_abs_diff_eq!(l, -0.25 * math::ln(0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(l, 0.1733, epsilon = 1e-4);
        let l = focal_loss(&[0.5], &[0.8], &cfg).unwrap();
        assert_abs_diff_eq!(l, -(0.2f64.powi(4)) * 0.25 * math::ln(0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(l, 2.77e-4, epsilon = 1e-6);
    }

    #[test]
    fn focal_perfect_prediction_is_near_zero() {
        let gt = [1.0, 0.0, 0.0, 1.0, 0.0];
        let pred = gt.map(|y| if y == 1.0 { 1.0 - EPS } else { EPS });
        let l = focal_loss(&pred, &gt, &LossConfig::default()).unwrap();
        assert!(l >= 0.0 && l <= 2.0 * EPS * gt.len() as f64);
        assert!(matches!(
            focal_loss(&[0.5], &[1.0, 0.0], &LossConfig::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_loss(&[1.0, 2.0], &[1.0, 2.0], &[true, true]).unwrap(), 0.0);
        assert_eq!(l1_loss(&[1.0, 2.0], &[0.0, 0.0], &[true, true]).unwrap(), 1.5);
        assert_eq!(l1_loss(&[1.0, 2.0], &[0.0, 0.0], &[false, false]).unwrap(), 0.0);
        assert!(l1_loss(&[1.0], &[0.0], &[true, true]).is_err());
    }

    #[test]
    fn bce_examples() {
        let m = [true];
        assert!(bce_loss(&[EPS], &[0.0], &m).unwrap() < 1e-6);
        assert!(bce_loss(&[1.0 - EPS], &[1.0], &m).unwrap() < 1e-6);
        for t in [0.0, 1.0] {
            assert_abs_diff_eq!(bce_loss(&[0.5], &[t], &m).unwrap(), core::f64::consts::LN_2, epsilon = 1e-15);
        }
        let a = bce_loss(&[0.3], &[1.0], &m).unwrap();
        let b = bce_loss(&[0.7], &[0.0], &m).unwrap();
        assert_abs_diff_eq!(a, -math::ln(0.3), epsilon = 1e-15);
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn focal_non_negative_and_permutation_invariant(
            cells in proptest::collection::vec((0.01..0.99f64, 0.0..1.0f64, any::<bool>()), 1..40),
            rot in 0usize..40,
        ) {
            let pred: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let gt: Vec<f64> = cells.iter().map(|c| if c.2 { 1.0 } else { c.1 * 0.99 }).collect();
            let cfg = LossConfig::default();
            let l = focal_loss(&pred, &gt, &cfg).unwrap();
            prop_assert!(l >= 0.0);
            let k = rot % pred.len();
            let (mut p2, mut g2) = (pred.clone(), gt.clone());
            p2.rotate_left(k);
            g2.rotate_left(k);
            let l2 = focal_loss(&p2, &g2, &cfg).unwrap();
            prop_assert!((l - l2).abs() <= 1e-12 * l.max(1.0));
        }
    }
}
