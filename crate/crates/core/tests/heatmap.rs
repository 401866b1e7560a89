use proptest::prelude::*;
use rcfuse_core::features::{draw_gaussian, gaussian_sigma, quantize, render_gt_heatmap, HeatmapAnnotation, Plane};
use rcfuse_core::geometry::Box2D;

const W: usize = 48;
const H: usize = 32;
const STRIDE: usize = 4;

fn annotation() -> impl Strategy<Value = HeatmapAnnotation> {
    (0.0..(W * STRIDE) as f64, 0.0..(H * STRIDE) as f64, 2.0f64..120.0, 2.0f64..80.0, 0usize..2).prop_map(
        |(u, v, w, h, class_id)| HeatmapAnnotation {
            center_px: [u, v],
            class_id,
            box2d: Box2D::new(u, v, w, h),
        },
    )
}

fn render(a: &[HeatmapAnnotation]) -> Vec<Plane> {
    render_gt_heatmap(a, W, H, 2, STRIDE, 0.7)
}

proptest! {
    #[test]
    fn single_object_is_an_isotropic_gaussian(a in annotation()) {
        let plane = &render(&[a])[a.class_id];
        let [cx, cy] = quantize(a.center_px, STRIDE);
        let s = gaussian_sigma(a.box2d.w / STRIDE as f64, a.box2d.h / STRIDE as f64, 0.7);
        prop_assert_eq!(plane.get(cx as usize, cy as usize), 1.0);
        for y in 0..H {
            for x in 0..W {
                let d2 = ((x as i64 - cx).pow(2) + (y as i64 - cy).pow(2)) as f64;
                prop_assert!((plane.get(x, y) - (-d2 / (2.0 * s * s)).exp()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn overlapping_objects_combine_by_max(a in annotation(), b in annotation()) {
        let both = render(&[a, b]);
        let (pa, pb) = (render(&[a]), render(&[b]));
        for c in 0..2 {
            for (i, v) in both[c].data().iter().enumerate() {
                prop_assert_eq!(*v, pa[c].data()[i].max(pb[c].data()[i]));
            }
        }
    }

    #[test]
    fn order_of_annotations_does_not_matter(a in annotation(), b in annotation()) {
        prop_assert_eq!(render(&[a, b]), render(&[b, a]));
    }

    #[test]
    fn one_sigma_away_is_exp_minus_half(sigma in 1usize..8, cx in 8i64..40, cy in 8i64..24) {
        let mut plane = Plane::zeros(W, H);
        draw_gaussian(&mut plane, [cx, cy], sigma as f64);
        let x = (cx as usize + sigma).min(W - 1);
        if x == cx as usize + sigma {
            prop_assert!((plane.get(x, cy as usize) - (-0.5f64).exp()).abs() <= 1e-9);
        }
    }

    #[test]
    fn values_decay_with_distance(a in annotation()) {
        let plane = &render(&[a])[a.class_id];
        let [cx, cy] = quantize(a.center_px, STRIDE);
        let mut by_distance: Vec<(i64, f64)> = (0..H)
            .flat_map(|y| (0..W).map(move |x| (x, y)))
            .map(|(x, y)| ((x as i64 - cx).pow(2) + (y as i64 - cy).pow(2), plane.get(x, y)))
            .collect();
        by_distance.sort_by(|p, q| p.0.cmp(&q.0));
        for pair in by_distance.windows(2) {
            if pair[0].0 < pair[1].0 {
                prop_assert!(pair[1].1 <= pair[0].1);
            } else {
                prop_assert_eq!(pair[0].1, pair[1].1);
            }
        }
    }
}
