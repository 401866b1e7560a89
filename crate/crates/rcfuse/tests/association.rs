mod common;

use common::{oracle_associate, random_association_case};
use rcfuse_core::frustum::{associate_with, multi_claim_count};

#[test]
fn associate_agrees_with_brute_force_reference() {
    for seed in 0..150 {
        let case = random_association_case(10_000 + seed, 20, 150);
        let got = associate_with(&case.dets, &case.pillars, &case.cam, &case.opts).unwrap();
        let want = oracle_associate(&case.dets, &case.pillars, &case.cam, &case.opts);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.pillar_index, *w, "seed {seed}, object {}", g.object_index);
            assert_eq!(g.match_depth.is_some(), w.is_some());
        }
        assert!(multi_claim_count(&got) <= got.len());
    }
}

#[test]
fn reference_cases_actually_associate() {
    let hits: usize = (0..50)
        .map(|s| {
            let case = random_association_case(s, 20, 150);
            oracle_associate(&case.dets, &case.pillars, &case.cam, &case.opts)
                .iter()
                .filter(|a| a.is_some())
                .count()
        })
        .sum();
    assert!(hits > 50, "random cases too sparse to exercise association: {hits}");
}
