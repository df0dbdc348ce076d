mod common;

use common::{naive_f1, naive_max_intersection, random_grid, random_in_zone_transform, random_pair};
use gridworld_core::scoring::{f1, is_segment_complete, max_intersection, transform_grid, Transform};
use gridworld_core::voxel::{BlockId, Grid, GridCoord};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_naive_scan_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let (built, target) = random_pair(&mut rng);
        let fast = max_intersection(&built, &target);
        let (n, t) = naive_max_intersection(&built, &target);
        assert_eq!(fast.intersection, n);
        assert_eq!(fast.best, t);
    }
}

#[test]
fn empty_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_grid(&mut rng, 10, 3);
    for (b, t) in [(Grid::empty(), g.clone()), (g.clone(), Grid::empty()), (Grid::empty(), Grid::empty())] {
        let r = max_intersection(&b, &t);
        assert_eq!(r.intersection, 0);
        assert_eq!(r.best, Transform { rotation: 0, dx: -10, dz: -10 });
    }
    assert_eq!(f1(&Grid::empty(), &Grid::empty()).f1, 1.0);
    assert_eq!(f1(&g, &Grid::empty()).f1, 0.0);
}

#[test]
fn colors_must_match() {
    let mut a = Grid::empty();
    let mut b = Grid::empty();
    a.set_block(GridCoord::new(3, 0, 3).unwrap(), BlockId::BLUE);
    b.set_block(GridCoord::new(3, 0, 3).unwrap(), BlockId::RED);
    assert_eq!(max_intersection(&a, &b).intersection, 0);
}

#[test]
fn heights_are_never_shifted() {
    let mut a = Grid::empty();
    let mut b = Grid::empty();
    a.set_block(GridCoord::new(3, 0, 3).unwrap(), BlockId::BLUE);
    b.set_block(GridCoord::new(3, 1, 3).unwrap(), BlockId::BLUE);
    assert_eq!(max_intersection(&a, &b).intersection, 0);
}

#[test]
fn transformed_target_scores_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let target = random_grid(&mut rng, 25, 6);
        let (_, _, _, moved) = random_in_zone_transform(&mut rng, &target);
        assert_eq!(max_intersection(&moved, &target).intersection, target.block_count());
        assert!(is_segment_complete(&moved, &target));
        assert_eq!(f1(&moved, &target).f1, 1.0);
    }
}

#[test]
fn library_transform_agrees_with_test_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_grid(&mut rng, 15, 6);
    for t in Transform::all().step_by(37) {
        let lib = transform_grid(&g, t);
        if let Some(ours) = common::move_grid(&g, t.rotation, t.dx as i32, t.dz as i32) {
            assert_eq!(lib, ours, "{t:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersection_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_pair(&mut rng);
        let ab = max_intersection(&a, &b).intersection;
        prop_assert_eq!(ab, max_intersection(&b, &a).intersection);
        prop_assert!(ab <= a.block_count().min(b.block_count()));
    }

    #[test]
    fn adding_a_block_never_lowers_intersection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut a, b) = random_pair(&mut rng);
        let before = max_intersection(&a, &b).intersection;
        let extra = random_grid(&mut rng, 1, 6);
        for (c, id) in extra.blocks() {
            if a.get(c).is_air() {
                a.set_block(c, id);
            }
        }
        let after = max_intersection(&a, &b).intersection;
        prop_assert!(after >= before && after <= before + 1);
    }

    #[test]
    fn f1_matches_reference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_pair(&mut rng);
        let got = f1(&a, &b);
        let want = naive_f1(&a, &b);
        prop_assert!((got.f1 - want).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&got.precision) && (0.0..=1.0).contains(&got.recall));
    }
}
