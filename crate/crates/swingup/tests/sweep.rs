use swingup::collective::DressedState;
use swingup::dynamics::EvolveOptions;
use swingup::presets::{self, T_END};
use swingup::sweep::{best_cell, final_state, run_heatmap, Axis, SweepGrid, SweepParam};

fn opts() -> EvolveOptions {
    EvolveOptions::default()
}

#[test]
fn bright_state_optimum_sits_in_the_top_percentile() {
    let grid = SweepGrid {
        axis1: Axis::new(SweepParam::Alpha1Pi, 20.0, 100.0, 64),
        axis2: Axis::new(SweepParam::Alpha2Pi, 40.0, 120.0, 64),
        fixed: presets::plus_target(0.01),
        targets: vec![DressedState::Plus, DressedState::G],
        t_end: T_END,
    };
    let map = run_heatmap(&grid, &opts()).unwrap();
    assert!(map.failures.is_empty());
    for row in &map.values {
        assert!(row.iter().all(|v| (0.0..=1.0).contains(&v.unwrap())));
    }
    let (i, j) = (grid.axis1.nearest(68.25), grid.axis2.nearest(59.05));
    let quoted = map.get(DressedState::Plus, i, j).unwrap();
    assert!(quoted > 0.91, "{quoted}");
    let better = map.values[0].iter().filter(|v| v.unwrap() > quoted).count();
    assert!(better as f64 <= 0.01 * 4096.0, "{better} cells beat the quoted optimum");

    let best = best_cell(&map, DressedState::Plus).unwrap();
    assert!(best.value >= 0.91);
    let rerun = final_state(&grid.config_at(best.i, best.j), T_END, &opts()).unwrap();
    assert!((rerun.plus - best.value).abs() <= 1e-8);
}

#[test]
fn dark_state_optimum_exceeds_ninety_nine_percent() {
    // 16x16 block of the 64x64 grid over [20, 80]^2 around the quoted optimum.
    let h = 60.0 / 63.0;
    let grid = SweepGrid {
        axis1: Axis::new(SweepParam::Alpha1Pi, 20.0, 20.0 + 15.0 * h, 16),
        axis2: Axis::new(SweepParam::Alpha2Pi, 20.0 + 13.0 * h, 20.0 + 28.0 * h, 16),
        fixed: presets::minus_target(0.01),
        targets: vec![DressedState::Minus],
        t_end: T_END,
    };
    let map = run_heatmap(&grid, &opts()).unwrap();
    let (i, j) = (grid.axis1.nearest(20.0), grid.axis2.nearest(40.0));
    assert!((grid.axis2.values()[j] - 40.0).abs() < 1e-9);
    let quoted = map.get(DressedState::Minus, i, j).unwrap();
    assert!(quoted > 0.99, "{quoted}");
}

#[test]
fn heatmap_ignores_execution_order() {
    let grid = SweepGrid {
        axis1: Axis::new(SweepParam::Tau, 0.0, 0.006, 5),
        axis2: Axis::new(SweepParam::Theta, -3.0, 3.0, 5),
        fixed: presets::minus_target(0.01),
        targets: vec![DressedState::Minus, DressedState::Plus],
        t_end: T_END,
    };
    let map = run_heatmap(&grid, &opts()).unwrap();
    for k in (0..25).rev() {
        let (i, j) = (k / 5, k % 5);
        let p = final_state(&grid.config_at(i, j), T_END, &opts()).unwrap();
        assert_eq!(map.get(DressedState::Minus, i, j), Some(p.minus));
        assert_eq!(map.get(DressedState::Plus, i, j), Some(p.plus));
    }
}

#[test]
fn failed_points_are_recorded_not_fatal() {
    let grid = SweepGrid {
        axis1: Axis::new(SweepParam::DOverLambda, 0.0, 0.01, 2),
        axis2: Axis::new(SweepParam::Alpha1Pi, 20.0, 30.0, 2),
        fixed: presets::plus_target(0.01),
        targets: vec![DressedState::Plus],
        t_end: T_END,
    };
    let map = run_heatmap(&grid, &opts()).unwrap();
    assert_eq!(map.failures.len(), 2);
    assert!(map.get(DressedState::Plus, 0, 0).is_none());
    assert!(map.get(DressedState::Plus, 1, 1).is_some());
}
