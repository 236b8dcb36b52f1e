use hvpopt_harness::fit::{median, SlopeFit};
use proptest::prelude::*;

#[test]
fn median_examples() {
    assert_eq!(median(&[]), None);
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    assert_eq!(median(&[1.0, f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
    assert_eq!(median(&[f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
    assert_eq!(median(&[1.0, f64::NAN]), None);
}

#[test]
fn degenerate_fits() {
    assert!(SlopeFit::fit(&[(1.0, 2.0)]).is_none());
    assert!(SlopeFit::fit(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
}

proptest! {
    #[test]
    fn exact_lines_are_recovered(slope in -10.0f64..10.0, icpt in -10.0f64..10.0, xs in prop::collection::btree_set(-100i32..100, 2..20)) {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x as f64 * 0.1, slope * x as f64 * 0.1 + icpt)).collect();
        let f = SlopeFit::fit(&pts).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.intercept - icpt).abs() < 1e-8);
        prop_assert!(f.r_squared > 1.0 - 1e-9);
        prop_assert_eq!(f.points, pts.len());
    }

    #[test]
    fn r_squared_in_unit_interval(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)) {
        if let Some(f) = SlopeFit::fit(&pts) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f.r_squared));
        }
    }

    #[test]
    fn median_splits_the_sample(xs in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let m = median(&xs).unwrap();
        let below = xs.iter().filter(|&&x| x <= m).count();
        let above = xs.iter().filter(|&&x| x >= m).count();
        prop_assert!(2 * below >= xs.len() && 2 * above >= xs.len());
    }
}
