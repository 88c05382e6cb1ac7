use clipflow_core::clipcore::{toy_arcfield_step, toy_semigroup_defect, toy_semigroup_scan, verify_clip_identities};
use clipflow_core::{clip, clip_high, clip_low, ClipBounds};
use proptest::prelude::*;

fn oracle(x: f64, a: f64, b: f64) -> f64 {
    if x < a {
        a
    } else if x > b {
        b
    } else {
        x
    }
}

fn bounds(a: f64, b: f64) -> ClipBounds {
    ClipBounds::new(a.min(b), a.max(b)).unwrap()
}

#[test]
fn worked_examples() {
    let unit = ClipBounds::UNIT;
    assert_eq!(clip(1.7, unit), 1.0);
    assert_eq!(clip(-0.3, unit), 0.0);
    assert_eq!(clip(0.42, unit), 0.42);
    assert_eq!(clip_low(-2.0, 0.0), 0.0);
    assert_eq!(clip_high(2.0, 1.0), 1.0);
    assert_eq!(clip(5.0, ClipBounds::new(0.5, 0.5).unwrap()), 0.5);
    assert!(ClipBounds::new(1.0, 0.0).is_err());
}

#[test]
fn identity_report_is_clean_and_reproducible() {
    let a = verify_clip_identities(20_000, 11).unwrap();
    let b = verify_clip_identities(20_000, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.all_passed(), "{}", a.to_csv());
    assert_eq!(a.checks.len(), 12);
    assert!(a.to_csv().starts_with("identity_name,samples,max_violation\n"));
    assert!(verify_clip_identities(0, 1).is_err());
}

#[test]
fn toy_arc_field() {
    assert_eq!(toy_arcfield_step(0.5, 0.25).unwrap(), 0.25);
    assert_eq!(toy_arcfield_step(0.5, 1.0).unwrap(), 0.0);
    assert_eq!(toy_semigroup_defect(0.3, 0.5, 0.5).unwrap(), 0.0);
    assert!(toy_arcfield_step(0.5, -0.1).is_err());
    assert_eq!(toy_semigroup_scan(10_000, 5), 0.0);
}

proptest! {
    #[test]
    fn clip_matches_branching_oracle(x in -1e6..1e6f64, a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let bd = bounds(a, b);
        prop_assert_eq!(clip(x, bd), oracle(x, bd.lower(), bd.upper()));
    }

    #[test]
    fn clip_is_idempotent_and_monotone(x in -20.0..20.0f64, y in -20.0..20.0f64, a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let bd = bounds(a, b);
        prop_assert_eq!(clip(clip(x, bd), bd), clip(x, bd));
        let (lo, hi) = (x.min(y), x.max(y));
        prop_assert!(clip(lo, bd) <= clip(hi, bd));
        prop_assert!((clip(x, bd) - clip(y, bd)).abs() <= (x - y).abs());
    }

    #[test]
    fn nesting_intersects_intervals(x in -20.0..20.0f64, a in -5.0..0.0f64, b in 0.0..5.0f64, c in -5.0..0.0f64, d in 0.0..5.0f64) {
        let inner = ClipBounds::new(a, b).unwrap();
        let outer = ClipBounds::new(c, d).unwrap();
        let both = ClipBounds::new(a.max(c), b.min(d)).unwrap();
        prop_assert_eq!(clip(clip(x, inner), outer), clip(x, both));
    }

    #[test]
    fn decomposition_and_shift(x in -20.0..20.0f64, y in -5.0..5.0f64, a in -5.0..0.0f64, b in 0.0..5.0f64) {
        let lhs = clip(x, ClipBounds::new(a, b).unwrap());
        prop_assert!((lhs - (clip_high(x, b) - clip_high(x, a) + a)).abs() <= 1e-12);
        let shifted = clip(x + y, ClipBounds::new(a, b).unwrap());
        let moved = clip(x, ClipBounds::new(a - y, b - y).unwrap()) + y;
        prop_assert!((shifted - moved).abs() <= 1e-12);
    }

    #[test]
    fn toy_semigroup_on_dyadic_lattice(x in -(1i64 << 24)..(1i64 << 24), s in 0i64..=(1 << 20), t in 0i64..=(1 << 20)) {
        let g = 1.0 / (1u64 << 20) as f64;
        prop_assert_eq!(toy_semigroup_defect(x as f64 * g, s as f64 * g, t as f64 * g).unwrap(), 0.0);
    }
}
