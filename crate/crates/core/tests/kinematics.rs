use std::f64::consts::PI;

use simbiped_core::kinematics::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn geom() -> RobotGeometry {
    RobotGeometry { h_f: 1.11 - 1.08, ..RobotGeometry::default() }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Knee angle by bisection on the hip-to-ankle distance of the chain.
fn knee_by_bisection(span: f64, l: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // distance grows monotonically with the knee angle
        let d = (2.0 * l * l * (1.0 - mid.cos())).sqrt();
        if d < span {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn default_geometry_is_valid() {
    RobotGeometry::default().validate().unwrap();
    RobotGeometry::point_feet().validate().unwrap();
    assert_relative_eq!(RobotGeometry::default().total_mass(), 0.676, epsilon = 1e-12);
    assert_relative_eq!(RobotGeometry::point_feet().h_c, 1.026, epsilon = 1e-12);
    let bad = RobotGeometry { l_shin: 0.5, ..RobotGeometry::default() };
    assert!(bad.validate().is_err());
    let tall = RobotGeometry { h_c: 1.3, ..RobotGeometry::default() };
    assert!(tall.validate().is_err());
}

#[test]
fn support_pose_upright() {
    let g = geom();
    let a = ik_support(0.0, &g).unwrap();
    assert_relative_eq!(a.theta, 2.489_826_739_147_7, epsilon = 1e-9);
    assert_relative_eq!(a.gamma, 0.325_882_957_221_0, epsilon = 1e-9);
    assert_relative_eq!(a.theta, knee_by_bisection(1.08, 0.57), epsilon = 1e-12);
    // level foot: ankle angle cancels the shin tilt
    assert_relative_eq!(a.xi, a.gamma, epsilon = 1e-12);
    assert_relative_eq!(a.foot_pitch(), 0.0, epsilon = 1e-12);
    assert_relative_eq!(
        support_ankle_printed(a.theta, a.gamma),
        0.977_648_871_663_1,
        epsilon = 1e-9
    );
}

#[test]
fn printed_ankle_expressions_simplify() {
    for (theta, gamma) in [(2.4, 0.3), (1.7, -0.2), (PI, 0.0), (0.9, 1.1)] {
        assert_relative_eq!(
            support_ankle_printed(theta, gamma),
            (PI - theta) + gamma,
            epsilon = 1e-12
        );
    }
    let (theta, lv, h) = (2.2, 0.95, 0.8);
    assert_relative_eq!(
        swing_ankle_printed(theta, lv, h),
        (PI - theta) / 2.0 - (h / lv).asin(),
        epsilon = 1e-12
    );
}

#[test]
fn knee_special_spans() {
    let g = RobotGeometry::default();
    let l = g.leg_length();
    assert_relative_eq!(knee_for_span(l * 2f64.sqrt(), l), PI / 2.0, epsilon = 1e-12);
    assert_relative_eq!(knee_for_span(2.0 * l, l), PI, epsilon = 1e-12);
}

#[test]
fn support_reach_and_geometry_errors() {
    let g = RobotGeometry::default();
    assert!(matches!(ik_support(0.8, &g), Err(IkError::OutOfReach { .. })));
    let low = RobotGeometry { h_c: 0.05, h_f: 0.0933, ..g };
    assert!(matches!(ik_support(0.0, &low), Err(IkError::Geometry(_))));
    assert!(matches!(ik_swing(0.0, (0.0, 1.2), &g), Err(IkError::Geometry(_))));
    assert!(matches!(ik_swing(0.0, (0.9, 0.0), &g), Err(IkError::OutOfReach { .. })));
}

#[test]
fn fk_straight_leg() {
    let g = RobotGeometry::default();
    let p = fk_leg(&LegAngles::new(0.0, PI, 0.0), &g, (0.0, 0.0));
    assert_relative_eq!(p.ankle.0, 0.0, epsilon = 1e-15);
    assert_relative_eq!(p.ankle.1, -2.0 * g.leg_length(), epsilon = 1e-15);
    assert_relative_eq!(p.sole.1, -2.0 * g.leg_length() - g.h_f, epsilon = 1e-15);
}

#[test]
fn support_fk_places_sole_under_hip_offset() {
    let g = RobotGeometry::default();
    for x_t in [-0.3, -0.1, 0.0, 0.173, 0.25, 0.4] {
        let a = ik_support(x_t, &g).unwrap();
        let p = fk_leg(&a, &g, (x_t, g.h_c));
        assert!(dist(p.sole, (0.0, 0.0)) < 1e-12, "x_t={x_t} sole={:?}", p.sole);
        assert!(dist(p.ankle, (0.0, g.h_f)) < 1e-12);
        assert_relative_eq!(dist(p.knee, (x_t, g.h_c)), g.l_thigh, epsilon = 1e-12);
        // knee flexes forward, never backwards
        assert!(p.knee.0 > x_t.min(0.0) - 1e-12);
    }
}

#[test]
fn swing_matches_support_under_hip() {
    let g = RobotGeometry::default();
    for x_t in [-0.2, 0.0, 0.15] {
        let s = ik_support(x_t, &g).unwrap();
        let w = ik_swing(x_t, (0.0, 0.0), &g).unwrap();
        assert_relative_eq!(s.gamma, w.gamma, epsilon = 1e-12);
        assert_relative_eq!(s.theta, w.theta, epsilon = 1e-12);
        assert_relative_eq!(s.xi, w.xi, epsilon = 1e-12);
    }
}

#[test]
fn swing_apex_flexes_knee() {
    let g = RobotGeometry::default();
    let touchdown = ik_swing(0.0, (0.1076, 0.0), &g).unwrap();
    let apex = ik_swing(0.0, (0.0, 0.222), &g).unwrap();
    assert!(apex.theta < touchdown.theta);
    let p = fk_leg(&touchdown, &g, (0.0, g.h_c));
    assert!(dist(p.sole, (0.1076, 0.0)) < 1e-9);
}

#[test]
fn clamp_examples() {
    let lim = JointLimits::default();
    let c = clamp_joint_limits(LegAngles::new(0.1, PI + 0.1, 0.2), &lim);
    assert_eq!(c.theta, PI);
    let inside = LegAngles::new(0.3, 2.0, -0.4);
    assert_eq!(clamp_joint_limits(inside, &lim), inside);
    let loose = JointLimits { knee: (0.0, 4.0), ..lim };
    assert_eq!(clamp_joint_limits(LegAngles::new(0.0, 3.5, 0.0), &loose).theta, PI);
}

proptest! {
    #[test]
    fn support_round_trip(x_t in -0.45f64..0.45) {
        let g = RobotGeometry::default();
        let a = ik_support(x_t, &g).unwrap();
        let p = fk_leg(&a, &g, (x_t, g.h_c));
        prop_assert!(dist(p.sole, (0.0, 0.0)) < 1e-9);
        prop_assert!((x_t.hypot(g.h_c - p.ankle.1) - x_t.hypot(g.h_c - g.h_f)).abs() < 1e-12);
    }

    #[test]
    fn swing_round_trip(x_t in -0.3f64..0.3, dx in -0.5f64..0.5, z in 0.0f64..0.35) {
        let g = RobotGeometry::default();
        let target = (x_t + dx, z);
        prop_assume!(dx.hypot(g.h_c - z - g.h_f) <= g.max_reach());
        let a = ik_swing(x_t, target, &g).unwrap();
        let p = fk_leg(&a, &g, (x_t, g.h_c));
        prop_assert!(dist(p.sole, target) < 1e-9);
        prop_assert!(a.foot_pitch().abs() < 1e-12);
    }

    #[test]
    fn ik_is_continuous(x_t in -0.4f64..0.4) {
        let g = RobotGeometry::default();
        let a = ik_support(x_t, &g).unwrap();
        let b = ik_support(x_t + 1e-6, &g).unwrap();
        prop_assert!((a.gamma - b.gamma).abs() < 1e-3);
        prop_assert!((a.theta - b.theta).abs() < 1e-3);
        prop_assert!((a.xi - b.xi).abs() < 1e-3);
    }

    #[test]
    fn clamp_caps_knee_and_is_idempotent(g in -4.0f64..4.0, t in -1.0f64..7.0, x in -4.0f64..4.0) {
        let lim = JointLimits::default();
        let once = clamp_joint_limits(LegAngles::new(g, t, x), &lim);
        prop_assert!(once.theta <= PI);
        prop_assert_eq!(clamp_joint_limits(once, &lim), once);
    }
}
