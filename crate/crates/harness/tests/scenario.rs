use simbiped::rigs::{build_rig, rig_joints, rig_setup, sine_target, RigJoint};
use simbiped::scenario::{steady_from, Outcome};
use simbiped::{run_scenario, ScenarioConfig, ScenarioId};
use simbiped_physics::Side;

fn short(id: ScenarioId, duration: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::preset(id);
    c.duration = duration;
    c
}

#[test]
fn one_record_per_tick() {
    for (id, d) in [(ScenarioId::TuneAnkle, 2.0), (ScenarioId::WalkFull, 1.0), (ScenarioId::TuneHipAir, 1.5)] {
        let out = run_scenario(&short(id, d)).unwrap();
        let expected = (d * 60.0) as i64;
        assert!((out.records.len() as i64 - expected).abs() <= 1, "{id}: {}", out.records.len());
        assert_eq!(out.summary.ticks, out.records.len());
        for (i, r) in out.records.iter().enumerate() {
            assert!((r.t - (i + 1) as f64 / 60.0).abs() < 1e-9);
        }
    }
}

#[test]
fn fall_ends_the_run() {
    let out = run_scenario(&ScenarioConfig::preset(ScenarioId::WalkPointFeet)).unwrap();
    assert!(out.summary.fell);
    assert_eq!(out.summary.outcome, Outcome::Fell);
    assert_eq!(out.summary.fall_time, Some(out.summary.time));
    assert!(out.records.len() < ScenarioConfig::preset(ScenarioId::WalkPointFeet).ticks());
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (id, d) in [(ScenarioId::WalkFull, 2.0), (ScenarioId::TuneKnee, 2.0)] {
        let mut paths = Vec::new();
        for k in 0..2 {
            let mut c = short(id, d);
            let p = dir.path().join(format!("{id}_{k}.csv"));
            c.output = Some(p.clone());
            run_scenario(&c).unwrap();
            paths.push(p);
        }
        assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap(), "{id}");
    }
}

#[test]
fn seed_jitters_the_start() {
    let mut a = short(ScenarioId::WalkFull, 0.1);
    let plain = run_scenario(&a).unwrap();
    a.seed = Some(11);
    let seeded = run_scenario(&a).unwrap();
    let again = run_scenario(&a).unwrap();
    assert_ne!(plain.records[0].com_x, seeded.records[0].com_x);
    assert_eq!(seeded.records, again.records);
}

#[test]
fn summary_counts_steps_as_exchanges() {
    let out = run_scenario(&short(ScenarioId::WalkFull, 1.0)).unwrap();
    let last = out.records.last().unwrap();
    assert_eq!(out.summary.steps, last.step_index);
    assert!(out.summary.steps >= 2);
}

#[test]
fn steady_run_detection() {
    assert_eq!(steady_from(&[0.0, 0.5, 0.55, 0.6, 0.6, 0.62, 0.61], 0.1, 5), Some(2));
    assert_eq!(steady_from(&[0.0, 0.5, 0.55], 0.1, 5), None);
    assert_eq!(steady_from(&[1.0; 6], 0.1, 5), Some(1));
    assert_eq!(steady_from(&[], 0.1, 5), None);
}

#[test]
fn rig_gravity_and_pins() {
    let air = rig_setup(ScenarioId::TuneHipAir).unwrap();
    assert_eq!(air.gravity, 0.0);
    assert!(air.pinned.torso && !air.pinned.feet);
    let ground = rig_setup(ScenarioId::TuneHipGround).unwrap();
    assert!(ground.gravity < 0.0 && ground.pinned.feet);
    for id in [ScenarioId::TuneKnee, ScenarioId::TuneAnkle] {
        assert!(rig_setup(id).unwrap().gravity > 0.0, "{id} hangs upside down");
    }
    assert!(rig_setup(ScenarioId::WalkFull).is_none());
}

#[test]
fn rig_sine_shape() {
    let c = ScenarioConfig::preset(ScenarioId::TuneKnee);
    assert_eq!(sine_target(&c, 1.0, 0.0), 1.0);
    assert!((sine_target(&c, 1.0, 0.5) - 1.5).abs() < 1e-12);
    assert!((sine_target(&c, 1.0, 1.5) - 0.5).abs() < 1e-12);
}

#[test]
fn rig_locks_the_other_joints() {
    for id in [ScenarioId::TuneHipAir, ScenarioId::TuneKnee, ScenarioId::TuneAnkle, ScenarioId::TuneHipGround] {
        let config = short(id, 2.0);
        let setup = rig_setup(id).unwrap();
        let robot = build_rig(&config, &setup).unwrap();
        let idx = |kind: RigJoint| match kind {
            RigJoint::Hip => 0,
            RigJoint::Knee => 1,
            RigJoint::Ankle => 2,
        };
        let start: Vec<_> = rig_joints(&robot, Side::Left)
            .into_iter()
            .map(|(k, j)| (k, robot.world.joint_readout(j).unwrap().0))
            .collect();
        let out = run_scenario(&config).unwrap();
        assert_eq!(out.summary.outcome, Outcome::Completed);
        for (kind, q0) in start {
            let q = out.records.last().unwrap().joints[idx(kind)].actual;
            if kind == setup.joint {
                assert!(out.records.iter().any(|r| (r.joints[idx(kind)].actual - q0).abs() > 0.1), "{id} {kind:?}");
            } else {
                assert!((q - q0).abs() < 0.02, "{id} {kind:?}: {q0} -> {q}");
            }
        }
    }
}

#[test]
fn rig_error_uses_only_the_window() {
    let mut c = short(ScenarioId::TuneAnkle, 2.0);
    assert!(run_scenario(&c).unwrap().summary.rms_error.is_nan());
    c.duration = 3.0;
    let rms = run_scenario(&c).unwrap().summary.rms_error;
    assert!(rms.is_finite() && rms >= 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(Outcome::Completed.exit_code(), 0);
    assert_eq!(Outcome::Fell.exit_code(), 2);
    assert_eq!(Outcome::Unstable.exit_code(), 3);
}
