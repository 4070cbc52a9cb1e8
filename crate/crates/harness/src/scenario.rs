//! Runs one configured scenario end to end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use simbiped_core::control::pd_torque;
use simbiped_core::kinematics::{JointLimits, RobotGeometry};
use simbiped_physics::{build_robot, FeetKind, InitialPose, MotorLimits, PhysicsError, Robot, Side, WorldConfig};

use crate::config::{ScenarioConfig, ScenarioId};
use crate::rigs::{build_rig, rig_setup, sine_target, RigJoint, RigSetup};
use crate::telemetry::{write_telemetry, JointSample, TelemetryRecord};
use crate::walker::{detect_fall, joint_controllers, walker_tick, AnkleMode, WalkerConfig, WalkerEvent, WalkerState};
use crate::HarnessError;

/// Half-width of the seeded initial-offset jitter (m).
pub const POSE_JITTER: f64 = 0.005;

/// Steps excluded from the steady-gait statistics.
pub const SETTLING_STEPS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Ran for the full duration or reached the distance target.
    Completed,
    Fell,
    Unstable,
}

impl Outcome {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Completed => 0,
            Outcome::Fell => 2,
            Outcome::Unstable => 3,
        }
    }
}

/// Run statistics. Steps are support exchanges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: ScenarioId,
    pub outcome: Outcome,
    pub ticks: usize,
    /// Simulated time covered (s).
    pub time: f64,
    pub steps: u64,
    pub fell: bool,
    pub fall_time: Option<f64>,
    pub instability: Option<String>,
    /// CoM displacement along x (m).
    pub distance: f64,
    /// Mean CoM speed after the first five steps (m/s).
    pub mean_velocity: Option<f64>,
    pub max_velocity: f64,
    /// Root-mean-square of desired minus actual joint angle (rad). For rigs,
    /// only the exercised joints inside the scoring window.
    pub rms_error: f64,
    /// Step index at which five consecutive fall-free steps were completed.
    pub first_fall_free_streak: Option<u64>,
    /// First step from which five consecutive steps start within 0.1 m/s
    /// of the previous step's start speed.
    pub steps_to_steady: Option<u64>,
    /// Hip (pendulum point) height range after the first five steps (m).
    pub hip_height_range: Option<(f64, f64)>,
    /// Whole-body CoM height range after the first five steps (m).
    pub com_height_range: Option<(f64, f64)>,
    pub reach_clamps: usize,
    pub early_contacts: usize,
    pub ik_holds: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub joint_names: Vec<String>,
    pub records: Vec<TelemetryRecord>,
    pub events: Vec<WalkerEvent>,
}

fn geometry_for(id: ScenarioId) -> (RobotGeometry, FeetKind) {
    match id {
        ScenarioId::WalkPointFeet => (RobotGeometry::point_feet(), FeetKind::None),
        _ => (RobotGeometry::default(), FeetKind::Actuated),
    }
}

/// Builds the standing robot of a walking scenario.
pub fn build_walker_robot(config: &ScenarioConfig) -> Result<Robot, HarnessError> {
    let (geom, feet) = geometry_for(config.scenario);
    let mut x_init = config.x_init;
    if let Some(seed) = config.seed {
        x_init += ChaCha8Rng::seed_from_u64(seed).gen_range(-POSE_JITTER..=POSE_JITTER);
    }
    let pose = InitialPose { x_init, swing_x: 0.0, support: Side::Left };
    let world = WorldConfig { dt: config.dt, ..WorldConfig::default() };
    let motors = MotorLimits { torque: config.torque_limit, ..MotorLimits::default() };
    Ok(build_robot(&geom, feet, &pose, world, &motors)?)
}

pub fn walker_config(config: &ScenarioConfig) -> WalkerConfig {
    let ankles = match config.scenario {
        ScenarioId::WalkPointFeet => AnkleMode::Absent,
        ScenarioId::WalkNoAnkle => AnkleMode::Hold(config.ankle_hold),
        _ => AnkleMode::Track,
    };
    WalkerConfig {
        gait: config.gait,
        theta_d: config.theta_d,
        gains: config.gains,
        dual_hip: config.dual_hip,
        ankles,
        filter_alpha: config.filter_alpha,
        torque_limit: config.torque_limit,
        dt: config.dt,
        limits: JointLimits::default(),
    }
}

fn record(robot: &Robot, t: f64, targets: &[f64], torques: &[f64], step_index: u64) -> TelemetryRecord {
    let com = robot.world.com_state();
    let joints = robot
        .joint_order()
        .iter()
        .zip(targets.iter().zip(torques))
        .map(|(j, (&desired, &torque))| {
            let (actual, velocity) = robot.world.joint_readout(*j).expect("robot joint");
            JointSample { desired, actual, velocity, torque }
        })
        .collect();
    TelemetryRecord {
        t,
        com_x: com.x,
        com_z: com.z,
        com_vx: com.vx,
        com_vz: com.vz,
        torso_pitch: robot.torso_pitch().0,
        joints,
        contacts: robot.foot_contacts(),
        step_index,
    }
}

fn range(acc: Option<(f64, f64)>, v: f64) -> Option<(f64, f64)> {
    Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
}

/// Runs the scenario and writes telemetry when `config.output` is set.
/// Physics divergence ends the run early with `Outcome::Unstable`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let out = match rig_setup(config.scenario) {
        Some(setup) => run_rig(config, &setup)?,
        None => run_walk(config)?,
    };
    if let Some(path) = &config.output {
        write_telemetry(path, &out.joint_names, &out.records)?;
    }
    Ok(out)
}

fn empty_summary(config: &ScenarioConfig) -> RunSummary {
    RunSummary {
        scenario: config.scenario,
        outcome: Outcome::Completed,
        ticks: 0,
        time: 0.0,
        steps: 0,
        fell: false,
        fall_time: None,
        instability: None,
        distance: 0.0,
        mean_velocity: None,
        max_velocity: 0.0,
        rms_error: 0.0,
        first_fall_free_streak: None,
        steps_to_steady: None,
        hip_height_range: None,
        com_height_range: None,
        reach_clamps: 0,
        early_contacts: 0,
        ik_holds: 0,
    }
}

fn instability(e: PhysicsError) -> Result<String, HarnessError> {
    match e {
        PhysicsError::Unstable { .. } => Ok(e.to_string()),
        other => Err(other.into()),
    }
}

fn run_walk(config: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    let mut robot = build_walker_robot(config)?;
    let mut walker = WalkerState::new(&robot, Side::Left, walker_config(config))?;
    let joint_names = robot.joint_names();
    let mut summary = empty_summary(config);
    let mut records = Vec::with_capacity(config.ticks());
    let x0 = robot.world.com_state().x;
    let mut settled: Option<(f64, f64)> = None;
    let mut start_speeds: Vec<f64> = vec![walker.start.x_dot];
    let (mut sq_err, mut n_err) = (0.0, 0usize);

    for tick in 0..config.ticks() {
        let t = tick as f64 * config.dt;
        let torques = walker_tick(&mut walker, &robot, t);
        if walker.step_index as usize >= start_speeds.len() {
            start_speeds.push(walker.start.x_dot);
        }
        let targets: Vec<f64> = robot
            .legs
            .iter()
            .zip(walker.targets)
            .flat_map(|(leg, tg)| {
                let mut v = vec![tg.hip, tg.knee];
                if leg.ankle.is_some() {
                    v.push(tg.ankle);
                }
                v
            })
            .collect();

        if let Err(e) = robot.world.step(&torques) {
            summary.instability = Some(instability(e)?);
            summary.outcome = Outcome::Unstable;
            break;
        }
        let now = t + config.dt;
        let rec = record(&robot, now, &targets, &torques, walker.step_index);
        for j in &rec.joints {
            sq_err += (j.desired - j.actual).powi(2);
            n_err += 1;
        }
        summary.ticks = tick + 1;
        summary.time = now;
        summary.max_velocity = summary.max_velocity.max(rec.com_vx);
        if walker.step_index >= SETTLING_STEPS {
            settled.get_or_insert((now, rec.com_x));
            summary.hip_height_range = range(summary.hip_height_range, robot.hip_position().y);
            summary.com_height_range = range(summary.com_height_range, rec.com_z);
        }
        let com_x = rec.com_x;
        records.push(rec);

        if detect_fall(&robot) {
            summary.fell = true;
            summary.fall_time = Some(now);
            summary.outcome = Outcome::Fell;
            break;
        }
        if com_x - x0 >= config.distance_target {
            break;
        }
    }

    let com = robot.world.com_state();
    summary.steps = walker.step_index;
    summary.distance = com.x - x0;
    if let Some((t5, x5)) = settled {
        if summary.time > t5 {
            summary.mean_velocity = Some((com.x - x5) / (summary.time - t5));
        }
    }
    summary.rms_error = if n_err > 0 { (sq_err / n_err as f64).sqrt() } else { 0.0 };
    summary.first_fall_free_streak = (walker.step_index >= SETTLING_STEPS).then_some(SETTLING_STEPS);
    summary.steps_to_steady = steady_from(&start_speeds, 0.1, 5);
    for e in &walker.events {
        match e {
            WalkerEvent::ReachClamped { .. } => summary.reach_clamps += 1,
            WalkerEvent::EarlyContact { .. } => summary.early_contacts += 1,
            WalkerEvent::IkHeld { .. } => summary.ik_holds += 1,
            WalkerEvent::Exchange { .. } => {}
        }
    }
    Ok(RunOutput { summary, joint_names, records, events: walker.events })
}

/// First index `k` such that `speeds[k..k + run]` each differ from their
/// predecessor by less than `tol`.
pub fn steady_from(speeds: &[f64], tol: f64, run: usize) -> Option<u64> {
    (1..speeds.len()).find_map(|k| {
        let window = speeds.get(k..k + run)?;
        let ok = window.iter().enumerate().all(|(i, v)| (v - speeds[k + i - 1]).abs() < tol);
        ok.then_some(k as u64)
    })
}

fn run_rig(config: &ScenarioConfig, setup: &RigSetup) -> Result<RunOutput, HarnessError> {
    let mut robot = build_rig(config, setup)?;
    let joint_names = robot.joint_names();
    let mut pds = joint_controllers(&robot, &config.gains, config.filter_alpha, config.torque_limit)?;
    let rest = setup.pose;
    let mut summary = empty_summary(config);
    let mut records = Vec::with_capacity(config.ticks());
    let window = (config.sine.transient, config.sine.transient + config.sine.window);
    let (mut sq_err, mut n_err) = (0.0, 0usize);

    for tick in 0..config.ticks() {
        let t = tick as f64 * config.dt;
        let sine = sine_target(config, setup.sine_centre, t);
        let mut targets = Vec::new();
        let mut exercised = Vec::new();
        for leg in &robot.legs {
            for (kind, hold) in [(RigJoint::Hip, rest.gamma), (RigJoint::Knee, rest.theta), (RigJoint::Ankle, rest.xi)] {
                if kind == RigJoint::Ankle && leg.ankle.is_none() {
                    continue;
                }
                exercised.push(kind == setup.joint);
                targets.push(if kind == setup.joint { sine } else { hold });
            }
        }
        let order = robot.joint_order();
        let mut torques = Vec::with_capacity(order.len());
        for (((pd, j), target), on) in pds.iter_mut().zip(&order).zip(&targets).zip(&exercised) {
            pd.target = *target;
            let (q, q_dot) = robot.world.joint_readout(*j)?;
            let u = pd_torque(pd, q, q_dot);
            torques.push(if *on { u } else { 0.0 });
        }
        if let Err(e) = robot.world.step(&torques) {
            summary.instability = Some(instability(e)?);
            summary.outcome = Outcome::Unstable;
            break;
        }
        let now = t + config.dt;
        let rec = record(&robot, now, &targets, &torques, 0);
        if now > window.0 && now <= window.1 + 1e-9 {
            let reference = sine_target(config, setup.sine_centre, now);
            for (s, on) in rec.joints.iter().zip(&exercised) {
                if *on {
                    sq_err += (reference - s.actual).powi(2);
                    n_err += 1;
                }
            }
        }
        summary.ticks = tick + 1;
        summary.time = now;
        records.push(rec);
    }
    summary.rms_error = if n_err > 0 { (sq_err / n_err as f64).sqrt() } else { f64::NAN };
    Ok(RunOutput { summary, joint_names, records, events: Vec::new() })
}
