use log::warn;

use super::{Pose, RobotBody, WorldState};
use crate::geometry::{disc_circle_toi, disc_segment_toi, normalize_angle, Circle, Segment, Vec2};

/// Duration of one action step, seconds.
pub const ACTION_DT: f64 = 0.2;

/// Per-substep limits keeping the chord of each arc piece close to the arc.
const MAX_SUBSTEP_TRAVEL: f64 = 0.005;
const MAX_SUBSTEP_TURN: f64 = 0.05;
/// Distance left between a stopped disc and the surface it hit.
const CONTACT_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOutcome {
    /// The move was cut short by a wall, obstacle or the other robot.
    pub contact: bool,
}

fn clamp_speed(v: f64, which: &str) -> f64 {
    if v.is_nan() {
        warn!("{which} wheel speed is NaN, using 0");
        return 0.0;
    }
    if !(-1.0..=1.0).contains(&v) {
        warn!("{which} wheel speed {v} clamped to [-1, 1]");
    }
    v.clamp(-1.0, 1.0)
}

/// Pose reached after `t` seconds at constant forward speed `v` and turn
/// rate `omega`, integrated exactly along the arc.
fn arc_pose(start: Pose, v: f64, omega: f64, t: f64) -> (Vec2, f64) {
    let th = start.heading;
    let p = start.position();
    if omega.abs() < 1e-12 {
        return (p + Vec2::from_angle(th) * (v * t), th);
    }
    let r = v / omega;
    let th1 = th + omega * t;
    let offset = Vec2::new(r * (th1.sin() - th.sin()), -r * (th1.cos() - th.cos()));
    (p + offset, th1)
}

/// Moves a differential-drive disc for `dt` seconds, stopping at the first
/// contact with any edge or circle.
pub fn move_disc(
    start: Pose,
    body: &RobotBody,
    left: f64,
    right: f64,
    dt: f64,
    edges: &[Segment],
    circles: &[Circle],
) -> (Pose, StepOutcome) {
    let left = clamp_speed(left, "left");
    let right = clamp_speed(right, "right");
    let vl = left * body.max_wheel_speed;
    let vr = right * body.max_wheel_speed;
    let v = 0.5 * (vl + vr);
    let omega = (vr - vl) / body.wheel_base;

    let travel = v.abs() * dt;
    let turn = omega.abs() * dt;
    let pieces = (travel / MAX_SUBSTEP_TRAVEL)
        .max(turn / MAX_SUBSTEP_TURN)
        .ceil()
        .max(1.0) as usize;

    let mut pos = start.position();
    let mut heading = start.heading;
    for i in 1..=pieces {
        let (target, target_heading) = arc_pose(start, v, omega, dt * i as f64 / pieces as f64);
        let d = target - pos;
        let len = d.norm();
        if len == 0.0 {
            heading = target_heading;
            continue;
        }
        let mut first = f64::INFINITY;
        for e in edges {
            if let Some(t) = disc_segment_toi(pos, d, body.radius, e) {
                first = first.min(t);
            }
        }
        for c in circles {
            if let Some(t) = disc_circle_toi(pos, d, body.radius, c) {
                first = first.min(t);
            }
        }
        if first <= 1.0 {
            let t = (first - CONTACT_GAP / len).max(0.0);
            pos = pos + d * t;
            heading += (target_heading - heading) * t;
            return (
                Pose {
                    x: pos.x,
                    y: pos.y,
                    heading: normalize_angle(heading),
                },
                StepOutcome { contact: true },
            );
        }
        pos = target;
        heading = target_heading;
    }
    (
        Pose {
            x: pos.x,
            y: pos.y,
            heading: normalize_angle(heading),
        },
        StepOutcome::default(),
    )
}

/// Advances the robot by one wheel command. The prey, when present, is a
/// solid obstacle.
pub fn step_kinematics(state: &mut WorldState, left: f64, right: f64, dt: f64) -> StepOutcome {
    let circles: Vec<Circle> = state.prey.iter().map(|p| p.circle()).collect();
    let (pose, outcome) = move_disc(state.robot, &state.body, left, right, dt, state.map.edges(), &circles);
    state.robot = pose;
    outcome
}

/// Advances the prey by one wheel command; the robot is a solid obstacle.
pub fn step_prey_kinematics(state: &mut WorldState, left: f64, right: f64, dt: f64) -> StepOutcome {
    let Some(prey) = state.prey else {
        return StepOutcome::default();
    };
    let robot = Circle {
        center: state.robot.position(),
        radius: state.body.radius,
    };
    let (pose, outcome) = move_disc(prey.pose, &prey.body, left, right, dt, state.map.edges(), &[robot]);
    if let Some(p) = state.prey.as_mut() {
        p.pose = pose;
    }
    outcome
}
