use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Circle, Segment};
use crate::worldsim::{cast_ir, Pose, Prey, ACTION_DT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreyMode {
    /// Random heading drift, switching to flee when the predator is near.
    Wander,
    /// Always steer away from the predator.
    Flee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreyPolicy {
    pub mode: PreyMode,
    /// Centre-to-centre distance that triggers fleeing, meters.
    pub flee_trigger_distance: f64,
    /// Prey top speed as a fraction of the predator's.
    pub speed_scale: f64,
    /// Largest random steering offset per wander step, as a wheel-speed fraction.
    pub wander_jitter: f64,
}

impl Default for PreyPolicy {
    fn default() -> Self {
        Self {
            mode: PreyMode::Wander,
            flee_trigger_distance: 0.5,
            speed_scale: 0.8,
            wander_jitter: 0.4,
        }
    }
}

impl PreyPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed_scale > 0.0 && self.speed_scale <= 1.0) {
            return Err("speed_scale must lie in (0, 1]".into());
        }
        if !(self.flee_trigger_distance >= 0.0 && self.flee_trigger_distance.is_finite()) {
            return Err("flee_trigger_distance must be a non-negative number".into());
        }
        if !(0.0..=1.0).contains(&self.wander_jitter) {
            return Err("wander_jitter must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreyDecision {
    pub mode: PreyMode,
    pub left: f64,
    pub right: f64,
}

/// Front IR reading above which the prey turns away from a wall.
const WALL_AVOID: f64 = 0.3;

/// Wheel command of the scripted prey for one step.
///
/// One uniform draw is consumed from `rng` every call so the stream stays
/// aligned whatever the mode.
pub fn step_prey<R: Rng + ?Sized>(
    prey: &Prey,
    predator: &Pose,
    edges: &[Segment],
    predator_radius: f64,
    policy: &PreyPolicy,
    rng: &mut R,
) -> PreyDecision {
    let jitter: f64 = rng.random_range(-1.0..=1.0);
    let s = policy.speed_scale;
    let away = prey.pose.position() - predator.position();
    let mode = match policy.mode {
        PreyMode::Flee => PreyMode::Flee,
        PreyMode::Wander if away.norm() <= policy.flee_trigger_distance => PreyMode::Flee,
        PreyMode::Wander => PreyMode::Wander,
    };

    let ir = cast_ir(
        &prey.pose,
        &prey.body,
        edges,
        &[Circle {
            center: predator.position(),
            radius: predator_radius,
        }],
    );
    let left_side = ir[1].max(ir[2]);
    let right_side = ir[3].max(ir[4]);
    let blocked = ir[0].max(ir[1]).max(ir[3]) >= WALL_AVOID;

    // turn needed this step, as a fraction of the fastest spin at speed s
    let max_turn = 2.0 * s * prey.body.max_wheel_speed * ACTION_DT / prey.body.wheel_base;
    let (forward, turn) = match mode {
        PreyMode::Flee => {
            let err = normalize_angle(away.angle() - prey.pose.heading);
            let mut k = (err / max_turn).clamp(-1.0, 1.0);
            if blocked && k.abs() < 0.5 {
                k = if left_side > right_side { -1.0 } else { 1.0 };
            }
            (s * (1.0 - k.abs()), k)
        }
        PreyMode::Wander => {
            if blocked {
                (0.0, if left_side > right_side { -1.0 } else { 1.0 })
            } else {
                (s * (1.0 - policy.wander_jitter * jitter.abs()), policy.wander_jitter * jitter)
            }
        }
    };
    PreyDecision {
        mode,
        left: forward - turn * s,
        right: forward + turn * s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::worldsim::{builtin_map, move_disc, RobotBody};
    use std::f64::consts::FRAC_PI_2;

    fn prey_at(x: f64, y: f64, heading: f64) -> Prey {
        Prey {
            pose: Pose::new(x, y, heading),
            body: RobotBody::default(),
        }
    }

    #[test]
    fn far_predator_means_wander() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(1, Stream::Prey);
        let d = step_prey(
            &prey_at(1.0, 1.0, 0.0),
            &Pose::new(1.0, 3.0, 0.0),
            map.edges(),
            0.09,
            &PreyPolicy::default(),
            &mut rng,
        );
        assert_eq!(d.mode, PreyMode::Wander);
        assert!(d.left.abs() <= 0.8 + 1e-12 && d.right.abs() <= 0.8 + 1e-12);
    }

    #[test]
    fn wander_turns_away_from_walls() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(1, Stream::Prey);
        // wall ahead; heading already leans left, so keep turning left
        let d = step_prey(
            &prey_at(1.85, 1.0, 0.2),
            &Pose::new(0.3, 0.3, 0.0),
            map.edges(),
            0.09,
            &PreyPolicy::default(),
            &mut rng,
        );
        assert!(d.right > d.left, "{d:?}");
    }

    #[test]
    fn flee_speed_is_bounded() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(5, Stream::Prey);
        for k in 0..16 {
            let h = k as f64 * 0.4 - 3.0;
            let d = step_prey(
                &prey_at(1.0, 1.0, h),
                &Pose::new(1.2, 1.1, 0.0),
                map.edges(),
                0.09,
                &PreyPolicy::default(),
                &mut rng,
            );
            assert_eq!(d.mode, PreyMode::Flee);
            assert!(d.left.abs() <= 0.8 + 1e-12 && d.right.abs() <= 0.8 + 1e-12);
        }
    }

    #[test]
    fn flee_steers_toward_escape_heading() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(2, Stream::Prey);
        let mut prey = prey_at(1.0, 1.0, -FRAC_PI_2 + 0.6);
        let predator = Pose::new(1.0, 1.3, 0.0);
        let d = step_prey(&prey, &predator, map.edges(), 0.09, &PreyPolicy::default(), &mut rng);
        let (pose, _) = move_disc(prey.pose, &prey.body, d.left, d.right, ACTION_DT, map.edges(), &[]);
        prey.pose = pose;
        let err = normalize_angle(prey.pose.heading + FRAC_PI_2).abs();
        assert!(err < 1e-9, "{err}");
    }
}
