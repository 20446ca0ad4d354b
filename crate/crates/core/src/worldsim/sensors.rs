use rand::Rng;

use super::{Pose, RobotBody, WorldState};
use crate::geometry::{ray_circle, ray_segment, Circle, Segment, Vec2};

pub const IR_COUNT: usize = 8;

/// Normalized IR closeness readings in sensor index order; 0 means nothing
/// within range, 1 means touching.
pub type IrReadings = [f64; IR_COUNT];

/// Casts the eight IR rays of a body at `pose` against edges and circles.
///
/// Each ray starts at the centre and its hit distance is measured from the
/// body perimeter.
pub fn cast_ir(pose: &Pose, body: &RobotBody, edges: &[Segment], circles: &[Circle]) -> IrReadings {
    let origin = pose.position();
    let reach = body.radius + body.ir_max_range;
    body.ir_bearings().map(|bearing| {
        let dir = Vec2::from_angle(pose.heading + bearing);
        let mut nearest = reach;
        for e in edges {
            if let Some(t) = ray_segment(origin, dir, e) {
                nearest = nearest.min(t);
            }
        }
        for c in circles {
            if let Some(t) = ray_circle(origin, dir, c) {
                nearest = nearest.min(t);
            }
        }
        let d = (nearest - body.radius).max(0.0);
        if d >= body.ir_max_range {
            0.0
        } else {
            1.0 - d / body.ir_max_range
        }
    })
}

/// Exact IR readings of the robot; the prey counts as an obstacle surface
/// and food is invisible to IR.
pub fn read_ir(state: &WorldState) -> IrReadings {
    let circles: Vec<Circle> = state.prey.iter().map(|p| p.circle()).collect();
    cast_ir(&state.robot, &state.body, state.map.edges(), &circles)
}

/// [`read_ir`] plus additive uniform noise of +-`amplitude`, clamped to [0, 1].
pub fn read_ir_noisy<R: Rng + ?Sized>(state: &WorldState, amplitude: f64, rng: &mut R) -> IrReadings {
    read_ir(state).map(|r| (r + rng.random_range(-amplitude..=amplitude)).clamp(0.0, 1.0))
}
