//! Deterministic 2D arena: map geometry, differential-drive motion with
//! swept collision, ray-cast IR sensing and a synthetic colour camera.

mod camera;
mod food;
mod kinematics;
mod map;
mod sensors;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Circle, Segment, Vec2};

pub use camera::{render_camera, CameraFrame, ColorLabel};
pub use food::place_food;
pub use kinematics::{move_disc, step_kinematics, step_prey_kinematics, StepOutcome, ACTION_DT};
pub use map::{builtin_map, builtin_map_names, builtin_map_source, parse_map, serialize_map, Arena, Rect, WorldMap};
pub use sensors::{cast_ir, read_ir, read_ir_noisy, IrReadings, IR_COUNT};

/// Planar pose; heading in radians, kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }
}

/// IR sensor bearings in the body frame, in sensor index order.
///
/// Index 0 faces straight ahead, 1 and 2 sit on the left front, 3 and 4 on
/// the right front, 5 faces backwards and 6 and 7 are the rear corners.
pub const IR_BEARINGS_DEG: [f64; IR_COUNT] = [0.0, 25.0, 50.0, -25.0, -50.0, 180.0, 135.0, -135.0];

/// Sensor index that sees the mirror image of sensor `i` under a
/// left-right reflection of the body.
pub const IR_MIRROR: [usize; IR_COUNT] = [0, 3, 4, 1, 2, 5, 7, 6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    /// Horizontal field of view, radians.
    pub fov: f64,
    pub max_range: f64,
    pub width: usize,
    pub height: usize,
    /// Height of the optical centre above the floor, meters.
    pub mount_height: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            fov: PI / 3.0,
            max_range: 2.0,
            width: 64,
            height: 48,
            mount_height: 0.03,
        }
    }
}

/// Physical robot constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotBody {
    pub radius: f64,
    pub wheel_base: f64,
    /// Rim speed for a normalized wheel command of 1, m/s.
    pub max_wheel_speed: f64,
    pub ir_max_range: f64,
    pub camera: CameraSpec,
}

impl Default for RobotBody {
    fn default() -> Self {
        Self {
            radius: 0.09,
            wheel_base: 0.11,
            max_wheel_speed: 0.25,
            ir_max_range: 0.30,
            camera: CameraSpec::default(),
        }
    }
}

impl RobotBody {
    pub fn ir_bearings(&self) -> [f64; IR_COUNT] {
        IR_BEARINGS_DEG.map(f64::to_radians)
    }
}

pub const FOOD_RADIUS: f64 = 0.035;
pub const FOOD_HEIGHT: f64 = 0.05;
pub const PREY_HEIGHT: f64 = 0.06;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Food {
    pub position: Vec2,
    pub radius: f64,
    pub eaten: bool,
}

impl Food {
    pub fn at(position: Vec2) -> Self {
        Self {
            position,
            radius: FOOD_RADIUS,
            eaten: false,
        }
    }
}

/// The scripted prey: a robot body without a camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prey {
    pub pose: Pose,
    pub body: RobotBody,
}

impl Prey {
    pub fn circle(&self) -> Circle {
        Circle {
            center: self.pose.position(),
            radius: self.body.radius,
        }
    }
}

/// Dynamic state of one world.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub map: Arc<WorldMap>,
    pub body: RobotBody,
    pub robot: Pose,
    pub food: Vec<Food>,
    pub prey: Option<Prey>,
    pub tick: u64,
}

impl WorldState {
    /// Robot at the map start, no food, no prey.
    pub fn new(map: Arc<WorldMap>) -> Self {
        let robot = map.robot_start;
        Self {
            map,
            body: RobotBody::default(),
            robot,
            food: Vec::new(),
            prey: None,
            tick: 0,
        }
    }

    /// Adds the prey at the map's prey start pose.
    pub fn with_prey(mut self) -> Self {
        self.prey = self.map.prey_start.map(|pose| Prey {
            pose,
            body: RobotBody::default(),
        });
        self
    }

    pub fn with_food(mut self, positions: &[Vec2]) -> Self {
        self.food = positions.iter().copied().map(Food::at).collect();
        self
    }

    /// Static collision edges: walls and obstacle outlines.
    pub fn edges(&self) -> &[Segment] {
        self.map.edges()
    }

    /// Marks every food item the robot touches as eaten and returns how
    /// many were eaten.
    pub fn eat_touching_food(&mut self) -> u32 {
        let center = self.robot.position();
        let reach = self.body.radius;
        let mut eaten = 0;
        for item in self.food.iter_mut().filter(|f| !f.eaten) {
            if center.distance(item.position) < reach + item.radius {
                item.eaten = true;
                eaten += 1;
            }
        }
        eaten
    }

    pub fn food_remaining(&self) -> usize {
        self.food.iter().filter(|f| !f.eaten).count()
    }

    /// Gap between the robot and prey bodies, if a prey exists.
    pub fn prey_gap(&self) -> Option<f64> {
        self.prey.map(|p| {
            p.pose.position().distance(self.robot.position()) - p.body.radius - self.body.radius
        })
    }
}
