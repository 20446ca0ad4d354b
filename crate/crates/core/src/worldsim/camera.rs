use super::{CameraSpec, WorldState, PREY_HEIGHT};
use crate::geometry::{normalize_angle, ray_segment, Vec2};
use crate::worldsim::FOOD_HEIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ColorLabel {
    #[default]
    Background,
    Green,
    Red,
}

/// Row-major raster of colour labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CameraFrame {
    width: usize,
    height: usize,
    cells: Vec<ColorLabel>,
}

impl CameraFrame {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![ColorLabel::Background; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<ColorLabel>) -> Option<Self> {
        (cells.len() == width * height).then_some(Self { width, height, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[ColorLabel] {
        &self.cells
    }

    pub fn get(&self, col: usize, row: usize) -> ColorLabel {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, label: ColorLabel) {
        self.cells[row * self.width + col] = label;
    }

    pub fn count(&self, label: ColorLabel) -> usize {
        self.cells.iter().filter(|&&c| c == label).count()
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        let mut out = Self::blank(self.width, self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                out.set(self.width - 1 - col, row, self.get(col, row));
            }
        }
        out
    }
}

struct Sprite {
    distance: f64,
    bearing: f64,
    half_width: f64,
    height: f64,
    label: ColorLabel,
}

/// Pinhole focal length in pixels.
fn focal_length(spec: &CameraSpec) -> f64 {
    (spec.width as f64 / 2.0) / (spec.fov / 2.0).tan()
}

fn paint(frame: &mut CameraFrame, spec: &CameraSpec, s: &Sprite) {
    let f = focal_length(spec);
    let cx = spec.width as f64 / 2.0;
    let cy = spec.height as f64 / 2.0;
    // perpendicular depth of the near face
    let depth = (s.distance * s.bearing.cos()).max(1e-3);
    let top = cy - f * (s.height - spec.mount_height) / depth;
    let bottom = cy + f * spec.mount_height / depth;
    for col in 0..spec.width {
        let u = col as f64 + 0.5 - cx;
        // columns left of centre look to the robot's left (positive bearing)
        let ray = (-u / f).atan();
        if (ray - s.bearing).abs() > s.half_width {
            continue;
        }
        for row in 0..spec.height {
            let v = row as f64 + 0.5;
            if v >= top && v <= bottom {
                frame.set(col, row, s.label);
            }
        }
    }
}

/// Rasterizes visible food (green) and prey (red) into a camera frame.
///
/// Entities whose centre is hidden behind a wall or obstacle are skipped;
/// nearer entities overwrite farther ones.
pub fn render_camera(state: &WorldState) -> CameraFrame {
    let spec = state.body.camera;
    let mut frame = CameraFrame::blank(spec.width, spec.height);
    let eye = state.robot.position();
    let heading = state.robot.heading;

    let visible = |center: Vec2, radius: f64, height: f64, label: ColorLabel| -> Option<Sprite> {
        let rel = center - eye;
        let distance = rel.norm();
        if distance > spec.max_range || distance <= radius {
            return None;
        }
        let bearing = normalize_angle(rel.angle() - heading);
        let half_width = (radius / distance).asin();
        if bearing.abs() - half_width > spec.fov / 2.0 {
            return None;
        }
        let dir = rel * (1.0 / distance);
        let blocked = state
            .map
            .edges()
            .iter()
            .any(|e| ray_segment(eye, dir, e).is_some_and(|t| t < distance));
        (!blocked).then_some(Sprite {
            distance,
            bearing,
            half_width,
            height,
            label,
        })
    };

    let mut sprites: Vec<Sprite> = state
        .food
        .iter()
        .filter(|f| !f.eaten)
        .filter_map(|f| visible(f.position, f.radius, FOOD_HEIGHT, ColorLabel::Green))
        .chain(
            state
                .prey
                .iter()
                .filter_map(|p| visible(p.pose.position(), p.body.radius, PREY_HEIGHT, ColorLabel::Red)),
        )
        .collect();
    // far to near so the painter's order gives occlusion
    sprites.sort_by(|a, b| b.distance.total_cmp(&a.distance));
    for s in &sprites {
        paint(&mut frame, &spec, s);
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldsim::{builtin_map, Pose};
    use std::sync::Arc;

    fn world() -> WorldState {
        WorldState::new(Arc::new(builtin_map("walls").unwrap()))
    }

    fn green_columns(frame: &CameraFrame) -> Vec<usize> {
        (0..frame.width())
            .filter(|&c| (0..frame.height()).any(|r| frame.get(c, r) == ColorLabel::Green))
            .collect()
    }

    #[test]
    fn empty_scene_is_background() {
        let frame = render_camera(&world());
        assert_eq!(frame.count(ColorLabel::Background), 64 * 48);
    }

    #[test]
    fn food_ahead_is_centred() {
        let w = world().with_food(&[Vec2::new(1.3, 1.0)]);
        let frame = render_camera(&w);
        let cols = green_columns(&frame);
        assert!(!cols.is_empty());
        let mean = cols.iter().map(|&c| c as f64 + 0.5).sum::<f64>() / cols.len() as f64;
        assert!((mean - 32.0).abs() <= 1.0, "{mean}");
    }

    #[test]
    fn food_on_the_left_lands_left() {
        let w = world().with_food(&[Vec2::new(1.5, 1.2)]);
        let cols = green_columns(&render_camera(&w));
        assert!(cols.iter().all(|&c| c < 32), "{cols:?}");
    }

    #[test]
    fn behind_the_robot_is_invisible() {
        let w = world().with_food(&[Vec2::new(0.6, 1.0)]);
        assert_eq!(render_camera(&w).count(ColorLabel::Green), 0);
    }

    #[test]
    fn eaten_food_is_invisible() {
        let mut w = world().with_food(&[Vec2::new(1.3, 1.0)]);
        w.food[0].eaten = true;
        assert_eq!(render_camera(&w).count(ColorLabel::Green), 0);
    }

    #[test]
    fn nearer_entity_occludes() {
        let mut w = world().with_food(&[Vec2::new(1.6, 1.0)]).with_prey();
        w.prey.as_mut().unwrap().pose = Pose::new(1.4, 1.0, 0.0);
        let frame = render_camera(&w);
        assert_eq!(frame.count(ColorLabel::Green), 0);
        assert!(frame.count(ColorLabel::Red) > 0);
    }
}
