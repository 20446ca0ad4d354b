use serde::{Deserialize, Serialize};

use super::{Pose, RobotBody};
use crate::error::{DocumentError, Error, Result};
use crate::geometry::{distance_to_polygon, is_convex, point_in_polygon, polygon_edges, Segment, Vec2};

const WALLS_JSON: &str = include_str!("../../assets/maps/walls.json");
const OBSTACLES_JSON: &str = include_str!("../../assets/maps/obstacles.json");
const MAZE_JSON: &str = include_str!("../../assets/maps/maze.json");

const GEOMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }
}

/// Static arena description. Construct through [`WorldMap::new`] or
/// [`parse_map`] so the invariants hold.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub name: String,
    pub arena: Arena,
    pub walls: Vec<Segment>,
    pub obstacles: Vec<Vec<Vec2>>,
    pub robot_start: Pose,
    pub food_zone: Rect,
    pub prey_start: Option<Pose>,
    edges: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    x: f64,
    y: f64,
    heading: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    name: String,
    arena: Arena,
    walls: Vec<[f64; 4]>,
    obstacles: Vec<Vec<[f64; 2]>>,
    robot_start: PoseFile,
    food_zone: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prey_start: Option<PoseFile>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

impl WorldMap {
    pub fn new(
        name: impl Into<String>,
        arena: Arena,
        walls: Vec<Segment>,
        obstacles: Vec<Vec<Vec2>>,
        robot_start: Pose,
        food_zone: Rect,
        prey_start: Option<Pose>,
    ) -> Result<Self, DocumentError> {
        let edges = walls
            .iter()
            .copied()
            .chain(obstacles.iter().flat_map(|p| polygon_edges(p)))
            .collect();
        let map = Self {
            name: name.into(),
            arena,
            walls,
            obstacles,
            robot_start,
            food_zone,
            prey_start,
            edges,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn edges(&self) -> &[Segment] {
        &self.edges
    }

    fn inside_arena(&self, p: Vec2) -> bool {
        p.x.is_finite()
            && p.y.is_finite()
            && p.x >= -GEOMETRY_TOLERANCE
            && p.y >= -GEOMETRY_TOLERANCE
            && p.x <= self.arena.w + GEOMETRY_TOLERANCE
            && p.y <= self.arena.h + GEOMETRY_TOLERANCE
    }

    /// True when a disc at `p` overlaps obstacle `index`.
    fn disc_hits_obstacle(&self, p: Vec2, radius: f64, index: usize) -> bool {
        let poly = &self.obstacles[index];
        point_in_polygon(p, poly) || distance_to_polygon(p, poly) < radius
    }

    fn check_start(&self, field: &str, pose: &Pose) -> Result<(), DocumentError> {
        let radius = RobotBody::default().radius;
        let p = pose.position();
        if !pose.is_finite() || !self.inside_arena(p) {
            return Err(invalid(field, "pose lies outside the arena"));
        }
        if let Some(i) = (0..self.obstacles.len()).find(|&i| self.disc_hits_obstacle(p, radius, i)) {
            return Err(invalid(field, format!("robot disc overlaps obstacles[{i}]")));
        }
        if let Some(i) = self.walls.iter().position(|w| w.distance_to(p) < radius) {
            return Err(invalid(field, format!("robot disc overlaps walls[{i}]")));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), DocumentError> {
        if !(self.arena.w > 0.0 && self.arena.h > 0.0 && self.arena.w.is_finite() && self.arena.h.is_finite())
        {
            return Err(invalid("arena", "width and height must be positive"));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !self.inside_arena(w.a) || !self.inside_arena(w.b) {
                return Err(invalid(format!("walls[{i}]"), "segment leaves the arena"));
            }
        }
        for (i, poly) in self.obstacles.iter().enumerate() {
            if let Some(j) = poly.iter().position(|&v| !self.inside_arena(v)) {
                return Err(invalid(format!("obstacles[{i}][{j}]"), "vertex leaves the arena"));
            }
            if !is_convex(poly) {
                return Err(invalid(format!("obstacles[{i}]"), "polygon is not convex"));
            }
        }
        let z = self.food_zone;
        if !(z.w >= 0.0 && z.h >= 0.0)
            || !self.inside_arena(Vec2::new(z.x, z.y))
            || !self.inside_arena(Vec2::new(z.x + z.w, z.y + z.h))
        {
            return Err(invalid("food_zone", "zone must lie inside the arena"));
        }
        self.check_start("robot_start", &self.robot_start)?;
        if let Some(prey) = &self.prey_start {
            self.check_start("prey_start", prey)?;
        }
        Ok(())
    }
}

fn pose_from(field: &str, p: PoseFile) -> Result<Pose, DocumentError> {
    if !(p.x.is_finite() && p.y.is_finite() && p.heading.is_finite()) {
        return Err(invalid(field, "non-finite pose"));
    }
    Ok(Pose::new(p.x, p.y, p.heading))
}

/// Parses and validates a map document.
pub fn parse_map(source: &str) -> Result<WorldMap, DocumentError> {
    let file: MapFile = serde_json::from_str(source).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let walls = file
        .walls
        .iter()
        .map(|w| Segment::new(Vec2::new(w[0], w[1]), Vec2::new(w[2], w[3])))
        .collect();
    let obstacles = file
        .obstacles
        .iter()
        .map(|poly| poly.iter().map(|v| Vec2::new(v[0], v[1])).collect())
        .collect();
    let robot_start = pose_from("robot_start", file.robot_start)?;
    let prey_start = file.prey_start.map(|p| pose_from("prey_start", p)).transpose()?;
    WorldMap::new(file.name, file.arena, walls, obstacles, robot_start, file.food_zone, prey_start)
}

/// Writes `map` in the same document format [`parse_map`] reads.
pub fn serialize_map(map: &WorldMap) -> String {
    let pose = |p: &Pose| PoseFile {
        x: p.x,
        y: p.y,
        heading: p.heading,
    };
    let file = MapFile {
        name: map.name.clone(),
        arena: map.arena,
        walls: map.walls.iter().map(|s| [s.a.x, s.a.y, s.b.x, s.b.y]).collect(),
        obstacles: map
            .obstacles
            .iter()
            .map(|p| p.iter().map(|v| [v.x, v.y]).collect())
            .collect(),
        robot_start: pose(&map.robot_start),
        food_zone: map.food_zone,
        prey_start: map.prey_start.as_ref().map(pose),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("map serialization is infallible");
    out.push('\n');
    out
}

pub fn builtin_map_names() -> [&'static str; 3] {
    ["walls", "obstacles", "maze"]
}

/// Raw JSON of a packaged map.
pub fn builtin_map_source(name: &str) -> Option<&'static str> {
    match name {
        "walls" => Some(WALLS_JSON),
        "obstacles" => Some(OBSTACLES_JSON),
        "maze" => Some(MAZE_JSON),
        _ => None,
    }
}

pub fn builtin_map(name: &str) -> Result<WorldMap> {
    let source =
        builtin_map_source(name).ok_or_else(|| Error::Configuration(format!("no built-in map named `{name}`")))?;
    parse_map(source).map_err(|error| Error::Map {
        source_name: name.to_owned(),
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_maps_parse() {
        for name in builtin_map_names() {
            let map = builtin_map(name).unwrap();
            assert_eq!(map.name, name);
        }
    }

    #[test]
    fn walls_map_shape() {
        let map = builtin_map("walls").unwrap();
        assert_eq!(map.arena, Arena { w: 2.0, h: 2.0 });
        assert_eq!(map.walls.len(), 4);
        assert!(map.obstacles.is_empty());
    }

    #[test]
    fn round_trip_is_identity() {
        for name in builtin_map_names() {
            let map = builtin_map(name).unwrap();
            let again = parse_map(&serialize_map(&map)).unwrap();
            assert_eq!(again, map);
        }
    }

    #[test]
    fn obstacle_on_start_is_named() {
        let src = r#"{
            "name": "bad",
            "arena": {"w": 2.0, "h": 2.0},
            "walls": [],
            "obstacles": [
                [[1.5, 1.5], [1.7, 1.5], [1.7, 1.7]],
                [[0.9, 0.9], [1.1, 0.9], [1.1, 1.1], [0.9, 1.1]]
            ],
            "robot_start": {"x": 1.0, "y": 1.0, "heading": 0.0},
            "food_zone": {"x": 0.1, "y": 0.1, "w": 1.8, "h": 1.8}
        }"#;
        match parse_map(src) {
            Err(DocumentError::Invalid { field, message }) => {
                assert_eq!(field, "robot_start");
                assert!(message.contains("obstacles[1]"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn geometry_outside_arena_rejected() {
        let src = r#"{
            "name": "bad",
            "arena": {"w": 2.0, "h": 2.0},
            "walls": [[0, 0, 3, 0]],
            "obstacles": [],
            "robot_start": {"x": 1.0, "y": 1.0, "heading": 0.0},
            "food_zone": {"x": 0.1, "y": 0.1, "w": 1.8, "h": 1.8}
        }"#;
        assert!(matches!(
            parse_map(src),
            Err(DocumentError::Invalid { field, .. }) if field == "walls[0]"
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        let src = "{\n  \"name\": \"x\",\n  \"arena\": {\"w\": 2.0 \"h\": 2.0}\n}";
        match parse_map(src) {
            Err(DocumentError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
