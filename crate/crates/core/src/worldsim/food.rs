use rand::Rng;

use super::{RobotBody, WorldMap, FOOD_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_polygon, point_in_polygon, Vec2};

const MAX_ATTEMPTS: usize = 10_000;
/// Minimum spacing between food items and from the robot start.
pub const FOOD_CLEARANCE: f64 = 0.15;

/// True when a food disc at `p` sits fully inside the arena, clear of every
/// wall and obstacle.
pub(crate) fn food_fits(map: &WorldMap, p: Vec2) -> bool {
    let r = FOOD_RADIUS;
    if p.x < r || p.y < r || p.x > map.arena.w - r || p.y > map.arena.h - r {
        return false;
    }
    if map.walls.iter().any(|w| w.distance_to(p) <= r) {
        return false;
    }
    !map
        .obstacles
        .iter()
        .any(|poly| point_in_polygon(p, poly) || distance_to_polygon(p, poly) <= r)
}

/// Rejection-samples `count` food positions uniformly in the map's food zone.
pub fn place_food<R: Rng + ?Sized>(map: &WorldMap, count: usize, rng: &mut R) -> Result<Vec<Vec2>> {
    let zone = map.food_zone;
    let start = map.robot_start.position();
    let mut placed: Vec<Vec2> = Vec::with_capacity(count);
    let mut attempts = 0;
    while placed.len() < count {
        if attempts == MAX_ATTEMPTS {
            return Err(Error::Configuration(format!(
                "could not place {count} food items in map `{}` after {MAX_ATTEMPTS} attempts",
                map.name
            )));
        }
        attempts += 1;
        let p = Vec2::new(
            zone.x + rng.random::<f64>() * zone.w,
            zone.y + rng.random::<f64>() * zone.h,
        );
        let spaced = p.distance(start) >= FOOD_CLEARANCE.max(RobotBody::default().radius + FOOD_RADIUS)
            && placed.iter().all(|q| q.distance(p) >= FOOD_CLEARANCE);
        if spaced && food_fits(map, p) {
            placed.push(p);
        }
    }
    Ok(placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::worldsim::builtin_map;

    #[test]
    fn zero_items() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(0, Stream::Food);
        assert!(place_food(&map, 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn infeasible_request_fails() {
        let map = builtin_map("walls").unwrap();
        let mut rng = stream(0, Stream::Food);
        assert!(matches!(place_food(&map, 500, &mut rng), Err(Error::Configuration(_))));
    }
}
