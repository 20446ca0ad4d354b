//! Planar vector math, ray casts and swept-disc time of impact.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (-pi, pi]. Angles already in range are returned
/// untouched.
pub fn normalize_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let e = self.b - self.a;
        let len_sq = e.norm_sq();
        if len_sq == 0.0 {
            return self.a;
        }
        let u = ((p - self.a).dot(e) / len_sq).clamp(0.0, 1.0);
        self.a + e * u
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        p.distance(self.closest_point(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Distance along a unit ray to its first crossing with `seg`.
pub fn ray_segment(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let denom = dir.cross(e);
    if denom == 0.0 {
        return None;
    }
    let ao = seg.a - origin;
    let t = ao.cross(e) / denom;
    let s = ao.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Distance along a unit ray to the boundary of `circle`, zero if the
/// origin is inside.
pub fn ray_circle(origin: Vec2, dir: Vec2, circle: &Circle) -> Option<f64> {
    let f = origin - circle.center;
    let c = f.norm_sq() - circle.radius * circle.radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = f.dot(dir);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

const TOUCH_EPS: f64 = 1e-9;

/// Earliest fraction `t` in [0, 1] at which a disc of `radius` centred at
/// `p + t * d` first touches the point `c` inflated to `inflate`. Contacts
/// while separating are ignored.
fn point_toi(p: Vec2, d: Vec2, c: Vec2, inflate: f64) -> Option<f64> {
    let f = p - c;
    let a = d.norm_sq();
    let b = 2.0 * f.dot(d);
    if a == 0.0 || b >= 0.0 {
        return None;
    }
    let cc = f.norm_sq() - inflate * inflate;
    if cc <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / (2.0 * a);
    (t <= 1.0).then_some(t.max(0.0))
}

/// Earliest fraction of the move `p -> p + d` at which a disc of `radius`
/// touches `seg`, if any.
pub fn disc_segment_toi(p: Vec2, d: Vec2, radius: f64, seg: &Segment) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut keep = |t: f64| {
        best = Some(best.map_or(t, |b: f64| b.min(t)));
    };
    let e = seg.b - seg.a;
    let len_sq = e.norm_sq();
    if len_sq > 0.0 {
        let len = len_sq.sqrt();
        let mut n = e.perp() * (1.0 / len);
        let mut s = (p - seg.a).dot(n);
        if s < 0.0 {
            n = -n;
            s = -s;
        }
        let dn = d.dot(n);
        if dn < 0.0 {
            let t = if s >= radius - TOUCH_EPS {
                ((s - radius) / -dn).max(0.0)
            } else {
                0.0
            };
            if t <= 1.0 {
                let q = p + d * t;
                let u = (q - seg.a).dot(e) / len_sq;
                if (0.0..=1.0).contains(&u) {
                    keep(t);
                }
            }
        }
    }
    if let Some(t) = point_toi(p, d, seg.a, radius) {
        keep(t);
    }
    if let Some(t) = point_toi(p, d, seg.b, radius) {
        keep(t);
    }
    best
}

/// Earliest fraction of the move at which a disc of `radius` touches `other`.
pub fn disc_circle_toi(p: Vec2, d: Vec2, radius: f64, other: &Circle) -> Option<f64> {
    point_toi(p, d, other.center, radius + other.radius)
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Edges of a closed polygon.
pub fn polygon_edges(poly: &[Vec2]) -> impl Iterator<Item = Segment> + '_ {
    (0..poly.len()).map(move |i| Segment::new(poly[i], poly[(i + 1) % poly.len()]))
}

/// Shortest distance from `p` to the boundary of `poly`; zero or negative
/// never occurs, so callers check containment separately.
pub fn distance_to_polygon(p: Vec2, poly: &[Vec2]) -> f64 {
    polygon_edges(poly)
        .map(|e| e.distance_to(p))
        .fold(f64::INFINITY, f64::min)
}

/// True for a simple convex polygon with non-zero area.
pub fn is_convex(poly: &[Vec2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let n = poly.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let z = (b - a).cross(c - b);
        if z == 0.0 {
            continue;
        }
        if sign == 0.0 {
            sign = z.signum();
        } else if z.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}
