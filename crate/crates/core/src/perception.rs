//! Sensor snapshots to discrete task states: colour blob detection,
//! far/close and left/center/right target classification, IR grouping and
//! the "last seen" memory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::worldsim::{CameraFrame, ColorLabel, IrReadings};

/// Detection thresholds. Every field is surfaced in the experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    pub detect_threshold: f64,
    pub close_area_threshold: f64,
    pub left_boundary: f64,
    pub right_boundary: f64,
    pub min_blob_pixels: usize,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            detect_threshold: 0.15,
            close_area_threshold: 0.02,
            left_boundary: 1.0 / 3.0,
            right_boundary: 2.0 / 3.0,
            min_blob_pixels: 4,
        }
    }
}

/// A connected region of one colour.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub color: ColorLabel,
    /// Mean cell-centre column as a fraction of frame width.
    pub centroid_x: f64,
    /// Fraction of all frame pixels.
    pub area: f64,
    pub pixel_count: usize,
    /// Member cells as row-major indices, ascending.
    pub cells: Vec<usize>,
}

struct Forest {
    parent: Vec<u32>,
}

impl Forest {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// 4-connected components of `color`, filtered by `min_pixels` and sorted by
/// size (largest first), then by leftmost centroid.
pub fn detect_blobs_with(frame: &CameraFrame, color: ColorLabel, min_pixels: usize) -> Vec<Blob> {
    let (w, h) = (frame.width(), frame.height());
    let cells = frame.cells();
    const NONE: u32 = u32::MAX;
    let mut label = vec![NONE; w * h];
    let mut forest = Forest { parent: Vec::new() };

    // first pass: provisional labels, merging with west and north neighbours
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            if cells[i] != color {
                continue;
            }
            let west = (col > 0).then(|| label[i - 1]).filter(|&l| l != NONE);
            let north = (row > 0).then(|| label[i - w]).filter(|&l| l != NONE);
            label[i] = match (west, north) {
                (None, None) => {
                    let fresh = forest.parent.len() as u32;
                    forest.parent.push(fresh);
                    fresh
                }
                (Some(a), None) | (None, Some(a)) => a,
                (Some(a), Some(b)) => {
                    forest.union(a, b);
                    a.min(b)
                }
            };
        }
    }

    // second pass: gather members per root
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; forest.parent.len()];
    for (i, &l) in label.iter().enumerate() {
        if l == NONE {
            continue;
        }
        let root = forest.find(l) as usize;
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }

    let total = (w * h) as f64;
    let mut blobs: Vec<Blob> = groups
        .into_iter()
        .filter(|g| g.len() >= min_pixels.max(1))
        .map(|g| {
            let sum: f64 = g.iter().map(|&i| (i % w) as f64 + 0.5).sum();
            let n = g.len();
            Blob {
                color,
                centroid_x: sum / n as f64 / w as f64,
                area: n as f64 / total,
                pixel_count: n,
                cells: g,
            }
        })
        .collect();
    blobs.sort_by(|a, b| {
        b.pixel_count
            .cmp(&a.pixel_count)
            .then(a.centroid_x.total_cmp(&b.centroid_x))
            .then(a.cells[0].cmp(&b.cells[0]))
    });
    blobs
}

/// [`detect_blobs_with`] using the default minimum blob size.
pub fn detect_blobs(frame: &CameraFrame, color: ColorLabel) -> Vec<Blob> {
    detect_blobs_with(frame, color, PerceptionConfig::default().min_blob_pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    Far,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TargetClass {
    pub distance: Distance,
    pub side: Side,
}

/// Classifies the largest blob, or `None` when there is no blob.
pub fn classify_target(blobs: &[Blob], cfg: &PerceptionConfig) -> Option<TargetClass> {
    let blob = blobs.first()?;
    let side = if blob.centroid_x < cfg.left_boundary {
        Side::Left
    } else if blob.centroid_x > cfg.right_boundary {
        Side::Right
    } else {
        Side::Center
    };
    let distance = if blob.area >= cfg.close_area_threshold {
        Distance::Close
    } else {
        Distance::Far
    };
    Some(TargetClass { distance, side })
}

/// Every state label used by any task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiscreteState {
    ObjectFront,
    ObjectLeft,
    ObjectRight,
    ObjectBackLeft,
    ObjectBackRight,
    ObjectBackLeftAndBackRight,
    TargetFarLeft,
    TargetFarCenter,
    TargetFarRight,
    TargetCloseLeft,
    TargetCloseCenter,
    TargetCloseRight,
    NothingLastSeenLeft,
    NothingLastSeenRight,
    NothingDetected,
}

impl DiscreteState {
    pub fn label(self) -> &'static str {
        use DiscreteState::*;
        match self {
            ObjectFront => "Object Front",
            ObjectLeft => "Object Left",
            ObjectRight => "Object Right",
            ObjectBackLeft => "Object Back Left",
            ObjectBackRight => "Object Back Right",
            ObjectBackLeftAndBackRight => "Object Back Left & Back Right",
            TargetFarLeft => "Target Far Left",
            TargetFarCenter => "Target Far Center",
            TargetFarRight => "Target Far Right",
            TargetCloseLeft => "Target Close Left",
            TargetCloseCenter => "Target Close Center",
            TargetCloseRight => "Target Close Right",
            NothingLastSeenLeft => "Nothing Detected but last seen Left",
            NothingLastSeenRight => "Nothing Detected but last seen Right",
            NothingDetected => "Nothing Detected",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        ALL_STATES.iter().copied().find(|s| s.label() == label)
    }

    pub fn from_target(t: TargetClass) -> Self {
        use DiscreteState::*;
        match (t.distance, t.side) {
            (Distance::Far, Side::Left) => TargetFarLeft,
            (Distance::Far, Side::Center) => TargetFarCenter,
            (Distance::Far, Side::Right) => TargetFarRight,
            (Distance::Close, Side::Left) => TargetCloseLeft,
            (Distance::Close, Side::Center) => TargetCloseCenter,
            (Distance::Close, Side::Right) => TargetCloseRight,
        }
    }

    pub fn is_target(self) -> bool {
        use DiscreteState::*;
        matches!(
            self,
            TargetFarLeft | TargetFarCenter | TargetFarRight | TargetCloseLeft | TargetCloseCenter | TargetCloseRight
        )
    }

    pub fn is_close_target(self) -> bool {
        use DiscreteState::*;
        matches!(self, TargetCloseLeft | TargetCloseCenter | TargetCloseRight)
    }

    /// The label seen in a left-right mirrored world.
    pub fn mirrored(self) -> Self {
        use DiscreteState::*;
        match self {
            ObjectLeft => ObjectRight,
            ObjectRight => ObjectLeft,
            ObjectBackLeft => ObjectBackRight,
            ObjectBackRight => ObjectBackLeft,
            TargetFarLeft => TargetFarRight,
            TargetFarRight => TargetFarLeft,
            TargetCloseLeft => TargetCloseRight,
            TargetCloseRight => TargetCloseLeft,
            NothingLastSeenLeft => NothingLastSeenRight,
            NothingLastSeenRight => NothingLastSeenLeft,
            other => other,
        }
    }
}

const ALL_STATES: [DiscreteState; 15] = {
    use DiscreteState::*;
    [
        ObjectFront,
        ObjectLeft,
        ObjectRight,
        ObjectBackLeft,
        ObjectBackRight,
        ObjectBackLeftAndBackRight,
        TargetFarLeft,
        TargetFarCenter,
        TargetFarRight,
        TargetCloseLeft,
        TargetCloseCenter,
        TargetCloseRight,
        NothingLastSeenLeft,
        NothingLastSeenRight,
        NothingDetected,
    ]
};

/// Obstacle-avoidance states in table order.
pub const TASK1_STATES: [DiscreteState; 7] = {
    use DiscreteState::*;
    [
        ObjectFront,
        ObjectLeft,
        ObjectRight,
        ObjectBackLeft,
        ObjectBackRight,
        ObjectBackLeftAndBackRight,
        NothingDetected,
    ]
};

/// Foraging and predator-prey states in table order.
pub const TARGET_TASK_STATES: [DiscreteState; 12] = {
    use DiscreteState::*;
    [
        TargetFarLeft,
        TargetFarCenter,
        TargetFarRight,
        TargetCloseLeft,
        TargetCloseCenter,
        TargetCloseRight,
        ObjectFront,
        ObjectLeft,
        ObjectRight,
        NothingLastSeenLeft,
        NothingLastSeenRight,
        NothingDetected,
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LastSeen {
    #[default]
    None,
    Left,
    Right,
}

/// Which side the target was last seen on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PerceptionMemory {
    pub last_seen_side: LastSeen,
}

impl PerceptionMemory {
    fn observe(self, blobs: &[Blob]) -> Self {
        match blobs.first() {
            Some(b) => Self {
                last_seen_side: if b.centroid_x < 0.5 { LastSeen::Left } else { LastSeen::Right },
            },
            None => self,
        }
    }
}

fn check_ir(ir: &IrReadings) -> Result<()> {
    match ir.iter().position(|r| !(0.0..=1.0).contains(r)) {
        Some(i) => Err(Error::Input(format!("IR reading {i} = {} outside [0, 1]", ir[i]))),
        None => Ok(()),
    }
}

struct Groups {
    front: bool,
    left: bool,
    right: bool,
    back_left: bool,
    back_right: bool,
}

fn ir_groups(ir: &IrReadings, threshold: f64) -> Groups {
    let fires = |r: f64| r >= threshold;
    let back = 0.5 * ir[5];
    Groups {
        front: fires(ir[0]),
        left: fires(ir[1]) || fires(ir[2]),
        right: fires(ir[3]) || fires(ir[4]),
        back_left: fires(ir[6]) || fires(back),
        back_right: fires(ir[7]) || fires(back),
    }
}

impl Groups {
    fn front_state(&self) -> Option<DiscreteState> {
        if self.front {
            Some(DiscreteState::ObjectFront)
        } else if self.left {
            Some(DiscreteState::ObjectLeft)
        } else if self.right {
            Some(DiscreteState::ObjectRight)
        } else {
            None
        }
    }
}

/// Obstacle-avoidance state from the IR vector alone.
pub fn discretize_task1(ir: &IrReadings, cfg: &PerceptionConfig) -> Result<DiscreteState> {
    check_ir(ir)?;
    let g = ir_groups(ir, cfg.detect_threshold);
    Ok(g.front_state().unwrap_or(match (g.back_left, g.back_right) {
        (true, true) => DiscreteState::ObjectBackLeftAndBackRight,
        (true, false) => DiscreteState::ObjectBackLeft,
        (false, true) => DiscreteState::ObjectBackRight,
        (false, false) => DiscreteState::NothingDetected,
    }))
}

fn target_or_memory(blobs: &[Blob], mem: PerceptionMemory, cfg: &PerceptionConfig) -> DiscreteState {
    match classify_target(blobs, cfg) {
        Some(t) => DiscreteState::from_target(t),
        None => match mem.last_seen_side {
            LastSeen::Left => DiscreteState::NothingLastSeenLeft,
            LastSeen::Right => DiscreteState::NothingLastSeenRight,
            LastSeen::None => DiscreteState::NothingDetected,
        },
    }
}

/// Foraging state: a firing front, left or right IR group wins over any
/// visible food.
pub fn discretize_task2(
    ir: &IrReadings,
    blobs: &[Blob],
    mem: PerceptionMemory,
    cfg: &PerceptionConfig,
) -> Result<(DiscreteState, PerceptionMemory)> {
    check_ir(ir)?;
    let next = mem.observe(blobs);
    let state = ir_groups(ir, cfg.detect_threshold)
        .front_state()
        .unwrap_or_else(|| target_or_memory(blobs, mem, cfg));
    Ok((state, next))
}

/// Predator state: a visible prey wins over IR, which fires on the prey
/// itself at close range.
pub fn discretize_task3(
    ir: &IrReadings,
    blobs: &[Blob],
    mem: PerceptionMemory,
    cfg: &PerceptionConfig,
) -> Result<(DiscreteState, PerceptionMemory)> {
    check_ir(ir)?;
    let next = mem.observe(blobs);
    let state = if blobs.is_empty() {
        ir_groups(ir, cfg.detect_threshold)
            .front_state()
            .unwrap_or_else(|| target_or_memory(blobs, mem, cfg))
    } else {
        target_or_memory(blobs, mem, cfg)
    };
    Ok((state, next))
}
