//! Location-invariant structure metrics.
//!
//! The built grid is compared with the target under every yaw rotation about
//! the zone's vertical center axis and every horizontal translation in
//! `[-10, 10]²` (4 × 21 × 21 = 1764 transforms). The score of a transform is
//! the number of cells where the moved built block lands on a target block of
//! the same color; built cells moved outside the zone are dropped.
//!
//! Quarter turn convention: `(x, z) -> (10 - z, x)`.
//!
//! Ties go to the smallest rotation, then the lexicographically smallest
//! `(dx, dz)`.

use serde::{Deserialize, Serialize};

use crate::voxel::{BlockId, Grid, GridCoord, NUM_COLORS, SIZE_X, SIZE_Y};

pub const MAX_SHIFT: i32 = 10;
const SHIFTS: usize = (2 * MAX_SHIFT + 1) as usize;
const PER_ROTATION: usize = SHIFTS * SHIFTS;
pub const TRANSFORM_COUNT: usize = 4 * PER_ROTATION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transform {
    /// Quarter turns, 0..=3.
    pub rotation: u8,
    pub dx: i8,
    pub dz: i8,
}

impl Transform {
    pub const IDENTITY: Transform = Transform { rotation: 0, dx: 0, dz: 0 };

    pub fn new(rotation: u8, dx: i8, dz: i8) -> Self {
        assert!(rotation < 4);
        assert!((-MAX_SHIFT..=MAX_SHIFT).contains(&(dx as i32)));
        assert!((-MAX_SHIFT..=MAX_SHIFT).contains(&(dz as i32)));
        Transform { rotation, dx, dz }
    }

    pub fn degrees(self) -> u16 {
        self.rotation as u16 * 90
    }

    /// All transforms in tie-break order.
    pub fn all() -> impl Iterator<Item = Transform> {
        (0..TRANSFORM_COUNT).map(Transform::from_slot)
    }

    fn from_slot(i: usize) -> Transform {
        let rotation = (i / PER_ROTATION) as u8;
        let rem = i % PER_ROTATION;
        Transform {
            rotation,
            dx: (rem / SHIFTS) as i8 - MAX_SHIFT as i8,
            dz: (rem % SHIFTS) as i8 - MAX_SHIFT as i8,
        }
    }

    pub fn apply(self, c: GridCoord) -> Option<GridCoord> {
        let (rx, rz) = rotate(self.rotation, c.x() as i32, c.z() as i32);
        GridCoord::new(
            (rx + self.dx as i32) as i64,
            c.y() as i64,
            (rz + self.dz as i32) as i64,
        )
        .ok()
    }
}

#[inline]
fn rotate(quarter_turns: u8, x: i32, z: i32) -> (i32, i32) {
    let n = SIZE_X as i32 - 1;
    match quarter_turns & 3 {
        0 => (x, z),
        1 => (n - z, x),
        2 => (n - x, n - z),
        _ => (z, n - x),
    }
}

/// Moves every block of `grid` by `t`, dropping blocks that leave the zone.
pub fn transform_grid(grid: &Grid, t: Transform) -> Grid {
    let mut out = Grid::empty();
    for (c, b) in grid.blocks() {
        if let Some(to) = t.apply(c) {
            out.set_block(to, b);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub best: Transform,
    pub intersection: usize,
}

/// Target blocks bucketed by `(height, color)` for fast pair counting.
#[derive(Clone, Debug)]
pub struct PreparedTarget {
    offsets: [u16; SIZE_Y * NUM_COLORS + 1],
    cells: Vec<(u8, u8)>,
    count: usize,
}

impl PreparedTarget {
    pub fn new(target: &Grid) -> Self {
        let mut buckets: Vec<Vec<(u8, u8)>> = vec![Vec::new(); SIZE_Y * NUM_COLORS];
        for (c, b) in target.blocks() {
            buckets[bucket(c.y(), b)].push((c.x() as u8, c.z() as u8));
        }
        let mut offsets = [0u16; SIZE_Y * NUM_COLORS + 1];
        let mut cells = Vec::with_capacity(target.block_count());
        for (i, b) in buckets.iter().enumerate() {
            offsets[i] = cells.len() as u16;
            cells.extend_from_slice(b);
        }
        offsets[SIZE_Y * NUM_COLORS] = cells.len() as u16;
        let count = cells.len();
        PreparedTarget { offsets, cells, count }
    }

    pub fn block_count(&self) -> usize {
        self.count
    }

    #[inline]
    fn bucket_cells(&self, y: usize, b: BlockId) -> &[(u8, u8)] {
        let i = bucket(y, b);
        &self.cells[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

#[inline]
fn bucket(y: usize, b: BlockId) -> usize {
    y * NUM_COLORS + b.get() as usize - 1
}

/// Best alignment of `built` onto `target`.
pub fn max_intersection(built: &Grid, target: &Grid) -> AlignmentResult {
    max_intersection_prepared(built, &PreparedTarget::new(target))
}

/// Same as [`max_intersection`] with the target pre-bucketed.
///
/// Every (built block, same-height same-color target block) pair votes for
/// the unique translation that superimposes them under each rotation; the
/// vote count of a transform equals its intersection. Allocation free.
pub fn max_intersection_prepared(built: &Grid, target: &PreparedTarget) -> AlignmentResult {
    let none = AlignmentResult { best: Transform::from_slot(0), intersection: 0 };
    if target.count == 0 {
        return none;
    }
    let mut votes = [0u16; TRANSFORM_COUNT];
    let mut any = false;
    for (c, b) in built.blocks() {
        let partners = target.bucket_cells(c.y(), b);
        if partners.is_empty() {
            continue;
        }
        any = true;
        for r in 0..4u8 {
            let (rx, rz) = rotate(r, c.x() as i32, c.z() as i32);
            let base = r as usize * PER_ROTATION;
            for &(tx, tz) in partners {
                let dx = (tx as i32 - rx + MAX_SHIFT) as usize;
                let dz = (tz as i32 - rz + MAX_SHIFT) as usize;
                votes[base + dx * SHIFTS + dz] += 1;
            }
        }
    }
    if !any {
        return none;
    }
    let mut best = 0usize;
    for (i, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = i;
        }
    }
    AlignmentResult { best: Transform::from_slot(best), intersection: votes[best] as usize }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl F1Score {
    pub fn from_counts(intersection: usize, built: usize, target: usize) -> F1Score {
        match (built, target) {
            (0, 0) => F1Score { precision: 1.0, recall: 1.0, f1: 1.0 },
            (0, _) | (_, 0) => F1Score { precision: 0.0, recall: 0.0, f1: 0.0 },
            _ => {
                let precision = intersection as f64 / built as f64;
                let recall = intersection as f64 / target as f64;
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                F1Score { precision, recall, f1 }
            }
        }
    }
}

pub fn f1(built: &Grid, target: &Grid) -> F1Score {
    let i = max_intersection(built, target).intersection;
    F1Score::from_counts(i, built.block_count(), target.block_count())
}

/// Exact match up to an allowed transform.
pub fn is_segment_complete(built: &Grid, target: &Grid) -> bool {
    let n = target.block_count();
    built.block_count() == n && max_intersection(built, target).intersection == n
}
