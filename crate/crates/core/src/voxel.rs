//! The building zone: an 11×9×11 dense grid of block ids.
//!
//! Cells are indexed `[x][y][z]` with `y` as height. In world units cell
//! `(i, j, k)` is the unit box with minimum corner `(i - 5, j, k - 5)`, so the
//! zone spans `x ∈ [-5, 6)`, `y ∈ [0, 9)`, `z ∈ [-5, 6)` and its horizontal
//! center column straddles the origin.
//!
//! Palette: 0 air, 1 blue, 2 green, 3 red, 4 orange, 5 purple, 6 yellow.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::VoxelError;
use crate::geom::{Aabb, Vec3};

pub const SIZE_X: usize = 11;
pub const SIZE_Y: usize = 9;
pub const SIZE_Z: usize = 11;
pub const VOLUME: usize = SIZE_X * SIZE_Y * SIZE_Z;

/// World-space offset of grid index 0 on the horizontal axes.
pub const ORIGIN_OFFSET: i32 = 5;

/// Number of placeable colors.
pub const NUM_COLORS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
#[repr(transparent)]
pub struct BlockId(u8);

impl BlockId {
    pub const AIR: BlockId = BlockId(0);
    pub const BLUE: BlockId = BlockId(1);
    pub const GREEN: BlockId = BlockId(2);
    pub const RED: BlockId = BlockId(3);
    pub const ORANGE: BlockId = BlockId(4);
    pub const PURPLE: BlockId = BlockId(5);
    pub const YELLOW: BlockId = BlockId(6);

    pub fn new(id: u8) -> Result<Self, VoxelError> {
        if id as usize <= NUM_COLORS {
            Ok(BlockId(id))
        } else {
            Err(VoxelError::InvalidBlockId(id as i64))
        }
    }

    /// A placeable color (1..=6).
    pub fn color(id: u8) -> Result<Self, VoxelError> {
        match BlockId::new(id)? {
            BlockId::AIR => Err(VoxelError::AirEntry),
            b => Ok(b),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn is_air(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> &'static str {
        ["air", "blue", "green", "red", "orange", "purple", "yellow"][self.0 as usize]
    }

    /// Index into a 6-slot per-color table. Panics on air.
    pub(crate) fn slot(self) -> usize {
        assert!(!self.is_air(), "air has no inventory slot");
        self.0 as usize - 1
    }

    pub fn colors() -> impl Iterator<Item = BlockId> {
        (1..=NUM_COLORS as u8).map(BlockId)
    }
}

impl TryFrom<u8> for BlockId {
    type Error = VoxelError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        BlockId::new(v)
    }
}

impl From<BlockId> for u8 {
    fn from(b: BlockId) -> u8 {
        b.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An in-bounds cell of the building zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCoord {
    x: u8,
    y: u8,
    z: u8,
}

impl GridCoord {
    pub fn new(x: i64, y: i64, z: i64) -> Result<Self, VoxelError> {
        if (0..SIZE_X as i64).contains(&x)
            && (0..SIZE_Y as i64).contains(&y)
            && (0..SIZE_Z as i64).contains(&z)
        {
            Ok(GridCoord {
                x: x as u8,
                y: y as u8,
                z: z as u8,
            })
        } else {
            Err(VoxelError::OutOfBounds { x, y, z })
        }
    }

    pub fn x(self) -> usize {
        self.x as usize
    }
    pub fn y(self) -> usize {
        self.y as usize
    }
    pub fn z(self) -> usize {
        self.z as usize
    }

    pub fn index(self) -> usize {
        (self.x as usize * SIZE_Y + self.y as usize) * SIZE_Z + self.z as usize
    }

    pub fn from_index(i: usize) -> Self {
        debug_assert!(i < VOLUME);
        GridCoord {
            x: (i / (SIZE_Y * SIZE_Z)) as u8,
            y: ((i / SIZE_Z) % SIZE_Y) as u8,
            z: (i % SIZE_Z) as u8,
        }
    }

    /// Sort key for the canonical `(y, x, z)` ordering.
    pub fn yxz(self) -> (u8, u8, u8) {
        (self.y, self.x, self.z)
    }

    pub fn to_world_cell(self) -> WorldCell {
        WorldCell {
            x: self.x as i32 - ORIGIN_OFFSET,
            y: self.y as i32,
            z: self.z as i32 - ORIGIN_OFFSET,
        }
    }

    pub fn offset(self, dx: i64, dy: i64, dz: i64) -> Option<GridCoord> {
        GridCoord::new(self.x as i64 + dx, self.y as i64 + dy, self.z as i64 + dz).ok()
    }

    pub fn all() -> impl Iterator<Item = GridCoord> {
        (0..VOLUME).map(GridCoord::from_index)
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Integer world cell, possibly outside the zone. Cell `(x, y, z)` is the
/// unit box with minimum corner `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WorldCell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl WorldCell {
    pub fn containing(p: Vec3) -> WorldCell {
        WorldCell {
            x: p.x.floor() as i32,
            y: p.y.floor() as i32,
            z: p.z.floor() as i32,
        }
    }

    pub fn to_grid(self) -> Option<GridCoord> {
        GridCoord::new(
            (self.x + ORIGIN_OFFSET) as i64,
            self.y as i64,
            (self.z + ORIGIN_OFFSET) as i64,
        )
        .ok()
    }

    pub fn bounds(self) -> Aabb {
        let min = Vec3::new(self.x as f64, self.y as f64, self.z as f64);
        Aabb::new(min, min + Vec3::new(1.0, 1.0, 1.0))
    }
}

/// World-space box occupied by a grid cell.
pub fn world_of(cell: GridCoord) -> Aabb {
    cell.to_world_cell().bounds()
}

/// Inverse of [`world_of`]: the zone cell containing a world point, if any.
pub fn cell_at(p: Vec3) -> Option<GridCoord> {
    WorldCell::containing(p).to_grid()
}

/// The zone volume in world units.
pub fn zone_bounds() -> Aabb {
    Aabb::new(
        Vec3::new(-(ORIGIN_OFFSET as f64), 0.0, -(ORIGIN_OFFSET as f64)),
        Vec3::new(
            (SIZE_X as i32 - ORIGIN_OFFSET) as f64,
            SIZE_Y as f64,
            (SIZE_Z as i32 - ORIGIN_OFFSET) as f64,
        ),
    )
}

/// Dense block grid, flattened x-major (`[x][y][z]`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    cells: [BlockId; VOLUME],
}

impl Default for Grid {
    fn default() -> Self {
        Grid::empty()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("blocks", &self.to_block_list().entries())
            .finish()
    }
}

impl Grid {
    pub const fn empty() -> Self {
        Grid {
            cells: [BlockId::AIR; VOLUME],
        }
    }

    pub fn get(&self, at: GridCoord) -> BlockId {
        self.cells[at.index()]
    }

    /// Solid test for an arbitrary world cell; everything outside the zone is air.
    pub fn is_solid_world(&self, c: WorldCell) -> bool {
        c.to_grid().is_some_and(|g| !self.get(g).is_air())
    }

    /// Sets one cell and returns the previous id.
    pub fn set_block(&mut self, at: GridCoord, id: BlockId) -> BlockId {
        std::mem::replace(&mut self.cells[at.index()], id)
    }

    pub fn block_count(&self) -> usize {
        self.cells.iter().filter(|b| !b.is_air()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(|b| b.is_air())
    }

    pub fn clear(&mut self) {
        self.cells = [BlockId::AIR; VOLUME];
    }

    /// Raw ids in `[x][y][z]` order.
    pub fn as_bytes(&self) -> &[u8] {
        // SAFETY: BlockId is repr(transparent) over u8.
        unsafe { std::slice::from_raw_parts(self.cells.as_ptr() as *const u8, VOLUME) }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VoxelError> {
        if bytes.len() != VOLUME {
            return Err(VoxelError::WrongLength(bytes.len()));
        }
        let mut g = Grid::empty();
        for (cell, &b) in g.cells.iter_mut().zip(bytes) {
            *cell = BlockId::new(b)?;
        }
        Ok(g)
    }

    /// Non-air cells in `[x][y][z]` storage order.
    pub fn blocks(&self) -> impl Iterator<Item = (GridCoord, BlockId)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_air())
            .map(|(i, &b)| (GridCoord::from_index(i), b))
    }

    /// Sparse form in ascending `(y, x, z)` order.
    pub fn to_block_list(&self) -> BlockList {
        let mut entries: Vec<_> = self.blocks().collect();
        entries.sort_by_key(|(c, _)| c.yxz());
        BlockList { entries }
    }

    pub fn from_block_list(list: &BlockList) -> Grid {
        let mut g = Grid::empty();
        for &(c, b) in list.entries() {
            g.set_block(c, b);
        }
        g
    }

    /// Tight bounds of the occupied cells, in grid index space (inclusive).
    pub fn occupied_bounds(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (c, _) in self.blocks() {
            any = true;
            for (a, v) in [c.x(), c.y(), c.z()].into_iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        any.then_some((lo, hi))
    }
}

/// Sparse, validated list of placed blocks: unique coordinates, no air.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockList {
    entries: Vec<(GridCoord, BlockId)>,
}

impl BlockList {
    pub fn new(entries: Vec<(GridCoord, BlockId)>) -> Result<Self, VoxelError> {
        let mut seen = [false; VOLUME];
        for &(c, b) in &entries {
            if b.is_air() {
                return Err(VoxelError::AirEntry);
            }
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(VoxelError::DuplicateCoord(c));
            }
        }
        Ok(BlockList { entries })
    }

    /// Validates raw `[x, y, z, id]` rows.
    pub fn from_rows(rows: &[[i64; 4]]) -> Result<Self, VoxelError> {
        let entries = rows
            .iter()
            .map(|&[x, y, z, id]| {
                let c = GridCoord::new(x, y, z)?;
                let id = u8::try_from(id).map_err(|_| VoxelError::InvalidBlockId(id))?;
                Ok((c, BlockId::color(id)?))
            })
            .collect::<Result<Vec<_>, VoxelError>>()?;
        BlockList::new(entries)
    }

    pub fn to_rows(&self) -> Vec<[i64; 4]> {
        self.entries
            .iter()
            .map(|(c, b)| [c.x() as i64, c.y() as i64, c.z() as i64, b.get() as i64])
            .collect()
    }

    pub fn entries(&self) -> &[(GridCoord, BlockId)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reorders entries into ascending `(y, x, z)`.
    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|(c, _)| c.yxz());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: i64, y: i64, z: i64) -> GridCoord {
        GridCoord::new(x, y, z).unwrap()
    }

    #[test]
    fn set_and_unset() {
        let mut g = Grid::empty();
        g.set_block(c(0, 0, 0), BlockId::BLUE);
        assert_eq!(g.block_count(), 1);
        g.set_block(c(0, 0, 0), BlockId::AIR);
        assert_eq!(g, Grid::empty());
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(BlockId::new(7).is_err());
        assert!(GridCoord::new(11, 0, 0).is_err());
        assert!(GridCoord::new(0, 9, 0).is_err());
        assert!(GridCoord::new(0, 0, -1).is_err());
        assert!(matches!(BlockId::color(0), Err(VoxelError::AirEntry)));
    }

    #[test]
    fn random_mutations_match_shadow_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = Grid::empty();
        let mut occupied = std::collections::HashSet::new();
        for _ in 0..50 {
            let at = c(rng.gen_range(0..11), rng.gen_range(0..9), rng.gen_range(0..11));
            let id = BlockId::new(rng.gen_range(0..=6)).unwrap();
            g.set_block(at, id);
            if id.is_air() {
                occupied.remove(&at);
            } else {
                occupied.insert(at);
            }
            assert_eq!(g.block_count(), occupied.len());
        }
    }

    #[test]
    fn corner_cells_round_trip() {
        let mut g = Grid::empty();
        g.set_block(c(0, 0, 0), BlockId::BLUE);
        g.set_block(c(10, 8, 10), BlockId::YELLOW);
        let list = g.to_block_list();
        assert_eq!(list.len(), 2);
        assert_eq!(list.entries()[0], (c(0, 0, 0), BlockId::BLUE));
        assert_eq!(Grid::from_block_list(&list), g);
        assert!(Grid::empty().to_block_list().is_empty());
    }

    #[test]
    fn block_list_validation() {
        let err = BlockList::from_rows(&[[1, 2, 3, 1], [1, 2, 3, 4]]).unwrap_err();
        assert_eq!(err, VoxelError::DuplicateCoord(c(1, 2, 3)));
        assert_eq!(
            BlockList::from_rows(&[[1, 2, 3, 0]]).unwrap_err(),
            VoxelError::AirEntry
        );
        assert!(matches!(
            BlockList::from_rows(&[[0, 9, 0, 1]]).unwrap_err(),
            VoxelError::OutOfBounds { y: 9, .. }
        ));
    }

    #[test]
    fn world_boxes() {
        assert_eq!(world_of(c(5, 0, 5)).min, Vec3::new(0.0, 0.0, 0.0));
        assert_eq!(world_of(c(0, 0, 0)).min, Vec3::new(-5.0, 0.0, -5.0));
        let zone = zone_bounds();
        assert_eq!(zone.min, Vec3::new(-5.0, 0.0, -5.0));
        assert_eq!(zone.max, Vec3::new(6.0, 9.0, 6.0));
    }

    #[test]
    fn point_lookup_inverts_world_of() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = Vec3::new(
                rng.gen_range(-5.0..6.0),
                rng.gen_range(0.0..9.0),
                rng.gen_range(-5.0..6.0),
            );
            // Independent floor-based inverse.
            let expect = c(
                (p.x.floor() as i64) + 5,
                p.y.floor() as i64,
                (p.z.floor() as i64) + 5,
            );
            let got = cell_at(p).unwrap();
            assert_eq!(got, expect);
            assert!(world_of(got).contains(p));
        }
        assert_eq!(cell_at(Vec3::new(6.0, 0.5, 0.0)), None);
    }

    #[test]
    fn world_boxes_tile_the_zone() {
        let zone = zone_bounds();
        let total: f64 = GridCoord::all()
            .map(|c| {
                let b = world_of(c);
                (b.max.x - b.min.x) * (b.max.y - b.min.y) * (b.max.z - b.min.z)
            })
            .sum();
        let vol = (zone.max.x - zone.min.x) * (zone.max.y - zone.min.y) * (zone.max.z - zone.min.z);
        assert_eq!(total, vol);
        // Distinct cells never share interior (center of each box maps back to itself).
        for cell in GridCoord::all() {
            let b = world_of(cell);
            let center = (b.min + b.max) * 0.5;
            assert_eq!(cell_at(center), Some(cell));
        }
    }

    #[test]
    fn index_layout_is_x_major() {
        assert_eq!(c(0, 0, 1).index(), 1);
        assert_eq!(c(0, 1, 0).index(), 11);
        assert_eq!(c(1, 0, 0).index(), 99);
        for i in 0..VOLUME {
            assert_eq!(GridCoord::from_index(i).index(), i);
        }
    }
}
