//! Agent embodiment: walking and jumping with voxel collision, view-ray
//! targeting, and the block place/break rules.
//!
//! Positions are in world units (blocks). The agent box is centered on
//! `position.x`/`position.z` and rests with its bottom face at `position.y`.
//! Everything below `y = 0` is ground; walking is confined to the platform
//! by hard walls.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::{Aabb, Vec3};
use crate::voxel::{zone_bounds, world_of, BlockId, Grid, GridCoord, WorldCell, NUM_COLORS};

/// Boxes closer than this are treated as touching, not overlapping.
pub const CONTACT_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub dt: f64,
    pub walk_speed: f64,
    pub jump_speed: f64,
    pub gravity: f64,
    pub agent_width: f64,
    pub agent_height: f64,
    pub eye_height: f64,
    pub reach: f64,
    /// Maximum camera change per step, degrees, per component.
    pub camera_clamp: f64,
    /// Walkable ground extends over `x, z ∈ [platform_min, platform_max)`.
    pub platform_min: f64,
    pub platform_max: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            walk_speed: 5.0,
            jump_speed: 8.0,
            gravity: 28.0,
            agent_width: 0.6,
            agent_height: 1.8,
            eye_height: 1.6,
            reach: 5.0,
            camera_clamp: 5.0,
            platform_min: -8.0,
            platform_max: 9.0,
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("dt", self.dt),
            ("walk_speed", self.walk_speed),
            ("jump_speed", self.jump_speed),
            ("gravity", self.gravity),
            ("agent_width", self.agent_width),
            ("agent_height", self.agent_height),
            ("eye_height", self.eye_height),
            ("reach", self.reach),
            ("camera_clamp", self.camera_clamp),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("physics.{name} must be positive, got {v}")));
            }
        }
        if self.reach < 1.0 {
            return Err(ConfigError::Invalid("physics.reach must be at least 1".into()));
        }
        if self.dt > 0.1 {
            return Err(ConfigError::Invalid("physics.dt must be at most 0.1".into()));
        }
        if self.eye_height > self.agent_height {
            return Err(ConfigError::Invalid("physics.eye_height exceeds agent_height".into()));
        }
        let zone = zone_bounds();
        if self.platform_min > zone.min.x || self.platform_max < zone.max.x {
            return Err(ConfigError::Invalid("platform must cover the building zone".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// Feet center.
    pub position: Vec3,
    pub velocity: Vec3,
    /// Degrees, `[-90, 90]`, positive looks up.
    pub pitch: f64,
    /// Degrees, `[-180, 180)`. Yaw 0 faces +x, yaw 90 faces +z.
    pub yaw: f64,
    pub grounded: bool,
}

pub fn wrap_yaw(yaw: f64) -> f64 {
    let w = (yaw + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

impl AgentState {
    pub fn new(position: Vec3, yaw: f64, pitch: f64) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            pitch: pitch.clamp(-90.0, 90.0),
            yaw: wrap_yaw(yaw),
            grounded: true,
        }
    }

    pub fn bbox(&self, cfg: &PhysicsConfig) -> Aabb {
        agent_box_at(self.position, cfg)
    }

    pub fn eye(&self, cfg: &PhysicsConfig) -> Vec3 {
        self.position + Vec3::new(0.0, cfg.eye_height, 0.0)
    }

    pub fn view_dir(&self) -> Vec3 {
        view_direction(self.yaw, self.pitch)
    }

    /// Applies a camera delta, each component clamped to `±clamp` degrees.
    pub fn turn(&mut self, d_yaw: f64, d_pitch: f64, clamp: f64) {
        let cl = |v: f64| if v.is_finite() { v.clamp(-clamp, clamp) } else { 0.0 };
        self.yaw = wrap_yaw(self.yaw + cl(d_yaw));
        self.pitch = (self.pitch + cl(d_pitch)).clamp(-90.0, 90.0);
    }

    pub fn to_vector(&self) -> [f64; 5] {
        [self.position.x, self.position.y, self.position.z, self.pitch, self.yaw]
    }
}

pub fn agent_box_at(position: Vec3, cfg: &PhysicsConfig) -> Aabb {
    let hw = cfg.agent_width * 0.5;
    Aabb::new(
        Vec3::new(position.x - hw, position.y, position.z - hw),
        Vec3::new(position.x + hw, position.y + cfg.agent_height, position.z + hw),
    )
}

pub fn view_direction(yaw: f64, pitch: f64) -> Vec3 {
    let (sy, cy) = yaw.to_radians().sin_cos();
    let (sp, cp) = pitch.to_radians().sin_cos();
    Vec3::new(cp * cy, sp, cp * sy)
}

pub fn forward_vector(yaw: f64) -> Vec3 {
    let (s, c) = yaw.to_radians().sin_cos();
    Vec3::new(c, 0.0, s)
}

pub fn right_vector(yaw: f64) -> Vec3 {
    let (s, c) = yaw.to_radians().sin_cos();
    Vec3::new(-s, 0.0, c)
}

/// Locomotion flags for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Intent {
    pub forward: bool,
    pub back: bool,
    pub left: bool,
    pub right: bool,
    pub jump: bool,
}

/// True if the box interior overlaps any solid zone cell or dips below ground.
pub fn box_collides(world: &Grid, b: &Aabb) -> bool {
    if b.min.y < -CONTACT_EPS {
        return true;
    }
    let (lo, hi) = cell_span(b);
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                if world.is_solid_world(WorldCell { x, y, z }) {
                    return true;
                }
            }
        }
    }
    false
}

/// Inclusive range of world cells whose interior the box overlaps.
fn cell_span(b: &Aabb) -> ([i32; 3], [i32; 3]) {
    let mut lo = [0; 3];
    let mut hi = [0; 3];
    for a in 0..3 {
        lo[a] = (b.min.axis(a) + CONTACT_EPS).floor() as i32;
        hi[a] = (b.max.axis(a) - CONTACT_EPS).ceil() as i32 - 1;
    }
    (lo, hi)
}

/// Moves the box along one axis by at most `delta`, stopping at the first
/// solid face. Returns the distance actually travelled.
fn sweep_axis(world: &Grid, b: &Aabb, axis: usize, delta: f64, cfg: &PhysicsConfig) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let mut d = delta;
    // Hard limits: ground below, platform walls sideways.
    if axis == 1 {
        if b.min.y + d < 0.0 {
            d = -b.min.y;
        }
    } else {
        if b.min.axis(axis) + d < cfg.platform_min {
            d = cfg.platform_min - b.min.axis(axis);
        }
        if b.max.axis(axis) + d > cfg.platform_max {
            d = cfg.platform_max - b.max.axis(axis);
        }
    }
    if d == 0.0 {
        return 0.0;
    }
    let (lo, hi) = cell_span(b);
    let lead = if d > 0.0 { b.max.axis(axis) } else { b.min.axis(axis) };
    let range = if d > 0.0 {
        ((lead - CONTACT_EPS).floor() as i32)..=((lead + d).ceil() as i32)
    } else {
        ((lead + d).floor() as i32 - 1)..=((lead + CONTACT_EPS).ceil() as i32)
    };
    let (a1, a2) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut cell = [0i32; 3];
    for j in range {
        // Slab j must lie ahead of the leading face and inside the sweep.
        let ahead = if d > 0.0 {
            (j as f64) >= lead - CONTACT_EPS && (j as f64) < lead + d
        } else {
            (j as f64 + 1.0) <= lead + CONTACT_EPS && (j as f64 + 1.0) > lead + d
        };
        if !ahead {
            continue;
        }
        let mut blocked = false;
        'scan: for u in lo[a1]..=hi[a1] {
            for v in lo[a2]..=hi[a2] {
                cell[axis] = j;
                cell[a1] = u;
                cell[a2] = v;
                if world.is_solid_world(WorldCell { x: cell[0], y: cell[1], z: cell[2] }) {
                    blocked = true;
                    break 'scan;
                }
            }
        }
        if blocked {
            if d > 0.0 {
                d = d.min((j as f64 - lead).max(0.0));
            } else {
                d = d.max((j as f64 + 1.0 - lead).min(0.0));
            }
        }
    }
    d
}

/// One physics step. Camera deltas must already be applied.
pub fn integrate(agent: &AgentState, intent: Intent, world: &Grid, cfg: &PhysicsConfig) -> AgentState {
    let mut next = *agent;
    let fwd = forward_vector(agent.yaw);
    let right = right_vector(agent.yaw);
    let f = intent.forward as i32 as f64 - intent.back as i32 as f64;
    let r = intent.right as i32 as f64 - intent.left as i32 as f64;
    let horizontal = (fwd * f + right * r).normalized() * cfg.walk_speed;
    next.velocity.x = horizontal.x;
    next.velocity.z = horizontal.z;
    if intent.jump && agent.grounded {
        next.velocity.y = cfg.jump_speed;
    }

    let dt = cfg.dt;
    // Exact ballistic update for constant gravity.
    let dy = next.velocity.y * dt - 0.5 * cfg.gravity * dt * dt;
    next.velocity.y -= cfg.gravity * dt;
    let wanted = [next.velocity.x * dt, dy, next.velocity.z * dt];

    next.grounded = false;
    for axis in [0usize, 1, 2] {
        let b = agent_box_at(next.position, cfg);
        let moved = sweep_axis(world, &b, axis, wanted[axis], cfg);
        let p = next.position.axis(axis) + moved;
        next.position.set_axis(axis, p);
        if moved != wanted[axis] {
            let mut v = next.velocity;
            v.set_axis(axis, 0.0);
            next.velocity = v;
            if axis == 1 && wanted[1] < 0.0 {
                next.grounded = true;
            }
        }
    }
    next
}

/// Outward normal of the struck face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    PosX,
    NegX,
    Top,
    Bottom,
    PosZ,
    NegZ,
}

impl Face {
    fn from_step(axis: usize, step: i32) -> Face {
        // The ray moved along +axis into the cell, so it hit the negative face.
        match (axis, step > 0) {
            (0, true) => Face::NegX,
            (0, false) => Face::PosX,
            (1, true) => Face::Bottom,
            (1, false) => Face::Top,
            (_, true) => Face::NegZ,
            (_, false) => Face::PosZ,
        }
    }

    pub fn normal(self) -> (i32, i32, i32) {
        match self {
            Face::PosX => (1, 0, 0),
            Face::NegX => (-1, 0, 0),
            Face::Top => (0, 1, 0),
            Face::Bottom => (0, -1, 0),
            Face::PosZ => (0, 0, 1),
            Face::NegZ => (0, 0, -1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HitTarget {
    Block(GridCoord),
    Ground,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub hit: HitTarget,
    /// Cell on the outside of the struck face, when it lies inside the zone.
    pub adjacent_cell: Option<GridCoord>,
    pub adjacent_world: WorldCell,
    pub face: Face,
    pub distance: f64,
}

/// Walks voxels from `origin` along unit `dir` in strict traversal order,
/// restricted to `bounds` (cells outside it must be air), and returns the
/// first solid cell or the ground plane within `max_dist`.
pub fn cast_ray(world: &Grid, bounds: &Aabb, origin: Vec3, dir: Vec3, max_dist: f64) -> Option<RayHit> {
    let t_ground = if dir.y < 0.0 { (-origin.y / dir.y).max(0.0) } else { f64::INFINITY };
    let t_limit = max_dist.min(t_ground);

    if let Some(hit) = walk_cells(world, bounds, origin, dir, t_limit) {
        return Some(hit);
    }
    if t_ground <= max_dist {
        let p = origin + dir * t_ground;
        let adj = WorldCell { x: p.x.floor() as i32, y: 0, z: p.z.floor() as i32 };
        return Some(RayHit {
            hit: HitTarget::Ground,
            adjacent_cell: adj.to_grid(),
            adjacent_world: adj,
            face: Face::Top,
            distance: t_ground,
        });
    }
    None
}

#[inline]
fn walk_cells(world: &Grid, bounds: &Aabb, origin: Vec3, dir: Vec3, t_limit: f64) -> Option<RayHit> {
    let (t0, t1) = bounds.clip_ray(origin, dir, t_limit)?;
    let o = [origin.x, origin.y, origin.z];
    let d = [dir.x, dir.y, dir.z];
    let lo = [bounds.min.x as i32, bounds.min.y as i32, bounds.min.z as i32];
    let hi = [bounds.max.x as i32 - 1, bounds.max.y as i32 - 1, bounds.max.z as i32 - 1];

    // Which slab produced the entry point (if the origin is outside).
    let mut entry_axis = None;
    if t0 > 0.0 {
        let mut best = f64::NEG_INFINITY;
        for a in 0..3 {
            if d[a] != 0.0 {
                let plane = if d[a] > 0.0 { lo[a] as f64 } else { hi[a] as f64 + 1.0 };
                let t = (plane - o[a]) / d[a];
                if t > best {
                    best = t;
                    entry_axis = Some(a);
                }
            }
        }
    }

    let mut cell = [0i32; 3];
    let mut step = [0i32; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for a in 0..3 {
        step[a] = if d[a] > 0.0 { 1 } else if d[a] < 0.0 { -1 } else { 0 };
        cell[a] = if entry_axis == Some(a) {
            if step[a] > 0 { lo[a] } else { hi[a] }
        } else {
            ((o[a] + d[a] * t0).floor() as i32).clamp(lo[a], hi[a])
        };
        if step[a] != 0 {
            let boundary = if step[a] > 0 { cell[a] + 1 } else { cell[a] } as f64;
            t_max[a] = (boundary - o[a]) / d[a];
            t_delta[a] = 1.0 / d[a].abs();
        }
    }

    let mut t_enter = t0;
    let mut last_axis: Option<usize> = entry_axis;
    loop {
        let wc = WorldCell { x: cell[0], y: cell[1], z: cell[2] };
        if let Some(g) = wc.to_grid() {
            if !world.get(g).is_air() {
                let axis = last_axis.unwrap_or_else(|| dominant_axis(d));
                let s = if d[axis] >= 0.0 { 1 } else { -1 };
                let face = Face::from_step(axis, s);
                let mut adj = cell;
                adj[axis] -= s;
                let adjacent_world = WorldCell { x: adj[0], y: adj[1], z: adj[2] };
                return Some(RayHit {
                    hit: HitTarget::Block(g),
                    adjacent_cell: adjacent_world.to_grid(),
                    adjacent_world,
                    face,
                    distance: t_enter,
                });
            }
        }
        let a = if t_max[0] < t_max[1] {
            if t_max[0] < t_max[2] { 0 } else { 2 }
        } else if t_max[1] < t_max[2] {
            1
        } else {
            2
        };
        if t_max[a] > t1 {
            return None;
        }
        t_enter = t_max[a];
        cell[a] += step[a];
        if cell[a] < lo[a] || cell[a] > hi[a] {
            return None;
        }
        t_max[a] += t_delta[a];
        last_axis = Some(a);
    }
}

fn dominant_axis(d: [f64; 3]) -> usize {
    let mut best = 0;
    for a in 1..3 {
        if d[a].abs() > d[best].abs() {
            best = a;
        }
    }
    best
}

/// Targeting ray from the agent's eye, limited to `cfg.reach`.
pub fn raycast(agent: &AgentState, world: &Grid, cfg: &PhysicsConfig) -> Option<RayHit> {
    cast_ray(world, &zone_bounds(), agent.eye(cfg), agent.view_dir(), cfg.reach)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub counts: [u32; NUM_COLORS],
}

impl Inventory {
    pub fn new(counts: [u32; NUM_COLORS]) -> Self {
        Self { counts }
    }

    pub fn uniform(n: u32) -> Self {
        Self { counts: [n; NUM_COLORS] }
    }

    pub fn count(&self, id: BlockId) -> u32 {
        self.counts[id.slot()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    NoTarget,
    OutOfZone,
    Occupied,
    SelfIntersection,
    EmptyInventory,
    GroundUnbreakable,
}

pub fn try_place(
    world: &mut Grid,
    agent: &AgentState,
    inv: &mut Inventory,
    id: BlockId,
    cfg: &PhysicsConfig,
) -> Result<GridCoord, Rejection> {
    let hit = raycast(agent, world, cfg).ok_or(Rejection::NoTarget)?;
    let cell = hit.adjacent_cell.ok_or(Rejection::OutOfZone)?;
    if !world.get(cell).is_air() {
        return Err(Rejection::Occupied);
    }
    if agent.bbox(cfg).overlaps(&world_of(cell), CONTACT_EPS) {
        return Err(Rejection::SelfIntersection);
    }
    if id.is_air() || inv.count(id) == 0 {
        return Err(Rejection::EmptyInventory);
    }
    world.set_block(cell, id);
    inv.counts[id.slot()] -= 1;
    Ok(cell)
}

pub fn try_break(
    world: &mut Grid,
    agent: &AgentState,
    inv: &mut Inventory,
    cfg: &PhysicsConfig,
) -> Result<(GridCoord, BlockId), Rejection> {
    match raycast(agent, world, cfg).ok_or(Rejection::NoTarget)?.hit {
        HitTarget::Ground => Err(Rejection::GroundUnbreakable),
        HitTarget::Block(cell) => {
            let id = world.set_block(cell, BlockId::AIR);
            inv.counts[id.slot()] += 1;
            Ok((cell, id))
        }
    }
}
