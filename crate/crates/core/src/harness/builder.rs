//! A scripted builder that reads the target directly.
//!
//! It removes wrong blocks, then places missing target blocks whose cell has a
//! solid neighbor (or the ground) to aim at, choosing the cheapest standing
//! spot by walking distance, climbing height and camera travel. Spots above
//! the ground are reached by pillar-jumping inside the zone; pillars and any
//! temporary supports under floating blocks are broken again before the
//! segment can complete. Every aim is checked with the same ray cast the
//! environment uses before the action is sent.

use std::collections::VecDeque;

use crate::env::{Action, DiscreteAction};
use crate::geom::Vec3;
use crate::physics::{raycast, AgentState, HitTarget, Intent, PhysicsConfig};
use crate::voxel::{world_of, BlockId, Grid, GridCoord, NUM_COLORS, ORIGIN_OFFSET, SIZE_Y};

use super::{Agent, AgentView};

const WALK_COST: f64 = 4.0;
const CLIMB_COST: f64 = 14.0;
const DESCEND_COST: f64 = 9.0;
const MAX_PILLAR: i32 = 4;
const CENTER_TOL: f64 = 0.13;
const JOB_STEP_LIMIT: u32 = 120;
const ANGLE_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Stand {
    x: i32,
    z: i32,
    h: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Place { cell: GridCoord, color: BlockId },
    Break { cell: GridCoord },
    Descend,
}

#[derive(Clone, Copy, Debug)]
struct Job {
    kind: Kind,
    stand: Stand,
    aim: Vec3,
    expect: HitTarget,
    steps: u32,
    hop: Option<(i32, i32)>,
}

enum Step {
    Act(Action),
    /// Send this action, then plan afresh.
    Final(Action),
    Done,
    Fail,
}

#[derive(Clone, Debug, Default)]
pub struct HeuristicBuilder {
    goal: Option<Grid>,
    segment: Option<usize>,
    target: Grid,
    job: Option<Job>,
    scaffold: Vec<GridCoord>,
    blacklist: Vec<(GridCoord, Stand)>,
    candidates: Vec<Candidate>,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    cost: f64,
    seq: u32,
    kind: Kind,
    stand: Stand,
    aim: Vec3,
    expect: HitTarget,
}

fn zone_cell(x: i32, y: i32, z: i32) -> Option<GridCoord> {
    GridCoord::new((x + ORIGIN_OFFSET) as i64, y as i64, (z + ORIGIN_OFFSET) as i64).ok()
}

fn solid(w: &Grid, x: i32, y: i32, z: i32) -> bool {
    zone_cell(x, y, z).is_some_and(|c| !w.get(c).is_air())
}

fn world_column(c: GridCoord) -> (i32, i32) {
    (c.x() as i32 - ORIGIN_OFFSET, c.z() as i32 - ORIGIN_OFFSET)
}

fn column_of(p: Vec3) -> (i32, i32) {
    (p.x.floor() as i32, p.z.floor() as i32)
}

fn wrap(a: f64) -> f64 {
    crate::physics::wrap_yaw(a)
}

fn aim_angles(eye: Vec3, aim: Vec3) -> (f64, f64) {
    let d = aim - eye;
    let yaw = d.z.atan2(d.x).to_degrees();
    let pitch = d.y.atan2(d.x.hypot(d.z)).to_degrees();
    (wrap(yaw), pitch)
}

fn platform_columns(cfg: &PhysicsConfig) -> (i32, i32) {
    (cfg.platform_min.ceil() as i32, cfg.platform_max.ceil() as i32 - 1)
}

/// Level of the first air cell at or below `y` in a column.
fn floor_below(w: &Grid, x: i32, z: i32, y: f64) -> i32 {
    let mut level = (y.floor() as i32).min(SIZE_Y as i32);
    while level > 0 && !solid(w, x, level - 1, z) {
        level -= 1;
    }
    level
}

struct Columns {
    lo: i32,
    n: i32,
    dist: Vec<i32>,
    prev: Vec<i32>,
    level: Vec<i32>,
}

impl Columns {
    fn idx(&self, x: i32, z: i32) -> Option<usize> {
        let (i, j) = (x - self.lo, z - self.lo);
        ((0..self.n).contains(&i) && (0..self.n).contains(&j)).then(|| (i * self.n + j) as usize)
    }

    fn level(&self, x: i32, z: i32) -> Option<i32> {
        self.idx(x, z).filter(|&i| self.dist[i] >= 0).map(|i| self.level[i])
    }

    fn dist(&self, x: i32, z: i32) -> Option<i32> {
        self.idx(x, z).map(|i| self.dist[i]).filter(|&d| d >= 0)
    }

    /// Columns from the start to `(x, z)`, inclusive.
    fn path(&self, x: i32, z: i32) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        let Some(mut i) = self.idx(x, z).filter(|&i| self.dist[i] >= 0) else { return out };
        loop {
            out.push((i as i32 / self.n + self.lo, i as i32 % self.n + self.lo));
            if self.prev[i] < 0 {
                break;
            }
            i = self.prev[i] as usize;
        }
        out.reverse();
        out
    }
}

/// Standing level reached by moving into column `(x, z)` at body level `from`:
/// the body cells must be free, then the agent drops to the first floor.
fn enter_level(w: &Grid, x: i32, z: i32, from: i32) -> Option<i32> {
    if solid(w, x, from, z) || solid(w, x, from + 1, z) {
        return None;
    }
    Some(floor_below(w, x, z, from as f64))
}

/// Breadth-first search over columns the agent can walk, drop or hop into,
/// starting at standing level `level`.
fn ground_bfs(w: &Grid, cfg: &PhysicsConfig, start: (i32, i32), level: i32) -> Columns {
    let (lo, hi) = platform_columns(cfg);
    let n = hi - lo + 1;
    let cells = (n * n) as usize;
    let mut cols = Columns { lo, n, dist: vec![-1; cells], prev: vec![-1; cells], level: vec![0; cells] };
    let Some(s) = cols.idx(start.0, start.1) else { return cols };
    cols.dist[s] = 0;
    cols.level[s] = level;
    let mut queue = VecDeque::from([start]);
    while let Some((x, z)) = queue.pop_front() {
        let i0 = cols.idx(x, z).unwrap();
        let (d, l) = (cols.dist[i0], cols.level[i0]);
        for (dx, dz) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, nz) = (x + dx, z + dz);
            let Some(i) = cols.idx(nx, nz) else { continue };
            if cols.dist[i] >= 0 {
                continue;
            }
            // Walk or drop; otherwise hop onto a block one level up.
            let next = enter_level(w, nx, nz, l).or_else(|| {
                let up = solid(w, nx, l, nz) && !solid(w, x, l + 2, z);
                (up && enter_level(w, nx, nz, l + 1) == Some(l + 1)).then_some(l + 1)
            });
            if let Some(nl) = next {
                cols.dist[i] = d + 1;
                cols.prev[i] = i0 as i32;
                cols.level[i] = nl;
                queue.push_back((nx, nz));
            }
        }
    }
    cols
}

fn camera_toward(agent: &AgentState, yaw: f64, pitch: f64, clamp: f64) -> (f64, f64) {
    let dy = wrap(yaw - agent.yaw).clamp(-clamp, clamp);
    let dp = (pitch - agent.pitch).clamp(-clamp, clamp);
    (dy, dp)
}

fn turned(agent: &AgentState, d_yaw: f64, d_pitch: f64, clamp: f64) -> AgentState {
    let mut a = *agent;
    a.turn(d_yaw, d_pitch, clamp);
    a
}

/// Walking intent that moves along world axis `axis` (0 = x, 2 = z) with sign `sign`.
fn axis_intent(yaw: f64, axis: usize, sign: f64) -> Intent {
    let f = crate::physics::forward_vector(yaw);
    let r = crate::physics::right_vector(yaw);
    let options = [
        (f.axis(axis), Intent { forward: true, ..Intent::default() }),
        (-f.axis(axis), Intent { back: true, ..Intent::default() }),
        (r.axis(axis), Intent { right: true, ..Intent::default() }),
        (-r.axis(axis), Intent { left: true, ..Intent::default() }),
    ];
    options.into_iter().max_by(|a, b| (a.0 * sign).total_cmp(&(b.0 * sign))).unwrap().1
}

fn intent_action(i: Intent) -> DiscreteAction {
    if i.forward {
        DiscreteAction::Forward
    } else if i.back {
        DiscreteAction::Backward
    } else if i.right {
        DiscreteAction::Right
    } else if i.left {
        DiscreteAction::Left
    } else {
        DiscreteAction::Noop
    }
}

/// Face centers of `c` paired with their outward normals, for faces whose
/// neighbor is air.
fn exposed_faces(w: &Grid, c: GridCoord) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    let b = world_of(c);
    let mid = (b.min + b.max) * 0.5;
    const DIRS: [(i64, i64, i64); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
    DIRS.into_iter().filter_map(move |(dx, dy, dz)| {
        if dy < 0 && c.y() == 0 {
            return None;
        }
        if let Some(n) = c.offset(dx, dy, dz) {
            if !w.get(n).is_air() {
                return None;
            }
        }
        let normal = Vec3::new(dx as f64, dy as f64, dz as f64);
        Some((mid + normal * 0.5, normal))
    })
}

impl HeuristicBuilder {
    pub fn new() -> Self {
        HeuristicBuilder::default()
    }

    /// Builds `goal` instead of the segment's target.
    pub fn with_goal(goal: Grid) -> Self {
        HeuristicBuilder { goal: Some(goal), ..HeuristicBuilder::default() }
    }

    fn clear(&mut self) {
        self.job = None;
        self.scaffold.clear();
        self.blacklist.clear();
    }

    fn surplus(&self, v: &AgentView<'_>) -> [i64; NUM_COLORS] {
        let mut s = [0i64; NUM_COLORS];
        for (i, slot) in s.iter_mut().enumerate() {
            *slot = v.inventory.counts[i] as i64;
        }
        for (c, id) in self.target.blocks() {
            if v.world.get(c) != id {
                s[id.get() as usize - 1] -= 1;
            }
        }
        s
    }

    fn scaffold_color(&self, v: &AgentView<'_>) -> Option<BlockId> {
        let s = self.surplus(v);
        let best = (0..NUM_COLORS).filter(|&i| v.inventory.counts[i] > 0).max_by_key(|&i| (s[i], -(i as i64)))?;
        BlockId::color(best as u8 + 1).ok()
    }

    fn plan(&mut self, v: &AgentView<'_>) -> Option<Job> {
        let a = v.agent;
        let (ax, az) = column_of(a.position);
        let level = if a.grounded { a.position.y.round() as i32 } else { floor_below(v.world, ax, az, a.position.y) };
        let under_agent = |c: GridCoord| world_column(c) == (ax, az) && (c.y() as i32) < level;

        let mut wrong = Vec::new();
        let mut missing = Vec::new();
        for c in GridCoord::all() {
            let (have, want) = (v.world.get(c), self.target.get(c));
            if have == want {
                continue;
            }
            if !have.is_air() && !under_agent(c) {
                wrong.push(c);
            }
            if !want.is_air() && have.is_air() {
                missing.push(c);
            }
        }
        self.scaffold.retain(|&c| !v.world.get(c).is_air() && self.target.get(c) != v.world.get(c));
        if !missing.is_empty() {
            wrong.retain(|c| !self.scaffold.contains(c));
        }
        let cols = ground_bfs(v.world, v.physics, (ax, az), level);
        let ctx = PlanCtx { v, cols: &cols, col: (ax, az), level, target: &self.target };

        if !wrong.is_empty() {
            self.candidates.clear();
            for (seq, &c) in wrong.iter().enumerate() {
                for (aim, normal) in exposed_faces(v.world, c) {
                    ctx.push_stands(&mut self.candidates, seq as u32, Kind::Break { cell: c }, aim, normal, HitTarget::Block(c));
                }
            }
            if let Some(job) = pick(&mut self.candidates, &self.blacklist, &ctx) {
                return Some(job);
            }
        }

        if !missing.is_empty() {
            self.candidates.clear();
            for (seq, &c) in missing.iter().enumerate() {
                let color = self.target.get(c);
                if v.inventory.count(color) == 0 {
                    continue;
                }
                ctx.push_placements(&mut self.candidates, seq as u32, c, color);
            }
            if let Some(job) = pick(&mut self.candidates, &self.blacklist, &ctx) {
                return Some(job);
            }
            // Nothing placeable: add a temporary support under a floating block.
            if let Some(color) = self.scaffold_color(v) {
                self.candidates.clear();
                for (seq, &c) in missing.iter().enumerate() {
                    let (x, z) = world_column(c);
                    let mut y = c.y() as i32 - 1;
                    if y < 0 || solid(v.world, x, y, z) {
                        continue;
                    }
                    while y > 0 && !solid(v.world, x, y - 1, z) {
                        y -= 1;
                    }
                    let s = zone_cell(x, y, z).unwrap();
                    ctx.push_placements(&mut self.candidates, seq as u32, s, color);
                }
                if let Some(job) = pick(&mut self.candidates, &self.blacklist, &ctx) {
                    if let Kind::Place { cell, .. } = job.kind {
                        if self.target.get(cell).is_air() {
                            self.scaffold.push(cell);
                        }
                    }
                    return Some(job);
                }
            }
        }

        if level > 0 {
            // Off a pillar by breaking it; off target blocks by walking to the nearest free ground.
            let below = zone_cell(ax, level - 1, az);
            let mut stand = Stand { x: ax, z: az, h: 0 };
            if below.is_none_or(|b| v.world.get(b).is_air() || self.target.get(b) == v.world.get(b)) {
                let (lo, hi) = platform_columns(v.physics);
                let ground = (lo..=hi)
                    .flat_map(|x| (lo..=hi).map(move |z| (x, z)))
                    .filter(|&(x, z)| cols.level(x, z) == Some(0))
                    .min_by_key(|&(x, z)| (cols.dist(x, z), x, z))?;
                stand = Stand { x: ground.0, z: ground.1, h: 0 };
            }
            return Some(Job { kind: Kind::Descend, stand, aim: Vec3::ZERO, expect: HitTarget::Ground, steps: 0, hop: None });
        }
        None
    }

    fn fail(&mut self, job: &Job) {
        if let Kind::Place { cell, .. } | Kind::Break { cell } = job.kind {
            self.blacklist.push((cell, job.stand));
        }
    }

    fn execute(&self, v: &AgentView<'_>, job: &mut Job) -> Step {
        let a = v.agent;
        let cfg = v.physics;
        let clamp = cfg.camera_clamp;
        let (cx, cz) = column_of(a.position);
        let stand = job.stand;
        match job.kind {
            Kind::Place { cell, .. } if !v.world.get(cell).is_air() => return Step::Done,
            Kind::Break { cell } if v.world.get(cell).is_air() => return Step::Done,
            _ => {}
        }
        let at_col = (cx, cz) == (stand.x, stand.z);

        if !a.grounded {
            let (dy, dp) = camera_toward(a, a.yaw, -90.0, clamp);
            if at_col {
                let base = floor_below(v.world, cx, cz, a.position.y);
                if base < stand.h && a.position.y >= base as f64 + 1.0 && v.inventory.count(v.selected) > 0 {
                    let post = turned(a, dy, dp, clamp);
                    if let Some(cell) = zone_cell(cx, base, cz) {
                        let expect = if base == 0 {
                            HitTarget::Ground
                        } else {
                            HitTarget::Block(zone_cell(cx, base - 1, cz).unwrap())
                        };
                        if raycast(&post, v.world, cfg).is_some_and(|h| h.hit == expect && h.adjacent_cell == Some(cell)) {
                            return Step::Act(Action::turn(DiscreteAction::Place, dy, dp));
                        }
                    }
                }
            }
            if let Some(col) = job.hop {
                return Step::Act(self.hop_step(a, col));
            }
            return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
        }
        job.hop = None;

        let level = a.position.y.round() as i32;
        let below = zone_cell(cx, level - 1, cz);
        // Standing on target blocks, or held up by a neighbor column's block.
        let on_structure = below.is_none_or(|b| v.world.get(b).is_air() || self.target.get(b) == v.world.get(b));
        if level > 0 && (!at_col || level > stand.h) && !(on_structure && !at_col) {
            let (dy, dp) = camera_toward(a, a.yaw, -90.0, clamp);
            let post = turned(a, dy, dp, clamp);
            if post.pitch > -90.0 + ANGLE_EPS {
                return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
            }
            let Some(below) = below else { return Step::Fail };
            return if raycast(&post, v.world, cfg).is_some_and(|h| h.hit == HitTarget::Block(below)) {
                Step::Act(Action::turn(DiscreteAction::Break, dy, dp))
            } else {
                Step::Fail
            };
        }

        let center = Vec3::new(stand.x as f64 + 0.5, a.position.y, stand.z as f64 + 0.5);
        let pitch_goal = match job.kind {
            Kind::Descend if level == 0 => return Step::Done,
            Kind::Descend => a.pitch,
            _ if stand.h > 0 => -90.0,
            _ => aim_angles(center + Vec3::new(0.0, cfg.eye_height, 0.0), job.aim).1,
        };
        let off = a.position - center;
        if !(at_col && off.x.abs() < CENTER_TOL && off.z.abs() < CENTER_TOL) {
            return self.walk(v, job, pitch_goal);
        }

        if level < stand.h {
            let (dy, dp) = camera_toward(a, a.yaw, -90.0, clamp);
            if v.inventory.count(v.selected) == 0 {
                return match self.scaffold_color(v) {
                    Some(c) => Step::Act(Action::turn(DiscreteAction::Select(c), dy, dp)),
                    None => Step::Fail,
                };
            }
            if turned(a, dy, dp, clamp).pitch > -90.0 + ANGLE_EPS {
                return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
            }
            if solid(v.world, cx, level + 2, cz) {
                return Step::Fail;
            }
            return Step::Act(Action::turn(DiscreteAction::Jump, dy, dp));
        }

        let (yaw, pitch) = aim_angles(a.eye(cfg), job.aim);
        let (dy, dp) = camera_toward(a, yaw, pitch, clamp);
        if let Kind::Place { color, .. } = job.kind {
            if v.selected != color {
                return Step::Act(Action::turn(DiscreteAction::Select(color), dy, dp));
            }
        }
        let post = turned(a, dy, dp, clamp);
        let reached = wrap(post.yaw - yaw).abs() < ANGLE_EPS && (post.pitch - pitch).abs() < ANGLE_EPS;
        if !reached {
            return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
        }
        let hit = raycast(&post, v.world, cfg);
        match job.kind {
            Kind::Place { cell, .. } => {
                if hit.is_some_and(|h| h.hit == job.expect && h.adjacent_cell == Some(cell))
                    && !post.bbox(cfg).overlaps(&world_of(cell), crate::physics::CONTACT_EPS)
                {
                    Step::Final(Action::turn(DiscreteAction::Place, dy, dp))
                } else {
                    Step::Fail
                }
            }
            Kind::Break { cell } => {
                if hit.is_some_and(|h| h.hit == HitTarget::Block(cell)) {
                    Step::Final(Action::turn(DiscreteAction::Break, dy, dp))
                } else {
                    Step::Fail
                }
            }
            Kind::Descend => Step::Done,
        }
    }

    fn walk(&self, v: &AgentView<'_>, job: &mut Job, pitch_goal: f64) -> Step {
        let a = v.agent;
        let clamp = v.physics.camera_clamp;
        let here = column_of(a.position);
        let level = a.position.y.round() as i32;
        let cols = ground_bfs(v.world, v.physics, here, level);
        let path = cols.path(job.stand.x, job.stand.z);
        if path.is_empty() {
            return Step::Fail;
        }
        let next = if path.len() > 1 { path[1] } else { path[0] };
        let goal = Vec3::new(next.0 as f64 + 0.5, a.position.y, next.1 as f64 + 0.5);
        let snap = wrap((a.yaw / 90.0).round() * 90.0);
        let (dy, dp) = camera_toward(a, snap, pitch_goal, clamp);
        let yaw = wrap(a.yaw + dy);
        if wrap(yaw - snap).abs() > ANGLE_EPS {
            return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
        }
        let d = goal - a.position;
        // Center on the cross axis first so the box never clips a neighbor column.
        let main = if next.0 != here.0 { 0 } else { 2 };
        let cross = 2 - main;
        let axis = if d.axis(cross).abs() >= CENTER_TOL || d.axis(main).abs() < CENTER_TOL { cross } else { main };
        if d.axis(axis).abs() < 1e-9 {
            return Step::Act(Action::turn(DiscreteAction::Noop, dy, dp));
        }
        if axis == main && cols.level(next.0, next.1).is_some_and(|l| l > level) {
            job.hop = Some(next);
            return Step::Act(Action::turn(DiscreteAction::Jump, dy, dp));
        }
        let intent = axis_intent(yaw, axis, d.axis(axis).signum());
        Step::Act(Action::turn(intent_action(intent), dy, dp))
    }

    /// Airborne push toward the center of the column being hopped onto.
    fn hop_step(&self, a: &AgentState, col: (i32, i32)) -> Action {
        let d = Vec3::new(col.0 as f64 + 0.5, 0.0, col.1 as f64 + 0.5) - a.position;
        let axis = if d.x.abs() > d.z.abs() { 0 } else { 2 };
        if d.axis(axis).abs() < CENTER_TOL {
            return Action::noop();
        }
        Action::discrete(intent_action(axis_intent(a.yaw, axis, d.axis(axis).signum())))
    }
}

/// Cheapest candidate whose aim the ray cast confirms from its standing spot.
fn pick(list: &mut Vec<Candidate>, blacklist: &[(GridCoord, Stand)], ctx: &PlanCtx<'_, '_>) -> Option<Job> {
    list.retain(|c| {
        let cell = match c.kind {
            Kind::Place { cell, .. } | Kind::Break { cell } => cell,
            Kind::Descend => return true,
        };
        !blacklist.contains(&(cell, c.stand))
    });
    list.sort_unstable_by(|a, b| a.cost.total_cmp(&b.cost).then(a.seq.cmp(&b.seq)));
    list.iter()
        .take(400)
        .find(|c| ctx.verify(c))
        .map(|c| Job { kind: c.kind, stand: c.stand, aim: c.aim, expect: c.expect, steps: 0, hop: None })
}

struct PlanCtx<'a, 'v> {
    v: &'a AgentView<'v>,
    cols: &'a Columns,
    col: (i32, i32),
    level: i32,
    target: &'a Grid,
}

impl PlanCtx<'_, '_> {
    /// Highest pillar that can be raised in a column (0 for ground only), or
    /// `None` when the agent cannot stand there at all.
    fn max_height(&self, x: i32, z: i32) -> Option<i32> {
        let w = self.v.world;
        let own = (x, z) == self.col;
        let air = |y: i32| (own && y < self.level) || !solid(w, x, y, z);
        if !air(0) || !air(1) {
            return None;
        }
        if zone_cell(x, 0, z).is_none() {
            return Some(0);
        }
        let mut h = 0;
        while h < MAX_PILLAR && air(h + 2) && self.target.get(zone_cell(x, h, z).unwrap()).is_air() {
            h += 1;
        }
        Some(h)
    }

    fn move_cost(&self, s: Stand) -> Option<f64> {
        if (s.x, s.z) == self.col {
            let dh = s.h - self.level;
            let c = if dh >= 0 { dh as f64 * CLIMB_COST } else { -dh as f64 * DESCEND_COST };
            return Some(c + s.h as f64 * DESCEND_COST);
        }
        let d = self.cols.dist(s.x, s.z)?;
        Some(self.level as f64 * DESCEND_COST + d as f64 * WALK_COST + s.h as f64 * (CLIMB_COST + DESCEND_COST))
    }

    fn push_placements(&self, out: &mut Vec<Candidate>, seq: u32, c: GridCoord, color: BlockId) {
        let kind = Kind::Place { cell: c, color };
        let b = world_of(c);
        let mid = (b.min + b.max) * 0.5;
        if c.y() == 0 {
            let aim = Vec3::new(mid.x, 0.0, mid.z);
            self.push_stands(out, seq, kind, aim, Vec3::new(0.0, 1.0, 0.0), HitTarget::Ground);
        }
        const DIRS: [(i64, i64, i64); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
        for (dx, dy, dz) in DIRS {
            let Some(n) = c.offset(dx, dy, dz) else { continue };
            if self.v.world.get(n).is_air() {
                continue;
            }
            // Face of `n` that looks back at `c`.
            let toward = Vec3::new(dx as f64, dy as f64, dz as f64);
            self.push_stands(out, seq, kind, mid + toward * 0.5, -toward, HitTarget::Block(n));
        }
    }

    fn push_stands(&self, out: &mut Vec<Candidate>, seq: u32, kind: Kind, aim: Vec3, normal: Vec3, expect: HitTarget) {
        let v = self.v;
        let reach = v.physics.reach - 0.05;
        let eye_h = v.physics.eye_height;
        let cell = match kind {
            Kind::Place { cell, .. } | Kind::Break { cell } => cell,
            Kind::Descend => return,
        };
        let (cell_x, cell_z) = world_column(cell);
        let r = reach.ceil() as i32;
        let (ax, az) = (aim.x.floor() as i32, aim.z.floor() as i32);
        for x in ax - r..=ax + r {
            for z in az - r..=az + r {
                let Some(hmax) = self.max_height(x, z) else { continue };
                let mut taken = 0;
                for h in 0..=hmax {
                    if (x, z) == (cell_x, cell_z) && (cell.y() as i32) < h + 2 {
                        break;
                    }
                    let eye = Vec3::new(x as f64 + 0.5, h as f64 + eye_h, z as f64 + 0.5);
                    let d = aim - eye;
                    if (eye - aim).dot(normal) < 0.05 || d.length() > reach {
                        continue;
                    }
                    let stand = Stand { x, z, h };
                    let Some(mv) = self.move_cost(stand) else { continue };
                    let (yaw, pitch) = aim_angles(eye, aim);
                    let turn = wrap(yaw - v.agent.yaw).abs().max((pitch - v.agent.pitch).abs()) / 5.0;
                    out.push(Candidate { cost: mv + turn, seq, kind, stand, aim, expect });
                    taken += 1;
                    if taken == 2 {
                        break;
                    }
                }
            }
        }
    }

    /// Ray-casts the aim from the candidate's spot in the world as it will be
    /// once the agent stands there.
    fn verify(&self, c: &Candidate) -> bool {
        let v = self.v;
        let mut w = v.world.clone();
        let s = c.stand;
        let (ax, az) = self.col;
        for y in 0..self.level {
            if let Some(g) = zone_cell(ax, y, az) {
                if self.target.get(g) != w.get(g) {
                    w.set_block(g, BlockId::AIR);
                }
            }
        }
        for y in 0..s.h {
            if let Some(g) = zone_cell(s.x, y, s.z) {
                w.set_block(g, BlockId::BLUE);
            }
        }
        let pos = Vec3::new(s.x as f64 + 0.5, s.h as f64, s.z as f64 + 0.5);
        let eye = pos + Vec3::new(0.0, v.physics.eye_height, 0.0);
        let (yaw, pitch) = aim_angles(eye, c.aim);
        let agent = AgentState::new(pos, yaw, pitch);
        match (c.kind, raycast(&agent, &w, v.physics)) {
            (Kind::Place { cell, .. }, Some(h)) => {
                h.hit == c.expect
                    && h.adjacent_cell == Some(cell)
                    && !agent.bbox(v.physics).overlaps(&world_of(cell), crate::physics::CONTACT_EPS)
            }
            (Kind::Break { cell }, Some(h)) => h.hit == HitTarget::Block(cell),
            _ => false,
        }
    }
}

impl Agent for HeuristicBuilder {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn reset(&mut self, _seed: u64) {
        self.segment = None;
        self.clear();
    }

    fn act(&mut self, v: &AgentView<'_>) -> Action {
        if self.segment != Some(v.segment_index) || v.steps_in_segment == 0 {
            self.segment = Some(v.segment_index);
            self.target = self.goal.clone().unwrap_or_else(|| v.segment.target_grid());
            self.clear();
        }
        for _ in 0..4 {
            let mut job = match self.job.take() {
                Some(j) => j,
                None => match self.plan(v) {
                    Some(j) => j,
                    None => return Action::noop(),
                },
            };
            job.steps += 1;
            if job.steps > JOB_STEP_LIMIT {
                self.fail(&job);
                continue;
            }
            match self.execute(v, &mut job) {
                Step::Act(action) => {
                    self.job = Some(job);
                    return action;
                }
                Step::Final(action) => return action,
                Step::Done => {}
                Step::Fail => self.fail(&job),
            }
        }
        Action::noop()
    }
}
