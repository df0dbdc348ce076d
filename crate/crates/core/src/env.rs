//! The episode state machine.
//!
//! Each step runs: camera delta, the discrete action (place / break / select
//! or a locomotion intent), one physics integration, the reward as the change
//! of the maximal intersection with the current target, and segment
//! progression. When a segment is solved the world is forced to the next
//! segment's recorded context within the same step and the agent respawns;
//! the episode ends after the last segment or when a segment runs out of
//! steps.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, EnvError};
use crate::geom::Vec3;
use crate::physics::{
    box_collides, integrate, try_break, try_place, AgentState, Intent, Inventory, PhysicsConfig, Rejection,
};
use crate::render::{Framebuffer, NoRenderer, PovBackend, RenderConfig, Renderer};
use crate::scoring::{max_intersection_prepared, F1Score, PreparedTarget};
use crate::tasks::{Progress, SegmentOutcome, Task, TaskSession};
use crate::voxel::{BlockId, Grid, GridCoord, NUM_COLORS};

pub const NUM_ACTIONS: u8 = 14;

/// Spawn point: outside the zone center on +z, facing the center.
pub const SPAWN_POSITION: Vec3 = Vec3::new(0.5, 0.0, 3.5);
pub const SPAWN_YAW: f64 = -90.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscreteAction {
    Noop,
    Forward,
    Backward,
    Left,
    Right,
    Jump,
    Break,
    Place,
    Select(BlockId),
}

impl DiscreteAction {
    pub fn from_id(id: u8) -> Option<DiscreteAction> {
        Some(match id {
            0 => DiscreteAction::Noop,
            1 => DiscreteAction::Forward,
            2 => DiscreteAction::Backward,
            3 => DiscreteAction::Left,
            4 => DiscreteAction::Right,
            5 => DiscreteAction::Jump,
            6 => DiscreteAction::Break,
            7 => DiscreteAction::Place,
            8..=13 => DiscreteAction::Select(BlockId::color(id - 7).ok()?),
            _ => return None,
        })
    }

    pub fn id(self) -> u8 {
        match self {
            DiscreteAction::Noop => 0,
            DiscreteAction::Forward => 1,
            DiscreteAction::Backward => 2,
            DiscreteAction::Left => 3,
            DiscreteAction::Right => 4,
            DiscreteAction::Jump => 5,
            DiscreteAction::Break => 6,
            DiscreteAction::Place => 7,
            DiscreteAction::Select(b) => 7 + b.get(),
        }
    }

    fn intent(self) -> Intent {
        let mut i = Intent::default();
        match self {
            DiscreteAction::Forward => i.forward = true,
            DiscreteAction::Backward => i.back = true,
            DiscreteAction::Left => i.left = true,
            DiscreteAction::Right => i.right = true,
            DiscreteAction::Jump => i.jump = true,
            _ => {}
        }
        i
    }
}

/// One discrete id plus a camera delta `(Δyaw, Δpitch)` in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Action {
    pub discrete: DiscreteAction,
    pub d_yaw: f64,
    pub d_pitch: f64,
}

impl Action {
    pub fn new(id: u8, d_yaw: f64, d_pitch: f64) -> Option<Action> {
        Some(Action { discrete: DiscreteAction::from_id(id)?, d_yaw, d_pitch })
    }

    pub fn discrete(discrete: DiscreteAction) -> Action {
        Action { discrete, d_yaw: 0.0, d_pitch: 0.0 }
    }

    pub fn noop() -> Action {
        Action::discrete(DiscreteAction::Noop)
    }

    pub fn turn(discrete: DiscreteAction, d_yaw: f64, d_pitch: f64) -> Action {
        Action { discrete, d_yaw, d_pitch }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InventorySpec {
    Uniform(u32),
    PerColor([u32; NUM_COLORS]),
}

impl InventorySpec {
    pub fn inventory(&self) -> Inventory {
        match *self {
            InventorySpec::Uniform(n) => Inventory::uniform(n),
            InventorySpec::PerColor(c) => Inventory::new(c),
        }
    }
}

/// Environment configuration document.
///
/// Keys: `render`, `max_steps_per_segment`, `reward_scale`,
/// `initial_inventory` (one count or six), `physics.*`, `renderer.*`, `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub render: bool,
    pub max_steps_per_segment: u32,
    pub reward_scale: f64,
    pub initial_inventory: InventorySpec,
    pub physics: PhysicsConfig,
    pub renderer: RenderConfig,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            render: false,
            max_steps_per_segment: 500,
            reward_scale: 1.0,
            initial_inventory: InventorySpec::Uniform(20),
            physics: PhysicsConfig::default(),
            renderer: RenderConfig::default(),
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn from_json(doc: &str) -> Result<Self, ConfigError> {
        let cfg: EnvConfig = serde_json::from_str(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_steps_per_segment < 1 {
            return Err(ConfigError::Invalid("max_steps_per_segment must be at least 1".into()));
        }
        if !(self.reward_scale.is_finite() && self.reward_scale > 0.0) {
            return Err(ConfigError::Invalid("reward_scale must be positive".into()));
        }
        self.physics.validate()?;
        self.renderer.validate()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Borrowed view of the current observation.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    /// 64×64×3 row-major RGB, present only while rendering is enabled.
    pub pov: Option<&'a [u8]>,
    pub inventory: [u32; NUM_COLORS],
    pub grid: &'a Grid,
    /// `[x, y, z, pitch, yaw]`.
    pub agent: [f64; 5],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionOutcome {
    None,
    Placed { x: u8, y: u8, z: u8, id: u8 },
    Broken { x: u8, y: u8, z: u8, id: u8 },
    Selected { id: u8 },
    Rejected { reason: Rejection },
}

impl ActionOutcome {
    fn placed(c: GridCoord, id: BlockId) -> Self {
        ActionOutcome::Placed { x: c.x() as u8, y: c.y() as u8, z: c.z() as u8, id: id.get() }
    }
    fn broken(c: GridCoord, id: BlockId) -> Self {
        ActionOutcome::Broken { x: c.x() as u8, y: c.y() as u8, z: c.z() as u8, id: id.get() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Maximal intersection with the segment that was scored this step.
    pub intersection: usize,
    pub score: F1Score,
    /// Segment scored this step.
    pub segment_index: usize,
    /// The scored segment was solved and the session moved on.
    pub segment_complete: bool,
    pub timeout: bool,
    pub outcome: ActionOutcome,
    pub render_calls: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Accumulated wall time per step phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub physics_ns: u64,
    pub scoring_ns: u64,
    pub render_ns: u64,
    pub steps: u64,
}

struct Episode {
    session: TaskSession,
    target: PreparedTarget,
    target_count: usize,
    world: Grid,
    built_count: usize,
    agent: AgentState,
    inventory: Inventory,
    selected: BlockId,
    step_index: u32,
    prev_intersection: usize,
    done: bool,
}

/// Environment with a pluggable frame source.
///
/// `Env` (the default) carries the software renderer and honors
/// `EnvConfig::render`; [`HeadlessEnv`] has no renderer compiled in.
pub struct Env<B: PovBackend = Renderer> {
    cfg: EnvConfig,
    backend: B,
    rng: ChaCha8Rng,
    episode: Option<Episode>,
    frame: Option<Framebuffer>,
    render_calls: u64,
    timing: Option<PhaseTimes>,
}

pub type HeadlessEnv = Env<NoRenderer>;

impl Env<Renderer> {
    pub fn new(cfg: EnvConfig) -> Result<Self, EnvError> {
        let backend = Renderer::new(cfg.renderer.clone());
        Env::with_backend(cfg, backend)
    }
}

impl Env<NoRenderer> {
    pub fn headless(cfg: EnvConfig) -> Result<Self, EnvError> {
        Env::with_backend(cfg, NoRenderer)
    }
}

impl<B: PovBackend> Env<B> {
    pub fn with_backend(cfg: EnvConfig, backend: B) -> Result<Self, EnvError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Env { cfg, backend, rng, episode: None, frame: None, render_calls: 0, timing: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// All stochasticity derives from this seed. Current dynamics draw nothing from it.
    pub fn seed(&mut self, seed: u64) {
        self.cfg.seed = seed;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn rendering(&self) -> bool {
        B::AVAILABLE && self.cfg.render
    }

    /// Toggles rendering. Disabling releases the framebuffer.
    pub fn set_render(&mut self, on: bool) {
        self.cfg.render = on;
        if !self.rendering() {
            self.frame = None;
        } else if self.episode.is_some() {
            self.render_now();
        }
    }

    pub fn render_calls(&self) -> u64 {
        self.render_calls
    }

    pub fn enable_timing(&mut self, on: bool) {
        self.timing = on.then(PhaseTimes::default);
    }

    pub fn timing(&self) -> Option<PhaseTimes> {
        self.timing
    }

    pub fn reset(&mut self, task: Arc<Task>) -> Result<Observation<'_>, EnvError> {
        self.reset_at(task, 0)
    }

    /// Starts an episode at segment `k` (training-style mid-task reset).
    pub fn reset_at(&mut self, task: Arc<Task>, k: usize) -> Result<Observation<'_>, EnvError> {
        let mut session = TaskSession::new(task);
        session.start_at(k)?;
        let mut ep = Episode {
            session,
            target: PreparedTarget::new(&Grid::empty()),
            target_count: 0,
            world: Grid::empty(),
            built_count: 0,
            agent: AgentState::new(SPAWN_POSITION, SPAWN_YAW, 0.0),
            inventory: self.cfg.initial_inventory.inventory(),
            selected: BlockId::BLUE,
            step_index: 0,
            prev_intersection: 0,
            done: false,
        };
        load_segment(&mut ep, &self.cfg.physics);
        self.episode = Some(ep);
        if self.rendering() {
            self.render_now();
        } else {
            self.frame = None;
        }
        Ok(self.observation().expect("episode just started"))
    }

    fn render_now(&mut self) {
        let ep = self.episode.as_ref().expect("render needs an episode");
        let frame = self.frame.get_or_insert_with(Framebuffer::new);
        let t0 = self.timing.is_some().then(Instant::now);
        self.backend.render(&ep.world, &ep.agent, &self.cfg.physics, frame);
        self.render_calls += 1;
        if let (Some(t), Some(t0)) = (self.timing.as_mut(), t0) {
            t.render_ns += t0.elapsed().as_nanos() as u64;
        }
    }

    pub fn observation(&self) -> Option<Observation<'_>> {
        let ep = self.episode.as_ref()?;
        Some(Observation {
            pov: if self.rendering() { self.frame.as_ref().map(|f| f.as_bytes()) } else { None },
            inventory: ep.inventory.counts,
            grid: &ep.world,
            agent: ep.agent.to_vector(),
        })
    }

    pub fn frame(&self) -> Option<&Framebuffer> {
        if self.rendering() {
            self.frame.as_ref()
        } else {
            None
        }
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_none_or(|e| e.done)
    }

    pub fn world(&self) -> Option<&Grid> {
        self.episode.as_ref().map(|e| &e.world)
    }

    pub fn agent(&self) -> Option<&AgentState> {
        self.episode.as_ref().map(|e| &e.agent)
    }

    pub fn inventory(&self) -> Option<Inventory> {
        self.episode.as_ref().map(|e| e.inventory)
    }

    pub fn selected(&self) -> Option<BlockId> {
        self.episode.as_ref().map(|e| e.selected)
    }

    pub fn session(&self) -> Option<&TaskSession> {
        self.episode.as_ref().map(|e| &e.session)
    }

    pub fn segment_index(&self) -> Option<usize> {
        self.episode.as_ref().map(|e| e.session.index())
    }

    pub fn steps_in_segment(&self) -> Option<u32> {
        self.episode.as_ref().map(|e| e.step_index)
    }

    pub fn current_intersection(&self) -> Option<usize> {
        self.episode.as_ref().map(|e| e.prev_intersection)
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.done {
            return Err(EnvError::EpisodeDone);
        }
        let phys = &self.cfg.physics;
        let timing = self.timing.is_some();
        let t0 = timing.then(Instant::now);

        ep.agent.turn(action.d_yaw, action.d_pitch, phys.camera_clamp);
        let outcome = match action.discrete {
            DiscreteAction::Break => match try_break(&mut ep.world, &ep.agent, &mut ep.inventory, phys) {
                Ok((c, id)) => {
                    ep.built_count -= 1;
                    ActionOutcome::broken(c, id)
                }
                Err(reason) => ActionOutcome::Rejected { reason },
            },
            DiscreteAction::Place => {
                match try_place(&mut ep.world, &ep.agent, &mut ep.inventory, ep.selected, phys) {
                    Ok(c) => {
                        ep.built_count += 1;
                        ActionOutcome::placed(c, ep.selected)
                    }
                    Err(reason) => ActionOutcome::Rejected { reason },
                }
            }
            DiscreteAction::Select(id) => {
                ep.selected = id;
                ActionOutcome::Selected { id: id.get() }
            }
            _ => ActionOutcome::None,
        };
        ep.agent = integrate(&ep.agent, action.discrete.intent(), &ep.world, phys);
        ep.step_index += 1;

        let t1 = timing.then(Instant::now);
        let changed = matches!(outcome, ActionOutcome::Placed { .. } | ActionOutcome::Broken { .. });
        let intersection = if changed {
            max_intersection_prepared(&ep.world, &ep.target).intersection
        } else {
            ep.prev_intersection
        };
        let reward = self.cfg.reward_scale * (intersection as f64 - ep.prev_intersection as f64);
        ep.prev_intersection = intersection;
        let score = F1Score::from_counts(intersection, ep.built_count, ep.target_count);
        let segment_index = ep.session.index();
        let complete = ep.built_count == ep.target_count && intersection == ep.target_count;
        let mut timeout = false;
        let record = SegmentOutcome { segment: segment_index, steps: ep.step_index, score, complete, timeout: false };
        if complete {
            match ep.session.advance(record)? {
                Progress::Next(_) => load_segment(ep, phys),
                Progress::Finished => ep.done = true,
            }
        } else if ep.step_index >= self.cfg.max_steps_per_segment {
            timeout = true;
            ep.session.abandon(SegmentOutcome { timeout: true, ..record })?;
            ep.done = true;
        }
        let done = ep.done;
        let t2 = timing.then(Instant::now);
        if let (Some(t), Some(t0), Some(t1), Some(t2)) = (self.timing.as_mut(), t0, t1, t2) {
            t.physics_ns += (t1 - t0).as_nanos() as u64;
            t.scoring_ns += (t2 - t1).as_nanos() as u64;
            t.steps += 1;
        }

        if self.rendering() {
            self.render_now();
        }
        Ok(StepResult {
            reward,
            done,
            info: StepInfo {
                intersection,
                score,
                segment_index,
                segment_complete: complete,
                timeout,
                outcome,
                render_calls: self.render_calls,
            },
        })
    }
}

/// Forces the world to the session's current segment context and respawns the agent.
fn load_segment(ep: &mut Episode, phys: &PhysicsConfig) {
    let seg = ep.session.current();
    ep.world = seg.context_grid();
    ep.built_count = ep.world.block_count();
    let target = seg.target_grid();
    ep.target_count = target.block_count();
    ep.target = PreparedTarget::new(&target);
    ep.agent = spawn_agent(&ep.world, phys);
    ep.step_index = 0;
    ep.prev_intersection = max_intersection_prepared(&ep.world, &ep.target).intersection;
}

/// Spawn pose, lifted onto the first free height if context blocks occupy it.
pub fn spawn_agent(world: &Grid, phys: &PhysicsConfig) -> AgentState {
    let mut agent = AgentState::new(SPAWN_POSITION, SPAWN_YAW, 0.0);
    while box_collides(world, &agent.bbox(phys)) {
        agent.position.y += 1.0;
    }
    agent
}
