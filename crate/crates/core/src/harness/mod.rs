//! Agents, evaluation, action logs and benchmarking.

mod bench;
mod builder;
mod eval;
mod log;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, DiscreteAction, Env, NUM_ACTIONS};
use crate::physics::{AgentState, Inventory, PhysicsConfig};
use crate::render::PovBackend;
use crate::tasks::Segment;
use crate::voxel::{BlockId, Grid};

pub use bench::{bench, bench_until, BenchLimit, BenchReport};
pub use builder::HeuristicBuilder;
pub use eval::{
    episode_seed, read_log_dir, replay_logs, run_episode, run_eval, EpisodeRecord, EvalOptions, ScoreReport, SegmentRecord,
    SkillMean,
};
pub use log::{read_log, run_digest, write_log, ActionLog, LogHeader, LogRecord};

/// What an agent may look at before acting.
#[derive(Clone, Copy, Debug)]
pub struct AgentView<'a> {
    pub world: &'a Grid,
    pub agent: &'a AgentState,
    pub inventory: Inventory,
    pub selected: BlockId,
    pub segment: &'a Segment,
    pub segment_index: usize,
    pub steps_in_segment: u32,
    pub physics: &'a PhysicsConfig,
}

impl<'a> AgentView<'a> {
    /// `None` before the first reset.
    pub fn of<B: PovBackend>(env: &'a Env<B>) -> Option<AgentView<'a>> {
        let session = env.session()?;
        Some(AgentView {
            world: env.world()?,
            agent: env.agent()?,
            inventory: env.inventory()?,
            selected: env.selected()?,
            segment: session.current(),
            segment_index: session.index(),
            steps_in_segment: env.steps_in_segment()?,
            physics: &env.config().physics,
        })
    }
}

pub trait Agent: Send {
    fn name(&self) -> &str;
    /// Called before every episode.
    fn reset(&mut self, seed: u64);
    fn act(&mut self, view: &AgentView<'_>) -> Action;
}

/// Uniform over the discrete ids, uniform camera deltas within the clamp.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn sample(&mut self, clamp: f64) -> Action {
        let id = self.rng.gen_range(0..NUM_ACTIONS);
        let d_yaw = self.rng.gen_range(-clamp..=clamp);
        let d_pitch = self.rng.gen_range(-clamp..=clamp);
        Action::new(id, d_yaw, d_pitch).expect("id in range")
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn act(&mut self, view: &AgentView<'_>) -> Action {
        self.sample(view.physics.camera_clamp)
    }
}

/// Always [`DiscreteAction::Noop`] with no camera change.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoopAgent;

impl Agent for NoopAgent {
    fn name(&self) -> &str {
        "noop"
    }

    fn reset(&mut self, _seed: u64) {}

    fn act(&mut self, _view: &AgentView<'_>) -> Action {
        Action::discrete(DiscreteAction::Noop)
    }
}

pub const AGENT_NAMES: [&str; 3] = ["random", "heuristic", "noop"];

pub fn make_agent(name: &str, seed: u64) -> Option<Box<dyn Agent>> {
    Some(match name {
        "random" => Box::new(RandomAgent::new(seed)),
        "heuristic" => Box::new(HeuristicBuilder::new()),
        "noop" => Box::new(NoopAgent),
        _ => return None,
    })
}
