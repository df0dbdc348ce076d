//! Steps-per-second measurement under uniformly random actions.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::env::{Env, PhaseTimes};
use crate::error::HarnessError;
use crate::render::PovBackend;
use crate::tasks::Task;

use super::RandomAgent;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub steps: u64,
    pub episodes: u64,
    pub seconds: f64,
    pub sps: f64,
    pub render: bool,
    pub render_calls: u64,
    /// Present when phase timing was requested; timing adds overhead.
    pub phases: Option<PhaseTimes>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BenchLimit {
    Steps(u64),
    Duration(Duration),
}

/// Runs `steps` random-action steps on one environment, cycling through `tasks`.
pub fn bench<B: PovBackend>(
    env: &mut Env<B>,
    tasks: &[Arc<Task>],
    steps: u64,
    seed: u64,
    phases: bool,
) -> Result<BenchReport, HarnessError> {
    bench_until(env, tasks, BenchLimit::Steps(steps), seed, phases)
}

/// Like [`bench`], stopping at a step count or after a wall-clock duration.
pub fn bench_until<B: PovBackend>(
    env: &mut Env<B>,
    tasks: &[Arc<Task>],
    limit: BenchLimit,
    seed: u64,
    phases: bool,
) -> Result<BenchReport, HarnessError> {
    assert!(!tasks.is_empty(), "bench needs at least one task");
    let mut agent = RandomAgent::new(seed);
    let clamp = env.config().physics.camera_clamp;
    env.enable_timing(phases);
    env.seed(seed);
    let calls0 = env.render_calls();
    let mut next_task = 0;
    let mut episodes = 1;
    env.reset(tasks[0].clone())?;
    let start = Instant::now();
    let mut steps = 0u64;
    loop {
        match limit {
            BenchLimit::Steps(n) if steps >= n => break,
            BenchLimit::Duration(d) if steps.is_multiple_of(1024) && start.elapsed() >= d => break,
            _ => {}
        }
        steps += 1;
        if env.step(agent.sample(clamp))?.done {
            next_task = (next_task + 1) % tasks.len();
            episodes += 1;
            env.reset(tasks[next_task].clone())?;
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let report = BenchReport {
        steps,
        episodes,
        seconds,
        sps: steps as f64 / seconds.max(1e-9),
        render: B::AVAILABLE && env.config().render,
        render_calls: env.render_calls() - calls0,
        phases: env.timing(),
    };
    env.enable_timing(false);
    Ok(report)
}
