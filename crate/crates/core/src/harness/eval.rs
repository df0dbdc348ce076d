//! Episode runner, parallel evaluation and log replay.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::env::{Action, Env, EnvConfig};
use crate::error::HarnessError;
use crate::render::PovBackend;
use crate::tasks::{Skill, Task};

use super::log::{run_digest, ActionLog, LogHeader, LogRecord};
use super::{make_agent, Agent, AgentView};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment: usize,
    pub steps: u32,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub complete: bool,
    pub timeout: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub task_id: String,
    pub episode: usize,
    pub seed: u64,
    pub skills: Vec<Skill>,
    pub steps: u64,
    pub total_reward: f64,
    /// Mean over all segments; segments never reached count as zero.
    pub f1: f64,
    pub segments_completed: usize,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillMean {
    pub skill: String,
    pub episodes: usize,
    pub mean_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub agent: String,
    pub episodes: Vec<EpisodeRecord>,
    pub per_skill: Vec<SkillMean>,
    pub all: SkillMean,
}

impl ScoreReport {
    pub fn from_episodes(agent: &str, episodes: Vec<EpisodeRecord>) -> Self {
        let mean = |name: &str, eps: &[&EpisodeRecord]| SkillMean {
            skill: name.to_string(),
            episodes: eps.len(),
            mean_f1: if eps.is_empty() { 0.0 } else { eps.iter().map(|e| e.f1).sum::<f64>() / eps.len() as f64 },
        };
        let per_skill = Skill::ALL
            .iter()
            .filter_map(|&s| {
                let tagged: Vec<&EpisodeRecord> = episodes.iter().filter(|e| e.skills.contains(&s)).collect();
                (!tagged.is_empty()).then(|| mean(s.name(), &tagged))
            })
            .collect();
        let all = mean("all", &episodes.iter().collect::<Vec<_>>());
        ScoreReport { agent: agent.to_string(), episodes, per_skill, all }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fraction of episodes in which every segment was completed.
    pub fn full_completion_rate(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        let n = self.episodes.iter().filter(|e| e.segments_completed == e.segments.len()).count();
        n as f64 / self.episodes.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub episodes: usize,
    pub seed: u64,
    pub workers: usize,
    /// Keep per-episode action logs.
    pub record: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { episodes: 1, seed: 0, workers: 1, record: false }
    }
}

/// Per-episode seed, a SplitMix64 mix of the run seed, task index and episode.
pub fn episode_seed(seed: u64, task_index: usize, episode: usize) -> u64 {
    let mut z = seed
        .wrapping_add((task_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((episode as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one episode to completion and returns its record and action log.
pub fn run_episode<B: PovBackend>(
    env: &mut Env<B>,
    task: &Arc<Task>,
    agent: &mut dyn Agent,
    episode: usize,
    seed: u64,
) -> Result<(EpisodeRecord, ActionLog), HarnessError> {
    env.seed(seed);
    agent.reset(seed);
    env.reset(task.clone())?;
    let header = LogHeader {
        task_id: task.task_id.clone(),
        episode,
        seed,
        config_digest: run_digest(env.config(), task),
        agent: agent.name().to_string(),
    };
    let mut records = Vec::new();
    let mut total_reward = 0.0;
    loop {
        let action = agent.act(&AgentView::of(env).expect("episode running"));
        records.push(LogRecord::new(records.len() as u64, &action));
        let r = env.step(action)?;
        total_reward += r.reward;
        if r.done {
            break;
        }
    }
    let record = episode_record(env, task, episode, seed, records.len() as u64, total_reward);
    Ok((record, ActionLog { header, records }))
}

fn episode_record<B: PovBackend>(
    env: &Env<B>,
    task: &Task,
    episode: usize,
    seed: u64,
    steps: u64,
    total_reward: f64,
) -> EpisodeRecord {
    let outcomes = env.session().expect("episode ran").outcomes();
    let segments: Vec<SegmentRecord> = outcomes
        .iter()
        .map(|o| SegmentRecord {
            segment: o.segment,
            steps: o.steps,
            precision: o.score.precision,
            recall: o.score.recall,
            f1: o.score.f1,
            complete: o.complete,
            timeout: o.timeout,
        })
        .collect();
    let f1 = segments.iter().map(|s| s.f1).sum::<f64>() / task.segments.len() as f64;
    EpisodeRecord {
        task_id: task.task_id.clone(),
        episode,
        seed,
        skills: task.skills(),
        steps,
        total_reward,
        f1,
        segments_completed: segments.iter().filter(|s| s.complete).count(),
        segments,
    }
}

/// Evaluates `agent` over every task × episode. Work is spread over
/// `opts.workers` threads, each with its own environment; results are merged
/// in task order, so the report does not depend on the worker count.
pub fn run_eval(
    cfg: &EnvConfig,
    tasks: &[Arc<Task>],
    agent: &str,
    opts: &EvalOptions,
) -> Result<(ScoreReport, Vec<ActionLog>), HarnessError> {
    if make_agent(agent, 0).is_none() {
        return Err(HarnessError::UnknownAgent(agent.to_string()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..tasks.len()).flat_map(|t| (0..opts.episodes).map(move |e| (t, e))).collect();
    let results = parallel(cfg, &jobs, opts.workers, |env, &(t, e)| {
        let seed = episode_seed(opts.seed, t, e);
        let mut a = make_agent(agent, seed).expect("agent name checked");
        run_episode(env, &tasks[t], a.as_mut(), e, seed)
    })?;
    let (records, logs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let logs = if opts.record { logs } else { Vec::new() };
    Ok((ScoreReport::from_episodes(agent, records), logs))
}

/// Replays logged actions and rebuilds the report they produced.
pub fn replay_logs(
    cfg: &EnvConfig,
    tasks: &[Arc<Task>],
    logs: &[(String, ActionLog)],
    workers: usize,
) -> Result<ScoreReport, HarnessError> {
    let by_id: HashMap<&str, &Arc<Task>> = tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut agent_name: Option<&str> = None;
    for (path, log) in logs {
        let task = by_id.get(log.header.task_id.as_str()).ok_or_else(|| HarnessError::CorruptLog {
            path: path.clone(),
            message: format!("unknown task {:?}", log.header.task_id),
        })?;
        let actual = run_digest(cfg, task);
        if actual != log.header.config_digest {
            return Err(HarnessError::DigestMismatch {
                path: path.clone(),
                logged: log.header.config_digest.clone(),
                actual,
            });
        }
        match agent_name {
            Some(a) if a != log.header.agent => {
                return Err(HarnessError::CorruptLog {
                    path: path.clone(),
                    message: format!("mixed agents {a:?} and {:?}", log.header.agent),
                })
            }
            _ => agent_name = Some(&log.header.agent),
        }
    }
    let order: HashMap<&str, usize> = tasks.iter().enumerate().map(|(i, t)| (t.task_id.as_str(), i)).collect();
    let mut sorted: Vec<&(String, ActionLog)> = logs.iter().collect();
    sorted.sort_by_key(|(_, l)| (order[l.header.task_id.as_str()], l.header.episode));
    let records = parallel(cfg, &sorted, workers, |env, &(path, log)| replay_one(env, by_id[log.header.task_id.as_str()], path, log))?;
    Ok(ScoreReport::from_episodes(agent_name.unwrap_or("replay"), records))
}

fn replay_one<B: PovBackend>(
    env: &mut Env<B>,
    task: &Arc<Task>,
    path: &str,
    log: &ActionLog,
) -> Result<EpisodeRecord, HarnessError> {
    let corrupt = |message: String| HarnessError::CorruptLog { path: path.to_string(), message };
    env.seed(log.header.seed);
    env.reset(task.clone())?;
    let mut total_reward = 0.0;
    let mut done = false;
    for (i, r) in log.records.iter().enumerate() {
        if done {
            return Err(corrupt(format!("{} actions logged after the episode ended", log.records.len() - i)));
        }
        let action: Action = r.action().ok_or_else(|| corrupt(format!("bad action id {}", r.action)))?;
        let out = env.step(action)?;
        total_reward += out.reward;
        done = out.done;
    }
    if !done {
        return Err(corrupt("log ends before the episode did".into()));
    }
    Ok(episode_record(env, task, log.header.episode, log.header.seed, log.records.len() as u64, total_reward))
}

/// Preallocated, order-preserving work distribution over scoped threads.
fn parallel<J, R, F>(cfg: &EnvConfig, jobs: &[J], workers: usize, f: F) -> Result<Vec<R>, HarnessError>
where
    J: Sync,
    R: Send,
    F: Fn(&mut Env, &J) -> Result<R, HarnessError> + Sync,
{
    let workers = workers.clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<R, HarnessError>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let work = || -> Result<(), HarnessError> {
        let mut env = Env::new(cfg.clone())?;
        loop {
            let i = next.fetch_add(1, Ordering::Relaxed);
            if i >= jobs.len() {
                return Ok(());
            }
            *slots[i].lock().unwrap() = Some(f(&mut env, &jobs[i]));
        }
    };
    if workers == 1 {
        work()?;
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|_| s.spawn(work)).collect();
            handles.into_iter().try_for_each(|h| h.join().expect("worker panicked"))
        })?;
    }
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every job ran")).collect()
}

/// Reads every `*.jsonl` file in a directory, sorted by file name.
pub fn read_log_dir(dir: &Path) -> Result<Vec<(String, ActionLog)>, HarnessError> {
    let io = |source| HarnessError::Io { path: dir.display().to_string(), source };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| Ok((p.display().to_string(), super::read_log(p)?))).collect()
}
