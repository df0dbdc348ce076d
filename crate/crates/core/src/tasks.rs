//! Segments, tasks, the task-file format and the teacher-forcing session.
//!
//! A segment pairs a collaborative context (dialog plus the blocks placed in
//! response to it) with a target (the latest instruction plus the blocks that
//! answer it). A task is an ordered list of segments; a session walks through
//! them, forcing the world to each segment's recorded context on entry.
//!
//! Task files are JSON:
//!
//! ```json
//! {"tasks": [{"task_id": "t0", "segments": [{
//!     "dialog": [{"role": "architect", "text": "place a blue block"}],
//!     "instruction": "place a blue block",
//!     "context_blocks": [],
//!     "target_blocks": [[5, 0, 5, 1]],
//!     "skills": ["flat"]}]}]}
//! ```
//!
//! Blocks are `[x, y, z, id]` in grid index space (`0..=10`, `0..=8`, `0..=10`).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TaskError;
use crate::scoring::F1Score;
use crate::voxel::{BlockList, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Architect,
    Builder,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DialogUtterance {
    pub role: Role,
    pub text: String,
}

/// Embodiment skill labels, in report column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Skill {
    Flying,
    Tall,
    Diagonal,
    Flat,
    Tricky,
}

impl Skill {
    pub const ALL: [Skill; 5] = [Skill::Flying, Skill::Tall, Skill::Diagonal, Skill::Flat, Skill::Tricky];

    pub fn name(self) -> &'static str {
        match self {
            Skill::Flying => "flying",
            Skill::Tall => "tall",
            Skill::Diagonal => "diagonal",
            Skill::Flat => "flat",
            Skill::Tricky => "tricky",
        }
    }

    pub fn parse(s: &str) -> Option<Skill> {
        Skill::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub context_dialog: Vec<DialogUtterance>,
    pub context_blocks: BlockList,
    pub instruction: String,
    pub target_blocks: BlockList,
    /// Sorted, deduplicated.
    pub skills: Vec<Skill>,
}

impl Segment {
    pub fn context_grid(&self) -> Grid {
        Grid::from_block_list(&self.context_blocks)
    }

    pub fn target_grid(&self) -> Grid {
        Grid::from_block_list(&self.target_blocks)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub task_id: String,
    pub segments: Vec<Segment>,
}

impl Task {
    /// Union of all segment skill tags.
    pub fn skills(&self) -> Vec<Skill> {
        let set: BTreeSet<Skill> = self.segments.iter().flat_map(|s| s.skills.iter().copied()).collect();
        set.into_iter().collect()
    }
}

// Wire form. Block rows stay as raw integers so validation can name the field.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDocument {
    pub tasks: Vec<TaskRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub task_id: String,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    #[serde(default)]
    pub dialog: Vec<DialogUtterance>,
    pub instruction: String,
    #[serde(default)]
    pub context_blocks: Vec<[i64; 4]>,
    pub target_blocks: Vec<[i64; 4]>,
    #[serde(default)]
    pub skills: Vec<String>,
}

/// Non-fatal findings from loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadWarning {
    pub task: String,
    pub message: String,
}

pub fn load_tasks(document: &str) -> Result<Vec<Task>, TaskError> {
    load_tasks_with_warnings(document).map(|(t, _)| t)
}

pub fn load_tasks_with_warnings(document: &str) -> Result<(Vec<Task>, Vec<LoadWarning>), TaskError> {
    let doc: TaskDocument = serde_json::from_str(document)?;
    tasks_from_document(&doc)
}

pub fn tasks_from_document(doc: &TaskDocument) -> Result<(Vec<Task>, Vec<LoadWarning>), TaskError> {
    let mut warnings = Vec::new();
    let mut ids = BTreeSet::new();
    let mut tasks = Vec::with_capacity(doc.tasks.len());
    for rec in &doc.tasks {
        let task = task_from_record(rec, &mut warnings)?;
        if !ids.insert(task.task_id.clone()) {
            return Err(TaskError::Task {
                task: task.task_id,
                message: "duplicate task_id".into(),
            });
        }
        tasks.push(task);
    }
    Ok((tasks, warnings))
}

fn task_from_record(rec: &TaskRecord, warnings: &mut Vec<LoadWarning>) -> Result<Task, TaskError> {
    let id = rec.task_id.clone();
    if id.is_empty() {
        return Err(TaskError::Task { task: id, message: "task_id must be non-empty".into() });
    }
    if rec.segments.is_empty() {
        return Err(TaskError::Task { task: id, message: "task has no segments".into() });
    }
    let mut segments = Vec::with_capacity(rec.segments.len());
    for (i, s) in rec.segments.iter().enumerate() {
        let blocks = |field: &'static str, rows: &[[i64; 4]]| {
            let mut list = BlockList::from_rows(rows).map_err(|source| TaskError::Block {
                task: id.clone(),
                segment: i,
                field,
                source,
            })?;
            list.canonicalize();
            Ok::<_, TaskError>(list)
        };
        let context_blocks = blocks("context_blocks", &s.context_blocks)?;
        let target_blocks = blocks("target_blocks", &s.target_blocks)?;
        if target_blocks.is_empty() {
            return Err(TaskError::Schema {
                task: id.clone(),
                segment: i,
                field: "target_blocks",
                message: "target must contain at least one block".into(),
            });
        }
        if let Some(k) = s.dialog.iter().position(|u| u.text.is_empty()) {
            return Err(TaskError::Schema {
                task: id.clone(),
                segment: i,
                field: "dialog",
                message: format!("utterance {k} has empty text"),
            });
        }
        let mut skills = BTreeSet::new();
        for tag in &s.skills {
            let skill = Skill::parse(tag).ok_or_else(|| TaskError::Schema {
                task: id.clone(),
                segment: i,
                field: "skills",
                message: format!("unknown skill tag `{tag}`"),
            })?;
            skills.insert(skill);
        }
        segments.push(Segment {
            context_dialog: s.dialog.clone(),
            context_blocks,
            instruction: s.instruction.clone(),
            target_blocks,
            skills: skills.into_iter().collect(),
        });
    }
    if !segments[0].context_blocks.is_empty() {
        warnings.push(LoadWarning {
            task: id.clone(),
            message: "first segment starts from a non-empty world".into(),
        });
    }
    for (k, pair) in segments.windows(2).enumerate() {
        let next = pair[1].context_grid();
        let missing = pair[0].target_blocks.entries().iter().any(|&(c, b)| next.get(c) != b);
        if missing {
            warnings.push(LoadWarning {
                task: id.clone(),
                message: format!("segment {} context does not contain segment {k} target", k + 1),
            });
        }
    }
    Ok(Task { task_id: id, segments })
}

pub fn to_document(tasks: &[Task]) -> TaskDocument {
    TaskDocument {
        tasks: tasks
            .iter()
            .map(|t| TaskRecord {
                task_id: t.task_id.clone(),
                segments: t
                    .segments
                    .iter()
                    .map(|s| SegmentRecord {
                        dialog: s.context_dialog.clone(),
                        instruction: s.instruction.clone(),
                        context_blocks: s.context_blocks.to_rows(),
                        target_blocks: s.target_blocks.to_rows(),
                        skills: s.skills.iter().map(|k| k.name().to_string()).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Canonical JSON: blocks in ascending `(y, x, z)`, skills sorted and unique.
pub fn save_tasks(tasks: &[Task]) -> String {
    let mut s = serde_json::to_string_pretty(&to_document(tasks)).expect("task document serializes");
    s.push('\n');
    s
}

/// Canonical JSON for a single task (used for digests).
pub fn task_fingerprint(task: &Task) -> String {
    serde_json::to_string(&to_document(std::slice::from_ref(task))).expect("task serializes")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub segment: usize,
    pub steps: u32,
    pub score: F1Score,
    pub complete: bool,
    pub timeout: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Progress {
    Next(usize),
    Finished,
}

/// Single-owner progression through one task's segments.
#[derive(Clone, Debug)]
pub struct TaskSession {
    task: Arc<Task>,
    index: usize,
    finished: bool,
    outcomes: Vec<SegmentOutcome>,
}

impl TaskSession {
    pub fn new(task: Arc<Task>) -> Self {
        let n = task.segments.len();
        TaskSession { task, index: 0, finished: false, outcomes: Vec::with_capacity(n) }
    }

    /// Restarts mid-task at segment `k`, clearing recorded outcomes.
    pub fn start_at(&mut self, k: usize) -> Result<(), TaskError> {
        let len = self.task.segments.len();
        if k >= len {
            return Err(TaskError::SegmentOutOfRange { index: k, len });
        }
        self.index = k;
        self.finished = false;
        self.outcomes.clear();
        Ok(())
    }

    pub fn task(&self) -> &Arc<Task> {
        &self.task
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn current(&self) -> &Segment {
        &self.task.segments[self.index.min(self.task.segments.len() - 1)]
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn outcomes(&self) -> &[SegmentOutcome] {
        &self.outcomes
    }

    /// Moves past a completed segment.
    pub fn advance(&mut self, outcome: SegmentOutcome) -> Result<Progress, TaskError> {
        if self.finished {
            return Err(TaskError::Finished);
        }
        if !outcome.complete {
            return Err(TaskError::IncompleteSegment(self.index));
        }
        self.outcomes.push(outcome);
        self.index += 1;
        if self.index == self.task.segments.len() {
            self.finished = true;
            Ok(Progress::Finished)
        } else {
            Ok(Progress::Next(self.index))
        }
    }

    /// Ends the session on the current segment without completing it.
    pub fn abandon(&mut self, outcome: SegmentOutcome) -> Result<(), TaskError> {
        if self.finished {
            return Err(TaskError::Finished);
        }
        self.outcomes.push(outcome);
        self.finished = true;
        Ok(())
    }
}
