//! IGLU-style collaborative building gridworld.
//!
//! A fixed 11×9×11 build zone, simple kinematic physics, a maximal-intersection
//! score that is invariant to horizontal translation and quarter turns, a
//! multi-segment task format, a small software renderer, and an evaluation
//! harness.

pub mod env;
pub mod error;
pub mod geom;
pub mod harness;
pub mod physics;
pub mod render;
pub mod scoring;
pub mod synth;
pub mod tasks;
pub mod voxel;

pub use env::{Action, DiscreteAction, Env, EnvConfig, HeadlessEnv, Observation, StepInfo, StepResult};
pub use error::{ConfigError, EnvError, HarnessError, TaskError, VoxelError};
pub use render::{Framebuffer, NoRenderer, PovBackend, RenderConfig, Renderer};
pub use scoring::{max_intersection, F1Score, PreparedTarget, Transform};
pub use tasks::{load_tasks, save_tasks, Segment, Skill, Task};
pub use voxel::{BlockId, Grid, GridCoord};
