//! Software renderer for the 64×64 RGB point-of-view observation.
//!
//! One ray per pixel through a pinhole camera at the agent's eye. Rays walk
//! voxels with the same traversal the physics targeting uses, clipped to the
//! bounding box of the occupied cells. The first block colors the pixel with
//! its palette color times a per-face shade; otherwise downward rays show the
//! (unbounded) ground plane and the rest is sky.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::{Aabb, Vec3};
use crate::physics::{cast_ray, right_vector, view_direction, AgentState, Face, HitTarget, PhysicsConfig};
use crate::voxel::{Grid, WorldCell, NUM_COLORS};

pub const WIDTH: usize = 64;
pub const HEIGHT: usize = 64;
pub const FRAME_BYTES: usize = WIDTH * HEIGHT * 3;

pub type Rgb = [u8; 3];

/// Row-major RGB pixels, top row first.
#[derive(Clone, PartialEq, Eq)]
pub struct Framebuffer {
    pixels: Box<[u8; FRAME_BYTES]>,
}

impl std::fmt::Debug for Framebuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Framebuffer({WIDTH}x{HEIGHT})")
    }
}

impl Default for Framebuffer {
    fn default() -> Self {
        Framebuffer::new()
    }
}

impl Framebuffer {
    pub fn new() -> Self {
        Framebuffer { pixels: Box::new([0; FRAME_BYTES]) }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels[..]
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        let i = (row * WIDTH + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, row: usize, col: usize, c: Rgb) {
        let i = (row * WIDTH + col) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{WIDTH} {HEIGHT}\n255\n").into_bytes();
        out.extend_from_slice(self.as_bytes());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    /// Vertical field of view, degrees.
    pub fov_y: f64,
    pub aspect: f64,
    /// Blocks farther than this are not drawn.
    pub max_distance: f64,
    /// Colors of ids 1..=6.
    pub palette: [Rgb; NUM_COLORS],
    pub shade_top: f64,
    pub shade_z: f64,
    pub shade_x: f64,
    pub shade_bottom: f64,
    pub sky: Rgb,
    pub ground: Rgb,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            fov_y: 70.0,
            aspect: 1.0,
            max_distance: 32.0,
            palette: [
                [0, 0, 255],
                [0, 200, 0],
                [255, 0, 0],
                [255, 140, 0],
                [160, 32, 240],
                [255, 255, 0],
            ],
            shade_top: 1.0,
            shade_z: 0.85,
            shade_x: 0.75,
            shade_bottom: 0.6,
            sky: [135, 206, 250],
            ground: [110, 110, 110],
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.fov_y > 10.0 && self.fov_y < 170.0) {
            return Err(ConfigError::Invalid(format!("render fov_y {} outside (10, 170)", self.fov_y)));
        }
        if !(self.aspect.is_finite() && self.aspect > 0.0) || self.max_distance.is_nan() || self.max_distance <= 0.0 {
            return Err(ConfigError::Invalid("render aspect and max_distance must be positive".into()));
        }
        for m in [self.shade_top, self.shade_z, self.shade_x, self.shade_bottom] {
            if !(m > 0.0 && m <= 1.0) {
                return Err(ConfigError::Invalid(format!("shade multiplier {m} outside (0, 1]")));
            }
        }
        Ok(())
    }

    fn shade(&self, face: Face) -> f64 {
        match face {
            Face::Top => self.shade_top,
            Face::Bottom => self.shade_bottom,
            Face::PosZ | Face::NegZ => self.shade_z,
            Face::PosX | Face::NegX => self.shade_x,
        }
    }

    /// Palette color of `id` (1..=6) under the shade of `face`.
    pub fn shaded(&self, id: u8, face: Face) -> Rgb {
        let m = self.shade(face);
        self.palette[id as usize - 1].map(|c| (c as f64 * m).round() as u8)
    }
}

/// Per-pixel camera-plane offsets and the shaded palette, precomputed.
#[derive(Clone, Debug)]
pub struct Renderer {
    cfg: RenderConfig,
    /// `(u, v)` per pixel: right and up offsets at unit forward distance.
    offsets: Vec<(f64, f64)>,
    /// `[id - 1][face]`.
    shaded: [[Rgb; 6]; NUM_COLORS],
}

const FACES: [Face; 6] = [Face::PosX, Face::NegX, Face::Top, Face::Bottom, Face::PosZ, Face::NegZ];

fn face_slot(f: Face) -> usize {
    match f {
        Face::PosX => 0,
        Face::NegX => 1,
        Face::Top => 2,
        Face::Bottom => 3,
        Face::PosZ => 4,
        Face::NegZ => 5,
    }
}

impl Default for Renderer {
    fn default() -> Self {
        Renderer::new(RenderConfig::default())
    }
}

impl Renderer {
    pub fn new(cfg: RenderConfig) -> Self {
        let tan_half = (cfg.fov_y.to_radians() * 0.5).tan();
        let mut offsets = Vec::with_capacity(WIDTH * HEIGHT);
        for row in 0..HEIGHT {
            for col in 0..WIDTH {
                let (u, v) = pixel_ndc(row, col);
                offsets.push((u * tan_half * cfg.aspect, v * tan_half));
            }
        }
        let mut shaded = [[[0u8; 3]; 6]; NUM_COLORS];
        for (id, row) in shaded.iter_mut().enumerate() {
            for f in FACES {
                row[face_slot(f)] = cfg.shaded(id as u8 + 1, f);
            }
        }
        Renderer { cfg, offsets, shaded }
    }

    pub fn config(&self) -> &RenderConfig {
        &self.cfg
    }

    pub fn render_agent(&self, world: &Grid, agent: &AgentState, phys: &PhysicsConfig, out: &mut Framebuffer) {
        self.render_view(world, agent.eye(phys), agent.yaw, agent.pitch, out);
    }

    pub fn render_view(&self, world: &Grid, eye: Vec3, yaw: f64, pitch: f64, out: &mut Framebuffer) {
        let forward = view_direction(yaw, pitch);
        let right = right_vector(yaw);
        let up = right.cross(forward);
        let bounds = occupied_world_bounds(world);
        for row in 0..HEIGHT {
            for col in 0..WIDTH {
                let (u, v) = self.offsets[row * WIDTH + col];
                let dir = (forward + right * u + up * v).normalized();
                out.put(row, col, self.trace(world, bounds.as_ref(), eye, dir));
            }
        }
    }

    /// Color seen along one unit ray.
    pub fn trace(&self, world: &Grid, bounds: Option<&Aabb>, eye: Vec3, dir: Vec3) -> Rgb {
        if let Some(b) = bounds {
            if let Some(hit) = cast_ray(world, b, eye, dir, self.cfg.max_distance) {
                if let HitTarget::Block(c) = hit.hit {
                    return self.shaded[world.get(c).get() as usize - 1][face_slot(hit.face)];
                }
                return self.cfg.ground;
            }
        }
        if dir.y < 0.0 {
            self.cfg.ground
        } else {
            self.cfg.sky
        }
    }
}

/// Normalized device coordinates of a pixel center: `u` right, `v` up, both in (-1, 1).
pub fn pixel_ndc(row: usize, col: usize) -> (f64, f64) {
    let u = (col as f64 + 0.5) / WIDTH as f64 * 2.0 - 1.0;
    let v = 1.0 - (row as f64 + 0.5) / HEIGHT as f64 * 2.0;
    (u, v)
}

/// World-space box around all solid cells.
pub fn occupied_world_bounds(world: &Grid) -> Option<Aabb> {
    let (lo, hi) = world.occupied_bounds()?;
    let min = crate::voxel::GridCoord::new(lo[0] as i64, lo[1] as i64, lo[2] as i64)
        .expect("in zone")
        .to_world_cell();
    let max = crate::voxel::GridCoord::new(hi[0] as i64, hi[1] as i64, hi[2] as i64)
        .expect("in zone")
        .to_world_cell();
    let WorldCell { x, y, z } = max;
    Some(Aabb::new(
        Vec3::new(min.x as f64, min.y as f64, min.z as f64),
        Vec3::new(x as f64 + 1.0, y as f64 + 1.0, z as f64 + 1.0),
    ))
}

/// Frame source plugged into the environment.
///
/// [`NoRenderer`] compiles every render path out of the step function.
pub trait PovBackend: Send {
    const AVAILABLE: bool;
    fn render(&self, world: &Grid, agent: &AgentState, phys: &PhysicsConfig, out: &mut Framebuffer);
}

impl PovBackend for Renderer {
    const AVAILABLE: bool = true;
    fn render(&self, world: &Grid, agent: &AgentState, phys: &PhysicsConfig, out: &mut Framebuffer) {
        self.render_agent(world, agent, phys, out);
    }
}

/// Backend with no renderer at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoRenderer;

impl PovBackend for NoRenderer {
    const AVAILABLE: bool = false;
    fn render(&self, _: &Grid, _: &AgentState, _: &PhysicsConfig, _: &mut Framebuffer) {
        unreachable!("NoRenderer never renders")
    }
}
