use gridworld_core::geom::Vec3;
use gridworld_core::physics::{cast_ray, view_direction, AgentState, HitTarget, PhysicsConfig};
use gridworld_core::render::{occupied_world_bounds, Framebuffer, RenderConfig, Renderer, HEIGHT, WIDTH};
use gridworld_core::voxel::{world_of, zone_bounds, BlockId, Grid, GridCoord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pinhole camera built from yaw and pitch angles directly.
struct Camera {
    eye: Vec3,
    f: Vec3,
    r: Vec3,
    u: Vec3,
    tan_half: f64,
}

impl Camera {
    fn new(eye: Vec3, yaw: f64, pitch: f64, fov_y: f64) -> Self {
        let (y, p) = (yaw.to_radians(), pitch.to_radians());
        let f = Vec3::new(p.cos() * y.cos(), p.sin(), p.cos() * y.sin());
        let r = Vec3::new(-y.sin(), 0.0, y.cos());
        // Up is perpendicular to both, with positive y at zero pitch.
        let u = Vec3::new(-p.sin() * y.cos(), p.cos(), -p.sin() * y.sin());
        Camera { eye, f, r, u, tan_half: (fov_y.to_radians() / 2.0).tan() }
    }

    /// Continuous pixel position; the center of pixel (row, col) is (col + 0.5, row + 0.5).
    fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let d = p - self.eye;
        let depth = d.dot(self.f);
        if depth < 0.05 {
            return None;
        }
        let u = d.dot(self.r) / depth / self.tan_half;
        let v = d.dot(self.u) / depth / self.tan_half;
        Some(((u + 1.0) * WIDTH as f64 / 2.0, (1.0 - v) * HEIGHT as f64 / 2.0))
    }
}

fn cross2(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise hull (monotone chain).
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut h: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let it: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in it {
            while h.len() >= start + 2 && cross2(h[h.len() - 2], h[h.len() - 1], p) <= 0.0 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
    }
    h
}

/// Signed distance from `p` to the hull boundary, positive inside.
fn inside_distance(h: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..h.len() {
        let (a, b) = (h[i], h[(i + 1) % h.len()]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        d = d.min(cross2(a, b, p) / len);
    }
    d
}

fn is_blue(c: [u8; 3]) -> bool {
    c[0] == 0 && c[1] == 0 && c[2] > 0
}

#[test]
fn single_block_covers_its_projected_outline() {
    let cfg = RenderConfig::default();
    let renderer = Renderer::new(cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut fb = Framebuffer::new();
    let mut checked = 0;
    while checked < 60 {
        let cell = GridCoord::new(rng.gen_range(0..11), rng.gen_range(0..9), rng.gen_range(0..11)).unwrap();
        let mut world = Grid::empty();
        world.set_block(cell, BlockId::BLUE);
        let b = world_of(cell);
        let center = (b.min + b.max) * 0.5;
        let eye = center + Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-0.5..4.0), rng.gen_range(-5.0..5.0));
        if eye.y < 0.2 || (eye - center).length() < 2.0 {
            continue;
        }
        // Roughly aim at the block, then jitter.
        let to = center - eye;
        let yaw = to.z.atan2(to.x).to_degrees() + rng.gen_range(-15.0..15.0);
        let pitch = (to.y / (to.x * to.x + to.z * to.z).sqrt()).atan().to_degrees() + rng.gen_range(-10.0..10.0);
        let pitch = pitch.clamp(-89.0, 89.0);
        let cam = Camera::new(eye, yaw, pitch, cfg.fov_y);
        let mut corners = Vec::new();
        for i in 0..8 {
            let p = Vec3::new(
                if i & 1 == 0 { b.min.x } else { b.max.x },
                if i & 2 == 0 { b.min.y } else { b.max.y },
                if i & 4 == 0 { b.min.z } else { b.max.z },
            );
            corners.push(cam.project(p));
        }
        let Some(corners) = corners.into_iter().collect::<Option<Vec<_>>>() else { continue };
        let h = hull(corners);
        renderer.render_view(&world, eye, yaw, pitch, &mut fb);
        let mut inside = 0;
        for row in 0..HEIGHT {
            for col in 0..WIDTH {
                let d = inside_distance(&h, (col as f64 + 0.5, row as f64 + 0.5));
                let px = fb.pixel(row, col);
                if d > 0.75 {
                    inside += 1;
                    assert!(is_blue(px), "pixel ({row},{col}) inside outline is {px:?}");
                } else if d < -0.75 {
                    assert!(px == cfg.sky || px == cfg.ground, "pixel ({row},{col}) outside outline is {px:?}");
                }
            }
        }
        if inside > 0 {
            checked += 1;
        }
    }
}

#[test]
fn horizon_splits_sky_and_ground() {
    let cfg = RenderConfig::default();
    let renderer = Renderer::new(cfg.clone());
    let mut fb = Framebuffer::new();
    renderer.render_view(&Grid::empty(), Vec3::new(0.5, 1.6, 3.5), -90.0, 0.0, &mut fb);
    for row in 0..HEIGHT {
        let want = if row < HEIGHT / 2 { cfg.sky } else { cfg.ground };
        for col in 0..WIDTH {
            assert_eq!(fb.pixel(row, col), want, "({row},{col})");
        }
    }
}

/// The color along the exact view direction is whatever the targeting ray hits.
#[test]
fn view_center_agrees_with_targeting_ray() {
    let cfg = RenderConfig::default();
    let phys = PhysicsConfig::default();
    let renderer = Renderer::new(cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut hits = 0;
    for _ in 0..2000 {
        let mut world = Grid::empty();
        for _ in 0..rng.gen_range(1..40) {
            let c = GridCoord::new(rng.gen_range(0..11), rng.gen_range(0..4), rng.gen_range(0..11)).unwrap();
            world.set_block(c, BlockId::color(rng.gen_range(1..=6)).unwrap());
        }
        let agent = AgentState::new(
            Vec3::new(rng.gen_range(-7.0..7.0), rng.gen_range(0.0..5.0), rng.gen_range(-7.0..7.0)),
            rng.gen_range(-180.0..180.0),
            rng.gen_range(-90.0..=90.0),
        );
        let eye = agent.eye(&phys);
        let dir = view_direction(agent.yaw, agent.pitch);
        let got = renderer.trace(&world, occupied_world_bounds(&world).as_ref(), eye, dir);
        if let Some(hit) = cast_ray(&world, &zone_bounds(), eye, dir, phys.reach) {
            match hit.hit {
                HitTarget::Block(c) => {
                    hits += 1;
                    assert_eq!(got, cfg.shaded(world.get(c).get(), hit.face));
                }
                HitTarget::Ground => assert_eq!(got, cfg.ground),
            }
        }
    }
    assert!(hits > 100);
}
