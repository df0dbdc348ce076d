//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use gridworld_core::scoring::Transform;
use gridworld_core::voxel::{BlockId, Grid, GridCoord, SIZE_X, SIZE_Y, SIZE_Z};
use rand::Rng;

const N: i32 = SIZE_X as i32;

/// One quarter turn about the zone center: (x, z) -> (10 - z, x).
fn quarter(x: i32, z: i32) -> (i32, i32) {
    (N - 1 - z, x)
}

fn turn(r: u8, mut x: i32, mut z: i32) -> (i32, i32) {
    for _ in 0..r {
        (x, z) = quarter(x, z);
    }
    (x, z)
}

fn cells(g: &Grid) -> Vec<(i32, i32, i32, u8)> {
    let mut out = Vec::new();
    for x in 0..SIZE_X {
        for y in 0..SIZE_Y {
            for z in 0..SIZE_Z {
                let c = GridCoord::new(x as i64, y as i64, z as i64).unwrap();
                let b = g.get(c).get();
                if b != 0 {
                    out.push((x as i32, y as i32, z as i32, b));
                }
            }
        }
    }
    out
}

/// Dense 11×9×11 id array.
fn dense(g: &Grid) -> Vec<u8> {
    let mut d = vec![0u8; SIZE_X * SIZE_Y * SIZE_Z];
    for (x, y, z, b) in cells(g) {
        d[((x as usize * SIZE_Y) + y as usize) * SIZE_Z + z as usize] = b;
    }
    d
}

/// Scans every rotation and shift, moving the built structure onto the
/// target and counting same-color overlaps cell by cell. Returns the first
/// transform with the strictly largest count, in rotation, dx, dz order.
pub fn naive_max_intersection(built: &Grid, target: &Grid) -> (usize, Transform) {
    let t = dense(target);
    let b = cells(built);
    let mut best = (0usize, Transform { rotation: 0, dx: -10, dz: -10 });
    for r in 0..4u8 {
        for dx in -10..=10i32 {
            for dz in -10..=10i32 {
                let mut n = 0;
                for &(x, y, z, id) in &b {
                    let (rx, rz) = turn(r, x, z);
                    let (tx, tz) = (rx + dx, rz + dz);
                    if (0..N).contains(&tx) && (0..N).contains(&tz) {
                        let i = ((tx as usize * SIZE_Y) + y as usize) * SIZE_Z + tz as usize;
                        if t[i] == id {
                            n += 1;
                        }
                    }
                }
                if n > best.0 {
                    best = (n, Transform { rotation: r, dx: dx as i8, dz: dz as i8 });
                }
            }
        }
    }
    best
}

/// Reference F1 from the naive intersection.
pub fn naive_f1(built: &Grid, target: &Grid) -> f64 {
    let (i, _) = naive_max_intersection(built, target);
    let (nb, nt) = (built.block_count(), target.block_count());
    if nb == 0 && nt == 0 {
        return 1.0;
    }
    if nb == 0 || nt == 0 || i == 0 {
        return 0.0;
    }
    let p = i as f64 / nb as f64;
    let r = i as f64 / nt as f64;
    2.0 * p * r / (p + r)
}

pub fn random_grid(rng: &mut impl Rng, n: usize, colors: u8) -> Grid {
    let mut g = Grid::empty();
    for _ in 0..n {
        let c = GridCoord::new(
            rng.gen_range(0..SIZE_X as i64),
            rng.gen_range(0..SIZE_Y as i64),
            rng.gen_range(0..SIZE_Z as i64),
        )
        .unwrap();
        g.set_block(c, BlockId::color(rng.gen_range(1..=colors)).unwrap());
    }
    g
}

/// Applies a transform with the test's own rotation formula; `None` if any block leaves the zone.
pub fn move_grid(g: &Grid, r: u8, dx: i32, dz: i32) -> Option<Grid> {
    let mut out = Grid::empty();
    for (x, y, z, b) in cells(g) {
        let (rx, rz) = turn(r, x, z);
        let c = GridCoord::new((rx + dx) as i64, y as i64, (rz + dz) as i64).ok()?;
        out.set_block(c, BlockId::new(b).unwrap());
    }
    Some(out)
}

/// A random rotation and shift under which every block of `g` stays in the zone.
pub fn random_in_zone_transform(rng: &mut impl Rng, g: &Grid) -> (u8, i32, i32, Grid) {
    loop {
        let r = rng.gen_range(0..4u8);
        let dx = rng.gen_range(-10..=10);
        let dz = rng.gen_range(-10..=10);
        if let Some(m) = move_grid(g, r, dx, dz) {
            return (r, dx, dz, m);
        }
    }
}

/// Random built/target pair with some shared structure.
pub fn random_pair(rng: &mut impl Rng) -> (Grid, Grid) {
    let (n, colors) = (rng.gen_range(0..=40), rng.gen_range(1..=6));
    let target = random_grid(rng, n, colors);
    let built = match rng.gen_range(0..3) {
        0 => {
            let (n, colors) = (rng.gen_range(0..=40), rng.gen_range(1..=6));
            random_grid(rng, n, colors)
        }
        _ => {
            let r = rng.gen_range(0..4u8);
            let dx = rng.gen_range(-10..=10);
            let dz = rng.gen_range(-10..=10);
            let mut g = Grid::empty();
            for (x, y, z, b) in cells(&target) {
                if rng.gen_bool(0.8) {
                    let (rx, rz) = turn(r, x, z);
                    if let Ok(c) = GridCoord::new((rx + dx) as i64, y as i64, (rz + dz) as i64) {
                        g.set_block(c, BlockId::new(b).unwrap());
                    }
                }
            }
            for _ in 0..rng.gen_range(0..6) {
                let extra = random_grid(rng, 1, 6);
                for (c, b) in extra.blocks() {
                    if g.block_count() < 40 {
                        g.set_block(c, b);
                    }
                }
            }
            g
        }
    };
    (built, target)
}
