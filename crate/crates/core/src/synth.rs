//! Seeded generators of skill-flavored synthetic tasks.
//!
//! Every structure holds 3..=30 blocks, fits inside the zone and uses at most
//! [`MAX_PER_COLOR`] blocks of any one color so the default inventory always
//! suffices, with room left for scaffolding.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tasks::{DialogUtterance, Role, Segment, Skill, Task};
use crate::voxel::{BlockId, BlockList, GridCoord, SIZE_X, SIZE_Y, SIZE_Z};

pub const MIN_BLOCKS: usize = 3;
pub const MAX_BLOCKS: usize = 30;
pub const MAX_PER_COLOR: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Flat,
    Tall,
    Diagonal,
    Flying,
    Tricky,
}

impl Profile {
    pub const ALL: [Profile; 5] = [Profile::Flat, Profile::Tall, Profile::Diagonal, Profile::Flying, Profile::Tricky];

    pub fn skill(self) -> Skill {
        match self {
            Profile::Flat => Skill::Flat,
            Profile::Tall => Skill::Tall,
            Profile::Diagonal => Skill::Diagonal,
            Profile::Flying => Skill::Flying,
            Profile::Tricky => Skill::Tricky,
        }
    }

    pub fn parse(s: &str) -> Option<Profile> {
        Profile::ALL.into_iter().find(|p| p.skill().name() == s)
    }
}

type Cells = BTreeMap<(i64, i64, i64), u8>;

/// `count` tasks of `segments` segments each (fewer when a structure is too
/// small to give every segment three new blocks). Segment `k` extends segment
/// `k - 1`'s target; the first segment starts from an empty world.
pub fn generate_synthetic_tasks(seed: u64, count: usize, profile: Profile, segments: usize) -> Vec<Task> {
    let segments = segments.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (profile as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..count)
        .map(|i| {
            let cells = loop {
                let c = structure(&mut rng, profile);
                if c.len() >= (MIN_BLOCKS * segments).min(9) && valid_structure(&c, profile) {
                    break c;
                }
            };
            build_task(format!("{}-{seed}-{i:03}", profile.skill()), &cells, profile, segments, &mut rng)
        })
        .collect()
}

fn build_task(task_id: String, cells: &Cells, profile: Profile, segments: usize, rng: &mut ChaCha8Rng) -> Task {
    let mut ordered: Vec<((i64, i64, i64), u8)> = cells.iter().map(|(&k, &v)| (k, v)).collect();
    ordered.sort_by_key(|&((x, y, z), _)| (y, x, z));
    let n = ordered.len();
    let segments = segments.min(n / MIN_BLOCKS).max(1);
    // Cumulative prefix sizes, each at least MIN_BLOCKS.
    let mut cuts: Vec<usize> = (1..segments).map(|k| k * n / segments).collect();
    cuts.push(n);
    let list = |upto: usize| -> BlockList {
        let entries = ordered[..upto]
            .iter()
            .map(|&((x, y, z), id)| (GridCoord::new(x, y, z).unwrap(), BlockId::color(id).unwrap()))
            .collect();
        let mut l = BlockList::new(entries).unwrap();
        l.canonicalize();
        l
    };
    let mut out = Vec::with_capacity(segments);
    let mut prev = 0;
    for &cut in &cuts {
        let instruction = describe(&ordered[prev..cut], rng);
        let dialog = vec![DialogUtterance { role: Role::Architect, text: instruction.clone() }];
        out.push(Segment {
            context_dialog: dialog,
            context_blocks: list(prev),
            instruction,
            target_blocks: list(cut),
            skills: vec![profile.skill()],
        });
        prev = cut;
    }
    Task { task_id, segments: out }
}

fn describe(part: &[((i64, i64, i64), u8)], rng: &mut ChaCha8Rng) -> String {
    let mut colors: Vec<&str> = part.iter().map(|&(_, id)| BlockId::color(id).unwrap().name()).collect();
    colors.sort();
    colors.dedup();
    let verb = ["Place", "Build", "Add"].choose(rng).unwrap();
    format!("{verb} {} {} blocks.", part.len(), colors.join(" and "))
}

fn in_zone(&(x, y, z): &(i64, i64, i64)) -> bool {
    (0..SIZE_X as i64).contains(&x) && (0..SIZE_Y as i64).contains(&y) && (0..SIZE_Z as i64).contains(&z)
}

fn valid_structure(cells: &Cells, profile: Profile) -> bool {
    if cells.len() < MIN_BLOCKS || cells.len() > MAX_BLOCKS || !cells.keys().all(in_zone) {
        return false;
    }
    let mut per_color = [0usize; 7];
    for &id in cells.values() {
        per_color[id as usize] += 1;
    }
    if per_color.iter().any(|&n| n > MAX_PER_COLOR) {
        return false;
    }
    match profile {
        Profile::Flat => cells.keys().all(|&(_, y, _)| y == 0),
        Profile::Flying => cells.keys().any(|&(x, y, z)| y > 0 && !cells.contains_key(&(x, y - 1, z))),
        _ => true,
    }
}

fn palette(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut all: Vec<u8> = (1..=6).collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

fn structure(rng: &mut ChaCha8Rng, profile: Profile) -> Cells {
    match profile {
        Profile::Flat => flat(rng),
        Profile::Tall => tall(rng),
        Profile::Diagonal => diagonal(rng),
        Profile::Flying => flying(rng),
        Profile::Tricky => tricky(rng),
    }
}

/// Random connected single-layer shape.
fn flat(rng: &mut ChaCha8Rng) -> Cells {
    let n = rng.gen_range(1..=3);
    let colors = palette(rng, n);
    let n = rng.gen_range(3..=24);
    let mut cells = Cells::new();
    let start = (rng.gen_range(2..9), 0, rng.gen_range(2..9));
    cells.insert(start, colors[0]);
    let mut frontier = vec![start];
    let mut guard = 0;
    while cells.len() < n && guard < 1000 {
        guard += 1;
        let &(x, _, z) = frontier.choose(rng).unwrap();
        let (dx, dz) = [(1, 0), (-1, 0), (0, 1), (0, -1)][rng.gen_range(0..4)];
        let next = (x + dx, 0, z + dz);
        if in_zone(&next) && !cells.contains_key(&next) {
            cells.insert(next, *colors.choose(rng).unwrap());
            frontier.push(next);
        }
    }
    cells
}

/// Columns and walls.
fn tall(rng: &mut ChaCha8Rng) -> Cells {
    let n = rng.gen_range(1..=2);
    let colors = palette(rng, n);
    let mut cells = Cells::new();
    let x0 = rng.gen_range(1..8);
    let z0 = rng.gen_range(1..8);
    if rng.gen_bool(0.5) {
        let columns = rng.gen_range(1..=3);
        for c in 0..columns {
            let h = rng.gen_range(3..=5);
            let (x, z) = (x0 + 2 * c, z0);
            for y in 0..h {
                cells.insert((x, y, z), *colors.choose(rng).unwrap());
            }
        }
    } else {
        let len = rng.gen_range(2..=4);
        let h = rng.gen_range(2..=4);
        let along_x = rng.gen_bool(0.5);
        for i in 0..len {
            for y in 0..h {
                let p = if along_x { (x0 + i, y, z0) } else { (x0, y, z0 + i) };
                cells.insert(p, *colors.choose(rng).unwrap());
            }
        }
    }
    cells
}

/// Diagonal lines on the ground, or supported staircases.
fn diagonal(rng: &mut ChaCha8Rng) -> Cells {
    let n = rng.gen_range(1..=2);
    let colors = palette(rng, n);
    let mut cells = Cells::new();
    let len = rng.gen_range(3..=5);
    let x0 = rng.gen_range(1..5);
    let z0 = rng.gen_range(1..5);
    let sz = if rng.gen_bool(0.5) { 1 } else { -1 };
    let z0 = if sz < 0 { z0 + 5 } else { z0 };
    if rng.gen_bool(0.5) {
        for i in 0..len {
            cells.insert((x0 + i, 0, z0 + sz * i), *colors.choose(rng).unwrap());
        }
    } else {
        for i in 0..len.min(4) {
            for y in 0..=i {
                cells.insert((x0 + i, y, z0), *colors.choose(rng).unwrap());
            }
        }
    }
    cells
}

/// Bridges, overhangs and floating bars: at least one block has air below.
fn flying(rng: &mut ChaCha8Rng) -> Cells {
    let n = rng.gen_range(1..=2);
    let colors = palette(rng, n);
    let mut cells = Cells::new();
    let x0 = rng.gen_range(1..6);
    let z0 = rng.gen_range(1..9);
    let h = rng.gen_range(1..=2);
    let span = rng.gen_range(2..=4);
    match rng.gen_range(0..3) {
        // Bridge: two pillars with a deck on top.
        0 => {
            for y in 0..h {
                cells.insert((x0, y, z0), colors[0]);
                cells.insert((x0 + span, y, z0), colors[0]);
            }
            for i in 0..=span {
                cells.insert((x0 + i, h, z0), *colors.choose(rng).unwrap());
            }
        }
        // Overhang: a pillar with an arm.
        1 => {
            for y in 0..=h {
                cells.insert((x0, y, z0), colors[0]);
            }
            for i in 1..=span {
                cells.insert((x0 + i, h, z0), *colors.choose(rng).unwrap());
            }
        }
        // Floating bar over a ground footprint.
        _ => {
            for i in 0..span {
                cells.insert((x0 + i, 0, z0), colors[0]);
                cells.insert((x0 + i, h, z0), *colors.choose(rng).unwrap());
            }
        }
    }
    cells
}

/// Irregular mixed-color clusters, up to three layers.
fn tricky(rng: &mut ChaCha8Rng) -> Cells {
    let n = rng.gen_range(3..=5);
    let colors = palette(rng, n);
    let n = rng.gen_range(5..=18);
    let mut cells = Cells::new();
    let start = (rng.gen_range(3..8), 0, rng.gen_range(3..8));
    cells.insert(start, colors[0]);
    let mut frontier = vec![start];
    let mut guard = 0;
    while cells.len() < n && guard < 2000 {
        guard += 1;
        let &(x, y, z) = frontier.choose(rng).unwrap();
        let (dx, dy, dz) = [(1, 0, 0), (-1, 0, 0), (0, 0, 1), (0, 0, -1), (0, 1, 0), (1, 1, 0), (0, 1, 1)]
            [rng.gen_range(0..7)];
        let next = (x + dx, y + dy, z + dz);
        if in_zone(&next) && next.1 <= 2 && !cells.contains_key(&next) {
            cells.insert(next, *colors.choose(rng).unwrap());
            frontier.push(next);
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{load_tasks, save_tasks};

    #[test]
    fn flat_targets_are_ground_level() {
        let tasks = generate_synthetic_tasks(0, 5, Profile::Flat, 1);
        assert_eq!(tasks.len(), 5);
        for t in &tasks {
            let target = &t.segments[0].target_blocks;
            assert!(target.entries().iter().all(|(c, _)| c.y() == 0));
            assert!((MIN_BLOCKS..=MAX_BLOCKS).contains(&target.len()));
            assert_eq!(t.segments[0].skills, vec![Skill::Flat]);
        }
    }

    #[test]
    fn flying_targets_have_overhangs() {
        for t in generate_synthetic_tasks(1, 30, Profile::Flying, 1) {
            let g = t.segments[0].target_grid();
            let floating = g
                .blocks()
                .any(|(c, _)| c.y() > 0 && g.get(c.offset(0, -1, 0).unwrap()).is_air());
            assert!(floating, "{}", t.task_id);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        for p in Profile::ALL {
            let a = save_tasks(&generate_synthetic_tasks(42, 10, p, 2));
            let b = save_tasks(&generate_synthetic_tasks(42, 10, p, 2));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn outputs_validate() {
        for p in Profile::ALL {
            for segments in [1, 3] {
                let tasks = generate_synthetic_tasks(9, 20, p, segments);
                let reloaded = load_tasks(&save_tasks(&tasks)).unwrap();
                assert_eq!(reloaded, tasks);
                for t in &tasks {
                    assert!(t.segments[0].context_blocks.is_empty());
                    for pair in t.segments.windows(2) {
                        assert_eq!(pair[1].context_blocks, pair[0].target_blocks);
                    }
                }
            }
        }
    }
}
