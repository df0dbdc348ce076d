//! Acceptance checks. Runs as a plain binary and prints one line per criterion.

mod common;

use std::sync::Arc;
use std::time::Duration;

use gridworld_core::env::{ActionOutcome, Env, EnvConfig, HeadlessEnv};
use gridworld_core::harness::{
    bench_until, replay_logs, run_episode, run_eval, Agent, AgentView, BenchLimit, EvalOptions, HeuristicBuilder,
    RandomAgent,
};
use gridworld_core::physics::box_collides;
use gridworld_core::render::PovBackend;
use gridworld_core::scoring::max_intersection;
use gridworld_core::synth::{generate_synthetic_tasks, Profile};
use gridworld_core::tasks::Task;
use gridworld_core::voxel::{world_of, zone_bounds, GridCoord, NUM_COLORS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn synthetic(seed: u64, n: usize, profile: Profile, segments: usize) -> Vec<Arc<Task>> {
    generate_synthetic_tasks(seed, n, profile, segments).into_iter().map(Arc::new).collect()
}

fn mixed(seed: u64, per_profile: usize, segments: usize) -> Vec<Arc<Task>> {
    Profile::ALL
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| synthetic(seed + i as u64, per_profile, p, segments))
        .collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn headless_throughput() -> Outcome {
    let tasks = mixed(100, 4, 3);
    let mut env = Env::new(EnvConfig::default()).map_err(|e| e.to_string())?;
    let r = bench_until(&mut env, &tasks, BenchLimit::Duration(Duration::from_secs(10)), 1, false)
        .map_err(|e| e.to_string())?;
    check(r.sps >= 17_000.0, format!("{:.0} SPS over {} steps in {:.1} s (need >= 17000)", r.sps, r.steps, r.seconds))
}

fn rendered_throughput() -> Outcome {
    let tasks = mixed(200, 4, 3);
    let mut env = Env::new(EnvConfig { render: true, ..EnvConfig::default() }).map_err(|e| e.to_string())?;
    let r = bench_until(&mut env, &tasks, BenchLimit::Duration(Duration::from_secs(5)), 2, false)
        .map_err(|e| e.to_string())?;
    let all_frames = r.render_calls >= r.steps;
    check(
        r.sps >= 4_400.0 && all_frames,
        format!("{:.0} SPS at 64x64x3, {} frames for {} steps (need >= 4400)", r.sps, r.render_calls, r.steps),
    )
}

fn best_sps<B: PovBackend>(env: &mut Env<B>, tasks: &[Arc<Task>], seed: u64) -> Result<f64, String> {
    let r = bench_until(env, tasks, BenchLimit::Duration(Duration::from_millis(800)), seed, false)
        .map_err(|e| e.to_string())?;
    if r.render_calls != 0 {
        return Err(format!("{} frames rendered with rendering disabled", r.render_calls));
    }
    Ok(r.sps)
}

/// Alternates short runs of both builds and compares the best of each.
fn render_off_overhead() -> Outcome {
    let tasks = mixed(300, 4, 3);
    let cfg = EnvConfig::default();
    let mut with = Env::new(cfg.clone()).map_err(|e| e.to_string())?;
    let mut without = HeadlessEnv::headless(cfg).map_err(|e| e.to_string())?;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for round in 0..6 {
        a = a.max(best_sps(&mut with, &tasks, round)?);
        b = b.max(best_sps(&mut without, &tasks, round)?);
    }
    let ratio = a / b;
    check(
        ratio >= 0.95,
        format!("render off {a:.0} SPS vs renderer-free {b:.0} SPS, ratio {ratio:.3} (need >= 0.95)"),
    )
}

fn matches_naive_scan() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 500;
    let mut nonzero = 0;
    for i in 0..n {
        let (built, target) = common::random_pair(&mut rng);
        let fast = max_intersection(&built, &target);
        let (count, t) = common::naive_max_intersection(&built, &target);
        if fast.intersection != count || fast.best != t {
            return Err(format!("pair {i}: got {} at {:?}, naive {} at {:?}", fast.intersection, fast.best, count, t));
        }
        nonzero += (count > 0) as usize;
    }
    Ok(format!("{n}/{n} pairs equal in count and transform ({nonzero} with nonzero overlap)"))
}

fn transform_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut tasks = Vec::new();
    for (i, &p) in Profile::ALL.iter().enumerate() {
        tasks.extend(synthetic(500 + i as u64, 20, p, 1));
    }
    let mut failures = Vec::new();
    for task in &tasks {
        let target = task.segments[0].target_grid();
        let (r, dx, dz, goal) = common::random_in_zone_transform(&mut rng, &target);
        let scale = [0.5, 1.0, 1.5, 2.0, 3.25][rng.gen_range(0..5)];
        let cfg = EnvConfig { reward_scale: scale, max_steps_per_segment: 3000, ..EnvConfig::default() };
        let mut env = HeadlessEnv::headless(cfg).map_err(|e| e.to_string())?;
        let mut agent = HeuristicBuilder::with_goal(goal.clone());
        let (rec, _) = run_episode(&mut env, task, &mut agent, 0, 0).map_err(|e| e.to_string())?;
        let want = scale * target.block_count() as f64;
        let world = env.world().expect("episode ran");
        let built_exactly = *world == goal;
        let f1 = common::naive_f1(world, &target);
        if !(built_exactly && rec.total_reward == want && rec.f1 == 1.0 && f1 == 1.0) {
            failures.push(format!(
                "{} (rot {r}, shift {dx},{dz}): exact {built_exactly}, reward {} vs {want}, F1 {}",
                task.task_id, rec.total_reward, rec.f1
            ));
        }
    }
    check(
        failures.is_empty(),
        format!("{}/{} transformed builds scored reward_scale x blocks and F1 1.0 {:?}", tasks.len() - failures.len(), tasks.len(), failures),
    )
}

fn determinism() -> Outcome {
    let tasks = mixed(600, 2, 2);
    let cfg = EnvConfig { render: true, ..EnvConfig::default() };
    let opts = EvalOptions { episodes: 2, seed: 77, workers: 1, record: true };
    let mut checked = 0;
    for agent in ["random", "heuristic"] {
        let (r1, logs1) = run_eval(&cfg, &tasks, agent, &opts).map_err(|e| e.to_string())?;
        let (r2, logs2) = run_eval(&cfg, &tasks, agent, &EvalOptions { workers: 3, ..opts.clone() }).map_err(|e| e.to_string())?;
        if r1.to_json() != r2.to_json() || logs1 != logs2 {
            return Err(format!("{agent}: repeated evaluation differs"));
        }
        let named: Vec<_> = logs1.iter().map(|l| (l.file_name(), l.clone())).collect();
        let replayed = replay_logs(&cfg, &tasks, &named, 2).map_err(|e| e.to_string())?;
        if replayed.to_json() != r1.to_json() {
            return Err(format!("{agent}: replayed report differs"));
        }
        // Step the logged actions through two fresh environments side by side.
        for log in &logs1 {
            let task = tasks.iter().find(|t| t.task_id == log.header.task_id).unwrap();
            let mut a = Env::new(cfg.clone()).map_err(|e| e.to_string())?;
            let mut b = Env::new(cfg.clone()).map_err(|e| e.to_string())?;
            for env in [&mut a, &mut b] {
                env.seed(log.header.seed);
                env.reset(task.clone()).map_err(|e| e.to_string())?;
            }
            for rec in &log.records {
                let act = rec.action().ok_or("bad logged action")?;
                let (ra, rb) = (a.step(act).map_err(|e| e.to_string())?, b.step(act).map_err(|e| e.to_string())?);
                let (oa, ob) = (a.observation().unwrap(), b.observation().unwrap());
                let same = ra.reward.to_bits() == rb.reward.to_bits()
                    && ra == rb
                    && oa.pov == ob.pov
                    && oa.inventory == ob.inventory
                    && *oa.grid == *ob.grid
                    && oa.agent.map(f64::to_bits) == ob.agent.map(f64::to_bits);
                if !same {
                    return Err(format!("{agent}: {} diverged at step {}", log.header.task_id, rec.step));
                }
                checked += 1;
            }
            if a.frame().unwrap().to_ppm() != b.frame().unwrap().to_ppm() {
                return Err(format!("{agent}: final PPM differs for {}", log.header.task_id));
            }
        }
    }
    Ok(format!("{checked} steps bit-identical; reports, replays and PPM frames byte-identical"))
}

fn color_totals<B: PovBackend>(env: &Env<B>) -> [u64; NUM_COLORS] {
    let mut n = [0u64; NUM_COLORS];
    for (_, b) in env.world().unwrap().blocks() {
        n[b.get() as usize - 1] += 1;
    }
    let inv = env.inventory().unwrap();
    std::array::from_fn(|i| n[i] + inv.counts[i] as u64)
}

fn physics_invariants() -> Outcome {
    let tasks = mixed(700, 4, 3);
    let cfg = EnvConfig::default();
    let phys = cfg.physics.clone();
    let mut env = HeadlessEnv::headless(cfg).map_err(|e| e.to_string())?;
    let mut agent = RandomAgent::new(7);
    let zone = zone_bounds();
    let (mut intersections, mut outside, mut leaks, mut camera) = (0u64, 0u64, 0u64, 0u64);
    let (mut placed, mut broken) = (0u64, 0u64);
    let steps = 1_000_000u64;
    let mut next = 0;
    env.reset(tasks[0].clone()).map_err(|e| e.to_string())?;
    let mut totals = color_totals(&env);
    for _ in 0..steps {
        let r = env.step(agent.sample(phys.camera_clamp)).map_err(|e| e.to_string())?;
        match r.info.outcome {
            ActionOutcome::Placed { .. } => placed += 1,
            ActionOutcome::Broken { .. } => broken += 1,
            _ => {}
        }
        let s = *env.agent().unwrap();
        let world = env.world().unwrap();
        intersections += box_collides(world, &s.bbox(&phys)) as u64;
        camera += (!(-90.0..=90.0).contains(&s.pitch) || !(-180.0..180.0).contains(&s.yaw)) as u64;
        if let ActionOutcome::Placed { x, y, z, .. } = r.info.outcome {
            let c = GridCoord::new(x as i64, y as i64, z as i64).unwrap();
            let b = world_of(c);
            outside += !(zone.contains(b.min) && zone.contains((b.min + b.max) * 0.5)) as u64;
        }
        if r.info.segment_complete {
            totals = color_totals(&env);
        } else {
            leaks += (color_totals(&env) != totals) as u64;
        }
        if r.done {
            next = (next + 1) % tasks.len();
            env.reset(tasks[next].clone()).map_err(|e| e.to_string())?;
            totals = color_totals(&env);
        }
    }
    check(
        intersections == 0 && outside == 0 && leaks == 0 && camera == 0 && placed > 0 && broken > 0,
        format!(
            "{steps} steps: {intersections} agent-solid overlaps, {outside} out-of-zone blocks, {leaks} conservation breaks, \
             {camera} camera violations ({placed} placed, {broken} broken)"
        ),
    )
}

fn completion_rate(tasks: &[Arc<Task>], agent: &str) -> Result<(f64, f64), String> {
    let opts = EvalOptions { episodes: 1, seed: 9, workers: 4, record: false };
    let (r, _) = run_eval(&EnvConfig::default(), tasks, agent, &opts).map_err(|e| e.to_string())?;
    Ok((r.full_completion_rate(), r.all.mean_f1))
}

fn agent_baselines() -> Outcome {
    let (flat, _) = completion_rate(&synthetic(800, 100, Profile::Flat, 3), "heuristic")?;
    let (flying, _) = completion_rate(&synthetic(801, 100, Profile::Flying, 3), "heuristic")?;
    let (_, random) = completion_rate(&mixed(802, 20, 1), "random")?;
    check(
        flat == 1.0 && flying >= 0.9 && random < 0.1,
        format!(
            "builder F1 1.0 on {:.0}% flat, {:.0}% flying (3 segments); random mean F1 {random:.3} over 100 tasks",
            flat * 100.0,
            flying * 100.0
        ),
    )
}

fn teacher_forcing() -> Outcome {
    let tasks = mixed(900, 4, 3);
    let mut handoffs = 0;
    for task in &tasks {
        let mut env = HeadlessEnv::headless(EnvConfig::default()).map_err(|e| e.to_string())?;
        env.reset(task.clone()).map_err(|e| e.to_string())?;
        let mut agent = HeuristicBuilder::new();
        agent.reset(0);
        let mut solved = 0;
        loop {
            let act = agent.act(&AgentView::of(&env).unwrap());
            let r = env.step(act).map_err(|e| e.to_string())?;
            let id = &task.task_id;
            if r.info.segment_complete {
                if r.info.segment_index != solved {
                    return Err(format!("{id}: solved segment {} out of order", r.info.segment_index));
                }
                solved += 1;
                if solved < task.segments.len() {
                    let ok = !r.done
                        && env.segment_index() == Some(solved)
                        && *env.world().unwrap() == task.segments[solved].context_grid()
                        && env.steps_in_segment() == Some(0);
                    if !ok {
                        return Err(format!("{id}: segment {solved} context not loaded after solving {}", solved - 1));
                    }
                    handoffs += 1;
                } else if !r.done {
                    return Err(format!("{id}: not done after the last segment"));
                }
            } else if r.done && !r.info.timeout {
                return Err(format!("{id}: done without solving or timing out"));
            }
            if r.done {
                break;
            }
        }
        if solved != task.segments.len() {
            return Err(format!("{id}: solved {solved} of {} segments", task.segments.len(), id = task.task_id));
        }
    }
    Ok(format!("{} three-segment tasks, {handoffs} context hand-offs, done only after the last segment", tasks.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("headless throughput", headless_throughput),
        ("rendered throughput", rendered_throughput),
        ("render-off overhead", render_off_overhead),
        ("intersection equals naive scan", matches_naive_scan),
        ("transform invariance", transform_invariance),
        ("determinism", determinism),
        ("physics invariants", physics_invariants),
        ("agent baselines", agent_baselines),
        ("teacher forcing", teacher_forcing),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS [{}] {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{}] {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
