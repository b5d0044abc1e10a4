//! Property tests for routing, the drive model and the simulation engine.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use explorer::agent::{fear_at, habituate};
use explorer::engine::{run_replicates, run_sim, run_trace, SimConfig};
use explorer::gridworld::VisitedSet;
use explorer::{AgentParams, AgentState, GridWorld, PolicyMode, Position, RefugeRect};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform-cost Dijkstra over the 4-neighbour grid, written without the
/// crate's routing code.
fn dijkstra(w: usize, h: usize, from: Position) -> Vec<Vec<u64>> {
    let mut dist = vec![vec![u64::MAX; w]; h];
    let mut heap = BinaryHeap::new();
    dist[from.y][from.x] = 0;
    heap.push(Reverse((0u64, from.x, from.y)));
    while let Some(Reverse((d, x, y))) = heap.pop() {
        if d > dist[y][x] {
            continue;
        }
        let mut relax = |nx: usize, ny: usize| {
            if d + 1 < dist[ny][nx] {
                dist[ny][nx] = d + 1;
                heap.push(Reverse((d + 1, nx, ny)));
            }
        };
        if x > 0 {
            relax(x - 1, y);
        }
        if x + 1 < w {
            relax(x + 1, y);
        }
        if y > 0 {
            relax(x, y - 1);
        }
        if y + 1 < h {
            relax(x, y + 1);
        }
    }
    dist
}

#[derive(Debug, Clone)]
struct Scene {
    world: GridWorld,
    visited: VisitedSet,
    from: Position,
}

fn scene() -> impl Strategy<Value = Scene> {
    (2usize..=10, 1usize..=10)
        .prop_flat_map(|(w, h)| {
            (
                Just((w, h)),
                0..w,
                0..h,
                prop::collection::vec(any::<bool>(), w * h),
                0..w,
                0..h,
            )
        })
        .prop_flat_map(|((w, h), rx, ry, mask, fx, fy)| {
            (
                Just((w, h, rx, ry, mask, fx, fy)),
                1..=(w - rx),
                1..=(h - ry),
            )
        })
        .prop_filter_map(
            "refuge must leave an arena",
            |((w, h, rx, ry, mask, fx, fy), rw, rh)| {
                let refuge = RefugeRect::new(rx, ry, rw, rh);
                let world = GridWorld::new(w, h, refuge, Position::new(rx, ry)).ok()?;
                let mut visited = VisitedSet::new(&world);
                for (i, &m) in mask.iter().enumerate() {
                    if m {
                        visited.insert(&world, Position::new(i % w, i / w));
                    }
                }
                Some(Scene {
                    world,
                    visited,
                    from: Position::new(fx, fy),
                })
            },
        )
}

fn agent(fear_initial: f64, fear_decay: f64, mode: PolicyMode) -> AgentParams {
    AgentParams {
        fear_initial,
        fear_decay,
        w_explore: 1.0,
        w_fear: 1.0,
        mode,
    }
}

fn default_world() -> GridWorld {
    GridWorld::new(20, 20, RefugeRect::new(0, 0, 4, 4), Position::new(1, 1)).unwrap()
}

proptest! {
    #[test]
    fn neighbours_are_adjacent(s in scene()) {
        let n = s.world.neighbors(s.from);
        prop_assert!(n.len() <= 4);
        for q in n {
            prop_assert!(s.world.in_bounds(q));
            prop_assert_eq!(q.x.abs_diff(s.from.x) + q.y.abs_diff(s.from.y), 1);
        }
    }

    #[test]
    fn nearest_unvisited_matches_dijkstra(s in scene()) {
        let (w, h) = (s.world.width(), s.world.height());
        let dist = dijkstra(w, h, s.from);
        let best = (0..h)
            .flat_map(|y| (0..w).map(move |x| Position::new(x, y)))
            .filter(|&p| s.world.is_arena(p) && !s.visited.contains(p))
            .map(|p| (dist[p.y][p.x], p.y, p.x))
            .min();
        let route = s.world.nearest_unvisited(&s.visited, s.from);
        match best {
            None => prop_assert!(route.is_none()),
            Some((d, y, x)) => {
                let r = route.unwrap();
                prop_assert_eq!(r.distance as u64, d);
                prop_assert_eq!(r.target, Position::new(x, y));
                prop_assert_eq!(Some(r), s.world.nearest_unvisited(&s.visited, s.from));
            }
        }
    }

    #[test]
    fn following_first_step_reaches_target(s in scene()) {
        if let Some(r) = s.world.nearest_unvisited(&s.visited, s.from) {
            let mut at = s.from;
            for _ in 0..r.distance {
                let step = s.world.nearest_unvisited(&s.visited, at).unwrap();
                prop_assert_eq!(step.target, r.target);
                at = s.world.step(at, step.first_step.unwrap()).unwrap();
            }
            prop_assert_eq!(at, r.target);
        }
    }

    #[test]
    fn fear_closed_form(fear_initial in 0.0f64..=1.0, fear_decay in 0.0f64..=1.0) {
        let params = agent(fear_initial, fear_decay, PolicyMode::Stochastic);
        let mut fear = fear_initial;
        for t in 1..=100_000u64 {
            fear = habituate(fear, fear_decay);
            if t % 10_000 == 0 {
                prop_assert!((fear - fear_at(&params, t)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn max_fear_freezes_for_any_seed(seed in any::<u64>(), w_explore in 0.0f64..=1.0) {
        let world = GridWorld::new(10, 10, RefugeRect::new(0, 0, 3, 3), Position::new(1, 1)).unwrap();
        for mode in [PolicyMode::Stochastic, PolicyMode::Deterministic] {
            let params = AgentParams { w_explore, ..agent(1.0, 0.0, mode) };
            let mut state = AgentState::new(&world, &params);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                prop_assert!(!state.step(&world, &params, &mut rng).moved);
            }
        }
    }

    #[test]
    fn step_is_deterministic(seed in any::<u64>(), ticks in 0usize..300, fi in 0.0f64..1.0) {
        let world = default_world();
        let params = agent(fi, 0.05, PolicyMode::Stochastic);
        let mut state = AgentState::new(&world, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..ticks {
            state.step(&world, &params, &mut rng);
        }
        let (mut s2, mut r2) = (state.clone(), rng.clone());
        let e1 = state.step(&world, &params, &mut rng);
        let e2 = s2.step(&world, &params, &mut r2);
        prop_assert_eq!(e1, e2);
        prop_assert_eq!(state, s2);
    }

    #[test]
    fn bins_respect_count_bounds(
        seed in any::<u64>(),
        fi in 0.0f64..=1.0,
        fd in 0.0f64..=0.2,
        bin_width in 1u64..200,
        deterministic in any::<bool>(),
    ) {
        let mode = if deterministic { PolicyMode::Deterministic } else { PolicyMode::Stochastic };
        let world = GridWorld::new(8, 6, RefugeRect::new(2, 1, 2, 2), Position::new(3, 2)).unwrap();
        let config = SimConfig {
            bin_width,
            max_ticks: 20_000,
            seed,
            ..SimConfig::new(world.clone(), agent(fi, fd, mode))
        };
        let r = run_sim(&config).unwrap();
        prop_assert!(r.curve.is_consistent());
        prop_assert!(r.ticks_used <= config.max_ticks);
        if r.completed {
            prop_assert_eq!(r.curve.novel_total(), world.arena_cell_count() as u64);
            let trace = run_trace(&config).unwrap();
            prop_assert!(world.in_refuge(trace.last().unwrap().pos));
        }
    }

    #[test]
    fn replicate_mean_ignores_seed_order(mut seeds in prop::collection::vec(any::<u64>(), 1..6)) {
        let world = GridWorld::new(8, 8, RefugeRect::new(0, 0, 2, 2), Position::new(0, 0)).unwrap();
        let config = SimConfig::new(world, agent(0.5, 0.05, PolicyMode::Stochastic));
        let forward = run_replicates(&config, &seeds).unwrap().mean.curve;
        seeds.reverse();
        prop_assert_eq!(forward, run_replicates(&config, &seeds).unwrap().mean.curve);
    }
}

#[test]
fn exploratory_moves_approach_target_or_find_novelty() {
    let world = default_world();
    let params = agent(0.8, 0.01, PolicyMode::Stochastic);
    let mut state = AgentState::new(&world, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut last_visited = state.visited.len();
    while !state.coverage_complete() {
        let route = world.nearest_unvisited(&state.visited, state.pos).unwrap();
        let ev = state.step(&world, &params, &mut rng);
        assert!(state.visited.len() >= last_visited);
        last_visited = state.visited.len();
        if ev.moved && !ev.novel_cell {
            let d = world.bfs_distances(state.pos)[route.target.y * 20 + route.target.x].unwrap();
            assert_eq!(d + 1, route.distance);
        }
    }
}

/// Coverage holds for every parameter pair off the maximum-fear corner,
/// given enough ticks. Constant near-maximal fear needs far more than the
/// default cap.
#[test]
fn coverage_lattice_completes_under_generous_cap() {
    let grids = [
        GridWorld::new(5, 4, RefugeRect::new(0, 0, 2, 2), Position::new(0, 0)).unwrap(),
        GridWorld::new(12, 9, RefugeRect::new(4, 3, 3, 3), Position::new(5, 4)).unwrap(),
        default_world(),
    ];
    let mut lattice = Vec::new();
    for fi in [0.0, 0.3, 0.7, 0.95, 0.99, 0.999] {
        for fd in [0.0, 0.001, 0.05, 1.0] {
            lattice.push((fi, fd));
        }
    }
    lattice.extend([(1.0, 0.001), (1.0, 0.05), (1.0, 1.0)]);
    for world in &grids {
        for &(fi, fd) in &lattice {
            let config = SimConfig {
                max_ticks: 10_000_000,
                ..SimConfig::new(world.clone(), agent(fi, fd, PolicyMode::Deterministic))
            };
            let r = run_sim(&config).unwrap();
            assert!(
                r.completed,
                "({fi}, {fd}) on {}x{}",
                world.width(),
                world.height()
            );
            assert_eq!(r.curve.novel_total(), world.arena_cell_count() as u64);
        }
    }
}

#[test]
fn stochastic_runs_complete_for_every_tested_seed() {
    for seed in 0..16 {
        for fi in [0.0, 0.5, 0.95] {
            let config = SimConfig::new(default_world(), agent(fi, 0.02, PolicyMode::Stochastic))
                .with_seed(seed);
            let r = run_sim(&config).unwrap();
            assert!(r.completed, "seed {seed} fear {fi}");
            assert_eq!(r.curve.novel_total(), 384);
        }
    }
}
