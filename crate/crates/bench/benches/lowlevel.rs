use criterion::{black_box, criterion_group, criterion_main, Criterion};

use kcbs_core::constraint::Constraint;
use kcbs_core::grid::{AgentTask, Cell, GridMap};
use kcbs_core::lowlevel::{plan_path, DistanceTable, SearchStats};
use kcbs_core::mdd::build_mdd;

fn constrained_map() -> (GridMap, AgentTask, Vec<Constraint>) {
    let map = GridMap::open(32, 32);
    let task = AgentTask { id: 0, start: Cell::new(1, 1), goal: Cell::new(30, 29) };
    let constraints = (0..12)
        .map(|i| Constraint::VertexRange {
            agent: 0,
            cell: Cell::new(4 + 2 * i, 15),
            from: 10 + i,
            until: 14 + i,
        })
        .collect();
    (map, task, constraints)
}

fn bench_plan_path(c: &mut Criterion) {
    let (map, task, constraints) = constrained_map();
    let dist = DistanceTable::build(&map, task.goal);
    c.bench_function("plan_path 32x32 constrained", |b| {
        b.iter(|| {
            let mut stats = SearchStats::default();
            let path = plan_path(&map, &task, &constraints, 0, &dist, &mut stats);
            black_box(path).expect("feasible")
        })
    });
}

fn bench_build_mdd(c: &mut Criterion) {
    let (map, task, constraints) = constrained_map();
    let dist = DistanceTable::build(&map, task.goal);
    let mut stats = SearchStats::default();
    let base = plan_path(&map, &task, &constraints, 0, &dist, &mut stats).unwrap().cost();
    c.bench_function("build_mdd slack 2", |b| {
        b.iter(|| black_box(build_mdd(&map, &task, &constraints, base, 2)).expect("diagram"))
    });
}

criterion_group!(benches, bench_plan_path, bench_build_mdd);
criterion_main!(benches);
