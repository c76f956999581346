use std::hint::black_box;

use cellhom::cell::CellProblem;
use cellhom::geometry::{generate_mesh, ElementOrder, RveSpec};
use cellhom::homogenize::{homogenize, KappaNormalization};
use cellhom::material::{MaterialMap, MicroMaterial};
use cellhom::parallel::ExecMode;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pipeline(c: &mut Criterion) {
    let mats = MaterialMap::uniform(MicroMaterial::aluminium());
    let mut group = c.benchmark_group("single_pore");
    group.sample_size(10);
    for res in [32, 64] {
        let mesh = generate_mesh(&RveSpec::single_pore(1.0, 0.2), res, ElementOrder::Quadratic).unwrap();
        for (name, mode) in [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)] {
            group.bench_with_input(BenchmarkId::new(name, res), &mesh, |b, mesh| {
                b.iter(|| {
                    let problem = CellProblem::new(mesh, &mats, mode).unwrap();
                    let sol = problem.solve_all().unwrap();
                    black_box(homogenize(&problem, &sol, 1.0, KappaNormalization::SolidAverage).unwrap())
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
