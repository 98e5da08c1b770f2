use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leadtime_core::pipeline::{run_analysis_with, AnalysisConfig};
use leadtime_core::simulate::{generate_scenario_with, ScenarioSpec};
use leadtime_core::Execution;

fn spec() -> ScenarioSpec {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/scenarios/small_multi_market.json");
    let mut s = ScenarioSpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    s.seed = Some(1);
    s
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn generate(c: &mut Criterion) {
    let spec = spec();
    let mut g = c.benchmark_group("generate_scenario");
    g.sample_size(20);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_scenario_with(&spec, mode).unwrap())
        });
    }
    g.finish();
}

fn analyze(c: &mut Criterion) {
    let records = generate_scenario_with(&spec(), Execution::available()).unwrap();
    let config = AnalysisConfig {
        warning_threshold: Some(0.1),
        ..AnalysisConfig::default()
    };
    let mut g = c.benchmark_group("run_analysis");
    g.sample_size(20);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_analysis_with(&records, &config, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, generate, analyze);
criterion_main!(benches);
