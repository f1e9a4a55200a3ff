use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use aerosurvey_bench::{accel_record, line_samples, spectra};
use aerosurvey_core::grid::{grid_idw, IdwOptions};
use aerosurvey_core::model::ScalarSample;
use aerosurvey_core::qc::{
    crossover_analysis, fourth_difference, nasvd, CrossoverField, FourthDifferenceOptions,
};
use aerosurvey_core::sim::{simulate_survey, FlightPlan, SimConfig, SuspensionGeometry};
use aerosurvey_core::vibration::{amplitude_spectrum, SpectrumOptions};
use aerosurvey_core::{Axis, LineRole, SurveyLine, TimeSeries, UtmPoint};

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("amplitude_spectrum");
    for n in [1024usize, 16384] {
        let rec = accel_record(n, 256.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &rec, |b, rec| {
            b.iter(|| amplitude_spectrum(black_box(rec), Axis::Z, SpectrumOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn d4(c: &mut Criterion) {
    let n = 100_000;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    let v: Vec<f64> = t.iter().map(|t| 54000.0 + 10.0 * (t / 30.0).sin()).collect();
    let s = TimeSeries::new(t, v).unwrap();
    c.bench_function("fourth_difference/100k", |b| {
        b.iter(|| fourth_difference(black_box(&s), FourthDifferenceOptions::default()).unwrap())
    });
}

fn nasvd_bench(c: &mut Criterion) {
    let m = spectra(600, 64);
    c.bench_function("nasvd/600x64/k4", |b| b.iter(|| nasvd(black_box(&m), 4).unwrap()));
}

fn idw(c: &mut Criterion) {
    let samples = line_samples(20, 500, 25.0);
    let mut g = c.benchmark_group("grid_idw");
    g.sample_size(20);
    for cell in [10.0, 100.0] {
        let opts = IdwOptions::for_line_spacing(cell, 25.0);
        g.bench_with_input(BenchmarkId::from_parameter(cell), &opts, |b, o| {
            b.iter(|| grid_idw(black_box(&samples), o).unwrap())
        });
    }
    g.finish();
}

fn straight(
    id: &str,
    role: LineRole,
    from: (f64, f64),
    to: (f64, f64),
    n: usize,
) -> SurveyLine<ScalarSample> {
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let v = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            let (x, y) = (from.0 + f * (to.0 - from.0), from.1 + f * (to.1 - from.1));
            ScalarSample { position: UtmPoint::flat(x, y), value: 1.0 + 0.001 * x + 0.002 * y }
        })
        .collect();
    SurveyLine::new(id, role, TimeSeries::new(t, v).unwrap()).unwrap()
}

fn crossover(c: &mut Criterion) {
    let flights: Vec<_> = (0..20)
        .map(|k| {
            straight(
                &format!("L{k}"),
                LineRole::Flight,
                (0.0, k as f64 * 25.0),
                (1000.0, k as f64 * 25.0),
                500,
            )
        })
        .collect();
    let ties: Vec<_> = (0..5)
        .map(|k| {
            straight(
                &format!("T{k}"),
                LineRole::Tie,
                (k as f64 * 200.0 + 50.0, -10.0),
                (k as f64 * 200.0 + 50.0, 500.0),
                200,
            )
        })
        .collect();
    c.bench_function("crossover/20x5", |b| {
        b.iter(|| crossover_analysis(black_box(&flights), black_box(&ties), CrossoverField::K, 0.15).unwrap())
    });
}

fn survey(c: &mut Criterion) {
    let plan = FlightPlan::default();
    let geom = SuspensionGeometry::default();
    let cfg = SimConfig::default();
    let mut g = c.benchmark_group("simulate_survey");
    g.sample_size(10);
    g.bench_function("default", |b| b.iter(|| simulate_survey(&plan, &geom, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, spectrum, d4, nasvd_bench, idw, crossover, survey);
criterion_main!(benches);
