use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use snvtk_core::fit::{fit_alpha, fit_lorentzian, AlphaOptions};
use snvtk_core::geometry::{field_in_defect_frame, DefectOrientation, LabVector};
use snvtk_core::hamiltonian::{
    build_hamiltonian, eigensystem, ManifoldParameters, PhysicalConstants,
};
use snvtk_core::synth::{linear_grid, synth_spectrum, synth_zeeman_dataset, NoiseKind, NoiseSpec};
use snvtk_core::transitions::{transition_table, zeeman_sweep, Family};

fn bench_eigensystem(c: &mut Criterion) {
    let params = ManifoldParameters::snv_ground();
    let constants = PhysicalConstants::default();
    let field = field_in_defect_frame(&LabVector::new(0.0, 0.0, 9.0), DefectOrientation::Axis111);
    c.bench_function("eigensystem_9T", |b| {
        b.iter(|| {
            let h = build_hamiltonian(black_box(&params), &constants, &field).unwrap();
            eigensystem(&h, &params).unwrap()
        })
    });
}

fn bench_transition_table(c: &mut Criterion) {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let field = field_in_defect_frame(&LabVector::new(0.0, 0.0, 9.0), DefectOrientation::Axis111);
    let ground = eigensystem(&build_hamiltonian(&pg, &constants, &field).unwrap(), &pg).unwrap();
    let excited = eigensystem(&build_hamiltonian(&pu, &constants, &field).unwrap(), &pu).unwrap();
    c.bench_function("transition_table", |b| {
        b.iter(|| transition_table(black_box(&ground), black_box(&excited)))
    });
}

fn bench_zeeman_sweep(c: &mut Criterion) {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let fields: Vec<f64> = (0..=18).map(|i| 0.5 * i as f64).collect();
    c.bench_function("zeeman_sweep_19_fields", |b| {
        b.iter(|| {
            zeeman_sweep(
                black_box(&pg),
                &pu,
                &constants,
                &LabVector::Z,
                &fields,
                DefectOrientation::Axis111,
            )
            .unwrap()
        })
    });
}

fn bench_lorentzian_fit(c: &mut Criterion) {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let sweep = zeeman_sweep(
        &pg,
        &pu,
        &constants,
        &LabVector::Z,
        &[9.0],
        DefectOrientation::Axis111,
    )
    .unwrap();
    let lines: Vec<_> = sweep.entries[0]
        .iter()
        .filter(|l| l.family == Family::C)
        .cloned()
        .collect();
    let grid = linear_grid(-1110.0, -1020.0, 601);
    let noise = NoiseSpec {
        kind: NoiseKind::GaussianAbsolute,
        magnitude: 0.01,
        seed: 1,
    };
    let spectrum = synth_spectrum(&lines, 0.5, &grid, &noise, 0.0).unwrap();
    c.bench_function("fit_lorentzian_two_peaks", |b| {
        b.iter(|| fit_lorentzian(black_box(&spectrum), 2).unwrap())
    });
}

fn bench_alpha_fit(c: &mut Criterion) {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let fields: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
    let measured = synth_zeeman_dataset(
        (0.98, 1.32),
        &pg,
        &pu,
        &constants,
        DefectOrientation::Axis111,
        &LabVector::Z,
        &fields,
        &[Family::C, Family::D],
        0.5,
        &[],
        42,
    )
    .unwrap();
    c.bench_function("fit_alpha_18_fields", |b| {
        b.iter(|| {
            fit_alpha(
                black_box(&measured),
                &pg,
                &pu,
                &constants,
                DefectOrientation::Axis111,
                &AlphaOptions::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_eigensystem,
    bench_transition_table,
    bench_zeeman_sweep,
    bench_lorentzian_fit,
    bench_alpha_fit
);
criterion_main!(benches);
