//! Round-trip tests: every fit recovers known truth from synthetic data
//! generated at the scales the toolkit is designed for, under realistic
//! noise. The generators and the fits share no tuned state; the noise
//! magnitudes and tolerances are part of the toolkit's contract.

use snvtk_core::fit::{
    fit_alpha, fit_g2, fit_gaussian, fit_lorentzian, fit_polarization, least_squares,
    lifetime_limited_linewidth, polarization_orthogonality, AlphaOptions, CurveModel, G2Params,
    MalusModel, MultiPeakModel, PeakShape, SpectrumSeries,
};
use snvtk_core::geometry::{field_in_defect_frame, DefectOrientation, LabVector};
use snvtk_core::hamiltonian::{
    build_hamiltonian, eigensystem, ManifoldParameters, PhysicalConstants,
};
use snvtk_core::synth::{
    linear_grid, synth_g2, synth_spectrum, synth_zeeman_dataset, NoiseKind, NoiseSpec,
    Xoshiro256StarStar,
};
use snvtk_core::transitions::{transition_table, Family};

#[test]
fn g2_recovers_time_constants_under_two_percent_noise() {
    let truth = G2Params {
        b: 0.3,
        c: 0.77,
        tau1_ns: 4.8,
        tau2_ns: 103.0,
    };
    let grid = linear_grid(-400.0, 400.0, 1601);
    let noise = NoiseSpec {
        kind: NoiseKind::GaussianRelative,
        magnitude: 0.02,
        seed: 20_240_101,
    };
    let data = synth_g2(&truth, &grid, &noise).unwrap();
    let fit = fit_g2(&data).unwrap();
    assert!(fit.converged);
    assert!(
        (fit.value("tau1_ns") - truth.tau1_ns).abs() / truth.tau1_ns < 0.05,
        "tau1 {} vs {}",
        fit.value("tau1_ns"),
        truth.tau1_ns
    );
    assert!(
        (fit.value("tau2_ns") - truth.tau2_ns).abs() / truth.tau2_ns < 0.15,
        "tau2 {} vs {}",
        fit.value("tau2_ns"),
        truth.tau2_ns
    );
    // The derived antibunching value sits at the single-emitter scale.
    assert!((fit.value("g2_zero") - 0.23).abs() < 0.05);
}

#[test]
fn lifetime_limited_linewidth_at_measured_lifetime() {
    assert!((lifetime_limited_linewidth(3.8) - 41.89).abs() < 0.01);
    assert!((lifetime_limited_linewidth(3.8) - 42.0).abs() < 0.5);
}

#[test]
fn ple_scale_linewidth_recovered_under_five_percent_noise() {
    // 231.9 MHz FWHM line sampled across five linewidths.
    let fwhm = 0.2319;
    let amplitude = 1.0;
    let grid = linear_grid(-2.5 * fwhm, 2.5 * fwhm, 101);
    let y_true: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let g = fwhm / 2.0;
            amplitude * g * g / (x * x + g * g)
        })
        .collect();
    let mut rng = Xoshiro256StarStar::from_seed(77);
    let y: Vec<f64> = y_true
        .iter()
        .map(|v| v + 0.05 * amplitude * rng.normal())
        .collect();
    let data = SpectrumSeries::new(grid, y).unwrap();
    let fit = fit_lorentzian(&data, 1).unwrap();
    let got = fit.value("fwhm_0");
    assert!(
        (got - fwhm).abs() / fwhm < 0.05,
        "FWHM {got} vs {fwhm} ({}%)",
        100.0 * (got - fwhm).abs() / fwhm
    );
}

#[test]
fn two_lorentzians_at_ground_splitting_scale() {
    // Two peaks split by 842 GHz; centers must come back within 1% of the
    // splitting.
    let (c1, c2) = (-421.0, 421.0);
    let grid = linear_grid(-1200.0, 1200.0, 1201);
    let mut rng = Xoshiro256StarStar::from_seed(842);
    let y: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let l = |c: f64, w: f64, a: f64| {
                let g = w / 2.0;
                a * g * g / ((x - c) * (x - c) + g * g)
            };
            l(c1, 25.0, 1.0) + l(c2, 40.0, 0.8) + 0.01 + 0.02 * rng.normal()
        })
        .collect();
    let data = SpectrumSeries::new(grid, y).unwrap();
    let fit = fit_lorentzian(&data, 2).unwrap();
    let split = fit.value("center_1") - fit.value("center_0");
    assert!((split - 842.0).abs() < 8.42, "splitting {split} vs 842 GHz");
}

#[test]
fn ensemble_scale_double_gaussian_widths() {
    // Inhomogeneous-broadening scale: FWHMs 271 and 583 GHz on peaks split
    // by 842 GHz, 3% noise, widths recovered within 5%.
    let sep = 842.0;
    let (w1, w2) = (271.0, 583.0);
    let grid = linear_grid(-1800.0, 1800.0, 1441);
    let mut rng = Xoshiro256StarStar::from_seed(271);
    let gauss = |x: f64, c: f64, w: f64, a: f64| {
        let s = w / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
        a * (-(x - c) * (x - c) / (2.0 * s * s)).exp()
    };
    let y: Vec<f64> = grid
        .iter()
        .map(|&x| {
            gauss(x, -sep / 2.0, w1, 1.0) + gauss(x, sep / 2.0, w2, 0.75) + 0.03 * rng.normal()
        })
        .collect();
    let data = SpectrumSeries::new(grid, y).unwrap();
    let fit = fit_gaussian(&data, 2).unwrap();
    assert!(
        (fit.value("fwhm_0") - w1).abs() / w1 < 0.05,
        "first width {}",
        fit.value("fwhm_0")
    );
    assert!(
        (fit.value("fwhm_1") - w2).abs() / w2 < 0.05,
        "second width {}",
        fit.value("fwhm_1")
    );
}

#[test]
fn swapped_double_peak_init_reaches_the_same_rss() {
    // Label permutation symmetry of the two-peak model.
    let grid = linear_grid(-1500.0, 1500.0, 601);
    let gauss = |x: f64, c: f64, w: f64, a: f64| {
        let s = w / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
        a * (-(x - c) * (x - c) / (2.0 * s * s)).exp()
    };
    let y: Vec<f64> = grid
        .iter()
        .map(|&x| gauss(x, -421.0, 271.0, 1.0) + gauss(x, 421.0, 583.0, 0.75) + 0.02)
        .collect();
    let data = SpectrumSeries::new(grid, y).unwrap();
    let model = MultiPeakModel::new(PeakShape::Gaussian, 2);
    let init_a = [-400.0, 250.0, 0.9, 400.0, 550.0, 0.7, 0.0];
    let init_b = [400.0, 550.0, 0.7, -400.0, 250.0, 0.9, 0.0];
    let fit_a = least_squares(&model, &data, &init_a, None).unwrap();
    let fit_b = least_squares(&model, &data, &init_b, None).unwrap();
    let scale = fit_a.rss.max(1e-12);
    assert!(
        (fit_a.rss - fit_b.rss).abs() / scale < 1e-6,
        "rss {} vs {}",
        fit_a.rss,
        fit_b.rss
    );
}

#[test]
fn polarization_angle_recovered_to_one_degree() {
    let grid = linear_grid(0.0, 180.0, 37);
    let mut rng = Xoshiro256StarStar::from_seed(45);
    let y: Vec<f64> = grid
        .iter()
        .map(|&t| MalusModel.eval(&[1.0, 10.0, 0.05], t) + 0.02 * rng.normal())
        .collect();
    let data = SpectrumSeries::new(grid, y).unwrap();
    let fit = fit_polarization(&data).unwrap();
    assert!(
        (fit.value("theta0_deg") - 10.0).abs() < 1.0,
        "theta0 {}",
        fit.value("theta0_deg")
    );
}

#[test]
fn perpendicular_dipoles_detected_from_two_series() {
    // Two intensity patterns 45° apart in half-wave plate angle, i.e.
    // perpendicular polarization planes.
    let grid = linear_grid(0.0, 180.0, 37);
    let mut rng = Xoshiro256StarStar::from_seed(90);
    let series = |theta0: f64, rng: &mut Xoshiro256StarStar| {
        let y: Vec<f64> = grid
            .iter()
            .map(|&t| MalusModel.eval(&[1.0, theta0, 0.05], t) + 0.02 * rng.normal())
            .collect();
        SpectrumSeries::new(grid.clone(), y).unwrap()
    };
    let fit_c = fit_polarization(&series(10.0, &mut rng)).unwrap();
    let fit_d = fit_polarization(&series(55.0, &mut rng)).unwrap();
    let report =
        polarization_orthogonality(fit_c.value("theta0_deg"), fit_d.value("theta0_deg"), 1.0);
    assert!(report.perpendicular, "deviation {}°", report.deviation_deg);
}

#[test]
fn alpha_pair_recovered_from_jittered_sweep() {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let magnitudes: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
    let truth = (0.98, 1.32);
    let measured = synth_zeeman_dataset(
        truth,
        &pg,
        &pu,
        &constants,
        DefectOrientation::Axis111,
        &LabVector::Z,
        &magnitudes,
        &[Family::C, Family::D],
        0.5,
        &[],
        4242,
    )
    .unwrap();
    let fit = fit_alpha(
        &measured,
        &pg,
        &pu,
        &constants,
        DefectOrientation::Axis111,
        &AlphaOptions::default(),
    )
    .unwrap();
    assert!(fit.fit.converged);
    assert!(
        (fit.alpha_g - truth.0).abs() / truth.0 < 0.02,
        "alpha_g {}",
        fit.alpha_g
    );
    assert!(
        (fit.alpha_u - truth.1).abs() / truth.1 < 0.02,
        "alpha_u {}",
        fit.alpha_u
    );
    assert!(fit.rss_scaled < fit.rss_unscaled);
}

#[test]
fn alpha_fit_ignores_common_mode_drift() {
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let magnitudes: Vec<f64> = (1..=12).map(|i| 0.75 * i as f64).collect();
    let drift: Vec<f64> = (0..12).map(|i| 5.0 * (i as f64 - 6.0)).collect();
    let make = |drift: &[f64]| {
        synth_zeeman_dataset(
            (0.98, 1.32),
            &pg,
            &pu,
            &constants,
            DefectOrientation::Axis111,
            &LabVector::Z,
            &magnitudes,
            &[Family::C, Family::D],
            0.0,
            drift,
            7,
        )
        .unwrap()
    };
    let opts = AlphaOptions::default();
    let clean = fit_alpha(
        &make(&[]),
        &pg,
        &pu,
        &constants,
        DefectOrientation::Axis111,
        &opts,
    )
    .unwrap();
    let drifted = fit_alpha(
        &make(&drift),
        &pg,
        &pu,
        &constants,
        DefectOrientation::Axis111,
        &opts,
    )
    .unwrap();
    assert!((clean.alpha_g - drifted.alpha_g).abs() < 1e-8);
    assert!((clean.alpha_u - drifted.alpha_u).abs() < 1e-8);
}

#[test]
fn inner_pair_splitting_survives_spectrum_round_trip() {
    // End to end: model lines → synthetic spectrum of the inner window →
    // double-Lorentzian fit → inner splitting within 3%.
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let constants = PhysicalConstants::default();
    let field = field_in_defect_frame(&LabVector::new(0.0, 0.0, 9.0), DefectOrientation::Axis111);
    let ground = eigensystem(&build_hamiltonian(&pg, &constants, &field).unwrap(), &pg).unwrap();
    let excited = eigensystem(&build_hamiltonian(&pu, &constants, &field).unwrap(), &pu).unwrap();
    let table = transition_table(&ground, &excited);
    let c_lines: Vec<_> = table
        .iter()
        .filter(|l| l.family == Family::C)
        .cloned()
        .collect();
    let true_split = c_lines[1].offset_ghz - c_lines[2].offset_ghz;

    // A window around the inner pair, the way a double monochromator sees
    // it; the weak outer lines sit outside and only contribute tails.
    let lo = c_lines[2].offset_ghz - 12.0;
    let hi = c_lines[1].offset_ghz + 12.0;
    let grid = linear_grid(lo, hi, 601);
    let noise = NoiseSpec {
        kind: NoiseKind::GaussianAbsolute,
        magnitude: 0.01,
        seed: 9,
    };
    let spectrum = synth_spectrum(&c_lines, 0.5, &grid, &noise, 0.0).unwrap();
    let fit = fit_lorentzian(&spectrum, 2).unwrap();
    let got = (fit.value("center_1") - fit.value("center_0")).abs();
    assert!(
        (got - true_split).abs() / true_split < 0.03,
        "split {got} vs {true_split}"
    );
}
