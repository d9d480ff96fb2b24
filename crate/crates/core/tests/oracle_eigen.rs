//! Eigensolver checks against an independent dense route: the 4×4 complex
//! Hermitian matrix is embedded as a real symmetric 8×8 matrix and handed
//! to nalgebra's symmetric eigensolver, which shares nothing with the
//! crate's closed-form block solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use snvtk_core::geometry::{field_in_defect_frame, DefectFrameField, DefectOrientation, LabVector};
use snvtk_core::hamiltonian::{
    build_hamiltonian, eigensystem, ManifoldParameters, Parity, PhysicalConstants,
};
use snvtk_core::synth::Xoshiro256StarStar;
use snvtk_core::transitions::keyed_lines;

/// Eigenvalues of a 4×4 complex Hermitian matrix via the real embedding
/// [[Re, −Im], [Im, Re]], whose spectrum is the complex spectrum doubled.
fn dense_eigenvalues(h: &[[Complex64; 4]; 4]) -> [f64; 4] {
    let mut m = DMatrix::<f64>::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = h[i][j].re;
            m[(i, j + 4)] = -h[i][j].im;
            m[(i + 4, j)] = h[i][j].im;
            m[(i + 4, j + 4)] = h[i][j].re;
        }
    }
    let eigen = SymmetricEigen::new(m);
    let mut values: Vec<f64> = eigen.eigenvalues.iter().cloned().collect();
    values.sort_by(f64::total_cmp);
    // Each complex eigenvalue appears twice; the pairs must agree.
    for pair in values.chunks(2) {
        assert!(
            (pair[0] - pair[1]).abs() < 1e-8,
            "embedding eigenvalues did not pair: {pair:?}"
        );
    }
    [values[0], values[2], values[4], values[6]]
}

/// Dense eigenvectors mapped back to (orbital-sector, spin-part) form.
/// Returns (energy, sector, normalized spin 2-vector) for all four states.
fn dense_spin_states(h: &[[Complex64; 4]; 4]) -> Vec<(f64, usize, [Complex64; 2])> {
    let mut m = DMatrix::<f64>::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = h[i][j].re;
            m[(i, j + 4)] = -h[i][j].im;
            m[(i + 4, j)] = h[i][j].im;
            m[(i + 4, j + 4)] = h[i][j].re;
        }
    }
    let eigen = SymmetricEigen::new(m);
    let mut out: Vec<(f64, usize, [Complex64; 2])> = Vec::new();
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    for &col in order.iter().step_by(2) {
        let v = eigen.eigenvectors.column(col);
        let full: Vec<Complex64> = (0..4).map(|i| Complex64::new(v[i], v[i + 4])).collect();
        let plus_norm: f64 = full[0].norm_sqr() + full[1].norm_sqr();
        let minus_norm: f64 = full[2].norm_sqr() + full[3].norm_sqr();
        // Block-diagonal Hamiltonian: every eigenvector lives in one sector.
        assert!(
            plus_norm.min(minus_norm) < 1e-18,
            "eigenvector spread across orbital sectors"
        );
        let (sector, base) = if plus_norm > minus_norm {
            (0, 0)
        } else {
            (1, 2)
        };
        let norm = (full[base].norm_sqr() + full[base + 1].norm_sqr()).sqrt();
        out.push((
            eigen.eigenvalues[col],
            sector,
            [full[base] / norm, full[base + 1] / norm],
        ));
    }
    out
}

fn draw_params(rng: &mut Xoshiro256StarStar) -> ManifoldParameters {
    // λ large enough that a 9 T field can never reach the λ/2 branch
    // guard: max splitting ≈ μ(2|f| + gS + 2|δf|)·9 ≈ 505 GHz.
    ManifoldParameters::new(
        Parity::Gerade,
        1100.0 + 3900.0 * rng.uniform(),
        -0.5 + rng.uniform(),
        -0.5 + rng.uniform(),
    )
    .unwrap()
}

fn axial_energy(p: &ManifoldParameters, c: &PhysicalConstants, bz: f64, l: f64, s: f64) -> f64 {
    -p.lambda_so_ghz * l * s
        + c.mu_b_over_h_ghz_per_t * (p.f * l + (c.g_s + 2.0 * p.delta_f) * s) * bz
}

#[test]
fn axial_eigenvalues_match_closed_form_on_random_draws() {
    let constants = PhysicalConstants::default();
    let mut rng = Xoshiro256StarStar::from_seed(2024);
    for _ in 0..100 {
        let p = draw_params(&mut rng);
        let bz = -9.0 + 18.0 * rng.uniform();
        let h = build_hamiltonian(&p, &constants, &DefectFrameField::axial(bz)).unwrap();
        let es = eigensystem(&h, &p).unwrap();
        let mut expected: Vec<f64> = [(1.0, 0.5), (1.0, -0.5), (-1.0, 0.5), (-1.0, -0.5)]
            .iter()
            .map(|&(l, s)| axial_energy(&p, &constants, bz, l, s))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in es.energies().iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-9,
                "axial mismatch: {got} vs {want} (λ={}, f={}, δf={}, Bz={bz})",
                p.lambda_so_ghz,
                p.f,
                p.delta_f
            );
        }
    }
}

#[test]
fn block_solver_matches_dense_solver_on_random_fields() {
    let constants = PhysicalConstants::default();
    let mut rng = Xoshiro256StarStar::from_seed(31337);
    for _ in 0..100 {
        let p = draw_params(&mut rng);
        let magnitude = 9.0 * rng.uniform();
        let polar = std::f64::consts::PI * rng.uniform();
        let field = DefectFrameField {
            b_z: magnitude * polar.cos(),
            b_perp: magnitude * polar.sin(),
            phi: 2.0 * std::f64::consts::PI * rng.uniform(),
        };
        let h = build_hamiltonian(&p, &constants, &field).unwrap();
        let es = eigensystem(&h, &p).unwrap();
        let dense = dense_eigenvalues(h.matrix());
        for (got, want) in es.energies().iter().zip(dense) {
            assert!(
                (got - want).abs() < 1e-8,
                "dense mismatch: {got} vs {want} at field {field:?}"
            );
        }
    }
}

#[test]
fn paper_geometry_matches_dense_solver() {
    let constants = PhysicalConstants::default();
    for p in [
        ManifoldParameters::snv_ground(),
        ManifoldParameters::snv_excited(),
    ] {
        let field =
            field_in_defect_frame(&LabVector::new(0.0, 0.0, 9.0), DefectOrientation::Axis111);
        let h = build_hamiltonian(&p, &constants, &field).unwrap();
        let es = eigensystem(&h, &p).unwrap();
        let dense = dense_eigenvalues(h.matrix());
        for (got, want) in es.energies().iter().zip(dense) {
            assert!((got - want).abs() < 1e-8);
        }
    }
}

#[test]
fn eigenvalues_are_azimuth_independent() {
    let constants = PhysicalConstants::default();
    let mut rng = Xoshiro256StarStar::from_seed(555);
    for _ in 0..20 {
        let p = draw_params(&mut rng);
        let b_z = -6.0 + 12.0 * rng.uniform();
        let b_perp = 0.1 + 6.0 * rng.uniform();
        let reference = {
            let h = build_hamiltonian(
                &p,
                &constants,
                &DefectFrameField {
                    b_z,
                    b_perp,
                    phi: 0.0,
                },
            )
            .unwrap();
            eigensystem(&h, &p).unwrap().energies()
        };
        for i in 1..8 {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
            let h =
                build_hamiltonian(&p, &constants, &DefectFrameField { b_z, b_perp, phi }).unwrap();
            let energies = eigensystem(&h, &p).unwrap().energies();
            for (a, b) in reference.iter().zip(energies) {
                assert!((a - b).abs() < 1e-9, "azimuth {phi}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn line_intensities_match_dense_overlap_oracle() {
    // Intensities from the block solver's spin states must agree with
    // overlaps computed from dense eigenvectors of both manifolds.
    let constants = PhysicalConstants::default();
    let pg = ManifoldParameters::snv_ground();
    let pu = ManifoldParameters::snv_excited();
    let field = field_in_defect_frame(&LabVector::new(0.0, 0.0, 9.0), DefectOrientation::Axis111);
    let hg = build_hamiltonian(&pg, &constants, &field).unwrap();
    let hu = build_hamiltonian(&pu, &constants, &field).unwrap();
    let ground = eigensystem(&hg, &pg).unwrap();
    let excited = eigensystem(&hu, &pu).unwrap();

    let dense_g = dense_spin_states(hg.matrix());
    let dense_u = dense_spin_states(hu.matrix());

    for line in keyed_lines(&ground, &excited) {
        // Locate the same sublevels in the dense solutions by energy.
        let eg = ground
            .state(line.key.orbital_ground, line.key.family.ground_branch())
            .energy_ghz;
        let eu = excited
            .state(line.key.orbital_excited, line.key.family.excited_branch())
            .energy_ghz;
        let dg = dense_g
            .iter()
            .find(|(e, _, _)| (e - eg).abs() < 1e-6)
            .expect("dense ground state at matching energy");
        let du = dense_u
            .iter()
            .find(|(e, _, _)| (e - eu).abs() < 1e-6)
            .expect("dense excited state at matching energy");
        let overlap = du.2[0].conj() * dg.2[0] + du.2[1].conj() * dg.2[1];
        assert!(
            (line.intensity - overlap.norm_sqr()).abs() < 1e-8,
            "intensity mismatch for {}: {} vs {}",
            line.key,
            line.intensity,
            overlap.norm_sqr()
        );
    }
}
