//! Calibration of the orbital g-factors against a measured Zeeman sweep.
//!
//! The orbital factors f and δf of each manifold are proportional to that
//! manifold's orbital g-factor, so a per-parity scale α^{g,u} on the
//! g-factor scales both jointly (the spin g-factor gS is never scaled).
//! The fit minimizes the squared distance between pairwise-centered
//! measured line positions and identically centered model positions.
//! Centering makes the objective immune to the per-field common-mode
//! drift it was designed to remove.

use crate::geometry::{field_in_defect_frame, DefectFrameField, DefectOrientation, LabVector};
use crate::hamiltonian::{
    scaled_eigenvalues, ManifoldParameters, Orbital, PhysicalConstants, ScaledLevel,
};
use crate::transitions::{Family, MeasuredSweep};

use super::engine::{solve, FitOptions, LeastSquaresProblem};
use super::{FitError, FitResult, FittedParam};

/// Which centered line positions enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSelection {
    /// All four lines of each family.
    All,
    /// Only the inner pair (positions 1 and 2).
    InnerPair,
    /// Only the outer pair (positions 0 and 3).
    OuterPair,
}

impl LineSelection {
    fn positions(self) -> &'static [usize] {
        match self {
            LineSelection::All => &[0, 1, 2, 3],
            LineSelection::InnerPair => &[1, 2],
            LineSelection::OuterPair => &[0, 3],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LineSelection::All => "all",
            LineSelection::InnerPair => "inner",
            LineSelection::OuterPair => "outer",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim() {
            "all" => Some(LineSelection::All),
            "inner" => Some(LineSelection::InnerPair),
            "outer" => Some(LineSelection::OuterPair),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AlphaOptions {
    /// Field direction in the crystal frame (out-of-plane `[001]` by default).
    pub direction: LabVector,
    pub selection: LineSelection,
    pub fit: FitOptions,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        Self {
            direction: LabVector::Z,
            selection: LineSelection::All,
            fit: FitOptions::default(),
        }
    }
}

/// Result of the per-parity g-factor scale fit.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFit {
    pub alpha_g: f64,
    pub alpha_u: f64,
    /// Objective at the fitted (α_g, α_u), GHz².
    pub rss_scaled: f64,
    /// Objective at α = (1, 1), GHz².
    pub rss_unscaled: f64,
    pub fit: FitResult,
}

struct Cell {
    field: DefectFrameField,
    family: Family,
    /// Pairwise-centered measured offsets at the selected positions.
    centered_measured: Vec<f64>,
}

/// Centered model offsets of one family plus their α-derivatives.
/// Positions are sorted descending; derivatives follow the occupants of
/// the sorted positions.
fn centered_model(
    levels_g: &[ScaledLevel; 4],
    levels_u: &[ScaledLevel; 4],
    family: Family,
) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let pick = |levels: &[ScaledLevel; 4], orbital: Orbital, branch| -> ScaledLevel {
        *levels
            .iter()
            .find(|l| l.orbital == orbital && l.branch == branch)
            .expect("all four sublevels present")
    };
    let mut lines = [(0.0, 0.0, 0.0); 4];
    let mut i = 0;
    for orbital_u in Orbital::BOTH {
        let u = pick(levels_u, orbital_u, family.excited_branch());
        for orbital_g in Orbital::BOTH {
            let g = pick(levels_g, orbital_g, family.ground_branch());
            lines[i] = (
                u.energy_ghz - g.energy_ghz,
                -g.d_energy_d_scale, // ∂offset/∂α_g
                u.d_energy_d_scale,  // ∂offset/∂α_u
            );
            i += 1;
        }
    }
    lines.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut offsets = [0.0; 4];
    let mut d_g = [0.0; 4];
    let mut d_u = [0.0; 4];
    for positions in [[0usize, 3], [1, 2]] {
        let mean = 0.5 * (lines[positions[0]].0 + lines[positions[1]].0);
        let mean_g = 0.5 * (lines[positions[0]].1 + lines[positions[1]].1);
        let mean_u = 0.5 * (lines[positions[0]].2 + lines[positions[1]].2);
        for &p in &positions {
            offsets[p] = lines[p].0 - mean;
            d_g[p] = lines[p].1 - mean_g;
            d_u[p] = lines[p].2 - mean_u;
        }
    }
    (offsets, d_g, d_u)
}

struct AlphaProblem<'a> {
    cells: &'a [Cell],
    positions: &'a [usize],
    params_g: &'a ManifoldParameters,
    params_u: &'a ManifoldParameters,
    constants: &'a PhysicalConstants,
}

impl AlphaProblem<'_> {
    /// Evaluates all cells at (α_g, α_u); `false` when either manifold is
    /// outside the valid branch-assignment regime at these scales (the
    /// engine then rejects the trial step).
    fn visit(&self, alpha: &[f64], mut sink: impl FnMut(usize, f64, f64, f64)) -> bool {
        let mut row = 0;
        for cell in self.cells {
            let Ok(levels_g) =
                scaled_eigenvalues(self.params_g, self.constants, &cell.field, alpha[0])
            else {
                return false;
            };
            let Ok(levels_u) =
                scaled_eigenvalues(self.params_u, self.constants, &cell.field, alpha[1])
            else {
                return false;
            };
            let (model, d_g, d_u) = centered_model(&levels_g, &levels_u, cell.family);
            for (slot, &p) in self.positions.iter().enumerate() {
                sink(row, cell.centered_measured[slot] - model[p], d_g[p], d_u[p]);
                row += 1;
            }
        }
        true
    }
}

impl LeastSquaresProblem for AlphaProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.cells.len() * self.positions.len()
    }

    fn n_params(&self) -> usize {
        2
    }

    fn residuals(&self, params: &[f64], out: &mut [f64]) -> bool {
        self.visit(params, |row, r, _, _| out[row] = r)
    }

    fn jacobian(&self, params: &[f64], out: &mut [f64]) -> bool {
        self.visit(params, |row, _, d_g, d_u| {
            out[2 * row] = d_g;
            out[2 * row + 1] = d_u;
        })
    }
}

/// Fit the per-parity orbital g-factor scales (α_g, α_u) to a measured
/// Zeeman sweep.
///
/// Every (nonzero field, family) cell with exactly four lines contributes;
/// incomplete cells are skipped with a warning. Both the measured and the
/// model positions are pairwise-centered before comparison, and residuals
/// are unweighted. Returns the optimum together with the objective at
/// α = (1, 1) for comparison.
pub fn fit_alpha(
    measured: &MeasuredSweep,
    params_g: &ManifoldParameters,
    params_u: &ManifoldParameters,
    constants: &PhysicalConstants,
    orientation: DefectOrientation,
    options: &AlphaOptions,
) -> Result<AlphaFit, FitError> {
    measured.validate()?;
    let direction = options
        .direction
        .normalized()
        .ok_or_else(|| FitError::InvalidInput("field direction must be nonzero".into()))?;

    let mut warnings = Vec::new();
    let mut cells = Vec::new();
    let mut fields_used = Vec::new();
    let families = measured.families();
    for (i, &magnitude) in measured.fields_tesla.iter().enumerate() {
        if magnitude <= 0.0 {
            continue;
        }
        let field = field_in_defect_frame(&direction.scaled(magnitude), orientation);
        let mut any = false;
        for &family in &families {
            let offsets = measured.family_offsets(i, family);
            if offsets.len() != 4 {
                warnings.push(format!(
                    "skipping family {family} at {magnitude} T: {} lines instead of 4",
                    offsets.len()
                ));
                continue;
            }
            let centered = crate::transitions::pairwise_center(&offsets)?;
            cells.push(Cell {
                field,
                family,
                centered_measured: options
                    .selection
                    .positions()
                    .iter()
                    .map(|&p| centered[p])
                    .collect(),
            });
            any = true;
        }
        if any {
            fields_used.push(magnitude);
        }
    }

    if fields_used.len() < 2 {
        return Err(FitError::InsufficientData(format!(
            "need complete four-line families at two or more nonzero fields, found {}",
            fields_used.len()
        )));
    }

    let problem = AlphaProblem {
        cells: &cells,
        positions: options.selection.positions(),
        params_g,
        params_u,
        constants,
    };

    let mut at_unity = vec![0.0; problem.n_residuals()];
    if !problem.residuals(&[1.0, 1.0], &mut at_unity) {
        return Err(FitError::InvalidInput(
            "model is outside its valid regime at alpha = (1, 1)".into(),
        ));
    }
    let rss_unscaled: f64 = at_unity.iter().map(|r| r * r).sum();

    let names = vec!["alpha_g".to_string(), "alpha_u".to_string()];
    let output = solve(
        &problem,
        &[1.0, 1.0],
        Some(&[(1e-3, 1e3), (1e-3, 1e3)]),
        &names,
        &options.fit,
    )?;

    let params = names
        .iter()
        .enumerate()
        .map(|(i, name)| FittedParam {
            name: name.clone(),
            value: output.params[i],
            std_error: output.covariance[i][i].max(0.0).sqrt(),
        })
        .collect();
    let fit = FitResult {
        params,
        rss: output.rss,
        converged: output.converged,
        iterations: output.iterations,
        warnings,
    };
    Ok(AlphaFit {
        alpha_g: output.params[0],
        alpha_u: output.params[1],
        rss_scaled: output.rss,
        rss_unscaled,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transitions::{zeeman_sweep, MeasuredLine};
    use approx::assert_relative_eq;

    fn snv() -> (ManifoldParameters, ManifoldParameters, PhysicalConstants) {
        (
            ManifoldParameters::snv_ground(),
            ManifoldParameters::snv_excited(),
            PhysicalConstants::default(),
        )
    }

    /// Model sweep converted to a measured table, optionally with scaled
    /// orbital factors and per-field drift.
    fn model_as_measured(alpha: (f64, f64), drift: f64, magnitudes: &[f64]) -> MeasuredSweep {
        let (pg, pu, c) = snv();
        let sweep = zeeman_sweep(
            &pg.scaled_orbital(alpha.0),
            &pu.scaled_orbital(alpha.1),
            &c,
            &LabVector::Z,
            magnitudes,
            DefectOrientation::Axis111,
        )
        .unwrap();
        let entries = sweep
            .entries
            .iter()
            .enumerate()
            .map(|(i, lines)| {
                lines
                    .iter()
                    .filter(|l| matches!(l.family, Family::C | Family::D))
                    .map(|l| MeasuredLine {
                        family: l.family,
                        index: l.index.unwrap(),
                        offset_ghz: l.offset_ghz + drift * (i as f64 + 1.0),
                        sigma_ghz: None,
                    })
                    .collect()
            })
            .collect();
        MeasuredSweep {
            fields_tesla: sweep.fields_tesla.clone(),
            entries,
        }
    }

    #[test]
    fn self_consistent_sweep_recovers_unity() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
        let measured = model_as_measured((1.0, 1.0), 0.0, &magnitudes);
        let fit = fit_alpha(
            &measured,
            &pg,
            &pu,
            &c,
            DefectOrientation::Axis111,
            &AlphaOptions::default(),
        )
        .unwrap();
        assert!(fit.fit.converged);
        assert_relative_eq!(fit.alpha_g, 1.0, epsilon = 1e-6);
        assert_relative_eq!(fit.alpha_u, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn noiseless_scaled_sweep_is_recovered_exactly() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
        let measured = model_as_measured((0.98, 1.32), 0.0, &magnitudes);
        let fit = fit_alpha(
            &measured,
            &pg,
            &pu,
            &c,
            DefectOrientation::Axis111,
            &AlphaOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.alpha_g, 0.98, max_relative = 1e-6);
        assert_relative_eq!(fit.alpha_u, 1.32, max_relative = 1e-6);
        assert!(fit.rss_scaled <= fit.rss_unscaled);
    }

    #[test]
    fn per_field_drift_does_not_move_the_optimum() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=12).map(|i| 0.75 * i as f64).collect();
        let clean = model_as_measured((1.1, 0.9), 0.0, &magnitudes);
        let drifted = model_as_measured((1.1, 0.9), 7.5, &magnitudes);
        let opts = AlphaOptions::default();
        let a = fit_alpha(&clean, &pg, &pu, &c, DefectOrientation::Axis111, &opts).unwrap();
        let b = fit_alpha(&drifted, &pg, &pu, &c, DefectOrientation::Axis111, &opts).unwrap();
        assert_relative_eq!(a.alpha_g, b.alpha_g, epsilon = 1e-8);
        assert_relative_eq!(a.alpha_u, b.alpha_u, epsilon = 1e-8);
    }

    #[test]
    fn single_field_is_insufficient() {
        let (pg, pu, c) = snv();
        let measured = model_as_measured((1.0, 1.0), 0.0, &[3.0]);
        assert!(matches!(
            fit_alpha(
                &measured,
                &pg,
                &pu,
                &c,
                DefectOrientation::Axis111,
                &AlphaOptions::default()
            ),
            Err(FitError::InsufficientData(_))
        ));
    }

    #[test]
    fn incomplete_cells_are_skipped_with_warning() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let mut measured = model_as_measured((1.0, 1.0), 0.0, &magnitudes);
        // Drop one line from the first field's C family.
        let first = &mut measured.entries[0];
        let pos = first
            .iter()
            .position(|l| l.family == Family::C && l.index == 3)
            .unwrap();
        first.remove(pos);
        let fit = fit_alpha(
            &measured,
            &pg,
            &pu,
            &c,
            DefectOrientation::Axis111,
            &AlphaOptions::default(),
        )
        .unwrap();
        assert_eq!(fit.fit.warnings.len(), 1);
        assert_relative_eq!(fit.alpha_g, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn inner_pair_selection_still_identifies_both_scales() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
        let measured = model_as_measured((0.95, 1.2), 0.0, &magnitudes);
        let opts = AlphaOptions {
            selection: LineSelection::InnerPair,
            ..AlphaOptions::default()
        };
        let fit = fit_alpha(&measured, &pg, &pu, &c, DefectOrientation::Axis111, &opts).unwrap();
        assert_relative_eq!(fit.alpha_g, 0.95, max_relative = 1e-5);
        assert_relative_eq!(fit.alpha_u, 1.2, max_relative = 1e-5);
    }

    #[test]
    fn objective_has_nonnegative_curvature_at_optimum() {
        let (pg, pu, c) = snv();
        let magnitudes: Vec<f64> = (1..=10).map(|i| 0.9 * i as f64).collect();
        let measured = model_as_measured((1.05, 1.15), 0.0, &magnitudes);
        let opts = AlphaOptions::default();
        let fit = fit_alpha(&measured, &pg, &pu, &c, DefectOrientation::Axis111, &opts).unwrap();

        // Finite-difference curvature of the objective along both axes,
        // evaluated through an independent route (full sweep + centering).
        let rss_at = |ag: f64, au: f64| -> f64 {
            let mut sum = 0.0;
            let sweep = zeeman_sweep(
                &pg.scaled_orbital(ag),
                &pu.scaled_orbital(au),
                &c,
                &LabVector::Z,
                &magnitudes,
                DefectOrientation::Axis111,
            )
            .unwrap();
            for (i, _) in sweep.fields_tesla.iter().enumerate() {
                for family in [Family::C, Family::D] {
                    let model: Vec<f64> = sweep.entries[i]
                        .iter()
                        .filter(|l| l.family == family)
                        .map(|l| l.offset_ghz)
                        .collect();
                    let measured_offsets = measured.family_offsets(i, family);
                    let cm = crate::transitions::pairwise_center(&measured_offsets).unwrap();
                    let mm = crate::transitions::pairwise_center(&model).unwrap();
                    for p in 0..4 {
                        sum += (cm[p] - mm[p]) * (cm[p] - mm[p]);
                    }
                }
            }
            sum
        };
        let h = 1e-4;
        let center = rss_at(fit.alpha_g, fit.alpha_u);
        let along_g = rss_at(fit.alpha_g + h, fit.alpha_u) + rss_at(fit.alpha_g - h, fit.alpha_u)
            - 2.0 * center;
        let along_u = rss_at(fit.alpha_g, fit.alpha_u + h) + rss_at(fit.alpha_g, fit.alpha_u - h)
            - 2.0 * center;
        assert!(along_g >= -1e-9);
        assert!(along_u >= -1e-9);
    }
}
