//! Seeded synthetic-data generators: noisy spectra from transition tables,
//! autocorrelation traces, and full Zeeman sweep datasets with drift and
//! jitter. These close the loop for every fit in the toolkit: round-trip
//! tests generate with known truth and assert recovery.
//!
//! All generators are pure functions of (inputs, seed); identical calls
//! produce identical output, byte for byte.

mod rng;

pub use rng::Xoshiro256StarStar;

use thiserror::Error;

use crate::fit::{eval_g2, G2Params, PeakShape, SpectrumSeries};
use crate::geometry::{DefectOrientation, LabVector};
use crate::hamiltonian::{ManifoldParameters, PhysicalConstants};
use crate::transitions::{
    zeeman_sweep, Family, MeasuredLine, MeasuredSweep, TransitionError, TransitionLine,
};

/// Noise model applied on top of a synthetic signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// y = m·(1 + magnitude·n), n ~ N(0, 1).
    GaussianRelative,
    /// y = m + magnitude·n, n ~ N(0, 1).
    GaussianAbsolute,
    /// y ~ Poisson(magnitude·m); output values are nonnegative integers
    /// (counts) and `magnitude` converts model intensity to expected counts.
    PoissonCounts,
}

impl NoiseKind {
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::GaussianRelative => "gaussian_relative",
            NoiseKind::GaussianAbsolute => "gaussian_absolute",
            NoiseKind::PoissonCounts => "poisson_counts",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim() {
            "gaussian_relative" => Some(NoiseKind::GaussianRelative),
            "gaussian_absolute" => Some(NoiseKind::GaussianAbsolute),
            "poisson_counts" => Some(NoiseKind::PoissonCounts),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub magnitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Zero-magnitude Gaussian noise: the identity on the signal.
    pub fn none(seed: u64) -> Self {
        Self {
            kind: NoiseKind::GaussianAbsolute,
            magnitude: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.magnitude.is_finite() && self.magnitude >= 0.0) {
            return Err(SynthError::InvalidNoise(self.magnitude));
        }
        Ok(())
    }

    fn apply(&self, rng: &mut Xoshiro256StarStar, model: f64) -> f64 {
        match self.kind {
            NoiseKind::GaussianRelative => model * (1.0 + self.magnitude * rng.normal()),
            NoiseKind::GaussianAbsolute => model + self.magnitude * rng.normal(),
            NoiseKind::PoissonCounts => rng.poisson((self.magnitude * model).max(0.0)) as f64,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("noise magnitude must be finite and nonnegative, got {0}")]
    InvalidNoise(f64),
    #[error("grid must be strictly increasing and nonempty")]
    BadGrid,
    #[error("linewidth must be positive, got {0}")]
    BadLinewidth(f64),
    #[error("jitter must be finite and nonnegative, got {0}")]
    BadJitter(f64),
    #[error("drift list length {got} does not match field count {expected}")]
    DriftLengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

fn check_grid(grid: &[f64]) -> Result<(), SynthError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SynthError::BadGrid);
    }
    Ok(())
}

/// Evenly spaced grid of `points` values covering [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Synthesize a spectrum from transition lines with a chosen line shape.
///
/// Each line contributes a peak of unit area times its intensity, centered
/// at its offset, with the common `linewidth_ghz` FWHM; a constant
/// `baseline` is added before noise.
pub fn synth_spectrum_shaped(
    lines: &[TransitionLine],
    shape: PeakShape,
    linewidth_ghz: f64,
    grid: &[f64],
    noise: &NoiseSpec,
    baseline: f64,
) -> Result<SpectrumSeries, SynthError> {
    check_grid(grid)?;
    noise.validate()?;
    if !(linewidth_ghz.is_finite() && linewidth_ghz > 0.0) {
        return Err(SynthError::BadLinewidth(linewidth_ghz));
    }

    let mut rng = Xoshiro256StarStar::from_seed(noise.seed);
    let y: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let mut m = baseline;
            for line in lines {
                let area = line.intensity;
                m += area * peak_density(shape, linewidth_ghz, x - line.offset_ghz);
            }
            noise.apply(&mut rng, m)
        })
        .collect();
    Ok(SpectrumSeries {
        x: grid.to_vec(),
        y,
        sigma: None,
    })
}

/// Unit-area line profile of the given FWHM evaluated at distance `dx`.
fn peak_density(shape: PeakShape, fwhm: f64, dx: f64) -> f64 {
    match shape {
        PeakShape::Lorentzian => {
            let gamma = fwhm / 2.0;
            gamma / (std::f64::consts::PI * (dx * dx + gamma * gamma))
        }
        PeakShape::Gaussian => {
            let sigma = fwhm / crate::fit::GAUSSIAN_FWHM_PER_SIGMA;
            (-dx * dx / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        }
    }
}

/// Lorentzian-profile spectrum from transition lines (the shape the peak
/// fits assume).
pub fn synth_spectrum(
    lines: &[TransitionLine],
    linewidth_ghz: f64,
    grid: &[f64],
    noise: &NoiseSpec,
    baseline: f64,
) -> Result<SpectrumSeries, SynthError> {
    synth_spectrum_shaped(
        lines,
        PeakShape::Lorentzian,
        linewidth_ghz,
        grid,
        noise,
        baseline,
    )
}

/// Autocorrelation trace on a delay grid (ns) plus noise.
pub fn synth_g2(
    params: &G2Params,
    grid_ns: &[f64],
    noise: &NoiseSpec,
) -> Result<SpectrumSeries, SynthError> {
    check_grid(grid_ns)?;
    noise.validate()?;
    let mut rng = Xoshiro256StarStar::from_seed(noise.seed);
    let y: Vec<f64> = grid_ns
        .iter()
        .map(|&tau| noise.apply(&mut rng, eval_g2(params, tau)))
        .collect();
    Ok(SpectrumSeries {
        x: grid_ns.to_vec(),
        y,
        sigma: None,
    })
}

/// Synthesize a measured-style Zeeman dataset.
///
/// Line positions come from the model with (f, δf) scaled by
/// `alpha_true` per parity; a common per-field drift is added to every
/// line of a field, then independent Gaussian jitter of `jitter_ghz` to
/// each line. Lines are re-sorted and re-indexed per family after jitter,
/// exactly as an experimenter labels measured peaks.
#[allow(clippy::too_many_arguments)]
pub fn synth_zeeman_dataset(
    alpha_true: (f64, f64),
    params_ground: &ManifoldParameters,
    params_excited: &ManifoldParameters,
    constants: &PhysicalConstants,
    orientation: DefectOrientation,
    direction: &LabVector,
    magnitudes_tesla: &[f64],
    families: &[Family],
    jitter_ghz: f64,
    drift_ghz_per_field: &[f64],
    seed: u64,
) -> Result<MeasuredSweep, SynthError> {
    if !(jitter_ghz.is_finite() && jitter_ghz >= 0.0) {
        return Err(SynthError::BadJitter(jitter_ghz));
    }
    if !drift_ghz_per_field.is_empty() && drift_ghz_per_field.len() != magnitudes_tesla.len() {
        return Err(SynthError::DriftLengthMismatch {
            got: drift_ghz_per_field.len(),
            expected: magnitudes_tesla.len(),
        });
    }

    let sweep = zeeman_sweep(
        &params_ground.scaled_orbital(alpha_true.0),
        &params_excited.scaled_orbital(alpha_true.1),
        constants,
        direction,
        magnitudes_tesla,
        orientation,
    )?;

    let mut rng = Xoshiro256StarStar::from_seed(seed);
    let sigma = (jitter_ghz > 0.0).then_some(jitter_ghz);
    let mut entries = Vec::with_capacity(magnitudes_tesla.len());
    for (i, _) in magnitudes_tesla.iter().enumerate() {
        let drift = drift_ghz_per_field.get(i).copied().unwrap_or(0.0);
        let mut lines = Vec::new();
        for &family in families {
            let mut offsets: Vec<f64> = sweep.entries[i]
                .iter()
                .filter(|l| l.family == family)
                .map(|l| l.offset_ghz + drift + jitter_ghz * rng.normal())
                .collect();
            offsets.sort_by(|a, b| b.total_cmp(a));
            for (index, offset) in offsets.into_iter().enumerate() {
                lines.push(MeasuredLine {
                    family,
                    index: index as u8,
                    offset_ghz: offset,
                    sigma_ghz: sigma,
                });
            }
        }
        entries.push(lines);
    }
    Ok(MeasuredSweep {
        fields_tesla: magnitudes_tesla.to_vec(),
        entries,
    })
}
