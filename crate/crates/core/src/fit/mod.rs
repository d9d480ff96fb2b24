//! Nonlinear least-squares engine and the spectroscopy model zoo:
//! Lorentzian/Gaussian peak fits, photon-autocorrelation (g²) fits,
//! Malus-law polarization fits, and the orbital g-factor calibration
//! against measured Zeeman sweeps.

mod alpha;
mod engine;
mod g2;
mod models;
mod peaks;
mod polarization;

pub use alpha::{fit_alpha, AlphaFit, AlphaOptions, LineSelection};
pub use engine::{least_squares, FitOptions};
pub use g2::{eval_g2, fit_g2, fit_g2_with, lifetime_limited_linewidth, G2Params};
pub use models::{
    CurveModel, G2Model, LinearModel, MalusModel, MultiPeakModel, PeakShape,
    GAUSSIAN_FWHM_PER_SIGMA,
};
pub use peaks::{fit_gaussian, fit_gaussian_with, fit_lorentzian, fit_lorentzian_with};
pub use polarization::{
    fit_polarization, fit_polarization_with, polarization_orthogonality, OrthogonalityReport,
};

use thiserror::Error;

use crate::transitions::TransitionError;

/// A measured series: x (GHz, ns, or degrees depending on the model),
/// y (counts or normalized intensity), and optional per-point standard
/// deviations used as inverse weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl SpectrumSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, FitError> {
        let s = Self { x, y, sigma: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sigma(x: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self, FitError> {
        let s = Self {
            x,
            y,
            sigma: Some(sigma),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if self.x.is_empty() {
            return Err(FitError::EmptySeries);
        }
        if self.x.len() != self.y.len() {
            return Err(FitError::LengthMismatch {
                x: self.x.len(),
                y: self.y.len(),
            });
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.x.len() {
                return Err(FitError::LengthMismatch {
                    x: self.x.len(),
                    y: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(FitError::InvalidInput(
                    "sigma values must be finite and positive".into(),
                ));
            }
        }
        if self.x.iter().chain(self.y.iter()).any(|v| !v.is_finite()) {
            return Err(FitError::InvalidInput("non-finite sample".into()));
        }
        Ok(())
    }

    /// True when x is strictly monotone (either direction).
    pub fn x_strictly_monotone(&self) -> bool {
        self.x.windows(2).all(|w| w[1] > w[0]) || self.x.windows(2).all(|w| w[1] < w[0])
    }
}

/// One fitted (or derived) parameter with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    /// 1σ standard error from the residual-weighted normal-equations
    /// curvature; for derived parameters, first-order propagation.
    pub std_error: f64,
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<FittedParam>,
    /// Residual sum of squares at the returned parameters.
    pub rss: f64,
    /// False when the iteration cap was reached before the convergence
    /// criteria; the best parameters found so far are still returned.
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FittedParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; panics if absent (test convenience).
    pub fn value(&self, name: &str) -> f64 {
        self.param(name)
            .unwrap_or_else(|| panic!("no parameter named {name}"))
            .value
    }

    pub fn std_error(&self, name: &str) -> f64 {
        self.param(name)
            .unwrap_or_else(|| panic!("no parameter named {name}"))
            .std_error
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("series is empty")]
    EmptySeries,
    #[error("length mismatch between axes: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least {needed} points to fit {params} parameters, got {got}")]
    TooFewPoints {
        needed: usize,
        params: usize,
        got: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate Jacobian: parameter(s) {param} leave the residuals unchanged")]
    SingularCurvature { param: String },
    #[error("automatic initialization failed: {0}")]
    InitGuessFailed(String),
    #[error("no resolvable peak found in the series")]
    PeakNotFound,
    #[error("modulation amplitude is consistent with zero")]
    DegenerateModulation,
    #[error("not enough data for the fit: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Transition(#[from] TransitionError),
}
