//! Simulation and data-analysis toolkit for negatively charged group-IV
//! color centers in diamond (SnV⁻ by default).
//!
//! The crate models the four-level ground and excited manifolds of a
//! split-vacancy defect through an effective spin-orbit Hamiltonian,
//! predicts Zeeman-split optical transition spectra for arbitrary
//! magnetic-field directions, and provides the nonlinear least-squares
//! machinery used to characterize single emitters: Lorentzian/Gaussian
//! line fits, photon-autocorrelation (g²) fits, Malus-law polarization
//! fits, and orbital g-factor calibration against measured Zeeman sweeps.
//!
//! All frequencies are in GHz, magnetic fields in Tesla, delays in ns,
//! and angles in degrees at the I/O boundary (radians internally).
//!
//! Module map:
//! - [`geometry`]: lab-frame ↔ defect-frame field rotations for the four
//!   ⟨111⟩ orientation classes.
//! - [`hamiltonian`]: 4×4 manifold Hamiltonian construction and exact
//!   block diagonalization.
//! - [`transitions`]: labeled optical transition tables, Zeeman sweeps,
//!   and the pairwise drift-centering correction.
//! - [`fit`]: Levenberg-Marquardt engine and the spectroscopy model zoo.
//! - [`synth`]: seeded synthetic-data generators used as independent fit
//!   oracles.
//! - [`config`], [`io`], [`units`]: run configuration, CSV/report
//!   serialization, and unit conversions.

pub mod config;
pub mod fit;
pub mod geometry;
pub mod hamiltonian;
pub mod io;
pub mod synth;
pub mod transitions;
pub mod units;

pub use config::RunConfig;
pub use fit::{FitResult, G2Params, SpectrumSeries};
pub use geometry::{DefectFrameField, DefectOrientation, LabVector};
pub use hamiltonian::{EigenSystem, ManifoldParameters, PhysicalConstants};
pub use transitions::{Family, MeasuredSweep, SweepTable, TransitionLine};
