//! Unit conversions at the I/O boundary. Frequencies in GHz, wavelengths
//! in nm, with `ν[GHz] = 299792458 / λ[nm]` (c = 299792458 m/s exactly).

use thiserror::Error;

/// Speed of light, m/s (exact by definition).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum UnitsError {
    #[error("wavelength must be positive, got {0} nm")]
    NonPositiveWavelength(f64),
    #[error("frequency must be positive, got {0} GHz")]
    NonPositiveFrequency(f64),
}

/// Vacuum wavelength (nm) to optical frequency (GHz).
pub fn wavelength_nm_to_ghz(lambda_nm: f64) -> Result<f64, UnitsError> {
    if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
        return Err(UnitsError::NonPositiveWavelength(lambda_nm));
    }
    Ok(SPEED_OF_LIGHT_M_PER_S / lambda_nm)
}

/// Optical frequency (GHz) to vacuum wavelength (nm).
pub fn ghz_to_wavelength_nm(nu_ghz: f64) -> Result<f64, UnitsError> {
    if !(nu_ghz.is_finite() && nu_ghz > 0.0) {
        return Err(UnitsError::NonPositiveFrequency(nu_ghz));
    }
    Ok(SPEED_OF_LIGHT_M_PER_S / nu_ghz)
}
