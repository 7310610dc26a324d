//! Cylindrical observables, twisted Birkhoff integrals and the spectral and
//! correlation estimates built on them.

pub mod correlation;
pub mod integral;
pub mod profile;

pub use correlation::{cesaro_correlation, correlation, max_pitch, CesaroEstimate, DEFAULT_HORIZON_FACTOR};
pub use integral::{
    ambient_radius, evaluate, g_r_estimate, sigma_box_bound, twisted_integral, twisted_integral_on,
    twisted_integral_oracle, twisted_integral_oracle_on, Evaluator, GrEstimate, SpectralEstimate,
};
pub use profile::{fejer, fejer_1d, mean, type_frequencies, zero_mean_project, CylindricalFunction, Profile, Shape};

#[cfg(test)]
mod tests;
