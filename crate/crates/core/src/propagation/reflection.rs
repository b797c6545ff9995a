use num_complex::Complex64;
use std::f64::consts::PI;

use super::los::{delay_phase, fspl_amplitude, path_delay};
use super::{ComplexGain, Polarization};
use crate::constants::{free_space_impedance, wavelength, KM, SPEED_OF_LIGHT, VACUUM_PERMEABILITY, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::material::MaterialProperties;
use crate::scene::PathGeometry;

/// Complex relative permittivity `n² − κ² − j 2 n κ` with `κ = α c / (4 pi f)`.
fn relative_permittivity(f: f64, material: &MaterialProperties) -> Result<Complex64> {
    let n = material.refractive_index_at(f)?;
    let kappa = material.absorption_at(f)? * SPEED_OF_LIGHT / (4.0 * PI * f);
    Ok(Complex64::new(n * n - kappa * kappa, -2.0 * n * kappa))
}

/// Wave impedance of the debris material, ohms.
pub fn wave_impedance(f: f64, material: &MaterialProperties) -> Result<Complex64> {
    if !(f > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency {f} must be > 0")));
    }
    let eps_r = relative_permittivity(f, material)?;
    Ok((Complex64::from(VACUUM_PERMEABILITY) / (VACUUM_PERMITTIVITY * eps_r)).sqrt())
}

/// Fresnel amplitude coefficients `(Γ_TE, Γ_TM)` for a wave in vacuum hitting
/// the material, impedance-ratio form with a complex Snell transmission angle.
pub fn fresnel_coefficients(
    f: f64,
    theta_i: f64,
    material: &MaterialProperties,
) -> Result<(Complex64, Complex64)> {
    if !(0.0..PI / 2.0).contains(&theta_i) {
        return Err(Error::InvalidArgument(format!("incidence angle {theta_i} outside [0, pi/2)")));
    }
    let z1 = Complex64::from(free_space_impedance());
    let z2 = wave_impedance(f, material)?;
    let n2 = z1 / z2;
    let cos_i = Complex64::from(theta_i.cos());
    let sin_t = theta_i.sin() / n2;
    let cos_t = (Complex64::from(1.0) - sin_t * sin_t).sqrt();
    let te = (z2 * cos_i - z1 * cos_t) / (z2 * cos_i + z1 * cos_t);
    let tm = (z2 * cos_t - z1 * cos_i) / (z2 * cos_t + z1 * cos_i);
    Ok((te, tm))
}

/// Rayleigh exponent `g = (4 pi σ cos θ / λ)²`.
pub fn roughness_exponent(f: f64, sigma: f64, theta_i: f64) -> f64 {
    (4.0 * PI * sigma * theta_i.cos() / wavelength(f)).powi(2)
}

/// Specular attenuation `exp(−g / 2)` of a Gaussian-rough surface.
pub fn roughness_coefficient(f: f64, sigma: f64, theta_i: f64) -> f64 {
    (-roughness_exponent(f, sigma, theta_i) / 2.0).exp()
}

/// `ρ(f) · Γ_p`.
pub fn reflection_coefficient(
    f: f64,
    theta_i: f64,
    material: &MaterialProperties,
    pol: Polarization,
) -> Result<Complex64> {
    let (te, tm) = fresnel_coefficients(f, theta_i, material)?;
    let gamma = match pol {
        Polarization::TE => te,
        Polarization::TM => tm,
    };
    Ok(roughness_coefficient(f, material.roughness_sigma_m, theta_i) * gamma)
}

pub fn reflected_response(
    f: f64,
    path: &PathGeometry,
    material: &MaterialProperties,
    pol: Polarization,
) -> Result<ComplexGain> {
    let r = reflection_coefficient(f, path.incidence_angle_rad, material, pol)?;
    let amplitude = fspl_amplitude(f, (path.s1_km + path.s2_km) * KM)?;
    let tau = path_delay(path)?;
    Ok(ComplexGain(amplitude * r * delay_phase(f * tau)))
}
