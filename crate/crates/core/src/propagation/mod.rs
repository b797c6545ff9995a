//! Per-mechanism transfer functions of the debris-perturbed THz link.
//!
//! Every response is evaluated at a single sub-band frequency for a static
//! geometry snapshot; the complex value doubles as the path attenuation fed to
//! channel assembly.

mod diffraction;
mod los;
mod reflection;
mod scattering;

pub use diffraction::{
    diffracted_response, diffraction_loss, fresnel_kirchhoff_parameter, DiffractionMu,
};
pub use los::{delay_phase, doppler_factor, fspl_amplitude, los_response, path_delay};
pub use reflection::{
    fresnel_coefficients, reflected_response, reflection_coefficient, roughness_coefficient,
    roughness_exponent, wave_impedance,
};
pub use scattering::{
    beckmann_series, scattered_response, scattering_coefficient, BeckmannSeries,
    ScatterGeometry, ScatteringCoefficient, SeriesOptions,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex field ratio of a single propagation mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexGain(pub Complex64);

impl ComplexGain {
    pub const ONE: ComplexGain = ComplexGain(Complex64::new(1.0, 0.0));

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn magnitude(self) -> f64 {
        self.0.norm()
    }

    pub fn phase(self) -> f64 {
        self.0.arg()
    }
}

impl From<Complex64> for ComplexGain {
    fn from(c: Complex64) -> Self {
        ComplexGain(c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[default]
    TE,
    TM,
}
