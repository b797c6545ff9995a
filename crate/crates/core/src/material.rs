//! Frequency-tabulated material data for debris surfaces.

use serde::{Deserialize, Serialize};

use crate::constants::wavelength;
use crate::error::{Error, Result};

/// Piecewise-linear table of `(frequency_hz, value)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Breakpoints(pub Vec<(f64, f64)>);

impl Breakpoints {
    pub fn constant(lo_hz: f64, hi_hz: f64, value: f64) -> Self {
        Breakpoints(vec![(lo_hz, value), (hi_hz, value)])
    }

    /// Linear interpolation; `None` outside the tabulated range.
    pub fn at(&self, f: f64) -> Option<f64> {
        let pts = &self.0;
        let (first, last) = (pts.first()?, pts.last()?);
        if !(f >= first.0 && f <= last.0) {
            return None;
        }
        if pts.len() == 1 {
            return Some(first.1);
        }
        let idx = pts.partition_point(|p| p.0 < f);
        if idx == 0 {
            return Some(first.1);
        }
        let (f0, v0) = pts[idx - 1];
        let (f1, v1) = pts[idx];
        if f1 == f0 {
            return Some(v1);
        }
        let t = (f - f0) / (f1 - f0);
        Some(v0 + t * (v1 - v0))
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.0.first()?.0, self.0.last()?.0))
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidConfig(format!("{what}: empty table")));
        }
        for w in self.0.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidConfig(format!(
                    "{what}: frequencies must be strictly increasing"
                )));
            }
        }
        if self.0.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.0 <= 0.0) {
            return Err(Error::InvalidConfig(format!("{what}: non-finite entry")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialProperties {
    #[serde(default)]
    pub name: String,
    /// Real refractive index n(f).
    pub refractive_index: Breakpoints,
    /// Intensity absorption coefficient alpha(f), 1/m.
    pub absorption_per_m: Breakpoints,
    /// RMS surface height, m.
    pub roughness_sigma_m: f64,
    /// Surface correlation length, m.
    pub correlation_length_m: f64,
    pub facet_lx_m: f64,
    pub facet_ly_m: f64,
}

impl MaterialProperties {
    pub fn validate(&self) -> Result<()> {
        self.refractive_index.validate(&format!("{}.refractive_index", self.name))?;
        self.absorption_per_m.validate(&format!("{}.absorption_per_m", self.name))?;
        if self.refractive_index.0.iter().any(|p| p.1 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "{}: refractive index below 1",
                self.name
            )));
        }
        if self.absorption_per_m.0.iter().any(|p| p.1 < 0.0) {
            return Err(Error::InvalidConfig(format!("{}: negative absorption", self.name)));
        }
        if !(self.roughness_sigma_m >= 0.0) {
            return Err(Error::InvalidConfig(format!("{}: roughness must be >= 0", self.name)));
        }
        if !(self.correlation_length_m > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "{}: correlation length must be > 0",
                self.name
            )));
        }
        if !(self.facet_lx_m > 0.0 && self.facet_ly_m > 0.0) {
            return Err(Error::InvalidConfig(format!("{}: facet dims must be > 0", self.name)));
        }
        Ok(())
    }

    pub fn refractive_index_at(&self, f: f64) -> Result<f64> {
        self.refractive_index.at(f).ok_or_else(|| self.missing(f))
    }

    pub fn absorption_at(&self, f: f64) -> Result<f64> {
        self.absorption_per_m.at(f).ok_or_else(|| self.missing(f))
    }

    /// Kirchhoff scattering needs facets much larger than the wavelength.
    pub fn check_facets(&self, f: f64) -> Result<()> {
        let min = 10.0 * wavelength(f);
        if self.facet_lx_m < min || self.facet_ly_m < min {
            return Err(Error::InvalidConfig(format!(
                "{}: facet {}x{} m smaller than 10 wavelengths ({min:.3e} m) at {f:e} Hz",
                self.name, self.facet_lx_m, self.facet_ly_m
            )));
        }
        Ok(())
    }

    pub fn facet_area(&self) -> f64 {
        self.facet_lx_m * self.facet_ly_m
    }

    fn missing(&self, f: f64) -> Error {
        Error::UnknownMaterial {
            material: self.name.clone(),
            frequency_hz: f,
        }
    }

    /// Lossless dielectric with a flat index; handy for tests.
    pub fn lossless(name: &str, n: f64) -> Self {
        MaterialProperties {
            name: name.to_string(),
            refractive_index: Breakpoints::constant(1e9, 1e14, n),
            absorption_per_m: Breakpoints::constant(1e9, 1e14, 0.0),
            roughness_sigma_m: 0.0,
            correlation_length_m: 5e-4,
            facet_lx_m: 0.125,
            facet_ly_m: 0.125,
        }
    }

    pub fn default_smooth_glass() -> Self {
        MaterialProperties {
            name: "SmoothGlass".into(),
            refractive_index: Breakpoints(vec![(1e10, 2.0), (1e12, 1.95), (1e13, 1.9)]),
            absorption_per_m: Breakpoints(vec![(1e10, 5.0), (1e12, 200.0), (1e13, 2000.0)]),
            roughness_sigma_m: 5e-6,
            correlation_length_m: 5e-4,
            facet_lx_m: 0.125,
            facet_ly_m: 0.125,
        }
    }

    /// Conductor-like medium: n = kappa = 300, so alpha = 4 pi f kappa / c
    /// grows linearly with frequency.
    pub fn default_rough_metal() -> Self {
        let kappa = 300.0;
        let alpha = |f: f64| 4.0 * std::f64::consts::PI * f * kappa / crate::constants::SPEED_OF_LIGHT;
        MaterialProperties {
            name: "RoughMetal".into(),
            refractive_index: Breakpoints(vec![(1e10, 300.0), (1e13, 300.0)]),
            absorption_per_m: Breakpoints(vec![(1e10, alpha(1e10)), (1e13, alpha(1e13))]),
            roughness_sigma_m: 1e-4,
            correlation_length_m: 5e-4,
            facet_lx_m: 0.125,
            facet_ly_m: 0.125,
        }
    }
}
