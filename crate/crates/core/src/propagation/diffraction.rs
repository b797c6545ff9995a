use serde::{Deserialize, Serialize};

use super::los::{delay_phase, fspl_amplitude, path_delay};
use super::ComplexGain;
use crate::constants::{wavelength, KM};
use crate::error::{Error, Result};
use crate::material::Breakpoints;
use crate::scene::PathGeometry;

/// Knife-edge parameter `v = h·sqrt(2(s1+s2)/(λ s1 s2))`; lengths in metres.
pub fn fresnel_kirchhoff_parameter(h_m: f64, f: f64, s1_m: f64, s2_m: f64) -> Result<f64> {
    if !(s1_m > 0.0 && s2_m > 0.0 && f > 0.0) {
        return Err(Error::InvalidArgument(format!("knife-edge needs s1, s2, f > 0 (s1={s1_m}, s2={s2_m}, f={f})")));
    }
    Ok(h_m.abs() * (2.0 * (s1_m + s2_m) / (wavelength(f) * s1_m * s2_m)).sqrt())
}

/// Per-branch fit weights of the piecewise loss; each may vary with frequency.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffractionMu {
    pub mu1: Option<Breakpoints>,
    pub mu2: Option<Breakpoints>,
    pub mu3: Option<Breakpoints>,
}


impl DiffractionMu {
    fn lookup(table: &Option<Breakpoints>, f: f64) -> Result<f64> {
        match table {
            None => Ok(1.0),
            Some(b) => b.at(f).ok_or_else(|| {
                Error::InvalidConfig(format!("diffraction weight table does not cover {f} Hz"))
            }),
        }
    }

    pub fn at(&self, f: f64) -> Result<[f64; 3]> {
        Ok([Self::lookup(&self.mu1, f)?, Self::lookup(&self.mu2, f)?, Self::lookup(&self.mu3, f)?])
    }
}

/// Piecewise knife-edge loss coefficient.
pub fn diffraction_loss(f: f64, v: f64, mu: &DiffractionMu) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("diffraction parameter {v} must be > 0")));
    }
    let [mu1, mu2, mu3] = mu.at(f)?;
    Ok(if v <= 1.0 {
        mu1 * 0.5 * (-0.95 * v).exp()
    } else if v <= 2.4 {
        mu2 * (0.4 - (0.12 - (0.38 - 0.1 * v).powi(2)).sqrt())
    } else {
        mu3 * 0.225 / v
    })
}

pub fn diffracted_response(f: f64, path: &PathGeometry, mu: &DiffractionMu) -> Result<ComplexGain> {
    let v = fresnel_kirchhoff_parameter(path.clearance_m, f, path.s1_km * KM, path.s2_km * KM)?;
    let k = diffraction_loss(f, v, mu)?;
    let amplitude = fspl_amplitude(f, (path.s1_km + path.s2_km) * KM)?;
    let tau = path_delay(path)?;
    Ok(ComplexGain(amplitude * k * delay_phase(f * tau)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;
    use crate::scene::{LinkGeometry, Mechanism};

    const UNIT: DiffractionMu = DiffractionMu { mu1: None, mu2: None, mu3: None };

    #[test]
    fn branch_values() {
        assert!((diffraction_loss(1e12, 1.0, &UNIT).unwrap() - 0.5 * (-0.95f64).exp()).abs() < 1e-15);
        assert!((diffraction_loss(1e12, 1.0, &UNIT).unwrap() - 0.193371).abs() < 1e-6);
        assert!((diffraction_loss(1e12, 2.4, &UNIT).unwrap() - 0.083140).abs() < 1e-6);
        assert_eq!(diffraction_loss(1e12, 10.0, &UNIT).unwrap(), 0.0225);
        let above = diffraction_loss(1e12, 2.4 + 1e-12, &UNIT).unwrap();
        assert!((above - 0.09375).abs() < 1e-9);
        let jump = above - diffraction_loss(1e12, 2.4, &UNIT).unwrap();
        assert!((jump - 0.010610).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_positive_parameter() {
        assert!(diffraction_loss(1e12, 0.0, &UNIT).is_err());
        assert!(diffraction_loss(1e12, -1.0, &UNIT).is_err());
    }

    #[test]
    fn decreasing_in_last_branch() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = 2.41 + i as f64 * 0.5;
            let d = diffraction_loss(1e12, v, &UNIT).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn weights_scale_branches() {
        let mu = DiffractionMu {
            mu1: Some(Breakpoints::constant(1e9, 1e14, 2.0)),
            mu2: None,
            mu3: Some(Breakpoints::constant(1e9, 1e14, 0.5)),
        };
        assert!((diffraction_loss(1e12, 0.5, &mu).unwrap() - 2.0 * 0.5 * (-0.475f64).exp()).abs() < 1e-15);
        assert!((diffraction_loss(1e12, 10.0, &mu).unwrap() - 0.01125).abs() < 1e-15);
        assert!(diffraction_loss(1e15, 0.5, &mu).is_err());
    }

    #[test]
    fn knife_edge_parameter() {
        assert_eq!(fresnel_kirchhoff_parameter(0.0, 3e11, 2.5e5, 2.5e5).unwrap(), 0.0);
        let v = fresnel_kirchhoff_parameter(1.0, 3e11, 2.5e5, 2.5e5).unwrap();
        let lambda = SPEED_OF_LIGHT / 3e11;
        assert!((v - (2.0 * 5e5 / (lambda * 6.25e10)).sqrt()).abs() < 1e-15);
        assert!((v - 0.1265).abs() < 1e-3);
        let v4 = fresnel_kirchhoff_parameter(1.0, 1.2e12, 2.5e5, 2.5e5).unwrap();
        assert!((v4 / v - 2.0).abs() < 1e-12);
        assert!(fresnel_kirchhoff_parameter(1.0, 3e11, 0.0, 1.0).is_err());
    }

    #[test]
    fn response_composes_factors() {
        let path = PathGeometry {
            s1_km: 250.0,
            s2_km: 250.0,
            d_km: 500.0,
            incidence_angle_rad: 0.0,
            clearance_m: 0.5,
            mechanism: Mechanism::Diffraction,
        };
        let f = 3e12;
        let h = diffracted_response(f, &path, &UNIT).unwrap();
        let lambda: f64 = 1e-4;
        let v = 0.5 * (2.0 * 5e5 / (lambda * 6.25e10)).sqrt();
        assert!(v < 1.0);
        let k = 0.5 * (-0.95 * v).exp();
        let expected = 3e8 / (4.0 * std::f64::consts::PI * f * 5e5) * k;
        assert!((h.magnitude() - expected).abs() < 1e-12 * expected);
        let g = LinkGeometry::new(500.0, 0.0).unwrap();
        assert!(path_delay(&path).unwrap() >= path_delay(&PathGeometry::los(&g)).unwrap());
    }
}
