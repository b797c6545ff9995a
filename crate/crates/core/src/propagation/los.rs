use num_complex::Complex64;
use std::f64::consts::PI;

use super::ComplexGain;
use crate::constants::{KM, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::scene::{diffraction_excess_path, excess_delay, LinkGeometry, Mechanism, PathGeometry};

/// Free-space amplitude `c / (4 pi f r)`; `r` in metres.
pub fn fspl_amplitude(f: f64, r: f64) -> Result<f64> {
    if !(f > 0.0 && r > 0.0) || !f.is_finite() || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("fspl needs f > 0 and r > 0 (f={f}, r={r})")));
    }
    Ok(SPEED_OF_LIGHT / (4.0 * PI * f * r))
}

/// `exp(-j 2 pi cycles)` with the integer part of `cycles` removed first,
/// so THz phases of ~1e10 cycles stay exact to the fractional part.
pub fn delay_phase(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.round();
    Complex64::from_polar(1.0, -2.0 * PI * frac)
}

/// `exp(-j 2 pi f v / c)`; `v` in m/s.
pub fn doppler_factor(f: f64, v: f64) -> ComplexGain {
    ComplexGain(delay_phase(f * v / SPEED_OF_LIGHT))
}

/// Propagation delay of a path, seconds.
pub fn path_delay(path: &PathGeometry) -> Result<f64> {
    let tau_los = path.d_km * KM / SPEED_OF_LIGHT;
    Ok(match path.mechanism {
        Mechanism::LoS => tau_los,
        Mechanism::Reflection | Mechanism::Scattering => {
            tau_los + excess_delay(path.s1_km, path.s2_km, path.d_km)?
        }
        Mechanism::Diffraction => {
            tau_los + diffraction_excess_path(path.clearance_m, path.s1_km, path.s2_km)? / SPEED_OF_LIGHT
        }
    })
}

/// Direct-path transfer function; molecular absorption is taken as unity.
pub fn los_response(f: f64, geometry: &LinkGeometry) -> Result<ComplexGain> {
    let d = geometry.distance_m();
    let amplitude = fspl_amplitude(f, d)?;
    Ok(ComplexGain(amplitude * delay_phase(f * (d / SPEED_OF_LIGHT))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fspl_golden_and_scaling() {
        let a = fspl_amplitude(300e9, 500e3).unwrap();
        assert!((a - 1.5915e-10).abs() < 1e-14);
        let b = fspl_amplitude(300e9, 1000e3).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        let lo = fspl_amplitude(30e9, 1e5).unwrap();
        let hi = fspl_amplitude(3e12, 1e5).unwrap();
        assert!((lo / hi - 100.0).abs() < 1e-10);
    }

    #[test]
    fn fspl_rejects_non_positive() {
        assert!(fspl_amplitude(0.0, 1.0).is_err());
        assert!(fspl_amplitude(1.0, -1.0).is_err());
    }

    #[test]
    fn doppler_is_unit_phase() {
        assert_eq!(doppler_factor(3e12, 0.0).value(), Complex64::new(1.0, 0.0));
        for &(f, v) in &[(3e10, 7000.0), (3e12, 7000.0), (5e12, 1234.5), (1e9, 0.1)] {
            assert!((doppler_factor(f, v).magnitude() - 1.0).abs() < 1e-15);
        }
        // f v / c = 7e7 cycles exactly: wraps to zero phase
        let d = doppler_factor(3e12, 7000.0);
        assert!(d.phase().abs() < 1e-12);
        // quarter cycle: f v / c = 0.25 -> -pi/2
        let d = doppler_factor(3e8, 0.25);
        assert!((d.phase() + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn los_magnitude_and_delay() {
        let g = LinkGeometry::new(500.0, 7.0).unwrap();
        for f in [3e10, 3e11, 3e12, 5e12] {
            let h = los_response(f, &g).unwrap();
            assert!((h.magnitude() - fspl_amplitude(f, 5e5).unwrap()).abs() < 1e-24);
        }
        let tau = path_delay(&PathGeometry::los(&g)).unwrap();
        assert!((tau - 5e5 / 3e8).abs() < 1e-18);
        assert!((tau * 1e3 - 1.6667).abs() < 1e-4);
    }

    #[test]
    fn los_phase_slope() {
        let f = 3e11;
        let g1 = LinkGeometry::new(500.0, 0.0).unwrap();
        let g2 = LinkGeometry::new(500.0 + 1e-7, 0.0).unwrap(); // +0.1 mm
        let dphi = (los_response(f, &g2).unwrap().value() / los_response(f, &g1).unwrap().value()).arg();
        let expected = -2.0 * PI * f * 1e-4 / SPEED_OF_LIGHT;
        assert!((dphi - expected).abs() < 1e-6, "{dphi} vs {expected}");
    }
}
