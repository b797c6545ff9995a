use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::los::{delay_phase, fspl_amplitude, path_delay};
use super::reflection::{fresnel_coefficients, roughness_exponent};
use super::{ComplexGain, Polarization};
use crate::constants::{wavenumber, KM};
use crate::error::{Error, Result};
use crate::material::MaterialProperties;
use crate::scene::PathGeometry;

/// Angles of a bistatic scattering event, radians: incidence `theta1`,
/// scattered elevation `theta2` and out-of-plane azimuth `theta3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterGeometry {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl ScatterGeometry {
    pub fn specular(theta: f64) -> Self {
        ScatterGeometry { theta1: theta, theta2: theta, theta3: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub max_terms: usize,
    pub rel_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { max_terms: 200, rel_tol: 1e-10 }
    }
}

/// Partial sum of `Σ_{m≥1} g^m / (m!·m) · exp(−a/m)`, held as a logarithm so
/// large roughness exponents do not overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeckmannSeries {
    /// `ln(sum)`; `-inf` for an empty sum.
    pub ln_sum: f64,
    pub terms: usize,
    pub converged: bool,
    /// Bound on the neglected tail relative to the sum.
    pub tail_ratio: f64,
}

impl BeckmannSeries {
    pub fn sum(&self) -> f64 {
        self.ln_sum.exp()
    }
}

/// Tail bound beyond term `m`: terms after it are dominated by `g^j / j!`.
fn ln_tail_bound(g_ln: f64, g: f64, m: usize, ln_fact_next: f64) -> f64 {
    let next = (m + 1) as f64;
    let ratio = g / (next + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    next * g_ln - ln_fact_next - next.ln() - (1.0 - ratio).ln()
}

pub fn beckmann_series(g: f64, a: f64, opts: &SeriesOptions) -> BeckmannSeries {
    if !(g > 0.0) {
        return BeckmannSeries { ln_sum: f64::NEG_INFINITY, terms: 0, converged: true, tail_ratio: 0.0 };
    }
    let g_ln = g.ln();
    let mut ln_fact = 0.0;
    // running log-sum-exp: sum = exp(max) * scaled
    let mut max = f64::NEG_INFINITY;
    let mut scaled = 0.0;
    let mut tail_ratio = f64::INFINITY;
    let mut terms = 0;
    for m in 1..=opts.max_terms.max(1) {
        let mf = m as f64;
        ln_fact += mf.ln();
        let ln_term = mf * g_ln - ln_fact - mf.ln() - a / mf;
        if ln_term > max {
            scaled = scaled * (max - ln_term).exp() + 1.0;
            max = ln_term;
        } else {
            scaled += (ln_term - max).exp();
        }
        terms = m;
        let ln_sum = max + scaled.ln();
        let ln_tail = ln_tail_bound(g_ln, g, m, ln_fact + (mf + 1.0).ln());
        tail_ratio = (ln_tail - ln_sum).exp();
        if tail_ratio <= opts.rel_tol || ln_tail < -690.0 {
            return BeckmannSeries { ln_sum, terms, converged: true, tail_ratio };
        }
    }
    BeckmannSeries { ln_sum: max + scaled.ln(), terms, converged: tail_ratio <= 1e-6, tail_ratio }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringCoefficient {
    pub value: Complex64,
    pub terms: usize,
    /// False when the term cap was hit with more than 1e-6 relative tail left.
    pub converged: bool,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub fn scattering_coefficient(
    f: f64,
    geom: &ScatterGeometry,
    material: &MaterialProperties,
    pol: Polarization,
    opts: &SeriesOptions,
) -> Result<ScatteringCoefficient> {
    material.check_facets(f)?;
    let (t1, t2, t3) = (geom.theta1, geom.theta2, geom.theta3);
    let denominator = t2.cos() * (t1.cos() + t2.cos());
    if denominator.abs() < 1e-12 {
        return Err(Error::GrazingGeometry { denominator });
    }
    let k = wavenumber(f);
    let sigma = material.roughness_sigma_m;
    let l = material.correlation_length_m;
    let area = material.facet_area();

    let big_f = (1.0 + t1.cos() * t2.cos() - t1.sin() * t2.sin() * t3.cos()) / denominator;
    let vx = k * (t1.sin() - t2.sin() * t3.cos());
    let vy = -k * t2.sin() * t3.sin();
    let vxy2 = vx * vx + vy * vy;
    let rho0 = sinc(vx * material.facet_lx_m) * sinc(vy * material.facet_ly_m);
    let g_sca = (k * sigma * (t1.cos() + t2.cos())).powi(2);
    let g = roughness_exponent(f, sigma, t1);

    let series = beckmann_series(g_sca, vxy2 * l * l / 4.0, opts);
    let coef = PI * l * l * big_f * big_f / area;
    let diffuse = if series.ln_sum.is_finite() { coef * (series.ln_sum - g).exp() } else { 0.0 };
    let power = rho0 * rho0 * (-g).exp() + diffuse;

    let (te, tm) = fresnel_coefficients(f, t1.clamp(0.0, PI / 2.0 - 1e-12), material)?;
    let gamma = match pol {
        Polarization::TE => te,
        Polarization::TM => tm,
    };
    let value = gamma * power.sqrt();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite scattering coefficient at f={f}")));
    }
    Ok(ScatteringCoefficient { value, terms: series.terms, converged: series.converged })
}

pub fn scattered_response(
    f: f64,
    path: &PathGeometry,
    geom: &ScatterGeometry,
    material: &MaterialProperties,
    pol: Polarization,
    opts: &SeriesOptions,
) -> Result<(ComplexGain, ScatteringCoefficient)> {
    let s = scattering_coefficient(f, geom, material, pol, opts)?;
    let amplitude = fspl_amplitude(f, (path.s1_km + path.s2_km) * KM)?;
    let tau = path_delay(path)?;
    Ok((ComplexGain(amplitude * s.value * delay_phase(f * tau)), s))
}
