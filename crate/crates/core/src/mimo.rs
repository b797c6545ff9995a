//! Per-sub-band MIMO channel assembly from path contributions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::constants::db_to_linear;
use crate::error::{Error, Result};
use crate::propagation::{doppler_factor, ComplexGain};
use crate::rng::complex_normal;
use crate::scene::{LinkGeometry, Mechanism};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    #[serde(default = "half")]
    pub spacing_tx: f64,
    #[serde(default = "half")]
    pub spacing_rx: f64,
}

fn half() -> f64 {
    0.5
}

impl ArrayConfig {
    pub fn square(n: usize) -> Self {
        ArrayConfig { n_tx: n, n_rx: n, spacing_tx: 0.5, spacing_rx: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::InvalidConfig("array sizes must be >= 1".into()));
        }
        if !(self.spacing_tx > 0.0 && self.spacing_rx > 0.0) {
            return Err(Error::InvalidConfig("array spacings must be > 0".into()));
        }
        Ok(())
    }
}

/// Direction as (elevation θ from the link axis, azimuth φ), radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathContribution {
    pub mechanism: Mechanism,
    pub gain: ComplexGain,
    pub delay_s: f64,
    pub aod: Direction,
    pub aoa: Direction,
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0) {
        return Err(Error::DegenerateGeometry("zero-length direction".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// Departure and arrival directions of a path bouncing off `p_km`, in array
/// frames whose boresight points along the link axis.
pub fn path_directions(geometry: &LinkGeometry, p_km: [f64; 3]) -> Result<(Direction, Direction)> {
    let tx = geometry.tx_position();
    let rx = geometry.rx_position();
    let u = unit([p_km[0] - tx[0], p_km[1] - tx[1], p_km[2] - tx[2]])?;
    let w = unit([p_km[0] - rx[0], p_km[1] - rx[1], p_km[2] - rx[2]])?;
    let aod = Direction { theta: u[0].clamp(-1.0, 1.0).acos(), phi: u[2].atan2(u[1]) };
    let aoa = Direction { theta: (-w[0]).clamp(-1.0, 1.0).acos(), phi: w[2].atan2(w[1]) };
    Ok((aod, aoa))
}

/// ULA response with entries `exp(−j 2π k Δ sinθ cosφ)`.
pub fn steering_vector(n: usize, spacing: f64, dir: Direction) -> CVector {
    let omega = dir.theta.sin() * dir.phi.cos();
    CVector::from_iterator(
        n,
        (0..n).map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -2.0 * PI * k as f64 * spacing * omega)
            }
        }),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubbandChannel {
    pub frequency_hz: f64,
    pub matrix: CMatrix,
    pub paths: Vec<PathContribution>,
    pub los_indicator: bool,
}

impl SubbandChannel {
    pub fn n_rx(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn assemble_subband(
    paths: &[PathContribution],
    config: &ArrayConfig,
    f: f64,
    velocity_ms: f64,
    los_indicator: bool,
) -> Result<SubbandChannel> {
    config.validate()?;
    let doppler = doppler_factor(f, velocity_ms).value();
    let mut h = CMatrix::zeros(config.n_rx, config.n_tx);
    for p in paths {
        if p.mechanism == Mechanism::LoS && !los_indicator {
            continue;
        }
        let sr = steering_vector(config.n_rx, config.spacing_rx, p.aoa);
        let st = steering_vector(config.n_tx, config.spacing_tx, p.aod);
        let g = p.gain.value() * doppler;
        h.ger(g, &sr, &st, Complex64::new(1.0, 0.0));
    }
    Ok(SubbandChannel { frequency_hz: f, matrix: h, paths: paths.to_vec(), los_indicator })
}

/// Hybrid Rician mix around `h_det` with the scatter power tied to its
/// average entry energy.
pub fn apply_rician_smallscale<R: Rng + ?Sized>(h_det: &CMatrix, k_factor_db: f64, rng: &mut R) -> Result<CMatrix> {
    if !k_factor_db.is_finite() {
        return Err(Error::InvalidConfig(format!("Rician K-factor {k_factor_db} dB must be finite")));
    }
    let k = db_to_linear(k_factor_db);
    let (nr, nt) = h_det.shape();
    let los_w = (k / (k + 1.0)).sqrt();
    let nlos_w = (1.0 / (k + 1.0)).sqrt() * h_det.norm() / ((nr * nt) as f64).sqrt();
    let w = CMatrix::from_fn(nr, nt, |_, _| complex_normal(rng));
    Ok(h_det.map(|x| x * los_w) + w * Complex64::from(nlos_w))
}

/// Uniform sub-band centres across `[center − B/2, center + B/2]`.
pub fn subband_grid(center_hz: f64, n: usize, bandwidth_hz: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one sub-band".into()));
    }
    let step = bandwidth_hz / n as f64;
    let mid = (n as f64 - 1.0) / 2.0;
    Ok((0..n).map(|k| center_hz + (k as f64 - mid) * step).collect())
}

/// Writes matrices as little-endian interleaved re/im f64 in row-major order,
/// with a text sidecar `<path>.txt` describing the layout.
pub fn export_channels(path: &Path, channels: &[SubbandChannel]) -> Result<()> {
    let (rows, cols) = channels.first().map(|c| c.matrix.shape()).unwrap_or((0, 0));
    let mut bytes = Vec::with_capacity(channels.len() * rows * cols * 16);
    for c in channels {
        if c.matrix.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch("sub-band matrices differ in shape".into()));
        }
        for r in 0..rows {
            for k in 0..cols {
                let z = c.matrix[(r, k)];
                bytes.extend_from_slice(&z.re.to_le_bytes());
                bytes.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    std::fs::write(path, bytes)?;
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".txt");
    let mut side = std::fs::File::create(sidecar_path)?;
    writeln!(side, "format f64le complex interleaved row-major")?;
    writeln!(side, "rows {rows}")?;
    writeln!(side, "cols {cols}")?;
    writeln!(side, "subbands {}", channels.len())?;
    let freqs: Vec<String> = channels.iter().map(|c| format!("{:e}", c.frequency_hz)).collect();
    writeln!(side, "frequencies_hz {}", freqs.join(" "))?;
    Ok(())
}

pub fn read_exported_channels(path: &Path, rows: usize, cols: usize) -> Result<Vec<CMatrix>> {
    let bytes = std::fs::read(path)?;
    let per = rows * cols * 16;
    if per == 0 || bytes.len() % per != 0 {
        return Err(Error::Parse(format!("channel file length {} is not a multiple of {per}", bytes.len())));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    Ok((0..bytes.len() / per)
        .map(|s| CMatrix::from_fn(rows, cols, |r, k| {
            let o = s * per + (r * cols + k) * 16;
            Complex64::new(f(o), f(o + 8))
        }))
        .collect())
}
