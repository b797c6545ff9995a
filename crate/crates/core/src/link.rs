//! QPSK MIMO link: modulation, AWGN, CSI estimation, zero-forcing and BER.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::constants::db_to_linear;
use crate::error::{Error, Result};
use crate::mimo::{CMatrix, SubbandChannel};
use crate::rng::{complex_normal, derive_seed, rng_from_seed, stream};

/// Gray map: bit pair (b0, b1) → ((1−2b0) + j(1−2b1))/√2.
pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Framing(format!("odd bit count {}", bits.len())));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|b| {
            let re = 1.0 - 2.0 * f64::from(b[0] & 1);
            let im = 1.0 - 2.0 * f64::from(b[1] & 1);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect())
}

pub fn qpsk_demodulate(symbols: &[Complex64]) -> Vec<u8> {
    symbols.iter().flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)]).collect()
}

/// Arranges symbols into an `nt × T` frame, antenna index fastest.
pub fn frame_from_symbols(symbols: &[Complex64], nt: usize) -> Result<CMatrix> {
    if nt == 0 || !symbols.len().is_multiple_of(nt) {
        return Err(Error::Framing(format!("{} symbols do not fill {nt} streams", symbols.len())));
    }
    Ok(CMatrix::from_column_slice(nt, symbols.len() / nt, symbols))
}

pub fn symbols_from_frame(frame: &CMatrix) -> Vec<Complex64> {
    frame.as_slice().to_vec()
}

/// Noise variance giving `snr_db` average receive SNR per antenna for a
/// transmit vector of total unit power.
pub fn noise_variance(h: &CMatrix, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidConfig(format!("SNR {snr_db} dB must be finite")));
    }
    let (nr, nt) = h.shape();
    Ok(h.norm_squared() / ((nr * nt) as f64 * db_to_linear(snr_db)))
}

/// `y = H x γ + n` with `γ = 1/√Nt`; returns `y` and the noise variance.
pub fn transmit<R: Rng + ?Sized>(h: &CMatrix, x: &CMatrix, snr_db: f64, rng: &mut R) -> Result<(CMatrix, f64)> {
    if h.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!("channel has {} inputs, frame {} streams", h.ncols(), x.nrows())));
    }
    let var = noise_variance(h, snr_db)?;
    let gamma = 1.0 / (h.ncols() as f64).sqrt();
    let mut y = h * x * Complex64::from(gamma);
    let s = var.sqrt();
    for v in y.iter_mut() {
        *v += complex_normal(rng) * s;
    }
    Ok((y, var))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMethod {
    Perfect,
    #[default]
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsiEstimate {
    pub matrix: CMatrix,
    pub method: CsiMethod,
    pub pilot_noise_variance: f64,
}

/// Orthogonal DFT pilot block, `nt × len`, unit-modulus entries.
pub fn pilot_block(nt: usize, len: usize) -> CMatrix {
    CMatrix::from_fn(nt, len, |j, l| Complex64::from_polar(1.0, -2.0 * PI * (j * l) as f64 / len as f64))
}

/// Channel estimate from an orthogonal pilot block of length `pilot_len`
/// observed with per-entry noise variance `noise_var`.
pub fn estimate_csi<R: Rng + ?Sized>(
    h: &CMatrix,
    method: CsiMethod,
    pilot_len: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<CsiEstimate> {
    match method {
        CsiMethod::Perfect => Ok(CsiEstimate { matrix: h.clone(), method, pilot_noise_variance: 0.0 }),
        CsiMethod::LeastSquares => {
            let nt = h.ncols();
            if pilot_len < nt {
                return Err(Error::InvalidConfig(format!("pilot length {pilot_len} shorter than {nt} antennas")));
            }
            let p = pilot_block(nt, pilot_len);
            let s = noise_var.sqrt();
            let mut y = h * &p;
            if s > 0.0 {
                for v in y.iter_mut() {
                    *v += complex_normal(rng) * s;
                }
            }
            let est = y * p.adjoint() / Complex64::from(pilot_len as f64);
            Ok(CsiEstimate { matrix: est, method, pilot_noise_variance: noise_var / pilot_len as f64 })
        }
    }
}

/// Relative singular-value threshold below which the estimate is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Zero-forcing `x̂ = pinv(Ĥ) y`.
pub fn zf_equalize(y: &CMatrix, csi: &CsiEstimate) -> Result<CMatrix> {
    let h = &csi.matrix;
    if h.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!("estimate has {} rows, signal {}", h.nrows(), y.nrows())));
    }
    let svd = h.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = if h.nrows() >= h.ncols() { svd.singular_values.min() } else { 0.0 };
    if !(max > 0.0) || min <= RANK_TOL * max {
        return Err(Error::RankDeficient { ratio: if max > 0.0 { min / max } else { 0.0 } });
    }
    let pinv = svd.pseudo_inverse(RANK_TOL * max).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pinv * y)
}

pub fn compute_ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.len() != rx.len() {
        return Err(Error::DimensionMismatch(format!("bit streams of length {} and {}", tx.len(), rx.len())));
    }
    if tx.is_empty() {
        return Err(Error::InvalidArgument("empty bit stream".into()));
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkOptions {
    pub csi_method: CsiMethod,
    /// Pilot length; `None` means `2·Nt`.
    pub pilot_length: Option<usize>,
    pub symbols_per_antenna: usize,
}

impl Default for LinkOptions {
    fn default() -> Self {
        LinkOptions { csi_method: CsiMethod::LeastSquares, pilot_length: None, symbols_per_antenna: 500 }
    }
}

impl LinkOptions {
    pub fn validate(&self) -> Result<()> {
        if self.symbols_per_antenna == 0 {
            return Err(Error::InvalidConfig("symbols_per_antenna must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkOutcome {
    /// Mean BER over sub-bands.
    pub ber: f64,
    pub subband_ber: Vec<f64>,
    pub csi: Vec<CsiEstimate>,
    pub rank_deficient: bool,
}

/// Runs the link over every sub-band. `seed` must not depend on the SNR so
/// that SNR sweeps reuse identical bits and unit noise draws.
pub fn run_link(channels: &[SubbandChannel], snr_db: f64, opts: &LinkOptions, seed: u64) -> Result<LinkOutcome> {
    opts.validate()?;
    let mut subband_ber = Vec::with_capacity(channels.len());
    let mut csi = Vec::with_capacity(channels.len());
    let mut rank_deficient = false;
    for (i, ch) in channels.iter().enumerate() {
        let h = &ch.matrix;
        let nt = h.ncols();
        let i = i as u64;
        let mut bit_rng = rng_from_seed(derive_seed(seed, &[stream::BITS, i]));
        let bits: Vec<u8> = (0..2 * nt * opts.symbols_per_antenna).map(|_| bit_rng.random_range(0..2u8)).collect();
        let x = frame_from_symbols(&qpsk_modulate(&bits)?, nt)?;

        let var = noise_variance(h, snr_db)?;
        let pilot_len = opts.pilot_length.unwrap_or(2 * nt);
        let mut pilot_rng = rng_from_seed(derive_seed(seed, &[stream::PILOT_NOISE, i]));
        let est = estimate_csi(h, opts.csi_method, pilot_len, var, &mut pilot_rng)?;

        let mut data_rng = rng_from_seed(derive_seed(seed, &[stream::DATA_NOISE, i]));
        let (y, _) = transmit(h, &x, snr_db, &mut data_rng)?;
        let ber = match zf_equalize(&y, &est) {
            Ok(xhat) => compute_ber(&bits, &qpsk_demodulate(&symbols_from_frame(&xhat)))?,
            Err(Error::RankDeficient { .. }) => {
                rank_deficient = true;
                0.5
            }
            Err(e) => return Err(e),
        };
        subband_ber.push(ber);
        csi.push(est);
    }
    if subband_ber.is_empty() {
        return Err(Error::InvalidArgument("no sub-bands to simulate".into()));
    }
    let ber = subband_ber.iter().sum::<f64>() / subband_ber.len() as f64;
    Ok(LinkOutcome { ber, subband_ber, csi, rank_deficient })
}
