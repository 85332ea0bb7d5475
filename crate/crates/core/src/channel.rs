//! SNR-coupled pathloss, Rayleigh channels and per-transmitter quantized
//! channel estimates.
//!
//! The channel matrix `H` is stored as the map from transmit signals to
//! received signals: `H[(k, i)]` is the coefficient from TX `i` to RX `k`, so
//! row `k` is the channel seen by RX `k`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::allocation::CsitAllocation;
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::topology::InterferenceLevels;

/// Per-link pathloss `sigma_ki^2 = P^(Gamma_ki - 1)` at a fixed linear SNR
/// `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlossModel {
    pub gamma: f64,
    pub snr: f64,
    pub variances: DMatrix<f64>,
    amplitudes: DMatrix<f64>,
}

pub fn pathloss_matrix(levels: &InterferenceLevels, snr: f64) -> Result<PathlossModel> {
    if !(snr >= 1.0 && snr.is_finite()) {
        return Err(invalid(format!("linear SNR must be >= 1, got {snr}")));
    }
    let variances = levels.entries.map(|g| snr.powf(g - 1.0));
    let amplitudes = variances.map(f64::sqrt);
    Ok(PathlossModel {
        gamma: levels.gamma,
        snr,
        variances,
        amplitudes,
    })
}

impl PathlossModel {
    pub fn size(&self) -> usize {
        self.variances.nrows()
    }

    /// `sigma_ki`.
    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.amplitudes
    }

    /// Per-unit-distance attenuation `mu^2 = P^(gamma - 1)`.
    pub fn mu_squared(&self) -> f64 {
        self.snr.powf(self.gamma - 1.0)
    }

    pub fn log2_snr(&self) -> f64 {
        self.snr.log2()
    }
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. [`complex_gaussian`] entries, filled column-major.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// True channel `H = sigma o H_tilde` together with its normalized fading.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub h_tilde: CMatrix,
}

impl ChannelRealization {
    /// Scales normalized fading by the pathloss amplitudes.
    pub fn from_fading(model: &PathlossModel, h_tilde: CMatrix) -> Self {
        assert_eq!(h_tilde.shape(), model.variances.shape(), "fading shape mismatch");
        let h = h_tilde.zip_map(model.amplitudes(), |z, s| z * s);
        ChannelRealization { h, h_tilde }
    }

    pub fn size(&self) -> usize {
        self.h.nrows()
    }

    /// Dumps `k,i,re,im` rows (one-based indices) for diagnostics.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,i,re,im")?;
        for k in 0..self.h.nrows() {
            for i in 0..self.h.ncols() {
                let z = self.h[(k, i)];
                writeln!(out, "{},{},{:e},{:e}", k + 1, i + 1, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

pub fn draw_channel<R: Rng + ?Sized>(model: &PathlossModel, rng: &mut R) -> ChannelRealization {
    let k = model.size();
    ChannelRealization::from_fading(model, complex_gaussian_matrix(k, k, rng))
}

fn check_bits(bits: &DMatrix<f64>, k: usize) -> Result<()> {
    if bits.shape() != (k, k) {
        return Err(invalid(format!("bit matrix is {:?}, expected {k}x{k}", bits.shape())));
    }
    if bits.iter().any(|b| b.is_nan() || *b < 0.0) {
        return Err(invalid("bit counts must be non-negative"));
    }
    Ok(())
}

/// Standard deviation of the estimation error per entry:
/// `sigma_ki * sqrt(2^-B_ki)`. Infinite bits give exactly zero.
pub fn error_scale(model: &PathlossModel, bits: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_bits(bits, model.size())?;
    Ok(model.amplitudes().zip_map(bits, |s, b| s * (-b).exp2().sqrt()))
}

/// `H^(j) = H + sigma o sqrt(2^-B) o error` for a given normalized error draw.
pub fn estimate_with_error(
    chan: &ChannelRealization,
    model: &PathlossModel,
    bits: &DMatrix<f64>,
    error: &CMatrix,
) -> Result<CMatrix> {
    let scale = error_scale(model, bits)?;
    if error.shape() != scale.shape() {
        return Err(invalid("error draw shape mismatch"));
    }
    Ok(apply_error(&chan.h, &scale, error))
}

pub(crate) fn apply_error(h: &CMatrix, scale: &DMatrix<f64>, error: &CMatrix) -> CMatrix {
    CMatrix::from_fn(h.nrows(), h.ncols(), |k, i| {
        let s = scale[(k, i)];
        if s == 0.0 {
            h[(k, i)]
        } else {
            h[(k, i)] + error[(k, i)] * s
        }
    })
}

/// Draws one TX's estimate with fresh independent errors.
pub fn draw_estimate<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    model: &PathlossModel,
    bits: &DMatrix<f64>,
    rng: &mut R,
) -> Result<CMatrix> {
    let k = chan.size();
    check_bits(bits, k)?;
    let error = complex_gaussian_matrix(k, k, rng);
    estimate_with_error(chan, model, bits, &error)
}

/// The `K` per-TX channel estimates `H^(1..K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub estimates: Vec<CMatrix>,
}

impl EstimateSet {
    /// Every TX holds the same matrix.
    pub fn shared(h: &CMatrix) -> Self {
        EstimateSet {
            estimates: vec![h.clone(); h.nrows()],
        }
    }

    /// Independent error draws for every TX according to `alloc`.
    pub fn draw<R: Rng + ?Sized>(
        chan: &ChannelRealization,
        model: &PathlossModel,
        alloc: &CsitAllocation,
        rng: &mut R,
    ) -> Result<Self> {
        if alloc.size() != chan.size() {
            return Err(invalid("allocation and channel sizes differ"));
        }
        let estimates = alloc
            .per_tx()
            .iter()
            .map(|bits| draw_estimate(chan, model, bits, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(EstimateSet { estimates })
    }

    /// Estimates from pre-drawn normalized errors, one matrix per TX.
    pub fn from_errors(
        chan: &ChannelRealization,
        model: &PathlossModel,
        alloc: &CsitAllocation,
        errors: &[CMatrix],
    ) -> Result<Self> {
        if alloc.size() != chan.size() || errors.len() != chan.size() {
            return Err(invalid("allocation, channel and error sizes differ"));
        }
        let estimates = alloc
            .per_tx()
            .iter()
            .zip(errors)
            .map(|(bits, err)| estimate_with_error(chan, model, bits, err))
            .collect::<Result<Vec<_>>>()?;
        Ok(EstimateSet { estimates })
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}
