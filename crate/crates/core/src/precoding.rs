//! Zero-forcing precoders built from perfect or per-TX channel knowledge.

use num_complex::Complex64;

use crate::channel::EstimateSet;
use crate::error::{invalid, Error, Result};
use crate::linalg::{invert, CMatrix};

/// Solves whose 1-norm condition estimate exceeds this are rejected.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderMode {
    /// All columns from a single matrix (perfect or shared CSIT).
    Perfect,
    /// Row `j` computed by TX `j` from its own estimate.
    Distributed,
    /// A precoder with entries outside the data-sharing sets zeroed.
    Masked,
}

/// Joint precoder `T`; column `i` is the beamformer of stream `i` and row `j`
/// is what TX `j` transmits.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub t: CMatrix,
    pub mode: PrecoderMode,
    /// Condition estimate of every underlying solve.
    pub conditions: Vec<f64>,
}

impl Precoder {
    pub fn size(&self) -> usize {
        self.t.nrows()
    }

    pub fn worst_condition(&self) -> f64 {
        self.conditions.iter().copied().fold(0.0, f64::max)
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("SNR must be positive, got {snr}")))
    }
}

/// Column-normalized inverse: column `i` is `sqrt(P) H^-1 e_i / ||H^-1 e_i||`.
fn normalized_inverse(h_est: &CMatrix, snr: f64, threshold: f64) -> Result<(CMatrix, f64)> {
    if !h_est.is_square() || h_est.nrows() == 0 {
        return Err(invalid("channel estimate must be a non-empty square matrix"));
    }
    let inv = invert(h_est).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        threshold,
    })?;
    if inv.condition.is_nan() || inv.condition > threshold {
        return Err(Error::IllConditioned {
            condition: inv.condition,
            threshold,
        });
    }
    let mut t = inv.matrix;
    let scale = snr.sqrt();
    for mut col in t.column_iter_mut() {
        let norm = col.norm();
        col *= Complex64::from(scale / norm);
    }
    Ok((t, inv.condition))
}

/// ZF precoder from a single channel matrix with the default threshold.
pub fn zf_precoder(h_est: &CMatrix, snr: f64) -> Result<Precoder> {
    zf_precoder_with_threshold(h_est, snr, DEFAULT_CONDITION_THRESHOLD)
}

pub fn zf_precoder_with_threshold(h_est: &CMatrix, snr: f64, threshold: f64) -> Result<Precoder> {
    check_snr(snr)?;
    let (t, condition) = normalized_inverse(h_est, snr, threshold)?;
    Ok(Precoder {
        t,
        mode: PrecoderMode::Perfect,
        conditions: vec![condition],
    })
}

/// Effective precoder when TX `j` uses row `j` of the ZF precoder computed
/// from its own estimate `H^(j)`.
pub fn distributed_precoder(estimates: &EstimateSet, snr: f64, threshold: f64) -> Result<Precoder> {
    check_snr(snr)?;
    let k = estimates.len();
    if k == 0 {
        return Err(invalid("empty estimate set"));
    }
    let mut t = CMatrix::zeros(k, k);
    let mut conditions = Vec::with_capacity(k);
    for (j, h_j) in estimates.estimates.iter().enumerate() {
        if h_j.shape() != (k, k) {
            return Err(invalid(format!("estimate {} is not {k}x{k}", j + 1)));
        }
        let (t_j, condition) = normalized_inverse(h_j, snr, threshold)?;
        t.set_row(j, &t_j.row(j));
        conditions.push(condition);
    }
    Ok(Precoder {
        t,
        mode: PrecoderMode::Distributed,
        conditions,
    })
}

/// Zeroes `T_ji` whenever stream `i` is not shared with TX `j`.
pub fn apply_data_mask(prec: &Precoder, sharing_sets: &[Vec<usize>]) -> Result<Precoder> {
    let k = prec.size();
    if sharing_sets.len() != k {
        return Err(invalid(format!(
            "expected {k} sharing sets, got {}",
            sharing_sets.len()
        )));
    }
    let mut t = CMatrix::zeros(k, k);
    for (j, set) in sharing_sets.iter().enumerate() {
        for &i in set {
            if i >= k {
                return Err(invalid(format!("stream index {i} out of range")));
            }
            t[(j, i)] = prec.t[(j, i)];
        }
    }
    Ok(Precoder {
        t,
        mode: PrecoderMode::Masked,
        conditions: prec.conditions.clone(),
    })
}

/// Transmit power of every TX under unit-power symbols: `sum_i |T_ji|^2`.
pub fn per_tx_power(prec: &Precoder) -> Vec<f64> {
    prec.t
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}
