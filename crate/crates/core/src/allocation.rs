//! CSIT bit allocations and their sizes.
//!
//! An allocation gives every TX `j` a `K x K` matrix `B^(j)`, where
//! `B^(j)[(k, i)]` is the number of feedback bits TX `j` receives about the
//! coefficient from TX `i` to RX `k`. Infinite bits mean perfect knowledge.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::topology::{InterferenceLevels, NodeLayout};

/// Tolerance subtracted before taking a ceiling, so that products such as
/// `0.6 * 20` rounding to `12.000000000000002` still give 12 bits.
pub const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicyTag {
    Perfect,
    Conventional,
    Distance {
        alpha: f64,
    },
    Uniform,
    Cluster {
        size: usize,
    },
    /// No feedback at all; every estimate is as poor as the prior.
    Zero,
}

impl PolicyTag {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyTag::Perfect => "perfect",
            PolicyTag::Conventional => "conventional",
            PolicyTag::Distance { .. } => "distance",
            PolicyTag::Uniform => "uniform",
            PolicyTag::Cluster { .. } => "cluster",
            PolicyTag::Zero => "zero",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            PolicyTag::Distance { alpha } => Some(*alpha),
            _ => None,
        }
    }
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyTag::Distance { alpha } => write!(f, "distance(alpha={alpha})"),
            PolicyTag::Cluster { size } => write!(f, "cluster(C={size})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsitAllocation {
    policy: PolicyTag,
    per_tx: Vec<DMatrix<f64>>,
    log2_snr: f64,
    /// Sum of un-ceiled exponents, i.e. the limit of `total / log2(P)`.
    asymptotic_prelog: f64,
}

/// Size accounting of an allocation at the SNR it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSize {
    pub total_bits: f64,
    pub per_tx_bits: Vec<f64>,
    pub prelog: f64,
    pub prelog_asymptotic: f64,
}

fn check_snr(snr: f64) -> Result<f64> {
    if snr >= 1.0 && snr.is_finite() {
        Ok(snr.log2())
    } else {
        Err(invalid(format!("linear SNR must be >= 1, got {snr}")))
    }
}

fn ceil_bits(x: f64) -> f64 {
    (x - CEIL_SLACK).ceil().max(0.0)
}

impl CsitAllocation {
    /// Wraps explicit per-TX bit matrices.
    pub fn from_matrices(policy: PolicyTag, per_tx: Vec<DMatrix<f64>>, snr: f64) -> Result<Self> {
        let log2_snr = check_snr(snr)?;
        let k = per_tx.len();
        if k == 0 {
            return Err(invalid("allocation needs at least one TX"));
        }
        for (j, b) in per_tx.iter().enumerate() {
            if b.shape() != (k, k) {
                return Err(invalid(format!("B^({}) is {:?}, expected {k}x{k}", j + 1, b.shape())));
            }
            if b.iter().any(|v| v.is_nan() || *v < 0.0) {
                return Err(invalid(format!("B^({}) has negative entries", j + 1)));
            }
        }
        let total = per_tx.iter().map(|b| b.sum()).sum::<f64>();
        let asymptotic_prelog = if log2_snr > 0.0 { total / log2_snr } else { 0.0 };
        Ok(CsitAllocation {
            policy,
            per_tx,
            log2_snr,
            asymptotic_prelog,
        })
    }

    pub fn policy(&self) -> PolicyTag {
        self.policy
    }

    pub fn per_tx(&self) -> &[DMatrix<f64>] {
        &self.per_tx
    }

    pub fn tx(&self, j: usize) -> &DMatrix<f64> {
        &self.per_tx[j]
    }

    pub fn size(&self) -> usize {
        self.per_tx.len()
    }

    pub fn log2_snr(&self) -> f64 {
        self.log2_snr
    }

    pub fn total_bits(&self) -> f64 {
        self.per_tx.iter().map(|b| b.sum()).sum()
    }

    /// Writes `j,k,i,bits` rows with one-based indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,k,i,bits")?;
        for (j, b) in self.per_tx.iter().enumerate() {
            for k in 0..b.nrows() {
                for i in 0..b.ncols() {
                    writeln!(out, "{},{},{},{}", j + 1, k + 1, i + 1, b[(k, i)])?;
                }
            }
        }
        Ok(())
    }
}

pub fn allocation_size(alloc: &CsitAllocation) -> AllocationSize {
    let per_tx_bits: Vec<f64> = alloc.per_tx.iter().map(|b| b.sum()).collect();
    let total_bits = per_tx_bits.iter().sum::<f64>();
    AllocationSize {
        total_bits,
        prelog: if alloc.log2_snr > 0.0 {
            total_bits / alloc.log2_snr
        } else {
            0.0
        },
        prelog_asymptotic: alloc.asymptotic_prelog,
        per_tx_bits,
    }
}

/// Perfect CSIT everywhere (infinite bits).
pub fn perfect(k: usize, snr: f64) -> Result<CsitAllocation> {
    let log2_snr = check_snr(snr)?;
    Ok(CsitAllocation {
        policy: PolicyTag::Perfect,
        per_tx: vec![DMatrix::from_element(k, k, f64::INFINITY); k],
        log2_snr,
        asymptotic_prelog: f64::INFINITY,
    })
}

pub fn zero_bits(k: usize, snr: f64) -> Result<CsitAllocation> {
    CsitAllocation::from_matrices(PolicyTag::Zero, vec![DMatrix::zeros(k, k); k], snr)
}

/// Every TX gets `B_ki = ceil([Gamma_ki]^+ log2 P)`.
pub fn conventional(levels: &InterferenceLevels, snr: f64) -> Result<CsitAllocation> {
    let log2_snr = check_snr(snr)?;
    let k = levels.entries.nrows();
    let exponents = levels.entries.map(|g| g.max(0.0));
    let bits = exponents.map(|e| ceil_bits(e * log2_snr));
    Ok(CsitAllocation {
        policy: PolicyTag::Conventional,
        per_tx: vec![bits; k],
        log2_snr,
        asymptotic_prelog: exponents.sum() * k as f64,
    })
}

/// Clamped exponents `[1 + alpha (gamma - 1)(dist(j,k) + dist(k,i))]^+`,
/// indexed `[j][(k, i)]`.
pub fn distance_exponents(distances: &DMatrix<f64>, gamma: f64, alpha: f64) -> Result<Vec<DMatrix<f64>>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !distances.is_square() {
        return Err(invalid("distance matrix must be square"));
    }
    let k = distances.nrows();
    Ok((0..k)
        .map(|j| {
            DMatrix::from_fn(k, k, |kk, i| {
                (1.0 + alpha * (gamma - 1.0) * (distances[(j, kk)] + distances[(kk, i)])).max(0.0)
            })
        })
        .collect())
}

/// Distance-based allocation:
/// `B^(j)_ki = ceil([1 + alpha (gamma - 1)(dist(j,k) + dist(k,i))]^+ log2 P)`.
pub fn distance_based(distances: &DMatrix<f64>, gamma: f64, snr: f64, alpha: f64) -> Result<CsitAllocation> {
    let log2_snr = check_snr(snr)?;
    let exponents = distance_exponents(distances, gamma, alpha)?;
    let asymptotic_prelog = exponents.iter().map(|e| e.sum()).sum();
    let per_tx = exponents.iter().map(|e| e.map(|x| ceil_bits(x * log2_snr))).collect();
    Ok(CsitAllocation {
        policy: PolicyTag::Distance { alpha },
        per_tx,
        log2_snr,
        asymptotic_prelog,
    })
}

fn check_budget(budget: f64) -> Result<()> {
    if budget >= 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("bit budget must be finite and >= 0, got {budget}")))
    }
}

/// Spreads `budget` bits evenly over all `K^3` entries.
pub fn uniform_matched(budget: f64, k: usize, snr: f64) -> Result<CsitAllocation> {
    check_budget(budget)?;
    if k == 0 {
        return Err(invalid("need at least one TX"));
    }
    let per_entry = budget / (k * k * k) as f64;
    CsitAllocation::from_matrices(PolicyTag::Uniform, vec![DMatrix::from_element(k, k, per_entry); k], snr)
}

/// Spreads `budget` bits evenly over the entries that are positive in
/// `reference` (typically the conventional allocation).
pub fn uniform_matched_on_support(budget: f64, reference: &CsitAllocation) -> Result<CsitAllocation> {
    check_budget(budget)?;
    let support: usize = reference
        .per_tx
        .iter()
        .map(|b| b.iter().filter(|v| **v > 0.0).count())
        .sum();
    if support == 0 {
        return Err(invalid("reference allocation has no positive entries"));
    }
    let per_entry = budget / support as f64;
    let per_tx = reference
        .per_tx
        .iter()
        .map(|b| b.map(|v| if v > 0.0 { per_entry } else { 0.0 }))
        .collect();
    CsitAllocation::from_matrices(PolicyTag::Uniform, per_tx, reference.log2_snr.exp2())
}

/// Partitions the nodes into regular, non-overlapping clusters of
/// `cluster_size` members and returns the cluster id of every node.
///
/// Singleton clusters and a single cluster holding everything work on any
/// layout. Other sizes need an integer grid of side `s` and a square block
/// size `c * c` with `c` dividing `s`.
pub fn cluster_partition(layout: &NodeLayout, cluster_size: usize) -> Result<Vec<usize>> {
    let k = layout.len();
    if cluster_size == 0 {
        return Err(invalid("cluster size must be >= 1"));
    }
    if cluster_size == 1 {
        return Ok((0..k).collect());
    }
    if cluster_size == k {
        return Ok(vec![0; k]);
    }
    let side = layout
        .grid_side()
        .ok_or_else(|| invalid("regular clusters need an integer grid layout"))?;
    let block = (cluster_size as f64).sqrt().round() as usize;
    if block * block != cluster_size || side % block != 0 {
        return Err(invalid(format!(
            "a {side}x{side} grid cannot be split into square clusters of size {cluster_size}"
        )));
    }
    let per_row = side / block;
    Ok((0..k)
        .map(|i| {
            let (x, y) = (i % side, i / side);
            x / block + per_row * (y / block)
        })
        .collect())
}

/// Clustered allocation of total size `budget`: TX `j` receives bits only on
/// the links inside its own cluster, spread evenly.
pub fn clustered_matched(budget: f64, layout: &NodeLayout, cluster_size: usize, snr: f64) -> Result<CsitAllocation> {
    check_budget(budget)?;
    let ids = cluster_partition(layout, cluster_size)?;
    let k = layout.len();
    let per_entry = budget / (k * cluster_size * cluster_size) as f64;
    let per_tx = (0..k)
        .map(|j| {
            DMatrix::from_fn(k, k, |kk, i| {
                if ids[kk] == ids[j] && ids[i] == ids[j] {
                    per_entry
                } else {
                    0.0
                }
            })
        })
        .collect();
    CsitAllocation::from_matrices(PolicyTag::Cluster { size: cluster_size }, per_tx, snr)
}
