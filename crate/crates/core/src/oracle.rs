//! Numerical checks of the inverse-expansion machinery behind the
//! distance-based allocation: resolvent identity, Neumann series and its
//! truncation order, decay of inverse entries and the bit-exponent table.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::allocation::{distance_exponents, CEIL_SLACK};
use crate::channel::{complex_gaussian_matrix, pathloss_matrix};
use crate::error::{invalid, Error, Result};
use crate::evaluation::db_to_linear;
use crate::linalg::{frobenius_sq, invert, max_abs, spectral_radius, CMatrix};
use crate::rng::{substream, Purpose};
use crate::stats::{loglog_slope, median};
use crate::topology::{interference_levels, NodeLayout, Point};

/// Slack added to every log-log slope bound.
pub const SLOPE_TOLERANCE: f64 = 0.2;

/// Max entrywise `|A^-1 - B^-1 - B^-1 (B - A) A^-1|`.
pub fn resolvent_check(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(invalid("resolvent check needs two square matrices of equal size"));
    }
    let a_inv = invert(a).ok_or(Error::Singular)?.matrix;
    let b_inv = invert(b).ok_or(Error::Singular)?.matrix;
    let rhs = &b_inv * (b - a) * &a_inv;
    Ok(max_abs(&(a_inv - b_inv - rhs)))
}

fn diag_inverse(h: &CMatrix) -> Result<CMatrix> {
    let k = h.nrows();
    let mut d = CMatrix::zeros(k, k);
    for i in 0..k {
        if h[(i, i)] == Complex64::new(0.0, 0.0) {
            return Err(Error::Singular);
        }
        d[(i, i)] = h[(i, i)].inv();
    }
    Ok(d)
}

/// `D^-1 (D - H)` with `D = diag(H)`; its diagonal is zero.
pub fn iteration_matrix(h: &CMatrix) -> Result<CMatrix> {
    let d_inv = diag_inverse(h)?;
    let mut off = -h.clone();
    off.fill_diagonal(Complex64::new(0.0, 0.0));
    Ok(d_inv * off)
}

/// The matrix of all order-`n` terms, `(D^-1 (D - H))^n D^-1`.
pub fn neumann_term_matrix(h: &CMatrix, n: usize) -> Result<CMatrix> {
    let m = iteration_matrix(h)?;
    let mut acc = diag_inverse(h)?;
    for _ in 0..n {
        acc = &m * acc;
    }
    Ok(acc)
}

/// A single term `C^ji_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannTerm {
    pub j: usize,
    pub i: usize,
    pub n: usize,
    pub value: Complex64,
}

pub fn neumann_term(h: &CMatrix, j: usize, i: usize, n: usize) -> Result<NeumannTerm> {
    if j >= h.nrows() || i >= h.nrows() {
        return Err(invalid("term index out of range"));
    }
    Ok(NeumannTerm {
        j,
        i,
        n,
        value: neumann_term_matrix(h, n)?[(j, i)],
    })
}

/// Truncation order of the series for a layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationOrder {
    /// `1 + (gamma - 1) * min distance`.
    pub gamma_min: f64,
    /// `ceil(1 / (1 - gamma_min))`.
    pub n0: usize,
}

impl TruncationOrder {
    pub fn new(gamma_min: f64) -> Result<Self> {
        if !(gamma_min > 0.0 && gamma_min < 1.0) {
            return Err(invalid(format!("gamma_min must lie in (0, 1), got {gamma_min}")));
        }
        let n0 = ((1.0 / (1.0 - gamma_min)) - CEIL_SLACK).ceil().max(1.0) as usize;
        Ok(TruncationOrder { gamma_min, n0 })
    }

    pub fn for_layout(layout: &NodeLayout, gamma: f64) -> Result<Self> {
        Self::new(1.0 + (gamma - 1.0) * min_distance(layout)?)
    }
}

fn min_distance(layout: &NodeLayout) -> Result<f64> {
    let d = layout.distances();
    let k = d.nrows();
    let mut best = f64::INFINITY;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                best = best.min(d[(a, b)]);
            }
        }
    }
    if best.is_finite() && best > 0.0 {
        Ok(best)
    } else {
        Err(invalid("layout needs at least two distinct nodes"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSum {
    pub inverse: CMatrix,
    /// Frobenius distance to the direct inverse.
    pub residual: f64,
    /// Spectral radius of `I - D^-1 H`.
    pub radius: f64,
}

/// `sum_{n=0}^{n_max} (D^-1 (D - H))^n D^-1`, compared against a direct solve.
pub fn neumann_partial_sum(h: &CMatrix, n_max: usize) -> Result<NeumannSum> {
    let (sums, radius) = partial_sums(h, n_max)?;
    let direct = invert(h).ok_or(Error::Singular)?.matrix;
    let inverse = sums.into_iter().last().expect("at least one partial sum");
    let residual = frobenius_sq(&(&inverse - &direct)).sqrt();
    Ok(NeumannSum {
        inverse,
        residual,
        radius,
    })
}

/// Frobenius residual of every partial sum `0..=n_max`.
pub fn neumann_residuals(h: &CMatrix, n_max: usize) -> Result<Vec<f64>> {
    let (sums, _) = partial_sums(h, n_max)?;
    let direct = invert(h).ok_or(Error::Singular)?.matrix;
    Ok(sums.iter().map(|s| frobenius_sq(&(s - &direct)).sqrt()).collect())
}

fn partial_sums(h: &CMatrix, n_max: usize) -> Result<(Vec<CMatrix>, f64)> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(invalid("channel must be a non-empty square matrix"));
    }
    let m = iteration_matrix(h)?;
    let radius = spectral_radius(&m);
    if radius.is_nan() || radius >= 1.0 {
        return Err(Error::DivergentSeries(radius));
    }
    let mut term = diag_inverse(h)?;
    let mut sum = term.clone();
    let mut sums = vec![sum.clone()];
    for _ in 0..n_max {
        term = &m * term;
        sum += &term;
        sums.push(sum.clone());
    }
    Ok((sums, radius))
}

/// Fitted decay of one `(j, i)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSlope {
    pub j: usize,
    pub i: usize,
    pub distance: f64,
    /// `None` when the entry is identically zero.
    pub slope: Option<f64>,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub pairs: Vec<PairSlope>,
}

impl DecayReport {
    pub fn pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn pair(&self, j: usize, i: usize) -> Option<&PairSlope> {
        self.pairs.iter().find(|p| p.j == j && p.i == i)
    }

    /// Largest `slope - bound` over non-zero entries.
    pub fn worst_margin(&self) -> f64 {
        self.pairs
            .iter()
            .filter_map(|p| p.slope.map(|s| s - p.bound))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-entry medians of `f(H)` over `trials` coupled channel draws at every
/// SNR point, indexed `[snr][(j, i)]`.
fn entry_medians(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
    f: impl Fn(&CMatrix) -> Option<DMatrix<f64>> + Sync,
) -> Result<Vec<DMatrix<f64>>> {
    if trials == 0 || snr_db.len() < 2 {
        return Err(invalid("need trials >= 1 and at least two SNR points"));
    }
    let levels = interference_levels(&layout.distances(), gamma)?;
    let k = layout.len();
    let models = snr_db
        .iter()
        .map(|&db| pathloss_matrix(&levels, db_to_linear(db)))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<Vec<Option<DMatrix<f64>>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h_tilde = complex_gaussian_matrix(k, k, &mut substream(seed, Purpose::Oracle, t as u64, 0));
            models
                .iter()
                .map(|m| f(&h_tilde.zip_map(m.amplitudes(), |z, s| z * s)))
                .collect()
        })
        .collect();
    (0..snr_db.len())
        .map(|s| {
            let kept: Vec<&DMatrix<f64>> = samples.iter().filter_map(|t| t[s].as_ref()).collect();
            if kept.is_empty() {
                return Err(Error::Singular);
            }
            Ok(DMatrix::from_fn(k, k, |j, i| {
                median(&kept.iter().map(|m| m[(j, i)]).collect::<Vec<_>>())
            }))
        })
        .collect()
}

fn fit_pairs(
    layout: &NodeLayout,
    snr_db: &[f64],
    medians: &[DMatrix<f64>],
    bound: impl Fn(usize, usize, f64) -> f64,
) -> DecayReport {
    let d = layout.distances();
    let snr: Vec<f64> = snr_db.iter().map(|&db| db_to_linear(db)).collect();
    let k = layout.len();
    let mut pairs = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k {
            let series: Vec<f64> = medians.iter().map(|m| m[(j, i)]).collect();
            let b = bound(j, i, d[(j, i)]);
            let (slope, pass) = if series.iter().all(|&v| v == 0.0) {
                (None, true)
            } else {
                match loglog_slope(&snr, &series) {
                    Some(fit) => (Some(fit.slope), fit.slope <= b),
                    None => (None, false),
                }
            };
            pairs.push(PairSlope {
                j,
                i,
                distance: d[(j, i)],
                slope,
                bound: b,
                pass,
            });
        }
    }
    DecayReport { pairs }
}

/// Log-log slope of median `|C^ji_n|^2` against `P`; each entry passes when
/// its slope is at most `(gamma_min - 1) n + 0.2`.
pub fn term_decay_check(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: &[f64],
    trials: usize,
    n: usize,
    seed: u64,
) -> Result<DecayReport> {
    if n == 0 {
        return Err(invalid("term order must be >= 1"));
    }
    let order = TruncationOrder::for_layout(layout, gamma)?;
    let medians = entry_medians(layout, gamma, snr_db, trials, seed, |h| {
        neumann_term_matrix(h, n).ok().map(|c| c.map(|z| z.norm_sqr()))
    })?;
    let bound = (order.gamma_min - 1.0) * n as f64 + SLOPE_TOLERANCE;
    Ok(fit_pairs(layout, snr_db, &medians, |_, _, _| bound))
}

/// Log-log slope of median `|e_j^H H^-1 e_i|^2` against `P`; each entry passes
/// when its slope is at most `(gamma - 1) dist(i,j) + 0.2`.
pub fn inverse_decay_estimate(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<DecayReport> {
    if gamma.is_nan() || gamma >= 1.0 {
        return Err(invalid("inverse decay needs gamma < 1"));
    }
    let medians = entry_medians(layout, gamma, snr_db, trials, seed, |h| {
        invert(h).map(|inv| inv.matrix.map(|z| z.norm_sqr()))
    })?;
    Ok(fit_pairs(layout, snr_db, &medians, |_, _, dist| {
        (gamma - 1.0) * dist + SLOPE_TOLERANCE
    }))
}

/// Bit exponents the expansion argument requires, built case by case and
/// indexed `[j][(k, i)]`.
pub fn proof_exponent_table(distances: &DMatrix<f64>, gamma: f64) -> Result<Vec<DMatrix<f64>>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let k = distances.nrows();
    let pos = |x: f64| x.max(0.0);
    Ok((0..k)
        .map(|j| {
            DMatrix::from_fn(k, k, |kk, i| {
                if kk == j && i == j {
                    1.0
                } else if kk == i || kk == j {
                    pos(1.0 + (gamma - 1.0) * distances[(i, j)])
                } else {
                    pos(1.0 + (gamma - 1.0) * (distances[(j, kk)] + distances[(kk, i)]))
                }
            })
        })
        .collect())
}

/// Largest entrywise gap between the case-built table and the closed-form
/// distance exponents at `alpha = 1`.
pub fn exponent_table_gap(distances: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    let table = proof_exponent_table(distances, gamma)?;
    let closed = distance_exponents(distances, gamma, 1.0)?;
    Ok(table
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs().max())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureReport {
    pub paths: usize,
    pub violations: usize,
    /// Smallest `path length - allocated two-hop length` seen.
    pub min_margin: f64,
}

/// Samples walks `j, k_1, ..., k_{n-1}, i` with `3 <= n <= max_len` and checks
/// that, for every hop `(a, b)`, the walk length is at least the two-hop sum
/// `dist(j, a) + dist(a, b)` the allocation charges for entry `(a, b)` at TX
/// `j`, and at least `dist(j, i)`.
pub fn path_closure_check(layout: &NodeLayout, samples: usize, max_len: usize, seed: u64) -> Result<ClosureReport> {
    let k = layout.len();
    if k < 2 || max_len < 3 {
        return Err(invalid("need at least two nodes and max_len >= 3"));
    }
    let d = layout.distances();
    let mut rng = substream(seed, Purpose::Diagnostic, 0, 0);
    let mut report = ClosureReport {
        paths: samples,
        violations: 0,
        min_margin: f64::INFINITY,
    };
    for _ in 0..samples {
        let n = rng.random_range(3..=max_len);
        let mut walk = vec![rng.random_range(0..k)];
        for _ in 0..n {
            let last = *walk.last().unwrap();
            let mut next = rng.random_range(0..k - 1);
            if next >= last {
                next += 1;
            }
            walk.push(next);
        }
        let j = walk[0];
        let total: f64 = walk.windows(2).map(|w| d[(w[0], w[1])]).sum();
        let mut required = d[(j, *walk.last().unwrap())];
        for w in walk.windows(2) {
            required = required.max(d[(j, w[0])] + d[(w[0], w[1])]);
        }
        let margin = total - required;
        report.min_margin = report.min_margin.min(margin);
        if margin < -1e-12 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Result of truncating the series after `n0` terms at a single SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationTail {
    pub order: TruncationOrder,
    pub snr_db: f64,
    /// Median squared Frobenius residual over convergent instances.
    pub median_residual_sq: f64,
    /// `P^((gamma_min - 1)(n0 + 1))`.
    pub bound: f64,
    pub ratio: f64,
    pub convergent: usize,
    pub divergent: usize,
}

impl TruncationTail {
    /// Residual within a factor 10 of the tail bound.
    pub fn pass(&self) -> bool {
        self.ratio <= 10.0
    }
}

fn truncation_residuals(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: f64,
    trials: usize,
    seed: u64,
    n0: usize,
) -> Result<(Vec<f64>, usize)> {
    let levels = interference_levels(&layout.distances(), gamma)?;
    let model = pathloss_matrix(&levels, db_to_linear(snr_db))?;
    let k = layout.len();
    let out: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h_tilde = complex_gaussian_matrix(k, k, &mut substream(seed, Purpose::Oracle, t as u64, 0));
            let h = h_tilde.zip_map(model.amplitudes(), |z, s| z * s);
            neumann_partial_sum(&h, n0).ok().map(|s| s.residual * s.residual)
        })
        .collect();
    let divergent = out.iter().filter(|r| r.is_none()).count();
    Ok((out.into_iter().flatten().collect(), divergent))
}

pub fn truncation_tail_check(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<TruncationTail> {
    let order = TruncationOrder::for_layout(layout, gamma)?;
    let (residuals, divergent) = truncation_residuals(layout, gamma, snr_db, trials, seed, order.n0)?;
    if residuals.is_empty() {
        return Err(Error::DivergentSeries(f64::NAN));
    }
    let med = median(&residuals);
    let bound = db_to_linear(snr_db).powf((order.gamma_min - 1.0) * (order.n0 as f64 + 1.0));
    Ok(TruncationTail {
        order,
        snr_db,
        median_residual_sq: med,
        bound,
        ratio: med / bound,
        convergent: residuals.len(),
        divergent,
    })
}

/// Log-log slope of the median squared truncation residual against `P`, to
/// compare with the exponent `(gamma_min - 1)(n0 + 1)`.
pub fn truncation_exponent(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let order = TruncationOrder::for_layout(layout, gamma)?;
    let mut medians = Vec::with_capacity(snr_db.len());
    for &db in snr_db {
        let (r, _) = truncation_residuals(layout, gamma, db, trials, seed, order.n0)?;
        medians.push(median(&r));
    }
    let snr: Vec<f64> = snr_db.iter().map(|&db| db_to_linear(db)).collect();
    let fit = loglog_slope(&snr, &medians).ok_or_else(|| invalid("degenerate truncation residuals"))?;
    Ok((fit.slope, (order.gamma_min - 1.0) * (order.n0 as f64 + 1.0)))
}

/// One row of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// How `measured` is compared with `bound`, e.g. `<=`.
    pub relation: &'static str,
    pub pass: bool,
}

impl CheckRow {
    fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        CheckRow {
            name: name.into(),
            measured,
            bound,
            relation: "<=",
            pass: measured <= bound,
        }
    }

    fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        CheckRow {
            name: name.into(),
            measured,
            bound,
            relation: "<",
            pass: measured < bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Channel draws per SNR point for slope checks.
    pub trials: usize,
    /// Random matrix pairs for the resolvent identity.
    pub resolvent_pairs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            trials: 500,
            resolvent_pairs: 1000,
        }
    }
}

/// Well-conditioned random `k x k` matrix: Gaussian entries plus a diagonal shift.
pub fn well_conditioned<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMatrix {
    let mut a = complex_gaussian_matrix(k, k, rng);
    for i in 0..k {
        a[(i, i)] += Complex64::new(2.0 * (k as f64).sqrt(), 0.0);
    }
    a
}

pub fn line_layout(k: usize, spacing: f64) -> Result<NodeLayout> {
    NodeLayout::new((0..k).map(|i| Point::new(i as f64 * spacing, 0.0)).collect())
}

pub fn max_resolvent_error(pairs: usize, k: usize, seed: u64) -> Result<f64> {
    let errs = (0..pairs)
        .into_par_iter()
        .map(|p| {
            let mut rng = substream(seed, Purpose::Diagnostic, p as u64, 1);
            let a = well_conditioned(k, &mut rng);
            let b = well_conditioned(k, &mut rng);
            resolvent_check(&a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Runs every check with fixed scenarios and returns the table.
pub fn verification_suite(opts: VerifyOptions) -> Result<Vec<CheckRow>> {
    let slope_db = [40.0, 50.0, 60.0, 70.0, 80.0];
    let mut rows = Vec::new();

    rows.push(CheckRow::below(
        "resolvent_identity_max_error",
        max_resolvent_error(opts.resolvent_pairs, 8, opts.seed)?,
        1e-10,
    ));

    let triple = line_layout(3, 1.0)?;
    for n in [1, 2] {
        let r = term_decay_check(&triple, 0.6, &slope_db, opts.trials, n, opts.seed)?;
        let worst = r.pairs.iter().filter_map(|p| p.slope).fold(f64::NEG_INFINITY, f64::max);
        rows.push(CheckRow::at_most(
            format!("term_decay_n{n}_max_slope"),
            worst,
            r.pairs[0].bound,
        ));
    }
    {
        let h = complex_gaussian_matrix(3, 3, &mut substream(opts.seed, Purpose::Diagnostic, 0, 2));
        let c1 = neumann_term_matrix(&h, 1)?;
        let diag = (0..3).map(|j| c1[(j, j)].norm()).fold(0.0, f64::max);
        rows.push(CheckRow::at_most("term_n1_diagonal_abs", diag, 0.0));
    }

    let grid = NodeLayout::grid(3)?;
    let tail = truncation_tail_check(&grid, 0.5, 60.0, opts.trials, opts.seed)?;
    rows.push(CheckRow::at_most("truncation_tail_ratio", tail.ratio, 10.0));
    let (exp_slope, exp_bound) = truncation_exponent(&grid, 0.5, &[60.0, 80.0, 100.0, 120.0], opts.trials, opts.seed)?;
    rows.push(CheckRow::at_most(
        "truncation_residual_slope",
        exp_slope,
        exp_bound + SLOPE_TOLERANCE,
    ));

    let (mono, total) = monotone_fraction(&grid, 0.5, 60.0, opts.trials, opts.seed, 6)?;
    rows.push(CheckRow::at_most(
        "neumann_nonmonotone_fraction",
        (total - mono) as f64 / total.max(1) as f64,
        0.0,
    ));

    let line = line_layout(4, 1.0)?;
    let inv = inverse_decay_estimate(&line, 0.6, &slope_db, opts.trials, opts.seed)?;
    for dist in [1usize, 2, 3] {
        let worst = inv
            .pairs
            .iter()
            .filter(|p| (p.distance - dist as f64).abs() < 1e-9)
            .filter_map(|p| p.slope.map(|s| s - p.bound))
            .fold(f64::NEG_INFINITY, f64::max);
        rows.push(CheckRow::at_most(
            format!("inverse_decay_dist{dist}_margin"),
            worst,
            0.0,
        ));
    }

    let random = NodeLayout::uniform_random(10, 4.0, &mut substream(opts.seed, Purpose::Layout, 0, 0))?;
    rows.push(CheckRow::at_most(
        "exponent_table_gap",
        exponent_table_gap(&random.distances(), 0.6)?,
        1e-12,
    ));

    let closure = path_closure_check(&NodeLayout::grid(4)?, 10_000, 6, opts.seed)?;
    rows.push(CheckRow::at_most(
        "path_closure_violations",
        closure.violations as f64,
        0.0,
    ));

    Ok(rows)
}

/// Counts convergent instances whose residual sequence never increases.
/// Returns `(monotone, convergent)`.
pub fn monotone_fraction(
    layout: &NodeLayout,
    gamma: f64,
    snr_db: f64,
    trials: usize,
    seed: u64,
    n_max: usize,
) -> Result<(usize, usize)> {
    let levels = interference_levels(&layout.distances(), gamma)?;
    let model = pathloss_matrix(&levels, db_to_linear(snr_db))?;
    let k = layout.len();
    let flags: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h_tilde = complex_gaussian_matrix(k, k, &mut substream(seed, Purpose::Oracle, t as u64, 0));
            let h = h_tilde.zip_map(model.amplitudes(), |z, s| z * s);
            let m = iteration_matrix(&h).ok()?;
            // Contractive instances only: ||M||_2 < 1 makes the residual shrink.
            if m.clone().svd(false, false).singular_values.max() >= 1.0 {
                return None;
            }
            let r = neumann_residuals(&h, n_max).ok()?;
            Some(r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15))
        })
        .collect();
    let convergent = flags.iter().filter(|f| f.is_some()).count();
    let monotone = flags.iter().filter(|f| **f == Some(true)).count();
    Ok((monotone, convergent))
}

pub fn checks_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check,measured,relation,bound,verdict\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6e},{},{:.6e},{}",
            r.name,
            r.measured,
            r.relation,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn checks_to_text(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:>13}    {:>13}  verdict\n", "check", "measured", "bound");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>13.4e} {:<2} {:>13.4e}  {}",
            r.name,
            r.measured,
            r.relation,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}
