//! Monte-Carlo ergodic rates, DoF slopes and precoder-deviation statistics.
//!
//! All policies are evaluated on coupled samples: for a given trial index
//! every policy and every SNR point sees the same normalized fading `H~` and
//! the same normalized error draws `dH~^(j)`, only scaled differently. A
//! trial whose channel or any estimate is ill-conditioned at some SNR point
//! is redrawn for that point and counted as a rejection.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{
    self, clustered_matched, conventional, distance_based, uniform_matched, uniform_matched_on_support, CsitAllocation,
    PolicyTag,
};
use crate::channel::{
    apply_error, complex_gaussian_matrix, error_scale, pathloss_matrix, ChannelRealization, PathlossModel,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::precoding::{
    apply_data_mask, zf_precoder_with_threshold, Precoder, PrecoderMode, DEFAULT_CONDITION_THRESHOLD,
};
use crate::rng::{substream, Purpose};
use crate::stats::{fit_line, loglog_slope, mean, median, std_error};
use crate::topology::{data_sharing_sets, interference_levels, NodeLayout};

/// Default maximum fraction of rejected draws per SNR point.
pub const DEFAULT_MAX_REJECTION_RATE: f64 = 0.01;

const MAX_ATTEMPTS: u8 = u8::MAX;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-user instantaneous rate terms for one channel/precoder pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub rates: Vec<f64>,
    /// `|h_i^H t_i|^2`.
    pub signal: Vec<f64>,
    /// `sum_{l != i} |h_i^H t_l|^2`.
    pub interference: Vec<f64>,
}

/// `rate_i = log2(1 + |h_i^H t_i|^2 / (1 + sum_{l != i} |h_i^H t_l|^2))`,
/// where `h_i^H` is row `i` of `h`.
pub fn instantaneous_rates(h: &CMatrix, t: &CMatrix) -> RateSample {
    assert_eq!(h.ncols(), t.nrows(), "channel/precoder dimension mismatch");
    assert_eq!(h.nrows(), t.ncols(), "channel/precoder dimension mismatch");
    let g = h * t;
    let k = g.nrows();
    let mut sample = RateSample {
        rates: Vec::with_capacity(k),
        signal: Vec::with_capacity(k),
        interference: Vec::with_capacity(k),
    };
    for i in 0..k {
        let s = g[(i, i)].norm_sqr();
        let total: f64 = g.row(i).iter().map(|z| z.norm_sqr()).sum();
        let interference = (total - s).max(0.0);
        sample.rates.push((1.0 + s / (1.0 + interference)).log2());
        sample.signal.push(s);
        sample.interference.push(interference);
    }
    sample
}

/// Per-user rate loss against perfect CSIT and the upper bound obtained by
/// splitting the loss into residual interference and signal-power terms:
/// `log2(1 + sum_{l != i} |h_i^H (t_l - t*_l)|^2) + log2(1 + |h_i^H t*_i|^2) - log2(1 + |h_i^H t_i|^2)`.
pub fn rate_gap_bound(h: &CMatrix, t: &CMatrix, t_star: &CMatrix) -> Vec<(f64, f64)> {
    let perfect = instantaneous_rates(h, t_star);
    let policy = instantaneous_rates(h, t);
    let diff = h * (t - t_star);
    (0..h.nrows())
        .map(|i| {
            let residual: f64 = (0..h.nrows())
                .filter(|&l| l != i)
                .map(|l| diff[(i, l)].norm_sqr())
                .sum();
            let gap = perfect.rates[i] - policy.rates[i];
            let bound = (1.0 + residual).log2() + (1.0 + perfect.signal[i]).log2() - (1.0 + policy.signal[i]).log2();
            (gap, bound)
        })
        .collect()
}

/// How the uniform baseline spreads its budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformSpread {
    /// Over all `K^3` entries.
    #[default]
    All,
    /// Over the entries that are positive in the conventional allocation.
    ConventionalSupport,
}

/// A network together with the evaluation knobs that do not vary per policy.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub layout: NodeLayout,
    pub gamma: f64,
    pub condition_threshold: f64,
    pub max_rejection_rate: f64,
    pub uniform_spread: UniformSpread,
    distances: DMatrix<f64>,
    sharing_sets: Option<Vec<Vec<usize>>>,
}

impl Scenario {
    pub fn new(layout: NodeLayout, gamma: f64) -> Result<Self> {
        let distances = layout.distances();
        interference_levels(&distances, gamma)?;
        Ok(Scenario {
            layout,
            gamma,
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            max_rejection_rate: DEFAULT_MAX_REJECTION_RATE,
            uniform_spread: UniformSpread::All,
            distances,
            sharing_sets: None,
        })
    }

    /// Restricts every precoder to the data-sharing neighborhoods.
    pub fn with_data_mask(mut self, on: bool) -> Result<Self> {
        self.sharing_sets = if on {
            Some(data_sharing_sets(&self.layout, self.gamma)?)
        } else {
            None
        };
        Ok(self)
    }

    pub fn with_condition_threshold(mut self, threshold: f64) -> Self {
        self.condition_threshold = threshold;
        self
    }

    pub fn with_max_rejection_rate(mut self, rate: f64) -> Self {
        self.max_rejection_rate = rate;
        self
    }

    pub fn with_uniform_spread(mut self, spread: UniformSpread) -> Self {
        self.uniform_spread = spread;
        self
    }

    pub fn size(&self) -> usize {
        self.layout.len()
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.distances
    }

    pub fn data_mask(&self) -> bool {
        self.sharing_sets.is_some()
    }

    pub fn pathloss(&self, snr: f64) -> Result<PathlossModel> {
        pathloss_matrix(&interference_levels(&self.distances, self.gamma)?, snr)
    }

    /// First-attempt channel of trial `trial`, as drawn by `simulate`.
    pub fn trial_channel(&self, snr: f64, seed: u64, trial: usize) -> Result<ChannelRealization> {
        let model = self.pathloss(snr)?;
        Ok(ChannelRealization::from_fading(
            &model,
            draw(seed, trial, 0, self.size()).h_tilde,
        ))
    }

    /// Builds the allocation of `policy` at linear SNR `snr`. Size-matched
    /// policies take the finite-SNR total of the distance-based policy
    /// (`alpha = 1`) as their budget.
    pub fn allocation(&self, policy: PolicyTag, snr: f64) -> Result<CsitAllocation> {
        let k = self.size();
        match policy {
            PolicyTag::Perfect => allocation::perfect(k, snr),
            PolicyTag::Zero => allocation::zero_bits(k, snr),
            PolicyTag::Conventional => conventional(&interference_levels(&self.distances, self.gamma)?, snr),
            PolicyTag::Distance { alpha } => distance_based(&self.distances, self.gamma, snr, alpha),
            PolicyTag::Uniform => {
                let budget = self.distance_budget(snr)?;
                match self.uniform_spread {
                    UniformSpread::All => uniform_matched(budget, k, snr),
                    UniformSpread::ConventionalSupport => uniform_matched_on_support(
                        budget,
                        &conventional(&interference_levels(&self.distances, self.gamma)?, snr)?,
                    ),
                }
            }
            PolicyTag::Cluster { size } => clustered_matched(self.distance_budget(snr)?, &self.layout, size, snr),
        }
    }

    fn distance_budget(&self, snr: f64) -> Result<f64> {
        Ok(distance_based(&self.distances, self.gamma, snr, 1.0)?.total_bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// One SNR point of a rate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub snr_db: f64,
    pub mean_rate: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean over trials of the per-trial user-average rate.
    pub avg_rate: f64,
    pub avg_stderr: f64,
    pub trials: usize,
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub policy: PolicyTag,
    pub points: Vec<RatePoint>,
}

/// Statistics of `||T - T*||_F^2` over accepted trials.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationStats {
    pub snr_db: f64,
    pub mean: f64,
    pub median: f64,
    /// Median of `||e_j^H (T - T*)||^2` for every row `j`.
    pub row_medians: Vec<f64>,
    pub row_means: Vec<f64>,
    pub trials: usize,
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCurve {
    pub policy: PolicyTag,
    pub points: Vec<DeviationStats>,
}

impl DeviationCurve {
    /// Log-log slope of the median deviation against `P`.
    pub fn median_slope(&self) -> Option<f64> {
        let snr: Vec<f64> = self.points.iter().map(|p| db_to_linear(p.snr_db)).collect();
        let med: Vec<f64> = self.points.iter().map(|p| p.median).collect();
        loglog_slope(&snr, &med).map(|f| f.slope)
    }

    /// Log-log slope of every per-row median deviation against `P`.
    pub fn row_slopes(&self) -> Vec<Option<f64>> {
        let snr: Vec<f64> = self.points.iter().map(|p| db_to_linear(p.snr_db)).collect();
        let rows = self.points.first().map_or(0, |p| p.row_medians.len());
        (0..rows)
            .map(|j| {
                let med: Vec<f64> = self.points.iter().map(|p| p.row_medians[j]).collect();
                loglog_slope(&snr, &med).map(|f| f.slope)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub rates: Vec<RateCurve>,
    pub deviations: Vec<DeviationCurve>,
}

struct PolicyPlan {
    perfect: bool,
    /// Error standard deviation per TX; empty for perfect CSIT.
    scales: Vec<DMatrix<f64>>,
}

struct PointPlan {
    snr: f64,
    model: PathlossModel,
    policies: Vec<PolicyPlan>,
}

struct Draw {
    h_tilde: CMatrix,
    errors: Vec<CMatrix>,
}

struct TrialPoint {
    /// `[policy][user]`.
    rates: Vec<Vec<f64>>,
    /// `[policy][row]`.
    deviation_rows: Vec<Vec<f64>>,
    rejections: usize,
    worst_rejected: f64,
}

fn draw(seed: u64, trial: usize, attempt: u8, k: usize) -> Draw {
    let mut rng = substream(seed, Purpose::Trial, trial as u64, attempt);
    let h_tilde = complex_gaussian_matrix(k, k, &mut rng);
    let errors = (0..k).map(|_| complex_gaussian_matrix(k, k, &mut rng)).collect();
    Draw { h_tilde, errors }
}

/// Per-policy user rates and per-row squared deviations.
type PointOutcome = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn evaluate_point(scenario: &Scenario, plan: &PointPlan, d: &Draw) -> Result<PointOutcome> {
    let k = scenario.size();
    let threshold = scenario.condition_threshold;
    let h = d.h_tilde.zip_map(plan.model.amplitudes(), |z, s| z * s);
    let t_star = zf_precoder_with_threshold(&h, plan.snr, threshold)?;
    let mut rates = Vec::with_capacity(plan.policies.len());
    let mut deviations = Vec::with_capacity(plan.policies.len());
    for policy in &plan.policies {
        let mut prec = if policy.perfect {
            t_star.clone()
        } else {
            let mut t = CMatrix::zeros(k, k);
            let mut conditions = Vec::with_capacity(k);
            for j in 0..k {
                let h_j = apply_error(&h, &policy.scales[j], &d.errors[j]);
                let p_j = zf_precoder_with_threshold(&h_j, plan.snr, threshold)?;
                t.set_row(j, &p_j.t.row(j));
                conditions.push(p_j.conditions[0]);
            }
            Precoder {
                t,
                mode: PrecoderMode::Distributed,
                conditions,
            }
        };
        if let Some(sets) = &scenario.sharing_sets {
            prec = apply_data_mask(&prec, sets)?;
        }
        rates.push(instantaneous_rates(&h, &prec.t).rates);
        let diff = &prec.t - &t_star.t;
        deviations.push(diff.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect());
    }
    Ok((rates, deviations))
}

fn run_trial(scenario: &Scenario, plans: &[PointPlan], seed: u64, trial: usize) -> Result<Vec<TrialPoint>> {
    let k = scenario.size();
    let mut draws: Vec<Draw> = Vec::new();
    let mut out = Vec::with_capacity(plans.len());
    for plan in plans {
        let mut rejections = 0;
        let mut worst_rejected: f64 = 0.0;
        let mut attempt: u8 = 0;
        loop {
            if draws.len() <= attempt as usize {
                draws.push(draw(seed, trial, attempt, k));
            }
            match evaluate_point(scenario, plan, &draws[attempt as usize]) {
                Ok((rates, deviation_rows)) => {
                    out.push(TrialPoint {
                        rates,
                        deviation_rows,
                        rejections,
                        worst_rejected,
                    });
                    break;
                }
                Err(Error::IllConditioned { condition, .. }) => {
                    rejections += 1;
                    worst_rejected = worst_rejected.max(condition);
                    if attempt == MAX_ATTEMPTS - 1 {
                        return Err(Error::RejectionRateExceeded {
                            snr_db: 10.0 * plan.snr.log10(),
                            rejected: rejections,
                            accepted: 0,
                            limit: scenario.max_rejection_rate,
                            worst_condition: worst_rejected,
                        });
                    }
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the coupled Monte-Carlo for every policy at every SNR point (dB).
pub fn simulate(
    scenario: &Scenario,
    policies: &[PolicyTag],
    snr_db: &[f64],
    opts: SimulationOptions,
) -> Result<Simulation> {
    if opts.trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    if policies.is_empty() || snr_db.is_empty() {
        return Err(invalid("need at least one policy and one SNR point"));
    }
    let plans = snr_db
        .iter()
        .map(|&db| {
            let snr = db_to_linear(db);
            let model = scenario.pathloss(snr)?;
            let policies = policies
                .iter()
                .map(|&p| {
                    let alloc = scenario.allocation(p, snr)?;
                    let perfect = p == PolicyTag::Perfect;
                    let scales = if perfect {
                        Vec::new()
                    } else {
                        alloc
                            .per_tx()
                            .iter()
                            .map(|b| error_scale(&model, b))
                            .collect::<Result<_>>()?
                    };
                    Ok(PolicyPlan { perfect, scales })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PointPlan { snr, model, policies })
        })
        .collect::<Result<Vec<_>>>()?;

    let trials: Vec<Vec<TrialPoint>> = in_pool(opts.workers, || {
        (0..opts.trials)
            .into_par_iter()
            .map(|t| run_trial(scenario, &plans, opts.seed, t))
            .collect::<Result<Vec<_>>>()
    })??;

    let k = scenario.size();
    let mut rates: Vec<RateCurve> = policies
        .iter()
        .map(|&policy| RateCurve {
            policy,
            points: Vec::new(),
        })
        .collect();
    let mut deviations: Vec<DeviationCurve> = policies
        .iter()
        .map(|&policy| DeviationCurve {
            policy,
            points: Vec::new(),
        })
        .collect();

    for (s, &db) in snr_db.iter().enumerate() {
        let rejections: usize = trials.iter().map(|t| t[s].rejections).sum();
        let accepted = opts.trials;
        let rate = rejections as f64 / (rejections + accepted) as f64;
        if rate > scenario.max_rejection_rate {
            return Err(Error::RejectionRateExceeded {
                snr_db: db,
                rejected: rejections,
                accepted,
                limit: scenario.max_rejection_rate,
                worst_condition: trials.iter().map(|t| t[s].worst_rejected).fold(0.0, f64::max),
            });
        }
        for p in 0..policies.len() {
            let per_user: Vec<Vec<f64>> = (0..k)
                .map(|u| trials.iter().map(|t| t[s].rates[p][u]).collect())
                .collect();
            let averages: Vec<f64> = trials.iter().map(|t| mean(&t[s].rates[p])).collect();
            rates[p].points.push(RatePoint {
                snr_db: db,
                mean_rate: per_user.iter().map(|v| mean(v)).collect(),
                stderr: per_user.iter().map(|v| std_error(v)).collect(),
                avg_rate: mean(&averages),
                avg_stderr: std_error(&averages),
                trials: accepted,
                rejections,
            });

            let rows: Vec<Vec<f64>> = (0..k)
                .map(|j| trials.iter().map(|t| t[s].deviation_rows[p][j]).collect())
                .collect();
            let totals: Vec<f64> = trials.iter().map(|t| t[s].deviation_rows[p].iter().sum()).collect();
            deviations[p].points.push(DeviationStats {
                snr_db: db,
                mean: mean(&totals),
                median: median(&totals),
                row_medians: rows.iter().map(|r| median(r)).collect(),
                row_means: rows.iter().map(|r| mean(r)).collect(),
                trials: accepted,
                rejections,
            });
        }
    }
    Ok(Simulation { rates, deviations })
}

/// Mean per-user rates of one policy at one SNR point.
pub fn ergodic_rates(
    scenario: &Scenario,
    policy: PolicyTag,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<RatePoint> {
    let sim = simulate(
        scenario,
        &[policy],
        &[snr_db],
        SimulationOptions {
            trials,
            seed,
            workers: None,
        },
    )?;
    Ok(sim.rates[0].points[0].clone())
}

/// Deviation statistics of one policy at one SNR point.
pub fn precoder_deviation(
    scenario: &Scenario,
    policy: PolicyTag,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<DeviationStats> {
    let sim = simulate(
        scenario,
        &[policy],
        &[snr_db],
        SimulationOptions {
            trials,
            seed,
            workers: None,
        },
    )?;
    Ok(sim.deviations[0].points[0].clone())
}

/// Least-squares DoF estimate from the highest-SNR points of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DofEstimate {
    /// Slope per user in bits per unit of `log2(P)`.
    pub slopes: Vec<f64>,
    /// Slope of the user-average rate.
    pub avg_slope: f64,
    pub fit_snr_db: Vec<f64>,
    pub residuals: Vec<f64>,
}

pub fn dof_slope(curve: &RateCurve, fit_points: usize) -> Result<DofEstimate> {
    if fit_points < 2 || curve.points.len() < fit_points {
        return Err(Error::InsufficientPoints {
            needed: fit_points.max(2),
            available: curve.points.len(),
        });
    }
    let mut pts: Vec<&RatePoint> = curve.points.iter().collect();
    pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    let pts = &pts[pts.len() - fit_points..];
    let x: Vec<f64> = pts.iter().map(|p| db_to_linear(p.snr_db).log2()).collect();
    let users = pts[0].mean_rate.len();
    let fit = |y: Vec<f64>| fit_line(&x, &y).ok_or_else(|| invalid("degenerate SNR points"));
    let mut slopes = Vec::with_capacity(users);
    let mut residuals = Vec::with_capacity(users);
    for u in 0..users {
        let f = fit(pts.iter().map(|p| p.mean_rate[u]).collect())?;
        slopes.push(f.slope);
        residuals.push(f.rms_residual);
    }
    let avg = fit(pts.iter().map(|p| p.avg_rate).collect())?;
    Ok(DofEstimate {
        slopes,
        avg_slope: avg.slope,
        fit_snr_db: pts.iter().map(|p| p.snr_db).collect(),
        residuals,
    })
}
