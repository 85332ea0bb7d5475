//! Experiment configuration, presets and CSV/metadata output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::allocation::{allocation_size, PolicyTag};
use crate::error::{Error, Result};
use crate::evaluation::{
    db_to_linear, dof_slope, simulate, DofEstimate, RateCurve, Scenario, SimulationOptions, UniformSpread,
    DEFAULT_MAX_REJECTION_RATE,
};
use crate::precoding::DEFAULT_CONDITION_THRESHOLD;
use crate::rng::{substream, Purpose};
use crate::topology::{NodeLayout, Point};

/// Where node positions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayoutSpec {
    /// `side x side` unit-spaced grid.
    Grid { side: usize },
    /// `k` nodes uniform in a `side x side` square, drawn from the layout substream.
    Random {
        k: usize,
        side: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Text file with one `x y` pair per line.
    File { path: PathBuf },
    /// Explicit coordinates.
    Points { x: Vec<f64>, y: Vec<f64> },
}

impl LayoutSpec {
    pub fn build(&self, master_seed: u64) -> Result<NodeLayout> {
        match self {
            LayoutSpec::Grid { side } => NodeLayout::grid(*side),
            LayoutSpec::Random { k, side, seed } => NodeLayout::uniform_random(
                *k,
                *side,
                &mut substream(seed.unwrap_or(master_seed), Purpose::Layout, 0, 0),
            ),
            LayoutSpec::File { path } => NodeLayout::read(path),
            LayoutSpec::Points { x, y } => {
                if x.len() != y.len() {
                    return Err(Error::Config("layout x and y lengths differ".into()));
                }
                NodeLayout::new(x.iter().zip(y).map(|(&x, &y)| Point::new(x, y)).collect())
            }
        }
    }

    pub fn from_layout(layout: &NodeLayout) -> Self {
        LayoutSpec::Points {
            x: layout.positions().iter().map(|p| p.x).collect(),
            y: layout.positions().iter().map(|p| p.y).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    /// Any of `perfect`, `conventional`, `distance`, `uniform`, `cluster`, `zero`.
    pub names: Vec<String>,
    /// One distance-based curve per value.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_cluster_size")]
    pub cluster_size: usize,
    #[serde(default)]
    pub uniform_spread: UniformSpread,
}

fn default_alphas() -> Vec<f64> {
    vec![1.0]
}

fn default_cluster_size() -> usize {
    4
}

fn default_fit_points() -> usize {
    4
}

fn default_threshold() -> f64 {
    DEFAULT_CONDITION_THRESHOLD
}

fn default_rejection() -> f64 {
    DEFAULT_MAX_REJECTION_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub gamma: f64,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_fit_points")]
    pub fit_points: usize,
    #[serde(default = "default_threshold")]
    pub condition_threshold: f64,
    #[serde(default = "default_rejection")]
    pub max_rejection_rate: f64,
    #[serde(default)]
    pub data_mask: bool,
    /// Worker threads; does not affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output prefix: `<output>.csv` and `<output>.meta.toml`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub layout: LayoutSpec,
    pub policies: PolicyConfig,
}

fn snr_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

impl ExperimentConfig {
    /// 4x4 grid, gamma 0.6, 0-80 dB.
    pub fn fig1_desk() -> Self {
        ExperimentConfig {
            seed: 1,
            gamma: 0.6,
            snr_db: snr_range(0.0, 80.0, 10.0),
            trials: 500,
            fit_points: 5,
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            max_rejection_rate: DEFAULT_MAX_REJECTION_RATE,
            data_mask: false,
            workers: None,
            output: Some(PathBuf::from("fig1-desk")),
            layout: LayoutSpec::Grid { side: 4 },
            policies: PolicyConfig {
                names: ["perfect", "distance", "uniform", "cluster"].map(String::from).to_vec(),
                alphas: vec![1.0],
                cluster_size: 4,
                uniform_spread: UniformSpread::All,
            },
        }
    }

    /// 6x6 grid, 1000 trials. Slow.
    pub fn fig1_full() -> Self {
        ExperimentConfig {
            trials: 1000,
            layout: LayoutSpec::Grid { side: 6 },
            output: Some(PathBuf::from("fig1-full")),
            ..Self::fig1_desk()
        }
    }

    /// 8 random nodes in a 4x4 square, gamma 0.7, three alpha values.
    pub fn fig2_desk() -> Self {
        ExperimentConfig {
            seed: 1,
            gamma: 0.7,
            snr_db: snr_range(0.0, 160.0, 20.0),
            trials: 500,
            fit_points: 4,
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            max_rejection_rate: DEFAULT_MAX_REJECTION_RATE,
            data_mask: false,
            workers: None,
            output: Some(PathBuf::from("fig2-desk")),
            layout: LayoutSpec::Random {
                k: 8,
                side: 4.0,
                seed: None,
            },
            policies: PolicyConfig {
                names: ["perfect", "distance"].map(String::from).to_vec(),
                alphas: vec![0.75, 1.0, 1.25],
                cluster_size: 4,
                uniform_spread: UniformSpread::All,
            },
        }
    }

    /// 15 random nodes in a 6x6 square, 1000 trials. Slow.
    pub fn fig2_full() -> Self {
        ExperimentConfig {
            trials: 1000,
            layout: LayoutSpec::Random {
                k: 15,
                side: 6.0,
                seed: None,
            },
            output: Some(PathBuf::from("fig2-full")),
            ..Self::fig2_desk()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fig1-desk" => Some(Self::fig1_desk()),
            "fig1-full" => Some(Self::fig1_full()),
            "fig2-desk" => Some(Self::fig2_desk()),
            "fig2-full" => Some(Self::fig2_full()),
            _ => None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file, or the `[config]` table of a metadata sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        let body = match table.get("config") {
            Some(toml::Value::Table(inner)) => inner.clone(),
            _ => table,
        };
        body.try_into().map_err(|e: toml::de::Error| parse_err(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("snr_db must be a non-empty list of finite values >= 0".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.fit_points < 2 {
            return bad("fit_points must be >= 2".into());
        }
        if self.condition_threshold.is_nan() || self.condition_threshold <= 1.0 {
            return bad("condition_threshold must exceed 1".into());
        }
        if !(0.0..1.0).contains(&self.max_rejection_rate) {
            return bad("max_rejection_rate must lie in [0, 1)".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if self.policies.names.is_empty() {
            return bad("at least one policy is required".into());
        }
        if self.policies.alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return bad("alphas must be positive".into());
        }
        self.policy_tags().map(|_| ())
    }

    /// Expands the policy section into one tag per curve.
    pub fn policy_tags(&self) -> Result<Vec<PolicyTag>> {
        let mut tags = Vec::new();
        for name in &self.policies.names {
            match name.as_str() {
                "perfect" => tags.push(PolicyTag::Perfect),
                "conventional" => tags.push(PolicyTag::Conventional),
                "distance" => tags.extend(self.policies.alphas.iter().map(|&alpha| PolicyTag::Distance { alpha })),
                "uniform" => tags.push(PolicyTag::Uniform),
                "cluster" => tags.push(PolicyTag::Cluster {
                    size: self.policies.cluster_size,
                }),
                "zero" => tags.push(PolicyTag::Zero),
                other => return Err(Error::Config(format!("unknown policy '{other}'"))),
            }
        }
        Ok(tags)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let layout = self.layout.build(self.seed)?;
        Scenario::new(layout, self.gamma)?
            .with_condition_threshold(self.condition_threshold)
            .with_max_rejection_rate(self.max_rejection_rate)
            .with_uniform_spread(self.policies.uniform_spread)
            .with_data_mask(self.data_mask)
    }
}

/// Allocation size of one policy at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub snr_db: f64,
    pub total_bits: f64,
    pub prelog: f64,
    pub prelog_asymptotic: f64,
    /// Total bits over the conventional total at the same SNR.
    pub ratio: f64,
    /// Asymptotic prelog over the conventional one.
    pub ratio_asymptotic: f64,
}

/// Sizes of every finite-bit policy in the config at every SNR point.
pub fn report_sizes(config: &ExperimentConfig) -> Result<Vec<SizeRow>> {
    config.validate()?;
    let scenario = config.scenario()?;
    let tags = config.policy_tags()?;
    let mut rows = Vec::new();
    for &db in &config.snr_db {
        let snr = db_to_linear(db);
        let reference = allocation_size(&scenario.allocation(PolicyTag::Conventional, snr)?);
        let ratio = |a: f64, b: f64| {
            if b > 0.0 {
                a / b
            } else if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        };
        for &tag in tags.iter().filter(|t| **t != PolicyTag::Perfect) {
            let s = allocation_size(&scenario.allocation(tag, snr)?);
            rows.push(SizeRow {
                policy: tag.name().to_string(),
                alpha: tag.alpha(),
                snr_db: db,
                total_bits: s.total_bits,
                prelog: s.prelog,
                prelog_asymptotic: s.prelog_asymptotic,
                ratio: ratio(s.total_bits, reference.total_bits),
                ratio_asymptotic: ratio(s.prelog_asymptotic, reference.prelog_asymptotic),
            });
        }
    }
    Ok(rows)
}

pub fn sizes_to_csv(rows: &[SizeRow]) -> String {
    let mut out = String::from("policy,alpha,snr_db,total_bits,prelog,prelog_asymptotic,ratio,ratio_asymptotic\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{:.6},{:.6},{:.6},{:.6}",
            r.policy,
            fmt_alpha(r.alpha),
            r.snr_db,
            r.total_bits,
            r.prelog,
            r.prelog_asymptotic,
            r.ratio,
            r.ratio_asymptotic
        );
    }
    out
}

/// Every finite allocation of the config as `policy,alpha,snr_db,j,k,i,bits`
/// rows with one-based indices.
pub fn allocations_to_csv(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let scenario = config.scenario()?;
    let mut out = String::from("policy,alpha,snr_db,j,k,i,bits\n");
    for tag in config.policy_tags()? {
        if tag == PolicyTag::Perfect {
            continue;
        }
        for &db in &config.snr_db {
            let alloc = scenario.allocation(tag, db_to_linear(db))?;
            for (j, b) in alloc.per_tx().iter().enumerate() {
                for k in 0..b.nrows() {
                    for i in 0..b.ncols() {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            tag.name(),
                            fmt_alpha(tag.alpha()),
                            db,
                            j + 1,
                            k + 1,
                            i + 1,
                            b[(k, i)]
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Channel of trial `trial` at the first SNR point as `k,i,re,im` rows.
pub fn channel_csv(config: &ExperimentConfig, trial: usize) -> Result<String> {
    config.validate()?;
    let db = config.snr_db[0];
    let chan = config.scenario()?.trial_channel(db_to_linear(db), config.seed, trial)?;
    let mut buf = Vec::new();
    chan.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

fn fmt_alpha(alpha: Option<f64>) -> String {
    alpha.map(|a| a.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofRow {
    pub policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub avg_slope: f64,
    pub min_user_slope: f64,
    pub max_user_slope: f64,
    pub fit_snr_db: Vec<f64>,
}

/// Everything written to the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeRow>,
    pub dof: Vec<DofRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub curves: Vec<RateCurve>,
    pub dof: Vec<Option<DofEstimate>>,
    pub sizes: Vec<SizeRow>,
    /// Config with the layout resolved to explicit points.
    pub resolved: ExperimentConfig,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let scenario = config.scenario()?;
    let tags = config.policy_tags()?;
    let sim = simulate(
        &scenario,
        &tags,
        &config.snr_db,
        SimulationOptions {
            trials: config.trials,
            seed: config.seed,
            workers: config.workers,
        },
    )?;
    let dof = sim.rates.iter().map(|c| dof_slope(c, config.fit_points).ok()).collect();
    let mut resolved = config.clone();
    resolved.layout = LayoutSpec::from_layout(&scenario.layout);
    Ok(ExperimentResult {
        curves: sim.rates,
        dof,
        sizes: report_sizes(config)?,
        resolved,
    })
}

impl ExperimentResult {
    /// Rates in the `policy,alpha,snr_db,user,mean_rate_bits,stderr,trials,rejections` schema.
    pub fn rates_csv(&self) -> String {
        let mut out = String::from("policy,alpha,snr_db,user,mean_rate_bits,stderr,trials,rejections\n");
        for curve in &self.curves {
            let alpha = fmt_alpha(curve.policy.alpha());
            for p in &curve.points {
                let mut row = |user: &str, mean: f64, se: f64| {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:.6},{:.6},{},{}",
                        curve.policy.name(),
                        alpha,
                        p.snr_db,
                        user,
                        mean,
                        se,
                        p.trials,
                        p.rejections
                    );
                };
                for (u, (&m, &s)) in p.mean_rate.iter().zip(&p.stderr).enumerate() {
                    row(&(u + 1).to_string(), m, s);
                }
                row("avg", p.avg_rate, p.avg_stderr);
            }
        }
        out
    }

    pub fn dof_rows(&self) -> Vec<DofRow> {
        self.curves
            .iter()
            .zip(&self.dof)
            .filter_map(|(c, d)| {
                d.as_ref().map(|d| DofRow {
                    policy: c.policy.name().to_string(),
                    alpha: c.policy.alpha(),
                    avg_slope: d.avg_slope,
                    min_user_slope: d.slopes.iter().copied().fold(f64::INFINITY, f64::min),
                    max_user_slope: d.slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    fit_snr_db: d.fit_snr_db.clone(),
                })
            })
            .collect()
    }

    pub fn metadata(&self) -> Metadata {
        Metadata {
            generator: format!("netmimo {}", env!("CARGO_PKG_VERSION")),
            config: self.resolved.clone(),
            sizes: self.sizes.clone(),
            dof: self.dof_rows(),
        }
    }

    pub fn metadata_toml(&self) -> Result<String> {
        toml::to_string(&self.metadata()).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `<prefix>.csv` and `<prefix>.meta.toml`; returns both paths.
    pub fn write(&self, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv_path = with_suffix(prefix, ".csv");
        let meta_path = with_suffix(prefix, ".meta.toml");
        let meta = self.metadata_toml()?;
        if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(&csv_path, self.rates_csv())?;
        fs::write(&meta_path, meta)?;
        Ok((csv_path, meta_path))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            trials: 20,
            snr_db: vec![10.0, 20.0, 30.0],
            fit_points: 2,
            layout: LayoutSpec::Grid { side: 2 },
            ..ExperimentConfig::fig1_desk()
        }
    }

    #[test]
    fn allocation_export_sums_to_sizes() {
        let c = tiny();
        let csv = allocations_to_csv(&c).unwrap();
        let sizes = report_sizes(&c).unwrap();
        // 3 finite policies x 3 SNR points x 4^3 entries
        assert_eq!(csv.lines().count(), 1 + 3 * 3 * 64);
        for row in &sizes {
            let total: f64 = csv
                .lines()
                .skip(1)
                .map(|l| l.split(',').collect::<Vec<_>>())
                .filter(|f| f[0] == row.policy && f[2].parse::<f64>().unwrap() == row.snr_db)
                .map(|f| f[6].parse::<f64>().unwrap())
                .sum();
            assert!((total - row.total_bits).abs() < 1e-9 * (1.0 + total), "{}", row.policy);
        }
    }

    #[test]
    fn channel_dump_lists_every_entry() {
        let csv = channel_csv(&tiny(), 3).unwrap();
        assert_eq!(csv.lines().next(), Some("k,i,re,im"));
        assert_eq!(csv.lines().count(), 17);
        assert_eq!(csv, channel_csv(&tiny(), 3).unwrap());
        assert_ne!(csv, channel_csv(&tiny(), 4).unwrap());
    }

    #[test]
    fn presets_are_valid() {
        for name in ["fig1-desk", "fig1-full", "fig2-desk", "fig2-full"] {
            let c = ExperimentConfig::preset(name).unwrap();
            c.validate().unwrap();
        }
        assert!(ExperimentConfig::preset("fig3").is_none());
        assert_eq!(ExperimentConfig::fig1_desk().snr_db.len(), 9);
        assert_eq!(ExperimentConfig::fig2_desk().policy_tags().unwrap().len(), 4);
    }

    #[test]
    fn toml_round_trip() {
        for c in [ExperimentConfig::fig1_desk(), ExperimentConfig::fig2_full(), tiny()] {
            let text = c.to_toml_string().unwrap();
            assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
        }
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let c = ExperimentConfig::from_toml_str(
            r#"
seed = 3
gamma = 0.6
snr_db = [20, 40]
trials = 10

[layout]
kind = "grid"
side = 2

[policies]
names = ["perfect", "distance"]
"#,
        )
        .unwrap();
        assert_eq!(c.fit_points, 4);
        assert_eq!(c.policies.alphas, vec![1.0]);
        assert_eq!(c.condition_threshold, 1e12);
        assert!(ExperimentConfig::from_toml_str("seed = 1\nbogus = 2").is_err());
    }

    #[test]
    fn validation_errors() {
        let mut c = tiny();
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = tiny();
        c.policies.names.push("nope".into());
        assert!(c.validate().is_err());
        let mut c = tiny();
        c.trials = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_node_ratios_are_one() {
        let c = ExperimentConfig {
            layout: LayoutSpec::Grid { side: 1 },
            policies: PolicyConfig {
                names: ["conventional", "distance", "uniform", "cluster"]
                    .map(String::from)
                    .to_vec(),
                alphas: vec![0.75, 1.0, 1.25],
                cluster_size: 1,
                uniform_spread: UniformSpread::All,
            },
            snr_db: vec![30.0, 50.0],
            ..tiny()
        };
        for r in report_sizes(&c).unwrap() {
            assert_eq!(r.ratio, 1.0, "{r:?}");
            if r.policy == "conventional" || r.policy == "distance" {
                assert_eq!(r.ratio_asymptotic, 1.0, "{r:?}");
            }
        }
    }

    #[test]
    fn alpha_orders_sizes() {
        let c = ExperimentConfig {
            policies: PolicyConfig {
                names: vec!["distance".into()],
                alphas: vec![0.75, 1.0, 1.25],
                cluster_size: 4,
                uniform_spread: UniformSpread::All,
            },
            snr_db: vec![50.0],
            ..ExperimentConfig::fig2_full()
        };
        let rows = report_sizes(&c).unwrap();
        assert!(rows[2].ratio < rows[1].ratio && rows[1].ratio < rows[0].ratio);
    }

    #[test]
    fn csv_shape_and_single_trial() {
        let c = ExperimentConfig { trials: 1, ..tiny() };
        let r = run_experiment(&c).unwrap();
        let csv = r.rates_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "policy,alpha,snr_db,user,mean_rate_bits,stderr,trials,rejections"
        );
        // 4 policies x 3 SNR points x (4 users + avg)
        assert_eq!(lines.len(), 1 + 4 * 3 * 5);
        for l in &lines[1..] {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 8);
            assert_eq!(f[5], "0.000000");
        }
        assert!(csv.contains("\ndistance,1,10,avg,"));
    }

    #[test]
    fn metadata_reruns_identically() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig {
            layout: LayoutSpec::Random {
                k: 4,
                side: 2.0,
                seed: None,
            },
            ..tiny()
        };
        let first = run_experiment(&c).unwrap();
        let (csv, meta) = first.write(&dir.path().join("out/run")).unwrap();
        let again = run_experiment(&ExperimentConfig::load(&meta).unwrap()).unwrap();
        assert_eq!(fs::read_to_string(csv).unwrap(), again.rates_csv());
    }
}
