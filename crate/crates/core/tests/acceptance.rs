//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its verdict line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use netmimo::allocation::{allocation_size, conventional, distance_based, PolicyTag};
use netmimo::evaluation::{db_to_linear, dof_slope, simulate, Scenario, Simulation, SimulationOptions};
use netmimo::experiment::{run_experiment, ExperimentConfig, LayoutSpec};
use netmimo::oracle::{
    inverse_decay_estimate, line_layout, max_resolvent_error, term_decay_check, truncation_exponent,
    truncation_tail_check, SLOPE_TOLERANCE,
};
use netmimo::rng::{substream, Purpose};
use netmimo::topology::{cooperation_radius, data_sharing_sets, interference_levels, NodeLayout};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const DESK_DB: [f64; 5] = [40.0, 50.0, 60.0, 70.0, 80.0];
const TRIALS: usize = 500;
const SEED: u64 = 20240601;

fn desk_grid(data_mask: bool) -> Scenario {
    Scenario::new(NodeLayout::grid(4).unwrap(), 0.6)
        .unwrap()
        .with_data_mask(data_mask)
        .unwrap()
}

fn run(scenario: &Scenario, policies: &[PolicyTag], snr_db: &[f64]) -> Simulation {
    simulate(
        scenario,
        policies,
        snr_db,
        SimulationOptions {
            trials: TRIALS,
            seed: SEED,
            workers: None,
        },
    )
    .unwrap()
}

fn user_slopes(sim: &Simulation, idx: usize, fit_points: usize) -> Vec<f64> {
    dof_slope(&sim.rates[idx], fit_points).unwrap().slopes
}

fn range(v: &[f64]) -> (f64, f64) {
    (
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

fn size_ratio() -> Outcome {
    let start = Instant::now();
    let layout = NodeLayout::grid(6).unwrap();
    let d = layout.distances();
    let snr = db_to_linear(50.0);
    let conv = allocation_size(&conventional(&interference_levels(&d, 0.6).unwrap(), snr).unwrap());
    let dist = allocation_size(&distance_based(&d, 0.6, snr, 1.0).unwrap());
    let ratio = dist.total_bits / conv.total_bits;
    let asym = dist.prelog_asymptotic / conv.prelog_asymptotic;
    let elapsed = start.elapsed();
    outcome(
        (0.05..=0.08).contains(&ratio) && elapsed < Duration::from_secs(1),
        format!("ratio at 50 dB {ratio:.4} in [0.05, 0.08]; asymptotic {asym:.4}; {elapsed:.2?}"),
    )
}

fn dof_ordering() -> Outcome {
    let start = Instant::now();
    let policies = [
        PolicyTag::Perfect,
        PolicyTag::Distance { alpha: 1.0 },
        PolicyTag::Cluster { size: 4 },
        PolicyTag::Uniform,
    ];
    let sim = run(&desk_grid(false), &policies, &DESK_DB);
    let s: Vec<Vec<f64>> = (0..4).map(|p| user_slopes(&sim, p, DESK_DB.len())).collect();
    let mut pass = start.elapsed() <= Duration::from_secs(600);
    for (((perfect, distance), cluster), uniform) in s[0].iter().zip(&s[1]).zip(&s[2]).zip(&s[3]) {
        pass &= (0.9..=1.1).contains(perfect);
        pass &= (distance - perfect).abs() <= 0.1;
        pass &= *cluster <= distance - 0.1;
        pass &= uniform <= cluster;
    }
    let names = ["perfect", "distance", "cluster", "uniform"];
    let summary: Vec<String> = names
        .iter()
        .zip(&s)
        .map(|(n, v)| {
            let (lo, hi) = range(v);
            format!("{n} [{lo:.3}, {hi:.3}]")
        })
        .collect();
    outcome(
        pass,
        format!("per-user slopes {}; {:.1?}", summary.join(", "), start.elapsed()),
    )
}

fn deviation_scaling() -> Outcome {
    let sim = run(&desk_grid(false), &[PolicyTag::Conventional, PolicyTag::Zero], &DESK_DB);
    let conv = sim.deviations[0].median_slope().unwrap();
    let zero = sim.deviations[1].median_slope().unwrap();
    outcome(
        conv.abs() <= 0.15 && (zero - 1.0).abs() <= 0.15,
        format!("median deviation slope: conventional {conv:.3} (0 +- 0.15), zero bits {zero:.3} (1 +- 0.15)"),
    )
}

fn per_row_condition() -> Outcome {
    let sim = run(&desk_grid(false), &[PolicyTag::Distance { alpha: 1.0 }], &DESK_DB);
    let slopes: Vec<f64> = sim.deviations[0].row_slopes().into_iter().map(|s| s.unwrap()).collect();
    let (lo, hi) = range(&slopes);
    outcome(
        slopes.iter().all(|s| s.abs() <= 0.15),
        format!("distance policy per-row median deviation slopes in [{lo:.3}, {hi:.3}] (0 +- 0.15)"),
    )
}

fn alpha_variants() -> Outcome {
    let config = ExperimentConfig::fig2_desk();
    let scenario = config.scenario().unwrap();
    let alphas = [0.75, 1.0, 1.25];
    let policies: Vec<PolicyTag> = alphas.iter().map(|&alpha| PolicyTag::Distance { alpha }).collect();
    let sim = run(&scenario, &policies, &config.snr_db);
    let fit = |p: usize, n: usize| dof_slope(&sim.rates[p], n).unwrap().avg_slope;
    let top = |p: usize| sim.rates[p].points.last().unwrap().avg_rate;
    let s: Vec<f64> = (0..3).map(|p| fit(p, config.fit_points)).collect();
    let mut pass = s[2] <= s[1] - 0.1 && (s[0] - s[1]).abs() <= 0.1 && top(0) >= top(1);

    // Mid-range window for reference only.
    let mid: Vec<f64> = {
        let mid_db = [40.0, 60.0, 80.0];
        let mid_sim = run(&scenario, &policies, &mid_db);
        (0..3)
            .map(|p| dof_slope(&mid_sim.rates[p], 3).unwrap().avg_slope)
            .collect()
    };

    // Bit fractions on a full-size random layout.
    let full = ExperimentConfig::fig2_full().scenario().unwrap();
    let snr = db_to_linear(50.0);
    let conv = allocation_size(&full.allocation(PolicyTag::Conventional, snr).unwrap()).total_bits;
    let targets = [0.30, 0.17, 0.10];
    let fractions: Vec<f64> = alphas
        .iter()
        .map(|&alpha| allocation_size(&full.allocation(PolicyTag::Distance { alpha }, snr).unwrap()).total_bits / conv)
        .collect();
    pass &= fractions.iter().zip(targets).all(|(f, t)| (f - t).abs() <= 0.10);

    outcome(
        pass,
        format!(
            "fit {:?} dB: slope a=0.75 {:.3}, a=1 {:.3}, a=1.25 {:.3}; top-point rate a=0.75 {:.2} vs a=1 {:.2}; \
             40-80 dB slopes {:.3}/{:.3}/{:.3}; K=15 bit fractions {:.3}/{:.3}/{:.3}",
            dof_slope(&sim.rates[0], config.fit_points).unwrap().fit_snr_db,
            s[0],
            s[1],
            s[2],
            top(0),
            top(1),
            mid[0],
            mid[1],
            mid[2],
            fractions[0],
            fractions[1],
            fractions[2]
        ),
    )
}

fn resolvent_identity() -> Outcome {
    let start = Instant::now();
    let err = max_resolvent_error(1000, 8, SEED).unwrap();
    let elapsed = start.elapsed();
    outcome(
        err < 1e-10 && elapsed < Duration::from_secs(5),
        format!("max error {err:.3e} over 1000 8x8 pairs; {elapsed:.2?}"),
    )
}

fn neumann_machinery() -> Outcome {
    let triple = line_layout(3, 1.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1, 2] {
        let r = term_decay_check(&triple, 0.6, &DESK_DB, TRIALS, n, SEED).unwrap();
        let end = r.pair(0, n).unwrap().slope.unwrap();
        let bound = (0.6 - 1.0) * n as f64 + SLOPE_TOLERANCE;
        pass &= r.pass();
        parts.push(format!(
            "n={n}: worst margin {:.3}, slope over {n} hop(s) {end:.3} (bound {bound:.2})",
            r.worst_margin()
        ));
    }
    let grid = NodeLayout::grid(3).unwrap();
    let tail = truncation_tail_check(&grid, 0.5, 60.0, TRIALS, SEED).unwrap();
    pass &= tail.pass();
    let (slope, exponent) = truncation_exponent(&grid, 0.5, &[60.0, 80.0, 100.0, 120.0], TRIALS, SEED).unwrap();
    parts.push(format!(
        "truncation n0={} at 60 dB: median residual^2 {:.3e} vs bound {:.3e}, ratio {:.1} (limit 10); \
         residual slope {slope:.3} vs exponent {exponent:.2}",
        tail.order.n0, tail.median_residual_sq, tail.bound, tail.ratio
    ));
    outcome(pass, parts.join("; "))
}

fn inverse_decay() -> Outcome {
    let line = line_layout(4, 1.0).unwrap();
    let r = inverse_decay_estimate(&line, 0.6, &DESK_DB, TRIALS, SEED).unwrap();
    let parts: Vec<String> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&dist| {
            let worst = r
                .pairs
                .iter()
                .filter(|p| (p.distance - dist).abs() < 1e-9)
                .filter_map(|p| p.slope)
                .fold(f64::NEG_INFINITY, f64::max);
            format!(
                "dist {dist}: max slope {worst:.3} (bound {:.2})",
                (0.6 - 1.0) * dist + SLOPE_TOLERANCE
            )
        })
        .collect();
    outcome(r.pass(), parts.join(", "))
}

fn local_data_sharing() -> Outcome {
    let plain = run(&desk_grid(false), &[PolicyTag::Distance { alpha: 1.0 }], &DESK_DB);
    let masked = run(&desk_grid(true), &[PolicyTag::Distance { alpha: 1.0 }], &DESK_DB);
    let a = dof_slope(&plain.rates[0], DESK_DB.len()).unwrap().avg_slope;
    let b = dof_slope(&masked.rates[0], DESK_DB.len()).unwrap().avg_slope;
    let mut pass = (a - b).abs() <= 0.05;
    let mut worst = (0usize, 1usize);
    for side in 2..=8 {
        let grid = NodeLayout::grid(side).unwrap();
        for gamma in [0.3, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let d0 = cooperation_radius(gamma).unwrap();
            let cap = (std::f64::consts::PI * (d0 + 1.0).powi(2)).ceil() as usize;
            for set in data_sharing_sets(&grid, gamma).unwrap() {
                pass &= set.len() <= cap;
                if set.len() * worst.1 > worst.0 * cap {
                    worst = (set.len(), cap);
                }
            }
        }
    }
    outcome(
        pass,
        format!(
            "slope unmasked {a:.3}, masked {b:.3}, change {:.3} (limit 0.05); fullest set {} of cap {}",
            (a - b).abs(),
            worst.0,
            worst.1
        ),
    )
}

fn gamma_one_collapse() -> Outcome {
    let mut pass = true;
    let mut cases = 0;
    for seed in 0..5 {
        let layouts = [
            NodeLayout::grid(seed as usize + 1).unwrap(),
            NodeLayout::uniform_random(7, 3.0, &mut substream(seed, Purpose::Layout, 0, 0)).unwrap(),
        ];
        for layout in &layouts {
            let d = layout.distances();
            for db in [10.0, 37.0, 50.0, 80.0] {
                let snr = db_to_linear(db);
                let a = distance_based(&d, 1.0, snr, 1.0).unwrap();
                let b = conventional(&interference_levels(&d, 1.0).unwrap(), snr).unwrap();
                pass &= a.per_tx() == b.per_tx();
                cases += 1;
            }
        }
    }
    outcome(pass, format!("{cases} layout/SNR cases equal entrywise"))
}

fn determinism() -> Outcome {
    let base = ExperimentConfig {
        trials: 60,
        snr_db: vec![20.0, 40.0, 60.0],
        layout: LayoutSpec::Random {
            k: 6,
            side: 3.0,
            seed: None,
        },
        ..ExperimentConfig::fig2_desk()
    };
    let csv = |workers| {
        run_experiment(&ExperimentConfig {
            workers: Some(workers),
            ..base.clone()
        })
        .unwrap()
        .rates_csv()
    };
    let one = csv(1);
    let many = csv(4);
    outcome(
        one == many && !one.is_empty(),
        format!(
            "1-worker and 4-worker CSVs identical: {} ({} bytes)",
            one == many,
            one.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("size ratio", size_ratio),
        ("DoF ordering", dof_ordering),
        ("deviation scaling", deviation_scaling),
        ("per-row deviation", per_row_condition),
        ("alpha variants", alpha_variants),
        ("resolvent identity", resolvent_identity),
        ("Neumann machinery", neumann_machinery),
        ("inverse decay", inverse_decay),
        ("local data sharing", local_data_sharing),
        ("gamma=1 collapse", gamma_one_collapse),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "criterion {:>2} {:<20} {}  {}",
            n + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
