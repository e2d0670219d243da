//! Pilot run for the ensemble thresholds of the acceptance suite.
//!
//! Uses seeds 100000.. so the pilot never overlaps the seeds the suite checks.
//! Prints a markdown report; `docs/pilot.md` holds the recorded output.
//!
//!     cargo run --release -p rmwalk-cli --example pilot

use std::time::Instant;

use rmwalk_cli::config::{Command, ExperimentConfig, SeedRange};
use rmwalk_cli::run;
use rmwalk_core::analysis::DriftKind;
use serde_json::Value;

const PILOT_SEEDS: u64 = 20;
const FIRST: u64 = 100_000;

fn config(command: Command, seeds: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command);
    c.seeds = Some(SeedRange {
        start: FIRST,
        end: FIRST + seeds - 1,
    });
    c.deterministic = true;
    c
}

fn aggregate(c: &ExperimentConfig) -> (Value, f64) {
    let t = Instant::now();
    let out = run(c).expect("pilot run");
    (out.summary.aggregate, t.elapsed().as_secs_f64())
}

fn main() {
    println!("| criterion | pilot setting | observed | seconds |");
    println!("|---|---|---|---|");

    for sigma in [0.505, 0.7] {
        let mut c = config(Command::Clt, 1000);
        c.sigma = Some(sigma);
        let (a, s) = aggregate(&c);
        println!(
            "| 5 CLT | 1000 seeds, sigma={sigma}, t=1, p_max=1e7 | KS={:.4} | {s:.1} |",
            a["ks_distance"].as_f64().unwrap()
        );
    }

    for drift in [DriftKind::Zero, DriftKind::PlusExtremal, DriftKind::MinusExtremal] {
        let mut c = config(Command::Signs, PILOT_SEEDS);
        c.n = 1_000_000;
        c.drift = drift;
        let (a, s) = aggregate(&c);
        println!(
            "| 7 sign changes | {PILOT_SEEDS} seeds, N=1e6, drift={drift:?} | with change {}/{PILOT_SEEDS}, min count {} | {s:.1} |",
            a["seeds_with_sign_change"], a["sign_changes"]["min"]
        );
    }

    let mut c = config(Command::Blowup, 50);
    c.t = Some(1.0);
    c.k_max = Some(10);
    let (a, s) = aggregate(&c);
    println!(
        "| 7 blow-up | 50 seeds, t=1, k<=10 | fraction max S/sqrt(V) >= 1: {:.3} | {s:.1} |",
        a["fraction_with_max_normalized_at_least_1"].as_f64().unwrap()
    );

    let mut c = config(Command::Recurrence, PILOT_SEEDS);
    c.n = 1_000_000;
    let (a, s) = aggregate(&c);
    let visits: Vec<String> = a["targets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| format!("z={}: {}", t["z_re"], t["seeds_visiting_twice"]))
        .collect();
    println!(
        "| 8 recurrence | {PILOT_SEEDS} seeds, N=1e6 | seeds visiting twice: {} | {s:.1} |",
        visits.join(", ")
    );

    let mut c = config(Command::Integral, PILOT_SEEDS);
    c.n = 10_000_000;
    c.x = vec![10_000, 10_000_000];
    let (a, s) = aggregate(&c);
    println!(
        "| 9 integral | {PILOT_SEEDS} seeds, x=1e4 -> 1e7 | growth>=1.25: {}/{PILOT_SEEDS}, min growth {:.3} | {s:.1} |",
        a["seeds_growth_at_least_25_percent"],
        a["growth"]["min"].as_f64().unwrap()
    );
    println!(
        "| 10 envelope | same walks | within sqrt(x)(loglog x)^3: {}/{PILOT_SEEDS}, max ratio {:.3} | - |",
        a["seeds_within_envelope"],
        a["envelope_ratio"]["max"].as_f64().unwrap()
    );

    let mut c = config(Command::Fscan, PILOT_SEEDS);
    c.k_max = Some(8);
    let (a, s) = aggregate(&c);
    let last = a["per_sigma"].as_array().unwrap().last().unwrap().clone();
    println!(
        "| fscan | {PILOT_SEEDS} seeds, k<=8 | median ratio at k=8: {:.3} | {s:.1} |",
        last["median_log_ratio"].as_f64().unwrap()
    );
}
