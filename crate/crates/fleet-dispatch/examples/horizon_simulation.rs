//! Runs a generated scenario through its full decision horizon: requests
//! arrive over time, each interval boundary re-decides admission over the
//! pending pool plus everything already committed, and the books track
//! revenue and fuel as plans supersede each other.
//!
//! Run with: cargo run --example horizon_simulation

use fleet_dispatch::admission::GaConfig;
use fleet_dispatch::fleet_scheduler::ExecMode;
use fleet_dispatch::simulator::{generate_scenario, run_horizon, GenParams};
use fleet_dispatch::units::TimeDelta;

fn main() {
    let params = GenParams {
        seed: 5,
        vertices: 15,
        stations: 3,
        vehicles: 4,
        requests: 18,
        span: TimeDelta::from_seconds(1500.0),
        interval: TimeDelta::from_seconds(300.0),
        horizon: None,
        ga: GaConfig {
            generations: 15,
            ..GaConfig::default()
        },
    };
    let scenario = generate_scenario(&params).unwrap();
    println!(
        "scenario: {} vertices, {} vehicles, {} requests over {} intervals\n",
        params.vertices,
        scenario.vehicles.len(),
        scenario.arrivals.len(),
        scenario.config.horizon
    );

    let (reports, state) = run_horizon(&scenario, ExecMode::Cumulative).unwrap();

    println!("interval  admitted  carried  excluded  profit(c)  cumulative(c)");
    for r in &reports {
        println!(
            "{:>8}  {:>8}  {:>7}  {:>8}  {:>9}  {:>13}",
            r.interval,
            r.admitted.len(),
            r.carried.len(),
            r.excluded.len(),
            r.interval_profit.cents_rounded(),
            r.cumulative_profit.cents_rounded()
        );
    }

    println!(
        "\nledger: revenue {} cents, fuel {} cents, profit {} cents",
        state.ledger.revenue.cents_rounded(),
        state.ledger.cost.cents_rounded(),
        state.ledger.profit().cents_rounded()
    );
    println!("final request states:");
    for (s, n) in state.census() {
        println!("  {s:?}: {n}");
    }

    // The whole run is a pure function of the scenario.
    let (again, _) = run_horizon(&scenario, ExecMode::Cumulative).unwrap();
    let identical = reports.len() == again.len()
        && reports
            .iter()
            .zip(&again)
            .all(|(a, b)| a.cumulative_profit == b.cumulative_profit);
    println!("\nreplay identical: {identical}");
}
