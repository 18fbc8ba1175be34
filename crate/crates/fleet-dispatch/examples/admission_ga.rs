//! Decides which pending requests to admit and which vehicle serves each,
//! maximizing fare revenue minus fuel cost. A genetic search evolves
//! admit/assign decision vectors; the exhaustive oracle checks the answer on
//! this cap-sized pool.
//!
//! Run with: cargo run --example admission_ga

use fleet_dispatch::admission::{
    brute_force_admission, run_admission, AdmissionProblem, GaConfig,
};
use fleet_dispatch::domain::{
    Request, RequestId, RequestState, TimeWindow, Vehicle, VehicleId,
};
use fleet_dispatch::fleet_scheduler::{build_tabu_lists, ExecMode};
use fleet_dispatch::network::{EdgeAttrs, RoadNetwork, VertexId};
use fleet_dispatch::units::{Distance, Money, Rate, TimeDelta, TimePoint};
use fleet_dispatch::vehicle_scheduler::SearchLimits;
use std::collections::BTreeMap;

fn v(n: u64) -> VertexId {
    VertexId(n)
}

fn line() -> RoadNetwork {
    let mut edges = Vec::new();
    for a in 0..7u64 {
        let e = EdgeAttrs {
            cost: Distance::from_miles(1.0),
            time: TimeDelta::from_seconds(60.0),
        };
        edges.push((v(a), v(a + 1), e));
        edges.push((v(a + 1), v(a), e));
    }
    RoadNetwork::new((0..8).map(v), edges, [v(0), v(7)]).unwrap()
}

fn request(id: u64, pickup: u64, dropoff: u64, fare_cents: i64, seats: u32) -> Request {
    Request {
        id: RequestId(id),
        pickup: v(pickup),
        dropoff: v(dropoff),
        max_ride: TimeDelta::from_seconds(1800.0),
        window: TimeWindow {
            earliest: Some(TimePoint::ORIGIN),
            latest: Some(TimePoint::from_seconds(900.0)),
        },
        seats,
        fare: Money::from_cents(fare_cents),
        state: RequestState::New,
        assigned_vehicle: None,
        compensated: false,
    }
}

fn main() {
    let network = line();
    let reduced = network.reduce(network.vertices()).unwrap();
    let limits = SearchLimits::default();

    let vehicles: BTreeMap<VehicleId, Vehicle> = [
        Vehicle::idle(VehicleId(1), v(1), TimeDelta::from_seconds(7200.0), 4),
        Vehicle::idle(VehicleId(2), v(6), TimeDelta::from_seconds(7200.0), 4),
    ]
    .into_iter()
    .map(|k| (k.id, k))
    .collect();

    // Five candidates: four single riders worth serving, and a party of
    // four paying a token fare. The party needs a whole vehicle to itself,
    // so its fuel cannot be shared away and admitting it loses money.
    let pool: BTreeMap<RequestId, Request> = [
        request(1, 1, 3, 650, 1),
        request(2, 2, 4, 700, 1),
        request(3, 6, 4, 650, 1),
        request(4, 5, 3, 700, 1),
        request(5, 3, 6, 10, 4),
    ]
    .into_iter()
    .map(|r| (r.id, r))
    .collect();

    let tabu = build_tabu_lists(&pool, &vehicles, &reduced, &limits).unwrap();
    let problem = AdmissionProblem::new(
        &pool,
        &vehicles,
        &reduced,
        &tabu,
        &limits,
        ExecMode::Cumulative,
        Rate::from_milli(500),
        16,
    )
    .unwrap();

    let ga = GaConfig {
        generations: 40,
        seed: 1,
        ..GaConfig::default()
    };
    let outcome = run_admission(&problem, &ga).unwrap();
    println!(
        "genetic search: profit {} cents, admitted {:?}, rejected {:?}",
        outcome.profit.cents_rounded(),
        outcome.admitted,
        outcome.rejected
    );
    for (r, k) in &outcome.assignment {
        println!("  {r} -> {k}");
    }
    println!("\nfitness trace (best / population mean, cents):");
    let n = outcome.trace.len();
    for (g, stats) in outcome.trace.iter().enumerate() {
        if g < 3 || g + 3 >= n {
            println!(
                "  gen {g:>2}: {:>6} / {:>6}",
                stats.best_millicents / 1000,
                stats.mean_millicents / 1000
            );
        } else if g == 3 {
            println!("  ...");
        }
    }

    let truth = brute_force_admission(&problem).unwrap();
    println!(
        "\nexhaustive oracle: profit {} cents, admitted {:?}",
        truth.profit.cents_rounded(),
        truth.admitted
    );
    let normalized = if truth.profit == Money::ZERO {
        1.0
    } else {
        outcome.profit.millicents() as f64 / truth.profit.millicents() as f64
    };
    println!("normalized best: {normalized:.4}");
}
