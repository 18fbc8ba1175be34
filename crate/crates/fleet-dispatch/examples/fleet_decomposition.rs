//! Splits a fixed request-to-vehicle assignment into independent
//! single-vehicle subproblems, solves them sequentially and with a worker
//! pool (identical answers), and compares the given assignment against the
//! exhaustive fleet optimum.
//!
//! Run with: cargo run --example fleet_decomposition

use fleet_dispatch::domain::{
    Request, RequestId, RequestState, TimeWindow, Vehicle, VehicleId,
};
use fleet_dispatch::fleet_scheduler::{
    brute_force_fleet, build_tabu_lists, solve_assignment, Assignment, ExecMode,
};
use fleet_dispatch::network::{EdgeAttrs, RoadNetwork, VertexId};
use fleet_dispatch::units::{Distance, Money, TimeDelta, TimePoint};
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

fn request(id: u64, pickup: u64, dropoff: u64) -> Request {
    Request {
        id: RequestId(id),
        pickup: v(pickup),
        dropoff: v(dropoff),
        max_ride: TimeDelta::from_seconds(1800.0),
        window: TimeWindow {
            earliest: Some(TimePoint::ORIGIN),
            latest: Some(TimePoint::from_seconds(900.0)),
        },
        seats: 1,
        fare: Money::from_cents(600),
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

    let pool: BTreeMap<RequestId, Request> = [
        request(1, 1, 3),
        request(2, 2, 4),
        request(3, 6, 4),
        request(4, 5, 3),
    ]
    .into_iter()
    .map(|r| (r.id, r))
    .collect();

    // A deliberately crossed pairing: each vehicle drives to the other side.
    let crossed: Assignment = [
        (RequestId(1), VehicleId(2)),
        (RequestId(2), VehicleId(2)),
        (RequestId(3), VehicleId(1)),
        (RequestId(4), VehicleId(1)),
    ]
    .into();

    for (label, mode) in [
        ("sequential", ExecMode::Cumulative),
        ("worker pool", ExecMode::Distributed { workers: 2 }),
    ] {
        let result = solve_assignment(&crossed, &vehicles, &pool, &reduced, &limits, mode)
            .unwrap()
            .expect("crossed assignment is feasible");
        println!(
            "{label}: total cost {:.1} miles over {} vehicles",
            result.total_cost.miles(),
            result.schedules.len()
        );
    }

    // The exhaustive oracle tries every pairing; here it halves the cost by
    // consolidating the whole pool onto one vehicle's sweep.
    let (best, result) = brute_force_fleet(&pool, &vehicles, &reduced, &limits)
        .unwrap()
        .expect("some assignment is feasible");
    println!("\noptimal assignment (cost {:.1} miles):", result.total_cost.miles());
    for (r, k) in &best {
        println!("  {r} -> {k}");
    }

    // Tabu lists name the vehicles that cannot serve each request at all;
    // on this instance every pairing is individually workable.
    let tabu = build_tabu_lists(&pool, &vehicles, &reduced, &limits).unwrap();
    let blocked: usize = tabu.values().map(|t| t.len()).sum();
    println!("\nblocked request-vehicle pairings: {blocked}");
}
