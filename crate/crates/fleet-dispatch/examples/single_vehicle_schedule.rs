//! Routes one vehicle through a group of assigned requests: the solver
//! searches pickup/dropoff orderings and returns the cheapest stop sequence
//! that honors service windows, ride budgets, seat capacity, and the
//! operation limit, ending with a refuel stop at a terminal station.
//!
//! Run with: cargo run --example single_vehicle_schedule

use fleet_dispatch::domain::{
    Request, RequestId, RequestState, Schedule, TimeWindow, Vehicle, VehicleId,
};
use fleet_dispatch::network::{EdgeAttrs, RoadNetwork, VertexId};
use fleet_dispatch::units::{Distance, Money, TimeDelta, TimePoint};
use fleet_dispatch::vehicle_scheduler::{solve_vehicle, SearchLimits};
use std::collections::BTreeMap;

fn v(n: u64) -> VertexId {
    VertexId(n)
}

/// Line 0-1-2-3-4-5, one mile and one minute per hop, station at each end.
fn line() -> RoadNetwork {
    let mut edges = Vec::new();
    for a in 0..5u64 {
        let e = EdgeAttrs {
            cost: Distance::from_miles(1.0),
            time: TimeDelta::from_seconds(60.0),
        };
        edges.push((v(a), v(a + 1), e));
        edges.push((v(a + 1), v(a), e));
    }
    RoadNetwork::new((0..6).map(v), edges, [v(0), v(5)]).unwrap()
}

fn request(id: u64, pickup: u64, dropoff: u64, open_secs: f64) -> Request {
    let open = TimePoint::from_seconds(open_secs);
    Request {
        id: RequestId(id),
        pickup: v(pickup),
        dropoff: v(dropoff),
        max_ride: TimeDelta::from_seconds(1800.0),
        window: TimeWindow {
            earliest: Some(open),
            latest: Some(open + TimeDelta::from_seconds(900.0)),
        },
        seats: 1,
        fare: Money::from_cents(700),
        state: RequestState::New,
        assigned_vehicle: None,
        compensated: false,
    }
}

fn print_schedule(s: &Schedule) {
    println!(
        "  cost {:.1} miles, ends refueling at {:?}",
        s.cost.miles(),
        s.end_station
    );
    for stop in &s.stops {
        let events: Vec<String> = stop
            .board
            .iter()
            .map(|r| format!("+{r}"))
            .chain(stop.alight.iter().map(|r| format!("-{r}")))
            .collect();
        println!(
            "  t={:>5.0} s  at {}  occupancy {}  {}",
            stop.time.seconds(),
            stop.vertex,
            stop.occupancy_after,
            events.join(" ")
        );
    }
}

fn main() {
    let network = line();
    let reduced = network.reduce(network.vertices()).unwrap();
    let limits = SearchLimits::default();
    let vehicle = Vehicle::idle(VehicleId(1), v(0), TimeDelta::from_seconds(7200.0), 2);

    // Two riders heading the same way pool onto the shared segment.
    let mut group: BTreeMap<RequestId, Request> = BTreeMap::new();
    group.insert(RequestId(1), request(1, 1, 4, 0.0));
    group.insert(RequestId(2), request(2, 2, 5, 0.0));
    let pooled = solve_vehicle(&vehicle, &group, &reduced, &limits)
        .unwrap()
        .expect("group is feasible");
    println!("pooled pair (pick 1, pick 2, drop 1, drop 2):");
    print_schedule(&pooled);

    // A late window delays service: the vehicle arrives early and waits, so
    // the pickup is served at the window start, not at arrival.
    let mut waiting: BTreeMap<RequestId, Request> = BTreeMap::new();
    waiting.insert(RequestId(3), request(3, 3, 5, 600.0));
    let waited = solve_vehicle(&vehicle, &waiting, &reduced, &limits)
        .unwrap()
        .expect("single request is feasible");
    println!("\nwindow opens at 600 s, arrival takes 180 s:");
    print_schedule(&waited);

    // Three simultaneous riders exceed the two seats: no ordering works
    // without violating someone's window, so the group is infeasible.
    let mut overload = group.clone();
    overload.insert(RequestId(4), request(4, 1, 5, 0.0));
    for r in overload.values_mut() {
        r.window.latest = Some(TimePoint::from_seconds(240.0));
    }
    let answer = solve_vehicle(&vehicle, &overload, &reduced, &limits).unwrap();
    println!(
        "\nthree tight riders on two seats feasible: {}",
        answer.is_some()
    );
}
