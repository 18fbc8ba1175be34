//! Shows how a running system reacts to mid-horizon disruptions: a road
//! slowing down before pickup (the plan is cancelled and the request decided
//! afresh), the same slowdown with a passenger aboard (the promise is kept
//! and the rider flagged for compensation), and a passenger not showing up
//! (the timetable is shrunk around the hole).
//!
//! Run with: cargo run --example disruptions

use fleet_dispatch::admission::GaConfig;
use fleet_dispatch::domain::{
    Request, RequestId, RequestState, Schedule, TimeWindow, Vehicle, VehicleId,
};
use fleet_dispatch::fleet_scheduler::ExecMode;
use fleet_dispatch::network::{EdgeAttrs, RoadNetwork, VertexId};
use fleet_dispatch::simulator::{Scenario, SimConfig, SystemState};
use fleet_dispatch::units::{Distance, Money, Rate, TimeDelta, TimePoint};

fn v(n: u64) -> VertexId {
    VertexId(n)
}

fn scenario(vehicles: Vec<Vehicle>) -> Scenario {
    let mut edges = Vec::new();
    for a in 0..5u64 {
        let e = EdgeAttrs {
            cost: Distance::from_miles(1.0),
            time: TimeDelta::from_seconds(60.0),
        };
        edges.push((v(a), v(a + 1), e));
        edges.push((v(a + 1), v(a), e));
    }
    let network = RoadNetwork::new((0..6).map(v), edges, [v(0), v(5)]).unwrap();
    Scenario {
        network,
        vehicles,
        arrivals: Vec::new(),
        config: SimConfig {
            interval: TimeDelta::from_seconds(300.0),
            horizon: 3,
            fuel_cents_per_mile: 16,
            discount: Rate::from_milli(500),
            refuel_full: TimeDelta::from_seconds(7200.0),
            node_budget: 1_000_000,
            ga: GaConfig {
                generations: 12,
                ..GaConfig::default()
            },
        },
    }
}

fn request(id: u64, pickup: u64, dropoff: u64, open_secs: f64, seats: u32) -> Request {
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
        seats,
        fare: Money::from_cents(1200),
        state: RequestState::New,
        assigned_vehicle: None,
        compensated: false,
    }
}

fn print_stops(s: &Schedule) {
    for stop in &s.stops {
        let events: Vec<String> = stop
            .board
            .iter()
            .map(|r| format!("+{r}"))
            .chain(stop.alight.iter().map(|r| format!("-{r}")))
            .collect();
        println!(
            "    t={:>5.0} s  at {}  occupancy {}  {}",
            stop.time.seconds(),
            stop.vertex,
            stop.occupancy_after,
            events.join(" ")
        );
    }
}

fn main() {
    // --- Slowdown before pickup: the plan is torn up and redecided. ---
    let scn = scenario(vec![Vehicle::idle(
        VehicleId(1),
        v(1),
        TimeDelta::from_seconds(7200.0),
        5,
    )]);
    let cfg = scn.config;
    let mut state = SystemState::new(&scn).unwrap();
    state
        .run_interval(vec![request(1, 3, 5, 400.0, 1)], &cfg, ExecMode::Cumulative)
        .unwrap();
    println!(
        "committed: request 1 admitted, revenue {} cents",
        state.ledger.revenue.cents_rounded()
    );
    state
        .apply_traffic_update(v(2), v(3), TimeDelta::from_seconds(600.0), &cfg)
        .unwrap();
    let r1 = &state.requests[&RequestId(1)];
    println!(
        "road 2->3 slows before pickup: request back to {:?}, revenue {} cents, plan kept: {}",
        r1.state,
        state.ledger.revenue.cents_rounded(),
        state.committed_schedule(VehicleId(1)).is_some()
    );
    let report = state.run_interval(vec![], &cfg, ExecMode::Cumulative).unwrap();
    println!("next round re-admits: {:?}\n", report.admitted);

    // --- Slowdown with the passenger aboard: promise kept, rider flagged. ---
    let scn = scenario(vec![Vehicle::idle(
        VehicleId(1),
        v(0),
        TimeDelta::from_seconds(7200.0),
        5,
    )]);
    let mut state = SystemState::new(&scn).unwrap();
    state
        .run_interval(vec![request(2, 0, 5, 60.0, 1)], &cfg, ExecMode::Cumulative)
        .unwrap();
    println!(
        "request 2 is {:?} at the boundary",
        state.requests[&RequestId(2)].state
    );
    state
        .apply_traffic_update(v(4), v(5), TimeDelta::from_seconds(900.0), &cfg)
        .unwrap();
    let r2 = &state.requests[&RequestId(2)];
    println!(
        "road 4->5 slows mid-ride: schedule kept: {}, compensated: {}\n",
        state.committed_schedule(VehicleId(1)).is_some(),
        r2.compensated
    );

    // --- No-shows: seats free up, or the whole stop pair is cut out. ---
    let scn = scenario(vec![Vehicle::idle(
        VehicleId(1),
        v(1),
        TimeDelta::from_seconds(7200.0),
        5,
    )]);
    let mut state = SystemState::new(&scn).unwrap();
    state
        .run_interval(
            vec![request(3, 2, 4, 400.0, 4), request(4, 3, 5, 400.0, 1)],
            &cfg,
            ExecMode::Cumulative,
        )
        .unwrap();
    println!("committed timetable:");
    print_stops(&state.committed_schedule(VehicleId(1)).unwrap());

    state.apply_no_show(RequestId(3), 2, &cfg).unwrap();
    println!("two of request 3's four riders missing, times unchanged:");
    print_stops(&state.committed_schedule(VehicleId(1)).unwrap());

    state.apply_no_show(RequestId(4), 1, &cfg).unwrap();
    println!("request 4 fully absent, its stops cut and the rest resettled:");
    print_stops(&state.committed_schedule(VehicleId(1)).unwrap());
    println!(
        "request 4 closed as {:?}, fare retained: revenue {} cents",
        state.requests[&RequestId(4)].state,
        state.ledger.revenue.cents_rounded()
    );
}
