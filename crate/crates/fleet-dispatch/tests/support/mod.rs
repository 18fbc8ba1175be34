//! Shared fixtures and independent reference implementations for the
//! integration suites. The oracles here re-derive answers from scratch:
//! they enumerate candidate routes exhaustively, settle stop times with
//! their own earliest-arrival walk, and accept or reject candidates with
//! the independent schedule validator, never calling the production
//! solvers.

use fleet_dispatch::domain::{
    Request, RequestId, RequestState, Schedule, Stop, TimeWindow, Vehicle, VehicleId,
};
use fleet_dispatch::network::{EdgeAttrs, ReducedNetwork, RoadNetwork, VertexId};
use fleet_dispatch::units::{Distance, Money, TimeDelta, TimePoint};
use fleet_dispatch::validate::validate_schedule;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(n: u64) -> VertexId {
    VertexId(n)
}

/// Connected random network: a cycle through every vertex plus random
/// chords. Edge times are drawn independently of costs, so cheapest routes
/// are often slow and reduced travel times violate the triangle inequality.
pub fn random_network(rng: &mut ChaCha8Rng, vertices: u64, stations: usize) -> RoadNetwork {
    assert!(vertices >= 2);
    let mut order: Vec<u64> = (0..vertices).collect();
    order.shuffle(rng);
    let mut pairs: BTreeSet<(u64, u64)> = BTreeSet::new();
    for i in 0..order.len() {
        let a = order[i];
        let b = order[(i + 1) % order.len()];
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let chords = vertices / 2;
    for _ in 0..chords {
        let a = rng.gen_range(0..vertices);
        let b = rng.gen_range(0..vertices);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let mut edges = Vec::new();
    for (a, b) in pairs {
        let attrs = EdgeAttrs {
            cost: Distance::from_millimiles(rng.gen_range(500..3000)),
            time: TimeDelta::from_millis(rng.gen_range(30_000..240_000)),
        };
        edges.push((v(a), v(b), attrs));
        edges.push((v(b), v(a), attrs));
    }
    let mut station_pool: Vec<u64> = (0..vertices).collect();
    station_pool.shuffle(rng);
    let stations = station_pool[..stations.min(station_pool.len())]
        .iter()
        .map(|&s| v(s));
    RoadNetwork::new((0..vertices).map(v), edges, stations).unwrap()
}

pub fn random_vehicle(rng: &mut ChaCha8Rng, id: u64, net: &RoadNetwork) -> Vehicle {
    let verts: Vec<VertexId> = net.vertices().iter().copied().collect();
    let at = verts[rng.gen_range(0..verts.len())];
    Vehicle::idle(
        VehicleId(id),
        at,
        TimeDelta::from_seconds(f64::from(rng.gen_range(5400..10800))),
        rng.gen_range(3..=5),
    )
}

/// A request with a reachable window and a ride budget tied to its direct
/// travel time.
pub fn random_request(rng: &mut ChaCha8Rng, id: u64, net: &RoadNetwork) -> Request {
    let verts: Vec<VertexId> = net.vertices().iter().copied().collect();
    let pickup = verts[rng.gen_range(0..verts.len())];
    let dropoff = loop {
        let d = verts[rng.gen_range(0..verts.len())];
        if d != pickup {
            break d;
        }
    };
    let direct = net
        .shortest_path(pickup, dropoff)
        .unwrap()
        .expect("network is connected");
    let open = TimePoint::from_millis(rng.gen_range(0..900_000));
    let width = TimeDelta::from_millis(rng.gen_range(900_000..2_400_000));
    Request {
        id: RequestId(id),
        pickup,
        dropoff,
        max_ride: TimeDelta::from_millis(direct.time.millis() * rng.gen_range(15..30) / 10),
        window: TimeWindow {
            earliest: Some(open),
            latest: Some(open + width),
        },
        seats: rng.gen_range(1..=3),
        fare: Money::from_cents(rng.gen_range(200..1500)),
        state: RequestState::New,
        assigned_vehicle: None,
        compensated: false,
    }
}

/// Five three-vertex clusters on a ring of long expensive hops, one vehicle
/// and one refuel station per cluster, and each request confined to its own
/// cluster. Fares are calibrated so serving a request with its cluster's
/// vehicle earns a margin smaller than one ring hop's fuel: the profitable
/// assignment is unique, and every cross-cluster admit loses money. Service
/// windows close before anything two or more hops away can arrive, so the
/// tabu lists prune the far fleet and leave each request a handful of
/// candidate vehicles.
pub fn clustered_case(
    seed: u64,
    n_requests: u64,
) -> (RoadNetwork, BTreeMap<VehicleId, Vehicle>, BTreeMap<RequestId, Request>) {
    assert!(n_requests <= 5);
    let rng = &mut rng(seed);
    let clusters = 5u64;
    let mut edges = Vec::new();
    let mut both = |a: u64, b: u64, cost_mmi: i64, time_s: i64| {
        let attrs = EdgeAttrs {
            cost: Distance::from_millimiles(cost_mmi),
            time: TimeDelta::from_millis(time_s * 1000),
        };
        edges.push((v(a), v(b), attrs));
        edges.push((v(b), v(a), attrs));
    };
    for c in 0..clusters {
        let base = 3 * c;
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            both(
                base + a,
                base + b,
                rng.gen_range(250..=500),
                rng.gen_range(60..=120),
            );
        }
    }
    for c in 0..clusters {
        both(
            3 * c + 2,
            3 * ((c + 1) % clusters),
            rng.gen_range(8000..=12000),
            rng.gen_range(600..=900),
        );
    }
    let network = RoadNetwork::new(
        (0..3 * clusters).map(v),
        edges,
        (0..clusters).map(|c| v(3 * c + 2)),
    )
    .unwrap();
    let rn = network.reduce(network.vertices()).unwrap();

    let vehicles: BTreeMap<VehicleId, Vehicle> = (0..clusters)
        .map(|c| {
            let k = Vehicle::idle(
                VehicleId(c + 1),
                v(3 * c),
                TimeDelta::from_seconds(14_400.0),
                4,
            );
            (k.id, k)
        })
        .collect();

    let mut homes: Vec<u64> = (0..clusters).collect();
    homes.shuffle(rng);
    let pool: BTreeMap<RequestId, Request> = (0..n_requests)
        .map(|i| {
            let c = homes[i as usize];
            let mut members = [3 * c, 3 * c + 1, 3 * c + 2];
            members.shuffle(rng);
            let (pickup, dropoff) = (v(members[0]), v(members[1]));
            let direct = leg_between(&rn, pickup, dropoff);
            let local = leg_between(&rn, v(3 * c), pickup).cost
                + direct.cost
                + network
                    .refuel_stations()
                    .iter()
                    .map(|&s| leg_between(&rn, dropoff, s).cost)
                    .min()
                    .unwrap();
            let margin = rng.gen_range(40..=100);
            let q = Request {
                id: RequestId(i + 1),
                pickup,
                dropoff,
                max_ride: TimeDelta::from_millis(direct.time.millis() * 20),
                window: TimeWindow {
                    earliest: Some(TimePoint::ORIGIN),
                    latest: Some(TimePoint::from_seconds(1150.0)),
                },
                seats: rng.gen_range(1..=2),
                fare: Money::from_cents(2 * (local.fuel_cost(16).cents_rounded() + margin)),
                state: RequestState::New,
                assigned_vehicle: None,
                compensated: false,
            };
            (q.id, q)
        })
        .collect();
    (network, vehicles, pool)
}

fn leg_between(rn: &ReducedNetwork, from: VertexId, to: VertexId) -> EdgeAttrs {
    if from == to {
        EdgeAttrs {
            cost: Distance::ZERO,
            time: TimeDelta::ZERO,
        }
    } else {
        rn.leg(from, to).expect("key vertices are fully connected")
    }
}

/// One pickup or dropoff in a candidate route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Pick(RequestId),
    Drop(RequestId),
}

/// Settles a candidate event order into a full schedule using an
/// independent earliest-arrival walk: drive each leg, wait for a pickup's
/// window to open, leave immediately otherwise, and finish at `station`.
/// Returns the schedule without judging feasibility; the validator decides.
pub fn settle_candidate(
    vehicle: &Vehicle,
    reqs: &BTreeMap<RequestId, Request>,
    order: &[Event],
    station: VertexId,
    rn: &ReducedNetwork,
) -> Schedule {
    let mut stops = vec![Stop {
        vertex: vehicle.avail_vertex,
        time: TimePoint::ORIGIN + vehicle.avail_after,
        occupancy_after: 0,
        board: Vec::new(),
        alight: Vec::new(),
    }];
    let mut cost = Distance::ZERO;
    let mut occupancy = 0u32;
    for &event in order {
        let prev = stops.last().unwrap();
        let (vertex, board, alight) = match event {
            Event::Pick(r) => (reqs[&r].pickup, vec![r], Vec::new()),
            Event::Drop(r) => (reqs[&r].dropoff, Vec::new(), vec![r]),
        };
        let leg = leg_between(rn, prev.vertex, vertex);
        let mut time = prev.time + leg.time;
        if let Event::Pick(r) = event {
            if let Some(open) = reqs[&r].window.earliest {
                time = time.max(open);
            }
        }
        match event {
            Event::Pick(r) => occupancy += reqs[&r].seats,
            Event::Drop(r) => occupancy = occupancy.saturating_sub(reqs[&r].seats),
        }
        cost += leg.cost;
        stops.push(Stop {
            vertex,
            time,
            occupancy_after: occupancy,
            board,
            alight,
        });
    }
    let prev = stops.last().unwrap();
    let leg = leg_between(rn, prev.vertex, station);
    let refuel = Stop {
        vertex: station,
        time: prev.time + leg.time,
        occupancy_after: occupancy,
        board: Vec::new(),
        alight: Vec::new(),
    };
    cost += leg.cost;
    stops.push(refuel);
    Schedule {
        vehicle: vehicle.id,
        stops,
        end_station: Some(station),
        cost,
    }
}

/// Every interleaving of the requests' pickup/dropoff events with pickups
/// before dropoffs.
pub fn event_orders(ids: &[RequestId]) -> Vec<Vec<Event>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut remaining_picks: BTreeSet<RequestId> = ids.iter().copied().collect();
    let mut aboard: BTreeSet<RequestId> = BTreeSet::new();
    fn recurse(
        current: &mut Vec<Event>,
        remaining_picks: &mut BTreeSet<RequestId>,
        aboard: &mut BTreeSet<RequestId>,
        total: usize,
        out: &mut Vec<Vec<Event>>,
    ) {
        if current.len() == total {
            out.push(current.clone());
            return;
        }
        let picks: Vec<RequestId> = remaining_picks.iter().copied().collect();
        for r in picks {
            remaining_picks.remove(&r);
            aboard.insert(r);
            current.push(Event::Pick(r));
            recurse(current, remaining_picks, aboard, total, out);
            current.pop();
            aboard.remove(&r);
            remaining_picks.insert(r);
        }
        let riders: Vec<RequestId> = aboard.iter().copied().collect();
        for r in riders {
            aboard.remove(&r);
            current.push(Event::Drop(r));
            recurse(current, remaining_picks, aboard, total, out);
            current.pop();
            aboard.insert(r);
        }
    }
    recurse(
        &mut current,
        &mut remaining_picks,
        &mut aboard,
        ids.len() * 2,
        &mut out,
    );
    out
}

/// Unpruned single-vehicle optimum: tries every event order and every
/// terminal station, keeps candidates the independent validator accepts,
/// and returns the cheapest. `None` when nothing passes.
pub fn enumerate_vehicle_best(
    vehicle: &Vehicle,
    reqs: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
) -> Option<Schedule> {
    if reqs.is_empty() {
        return Some(Schedule::empty(vehicle.id));
    }
    let ids: Vec<RequestId> = reqs.keys().copied().collect();
    let stations: Vec<VertexId> = rn.refuel_stations().iter().copied().collect();
    let mut best: Option<Schedule> = None;
    for order in event_orders(&ids) {
        for &station in &stations {
            let candidate = settle_candidate(vehicle, reqs, &order, station, rn);
            if !validate_schedule(&candidate, vehicle, reqs, rn).is_empty() {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => candidate.cost < b.cost,
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Monolithic fleet optimum: enumerates every request-to-vehicle map and,
/// for each, every combination of per-vehicle event orders and stations as
/// one joint candidate, summing the validated candidates' costs. This never
/// decomposes: the minimum is taken over whole joint routings.
pub fn joint_fleet_best(
    pool: &BTreeMap<RequestId, Request>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    rn: &ReducedNetwork,
) -> Option<Distance> {
    let request_ids: Vec<RequestId> = pool.keys().copied().collect();
    let vehicle_ids: Vec<VehicleId> = vehicles.keys().copied().collect();
    if request_ids.is_empty() {
        return Some(Distance::ZERO);
    }
    if vehicle_ids.is_empty() {
        return None;
    }
    let stations: Vec<VertexId> = rn.refuel_stations().iter().copied().collect();
    let mut best: Option<Distance> = None;
    let mut choice = vec![0usize; request_ids.len()];
    loop {
        // The candidate routing for this assignment: per vehicle, every
        // event order and station, all cross-combined.
        let mut groups: BTreeMap<VehicleId, Vec<RequestId>> =
            vehicle_ids.iter().map(|&k| (k, Vec::new())).collect();
        for (slot, &c) in choice.iter().enumerate() {
            groups
                .get_mut(&vehicle_ids[c])
                .unwrap()
                .push(request_ids[slot]);
        }
        let mut per_vehicle: Vec<Vec<Distance>> = Vec::new();
        let mut all_ok = true;
        for (&k, members) in &groups {
            if members.is_empty() {
                per_vehicle.push(vec![Distance::ZERO]);
                continue;
            }
            let reqs: BTreeMap<RequestId, Request> =
                members.iter().map(|r| (*r, pool[r].clone())).collect();
            let vehicle = &vehicles[&k];
            let mut costs = Vec::new();
            for order in event_orders(members) {
                for &station in &stations {
                    let cand = settle_candidate(vehicle, &reqs, &order, station, rn);
                    if validate_schedule(&cand, vehicle, &reqs, rn).is_empty() {
                        costs.push(cand.cost);
                    }
                }
            }
            if costs.is_empty() {
                all_ok = false;
                break;
            }
            per_vehicle.push(costs);
        }
        if all_ok {
            // Walk the full cross product of the vehicles' candidate routes.
            let mut idx = vec![0usize; per_vehicle.len()];
            loop {
                let total: Distance = idx
                    .iter()
                    .zip(&per_vehicle)
                    .map(|(&i, costs)| costs[i])
                    .sum();
                best = Some(match best {
                    None => total,
                    Some(b) => b.min(total),
                });
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < per_vehicle[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
        }
        // Next assignment in odometer order.
        let mut slot = 0;
        loop {
            if slot == choice.len() {
                return best;
            }
            choice[slot] += 1;
            if choice[slot] < vehicle_ids.len() {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }
}

/// Validates `schedule` against exactly the requests it serves, drawn from
/// `pool`.
pub fn assert_schedule_clean(
    schedule: &Schedule,
    vehicle: &Vehicle,
    pool: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
    context: &str,
) {
    let touched = schedule.touched_requests();
    let served: BTreeMap<RequestId, Request> = pool
        .iter()
        .filter(|(id, _)| touched.contains(id))
        .map(|(id, r)| (*id, r.clone()))
        .collect();
    let violations = validate_schedule(schedule, vehicle, &served, rn);
    assert!(
        violations.is_empty(),
        "{context}: schedule for {} violates invariants: {violations:?}",
        vehicle.id
    );
}
