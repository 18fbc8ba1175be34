//! Independent schedule validation.
//!
//! [`validate_schedule`] re-derives every constraint a schedule must satisfy
//! directly from the vehicle, the requests it serves, and the reduced
//! network, without reusing any scheduling logic. It returns every violation
//! found, so callers can assert emptiness or report precisely what broke.

use crate::domain::{Request, RequestId, Schedule, Vehicle};
use crate::network::{ReducedNetwork, VertexId};
use crate::units::{Distance, TimePoint};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Board,
    Alight,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::Board => write!(f, "board"),
            EventKind::Alight => write!(f, "alight"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("schedule is empty but must serve {0:?}")]
    EmptyButAssigned(Vec<RequestId>),
    #[error("schedule for vehicle {expected} reports vehicle {found}")]
    WrongVehicle { expected: crate::domain::VehicleId, found: crate::domain::VehicleId },
    #[error("stop {index} vertex {vertex} is not a key vertex")]
    UnknownVertex { index: usize, vertex: VertexId },
    #[error("first stop is at {found}, vehicle becomes available at {expected}")]
    StartVertexMismatch { expected: VertexId, found: VertexId },
    #[error("first stop at {found_ms}ms precedes availability at {avail_ms}ms")]
    StartBeforeAvailable { avail_ms: i64, found_ms: i64 },
    #[error("no leg from {from} to {to} (stops {index}..{})", index + 1)]
    MissingLeg { index: usize, from: VertexId, to: VertexId },
    #[error("stop {index} at {found_ms}ms arrives before {earliest_ms}ms leg arrival")]
    TimeRegression { index: usize, earliest_ms: i64, found_ms: i64 },
    #[error("stop {index} at {time_ms}ms exceeds the {limit_ms}ms operation limit")]
    AfterOpLimit { index: usize, time_ms: i64, limit_ms: i64 },
    #[error("{request}: pickup at {time_ms}ms outside its window")]
    WindowViolated { request: RequestId, time_ms: i64 },
    #[error("{request}: {kind} stop at {found}, request says {expected}")]
    WrongVertex { request: RequestId, kind: EventKind, expected: VertexId, found: VertexId },
    #[error("{request}: ride of {ride_ms}ms exceeds the {limit_ms}ms budget")]
    RideTooLong { request: RequestId, ride_ms: i64, limit_ms: i64 },
    #[error("{request}: no {kind} stop")]
    MissingEvent { request: RequestId, kind: EventKind },
    #[error("{request}: more than one {kind} stop")]
    DuplicateEvent { request: RequestId, kind: EventKind },
    #[error("{request}: event for a request this schedule does not serve")]
    ForeignEvent { request: RequestId },
    #[error("{request}: board stop for an already on-board request")]
    BoardedInService { request: RequestId },
    #[error("{request}: alight before board")]
    AlightBeforeBoard { request: RequestId },
    #[error("stop {index} records occupancy {recorded}, bookkeeping gives {expected}")]
    OccupancyMismatch { index: usize, expected: i64, recorded: u32 },
    #[error("stop {index} occupancy {occupancy} outside [0, {capacity}]")]
    OccupancyOutOfBounds { index: usize, occupancy: i64, capacity: u32 },
    #[error("leg costs sum to {expected} but schedule records {recorded}")]
    CostMismatch { expected: Distance, recorded: Distance },
    #[error("last stop {vertex} is not a refuel station")]
    TerminalNotStation { vertex: VertexId },
    #[error("terminal stop has board or alight events")]
    TerminalHasEvents,
    #[error("end_station {recorded:?} does not match final stop {found:?}")]
    EndStationMismatch { recorded: Option<VertexId>, found: Option<VertexId> },
}

/// Checks `schedule` against the vehicle it belongs to, the exact set of
/// requests it must serve, and the reduced network it drives on. An empty
/// result means the schedule is valid.
pub fn validate_schedule(
    schedule: &Schedule,
    vehicle: &Vehicle,
    reqs: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if schedule.vehicle != vehicle.id {
        out.push(Violation::WrongVehicle {
            expected: vehicle.id,
            found: schedule.vehicle,
        });
    }
    if schedule.is_empty() {
        if !reqs.is_empty() {
            out.push(Violation::EmptyButAssigned(reqs.keys().copied().collect()));
        }
        if schedule.end_station.is_some() {
            out.push(Violation::EndStationMismatch {
                recorded: schedule.end_station,
                found: None,
            });
        }
        if schedule.cost != Distance::ZERO {
            out.push(Violation::CostMismatch {
                expected: Distance::ZERO,
                recorded: schedule.cost,
            });
        }
        return out;
    }
    let stops = &schedule.stops;
    for (i, stop) in stops.iter().enumerate() {
        if !rn.contains(stop.vertex) {
            out.push(Violation::UnknownVertex {
                index: i,
                vertex: stop.vertex,
            });
        }
    }
    if !out.is_empty() {
        // Leg lookups below would only cascade from unknown vertices.
        return out;
    }

    let avail = TimePoint::ORIGIN + vehicle.avail_after;
    if stops[0].vertex != vehicle.avail_vertex {
        out.push(Violation::StartVertexMismatch {
            expected: vehicle.avail_vertex,
            found: stops[0].vertex,
        });
    }
    if stops[0].time < avail {
        out.push(Violation::StartBeforeAvailable {
            avail_ms: vehicle.avail_after.millis(),
            found_ms: stops[0].time.since_origin().millis(),
        });
    }

    // Travel-time consistency and total cost. Stops may run later than the
    // leg arrival (slack is allowed) but never earlier.
    let mut cost = Distance::ZERO;
    for i in 0..stops.len() - 1 {
        let (from, to) = (stops[i].vertex, stops[i + 1].vertex);
        match rn.leg(from, to) {
            None => out.push(Violation::MissingLeg { index: i, from, to }),
            Some(leg) => {
                cost += leg.cost;
                let earliest = stops[i].time + leg.time;
                if stops[i + 1].time < earliest {
                    out.push(Violation::TimeRegression {
                        index: i + 1,
                        earliest_ms: earliest.since_origin().millis(),
                        found_ms: stops[i + 1].time.since_origin().millis(),
                    });
                }
            }
        }
    }
    if cost != schedule.cost {
        out.push(Violation::CostMismatch {
            expected: cost,
            recorded: schedule.cost,
        });
    }

    let limit = TimePoint::ORIGIN + vehicle.op_limit;
    for (i, stop) in stops.iter().enumerate() {
        if stop.time > limit {
            out.push(Violation::AfterOpLimit {
                index: i,
                time_ms: stop.time.since_origin().millis(),
                limit_ms: vehicle.op_limit.millis(),
            });
        }
    }

    // Event bookkeeping: each served request boards exactly once (unless
    // already on board) and alights exactly once, at its own vertices.
    let mut board_at: BTreeMap<RequestId, (usize, TimePoint)> = BTreeMap::new();
    let mut alight_at: BTreeMap<RequestId, (usize, TimePoint)> = BTreeMap::new();
    for (i, stop) in stops.iter().enumerate() {
        for &r in &stop.board {
            match reqs.get(&r) {
                None => out.push(Violation::ForeignEvent { request: r }),
                Some(req) => {
                    if req.is_in_service() {
                        out.push(Violation::BoardedInService { request: r });
                    }
                    if stop.vertex != req.pickup {
                        out.push(Violation::WrongVertex {
                            request: r,
                            kind: EventKind::Board,
                            expected: req.pickup,
                            found: stop.vertex,
                        });
                    }
                    if !req.window.contains(stop.time) {
                        out.push(Violation::WindowViolated {
                            request: r,
                            time_ms: stop.time.since_origin().millis(),
                        });
                    }
                }
            }
            if board_at.insert(r, (i, stop.time)).is_some() {
                out.push(Violation::DuplicateEvent {
                    request: r,
                    kind: EventKind::Board,
                });
            }
        }
        for &r in &stop.alight {
            match reqs.get(&r) {
                None => out.push(Violation::ForeignEvent { request: r }),
                Some(req) => {
                    if stop.vertex != req.dropoff {
                        out.push(Violation::WrongVertex {
                            request: r,
                            kind: EventKind::Alight,
                            expected: req.dropoff,
                            found: stop.vertex,
                        });
                    }
                }
            }
            if alight_at.insert(r, (i, stop.time)).is_some() {
                out.push(Violation::DuplicateEvent {
                    request: r,
                    kind: EventKind::Alight,
                });
            }
        }
    }
    for (id, req) in reqs {
        let boarded = board_at.get(id).copied();
        let alighted = alight_at.get(id).copied();
        if req.is_in_service() {
            // Ride budget counts from the start of this schedule.
            match alighted {
                None => out.push(Violation::MissingEvent {
                    request: *id,
                    kind: EventKind::Alight,
                }),
                Some((_, t)) => {
                    let ride = t - stops[0].time;
                    if ride > req.max_ride && !req.compensated {
                        out.push(Violation::RideTooLong {
                            request: *id,
                            ride_ms: ride.millis(),
                            limit_ms: req.max_ride.millis(),
                        });
                    }
                }
            }
            continue;
        }
        match (boarded, alighted) {
            (None, _) => out.push(Violation::MissingEvent {
                request: *id,
                kind: EventKind::Board,
            }),
            (_, None) => out.push(Violation::MissingEvent {
                request: *id,
                kind: EventKind::Alight,
            }),
            (Some((bi, bt)), Some((ai, at))) => {
                if ai <= bi {
                    out.push(Violation::AlightBeforeBoard { request: *id });
                } else {
                    let ride = at - bt;
                    if ride > req.max_ride && !req.compensated {
                        out.push(Violation::RideTooLong {
                            request: *id,
                            ride_ms: ride.millis(),
                            limit_ms: req.max_ride.millis(),
                        });
                    }
                }
            }
        }
    }

    // Occupancy bookkeeping from the on-board load at the first stop.
    let mut occ: i64 = reqs
        .values()
        .filter(|r| r.is_in_service())
        .map(|r| r.seats as i64)
        .sum();
    for (i, stop) in stops.iter().enumerate() {
        for r in &stop.alight {
            if let Some(req) = reqs.get(r) {
                occ -= req.seats as i64;
            }
        }
        for r in &stop.board {
            if let Some(req) = reqs.get(r) {
                occ += req.seats as i64;
            }
        }
        if occ < 0 || occ > vehicle.capacity as i64 {
            out.push(Violation::OccupancyOutOfBounds {
                index: i,
                occupancy: occ,
                capacity: vehicle.capacity,
            });
        }
        if occ != stop.occupancy_after as i64 {
            out.push(Violation::OccupancyMismatch {
                index: i,
                expected: occ,
                recorded: stop.occupancy_after,
            });
        }
    }

    // Terminal refuel stop.
    let last = stops.last().unwrap();
    if !rn.refuel_stations().contains(&last.vertex) {
        out.push(Violation::TerminalNotStation { vertex: last.vertex });
    }
    if !last.board.is_empty() || !last.alight.is_empty() {
        out.push(Violation::TerminalHasEvents);
    }
    if schedule.end_station != Some(last.vertex) {
        out.push(Violation::EndStationMismatch {
            recorded: schedule.end_station,
            found: Some(last.vertex),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{RequestState, Stop, TimeWindow, VehicleId};
    use crate::network::{EdgeAttrs, RoadNetwork};
    use crate::units::{Money, TimeDelta};
    use crate::vehicle_scheduler::{solve_vehicle, SearchLimits};

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn line_network() -> RoadNetwork {
        let mut edges = Vec::new();
        for a in 0..3u64 {
            let attrs = EdgeAttrs {
                cost: Distance::from_miles(1.0),
                time: TimeDelta::from_seconds(60.0),
            };
            edges.push((v(a), v(a + 1), attrs));
            edges.push((v(a + 1), v(a), attrs));
        }
        RoadNetwork::new((0..4).map(v), edges, [v(3)]).unwrap()
    }

    fn fixture() -> (Vehicle, BTreeMap<RequestId, Request>, ReducedNetwork) {
        let net = line_network();
        let rn = net.reduce(&net.vertices().clone()).unwrap();
        let vehicle = Vehicle::idle(
            VehicleId(1),
            v(0),
            TimeDelta::from_seconds(100_000.0),
            5,
        );
        let r = Request {
            id: RequestId(1),
            pickup: v(1),
            dropoff: v(2),
            max_ride: TimeDelta::from_seconds(600.0),
            window: TimeWindow::new(
                TimePoint::from_seconds(0.0),
                TimePoint::from_seconds(600.0),
            )
            .unwrap(),
            seats: 2,
            fare: Money::from_cents(500),
            state: RequestState::New,
            assigned_vehicle: None,
            compensated: false,
        };
        (vehicle, [(r.id, r)].into_iter().collect(), rn)
    }

    #[test]
    fn solver_output_passes_validation() {
        let (vehicle, reqs, rn) = fixture();
        let s = solve_vehicle(&vehicle, &reqs, &rn, &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert_eq!(validate_schedule(&s, &vehicle, &reqs, &rn), Vec::new());
    }

    #[test]
    fn empty_schedule_requires_empty_request_set() {
        let (vehicle, reqs, rn) = fixture();
        let s = Schedule::empty(vehicle.id);
        assert_eq!(validate_schedule(&s, &vehicle, &BTreeMap::new(), &rn), Vec::new());
        let vs = validate_schedule(&s, &vehicle, &reqs, &rn);
        assert!(matches!(vs[0], Violation::EmptyButAssigned(_)));
    }

    #[test]
    fn each_corruption_is_caught() {
        let (vehicle, reqs, rn) = fixture();
        let good = solve_vehicle(&vehicle, &reqs, &rn, &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert_eq!(good.key_route(), vec![v(0), v(1), v(2), v(3)]);

        let mut wrong_cost = good.clone();
        wrong_cost.cost += Distance::from_miles(1.0);
        assert!(validate_schedule(&wrong_cost, &vehicle, &reqs, &rn)
            .iter()
            .any(|x| matches!(x, Violation::CostMismatch { .. })));

        let mut early = good.clone();
        early.stops[2].time = early.stops[1].time;
        assert!(validate_schedule(&early, &vehicle, &reqs, &rn)
            .iter()
            .any(|x| matches!(x, Violation::TimeRegression { index: 2, .. })));

        let mut bad_occ = good.clone();
        bad_occ.stops[1].occupancy_after = 1;
        assert!(validate_schedule(&bad_occ, &vehicle, &reqs, &rn)
            .iter()
            .any(|x| matches!(x, Violation::OccupancyMismatch { index: 1, .. })));

        let mut no_alight = good.clone();
        no_alight.stops[2].alight.clear();
        let vs = validate_schedule(&no_alight, &vehicle, &reqs, &rn);
        assert!(vs
            .iter()
            .any(|x| matches!(x, Violation::MissingEvent { kind: EventKind::Alight, .. })));

        let mut bad_terminal = good.clone();
        bad_terminal.stops.pop();
        bad_terminal.cost = Distance::from_miles(2.0);
        bad_terminal.end_station = None;
        let vs = validate_schedule(&bad_terminal, &vehicle, &reqs, &rn);
        assert!(vs
            .iter()
            .any(|x| matches!(x, Violation::TerminalNotStation { .. })));

        let mut late = good.clone();
        for stop in &mut late.stops {
            stop.time = stop.time + TimeDelta::from_seconds(200_000.0);
        }
        assert!(validate_schedule(&late, &vehicle, &reqs, &rn)
            .iter()
            .any(|x| matches!(x, Violation::AfterOpLimit { .. })));
    }

    #[test]
    fn slack_after_a_removed_stop_is_accepted() {
        // Dropping an intermediate eventless stop leaves later stops with
        // times beyond the direct leg arrival; that slack must validate.
        let (vehicle, mut reqs, rn) = fixture();
        let r = reqs.get_mut(&RequestId(1)).unwrap();
        r.dropoff = v(1);
        r.pickup = v(0);
        r.window = TimeWindow::UNBOUNDED;
        let s = Schedule {
            vehicle: vehicle.id,
            stops: vec![
                Stop {
                    vertex: v(0),
                    time: TimePoint::from_seconds(0.0),
                    occupancy_after: 0,
                    board: vec![],
                    alight: vec![],
                },
                Stop {
                    vertex: v(0),
                    time: TimePoint::from_seconds(0.0),
                    occupancy_after: 2,
                    board: vec![RequestId(1)],
                    alight: vec![],
                },
                Stop {
                    vertex: v(1),
                    time: TimePoint::from_seconds(180.0),
                    occupancy_after: 0,
                    board: vec![],
                    alight: vec![RequestId(1)],
                },
                Stop {
                    vertex: v(3),
                    time: TimePoint::from_seconds(300.0),
                    occupancy_after: 0,
                    board: vec![],
                    alight: vec![],
                },
            ],
            end_station: Some(v(3)),
            cost: Distance::from_miles(3.0),
        };
        assert_eq!(validate_schedule(&s, &vehicle, &reqs, &rn), Vec::new());
    }
}
