//! Core dispatch entities: trip requests, vehicles, and schedules.
//!
//! A request is a pickup/dropoff pair with a seat count, a fare, a maximum
//! ride time, and a service-start window. A vehicle is a capacity-bounded
//! unit with a next-available vertex, the time needed to reach it, and a
//! remaining operation-time budget. A schedule is the settled timetable a
//! vehicle commits to: ordered stops with service times, occupancy after each
//! stop, and a terminal refuel station.

use crate::network::VertexId;
use crate::units::{Distance, Money, TimeDelta, TimePoint};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Identifier of a trip request.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
#[repr(transparent)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Identifier of a vehicle.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
#[repr(transparent)]
pub struct VehicleId(pub u64);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

/// Lifecycle state of a request.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RequestState {
    /// Just submitted, not yet considered.
    New,
    /// Rejected in an earlier round but still serviceable; stays in the pool.
    CarriedOver,
    /// Admitted and scheduled, passenger not yet picked up. May still be
    /// reassigned to another vehicle.
    AssignedUnserved,
    /// Passenger on board. Pinned to its vehicle.
    InService,
    /// Dropped off.
    Completed,
    /// Closed without service (full no-show at pickup).
    CompletedUnserved,
    /// Permanently excluded: no vehicle can ever serve it.
    Rejected,
}

/// Service-start window. `None` bounds are unbounded (used for requests
/// already on board, whose service has started).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize,
)]
pub struct TimeWindow {
    pub earliest: Option<TimePoint>,
    pub latest: Option<TimePoint>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("window latest precedes earliest")]
    InvertedWindow,
    #[error("{0}: seat count must be positive")]
    ZeroSeats(RequestId),
    #[error("{0}: pickup equals dropoff")]
    DegenerateTrip(RequestId),
    #[error("{0}: split target capacity must be positive")]
    ZeroCapacity(RequestId),
    #[error("{0}: elapsed ride time {1} exhausts the maximum ride time {2}")]
    RideTimeExhausted(RequestId, TimeDelta, TimeDelta),
    #[error("{0}: expected state {1:?}, found {2:?}")]
    UnexpectedState(RequestId, RequestState, RequestState),
}

impl TimeWindow {
    pub const UNBOUNDED: TimeWindow = TimeWindow {
        earliest: None,
        latest: None,
    };

    pub fn new(earliest: TimePoint, latest: TimePoint) -> Result<Self, DomainError> {
        if latest < earliest {
            return Err(DomainError::InvertedWindow);
        }
        Ok(TimeWindow {
            earliest: Some(earliest),
            latest: Some(latest),
        })
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        self.earliest.map_or(true, |e| e <= t) && self.latest.map_or(true, |l| t <= l)
    }

    /// Shifts both bounds by `-offset` (rebasing absolute scenario times onto
    /// a planning instant).
    pub fn rebased(&self, offset: TimeDelta) -> TimeWindow {
        TimeWindow {
            earliest: self.earliest.map(|e| e - offset),
            latest: self.latest.map(|l| l - offset),
        }
    }
}

/// A trip request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub pickup: VertexId,
    pub dropoff: VertexId,
    /// Longest acceptable time between service start and dropoff.
    pub max_ride: TimeDelta,
    /// Window in which service must start.
    pub window: TimeWindow,
    pub seats: u32,
    pub fare: Money,
    pub state: RequestState,
    /// Holder when `AssignedUnserved` (last commitment, reassignable) or
    /// `InService` (pinned).
    pub assigned_vehicle: Option<VehicleId>,
    /// Set when a traffic disruption degraded the promised service while the
    /// passenger was on board; the ride budget no longer binds and the fare
    /// is compensated in reports.
    #[serde(default)]
    pub compensated: bool,
}

impl Request {
    pub fn is_in_service(&self) -> bool {
        self.state == RequestState::InService
    }

    /// Whether a new admission round must keep this request admitted.
    pub fn is_forced(&self) -> bool {
        matches!(
            self.state,
            RequestState::AssignedUnserved | RequestState::InService
        )
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.seats == 0 {
            return Err(DomainError::ZeroSeats(self.id));
        }
        if self.pickup == self.dropoff && !self.is_in_service() {
            return Err(DomainError::DegenerateTrip(self.id));
        }
        if let (Some(e), Some(l)) = (self.window.earliest, self.window.latest) {
            if l < e {
                return Err(DomainError::InvertedWindow);
            }
        }
        Ok(())
    }
}

/// A vehicle, described relative to a planning instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    /// Vertex where the vehicle is (or will next be) available.
    pub avail_vertex: VertexId,
    /// Time still needed to reach `avail_vertex`.
    pub avail_after: TimeDelta,
    /// Remaining operation time: every settled stop must occur within it.
    pub op_limit: TimeDelta,
    pub capacity: u32,
    /// Requests on board (service started, dropoff pending).
    pub in_service: BTreeSet<RequestId>,
    /// Requests committed but not yet picked up.
    pub assigned_unserved: BTreeSet<RequestId>,
}

impl Vehicle {
    pub fn idle(id: VehicleId, at: VertexId, op_limit: TimeDelta, capacity: u32) -> Self {
        Vehicle {
            id,
            avail_vertex: at,
            avail_after: TimeDelta::ZERO,
            op_limit,
            capacity,
            in_service: BTreeSet::new(),
            assigned_unserved: BTreeSet::new(),
        }
    }
}

/// One settled stop of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub vertex: VertexId,
    /// Settled service time: arrival, delayed to the window start for pickups.
    pub time: TimePoint,
    /// Occupancy after the stop's events.
    pub occupancy_after: u32,
    pub board: Vec<RequestId>,
    pub alight: Vec<RequestId>,
}

/// A vehicle's committed timetable over the reduced network. Empty when the
/// vehicle serves nothing (idle vehicles are never routed). A non-empty
/// schedule starts at the vehicle's available vertex and ends with exactly one
/// refuel stop at a terminal station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub vehicle: VehicleId,
    pub stops: Vec<Stop>,
    pub end_station: Option<VertexId>,
    /// Sum of leg costs along the stops.
    pub cost: Distance,
}

impl Schedule {
    pub fn empty(vehicle: VehicleId) -> Self {
        Schedule {
            vehicle,
            stops: Vec::new(),
            end_station: None,
            cost: Distance::ZERO,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    /// Key-vertex route visited by the schedule, in stop order.
    pub fn key_route(&self) -> Vec<VertexId> {
        self.stops.iter().map(|s| s.vertex).collect()
    }

    /// Ids of all requests boarded or alighted by this schedule.
    pub fn touched_requests(&self) -> BTreeSet<RequestId> {
        self.stops
            .iter()
            .flat_map(|s| s.board.iter().chain(s.alight.iter()).copied())
            .collect()
    }
}

/// Splits a request whose seat demand exceeds the largest vehicle capacity
/// into parts of at most `capacity` seats. The fare is apportioned
/// proportionally to seats, rounded down to whole cents per part, with the
/// leftover cents going to the first part so the total is conserved.
///
/// Part 0 keeps the original id; part `i` gets id·1000+i. Callers that merge
/// split parts into a pool must check id uniqueness.
pub fn split_oversized(r: &Request, capacity: u32) -> Result<Vec<Request>, DomainError> {
    if capacity == 0 {
        return Err(DomainError::ZeroCapacity(r.id));
    }
    r.validate()?;
    if r.seats <= capacity {
        return Ok(vec![r.clone()]);
    }
    let mut sizes = Vec::new();
    let mut left = r.seats;
    while left > 0 {
        let take = left.min(capacity);
        sizes.push(take);
        left -= take;
    }
    let fare_cents = r.fare.millicents() / 1000;
    let mut parts: Vec<Request> = Vec::with_capacity(sizes.len());
    let mut apportioned = 0i64;
    for (idx, &seats) in sizes.iter().enumerate() {
        let share = fare_cents * seats as i64 / r.seats as i64;
        apportioned += share;
        let id = if idx == 0 {
            r.id
        } else {
            RequestId(r.id.0 * 1000 + idx as u64)
        };
        parts.push(Request {
            id,
            seats,
            fare: Money::from_cents(share),
            ..r.clone()
        });
    }
    let leftover = fare_cents - apportioned;
    parts[0].fare += Money::from_cents(leftover);
    Ok(parts)
}

/// Rewrites an on-board request for the next planning round: service
/// continues from the vehicle's next available vertex, the remaining ride
/// budget shrinks by the time already ridden, and the start window no longer
/// applies (service already started).
pub fn normalize_in_service(
    r: &Request,
    vehicle: &Vehicle,
    elapsed: TimeDelta,
) -> Result<Request, DomainError> {
    if r.state != RequestState::InService {
        return Err(DomainError::UnexpectedState(
            r.id,
            RequestState::InService,
            r.state,
        ));
    }
    if elapsed > r.max_ride && !r.compensated {
        return Err(DomainError::RideTimeExhausted(r.id, elapsed, r.max_ride));
    }
    Ok(Request {
        pickup: vehicle.avail_vertex,
        max_ride: (r.max_ride - elapsed).max(TimeDelta::ZERO),
        window: TimeWindow::UNBOUNDED,
        assigned_vehicle: Some(vehicle.id),
        ..r.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::VertexId;

    fn request(id: u64, seats: u32, fare_cents: i64) -> Request {
        Request {
            id: RequestId(id),
            pickup: VertexId(1),
            dropoff: VertexId(2),
            max_ride: TimeDelta::from_seconds(600.0),
            window: TimeWindow::new(
                TimePoint::from_seconds(0.0),
                TimePoint::from_seconds(900.0),
            )
            .unwrap(),
            seats,
            fare: Money::from_cents(fare_cents),
            state: RequestState::New,
            assigned_vehicle: None,
            compensated: false,
        }
    }

    #[test]
    fn split_leaves_fitting_request_alone() {
        let r = request(7, 4, 999);
        let parts = split_oversized(&r, 5).unwrap();
        assert_eq!(parts, vec![r]);
    }

    #[test]
    fn split_conserves_seats_and_fare() {
        // 12 seats over capacity 5: parts 5, 5, 2; 1000¢ splits 416+416+166,
        // leftover 2¢ to the first part.
        let r = request(3, 12, 1000);
        let parts = split_oversized(&r, 5).unwrap();
        assert_eq!(
            parts.iter().map(|p| p.seats).collect::<Vec<_>>(),
            vec![5, 5, 2]
        );
        assert_eq!(
            parts.iter().map(|p| p.fare.cents_rounded()).collect::<Vec<_>>(),
            vec![418, 416, 166]
        );
        assert_eq!(
            parts.iter().map(|p| p.fare).sum::<Money>(),
            r.fare,
            "fare must be conserved exactly"
        );
        assert_eq!(
            parts.iter().map(|p| p.id.0).collect::<Vec<_>>(),
            vec![3, 3001, 3002]
        );
        for p in &parts {
            assert_eq!((p.pickup, p.dropoff), (r.pickup, r.dropoff));
            assert_eq!(p.window, r.window);
            assert_eq!(p.max_ride, r.max_ride);
        }
    }

    #[test]
    fn split_rejects_zero_capacity() {
        let r = request(1, 3, 100);
        assert_eq!(
            split_oversized(&r, 0).unwrap_err(),
            DomainError::ZeroCapacity(RequestId(1))
        );
    }

    #[test]
    fn normalize_moves_pickup_and_shrinks_ride_budget() {
        let mut r = request(5, 2, 400);
        r.state = RequestState::InService;
        let vehicle = Vehicle::idle(
            VehicleId(9),
            VertexId(4),
            TimeDelta::from_seconds(3600.0),
            5,
        );
        let n = normalize_in_service(&r, &vehicle, TimeDelta::from_seconds(120.0)).unwrap();
        assert_eq!(n.pickup, VertexId(4));
        assert_eq!(n.max_ride, TimeDelta::from_seconds(480.0));
        assert_eq!(n.window, TimeWindow::UNBOUNDED);
        assert_eq!(n.assigned_vehicle, Some(VehicleId(9)));
        assert_eq!(n.dropoff, r.dropoff);
    }

    #[test]
    fn normalize_rejects_exhausted_ride_time() {
        let mut r = request(5, 2, 400);
        r.state = RequestState::InService;
        let vehicle = Vehicle::idle(
            VehicleId(9),
            VertexId(4),
            TimeDelta::from_seconds(3600.0),
            5,
        );
        let err = normalize_in_service(&r, &vehicle, TimeDelta::from_seconds(601.0)).unwrap_err();
        assert!(matches!(err, DomainError::RideTimeExhausted(..)));
        // Exactly at budget: the dropoff is still feasible, with nothing left.
        let edge = normalize_in_service(&r, &vehicle, TimeDelta::from_seconds(600.0)).unwrap();
        assert_eq!(edge.max_ride, TimeDelta::ZERO);
    }

    #[test]
    fn normalize_requires_in_service_state() {
        let r = request(5, 2, 400);
        let vehicle = Vehicle::idle(
            VehicleId(9),
            VertexId(4),
            TimeDelta::from_seconds(3600.0),
            5,
        );
        assert!(matches!(
            normalize_in_service(&r, &vehicle, TimeDelta::ZERO).unwrap_err(),
            DomainError::UnexpectedState(..)
        ));
    }

    #[test]
    fn window_rebasing_shifts_both_bounds() {
        let w = TimeWindow::new(
            TimePoint::from_seconds(200.0),
            TimePoint::from_seconds(300.0),
        )
        .unwrap();
        let r = w.rebased(TimeDelta::from_seconds(180.0));
        assert_eq!(r.earliest, Some(TimePoint::from_seconds(20.0)));
        assert_eq!(r.latest, Some(TimePoint::from_seconds(120.0)));
        assert!(TimeWindow::UNBOUNDED.contains(TimePoint::from_seconds(-50.0)));
    }
}
