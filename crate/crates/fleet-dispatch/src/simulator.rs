//! Rolling-horizon operation: the service runs in fixed intervals, each of
//! which merges newly submitted requests with the carried-over pool, runs
//! admission control, commits the winning timetables, and drives the fleet
//! along them until the next boundary.
//!
//! Time bases: [`SystemState`] keeps one absolute clock. Planning happens in
//! solve-relative time (the vehicle scheduler settles times from its own
//! origin), so each round rebases request windows and vehicle availability
//! to the current boundary and each committed timetable remembers the epoch
//! it was settled against.
//!
//! Money flow: a request's discounted fare is booked as revenue the round it
//! is admitted; fuel cost is booked when a plan is committed, and the
//! not-yet-driven remainder of a superseded plan is credited back. Because
//! every admission outcome is at least as profitable as continuing the
//! standing plan, cumulative profit never decreases in an undisturbed run.
//! Disruptions may reverse revenue (a demoted request is no longer owed
//! service), so profit can dip when traffic invalidates commitments.
//!
//! A vehicle's operation budget counts wall time from the moment it becomes
//! available; waiting idle between assignments does not consume it, and
//! parking at a refuel station restores it. Superseding a plan mid-leg
//! charges the full leg and anchors the next plan at the leg's arrival, so a
//! continuously driving vehicle keeps exactly the deadline it was committed
//! under.

use crate::admission::{
    revenue, run_admission, AdmissionError, AdmissionOutcome, AdmissionProblem, GaConfig,
    GenerationStats,
};
use crate::domain::{
    normalize_in_service, split_oversized, DomainError, Request, RequestId, RequestState,
    Schedule, Stop, TimeWindow, Vehicle, VehicleId,
};
use crate::fleet_scheduler::{build_tabu_lists, is_globally_blocked, ExecMode};
use crate::network::{EdgeAttrs, NetworkError, ReducedNetwork, RoadNetwork, VertexId};
use crate::units::{div_round_half_up, Distance, Money, Rate, TimeDelta, TimePoint};
use crate::validate::validate_schedule;
use crate::vehicle_scheduler::SearchLimits;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Operating parameters shared by every interval of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Interval duration.
    pub interval: TimeDelta,
    /// Number of intervals to run.
    pub horizon: u32,
    pub fuel_cents_per_mile: i64,
    /// Fare fraction refunded for sharing the ride.
    pub discount: Rate,
    /// Operation budget restored by refueling.
    pub refuel_full: TimeDelta,
    /// Node budget per single-vehicle search.
    pub node_budget: u64,
    pub ga: GaConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            interval: TimeDelta::from_seconds(180.0),
            horizon: 1,
            fuel_cents_per_mile: 16,
            discount: Rate::from_milli(500),
            refuel_full: TimeDelta::from_seconds(14_400.0),
            node_budget: SearchLimits::default().node_budget,
            ga: GaConfig::default(),
        }
    }
}

/// A full simulation input: the road network, the initial fleet, and the
/// request stream bucketed by decision interval.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: RoadNetwork,
    pub vehicles: Vec<Vehicle>,
    /// `(interval, request)` pairs sorted by interval: the request enters
    /// the pool when that interval's round runs.
    pub arrivals: Vec<(u32, Request)>,
    pub config: SimConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.config.horizon == 0 {
            return Err(SimError::Scenario("horizon must be at least 1"));
        }
        if !self.config.interval.is_positive() {
            return Err(SimError::Scenario("interval must be positive"));
        }
        if self.vehicles.is_empty() {
            return Err(SimError::Scenario("fleet must not be empty"));
        }
        let mut vids = BTreeSet::new();
        for v in &self.vehicles {
            if !vids.insert(v.id) {
                return Err(SimError::Scenario("duplicate vehicle id"));
            }
            if v.capacity == 0 {
                return Err(SimError::Scenario("vehicle capacity must be positive"));
            }
            if !self.network.vertices().contains(&v.avail_vertex) {
                return Err(SimError::Scenario("vehicle placed on unknown vertex"));
            }
            if !v.in_service.is_empty() || !v.assigned_unserved.is_empty() {
                return Err(SimError::Scenario("roster vehicles must start idle"));
            }
        }
        let mut rids = BTreeSet::new();
        let mut last = 0u32;
        for (interval, r) in &self.arrivals {
            if *interval < last {
                return Err(SimError::Scenario("arrivals must be sorted by interval"));
            }
            last = *interval;
            if !rids.insert(r.id) {
                return Err(SimError::Scenario("duplicate request id"));
            }
            if r.state != RequestState::New {
                return Err(SimError::Scenario("arriving requests must be new"));
            }
            r.validate()?;
            if !self.network.vertices().contains(&r.pickup)
                || !self.network.vertices().contains(&r.dropoff)
            {
                return Err(SimError::Scenario("request endpoint on unknown vertex"));
            }
        }
        Ok(())
    }
}

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// On-disk form of a [`Scenario`]: the network lives in its own file,
/// referenced by path relative to the scenario file. All quantities use the
/// library's integer units so a reload reproduces the run bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub network_ref: String,
    pub vehicles: Vec<Vehicle>,
    pub arrivals: Vec<ArrivalEntry>,
    pub config: SimConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrivalEntry {
    pub interval: u32,
    pub request: Request,
}

impl ScenarioFile {
    pub fn from_scenario(scenario: &Scenario, network_ref: String) -> Self {
        ScenarioFile {
            format_version: SCENARIO_FORMAT_VERSION,
            network_ref,
            vehicles: scenario.vehicles.clone(),
            arrivals: scenario
                .arrivals
                .iter()
                .map(|(interval, request)| ArrivalEntry {
                    interval: *interval,
                    request: request.clone(),
                })
                .collect(),
            config: scenario.config,
        }
    }

    /// Reassembles the scenario around an already loaded network.
    pub fn into_scenario(self, network: RoadNetwork) -> Result<Scenario, SimError> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(SimError::Scenario("unsupported scenario format_version"));
        }
        let scenario = Scenario {
            network,
            vehicles: self.vehicles,
            arrivals: self
                .arrivals
                .into_iter()
                .map(|e| (e.interval, e.request))
                .collect(),
            config: self.config,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Running money totals. Revenue is booked at admission, cost at plan
/// commitment (with credit for the superseded remainder), so `profit` always
/// equals revenue minus cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ledger {
    pub revenue: Money,
    pub cost: Money,
    pub admitted: u64,
}

impl Ledger {
    pub fn profit(&self) -> Money {
        self.revenue - self.cost
    }
}

/// What one round did, with everything needed to audit it: the dispatched
/// timetables together with the solve-time request and vehicle views they
/// were settled against (all in that round's relative time base).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval: u32,
    /// Requests admitted this round.
    pub admitted: Vec<RequestId>,
    /// Requests declined this round (carried plus excluded).
    pub rejected: Vec<RequestId>,
    /// Declined but still serviceable: back in the pool next round.
    pub carried: Vec<RequestId>,
    /// Permanently excluded: no vehicle can ever serve them.
    pub excluded: Vec<RequestId>,
    pub interval_profit: Money,
    pub cumulative_profit: Money,
    pub cumulative_admitted: u64,
    pub schedules: BTreeMap<VehicleId, Schedule>,
    pub pool_view: BTreeMap<RequestId, Request>,
    pub vehicle_view: BTreeMap<VehicleId, Vehicle>,
    pub trace: Vec<GenerationStats>,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(&'static str),
    #[error("no edge from {0} to {1}")]
    UnknownEdge(VertexId, VertexId),
    #[error("unknown request {0}")]
    UnknownRequest(RequestId),
    #[error("{0} is not awaiting pickup on a committed schedule")]
    NoShowState(RequestId),
    #[error("{id}: {absent} absent seats exceed the {seats} booked")]
    NoShowSeats { id: RequestId, absent: u32, seats: u32 },
    #[error("request id {0} already exists")]
    IdCollision(RequestId),
    #[error("schedule surgery produced an invalid timetable: {0}")]
    SurgeryInvalid(String),
    #[error(transparent)]
    Admission(#[from] AdmissionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// One reduced-network leg of a committed timetable, with the road-level
/// path it expands to.
#[derive(Debug, Clone)]
struct Leg {
    path: Vec<VertexId>,
    cost: Distance,
    time: TimeDelta,
}

impl Leg {
    fn uses_edge(&self, from: VertexId, to: VertexId) -> bool {
        self.path.windows(2).any(|w| w[0] == from && w[1] == to)
    }
}

/// A dispatched timetable pinned to the boundary it was settled at, plus the
/// solve-time views needed to re-validate it after surgery.
#[derive(Debug, Clone)]
struct Commitment {
    epoch: TimePoint,
    /// Stop times are relative to `epoch`.
    schedule: Schedule,
    legs: Vec<Leg>,
    /// First stop whose events have not happened yet.
    next_stop: usize,
    vehicle_view: Vehicle,
    request_views: BTreeMap<RequestId, Request>,
}

impl Commitment {
    fn stop_abs(&self, i: usize) -> TimePoint {
        self.epoch + self.schedule.stops[i].time.since_origin()
    }

    /// Cost of the legs that have not departed by `clock`.
    fn residual_cost(&self, clock: TimePoint) -> Distance {
        self.legs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.stop_abs(*i) >= clock)
            .map(|(_, l)| l.cost)
            .sum()
    }

    /// Index of the first leg that is not fully driven at the current
    /// consumption point.
    fn first_pending_leg(&self) -> usize {
        self.next_stop.saturating_sub(1)
    }
}

/// Where a committed vehicle stands at a boundary: the vertex it can next
/// plan from, when it gets there, and the driving time of a leg in flight
/// (charged only when the old plan is discarded).
struct PrepPosition {
    vertex: VertexId,
    avail_abs: TimePoint,
    sunk: TimeDelta,
}

/// The live system: absolute clock, evolving fleet and request ledger, and
/// the committed timetables being driven.
#[derive(Debug)]
pub struct SystemState {
    pub clock: TimePoint,
    pub interval_index: u32,
    pub network: RoadNetwork,
    reduced: ReducedNetwork,
    pub vehicles: BTreeMap<VehicleId, Vehicle>,
    /// Every request ever seen, including terminal states.
    pub requests: BTreeMap<RequestId, Request>,
    commitments: BTreeMap<VehicleId, Commitment>,
    board_times: BTreeMap<RequestId, TimePoint>,
    pub ledger: Ledger,
}

impl SystemState {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let reduced = scenario.network.reduce(scenario.network.vertices())?;
        Ok(SystemState {
            clock: TimePoint::ORIGIN,
            interval_index: 0,
            network: scenario.network.clone(),
            reduced,
            vehicles: scenario.vehicles.iter().map(|v| (v.id, v.clone())).collect(),
            requests: BTreeMap::new(),
            commitments: BTreeMap::new(),
            board_times: BTreeMap::new(),
            ledger: Ledger::default(),
        })
    }

    pub fn reduced(&self) -> &ReducedNetwork {
        &self.reduced
    }

    /// The committed timetable a vehicle is currently driving, rebased to
    /// absolute stop times. `None` for idle vehicles.
    pub fn committed_schedule(&self, k: VehicleId) -> Option<Schedule> {
        self.commitments.get(&k).map(|c| {
            let mut s = c.schedule.clone();
            for stop in &mut s.stops {
                stop.time = c.epoch + stop.time.since_origin();
            }
            s
        })
    }

    fn prep_position(&self, k: VehicleId) -> PrepPosition {
        let v = &self.vehicles[&k];
        match self.commitments.get(&k) {
            None => PrepPosition {
                vertex: v.avail_vertex,
                avail_abs: (self.clock + v.avail_after).max(self.clock),
                sunk: TimeDelta::ZERO,
            },
            Some(c) => {
                let i = c.next_stop;
                debug_assert!(i < c.schedule.stops.len());
                if i == 0 {
                    // The plan starts later than the boundary: the vehicle is
                    // still travelling to (or waiting at) its start point.
                    // That travel was charged when the prior plan was
                    // superseded, so nothing here is in flight.
                    return PrepPosition {
                        vertex: c.schedule.stops[0].vertex,
                        avail_abs: c.stop_abs(0).max(self.clock),
                        sunk: TimeDelta::ZERO,
                    };
                }
                let depart = c.stop_abs(i - 1);
                if depart < self.clock {
                    let leg = &c.legs[i - 1];
                    let arrival = depart + leg.time;
                    PrepPosition {
                        vertex: c.schedule.stops[i].vertex,
                        avail_abs: arrival.max(self.clock),
                        sunk: leg.time,
                    }
                } else {
                    PrepPosition {
                        vertex: c.schedule.stops[i - 1].vertex,
                        avail_abs: self.clock,
                        sunk: TimeDelta::ZERO,
                    }
                }
            }
        }
    }

    /// Solve-time view of a vehicle at the current boundary. The operation
    /// budget is anchored at availability: budget consumed by a leg in
    /// flight is subtracted, and the time until the vehicle becomes
    /// available is granted back so its committed deadline is preserved.
    fn prep_vehicle(&self, k: VehicleId) -> Vehicle {
        let v = &self.vehicles[&k];
        let pos = self.prep_position(k);
        let avail_after = pos.avail_abs - self.clock;
        let budget = (v.op_limit - pos.sunk).max(TimeDelta::ZERO);
        Vehicle {
            id: v.id,
            avail_vertex: pos.vertex,
            avail_after,
            op_limit: budget + avail_after,
            capacity: v.capacity,
            in_service: v.in_service.clone(),
            assigned_unserved: v.assigned_unserved.clone(),
        }
    }

    /// Discards a vehicle's committed plan: the not-yet-driven remainder is
    /// credited back, a leg in flight is completed (position moves to its
    /// arrival, its driving time is charged), and the vehicle goes idle.
    fn cancel_commitment(&mut self, k: VehicleId, fuel_cents_per_mile: i64) {
        let pos = self.prep_position(k);
        if let Some(c) = self.commitments.remove(&k) {
            self.ledger.cost -= c.residual_cost(self.clock).fuel_cost(fuel_cents_per_mile);
        }
        let v = self.vehicles.get_mut(&k).unwrap();
        v.avail_vertex = pos.vertex;
        v.avail_after = pos.avail_abs - self.clock;
        v.op_limit = (v.op_limit - pos.sunk).max(TimeDelta::ZERO);
    }

    /// Sends an assigned but not yet picked-up request back to the pool as
    /// newly submitted, reversing its booked revenue.
    fn demote_request(&mut self, id: RequestId, discount: Rate) {
        let r = self.requests.get_mut(&id).unwrap();
        debug_assert_eq!(r.state, RequestState::AssignedUnserved);
        r.state = RequestState::New;
        r.assigned_vehicle = None;
        self.ledger.revenue -= revenue(r, discount);
        self.ledger.admitted -= 1;
        for v in self.vehicles.values_mut() {
            v.assigned_unserved.remove(&id);
        }
    }

    /// Runs one decision round at the current boundary and drives the fleet
    /// to the next: merge arrivals, exclude the permanently unservable,
    /// re-plan through admission, commit, then advance the clock.
    pub fn run_interval(
        &mut self,
        arrivals: Vec<Request>,
        cfg: &SimConfig,
        mode: ExecMode,
    ) -> Result<IntervalReport, SimError> {
        let max_capacity = self
            .vehicles
            .values()
            .map(|v| v.capacity)
            .max()
            .expect("fleet is never empty");
        for arrival in arrivals {
            for part in split_oversized(&arrival, max_capacity)? {
                if self.requests.contains_key(&part.id) {
                    return Err(SimError::IdCollision(part.id));
                }
                self.requests.insert(part.id, part);
            }
        }
        let limits = SearchLimits {
            node_budget: cfg.node_budget,
        };

        let outcome = match self.solve_round(cfg, mode, &limits)? {
            Some(outcome) => outcome,
            None => {
                // The standing plan can no longer cover every previously
                // admitted request (a disruption changed the network since
                // it was settled). Give the not-yet-boarded ones back to the
                // pool and re-plan around the passengers actually on board.
                let fuel = cfg.fuel_cents_per_mile;
                let demote: Vec<RequestId> = self
                    .requests
                    .values()
                    .filter(|r| r.state == RequestState::AssignedUnserved)
                    .map(|r| r.id)
                    .collect();
                let vehicles: Vec<VehicleId> = self.commitments.keys().copied().collect();
                for k in vehicles {
                    self.cancel_commitment(k, fuel);
                }
                for id in demote {
                    self.demote_request(id, cfg.discount);
                }
                match self.solve_round(cfg, mode, &limits)? {
                    Some(outcome) => outcome,
                    None => return Err(AdmissionError::ForcedSetInfeasible.into()),
                }
            }
        };
        self.commit_round(&outcome, cfg)
    }

    /// Builds the solve views, prunes permanently unservable requests, and
    /// runs admission. `Ok(None)` means the forced set has no feasible plan.
    fn solve_round(
        &mut self,
        cfg: &SimConfig,
        mode: ExecMode,
        limits: &SearchLimits,
    ) -> Result<Option<RoundSolution>, SimError> {
        let epoch = self.clock;
        let vehicle_view: BTreeMap<VehicleId, Vehicle> = self
            .vehicles
            .keys()
            .map(|&k| (k, self.prep_vehicle(k)))
            .collect();

        let mut pool_view: BTreeMap<RequestId, Request> = BTreeMap::new();
        for r in self.requests.values() {
            let view = match r.state {
                RequestState::New | RequestState::CarriedOver | RequestState::AssignedUnserved => {
                    Request {
                        window: rebase_window(&r.window, epoch),
                        ..r.clone()
                    }
                }
                RequestState::InService => {
                    let holder = r.assigned_vehicle.expect("in-service requests have a holder");
                    let vv = &vehicle_view[&holder];
                    let boarded = self.board_times[&r.id];
                    let elapsed = (epoch + vv.avail_after) - boarded;
                    normalize_in_service(r, vv, elapsed)?
                }
                _ => continue,
            };
            pool_view.insert(r.id, view);
        }

        let tabu = build_tabu_lists(&pool_view, &vehicle_view, &self.reduced, limits)
            .map_err(AdmissionError::from)?;
        let mut excluded = Vec::new();
        pool_view.retain(|id, view| {
            let gone = !view.is_forced() && is_globally_blocked(&tabu, *id, &vehicle_view);
            if gone {
                excluded.push(*id);
            }
            !gone
        });
        for id in &excluded {
            let r = self.requests.get_mut(id).unwrap();
            r.state = RequestState::Rejected;
        }

        let problem = AdmissionProblem::new(
            &pool_view,
            &vehicle_view,
            &self.reduced,
            &tabu,
            limits,
            mode,
            cfg.discount,
            cfg.fuel_cents_per_mile,
        )?;
        let ga = GaConfig {
            seed: interval_seed(cfg.ga.seed, self.interval_index),
            ..cfg.ga
        };
        let outcome = match run_admission(&problem, &ga) {
            Ok(outcome) => outcome,
            Err(AdmissionError::ForcedSetInfeasible) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(Some(RoundSolution {
            outcome,
            pool_view,
            vehicle_view,
            excluded,
        }))
    }

    /// Books the round, installs the new commitments, and advances one
    /// interval.
    fn commit_round(
        &mut self,
        sol: &RoundSolution,
        cfg: &SimConfig,
    ) -> Result<IntervalReport, SimError> {
        let RoundSolution {
            outcome,
            pool_view,
            vehicle_view,
            excluded,
        } = sol;
        let epoch = self.clock;
        let fuel = cfg.fuel_cents_per_mile;
        let profit_before = self.ledger.profit();

        // Supersede every standing plan: position each vehicle at the point
        // the new plan was solved from and credit the undriven remainder.
        let committed: Vec<VehicleId> = self.commitments.keys().copied().collect();
        for k in committed {
            self.cancel_commitment(k, fuel);
        }
        for (&k, view) in vehicle_view {
            let v = self.vehicles.get_mut(&k).unwrap();
            v.avail_vertex = view.avail_vertex;
            v.avail_after = view.avail_after;
            v.op_limit = (view.op_limit - view.avail_after).max(TimeDelta::ZERO);
            v.assigned_unserved.clear();
        }

        let mut admitted_now = Vec::new();
        for (&rid, &k) in &outcome.assignment {
            let r = self.requests.get_mut(&rid).unwrap();
            match r.state {
                RequestState::New | RequestState::CarriedOver => {
                    r.state = RequestState::AssignedUnserved;
                    r.assigned_vehicle = Some(k);
                    self.ledger.revenue += revenue(r, cfg.discount);
                    self.ledger.admitted += 1;
                    admitted_now.push(rid);
                }
                RequestState::AssignedUnserved => {
                    r.assigned_vehicle = Some(k);
                }
                RequestState::InService => {
                    debug_assert_eq!(r.assigned_vehicle, Some(k));
                }
                _ => unreachable!("terminal requests never appear in an assignment"),
            }
            if self.requests[&rid].state == RequestState::AssignedUnserved {
                self.vehicles.get_mut(&k).unwrap().assigned_unserved.insert(rid);
            }
        }
        self.ledger.cost += outcome.total_cost.fuel_cost(fuel);

        let mut carried = Vec::new();
        for id in &outcome.rejected {
            let r = self.requests.get_mut(id).unwrap();
            if matches!(r.state, RequestState::New | RequestState::CarriedOver) {
                r.state = RequestState::CarriedOver;
                carried.push(*id);
            }
        }

        for (&k, schedule) in &outcome.schedules {
            if schedule.is_empty() {
                continue;
            }
            let touched = schedule.touched_requests();
            let commitment = Commitment {
                epoch,
                schedule: schedule.clone(),
                legs: build_legs(schedule, &self.reduced)?,
                next_stop: 0,
                vehicle_view: vehicle_view[&k].clone(),
                request_views: pool_view
                    .iter()
                    .filter(|(id, _)| touched.contains(id))
                    .map(|(id, r)| (*id, r.clone()))
                    .collect(),
            };
            self.commitments.insert(k, commitment);
        }

        #[cfg(debug_assertions)]
        for (k, schedule) in &outcome.schedules {
            let touched = schedule.touched_requests();
            let served: BTreeMap<RequestId, Request> = pool_view
                .iter()
                .filter(|(id, _)| touched.contains(id))
                .map(|(id, r)| (*id, r.clone()))
                .collect();
            let violations = validate_schedule(schedule, &vehicle_view[k], &served, &self.reduced);
            debug_assert!(violations.is_empty(), "dispatched {k}: {violations:?}");
        }

        let interval = self.interval_index;
        self.advance(epoch + cfg.interval, cfg);
        self.interval_index += 1;

        let mut rejected: Vec<RequestId> = carried.clone();
        rejected.extend(excluded.iter().copied());
        rejected.sort();
        Ok(IntervalReport {
            interval,
            admitted: admitted_now,
            rejected,
            carried,
            excluded: excluded.clone(),
            interval_profit: self.ledger.profit() - profit_before,
            cumulative_profit: self.ledger.profit(),
            cumulative_admitted: self.ledger.admitted,
            schedules: outcome.schedules.clone(),
            pool_view: pool_view.clone(),
            vehicle_view: vehicle_view.clone(),
            trace: outcome.trace.clone(),
        })
    }

    /// Drives every committed timetable up to `to`, processing boardings,
    /// dropoffs, and terminal refuels as their stops pass.
    fn advance(&mut self, to: TimePoint, cfg: &SimConfig) {
        let elapsed = to - self.clock;
        let keys: Vec<VehicleId> = self.vehicles.keys().copied().collect();
        for k in keys {
            let Some(mut c) = self.commitments.remove(&k) else {
                let v = self.vehicles.get_mut(&k).unwrap();
                v.avail_after = (v.avail_after - elapsed).max(TimeDelta::ZERO);
                continue;
            };
            let last = c.schedule.stops.len() - 1;
            while c.next_stop <= last && c.stop_abs(c.next_stop) <= to {
                let i = c.next_stop;
                let stop = c.schedule.stops[i].clone();
                let v = self.vehicles.get_mut(&k).unwrap();
                if i >= 1 {
                    v.op_limit = (v.op_limit - c.legs[i - 1].time).max(TimeDelta::ZERO);
                }
                for &rid in &stop.board {
                    let r = self.requests.get_mut(&rid).unwrap();
                    r.state = RequestState::InService;
                    self.board_times.insert(rid, c.stop_abs(i));
                    v.in_service.insert(rid);
                    v.assigned_unserved.remove(&rid);
                }
                for &rid in &stop.alight {
                    let r = self.requests.get_mut(&rid).unwrap();
                    r.state = RequestState::Completed;
                    self.board_times.remove(&rid);
                    v.in_service.remove(&rid);
                }
                if i == last {
                    v.op_limit = cfg.refuel_full;
                    v.avail_vertex = stop.vertex;
                    v.avail_after = TimeDelta::ZERO;
                }
                c.next_stop += 1;
            }
            if c.next_stop <= last {
                self.commitments.insert(k, c);
            }
        }
        self.clock = to;
    }

    /// Reacts to a road segment's travel time changing. Plans that do not
    /// drive the segment again are kept. A plan that does but carries no
    /// passengers yet is cancelled and its requests resubmitted. A plan with
    /// passengers aboard is kept unchanged, and everyone riding over the
    /// segment is flagged for compensation.
    pub fn apply_traffic_update(
        &mut self,
        from: VertexId,
        to: VertexId,
        new_time: TimeDelta,
        cfg: &SimConfig,
    ) -> Result<(), SimError> {
        if !self.network.edges().contains_key(&(from, to)) {
            return Err(SimError::UnknownEdge(from, to));
        }
        self.network.set_edge_time(from, to, new_time)?;
        self.reduced = self.network.reduce(self.network.vertices())?;

        let keys: Vec<VehicleId> = self.commitments.keys().copied().collect();
        for k in keys {
            let c = &self.commitments[&k];
            let pending = c.first_pending_leg();
            let affected: Vec<usize> = (pending..c.legs.len())
                .filter(|&l| c.legs[l].uses_edge(from, to))
                .collect();
            if affected.is_empty() {
                continue;
            }
            if self.vehicles[&k].in_service.is_empty() {
                let demote: Vec<RequestId> =
                    self.vehicles[&k].assigned_unserved.iter().copied().collect();
                self.cancel_commitment(k, cfg.fuel_cents_per_mile);
                for id in demote {
                    self.demote_request(id, cfg.discount);
                }
            } else {
                let c = self.commitments.get_mut(&k).unwrap();
                let mut compensate = BTreeSet::new();
                for &l in &affected {
                    for (rid, span) in ride_spans(&c.schedule, &c.vehicle_view) {
                        if span.0 <= l && l < span.1 {
                            compensate.insert(rid);
                        }
                    }
                }
                for rid in compensate {
                    if let Some(view) = c.request_views.get_mut(&rid) {
                        view.compensated = true;
                    }
                    self.requests.get_mut(&rid).unwrap().compensated = true;
                }
            }
        }
        Ok(())
    }

    /// Handles passengers missing at their pickup. A partial absence frees
    /// the unused seats and leaves the timetable untouched; a full absence
    /// closes the request, removes its stops, and re-settles the remaining
    /// timetable (which can only get earlier).
    pub fn apply_no_show(
        &mut self,
        id: RequestId,
        absent_seats: u32,
        cfg: &SimConfig,
    ) -> Result<(), SimError> {
        let r = self
            .requests
            .get(&id)
            .ok_or(SimError::UnknownRequest(id))?
            .clone();
        if absent_seats > r.seats {
            return Err(SimError::NoShowSeats {
                id,
                absent: absent_seats,
                seats: r.seats,
            });
        }
        if absent_seats == 0 {
            return Ok(());
        }
        let holder = match (r.state, r.assigned_vehicle) {
            (RequestState::AssignedUnserved, Some(k)) => k,
            _ => return Err(SimError::NoShowState(id)),
        };
        let c = self
            .commitments
            .get_mut(&holder)
            .ok_or(SimError::NoShowState(id))?;
        let pickup = c
            .schedule
            .stops
            .iter()
            .position(|s| s.board.contains(&id))
            .ok_or(SimError::NoShowState(id))?;
        let dropoff = c
            .schedule
            .stops
            .iter()
            .position(|s| s.alight.contains(&id))
            .expect("admitted requests alight somewhere");
        if pickup < c.next_stop {
            return Err(SimError::NoShowState(id));
        }

        if absent_seats < r.seats {
            for stop in &mut c.schedule.stops[pickup..dropoff] {
                stop.occupancy_after -= absent_seats;
            }
            c.request_views.get_mut(&id).unwrap().seats -= absent_seats;
            self.requests.get_mut(&id).unwrap().seats -= absent_seats;
            return Ok(());
        }

        // Full absence: drop the passenger's stops and close the request.
        let old_cost = c.schedule.cost;
        let mut c2 = c.clone();
        for stop in &mut c2.schedule.stops {
            stop.board.retain(|&b| b != id);
            stop.alight.retain(|&a| a != id);
        }
        c2.request_views.remove(&id);
        c2.vehicle_view.assigned_unserved.remove(&id);

        let clock = self.clock;
        let last = c2.schedule.stops.len() - 1;
        let keep: Vec<bool> = c2
            .schedule
            .stops
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 || i == last || i < c2.next_stop {
                    return true;
                }
                if !s.board.is_empty() || !s.alight.is_empty() {
                    return true;
                }
                // The stop being driven toward stays: the vehicle cannot
                // abandon an edge mid-way.
                i == c2.next_stop && c2.stop_abs(i - 1) < clock
            })
            .collect();
        let stops: Vec<Stop> = c2
            .schedule
            .stops
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        c2.schedule.stops = stops;

        // Re-settle the undriven suffix: earliest arrival, delayed to window
        // starts on pickups, occupancy rewalked with the freed seats.
        let anchor = c2.next_stop.saturating_sub(1).min(c2.schedule.stops.len() - 1);
        for i in anchor + 1..c2.schedule.stops.len() {
            let prev = c2.schedule.stops[i - 1].clone();
            let leg = self
                .reduced
                .leg(prev.vertex, c2.schedule.stops[i].vertex)
                .ok_or_else(|| SimError::SurgeryInvalid("leg lost its route".into()))?;
            let arrival = prev.time + leg.time;
            let stop = &mut c2.schedule.stops[i];
            let mut service = arrival;
            for b in &stop.board {
                if let Some(e) = c2.request_views[b].window.earliest {
                    service = service.max(e);
                }
            }
            stop.time = service;
            let mut occ = prev.occupancy_after;
            for a in &stop.alight {
                occ -= c2.request_views[a].seats;
            }
            for b in &stop.board {
                occ += c2.request_views[b].seats;
            }
            stop.occupancy_after = occ;
        }
        c2.legs = build_legs(&c2.schedule, &self.reduced)?;
        c2.schedule.cost = c2.legs.iter().map(|l| l.cost).sum();

        let violations = validate_schedule(
            &c2.schedule,
            &c2.vehicle_view,
            &c2.request_views,
            &self.reduced,
        );
        if !violations.is_empty() {
            let text = violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(SimError::SurgeryInvalid(text));
        }

        self.ledger.cost -= (old_cost - c2.schedule.cost).fuel_cost(cfg.fuel_cents_per_mile);
        self.commitments.insert(holder, c2);
        let req = self.requests.get_mut(&id).unwrap();
        req.state = RequestState::CompletedUnserved;
        req.assigned_vehicle = None;
        self.vehicles
            .get_mut(&holder)
            .unwrap()
            .assigned_unserved
            .remove(&id);
        Ok(())
    }

    /// Counts requests by lifecycle state.
    pub fn census(&self) -> BTreeMap<RequestState, usize> {
        let mut out = BTreeMap::new();
        for r in self.requests.values() {
            *out.entry(r.state).or_insert(0) += 1;
        }
        out
    }
}

struct RoundSolution {
    outcome: AdmissionOutcome,
    pool_view: BTreeMap<RequestId, Request>,
    vehicle_view: BTreeMap<VehicleId, Vehicle>,
    excluded: Vec<RequestId>,
}

/// Spreads one base seed into per-interval GA seeds.
fn interval_seed(base: u64, interval: u32) -> u64 {
    base.wrapping_add((interval as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn rebase_window(w: &TimeWindow, epoch: TimePoint) -> TimeWindow {
    let shift = |p: TimePoint| TimePoint::ORIGIN + (p - epoch);
    TimeWindow {
        earliest: w.earliest.map(shift),
        latest: w.latest.map(shift),
    }
}

fn build_legs(schedule: &Schedule, rn: &ReducedNetwork) -> Result<Vec<Leg>, SimError> {
    let mut legs = Vec::new();
    for w in schedule.stops.windows(2) {
        let (a, b) = (w[0].vertex, w[1].vertex);
        if a == b {
            legs.push(Leg {
                path: vec![a],
                cost: Distance::ZERO,
                time: TimeDelta::ZERO,
            });
            continue;
        }
        let pair = rn
            .pair_data()
            .get(&(a, b))
            .ok_or(SimError::Network(NetworkError::NoRoute(a, b)))?;
        legs.push(Leg {
            path: pair.path.clone(),
            cost: pair.cost,
            time: pair.time,
        });
    }
    Ok(legs)
}

/// For each request the schedule carries, the leg span `[board, alight)`
/// during which it is aboard. Passengers already on board at commit time
/// span from leg 0.
fn ride_spans(schedule: &Schedule, vehicle_view: &Vehicle) -> Vec<(RequestId, (usize, usize))> {
    let mut board: BTreeMap<RequestId, usize> = vehicle_view
        .in_service
        .iter()
        .map(|&r| (r, 0))
        .collect();
    let mut spans = Vec::new();
    for (i, stop) in schedule.stops.iter().enumerate() {
        for &r in &stop.board {
            board.insert(r, i);
        }
        for &r in &stop.alight {
            if let Some(b) = board.remove(&r) {
                spans.push((r, (b, i)));
            }
        }
    }
    spans
}

/// Runs a scenario end to end. Pure in its inputs: the same scenario and
/// mode produce the same reports and final state.
pub fn run_horizon(
    scenario: &Scenario,
    mode: ExecMode,
) -> Result<(Vec<IntervalReport>, SystemState), SimError> {
    let mut state = SystemState::new(scenario)?;
    let mut reports = Vec::with_capacity(scenario.config.horizon as usize);
    let mut cursor = 0usize;
    for interval in 0..scenario.config.horizon {
        let mut batch = Vec::new();
        while cursor < scenario.arrivals.len() && scenario.arrivals[cursor].0 == interval {
            batch.push(scenario.arrivals[cursor].1.clone());
            cursor += 1;
        }
        reports.push(state.run_interval(batch, &scenario.config, mode)?);
    }
    Ok((reports, state))
}

/// Knobs for [`generate_scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub vertices: u32,
    pub stations: u32,
    pub vehicles: u32,
    pub requests: u32,
    /// Submission times are drawn uniformly over this span.
    pub span: TimeDelta,
    pub interval: TimeDelta,
    /// Defaults to enough intervals to decide every submission plus two.
    pub horizon: Option<u32>,
    pub ga: GaConfig,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            vertices: 20,
            stations: 5,
            vehicles: 5,
            requests: 30,
            span: TimeDelta::from_seconds(1800.0),
            interval: TimeDelta::from_seconds(180.0),
            horizon: None,
            ga: GaConfig::default(),
        }
    }
}

/// Builds a random but fully reproducible scenario: vertices scattered on a
/// ten-mile square, each linked to its three nearest neighbors plus a cycle
/// through all of them (so the graph is strongly connected), edge times at
/// roughly twenty miles per hour with direction-specific jitter. Requests
/// get a fifteen-minute service window from submission, a ride budget of
/// 1.5 times the direct travel time, and a fare of a base amount plus a
/// per-mile rate on the direct distance. Each request is decided in the
/// interval after its submission.
pub fn generate_scenario(params: &GenParams) -> Result<Scenario, SimError> {
    if params.vertices < 2 {
        return Err(SimError::Scenario("need at least two vertices"));
    }
    if params.stations == 0 || params.stations > params.vertices {
        return Err(SimError::Scenario("station count must be in [1, vertices]"));
    }
    if params.vehicles == 0 {
        return Err(SimError::Scenario("need at least one vehicle"));
    }
    if !params.span.is_positive() || !params.interval.is_positive() {
        return Err(SimError::Scenario("span and interval must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.vertices as u64;
    let coords: BTreeMap<VertexId, (i64, i64)> = (0..n)
        .map(|v| {
            let x = rng.gen_range(0..10_000i64);
            let y = rng.gen_range(0..10_000i64);
            (VertexId(v), (x, y))
        })
        .collect();
    let euclid = |a: VertexId, b: VertexId| -> i64 {
        let (ax, ay) = coords[&a];
        let (bx, by) = coords[&b];
        let (dx, dy) = (ax - bx, ay - by);
        (((dx * dx + dy * dy) as f64).sqrt()).round() as i64
    };

    let mut pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let link = |a: VertexId, b: VertexId, pairs: &mut BTreeSet<(VertexId, VertexId)>| {
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    };
    let mut order: Vec<VertexId> = coords.keys().copied().collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    for i in 0..order.len() {
        link(order[i], order[(i + 1) % order.len()], &mut pairs);
    }
    for &v in coords.keys() {
        let mut near: Vec<VertexId> = coords.keys().copied().filter(|&u| u != v).collect();
        near.sort_by_key(|&u| (euclid(v, u), u));
        for &u in near.iter().take(3) {
            link(v, u, &mut pairs);
        }
    }

    let mut edges = Vec::new();
    for &(a, b) in &pairs {
        let cost = Distance::from_millimiles(euclid(a, b).max(1));
        // 20 mph is 180 ms per millimile.
        for (from, to) in [(a, b), (b, a)] {
            let jitter = rng.gen_range(80..=120i64);
            let time = TimeDelta::from_millis((cost.millimiles() * 180 * jitter) / 100);
            edges.push((from, to, EdgeAttrs { cost, time }));
        }
    }

    let mut shuffled: Vec<VertexId> = coords.keys().copied().collect();
    shuffled.shuffle(&mut rng);
    let stations: Vec<VertexId> = shuffled[..params.stations as usize].to_vec();
    let network = RoadNetwork::new(coords.keys().copied(), edges, stations)?;
    let reduced = network.reduce(network.vertices())?;

    let vertex_list: Vec<VertexId> = network.vertices().iter().copied().collect();
    let refuel_full = TimeDelta::from_seconds(14_400.0);
    let vehicles: Vec<Vehicle> = (1..=params.vehicles as u64)
        .map(|id| {
            let at = vertex_list[rng.gen_range(0..vertex_list.len())];
            Vehicle::idle(VehicleId(id), at, refuel_full, 5)
        })
        .collect();

    let span_ms = params.span.millis();
    let interval_ms = params.interval.millis();
    let mut arrivals: Vec<(u32, Request)> = Vec::new();
    for id in 1..=params.requests as u64 {
        let (pickup, dropoff) = loop {
            let p = vertex_list[rng.gen_range(0..vertex_list.len())];
            let d = vertex_list[rng.gen_range(0..vertex_list.len())];
            if p != d {
                break (p, d);
            }
        };
        let leg = reduced
            .leg(pickup, dropoff)
            .expect("generated network is strongly connected");
        let submitted = rng.gen_range(0..span_ms);
        let earliest = TimePoint::from_millis(submitted);
        let window = TimeWindow {
            earliest: Some(earliest),
            latest: Some(earliest + TimeDelta::from_seconds(900.0)),
        };
        let fare_cents = 250 + div_round_half_up(300 * leg.cost.millimiles(), 1000);
        let request = Request {
            id: RequestId(id),
            pickup,
            dropoff,
            max_ride: TimeDelta::from_millis(leg.time.millis() * 3 / 2),
            window,
            seats: rng.gen_range(1..=5),
            fare: Money::from_cents(fare_cents),
            state: RequestState::New,
            assigned_vehicle: None,
            compensated: false,
        };
        let interval = (submitted / interval_ms) as u32 + 1;
        arrivals.push((interval, request));
    }
    arrivals.sort_by_key(|(interval, r)| (*interval, r.id));
    let last_interval = arrivals.iter().map(|(i, _)| *i).max().unwrap_or(0);
    let horizon = params.horizon.unwrap_or(last_interval + 2);

    let scenario = Scenario {
        network,
        vehicles,
        arrivals,
        config: SimConfig {
            interval: params.interval,
            horizon,
            refuel_full,
            ga: params.ga,
            ..SimConfig::default()
        },
    };
    scenario.validate()?;
    Ok(scenario)
}
