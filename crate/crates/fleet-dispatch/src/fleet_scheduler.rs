//! Fleet-level scheduling by decomposition.
//!
//! An [`Assignment`] maps each admitted request to one vehicle. Because
//! vehicles do not interact once requests are grouped, the fleet optimum for
//! a fixed assignment is the sum of independent per-vehicle optima;
//! [`solve_assignment`] evaluates exactly that, either serially
//! ([`ExecMode::Cumulative`]) or on a worker pool
//! ([`ExecMode::Distributed`]). Workers pull `AssignRequests` jobs from a
//! shared queue and answer with `CostReport`s; results are reduced in job-id
//! order, so every mode returns bit-identical output regardless of worker
//! count or completion order. A vehicle without a live worker loses nothing:
//! jobs are not pinned, and whoever is free (the coordinator alone in
//! cumulative mode) picks the subproblem up.
//!
//! [`brute_force_fleet`] enumerates every assignment of a small pool and is
//! the ground-truth fleet optimum. [`is_admissible`] and
//! [`build_tabu_lists`] answer the single-request compatibility questions
//! the admission layer is built on.

use crate::domain::{Request, RequestId, Schedule, Vehicle, VehicleId};
use crate::network::ReducedNetwork;
use crate::units::Distance;
use crate::vehicle_scheduler::{solve_vehicle, SearchLimits, SolveError};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::mpsc;
use std::sync::Mutex;

/// Request-to-vehicle mapping over the admitted set.
pub type Assignment = BTreeMap<RequestId, VehicleId>;

/// Per-vehicle tabu lists: the vehicles that cannot serve each request.
pub type TabuLists = BTreeMap<RequestId, BTreeSet<VehicleId>>;

#[derive(Debug, Clone, PartialEq)]
pub struct FleetResult {
    /// Schedules for vehicles with at least one request to serve.
    pub schedules: BTreeMap<VehicleId, Schedule>,
    /// Sum of the schedule costs.
    pub total_cost: Distance,
}

impl FleetResult {
    pub fn empty() -> Self {
        FleetResult {
            schedules: BTreeMap::new(),
            total_cost: Distance::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// The coordinator solves every subproblem in sequence.
    Cumulative,
    /// A pool of workers pulls subproblems from a shared queue.
    Distributed { workers: usize },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FleetError {
    #[error("assignment names unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("assignment names unknown request {0}")]
    UnknownRequest(RequestId),
    #[error("{request} is being served by {holder} and cannot move to {target}")]
    ForcedPairingBroken {
        request: RequestId,
        holder: VehicleId,
        target: VehicleId,
    },
    #[error("pool of {size} exceeds the exhaustive-search cap of {cap}")]
    OracleCap { size: usize, cap: usize },
    #[error("distributed mode needs at least one worker")]
    NoWorkers,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Work order: one vehicle and the requests grouped onto it.
struct AssignRequests {
    job: usize,
    vehicle: VehicleId,
    requests: Vec<RequestId>,
}

/// Answer to an `AssignRequests` job: the vehicle's optimal schedule, or
/// `None` when its subproblem is infeasible.
struct CostReport {
    job: usize,
    outcome: Result<Option<Schedule>, SolveError>,
}

/// Groups `assignment` per vehicle. Every vehicle's on-board requests join
/// its group whether or not the assignment lists them; listing one under a
/// different vehicle is an error.
fn group_assignment(
    assignment: &Assignment,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    pool: &BTreeMap<RequestId, Request>,
) -> Result<BTreeMap<VehicleId, Vec<RequestId>>, FleetError> {
    let mut groups: BTreeMap<VehicleId, Vec<RequestId>> =
        vehicles.keys().map(|k| (*k, Vec::new())).collect();
    for (r, k) in assignment {
        let req = pool.get(r).ok_or(FleetError::UnknownRequest(*r))?;
        if !vehicles.contains_key(k) {
            return Err(FleetError::UnknownVehicle(*k));
        }
        if req.is_in_service() && req.assigned_vehicle != Some(*k) {
            return Err(FleetError::ForcedPairingBroken {
                request: *r,
                holder: req.assigned_vehicle.unwrap_or(*k),
                target: *k,
            });
        }
        groups.get_mut(k).unwrap().push(*r);
    }
    for (k, vehicle) in vehicles {
        for r in &vehicle.in_service {
            if !pool.contains_key(r) {
                return Err(FleetError::UnknownRequest(*r));
            }
            match assignment.get(r) {
                Some(target) if target != k => {
                    return Err(FleetError::ForcedPairingBroken {
                        request: *r,
                        holder: *k,
                        target: *target,
                    });
                }
                Some(_) => {}
                None => groups.get_mut(k).unwrap().push(*r),
            }
        }
    }
    for members in groups.values_mut() {
        members.sort();
        members.dedup();
    }
    Ok(groups)
}

fn run_jobs(
    jobs: Vec<AssignRequests>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    pool: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
    mode: ExecMode,
) -> Result<Vec<Result<Option<Schedule>, SolveError>>, FleetError> {
    let solve_one = |job: &AssignRequests| {
        let vehicle = &vehicles[&job.vehicle];
        let group: BTreeMap<RequestId, Request> = job
            .requests
            .iter()
            .map(|r| (*r, pool[r].clone()))
            .collect();
        solve_vehicle(vehicle, &group, rn, limits)
    };
    let n = jobs.len();
    match mode {
        ExecMode::Cumulative => Ok(jobs.iter().map(|j| solve_one(j)).collect()),
        ExecMode::Distributed { workers } => {
            if workers == 0 {
                return Err(FleetError::NoWorkers);
            }
            let queue: Mutex<VecDeque<AssignRequests>> = Mutex::new(jobs.into());
            let (tx, rx) = mpsc::channel::<CostReport>();
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    let tx = tx.clone();
                    let queue = &queue;
                    let solve_one = &solve_one;
                    scope.spawn(move || loop {
                        let job = match queue.lock().unwrap().pop_front() {
                            Some(j) => j,
                            None => break,
                        };
                        let outcome = solve_one(&job);
                        if tx.send(CostReport { job: job.job, outcome }).is_err() {
                            break;
                        }
                    });
                }
            });
            drop(tx);
            let mut results: Vec<Option<Result<Option<Schedule>, SolveError>>> =
                (0..n).map(|_| None).collect();
            for report in rx {
                results[report.job] = Some(report.outcome);
            }
            Ok(results
                .into_iter()
                .map(|r| r.expect("every job reports exactly once"))
                .collect())
        }
    }
}

/// Evaluates many assignments against the same fleet and pool. Entry `i` of
/// the result corresponds to `assignments[i]`; `None` means that assignment
/// has an infeasible subproblem. Identical across execution modes.
pub fn evaluate_assignments(
    assignments: &[Assignment],
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    pool: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
    mode: ExecMode,
) -> Result<Vec<Option<FleetResult>>, FleetError> {
    let mut jobs = Vec::new();
    let mut job_spans: Vec<Vec<(usize, VehicleId)>> = Vec::with_capacity(assignments.len());
    for assignment in assignments {
        let groups = group_assignment(assignment, vehicles, pool)?;
        let mut span = Vec::new();
        for (k, members) in groups {
            if members.is_empty() {
                continue;
            }
            let job = jobs.len();
            span.push((job, k));
            jobs.push(AssignRequests {
                job,
                vehicle: k,
                requests: members,
            });
        }
        job_spans.push(span);
    }
    let mut outcomes = run_jobs(jobs, vehicles, pool, rn, limits, mode)?;
    let mut out = Vec::with_capacity(assignments.len());
    for span in job_spans {
        let mut result = FleetResult::empty();
        let mut feasible = true;
        for (job, k) in span {
            match std::mem::replace(&mut outcomes[job], Ok(None)) {
                Err(e) => return Err(e.into()),
                Ok(None) => {
                    feasible = false;
                }
                Ok(Some(schedule)) => {
                    result.total_cost += schedule.cost;
                    result.schedules.insert(k, schedule);
                }
            }
        }
        out.push(if feasible { Some(result) } else { None });
    }
    Ok(out)
}

/// Evaluates one assignment: groups requests per vehicle, solves each
/// subproblem, and sums the costs. `Ok(None)` iff any subproblem is
/// infeasible.
pub fn solve_assignment(
    assignment: &Assignment,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    pool: &BTreeMap<RequestId, Request>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
    mode: ExecMode,
) -> Result<Option<FleetResult>, FleetError> {
    Ok(evaluate_assignments(
        std::slice::from_ref(assignment),
        vehicles,
        pool,
        rn,
        limits,
        mode,
    )?
    .pop()
    .expect("one assignment in, one result out"))
}

/// Cap on the pool size [`brute_force_fleet`] will enumerate.
pub const FLEET_ORACLE_CAP: usize = 5;

/// Ground-truth fleet optimum: enumerates every assignment of the whole pool
/// (in-service requests stay pinned to their holders), evaluates each, and
/// returns the cheapest. Cost ties keep the first assignment in request-major
/// vehicle-id order. `Ok(None)` iff no assignment is feasible.
pub fn brute_force_fleet(
    pool: &BTreeMap<RequestId, Request>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
) -> Result<Option<(Assignment, FleetResult)>, FleetError> {
    if pool.len() > FLEET_ORACLE_CAP {
        return Err(FleetError::OracleCap {
            size: pool.len(),
            cap: FLEET_ORACLE_CAP,
        });
    }
    let vehicle_ids: Vec<VehicleId> = vehicles.keys().copied().collect();
    if vehicle_ids.is_empty() && !pool.is_empty() {
        return Ok(None);
    }
    let request_ids: Vec<RequestId> = pool.keys().copied().collect();
    let choices: Vec<Vec<VehicleId>> = request_ids
        .iter()
        .map(|r| {
            let req = &pool[r];
            if req.is_in_service() {
                match req.assigned_vehicle {
                    Some(k) => vec![k],
                    None => Vec::new(),
                }
            } else {
                vehicle_ids.clone()
            }
        })
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    let mut counters = vec![0usize; request_ids.len()];
    let mut best: Option<(Assignment, FleetResult)> = None;
    loop {
        let assignment: Assignment = request_ids
            .iter()
            .zip(&counters)
            .map(|(r, &c)| (*r, choices[request_ids.iter().position(|x| x == r).unwrap()][c]))
            .collect();
        if let Some(result) =
            solve_assignment(&assignment, vehicles, pool, rn, limits, ExecMode::Cumulative)?
        {
            let better = match &best {
                None => true,
                Some((_, b)) => result.total_cost < b.total_cost,
            };
            if better {
                best = Some((assignment, result));
            }
        }
        let mut pos = counters.len();
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            counters[pos] += 1;
            if counters[pos] < choices[pos].len() {
                break;
            }
            counters[pos] = 0;
        }
    }
}

/// Whether `vehicle` can serve `request` on its own, on top of the vehicle's
/// current on-board obligations. A request already on board is admissible
/// only to its holder.
pub fn is_admissible(
    request: RequestId,
    vehicle: VehicleId,
    pool: &BTreeMap<RequestId, Request>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
) -> Result<bool, FleetError> {
    let req = pool.get(&request).ok_or(FleetError::UnknownRequest(request))?;
    let k = vehicles
        .get(&vehicle)
        .ok_or(FleetError::UnknownVehicle(vehicle))?;
    if req.is_in_service() {
        return Ok(req.assigned_vehicle == Some(vehicle));
    }
    let mut group: BTreeMap<RequestId, Request> = BTreeMap::new();
    group.insert(request, req.clone());
    for r in &k.in_service {
        let onboard = pool.get(r).ok_or(FleetError::UnknownRequest(*r))?;
        group.insert(*r, onboard.clone());
    }
    Ok(solve_vehicle(k, &group, rn, limits)?.is_some())
}

/// Builds every request's tabu list: the vehicles that cannot serve it. A
/// request whose list covers the whole fleet is globally non-admissible.
pub fn build_tabu_lists(
    pool: &BTreeMap<RequestId, Request>,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
    rn: &ReducedNetwork,
    limits: &SearchLimits,
) -> Result<TabuLists, FleetError> {
    let mut out = TabuLists::new();
    for r in pool.keys() {
        let mut tabu = BTreeSet::new();
        for k in vehicles.keys() {
            if !is_admissible(*r, *k, pool, vehicles, rn, limits)? {
                tabu.insert(*k);
            }
        }
        out.insert(*r, tabu);
    }
    Ok(out)
}

/// Whether `request`'s tabu list rules out the whole fleet.
pub fn is_globally_blocked(
    tabu: &TabuLists,
    request: RequestId,
    vehicles: &BTreeMap<VehicleId, Vehicle>,
) -> bool {
    tabu.get(&request)
        .map_or(false, |t| vehicles.keys().all(|k| t.contains(k)))
}
