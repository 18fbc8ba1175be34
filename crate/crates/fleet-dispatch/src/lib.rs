//! Fleet scheduling and admission control for a shared autonomous vehicle
//! service.
//!
//! Passengers submit ride requests (pickup, dropoff, service window, ride
//! budget, party size, fare) and a fixed fleet of capacity- and
//! range-limited vehicles serves the ones worth serving. The library splits
//! that problem into layers, bottom up:
//!
//! * [`units`]: exact integer quantities (distance, time, money, rates), so
//!   every computation is deterministic and reproducible bit for bit.
//! * [`network`]: the road graph, shortest paths, and the reduction that
//!   collapses it to the vertices a plan actually visits.
//! * [`domain`]: requests, vehicles, schedules, and their invariants.
//! * [`vehicle_scheduler`]: optimal single-vehicle routing over an assigned
//!   request group (branch and bound over stop sequences).
//! * [`fleet_scheduler`]: per-vehicle decomposition of an assignment, with
//!   sequential and worker-pool execution modes and an exhaustive oracle.
//! * [`admission`]: the profit-maximizing admission decision (genetic
//!   search over admit/assign chromosomes, plus an exhaustive oracle).
//! * [`simulator`]: rolling-horizon operation: request arrival, periodic
//!   re-decision, commitment tracking, traffic updates, and no-shows.
//! * [`validate`]: an independent schedule checker used by tests and
//!   reports.
//! * [`cli`]: the `fleet-dispatch` binary (`gen`, `schedule`, `admit`,
//!   `simulate`).
//!
//! The `examples/` directory walks the same layers: `network_reduction`,
//! `single_vehicle_schedule`, `fleet_decomposition`, `admission_ga`,
//! `horizon_simulation`, and `disruptions`.

pub mod admission;
pub mod cli;
pub mod domain;
pub mod fleet_scheduler;
pub mod network;
pub mod simulator;
pub mod units;
pub mod validate;
pub mod vehicle_scheduler;
