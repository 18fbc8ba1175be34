//! Admission control: decide which requests to accept and on which vehicle,
//! maximizing revenue minus fuel cost.
//!
//! A [`Chromosome`] encodes one candidate decision: per request, rejected or
//! admitted on a specific vehicle. Its profit is revenue over the admitted
//! set minus the fleet's optimal cost of serving it, and is "infeasible"
//! (worse than every profit, including negative ones) when any vehicle's
//! subproblem cannot be scheduled. [`run_admission`] searches chromosomes
//! with a genetic algorithm: tabu lists rule out impossible pairings up
//! front, survivors breed by vehicle adoption, mutation toggles admit bits,
//! and an infeasible offspring is replaced from the pre-generation backup of
//! its slot. The incumbent commitment is seeded into the initial population
//! and the best chromosome is never degraded, so the result is always at
//! least as profitable as keeping the standing plan.
//! [`brute_force_admission`] enumerates every decision for small pools and
//! serves as ground truth.
//!
//! Requests already accepted in earlier rounds stay accepted: their admit
//! bits are forced. A request on board keeps its vehicle; an accepted but
//! not yet picked-up request may move to a different vehicle.

use crate::domain::{Request, RequestId, Schedule, Vehicle, VehicleId};
use crate::fleet_scheduler::{
    evaluate_assignments, is_globally_blocked, Assignment, ExecMode, FleetError, FleetResult,
    TabuLists,
};
use crate::network::ReducedNetwork;
use crate::units::{div_round_half_up, Money, Rate};
use crate::vehicle_scheduler::SearchLimits;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// One admission decision per request in pool order: `None` rejects,
/// `Some(k)` admits on vehicle `k`. Ordering is the population tie-break.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Chromosome {
    slots: Vec<Option<VehicleId>>,
}

impl Chromosome {
    /// Builds a decision vector directly; `slots` must follow the problem's
    /// request order.
    pub fn from_slots(slots: Vec<Option<VehicleId>>) -> Self {
        Chromosome { slots }
    }

    pub fn slots(&self) -> &[Option<VehicleId>] {
        &self.slots
    }

    fn vehicles_used(&self) -> BTreeSet<VehicleId> {
        self.slots.iter().flatten().copied().collect()
    }
}

/// Chromosome profit. `Infeasible` compares below every `Profit`, negative
/// profits included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fitness {
    Infeasible,
    Profit(Money),
}

impl Fitness {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Fitness::Profit(_))
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fitness {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Fitness::*;
        match (self, other) {
            (Infeasible, Infeasible) => std::cmp::Ordering::Equal,
            (Infeasible, Profit(_)) => std::cmp::Ordering::Less,
            (Profit(_), Infeasible) => std::cmp::Ordering::Greater,
            (Profit(a), Profit(b)) => a.cmp(b),
        }
    }
}

/// Search-tuning knobs of the genetic algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GaConfig {
    pub n_pop: usize,
    /// Fraction of the population surviving selection.
    pub x_rate: Rate,
    /// Mutation rate: round(mu * (n_pop - 1) * pool_size) toggles per
    /// generation.
    pub mu: Rate,
    /// Probability for each non-elite chromosome to be replaced by a fresh
    /// random one after mutation.
    pub gamma: Rate,
    pub generations: u32,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            n_pop: 16,
            x_rate: Rate::from_milli(500),
            mu: Rate::from_milli(150),
            gamma: Rate::from_milli(500),
            generations: 40,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), AdmissionError> {
        if self.n_pop < 2 || self.n_pop % 2 != 0 {
            return Err(AdmissionError::BadConfig("n_pop must be even and at least 2"));
        }
        if self.x_rate.milli() == 0 || self.x_rate.milli() >= 1000 {
            return Err(AdmissionError::BadConfig("x_rate must be strictly between 0 and 1"));
        }
        if self.mu.milli() > 1000 {
            return Err(AdmissionError::BadConfig("mu must be at most 1"));
        }
        if self.gamma.milli() > 1000 {
            return Err(AdmissionError::BadConfig("gamma must be at most 1"));
        }
        if self.generations == 0 {
            return Err(AdmissionError::BadConfig("generations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AdmissionError {
    #[error("invalid GA configuration: {0}")]
    BadConfig(&'static str),
    #[error("pool of {size} exceeds the exhaustive-search cap of {cap}")]
    OracleCap { size: usize, cap: usize },
    #[error("{0} is previously admitted but has no holding vehicle")]
    ForcedHolderMissing(RequestId),
    #[error("no feasible decision covers the previously admitted requests")]
    ForcedSetInfeasible,
    #[error(transparent)]
    Fleet(#[from] FleetError),
}

/// Everything a single admission round is decided against. The pool holds
/// normalized requests (on-board ones rewritten to continue from their
/// vehicle), tabu lists are prebuilt, and money figures derive from the
/// fare discount and the fuel price.
pub struct AdmissionProblem<'a> {
    pub pool: &'a BTreeMap<RequestId, Request>,
    pub vehicles: &'a BTreeMap<VehicleId, Vehicle>,
    pub rn: &'a ReducedNetwork,
    pub tabu: &'a TabuLists,
    pub limits: &'a SearchLimits,
    pub mode: ExecMode,
    /// Fare fraction refunded to the passenger for sharing the ride.
    pub discount: Rate,
    pub fuel_cents_per_mile: i64,
    order: Vec<RequestId>,
    /// Template with every forced request admitted on its current holder and
    /// every free slot rejected.
    forced: Vec<Option<VehicleId>>,
    /// Pool-order indices of free requests some vehicle can serve.
    free_admissible: Vec<usize>,
    /// Pool-order indices of forced requests that may change vehicle.
    reassignable: Vec<usize>,
}

impl<'a> AdmissionProblem<'a> {
    pub fn new(
        pool: &'a BTreeMap<RequestId, Request>,
        vehicles: &'a BTreeMap<VehicleId, Vehicle>,
        rn: &'a ReducedNetwork,
        tabu: &'a TabuLists,
        limits: &'a SearchLimits,
        mode: ExecMode,
        discount: Rate,
        fuel_cents_per_mile: i64,
    ) -> Result<Self, AdmissionError> {
        let order: Vec<RequestId> = pool.keys().copied().collect();
        let mut forced = Vec::with_capacity(order.len());
        let mut free_admissible = Vec::new();
        let mut reassignable = Vec::new();
        for (i, id) in order.iter().enumerate() {
            let r = &pool[id];
            if r.is_forced() {
                let holder = r
                    .assigned_vehicle
                    .ok_or(AdmissionError::ForcedHolderMissing(*id))?;
                forced.push(Some(holder));
                if !r.is_in_service() {
                    reassignable.push(i);
                }
            } else {
                forced.push(None);
                if !is_globally_blocked(tabu, *id, vehicles) {
                    free_admissible.push(i);
                }
            }
        }
        Ok(AdmissionProblem {
            pool,
            vehicles,
            rn,
            tabu,
            limits,
            mode,
            discount,
            fuel_cents_per_mile,
            order,
            forced,
            free_admissible,
            reassignable,
        })
    }

    /// Request ids in chromosome slot order.
    pub fn order(&self) -> &[RequestId] {
        &self.order
    }

    /// The standing commitment: forced requests on their current holders,
    /// everything else rejected.
    pub fn baseline(&self) -> Chromosome {
        Chromosome {
            slots: self.forced.clone(),
        }
    }

    fn is_free(&self, slot: usize) -> bool {
        self.forced[slot].is_none()
    }

    fn to_assignment(&self, c: &Chromosome) -> Assignment {
        self.order
            .iter()
            .zip(&c.slots)
            .filter_map(|(r, s)| s.map(|k| (*r, k)))
            .collect()
    }

    /// Vehicles that can serve the request in `slot`, in id order.
    fn candidates(&self, slot: usize) -> Vec<VehicleId> {
        let id = self.order[slot];
        let empty = BTreeSet::new();
        let tabu = self.tabu.get(&id).unwrap_or(&empty);
        self.vehicles
            .keys()
            .filter(|k| !tabu.contains(k))
            .copied()
            .collect()
    }

    /// A fresh random chromosome: the forced set (not-yet-picked-up requests
    /// on a random compatible vehicle) plus at most one random free request.
    fn random_chromosome(&self, rng: &mut impl Rng) -> Chromosome {
        let mut slots = self.forced.clone();
        for &i in &self.reassignable {
            let cands = self.candidates(i);
            if !cands.is_empty() {
                slots[i] = Some(cands[rng.gen_range(0..cands.len())]);
            }
        }
        if !self.free_admissible.is_empty() {
            let i = self.free_admissible[rng.gen_range(0..self.free_admissible.len())];
            let cands = self.candidates(i);
            if !cands.is_empty() {
                slots[i] = Some(cands[rng.gen_range(0..cands.len())]);
            }
        }
        Chromosome { slots }
    }

    /// Sum of admitted revenues minus fuel cost, or `Infeasible`.
    fn profit_of(&self, c: &Chromosome, result: &Option<FleetResult>) -> Fitness {
        match result {
            None => Fitness::Infeasible,
            Some(r) => {
                let mut total = Money::ZERO;
                for (id, slot) in self.order.iter().zip(&c.slots) {
                    if slot.is_some() {
                        total += revenue(&self.pool[id], self.discount);
                    }
                }
                Fitness::Profit(total - r.total_cost.fuel_cost(self.fuel_cents_per_mile))
            }
        }
    }
}

/// What the operator earns for serving `r`: the fare minus the ride-sharing
/// discount, rounded half-up to whole cents.
pub fn revenue(r: &Request, discount: Rate) -> Money {
    Money::from_cents(discount.complement().scale_round(r.fare.cents_rounded()))
}

/// One population member with its cached evaluation.
#[derive(Debug, Clone)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub fitness: Fitness,
    pub result: Option<FleetResult>,
}

/// Best and population-mean profit of one generation, in millicents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GenerationStats {
    pub best_millicents: i64,
    pub mean_millicents: i64,
}

/// The algorithm's answer: the winning decision and everything needed to
/// commit it.
#[derive(Debug, Clone)]
pub struct AdmissionOutcome {
    pub best: Chromosome,
    pub profit: Money,
    pub assignment: Assignment,
    pub schedules: BTreeMap<VehicleId, Schedule>,
    pub total_cost: crate::units::Distance,
    pub admitted: Vec<RequestId>,
    pub rejected: Vec<RequestId>,
    pub trace: Vec<GenerationStats>,
}

fn outcome_from(problem: &AdmissionProblem, ind: Individual, trace: Vec<GenerationStats>) -> AdmissionOutcome {
    let result = ind.result.expect("outcome chromosome is feasible");
    let profit = match ind.fitness {
        Fitness::Profit(p) => p,
        Fitness::Infeasible => unreachable!("outcome chromosome is feasible"),
    };
    let assignment = problem.to_assignment(&ind.chromosome);
    let (admitted, rejected): (Vec<RequestId>, Vec<RequestId>) = problem
        .order
        .iter()
        .partition(|r| assignment.contains_key(r));
    AdmissionOutcome {
        best: ind.chromosome,
        profit,
        assignment,
        schedules: result.schedules,
        total_cost: result.total_cost,
        admitted,
        rejected,
        trace,
    }
}

/// Evaluates `chromosomes` in one batch. Entry `i` pairs fitness with the
/// fleet solution behind it.
pub fn fitness(
    chromosomes: &[Chromosome],
    problem: &AdmissionProblem,
) -> Result<Vec<(Fitness, Option<FleetResult>)>, FleetError> {
    let assignments: Vec<Assignment> = chromosomes
        .iter()
        .map(|c| problem.to_assignment(c))
        .collect();
    let results = evaluate_assignments(
        &assignments,
        problem.vehicles,
        problem.pool,
        problem.rn,
        problem.limits,
        problem.mode,
    )?;
    Ok(chromosomes
        .iter()
        .zip(results)
        .map(|(c, r)| (problem.profit_of(c, &r), r))
        .collect())
}

fn evaluate_one(
    chromosome: Chromosome,
    problem: &AdmissionProblem,
) -> Result<Individual, FleetError> {
    let mut evaluated = fitness(std::slice::from_ref(&chromosome), problem)?;
    let (fit, result) = evaluated.pop().unwrap();
    Ok(Individual {
        chromosome,
        fitness: fit,
        result,
    })
}

/// Attempts per population slot before falling back to the baseline
/// chromosome during initialization.
const INIT_RESAMPLE_ATTEMPTS: usize = 32;

/// Builds the starting population: slot 0 is the standing commitment, every
/// other slot a random chromosome resampled until feasible (baseline
/// fallback after [`INIT_RESAMPLE_ATTEMPTS`]).
pub fn init_population(
    problem: &AdmissionProblem,
    cfg: &GaConfig,
    rng: &mut impl Rng,
) -> Result<Vec<Individual>, AdmissionError> {
    let baseline = evaluate_one(problem.baseline(), problem)?;
    if !baseline.fitness.is_feasible() {
        return Err(AdmissionError::ForcedSetInfeasible);
    }
    let mut pop = Vec::with_capacity(cfg.n_pop);
    pop.push(baseline.clone());
    for _ in 1..cfg.n_pop {
        let mut chosen = None;
        for _ in 0..INIT_RESAMPLE_ATTEMPTS {
            let candidate = evaluate_one(problem.random_chromosome(rng), problem)?;
            if candidate.fitness.is_feasible() {
                chosen = Some(candidate);
                break;
            }
        }
        pop.push(chosen.unwrap_or_else(|| baseline.clone()));
    }
    Ok(pop)
}

/// Sorts best-first: fitness descending, chromosome ascending on ties.
fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| {
        b.fitness
            .cmp(&a.fitness)
            .then_with(|| a.chromosome.cmp(&b.chromosome))
    });
}

/// Selection: the top `x_rate` fraction survives; breeding pairs are drawn
/// by rank weight (rank n of s gets weight s - n + 1) without replacement
/// within each pair. Returns the survivors and the pair indices into them.
pub fn select_survivors_and_pair(
    population: &[Individual],
    cfg: &GaConfig,
    rng: &mut impl Rng,
) -> (Vec<Individual>, Vec<(usize, usize)>) {
    let n = population.len();
    let s = (cfg.x_rate.scale_ceil(n as i64) as usize).clamp(1, n);
    let survivors: Vec<Individual> = population[..s].to_vec();
    let children_needed = n - s;
    let n_pairs = children_needed.div_ceil(2);
    let mut pairs = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        if s == 1 {
            pairs.push((0, 0));
            continue;
        }
        let weight = |rank: usize| (s - rank) as u64;
        let total: u64 = (1..=s as u64).sum();
        let mut draw = |exclude: Option<usize>| {
            let t = match exclude {
                None => total,
                Some(e) => total - weight(e),
            };
            let mut x = rng.gen_range(0..t);
            for rank in 0..s {
                if Some(rank) == exclude {
                    continue;
                }
                let w = weight(rank);
                if x < w {
                    return rank;
                }
                x -= w;
            }
            unreachable!("weights cover the draw range")
        };
        let first = draw(None);
        let second = draw(Some(first));
        pairs.push((first, second));
    }
    (survivors, pairs)
}

/// Breeding: each child copies its parent; if the other parent uses a
/// vehicle this parent does not, one such vehicle is drawn and the child
/// admits every still-rejected free request that vehicle can serve.
pub fn crossover(
    parent_i: &Chromosome,
    parent_j: &Chromosome,
    problem: &AdmissionProblem,
    rng: &mut impl Rng,
) -> (Chromosome, Chromosome) {
    let adopt = |base: &Chromosome, other: &Chromosome, rng: &mut dyn rand::RngCore| {
        let mut child = base.clone();
        let missing: Vec<VehicleId> = other
            .vehicles_used()
            .difference(&base.vehicles_used())
            .copied()
            .collect();
        if missing.is_empty() {
            return child;
        }
        let k = missing[rng.gen_range(0..missing.len())];
        for slot in 0..child.slots.len() {
            if !problem.is_free(slot) || child.slots[slot].is_some() {
                continue;
            }
            let id = problem.order[slot];
            let blocked = problem
                .tabu
                .get(&id)
                .map_or(false, |t| t.contains(&k));
            if !blocked {
                child.slots[slot] = Some(k);
            }
        }
        child
    };
    let child_i = adopt(parent_i, parent_j, rng);
    let child_j = adopt(parent_j, parent_i, rng);
    (child_i, child_j)
}

/// Mutation: `round(mu * (n_pop - 1) * pool_size)` toggles land on random
/// free bits of non-elite chromosomes (positions that are forced or globally
/// blocked are redrawn). A toggle on a rejected slot admits it on a random
/// compatible vehicle; on an admitted slot it rejects. Afterwards each
/// non-elite chromosome is replaced by a fresh random one with probability
/// gamma. Returns the dirtied slot indices.
pub fn mutate(
    population: &mut [Individual],
    problem: &AdmissionProblem,
    cfg: &GaConfig,
    rng: &mut impl Rng,
) -> BTreeSet<usize> {
    let mut dirty = BTreeSet::new();
    let n = population.len();
    if n <= 1 {
        return dirty;
    }
    let pool_len = problem.order.len();
    let togglable = !problem.free_admissible.is_empty();
    if togglable {
        let toggles = div_round_half_up(
            cfg.mu.milli() as i64 * (n as i64 - 1) * pool_len as i64,
            1000,
        );
        for _ in 0..toggles {
            let (member, slot) = loop {
                let member = rng.gen_range(1..n);
                let slot = rng.gen_range(0..pool_len);
                if !problem.is_free(slot) {
                    continue;
                }
                if is_globally_blocked(problem.tabu, problem.order[slot], problem.vehicles) {
                    continue;
                }
                break (member, slot);
            };
            let c = &mut population[member].chromosome;
            if c.slots[slot].is_some() {
                c.slots[slot] = None;
            } else {
                let cands = problem.candidates(slot);
                c.slots[slot] = Some(cands[rng.gen_range(0..cands.len())]);
            }
            dirty.insert(member);
        }
    }
    for member in 1..n {
        if rng.gen_range(0..1000) < cfg.gamma.milli() as i64 {
            population[member].chromosome = problem.random_chromosome(rng);
            dirty.insert(member);
        }
    }
    dirty
}

/// Runs the genetic algorithm and returns the best decision found. The
/// trace has one entry per generation, starting with the initial
/// population's statistics.
pub fn run_admission(
    problem: &AdmissionProblem,
    cfg: &GaConfig,
) -> Result<AdmissionOutcome, AdmissionError> {
    cfg.validate()?;
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = init_population(problem, cfg, &mut rng)?;
    sort_population(&mut pop);
    let mut trace = vec![stats_of(&pop)];
    for _ in 0..cfg.generations {
        let backup = pop.clone();
        let (survivors, pairs) = select_survivors_and_pair(&pop, cfg, &mut rng);
        let children_needed = pop.len() - survivors.len();
        let mut next = survivors;
        'breed: for (a, b) in &pairs {
            let (ca, cb) = crossover(
                &next[*a].chromosome.clone(),
                &next[*b].chromosome.clone(),
                problem,
                &mut rng,
            );
            for child in [ca, cb] {
                if next.len() == cfg.n_pop {
                    break 'breed;
                }
                next.push(Individual {
                    chromosome: child,
                    fitness: Fitness::Infeasible,
                    result: None,
                });
            }
        }
        debug_assert_eq!(next.len(), cfg.n_pop);
        let mut dirty = mutate(&mut next, problem, cfg, &mut rng);
        for fresh in cfg.n_pop - children_needed..cfg.n_pop {
            dirty.insert(fresh);
        }
        let dirty: Vec<usize> = dirty.into_iter().collect();
        let chromosomes: Vec<Chromosome> =
            dirty.iter().map(|&i| next[i].chromosome.clone()).collect();
        let evaluated = fitness(&chromosomes, problem)?;
        for (&i, (fit, result)) in dirty.iter().zip(evaluated) {
            next[i].fitness = fit;
            next[i].result = result;
        }
        for (i, member) in next.iter_mut().enumerate() {
            if !member.fitness.is_feasible() {
                *member = backup[i].clone();
            }
        }
        sort_population(&mut next);
        trace.push(stats_of(&next));
        pop = next;
    }
    let best = pop.into_iter().next().expect("population is never empty");
    Ok(outcome_from(problem, best, trace))
}

fn stats_of(pop: &[Individual]) -> GenerationStats {
    let profits: Vec<i64> = pop
        .iter()
        .map(|i| match i.fitness {
            Fitness::Profit(p) => p.millicents(),
            Fitness::Infeasible => unreachable!("population is always feasible"),
        })
        .collect();
    GenerationStats {
        best_millicents: profits.iter().copied().max().unwrap_or(0),
        mean_millicents: profits.iter().sum::<i64>().div_euclid(profits.len().max(1) as i64),
    }
}

/// Cap on the pool size [`brute_force_admission`] will enumerate.
pub const ADMISSION_ORACLE_CAP: usize = 5;

/// Ground truth: enumerates every admission decision (free requests may be
/// rejected or placed on any compatible vehicle; forced ones stay admitted)
/// and returns the most profitable. Ties keep the first decision in
/// reject-before-admit, lowest-vehicle-first order.
pub fn brute_force_admission(
    problem: &AdmissionProblem,
) -> Result<AdmissionOutcome, AdmissionError> {
    if problem.order.len() > ADMISSION_ORACLE_CAP {
        return Err(AdmissionError::OracleCap {
            size: problem.order.len(),
            cap: ADMISSION_ORACLE_CAP,
        });
    }
    let choices: Vec<Vec<Option<VehicleId>>> = (0..problem.order.len())
        .map(|slot| {
            let id = problem.order[slot];
            let r = &problem.pool[&id];
            if r.is_in_service() {
                vec![r.assigned_vehicle]
            } else if r.is_forced() {
                problem.candidates(slot).into_iter().map(Some).collect()
            } else {
                let mut c: Vec<Option<VehicleId>> = vec![None];
                c.extend(problem.candidates(slot).into_iter().map(Some));
                c
            }
        })
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return Err(AdmissionError::ForcedSetInfeasible);
    }
    let mut counters = vec![0usize; choices.len()];
    let mut best: Option<Individual> = None;
    loop {
        let chromosome = Chromosome {
            slots: counters
                .iter()
                .enumerate()
                .map(|(i, &c)| choices[i][c])
                .collect(),
        };
        let candidate = evaluate_one(chromosome, problem)?;
        if candidate.fitness.is_feasible() {
            let better = match &best {
                None => true,
                Some(b) => candidate.fitness > b.fitness,
            };
            if better {
                best = Some(candidate);
            }
        }
        let mut pos = counters.len();
        loop {
            if pos == 0 {
                return match best {
                    None => Err(AdmissionError::ForcedSetInfeasible),
                    Some(b) => Ok(outcome_from(problem, b, Vec::new())),
                };
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
