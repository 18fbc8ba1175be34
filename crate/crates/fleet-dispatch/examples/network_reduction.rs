//! Builds a small road network where the cheapest route and the fastest
//! route disagree, reduces it to the vertices a plan cares about, and shows
//! what the reduction keeps: per-pair minimum-cost paths with their travel
//! times. Route legs follow fuel cost, not time, so reduced travel times can
//! violate the triangle inequality; the scheduler accounts for that.
//!
//! Run with: cargo run --example network_reduction

use fleet_dispatch::network::{EdgeAttrs, RoadNetwork, VertexId};
use fleet_dispatch::units::{Distance, TimeDelta};
use std::collections::BTreeSet;

fn v(n: u64) -> VertexId {
    VertexId(n)
}

fn edge(cost_miles: f64, time_secs: f64) -> EdgeAttrs {
    EdgeAttrs {
        cost: Distance::from_miles(cost_miles),
        time: TimeDelta::from_seconds(time_secs),
    }
}

fn main() {
    // Two ways from 0 to 3: the highway detour 0-1-3 is long but fast, the
    // direct street 0-2-3 is short but slow. Vertex 4 is a refuel station
    // hanging off 3.
    let mut both = Vec::new();
    for (a, b, e) in [
        (0, 1, edge(4.0, 120.0)),
        (1, 3, edge(4.0, 120.0)),
        (0, 2, edge(1.5, 300.0)),
        (2, 3, edge(1.5, 300.0)),
        (3, 4, edge(1.0, 60.0)),
    ] {
        both.push((v(a), v(b), e));
        both.push((v(b), v(a), e));
    }
    let network = RoadNetwork::new((0..5).map(v), both, [v(4)]).unwrap();

    let fastest = network.shortest_path(v(0), v(3)).unwrap().unwrap();
    println!(
        "cheapest 0->3: {:?}  {:.1} miles, {:.0} s",
        fastest.path,
        fastest.cost.miles(),
        fastest.time.seconds()
    );

    // Reduce to the vertices a plan would visit: endpoints and the station.
    let keep: BTreeSet<VertexId> = [v(0), v(1), v(3), v(4)].into();
    let reduced = network.reduce(&keep).unwrap();
    println!("\nreduced pair data (minimum-cost routes):");
    for (&(a, b), leg) in reduced.pair_data() {
        println!(
            "  {a} -> {b}: {:.1} miles, {:>5.0} s via {:?}",
            leg.cost.miles(),
            leg.time.seconds(),
            leg.path
        );
    }

    // The reduced 0->3 leg takes the cheap slow street, so driving 0->3
    // directly is slower than the 0->1 then 1->3 detour: travel time over
    // reduced legs is not a metric.
    let direct = reduced.leg(v(0), v(3)).unwrap();
    let hop1 = reduced.leg(v(0), v(1)).unwrap();
    let hop2 = reduced.leg(v(1), v(3)).unwrap();
    println!(
        "\ntime 0->3 direct: {:.0} s, via 1: {:.0} s (cost {:.1} vs {:.1} miles)",
        direct.time.seconds(),
        (hop1.time + hop2.time).seconds(),
        direct.cost.miles(),
        (hop1.cost + hop2.cost).miles()
    );

    // A key-vertex route expands back to the full driving path.
    let route = [v(0), v(3), v(4)];
    let full = reduced.expand_route(&route).unwrap();
    println!("route {route:?} expands to {full:?}");

    // Travel times change with traffic; costs and paths are re-derived.
    let mut updated = network.clone();
    updated.set_edge_time(v(0), v(2), TimeDelta::from_seconds(1200.0)).unwrap();
    let after = updated.reduce(&keep).unwrap();
    let direct_after = &after.pair_data()[&(v(0), v(3))];
    println!(
        "after slowing street 0->2: 0->3 still {:.1} miles but {:.0} s via {:?}",
        direct_after.cost.miles(),
        direct_after.time.seconds(),
        direct_after.path
    );
    println!(
        "network fingerprint changed: {}",
        network.content_hash() != updated.content_hash()
    );
}
