//! Road network and its reduction to the key-vertex graph.
//!
//! Planning never runs on the raw road graph. [`RoadNetwork::reduce`] collapses
//! it to the vertices that matter for a planning round (vehicle positions,
//! pickups, dropoffs, refuel stations) and precomputes minimum-cost paths
//! between every ordered pair, so the schedulers treat any leg as a single
//! edge. [`ReducedNetwork::expand_route`] maps a key-vertex route back to the
//! full road path for reporting.
//!
//! Edge costs are distances (fuel burn is proportional) and may be asymmetric.
//! Shortest paths minimize cost; the travel time of a leg is the time along
//! the chosen minimum-cost path, not an independently minimized time. Ties
//! between equal-cost paths go to the lexicographically smallest vertex
//! sequence, which keeps every downstream optimum reproducible.

use crate::units::{Distance, TimeDelta};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Identifier of a road-network vertex.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
#[repr(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Cost and travel time of a directed edge or reduced leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub cost: Distance,
    pub time: TimeDelta,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge {0} -> {1} must have positive cost and time")]
    NonPositiveEdge(VertexId, VertexId),
    #[error("self loop at {0}")]
    SelfLoop(VertexId),
    #[error("refuel station {0} is not a vertex")]
    StationNotVertex(VertexId),
    #[error("refuel station {0} is not a key vertex")]
    StationNotKey(VertexId),
    #[error("no edge {0} -> {1}")]
    NoSuchEdge(VertexId, VertexId),
    #[error("{0} is not a key vertex")]
    NotKeyVertex(VertexId),
    #[error("no route from {0} to {1}")]
    NoRoute(VertexId, VertexId),
}

/// Result of a single-pair shortest-path query: minimum cost, time along the
/// chosen path, and the full vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathResult {
    pub cost: Distance,
    pub time: TimeDelta,
    pub path: Vec<VertexId>,
}

/// Directed road graph with designated refuel stations.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<(VertexId, VertexId), EdgeAttrs>,
    refuel_stations: BTreeSet<VertexId>,
    adjacency: BTreeMap<VertexId, Vec<(VertexId, EdgeAttrs)>>,
}

impl RoadNetwork {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, EdgeAttrs)>,
        refuel_stations: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, NetworkError> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut edge_map = BTreeMap::new();
        for (i, j, attrs) in edges {
            if i == j {
                return Err(NetworkError::SelfLoop(i));
            }
            for v in [i, j] {
                if !vertices.contains(&v) {
                    return Err(NetworkError::UnknownVertex(v));
                }
            }
            if attrs.cost.millimiles() <= 0 || !attrs.time.is_positive() {
                return Err(NetworkError::NonPositiveEdge(i, j));
            }
            if edge_map.insert((i, j), attrs).is_some() {
                return Err(NetworkError::DuplicateEdge(i, j));
            }
        }
        let refuel_stations: BTreeSet<VertexId> = refuel_stations.into_iter().collect();
        for &s in &refuel_stations {
            if !vertices.contains(&s) {
                return Err(NetworkError::StationNotVertex(s));
            }
        }
        let mut adjacency: BTreeMap<VertexId, Vec<(VertexId, EdgeAttrs)>> = BTreeMap::new();
        for (&(i, j), &attrs) in &edge_map {
            adjacency.entry(i).or_default().push((j, attrs));
        }
        Ok(RoadNetwork {
            vertices,
            edges: edge_map,
            refuel_stations,
            adjacency,
        })
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeMap<(VertexId, VertexId), EdgeAttrs> {
        &self.edges
    }

    pub fn refuel_stations(&self) -> &BTreeSet<VertexId> {
        &self.refuel_stations
    }

    /// Replaces the travel time of an existing edge (traffic condition change;
    /// distance, and therefore cost, is unaffected).
    pub fn set_edge_time(
        &mut self,
        i: VertexId,
        j: VertexId,
        time: TimeDelta,
    ) -> Result<(), NetworkError> {
        if !time.is_positive() {
            return Err(NetworkError::NonPositiveEdge(i, j));
        }
        let attrs = self
            .edges
            .get_mut(&(i, j))
            .ok_or(NetworkError::NoSuchEdge(i, j))?;
        attrs.time = time;
        let adj = self.adjacency.get_mut(&i).expect("edge endpoint has adjacency");
        for entry in adj.iter_mut() {
            if entry.0 == j {
                entry.1.time = time;
            }
        }
        Ok(())
    }

    /// Stable digest of the graph content, used to key reduction caches.
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in &self.vertices {
            v.0.hash(&mut h);
        }
        for (&(i, j), attrs) in &self.edges {
            (i.0, j.0, attrs.cost.millimiles(), attrs.time.millis()).hash(&mut h);
        }
        for s in &self.refuel_stations {
            s.0.hash(&mut h);
        }
        h.finish()
    }

    /// Minimum-cost path from `from` to `to`. Returns `None` when `to` is
    /// unreachable. Equal-cost ties resolve to the lexicographically smallest
    /// vertex sequence; the reported time is the time along that path.
    pub fn shortest_path(
        &self,
        from: VertexId,
        to: VertexId,
    ) -> Result<Option<PathResult>, NetworkError> {
        for v in [from, to] {
            if !self.vertices.contains(&v) {
                return Err(NetworkError::UnknownVertex(v));
            }
        }
        let mut paths = self.shortest_paths_from(from);
        Ok(paths.remove(&to))
    }

    /// Dijkstra from `source` over edge cost, returning the best path to every
    /// reachable vertex.
    ///
    /// With strictly positive costs every equal-cost relaxation into a vertex
    /// comes from a predecessor that settled strictly earlier, so keeping the
    /// lexicographically smallest path per vertex during relaxation yields the
    /// globally lexicographically smallest equal-cost path.
    fn shortest_paths_from(&self, source: VertexId) -> BTreeMap<VertexId, PathResult> {
        let mut best: BTreeMap<VertexId, PathResult> = BTreeMap::new();
        best.insert(
            source,
            PathResult {
                cost: Distance::ZERO,
                time: TimeDelta::ZERO,
                path: vec![source],
            },
        );
        let mut heap: BinaryHeap<Reverse<(Distance, VertexId)>> = BinaryHeap::new();
        heap.push(Reverse((Distance::ZERO, source)));
        let mut settled: BTreeSet<VertexId> = BTreeSet::new();

        while let Some(Reverse((cost, u))) = heap.pop() {
            if settled.contains(&u) || cost > best[&u].cost {
                continue;
            }
            settled.insert(u);
            let u_entry = best[&u].clone();
            if let Some(neighbors) = self.adjacency.get(&u) {
                for &(v, attrs) in neighbors {
                    let cand_cost = u_entry.cost + attrs.cost;
                    let better = match best.get(&v) {
                        None => true,
                        Some(cur) => {
                            cand_cost < cur.cost || (cand_cost == cur.cost && {
                                let mut cand_path = u_entry.path.clone();
                                cand_path.push(v);
                                cand_path < cur.path
                            })
                        }
                    };
                    if better {
                        let mut path = u_entry.path.clone();
                        path.push(v);
                        best.insert(
                            v,
                            PathResult {
                                cost: cand_cost,
                                time: u_entry.time + attrs.time,
                                path,
                            },
                        );
                        heap.push(Reverse((cand_cost, v)));
                    }
                }
            }
        }
        best
    }

    /// Collapses the network onto `key_vertices`. Every refuel station must be
    /// a key vertex. Pair data covers all ordered pairs of distinct key
    /// vertices connected in the road graph; same-vertex legs are implicit
    /// zero legs.
    pub fn reduce(&self, key_vertices: &BTreeSet<VertexId>) -> Result<ReducedNetwork, NetworkError> {
        for &v in key_vertices {
            if !self.vertices.contains(&v) {
                return Err(NetworkError::UnknownVertex(v));
            }
        }
        for &s in &self.refuel_stations {
            if !key_vertices.contains(&s) {
                return Err(NetworkError::StationNotKey(s));
            }
        }
        let mut pair_data = BTreeMap::new();
        for &i in key_vertices {
            let paths = self.shortest_paths_from(i);
            for &j in key_vertices {
                if i == j {
                    continue;
                }
                if let Some(p) = paths.get(&j) {
                    pair_data.insert((i, j), p.clone());
                }
            }
        }
        Ok(ReducedNetwork {
            key_vertices: key_vertices.clone(),
            refuel_stations: self.refuel_stations.clone(),
            pair_data,
        })
    }
}

/// Key-vertex graph: precomputed minimum-cost legs between every ordered pair
/// of key vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    key_vertices: BTreeSet<VertexId>,
    refuel_stations: BTreeSet<VertexId>,
    pair_data: BTreeMap<(VertexId, VertexId), PathResult>,
}

impl ReducedNetwork {
    pub fn key_vertices(&self) -> &BTreeSet<VertexId> {
        &self.key_vertices
    }

    pub fn refuel_stations(&self) -> &BTreeSet<VertexId> {
        &self.refuel_stations
    }

    pub fn pair_data(&self) -> &BTreeMap<(VertexId, VertexId), PathResult> {
        &self.pair_data
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.key_vertices.contains(&v)
    }

    /// Cost and time of the leg `from -> to`; `None` when unreachable.
    /// A same-vertex leg is free.
    pub fn leg(&self, from: VertexId, to: VertexId) -> Option<EdgeAttrs> {
        if from == to {
            return Some(EdgeAttrs {
                cost: Distance::ZERO,
                time: TimeDelta::ZERO,
            });
        }
        self.pair_data.get(&(from, to)).map(|p| EdgeAttrs {
            cost: p.cost,
            time: p.time,
        })
    }

    /// Expands a key-vertex route into the underlying road path, deduplicating
    /// the shared endpoint of consecutive legs.
    pub fn expand_route(&self, key_route: &[VertexId]) -> Result<Vec<VertexId>, NetworkError> {
        for &v in key_route {
            if !self.contains(v) {
                return Err(NetworkError::NotKeyVertex(v));
            }
        }
        let mut out: Vec<VertexId> = Vec::new();
        match key_route.first() {
            None => return Ok(out),
            Some(&first) => out.push(first),
        }
        for w in key_route.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == b {
                continue;
            }
            let pair = self
                .pair_data
                .get(&(a, b))
                .ok_or(NetworkError::NoRoute(a, b))?;
            out.extend_from_slice(&pair.path[1..]);
        }
        Ok(out)
    }
}

/// Cache of reductions keyed by graph content and key-vertex set, so repeated
/// planning rounds on an unchanged graph reuse the precomputation.
#[derive(Debug, Default)]
pub struct ReductionCache {
    entries: HashMap<(u64, Vec<VertexId>), Arc<ReducedNetwork>>,
}

impl ReductionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reduce(
        &mut self,
        net: &RoadNetwork,
        key_vertices: &BTreeSet<VertexId>,
    ) -> Result<Arc<ReducedNetwork>, NetworkError> {
        let key = (
            net.content_hash(),
            key_vertices.iter().copied().collect::<Vec<_>>(),
        );
        if let Some(hit) = self.entries.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let reduced = Arc::new(net.reduce(key_vertices)?);
        self.entries.insert(key, Arc::clone(&reduced));
        Ok(reduced)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Serialized form of a road network: costs in miles, times in seconds.
#[derive(Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub format_version: u32,
    pub vertices: Vec<u64>,
    pub edges: Vec<NetworkFileEdge>,
    pub refuel_stations: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NetworkFileEdge {
    pub i: u64,
    pub j: u64,
    pub cost: f64,
    pub time: f64,
}

pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum NetworkFileError {
    #[error("unsupported network format_version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Invalid(#[from] NetworkError),
}

impl NetworkFile {
    pub fn from_network(net: &RoadNetwork) -> Self {
        NetworkFile {
            format_version: NETWORK_FORMAT_VERSION,
            vertices: net.vertices().iter().map(|v| v.0).collect(),
            edges: net
                .edges()
                .iter()
                .map(|(&(i, j), attrs)| NetworkFileEdge {
                    i: i.0,
                    j: j.0,
                    cost: attrs.cost.miles(),
                    time: attrs.time.seconds(),
                })
                .collect(),
            refuel_stations: net.refuel_stations().iter().map(|v| v.0).collect(),
        }
    }

    pub fn into_network(self) -> Result<RoadNetwork, NetworkFileError> {
        if self.format_version != NETWORK_FORMAT_VERSION {
            return Err(NetworkFileError::UnsupportedVersion(self.format_version));
        }
        let net = RoadNetwork::new(
            self.vertices.into_iter().map(VertexId),
            self.edges.into_iter().map(|e| {
                (
                    VertexId(e.i),
                    VertexId(e.j),
                    EdgeAttrs {
                        cost: Distance::from_miles(e.cost),
                        time: TimeDelta::from_seconds(e.time),
                    },
                )
            }),
            self.refuel_stations.into_iter().map(VertexId),
        )?;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(cost_mm: i64, time_ms: i64) -> EdgeAttrs {
        EdgeAttrs {
            cost: Distance::from_millimiles(cost_mm),
            time: TimeDelta::from_millis(time_ms),
        }
    }

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn chain_1_2_3() -> RoadNetwork {
        RoadNetwork::new(
            [v(1), v(2), v(3)],
            [
                (v(1), v(2), attrs(1000, 60_000)),
                (v(2), v(3), attrs(1000, 60_000)),
            ],
            [],
        )
        .unwrap()
    }

    #[test]
    fn chain_path_sums_cost_and_time() {
        let net = chain_1_2_3();
        let p = net.shortest_path(v(1), v(3)).unwrap().unwrap();
        assert_eq!(p.cost, Distance::from_miles(2.0));
        assert_eq!(p.time, TimeDelta::from_seconds(120.0));
        assert_eq!(p.path, vec![v(1), v(2), v(3)]);
    }

    #[test]
    fn same_vertex_path_is_trivial() {
        let net = chain_1_2_3();
        let p = net.shortest_path(v(2), v(2)).unwrap().unwrap();
        assert_eq!(p.cost, Distance::ZERO);
        assert_eq!(p.time, TimeDelta::ZERO);
        assert_eq!(p.path, vec![v(2)]);
    }

    #[test]
    fn unreachable_vertex_yields_none() {
        // The chain is directed, so 3 cannot reach 1.
        let net = chain_1_2_3();
        assert_eq!(net.shortest_path(v(3), v(1)).unwrap(), None);
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let net = chain_1_2_3();
        assert_eq!(
            net.shortest_path(v(1), v(9)).unwrap_err(),
            NetworkError::UnknownVertex(v(9))
        );
    }

    #[test]
    fn equal_cost_tie_takes_lexicographically_smallest_path() {
        // Two equal-cost routes 1->4: via 2 and via 3. The tie must go to
        // [1, 2, 4] even though the via-3 route is faster.
        let net = RoadNetwork::new(
            [v(1), v(2), v(3), v(4)],
            [
                (v(1), v(2), attrs(500, 60_000)),
                (v(2), v(4), attrs(500, 60_000)),
                (v(1), v(3), attrs(500, 10_000)),
                (v(3), v(4), attrs(500, 10_000)),
            ],
            [],
        )
        .unwrap();
        let p = net.shortest_path(v(1), v(4)).unwrap().unwrap();
        assert_eq!(p.cost, Distance::from_millimiles(1000));
        assert_eq!(p.path, vec![v(1), v(2), v(4)], "tie must break lexicographically");
        assert_eq!(p.time, TimeDelta::from_millis(120_000), "time follows the chosen path");
    }

    #[test]
    fn cheaper_detour_beats_direct_edge() {
        let net = RoadNetwork::new(
            [v(1), v(2), v(3)],
            [
                (v(1), v(3), attrs(5000, 10_000)),
                (v(1), v(2), attrs(1000, 60_000)),
                (v(2), v(3), attrs(1000, 60_000)),
            ],
            [],
        )
        .unwrap();
        let p = net.shortest_path(v(1), v(3)).unwrap().unwrap();
        assert_eq!(p.cost, Distance::from_millimiles(2000));
        assert_eq!(p.path, vec![v(1), v(2), v(3)]);
    }

    #[test]
    fn reduce_of_complete_triangle_has_six_pairs() {
        let mut edges = Vec::new();
        for a in 1..=3u64 {
            for b in 1..=3u64 {
                if a != b {
                    edges.push((v(a), v(b), attrs(1000, 60_000)));
                }
            }
        }
        let net = RoadNetwork::new([v(1), v(2), v(3)], edges, []).unwrap();
        let keys: BTreeSet<VertexId> = [v(1), v(2), v(3)].into_iter().collect();
        let rn = net.reduce(&keys).unwrap();
        assert_eq!(rn.pair_data().len(), 6);
        assert_eq!(
            rn.leg(v(2), v(2)),
            Some(attrs(0, 0)),
            "same-vertex leg is free"
        );
    }

    #[test]
    fn reduce_requires_stations_to_be_keys() {
        let net = RoadNetwork::new(
            [v(1), v(2)],
            [(v(1), v(2), attrs(1000, 60_000))],
            [v(2)],
        )
        .unwrap();
        let keys: BTreeSet<VertexId> = [v(1)].into_iter().collect();
        assert_eq!(
            net.reduce(&keys).unwrap_err(),
            NetworkError::StationNotKey(v(2))
        );
    }

    #[test]
    fn reduced_leg_matches_full_graph_shortest_path() {
        let net = RoadNetwork::new(
            [v(1), v(2), v(3), v(4), v(5)],
            [
                (v(1), v(2), attrs(700, 30_000)),
                (v(2), v(3), attrs(700, 30_000)),
                (v(3), v(5), attrs(700, 30_000)),
                (v(1), v(4), attrs(900, 20_000)),
                (v(4), v(5), attrs(900, 20_000)),
                (v(5), v(1), attrs(400, 20_000)),
            ],
            [],
        )
        .unwrap();
        let keys: BTreeSet<VertexId> = [v(1), v(5)].into_iter().collect();
        let rn = net.reduce(&keys).unwrap();
        let direct = net.shortest_path(v(1), v(5)).unwrap().unwrap();
        assert_eq!(rn.pair_data()[&(v(1), v(5))], direct);
        assert_eq!(direct.cost, Distance::from_millimiles(1800));
    }

    #[test]
    fn expand_route_concatenates_and_dedupes_endpoints() {
        let net = RoadNetwork::new(
            [v(1), v(2), v(3), v(4), v(5)],
            [
                (v(1), v(2), attrs(1000, 60_000)),
                (v(2), v(3), attrs(1000, 60_000)),
                (v(3), v(4), attrs(1000, 60_000)),
                (v(4), v(5), attrs(1000, 60_000)),
            ],
            [],
        )
        .unwrap();
        let keys: BTreeSet<VertexId> = [v(1), v(3), v(5)].into_iter().collect();
        let rn = net.reduce(&keys).unwrap();
        assert_eq!(
            rn.expand_route(&[v(1), v(3), v(5)]).unwrap(),
            vec![v(1), v(2), v(3), v(4), v(5)]
        );
        assert_eq!(rn.expand_route(&[v(3)]).unwrap(), vec![v(3)]);
        assert_eq!(
            rn.expand_route(&[v(3), v(3), v(5)]).unwrap(),
            vec![v(3), v(4), v(5)],
            "same-vertex legs add nothing"
        );
        assert_eq!(
            rn.expand_route(&[v(5), v(1)]).unwrap_err(),
            NetworkError::NoRoute(v(5), v(1))
        );
    }

    #[test]
    fn reduction_cache_reuses_until_graph_changes() {
        let mut net = chain_1_2_3();
        let keys: BTreeSet<VertexId> = [v(1), v(3)].into_iter().collect();
        let mut cache = ReductionCache::new();
        let a = cache.reduce(&net, &keys).unwrap();
        let b = cache.reduce(&net, &keys).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);

        net.set_edge_time(v(1), v(2), TimeDelta::from_millis(90_000))
            .unwrap();
        let c = cache.reduce(&net, &keys).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
        assert_eq!(
            c.leg(v(1), v(3)).unwrap().time,
            TimeDelta::from_millis(150_000)
        );
    }

    #[test]
    fn network_file_round_trips() {
        let net = RoadNetwork::new(
            [v(1), v(2), v(3)],
            [
                (v(1), v(2), attrs(1234, 61_500)),
                (v(2), v(3), attrs(2000, 45_000)),
            ],
            [v(3)],
        )
        .unwrap();
        let file = NetworkFile::from_network(&net);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: NetworkFile = serde_json::from_str(&json).unwrap();
        let back = parsed.into_network().unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_duplicate_and_degenerate_edges() {
        let dup = RoadNetwork::new(
            [v(1), v(2)],
            [
                (v(1), v(2), attrs(1000, 1000)),
                (v(1), v(2), attrs(2000, 2000)),
            ],
            [],
        );
        assert_eq!(dup.unwrap_err(), NetworkError::DuplicateEdge(v(1), v(2)));
        let loop_edge = RoadNetwork::new([v(1)], [(v(1), v(1), attrs(1, 1))], []);
        assert_eq!(loop_edge.unwrap_err(), NetworkError::SelfLoop(v(1)));
        let zero = RoadNetwork::new([v(1), v(2)], [(v(1), v(2), attrs(0, 1))], []);
        assert_eq!(zero.unwrap_err(), NetworkError::NonPositiveEdge(v(1), v(2)));
    }
}
