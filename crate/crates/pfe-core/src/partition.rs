//! Graph partitioning: weighted edge betweenness, Girvan–Newman
//! bipartition, boundary-edge extraction, and the energy bounds that make
//! windowed local solving sound.
//!
//! Shortest paths use edge length `1/|J|`, so strong couplings are short
//! distances and weakly coupled bottlenecks accumulate betweenness. The
//! boundary bound `a = 2·Σ|w|` over cut edges limits how far the projection
//! of any global optimum can sit above a side's local ground state; the
//! refined per-solution bound restricts the sum to cut edges at nodes where
//! a candidate differs from the local ground.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IsingModel, SpinConfig};
use crate::rng::rng_from_seed;
use crate::Scalar;

/// Couplings below this magnitude are treated as absent for path finding.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Relative tolerance for "equal" shortest-path lengths.
const DIST_RTOL: f64 = 1e-12;

/// Relative tolerance for betweenness ties during edge removal.
const TIE_RTOL: f64 = 1e-9;

/// A two-way (or k-way) split of a model's variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::Deserialize<'de>"))]
pub struct Partition<T> {
    /// Community id per variable.
    pub labels: Vec<u32>,
    /// Model couplings whose endpoints carry different labels, with weights.
    pub boundary_edges: Vec<(usize, usize, T)>,
    /// `2·Σ|w|` over the boundary edges.
    pub bound_a: T,
}

impl<T: Scalar> Partition<T> {
    /// Variables labelled `side`, ascending. This ordering is the local
    /// index map used by [`induced_submodel`] and [`refined_bound`].
    pub fn side_nodes(&self, side: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == side).then_some(i))
            .collect()
    }

    pub fn num_sides(&self) -> u32 {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    fn from_labels(model: &IsingModel<T>, labels: Vec<u32>) -> Self {
        let boundary_edges: Vec<(usize, usize, T)> = model
            .edges()
            .filter(|&(i, j, _)| labels[i] != labels[j])
            .collect();
        let two = T::from_f64(2.0).unwrap();
        let bound_a = two * boundary_edges.iter().map(|&(_, _, w)| w.abs()).sum::<T>();
        Self {
            labels,
            boundary_edges,
            bound_a,
        }
    }
}

/// Edge betweenness scores keyed by the canonical `(i, j)` pair.
///
/// Scores count all-pairs shortest paths, one unit per unordered pair,
/// split fractionally across equal-length paths. Path counting runs in
/// `f64` regardless of the model scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct BetweennessScores {
    scores: BTreeMap<(usize, usize), f64>,
}

impl BetweennessScores {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.scores.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.scores.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Weighted edge betweenness of the model graph under length `1/|J|`.
/// Couplings with `|J| < 1e-12` are excluded. Errors when no edges remain.
pub fn edge_betweenness<T: Scalar>(model: &IsingModel<T>) -> Result<BetweennessScores> {
    let edges = path_edges(model);
    if edges.is_empty() {
        return Err(Error::Input(
            "betweenness is undefined on a graph with no edges".into(),
        ));
    }
    let scores = brandes(model.n(), &edges);
    Ok(BetweennessScores {
        scores: edges
            .iter()
            .zip(scores)
            .map(|(&(i, j, _), s)| ((i, j), s))
            .collect(),
    })
}

/// Model edges usable for path finding: `(i, j, length)` with `i < j`.
fn path_edges<T: Scalar>(model: &IsingModel<T>) -> Vec<(usize, usize, f64)> {
    model
        .edges()
        .filter_map(|(i, j, w)| {
            let mag = w.abs().to_f64().unwrap();
            (mag >= WEIGHT_FLOOR).then_some((i, j, 1.0 / mag))
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= DIST_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Brandes accumulation over all sources; one unit of credit per unordered
/// pair. Sources run in parallel and are summed in index order, so the
/// result does not depend on scheduling.
fn brandes(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for (idx, &(u, v, len)) in edges.iter().enumerate() {
        adj[u].push((v, idx, len));
        adj[v].push((u, idx, len));
    }
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| brandes_from(&adj, n, edges.len(), s))
        .collect();
    let mut scores = vec![0.0f64; edges.len()];
    for contribution in per_source {
        for (k, c) in contribution.into_iter().enumerate() {
            scores[k] += c;
        }
    }
    for s in &mut scores {
        *s *= 0.5; // each unordered pair was counted from both endpoints
    }
    scores
}

fn brandes_from(adj: &[Vec<(usize, usize, f64)>], n: usize, m: usize, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0f64; n];
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // Heap keys are the IEEE bit patterns of non-negative distances, which
    // order identically to the values; node index breaks exact ties.
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[source] = 0.0;
    sigma[source] = 1.0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((_, v))) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, e, len) in &adj[v] {
            if settled[w] {
                continue;
            }
            let candidate = dist[v] + len;
            if dist[w].is_finite() && close(candidate, dist[w]) {
                sigma[w] += sigma[v];
                preds[w].push((v, e));
            } else if candidate < dist[w] {
                dist[w] = candidate;
                sigma[w] = sigma[v];
                preds[w].clear();
                preds[w].push((v, e));
                heap.push(Reverse((candidate.to_bits(), w)));
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    let mut contribution = vec![0.0f64; m];
    for &w in order.iter().rev() {
        for &(v, e) in &preds[w] {
            let credit = sigma[v] / sigma[w] * (1.0 + delta[w]);
            contribution[e] += credit;
            delta[v] += credit;
        }
    }
    contribution
}

fn components(n: usize, adj: &[Vec<usize>]) -> (usize, Vec<u32>) {
    let mut labels = vec![u32::MAX; n];
    let mut count = 0u32;
    for start in 0..n {
        if labels[start] != u32::MAX {
            continue;
        }
        let mut stack = vec![start];
        labels[start] = count;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if labels[u] == u32::MAX {
                    labels[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    (count as usize, labels)
}

/// Girvan–Newman bipartition: see [`girvan_newman_partition`] with `parts = 2`.
pub fn girvan_newman_bipartition<T: Scalar>(
    model: &IsingModel<T>,
    seed: u64,
) -> Result<Partition<T>> {
    girvan_newman_partition(model, seed, 2)
}

/// Split the model graph into `parts` communities by repeatedly recomputing
/// edge betweenness and deleting a maximal-betweenness edge (uniform random
/// choice among ties within relative tolerance 1e-9, driven by `seed`) until
/// the working graph has exactly `parts` connected components. Labels are
/// assigned by each component's smallest node index; boundary edges and the
/// bound are taken against the original model.
pub fn girvan_newman_partition<T: Scalar>(
    model: &IsingModel<T>,
    seed: u64,
    parts: usize,
) -> Result<Partition<T>> {
    let n = model.n();
    if n < 2 {
        return Err(Error::Input(format!(
            "partitioning needs at least 2 variables, got {n}"
        )));
    }
    if parts < 2 || parts > n {
        return Err(Error::Input(format!(
            "component count must lie in [2, {n}], got {parts}"
        )));
    }
    let mut edges = path_edges(model);
    let adj_of = |edges: &[(usize, usize, f64)]| {
        let mut adj = vec![Vec::new(); n];
        for &(i, j, _) in edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    };
    let (count, _) = components(n, &adj_of(&edges));
    if count != 1 {
        return Err(Error::Input(format!(
            "model graph has {count} connected components; split them first"
        )));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let (count, labels) = components(n, &adj_of(&edges));
        if count == parts {
            return Ok(Partition::from_labels(model, labels));
        }
        debug_assert!(count < parts, "removal can only split one component");
        let scores = brandes(n, &edges);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = scores
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| (max - s <= TIE_RTOL * max.abs().max(1.0)).then_some(k))
            .collect();
        let victim = ties[rng.gen_range(0..ties.len())];
        edges.swap_remove(victim);
    }
}

/// The boundary bound `a = 2·Σ|w|` over a partition's cut edges.
pub fn boundary_bound<T: Scalar>(partition: &Partition<T>) -> T {
    let two = T::from_f64(2.0).unwrap();
    two * partition
        .boundary_edges
        .iter()
        .map(|&(_, _, w)| w.abs())
        .sum::<T>()
}

/// Per-solution bound: `2·Σ|w|` over the cut edges whose endpoint inside
/// `side` is a node where `local_config` differs from `local_ground`. Both
/// configurations index the side's nodes ascending, matching
/// [`induced_submodel`]. Always at most `bound_a`.
pub fn refined_bound<T: Scalar>(
    local_config: &SpinConfig,
    local_ground: &SpinConfig,
    partition: &Partition<T>,
    side: u32,
) -> Result<T> {
    let nodes = partition.side_nodes(side);
    if local_config.len() != nodes.len() || local_ground.len() != nodes.len() {
        return Err(Error::Input(format!(
            "side {side} has {} nodes but configurations have {} and {} entries",
            nodes.len(),
            local_config.len(),
            local_ground.len()
        )));
    }
    let mut differs = vec![false; partition.labels.len()];
    for (local, &global) in nodes.iter().enumerate() {
        differs[global] = local_config.values()[local] != local_ground.values()[local];
    }
    let two = T::from_f64(2.0).unwrap();
    let sum: T = partition
        .boundary_edges
        .iter()
        .filter_map(|&(i, j, w)| {
            let inside = if partition.labels[i] == side { i } else { j };
            differs[inside].then_some(w.abs())
        })
        .sum();
    Ok(two * sum)
}

/// The sub-model induced on one side: that side's fields and intra-side
/// couplings, boundary edges dropped. Returns the local-to-global index map
/// (side nodes ascending). The model offset is carried by side 0 so that
/// side energies plus boundary terms reproduce the full energy exactly.
pub fn induced_submodel<T: Scalar>(
    model: &IsingModel<T>,
    partition: &Partition<T>,
    side: u32,
) -> Result<(IsingModel<T>, Vec<usize>)> {
    let nodes = partition.side_nodes(side);
    if nodes.is_empty() {
        return Err(Error::Input(format!("side {side} has no variables")));
    }
    let mut local_of = vec![usize::MAX; model.n()];
    for (local, &global) in nodes.iter().enumerate() {
        local_of[global] = local;
    }
    let mut sub = IsingModel::new(nodes.len());
    if side == 0 {
        sub.set_offset(model.offset());
    }
    for (i, h) in model.linear_entries() {
        if partition.labels[i] == side {
            sub.set_linear(local_of[i], h);
        }
    }
    for (i, j, w) in model.edges() {
        if partition.labels[i] == side && partition.labels[j] == side {
            sub.set_coupling(local_of[i], local_of[j], w);
        }
    }
    Ok((sub, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::solvers::brute_force_ground;

    /// Oracle: betweenness by explicit enumeration of all simple paths.
    /// One unit per unordered pair, split across minimum-length paths.
    fn brute_betweenness(n: usize, edges: &[(usize, usize, f64)]) -> BTreeMap<(usize, usize), f64> {
        let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
        for (idx, &(u, v, w)) in edges.iter().enumerate() {
            let len = 1.0 / w.abs();
            adj[u].push((v, idx, len));
            adj[v].push((u, idx, len));
        }
        let mut scores = vec![0.0f64; edges.len()];
        for s in 0..n {
            for t in (s + 1)..n {
                // Depth-first enumeration of all simple paths s -> t.
                let mut paths: Vec<(Vec<usize>, f64)> = Vec::new();
                let mut stack = vec![(s, vec![false; n], Vec::<usize>::new(), 0.0)];
                while let Some((v, mut seen, path, len)) = stack.pop() {
                    seen[v] = true;
                    if v == t {
                        paths.push((path, len));
                        continue;
                    }
                    for &(u, e, l) in &adj[v] {
                        if !seen[u] {
                            let mut p = path.clone();
                            p.push(e);
                            stack.push((u, seen.clone(), p, len + l));
                        }
                    }
                }
                if paths.is_empty() {
                    continue;
                }
                let best = paths.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let shortest: Vec<&(Vec<usize>, f64)> = paths
                    .iter()
                    .filter(|p| (p.1 - best).abs() <= 1e-9 * best.max(1.0))
                    .collect();
                let credit = 1.0 / shortest.len() as f64;
                for (path, _) in shortest {
                    for &e in path {
                        scores[e] += credit;
                    }
                }
            }
        }
        edges
            .iter()
            .zip(scores)
            .map(|(&(i, j, _), s)| (if i < j { (i, j) } else { (j, i) }, s))
            .collect()
    }

    fn model_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> IsingModel<f64> {
        let mut m = IsingModel::new(n);
        for &(i, j, w) in edges {
            m.set_coupling(i, j, w);
        }
        m
    }

    fn two_triangles_with_bridge() -> IsingModel<f64> {
        model_from_edges(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, 1.0),
            ],
        )
    }

    #[test]
    fn path_scores_match_oracle() {
        let edges = [(0, 1, 1.0), (1, 2, 1.0)];
        let m = model_from_edges(3, &edges);
        let scores = edge_betweenness(&m).unwrap();
        let oracle = brute_betweenness(3, &edges);
        assert_eq!(oracle[&(0, 1)], 2.0);
        assert_eq!(oracle[&(1, 2)], 2.0);
        for ((i, j), s) in scores.iter() {
            assert!((s - oracle[&(i, j)]).abs() < 1e-9);
        }
    }

    #[test]
    fn star_scores_match_oracle() {
        let edges = [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)];
        let m = model_from_edges(4, &edges);
        let scores = edge_betweenness(&m).unwrap();
        let oracle = brute_betweenness(4, &edges);
        for ((i, j), s) in scores.iter() {
            assert!((s - oracle[&(i, j)]).abs() < 1e-9);
            assert!((s - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bridge_dominates_two_triangles() {
        let m = two_triangles_with_bridge();
        let scores = edge_betweenness(&m).unwrap();
        let bridge = scores.get(2, 3).unwrap();
        assert!((bridge - 9.0).abs() < 1e-9);
        for ((i, j), s) in scores.iter() {
            if (i, j) != (2, 3) {
                assert!(s < bridge);
            }
        }
        // Cross-check every edge against the path-enumeration oracle.
        let edges: Vec<(usize, usize, f64)> = m.edges().collect();
        let oracle = brute_betweenness(6, &edges);
        for ((i, j), s) in scores.iter() {
            assert!((s - oracle[&(i, j)]).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_scores_match_oracle() {
        // Unequal weights: strong couplings are short, so paths detour.
        let edges = [
            (0, 1, 2.0),
            (1, 2, 2.0),
            (0, 2, 0.5),
            (2, 3, 1.0),
            (0, 3, 0.25),
        ];
        let m = model_from_edges(4, &edges);
        let scores = edge_betweenness(&m).unwrap();
        let oracle = brute_betweenness(4, &edges);
        for ((i, j), s) in scores.iter() {
            assert!(
                (s - oracle[&(i, j)]).abs() < 1e-9,
                "edge ({i},{j}): {s} vs oracle {}",
                oracle[&(i, j)]
            );
        }
    }

    #[test]
    fn cycle_scores_are_uniform() {
        let m = problems::chain::<f64>(7, 1.0, 0.0, true).unwrap();
        let scores = edge_betweenness(&m).unwrap();
        let values: Vec<f64> = scores.iter().map(|(_, s)| s).collect();
        for v in &values {
            assert!((v - values[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn betweenness_rejects_edgeless_graphs() {
        let m = IsingModel::<f64>::new(3);
        assert!(matches!(edge_betweenness(&m), Err(Error::Input(_))));
    }

    #[test]
    fn bipartition_cuts_the_bridge() {
        let m = two_triangles_with_bridge();
        for seed in 0..5 {
            let p = girvan_newman_bipartition(&m, seed).unwrap();
            assert_eq!(p.labels[..3], [0, 0, 0]);
            assert_eq!(p.labels[3..], [1, 1, 1]);
            assert_eq!(p.boundary_edges, vec![(2, 3, 1.0)]);
            assert_eq!(p.bound_a, 2.0);
        }
    }

    #[test]
    fn even_cycle_splits_into_two_paths() {
        let m = problems::chain::<f64>(8, 1.0, 0.0, true).unwrap();
        let p = girvan_newman_bipartition(&m, 42).unwrap();
        assert_eq!(p.num_sides(), 2);
        assert_eq!(p.boundary_edges.len(), 2);
        // Each side is a contiguous arc of the ring.
        let side0 = p.side_nodes(0);
        assert!(!side0.is_empty() && side0.len() < 8);
    }

    #[test]
    fn partition_is_deterministic_in_seed() {
        let m = problems::random_connected::<f64>(14, 0.25, 3);
        let a = girvan_newman_bipartition(&m, 7).unwrap();
        let b = girvan_newman_bipartition(&m, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partition_rejects_disconnected_and_tiny_inputs() {
        let mut m = IsingModel::<f64>::new(4);
        m.set_coupling(0, 1, 1.0);
        m.set_coupling(2, 3, 1.0);
        assert!(matches!(
            girvan_newman_bipartition(&m, 0),
            Err(Error::Input(_))
        ));
        let single = IsingModel::<f64>::new(1);
        assert!(girvan_newman_bipartition(&single, 0).is_err());
    }

    #[test]
    fn cut_edges_partition_the_edge_set() {
        let m = problems::random_connected::<f64>(12, 0.3, 9);
        let p = girvan_newman_bipartition(&m, 5).unwrap();
        let total = m.num_edges();
        let crossing = p.boundary_edges.len();
        let intra = m
            .edges()
            .filter(|&(i, j, _)| p.labels[i] == p.labels[j])
            .count();
        assert_eq!(crossing + intra, total);
        for &(i, j, _) in &p.boundary_edges {
            assert_ne!(p.labels[i], p.labels[j]);
        }
    }

    #[test]
    fn boundary_bound_arithmetic() {
        let mut m = IsingModel::<f64>::new(4);
        m.set_coupling(0, 1, 1.0);
        m.set_coupling(0, 2, 0.5);
        m.set_coupling(1, 3, -0.25);
        m.set_coupling(2, 3, 1.0);
        let p = Partition::from_labels(&m, vec![0, 0, 1, 1]);
        assert_eq!(p.boundary_edges.len(), 2);
        assert!((boundary_bound(&p) - 1.5).abs() < 1e-12);
        assert_eq!(p.bound_a, boundary_bound(&p));

        let no_cut = Partition::from_labels(&m, vec![0, 0, 0, 0]);
        assert_eq!(boundary_bound(&no_cut), 0.0);
    }

    #[test]
    fn kagome_bound_matches_cut_count() {
        let spec = problems::LatticeSpec {
            rows: 5,
            cols: 6,
            coupling: 1.0,
            field: 1.0,
            periodic: true,
        };
        let m = problems::kagome_lattice(&spec);
        let p = girvan_newman_bipartition(&m, 1).unwrap();
        let cut = p.boundary_edges.len() as f64;
        assert!((p.bound_a - 2.0 * cut).abs() < 1e-9);
    }

    #[test]
    fn refined_bound_examples() {
        let m = two_triangles_with_bridge();
        let mut with_fields = m.clone();
        with_fields.set_coupling(1, 4, 0.5); // second cut edge
        let p = girvan_newman_bipartition(&with_fields, 0).unwrap();
        let nodes = p.side_nodes(0);
        assert_eq!(nodes.len(), 3);
        let ground = SpinConfig::spins(vec![1, 1, 1]);

        // Identical configurations: no differing nodes.
        assert_eq!(refined_bound(&ground, &ground, &p, 0).unwrap(), 0.0);

        // Differ only at node 0, which touches no cut edge.
        let inner = SpinConfig::spins(vec![-1, 1, 1]);
        assert_eq!(refined_bound(&inner, &ground, &p, 0).unwrap(), 0.0);

        // Differ at both boundary nodes: cut weights 1.0 and 0.5.
        let both = SpinConfig::spins(vec![1, -1, -1]);
        assert!((refined_bound(&both, &ground, &p, 0).unwrap() - 3.0).abs() < 1e-12);
        assert!(refined_bound(&both, &ground, &p, 0).unwrap() <= p.bound_a);

        // Length mismatch is an input error.
        let short = SpinConfig::spins(vec![1]);
        assert!(refined_bound(&short, &ground, &p, 0).is_err());
    }

    #[test]
    fn induced_submodels_are_triangles_for_bridge_graph() {
        let m = two_triangles_with_bridge();
        let p = girvan_newman_bipartition(&m, 0).unwrap();
        let (sub0, map0) = induced_submodel(&m, &p, 0).unwrap();
        let (sub1, map1) = induced_submodel(&m, &p, 1).unwrap();
        assert_eq!(sub0.n(), 3);
        assert_eq!(sub1.n(), 3);
        assert_eq!(sub0.num_edges(), 3);
        assert_eq!(sub1.num_edges(), 3);
        assert_eq!(map0, vec![0, 1, 2]);
        assert_eq!(map1, vec![3, 4, 5]);
    }

    #[test]
    fn side_energies_plus_boundary_terms_reproduce_the_total() {
        for seed in 0..10 {
            let m = problems::random_connected::<f64>(11, 0.35, seed);
            let p = girvan_newman_bipartition(&m, seed).unwrap();
            let (sub0, map0) = induced_submodel(&m, &p, 0).unwrap();
            let (sub1, map1) = induced_submodel(&m, &p, 1).unwrap();
            let full = SpinConfig::from_mask(11, 0x35b ^ seed);
            let values = full.values();
            let restrict = |map: &[usize]| {
                SpinConfig::spins(map.iter().map(|&g| values[g]).collect())
            };
            let e0 = sub0.energy(&restrict(&map0)).unwrap();
            let e1 = sub1.energy(&restrict(&map1)).unwrap();
            let cross: f64 = p
                .boundary_edges
                .iter()
                .map(|&(i, j, w)| w * f64::from(values[i] * values[j]))
                .sum();
            let direct = m.energy(&full).unwrap();
            assert!((direct - (e0 + e1 + cross)).abs() < 1e-9);
        }
    }

    #[test]
    fn decoupled_partition_concatenates_ground_states() {
        // No boundary edges: independent sides minimize independently.
        let mut m = IsingModel::<f64>::new(4);
        m.set_coupling(0, 1, -1.0);
        m.set_coupling(2, 3, 1.0);
        m.set_linear(0, 0.5);
        m.set_linear(2, -0.5);
        let p = Partition::from_labels(&m, vec![0, 0, 1, 1]);
        assert!(p.boundary_edges.is_empty());
        assert_eq!(p.bound_a, 0.0);
        let (sub0, map0) = induced_submodel(&m, &p, 0).unwrap();
        let (sub1, map1) = induced_submodel(&m, &p, 1).unwrap();
        let (g0, e0) = brute_force_ground(&sub0).unwrap();
        let (g1, e1) = brute_force_ground(&sub1).unwrap();
        let mut values = vec![0i8; 4];
        for (l, &g) in map0.iter().enumerate() {
            values[g] = g0.values()[l];
        }
        for (l, &g) in map1.iter().enumerate() {
            values[g] = g1.values()[l];
        }
        let (_, global) = brute_force_ground(&m).unwrap();
        let combined = m.energy(&SpinConfig::spins(values)).unwrap();
        assert!((combined - (e0 + e1)).abs() < 1e-12);
        assert!((combined - global).abs() < 1e-12);
    }

    #[test]
    fn projection_penalty_never_exceeds_the_bound() {
        // The soundness argument behind windowed local solving, checked by
        // brute force over random models and random bipartitions.
        for seed in 0..30 {
            let n = 6 + (seed as usize % 7); // 6..=12
            let m = problems::random_connected::<f64>(n, 0.4, seed);
            let mut rng = rng_from_seed(seed ^ 0xabcd);
            let mut labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2u32)).collect();
            labels[0] = 0;
            if labels.iter().all(|&l| l == 0) {
                labels[n - 1] = 1;
            }
            let p = Partition::from_labels(&m, labels);
            let (global, _) = brute_force_ground(&m).unwrap();
            for side in 0..2u32 {
                if p.side_nodes(side).is_empty() {
                    continue;
                }
                let (sub, map) = induced_submodel(&m, &p, side).unwrap();
                let (_, local_ground) = brute_force_ground(&sub).unwrap();
                let projection = SpinConfig::spins(
                    map.iter().map(|&g| global.values()[g]).collect(),
                );
                let local_energy = sub.energy(&projection).unwrap();
                assert!(
                    local_energy - local_ground <= p.bound_a + 1e-9,
                    "penalty {} exceeds bound {}",
                    local_energy - local_ground,
                    p.bound_a
                );
            }
        }
    }
}
