//! Exact variable elimination for chain- and tree-like structure.
//!
//! Eliminating a spin of degree at most two replaces its terms by a fitted
//! model on its neighbors that reproduces the minimal energy for every
//! boundary assignment, so the reduction preserves the energy landscape of
//! the surviving variables exactly — it is marginal minimization, not an
//! approximation. Records of the minimizing internal choices allow full
//! configurations to be reconstructed afterwards.
//!
//! Eliminating nodes of degree three or more would create interaction terms
//! beyond quadratic order and is out of scope.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{for_each_spin_config, IsingModel, SpinConfig, VarType};
use crate::Scalar;

/// Boundary-pair parameters `c + h1·s1 + h2·s2 + j12·s1·s2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedPair<T> {
    pub c: T,
    pub h1: T,
    pub h2: T,
    pub j12: T,
}

impl<T: Scalar> FittedPair<T> {
    pub fn eval(&self, s1: i8, s2: i8) -> T {
        let a = T::from_i8(s1).unwrap();
        let b = T::from_i8(s2).unwrap();
        self.c + self.h1 * a + self.h2 * b + self.j12 * a * b
    }
}

/// Result of enumerating one segment against its two boundary spins: the
/// minimal energy and a minimizing assignment for each of the four boundary
/// cases, ordered `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTable<T> {
    pub boundary: (usize, usize),
    /// Segment nodes ascending; configurations index this list.
    pub nodes: Vec<usize>,
    pub configs: [Vec<i8>; 4],
    pub energies: [T; 4],
}

/// Boundary-case index for spins `(s1, s2)`.
fn case_index(s1: i8, s2: i8) -> usize {
    match (s1, s2) {
        (1, 1) => 0,
        (1, -1) => 1,
        (-1, 1) => 2,
        (-1, -1) => 3,
        _ => unreachable!("spins are ±1"),
    }
}

const BOUNDARY_CASES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// For each of the four boundary assignments, the minimum over all internal
/// assignments of the segment-restricted energy: the segment's fields
/// (boundary nodes included) plus all couplings inside the segment. The
/// model offset is not included. Internal nodes must have no edges leaving
/// the segment; ties resolve to the first configuration in single-bit-flip
/// enumeration order.
pub fn enumerate_segment<T: Scalar>(
    model: &IsingModel<T>,
    segment: &BTreeSet<usize>,
    boundary: (usize, usize),
) -> Result<SegmentTable<T>> {
    let (b1, b2) = boundary;
    if b1 == b2 || !segment.contains(&b1) || !segment.contains(&b2) {
        return Err(Error::Input(format!(
            "boundary ({b1},{b2}) must be two distinct segment members"
        )));
    }
    if segment.len() > 24 {
        return Err(Error::Capacity(format!(
            "segment of {} nodes exceeds the n = 24 guard",
            segment.len()
        )));
    }
    let adj = model.adjacency();
    for &node in segment {
        if node >= model.n() {
            return Err(Error::Input(format!("segment node {node} out of range")));
        }
        if node == b1 || node == b2 {
            continue;
        }
        if let Some(outside) = adj[node].iter().find(|(j, _)| !segment.contains(j)) {
            return Err(Error::Input(format!(
                "segment leaks: internal node {node} couples to outside node {}",
                outside.0
            )));
        }
    }

    let nodes: Vec<usize> = segment.iter().copied().collect();
    let mut sub = IsingModel::<T>::new(nodes.len());
    let local_of: BTreeMap<usize, usize> =
        nodes.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    for &g in &nodes {
        let h = model.linear_term(g);
        if h != T::zero() {
            sub.set_linear(local_of[&g], h);
        }
    }
    for (i, j, w) in model.edges() {
        if segment.contains(&i) && segment.contains(&j) {
            sub.set_coupling(local_of[&i], local_of[&j], w);
        }
    }

    let (l1, l2) = (local_of[&b1], local_of[&b2]);
    let mut energies = [T::infinity(); 4];
    let mut configs: [Vec<i8>; 4] = Default::default();
    for_each_spin_config(&sub, &mut |mask, e| {
        let s1 = if mask >> l1 & 1 == 1 { -1i8 } else { 1 };
        let s2 = if mask >> l2 & 1 == 1 { -1i8 } else { 1 };
        let idx = case_index(s1, s2);
        if e < energies[idx] {
            energies[idx] = e;
            configs[idx] = SpinConfig::from_mask(nodes.len(), mask).values().to_vec();
        }
    });
    // Re-evaluate the four winners exactly.
    for idx in 0..4 {
        energies[idx] = sub.energy_of_spins(&configs[idx]);
    }
    Ok(SegmentTable {
        boundary,
        nodes,
        configs,
        energies,
    })
}

/// The unique pair model reproducing a four-entry boundary table exactly
/// (a 2-spin Walsh transform).
pub fn fit_boundary_model<T: Scalar>(energies: &[T; 4]) -> FittedPair<T> {
    let quarter = T::from_f64(0.25).unwrap();
    let [epp, epm, emp, emm] = *energies;
    FittedPair {
        c: (epp + epm + emp + emm) * quarter,
        h1: (epp + epm - emp - emm) * quarter,
        h2: (epp - epm + emp - emm) * quarter,
        j12: (epp - epm - emp + emm) * quarter,
    }
}

/// One elimination step, recorded in elimination order. Stored choice values
/// give the eliminated spin for each assignment of its remaining neighbors;
/// stored energies cover only the eliminated node's own terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::Deserialize<'de>"))]
pub enum ReductionRecord<T> {
    /// Isolated spin absorbed into the offset.
    Isolated { node: usize, value: i8, energy: T },
    /// Degree-1 spin absorbed into its neighbor's field. `values` and
    /// `energies` are indexed by the neighbor spin `(+1, −1)`.
    Leaf {
        node: usize,
        neighbor: usize,
        values: [i8; 2],
        energies: [T; 2],
    },
    /// Degree-2 spin replaced by a fitted pair model on its two neighbors.
    /// Arrays follow the boundary-case order `(+,+), (+,−), (−,+), (−,−)`.
    Pair {
        node: usize,
        neighbors: (usize, usize),
        values: [i8; 4],
        energies: [T; 4],
        fitted: FittedPair<T>,
    },
}

impl<T> ReductionRecord<T> {
    pub fn node(&self) -> usize {
        match self {
            ReductionRecord::Isolated { node, .. } => *node,
            ReductionRecord::Leaf { node, .. } => *node,
            ReductionRecord::Pair { node, .. } => *node,
        }
    }
}

/// Outcome of [`reduce_chain`]: the reduced model over the surviving
/// variables (densely re-indexed; `survivors[local] = original index`), the
/// elimination records, and the original size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::Deserialize<'de> + num_traits::Zero"
))]
pub struct ChainReduction<T> {
    #[serde(skip)]
    pub reduced: IsingModel<T>,
    pub survivors: Vec<usize>,
    pub records: Vec<ReductionRecord<T>>,
    pub original_n: usize,
}

impl<T: Scalar> ChainReduction<T> {
    pub fn eliminated_count(&self) -> usize {
        self.records.len()
    }

    /// Rebuild a full configuration from an assignment of the survivors by
    /// replaying the elimination records in reverse. The result's energy
    /// under the original model equals the reduced model's energy at
    /// `reduced_config` exactly.
    pub fn reconstruct(&self, reduced_config: &SpinConfig) -> Result<SpinConfig> {
        if reduced_config.vartype() != VarType::Spin {
            return Err(Error::Input("expected a spin configuration".into()));
        }
        if reduced_config.len() != self.survivors.len() {
            return Err(Error::Input(format!(
                "reduced configuration has {} entries, expected {}",
                reduced_config.len(),
                self.survivors.len()
            )));
        }
        let mut values = vec![0i8; self.original_n];
        for (local, &global) in self.survivors.iter().enumerate() {
            values[global] = reduced_config.values()[local];
        }
        let fetch = |values: &[i8], node: usize| -> Result<i8> {
            match values[node] {
                0 => Err(Error::Internal(format!(
                    "reconstruction read variable {node} before it was assigned"
                ))),
                v => Ok(v),
            }
        };
        for record in self.records.iter().rev() {
            match record {
                ReductionRecord::Isolated { node, value, .. } => values[*node] = *value,
                ReductionRecord::Leaf {
                    node,
                    neighbor,
                    values: choice,
                    ..
                } => {
                    let s = fetch(&values, *neighbor)?;
                    values[*node] = choice[if s == 1 { 0 } else { 1 }];
                }
                ReductionRecord::Pair {
                    node,
                    neighbors,
                    values: choice,
                    ..
                } => {
                    let s1 = fetch(&values, neighbors.0)?;
                    let s2 = fetch(&values, neighbors.1)?;
                    values[*node] = choice[case_index(s1, s2)];
                }
            }
        }
        Ok(SpinConfig::spins(values))
    }
}

/// Repeatedly eliminate non-protected nodes of degree at most two (lowest
/// index first) until none remain. Isolated spins fold into the offset,
/// leaves into their neighbor's field, and degree-2 nodes into a fitted pair
/// model whose coupling merges additively with any existing edge. A model
/// with nothing to eliminate comes back unchanged.
pub fn reduce_chain<T: Scalar>(model: &IsingModel<T>) -> ChainReduction<T> {
    reduce_chain_protected(model, &BTreeSet::new())
}

/// As [`reduce_chain`], never eliminating the `protected` variables.
pub fn reduce_chain_protected<T: Scalar>(
    model: &IsingModel<T>,
    protected: &BTreeSet<usize>,
) -> ChainReduction<T> {
    let n = model.n();
    let mut linear: Vec<T> = (0..n).map(|i| model.linear_term(i)).collect();
    let mut offset = model.offset();
    let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
    for (i, j, w) in model.edges() {
        adj[i].insert(j, w);
        adj[j].insert(i, w);
    }
    let mut alive = vec![true; n];
    let mut records: Vec<ReductionRecord<T>> = Vec::new();

    // Minimize s·g over s = ±1: pick s = −sign(g), +1 on ties.
    let choose = |g: T| -> (i8, T) {
        if g > T::zero() {
            (-1, -g)
        } else {
            (1, g)
        }
    };

    loop {
        let candidate = (0..n).find(|&u| alive[u] && !protected.contains(&u) && adj[u].len() <= 2);
        let Some(u) = candidate else { break };
        let neighbors: Vec<(usize, T)> = adj[u].iter().map(|(&v, &w)| (v, w)).collect();
        match neighbors.as_slice() {
            [] => {
                let (value, energy) = choose(linear[u]);
                offset = offset + energy;
                records.push(ReductionRecord::Isolated {
                    node: u,
                    value,
                    energy,
                });
            }
            [(v, w)] => {
                let (v, w) = (*v, *w);
                let (val_plus, e_plus) = choose(linear[u] + w);
                let (val_minus, e_minus) = choose(linear[u] - w);
                let half = T::from_f64(0.5).unwrap();
                offset = offset + (e_plus + e_minus) * half;
                linear[v] = linear[v] + (e_plus - e_minus) * half;
                adj[v].remove(&u);
                records.push(ReductionRecord::Leaf {
                    node: u,
                    neighbor: v,
                    values: [val_plus, val_minus],
                    energies: [e_plus, e_minus],
                });
            }
            [(v, wv), (x, wx)] => {
                let (v, wv, x, wx) = (*v, *wv, *x, *wx);
                let mut values = [0i8; 4];
                let mut energies = [T::zero(); 4];
                for (idx, (s1, s2)) in BOUNDARY_CASES.iter().enumerate() {
                    let g = linear[u]
                        + wv * T::from_i8(*s1).unwrap()
                        + wx * T::from_i8(*s2).unwrap();
                    let (value, energy) = choose(g);
                    values[idx] = value;
                    energies[idx] = energy;
                }
                let fitted = fit_boundary_model(&energies);
                offset = offset + fitted.c;
                linear[v] = linear[v] + fitted.h1;
                linear[x] = linear[x] + fitted.h2;
                adj[v].remove(&u);
                adj[x].remove(&u);
                let merged = adj[v].get(&x).copied().unwrap_or_else(T::zero) + fitted.j12;
                if merged == T::zero() {
                    adj[v].remove(&x);
                    adj[x].remove(&v);
                } else {
                    adj[v].insert(x, merged);
                    adj[x].insert(v, merged);
                }
                records.push(ReductionRecord::Pair {
                    node: u,
                    neighbors: (v, x),
                    values,
                    energies,
                    fitted,
                });
            }
            _ => unreachable!("candidate has degree <= 2"),
        }
        alive[u] = false;
        adj[u].clear();
    }

    let survivors: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let local_of: BTreeMap<usize, usize> =
        survivors.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let mut reduced = IsingModel::new(survivors.len());
    reduced.set_offset(offset);
    for &g in &survivors {
        if linear[g] != T::zero() {
            reduced.set_linear(local_of[&g], linear[g]);
        }
    }
    for &g in &survivors {
        for (&v, &w) in &adj[g] {
            if g < v {
                reduced.set_coupling(local_of[&g], local_of[&v], w);
            }
        }
    }
    ChainReduction {
        reduced,
        survivors,
        records,
        original_n: n,
    }
}
