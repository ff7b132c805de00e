//! The divide-and-conquer pipeline: bipartition the model, collect each
//! side's low-energy configurations within a window, optionally tighten the
//! sets with the per-solution boundary bound, and merge across the cut.
//!
//! With exhaustive per-side enumeration at window `bound_a` the merged
//! minimum is a global optimum: the projection of any global optimum onto a
//! side sits within `bound_a` of that side's local ground, so both
//! projections survive collection and the exhaustive `N·M` merge finds them.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IsingModel, SpinConfig};
use crate::partition::{girvan_newman_partition, induced_submodel, refined_bound, Partition};
use crate::solvers::{
    default_t_final, default_t_initial, enumerate_low_energy, sample_low_energy, AnnealParams,
    LocalSolutionSet,
};
use crate::{tol, Scalar};

/// Annealing budget for one side. Temperatures defaulting to `None` are
/// resolved against the sub-model and the active window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaBudget<T> {
    pub sweeps: usize,
    pub restarts: usize,
    pub t_initial: Option<T>,
    pub t_final: Option<T>,
}

impl<T> SaBudget<T> {
    pub fn new(sweeps: usize, restarts: usize) -> Self {
        Self {
            sweeps,
            restarts,
            t_initial: None,
            t_final: None,
        }
    }
}

/// How one side's low-energy set is collected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SubSolver<T> {
    /// Exact enumeration of every in-window configuration (capacity-guarded).
    Exhaustive,
    /// Annealed sampling; sound only heuristically.
    Annealed(SaBudget<T>),
}

/// Collection window per side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowPolicy<T> {
    /// The boundary bound `2·Σ|w|` of the computed partition — the choice
    /// that keeps exhaustive collection exact.
    BoundA,
    Fixed(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfeConfig<T> {
    pub subsolvers: (SubSolver<T>, SubSolver<T>),
    pub window_policy: WindowPolicy<T>,
    /// Tighten each side's set with the per-solution boundary bound.
    pub use_refined_filter: bool,
    /// Merge only the lowest-energy `k` entries per side when set.
    pub top_k_merge: Option<usize>,
    pub seed: u64,
    /// Community count; only bipartition is supported.
    pub parts: usize,
    /// Return the per-side solution sets inside the result.
    pub keep_local_sets: bool,
}

impl<T: Scalar> PfeConfig<T> {
    /// Exhaustive collection on both sides at window `bound_a`.
    pub fn exhaustive(seed: u64) -> Self {
        Self {
            subsolvers: (SubSolver::Exhaustive, SubSolver::Exhaustive),
            window_policy: WindowPolicy::BoundA,
            use_refined_filter: false,
            top_k_merge: None,
            seed,
            parts: 2,
            keep_local_sets: false,
        }
    }

    /// Annealed collection on both sides with a shared budget.
    pub fn annealed(seed: u64, budget: SaBudget<T>) -> Self {
        Self {
            subsolvers: (SubSolver::Annealed(budget), SubSolver::Annealed(budget)),
            ..Self::exhaustive(seed)
        }
    }
}

/// Wall-clock split of one pipeline run, microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageBreakdown {
    pub partition_us: f64,
    pub solve_us: f64,
    pub merge_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::Deserialize<'de>"))]
pub struct PfeResult<T> {
    /// Best merged configuration of the full problem.
    pub config: SpinConfig,
    /// Its energy, re-evaluated against the original model.
    pub energy: T,
    pub partition: Partition<T>,
    /// Entry counts of the two sets entering the merge.
    pub n_local: (usize, usize),
    pub merge_pairs_evaluated: u64,
    /// The collection window that was in effect.
    pub window: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_sets: Option<(LocalSolutionSet<T>, LocalSolutionSet<T>)>,
    pub stage_us: StageBreakdown,
}

/// Best pair across two solution sets under the boundary coupling terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome<T> {
    pub best_a: usize,
    pub best_b: usize,
    pub best_energy: T,
    pub pairs_evaluated: u64,
}

/// Evaluate `E_A + E_B + Σ boundary terms` over the pair grid and return the
/// minimum. Exhaustive over `N·M` pairs unless `top_k` truncates each side
/// to its `k` lowest-energy entries; ties keep the earliest `(a, b)` pair.
pub fn merge<T: Scalar>(
    set_a: &LocalSolutionSet<T>,
    set_b: &LocalSolutionSet<T>,
    boundary_edges: &[(usize, usize, T)],
    map_a: &[usize],
    map_b: &[usize],
    top_k: Option<usize>,
) -> Result<MergeOutcome<T>> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::Input(
            "merge needs a non-empty solution set on both sides".into(),
        ));
    }
    let mut local_a = std::collections::BTreeMap::new();
    for (local, &global) in map_a.iter().enumerate() {
        local_a.insert(global, local);
    }
    let mut local_b = std::collections::BTreeMap::new();
    for (local, &global) in map_b.iter().enumerate() {
        local_b.insert(global, local);
    }
    let cross: Vec<(usize, usize, T)> = boundary_edges
        .iter()
        .map(|&(i, j, w)| {
            let (a_end, b_end) = if local_a.contains_key(&i) { (i, j) } else { (j, i) };
            match (local_a.get(&a_end), local_b.get(&b_end)) {
                (Some(&la), Some(&lb)) => Ok((la, lb, w)),
                _ => Err(Error::Input(format!(
                    "boundary edge ({i},{j}) is not covered by the index maps"
                ))),
            }
        })
        .collect::<Result<_>>()?;

    let take = |set: &LocalSolutionSet<T>| match top_k {
        Some(k) => set.entries().len().min(k.max(1)),
        None => set.entries().len(),
    };
    let na = take(set_a);
    let nb = take(set_b);
    let mut best = (0usize, 0usize, T::infinity());
    for (ia, (config_a, ea)) in set_a.entries()[..na].iter().enumerate() {
        let spins_a = config_a.values();
        for (ib, (config_b, eb)) in set_b.entries()[..nb].iter().enumerate() {
            let spins_b = config_b.values();
            let mut e = *ea + *eb;
            for &(la, lb, w) in &cross {
                e = e + w * T::from_i8(spins_a[la] * spins_b[lb]).unwrap();
            }
            if e < best.2 {
                best = (ia, ib, e);
            }
        }
    }
    Ok(MergeOutcome {
        best_a: best.0,
        best_b: best.1,
        best_energy: best.2,
        pairs_evaluated: (na as u64) * (nb as u64),
    })
}

/// Keep the entries within `window` of the set's ground entry.
pub fn filter_by_bound<T: Scalar>(set: &LocalSolutionSet<T>, window: T) -> LocalSolutionSet<T> {
    set.filtered(window)
}

/// Keep the entries whose excess over the set's ground entry stays within
/// their own per-solution boundary bound. The ground entry always survives.
pub fn filter_refined<T: Scalar>(
    set: &LocalSolutionSet<T>,
    partition: &Partition<T>,
    side: u32,
) -> Result<LocalSolutionSet<T>> {
    if set.is_empty() {
        return Ok(set.clone());
    }
    let ground = &set.entries()[0];
    let mut entries = Vec::with_capacity(set.len());
    for entry in set.entries() {
        let bound = refined_bound(&entry.0, &ground.0, partition, side)?;
        if entry.1 - ground.1 <= bound + tol::<T>() {
            entries.push(entry.clone());
        }
    }
    Ok(LocalSolutionSet::from_entries(entries, set.window()))
}

fn collect_side<T: Scalar>(
    sub: &IsingModel<T>,
    solver: &SubSolver<T>,
    window: T,
    seed: u64,
) -> Result<LocalSolutionSet<T>> {
    match solver {
        SubSolver::Exhaustive => enumerate_low_energy(sub, window),
        SubSolver::Annealed(budget) => {
            let params = AnnealParams {
                t_initial: budget.t_initial.unwrap_or_else(|| default_t_initial(sub)),
                t_final: budget.t_final.unwrap_or_else(|| default_t_final(sub, Some(window))),
                sweeps: budget.sweeps,
                restarts: budget.restarts,
                seed,
            };
            sample_low_energy(sub, &params, window)
        }
    }
}

/// Run the full pipeline: bipartition, per-side windowed collection,
/// optional refined filtering, merge, and reconstruction. Deterministic in
/// `cfg.seed`; the two sides solve concurrently.
pub fn solve_pfe<T: Scalar>(model: &IsingModel<T>, cfg: &PfeConfig<T>) -> Result<PfeResult<T>> {
    if cfg.parts != 2 {
        return Err(Error::Input(format!(
            "only bipartition is supported, requested {} parts",
            cfg.parts
        )));
    }
    if model.n() < 2 {
        return Err(Error::Input("the pipeline needs at least 2 variables".into()));
    }
    if let Some(k) = cfg.top_k_merge {
        if k == 0 {
            return Err(Error::Input("top_k_merge must be at least 1".into()));
        }
    }
    let t0 = std::time::Instant::now();
    let partition = girvan_newman_partition(model, cfg.seed, 2)?;
    let partition_us = t0.elapsed().as_secs_f64() * 1e6;

    let window = match cfg.window_policy {
        WindowPolicy::BoundA => partition.bound_a,
        WindowPolicy::Fixed(w) => {
            if w < T::zero() {
                return Err(Error::Input(format!("fixed window must be >= 0, got {w}")));
            }
            w
        }
    };

    let t1 = std::time::Instant::now();
    let (sub_a, map_a) = induced_submodel(model, &partition, 0)?;
    let (sub_b, map_b) = induced_submodel(model, &partition, 1)?;
    // Side solver seeds are decorrelated as seed XOR side.
    let (raw_a, raw_b) = join(
        || collect_side(&sub_a, &cfg.subsolvers.0, window, cfg.seed),
        || collect_side(&sub_b, &cfg.subsolvers.1, window, cfg.seed ^ 1),
    );
    let (raw_a, raw_b) = (raw_a?, raw_b?);

    let finish_side = |raw: LocalSolutionSet<T>, side: u32| -> Result<LocalSolutionSet<T>> {
        let set = if cfg.use_refined_filter {
            let refined = filter_refined(&raw, &partition, side)?;
            if refined.is_empty() {
                // An under-sampled heuristic set can defeat the refined
                // filter, which assumes the true local ground is present;
                // retry with the plain window before giving up.
                filter_by_bound(&raw, window)
            } else {
                refined
            }
        } else {
            raw
        };
        if set.is_empty() {
            return Err(Error::EmptyLocalSet {
                side,
                window: window.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(set)
    };
    let set_a = finish_side(raw_a, 0)?;
    let set_b = finish_side(raw_b, 1)?;
    let solve_us = t1.elapsed().as_secs_f64() * 1e6;

    let t2 = std::time::Instant::now();
    let outcome = merge(
        &set_a,
        &set_b,
        &partition.boundary_edges,
        &map_a,
        &map_b,
        cfg.top_k_merge,
    )?;
    let merge_us = t2.elapsed().as_secs_f64() * 1e6;

    let mut values = vec![0i8; model.n()];
    for (local, &global) in map_a.iter().enumerate() {
        values[global] = set_a.entries()[outcome.best_a].0.values()[local];
    }
    for (local, &global) in map_b.iter().enumerate() {
        values[global] = set_b.entries()[outcome.best_b].0.values()[local];
    }
    let config = SpinConfig::spins(values);
    let energy = model.energy(&config)?;
    debug_assert!(
        (energy - outcome.best_energy).abs() <= tol::<T>(),
        "merge energy drifted from re-evaluation"
    );

    Ok(PfeResult {
        config,
        energy,
        n_local: (set_a.len(), set_b.len()),
        merge_pairs_evaluated: outcome.pairs_evaluated,
        window,
        local_sets: cfg.keep_local_sets.then_some((set_a, set_b)),
        partition,
        stage_us: StageBreakdown {
            partition_us,
            solve_us,
            merge_us,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::girvan_newman_bipartition;
    use crate::problems;
    use crate::solvers::brute_force_ground;

    #[test]
    fn merge_without_boundary_adds_ground_energies() {
        let mut a = IsingModel::<f64>::new(2);
        a.set_coupling(0, 1, -1.0);
        let mut b = IsingModel::<f64>::new(2);
        b.set_coupling(0, 1, -1.0);
        let set_a = enumerate_low_energy(&a, 0.0).unwrap();
        let set_b = enumerate_low_energy(&b, 0.0).unwrap();
        let out = merge(&set_a, &set_b, &[], &[0, 1], &[2, 3], None).unwrap();
        assert_eq!(out.best_energy, -2.0);
        assert_eq!(out.pairs_evaluated, (set_a.len() * set_b.len()) as u64);
    }

    #[test]
    fn merge_prefers_aligned_pairs_across_a_weak_edge() {
        // Two ferromagnetic pairs joined by J = −0.1 between nodes 1 and 2.
        let mut m = IsingModel::<f64>::new(4);
        m.set_coupling(0, 1, -1.0);
        m.set_coupling(2, 3, -1.0);
        m.set_coupling(1, 2, -0.1);
        let labels = vec![0u32, 0, 1, 1];
        let partition = crate::partition::Partition {
            boundary_edges: vec![(1, 2, -0.1)],
            bound_a: 0.2,
            labels,
        };
        let (sub_a, map_a) = induced_submodel(&m, &partition, 0).unwrap();
        let (sub_b, map_b) = induced_submodel(&m, &partition, 1).unwrap();
        let set_a = enumerate_low_energy(&sub_a, 0.2).unwrap();
        let set_b = enumerate_low_energy(&sub_b, 0.2).unwrap();
        let out = merge(
            &set_a,
            &set_b,
            &partition.boundary_edges,
            &map_a,
            &map_b,
            None,
        )
        .unwrap();
        assert!((out.best_energy - (-2.1)).abs() < 1e-12);
        let (_, oracle) = brute_force_ground(&m).unwrap();
        assert!((out.best_energy - oracle).abs() < 1e-12);
    }

    #[test]
    fn merge_rejects_empty_sides() {
        let m = problems::chain::<f64>(2, -1.0, 0.0, false).unwrap();
        let set = enumerate_low_energy(&m, 0.0).unwrap();
        let empty = LocalSolutionSet::from_entries(vec![], 0.0);
        assert!(merge(&empty, &set, &[], &[0, 1], &[2, 3], None).is_err());
    }

    #[test]
    fn decoupled_clusters_solve_to_the_sum_of_grounds() {
        let mut m = IsingModel::<f64>::new(6);
        m.set_coupling(0, 1, -1.0);
        m.set_coupling(1, 2, -1.0);
        m.set_coupling(3, 4, 1.0);
        m.set_coupling(4, 5, 1.0);
        m.set_coupling(2, 3, 1e-4); // weak link so the graph is connected
        let result = solve_pfe(&m, &PfeConfig::exhaustive(5)).unwrap();
        let (_, oracle) = brute_force_ground(&m).unwrap();
        assert!((result.energy - oracle).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_pipeline_matches_brute_force_on_random_models() {
        for seed in 0..40 {
            let n = 6 + (seed as usize % 9); // 6..=14
            let m = problems::random_connected::<f64>(n, 0.3, seed);
            let result = solve_pfe(&m, &PfeConfig::exhaustive(seed)).unwrap();
            let (_, oracle) = brute_force_ground(&m).unwrap();
            assert!(
                (result.energy - oracle).abs() < 1e-9,
                "seed {seed}: {} vs {}",
                result.energy,
                oracle
            );
            assert_eq!(
                result.merge_pairs_evaluated,
                (result.n_local.0 as u64) * (result.n_local.1 as u64)
            );
            let direct = m.energy(&result.config).unwrap();
            assert!((direct - result.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn refined_filter_keeps_the_pipeline_exact() {
        for seed in 0..30 {
            let n = 6 + (seed as usize % 8);
            let m = problems::random_connected::<f64>(n, 0.3, seed ^ 0x5a);
            let cfg = PfeConfig {
                use_refined_filter: true,
                ..PfeConfig::exhaustive(seed)
            };
            let result = solve_pfe(&m, &cfg).unwrap();
            let (_, oracle) = brute_force_ground(&m).unwrap();
            assert!((result.energy - oracle).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn refined_sets_are_subsets_of_plain_sets() {
        for seed in 0..10 {
            let m = problems::random_connected::<f64>(10, 0.3, seed);
            let partition = girvan_newman_bipartition(&m, seed).unwrap();
            let (sub, _) = induced_submodel(&m, &partition, 0).unwrap();
            let raw = enumerate_low_energy(&sub, partition.bound_a).unwrap();
            let plain = filter_by_bound(&raw, partition.bound_a);
            let refined = filter_refined(&raw, &partition, 0).unwrap();
            assert!(refined.len() <= plain.len());
            for entry in refined.entries() {
                assert!(plain.entries().contains(entry));
            }
            assert!(!refined.is_empty());
            assert_eq!(refined.entries()[0].1, raw.ground_energy());
        }
    }

    #[test]
    fn window_zero_keeps_only_ground_degenerate_entries() {
        let m = problems::random_connected::<f64>(8, 0.4, 3);
        let set = enumerate_low_energy(&m, 10.0).unwrap();
        let ground_only = filter_by_bound(&set, 0.0);
        assert!(ground_only.len() >= 1);
        for (_, e) in ground_only.entries() {
            assert!((e - set.ground_energy()).abs() <= 1e-9);
        }
        // A window at least as large as the set's own never drops entries.
        let identity = filter_by_bound(&set, 10.0);
        assert_eq!(identity.len(), set.len());
    }

    #[test]
    fn widening_the_window_never_raises_the_merged_minimum() {
        let m = problems::random_connected::<f64>(10, 0.35, 21);
        let mut last = f64::INFINITY;
        for window in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let cfg = PfeConfig {
                window_policy: WindowPolicy::Fixed(window),
                ..PfeConfig::exhaustive(9)
            };
            let result = solve_pfe(&m, &cfg).unwrap();
            assert!(result.energy <= last + 1e-12);
            last = result.energy;
        }
    }

    #[test]
    fn top_k_truncates_the_pair_grid() {
        let m = problems::random_connected::<f64>(10, 0.35, 4);
        let cfg = PfeConfig {
            top_k_merge: Some(3),
            ..PfeConfig::exhaustive(4)
        };
        let result = solve_pfe(&m, &cfg).unwrap();
        assert!(result.merge_pairs_evaluated <= 9);
    }

    #[test]
    fn multiway_requests_are_refused() {
        let m = problems::random_connected::<f64>(8, 0.3, 0);
        let cfg = PfeConfig {
            parts: 3,
            ..PfeConfig::exhaustive(0)
        };
        assert!(matches!(solve_pfe(&m, &cfg), Err(Error::Input(_))));
    }

    #[test]
    fn annealed_pipeline_is_deterministic() {
        let m = problems::random_connected::<f64>(12, 0.3, 8);
        let cfg = PfeConfig::annealed(17, SaBudget::new(40, 6));
        let a = solve_pfe(&m, &cfg).unwrap();
        let b = solve_pfe(&m, &cfg).unwrap();
        assert_eq!(a.config, b.config);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.n_local, b.n_local);
    }
}
