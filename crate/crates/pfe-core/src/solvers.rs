//! Samplers and oracles: Metropolis simulated annealing, exact brute-force
//! ground-state search, and low-energy window collection (exhaustive or
//! sampled).
//!
//! Every solver is deterministic in its seed. Annealing restarts draw from
//! independent streams derived from `seed` and the restart index, so results
//! do not depend on scheduling.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{for_each_spin_config, IsingModel, SpinConfig};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{tol, Scalar};

/// Metropolis annealing schedule: geometric temperature decay from
/// `t_initial` to `t_final` over `sweeps` full passes, repeated over
/// independent `restarts`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams<T> {
    pub t_initial: T,
    pub t_final: T,
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Scalar> AnnealParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > T::zero() && self.t_initial >= self.t_final) {
            return Err(Error::Input(format!(
                "temperatures must satisfy t_initial >= t_final > 0, got {} and {}",
                self.t_initial, self.t_final
            )));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::Input("sweeps and restarts must be positive".into()));
        }
        Ok(())
    }

    /// Decay ratio `r` with `T_k = t_initial · r^k` and `T_sweeps = t_final`.
    fn ratio(&self) -> T {
        (self.t_final / self.t_initial).powf(T::one() / T::from_usize(self.sweeps).unwrap())
    }
}

/// Default initial temperature: twice the largest total coefficient weight
/// incident to any single variable, so early sweeps accept almost any move.
pub fn default_t_initial<T: Scalar>(model: &IsingModel<T>) -> T {
    let mut best = T::zero();
    let mut weights = vec![T::zero(); model.n()];
    for (i, h) in model.linear_entries() {
        weights[i] = weights[i] + h.abs();
    }
    for (i, j, w) in model.edges() {
        weights[i] = weights[i] + w.abs();
        weights[j] = weights[j] + w.abs();
    }
    for w in weights {
        best = best.max(w);
    }
    let two = T::from_f64(2.0).unwrap();
    let t = two * best;
    if t > T::zero() {
        t
    } else {
        T::one()
    }
}

/// Default final temperature: a tenth of the sampling window when one is in
/// play, otherwise a twentieth of the median coupling magnitude.
pub fn default_t_final<T: Scalar>(model: &IsingModel<T>, window: Option<T>) -> T {
    let small = T::from_f64(1e-3).unwrap();
    if let Some(w) = window {
        let t = w / T::from_f64(10.0).unwrap();
        if t > T::zero() {
            return t;
        }
    }
    let mut mags: Vec<T> = model.edges().map(|(_, _, w)| w.abs()).collect();
    if mags.is_empty() {
        mags = model.linear_entries().map(|(_, h)| h.abs()).collect();
    }
    if mags.is_empty() {
        return small;
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mags[mags.len() / 2];
    let t = T::from_f64(0.05).unwrap() * median;
    if t > T::zero() {
        t
    } else {
        small
    }
}

/// Result of an annealing run: the best configuration seen anywhere in the
/// run, plus the final configuration of each restart as samples. All
/// energies are re-evaluated exactly against the model.
#[derive(Debug, Clone)]
pub struct SaResult<T> {
    pub best: SpinConfig,
    pub best_energy: T,
    pub samples: Vec<(SpinConfig, T)>,
}

/// Deduplicated low-energy configurations of one model, sorted by energy
/// ascending (ties by configuration). `window` records the collection gap:
/// every entry lies within `window` of the first entry's energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::Deserialize<'de>"))]
pub struct LocalSolutionSet<T> {
    entries: Vec<(SpinConfig, T)>,
    ground_energy: T,
    window: T,
}

impl<T: Scalar> LocalSolutionSet<T> {
    /// Build a set from unique entries; sorts and records the ground energy.
    pub fn from_entries(mut entries: Vec<(SpinConfig, T)>, window: T) -> Self {
        entries.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then_with(|| a.0.values().cmp(b.0.values()))
        });
        let ground_energy = entries.first().map(|e| e.1).unwrap_or_else(T::zero);
        Self {
            entries,
            ground_energy,
            window,
        }
    }

    pub fn entries(&self) -> &[(SpinConfig, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ground_energy(&self) -> T {
        self.ground_energy
    }

    pub fn window(&self) -> T {
        self.window
    }

    /// Subset with energy within `window` of the ground entry.
    pub fn filtered(&self, window: T) -> Self {
        let cut = self.ground_energy + window + tol::<T>();
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(_, e)| *e <= cut)
                .cloned()
                .collect(),
            ground_energy: self.ground_energy,
            window,
        }
    }
}

struct AnnealRun<'a, T> {
    model: &'a IsingModel<T>,
    adj: Vec<Vec<(usize, T)>>,
    params: AnnealParams<T>,
}

impl<'a, T: Scalar> AnnealRun<'a, T> {
    fn new(model: &'a IsingModel<T>, params: AnnealParams<T>) -> Result<Self> {
        params.validate()?;
        if model.n() == 0 {
            return Err(Error::Input("cannot anneal an empty model".into()));
        }
        Ok(Self {
            model,
            adj: model.adjacency(),
            params,
        })
    }

    /// Run all restarts sequentially; `on_sample` fires at the end of every
    /// sweep and restart with the current spins and their exact energy.
    fn run(&self, mut on_sample: impl FnMut(&[i8], T)) -> SaResult<T> {
        let n = self.model.n();
        let ratio = self.params.ratio();
        let mut best_spins: Vec<i8> = Vec::new();
        let mut best_energy = T::infinity();
        for restart in 0..self.params.restarts {
            let mut rng = rng_from_seed(derive_seed(self.params.seed, restart as u64));
            let mut spins: Vec<i8> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect();
            let mut energy = self.model.energy_of_spins(&spins);
            if energy < best_energy {
                best_energy = energy;
                best_spins = spins.clone();
            }
            let mut temperature = self.params.t_initial;
            for _sweep in 0..self.params.sweeps {
                for i in 0..n {
                    let mut field = self.model.linear_term(i);
                    for &(j, w) in &self.adj[i] {
                        field = field + w * T::from_i8(spins[j]).unwrap();
                    }
                    let s = T::from_i8(spins[i]).unwrap();
                    let delta = -(s + s) * field;
                    let accept = delta <= T::zero()
                        || T::from_f64(rng.gen::<f64>()).unwrap() < (-delta / temperature).exp();
                    if accept {
                        spins[i] = -spins[i];
                        energy = energy + delta;
                        if energy < best_energy {
                            best_energy = energy;
                            best_spins.clear();
                            best_spins.extend_from_slice(&spins);
                        }
                    }
                }
                // Re-anchor the incrementally tracked energy; this also
                // keeps every reported sample energy exact.
                energy = self.model.energy_of_spins(&spins);
                on_sample(&spins, energy);
                temperature = temperature * ratio;
            }
            on_sample(&spins, energy);
        }
        let best_energy = self.model.energy_of_spins(&best_spins);
        SaResult {
            best: SpinConfig::spins(best_spins),
            best_energy,
            samples: Vec::new(),
        }
    }
}

/// Metropolis simulated annealing. Each restart starts from uniformly random
/// spins and performs `sweeps` sequential single-spin passes under the
/// geometric schedule; a move is accepted when `ΔE ≤ 0` and otherwise with
/// probability `exp(−ΔE/T)`.
pub fn simulated_anneal<T: Scalar>(
    model: &IsingModel<T>,
    params: &AnnealParams<T>,
) -> Result<SaResult<T>> {
    let run = AnnealRun::new(model, *params)?;
    let n = model.n();
    let mut finals: Vec<(SpinConfig, T)> = Vec::with_capacity(params.restarts);
    let mut sweep_count = 0usize;
    let sweeps = params.sweeps;
    let mut result = run.run(|spins, energy| {
        // Restart ends arrive as every (sweeps+1)-th callback.
        sweep_count += 1;
        if sweep_count % (sweeps + 1) == 0 {
            finals.push((SpinConfig::spins(spins.to_vec()), energy));
        }
    });
    debug_assert_eq!(finals.len(), params.restarts);
    debug_assert_eq!(result.best.len(), n);
    result.samples = finals;
    Ok(result)
}

/// Exact ground state by Gray-code enumeration with incremental energy
/// updates; ties resolve to the first configuration visited. Guarded at
/// `n ≤ 30`.
pub fn brute_force_ground<T: Scalar>(model: &IsingModel<T>) -> Result<(SpinConfig, T)> {
    if model.n() > 30 {
        return Err(Error::Capacity(format!(
            "brute force over {} variables exceeds the n = 30 guard",
            model.n()
        )));
    }
    let mut best_mask = 0u64;
    let mut best = T::infinity();
    for_each_spin_config(model, &mut |mask, e| {
        if e < best {
            best = e;
            best_mask = mask;
        }
    });
    let config = SpinConfig::from_mask(model.n(), best_mask);
    let energy = model.energy_of_spins(config.values());
    Ok((config, energy))
}

/// Every configuration with energy within `window` of the ground state,
/// exactly. Guarded at `n ≤ 24`.
pub fn enumerate_low_energy<T: Scalar>(
    model: &IsingModel<T>,
    window: T,
) -> Result<LocalSolutionSet<T>> {
    if window < T::zero() {
        return Err(Error::Input(format!("window must be >= 0, got {window}")));
    }
    if model.n() > 24 {
        return Err(Error::Capacity(format!(
            "exhaustive window collection over {} variables exceeds the n = 24 guard",
            model.n()
        )));
    }
    // Collect with slack against the running minimum, then re-filter with
    // exact energies once the true ground is known.
    let slack = T::from_f64(1e-7).unwrap();
    let mut ground = T::infinity();
    let mut kept: Vec<(u64, T)> = Vec::new();
    for_each_spin_config(model, &mut |mask, e| {
        if e < ground {
            ground = e;
        }
        if e <= ground + window + slack {
            kept.push((mask, e));
        }
    });
    let cut = ground + window + tol::<T>();
    let entries: Vec<(SpinConfig, T)> = kept
        .into_iter()
        .filter_map(|(mask, _)| {
            let config = SpinConfig::from_mask(model.n(), mask);
            let e = model.energy_of_spins(config.values());
            (e <= cut).then_some((config, e))
        })
        .collect();
    Ok(LocalSolutionSet::from_entries(entries, window))
}

/// Heuristic window collection: anneal, keep the distinct configurations
/// observed at sweep and restart ends that fall within `window` of the best
/// energy seen, re-filtering against the final best before returning.
/// Completeness is not guaranteed.
pub fn sample_low_energy<T: Scalar>(
    model: &IsingModel<T>,
    params: &AnnealParams<T>,
    window: T,
) -> Result<LocalSolutionSet<T>> {
    if window < T::zero() {
        return Err(Error::Input(format!("window must be >= 0, got {window}")));
    }
    let run = AnnealRun::new(model, *params)?;
    let slack = T::from_f64(1e-7).unwrap();
    let mut seen: BTreeMap<Vec<i8>, T> = BTreeMap::new();
    let mut best_seen = T::infinity();
    let result = run.run(|spins, energy| {
        if energy < best_seen {
            best_seen = energy;
        }
        if energy <= best_seen + window + slack {
            seen.entry(spins.to_vec()).or_insert(energy);
        }
    });
    let cut = result.best_energy + window + tol::<T>();
    let entries: Vec<(SpinConfig, T)> = seen
        .into_iter()
        .filter(|&(_, e)| e <= cut)
        .map(|(spins, e)| (SpinConfig::spins(spins), e))
        .collect();
    Ok(LocalSolutionSet::from_entries(entries, window))
}
