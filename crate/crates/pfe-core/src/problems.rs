//! Instance generators: integer-factorization QUBOs, Kagome lattices,
//! chains/rings, and random connected test models.

mod factor;
mod lattice;

pub use factor::{
    factor_to_qubo, factor_to_qubo_with_layout, rebuild_encoding, Bit, FactorEncoding,
    FactorLayout, VarRole,
};
pub use lattice::{chain, kagome_lattice, kagome_lattice_counting, LatticeSpec};

use rand::Rng;

use crate::model::IsingModel;
use crate::rng::rng_from_seed;
use crate::Scalar;

/// Random connected Ising model for tests and benchmarks: a random spanning
/// tree plus extra edges kept with probability `extra_edge_prob`, fields and
/// couplings uniform in `[−1, 1]`. Deterministic in `seed`.
pub fn random_connected<T: Scalar>(n: usize, extra_edge_prob: f64, seed: u64) -> IsingModel<T> {
    assert!(n >= 1, "need at least one variable");
    let mut rng = rng_from_seed(seed);
    let mut m = IsingModel::new(n);
    let coef = |rng: &mut rand_chacha::ChaCha8Rng| {
        T::from_f64(rng.gen_range(-1.0..=1.0)).unwrap()
    };
    for i in 0..n {
        let h = coef(&mut rng);
        m.set_linear(i, h);
    }
    // Spanning tree: attach each node to a uniformly random earlier node.
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = coef(&mut rng);
        m.set_coupling(i, j, if w == T::zero() { T::from_f64(0.5).unwrap() } else { w });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m.coupling(i, j) == T::zero() && rng.gen_bool(extra_edge_prob) {
                let w = coef(&mut rng);
                m.set_coupling(i, j, if w == T::zero() { T::from_f64(0.5).unwrap() } else { w });
            }
        }
    }
    m
}
