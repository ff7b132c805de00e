//! Regular lattice generators: periodic/open Kagome and 1D chains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::Scalar;

/// Parameters of a Kagome lattice instance.
///
/// `rows` and `cols` count unit cells; each cell carries three sites
/// (sublattices 0, 1, 2), indexed cell-major as `3·(row·cols + col) + sub`.
/// Every coupling is `coupling` and every field is `field`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec<T> {
    pub rows: usize,
    pub cols: usize,
    pub coupling: T,
    pub field: T,
    pub periodic: bool,
}

impl<T: Scalar> LatticeSpec<T> {
    pub fn sites(&self) -> usize {
        3 * self.rows * self.cols
    }
}

/// Build the Kagome (trihexagonal) lattice of `spec`.
///
/// The periodic lattice is 4-regular with `6·rows·cols` edges: each cell
/// contributes an up triangle on its own three sites and a down triangle
/// shared with the cells at `(row, col+1)` and `(row+1, col)`. With a single
/// periodic row or column the up and down triangles overlap; parallel edges
/// are merged by summing their couplings.
pub fn kagome_lattice<T: Scalar>(spec: &LatticeSpec<T>) -> IsingModel<T> {
    kagome_lattice_counting(spec).0
}

/// As [`kagome_lattice`], also reporting how many parallel edges were merged.
pub fn kagome_lattice_counting<T: Scalar>(spec: &LatticeSpec<T>) -> (IsingModel<T>, usize) {
    assert!(spec.rows >= 1 && spec.cols >= 1, "need at least one cell");
    let n = spec.sites();
    let mut m = IsingModel::new(n);
    if spec.field != T::zero() {
        for i in 0..n {
            m.set_linear(i, spec.field);
        }
    }
    let site = |r: usize, c: usize, u: usize| 3 * (r * spec.cols + c) + u;
    let mut merged = 0usize;
    let mut bond = |m: &mut IsingModel<T>, a: usize, b: usize| {
        if m.coupling(a, b) != T::zero() {
            merged += 1;
        }
        m.add_coupling(a, b, spec.coupling);
    };
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let (a, b, d) = (site(r, c, 0), site(r, c, 1), site(r, c, 2));
            // Up triangle inside the cell.
            bond(&mut m, a, b);
            bond(&mut m, b, d);
            bond(&mut m, a, d);
            // Down triangle toward the next cells over.
            let right = c + 1 < spec.cols || spec.periodic;
            let below = r + 1 < spec.rows || spec.periodic;
            let b_right = site(r, (c + 1) % spec.cols, 1);
            let a_below = site((r + 1) % spec.rows, c, 0);
            if right {
                bond(&mut m, d, b_right);
            }
            if below {
                bond(&mut m, d, a_below);
            }
            if right && below {
                bond(&mut m, b_right, a_below);
            }
        }
    }
    (m, merged)
}

/// 1D chain (or ring) with uniform coupling and field.
pub fn chain<T: Scalar>(n: usize, coupling: T, field: T, periodic: bool) -> Result<IsingModel<T>> {
    let min = if periodic { 3 } else { 2 };
    if n < min {
        return Err(Error::Input(format!(
            "chain needs at least {min} spins ({}), got {n}",
            if periodic { "periodic" } else { "open" }
        )));
    }
    let mut m = IsingModel::new(n);
    if field != T::zero() {
        for i in 0..n {
            m.set_linear(i, field);
        }
    }
    for i in 0..n - 1 {
        m.set_coupling(i, i + 1, coupling);
    }
    if periodic {
        m.add_coupling(n - 1, 0, coupling);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute_force_ground;

    fn spec(rows: usize, cols: usize, j: f64, h: f64, periodic: bool) -> LatticeSpec<f64> {
        LatticeSpec {
            rows,
            cols,
            coupling: j,
            field: h,
            periodic,
        }
    }

    #[test]
    fn periodic_kagome_is_degree_four_regular() {
        let m = kagome_lattice(&spec(5, 6, 1.0, 1.0, true));
        assert_eq!(m.n(), 90);
        assert_eq!(m.num_edges(), 180);
        assert!(m.degrees().iter().all(|&d| d == 4));
        assert!(m.is_connected());
    }

    #[test]
    fn periodic_edge_count_is_twice_site_count() {
        for (r, c) in [(2, 2), (2, 3), (3, 4), (4, 2)] {
            let m = kagome_lattice(&spec(r, c, 1.0, 0.0, true));
            assert_eq!(m.num_edges(), 2 * m.n(), "{r}x{c}");
            assert!(m.degrees().iter().all(|&d| d == 4));
        }
    }

    #[test]
    fn single_cell_merges_parallel_edges() {
        let (m, merged) = kagome_lattice_counting(&spec(1, 1, 1.0, 0.0, true));
        assert_eq!(m.n(), 3);
        assert!(merged > 0);
        // Up and down triangles coincide, so every bond is doubled.
        assert_eq!(m.num_edges(), 3);
        for (_, _, w) in m.edges() {
            assert_eq!(w, 2.0);
        }
        // Enumerate the constructed model: frustrated triangle with J = 2.
        let spectrum = m.spectrum().unwrap();
        assert_eq!(spectrum[0], -2.0);
        let (_, e) = brute_force_ground(&m).unwrap();
        assert_eq!(e, -2.0);
    }

    #[test]
    fn two_by_two_ground_energy_golden() {
        // 12 sites, 4096 states; value frozen after enumeration.
        let m = kagome_lattice(&spec(2, 2, 1.0, 1.0, true));
        assert_eq!(m.n(), 12);
        let (_, e) = brute_force_ground(&m).unwrap();
        assert!((e - (-12.0)).abs() < 1e-12, "ground energy {e}");
    }

    #[test]
    fn open_lattice_drops_wrapping_bonds() {
        let m = kagome_lattice(&spec(2, 2, 1.0, 0.0, false));
        assert_eq!(m.n(), 12);
        assert!(m.num_edges() < 24);
        assert!(m.degrees().iter().any(|&d| d < 4));
    }

    #[test]
    fn chain_examples() {
        let pair = chain::<f64>(2, -1.0, 0.0, false).unwrap();
        assert_eq!(pair.num_edges(), 1);
        assert_eq!(pair.coupling(0, 1), -1.0);

        let ring = chain::<f64>(8, -1.0, 0.0, true).unwrap();
        let (_, e) = brute_force_ground(&ring).unwrap();
        assert_eq!(e, -8.0);

        // Odd antiferromagnetic ring is frustrated.
        let odd = chain::<f64>(5, 1.0, 0.0, true).unwrap();
        let (_, e) = brute_force_ground(&odd).unwrap();
        assert_eq!(e, -3.0);

        assert!(chain::<f64>(1, 1.0, 0.0, false).is_err());
        assert!(chain::<f64>(2, 1.0, 0.0, true).is_err());
    }
}
