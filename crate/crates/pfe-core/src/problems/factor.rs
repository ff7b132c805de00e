//! Integer factorization as a QUBO.
//!
//! The encoding is the binary multiplication table in column form: bit
//! variables for the two factors, auxiliary variables for the pairwise
//! products `p_i·q_j`, and carry variables per output column. Every column
//! equation is squared into a penalty and each product variable carries an
//! AND-gate penalty, so the energy is zero exactly when the configuration
//! spells out a valid multiplication `p·q = N` — the ground manifold is the
//! set of representable factorizations, independent of penalty magnitudes.
//!
//! Before emitting the QUBO, a fixed-point bound-propagation pass fixes every
//! bit that is forced by single-column feasibility, which shrinks small
//! instances considerably.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{QuboModel, SpinConfig};
use crate::Scalar;

/// How factor bit-lengths are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorLayout {
    /// Use [`FactorLayout::Balanced`] when the target has a factor pair of
    /// equal bit length, otherwise fall back to [`FactorLayout::General`].
    Auto,
    /// `⌈L/2⌉+1` bits for `p`, `L−1` for `q` (`L` = bit length of the
    /// target), trailing bits fixed to 1. Sound for every odd composite and
    /// excludes the trivial `1×N` factorization, at the cost of extra
    /// variables.
    General,
    /// Equal bit lengths with both leading and trailing bits fixed to 1.
    /// Matches the compact instances used for semiprimes with balanced
    /// factors; invalid for targets without such a factor pair.
    Balanced,
}

/// One bit position of a factor: fixed by the layout or the propagation
/// pass, or backed by a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bit {
    Fixed(u8),
    Var(usize),
}

/// Role of one model variable in the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    PBit(usize),
    QBit(usize),
    /// Auxiliary product `p_i · q_j`.
    Product(usize, usize),
    /// Carry out of `column` with weight `2^(bit+1)`.
    Carry { column: usize, bit: usize },
}

/// A factoring instance: the target, the bit layout of both factors, the
/// role of every model variable, and the penalty-backed QUBO itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::Deserialize<'de> + num_traits::Zero"
))]
pub struct FactorEncoding<T> {
    pub target: u64,
    pub p_bits: Vec<Bit>,
    pub q_bits: Vec<Bit>,
    pub vars: Vec<VarRole>,
    pub penalty_scale: T,
    #[serde(skip)]
    pub model: QuboModel<T>,
}

impl<T: Scalar> FactorEncoding<T> {
    /// Assemble `(p, q)` from the factor bits of a configuration. Spin
    /// configurations are converted to binary first. Excited states may
    /// decode to non-factors; callers check `p·q == target`.
    pub fn decode_factors(&self, config: &SpinConfig) -> Result<(u64, u64)> {
        if config.len() != self.model.n() {
            return Err(Error::Input(format!(
                "configuration length {} does not match encoding size {}",
                config.len(),
                self.model.n()
            )));
        }
        let binary = config.to_binary();
        let x = binary.values();
        let read = |bits: &[Bit]| -> u64 {
            bits.iter()
                .enumerate()
                .map(|(pos, bit)| {
                    let v = match *bit {
                        Bit::Fixed(v) => u64::from(v),
                        Bit::Var(idx) => x[idx] as u64,
                    };
                    v << pos
                })
                .sum()
        };
        Ok((read(&self.p_bits), read(&self.q_bits)))
    }

    /// True when the configuration decodes to a factor pair of the target.
    pub fn is_factorization(&self, config: &SpinConfig) -> bool {
        match self.decode_factors(config) {
            Ok((p, q)) => p.checked_mul(q) == Some(self.target),
            Err(_) => false,
        }
    }
}

/// Encode `n = p·q` with the layout chosen automatically.
pub fn factor_to_qubo<T: Scalar>(n: u64) -> Result<FactorEncoding<T>> {
    factor_to_qubo_with_layout(n, FactorLayout::Auto)
}

/// Encode `n = p·q` with an explicit layout choice.
pub fn factor_to_qubo_with_layout<T: Scalar>(
    n: u64,
    layout: FactorLayout,
) -> Result<FactorEncoding<T>> {
    let pairs = divisor_pairs(n)?;
    let balanced_bits = pairs
        .iter()
        .rev()
        .find(|&&(d, q)| bit_len(d) == bit_len(q))
        .map(|&(d, _)| bit_len(d) as usize);
    let (pb, qb, fix_leading) = match layout {
        FactorLayout::Balanced => {
            let b = balanced_bits.ok_or_else(|| {
                Error::Input(format!(
                    "{n} has no factor pair of equal bit length; use the general layout"
                ))
            })?;
            (b, b, true)
        }
        FactorLayout::Auto => match balanced_bits {
            Some(b) => (b, b, true),
            None => general_sizes(n),
        },
        FactorLayout::General => general_sizes(n),
    };
    Ok(Encoder::new(n, pb, qb, fix_leading).build())
}

fn general_sizes(n: u64) -> (usize, usize, bool) {
    let l = bit_len(n) as usize;
    (l.div_ceil(2) + 1, l - 1, false)
}

fn bit_len(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// All divisor pairs `(d, n/d)` with `d ≤ √n`, ascending. Errors on even,
/// prime, or too-small targets. Trial division is adequate at these scales.
fn divisor_pairs(n: u64) -> Result<Vec<(u64, u64)>> {
    if n % 2 == 0 {
        return Err(Error::Input(format!("target {n} must be odd")));
    }
    if n < 9 {
        return Err(Error::Input(format!("target {n} must be at least 9")));
    }
    let mut pairs = Vec::new();
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            pairs.push((d, n / d));
        }
        d += 2;
    }
    if pairs.is_empty() {
        return Err(Error::Input(format!("target {n} is prime")));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    P(usize),
    Q(usize),
    Carry(usize, usize),
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Const(i64),
    Atom(Atom),
    Product(usize, usize),
}

struct Encoder {
    n: u64,
    pb: usize,
    qb: usize,
    fixed: std::collections::BTreeMap<Atom, u8>,
    /// carry_bits[c] = number of carry variables out of column c.
    carry_bits: Vec<usize>,
}

impl Encoder {
    fn new(n: u64, pb: usize, qb: usize, fix_leading: bool) -> Self {
        let mut fixed = std::collections::BTreeMap::new();
        fixed.insert(Atom::P(0), 1);
        fixed.insert(Atom::Q(0), 1);
        if fix_leading {
            fixed.insert(Atom::P(pb - 1), 1);
            fixed.insert(Atom::Q(qb - 1), 1);
        }
        Self {
            n,
            pb,
            qb,
            fixed,
            carry_bits: Vec::new(),
        }
    }

    /// Output columns `0..pb+qb`: products reach column `pb+qb−2`, and the
    /// top column holds only the carry that forms the product's highest bit.
    fn columns(&self) -> usize {
        self.pb + self.qb
    }

    fn target_bit(&self, c: usize) -> i64 {
        if c < 64 {
            (self.n >> c & 1) as i64
        } else {
            0
        }
    }

    fn resolve(&self, cell: Cell) -> Cell {
        match cell {
            Cell::Const(_) => cell,
            Cell::Atom(a) => match self.fixed.get(&a) {
                Some(&v) => Cell::Const(i64::from(v)),
                None => cell,
            },
            Cell::Product(i, j) => {
                let p = self.fixed.get(&Atom::P(i)).copied();
                let q = self.fixed.get(&Atom::Q(j)).copied();
                match (p, q) {
                    (Some(0), _) | (_, Some(0)) => Cell::Const(0),
                    (Some(1), Some(1)) => Cell::Const(1),
                    (Some(1), None) => Cell::Atom(Atom::Q(j)),
                    (None, Some(1)) => Cell::Atom(Atom::P(i)),
                    (None, None) => cell,
                    _ => unreachable!("bit values are 0 or 1"),
                }
            }
        }
    }

    /// Signed terms of the column-c balance equation, which a satisfying
    /// configuration brings to exactly zero:
    /// products + carries-in − target bit − 2·carries-out = 0.
    fn column_terms(&self, c: usize) -> Vec<(i64, Cell)> {
        let mut terms = Vec::new();
        for i in 0..self.pb {
            let Some(j) = c.checked_sub(i) else { continue };
            if j >= self.qb {
                continue;
            }
            terms.push((1, self.resolve(Cell::Product(i, j))));
        }
        if c > 0 {
            for b in 0..self.carry_bits[c - 1] {
                terms.push((1i64 << b, self.resolve(Cell::Atom(Atom::Carry(c - 1, b)))));
            }
        }
        terms.push((1, Cell::Const(-self.target_bit(c))));
        if c < self.carry_bits.len() {
            for b in 0..self.carry_bits[c] {
                terms.push((-(1i64 << (b + 1)), self.resolve(Cell::Atom(Atom::Carry(c, b)))));
            }
        }
        terms
    }

    /// Size the carry register of each column from the maximum attainable
    /// column sum. The final column never emits a carry: the top product bit
    /// of any in-range multiplication cannot overflow past it.
    fn size_carries(&mut self) {
        let cols = self.columns();
        self.carry_bits = vec![0; cols];
        for c in 0..cols {
            let mut hi = 0i64;
            for (coeff, cell) in self.column_terms(c) {
                if coeff <= 0 {
                    continue;
                }
                hi += coeff
                    * match cell {
                        Cell::Const(v) => v.max(0),
                        _ => 1,
                    };
            }
            if c + 1 < cols {
                let max_out = (hi - self.target_bit(c)).max(0) / 2;
                self.carry_bits[c] = if max_out == 0 {
                    0
                } else {
                    bit_len(max_out as u64) as usize
                };
            }
        }
    }

    /// Fix every atom whose value is forced by single-column feasibility.
    /// Runs column sweeps to a fixed point. Forcing a product to 1 pins both
    /// of its factor bits; a product forced to 0 is only representable when
    /// one side is already pinned to 1.
    fn propagate(&mut self) {
        let cols = self.columns();
        let mut changed = true;
        while changed {
            changed = false;
            for c in 0..cols {
                let terms = self.column_terms(c);
                let mut base = 0i64;
                let mut unknowns = Vec::new();
                for (coeff, cell) in terms {
                    match cell {
                        Cell::Const(v) => base += coeff * v,
                        other => unknowns.push((coeff, other)),
                    }
                }
                let lo: i64 = base + unknowns.iter().map(|&(a, _)| a.min(0)).sum::<i64>();
                let hi: i64 = base + unknowns.iter().map(|&(a, _)| a.max(0)).sum::<i64>();
                debug_assert!(lo <= 0 && hi >= 0, "column {c} is infeasible");
                for &(coeff, cell) in &unknowns {
                    let lo_rest = lo - coeff.min(0);
                    let hi_rest = hi - coeff.max(0);
                    let feasible = |v: i64| lo_rest + coeff * v <= 0 && hi_rest + coeff * v >= 0;
                    let forced = match (feasible(0), feasible(1)) {
                        (true, false) => Some(0u8),
                        (false, true) => Some(1u8),
                        (true, true) => None,
                        (false, false) => unreachable!("column {c} infeasible"),
                    };
                    let Some(v) = forced else { continue };
                    match cell {
                        Cell::Atom(a) => {
                            self.fixed.insert(a, v);
                            changed = true;
                        }
                        Cell::Product(i, j) if v == 1 => {
                            self.fixed.insert(Atom::P(i), 1);
                            self.fixed.insert(Atom::Q(j), 1);
                            changed = true;
                        }
                        _ => {}
                    }
                    if changed {
                        break; // re-resolve this column before fixing more
                    }
                }
                if changed {
                    break;
                }
            }
        }
    }

    fn build<T: Scalar>(mut self) -> FactorEncoding<T> {
        self.size_carries();
        self.propagate();

        // Assign model variables: free factor bits, surviving products,
        // then carries, each in ascending order.
        let mut vars: Vec<VarRole> = Vec::new();
        let mut var_of_atom = std::collections::BTreeMap::new();
        for i in 0..self.pb {
            if !self.fixed.contains_key(&Atom::P(i)) {
                var_of_atom.insert(Atom::P(i), vars.len());
                vars.push(VarRole::PBit(i));
            }
        }
        for j in 0..self.qb {
            if !self.fixed.contains_key(&Atom::Q(j)) {
                var_of_atom.insert(Atom::Q(j), vars.len());
                vars.push(VarRole::QBit(j));
            }
        }
        let mut product_var = std::collections::BTreeMap::new();
        for c in 0..self.columns() {
            for (_, cell) in self.column_terms(c) {
                if let Cell::Product(i, j) = cell {
                    product_var.entry((i, j)).or_insert_with(|| {
                        vars.push(VarRole::Product(i, j));
                        vars.len() - 1
                    });
                }
            }
        }
        for c in 0..self.columns() {
            for b in 0..self.carry_bits[c] {
                let atom = Atom::Carry(c, b);
                if !self.fixed.contains_key(&atom) {
                    var_of_atom.insert(atom, vars.len());
                    vars.push(VarRole::Carry { column: c, bit: b });
                }
            }
        }

        // Square each column balance into the coefficient grid.
        let mut grid: std::collections::BTreeMap<(usize, usize), i64> =
            std::collections::BTreeMap::new();
        let mut offset = 0i64;
        let bump = |grid: &mut std::collections::BTreeMap<(usize, usize), i64>,
                        a: usize,
                        b: usize,
                        v: i64| {
            let key = if a <= b { (a, b) } else { (b, a) };
            *grid.entry(key).or_insert(0) += v;
        };
        for c in 0..self.columns() {
            let mut konst = 0i64;
            let mut lin: Vec<(usize, i64)> = Vec::new();
            for (coeff, cell) in self.column_terms(c) {
                match cell {
                    Cell::Const(v) => konst += coeff * v,
                    Cell::Atom(a) => lin.push((var_of_atom[&a], coeff)),
                    Cell::Product(i, j) => lin.push((product_var[&(i, j)], coeff)),
                }
            }
            debug_assert!(!lin.is_empty() || konst == 0, "constant column {c} unsatisfied");
            offset += konst * konst;
            for &(v, a) in &lin {
                bump(&mut grid, v, v, a * a + 2 * konst * a);
            }
            for s in 0..lin.len() {
                for t in (s + 1)..lin.len() {
                    bump(&mut grid, lin[s].0, lin[t].0, 2 * lin[s].1 * lin[t].1);
                }
            }
        }
        let max_coeff = grid.values().map(|v| v.abs()).max().unwrap_or(0).max(1);
        let penalty = 2 * max_coeff;
        for (&(i, j), &z) in &product_var {
            let pv = var_of_atom[&Atom::P(i)];
            let qv = var_of_atom[&Atom::Q(j)];
            bump(&mut grid, z, z, 3 * penalty);
            bump(&mut grid, pv, qv, penalty);
            bump(&mut grid, pv, z, -2 * penalty);
            bump(&mut grid, qv, z, -2 * penalty);
        }

        let mut model = QuboModel::new(vars.len());
        model.set_offset(T::from_i64(offset).unwrap());
        for ((a, b), v) in grid {
            if v != 0 {
                model.add_term(a, b, T::from_i64(v).unwrap());
            }
        }

        let bit_of = |atom: Atom| -> Bit {
            match self.fixed.get(&atom) {
                Some(&v) => Bit::Fixed(v),
                None => Bit::Var(var_of_atom[&atom]),
            }
        };
        FactorEncoding {
            target: self.n,
            p_bits: (0..self.pb).map(|i| bit_of(Atom::P(i))).collect(),
            q_bits: (0..self.qb).map(|j| bit_of(Atom::Q(j))).collect(),
            vars,
            penalty_scale: T::from_i64(penalty).unwrap(),
            model,
        }
    }
}

/// Rebuild a deserialized encoding's QUBO (the model itself is not stored
/// in the JSON side file) and check the side data against the encoder.
pub fn rebuild_encoding<T: Scalar>(enc: &FactorEncoding<T>) -> Result<FactorEncoding<T>> {
    let layout = if matches!(enc.p_bits.last(), Some(Bit::Fixed(1)))
        && enc.p_bits.len() == enc.q_bits.len()
    {
        FactorLayout::Balanced
    } else {
        FactorLayout::General
    };
    let rebuilt = factor_to_qubo_with_layout::<T>(enc.target, layout)?;
    if rebuilt.p_bits != enc.p_bits || rebuilt.q_bits != enc.q_bits || rebuilt.vars != enc.vars {
        return Err(Error::Input(format!(
            "encoding side data does not match the encoder output for target {}",
            enc.target
        )));
    }
    Ok(rebuilt)
}
