//! Sparse quadratic binary models.
//!
//! [`IsingModel`] holds fields `h_i`, couplings `J_ij` and a constant offset
//! over spins `s ∈ {−1,+1}`; [`QuboModel`] is the equivalent form over bits
//! `x ∈ {0,1}` with the affine map `x = (1+s)/2`. Energies follow
//!
//! ```text
//! E(s) = offset + Σ_i h_i s_i + Σ_{i<j} J_ij s_i s_j
//! ```
//!
//! Both stores are sparse with canonical unordered keys; an absent entry is
//! zero, and explicit zero coefficients are never kept.

pub mod io;

use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Value domain of a configuration: spins `±1` or bits `0/1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarType {
    Spin,
    Binary,
}

/// An assignment of one value per variable, with an explicit domain marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinConfig {
    values: Vec<i8>,
    vartype: VarType,
}

impl SpinConfig {
    /// A spin configuration; every value must be `+1` or `−1`.
    pub fn spins(values: Vec<i8>) -> Self {
        assert!(
            values.iter().all(|&v| v == 1 || v == -1),
            "spin values must be +1 or -1"
        );
        Self {
            values,
            vartype: VarType::Spin,
        }
    }

    /// A binary configuration; every value must be `0` or `1`.
    pub fn bits(values: Vec<i8>) -> Self {
        assert!(
            values.iter().all(|&v| v == 0 || v == 1),
            "binary values must be 0 or 1"
        );
        Self {
            values,
            vartype: VarType::Binary,
        }
    }

    /// Spin configuration from a bitmask; bit `i` set means spin `i` is `−1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let values = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        Self {
            values,
            vartype: VarType::Spin,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vartype(&self) -> VarType {
        self.vartype
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Convert to the binary domain via `x = (1+s)/2`. Identity on binary input.
    pub fn to_binary(&self) -> SpinConfig {
        match self.vartype {
            VarType::Binary => self.clone(),
            VarType::Spin => SpinConfig {
                values: self.values.iter().map(|&s| (1 + s) / 2).collect(),
                vartype: VarType::Binary,
            },
        }
    }

    /// Convert to the spin domain via `s = 2x−1`. Identity on spin input.
    pub fn to_spin(&self) -> SpinConfig {
        match self.vartype {
            VarType::Spin => self.clone(),
            VarType::Binary => SpinConfig {
                values: self.values.iter().map(|&x| 2 * x - 1).collect(),
                vartype: VarType::Spin,
            },
        }
    }
}

/// Sparse Ising model over spins `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel<T> {
    n: usize,
    linear: BTreeMap<usize, T>,
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: num_traits::Zero> Default for IsingModel<T> {
    fn default() -> Self {
        Self {
            n: 0,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: T::zero(),
        }
    }
}

fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn set_offset(&mut self, c: T) {
        self.offset = c;
    }

    pub fn add_offset(&mut self, c: T) {
        self.offset = self.offset + c;
    }

    /// Field on variable `i`; zero when absent.
    pub fn linear_term(&self, i: usize) -> T {
        self.linear.get(&i).copied().unwrap_or_else(T::zero)
    }

    /// Coupling on the unordered pair `(i, j)`; zero when absent.
    pub fn coupling(&self, i: usize, j: usize) -> T {
        self.quadratic
            .get(&canonical(i, j))
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn set_linear(&mut self, i: usize, h: T) {
        assert!(i < self.n, "variable index {i} out of range (n={})", self.n);
        if h == T::zero() {
            self.linear.remove(&i);
        } else {
            self.linear.insert(i, h);
        }
    }

    pub fn add_linear(&mut self, i: usize, dh: T) {
        self.set_linear(i, self.linear_term(i) + dh);
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, w: T) {
        assert!(i != j, "self-coupling ({i},{i}) is not representable");
        assert!(
            i < self.n && j < self.n,
            "edge ({i},{j}) out of range (n={})",
            self.n
        );
        let key = canonical(i, j);
        if w == T::zero() {
            self.quadratic.remove(&key);
        } else {
            self.quadratic.insert(key, w);
        }
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, dw: T) {
        self.set_coupling(i, j, self.coupling(i, j) + dw);
    }

    /// Non-zero fields, in index order.
    pub fn linear_entries(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.linear.iter().map(|(&i, &h)| (i, h))
    }

    /// Non-zero couplings as `(i, j, w)` with `i < j`, in key order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.quadratic.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn num_edges(&self) -> usize {
        self.quadratic.len()
    }

    /// Neighbor lists `(j, J_ij)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &w) in &self.quadratic {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in self.quadratic.keys() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// True when every pair of variables is joined by a path of couplings.
    /// Vacuously true for `n ≤ 1`.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Energy of a spin configuration.
    pub fn energy(&self, config: &SpinConfig) -> Result<T> {
        if config.vartype() != VarType::Spin {
            return Err(Error::Input(
                "expected a spin configuration, got binary".into(),
            ));
        }
        if config.len() != self.n {
            return Err(Error::Input(format!(
                "configuration length {} does not match model size {}",
                config.len(),
                self.n
            )));
        }
        Ok(self.energy_of_spins(config.values()))
    }

    /// Energy of a raw `±1` slice, assumed valid and of length `n`.
    pub(crate) fn energy_of_spins(&self, spins: &[i8]) -> T {
        debug_assert_eq!(spins.len(), self.n);
        let mut e = self.offset;
        for (&i, &h) in &self.linear {
            e = e + h * T::from_i8(spins[i]).unwrap();
        }
        for (&(i, j), &w) in &self.quadratic {
            e = e + w * T::from_i8(spins[i] * spins[j]).unwrap();
        }
        e
    }

    /// All `2^n` energies in non-decreasing order. Guarded at `n ≤ 24`.
    pub fn spectrum(&self) -> Result<Vec<T>> {
        if self.n > 24 {
            return Err(Error::Capacity(format!(
                "spectrum of {} variables needs 2^{} energies (limit n = 24)",
                self.n, self.n
            )));
        }
        let mut energies = Vec::with_capacity(1usize << self.n);
        for_each_spin_config(self, &mut |_, e| energies.push(e));
        energies.sort_by(|a, b| a.partial_cmp(b).expect("non-finite energy"));
        Ok(energies)
    }

    /// Copy of the model with the named couplings deleted. Edges absent from
    /// the model are skipped; the second return value counts them.
    pub fn remove_edges(&self, edges: &[(usize, usize)]) -> (Self, usize) {
        let mut out = self.clone();
        let mut ignored = 0;
        for &(i, j) in edges {
            if out.quadratic.remove(&canonical(i, j)).is_none() {
                ignored += 1;
            }
        }
        (out, ignored)
    }

    /// Equivalent QUBO under `x = (1+s)/2`; energies agree for every
    /// configuration.
    pub fn to_qubo(&self) -> QuboModel<T> {
        let two = T::from_f64(2.0).unwrap();
        let four = T::from_f64(4.0).unwrap();
        let mut q = QuboModel::new(self.n);
        let mut offset = self.offset;
        for (&i, &h) in &self.linear {
            q.add_term(i, i, two * h);
            offset = offset - h;
        }
        for (&(i, j), &w) in &self.quadratic {
            q.add_term(i, j, four * w);
            q.add_term(i, i, -(two * w));
            q.add_term(j, j, -(two * w));
            offset = offset + w;
        }
        q.set_offset(offset);
        q
    }
}

/// Coefficient-wise sum of two models on the same variable set.
impl<T: Scalar> Add for &IsingModel<T> {
    type Output = IsingModel<T>;

    fn add(self, rhs: &IsingModel<T>) -> IsingModel<T> {
        assert_eq!(self.n, rhs.n, "cannot add models of different sizes");
        let mut out = self.clone();
        out.add_offset(rhs.offset);
        for (&i, &h) in &rhs.linear {
            out.add_linear(i, h);
        }
        for (&(i, j), &w) in &rhs.quadratic {
            out.add_coupling(i, j, w);
        }
        out
    }
}

/// Sparse QUBO over bits `0/1`: `E(x) = offset + Σ_{i≤j} t_ij x_i x_j`,
/// where diagonal terms are linear (`x_i² = x_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel<T> {
    n: usize,
    terms: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: num_traits::Zero> Default for QuboModel<T> {
    fn default() -> Self {
        Self {
            n: 0,
            terms: BTreeMap::new(),
            offset: T::zero(),
        }
    }
}

impl<T: Scalar> QuboModel<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn set_offset(&mut self, c: T) {
        self.offset = c;
    }

    /// Coefficient of the normalized pair `(min(i,j), max(i,j))`; zero when absent.
    pub fn term(&self, i: usize, j: usize) -> T {
        self.terms
            .get(&canonical_leq(i, j))
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn set_term(&mut self, i: usize, j: usize, w: T) {
        assert!(
            i < self.n && j < self.n,
            "term ({i},{j}) out of range (n={})",
            self.n
        );
        let key = canonical_leq(i, j);
        if w == T::zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, w);
        }
    }

    pub fn add_term(&mut self, i: usize, j: usize, dw: T) {
        self.set_term(i, j, self.term(i, j) + dw);
    }

    /// Non-zero terms as `(i, j, w)` with `i ≤ j`, in key order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.terms.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    /// Energy of a binary configuration.
    pub fn energy(&self, config: &SpinConfig) -> Result<T> {
        if config.vartype() != VarType::Binary {
            return Err(Error::Input(
                "expected a binary configuration, got spin".into(),
            ));
        }
        if config.len() != self.n {
            return Err(Error::Input(format!(
                "configuration length {} does not match model size {}",
                config.len(),
                self.n
            )));
        }
        let x = config.values();
        let mut e = self.offset;
        for (&(i, j), &w) in &self.terms {
            if x[i] == 1 && x[j] == 1 {
                e = e + w;
            }
        }
        Ok(e)
    }

    /// Equivalent Ising model under `s = 2x−1`; energies agree for every
    /// configuration.
    pub fn to_ising(&self) -> IsingModel<T> {
        let two = T::from_f64(2.0).unwrap();
        let four = T::from_f64(4.0).unwrap();
        let mut m = IsingModel::new(self.n);
        let mut offset = self.offset;
        for (&(i, j), &t) in &self.terms {
            if i == j {
                m.add_linear(i, t / two);
                offset = offset + t / two;
            } else {
                m.add_coupling(i, j, t / four);
                m.add_linear(i, t / four);
                m.add_linear(j, t / four);
                offset = offset + t / four;
            }
        }
        m.set_offset(offset);
        m
    }
}

fn canonical_leq(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Visit all `2^n` spin configurations of `model` in single-bit-flip (Gray
/// code) order, starting from the all `+1` state. The callback receives the
/// configuration as a bitmask (bit `i` set means spin `i` is `−1`) and its
/// energy, maintained incrementally with one neighborhood scan per step.
///
/// Callers are responsible for guarding `n`; masks are `u64`, so `n ≤ 63`.
pub(crate) fn for_each_spin_config<T: Scalar>(
    model: &IsingModel<T>,
    visit: &mut dyn FnMut(u64, T),
) {
    let n = model.n();
    assert!(n <= 63, "mask enumeration limited to 63 variables");
    let adj = model.adjacency();
    let mut spins = vec![1i8; n];
    let mut e = model.energy_of_spins(&spins);
    visit(0, e);
    let total: u64 = 1u64 << n;
    let two = T::from_f64(2.0).unwrap();
    for k in 1..total {
        let bit = k.trailing_zeros() as usize;
        // Flipping spin `bit` changes the energy by −2·s·(h + Σ_j J s_j).
        let mut field = model.linear_term(bit);
        for &(j, w) in &adj[bit] {
            field = field + w * T::from_i8(spins[j]).unwrap();
        }
        let s = T::from_i8(spins[bit]).unwrap();
        e = e - two * s * field;
        spins[bit] = -spins[bit];
        visit(k ^ (k >> 1), e);
    }
}
