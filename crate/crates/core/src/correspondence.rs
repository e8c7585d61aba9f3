//! Finite correspondences on `{0, …, d-1}`.
//!
//! A correspondence assigns every state a nonempty set of images; on a finite
//! set it is the same thing as a (0,1)-matrix with no zero row. Its orbit
//! space is the one-sided subshift of finite type defined by that matrix.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Default cap on the number of orbits materialized by [`FiniteCorrespondence::enumerate_orbits`].
pub const DEFAULT_ORBIT_BUDGET: u128 = 1_000_000;

/// A correspondence on a finite state space, stored as its adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteCorrespondence {
    adjacency: Vec<Vec<bool>>,
}

impl FiniteCorrespondence {
    /// Checks that `adjacency` is square, nonempty and has no empty row.
    pub fn validate(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let d = adjacency.len();
        if d == 0 {
            return Err(Error::EmptyStateSpace);
        }
        for (row, r) in adjacency.iter().enumerate() {
            if r.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    row,
                    cols: r.len(),
                });
            }
        }
        if let Some(i) = adjacency.iter().position(|r| !r.iter().any(|&a| a)) {
            return Err(Error::EmptyRow(i));
        }
        Ok(Self { adjacency })
    }

    /// Same as [`validate`](Self::validate) for a 0/1 integer matrix; any
    /// nonzero entry counts as an edge.
    pub fn from_01<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        Self::validate(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&a| a != 0).collect())
                .collect(),
        )
    }

    /// The correspondence `x ↦ {f(x)}` of a self-map given by its 0-based table.
    pub fn from_map(f: &[usize]) -> Result<Self> {
        let d = f.len();
        if d == 0 {
            return Err(Error::EmptyStateSpace);
        }
        let mut adjacency = vec![vec![false; d]; d];
        for (i, &fi) in f.iter().enumerate() {
            if fi >= d {
                return Err(Error::IndexOutOfRange { index: fi, len: d });
            }
            adjacency[i][fi] = true;
        }
        Ok(Self { adjacency })
    }

    /// Full shift on `d` symbols: every transition allowed.
    pub fn full_shift(d: usize) -> Result<Self> {
        Self::validate(vec![vec![true; d]; d])
    }

    /// The golden-mean shift `[[1,1],[1,0]]`.
    pub fn golden_mean() -> Self {
        Self {
            adjacency: vec![vec![true, true], vec![true, false]],
        }
    }

    pub fn dim(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(false)
    }

    /// `T(i)`, in increasing order.
    pub fn images(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| a.then_some(j))
    }

    /// `T⁻¹(j)`, in increasing order.
    pub fn preimages(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .filter_map(move |(i, r)| r[j].then_some(i))
    }

    /// `#T(i)`.
    pub fn out_degree(&self, i: usize) -> usize {
        self.images(i).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).flat_map(move |i| self.images(i).map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Adjacency as a real 0/1 matrix.
    pub fn to_matrix(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d);
        for (i, j) in self.edges() {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// The inverse correspondence (transposed adjacency). Requires `T(X) = X`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim();
        let transposed: Vec<Vec<bool>> = (0..d)
            .map(|j| (0..d).map(|i| self.adjacency[i][j]).collect())
            .collect();
        if let Some(j) = transposed.iter().position(|r| !r.iter().any(|&a| a)) {
            return Err(Error::NotSurjective(j));
        }
        Ok(Self {
            adjacency: transposed,
        })
    }

    /// Number of orbits with `n + 1` states, i.e. `1ᵀ Aⁿ 1`, in exact arithmetic.
    pub fn count_orbits(&self, n: usize) -> Result<u128> {
        let d = self.dim();
        let mut v = vec![1u128; d];
        for _ in 0..n {
            let mut next = vec![0u128; d];
            for (i, slot) in next.iter_mut().enumerate() {
                for j in self.images(i) {
                    *slot = slot.checked_add(v[j]).ok_or(Error::Overflow)?;
                }
            }
            v = next;
        }
        v.iter()
            .try_fold(0u128, |acc, x| acc.checked_add(*x))
            .ok_or(Error::Overflow)
    }

    /// All orbits with exactly `len` states, lexicographically ordered.
    ///
    /// Fails with [`Error::BudgetExceeded`] before allocating anything if
    /// there are more than `budget` of them.
    pub fn enumerate_orbits(&self, len: usize, budget: u128) -> Result<Vec<Orbit>> {
        if len == 0 {
            return Err(Error::InvalidParameter("orbit length must be at least 1".into()));
        }
        let count = match self.count_orbits(len - 1) {
            Ok(c) => c,
            Err(Error::Overflow) => u128::MAX,
            Err(e) => return Err(e),
        };
        if count > budget {
            return Err(Error::BudgetExceeded { count, budget });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut path = Vec::with_capacity(len);
        for start in 0..self.dim() {
            path.push(start);
            self.extend_orbits(&mut path, len, &mut out);
            path.pop();
        }
        Ok(out)
    }

    fn extend_orbits(&self, path: &mut Vec<usize>, len: usize, out: &mut Vec<Orbit>) {
        if path.len() == len {
            out.push(Orbit(path.clone()));
            return;
        }
        let last = *path.last().expect("path is never empty");
        for j in self.images(last) {
            path.push(j);
            self.extend_orbits(path, len, out);
            path.pop();
        }
    }

    /// Strong connectivity of the adjacency digraph.
    pub fn is_irreducible(&self) -> bool {
        let reach = linalg::reachability(&self.adjacency);
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| reach[i][j]))
    }

    /// Some power `Aᵏ` with `k ≤ d² − 2d + 2` is entrywise positive.
    pub fn is_primitive(&self) -> bool {
        let d = self.dim();
        let bound = d * d + 2 - 2 * d;
        let mut power = self.adjacency.clone();
        for _ in 0..bound {
            if power.iter().all(|r| r.iter().all(|&a| a)) {
                return true;
            }
            power = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).any(|k| power[i][k] && self.adjacency[k][j]))
                        .collect()
                })
                .collect();
        }
        false
    }
}

/// A finite orbit `(x₁, …, xₙ)`; 0-based states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orbit(Vec<usize>);

impl Orbit {
    /// Builds an orbit and checks every step against `corr`.
    pub fn new(corr: &FiniteCorrespondence, states: Vec<usize>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidOrbit("an orbit has at least one state".into()));
        }
        for &s in &states {
            if s >= corr.dim() {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: corr.dim(),
                });
            }
        }
        for w in states.windows(2) {
            if !corr.allows(w[0], w[1]) {
                return Err(Error::DisallowedEdge(w[0], w[1]));
            }
        }
        Ok(Self(states))
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Dash-joined 1-based label, e.g. `1-2-1`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|s| (s + 1).to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl From<Orbit> for Vec<usize> {
    fn from(o: Orbit) -> Self {
        o.0
    }
}

/// Real weights on the edges of a correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePotential {
    corr: FiniteCorrespondence,
    values: Matrix,
}

impl EdgePotential {
    /// `φ ≡ 0`.
    pub fn zero(corr: &FiniteCorrespondence) -> Self {
        Self {
            corr: corr.clone(),
            values: Matrix::zeros(corr.dim()),
        }
    }

    pub fn from_fn(corr: &FiniteCorrespondence, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pot = Self::zero(corr);
        for (i, j) in corr.edges() {
            let v = f(i, j);
            if !v.is_finite() {
                return Err(Error::NonFinitePotential(i, j));
            }
            pot.values[(i, j)] = v;
        }
        Ok(pot)
    }

    /// Explicit edge values; edges not listed get 0.
    pub fn from_entries(
        corr: &FiniteCorrespondence,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut pot = Self::zero(corr);
        for (i, j, v) in entries {
            if !corr.allows(i, j) {
                return Err(Error::DisallowedEdge(i, j));
            }
            if !v.is_finite() {
                return Err(Error::NonFinitePotential(i, j));
            }
            pot.values[(i, j)] = v;
        }
        Ok(pot)
    }

    pub fn correspondence(&self) -> &FiniteCorrespondence {
        &self.corr
    }

    pub fn dim(&self) -> usize {
        self.corr.dim()
    }

    /// `φ(i, j)`, or `None` off the edge set.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.corr.allows(i, j).then(|| self.values[(i, j)])
    }

    /// Value on an edge known to be allowed; 0 elsewhere.
    pub(crate) fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// `‖φ‖∞` over the edge set.
    pub fn sup_norm(&self) -> f64 {
        self.corr
            .edges()
            .map(|(i, j)| self.values[(i, j)].abs())
            .fold(0.0, f64::max)
    }

    /// `φ + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for (i, j) in self.corr.edges() {
            out.values[(i, j)] += c;
        }
        out
    }

    /// `φ̄(i, j) = φ(j, i)`, a potential on the inverse correspondence.
    pub fn conjugate(&self) -> Result<Self> {
        let inv = self.corr.inverse()?;
        Ok(Self {
            corr: inv,
            values: self.values.transpose(),
        })
    }

    /// Birkhoff sum `Σ φ(xₖ, xₖ₊₁)` along an orbit; 0 for a single state.
    pub fn birkhoff_sum(&self, orbit: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for w in orbit.windows(2) {
            total += self.get(w[0], w[1]).ok_or(Error::DisallowedEdge(w[0], w[1]))?;
        }
        Ok(total)
    }
}
