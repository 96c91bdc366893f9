//! Exact ground truth for small instances by enumerating basic solutions in
//! rational arithmetic.
//!
//! The feasible region is a polytope, so an optimum is attained at a vertex.
//! Every vertex is a basic solution: pick `r = rank` independent columns, fix
//! every other variable at one of its bounds, and solve for the basis. All
//! `(basis, bound pattern)` pairs are visited, the bound patterns in Gray-code
//! order so each step updates the basic variables with one column.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::caps::SizeCaps;
use crate::error::{Error, Result};
use crate::model::GmnfInstance;
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub value: Option<Rational>,
    /// Distinct optimal vertices in lexicographic order.
    pub solutions: Vec<Vec<Rational>>,
    pub unique: bool,
}

impl OracleResult {
    /// The optimal flow when it is unique.
    pub fn unique_solution(&self) -> Option<&[Rational]> {
        if self.unique {
            self.solutions.first().map(Vec::as_slice)
        } else {
            None
        }
    }
}

pub fn solve_exact(inst: &GmnfInstance<Rational>) -> Result<OracleResult> {
    let all = vec![true; inst.vertex_count()];
    solve_with_rows(inst, &all, SizeCaps::global())
}

pub fn is_unique(inst: &GmnfInstance<Rational>) -> Result<bool> {
    Ok(solve_exact(inst)?.unique)
}

/// Solves the instance keeping only the balance rows of vertices with
/// `constrained[v]`; the box constraints always apply.
pub fn solve_with_rows(
    inst: &GmnfInstance<Rational>,
    constrained: &[bool],
    caps: &SizeCaps,
) -> Result<OracleResult> {
    let m = inst.edge_count();
    if m > caps.oracle_edges {
        return Err(Error::SizeCap { what: "oracle edges", limit: caps.oracle_edges });
    }
    if constrained.len() != inst.vertex_count() {
        return Err(Error::Usage("row mask length differs from vertex count".into()));
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for v in (0..inst.vertex_count()).filter(|&v| constrained[v]) {
        let mut row = vec![Rational::zero(); m];
        for &e in inst.graph.incident(v) {
            row[e] = inst.coeff(v, e).expect("incident").clone();
        }
        rows.push(row);
        rhs.push(inst.balance[v].clone());
    }
    let Some(system) = Echelon::reduce(rows, rhs, m) else {
        return Ok(infeasible());
    };
    let upper: Vec<Rational> = inst.edges.iter().map(|d| d.capacity.clone()).collect();
    let cost: Vec<Rational> = inst.edges.iter().map(|d| d.cost.clone()).collect();
    if upper.iter().any(Signed::is_negative) {
        return Ok(infeasible());
    }

    let r = system.rows.len();
    let mut best: Option<Rational> = None;
    let mut optimal: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for basis in Combinations::new(m, r) {
        let Some((base, step)) = system.basis_solution(&basis, &upper) else {
            continue;
        };
        let nonbasic: Vec<usize> = (0..m).filter(|j| !basis.contains(j)).collect();
        let mut at_upper = vec![false; nonbasic.len()];
        let mut x_basic = base;
        for k in 0..(1usize << nonbasic.len()) {
            if k > 0 {
                // Gray code: flip one nonbasic variable.
                let flip = k.trailing_zeros() as usize;
                let sign = if at_upper[flip] { -Rational::one() } else { Rational::one() };
                at_upper[flip] = !at_upper[flip];
                for (xb, s) in x_basic.iter_mut().zip(&step[flip]) {
                    *xb += s * &sign;
                }
            }
            let in_box = basis
                .iter()
                .zip(&x_basic)
                .all(|(&j, xb)| !xb.is_negative() && *xb <= upper[j]);
            if !in_box {
                continue;
            }
            let mut x = vec![Rational::zero(); m];
            for (&j, xb) in basis.iter().zip(&x_basic) {
                x[j] = xb.clone();
            }
            for (idx, &j) in nonbasic.iter().enumerate() {
                if at_upper[idx] {
                    x[j] = upper[j].clone();
                }
            }
            let value: Rational = x.iter().zip(&cost).map(|(a, b)| a * b).sum();
            match &best {
                Some(b) if value > *b => {}
                Some(b) if value == *b => {
                    optimal.insert(x);
                }
                _ => {
                    best = Some(value);
                    optimal.clear();
                    optimal.insert(x);
                }
            }
        }
    }
    match best {
        None => Ok(infeasible()),
        Some(value) => {
            let solutions: Vec<_> = optimal.into_iter().collect();
            Ok(OracleResult {
                status: OracleStatus::Optimal,
                value: Some(value),
                unique: solutions.len() == 1,
                solutions,
            })
        }
    }
}

fn infeasible() -> OracleResult {
    OracleResult { status: OracleStatus::Infeasible, value: None, solutions: Vec::new(), unique: false }
}

/// Row-reduced balance system with independent rows only.
struct Echelon {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

fn bit_size(q: &Rational) -> u64 {
    q.numer().bits() + q.denom().bits()
}

impl Echelon {
    /// Gauss–Jordan elimination. Among the candidate pivots of a column the
    /// entry with the fewest numerator+denominator bits wins (lowest row on
    /// ties). Returns `None` when the system is inconsistent.
    fn reduce(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>, cols: usize) -> Option<Self> {
        let mut rank = 0;
        for col in 0..cols {
            let pivot = (rank..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by_key(|&i| (bit_size(&rows[i][col]), i));
            let Some(p) = pivot else { continue };
            rows.swap(rank, p);
            rhs.swap(rank, p);
            let inv = rows[rank][col].recip();
            for x in rows[rank].iter_mut() {
                *x *= &inv;
            }
            rhs[rank] *= &inv;
            let pivot = rows[rank].clone();
            for i in 0..rows.len() {
                if i == rank || rows[i][col].is_zero() {
                    continue;
                }
                let factor = rows[i][col].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &factor * p;
                }
                let delta = &factor * &rhs[rank];
                rhs[i] -= delta;
            }
            rank += 1;
        }
        if rhs[rank..].iter().any(|b| !b.is_zero()) {
            return None;
        }
        rows.truncate(rank);
        rhs.truncate(rank);
        Some(Echelon { rows, rhs })
    }

    /// For basis columns `basis`: the basic values with every nonbasic
    /// variable at zero, and for each nonbasic column (in increasing order)
    /// the change in the basic values when that variable moves from 0 to its
    /// upper bound. `None` if the basis is singular.
    fn basis_solution(&self, basis: &[usize], upper: &[Rational]) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
        let r = basis.len();
        let m = self.rows.first().map_or(upper.len(), Vec::len);
        let nonbasic: Vec<usize> = (0..m).filter(|j| !basis.contains(j)).collect();
        // Augmented [B | rhs | N·diag(u)] reduced to [I | ...].
        let width = r + 1 + nonbasic.len();
        let mut aug: Vec<Vec<Rational>> = (0..r)
            .map(|i| {
                let mut row = Vec::with_capacity(width);
                row.extend(basis.iter().map(|&j| self.rows[i][j].clone()));
                row.push(self.rhs[i].clone());
                row.extend(nonbasic.iter().map(|&j| -&self.rows[i][j] * &upper[j]));
                row
            })
            .collect();
        for col in 0..r {
            let p = (col..r).filter(|&i| !aug[i][col].is_zero()).min_by_key(|&i| (bit_size(&aug[i][col]), i))?;
            aug.swap(col, p);
            let inv = aug[col][col].recip();
            for x in aug[col].iter_mut() {
                *x *= &inv;
            }
            let pivot = aug[col].clone();
            for (i, row) in aug.iter_mut().enumerate().take(r) {
                if i == col || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &factor * p;
                }
            }
        }
        let base = aug.iter().map(|row| row[r].clone()).collect();
        let step = (0..nonbasic.len())
            .map(|k| aug.iter().map(|row| row[r + 1 + k].clone()).collect())
            .collect();
        Some((base, step))
    }
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
