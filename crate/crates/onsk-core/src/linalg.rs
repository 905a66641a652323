//! Sparse square operators on `(C^2)^{⊗n}` and exact elimination, generic over [`Field`].

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::field::{Field, Rational, Scalar};

/// Sparse `2^n × 2^n` matrix; row `β`, column `α`, bit `i−1` of an index is `α_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Op<F> {
    pub n: usize,
    rows: Vec<BTreeMap<usize, F>>,
}

impl<F: Field> Op<F> {
    pub fn zero(n: usize) -> Self {
        Op { n, rows: vec![BTreeMap::new(); 1 << n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(n, |_| F::one())
    }

    pub fn diagonal(n: usize, f: impl Fn(usize) -> F) -> Self {
        let mut op = Self::zero(n);
        for a in 0..1usize << n {
            op.set(a, a, f(a));
        }
        op
    }

    /// Operator sending basis `α` to `c·|β⟩` for every `Some((β, c)) = f(α)`.
    pub fn from_basis_map(n: usize, f: impl Fn(usize) -> Option<(usize, F)>) -> Self {
        let mut op = Self::zero(n);
        for a in 0..1usize << n {
            if let Some((b, c)) = f(a) {
                op.add_to(b, a, c);
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        self.rows[row].get(&col).cloned().unwrap_or_else(F::zero)
    }

    pub fn set(&mut self, row: usize, col: usize, v: F) {
        if v.is_zero() {
            self.rows[row].remove(&col);
        } else {
            self.rows[row].insert(col, v);
        }
    }

    pub fn add_to(&mut self, row: usize, col: usize, v: F) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(row, col);
        self.set(row, col, cur + v);
    }

    pub fn row(&self, row: usize) -> &BTreeMap<usize, F> {
        &self.rows[row]
    }

    /// Nonzero entries in ascending `(row, col)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &F)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, m)| m.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn map(&self, f: impl Fn(usize, usize, &F) -> F) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c, v) in self.entries() {
            out.set(r, c, f(r, c, v));
        }
        out
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|_, _, v| v.clone() * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            out.add_to(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-F::one()))
    }

    /// `self + s·id`.
    pub fn shift(&self, s: &F) -> Self {
        let mut out = self.clone();
        for a in 0..self.dim() {
            out.add_to(a, a, s.clone());
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c, v) in self.entries() {
            out.set(c, r, v.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let work = |row: &BTreeMap<usize, F>| {
            let mut acc: BTreeMap<usize, F> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.rows[*k] {
                    let t = a.clone() * b;
                    match acc.get_mut(j) {
                        Some(x) => *x = x.clone() + t,
                        None => {
                            acc.insert(*j, t);
                        }
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            acc
        };
        let rows: Vec<_> = if self.dim() >= 16 {
            self.rows.par_iter().map(work).collect()
        } else {
            self.rows.iter().map(work).collect()
        };
        Op { n: self.n, rows }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Apply to a vector given as a coefficient map.
    pub fn apply(&self, v: &BTreeMap<usize, F>) -> BTreeMap<usize, F> {
        let mut out = BTreeMap::new();
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = F::zero();
            for (c, a) in row {
                if let Some(x) = v.get(c) {
                    acc = acc + a.clone() * x;
                }
            }
            if !acc.is_zero() {
                out.insert(r, acc);
            }
        }
        out
    }

    /// First entry where `self` and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize, F, F)> {
        for r in 0..self.dim() {
            if self.rows[r] != other.rows[r] {
                let cols: BTreeSet<usize> =
                    self.rows[r].keys().chain(other.rows[r].keys()).copied().collect();
                for c in cols {
                    let (a, b) = (self.get(r, c), other.get(r, c));
                    if a != b {
                        return Some((r, c, a, b));
                    }
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == *v)
    }

    /// Dense row-major copy restricted to the given row and column index lists.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<F>> {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| self.get(r, c)).collect())
            .collect()
    }

    pub fn from_block(n: usize, idx: &[usize], m: &[Vec<F>]) -> Self {
        let mut op = Self::zero(n);
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                op.set(r, c, m[i][j].clone());
            }
        }
        op
    }
}

/// Dense matrix product.
pub fn dense_mul<F: Field>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.par_iter()
        .map(|row| {
            let mut out = vec![F::zero(); cols];
            for k in 0..inner {
                if row[k].is_zero() {
                    continue;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    if !b[k][j].is_zero() {
                        *o = o.clone() + row[k].clone() * &b[k][j];
                    }
                }
            }
            out
        })
        .collect()
}

pub fn dense_identity<F: Field>(d: usize) -> Vec<Vec<F>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { F::one() } else { F::zero() }).collect())
        .collect()
}

/// `m + s·id`.
pub fn dense_shift<F: Field>(m: &[Vec<F>], s: &F) -> Vec<Vec<F>> {
    let mut out = m.to_vec();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = row[i].clone() + s;
    }
    out
}

pub fn dense_is_zero<F: Field>(m: &[Vec<F>]) -> bool {
    m.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Rank by fraction-free (Bareiss) elimination.
pub fn rank<F: Field>(m: &[Vec<F>]) -> usize {
    let mut a: Vec<Vec<F>> = m.to_vec();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = F::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        let (top, rest) = a.split_at_mut(r + 1);
        let prow = &top[r];
        rest.par_iter_mut().for_each(|row| {
            let f = row[c].clone();
            for j in c + 1..cols {
                let v = piv.clone() * &row[j] - f.clone() * &prow[j];
                row[j] = v / &prev;
            }
            row[c] = F::zero();
        });
        prev = piv;
        r += 1;
    }
    r
}

/// Gaussian integer `re + i·im`.
#[derive(Clone)]
struct GInt(BigInt, BigInt);

impl GInt {
    fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }

    fn mul(&self, o: &GInt) -> GInt {
        if self.1.is_zero() && o.1.is_zero() {
            return GInt(&self.0 * &o.0, BigInt::zero());
        }
        GInt(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }

    fn sub(&self, o: &GInt) -> GInt {
        GInt(&self.0 - &o.0, &self.1 - &o.1)
    }

    /// `self / d` when the quotient is known to be integral.
    fn div_exact(&self, d: &GInt) -> GInt {
        if d.1.is_zero() {
            return GInt(&self.0 / &d.0, &self.1 / &d.0);
        }
        let n = &d.0 * &d.0 + &d.1 * &d.1;
        let p = self.mul(&GInt(d.0.clone(), -d.1.clone()));
        GInt(p.0 / &n, p.1 / &n)
    }
}

fn denominators_lcm<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.re.denom()).lcm(x.im.denom()))
}

/// `l·x` for `l` a multiple of both denominators of `x`.
fn scaled(x: &Scalar, l: &BigInt) -> GInt {
    GInt(x.re.numer() * (l / x.re.denom()), x.im.numer() * (l / x.im.denom()))
}

/// Rank over `Q(i)`: rows are cleared of denominators, then Bareiss runs on
/// Gaussian integers where every division is exact.
pub fn rank_scalar(m: &[Vec<Scalar>]) -> usize {
    let mut a: Vec<Vec<GInt>> = m
        .iter()
        .map(|row| {
            let l = denominators_lcm(row);
            row.iter().map(|x| scaled(x, &l)).collect()
        })
        .collect();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = GInt(BigInt::one(), BigInt::zero());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        let (top, rest) = a.split_at_mut(r + 1);
        let prow = &top[r];
        rest.par_iter_mut().for_each(|row| {
            let f = row[c].clone();
            for j in c + 1..cols {
                row[j] = piv.mul(&row[j]).sub(&f.mul(&prow[j])).div_exact(&prev);
            }
            row[c] = GInt(BigInt::zero(), BigInt::zero());
        });
        prev = piv;
        r += 1;
    }
    r
}

/// Whether `Π_j (m − λ_j) = 0` over `Q(i)`, checked column by column in integers.
pub fn annihilated_by(m: &[Vec<Scalar>], vals: &[Scalar]) -> bool {
    let d = m.len();
    let den = denominators_lcm(m.iter().flatten());
    let mi: Vec<Vec<GInt>> = m.iter().map(|r| r.iter().map(|x| scaled(x, &den)).collect()).collect();
    // factor j is c_j (den·m − den·λ_j) with c_j clearing den·λ_j
    let shifts: Vec<(BigInt, GInt)> = vals
        .iter()
        .map(|v| {
            let dv = v.clone() * &Scalar::from_rational(Rational::from_integer(den.clone()));
            let c = denominators_lcm([&dv]);
            let s = scaled(&dv, &c);
            (c, s)
        })
        .collect();
    (0..d).into_par_iter().all(|i| {
        let mut v: Vec<GInt> = (0..d).map(|j| GInt(BigInt::from((i == j) as u8), BigInt::zero())).collect();
        for (c, s) in &shifts {
            if v.iter().all(GInt::is_zero) {
                return true;
            }
            let cg = GInt(c.clone(), BigInt::zero());
            v = mi
                .iter()
                .zip(&v)
                .map(|(row, vi)| {
                    let mv = row.iter().zip(&v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).fold(GInt(BigInt::zero(), BigInt::zero()), |acc, (a, b)| {
                        let p = a.mul(b);
                        GInt(acc.0 + p.0, acc.1 + p.1)
                    });
                    cg.mul(&mv).sub(&s.mul(vi))
                })
                .collect();
        }
        v.iter().all(GInt::is_zero)
    })
}

/// Basis of `{x : A x = 0}` for sparse rows `A` with `ncols` unknowns.
///
/// Pivots are picked greedily by row and column sparsity, which keeps fill-in
/// low on the Kronecker-structured systems of the intertwiner solver.
pub fn nullspace<F: Field>(rows: Vec<BTreeMap<usize, F>>, ncols: usize) -> Vec<Vec<F>> {
    let mut active: BTreeMap<usize, BTreeMap<usize, F>> = rows
        .into_iter()
        .filter(|r| !r.is_empty())
        .enumerate()
        .collect();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncols];
    for (id, r) in &active {
        for c in r.keys() {
            col_rows[*c].insert(*id);
        }
    }
    let mut pivots: Vec<(usize, BTreeMap<usize, F>)> = Vec::new();
    while !active.is_empty() {
        let (&pid, _) = active
            .iter()
            .min_by_key(|(id, r)| (r.len(), **id))
            .unwrap();
        let prow = active.remove(&pid).unwrap();
        let pc = *prow
            .keys()
            .min_by_key(|c| (col_rows[**c].len(), **c))
            .unwrap();
        for c in prow.keys() {
            col_rows[*c].remove(&pid);
        }
        let inv = prow[&pc].inv().unwrap();
        let prow: BTreeMap<usize, F> = prow.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        let targets: Vec<usize> = col_rows[pc].iter().copied().collect();
        let updates: Vec<(usize, BTreeMap<usize, F>)> = targets
            .par_iter()
            .map(|&rid| {
                let mut row = active[&rid].clone();
                let f = row[&pc].clone();
                for (c, v) in &prow {
                    let nv = row.get(c).cloned().unwrap_or_else(F::zero) - f.clone() * v;
                    if nv.is_zero() {
                        row.remove(c);
                    } else {
                        row.insert(*c, nv);
                    }
                }
                (rid, row)
            })
            .collect();
        for (rid, row) in updates {
            for c in active[&rid].keys() {
                col_rows[*c].remove(&rid);
            }
            if row.is_empty() {
                active.remove(&rid);
            } else {
                for c in row.keys() {
                    col_rows[*c].insert(rid);
                }
                active.insert(rid, row);
            }
        }
        pivots.push((pc, prow));
    }
    let pivot_cols: BTreeSet<usize> = pivots.iter().map(|(c, _)| *c).collect();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    free.par_iter()
        .map(|&f| {
            let mut x = vec![F::zero(); ncols];
            x[f] = F::one();
            for (pc, prow) in pivots.iter().rev() {
                let mut acc = F::zero();
                for (c, v) in prow {
                    if c != pc && !x[*c].is_zero() {
                        acc = acc - v.clone() * &x[*c];
                    }
                }
                x[*pc] = acc;
            }
            x
        })
        .collect()
}
