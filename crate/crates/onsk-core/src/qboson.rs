//! The q-boson algebra on the Fock space `F_q`.
//!
//! `a⁺|m⟩ = |m+1⟩`, `a⁻|m⟩ = (1−q^{2m})|m−1⟩`, `k|m⟩ = q^m|m⟩`. Normal forms are
//! kept canonical: every stored term `(a⁺)^i k^m (a⁻)^j` has `i = 0` or `j = 0`,
//! which makes equality of operators equality of maps.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{rat, Field, Params, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    Aplus,
    Aminus,
    Kpow(u32),
    /// `x^h`, with `h|m⟩ = m|m⟩`.
    Zh(Scalar),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockWord {
    pub prefactor: Scalar,
    pub letters: Vec<Letter>,
}

impl FockWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        FockWord { prefactor: Scalar::one(), letters }
    }

    pub fn scaled(prefactor: Scalar, letters: Vec<Letter>) -> Self {
        FockWord { prefactor, letters }
    }
}

/// `zh^h · Σ c_{i,m,j} (a⁺)^i k^m (a⁻)^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub zh: Scalar,
    terms: BTreeMap<(u32, u32, u32), Scalar>,
}

fn bump(map: &mut BTreeMap<(u32, u32, u32), Scalar>, key: (u32, u32, u32), c: Scalar) {
    if c.is_zero() {
        return;
    }
    let v = match map.remove(&key) {
        Some(old) => old + c,
        None => c,
    };
    if !v.is_zero() {
        map.insert(key, v);
    }
}

impl NormalForm {
    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }

    pub fn scalar(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        bump(&mut terms, (0, 0, 0), c);
        NormalForm { zh: Scalar::one(), terms }
    }

    /// Raw terms; callers may pass non-canonical keys (e.g. balanced `i = j > 0`).
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32, u32), Scalar)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            bump(&mut map, k, c);
        }
        NormalForm { zh: Scalar::one(), terms: map }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32, u32), Scalar> {
        &self.terms
    }

    pub fn coeff(&self, i: u32, m: u32, j: u32) -> Scalar {
        self.terms.get(&(i, m, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = NormalForm { zh: self.zh.clone(), terms: BTreeMap::new() };
        for (k, v) in &self.terms {
            bump(&mut out.terms, *k, v.clone() * c);
        }
        out
    }

    /// Sum of two forms with the same `z^h` marker.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.zh, other.zh, "adding forms with different z^h markers");
        let mut out = self.clone();
        for (k, v) in &other.terms {
            bump(&mut out.terms, *k, v.clone());
        }
        out
    }

    /// Right-multiply by one letter and re-normalize.
    pub fn mul_letter(&self, letter: &Letter, q: &Scalar) -> Self {
        let mut out = BTreeMap::new();
        let mut zh = self.zh.clone();
        for (&(i, m, j), c) in &self.terms {
            match letter {
                Letter::Kpow(e) => {
                    bump(&mut out, (i, m + e, j), c.clone() * q.powi((j * e) as i64));
                }
                Letter::Aminus => {
                    if i >= 1 && j == 0 {
                        // a⁺ k^m a⁻ = q^{−m} k^m (1 − k²)
                        let f = c.clone() * q.powi(-(m as i64));
                        bump(&mut out, (i - 1, m, 0), f.clone());
                        bump(&mut out, (i - 1, m + 2, 0), -f);
                    } else {
                        bump(&mut out, (i, m, j + 1), c.clone());
                    }
                }
                Letter::Aplus => {
                    if j == 0 {
                        bump(&mut out, (i + 1, m, 0), c.clone() * q.powi(m as i64));
                    } else {
                        // (a⁻)^j a⁺ = (a⁻)^{j−1} − q^{2j} k² (a⁻)^{j−1}
                        bump(&mut out, (i, m, j - 1), c.clone());
                        bump(&mut out, (i, m + 2, j - 1), -(c.clone() * q.powi(2 * j as i64)));
                    }
                }
                Letter::Zh(x) => {
                    bump(&mut out, (i, m, j), c.clone() * x.powi(j as i64 - i as i64));
                }
            }
        }
        if let Letter::Zh(x) = letter {
            zh = zh * x;
        }
        NormalForm { zh, terms: out }
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &Self, q: &Scalar) -> Self {
        let base = if other.zh.is_one() {
            self.clone()
        } else {
            self.mul_letter(&Letter::Zh(other.zh.clone()), q)
        };
        let mut acc: Option<NormalForm> = None;
        for (&(i, m, j), c) in &other.terms {
            let mut t = base.scale(c);
            for _ in 0..i {
                t = t.mul_letter(&Letter::Aplus, q);
            }
            if m > 0 {
                t = t.mul_letter(&Letter::Kpow(m), q);
            }
            for _ in 0..j {
                t = t.mul_letter(&Letter::Aminus, q);
            }
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
        }
        acc.unwrap_or(NormalForm { zh: base.zh, terms: BTreeMap::new() })
    }
}

impl fmt::Display for NormalForm {
    /// Sorted `(i,m,j): scalar` lines, preceded by the `z^h` marker when nontrivial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.zh.is_one() {
            writeln!(f, "zh: {}", self.zh)?;
        }
        for ((i, m, j), c) in &self.terms {
            writeln!(f, "({i},{m},{j}): {c}")?;
        }
        Ok(())
    }
}

pub fn normal_order(w: &FockWord, q: &Scalar) -> NormalForm {
    let mut nf = NormalForm::scalar(w.prefactor.clone());
    for l in &w.letters {
        nf = nf.mul_letter(l, q);
    }
    nf
}

/// `Π_{l=1..j} (1 − q^{2l} x) = Σ_d c_d x^d`.
fn balanced_poly(j: u32, q: &Scalar) -> Vec<Scalar> {
    let mut c = vec![Scalar::one()];
    for l in 1..=j {
        let f = q.powi(2 * l as i64);
        let mut next = vec![Scalar::zero(); c.len() + 1];
        for (d, v) in c.iter().enumerate() {
            next[d] = next[d].clone() + v;
            next[d + 1] = next[d + 1].clone() - v.clone() * &f;
        }
        c = next;
    }
    c
}

/// `1 / (1 − z q^e)`, or a pole error.
fn geometric(z: &Scalar, q: &Scalar, e: i64) -> Result<Scalar> {
    let d = Scalar::one() - z.clone() * q.powi(e);
    d.inv().ok_or(Error::Pole { exponent: e, context: String::new() })
}

/// `Tr(z^h · nf)` on `F_q`.
pub fn trace_z(nf: &NormalForm, z: &Scalar, params: &Params) -> Result<Scalar> {
    let q = &params.q;
    let z = z.clone() * &nf.zh;
    let mut acc = Scalar::zero();
    for (&(i, m, j), c) in &nf.terms {
        if i != j {
            continue;
        }
        let mut s = Scalar::zero();
        for (d, cd) in balanced_poly(j, q).into_iter().enumerate() {
            if !cd.is_zero() {
                s = s + cd * geometric(&z, q, m as i64 + 2 * d as i64)?;
            }
        }
        acc = acc + c.clone() * z.powi(j as i64) * s;
    }
    Ok(acc)
}

/// `k ∈ {1, 2}` selecting `η_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryIndex(u8);

impl BoundaryIndex {
    pub fn new(k: u8) -> Result<Self> {
        match k {
            1 | 2 => Ok(BoundaryIndex(k)),
            _ => Err(Error::Range(format!("boundary index {k}"))),
        }
    }
    pub fn get(self) -> u8 {
        self.0
    }
}

/// `(a; b)_s = Π_{l<s} (1 − a b^l)`.
pub fn qpoch(a: &Scalar, b: &Scalar, s: u32) -> Scalar {
    let mut acc = Scalar::one();
    let mut x = a.clone();
    for _ in 0..s {
        acc = acc * (Scalar::one() - &x);
        x = x * b;
    }
    acc
}

/// Coefficient of `|n⟩` in `|η_k⟩` over base `q` (use `q²` for `χ_k`).
pub fn eta_component(k: u8, n: u32, q: &Scalar) -> Scalar {
    let k = k as u32;
    if !n.is_multiple_of(k) {
        return Scalar::zero();
    }
    let b = q.powi((k * k) as i64);
    qpoch(&b, &b, n / k).inv().expect("vanishing boundary-vector coefficient")
}

/// `eta_component(k, n, q)` for `n < len`, built incrementally.
pub fn eta_components(k: u8, len: usize, q: &Scalar) -> Vec<Scalar> {
    let b = q.powi((k as i64) * (k as i64));
    let mut out = vec![Scalar::zero(); len];
    let (mut poch, mut x) = (Scalar::one(), b.clone());
    for n in (0..len).step_by(k as usize) {
        out[n] = poch.inv().expect("vanishing boundary-vector coefficient");
        poch = poch * (Scalar::one() - &x);
        x = x * &b;
    }
    out
}

pub fn eta_vector_component(k: BoundaryIndex, n: u32, params: &Params) -> Scalar {
    eta_component(k.get(), n, &params.q)
}

/// Formal `(sign · z^{zpow} q^{qpow}; q^d)_∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PochSymbol {
    pub sign: i8,
    pub zpow: i64,
    pub qpow: i64,
    pub d: i64,
}

/// Product of a finite prefactor and infinite Pochhammer symbols with integer exponents.
#[derive(Clone, Debug)]
pub struct PochLedger {
    pub prefactor: Scalar,
    pub factors: BTreeMap<PochSymbol, i64>,
}

impl PochLedger {
    pub fn new(prefactor: Scalar) -> Self {
        PochLedger { prefactor, factors: BTreeMap::new() }
    }

    pub fn push(&mut self, sym: PochSymbol, e: i64) {
        let v = self.factors.entry(sym).or_insert(0);
        *v += e;
        if *v == 0 {
            self.factors.remove(&sym);
        }
    }

    /// Shift each symbol to `qpow ∈ [0, d)`, moving finite products into the prefactor,
    /// then demand that nothing infinite survives.
    pub fn reduce(mut self, z: &Scalar, q: &Scalar) -> Result<Scalar> {
        let factors = std::mem::take(&mut self.factors);
        for (sym, e) in factors {
            let r = sym.qpow.rem_euclid(sym.d);
            let s = (sym.qpow - r) / sym.d;
            let canon = PochSymbol { qpow: r, ..sym };
            let a = |qp: i64| sci_sign(sym.sign) * z.powi(sym.zpow) * q.powi(qp);
            let b = q.powi(sym.d);
            // (a q^{ds}; q^d)_∞ = (a; q^d)_∞ / (a; q^d)_s, and the mirror for s < 0
            let fin = if s >= 0 {
                qpoch(&a(r), &b, s as u32)
                    .inv()
                    .ok_or_else(|| pole(sym, r))?
            } else {
                qpoch(&a(sym.qpow), &b, (-s) as u32)
            };
            if fin.is_zero() {
                return Err(pole(sym, sym.qpow));
            }
            self.prefactor = self.prefactor * fin.powi(e);
            self.push(canon, e);
        }
        if self.factors.is_empty() {
            Ok(self.prefactor)
        } else {
            Err(Error::LedgerResidue(format!("{:?}", self.factors)))
        }
    }
}

fn pole(sym: PochSymbol, e: i64) -> Error {
    Error::Pole { exponent: e, context: format!(" in {sym:?}") }
}

fn sci_sign(s: i8) -> Scalar {
    Scalar::from_i64(s as i64)
}

/// `(q;q)_j / ((q;q)_i (q;q)_{j−i})`.
pub fn qbinom(j: u32, i: u32, q: &Scalar) -> Scalar {
    qpoch(q, q, j) / (qpoch(q, q, i) * qpoch(q, q, j - i))
}

/// Symbols of `κ_{k,k'}(z) = (z^M; q^{kk'})_∞ / ((−q)^m z^M; q^{kk'})_∞`.
fn kappa_symbols(k: u8, kp: u8) -> [(PochSymbol, i64); 2] {
    let mx = k.max(kp) as i64;
    let mn = k.min(kp) as i64;
    let d = (k * kp) as i64;
    let sign = if mn % 2 == 1 { -1 } else { 1 };
    [
        (PochSymbol { sign: 1, zpow: mx, qpow: 0, d }, 1),
        (PochSymbol { sign, zpow: mx, qpow: mn, d }, -1),
    ]
}

/// Raw `⟨η_k| z^h (a⁺)^i k^m |η_{k'}⟩` as a sum of ledgers, times `κ^e`.
fn raw_ledgers(k: u8, kp: u8, i: u32, m: u32, z: &Scalar, q: &Scalar, e: i64) -> Vec<PochLedger> {
    let (i64i, i64m) = (i as i64, m as i64);
    let mut out = Vec::new();
    match (k, kp) {
        (1, 1) => {
            let mut l = PochLedger::new(z.powi(i64i) * qpoch(&-q.clone(), q, i));
            l.push(PochSymbol { sign: -1, zpow: 1, qpow: i64i + i64m + 1, d: 1 }, 1);
            l.push(PochSymbol { sign: 1, zpow: 1, qpow: i64m, d: 1 }, -1);
            out.push(l);
        }
        (1, 2) | (2, 1) => {
            for s in 0..=i {
                let s64 = s as i64;
                let pre = if k == 1 {
                    z.powi(i64i) * q.powi(s64 * (s64 + 1) / 2)
                } else {
                    // transposed: ⟨η_1| k^m (a⁻)^i z^h |η_2⟩ = q^{−mi} ⟨η_1|(a⁻)^i k^m z^h|η_2⟩
                    let sg = if s % 2 == 1 { -Scalar::one() } else { Scalar::one() };
                    sg * q.powi(s64 * (s64 + 1) / 2 - s64 * i64i - i64m * i64i)
                };
                let mut l = PochLedger::new(pre * qbinom(i, s, q));
                l.push(PochSymbol { sign: -1, zpow: 2, qpow: 2 * s64 + 2 * i64m + 1, d: 2 }, 1);
                l.push(PochSymbol { sign: 1, zpow: 2, qpow: 2 * s64 + 2 * i64m, d: 2 }, -1);
                out.push(l);
            }
        }
        _ => {
            if i.is_multiple_of(2) {
                let q2 = q.clone() * q;
                let pre = z.powi(i64i) * qpoch(&q2, &q2.powi(2), i / 2);
                let mut l = PochLedger::new(pre);
                l.push(PochSymbol { sign: 1, zpow: 2, qpow: 2 * i64i + 2 * i64m + 2, d: 4 }, 1);
                l.push(PochSymbol { sign: 1, zpow: 2, qpow: 2 * i64m, d: 4 }, -1);
                out.push(l);
            }
        }
    }
    for l in &mut out {
        for (sym, x) in kappa_symbols(k, kp) {
            l.push(sym, x * e);
        }
    }
    out
}

/// Rewrite every `a⁻` against the ket, leaving terms `(a⁺)^i k^m |η_{k'}⟩`.
fn eliminate_annihilators(nf: &NormalForm, kp: u8, q: &Scalar) -> BTreeMap<(u32, u32), Scalar> {
    let mut done = BTreeMap::new();
    let mut todo: Vec<((u32, u32, u32), Scalar)> =
        nf.terms.iter().map(|(k, v)| (*k, v.clone())).collect();
    while let Some(((i, m, j), c)) = todo.pop() {
        if j == 0 {
            let e = done.entry((i, m)).or_insert_with(Scalar::zero);
            *e = e.clone() + c;
            continue;
        }
        let head = NormalForm::from_terms([((i, m, j - 1), c)]);
        // a⁻|η_1⟩ = (1 + qk)|η_1⟩ and a⁻|η_2⟩ = a⁺|η_2⟩
        let tail = if kp == 1 {
            NormalForm::from_terms([((0, 0, 0), Scalar::one()), ((0, 1, 0), q.clone())])
        } else {
            NormalForm::from_terms([((1, 0, 0), Scalar::one())])
        };
        for (k, v) in head.mul(&tail, q).terms {
            todo.push((k, v));
        }
    }
    done.retain(|_, v| !v.is_zero());
    done
}

/// Normalized `κ^{±1} ⟨η_k| z^h · nf |η_{k'}⟩`; `inverse_normalization` selects `κ^{−1}`.
pub fn boundary_contract_with(
    k: BoundaryIndex,
    kp: BoundaryIndex,
    nf: &NormalForm,
    z: &Scalar,
    params: &Params,
    inverse_normalization: bool,
) -> Result<Scalar> {
    let q = &params.q;
    let z = z.clone() * &nf.zh;
    let e = if inverse_normalization { -1 } else { 1 };
    let mut acc = Scalar::zero();
    for ((i, m), c) in eliminate_annihilators(nf, kp.get(), q) {
        for l in raw_ledgers(k.get(), kp.get(), i, m, &z, q, e) {
            acc = acc + c.clone() * l.reduce(&z, q)?;
        }
    }
    Ok(acc)
}

pub fn boundary_contract(
    k: BoundaryIndex,
    kp: BoundaryIndex,
    nf: &NormalForm,
    z: &Scalar,
    params: &Params,
) -> Result<Scalar> {
    boundary_contract_with(k, kp, nf, z, params, false)
}

/// Something the oracle can apply to a truncated Fock vector.
pub enum FockAction<'a> {
    Word(&'a FockWord),
    Form(&'a NormalForm),
}

#[derive(Clone, Debug)]
pub struct OracleValue {
    pub value: Scalar,
    pub bound: Rational,
}

fn apply_letter(l: &Letter, v: &[Scalar], q: &Scalar) -> Vec<Scalar> {
    let n = v.len();
    let mut out = vec![Scalar::zero(); n];
    match l {
        Letter::Aplus => out[1..].clone_from_slice(&v[..n - 1]),
        Letter::Aminus => {
            for m in 1..n {
                out[m - 1] = (Scalar::one() - q.powi(2 * m as i64)) * &v[m];
            }
        }
        Letter::Kpow(e) => {
            let qe = q.powi(*e as i64);
            let mut f = Scalar::one();
            for m in 0..n {
                out[m] = v[m].clone() * &f;
                f = f * &qe;
            }
        }
        Letter::Zh(x) => {
            let mut f = Scalar::one();
            for m in 0..n {
                out[m] = v[m].clone() * &f;
                f = f * x;
            }
        }
    }
    out
}

/// Rational `r ≥ √x`.
fn sqrt_upper(x: &Rational) -> Rational {
    use num_traits::ToPrimitive;
    let f = x.to_f64().unwrap_or(f64::MAX).sqrt();
    let mut r = Rational::from_float(f * (1.0 + 1e-9) + 1e-300).unwrap_or_else(|| x.clone() + Rational::one());
    while &(r.clone() * &r) < x {
        r *= rat(11, 10);
    }
    r
}

/// `1/(x;x)_∞ ≤ (1−x)/(1−2x)` for `0 ≤ x < 1/2`.
fn inv_poch_bound(x: &Rational) -> Option<Rational> {
    let two = rat(2, 1);
    if x.clone() * &two >= Rational::one() {
        return None;
    }
    Some((Rational::one() - x) / (Rational::one() - two * x))
}

/// Truncated-sum evaluation of `⟨η_k|z^h X|η_{k'}⟩ / ⟨η_k|z^h|η_{k'}⟩` with a certified tail bound.
pub fn boundary_contract_oracle(
    k: BoundaryIndex,
    kp: BoundaryIndex,
    action: FockAction<'_>,
    z: &Scalar,
    params: &Params,
    cutoff: usize,
    tol: &Rational,
) -> Result<OracleValue> {
    boundary_contract_oracle_with(k, kp, action, z, params, cutoff, tol, false)
}

/// As [`boundary_contract_oracle`]; `inverse_normalization` multiplies by
/// `⟨η_k|z^h|η_{k'}⟩` instead of dividing, matching [`boundary_contract_with`].
#[allow(clippy::too_many_arguments)]
pub fn boundary_contract_oracle_with(
    k: BoundaryIndex,
    kp: BoundaryIndex,
    action: FockAction<'_>,
    z: &Scalar,
    params: &Params,
    cutoff: usize,
    tol: &Rational,
    inverse_normalization: bool,
) -> Result<OracleValue> {
    let q = &params.q;
    let (k, kp) = (k.get(), kp.get());
    if cutoff < 1 {
        return Err(Error::Range("cutoff must be positive".into()));
    }
    // the action as a list of letter words plus the operator-size bound
    let qabs = q.abs_upper();
    let a_minus_bound = Rational::one() + qabs.clone() * &qabs;
    let mut z = z.clone();
    let words: Vec<(Scalar, Vec<Letter>)> = match action {
        FockAction::Word(w) => {
            if w.letters.iter().any(|l| matches!(l, Letter::Zh(_))) {
                return Err(Error::DegenerateInput("oracle words must not carry z^h letters".into()));
            }
            vec![(w.prefactor.clone(), w.letters.clone())]
        }
        FockAction::Form(nf) => {
            z = z * &nf.zh;
            nf.terms
                .iter()
                .map(|(&(i, m, j), c)| {
                    let mut ls = vec![Letter::Aplus; i as usize];
                    if m > 0 {
                        ls.push(Letter::Kpow(m));
                    }
                    ls.extend(std::iter::repeat_n(Letter::Aminus, j as usize));
                    (c.clone(), ls)
                })
                .collect()
        }
    };
    let zabs = sqrt_upper(&z.norm_sqr());
    if qabs >= Rational::one() || zabs >= Rational::one() {
        return Err(Error::Range("oracle needs |q| < 1 and |z| < 1".into()));
    }
    let mut op_bound = Rational::zero();
    let mut margin = 0;
    for (c, ls) in &words {
        let na = ls.iter().filter(|l| matches!(l, Letter::Aminus)).count();
        margin = margin.max(ls.len());
        op_bound += c.abs_upper() * num_traits::pow(a_minus_bound.clone(), na);
    }
    let len = cutoff + margin + 1;
    let ket = eta_components(kp, len, q);
    let mut xv = vec![Scalar::zero(); len];
    for (c, ls) in &words {
        let mut v = ket.clone();
        for l in ls.iter().rev() {
            v = apply_letter(l, &v, q);
        }
        for (a, b) in xv.iter_mut().zip(v) {
            *a = a.clone() + b * c;
        }
    }
    let q2 = q.clone() * q;
    // bra weights ⟨η_k|n⟩ z^n (q²;q²)_n
    let bra = eta_components(k, cutoff + 1, q);
    let mut weights = Vec::with_capacity(cutoff + 1);
    let (mut zn, mut poch, mut x) = (Scalar::one(), Scalar::one(), q2.clone());
    for b in bra {
        weights.push(b * &zn * &poch);
        zn = zn * &z;
        poch = poch * (Scalar::one() - &x);
        x = x * &q2;
    }
    let pair = |v: &[Scalar]| {
        weights.iter().zip(v).filter(|(w, _)| !w.is_zero()).fold(Scalar::zero(), |acc, (w, x)| acc + w.clone() * x)
    };
    let s_n = pair(&xv);
    let d_n = pair(&ket);
    let bk = |kk: u8| inv_poch_bound(&num_traits::pow(qabs.clone(), (kk * kk) as usize));
    let (Some(bbra), Some(bket), Some(binner)) =
        (bk(k), bk(kp), inv_poch_bound(&(qabs.clone() * &qabs)))
    else {
        return Err(Error::Range("|q| too large for the tail bound".into()));
    };
    let geo = num_traits::pow(zabs.clone(), cutoff + 1) / (Rational::one() - &zabs);
    let base = bbra * binner * bket * geo;
    let e_s = base.clone() * &op_bound;
    let e_d = base;
    if inverse_normalization {
        // |SD − S_N D_N| ≤ e_s (|D_N| + e_d) + |S_N| e_d
        let bound = e_s * (d_n.abs_upper() + &e_d) + s_n.abs_upper() * &e_d;
        if &bound > tol {
            return Err(Error::TailBound { bound: bound.to_string() });
        }
        return Ok(OracleValue { value: s_n * d_n, bound });
    }
    let dl = d_n.abs_lower();
    if dl <= e_d {
        return Err(Error::TailBound { bound: "denominator not separated from 0".into() });
    }
    let bound = (e_s * &dl + s_n.abs_upper() * &e_d) / (dl.clone() * (dl - e_d));
    if &bound > tol {
        return Err(Error::TailBound { bound: bound.to_string() });
    }
    let value = s_n / d_n;
    Ok(OracleValue { value, bound })
}

/// `|x − y| ≤ tol` with a rational upper bound on the modulus.
pub fn within(x: &Scalar, y: &Scalar, tol: &Rational) -> bool {
    let d = x.clone() - y;
    d.re.abs() + d.im.abs() <= *tol
}
