//! Matrix-product K matrices, their gauge variants, and an independent solver
//! for the boundary intertwining relations.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Params, Scalar};
use crate::linalg::nullspace;
use crate::onsager::{combine, hamiltonian, onsager_generators, CoideaSpec};
use crate::qboson::{boundary_contract_with, qpoch, trace_z, BoundaryIndex, Letter, NormalForm};
use crate::report::Report;
use crate::spinrep::{global_sigma_x, popcount};
use crate::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KKind {
    Tr,
    Boundary(u8, u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    Plain,
    Tilde,
    Vee,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMatrix {
    pub op: Operator,
    pub kind: KKind,
    pub gauge: Gauge,
    pub z: Scalar,
}

impl KMatrix {
    pub fn n(&self) -> usize {
        self.op.n
    }
}

/// Local operator `K^β_α` as a scalar times at most one letter.
fn local(beta: usize, alpha: usize, symmetric: bool, params: &Params) -> (Scalar, Option<Letter>) {
    let iqh = Scalar::i() * &params.qhalf;
    match (beta, alpha) {
        (0, 0) => (Scalar::one(), Some(Letter::Aplus)),
        (0, 1) if symmetric => (iqh, Some(Letter::Kpow(1))),
        (0, 1) => (-params.q.clone(), Some(Letter::Kpow(1))),
        (1, 0) if symmetric => (iqh, Some(Letter::Kpow(1))),
        (1, 0) => (Scalar::one(), Some(Letter::Kpow(1))),
        _ => (Scalar::one(), Some(Letter::Aminus)),
    }
}

fn push_site(nf: &NormalForm, beta: usize, alpha: usize, symmetric: bool, params: &Params) -> NormalForm {
    let (c, l) = local(beta, alpha, symmetric, params);
    let nf = match l {
        Some(l) => nf.mul_letter(&l, &params.q),
        None => nf.clone(),
    };
    nf.scale(&c)
}

/// Normal form of `K^{β_1}_{α_1} ⋯ K^{β_n}_{α_n}`, optionally with `z_i^h` before each site.
pub fn entry_word(n: usize, beta: usize, alpha: usize, twists: Option<&[Scalar]>, symmetric: bool, params: &Params) -> NormalForm {
    let mut nf = NormalForm::one();
    for s in 0..n {
        if let Some(zs) = twists {
            nf = nf.mul_letter(&Letter::Zh(zs[s].clone()), &params.q);
        }
        nf = push_site(&nf, (beta >> s) & 1, (alpha >> s) & 1, symmetric, params);
    }
    nf
}

type Eval<'a> = dyn Fn(usize, usize, &NormalForm) -> Result<Scalar> + Sync + 'a;

/// Evaluate every `(β, α)` allowed by `keep`, sharing normal-form prefixes.
fn build_entries(
    n: usize,
    twists: Option<&[Scalar]>,
    symmetric: bool,
    keep: &(dyn Fn(usize, usize) -> bool + Sync),
    eval: &Eval<'_>,
    params: &Params,
) -> Result<Operator> {
    fn dfs(
        site: usize,
        n: usize,
        nf: NormalForm,
        beta: usize,
        alpha: usize,
        ctx: (&Option<&[Scalar]>, bool, &Params),
        keep: &(dyn Fn(usize, usize) -> bool + Sync),
        eval: &Eval<'_>,
        out: &mut Vec<(usize, usize, Scalar)>,
    ) -> Result<()> {
        if site == n {
            if keep(beta, alpha) {
                let v = eval(beta, alpha, &nf)?;
                if !v.is_zero() {
                    out.push((beta, alpha, v));
                }
            }
            return Ok(());
        }
        let (twists, symmetric, params) = ctx;
        let base = match twists {
            Some(zs) => nf.mul_letter(&Letter::Zh(zs[site].clone()), &params.q),
            None => nf,
        };
        for b in 0..2 {
            for a in 0..2 {
                let next = push_site(&base, b, a, symmetric, params);
                if next.is_zero() {
                    continue;
                }
                dfs(site + 1, n, next, beta | (b << site), alpha | (a << site), ctx, keep, eval, out)?;
            }
        }
        Ok(())
    }

    // Fan out over the first two sites.
    let depth = n.min(2);
    let prefixes: Vec<(usize, usize)> = (0..1usize << depth).flat_map(|b| (0..1usize << depth).map(move |a| (b, a))).collect();
    let parts: Vec<Result<Vec<(usize, usize, Scalar)>>> = prefixes
        .par_iter()
        .map(|&(b, a)| {
            let mut nf = NormalForm::one();
            for s in 0..depth {
                if let Some(zs) = twists {
                    nf = nf.mul_letter(&Letter::Zh(zs[s].clone()), &params.q);
                }
                nf = push_site(&nf, (b >> s) & 1, (a >> s) & 1, symmetric, params);
            }
            let mut out = vec![];
            if !nf.is_zero() {
                dfs(depth, n, nf, b, a, (&twists, symmetric, params), keep, eval, &mut out)?;
            }
            Ok(out)
        })
        .collect();
    let mut op = Operator::zero(n);
    for part in parts {
        for (r, c, v) in part? {
            op.set(r, c, v);
        }
    }
    Ok(op)
}

fn with_entry(e: Error, beta: usize, alpha: usize) -> Error {
    match e {
        Error::Pole { exponent, context } => Error::Pole { exponent, context: format!("{context} at entry (β={beta:b}, α={alpha:b})") },
        other => other,
    }
}

/// `κ_{tr,l}(z) = (−1)^l q^{min(0, 2l−n)} (1 − q^{|n−2l|} z)`.
pub fn kappa_tr(n: usize, l: usize, z: &Scalar, params: &Params) -> Scalar {
    let (n, l) = (n as i64, l as i64);
    let sign = if l % 2 == 0 { Scalar::one() } else { -Scalar::one() };
    sign * params.qpow((2 * l - n).min(0)) * (Scalar::one() - params.qpow((n - 2 * l).abs()) * z)
}

pub fn build_ktr(n: usize, z: &Scalar, params: &Params) -> Result<KMatrix> {
    let eval = |beta: usize, alpha: usize, nf: &NormalForm| -> Result<Scalar> {
        let tr = trace_z(nf, z, params).map_err(|e| with_entry(e, beta, alpha))?;
        Ok(kappa_tr(n, popcount(alpha), z, params) * tr)
    };
    let keep = |beta: usize, alpha: usize| popcount(alpha) + popcount(beta) == n;
    let op = build_entries(n, None, false, &keep, &eval, params)?;
    Ok(KMatrix { op, kind: KKind::Tr, gauge: Gauge::Plain, z: z.clone() })
}

/// Single unnormalized-trace entry `Tr(z^h K^β_α ⋯)` times `κ_{tr,|α|}`, without support pruning.
pub fn ktr_entry(n: usize, beta: usize, alpha: usize, z: &Scalar, params: &Params) -> Result<Scalar> {
    let nf = entry_word(n, beta, alpha, None, false, params);
    Ok(kappa_tr(n, popcount(alpha), z, params) * trace_z(&nf, z, params)?)
}

/// Twisted trace `Tr(z_0^h K z_1^h K ⋯ z_{n−1}^h K)`, scaled so the `0…0 → 1…1` entry equals that of `K_tr`.
pub fn build_ktr_multi(zs: &[Scalar], params: &Params) -> Result<KMatrix> {
    let n = zs.len();
    if let Some(i) = zs.iter().position(|z| z.is_zero()) {
        return Err(Error::ZeroParameter(i));
    }
    let one = Scalar::one();
    let eval = |beta: usize, alpha: usize, nf: &NormalForm| trace_z(nf, &one, params).map_err(|e| with_entry(e, beta, alpha));
    let keep = |beta: usize, alpha: usize| popcount(alpha) + popcount(beta) == n;
    let raw = build_entries(n, Some(zs), false, &keep, &eval, params)?;
    let norm = params.qpow(-(n as i64)) * raw.get((1 << n) - 1, 0).inv().ok_or(Error::ZeroNormalizer)?;
    Ok(KMatrix { op: raw.scale(&norm), kind: KKind::Tr, gauge: Gauge::Plain, z: zs[0].clone() })
}

fn boundary_keep(k: u8, kp: u8, n: usize) -> impl Fn(usize, usize) -> bool + Sync {
    move |beta: usize, alpha: usize| (k, kp) != (2, 2) || (popcount(alpha) + popcount(beta) + n).is_multiple_of(2)
}

fn build_boundary(k: u8, kp: u8, n: usize, z: &Scalar, symmetric: bool, params: &Params) -> Result<Operator> {
    let (bk, bkp) = (BoundaryIndex::new(k)?, BoundaryIndex::new(kp)?);
    let inverse = (k, kp) == (2, 2) && n % 2 == 1;
    let eval = |beta: usize, alpha: usize, nf: &NormalForm| {
        boundary_contract_with(bk, bkp, nf, z, params, inverse).map_err(|e| with_entry(e, beta, alpha))
    };
    build_entries(n, None, symmetric, &boundary_keep(k, kp, n), &eval, params)
}

/// The closed-form `0…0 → 1…1` entry of `K_{k,k'}(z)`.
pub fn reference_entry(k: u8, kp: u8, n: usize, z: &Scalar, params: &Params) -> Scalar {
    let q = &params.q;
    if (k, kp) == (2, 2) {
        let z2 = z.powi(2);
        let q4 = q.powi(4);
        let q2z2 = q.powi(2) * &z2;
        return if n.is_multiple_of(2) {
            qpoch(&z2, &q4, n as u32 / 2) / qpoch(&q2z2, &q4, n as u32 / 2)
        } else {
            qpoch(&q2z2, &q4, (n as u32 - 1) / 2) / qpoch(&z2, &q4, (n as u32).div_ceil(2))
        };
    }
    let zm = z.powi(k.max(kp) as i64);
    let base = q.powi((k * kp) as i64);
    qpoch(&zm, &base, n as u32) / qpoch(&(-(q.clone() * &zm)), &base, n as u32)
}

pub fn build_kkk(k: u8, kp: u8, n: usize, z: &Scalar, params: &Params) -> Result<KMatrix> {
    let op = build_boundary(k, kp, n, z, false, params)?;
    let got = op.get((1 << n) - 1, 0);
    let want = reference_entry(k, kp, n, z, params);
    if got != want {
        return Err(Error::LedgerResidue(format!("normalization entry {got} differs from {want}")));
    }
    Ok(KMatrix { op, kind: KKind::Boundary(k, kp), gauge: Gauge::Plain, z: z.clone() })
}

/// `K̃_{k,k'}` straight from the symmetrized local operators.
pub fn build_kkk_symmetric(k: u8, kp: u8, n: usize, z: &Scalar, params: &Params) -> Result<KMatrix> {
    let op = build_boundary(k, kp, n, z, true, params)?;
    Ok(KMatrix { op, kind: KKind::Boundary(k, kp), gauge: Gauge::Tilde, z: z.clone() })
}

/// `S_α = (i q^{1/2})^{|α|}`.
fn s_diag(n: usize, params: &Params, inverse: bool) -> Operator {
    let s = Scalar::i() * &params.qhalf;
    let s = if inverse { s.inv().unwrap() } else { s };
    Operator::diagonal(n, |a| s.powi(popcount(a) as i64))
}

pub fn gauge_tilde(km: &KMatrix, params: &Params) -> KMatrix {
    assert_eq!(km.gauge, Gauge::Plain, "tilde gauge applies to the plain matrix");
    let n = km.n();
    let op = s_diag(n, params, false).mul(&km.op).mul(&s_diag(n, params, true));
    KMatrix { op, gauge: Gauge::Tilde, ..km.clone() }
}

/// `σ^x K_tr` or `σ^x K̃_{k,k'}`.
pub fn vee(km: &KMatrix, params: &Params) -> KMatrix {
    let base = match (km.kind, km.gauge) {
        (_, Gauge::Vee) => return km.clone(),
        (KKind::Boundary(..), Gauge::Plain) => gauge_tilde(km, params),
        _ => km.clone(),
    };
    let op = global_sigma_x(km.n()).mul(&base.op);
    KMatrix { op, gauge: Gauge::Vee, ..base }
}

/// The K matrix intertwining the generators of `spec`: `K_tr` or `K̃_{k,k'}`.
pub fn matching_k(spec: &CoideaSpec, z: &Scalar, params: &Params) -> Result<KMatrix> {
    let n = spec.fam.n;
    match spec.ends {
        None => build_ktr(n, z, params),
        Some((k, kp)) => Ok(gauge_tilde(&build_kkk(k, kp, n, z, params)?, params)),
    }
}

/// One block of the intertwiner problem: maps from `dom` into `cod`, pinned at one entry.
#[derive(Clone, Debug)]
pub struct SolveBlock {
    pub dom: Vec<usize>,
    pub cod: Vec<usize>,
    /// `(β, α, value)` in the gauge the solver works in.
    pub pin: (usize, usize, Scalar),
}

/// `K_tr(z)^{1−α}_α` for `α = 1^l 0^{n−l}`: `κ_{tr,l}(z) (−q)^l / (1 − z q^n)`.
pub fn tr_block_reference(n: usize, l: usize, z: &Scalar, params: &Params) -> Scalar {
    let den = Scalar::one() - params.qpow(n as i64) * z;
    kappa_tr(n, l, z, params) * (-params.q.clone()).powi(l as i64) / den
}

/// The blocks on which the intertwining relations have a one-dimensional solution space.
pub fn solver_blocks(spec: &CoideaSpec, params: &Params) -> Vec<SolveBlock> {
    let n = spec.fam.n;
    let full = (1usize << n) - 1;
    let all: Vec<usize> = (0..=full).collect();
    let z = &params.z;
    let Some((k, kp)) = spec.ends else {
        return (0..=n)
            .map(|l| {
                let alpha = (1usize << l) - 1;
                SolveBlock {
                    dom: all.iter().copied().filter(|a| popcount(*a) == l).collect(),
                    cod: all.iter().copied().filter(|a| popcount(*a) == n - l).collect(),
                    pin: (full ^ alpha, alpha, tr_block_reference(n, l, z, params)),
                }
            })
            .collect();
    };
    let s = Scalar::i() * &params.qhalf;
    let tilde = |beta: usize, alpha: usize, v: Scalar| v * s.powi(popcount(beta) as i64 - popcount(alpha) as i64);
    let reference = reference_entry(k, kp, n, z, params);
    let whole = SolveBlock { dom: all.clone(), cod: all.clone(), pin: (full, 0, tilde(full, 0, reference.clone())) };
    if spec.fam.tag != crate::spinrep::FamilyTag::D1 {
        return vec![whole];
    }
    // V_+ and V_- are separate modules; the second display entry pins the odd block.
    let parity = |a: &usize| popcount(*a) % 2;
    let odd_pin = -(params.q.clone() * reference);
    [(0usize, full, 0usize, tilde(full, 0, whole.pin.2.clone() / s.powi(n as i64))), (1, full ^ 1, 1, tilde(full ^ 1, 1, odd_pin))]
        .into_iter()
        .map(|(par, beta, alpha, v)| SolveBlock {
            dom: all.iter().copied().filter(|a| parity(a) == par).collect(),
            cod: all.iter().copied().filter(|a| parity(a) == (par + n) % 2).collect(),
            pin: (beta, alpha, v),
        })
        .collect()
}

/// Rows of `b_i(z^{−1}) X − X b_i(z) = 0` for `X: dom → cod`, unknown `(r, c) ↦ r_pos·|dom| + c_pos`.
fn intertwiner_rows(left: &[Operator], right: &[Operator], block: &SolveBlock) -> Vec<BTreeMap<usize, Scalar>> {
    let nd = block.dom.len();
    let dpos: BTreeMap<usize, usize> = block.dom.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let cpos: BTreeMap<usize, usize> = block.cod.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut rows = vec![];
    for (bl, br) in left.iter().zip(right) {
        let brt = br.transpose();
        let part: Vec<BTreeMap<usize, Scalar>> = (0..block.cod.len() * nd)
            .into_par_iter()
            .map(|idx| {
                let (ri, ci) = (idx / nd, idx % nd);
                let (r, c) = (block.cod[ri], block.dom[ci]);
                let mut row: BTreeMap<usize, Scalar> = BTreeMap::new();
                let mut add = |key: usize, v: Scalar| {
                    let e = row.entry(key).or_insert_with(Scalar::zero);
                    *e = e.clone() + v;
                };
                for (m, v) in bl.row(r) {
                    let mi = cpos[m];
                    add(mi * nd + ci, v.clone());
                }
                for (m, v) in brt.row(c) {
                    let mi = dpos[m];
                    add(ri * nd + mi, -v.clone());
                }
                row.retain(|_, v| !v.is_zero());
                row
            })
            .filter(|r| !r.is_empty())
            .collect();
        rows.extend(part);
    }
    rows
}

/// Nullspace dimension of the intertwining relations on each solver block.
pub fn intertwiner_dims(spec: &CoideaSpec, params: &Params) -> Vec<usize> {
    let left = onsager_generators(spec, &params.with_z(params.z.inv().unwrap()));
    let right = onsager_generators(spec, params);
    solver_blocks(spec, params)
        .iter()
        .map(|b| nullspace(intertwiner_rows(&left, &right, b), b.dom.len() * b.cod.len()).len())
        .collect()
}

/// Solve the intertwining relations directly, block by block, scaled to the matrix-product normalization.
pub fn solve_intertwiner(spec: &CoideaSpec, params: &Params) -> Result<KMatrix> {
    let n = spec.fam.n;
    if n > 5 {
        return Err(Error::Range(format!("intertwiner solve limited to n <= 5, got {n}")));
    }
    let left = onsager_generators(spec, &params.with_z(params.z.inv().unwrap()));
    let right = onsager_generators(spec, params);
    let mut op = Operator::zero(n);
    for block in solver_blocks(spec, params) {
        let nd = block.dom.len();
        let mut ns = nullspace(intertwiner_rows(&left, &right, &block), nd * block.cod.len());
        if ns.len() != 1 {
            return Err(Error::NullspaceDimension(ns.len()));
        }
        let x = ns.pop().unwrap();
        let (pb, pa, pv) = &block.pin;
        let ri = block.cod.iter().position(|b| b == pb).expect("pin row in block");
        let ci = block.dom.iter().position(|a| a == pa).expect("pin column in block");
        let scale = pv.clone() * x[ri * nd + ci].inv().ok_or(Error::ZeroNormalizer)?;
        for (idx, v) in x.into_iter().enumerate() {
            if !v.is_zero() {
                op.set(block.cod[idx / nd], block.dom[idx % nd], v * &scale);
            }
        }
    }
    let (kind, gauge) = match spec.ends {
        None => (KKind::Tr, Gauge::Plain),
        Some((k, kp)) => (KKind::Boundary(k, kp), Gauge::Tilde),
    };
    Ok(KMatrix { op, kind, gauge, z: params.z.clone() })
}

fn diff_detail(a: &Operator, b: &Operator) -> String {
    match a.first_difference(b) {
        None => String::new(),
        Some((r, c, x, y)) => format!("entry ({r},{c}): {x} vs {y}"),
    }
}

pub fn check_unitarity(n: usize, z: &Scalar, params: &Params) -> Result<Report> {
    let mut rep = Report::new();
    let a = build_ktr(n, z, params)?;
    let b = build_ktr(n, &z.inv().unwrap(), params)?;
    let prod = a.op.mul(&b.op);
    let id = Operator::identity(n);
    rep.push(format!("K_tr(z) K_tr(1/z) = 1, n={n}"), "unitarity", prod == id, diff_detail(&prod, &id));
    Ok(rep)
}

pub fn check_commutativity(n: usize, z: &Scalar, w: &Scalar, params: &Params) -> Result<Report> {
    let mut rep = Report::new();
    let a = build_ktr(n, z, params)?;
    let b = build_ktr(n, w, params)?;
    let c = a.op.commutator(&b.op);
    rep.push(format!("[K_tr(z), K_tr(w)] = 0, n={n}"), "commutativity of K_tr", c.is_zero(), diff_detail(&c, &Operator::zero(n)));
    Ok(rep)
}

/// Negative control: `K_{k,k'}(z)` and `K_{k,k'}(w)` do not commute at a generic point.
/// Whether `[K_{k,k'}(z), K_{k,k'}(w)]` vanishes, with the number of nonzero commutator entries.
pub fn boundary_commutator(k: u8, kp: u8, n: usize, z: &Scalar, w: &Scalar, params: &Params) -> Result<(bool, usize)> {
    let a = build_kkk(k, kp, n, z, params)?;
    let b = build_kkk(k, kp, n, w, params)?;
    let c = a.op.commutator(&b.op);
    Ok((c.is_zero(), c.entries().count()))
}

pub fn check_intertwining(spec: &CoideaSpec, params: &Params) -> Result<Report> {
    let mut rep = Report::new();
    let km = matching_k(spec, &params.z, params)?;
    let zi = params.z.inv().unwrap();
    let left = onsager_generators(spec, &params.with_z(zi));
    let right = onsager_generators(spec, params);
    for (i, (bl, br)) in left.iter().zip(&right).enumerate() {
        if i != 0 {
            rep.push(format!("{} b{i} independent of z", spec.label()), "z enters through node 0 only", bl == br, "");
        }
        let lhs = km.op.mul(br);
        let rhs = bl.mul(&km.op);
        rep.push(format!("{} K b{i} = b{i}(1/z) K", spec.label()), "boundary intertwining", lhs == rhs, diff_detail(&lhs, &rhs));
    }
    Ok(rep)
}

/// `H(z^{−1}) K(z) = K(z) H(z)` for an arbitrary coefficient vector.
pub fn check_quasi_commutation(spec: &CoideaSpec, kappa: &[Scalar], params: &Params) -> Result<Report> {
    let mut rep = Report::new();
    let km = matching_k(spec, &params.z, params)?;
    let h = combine(&onsager_generators(spec, params), kappa);
    let hi = combine(&onsager_generators(spec, &params.with_z(params.z.inv().unwrap())), kappa);
    let lhs = hi.mul(&km.op);
    let rhs = km.op.mul(&h);
    rep.push(format!("{} H(1/z) K = K H(z)", spec.label()), "quasi-commutativity", lhs == rhs, diff_detail(&lhs, &rhs));
    Ok(rep)
}

pub fn check_kh_commute(spec: &CoideaSpec, params: &Params) -> Result<Report> {
    let mut rep = Report::new();
    let h = hamiltonian(spec, params)?;
    let kv = vee(&matching_k(spec, &params.z, params)?, params);
    let c = kv.op.commutator(&h);
    rep.push(format!("{} [K^v, H] = 0", spec.label()), "K^v commutes with H", c.is_zero(), diff_detail(&c, &Operator::zero(c.n)));
    Ok(rep)
}

/// Support rules: `|α|+|β| = n` for `K_tr`, parity for `K_{2,2}`, block preservation for the vee gauge.
pub fn check_support(km: &KMatrix) -> Report {
    let mut rep = Report::new();
    let n = km.n();
    let rule: Box<dyn Fn(usize, usize) -> bool> = match (km.kind, km.gauge) {
        (KKind::Tr, Gauge::Vee) => Box::new(|b, a| popcount(b) == popcount(a)),
        (KKind::Tr, _) => Box::new(move |b, a| popcount(a) + popcount(b) == n),
        (KKind::Boundary(2, 2), Gauge::Vee) => Box::new(|b, a| (popcount(b) + popcount(a)).is_multiple_of(2)),
        (KKind::Boundary(2, 2), _) => Box::new(move |b, a| (popcount(a) + popcount(b) + n).is_multiple_of(2)),
        _ => Box::new(|_, _| true),
    };
    let bad = km.op.entries().find(|(r, c, _)| !rule(*r, *c));
    rep.push(
        format!("{:?} {:?} support, n={n}", km.kind, km.gauge),
        "block structure",
        bad.is_none(),
        bad.map(|(r, c, _)| format!("nonzero at ({r},{c})")).unwrap_or_default(),
    );
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_params, rat, sc, sci};
    use crate::onsager::{hamiltonian_multi, hamiltonian_coeffs};
    use crate::spinrep::{Family, FamilyTag};

    fn params() -> Params {
        make_params(rat(3, 7), sc(5, 11), 1, -1).unwrap()
    }

    fn ket(bits: &[usize]) -> usize {
        bits.iter().enumerate().map(|(i, b)| b << i).sum()
    }

    #[test]
    fn ktr_row_011() {
        let p = params();
        let (q, z) = (p.q.clone(), p.z.clone());
        let one = Scalar::one();
        let k = build_ktr(3, &z, &p).unwrap();
        let den = one.clone() - q.powi(3) * &z;
        let c = ket(&[0, 1, 1]);
        let a = -(q.clone() * (one.clone() - q.powi(2)) * &z) / &den;
        let b = -(q.powi(2) * (one.clone() - q.powi(2)) * &z) / &den;
        let d = q.powi(2) * (one.clone() - q.clone() * &z) / &den;
        assert_eq!(k.op.get(ket(&[0, 0, 1]), c), a);
        assert_eq!(k.op.get(ket(&[0, 1, 0]), c), b);
        assert_eq!(k.op.get(ket(&[1, 0, 0]), c), d);
        assert_eq!(k.op.row(ket(&[1, 1, 1])).len(), 1);
    }

    fn poch(x: &Scalar, base: &Scalar, m: usize) -> Scalar {
        (0..m).fold(Scalar::one(), |acc, i| acc * (Scalar::one() - x.clone() * base.powi(i as i64)))
    }

    fn assert_column(k: &KMatrix, col: usize, want: &[(usize, Scalar)]) {
        let got = k.op.transpose();
        let got = got.row(col);
        assert_eq!(got.len(), want.iter().filter(|(_, v)| !v.is_zero()).count(), "column {col:b}");
        for (r, v) in want {
            assert_eq!(k.op.get(*r, col), *v, "entry {r:b} <- {col:b}");
        }
    }

    #[test]
    fn boundary_columns_n2() {
        let p = params();
        let (q, z) = (p.q.clone(), p.z.clone());
        let one = Scalar::one();
        let z2 = z.powi(2);
        let q1 = one.clone() + &q;
        let c = ket(&[0, 0]);

        let den = poch(&-(q.clone() * &z), &q, 2);
        let k = build_kkk(1, 1, 2, &z, &p).unwrap();
        assert_column(&k, c, &[
            (ket(&[0, 0]), poch(&-q.clone(), &q, 2) * &z2 / &den),
            (ket(&[0, 1]), q1.clone() * (one.clone() - &z) * &z / &den),
            (ket(&[1, 0]), q.clone() * &q1 * (one.clone() - &z) * &z / &den),
            (ket(&[1, 1]), poch(&z, &q, 2) / &den),
        ]);

        let q2 = q.powi(2);
        let den = poch(&-(q.clone() * &z2), &q2, 2);
        let k = build_kkk(1, 2, 2, &z, &p).unwrap();
        let head = one.clone() + &q2 - q2.clone() * &z2 + q.powi(3) * &z2;
        assert_column(&k, c, &[
            (ket(&[0, 0]), q1.clone() * &z2 * head / &den),
            (ket(&[0, 1]), q1.clone() * (one.clone() - &z2) * &z / &den),
            (ket(&[1, 0]), q.clone() * &q1 * (one.clone() - &z2) * &z / &den),
            (ket(&[1, 1]), poch(&z2, &q2, 2) / &den),
        ]);

        let k = build_kkk(2, 1, 2, &z, &p).unwrap();
        let head = one.clone() - &q + q.clone() * &z2 + q.powi(3) * &z2;
        assert_column(&k, c, &[
            (ket(&[0, 0]), q1.clone() * &z2 * head / &den),
            (ket(&[0, 1]), q.clone() * &q1 * (one.clone() - &z2) * &z2 / &den),
            (ket(&[1, 0]), q2.clone() * &q1 * (one.clone() - &z2) * &z2 / &den),
            (ket(&[1, 1]), poch(&z2, &q2, 2) / &den),
        ]);
    }

    #[test]
    fn k22_columns_n3() {
        let p = params();
        let (q, z) = (p.q.clone(), p.z.clone());
        let one = Scalar::one();
        let (q2, z2) = (q.powi(2), z.powi(2));
        let den = poch(&z2, &q.powi(4), 2);
        let k = build_kkk(2, 2, 3, &z, &p).unwrap();
        let a = one.clone() - &q2;
        assert_column(&k, ket(&[0, 0, 0]), &[
            (ket(&[0, 0, 1]), a.clone() * &z2 / &den),
            (ket(&[0, 1, 0]), q.clone() * &a * &z2 / &den),
            (ket(&[1, 0, 0]), q2.clone() * &a * &z2 / &den),
            (ket(&[1, 1, 1]), (one.clone() - q2.clone() * &z2) / &den),
        ]);
        assert_column(&k, ket(&[1, 0, 0]), &[
            (ket(&[0, 0, 0]), -(q.powi(3) * &a * &z2) / &den),
            (ket(&[0, 1, 1]), -(q.clone() * (one.clone() - q2.clone() * &z2)) / &den),
            (ket(&[1, 0, 1]), a.clone() / &den),
            (ket(&[1, 1, 0]), q.clone() * &a / &den),
        ]);
    }

    #[test]
    fn oracle_redundancy() {
        use crate::qboson::{boundary_contract_oracle, boundary_contract_oracle_with, within, FockAction};
        use crate::sample::Sampler;
        let mut smp = Sampler::new(11);
        // the certified tail needs |q|² < 1/2 and a geometric margin in z
        let half = rat(1, 2);
        let p = loop {
            let p = smp.params();
            if p.t < half && p.z.re <= rat(1, 7) {
                break p;
            }
        };
        let tol = rat(1, 10i64.pow(18)) * rat(1, 10i64.pow(7));
        let n = 2;
        for (k, kp) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let km = build_kkk(k, kp, n, &p.z, &p).unwrap();
            let keep = boundary_keep(k, kp, n);
            let (bk, bkp) = (BoundaryIndex::new(k).unwrap(), BoundaryIndex::new(kp).unwrap());
            for _ in 0..10 {
                let (beta, alpha) = loop {
                    let (b, a) = (smp.index(1 << n), smp.index(1 << n));
                    if keep(b, a) {
                        break (b, a);
                    }
                };
                let nf = entry_word(n, beta, alpha, None, false, &p);
                let o = boundary_contract_oracle(bk, bkp, FockAction::Form(&nf), &p.z, &p, 40, &tol).unwrap();
                assert!(within(&o.value, &km.op.get(beta, alpha), &o.bound), "({k},{kp}) {beta:b} <- {alpha:b}");
            }
        }
        // odd n, (2,2): inverse normalization on both sides
        let two = BoundaryIndex::new(2).unwrap();
        let km = build_kkk(2, 2, 3, &p.z, &p).unwrap();
        for (beta, alpha) in [(0b001, 0b000), (0b000, 0b100), (0b110, 0b100)] {
            let nf = entry_word(3, beta, alpha, None, false, &p);
            let o = boundary_contract_oracle_with(two, two, FockAction::Form(&nf), &p.z, &p, 40, &tol, true).unwrap();
            assert!(!km.op.get(beta, alpha).is_zero());
            assert!(within(&o.value, &km.op.get(beta, alpha), &o.bound), "(2,2) {beta:b} <- {alpha:b}");
        }
    }

    #[test]
    fn off_support_entries_vanish() {
        let p = params();
        for (b, a) in [(0b011, 0b011), (0b000, 0b001), (0b111, 0b111)] {
            assert!(ktr_entry(3, b, a, &p.z, &p).unwrap().is_zero());
        }
        assert!(!ktr_entry(3, 0b100, 0b011, &p.z, &p).unwrap().is_zero());
    }

    #[test]
    fn unitarity_and_commutativity() {
        let p = params();
        for n in 2..=4 {
            assert!(check_unitarity(n, &p.z, &p).unwrap().passed());
            assert!(check_commutativity(n, &p.z, &sc(3, 11), &p).unwrap().passed());
        }
        // Boundary K matrices at distinct spectral parameters commute exactly.
        for (k, kp) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            for n in 2..=3 {
                assert_eq!(boundary_commutator(k, kp, n, &sc(5, 7), &sc(3, 11), &p).unwrap(), (true, 0));
            }
        }
    }

    #[test]
    fn tilde_symmetric_and_matches_symmetric_ops() {
        let p = params();
        for (k, kp) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            for n in 2..=3 {
                let km = build_kkk(k, kp, n, &p.z, &p).unwrap();
                let t = gauge_tilde(&km, &p);
                assert!(t.op.is_symmetric(), "({k},{kp}) n={n}");
                assert_eq!(t, build_kkk_symmetric(k, kp, n, &p.z, &p).unwrap());
                assert!(check_support(&km).passed());
                assert!(check_support(&vee(&km, &p)).passed());
            }
        }
        let kt = build_ktr(4, &p.z, &p).unwrap();
        assert!(check_support(&kt).passed());
        let kv = vee(&kt, &p);
        assert!(check_support(&kv).passed());
        for (r, c, v) in kv.op.entries() {
            assert_eq!(kt.op.get(r ^ 0b1111, c), *v);
        }
    }

    #[test]
    fn intertwining_all_specs_small() {
        let p = params();
        for tag in FamilyTag::ALL {
            for spec in CoideaSpec::all_for(tag, tag.min_n()).unwrap() {
                let rep = check_intertwining(&spec, &p).unwrap();
                assert!(rep.passed(), "{:?}", rep.first_failure());
                if spec.has_hamiltonian() {
                    let rep = check_kh_commute(&spec, &p).unwrap();
                    assert!(rep.passed(), "{:?}", rep.first_failure());
                } else {
                    assert!(matches!(check_kh_commute(&spec, &p), Err(Error::Spec(_))));
                }
                let kappa: Vec<Scalar> = (0..spec.fam.nodes()).map(|i| sc(2 * i as i64 + 3, 5 - i as i64 % 3)).collect();
                assert!(check_quasi_commutation(&spec, &kappa, &p).unwrap().passed());
            }
        }
    }

    #[test]
    fn solver_matches_matrix_product() {
        let p = params();
        for tag in FamilyTag::ALL {
            for spec in CoideaSpec::all_for(tag, tag.min_n()).unwrap() {
                let solved = solve_intertwiner(&spec, &p).unwrap();
                let built = matching_k(&spec, &p.z, &p).unwrap();
                assert_eq!(solved.op, built.op, "{}", spec.label());
            }
        }
    }

    #[test]
    fn multi_twist() {
        let p = params();
        let one = Scalar::one();
        let km = build_ktr_multi(&[p.z.clone(), one.clone(), one.clone()], &p).unwrap();
        let kt = build_ktr(3, &p.z, &p).unwrap();
        let k0 = kappa_tr(3, 0, &p.z, &p);
        for (r, c, v) in kt.op.entries() {
            let l = popcount(c);
            let ratio = kappa_tr(3, l, &p.z, &p) / &k0;
            assert_eq!(km.op.get(r, c) * ratio, *v);
        }
        let zs = [sci(2), sci(3), sci(5)];
        let km = build_ktr_multi(&zs, &p).unwrap();
        let h = hamiltonian_multi(&zs, &p).unwrap();
        assert!(vee(&km, &p).op.commutator(&h).is_zero());
        assert!(check_support(&km).passed());
    }

    #[test]
    fn hamiltonian_recipe_error() {
        let p = params();
        let spec = CoideaSpec::new(Family::new(FamilyTag::D2, 2).unwrap(), 1, 2).unwrap();
        assert!(hamiltonian_coeffs(&spec, &p).is_err());
    }
}
