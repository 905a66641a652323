//! Affine families, their Cartan data, and the spin representations on `(C^2)^{⊗n}`.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::error::{Error, Result};
use crate::field::{Field, Params, Scalar};
use crate::report::Report;
use crate::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    /// `A^{(1)}_{n−1}`
    A1,
    /// `D^{(2)}_{n+1}`, `(r, r') = (1, 1)`
    D2,
    /// `B^{(1)}_n`, `(r, r') = (2, 1)`
    B1,
    /// `\tilde B^{(1)}_n`, `(r, r') = (1, 2)`
    Bt1,
    /// `D^{(1)}_n`, `(r, r') = (2, 2)`
    D1,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 5] = [FamilyTag::A1, FamilyTag::D2, FamilyTag::B1, FamilyTag::Bt1, FamilyTag::D1];

    pub fn min_n(self) -> usize {
        match self {
            FamilyTag::D2 => 2,
            _ => 3,
        }
    }

    /// `(r, r')`; `None` for the cyclic family.
    pub fn rr(self) -> Option<(u8, u8)> {
        match self {
            FamilyTag::A1 => None,
            FamilyTag::D2 => Some((1, 1)),
            FamilyTag::B1 => Some((2, 1)),
            FamilyTag::Bt1 => Some((1, 2)),
            FamilyTag::D1 => Some((2, 2)),
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::A1 => "A",
            FamilyTag::D2 => "D2",
            FamilyTag::B1 => "B1",
            FamilyTag::Bt1 => "Bt1",
            FamilyTag::D1 => "D1",
        };
        f.write_str(s)
    }
}

impl FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "a1" => Ok(FamilyTag::A1),
            "d2" => Ok(FamilyTag::D2),
            "b1" => Ok(FamilyTag::B1),
            "bt1" | "btilde1" => Ok(FamilyTag::Bt1),
            "d1" => Ok(FamilyTag::D1),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub tag: FamilyTag,
    pub n: usize,
    /// Largest node index.
    pub nprime: usize,
    pub r: u8,
    pub rp: u8,
    pub cartan: Vec<Vec<i32>>,
    /// `p_i = p^{pexp[i]}`.
    pub pexp: Vec<u8>,
}

impl Family {
    pub fn new(tag: FamilyTag, n: usize) -> Result<Family> {
        if n < tag.min_n() {
            return Err(Error::Range(format!("{tag} needs n >= {}", tag.min_n())));
        }
        let Some((r, rp)) = tag.rr() else {
            let mut cartan = vec![vec![0; n]; n];
            for i in 0..n {
                cartan[i][i] = 2;
                cartan[i][(i + 1) % n] = -1;
                cartan[(i + 1) % n][i] = -1;
            }
            return Ok(Family { tag, n, nprime: n - 1, r: 2, rp: 2, cartan, pexp: vec![2; n] });
        };
        let size = n + 1;
        let mut a = vec![vec![0; size]; size];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize, aij: i32, aji: i32| {
            a[i][j] = aij;
            a[j][i] = aji;
        };
        for i in 1..n - 1 {
            link(i, i + 1, -1, -1);
        }
        if r == 1 {
            link(0, 1, -2, -1);
        } else {
            link(0, 2, -1, -1);
        }
        if rp == 1 {
            link(n, n - 1, -2, -1);
        } else {
            link(n, n - 2, -1, -1);
        }
        if r == 2 && rp == 2 && n == 3 {
            // both boundary nodes act on site 2
            link(0, n, -1, -1);
        }
        let mut pexp = vec![2; size];
        pexp[0] = r;
        pexp[n] = rp;
        Ok(Family { tag, n, nprime: n, r, rp, cartan: a, pexp })
    }

    pub fn nodes(&self) -> usize {
        self.nprime + 1
    }

    pub fn p_i(&self, i: usize, params: &Params) -> Scalar {
        params.p.powi(self.pexp[i] as i64)
    }
}

/// `α_site` of a basis index (sites are 1-based).
pub fn bit(a: usize, site: usize) -> usize {
    (a >> (site - 1)) & 1
}

pub fn popcount(a: usize) -> usize {
    a.count_ones() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn local_spin(kind: SpinKind, site: usize, n: usize) -> Result<Operator> {
    if site == 0 || site > n {
        return Err(Error::Range(format!("site {site} outside 1..={n}")));
    }
    let m = 1usize << (site - 1);
    let i = Scalar::i();
    Ok(Operator::from_basis_map(n, |a| {
        let up = a & m != 0;
        match kind {
            SpinKind::X => Some((a ^ m, Scalar::one())),
            SpinKind::Y => Some((a ^ m, if up { i.clone() } else { -i.clone() })),
            SpinKind::Z => Some((a, if up { Scalar::one() } else { -Scalar::one() })),
            SpinKind::Plus => (!up).then(|| (a | m, Scalar::one())),
            SpinKind::Minus => up.then(|| (a & !m, Scalar::one())),
        }
    }))
}

/// Global spin reversal `|α⟩ ↦ |1−α⟩`.
pub fn global_sigma_x(n: usize) -> Operator {
    let full = (1usize << n) - 1;
    Operator::from_basis_map(n, |a| Some((a ^ full, Scalar::one())))
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub e: Vec<Operator>,
    pub f: Vec<Operator>,
    pub kplus: Vec<Operator>,
    pub kminus: Vec<Operator>,
    pub z: Scalar,
}

/// Hop a particle from `from` to `to`, with coefficient `c`.
fn hop(n: usize, from: usize, to: usize, c: Scalar) -> Operator {
    Operator::from_basis_map(n, |a| {
        (bit(a, from) == 1 && bit(a, to) == 0).then(|| ((a ^ (1 << (from - 1))) | (1 << (to - 1)), c.clone()))
    })
}

/// Flip the given sites from `src` to `1 − src` when they all equal `src`.
fn flip(n: usize, sites: &[usize], src: usize, c: Scalar) -> Operator {
    Operator::from_basis_map(n, |a| {
        if sites.iter().all(|&s| bit(a, s) == src) {
            let b = sites.iter().fold(a, |b, &s| b ^ (1 << (s - 1)));
            Some((b, c.clone()))
        } else {
            None
        }
    })
}

fn kdiag(n: usize, p: &Scalar, exp: impl Fn(usize) -> i64) -> (Operator, Operator) {
    (
        Operator::diagonal(n, |a| p.powi(exp(a))),
        Operator::diagonal(n, |a| p.powi(-exp(a))),
    )
}

pub fn generators(fam: &Family, params: &Params) -> GeneratorSet {
    let n = fam.n;
    let z = &params.z;
    let p = &params.p;
    let one = Scalar::one;
    let mut gs = GeneratorSet { e: vec![], f: vec![], kplus: vec![], kminus: vec![], z: z.clone() };
    let push = |gs: &mut GeneratorSet, e: Operator, f: Operator, (kp, km): (Operator, Operator)| {
        gs.e.push(e);
        gs.f.push(f);
        gs.kplus.push(kp);
        gs.kminus.push(km);
    };
    let b = |a: usize, s: usize| bit(a, s) as i64;
    if fam.tag == FamilyTag::A1 {
        for j in 0..n {
            let (from, to) = if j == 0 { (n, 1) } else { (j, j + 1) };
            let (ce, cf) = if j == 0 { (z.clone(), z.inv().unwrap()) } else { (one(), one()) };
            push(
                &mut gs,
                hop(n, from, to, ce),
                hop(n, to, from, cf),
                kdiag(n, p, |a| 2 * (b(a, to) - b(a, from))),
            );
        }
        return gs;
    }
    if fam.r == 1 {
        push(
            &mut gs,
            flip(n, &[1], 0, z.clone()),
            flip(n, &[1], 1, z.inv().unwrap()),
            kdiag(n, p, |a| 2 * b(a, 1) - 1),
        );
    } else {
        push(
            &mut gs,
            flip(n, &[1, 2], 0, z.powi(2)),
            flip(n, &[1, 2], 1, z.powi(-2)),
            kdiag(n, p, |a| 2 * (b(a, 1) + b(a, 2) - 1)),
        );
    }
    for j in 1..n {
        push(
            &mut gs,
            hop(n, j, j + 1, one()),
            hop(n, j + 1, j, one()),
            kdiag(n, p, |a| 2 * (b(a, j + 1) - b(a, j))),
        );
    }
    if fam.rp == 1 {
        push(&mut gs, flip(n, &[n], 1, one()), flip(n, &[n], 0, one()), kdiag(n, p, |a| 1 - 2 * b(a, n)));
    } else {
        push(
            &mut gs,
            flip(n, &[n - 1, n], 1, one()),
            flip(n, &[n - 1, n], 0, one()),
            kdiag(n, p, |a| 2 * (1 - b(a, n - 1) - b(a, n))),
        );
    }
    gs
}

/// `[m]_x`-style Serre combination `Σ_s c_s x_i^{N−s} x_j x_i^s` for the given `a_ij`.
pub fn serre_combination(xi: &Operator, xj: &Operator, aij: i32, p: &Scalar) -> Operator {
    let p2 = p.powi(2);
    let p2i = p.powi(-2);
    match aij {
        0 => xi.commutator(xj),
        -1 => {
            let c = p2 + p2i;
            let xi2 = xi.mul(xi);
            xi2.mul(xj)
                .sub(&xi.mul(xj).mul(xi).scale(&c))
                .add(&xj.mul(&xi2))
        }
        -2 => {
            let c = p2 + p2i + Scalar::one();
            let xi2 = xi.mul(xi);
            let xi3 = xi2.mul(xi);
            xi3.mul(xj)
                .sub(&xi2.mul(xj).mul(xi).scale(&c))
                .add(&xi.mul(xj).mul(&xi2).scale(&c))
                .sub(&xj.mul(&xi3))
        }
        _ => panic!("unsupported Cartan entry {aij}"),
    }
}

fn describe(op: &Operator) -> String {
    match op.entries().next() {
        None => "zero".into(),
        Some((r, c, v)) => format!("nonzero, first entry ({r},{c}) = {v}"),
    }
}

pub fn check_defining_relations(fam: &Family, gens: &GeneratorSet, params: &Params) -> Report {
    let mut rep = Report::new();
    let nodes = fam.nodes();
    let id = Operator::identity(fam.n);
    for i in 0..nodes {
        let ok = gens.kplus[i].mul(&gens.kminus[i]) == id;
        rep.push(format!("k{i} k{i}^-1 = 1"), "k invertibility", ok, "");
    }
    for i in 0..nodes {
        let pi = fam.p_i(i, params);
        for j in 0..nodes {
            let a = fam.cartan[i][j] as i64;
            let lhs = gens.kplus[i].mul(&gens.e[j]).mul(&gens.kminus[i]);
            let rhs = gens.e[j].scale(&pi.powi(a));
            rep.push(format!("k{i} e{j} k{i}^-1"), "k-conjugation of e", lhs == rhs, "");
            let lhs = gens.kplus[i].mul(&gens.f[j]).mul(&gens.kminus[i]);
            let rhs = gens.f[j].scale(&pi.powi(-a));
            rep.push(format!("k{i} f{j} k{i}^-1"), "k-conjugation of f", lhs == rhs, "");
            let kk = gens.kplus[i].commutator(&gens.kplus[j]).is_zero();
            rep.push(format!("[k{i},k{j}]"), "k commute", kk, "");
            let comm = gens.e[i].commutator(&gens.f[j]);
            let want = if i == j {
                gens.kplus[i]
                    .sub(&gens.kminus[i])
                    .scale(&(pi.clone() - pi.inv().unwrap()).inv().unwrap())
            } else {
                Operator::zero(fam.n)
            };
            let ok = comm == want;
            rep.push(format!("[e{i},f{j}]"), "e-f commutator", ok, if ok { String::new() } else { describe(&comm.sub(&want)) });
        }
    }
    for i in 0..nodes {
        for j in 0..nodes {
            if i == j {
                continue;
            }
            let a = fam.cartan[i][j];
            for (label, x) in [("e", &gens.e), ("f", &gens.f)] {
                let res = serre_combination(&x[i], &x[j], a, &params.p);
                rep.push(
                    format!("serre {label} ({i},{j})"),
                    format!("Serre relation a_ij = {a}"),
                    res.is_zero(),
                    describe(&res),
                );
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_params, rat, sc};
    use num_traits::Zero;

    fn params() -> Params {
        make_params(rat(3, 7), sc(5, 11), 1, -1).unwrap()
    }

    fn ket(bits: &[usize]) -> usize {
        bits.iter().enumerate().map(|(i, b)| b << i).sum()
    }

    #[test]
    fn local_spin_actions() {
        let sz = local_spin(SpinKind::Z, 1, 2).unwrap();
        assert_eq!(sz.get(ket(&[1, 0]), ket(&[1, 0])), Scalar::one());
        let sp = local_spin(SpinKind::Plus, 2, 2).unwrap();
        assert!((0..4).all(|c| sp.get(c, ket(&[1, 1])).is_zero()));
        let gx = global_sigma_x(3);
        assert_eq!(gx.get(ket(&[0, 1, 1]), ket(&[1, 0, 0])), Scalar::one());
        let sx = local_spin(SpinKind::X, 2, 3).unwrap();
        let sy = local_spin(SpinKind::Y, 2, 3).unwrap();
        let spl = local_spin(SpinKind::Plus, 2, 3).unwrap();
        let half = sc(1, 2);
        assert_eq!(sx.add(&sy.scale(&Scalar::i())).scale(&half), spl);
        assert!(local_spin(SpinKind::X, 4, 3).is_err());
    }

    #[test]
    fn generator_examples() {
        let p = params();
        let g = generators(&Family::new(FamilyTag::A1, 3).unwrap(), &p);
        assert_eq!(g.e[1].get(ket(&[0, 1, 0]), ket(&[1, 0, 0])), Scalar::one());
        let g = generators(&Family::new(FamilyTag::D2, 2).unwrap(), &p);
        assert_eq!(g.kplus[0].get(ket(&[0, 1]), ket(&[0, 1])), p.p.powi(-1));
        let g = generators(&Family::new(FamilyTag::D1, 3).unwrap(), &p);
        assert_eq!(g.f[3].get(ket(&[0, 1, 1]), ket(&[0, 0, 0])), Scalar::one());
    }

    #[test]
    fn relations_hold_small() {
        let p = params();
        for (tag, n) in [(FamilyTag::A1, 3), (FamilyTag::D2, 2), (FamilyTag::B1, 3), (FamilyTag::Bt1, 3), (FamilyTag::D1, 3)] {
            let fam = Family::new(tag, n).unwrap();
            let rep = check_defining_relations(&fam, &generators(&fam, &p), &p);
            assert!(rep.passed(), "{tag} n={n}: {:?}", rep.first_failure());
        }
    }

    #[test]
    fn perturbed_generator_fails() {
        let p = params();
        let fam = Family::new(FamilyTag::A1, 3).unwrap();
        let mut g = generators(&fam, &p);
        g.e[1].add_to(0, 0, Scalar::one());
        let rep = check_defining_relations(&fam, &g, &p);
        assert!(!rep.passed());
    }

    #[test]
    fn cartan_shapes() {
        let f = Family::new(FamilyTag::D2, 3).unwrap();
        assert_eq!(f.cartan[0][1], -2);
        assert_eq!(f.cartan[1][0], -1);
        assert_eq!(f.cartan[3][2], -2);
        assert_eq!(f.pexp, vec![1, 2, 2, 1]);
        let f = Family::new(FamilyTag::B1, 4).unwrap();
        assert_eq!((f.cartan[0][2], f.cartan[0][1]), (-1, 0));
        assert_eq!(f.pexp, vec![2, 2, 2, 2, 1]);
        assert!(Family::new(FamilyTag::B1, 2).is_err());
    }
}
