//! Onsager coideal generators, their relations, the Temperley–Lieb map and the
//! open/periodic chain Hamiltonians.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{sci, Field, Params, Scalar};
use crate::report::Report;
use crate::spinrep::{generators, global_sigma_x, local_spin, Family, FamilyTag, SpinKind};
use crate::Operator;

/// Which embedding of the Onsager algebra into `U_p` is used.
#[derive(Clone, Debug, PartialEq)]
pub struct CoideaSpec {
    pub fam: Family,
    /// Boundary vector indices `(k, k')`; `None` for the cyclic family.
    pub ends: Option<(u8, u8)>,
    /// Cyclic family only: all `d_i = −1/(q+q^{−1})` followed by spin reversal.
    pub variant: bool,
}

impl CoideaSpec {
    pub fn new(fam: Family, k: u8, kp: u8) -> Result<Self> {
        let Some((r, rp)) = fam.tag.rr() else {
            return Err(Error::Spec("the cyclic family takes no boundary indices".into()));
        };
        if !(1..=2).contains(&k) || !(1..=2).contains(&kp) || r > k || rp > kp {
            return Err(Error::Spec(format!("(k, k') = ({k}, {kp}) not allowed for {}", fam.tag)));
        }
        Ok(CoideaSpec { fam, ends: Some((k, kp)), variant: false })
    }

    pub fn cyclic(fam: Family) -> Result<Self> {
        if fam.tag != FamilyTag::A1 {
            return Err(Error::Spec(format!("{} needs boundary indices", fam.tag)));
        }
        Ok(CoideaSpec { fam, ends: None, variant: false })
    }

    pub fn cyclic_variant(fam: Family) -> Result<Self> {
        Ok(CoideaSpec { variant: true, ..Self::cyclic(fam)? })
    }

    /// Every admissible spec for the family at chain length `n`.
    pub fn all_for(tag: FamilyTag, n: usize) -> Result<Vec<Self>> {
        let fam = Family::new(tag, n)?;
        let Some((r, rp)) = tag.rr() else {
            return Ok(vec![Self::cyclic(fam)?]);
        };
        let mut out = vec![];
        for k in r..=2 {
            for kp in rp..=2 {
                out.push(Self::new(fam.clone(), k, kp)?);
            }
        }
        Ok(out)
    }

    /// Whether a spin-reversal symmetric Hamiltonian exists, i.e. `(k, k') = (r, r')`.
    pub fn has_hamiltonian(&self) -> bool {
        match self.ends {
            None => !self.variant,
            Some(ends) => self.fam.tag.rr() == Some(ends),
        }
    }

    pub fn label(&self) -> String {
        match self.ends {
            None if self.variant => format!("{}' n={}", self.fam.tag, self.fam.n),
            None => format!("{} n={}", self.fam.tag, self.fam.n),
            Some((k, kp)) => format!("{} ({k},{kp}) n={}", self.fam.tag, self.fam.n),
        }
    }

    /// `d_0, …, d_{n'}`.
    pub fn d_coeffs(&self, params: &Params) -> Vec<Scalar> {
        let bulk = params.qsum().inv().unwrap();
        let nodes = self.fam.nodes();
        let Some((k, kp)) = self.ends else {
            let d = if self.variant { -bulk } else { bulk };
            return vec![d; nodes];
        };
        let mut d = vec![bulk; nodes];
        d[0] = d_boundary(self.fam.r, k, params);
        d[nodes - 1] = d_boundary(self.fam.rp, kp, params);
        d
    }
}

fn d_boundary(r: u8, k: u8, params: &Params) -> Scalar {
    match (r, k) {
        (1, 1) => params.eps_s() * (params.qhalf.clone() + params.qhalf.inv().unwrap()) / params.qsum(),
        (1, 2) => Scalar::zero(),
        _ => params.qsum().inv().unwrap(),
    }
}

/// `b_i = f_i + p_i k_i^{−1} e_i + d_i k_i^{−1}` in the spin representation.
pub fn onsager_generators(spec: &CoideaSpec, params: &Params) -> Vec<Operator> {
    let gens = generators(&spec.fam, params);
    let d = spec.d_coeffs(params);
    let sx = global_sigma_x(spec.fam.n);
    (0..spec.fam.nodes())
        .map(|i| {
            let c = spec.fam.p_i(i, params);
            let km = &gens.kminus[i];
            let b = gens.f[i].add(&km.mul(&gens.e[i]).scale(&c)).add(&km.scale(&d[i]));
            if spec.variant {
                sx.mul(&b).mul(&sx)
            } else {
                b
            }
        })
        .collect()
}

struct Spins {
    n: usize,
}

impl Spins {
    fn s(&self, kind: SpinKind, site: usize) -> Operator {
        local_spin(kind, site, self.n).expect("site in range")
    }

    fn id(&self, c: &Scalar) -> Operator {
        Operator::identity(self.n).scale(c)
    }

    /// `x σ⁺_i σ⁻_j + x^{−1} σ⁻_i σ⁺_j`
    fn hop(&self, i: usize, j: usize, x: &Scalar) -> Operator {
        use SpinKind::*;
        let a = self.s(Plus, i).mul(&self.s(Minus, j)).scale(x);
        let b = self.s(Minus, i).mul(&self.s(Plus, j)).scale(&x.inv().unwrap());
        a.add(&b)
    }

    /// `x σ⁺_i σ⁺_j + x^{−1} σ⁻_i σ⁻_j`
    fn pair(&self, i: usize, j: usize, x: &Scalar) -> Operator {
        use SpinKind::*;
        let a = self.s(Plus, i).mul(&self.s(Plus, j)).scale(x);
        let b = self.s(Minus, i).mul(&self.s(Minus, j)).scale(&x.inv().unwrap());
        a.add(&b)
    }

    fn zz(&self, i: usize, j: usize) -> Operator {
        self.s(SpinKind::Z, i).mul(&self.s(SpinKind::Z, j))
    }

    /// `σ^z_i + s σ^z_j`
    fn zlin(&self, i: usize, j: usize, s: i64) -> Operator {
        self.s(SpinKind::Z, i).add(&self.s(SpinKind::Z, j).scale(&sci(s)))
    }
}

/// `zσ⁺_1 + z^{−1}σ⁻_1` style single-site boundary term with the magnetic field of the `(1,1)` end.
fn field_end(sp: &Spins, site: usize, x: &Scalar, sign: i64, with_field: bool, params: &Params) -> Operator {
    use SpinKind::*;
    let flip = sp.s(Plus, site).scale(x).add(&sp.s(Minus, site).scale(&x.inv().unwrap()));
    if !with_field {
        return flip;
    }
    let t = params.t_scalar();
    let ti = t.inv().unwrap();
    let t2 = t.powi(2);
    let ti2 = t2.inv().unwrap();
    let mu = params.mu_s();
    let half = (t.clone() - &ti) * &mu / sci(2);
    let cst = -(mu * (t - ti) * (t2.clone() - &ti2)) / (sci(2) * (t2 + ti2));
    flip.add(&sp.s(Z, site).scale(&(half * sci(sign)))).add(&sp.id(&cst))
}

/// The local Hamiltonians assembled directly from Pauli matrices.
pub fn pauli_generators(spec: &CoideaSpec, params: &Params) -> Vec<Operator> {
    let n = spec.fam.n;
    let sp = Spins { n };
    let z = &params.z;
    let one = Scalar::one();
    let qs4 = params.qsum() / sci(4);
    let qd4 = params.qdiff() / sci(4);
    let gamma = params.gamma();
    let bulk = |i: usize, j: usize, x: &Scalar| {
        sp.hop(i, j, x)
            .add(&sp.zz(i, j).scale(&qs4))
            .add(&sp.zlin(i, j, -1).scale(&qd4))
            .add(&sp.id(&gamma))
    };
    let Some((k, kp)) = spec.ends else {
        let zi = z.inv().unwrap();
        return (0..n)
            .map(|i| {
                let (a, b, x) = if i == 0 { (n, 1, zi.clone()) } else { (i, i + 1, one.clone()) };
                if spec.variant {
                    sp.hop(a, b, &x.inv().unwrap())
                        .sub(&sp.zz(a, b).scale(&qs4))
                        .add(&sp.zlin(a, b, -1).scale(&qd4))
                        .sub(&sp.id(&gamma))
                } else {
                    bulk(a, b, &x)
                }
            })
            .collect();
    };
    let mut out = Vec::with_capacity(n + 1);
    // Pair ends are the particle-hole image of a bulk bond on one site, hence −(q+q^{−1})/4 σ^zσ^z.
    out.push(match (spec.fam.r, k) {
        (1, 1) => field_end(&sp, 1, z, -1, true, params),
        (1, _) => field_end(&sp, 1, z, -1, false, params),
        _ => sp
            .pair(1, 2, &z.powi(2))
            .sub(&sp.zz(1, 2).scale(&qs4))
            .sub(&sp.zlin(1, 2, 1).scale(&qd4))
            .add(&sp.id(&gamma)),
    });
    for i in 1..n {
        out.push(bulk(i, i + 1, &one));
    }
    out.push(match (spec.fam.rp, kp) {
        (1, 1) => field_end(&sp, n, &one, 1, true, params),
        (1, _) => field_end(&sp, n, &one, 1, false, params),
        _ => sp
            .pair(n - 1, n, &one)
            .sub(&sp.zz(n - 1, n).scale(&qs4))
            .add(&sp.zlin(n - 1, n, 1).scale(&qd4))
            .add(&sp.id(&gamma)),
    });
    out
}

fn describe_diff(a: &Operator, b: &Operator) -> String {
    match a.first_difference(b) {
        None => String::new(),
        Some((r, c, x, y)) => format!("entry ({r},{c}): {x} vs {y}"),
    }
}

pub fn check_routes_agree(spec: &CoideaSpec, params: &Params) -> Report {
    let mut rep = Report::new();
    let emb = onsager_generators(spec, params);
    let pau = pauli_generators(spec, params);
    for (i, (a, b)) in emb.iter().zip(&pau).enumerate() {
        rep.push(
            format!("{} b{i} embedding = Pauli", spec.label()),
            "local Hamiltonian display",
            a == b,
            describe_diff(a, b),
        );
    }
    rep
}

/// Left side minus right side of the Onsager relation for the pair `(i, j)`.
///
/// `c` is the coefficient `p²+p^{−2}` (for `a_ij = −1`) or `p²+1+p^{−2}` (for `a_ij = −2`).
pub fn onsager_residual(bi: &Operator, bj: &Operator, aij: i32, c: &Scalar, p: &Scalar) -> Operator {
    match aij {
        0 => bi.commutator(bj),
        -1 => {
            let bi2 = bi.mul(bi);
            bi2.mul(bj).sub(&bi.mul(bj).mul(bi).scale(c)).add(&bj.mul(&bi2)).sub(bj)
        }
        -2 => {
            let bi2 = bi.mul(bi);
            let bi3 = bi2.mul(bi);
            let pp = p.clone() + p.inv().unwrap();
            bi3.mul(bj)
                .sub(&bi2.mul(bj).mul(bi).scale(c))
                .add(&bi.mul(bj).mul(&bi2).scale(c))
                .sub(&bj.mul(&bi3))
                .sub(&bi.commutator(bj).scale(&(pp.clone() * pp)))
        }
        _ => panic!("unsupported Cartan entry {aij}"),
    }
}

pub fn onsager_coefficient(aij: i32, p: &Scalar) -> Scalar {
    let s = p.powi(2) + p.powi(-2);
    if aij == -2 {
        s + Scalar::one()
    } else {
        s
    }
}

pub fn check_onsager_relations(b: &[Operator], cartan: &[Vec<i32>], params: &Params) -> Report {
    let mut rep = Report::new();
    for (i, row) in cartan.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let c = onsager_coefficient(a, &params.p);
            let res = onsager_residual(&b[i], &b[j], a, &c, &params.p);
            rep.push(
                format!("onsager ({i},{j})"),
                format!("modified p-Serre relation a_ij = {a}"),
                res.is_zero(),
                describe_diff(&res, &Operator::zero(res.n)),
            );
        }
    }
    rep
}

/// Coefficients `κ_0, …, κ_{n'}` of the spin-reversal symmetric Hamiltonian.
pub fn hamiltonian_coeffs(spec: &CoideaSpec, params: &Params) -> Result<Vec<Scalar>> {
    if !spec.has_hamiltonian() {
        return Err(Error::Spec(format!("no Hamiltonian recipe for {}", spec.label())));
    }
    let n = spec.fam.n;
    let one = Scalar::one();
    let two = sci(2);
    let t = params.t_scalar();
    let end = -(params.mu_s() * (t.clone() + t.inv().unwrap()));
    let mut kap = vec![two; spec.fam.nodes()];
    match spec.fam.tag {
        FamilyTag::A1 => kap.fill(one),
        FamilyTag::D2 => {
            kap.fill(one);
            kap[0] = end.clone() / sci(2);
            kap[n] = end / sci(2);
        }
        FamilyTag::B1 => {
            kap[0] = one.clone();
            kap[1] = one;
            kap[n] = end;
        }
        FamilyTag::Bt1 => {
            kap[0] = end;
            kap[n - 1] = one.clone();
            kap[n] = one;
        }
        FamilyTag::D1 => {
            kap[0] = one.clone();
            kap[1] = one.clone();
            kap[n - 1] = one.clone();
            kap[n] = one;
        }
    }
    Ok(kap)
}

/// `Σ κ_i b_i`.
pub fn combine(b: &[Operator], kappa: &[Scalar]) -> Operator {
    b.iter()
        .zip(kappa)
        .fold(Operator::zero(b[0].n), |acc, (bi, k)| acc.add(&bi.scale(k)))
}

pub fn hamiltonian(spec: &CoideaSpec, params: &Params) -> Result<Operator> {
    let kappa = hamiltonian_coeffs(spec, params)?;
    Ok(combine(&onsager_generators(spec, params), &kappa))
}

/// Periodic chain with a separate twist `z_i` on every bond.
pub fn hamiltonian_multi(zs: &[Scalar], params: &Params) -> Result<Operator> {
    let n = zs.len();
    if n < 3 {
        return Err(Error::Range(format!("need n >= 3, got {n}")));
    }
    if let Some(i) = zs.iter().position(|z| z.is_zero()) {
        return Err(Error::ZeroParameter(i));
    }
    let sp = Spins { n };
    let qs4 = params.qsum() / sci(4);
    let mut h = sp.id(&(params.gamma() * sci(n as i64)));
    for (i, z) in zs.iter().enumerate() {
        let (a, b) = if i == 0 { (n, 1) } else { (i, i + 1) };
        h = h.add(&sp.hop(a, b, &z.inv().unwrap())).add(&sp.zz(a, b).scale(&qs4));
    }
    Ok(h)
}

/// `σ^x X σ^x`.
pub fn spin_reverse(op: &Operator) -> Operator {
    let sx = global_sigma_x(op.n);
    sx.mul(op).mul(&sx)
}

/// Conjugate transpose.
pub fn adjoint(op: &Operator) -> Operator {
    op.transpose().map(|_, _, v| v.conj())
}

/// Temperley–Lieb generators `t_1, …, t_{n−1}`.
pub fn tl_generators(n: usize, params: &Params) -> Result<Vec<Operator>> {
    if n < 3 {
        return Err(Error::Range(format!("need n >= 3, got {n}")));
    }
    let sp = Spins { n };
    let qs4 = params.qsum() / sci(4);
    let qd4 = params.qdiff() / sci(4);
    Ok((1..n)
        .map(|i| {
            sp.hop(i, i + 1, &Scalar::one())
                .sub(&sp.zz(i, i + 1).scale(&qs4))
                .add(&sp.zlin(i, i + 1, -1).scale(&qd4))
                .add(&sp.id(&qs4))
        })
        .collect())
}

pub fn check_tl_relations(ts: &[Operator], params: &Params) -> Report {
    let mut rep = Report::new();
    let qs = params.qsum();
    for (i, ti) in ts.iter().enumerate() {
        let res = ti.mul(ti).sub(&ti.scale(&qs));
        rep.push(format!("t{0}^2 = [2] t{0}", i + 1), "Temperley-Lieb quadratic", res.is_zero(), "");
        for (j, tj) in ts.iter().enumerate() {
            if i == j {
                continue;
            }
            let (ok, what) = if i.abs_diff(j) == 1 {
                (ti.mul(tj).mul(ti) == *ti, "t_i t_j t_i = t_i")
            } else {
                (ti.commutator(tj).is_zero(), "[t_i, t_j] = 0")
            };
            rep.push(format!("TL ({},{})", i + 1, j + 1), what, ok, "");
        }
    }
    rep
}

/// Cartan matrix of the finite type `A_{m}` on `m` nodes.
pub fn finite_a_cartan(m: usize) -> Vec<Vec<i32>> {
    let mut a = vec![vec![0; m]; m];
    for i in 0..m {
        a[i][i] = 2;
        if i + 1 < m {
            a[i][i + 1] = -1;
            a[i + 1][i] = -1;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_params, rat, sc, unit_circle_point};
    use crate::spinrep::{check_defining_relations, generators};

    fn params() -> Params {
        make_params(rat(3, 7), sc(5, 11), 1, -1).unwrap()
    }

    #[test]
    fn routes_agree_everywhere_small() {
        for p in [params(), make_params(rat(2, 5), sc(-7, 3), -1, 1).unwrap()] {
            for tag in FamilyTag::ALL {
                for spec in CoideaSpec::all_for(tag, tag.min_n()).unwrap() {
                    let rep = check_routes_agree(&spec, &p);
                    assert!(rep.passed(), "{:?}", rep.first_failure());
                }
            }
            let v = CoideaSpec::cyclic_variant(Family::new(FamilyTag::A1, 4).unwrap()).unwrap();
            let rep = check_routes_agree(&v, &p);
            assert!(rep.passed(), "{:?}", rep.first_failure());
        }
    }

    #[test]
    fn relations_hold_small() {
        let p = params();
        for tag in FamilyTag::ALL {
            for spec in CoideaSpec::all_for(tag, tag.min_n()).unwrap() {
                let b = onsager_generators(&spec, &p);
                let rep = check_onsager_relations(&b, &spec.fam.cartan, &p);
                assert!(rep.passed(), "{}: {:?}", spec.label(), rep.first_failure());
            }
        }
    }

    #[test]
    fn nine_plus_one_specs() {
        let total: usize = FamilyTag::ALL.iter().map(|&t| CoideaSpec::all_for(t, 3).unwrap().len()).sum();
        assert_eq!(total, 10);
        let fam = Family::new(FamilyTag::B1, 3).unwrap();
        assert!(CoideaSpec::new(fam, 1, 1).is_err());
    }

    #[test]
    fn wrong_coefficient_fails() {
        let p = params();
        let spec = CoideaSpec::new(Family::new(FamilyTag::D2, 2).unwrap(), 1, 1).unwrap();
        let b = onsager_generators(&spec, &p);
        let c = onsager_coefficient(-1, &p.p) + Scalar::one();
        assert!(!onsager_residual(&b[1], &b[0], -1, &c, &p.p).is_zero());
        let c = onsager_coefficient(-2, &p.p);
        assert!(onsager_residual(&b[0], &b[1], -2, &c, &p.p).is_zero());
    }

    #[test]
    fn b_n_field_display() {
        let p = params();
        let spec = CoideaSpec::new(Family::new(FamilyTag::D2, 2).unwrap(), 1, 1).unwrap();
        let b = onsager_generators(&spec, &p);
        // (t, μ) = (3/7, −1): μ(t − t^{−1})/2 = 20/21 and the constant is −μ(t−t⁻¹)(t²−t⁻²)/(2(t²+t⁻²)).
        let t = sc(3, 7);
        let ti = sc(7, 3);
        let field = (ti.clone() - &t) / sci(2);
        assert_eq!(field, sc(20, 21));
        let t2 = t.powi(2);
        let ti2 = ti.powi(2);
        let cst = (t.clone() - &ti) * (t2.clone() - &ti2) / (sci(2) * (t2 + ti2));
        // σ^z_2 on |α_2 = 1⟩ is +1.
        assert_eq!(b[2].get(0b10, 0b10), field.clone() + &cst);
        assert_eq!(b[2].get(0b00, 0b00), -field + &cst);
        assert_eq!(b[2].get(0b00, 0b10), Scalar::one());
    }

    #[test]
    fn hamiltonian_constants_and_symmetry() {
        let p = params();
        for tag in FamilyTag::ALL {
            for n in [tag.min_n(), 4] {
                for spec in CoideaSpec::all_for(tag, n).unwrap() {
                    let Ok(h) = hamiltonian(&spec, &p) else {
                        assert!(!spec.has_hamiltonian());
                        continue;
                    };
                    let h_inv = hamiltonian(&spec, &p.with_z(p.z.inv().unwrap())).unwrap();
                    assert_eq!(spin_reverse(&h), h_inv, "{}", spec.label());
                }
            }
        }
        // constant term of H_{2,2}: trace / 2^n = (2n − 2)Γ
        let spec = CoideaSpec::all_for(FamilyTag::D1, 3).unwrap().remove(0);
        let h = hamiltonian(&spec, &p).unwrap();
        let tr = (0..8).fold(Scalar::zero(), |acc, a| acc + h.get(a, a));
        assert_eq!(tr / sci(8), p.gamma() * sci(4));
    }

    #[test]
    fn h11_display() {
        let p = params();
        let n = 3;
        let spec = CoideaSpec::new(Family::new(FamilyTag::D2, n).unwrap(), 1, 1).unwrap();
        let h = hamiltonian(&spec, &p).unwrap();
        let sp = Spins { n };
        let t = p.t_scalar();
        let c = -(p.mu_s() * (t.clone() + t.inv().unwrap())) / sci(2);
        let t2 = t.powi(2);
        let bulkzz = -(t2.clone() + t2.inv().unwrap()) / sci(4);
        let mut want = field_end(&sp, 1, &p.z, 0, false, &p)
            .add(&sp.s(SpinKind::X, n))
            .scale(&c)
            .add(&sp.id(&(p.gamma() * sci(n as i64 + 1))));
        for i in 1..n {
            want = want.add(&sp.hop(i, i + 1, &Scalar::one())).add(&sp.zz(i, i + 1).scale(&bulkzz));
        }
        assert_eq!(h, want);
    }

    #[test]
    fn multi_reduces_and_reverses() {
        let p = params();
        let fam = Family::new(FamilyTag::A1, 3).unwrap();
        let h = hamiltonian(&CoideaSpec::cyclic(fam).unwrap(), &p).unwrap();
        let m = hamiltonian_multi(&[p.z.clone(), sci(1), sci(1)], &p).unwrap();
        assert_eq!(h, m);
        let uniform = hamiltonian_multi(&vec![p.z.clone(); 3], &p).unwrap();
        assert_ne!(h, uniform);
        let zs = [sci(2), sci(3), sci(5)];
        let hm = hamiltonian_multi(&zs, &p).unwrap();
        let inv: Vec<_> = zs.iter().map(|z| z.inv().unwrap()).collect();
        assert_eq!(spin_reverse(&hm), hamiltonian_multi(&inv, &p).unwrap());
        assert_ne!(adjoint(&hm), hm);
        assert_eq!(hamiltonian_multi(&[sci(1), Scalar::zero(), sci(1)], &p), Err(Error::ZeroParameter(1)));
    }

    #[test]
    fn hermitian_on_unit_circle() {
        for (a, b, t) in [(2, 1, rat(3, 7)), (3, -4, rat(5, 2))] {
            let z = unit_circle_point(a, b).unwrap();
            let p = make_params(t, z, 1, 1).unwrap();
            let spec = CoideaSpec::cyclic(Family::new(FamilyTag::A1, 4).unwrap()).unwrap();
            let h = hamiltonian(&spec, &p).unwrap();
            assert_eq!(adjoint(&h), h);
            for b in onsager_generators(&spec, &p) {
                assert_eq!(adjoint(&b), b);
            }
        }
    }

    #[test]
    fn temperley_lieb() {
        let p = params();
        for n in 3..=5 {
            let ts = tl_generators(n, &p).unwrap();
            let rep = check_tl_relations(&ts, &p);
            assert!(rep.passed(), "{:?}", rep.first_failure());
            let shift = p.qsum().inv().unwrap();
            let bs: Vec<_> = ts.iter().map(|t| t.shift(&-shift.clone())).collect();
            let rep = check_onsager_relations(&bs, &finite_a_cartan(n - 1), &p);
            assert!(rep.passed(), "{:?}", rep.first_failure());
        }
    }

    #[test]
    fn tl_matches_variant_bulk() {
        let p = params();
        let fam = Family::new(FamilyTag::A1, 4).unwrap();
        let b = onsager_generators(&CoideaSpec::cyclic_variant(fam.clone()).unwrap(), &p);
        let ts = tl_generators(4, &p).unwrap();
        let shift = p.qsum().inv().unwrap();
        for i in 1..4 {
            assert_eq!(b[i].shift(&shift), ts[i - 1]);
        }
        let rep = check_defining_relations(&fam, &generators(&fam, &p), &p);
        assert!(rep.passed());
    }

    #[test]
    fn pair_end_sign_is_forced() {
        let p = params();
        let spec = CoideaSpec::new(Family::new(FamilyTag::B1, 3).unwrap(), 2, 1).unwrap();
        let mut b = pauli_generators(&spec, &p);
        let sp = Spins { n: 3 };
        assert!(check_onsager_relations(&b, &spec.fam.cartan, &p).passed());
        b[0] = b[0].add(&sp.zz(1, 2).scale(&(p.qsum() / sci(2))));
        assert!(!check_onsager_relations(&b, &spec.fam.cartan, &p).passed());
    }
}
