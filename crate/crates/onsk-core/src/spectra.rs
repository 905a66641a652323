//! Eigenvalue closed forms of the K matrices and exact spectral certificates.
//!
//! Every displayed eigenvalue is a ratio of infinite products `(c x; b)_∞`.
//! [`ProductForm`] keeps such a ratio symbolically in powers of `t` and
//! reduces it to a finite product by pairing symbols whose arguments differ by
//! an integral power of the base. Spectral claims are certified by an
//! annihilating polynomial plus exact ranks of `M − λ`.

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{rat, Field, Params, Rational, Scalar};
use crate::kmatrix::{build_kkk, build_ktr};
use crate::linalg::{annihilated_by, dense_mul, dense_shift, rank_scalar};
use crate::spinrep::popcount;

/// `(c · t^tpow · z^zpow ; b · t^bpow)_∞` with `c = sign`, `b = bsign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Poch {
    pub sign: i8,
    pub tpow: i64,
    pub zpow: i64,
    pub bsign: i8,
    pub bpow: i64,
}

impl Poch {
    /// `(sign · q^qpow z^zpow ; q^qbase)_∞` rewritten through `q = −t²`.
    pub fn q(sign: i8, qpow: i64, zpow: i64, qbase: i64) -> Poch {
        let par = |e: i64| if e.rem_euclid(2) == 0 { 1 } else { -1 };
        Poch { sign: sign * par(qpow), tpow: 2 * qpow, zpow, bsign: par(qbase), bpow: 2 * qbase }
    }

    /// `(sign · t^tpow z^zpow ; t^tbase)_∞`.
    pub fn t(sign: i8, tpow: i64, zpow: i64, tbase: i64) -> Poch {
        Poch { sign, tpow, zpow, bsign: 1, bpow: tbase }
    }

    /// `m` with `self = other · b^m` in the argument, if any.
    fn offset(&self, other: &Poch) -> Option<i64> {
        if (self.zpow, self.bsign, self.bpow) != (other.zpow, other.bsign, other.bpow) || self.bpow == 0 {
            return None;
        }
        let d = self.tpow - other.tpow;
        if d % self.bpow != 0 {
            return None;
        }
        let m = d / self.bpow;
        let s = if self.bsign < 0 && m.rem_euclid(2) == 1 { -1 } else { 1 };
        (self.sign == other.sign * s).then_some(m)
    }

    fn arg(&self, t: &Scalar, z: &Scalar) -> Scalar {
        sgn(self.sign) * t.powi(self.tpow) * z.powi(self.zpow)
    }

    fn base(&self, t: &Scalar) -> Scalar {
        sgn(self.bsign) * t.powi(self.bpow)
    }

    /// The first `len` factors.
    fn finite(&self, len: usize, t: &Scalar, z: &Scalar) -> Scalar {
        let b = self.base(t);
        let mut x = self.arg(t, z);
        let mut acc = Scalar::one();
        for _ in 0..len {
            acc = acc * (Scalar::one() - &x);
            x = x * &b;
        }
        acc
    }
}

fn sgn(s: i8) -> Scalar {
    Scalar::from_i64(s as i64)
}

/// `sign · t^tpow · z^zpow · Π num / Π den`, all infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductForm {
    pub sign: i8,
    pub tpow: i64,
    pub zpow: i64,
    pub num: Vec<Poch>,
    pub den: Vec<Poch>,
}

/// A finite product `(c x; b)_len^{power}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteFactor {
    pub poch: Poch,
    pub len: usize,
    pub power: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteForm {
    pub sign: i8,
    pub tpow: i64,
    pub zpow: i64,
    pub factors: Vec<FiniteFactor>,
}

impl ProductForm {
    /// Pair every numerator symbol with a denominator symbol on the same lattice.
    pub fn reduce(&self) -> Result<FiniteForm> {
        let mut den: Vec<Option<Poch>> = self.den.iter().copied().map(Some).collect();
        let mut factors = vec![];
        for p in &self.num {
            let hit = den.iter().position(|d| d.is_some_and(|d| p.offset(&d).is_some()));
            let Some(i) = hit else {
                return Err(Error::LedgerResidue(format!("unpaired numerator {p:?}")));
            };
            let d = den[i].take().unwrap();
            let m = p.offset(&d).unwrap();
            // (d b^m; b)/(d; b) = 1/(d; b)_m, and for m < 0 it is (p; b)_{−m}
            if m >= 0 {
                factors.push(FiniteFactor { poch: d, len: m as usize, power: -1 });
            } else {
                factors.push(FiniteFactor { poch: *p, len: (-m) as usize, power: 1 });
            }
        }
        if let Some(d) = den.into_iter().flatten().next() {
            return Err(Error::LedgerResidue(format!("unpaired denominator {d:?}")));
        }
        factors.retain(|f| f.len > 0);
        Ok(FiniteForm { sign: self.sign, tpow: self.tpow, zpow: self.zpow, factors })
    }

    /// Each infinite product cut after `terms` factors.
    pub fn truncated(&self, terms: usize, t: &Scalar, z: &Scalar) -> Result<Scalar> {
        let mut acc = sgn(self.sign) * t.powi(self.tpow) * z.powi(self.zpow);
        for p in &self.num {
            acc = acc * p.finite(terms, t, z);
        }
        for p in &self.den {
            acc = acc * p.finite(terms, t, z).inv().ok_or(Error::Pole { exponent: p.tpow, context: " (truncated)".into() })?;
        }
        Ok(acc)
    }
}

impl FiniteForm {
    pub fn eval(&self, t: &Scalar, z: &Scalar) -> Result<Scalar> {
        let mut acc = sgn(self.sign) * t.powi(self.tpow) * z.powi(self.zpow);
        for f in &self.factors {
            let v = f.poch.finite(f.len, t, z);
            acc = if f.power > 0 {
                acc * v
            } else {
                acc * v.inv().ok_or(Error::Pole { exponent: f.poch.tpow, context: format!(" in {:?}", f.poch) })?
            };
        }
        Ok(acc)
    }
}

fn monomial(c: i64, tpow: i64, zpow: i64) -> String {
    let mut parts = vec![];
    if tpow != 0 {
        parts.push(if tpow == 1 { "t".to_string() } else { format!("t^{tpow}") });
    }
    if zpow != 0 {
        parts.push(if zpow == 1 { "z".to_string() } else { format!("z^{zpow}") });
    }
    let body = parts.join(" ");
    match (c, body.is_empty()) {
        (1, true) => "1".into(),
        (-1, true) => "-1".into(),
        (1, false) => body,
        (-1, false) => format!("-{body}"),
        (c, true) => c.to_string(),
        (c, false) => format!("{c} {body}"),
    }
}

impl std::fmt::Display for FiniteForm {
    /// Expanded over linear factors `(1 − c t^a z^b)`; a pair `(1 − x)/(1 − 1/x)` is folded into `−x`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (mut num, mut den) = (vec![], vec![]);
        for ff in &self.factors {
            let p = ff.poch;
            for k in 0..ff.len as i64 {
                let c = p.sign as i64 * if p.bsign < 0 && k % 2 == 1 { -1 } else { 1 };
                let lin = (c, p.tpow + k * p.bpow, p.zpow);
                if ff.power > 0 { num.push(lin) } else { den.push(lin) }
            }
        }
        let (mut sign, mut tpow, mut zpow) = (self.sign as i64, self.tpow, self.zpow);
        num.retain(|&(c, a, b)| match den.iter().position(|&x| x == (c, -a, -b)) {
            Some(i) => {
                den.remove(i);
                sign *= -c;
                tpow += a;
                zpow += b;
                false
            }
            None => true,
        });
        let lin = |&(c, a, b): &(i64, i64, i64)| {
            let m = monomial(1, a, b);
            if c > 0 { format!("(1-{m})") } else { format!("(1+{m})") }
        };
        let lead = monomial(sign, tpow, zpow);
        let num: String = num.iter().map(lin).collect();
        let mut out = match (num.is_empty(), lead.as_str()) {
            (true, _) => lead.clone(),
            (false, "1") => num,
            (false, "-1") => format!("-{num}"),
            (false, _) => format!("{lead} {num}"),
        };
        if !den.is_empty() {
            let d: String = den.iter().map(lin).collect();
            out = if den.len() > 1 { format!("{out}/({d})") } else { format!("{out}/{d}") };
        }
        write!(f, "{out}")
    }
}

/// `ρ_{l,j}` written out in `q` and the variable `var`.
pub fn rho_form(n: usize, l: usize, j: usize, var: &str) -> String {
    let a = (idx(n) - 2 * idx(l)).abs();
    let d = (idx(l) - idx(j)).abs();
    if d == 0 {
        return "1".into();
    }
    let (mut num, mut den) = (String::new(), String::new());
    for s in 0..d {
        let e = a + 2 + 2 * s;
        num += &format!("(q^{e}-{var})");
        den += &format!("(1-q^{e} {var})");
    }
    if d == 1 {
        format!("{num}/{den}")
    } else {
        format!("{num}/({den})")
    }
}

/// Which K matrix an eigenvalue belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Spectrum {
    Tr,
    K11,
    K21,
    K12,
    K22,
}

fn idx(x: usize) -> i64 {
    x as i64
}

/// `ρ_{l,j}(z)` as the displayed ratio of infinite products.
pub fn rho_display(n: usize, l: usize, j: usize) -> ProductForm {
    let a = (idx(n) - 2 * idx(l)).abs();
    let b = (idx(n) - 2 * idx(j)).abs();
    let d = (idx(l) - idx(j)).abs();
    ProductForm {
        sign: if d % 2 == 0 { 1 } else { -1 },
        tpow: 0,
        zpow: d,
        num: vec![Poch::q(1, a + 2, -1, 2), Poch::q(1, b + 2, 1, 2)],
        den: vec![Poch::q(1, a + 2, 1, 2), Poch::q(1, b + 2, -1, 2)],
    }
}

fn in_wedge(n: usize, l: usize, j: usize) -> bool {
    l <= n && j <= n && (2 * l == n || (2 * l < n && j <= l) || (2 * l > n && l <= j))
}

/// `ρ_{l,j}(z) = Π_{s<|l−j|} (q^{a+2+2s} − z)/(1 − q^{a+2+2s} z)` with `a = |n − 2l|`.
pub fn eval_rho_tr(n: usize, l: usize, j: usize, z: &Scalar, params: &Params) -> Result<Scalar> {
    if !in_wedge(n, l, j) {
        return Err(Error::Range(format!("(n,l,j) = ({n},{l},{j}) outside the wedge")));
    }
    let a = (idx(n) - 2 * idx(l)).abs();
    let mut acc = Scalar::one();
    for s in 0..(idx(l) - idx(j)).abs() {
        let x = params.qpow(a + 2 + 2 * s);
        let den = (Scalar::one() - x.clone() * z).inv().ok_or(Error::Pole { exponent: a + 2 + 2 * s, context: " in ρ".into() })?;
        acc = acc * (x - z) * den;
    }
    Ok(acc)
}

/// Eigenvalue of `K_tr(z)` on `W_{n/2,j}` for even `n`: `(−1)^j ρ_{n/2,j}(z)`.
pub fn eval_tr_half(n: usize, j: usize, z: &Scalar, params: &Params) -> Result<Scalar> {
    if n % 2 == 1 {
        return Err(Error::Range(format!("n = {n} is odd")));
    }
    let r = eval_rho_tr(n, n / 2, j, z, params)?;
    Ok(if j.is_multiple_of(2) { r } else { -r })
}

/// `Π_{j=1}^{m} (q^j + z)/(1 + q^j z)` with `m = 2l − n` for `l ≥ [(n+1)/2]` and `m = n − 1 − 2l` otherwise.
pub fn eval_k11(n: usize, l: usize, z: &Scalar, params: &Params) -> Result<Scalar> {
    if l > n {
        return Err(Error::Range(format!("l = {l} > n = {n}")));
    }
    let m = if l >= n.div_ceil(2) { 2 * l - n } else { n - 1 - 2 * l };
    let mut acc = Scalar::one();
    for j in 1..=m {
        let x = params.qpow(j as i64);
        let den = (Scalar::one() + x.clone() * z).inv().ok_or(Error::Pole { exponent: j as i64, context: " in K11 eigenvalue".into() })?;
        acc = acc * (x + z) * den;
    }
    Ok(acc)
}

/// Eigenvalue of `K_{1,1}(z)` on `X_l`.
pub fn k11_display(n: usize, l: usize) -> ProductForm {
    let m = idx(n) - 2 * idx(l);
    ProductForm {
        sign: 1,
        tpow: 0,
        zpow: m,
        num: vec![Poch::q(-1, m + 1, 1, 1), Poch::q(-1, 1, -1, 1)],
        den: vec![Poch::q(-1, 1, 1, 1), Poch::q(-1, m + 1, -1, 1)],
    }
}

/// Eigenvalue of `K_{2,1}(z)` on `X_l`.
///
/// For even `n` the last denominator is taken over base `q^4`; over base `q` the
/// ratio does not reduce to a rational function.
pub fn k21_display(n: usize, l: usize) -> ProductForm {
    let e = 2 * idx(n) + 3 - 4 * idx(l);
    let (zp, c) = if n.is_multiple_of(2) { (idx(n) - 2 * idx(l), 3) } else { (idx(n) + 1 - 2 * idx(l), 1) };
    ProductForm {
        sign: 1,
        tpow: 0,
        zpow: zp,
        num: vec![Poch::q(-1, e, 2, 4), Poch::q(-1, c, -2, 4)],
        den: vec![Poch::q(-1, c, 2, 4), Poch::q(-1, e, -2, 4)],
    }
}

/// Eigenvalue of `K_{1,2}(z)` on `Y_l`.
pub fn k12_display(n: usize, l: usize) -> ProductForm {
    let (n, l) = (idx(n), idx(l));
    let (e, f, zp) = if n % 2 == 0 { (2 * n + 1 - 4 * l, -2 * n + 1 + 4 * l, 0) } else { (2 * n + 3 - 4 * l, -2 * n + 3 + 4 * l, 1) };
    ProductForm {
        sign: 1,
        tpow: 0,
        zpow: zp,
        num: vec![Poch::t(-1, 1, -1, 4), Poch::t(-1, e, 1, 4), Poch::t(1, 1, -1, 4), Poch::t(1, f, 1, 4)],
        den: vec![Poch::t(-1, e, -1, 4), Poch::t(-1, 1, 1, 4), Poch::t(1, f, -1, 4), Poch::t(1, 1, 1, 4)],
    }
}

/// Eigenvalue of `K_{2,2}(z)` on `Z^±_l` (`n` even) or of the `P^±_l` blocks (`n` odd).
pub fn k22_display(n: usize, l: usize) -> ProductForm {
    let (n, l) = (idx(n), idx(l));
    let e = 2 * n + 2 - 4 * l;
    let f = 4 - e;
    if n % 2 == 0 {
        ProductForm {
            sign: 1,
            tpow: 0,
            zpow: 0,
            num: vec![Poch::t(-1, 2, -1, 4), Poch::t(-1, e, 1, 4), Poch::t(1, 2, -1, 4), Poch::t(1, f, 1, 4)],
            den: vec![Poch::t(-1, e, -1, 4), Poch::t(-1, 2, 1, 4), Poch::t(1, f, -1, 4), Poch::t(1, 2, 1, 4)],
        }
    } else {
        ProductForm {
            sign: -1,
            tpow: 1,
            zpow: -1,
            num: vec![Poch::t(-1, 4, -1, 4), Poch::t(-1, e, 1, 4), Poch::t(1, 4, -1, 4), Poch::t(1, f, 1, 4)],
            den: vec![Poch::t(-1, e, -1, 4), Poch::t(-1, 0, 1, 4), Poch::t(1, f, -1, 4), Poch::t(1, 0, 1, 4)],
        }
    }
}

/// Certified outcome for one eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct EigenLine {
    pub label: String,
    /// Exact value at the sample point.
    pub value: String,
    pub approx: String,
    pub observed: usize,
    pub expected: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub spectrum: Spectrum,
    pub n: usize,
    pub dim: usize,
    /// `Π (M − λ) = 0` exactly.
    pub annihilated: bool,
    pub lines: Vec<EigenLine>,
    pub extra: Vec<(String, bool)>,
}

impl SpectralReport {
    pub fn passed(&self) -> bool {
        self.annihilated
            && self.lines.iter().all(|l| l.ok)
            && self.extra.iter().all(|(_, ok)| *ok)
            && self.lines.iter().map(|l| l.expected).sum::<usize>() == self.dim
    }
}

type Dense = Vec<Vec<Scalar>>;

/// Annihilator and eigenspace dimensions for `m` against `(label, λ, expected multiplicity)`.
///
/// Once `Π (m − λ) = 0` with distinct `λ`, `m` is diagonalisable and the
/// multiplicity of `λ_j` is `d − rank(m − λ_j)`.
pub fn certify(m: &Dense, eig: &[(String, Scalar, usize)]) -> Result<(bool, Vec<EigenLine>)> {
    for (i, a) in eig.iter().enumerate() {
        for b in &eig[i + 1..] {
            if a.1 == b.1 {
                return Err(Error::DegenerateEigenvalues(format!("{} = {}", a.0, b.0)));
            }
        }
    }
    let d = m.len();
    let lines: Vec<EigenLine> = eig
        .par_iter()
        .map(|(label, v, expected)| {
            let observed = d - rank_scalar(&dense_shift(m, &-v.clone()));
            EigenLine { label: label.clone(), value: v.to_string(), approx: short(v), observed, expected: *expected, ok: observed == *expected }
        })
        .collect();
    let vals: Vec<Scalar> = eig.iter().map(|e| e.1.clone()).collect();
    Ok((annihilated_by(m, &vals), lines))
}

fn short(v: &Scalar) -> String {
    let (re, im) = v.to_f64_pair();
    if im == 0.0 {
        format!("{re:.12e}")
    } else {
        format!("{re:.12e}{im:+.12e}i")
    }
}

fn dense_block(op: &crate::Operator, rows: &[usize], cols: &[usize]) -> Dense {
    op.block(rows, cols)
}

fn binom(n: usize, k: i64) -> usize {
    if k < 0 || k as usize > n {
        return 0;
    }
    let k = k as usize;
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim W_{l,j}`.
pub fn w_dim(n: usize, l: usize, j: usize) -> usize {
    let j = j as i64;
    if 2 * l <= n {
        binom(n, j) - binom(n, j - 1)
    } else {
        binom(n, j) - binom(n, j + 1)
    }
}

/// The `j` with `W_{l,j} ⊂ V_l`.
pub fn wedge(n: usize, l: usize) -> Vec<usize> {
    if 2 * l <= n {
        (0..=l).collect()
    } else {
        (l..=n).collect()
    }
}

fn sector(n: usize, l: usize) -> Vec<usize> {
    (0..1usize << n).filter(|a| popcount(*a) == l).collect()
}

/// `K_tr(w) K_tr(z)` on `V_l` against `ρ_{l,j}(z) ρ_{n−l,n−j}(w)`; for `l = n/2` also `K_tr(z)` itself.
pub fn verify_tr_spectrum(n: usize, l: usize, z: &Scalar, w: &Scalar, params: &Params) -> Result<SpectralReport> {
    if l > n {
        return Err(Error::Range(format!("l = {l} > n = {n}")));
    }
    let kz = build_ktr(n, z, params)?;
    let kw = build_ktr(n, w, params)?;
    let vl = sector(n, l);
    let m = dense_block(&kw.op.mul(&kz.op), &vl, &vl);
    let mut eig = vec![];
    for j in wedge(n, l) {
        let v = eval_rho_tr(n, l, j, z, params)? * eval_rho_tr(n, n - l, n - j, w, params)?;
        eig.push((format!("j={j}"), v, w_dim(n, l, j)));
    }
    let (annihilated, lines) = certify(&m, &eig)?;
    let mut extra = vec![];
    if 2 * l == n {
        let m = dense_block(&kz.op, &vl, &vl);
        let eig: Vec<_> = wedge(n, l)
            .into_iter()
            .map(|j| Ok((format!("j={j}"), eval_tr_half(n, j, z, params)?, w_dim(n, l, j))))
            .collect::<Result<_>>()?;
        let (ann, ls) = certify(&m, &eig)?;
        extra.push(("K_tr(z) on V_{n/2} annihilated".to_string(), ann));
        extra.extend(ls.into_iter().map(|x| (format!("K_tr(z) on V_{{n/2}} rank {}", x.label), x.ok)));
    }
    Ok(SpectralReport { spectrum: Spectrum::Tr, n, dim: vl.len(), annihilated, lines, extra })
}

/// Closed form of a boundary eigenvalue through the finite reduction of its display.
pub fn eval_boundary(spec: Spectrum, n: usize, l: usize, z: &Scalar, params: &Params) -> Result<Scalar> {
    let form = match spec {
        Spectrum::K11 => k11_display(n, l),
        Spectrum::K21 => k21_display(n, l),
        Spectrum::K12 => k12_display(n, l),
        Spectrum::K22 => k22_display(n, l),
        Spectrum::Tr => return Err(Error::Spec("use eval_rho_tr".into())),
    };
    form.reduce()?.eval(&params.t_scalar(), z)
}

/// Reduced closed form of a boundary eigenvalue, in `t` and `z`.
pub fn boundary_form(spec: Spectrum, n: usize, l: usize) -> Result<String> {
    let form = match spec {
        Spectrum::K11 => k11_display(n, l),
        Spectrum::K21 => k21_display(n, l),
        Spectrum::K12 => k12_display(n, l),
        Spectrum::K22 => k22_display(n, l),
        Spectrum::Tr => return Err(Error::Spec("use rho_form".into())),
    };
    Ok(form.reduce()?.to_string())
}

/// Joint spectral certificate for `K_{1,1}(z)` and `K_{2,1}(w)`.
pub fn verify_k11_k21_joint(n: usize, z: &Scalar, w: &Scalar, params: &Params) -> Result<SpectralReport> {
    let all: Vec<usize> = (0..1usize << n).collect();
    let a = dense_block(&build_kkk(1, 1, n, z, params)?.op, &all, &all);
    let b = dense_block(&build_kkk(2, 1, n, w, params)?.op, &all, &all);
    let la: Vec<Scalar> = (0..=n).map(|l| eval_boundary(Spectrum::K11, n, l, z, params)).collect::<Result<_>>()?;
    let lb: Vec<Scalar> = (0..=n).map(|l| eval_boundary(Spectrum::K21, n, l, w, params)).collect::<Result<_>>()?;
    let eig = |vals: &[Scalar], tag: &str| -> Vec<(String, Scalar, usize)> {
        vals.iter().enumerate().map(|(l, v)| (format!("{tag} l={l}"), v.clone(), binom(n, l as i64))).collect()
    };
    let (ann_a, mut lines) = certify(&a, &eig(&la, "K11"))?;
    let (ann_b, lines_b) = certify(&b, &eig(&lb, "K21"))?;
    lines.extend(lines_b);
    // equal eigenspaces, hence equal spectral projectors: both kernels have
    // the dimension of their intersection
    let mut extra: Vec<(String, bool)> = (0..=n)
        .into_par_iter()
        .map(|l| {
            let fa = dense_shift(&a, &-la[l].clone());
            let fb = dense_shift(&b, &-lb[l].clone());
            let ra = rank_scalar(&fa);
            let stacked: Dense = fa.into_iter().chain(fb.iter().cloned()).collect();
            (format!("P11_{l} = P21_{l}"), ra == rank_scalar(&fb) && ra == rank_scalar(&stacked))
        })
        .collect();
    let ab = dense_mul(&a, &b);
    extra.push(("[K11(z), K21(w)] = 0".into(), ab == dense_mul(&b, &a)));
    Ok(SpectralReport { spectrum: Spectrum::K11, n, dim: 2 * all.len(), annihilated: ann_a && ann_b, lines, extra })
}

/// Certificates for `K_{1,2}(z)` and `K_{2,2}(z)`, including the parity-sector relations.
pub fn verify_k12_k22(n: usize, z: &Scalar, params: &Params) -> Result<SpectralReport> {
    let all: Vec<usize> = (0..1usize << n).collect();
    let k12 = dense_block(&build_kkk(1, 2, n, z, params)?.op, &all, &all);
    let k22op = build_kkk(2, 2, n, z, params)?.op;
    let l12: Vec<Scalar> = (0..=n).map(|l| eval_boundary(Spectrum::K12, n, l, z, params)).collect::<Result<_>>()?;
    let eig12: Vec<_> = l12.iter().enumerate().map(|(l, v)| (format!("K12 l={l}"), v.clone(), binom(n, l as i64))).collect();
    let (ann12, mut lines) = certify(&k12, &eig12)?;

    let half = n / 2;
    let l22: Vec<Scalar> = (0..=half)
        .map(|l| eval_boundary(Spectrum::K22, n, l, z, params))
        .collect::<Result<_>>()?;
    let mult = |l: usize| if n.is_multiple_of(2) && l == half { binom(n, l as i64) } else { 2 * binom(n, l as i64) };
    let k22 = dense_block(&k22op, &all, &all);
    let (m22, vals22): (Dense, Vec<Scalar>) =
        if n.is_multiple_of(2) { (k22.clone(), l22.clone()) } else { (dense_mul(&k22, &k22), l22.iter().map(|v| v.clone() * v).collect()) };
    let eig22: Vec<_> = vals22.iter().enumerate().map(|(l, v)| (format!("K22 l={l}"), v.clone(), mult(l))).collect();
    let (ann22, lines22) = certify(&m22, &eig22)?;
    lines.extend(lines22);

    let mut extra = vec![];
    let even = |a: &usize| popcount(*a).is_multiple_of(2);
    let parity_ok = k22op.entries().all(|(r, c, _)| (even(&r) == even(&c)) == n.is_multiple_of(2));
    extra.push((if n.is_multiple_of(2) { "K22 preserves V_±" } else { "K22 swaps V_±" }.to_string(), parity_ok));
    let t = params.t_scalar();
    let zm = -z.clone();
    for l in 0..l22.len() {
        let ev = k22_display(n, l).reduce()?;
        extra.push((format!("K22 l={l} even in z"), ev.eval(&t, z)? == ev.eval(&t, &zm)?));
    }
    // (Y_l + Y_{n−l}) ∩ V_± has dimension dim Z^±_l. Y_l + Y_{n−l} is the kernel of
    // (K12 − λ_l)(K12 − λ_{n−l}); intersecting with V_± keeps the V_± columns.
    for l in 0..=half {
        let mut f = dense_shift(&k12, &-l12[l].clone());
        let zdim = if n.is_multiple_of(2) && 2 * l == n {
            binom(n, l as i64) / 2
        } else {
            f = dense_mul(&f, &dense_shift(&k12, &-l12[n - l].clone()));
            binom(n, l as i64)
        };
        for (tag, keep) in [("+", true), ("-", false)] {
            let cols: Vec<usize> = all.iter().copied().filter(|a| even(a) == keep).collect();
            let restricted: Dense = f.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
            let r = cols.len() - rank_scalar(&restricted);
            extra.push((format!("dim (Y_{l} + Y_{}) ∩ V{tag} = {zdim}", n - l), r == zdim));
        }
    }
    let dim = lines.iter().map(|l| l.expected).sum();
    Ok(SpectralReport { spectrum: Spectrum::K12, n, dim, annihilated: ann12 && ann22, lines, extra })
}

/// Largest `|x − y|` bound used by the truncated-product check.
pub fn float_tolerance() -> Rational {
    rat(1, 10i64.pow(18)) * rat(1, 10i64.pow(7))
}

/// Finite reduction against the display cut after `terms` factors, at `(t, z)`.
pub fn check_truncated(form: &ProductForm, terms: usize, t: &Scalar, z: &Scalar) -> Result<bool> {
    let exact = form.reduce()?.eval(t, z)?;
    let approx = form.truncated(terms, t, z)?;
    Ok(crate::qboson::within(&exact, &approx, &float_tolerance()))
}

/// Run `f` at `params.z`; on colliding eigenvalues retry at up to four freshly sampled points.
pub fn with_resampling<T>(
    sampler: &mut crate::sample::Sampler,
    params: &Params,
    mut f: impl FnMut(&Params) -> Result<T>,
) -> Result<T> {
    let mut p = params.clone();
    let mut last = None;
    for _ in 0..5 {
        match f(&p) {
            Err(e @ Error::DegenerateEigenvalues(_)) => last = Some(e),
            other => return other,
        }
        p = p.with_z(sampler.scalar());
    }
    Err(last.unwrap())
}
