//! Tensor representations of `A_q(Sp_4)` on truncated q-boson Fock spaces and
//! the boundary-vector annihilation identities behind the 3D K invariance.
//!
//! The four tensor factors are `F_{q²} ⊗ F_q ⊗ F_{q²} ⊗ F_q`. Operators are kept
//! as sums of elementary tensors of letter words and act on finite vectors
//! without truncation, so identities on basis vectors are exact.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::field::Field;
use crate::report::Report;
use crate::{Error, Result, Scalar};

/// Fock space letter; the base (`q` or `q²`) is fixed by the tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Letter {
    Raise,
    Lower,
    K,
}

/// Product of letters, leftmost acts last.
pub type Word = Vec<Letter>;

/// Which Fock space a single-slot operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    /// `F_q`: `a^±`, `k`.
    Q,
    /// `F_{q²}`: `A^±`, `K`, with `A⁻|m⟩ = (1 − q^{4m})|m−1⟩`.
    Q2,
}

pub const SLOTS: [Base; 4] = [Base::Q2, Base::Q, Base::Q2, Base::Q];

/// Truncated Fock space data: cutoff and base.
#[derive(Clone, Debug)]
pub struct TruncatedFock {
    pub cutoff: usize,
    pub base: Base,
}

impl TruncatedFock {
    pub fn new(cutoff: usize, base: Base) -> Self {
        Self { cutoff, base }
    }

    /// The boundary vector `|η_k⟩` (base q) or `|χ_k⟩` (base q²) up to the cutoff.
    pub fn boundary_vector(&self, k: u8, q: &Scalar) -> Vec<Scalar> {
        crate::qboson::eta_components(k, self.cutoff + 1, &base_q(self.base, q))
    }
}

fn slot_powers(q: &Scalar, len: usize) -> [Powers; 4] {
    std::array::from_fn(|s| Powers::new(base_q(SLOTS[s], q), len))
}

fn base_q(b: Base, q: &Scalar) -> Scalar {
    match b {
        Base::Q => q.clone(),
        Base::Q2 => q.clone() * q,
    }
}

/// Cached powers of a slot base, extended on demand.
struct Powers {
    base: Scalar,
    table: Vec<Scalar>,
}

impl Powers {
    fn new(base: Scalar, len: usize) -> Self {
        let mut table = Vec::with_capacity(len);
        let mut x = Scalar::one();
        for _ in 0..len.max(1) {
            table.push(x.clone());
            x = x * &base;
        }
        Powers { base, table }
    }

    fn get(&self, k: u32) -> Scalar {
        match self.table.get(k as usize) {
            Some(x) => x.clone(),
            None => self.base.powi(k as i64),
        }
    }
}

/// Apply a word to `|m⟩`; `None` when the image vanishes.
fn word_on_basis(w: &[Letter], m: u32, bq: &Powers) -> Option<(Scalar, u32)> {
    let mut c = Scalar::one();
    let mut m = m;
    for l in w.iter().rev() {
        match l {
            Letter::Raise => m += 1,
            Letter::Lower => {
                if m == 0 {
                    return None;
                }
                c = c * (Scalar::one() - bq.get(2 * m));
                m -= 1;
            }
            Letter::K => c = c * bq.get(m),
        }
    }
    Some((c, m))
}

/// Apply a word to a dense vector; the output is dense and may be longer.
fn word_on_vector(w: &[Letter], v: &[Scalar], bq: &Scalar) -> Vec<Scalar> {
    let bq = &Powers::new(bq.clone(), 2 * (v.len() + w.len()) + 1);
    let up = w.iter().filter(|l| **l == Letter::Raise).count();
    let mut out = vec![Scalar::zero(); v.len() + up];
    for (m, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if let Some((c, m2)) = word_on_basis(w, m as u32, bq) {
            out[m2 as usize] = out[m2 as usize].clone() + c * x;
        }
    }
    out
}

/// Smallest `#raise − #lower` over the word, a lower bound on the net mode shift.
fn net_shift(w: &[Letter]) -> i64 {
    w.iter()
        .map(|l| match l {
            Letter::Raise => 1,
            Letter::Lower => -1,
            Letter::K => 0,
        })
        .sum()
}

fn word_string(w: &[Letter], base: Base) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|l| match (l, base) {
            (Letter::Raise, Base::Q) => "a+",
            (Letter::Lower, Base::Q) => "a-",
            (Letter::K, Base::Q) => "k",
            (Letter::Raise, Base::Q2) => "A+",
            (Letter::Lower, Base::Q2) => "A-",
            (Letter::K, Base::Q2) => "K",
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Single-slot operator: linear combination of words.
#[derive(Clone, Debug, Default)]
pub struct SlotOp {
    pub terms: Vec<(Scalar, Word)>,
}

impl SlotOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(c: Scalar, w: Word) -> Self {
        Self { terms: vec![(c, w)] }
    }

    pub fn one() -> Self {
        Self::word(Scalar::one(), vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn apply(&self, v: &[Scalar], base: Base, q: &Scalar) -> Vec<Scalar> {
        let bq = base_q(base, q);
        let mut out: Vec<Scalar> = Vec::new();
        for (c, w) in &self.terms {
            let r = word_on_vector(w, v, &bq);
            if out.len() < r.len() {
                out.resize(r.len(), Scalar::zero());
            }
            for (o, x) in out.iter_mut().zip(r) {
                *o = o.clone() + x * c;
            }
        }
        out
    }

    /// Highest mode at which `apply` is exact for an input truncated at `cutoff`.
    pub fn exact_limit(&self, cutoff: usize) -> i64 {
        cutoff as i64 + self.terms.iter().map(|(_, w)| net_shift(w)).min().unwrap_or(0).min(0)
    }
}

/// Entry `(i, j)` of `π_1(t)` (`which = 1`, on `F_q`) or `π_2(t)` (`which = 2`, on `F_{q²}`), with `ν = 1`.
pub fn pi_matrix(which: u8, i: usize, j: usize, q: &Scalar) -> Result<SlotOp> {
    if !(1..=4).contains(&i) || !(1..=4).contains(&j) {
        return Err(Error::Range(format!("t_{{{i}{j}}}")));
    }
    use Letter::*;
    let one = Scalar::one();
    let op = match (which, i, j) {
        (1, 1, 1) | (1, 3, 3) => SlotOp::word(one, vec![Lower]),
        (1, 2, 2) | (1, 4, 4) => SlotOp::word(one, vec![Raise]),
        (1, 1, 2) => SlotOp::word(one, vec![K]),
        (1, 2, 1) => SlotOp::word(-q.clone(), vec![K]),
        (1, 3, 4) => SlotOp::word(-one, vec![K]),
        (1, 4, 3) => SlotOp::word(q.clone(), vec![K]),
        (1, _, _) => SlotOp::zero(),
        (2, 1, 1) | (2, 4, 4) => SlotOp::one(),
        (2, 2, 2) => SlotOp::word(one, vec![Lower]),
        (2, 3, 3) => SlotOp::word(one, vec![Raise]),
        (2, 2, 3) => SlotOp::word(one, vec![K]),
        (2, 3, 2) => SlotOp::word(-q.clone() * q, vec![K]),
        (2, _, _) => SlotOp::zero(),
        _ => return Err(Error::Range(format!("representation π_{which}"))),
    };
    Ok(op)
}

/// Operator on the four-fold tensor product: sum of elementary tensors.
#[derive(Clone, Debug, Default)]
pub struct TensorOp4 {
    pub terms: Vec<(Scalar, [Word; 4])>,
}

impl TensorOp4 {
    pub fn elementary(c: Scalar, words: [Word; 4]) -> Self {
        Self { terms: vec![(c, words)] }
    }

    pub fn identity() -> Self {
        Self::elementary(Scalar::one(), Default::default())
    }

    pub fn add(mut self, other: &TensorOp4) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scale(mut self, c: &Scalar) -> Self {
        for (x, _) in &mut self.terms {
            *x = x.clone() * c;
        }
        self
    }

    pub fn mul(&self, other: &TensorOp4) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c, w) in &self.terms {
            for (d, v) in &other.terms {
                let words = std::array::from_fn(|s| [w[s].clone(), v[s].clone()].concat());
                terms.push((c.clone() * d, words));
            }
        }
        Self { terms }
    }

    /// Merge equal word tuples and drop zero coefficients.
    pub fn collect(&self) -> BTreeMap<[Word; 4], Scalar> {
        let mut m: BTreeMap<[Word; 4], Scalar> = BTreeMap::new();
        for (c, w) in &self.terms {
            let e = m.entry(w.clone()).or_insert_with(Scalar::zero);
            *e = e.clone() + c;
        }
        m.retain(|_, c| !c.is_zero());
        m
    }

    /// Largest number of raising or lowering letters in any slot of any term.
    pub fn max_shift(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(_, w)| w.iter().map(|x| x.iter().filter(|l| **l != Letter::K).count()))
            .max()
            .unwrap_or(0)
    }

    /// Action on a basis vector `|m_1, m_2, m_3, m_4⟩`.
    pub fn on_basis(&self, m: [u32; 4], q: &Scalar) -> BTreeMap<[u32; 4], Scalar> {
        self.on_basis_with(m, &slot_powers(q, 64))
    }

    fn on_basis_with(&self, m: [u32; 4], bq: &[Powers; 4]) -> BTreeMap<[u32; 4], Scalar> {
        let mut out: BTreeMap<[u32; 4], Scalar> = BTreeMap::new();
        'terms: for (c, w) in &self.terms {
            let mut coeff = c.clone();
            let mut img = [0u32; 4];
            for s in 0..4 {
                match word_on_basis(&w[s], m[s], &bq[s]) {
                    Some((x, k)) => {
                        coeff = coeff * x;
                        img[s] = k;
                    }
                    None => continue 'terms,
                }
            }
            let e = out.entry(img).or_insert_with(Scalar::zero);
            *e = e.clone() + coeff;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Action on a product vector, keeping only components with every mode `≤ limit`.
    ///
    /// Terms are merged and contracted slot by slot from the right, grouping by word prefix.
    pub fn on_product(&self, v: &[Vec<Scalar>; 4], limit: usize, q: &Scalar) -> Vec<Scalar> {
        let d = limit + 1;
        let mut cache: BTreeMap<(usize, Word), Vec<Scalar>> = BTreeMap::new();
        let mut slot = |s: usize, w: &Word| -> Vec<Scalar> {
            cache
                .entry((s, w.clone()))
                .or_insert_with(|| {
                    let mut r = word_on_vector(w, &v[s], &base_q(SLOTS[s], q));
                    r.resize(d.max(r.len()), Scalar::zero());
                    r.truncate(d);
                    r
                })
                .clone()
        };
        let mut tree: BTreeMap<Word, BTreeMap<Word, BTreeMap<Word, Vec<(Word, Scalar)>>>> = BTreeMap::new();
        for (w, c) in self.collect() {
            let [w0, w1, w2, w3] = w;
            tree.entry(w0).or_default().entry(w1).or_default().entry(w2).or_default().push((w3, c));
        }
        let mut out = vec![Scalar::zero(); d.pow(4)];
        for (w0, t1) in &tree {
            let mut acc1 = vec![Scalar::zero(); d.pow(3)];
            for (w1, t2) in t1 {
                let mut acc2 = vec![Scalar::zero(); d * d];
                for (w2, t3) in t2 {
                    let mut g = vec![Scalar::zero(); d];
                    for (w3, c) in t3 {
                        axpy(&mut g, c, &slot(3, w3));
                    }
                    outer_add(&mut acc2, &slot(2, w2), &g);
                }
                outer_add(&mut acc1, &slot(1, w1), &acc2);
            }
            outer_add(&mut out, &slot(0, w0), &acc1);
        }
        out
    }
}

/// `y += a x`.
fn axpy(y: &mut [Scalar], a: &Scalar, x: &[Scalar]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = yi.clone() + a.clone() * xi;
        }
    }
}

/// `out += f ⊗ g` with `out` laid out as `f`-index major.
fn outer_add(out: &mut [Scalar], f: &[Scalar], g: &[Scalar]) {
    if g.iter().all(Zero::is_zero) {
        return;
    }
    for (i, fi) in f.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        axpy(&mut out[i * g.len()..(i + 1) * g.len()], fi, g);
    }
}

impl fmt::Display for TensorOp4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .collect()
            .iter()
            .map(|(w, c)| {
                let ws: Vec<String> = (0..4).map(|s| word_string(&w[s], SLOTS[s])).collect();
                format!("({c})·{}", ws.join(" · "))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Generator index `t_{ij}`, 1-based.
pub type Gen = (usize, usize);

/// Noncommutative polynomial in the generators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: Vec<(Scalar, Vec<Gen>)>,
}

impl Poly {
    pub fn mono(c: Scalar, gens: &[Gen]) -> Self {
        Self { terms: vec![(c, gens.to_vec())] }
    }

    /// Sum of `c · t_{g1} t_{g2} …` monomials given as `(c, gens)`.
    pub fn of(terms: &[(Scalar, &[Gen])]) -> Self {
        Self { terms: terms.iter().map(|(c, g)| (c.clone(), g.to_vec())).collect() }
    }

    pub fn add(mut self, other: &Poly) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scale(mut self, c: &Scalar) -> Self {
        for (x, _) in &mut self.terms {
            *x = x.clone() * c;
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, g)| g.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, g)| {
                let m: Vec<String> = g.iter().map(|(i, j)| format!("t{i}{j}")).collect();
                format!("({c}){}", m.join(""))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn coproduct_gen(i: usize, j: usize, q: &Scalar, op: bool) -> Result<TensorOp4> {
    let mut out = TensorOp4::default();
    for k in 1..=4 {
        for l in 1..=4 {
            for m in 1..=4 {
                let f = if op {
                    [pi_matrix(2, m, j, q)?, pi_matrix(1, l, m, q)?, pi_matrix(2, k, l, q)?, pi_matrix(1, i, k, q)?]
                } else {
                    [pi_matrix(2, i, k, q)?, pi_matrix(1, k, l, q)?, pi_matrix(2, l, m, q)?, pi_matrix(1, m, j, q)?]
                };
                if f.iter().any(SlotOp::is_zero) {
                    continue;
                }
                // every π entry is a single word
                let c = f.iter().fold(Scalar::one(), |acc, s| acc * &s.terms[0].0);
                let words = std::array::from_fn(|s| f[s].terms[0].1.clone());
                out.terms.push((c, words));
            }
        }
    }
    Ok(out)
}

fn expand(poly: &Poly, q: &Scalar, op: bool) -> Result<TensorOp4> {
    let mut out = TensorOp4::default();
    for (c, gens) in &poly.terms {
        let mut m = TensorOp4::identity();
        for &(i, j) in gens {
            m = m.mul(&coproduct_gen(i, j, q, op)?);
        }
        out = out.add(&m.scale(c));
    }
    Ok(out)
}

/// `Δ(poly)` in `π_2 ⊗ π_1 ⊗ π_2 ⊗ π_1`.
pub fn delta(poly: &Poly, q: &Scalar) -> Result<TensorOp4> {
    expand(poly, q, false)
}

/// `Δ^op(poly)` in `π_2 ⊗ π_1 ⊗ π_2 ⊗ π_1`.
pub fn delta_op(poly: &Poly, q: &Scalar) -> Result<TensorOp4> {
    expand(poly, q, true)
}

/// One entry of the lemma list: an elementary tensor equal to `Δ(poly)`.
#[derive(Clone, Debug)]
pub struct LemmaIdentity {
    pub name: &'static str,
    pub label: &'static str,
    pub lhs: [Word; 4],
    pub poly: Poly,
}

/// The twelve elementary-tensor identities `X = Δ(T)`.
pub fn lemma_identities(q: &Scalar) -> Vec<LemmaIdentity> {
    use Letter::*;
    let p = |e: i64| q.powi(e);
    let n = |e: i64| -q.powi(e);
    let id = |name, label, lhs: [Word; 4], poly| LemmaIdentity { name, label, lhs, poly };
    vec![
        id("k2K2", "d1", [vec![], vec![K, K], vec![K, K], vec![]], Poly::of(&[(p(0), &[(1, 4), (1, 4)]), (n(-3), &[(4, 2), (1, 3)])])),
        id("kKk", "d2", [vec![], vec![K], vec![K], vec![K]], Poly::of(&[(n(0), &[(1, 4)])])),
        id("kKk'", "d2", [vec![], vec![K], vec![K], vec![K]], Poly::of(&[(p(-4), &[(4, 1)])])),
        id("Kk2K", "d2", [vec![K], vec![K, K], vec![K], vec![]], Poly::of(&[(p(-1), &[(2, 3), (1, 4)]), (n(0), &[(2, 4), (1, 3)])])),
        id("kKa+", "d3", [vec![], vec![K], vec![K], vec![Raise]], Poly::of(&[(n(-3), &[(4, 2)])])),
        id("kKa-", "d3", [vec![], vec![K], vec![K], vec![Lower]], Poly::of(&[(p(0), &[(1, 3)])])),
        id("A+k2K", "d4", [vec![Raise], vec![K, K], vec![K], vec![]], Poly::of(&[(n(-5), &[(3, 3), (4, 1)]), (n(0), &[(3, 4), (1, 3)])])),
        id("A-k2K", "d4", [vec![Lower], vec![K, K], vec![K], vec![]], Poly::of(&[(p(1), &[(2, 2), (1, 4)]), (p(-4), &[(2, 1), (4, 2)])])),
        id("ka+K", "d5", [vec![], vec![K, Raise], vec![K], vec![]], Poly::of(&[(p(1), &[(4, 4), (1, 3)]), (p(-4), &[(4, 3), (4, 1)])])),
        id("ka-K", "d5", [vec![], vec![K, Lower], vec![K], vec![]], Poly::of(&[(n(-3), &[(4, 2), (1, 1)]), (p(-4), &[(4, 1), (1, 2)])])),
        id("k2KA+", "d6", [vec![], vec![K, K], vec![K, Raise], vec![]], Poly::of(&[(n(-1), &[(4, 4), (4, 1)]), (n(-2), &[(4, 3), (4, 2)])])),
        id("k2KA-", "d6", [vec![], vec![K, K], vec![K, Lower], vec![]], Poly::of(&[(n(-5), &[(4, 1), (1, 1)]), (p(-2), &[(1, 2), (1, 3)])])),
    ]
}

/// All basis vectors with every mode `≤ limit`.
fn basis(limit: u32) -> impl Iterator<Item = [u32; 4]> {
    let r = 0..=limit;
    r.clone().flat_map(move |a| {
        let r = r.clone();
        r.clone().flat_map(move |b| {
            let r = r.clone();
            r.clone().flat_map(move |c| (0..=limit).map(move |d| [a, b, c, d]))
        })
    })
}

/// Exact comparison of two tensor operators on all basis vectors with modes `≤ limit`.
/// Returns the first differing input, if any.
pub fn compare_on_basis(x: &TensorOp4, y: &TensorOp4, limit: u32, q: &Scalar) -> Option<[u32; 4]> {
    let pw = slot_powers(q, 2 * limit as usize + 16);
    basis(limit).find(|m| x.on_basis_with(*m, &pw) != y.on_basis_with(*m, &pw))
}

/// Check every lemma identity on basis vectors with modes `≤ cutoff − 3`.
pub fn check_lemma_identities(q: &Scalar, cutoff: usize) -> Result<Report> {
    check_identities(&lemma_identities(q), q, cutoff)
}

/// As [`check_lemma_identities`] for an arbitrary list (used for negative controls).
pub fn check_identities(list: &[LemmaIdentity], q: &Scalar, cutoff: usize) -> Result<Report> {
    if cutoff < 6 {
        return Err(Error::TruncationMargin { cutoff, needed: 6 });
    }
    let limit = (cutoff - 3) as u32;
    let mut rep = Report::new();
    for li in list {
        let lhs = TensorOp4::elementary(Scalar::one(), li.lhs.clone());
        let rhs = delta(&li.poly, q)?;
        let bad = compare_on_basis(&lhs, &rhs, limit, q);
        let detail = match bad {
            None => format!("modes <= {limit}"),
            Some(m) => format!("differs on |{},{},{},{}>", m[0], m[1], m[2], m[3]),
        };
        rep.push(format!("lemma {}", li.name), li.label, bad.is_none(), detail);
    }
    Ok(rep)
}

/// Pairs `(r, k)` labelling `|Ξ_{r,k}⟩ = |χ_r⟩ ⊗ |η_k⟩ ⊗ |χ_r⟩ ⊗ |η_k⟩`.
pub const XI_LABELS: [(u8, u8); 3] = [(1, 1), (1, 2), (2, 2)];

/// Truncated `|Ξ_{r,k}⟩` as four factor vectors.
#[derive(Clone, Debug)]
pub struct XiVector {
    pub r: u8,
    pub k: u8,
    pub factors: [Vec<Scalar>; 4],
}

impl XiVector {
    pub fn new(r: u8, k: u8, cutoff: usize, q: &Scalar) -> Result<Self> {
        if !XI_LABELS.contains(&(r, k)) {
            return Err(Error::Range(format!("(r, k) = ({r}, {k})")));
        }
        let factors = std::array::from_fn(|s| {
            let f = TruncatedFock::new(cutoff, SLOTS[s]);
            f.boundary_vector(if s % 2 == 0 { r } else { k }, q)
        });
        Ok(Self { r, k, factors })
    }
}

/// Boundary operator whose annihilation of `𝒦|Ξ_{r,k}⟩` is to be shown.
#[derive(Clone, Debug)]
pub struct BoundaryOp {
    pub name: String,
    pub r: u8,
    pub k: u8,
    pub op: TensorOp4,
}

/// `1` on every slot except `s`, where the operator is `x`; `others` gives the other words.
fn with_slot(s: usize, x: &SlotOp, others: [Word; 4]) -> TensorOp4 {
    let mut out = TensorOp4::default();
    for (c, w) in &x.terms {
        let mut words = others.clone();
        words[s] = [others[s].clone(), w.clone()].concat();
        out.terms.push((c.clone(), words));
    }
    out
}

/// `X^+ − X^- + c·Kk` on one slot; with `c = 0` the η_2/χ_2 characterisation.
fn char_op(base: Base, with_k: bool, q: &Scalar) -> SlotOp {
    use Letter::*;
    let mut t = vec![(Scalar::one(), vec![Raise]), (-Scalar::one(), vec![Lower])];
    if with_k {
        t.push((Scalar::one() + base_q(base, q), vec![K]));
    }
    SlotOp { terms: t }
}

/// The twelve boundary operators, four for each `Ξ_{r,k}`.
pub fn boundary_ops(q: &Scalar) -> Vec<BoundaryOp> {
    use Letter::*;
    let mut out = Vec::new();
    for &(r, k) in XI_LABELS.iter().rev() {
        let cx = char_op(Base::Q2, r == 1, q);
        let ce = char_op(Base::Q, k == 1, q);
        let ops = [
            ("slot1", with_slot(0, &cx, [vec![], vec![K, K], vec![K], vec![]])),
            ("slot2", with_slot(1, &ce, [vec![], vec![K], vec![K], vec![]])),
            ("slot3", with_slot(2, &cx, [vec![], vec![K, K], vec![K], vec![]])),
            ("slot4", with_slot(3, &ce, [vec![], vec![K], vec![K], vec![]])),
        ];
        for (s, op) in ops {
            out.push(BoundaryOp { name: format!("Xi{r}{k} {s}"), r, k, op });
        }
    }
    out
}

/// Express a boundary operator through the lemma list, term by term.
///
/// The only elementary tensor outside the list is `1·k²·K·1`; on `Ξ_{1,1}` it is
/// replaced by `1·k²·K(A⁺ + K)·1`, valid because the third factor is then
/// annihilated by `A⁺ − 1 + K`.
pub fn derive_poly(b: &BoundaryOp, q: &Scalar) -> Result<Poly> {
    use Letter::*;
    let lemmas = lemma_identities(q);
    let find = |w: &[Word; 4]| lemmas.iter().find(|l| &l.lhs == w).map(|l| l.poly.clone());
    let x: [Word; 4] = [vec![], vec![K, K], vec![K], vec![]];
    let mut poly = Poly::default();
    for (w, c) in b.op.collect() {
        let p = match find(&w) {
            Some(p) => p,
            None if w == x && b.r == 1 => {
                let a = find(&[vec![], vec![K, K], vec![K, Raise], vec![]]).unwrap();
                let kk = find(&[vec![], vec![K, K], vec![K, K], vec![]]).unwrap();
                a.add(&kk)
            }
            None => {
                let ws: Vec<String> = (0..4).map(|s| word_string(&w[s], SLOTS[s])).collect();
                return Err(Error::DerivationGap(format!("{}: {}", b.name, ws.join(" · "))));
            }
        };
        poly = poly.add(&p.scale(&c));
    }
    Ok(poly)
}

/// Apply `Δ^op(poly)` to the truncated `Ξ` and return the number of nonzero components with modes `≤ limit`.
pub fn annihilation_residue(poly: &Poly, xi: &XiVector, cutoff: usize, q: &Scalar) -> Result<usize> {
    let op = delta_op(poly, q)?;
    let shift = op.max_shift();
    if cutoff < 3 || shift > 3 {
        return Err(Error::TruncationMargin { cutoff, needed: shift + 1 });
    }
    let limit = cutoff - 3;
    Ok(op.on_product(&xi.factors, limit, q).iter().filter(|x| !x.is_zero()).count())
}

/// Annihilation identities for one `Ξ_{r,k}` plus the characterisation equations.
pub fn check_annihilation(r: u8, k: u8, q: &Scalar, cutoff: usize) -> Result<Report> {
    if cutoff < 10 {
        return Err(Error::TruncationMargin { cutoff, needed: 10 });
    }
    let xi = XiVector::new(r, k, cutoff, q)?;
    let mut rep = Report::new();
    for b in boundary_ops(q).into_iter().filter(|b| b.r == r && b.k == k) {
        let poly = derive_poly(&b, q)?;
        let nz = annihilation_residue(&poly, &xi, cutoff, q)?;
        rep.push(format!("annihilate {}", b.name), "h", nz == 0, format!("T = {poly}; nonzero components <= M-3: {nz}"));
    }
    rep.extend(check_characterisation(q, cutoff));
    Ok(rep)
}

/// Check the characterisation equations of `η_1, χ_1, η_2, χ_2` up to the exact limit.
pub fn check_characterisation(q: &Scalar, cutoff: usize) -> Report {
    use Letter::*;
    let one = Scalar::one();
    let mut rep = Report::new();
    for base in [Base::Q, Base::Q2] {
        let bq = base_q(base, q);
        let f = TruncatedFock::new(cutoff, base);
        let name = if base == Base::Q { "eta" } else { "chi" };
        let v1 = f.boundary_vector(1, q);
        let v2 = f.boundary_vector(2, q);
        let eqs = [
            ("c11", 1, SlotOp { terms: vec![(one.clone(), vec![Raise]), (-one.clone(), vec![]), (one.clone(), vec![K])] }),
            ("c12", 1, SlotOp { terms: vec![(one.clone(), vec![Lower]), (-one.clone(), vec![]), (-bq.clone(), vec![K])] }),
            ("c13", 1, char_op(base, true, q)),
            ("c2", 2, char_op(base, false, q)),
        ];
        for (label, kk, op) in eqs {
            let v = if kk == 1 { &v1 } else { &v2 };
            let lim = op.exact_limit(cutoff);
            let img = op.apply(v, base, q);
            let nz = img.iter().take((lim + 1) as usize).filter(|x| !x.is_zero()).count();
            rep.push(format!("{label} {name}_{kk}"), label, nz == 0, format!("modes <= {lim}"));
        }
    }
    rep
}
