//! The lower-central-series spectral sequence of F(S¹).
//!
//! `E¹_{t,n} = π_n(L_t(S¹))` is computed as Moore homology of the
//! non-degenerate Lie basis. Differentials come from the formal Steenrod
//! operations applied to Moore representatives, or from structural
//! arguments (vanishing targets, coprime orders, the connectivity line).
//! Bidegree `(t, n)` contributes to `π_{n+1}(S²)`; `d^r` maps `(t, n)` to
//! `(t + r, n − 1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::check::Check;
use crate::error::{arg_err, Error, Result};
use crate::exactla::{hom_kernel_cokernel, homology_at, solve_integer, AbelianGroup, HomologyPresentation, IntMatrix, Matrix};
use crate::lie::{
    coordinates_of, element_from_coordinates, lie_recognize, moore_boundary_matrix, moore_boundary_matrix_in,
    nondegenerate_basis, tensor_expand, BasisOrder, LieBasisElement, LieElement,
};
use crate::magnus::{magnus_embed, p_delta, q_component, DeltaData, DeltaKind, Series};
use crate::milnor::{face, is_moore, SimplicialElement};
use crate::scalar::{EuclideanRing, Integer, RingKind};
use crate::words::Word;

/// Largest matrix side for which E¹ entries carry explicit generators.
pub const PRESENTATION_LIMIT: usize = 400;

/// Upper bound on the Lyndon enumeration behind one Moore basis.
pub const BASIS_ENUMERATION_LIMIT: f64 = 5.0e6;

/// Upper bound on the number of monomials in a differential computation.
pub const ENGINE_TERM_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Bidegree {
    pub t: usize,
    pub n: usize,
}

impl Bidegree {
    pub fn new(t: usize, n: usize) -> Self {
        Bidegree { t, n }
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.t, self.n)
    }
}

/// Smallest `k` with `2^k ≥ t`.
pub fn ceil_log2(t: usize) -> usize {
    let mut k = 0;
    while (1usize << k) < t {
        k += 1;
    }
    k
}

/// The connectivity line: `π_n(L_t S¹) = 0` for `n ≤ ⌈log₂ t⌉`
/// (literature input, checked against every computed entry).
pub fn below_connectivity_line(t: usize, n: usize) -> bool {
    n <= ceil_log2(t)
}

fn check_enumeration(t: usize, q: usize) -> Result<()> {
    if (q as f64).powi(t as i32) / (t as f64) > BASIS_ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!("Moore basis at weight {t}, dimension {q} is too large")));
    }
    Ok(())
}

pub fn e1_group<R: EuclideanRing>(t: usize, n: usize) -> Result<AbelianGroup> {
    e1_group_in::<R>(t, n, BasisOrder::Lexicographic)
}

/// `E¹_{t,n}` computed in the given Hall basis.
pub fn e1_group_in<R: EuclideanRing>(t: usize, n: usize, order: BasisOrder) -> Result<AbelianGroup> {
    if t == 0 {
        return arg_err("weight must be at least 1");
    }
    if n == 0 || n > t {
        return Ok(AbelianGroup::trivial());
    }
    check_enumeration(t, n + 1)?;
    let a = moore_boundary_matrix_in::<R>(t, n + 1, order)?;
    let b = moore_boundary_matrix_in::<R>(t, n, order)?;
    homology_at(&a, &b)
}

#[derive(Clone, Debug)]
pub struct E1Entry<R> {
    pub bidegree: Bidegree,
    pub group: AbelianGroup,
    pub presentation: Option<HomologyPresentation<R>>,
    /// Cycles generating the nontrivial summands (empty without a presentation).
    pub generators: Vec<LieElement<R>>,
    /// A basis of the Moore cycles (empty without a presentation).
    pub cycle_basis: Vec<LieElement<R>>,
}

impl<R: EuclideanRing> E1Entry<R> {
    /// Coordinates of the class of a cycle, one per summand.
    pub fn class_of(&self, z: &LieElement<R>) -> Result<Vec<R>> {
        if self.group.is_trivial() {
            return Ok(Vec::new());
        }
        let p = self
            .presentation
            .as_ref()
            .ok_or_else(|| Error::Capacity(format!("E¹{} has no explicit presentation", self.bidegree)))?;
        p.class_of(&coordinates_of(z, self.bidegree.t)?)
    }

    /// Orders of the summands named by [`class_of`](Self::class_of); zero
    /// for free summands.
    pub fn summand_orders(&self) -> Vec<R> {
        self.presentation.as_ref().map(|p| p.moduli()).unwrap_or_default()
    }
}

pub fn e1_entry<R: EuclideanRing>(t: usize, n: usize) -> Result<E1Entry<R>> {
    let bidegree = Bidegree::new(t, n);
    let group = e1_group::<R>(t, n)?;
    let mut entry = E1Entry { bidegree, group, presentation: None, generators: Vec::new(), cycle_basis: Vec::new() };
    if n == 0 || n > t {
        return Ok(entry);
    }
    let a = moore_boundary_matrix::<R>(t, n + 1)?;
    let b = moore_boundary_matrix::<R>(t, n)?;
    if a.rows().max(a.cols()).max(b.rows()) > PRESENTATION_LIMIT {
        return Ok(entry);
    }
    let p = HomologyPresentation::new(&a, &b)?;
    if p.group != entry.group {
        return Err(Error::Internal(format!("two homology computations disagree at {bidegree}")));
    }
    entry.generators = p.generators.iter().map(|g| element_from_coordinates(t, n, g)).collect::<Result<_>>()?;
    entry.cycle_basis = (0..p.kernel.cols())
        .map(|j| {
            let mut v = vec![R::zero(); p.kernel.rows()];
            for (i, c) in p.kernel.column(j) {
                v[*i] = c.clone();
            }
            element_from_coordinates(t, n, &v)
        })
        .collect::<Result<_>>()?;
    entry.presentation = Some(p);
    Ok(entry)
}

/// A group word in `N ∩ Γ_t` whose leading Magnus component is a given Lie
/// cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MooreRepresentative {
    pub t: usize,
    pub cycle: LieElement<Integer>,
    pub word: Word,
}

/// Standard bracketing read as iterated group commutators.
pub fn lie_word(b: &LieBasisElement, n_gens: usize) -> Result<Word> {
    fn rec(w: &crate::lie::LyndonWord, n: usize) -> Result<Word> {
        match w.standard_factorization() {
            None => Word::generator(n, w.letters()[0] as usize),
            Some((u, v)) => rec(&u, n)?.commutator(&rec(&v, n)?),
        }
    }
    Ok(rec(&b.word, n_gens)?.pow(b.power as i64))
}

pub fn lift_to_moore_representative(z: &LieElement<Integer>, t: usize) -> Result<MooreRepresentative> {
    let n = z.n_vars();
    coordinates_of(z, t)?;
    let mut word = Word::identity(n);
    for (b, c) in z.terms() {
        let e = c.to_i64().ok_or_else(|| Error::Capacity(format!("coefficient {c} too large to exponentiate")))?;
        word = word.multiply(&lie_word(b, n)?.pow(e))?;
    }
    let rep = MooreRepresentative { t, cycle: z.clone(), word };
    let elem = SimplicialElement::new(n, rep.word.clone())?;
    if !is_moore(&elem) {
        return Err(Error::Internal(format!("lift of {z} is not a Moore chain")));
    }
    let e = lift_series(z, &generator_images(n, t)?)?;
    if (1..t).any(|k| !q_component(k, &e).is_zero()) {
        return Err(Error::Internal(format!("lift of {z} lies below filtration {t}")));
    }
    let lead = q_component(t, &e);
    let expected = tensor_expand(z);
    if lead.terms() != expected.terms() {
        return Err(Error::Internal(format!("leading component of the lift of {z} is {lead}")));
    }
    Ok(rep)
}

/// `1 + x_i`, the Magnus images of the generators.
fn generator_images(n: usize, trunc: usize) -> Result<Vec<Series<Integer>>> {
    (0..n).map(|i| Series::var(n, trunc, i)?.add(&Series::one(n, trunc))).collect()
}

fn group_inverse(g: &Series<Integer>) -> Result<Series<Integer>> {
    g.sub(&Series::one(g.n_vars(), g.trunc()))?.inv_one_plus()
}

fn group_power(g: &Series<Integer>, e: i64) -> Result<Series<Integer>> {
    let mut base = if e < 0 { group_inverse(g)? } else { g.clone() };
    let mut k = e.unsigned_abs();
    let mut acc = Series::one(g.n_vars(), g.trunc());
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base)?;
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base)?;
        }
    }
    Ok(acc)
}

/// Magnus image of the lift of `z` when generator `i` maps to `gens[i]`,
/// evaluated on the commutator factorization instead of the expanded word.
pub fn lift_series(z: &LieElement<Integer>, gens: &[Series<Integer>]) -> Result<Series<Integer>> {
    fn rec(
        w: &crate::lie::LyndonWord,
        gens: &[Series<Integer>],
        memo: &mut BTreeMap<Vec<u8>, Series<Integer>>,
    ) -> Result<Series<Integer>> {
        if let Some(s) = memo.get(w.letters()) {
            return Ok(s.clone());
        }
        let s = match w.standard_factorization() {
            None => gens[w.letters()[0] as usize].clone(),
            Some((u, v)) => {
                let a = rec(&u, gens, memo)?;
                let b = rec(&v, gens, memo)?;
                group_inverse(&a)?.mul(&group_inverse(&b)?)?.mul(&a)?.mul(&b)?
            }
        };
        memo.insert(w.letters().to_vec(), s.clone());
        Ok(s)
    }
    if gens.len() != z.n_vars() {
        return arg_err("one image per generator is required");
    }
    let (m, trunc) = gens.first().map_or((0, 0), |g| (g.n_vars(), g.trunc()));
    let mut memo = BTreeMap::new();
    let mut acc = Series::one(m, trunc);
    for (b, c) in z.terms() {
        let e = c.to_i64().ok_or_else(|| Error::Capacity(format!("coefficient {c} too large to exponentiate")))?;
        let base = group_power(&rec(&b.word, gens, &mut memo)?, b.power as i64)?;
        acc = acc.mul(&group_power(&base, e)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DifferentialOutcome {
    /// `−S_r` is a non-boundary cycle representing `d^r(α)` in
    /// `E¹_{t+r, n−1}`.
    Hit { r: usize, target: LieElement<Integer>, adjustments: usize },
    /// `S_j = 0` for `j ≤ r_max` after the listed number of adjustments.
    Survives { r_max: usize, adjustments: usize },
    Undetermined { r: usize, reason: String },
}

fn series_size(n_vars: usize, trunc: usize) -> usize {
    (0..=trunc).map(|k| n_vars.saturating_pow(k as u32)).fold(0usize, |a, b| a.saturating_add(b))
}

/// `S_j = Σ_{i=0..j} P^i_δ(w_{t+j−i})` for `e(w) = 1 + Σ w_k`.
fn steenrod_sum(e: &Series<Integer>, t: usize, j: usize, data: &DeltaData<Integer>) -> Result<Series<Integer>> {
    let mut acc = Series::zero(data.m, e.trunc());
    for i in 0..=j {
        acc = acc.add(&p_delta(i, &q_component(t + j - i, e), data)?)?;
    }
    Ok(acc)
}

/// Runs the differential formula on a Moore representative for pages
/// `1..=r_max`. A nonzero sum that bounds in `E¹` is removed by changing the
/// representative by a weight-`t+j` Moore chain (depth one).
pub fn differential(rep: &MooreRepresentative, r_max: usize) -> Result<DifferentialOutcome> {
    let n = rep.cycle.n_vars();
    let t = rep.t;
    if n <= 1 {
        // d_0 lands in F(S¹)_0, the trivial group
        return Ok(DifferentialOutcome::Survives { r_max, adjustments: 0 });
    }
    let trunc = t + r_max;
    if series_size(n, trunc) > ENGINE_TERM_LIMIT {
        return Ok(DifferentialOutcome::Undetermined {
            r: 1,
            reason: format!("expansion in {n} variables to degree {trunc} exceeds the budget"),
        });
    }
    let data = DeltaData::<Integer>::new(DeltaKind::Antipodal, n - 1, trunc)?;
    let mut word = rep.word.clone();
    let mut e = lift_series(&rep.cycle, &generator_images(n, trunc)?)?;
    if !p_delta(0, &q_component(t, &e), &data)?.is_zero() {
        return Err(Error::Internal(format!("P⁰ does not vanish on the leading term of the lift of {}", rep.cycle)));
    }
    let mut adjustments = 0;
    for j in 1..=r_max {
        let mut adjusted = false;
        loop {
            let s = steenrod_sum(&e, t, j, &data)?;
            if s.is_zero() {
                break;
            }
            let target = lie_recognize(&s.neg())
                .map_err(|err| Error::Internal(format!("sum at page {j} is not a Lie element: {err}")))?;
            if adjusted {
                return Err(Error::Internal(format!("adjustment at page {j} left {target}")));
            }
            let coords = coordinates_of(&target, t + j)
                .map_err(|err| Error::Internal(format!("target at page {j} is degenerate: {err}")))?;
            let m = moore_boundary_matrix::<Integer>(t + j, n)?;
            let chain = match solve_integer(&m, &coords) {
                Ok(Some(c)) => c,
                Ok(None) => return Ok(DifferentialOutcome::Hit { r: j, target, adjustments }),
                Err(Error::Capacity(msg)) => return Ok(DifferentialOutcome::Undetermined { r: j, reason: msg }),
                Err(other) => return Err(other),
            };
            let v = lift_to_moore_representative(&element_from_coordinates(t + j, n, &chain)?, t + j)?;
            word = word.multiply(&v.word.inverse())?;
            e = e.mul(&group_inverse(&lift_series(&v.cycle, &generator_images(n, trunc)?)?)?)?;
            adjustments += 1;
            adjusted = true;
        }
    }
    Ok(DifferentialOutcome::Survives { r_max, adjustments })
}

/// Compares, for every cycle-basis element and generator of `E¹_{t,n}`, the
/// first differential computed by the Steenrod sum with the one read off
/// the group boundary `d_0 w` directly.
pub fn d1_crosscheck(t: usize, n: usize) -> Result<Vec<Check>> {
    let source = e1_entry::<Integer>(t, n)?;
    if n >= 1 && n <= t && source.presentation.is_none() {
        return Err(Error::Capacity(format!("E¹({t},{n}) is too large for an explicit presentation")));
    }
    let target = if n >= 1 { Some(e1_entry::<Integer>(t + 1, n - 1)?) } else { None };
    let mut items: Vec<(String, LieElement<Integer>)> = Vec::new();
    for (i, z) in source.generators.iter().enumerate() {
        items.push((format!("generator {i}"), z.clone()));
    }
    for (i, z) in source.cycle_basis.iter().enumerate() {
        items.push((format!("cycle {i}"), z.clone()));
    }
    let mut checks = Vec::new();
    if items.is_empty() {
        checks.push(Check::new(format!("d1 two-path agreement ({t},{n})"), true, "no cycles"));
        return Ok(checks);
    }
    for (label, z) in items {
        let name = format!("d1 two-path agreement ({t},{n}) {label}");
        lift_to_moore_representative(&z, t)?;
        let trunc = t + 1;
        let e = lift_series(&z, &generator_images(n, trunc)?)?;
        let data = DeltaData::<Integer>::new(DeltaKind::Antipodal, n - 1, trunc)?;
        let sanity = p_delta(0, &q_component(t, &e), &data)?.is_zero();
        let via_steenrod = lie_recognize(&steenrod_sum(&e, t, 1, &data)?.neg())?;
        // d_0 is a homomorphism: substitute the Magnus images of d_0 y_i
        let face_gens = (0..n)
            .map(|i| Ok(magnus_embed(face(0, &SimplicialElement::generator(n, i)?)?.word(), trunc)))
            .collect::<Result<Vec<Series<Integer>>>>()?;
        let eb = lift_series(&z, &face_gens)?;
        let filtered = (1..=t).all(|k| q_component(k, &eb).is_zero());
        let via_boundary = lie_recognize(&q_component(trunc, &eb))?;
        let same = via_steenrod == via_boundary;
        let classes = match &target {
            Some(tg) if !tg.group.is_trivial() && tg.presentation.is_some() => {
                let a = tg.class_of(&via_steenrod)?;
                let b = tg.class_of(&via_boundary)?;
                format!("class {a:?} vs {b:?}")
            }
            Some(tg) if tg.group.is_trivial() => "target group trivial".to_string(),
            _ => "target without presentation".to_string(),
        };
        checks.push(Check::new(
            name,
            same && sanity && filtered,
            format!("d¹ = {via_steenrod}; boundary path {via_boundary}; {classes}; P⁰ sanity {sanity}"),
        ));
    }
    Ok(checks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DifferentialStatus {
    Zero,
    Nonzero,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferentialRecord {
    pub t: usize,
    pub n: usize,
    pub r: usize,
    pub target_t: usize,
    pub status: DifferentialStatus,
    pub reason: String,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralConfig {
    pub t_max: usize,
    pub stem_max: usize,
    /// Treat undetermined differentials as zero when advancing pages.
    pub assume_zero: bool,
    /// Try the Steenrod-sum engine where structure does not decide.
    pub use_engine: bool,
}

impl SpectralConfig {
    /// Bidegrees whose `E¹` the assembly needs: stems up to `stem_max` for all
    /// weights, and one stem higher for weights that can still hit a
    /// computed target.
    pub fn required_bidegrees(&self) -> Vec<Bidegree> {
        let mut out = Vec::new();
        for t in 1..=self.t_max {
            for n in 1..=self.stem_max + 1 {
                if n <= self.stem_max || t < self.t_max {
                    out.push(Bidegree::new(t, n));
                }
            }
        }
        out
    }
}

/// Computes `E¹` over the integers on the given bidegrees; results are
/// merged in bidegree order, independent of scheduling.
pub fn e1_table(bidegrees: &[Bidegree]) -> Result<BTreeMap<Bidegree, AbelianGroup>> {
    let results: Vec<(Bidegree, Result<AbelianGroup>)> =
        bidegrees.par_iter().map(|b| (*b, e1_group::<Integer>(b.t, b.n))).collect();
    let mut out = BTreeMap::new();
    for (b, r) in results {
        out.insert(b, r?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct PageEntry {
    group: AbelianGroup,
    /// Still equal to `E¹` (so `E¹` classes name its elements).
    pristine: bool,
    /// No undetermined differential has touched it.
    exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(Integer),
    Infinite,
}

impl Order {
    pub fn of(g: &AbelianGroup) -> Order {
        g.order().map(Order::Finite).unwrap_or(Order::Infinite)
    }

    fn mul(&self, o: &Order) -> Order {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a * b),
            _ => Order::Infinite,
        }
    }

    /// `self` divides `o` (every order divides infinity).
    fn divides(&self, o: &Order) -> bool {
        match (self, o) {
            (_, Order::Infinite) => true,
            (Order::Infinite, Order::Finite(_)) => false,
            (Order::Finite(a), Order::Finite(b)) => !a.is_zero() && (b % a).is_zero(),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TotalOrder {
    Exact(Order),
    /// Lower bound and optional upper bound; the true order is a multiple of
    /// the lower bound.
    Interval { lower: Order, upper: Option<Order> },
}

impl TotalOrder {
    pub fn contains(&self, o: &Order) -> bool {
        match self {
            TotalOrder::Exact(x) => x == o,
            TotalOrder::Interval { lower, upper } => lower.divides(o) && upper.as_ref().map_or(true, |u| o.divides(u)),
        }
    }
}

impl fmt::Display for TotalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotalOrder::Exact(o) => write!(f, "{o}"),
            TotalOrder::Interval { lower, upper: None } => write!(f, "[{lower}, inf)"),
            TotalOrder::Interval { lower, upper: Some(u) } => write!(f, "[{lower}, {u}]"),
        }
    }
}

/// `E^∞` bounds per bidegree plus the differential log.
#[derive(Clone, Debug)]
pub struct SpectralSequence {
    pub config: SpectralConfig,
    pub e1: BTreeMap<Bidegree, AbelianGroup>,
    /// Final group and whether it is exact (otherwise an upper bound).
    pub e_infinity: BTreeMap<Bidegree, (AbelianGroup, bool)>,
    pub differentials: Vec<DifferentialRecord>,
}

enum Decision {
    Zero(String),
    Nonzero { kernel: AbelianGroup, cokernel: AbelianGroup, reason: String },
    Undetermined(String),
}

fn gcd_exponents(a: &AbelianGroup, b: &AbelianGroup) -> Option<Integer> {
    Some(a.exponent()?.gcd(&b.exponent()?))
}

fn structural_decision(src: &AbelianGroup, tgt: &AbelianGroup) -> Option<String> {
    if tgt.is_trivial() {
        return Some("target vanishes".into());
    }
    if gcd_exponents(src, tgt).map_or(false, |g| g.is_one()) {
        return Some("coprime orders".into());
    }
    if src.free_rank == 0 && tgt.invariant_factors.is_empty() {
        return Some("torsion into torsion-free".into());
    }
    None
}

/// Runs the Steenrod-sum engine on every generator of a pristine source.
fn engine_decision(src: Bidegree, r: usize) -> Result<Decision> {
    let s = e1_entry::<Integer>(src.t, src.n)?;
    let tg = e1_entry::<Integer>(src.t + r, src.n - 1)?;
    if s.presentation.is_none() || tg.presentation.is_none() {
        return Ok(Decision::Undetermined("entries too large for explicit generators".into()));
    }
    let src_orders = s.summand_orders();
    let tgt_orders = tg.summand_orders();
    let mut columns = Vec::new();
    for g in &s.generators {
        let rep = lift_to_moore_representative(g, src.t)?;
        match differential(&rep, r)? {
            DifferentialOutcome::Survives { .. } => columns.push(Vec::new()),
            DifferentialOutcome::Hit { r: j, target, .. } if j == r => {
                let class = tg.class_of(&target)?;
                columns.push(class.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
            }
            DifferentialOutcome::Hit { r: j, .. } => {
                return Ok(Decision::Undetermined(format!("representative hits a nonzero E¹ class already at page {j}")))
            }
            DifferentialOutcome::Undetermined { reason, .. } => return Ok(Decision::Undetermined(reason)),
        }
    }
    if columns.iter().all(Vec::is_empty) {
        return Ok(Decision::Zero("computed by the Steenrod-sum engine".into()));
    }
    let d: IntMatrix = Matrix::from_columns(tgt_orders.len(), columns)?;
    let (kernel, cokernel) = hom_kernel_cokernel(&src_orders, &tgt_orders, &d)?;
    Ok(Decision::Nonzero { kernel, cokernel, reason: "computed by the Steenrod-sum engine".into() })
}

impl SpectralSequence {
    /// Runs all pages over the supplied `E¹` table.
    pub fn compute(config: SpectralConfig, e1: BTreeMap<Bidegree, AbelianGroup>) -> Result<Self> {
        for b in config.required_bidegrees() {
            if !e1.contains_key(&b) {
                return arg_err(format!("E¹ table is missing {b}"));
            }
        }
        let mut state: BTreeMap<Bidegree, PageEntry> = e1
            .iter()
            .map(|(b, g)| (*b, PageEntry { group: g.clone(), pristine: true, exact: true }))
            .collect();
        // the top stem is only a source; its own incoming differentials are not tracked
        for (b, e) in state.iter_mut() {
            if b.n > config.stem_max {
                e.exact = false;
            }
        }
        let mut records = Vec::new();
        for r in 1..config.t_max {
            let sources: Vec<Bidegree> =
                state.iter().filter(|(b, e)| b.n >= 1 && b.t + r <= config.t_max && !e.group.is_trivial()).map(|(b, _)| *b).collect();
            for src in sources {
                let tgt = Bidegree::new(src.t + r, src.n - 1);
                let tgt_entry = state.get(&tgt).cloned().unwrap_or(PageEntry {
                    group: AbelianGroup::trivial(),
                    pristine: true,
                    exact: true,
                });
                let src_entry = state[&src].clone();
                let decision = match structural_decision(&src_entry.group, &tgt_entry.group) {
                    Some(reason) => Decision::Zero(reason),
                    None if config.use_engine && src_entry.pristine && tgt_entry.pristine && src_entry.exact && tgt_entry.exact => {
                        engine_decision(src, r)?
                    }
                    None => Decision::Undetermined("no structural argument applies".into()),
                };
                let (status, reason) = match decision {
                    Decision::Zero(reason) => (DifferentialStatus::Zero, reason),
                    Decision::Nonzero { kernel, cokernel, reason } => {
                        state.insert(src, PageEntry { group: kernel, pristine: false, ..src_entry });
                        state.insert(tgt, PageEntry { group: cokernel, pristine: false, ..tgt_entry });
                        (DifferentialStatus::Nonzero, reason)
                    }
                    Decision::Undetermined(reason) => {
                        if config.assume_zero {
                            (DifferentialStatus::Undetermined, format!("{reason}; assumed zero"))
                        } else {
                            for b in [src, tgt] {
                                if let Some(e) = state.get_mut(&b) {
                                    e.exact = false;
                                }
                            }
                            (DifferentialStatus::Undetermined, reason)
                        }
                    }
                };
                records.push(DifferentialRecord { t: src.t, n: src.n, r, target_t: tgt.t, status, reason });
            }
        }
        // differentials whose targets lie beyond the computed weights
        let boundary_stem = ceil_log2(config.t_max + 1);
        let sources: Vec<Bidegree> = state.iter().filter(|(b, e)| b.n >= 1 && !e.group.is_trivial()).map(|(b, _)| *b).collect();
        for src in sources {
            let r = config.t_max + 1 - src.t;
            let (status, reason) = if src.n - 1 == 0 {
                (DifferentialStatus::Zero, "target vanishes".to_string())
            } else if src.n - 1 <= boundary_stem {
                (DifferentialStatus::Zero, format!("targets beyond t={} vanish by connectivity", config.t_max))
            } else {
                if !config.assume_zero {
                    if let Some(e) = state.get_mut(&src) {
                        e.exact = false;
                    }
                }
                (DifferentialStatus::Undetermined, format!("targets beyond t={} not computed", config.t_max))
            };
            records.push(DifferentialRecord { t: src.t, n: src.n, r, target_t: config.t_max + 1, status, reason });
        }
        let e_infinity = state.into_iter().map(|(b, e)| (b, (e.group, e.exact))).collect();
        Ok(SpectralSequence { config, e1, e_infinity, differentials: records })
    }

    /// Bidegree arithmetic of the records, `E^∞` as a subquotient of `E¹`,
    /// and whether every differential was decided.
    pub fn page_checks(&self) -> Vec<Check> {
        let bad_arith: Vec<String> = self
            .differentials
            .iter()
            .filter(|d| d.target_t != d.t + d.r || d.n == 0)
            .map(|d| format!("d^{} on ({},{})", d.r, d.t, d.n))
            .collect();
        let mut checks = vec![Check::new(
            "every differential maps (t,n) to (t+r,n-1)",
            bad_arith.is_empty(),
            if bad_arith.is_empty() { format!("{} records", self.differentials.len()) } else { bad_arith.join(", ") },
        )];
        let shrinking: Vec<String> = self
            .e_infinity
            .iter()
            .filter(|(b, (g, _))| {
                let e1 = &self.e1[b];
                match (e1.order(), g.order()) {
                    (Some(a), Some(c)) => (a % c) != Integer::zero(),
                    (Some(_), None) => true,
                    (None, _) => g.free_rank > e1.free_rank,
                }
            })
            .map(|(b, (g, _))| format!("E{b}: {} -> {g}", self.e1[b]))
            .collect();
        checks.push(Check::new(
            "each later page is a subquotient of E1",
            shrinking.is_empty(),
            if shrinking.is_empty() { format!("{} bidegrees", self.e_infinity.len()) } else { shrinking.join(", ") },
        ));
        let open: Vec<String> = self
            .differentials
            .iter()
            .filter(|d| d.status == DifferentialStatus::Undetermined)
            .map(|d| format!("d^{} on ({},{}): {}", d.r, d.t, d.n, d.reason))
            .collect();
        let name = "all differentials through the computed pages are determined";
        checks.push(if open.is_empty() {
            let nonzero = self.differentials.iter().filter(|d| d.status == DifferentialStatus::Nonzero).count();
            Check::new(name, true, format!("{} records, {nonzero} nonzero", self.differentials.len()))
        } else {
            Check::undetermined(name, open.join("; "))
        });
        checks
    }

    /// Refuses to treat undetermined differentials as zero unless asked to.
    pub fn require_determined(&self) -> Result<()> {
        if self.config.assume_zero {
            return Ok(());
        }
        match self.differentials.iter().find(|d| d.status == DifferentialStatus::Undetermined) {
            None => Ok(()),
            Some(d) => Err(Error::Precondition(format!(
                "d^{} on ({},{}) is undetermined; rerun with --assume-zero to advance past it",
                d.r, d.t, d.n
            ))),
        }
    }

    /// Per stem: surviving graded orders and their total, compared with the
    /// reference table.
    pub fn assemble_stems(&self, reference: &[Order]) -> Vec<StemReport> {
        let beyond_free = ceil_log2(self.config.t_max + 1);
        (0..=self.config.stem_max)
            .map(|s| {
                let mut graded = Vec::new();
                let mut lower = Order::Finite(Integer::one());
                let mut upper = Order::Finite(Integer::one());
                let mut exact = true;
                for (b, (g, ex)) in self.e_infinity.iter().filter(|(b, _)| b.n == s) {
                    if g.is_trivial() && *ex {
                        continue;
                    }
                    let o = Order::of(g);
                    graded.push(GradedOrder { t: b.t, order: o.to_string(), exact: *ex });
                    upper = upper.mul(&o);
                    if *ex {
                        lower = lower.mul(&o);
                    } else {
                        exact = false;
                    }
                }
                let unbounded = s > beyond_free;
                let total = if lower == Order::Infinite {
                    TotalOrder::Exact(Order::Infinite)
                } else if exact && !unbounded {
                    TotalOrder::Exact(lower)
                } else {
                    TotalOrder::Interval { lower, upper: if unbounded { None } else { Some(upper) } }
                };
                let reference = reference.get(s).cloned();
                let matches = match (&reference, &total) {
                    (None, _) => MatchStatus::NoReference,
                    (Some(r), TotalOrder::Exact(o)) if r == o => MatchStatus::Match,
                    (Some(_), TotalOrder::Exact(_)) => MatchStatus::Mismatch,
                    (Some(r), t) if t.contains(r) => MatchStatus::Consistent,
                    (Some(_), _) => MatchStatus::Mismatch,
                };
                StemReport { n: s, graded_orders: graded, total, reference, matches }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedOrder {
    pub t: usize,
    pub order: String,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStatus {
    Match,
    Mismatch,
    /// An interval containing the reference value.
    Consistent,
    NoReference,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StemReport {
    pub n: usize,
    pub graded_orders: Vec<GradedOrder>,
    pub total: TotalOrder,
    pub reference: Option<Order>,
    pub matches: MatchStatus,
}

/// Orders of `π_{n+1}(S²)` for `n = 0..=5`, taken from the literature.
pub fn reference_orders() -> Vec<Order> {
    let f = |k: i64| Order::Finite(Integer::from(k));
    vec![f(1), Order::Infinite, Order::Infinite, f(2), f(2), f(12)]
}

/// `t = 2p^s` for a prime `p` and `s ≥ 0`; returns `(p, s)` (with `p = 2`,
/// `s = 0` standing for `t = 2`).
pub fn twice_prime_power(t: usize) -> Option<(usize, u32)> {
    if t % 2 != 0 || t == 0 {
        return None;
    }
    let h = t / 2;
    if h == 1 {
        return Some((2, 0));
    }
    let p = (2..=h).find(|d| h % d == 0)?;
    let mut k = h;
    let mut s = 0;
    while k % p == 0 {
        k /= p;
        s += 1;
    }
    (k == 1).then_some((p, s))
}

/// Page indices `2p^u − 2p^s` (`u > s`) allowed for a nonzero differential
/// on `E_{2p^s}` with `s > 0`.
pub fn allowed_page(t: usize, r: usize) -> bool {
    match twice_prime_power(t) {
        Some((p, s)) if s > 0 => {
            let mut target = t;
            loop {
                target *= p;
                if target - t == r {
                    return true;
                }
                if target - t > r {
                    return false;
                }
            }
        }
        _ => true,
    }
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub table: BTreeMap<Bidegree, AbelianGroup>,
    pub checks: Vec<Check>,
}

/// Tabulates `E¹_{t,n}` and checks the weight-vanishing and exponent pattern.
pub fn vanishing_report(
    table: &BTreeMap<Bidegree, AbelianGroup>,
    ring: RingKind,
    differentials: &[DifferentialRecord],
) -> VanishingReport {
    let mut checks = Vec::new();
    let ts: std::collections::BTreeSet<usize> = table.keys().map(|b| b.t).collect();
    let integral = ring == RingKind::Integers;
    for &t in &ts {
        let row: Vec<(&Bidegree, &AbelianGroup)> = table.iter().filter(|(b, _)| b.t == t).collect();
        let n_max = row.iter().map(|(b, _)| b.n).max().unwrap_or(0);
        let listing = row.iter().filter(|(_, g)| !g.is_trivial()).map(|(b, g)| format!("E{b}={g}")).collect::<Vec<_>>().join(", ");
        let listing = if listing.is_empty() { "all zero".to_string() } else { listing };
        let allowed = t == 1 || twice_prime_power(t).is_some();
        if !allowed {
            let name = format!("E1 vanishes at t={t}, n≤{n_max}");
            if integral {
                checks.push(Check::new(name, row.iter().all(|(_, g)| g.is_trivial()), listing));
            } else {
                checks.push(Check::undetermined(name, format!("statement is integral; {listing}")));
            }
        } else if let Some((p, s)) = twice_prime_power(t) {
            if s > 0 {
                let name = format!("{p}·E1 = 0 at t={t}, n≤{n_max}");
                let pi = Integer::from(p);
                let ok = row.iter().all(|(_, g)| g.free_rank == 0 && g.invariant_factors.iter().all(|d| *d == pi));
                if integral {
                    checks.push(Check::new(name, ok, listing));
                } else {
                    checks.push(Check::undetermined(name, format!("statement is integral; {listing}")));
                }
            }
        }
    }
    checks.push(connectivity_check(table, ring));
    let nonzero: Vec<&DifferentialRecord> = differentials.iter().filter(|d| d.status == DifferentialStatus::Nonzero).collect();
    let bad: Vec<String> =
        nonzero.iter().filter(|d| !allowed_page(d.t, d.r)).map(|d| format!("d^{} on ({},{})", d.r, d.t, d.n)).collect();
    checks.push(Check::new(
        "nonzero differentials occur only on pages 2p^u − 2p^s",
        bad.is_empty(),
        if bad.is_empty() { format!("{} nonzero differentials", nonzero.len()) } else { bad.join(", ") },
    ));
    VanishingReport { table: table.clone(), checks }
}

/// Every computed integral entry on or below the connectivity line vanishes.
pub fn connectivity_check(table: &BTreeMap<Bidegree, AbelianGroup>, ring: RingKind) -> Check {
    let name = "computed E1 vanishes on the connectivity line n ≤ ⌈log2 t⌉";
    if ring != RingKind::Integers {
        return Check::undetermined(name, "the connectivity line is used for the integral sequence only");
    }
    let violations: Vec<String> = table
        .iter()
        .filter(|(b, g)| below_connectivity_line(b.t, b.n) && !g.is_trivial())
        .map(|(b, g)| format!("E{b}={g}"))
        .collect();
    let on_line = table.keys().filter(|b| below_connectivity_line(b.t, b.n)).count();
    Check::new(
        name,
        violations.is_empty(),
        if violations.is_empty() { format!("{on_line} entries on or below the line") } else { violations.join(", ") },
    )
}

/// The same `E¹` entries computed in the reversed-alphabet Hall basis.
pub fn basis_independence_check(t_max: usize, n_max: usize) -> Result<Check> {
    let mut mismatches = Vec::new();
    let mut count = 0;
    for t in 1..=t_max {
        for n in 1..=n_max.min(t) {
            let a = e1_group::<Integer>(t, n)?;
            let b = e1_group_in::<Integer>(t, n, BasisOrder::ReversedAlphabet)?;
            count += 1;
            if a != b {
                mismatches.push(format!("({t},{n}): {a} vs {b}"));
            }
        }
    }
    Ok(Check::new(
        format!("E1 independent of the Hall basis, t≤{t_max}, n≤{n_max}"),
        mismatches.is_empty(),
        if mismatches.is_empty() { format!("{count} bidegrees") } else { mismatches.join("; ") },
    ))
}

/// Consecutive Moore boundary matrices compose to zero.
pub fn boundary_squares_vanish<R: EuclideanRing>(t_max: usize, q_max: usize) -> Result<Check> {
    let mut bad = Vec::new();
    for t in 1..=t_max {
        for q in 2..=q_max.min(t + 1) {
            let outer = moore_boundary_matrix::<R>(t, q - 1)?;
            let inner = moore_boundary_matrix::<R>(t, q)?;
            if !outer.mul(&inner)?.is_zero() {
                bad.push(format!("({t},{q})"));
            }
        }
    }
    Ok(Check::new(
        format!("d0∘d0 = 0 on Moore bases, t≤{t_max}, q≤{q_max}, ring {}", R::kind()),
        bad.is_empty(),
        if bad.is_empty() { "all compositions vanish".to_string() } else { bad.join(", ") },
    ))
}

/// Size of the non-degenerate basis, for reports.
pub fn moore_rank<R: EuclideanRing>(t: usize, q: usize) -> Result<usize> {
    Ok(nondegenerate_basis::<R>(t, q)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lie(q: usize, terms: &[(&str, i64)]) -> LieElement<Integer> {
        let basis = terms.iter().map(|(s, c)| {
            let v: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
            (LieBasisElement::plain(crate::lie::LyndonWord::new(&v).unwrap()), Integer::from(*c))
        });
        LieElement::from_terms(q, basis).unwrap()
    }

    #[test]
    fn low_e1_entries() {
        assert_eq!(e1_group::<Integer>(1, 1).unwrap(), AbelianGroup::free(1));
        assert_eq!(e1_group::<Integer>(2, 2).unwrap(), AbelianGroup::free(1));
        for n in 1..=5 {
            assert!(e1_group::<Integer>(3, n).unwrap().is_trivial());
        }
        let e = e1_entry::<Integer>(2, 2).unwrap();
        assert_eq!(e.generators.len(), 1);
        assert_eq!(e.generators[0].to_string(), "[x0,x1]");
        let e = e1_entry::<Integer>(4, 3).unwrap();
        assert_eq!(e.group.invariant_factors, vec![Integer::from(2)]);
    }

    #[test]
    fn lifts_match_examples() {
        let rep = lift_to_moore_representative(&lie(2, &[("01", 1)]), 2).unwrap();
        assert_eq!(rep.word.to_string(), "y0^-1 y1^-1 y0 y1");
        let rep2 = lift_to_moore_representative(&lie(2, &[("01", 2)]), 2).unwrap();
        assert_eq!(rep2.word, rep.word.pow(2));
        let rep3 = lift_to_moore_representative(&lie(3, &[("012", 1)]), 3).unwrap();
        let y = |i| Word::generator(3, i).unwrap();
        assert_eq!(rep3.word, y(0).commutator(&y(1).commutator(&y(2)).unwrap()).unwrap());
    }

    #[test]
    fn engine_examples() {
        let rep = lift_to_moore_representative(&lie(2, &[("01", 1)]), 2).unwrap();
        assert!(matches!(differential(&rep, 2).unwrap(), DifferentialOutcome::Survives { .. }));
        let rep = lift_to_moore_representative(&lie(1, &[("0", 1)]), 1).unwrap();
        assert!(matches!(differential(&rep, 3).unwrap(), DifferentialOutcome::Survives { .. }));
        let e = e1_entry::<Integer>(4, 3).unwrap();
        let rep = lift_to_moore_representative(&e.generators[0], 4).unwrap();
        assert!(matches!(differential(&rep, 1).unwrap(), DifferentialOutcome::Survives { .. }));
    }

    #[test]
    fn crosscheck_small() {
        for (t, n) in [(1, 1), (2, 2), (4, 3)] {
            for c in d1_crosscheck(t, n).unwrap() {
                assert!(c.passed(), "{c:?}");
            }
        }
    }

    #[test]
    fn weight_patterns() {
        assert_eq!(twice_prime_power(2), Some((2, 0)));
        assert_eq!(twice_prime_power(8), Some((2, 2)));
        assert_eq!(twice_prime_power(6), Some((3, 1)));
        assert_eq!(twice_prime_power(12), None);
        assert_eq!(twice_prime_power(7), None);
        assert!(allowed_page(4, 4));
        assert!(!allowed_page(4, 2));
        assert!(allowed_page(6, 12));
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn small_sequence_assembles() {
        let cfg = SpectralConfig { t_max: 4, stem_max: 3, assume_zero: false, use_engine: true };
        let table = e1_table(&cfg.required_bidegrees()).unwrap();
        let ss = SpectralSequence::compute(cfg, table).unwrap();
        let stems = ss.assemble_stems(&reference_orders());
        assert_eq!(stems[0].total, TotalOrder::Exact(Order::Finite(Integer::one())));
        assert_eq!(stems[1].total, TotalOrder::Exact(Order::Infinite));
        assert_eq!(stems[3].total, TotalOrder::Exact(Order::Finite(Integer::from(2))));
        assert!(stems.iter().all(|s| s.matches == MatchStatus::Match));
    }
}
