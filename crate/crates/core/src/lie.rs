//! Free Lie algebras on Lyndon bases and the simplicial Lie algebra L(S¹).
//!
//! A basis element is the standard bracketing `P_w` of a Lyndon word `w`;
//! over `Z/p` the restricted powers `P_w^{p^s}` are adjoined. Expanded in the
//! tensor algebra, `P_w = w + (lexicographically larger words)`, and
//! `P_w^{p^s}` has leading word `w^{p^s}`. Distinct basis elements have
//! distinct leading words, which makes recognition a triangular solve.
//!
//! Internally a monomial of length `≤ 16` in `≤ 16` letters is packed into a
//! `u64`, four bits per letter, first letter most significant. For words of
//! equal length the packed order is the lexicographic order.

use std::any::Any;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rand::Rng;

use crate::error::{arg_err, Error, Result};
use crate::exactla::Matrix;
use crate::magnus::{Monomial, Series};
use crate::scalar::{Coefficient, EuclideanRing, RingKind};

pub const MAX_LIE_VARS: usize = 16;
pub const MAX_LIE_WEIGHT: usize = 16;

/// Expansions of Lyndon words up to this weight are memoized globally.
const CACHED_WEIGHT: usize = 7;

fn check_caps(n_vars: usize, weight: usize) -> Result<()> {
    if n_vars > MAX_LIE_VARS {
        return Err(Error::Capacity(format!("{n_vars} variables exceed the Lie cap {MAX_LIE_VARS}")));
    }
    if weight > MAX_LIE_WEIGHT {
        return Err(Error::Capacity(format!("weight {weight} exceeds the Lie cap {MAX_LIE_WEIGHT}")));
    }
    Ok(())
}

fn pack(letters: &[u8]) -> u64 {
    letters.iter().fold(0u64, |acc, &l| (acc << 4) | l as u64)
}

fn unpack(key: u64, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((key >> (4 * i)) & 0xf) as u8).collect()
}

pub fn is_lyndon(w: &[u8]) -> bool {
    if w.is_empty() {
        return false;
    }
    (1..w.len()).all(|i| {
        let rot = w[i..].iter().chain(&w[..i]);
        rot.cmp(w.iter()) == std::cmp::Ordering::Greater
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LyndonWord {
    letters: Vec<u8>,
    /// Start of the longest proper Lyndon suffix (0 for single letters).
    split: usize,
}

impl LyndonWord {
    pub fn new(letters: &[u8]) -> Result<Self> {
        if !is_lyndon(letters) {
            return arg_err(format!("{letters:?} is not a Lyndon word"));
        }
        let split = (1..letters.len()).find(|&i| is_lyndon(&letters[i..])).unwrap_or(0);
        Ok(LyndonWord { letters: letters.to_vec(), split })
    }

    pub fn letter(l: u8) -> Self {
        LyndonWord { letters: vec![l], split: 0 }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    /// `(u, v)` with `w = uv`, `v` the longest proper Lyndon suffix.
    pub fn standard_factorization(&self) -> Option<(LyndonWord, LyndonWord)> {
        if self.split == 0 {
            return None;
        }
        let u = LyndonWord::new(&self.letters[..self.split]).expect("left factor is Lyndon");
        let v = LyndonWord::new(&self.letters[self.split..]).expect("right factor is Lyndon");
        Some((u, v))
    }

    /// Uses every letter `0..q`.
    pub fn covers(&self, q: usize) -> bool {
        covers(&self.letters, q)
    }
}

fn covers(letters: &[u8], q: usize) -> bool {
    let mut seen = 0u32;
    for &l in letters {
        seen |= 1 << l;
    }
    q <= 32 && seen == ((1u64 << q) - 1) as u32 && letters.iter().all(|&l| (l as usize) < q)
}

impl fmt::Display for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.standard_factorization() {
            None => write!(f, "x{}", self.letters[0]),
            Some((u, v)) => write!(f, "[{u},{v}]"),
        }
    }
}

/// All Lyndon words of length exactly `weight` over `n_vars` letters, in
/// lexicographic order.
pub fn lyndon_words(n_vars: usize, weight: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if n_vars == 0 || weight == 0 {
        return out;
    }
    let k = n_vars as u8;
    let mut w: Vec<u8> = vec![0];
    loop {
        if w.len() == weight {
            out.push(w.clone());
        }
        let m = w.len();
        while w.len() < weight {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&(k - 1)) {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(l) => *l += 1,
        }
    }
    out
}

pub fn lyndon_basis(n_vars: usize, weight: usize) -> Result<Vec<LyndonWord>> {
    if weight == 0 {
        return arg_err("Lyndon basis needs weight at least 1");
    }
    check_caps(n_vars, weight)?;
    Ok(lyndon_words(n_vars, weight).iter().map(|w| LyndonWord::new(w).expect("generated Lyndon")).collect())
}

/// `P_w^{power}`, where `power` is 1 or a power of the characteristic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LieBasisElement {
    pub word: LyndonWord,
    pub power: u32,
}

impl LieBasisElement {
    pub fn plain(word: LyndonWord) -> Self {
        LieBasisElement { word, power: 1 }
    }

    pub fn weight(&self) -> usize {
        self.word.weight() * self.power as usize
    }

    pub fn leading_word(&self) -> Vec<u8> {
        self.word.letters.repeat(self.power as usize)
    }

    fn leading_key(&self) -> u64 {
        pack(&self.leading_word())
    }
}

impl fmt::Display for LieBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.power == 1 {
            write!(f, "{}", self.word)
        } else {
            write!(f, "{}^{}", self.word, self.power)
        }
    }
}

/// Splits `m` as `w^k` with `w` primitive; returns the root length.
fn primitive_root_len(m: &[u8]) -> usize {
    let n = m.len();
    (1..=n).find(|&d| n % d == 0 && (d..n).all(|i| m[i] == m[i - d])).unwrap_or(n)
}

/// The basis element with leading word `m`, if any, in characteristic `p`.
fn basis_with_leading_word(m: &[u8], p: u32) -> Option<LieBasisElement> {
    let d = primitive_root_len(m);
    let k = (m.len() / d) as u32;
    let root = &m[..d];
    if !is_lyndon(root) {
        return None;
    }
    let ok = k == 1 || (p != 0 && is_power_of(k, p));
    ok.then(|| LieBasisElement { word: LyndonWord::new(root).expect("checked"), power: k })
}

fn is_power_of(mut k: u32, p: u32) -> bool {
    if p < 2 {
        return false;
    }
    while k % p == 0 {
        k /= p;
    }
    k == 1
}

/// Sparse integer polynomial in packed monomials of one fixed length,
/// sorted by key with no zero coefficients.
type Poly = Vec<(u64, i64)>;

fn collect_poly(mut terms: Vec<(u64, i64)>) -> Poly {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Poly = Vec::with_capacity(terms.len());
    for (k, c) in terms {
        match out.last_mut() {
            Some((lk, lc)) if *lk == k => *lc += c,
            _ => out.push((k, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    out
}

fn poly_mul(a: &Poly, b: &Poly, b_len: usize) -> Vec<(u64, i64)> {
    let shift = 4 * b_len as u32;
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ka, ca) in a {
        for (kb, cb) in b {
            out.push(((ka << shift) | kb, ca * cb));
        }
    }
    out
}

type ExpansionCache = RwLock<HashMap<(usize, u64), Arc<Poly>>>;

fn expansion_cache() -> &'static ExpansionCache {
    static CACHE: OnceLock<ExpansionCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Expansion of the standard bracketing of a Lyndon word.
fn expand_lyndon(letters: &[u8]) -> Arc<Poly> {
    let n = letters.len();
    let key = (n, pack(letters));
    if n <= CACHED_WEIGHT {
        if let Some(p) = expansion_cache().read().expect("cache lock").get(&key) {
            return p.clone();
        }
    }
    let result = if n == 1 {
        vec![(letters[0] as u64, 1)]
    } else {
        let split = (1..n).find(|&i| is_lyndon(&letters[i..])).expect("Lyndon words of length > 1 factor");
        let (u, v) = (&letters[..split], &letters[split..]);
        let (pu, pv) = (expand_lyndon(u), expand_lyndon(v));
        let mut terms = poly_mul(&pu, &pv, v.len());
        terms.extend(poly_mul(&pv, &pu, u.len()).into_iter().map(|(k, c)| (k, -c)));
        collect_poly(terms)
    };
    let result = Arc::new(result);
    if n <= CACHED_WEIGHT {
        expansion_cache().write().expect("cache lock").insert(key, result.clone());
    }
    result
}

fn expand_basis_element(b: &LieBasisElement) -> Arc<Poly> {
    let base = expand_lyndon(&b.word.letters);
    if b.power == 1 {
        return base;
    }
    let w = b.word.weight();
    let mut acc: Poly = (*base).clone();
    for k in 1..b.power as usize {
        acc = collect_poly(poly_mul(&acc, &base, w));
        debug_assert!(k * w + w <= MAX_LIE_WEIGHT);
    }
    Arc::new(acc)
}

/// A finite combination of basis elements, possibly of mixed weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LieElement<R> {
    n_vars: usize,
    terms: BTreeMap<LieBasisElement, R>,
}

impl<R: Coefficient> LieElement<R> {
    pub fn zero(n_vars: usize) -> Self {
        LieElement { n_vars, terms: BTreeMap::new() }
    }

    pub fn basis(n_vars: usize, b: LieBasisElement) -> Result<Self> {
        Self::from_terms(n_vars, [(b, R::one())])
    }

    pub fn generator(n_vars: usize, i: usize) -> Result<Self> {
        if i >= n_vars {
            return arg_err(format!("x{i} out of range for {n_vars} variables"));
        }
        Self::basis(n_vars, LieBasisElement::plain(LyndonWord::letter(i as u8)))
    }

    pub fn from_terms<I>(n_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LieBasisElement, R)>,
    {
        let p = R::characteristic();
        let mut out = Self::zero(n_vars);
        for (b, c) in terms {
            if b.word.letters.iter().any(|&l| l as usize >= n_vars) {
                return arg_err(format!("basis element {b} uses a letter outside {n_vars} variables"));
            }
            if b.power != 1 && !(p != 0 && is_power_of(b.power, p)) {
                return arg_err(format!("restricted power {} is not allowed over {}", b.power, R::kind()));
            }
            check_caps(n_vars, b.weight())?;
            out.add_term(b, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, b: LieBasisElement, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &BTreeMap<LieBasisElement, R> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, b: &LieBasisElement) -> R {
        self.terms.get(b).cloned().unwrap_or_else(R::zero)
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(LieBasisElement::weight).max().unwrap_or(0)
    }

    pub fn homogeneous_part(&self, weight: usize) -> Self {
        LieElement {
            n_vars: self.n_vars,
            terms: self.terms.iter().filter(|(b, _)| b.weight() == weight).map(|(b, c)| (b.clone(), c.clone())).collect(),
        }
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.n_vars != o.n_vars {
            return arg_err(format!("Lie elements in {} and {} variables", self.n_vars, o.n_vars));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-R::one())
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero(self.n_vars);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c.mul_ref(s));
        }
        out
    }
}

impl<R: Coefficient> fmt::Display for LieElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<(&LieBasisElement, &R)> = self.terms.iter().collect();
        ordered.sort_by_key(|(b, _)| (b.weight(), b.leading_key()));
        for (i, (b, c)) in ordered.into_iter().enumerate() {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag != "1" {
                write!(f, "{mag}*")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Expansion in the tensor algebra, truncated at the top weight present.
pub fn tensor_expand<R: Coefficient>(a: &LieElement<R>) -> Series<R> {
    let trunc = a.max_weight();
    let mut terms: Vec<(Monomial, R)> = Vec::new();
    for (b, c) in &a.terms {
        let w = b.weight();
        for (k, e) in expand_basis_element(b).iter() {
            terms.push((unpack(*k, w).into_iter().collect(), R::from_i64(*e).mul_ref(c)));
        }
    }
    Series::from_terms(a.n_vars, trunc, terms).expect("letters in range")
}

/// Writes a series with no constant term as a Lie element, or reports that
/// it is not one.
pub fn lie_recognize<R: Coefficient>(f: &Series<R>) -> Result<LieElement<R>> {
    let n = f.n_vars();
    let p = R::characteristic();
    if !f.constant_term().is_zero() {
        return Err(Error::NotLie(format!("{f} has a constant term")));
    }
    let mut by_weight: BTreeMap<usize, BTreeMap<u64, R>> = BTreeMap::new();
    for (m, c) in f.terms() {
        check_caps(n, m.len())?;
        by_weight.entry(m.len()).or_default().insert(pack(m), c.clone());
    }
    let mut out = LieElement::zero(n);
    for (w, mut residual) in by_weight {
        while let Some((&key, _)) = residual.iter().next() {
            let c = residual.remove(&key).expect("present");
            let lead = unpack(key, w);
            let Some(b) = basis_with_leading_word(&lead, p) else {
                return Err(Error::NotLie(format!("{f} is not a Lie element")));
            };
            for (k, e) in expand_basis_element(&b).iter().skip_while(|(k, _)| *k == key) {
                let entry = residual.entry(*k).or_insert_with(R::zero);
                *entry = entry.clone() - R::from_i64(*e).mul_ref(&c);
                if entry.is_zero() {
                    residual.remove(k);
                }
            }
            out.add_term(b, c);
        }
    }
    Ok(out)
}

pub fn bracket<R: Coefficient>(a: &LieElement<R>, b: &LieElement<R>) -> Result<LieElement<R>> {
    a.check_same(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(LieElement::zero(a.n_vars));
    }
    let trunc = a.max_weight() + b.max_weight();
    check_caps(a.n_vars, trunc)?;
    let ea = tensor_expand(a).truncated_up(trunc);
    let eb = tensor_expand(b).truncated_up(trunc);
    let prod = ea.mul(&eb)?.sub(&eb.mul(&ea)?)?;
    lie_recognize(&prod).map_err(|e| Error::Internal(format!("bracket left the Lie algebra: {e}")))
}

trait RaiseTrunc {
    fn truncated_up(self, trunc: usize) -> Self;
}

impl<R: Coefficient> RaiseTrunc for Series<R> {
    fn truncated_up(self, trunc: usize) -> Self {
        let n = self.n_vars();
        Series::from_terms(n, trunc, self.into_terms()).expect("same letters")
    }
}

/// Images of the generators under the linearized face `d_j` in dimension `q`.
fn linear_face_images(j: usize, q: usize) -> Result<Vec<Vec<(u8, i64)>>> {
    if q == 0 || j > q {
        return arg_err(format!("face d{j} undefined in dimension {q}"));
    }
    Ok((0..q)
        .map(|k| {
            if j <= k {
                if k == 0 {
                    (0..q - 1).map(|i| (i as u8, -1)).collect()
                } else {
                    vec![((k - 1) as u8, 1)]
                }
            } else if j == k + 1 {
                Vec::new()
            } else {
                vec![(k as u8, 1)]
            }
        })
        .collect())
}

fn linear_degeneracy_images(j: usize, q: usize) -> Result<Vec<Vec<(u8, i64)>>> {
    if j > q {
        return arg_err(format!("degeneracy s{j} undefined in dimension {q}"));
    }
    Ok((0..q)
        .map(|k| {
            if j <= k {
                vec![((k + 1) as u8, 1)]
            } else if j == k + 1 {
                vec![(k as u8, 1), ((k + 1) as u8, 1)]
            } else {
                vec![(k as u8, 1)]
            }
        })
        .collect())
}

fn apply_linear_map<R: Coefficient>(a: &LieElement<R>, images: &[Vec<(u8, i64)>], target_vars: usize) -> Result<LieElement<R>> {
    if images.len() != a.n_vars {
        return arg_err(format!("{} images for {} variables", images.len(), a.n_vars));
    }
    check_caps(target_vars, a.max_weight())?;
    let mut weights: BTreeMap<usize, BTreeMap<u64, R>> = BTreeMap::new();
    for (b, c) in &a.terms {
        let w = b.weight();
        let target = weights.entry(w).or_default();
        for (k, e) in expand_basis_element(b).iter() {
            let coeff = R::from_i64(*e).mul_ref(c);
            substitute_monomial(&unpack(*k, w), images, |key, sign| {
                let v = target.entry(key).or_insert_with(R::zero);
                v.add_assign_ref(&R::from_i64(sign).mul_ref(&coeff));
            });
        }
    }
    let mut series_terms: Vec<(Monomial, R)> = Vec::new();
    for (w, m) in weights {
        for (k, c) in m {
            if !c.is_zero() {
                series_terms.push((unpack(k, w).into_iter().collect(), c));
            }
        }
    }
    let trunc = a.max_weight();
    let s = Series::from_terms(target_vars, trunc, series_terms)?;
    lie_recognize(&s).map_err(|e| Error::Internal(format!("simplicial map left the Lie algebra: {e}")))
}

/// Expands the product of linear images along a monomial, calling `emit`
/// with each packed result and its integer coefficient.
fn substitute_monomial(m: &[u8], images: &[Vec<(u8, i64)>], mut emit: impl FnMut(u64, i64)) {
    fn go(m: &[u8], images: &[Vec<(u8, i64)>], acc: u64, coeff: i64, emit: &mut impl FnMut(u64, i64)) {
        match m.split_first() {
            None => emit(acc, coeff),
            Some((&l, rest)) => {
                for &(t, c) in &images[l as usize] {
                    go(rest, images, (acc << 4) | t as u64, coeff * c, emit);
                }
            }
        }
    }
    go(m, images, 0, 1, &mut emit);
}

/// `d_j` on `L(S¹)_q`.
pub fn lie_face<R: Coefficient>(j: usize, a: &LieElement<R>, q: usize) -> Result<LieElement<R>> {
    if a.n_vars != q {
        return arg_err(format!("element has {} variables, dimension is {q}", a.n_vars));
    }
    apply_linear_map(a, &linear_face_images(j, q)?, q - 1)
}

/// `s_j` on `L(S¹)_q`.
pub fn lie_degeneracy<R: Coefficient>(j: usize, a: &LieElement<R>, q: usize) -> Result<LieElement<R>> {
    if a.n_vars != q {
        return arg_err(format!("element has {} variables, dimension is {q}", a.n_vars));
    }
    apply_linear_map(a, &linear_degeneracy_images(j, q)?, q + 1)
}

/// Basis elements of weight `t` on `q` letters using every letter, sorted by
/// leading word. In characteristic `p` the restricted powers are included.
pub fn nondegenerate_basis_for(t: usize, q: usize, ring: RingKind) -> Result<Vec<LieBasisElement>> {
    if t == 0 {
        return arg_err("weight must be at least 1");
    }
    check_caps(q, t)?;
    let p = ring.characteristic();
    let mut out = Vec::new();
    let mut power = 1usize;
    loop {
        if t % power == 0 && t / power >= q {
            for w in lyndon_words(q, t / power) {
                if covers(&w, q) {
                    out.push(LieBasisElement { word: LyndonWord::new(&w).expect("generated"), power: power as u32 });
                }
            }
        }
        if p == 0 || power * (p as usize) > t {
            break;
        }
        power *= p as usize;
    }
    out.sort_by_key(LieBasisElement::leading_key);
    Ok(out)
}

pub fn nondegenerate_basis<R: Coefficient>(t: usize, q: usize) -> Result<Vec<LieBasisElement>> {
    nondegenerate_basis_for(t, q, R::kind())
}

/// Which Hall basis the boundary matrices are written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisOrder {
    /// Lyndon words for `x_0 < x_1 < ⋯`.
    Lexicographic,
    /// Lyndon words for the reversed alphabet `x_{q-1} < ⋯ < x_0`; a
    /// genuinely different basis of the same modules.
    ReversedAlphabet,
}

fn relabel(letters: &mut [u8], q: usize) {
    for l in letters.iter_mut() {
        *l = (q - 1) as u8 - *l;
    }
}

/// Target side of a boundary computation: leading-word index and the
/// off-diagonal part of the unitriangular expansion matrix.
struct TargetTable<R> {
    index: HashMap<u64, usize>,
    lower: Vec<Vec<(usize, R)>>,
}

fn target_table<R: Coefficient>(basis: &[LieBasisElement]) -> TargetTable<R> {
    let index: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, b)| (b.leading_key(), i)).collect();
    let lower = basis
        .iter()
        .enumerate()
        .map(|(i, b)| {
            expand_basis_element(b)
                .iter()
                .filter_map(|(k, c)| index.get(k).map(|&r| (r, R::from_i64(*c))))
                .filter(|(r, c)| *r != i && !c.is_zero())
                .collect()
        })
        .collect();
    TargetTable { index, lower }
}

/// Coordinates (in the target basis) of `d_0` of a source basis element.
fn boundary_column<R: Coefficient>(
    b: &LieBasisElement,
    q: usize,
    order: BasisOrder,
    images: &[Vec<(u8, i64)>],
    table: &TargetTable<R>,
) -> Vec<(usize, R)> {
    let t = b.weight();
    let mut rows: HashMap<usize, i64> = HashMap::new();
    for (k, c) in expand_basis_element(b).iter() {
        let mut letters = unpack(*k, t);
        if order == BasisOrder::ReversedAlphabet {
            relabel(&mut letters, q);
        }
        substitute_monomial(&letters, images, |key, sign| {
            let key = if order == BasisOrder::ReversedAlphabet {
                let mut l = unpack(key, t);
                relabel(&mut l, q - 1);
                pack(&l)
            } else {
                key
            };
            if let Some(&r) = table.index.get(&key) {
                *rows.entry(r).or_insert(0) += sign * c;
            }
        });
    }
    let mut residual: BTreeMap<usize, R> =
        rows.into_iter().map(|(r, c)| (r, R::from_i64(c))).filter(|(_, c)| !c.is_zero()).collect();
    let mut column = Vec::new();
    while let Some((&r, _)) = residual.iter().next() {
        let c = residual.remove(&r).expect("present");
        for (r2, a) in &table.lower[r] {
            let e = residual.entry(*r2).or_insert_with(R::zero);
            *e = e.clone() - a.mul_ref(&c);
            if e.is_zero() {
                residual.remove(r2);
            }
        }
        column.push((r, c));
    }
    column
}

type MatrixCache = Mutex<HashMap<(usize, usize, RingKind, BasisOrder), Arc<dyn Any + Send + Sync>>>;

fn matrix_cache() -> &'static MatrixCache {
    static CACHE: OnceLock<MatrixCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Matrix of `d_0 : N L_t(S¹)_q → N L_t(S¹)_{q-1}` in the non-degenerate
/// bases (rows: target, columns: source). Memoized per `(t, q, ring, order)`.
pub fn moore_boundary_matrix<R: EuclideanRing>(t: usize, q: usize) -> Result<Arc<Matrix<R>>> {
    moore_boundary_matrix_in(t, q, BasisOrder::Lexicographic)
}

pub fn moore_boundary_matrix_in<R: EuclideanRing>(t: usize, q: usize, order: BasisOrder) -> Result<Arc<Matrix<R>>> {
    if t == 0 || q == 0 {
        return arg_err("boundary matrices need t, q ≥ 1");
    }
    let key = (t, q, R::kind(), order);
    if let Some(m) = matrix_cache().lock().expect("cache lock").get(&key) {
        return Ok(m.clone().downcast::<Matrix<R>>().expect("cache type"));
    }
    let source = nondegenerate_basis::<R>(t, q)?;
    let target = nondegenerate_basis::<R>(t, q - 1)?;
    let table = target_table::<R>(&target);
    let images = linear_face_images(0, q)?;
    let columns: Vec<Vec<(usize, R)>> =
        source.iter().map(|b| boundary_column(b, q, order, &images, &table)).collect();
    let m = Arc::new(Matrix::from_columns(target.len(), columns)?);
    matrix_cache().lock().expect("cache lock").insert(key, m.clone());
    Ok(m)
}

/// The element of `L(S¹)_q` named by a coordinate vector over the
/// non-degenerate basis.
pub fn element_from_coordinates<R: Coefficient>(t: usize, q: usize, coords: &[R]) -> Result<LieElement<R>> {
    let basis = nondegenerate_basis::<R>(t, q)?;
    if basis.len() != coords.len() {
        return arg_err(format!("{} coordinates for a basis of size {}", coords.len(), basis.len()));
    }
    LieElement::from_terms(q, basis.into_iter().zip(coords.iter().cloned()))
}

/// Coordinates over the non-degenerate basis of a homogeneous element built
/// from non-degenerate basis elements.
pub fn coordinates_of<R: Coefficient>(a: &LieElement<R>, t: usize) -> Result<Vec<R>> {
    let basis = nondegenerate_basis::<R>(t, a.n_vars)?;
    let pos: HashMap<&LieBasisElement, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut out = vec![R::zero(); basis.len()];
    for (b, c) in &a.terms {
        match pos.get(b) {
            Some(&i) => out[i] = c.clone(),
            None => return arg_err(format!("{b} is not a non-degenerate basis element of weight {t}")),
        }
    }
    Ok(out)
}

/// A random element built from basis elements of weights `1..=max_weight`.
pub fn random_lie_element<R: Coefficient, G: Rng>(rng: &mut G, n_vars: usize, max_weight: usize, n_terms: usize) -> LieElement<R> {
    let mut out = LieElement::zero(n_vars);
    for _ in 0..n_terms {
        let w = rng.gen_range(1..=max_weight);
        let words = lyndon_words(n_vars, w);
        if words.is_empty() {
            continue;
        }
        let word = LyndonWord::new(&words[rng.gen_range(0..words.len())]).expect("Lyndon");
        out.add_term(LieBasisElement::plain(word), R::from_i64(rng.gen_range(-3..=3)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Integer, F2};

    type Z = Integer;

    fn lw(s: &str) -> LyndonWord {
        let v: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
        LyndonWord::new(&v).unwrap()
    }

    fn elem(q: usize, terms: &[(&str, i64)]) -> LieElement<Z> {
        LieElement::from_terms(q, terms.iter().map(|(s, c)| (LieBasisElement::plain(lw(s)), Z::from(*c)))).unwrap()
    }

    #[test]
    fn lyndon_enumeration() {
        let show = |v: Vec<Vec<u8>>| v.iter().map(|w| w.iter().map(|l| l.to_string()).collect::<String>()).collect::<Vec<_>>();
        assert_eq!(show(lyndon_words(2, 2)), ["01"]);
        assert_eq!(show(lyndon_words(2, 3)), ["001", "011"]);
        let full: Vec<String> = show(lyndon_words(3, 3)).into_iter().filter(|w| w.contains('0') && w.contains('1') && w.contains('2')).collect();
        assert_eq!(full, ["012", "021"]);
        assert_eq!(lw("011").to_string(), "[[x0,x1],x1]");
        assert_eq!(lw("001").to_string(), "[x0,[x0,x1]]");
        assert_eq!(lw("021").to_string(), "[[x0,x2],x1]");
    }

    #[test]
    fn expansion_and_recognition() {
        let b = elem(2, &[("01", 1)]);
        let e = tensor_expand(&b);
        assert_eq!(e.to_string(), "x0*x1 - x1*x0");
        assert_eq!(lie_recognize(&e).unwrap(), b);
        let sym = Series::<Z>::parse(2, 2, "x0*x1 + x1*x0").unwrap();
        assert!(matches!(lie_recognize(&sym), Err(Error::NotLie(_))));
        let sq = Series::<Z>::parse(1, 2, "x0*x0").unwrap();
        assert!(lie_recognize(&sq).is_err());
        let sq2 = Series::<F2>::parse(1, 2, "x0*x0").unwrap();
        let r = lie_recognize(&sq2).unwrap();
        assert_eq!(r.to_string(), "x0^2");
    }

    #[test]
    fn face_examples() {
        let a = elem(2, &[("01", 1)]);
        assert!(lie_face(0, &a, 2).unwrap().is_zero());
        let b = elem(3, &[("012", 1)]);
        let d = lie_face(0, &b, 3).unwrap();
        assert_eq!(d, elem(2, &[("001", -1), ("011", 1)]));
        let s = lie_degeneracy(0, &elem(1, &[("0", 1)]), 1).unwrap();
        assert_eq!(s, elem(2, &[("1", 1)]));
    }

    #[test]
    fn basis_and_matrix_examples() {
        assert_eq!(nondegenerate_basis::<Z>(2, 2).unwrap().len(), 1);
        assert!(nondegenerate_basis::<Z>(2, 3).unwrap().is_empty());
        assert_eq!(nondegenerate_basis::<Z>(3, 3).unwrap().len(), 2);
        let m = moore_boundary_matrix::<Z>(3, 3).unwrap();
        assert_eq!(m.to_dense(), vec![vec![Z::from(-1), Z::from(1)], vec![Z::from(1), Z::from(0)]]);
        let m = moore_boundary_matrix::<Z>(2, 2).unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 1));
        let m = moore_boundary_matrix::<Z>(1, 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 1));
    }

    #[test]
    fn restricted_basis_includes_powers() {
        let b = nondegenerate_basis::<F2>(4, 2).unwrap();
        assert!(b.iter().any(|e| e.power == 2 && e.word == lw("01")));
    }

    #[test]
    fn matrix_columns_match_slow_faces() {
        for (t, q) in [(4, 3), (5, 3), (4, 4), (5, 4)] {
            let m = moore_boundary_matrix::<Z>(t, q).unwrap();
            let src = nondegenerate_basis::<Z>(t, q).unwrap();
            for (j, b) in src.iter().enumerate() {
                let e = LieElement::<Z>::basis(q, b.clone()).unwrap();
                let d = lie_face(0, &e, q).unwrap();
                let coords = coordinates_of(&d, t).unwrap();
                let col: Vec<Z> = (0..m.rows()).map(|i| m.get(i, j)).collect();
                assert_eq!(coords, col, "t={t} q={q} column {b}");
            }
        }
    }
}
