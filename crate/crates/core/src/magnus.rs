//! Truncated noncommutative power series: the simplicial algebra A(S¹).
//!
//! `A(S¹)_q` is the power series ring on `x_0 .. x_{q-1}`, truncated at an
//! explicit degree `D`. The Magnus map sends `y_j ↦ 1 + x_j`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use smallvec::SmallVec;

use crate::braid::{BraidLetter, BraidWord};
use crate::check::Check;
use crate::error::{arg_err, Error, Result};
use crate::scalar::{Coefficient, Integer};
use crate::words::Word;

pub type Monomial = SmallVec<[u8; 16]>;

/// Largest variable count a monomial letter can address.
pub const MAX_VARS: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series<R> {
    n_vars: usize,
    trunc: usize,
    terms: BTreeMap<Monomial, R>,
}

fn add_term<R: Coefficient>(terms: &mut BTreeMap<Monomial, R>, m: Monomial, c: R) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
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

impl<R: Coefficient> Series<R> {
    pub fn zero(n_vars: usize, trunc: usize) -> Self {
        assert!(n_vars <= MAX_VARS, "too many variables");
        Series { n_vars, trunc, terms: BTreeMap::new() }
    }

    pub fn one(n_vars: usize, trunc: usize) -> Self {
        Self::constant(n_vars, trunc, R::one())
    }

    pub fn constant(n_vars: usize, trunc: usize, c: R) -> Self {
        let mut s = Self::zero(n_vars, trunc);
        add_term(&mut s.terms, Monomial::new(), c);
        s
    }

    pub fn var(n_vars: usize, trunc: usize, i: usize) -> Result<Self> {
        Self::monomial(n_vars, trunc, &[i], R::one())
    }

    pub fn monomial(n_vars: usize, trunc: usize, letters: &[usize], c: R) -> Result<Self> {
        let mut s = Self::zero(n_vars, trunc);
        if let Some(&bad) = letters.iter().find(|&&l| l >= n_vars) {
            return arg_err(format!("x{bad} out of range for {n_vars} variables"));
        }
        if letters.len() <= trunc {
            add_term(&mut s.terms, letters.iter().map(|&l| l as u8).collect(), c);
        }
        Ok(s)
    }

    pub fn from_terms<I>(n_vars: usize, trunc: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, R)>,
    {
        let mut s = Self::zero(n_vars, trunc);
        for (m, c) in terms {
            if let Some(&bad) = m.iter().find(|&&l| l as usize >= n_vars) {
                return arg_err(format!("x{bad} out of range for {n_vars} variables"));
            }
            if m.len() <= trunc {
                add_term(&mut s.terms, m, c);
            }
        }
        Ok(s)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, R> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, R> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[u8]) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    pub fn constant_term(&self) -> R {
        self.coefficient(&[])
    }

    /// Lowest degree `> 0` carrying a nonzero term.
    pub fn low_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.len()).filter(|&d| d > 0).min()
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.n_vars != o.n_vars || self.trunc != o.trunc {
            return arg_err(format!(
                "series shapes differ: ({} vars, D={}) vs ({} vars, D={})",
                self.n_vars, self.trunc, o.n_vars, o.trunc
            ));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = self.clone();
        out.add_assign_unchecked(o);
        Ok(out)
    }

    pub(crate) fn add_assign_unchecked(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            add_term(&mut self.terms, m.clone(), c.clone());
        }
    }

    pub(crate) fn add_scaled_unchecked(&mut self, o: &Self, s: &R) {
        for (m, c) in &o.terms {
            add_term(&mut self.terms, m.clone(), c.mul_ref(s));
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-R::one())
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero(self.n_vars, self.trunc);
        for (m, c) in &self.terms {
            add_term(&mut out.terms, m.clone(), c.mul_ref(s));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.mul_unchecked(o))
    }

    pub(crate) fn mul_unchecked(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.n_vars, self.trunc);
        let mut by_degree: Vec<Vec<(&Monomial, &R)>> = vec![Vec::new(); self.trunc + 1];
        for (m2, c2) in &o.terms {
            if m2.len() <= self.trunc {
                by_degree[m2.len()].push((m2, c2));
            }
        }
        for (m1, c1) in &self.terms {
            let room = self.trunc - m1.len();
            for bucket in &by_degree[..=room] {
                for (m2, c2) in bucket {
                    let mut m = m1.clone();
                    m.extend_from_slice(m2);
                    add_term(&mut out.terms, m, c1.mul_ref(c2));
                }
            }
        }
        out
    }

    /// `(1 + self)⁻¹` for a series without constant term.
    pub fn inv_one_plus(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return arg_err("inv_one_plus needs a zero constant term");
        }
        let mut out = Self::one(self.n_vars, self.trunc);
        let mut power = Self::one(self.n_vars, self.trunc);
        let minus = self.neg();
        for _ in 0..self.trunc {
            power = power.mul_unchecked(&minus);
            if power.is_zero() {
                break;
            }
            out.add_assign_unchecked(&power);
        }
        Ok(out)
    }

    /// Degree-`i` part `q_i`.
    pub fn homogeneous_part(&self, i: usize) -> Self {
        Series {
            n_vars: self.n_vars,
            trunc: self.trunc,
            terms: self.terms.iter().filter(|(m, _)| m.len() == i).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Drops every term of degree `> trunc`; raising the truncation is refused.
    pub fn truncated(&self, trunc: usize) -> Result<Self> {
        if trunc > self.trunc {
            return arg_err(format!("cannot raise truncation from {} to {trunc}", self.trunc));
        }
        Ok(Series {
            n_vars: self.n_vars,
            trunc,
            terms: self.terms.iter().filter(|(m, _)| m.len() <= trunc).map(|(m, c)| (m.clone(), c.clone())).collect(),
        })
    }

    /// Applies the unital algebra map `x_i ↦ images[i]`.
    pub fn substitute(&self, images: &[Series<R>]) -> Result<Self> {
        if images.len() != self.n_vars {
            return arg_err(format!("{} images for {} variables", images.len(), self.n_vars));
        }
        let Some(first) = images.first() else {
            return Ok(Series { n_vars: 0, trunc: self.trunc, terms: self.terms.iter().filter(|(m, _)| m.is_empty()).map(|(m, c)| (m.clone(), c.clone())).collect() });
        };
        let (nv, tr) = (first.n_vars, first.trunc);
        if images.iter().any(|s| s.n_vars != nv || s.trunc != tr) {
            return arg_err("substitution images have different shapes");
        }
        let mut out = Series::zero(nv, tr);
        // prefix products, reused across lexicographically adjacent monomials
        let mut stack: Vec<Series<R>> = vec![Series::one(nv, tr)];
        let mut prev: Monomial = Monomial::new();
        for (m, c) in &self.terms {
            let common = prev.iter().zip(m.iter()).take_while(|(a, b)| a == b).count();
            stack.truncate(common + 1);
            for &l in &m[common..] {
                let next = stack.last().expect("nonempty").mul_unchecked(&images[l as usize]);
                stack.push(next);
            }
            out.add_scaled_unchecked(stack.last().expect("nonempty"), c);
            prev = m.clone();
        }
        Ok(out)
    }

    /// Applies a linear anti-homomorphism given on variables.
    pub fn substitute_reversed(&self, images: &[Series<R>]) -> Result<Self> {
        self.reversed().substitute(images)
    }

    /// Reverses every monomial.
    pub fn reversed(&self) -> Self {
        let mut out = Self::zero(self.n_vars, self.trunc);
        for (m, c) in &self.terms {
            add_term(&mut out.terms, m.iter().rev().copied().collect(), c.clone());
        }
        out
    }

    /// Parses `1 + x0*x1 - 3*x1*x0`.
    pub fn parse(n_vars: usize, trunc: usize, s: &str) -> Result<Self> {
        let perr = |m: &str| Error::Parse(format!("{m} in series `{s}`"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(perr("empty input"));
        }
        let mut out = Self::zero(n_vars, trunc);
        let mut rest = compact.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let mut negative = false;
            if let Some(r) = rest.strip_prefix('+') {
                if first {
                    return Err(perr("leading +"));
                }
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                negative = true;
                rest = r;
            } else if !first {
                return Err(perr("missing operator"));
            }
            first = false;
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let term = &rest[..end];
            rest = &rest[end..];
            if term.is_empty() {
                return Err(perr("empty term"));
            }
            let mut coef = Integer::one();
            let mut letters = Vec::new();
            for (i, factor) in term.split('*').enumerate() {
                if let Some(idx) = factor.strip_prefix('x') {
                    let v: usize = idx.parse().map_err(|_| perr("bad variable"))?;
                    if v >= n_vars {
                        return arg_err(format!("x{v} out of range for {n_vars} variables"));
                    }
                    letters.push(v as u8);
                } else if i == 0 {
                    coef = Integer::from_str(factor).map_err(|_| perr("bad coefficient"))?;
                } else {
                    return Err(perr("coefficient after a variable"));
                }
            }
            if negative {
                coef = -coef;
            }
            if letters.len() > trunc {
                return arg_err(format!("term of degree {} exceeds truncation {trunc}", letters.len()));
            }
            add_term(&mut out.terms, letters.into_iter().collect(), R::from_integer(&coef));
        }
        Ok(out)
    }
}

impl<R: Coefficient> fmt::Display for Series<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let v = c.to_integer();
            let negative = v < Integer::zero();
            let mag = if negative { -v } else { v };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit = mag.is_one();
            if m.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if !unit {
                write!(f, "{mag}*")?;
            }
            for (k, l) in m.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                write!(f, "x{l}")?;
            }
        }
        Ok(())
    }
}

/// `(1 + x_v)^e` truncated.
fn one_plus_var_power<R: Coefficient>(n_vars: usize, trunc: usize, v: usize, e: i64) -> Series<R> {
    let mut out = Series::zero(n_vars, trunc);
    // binomial coefficients C(e, i) for integer e, via the falling product
    let mut coef = Integer::one();
    let ei = Integer::from(e);
    for i in 0..=trunc {
        if coef.is_zero() {
            break;
        }
        let m: Monomial = std::iter::repeat(v as u8).take(i).collect();
        add_term(&mut out.terms, m, R::from_integer(&coef));
        coef = coef * (&ei - Integer::from(i as i64)) / Integer::from(i as i64 + 1);
    }
    out
}

/// The Magnus map `y_j ↦ 1 + x_j`, truncated at degree `trunc`.
pub fn magnus_embed<R: Coefficient>(w: &Word, trunc: usize) -> Series<R> {
    let n = w.n_gens();
    let mut out = Series::one(n, trunc);
    for s in w.syllables() {
        let factor = one_plus_var_power::<R>(n, trunc, s.gen, s.exp);
        out = out.mul_unchecked(&factor);
    }
    out
}

/// `x_{-1} = (1 + x_{q-2})⁻¹ ⋯ (1 + x_0)⁻¹ - 1` in `q - 1` variables.
pub fn x_neg1<R: Coefficient>(q: usize, trunc: usize) -> Result<Series<R>> {
    if q == 0 {
        return arg_err("x_-1 needs dimension at least 1");
    }
    let w = Word::full_product(q - 1).inverse();
    let mut s = magnus_embed::<R>(&w, trunc);
    add_term(&mut s.terms, Monomial::new(), -R::one());
    Ok(s)
}

pub fn face_images<R: Coefficient>(j: usize, q: usize, trunc: usize) -> Result<Vec<Series<R>>> {
    if q == 0 || j > q {
        return arg_err(format!("face d{j} undefined in dimension {q}"));
    }
    let t = q - 1;
    (0..q)
        .map(|k| {
            if j <= k {
                if k == 0 {
                    x_neg1(q, trunc)
                } else {
                    Series::var(t, trunc, k - 1)
                }
            } else if j == k + 1 {
                Ok(Series::zero(t, trunc))
            } else {
                Series::var(t, trunc, k)
            }
        })
        .collect()
}

pub fn degeneracy_images<R: Coefficient>(j: usize, q: usize, trunc: usize) -> Result<Vec<Series<R>>> {
    if j > q {
        return arg_err(format!("degeneracy s{j} undefined in dimension {q}"));
    }
    let t = q + 1;
    (0..q)
        .map(|k| {
            if j <= k {
                Series::var(t, trunc, k + 1)
            } else if j == k + 1 {
                let a = Series::var(t, trunc, k)?;
                let b = Series::var(t, trunc, k + 1)?;
                Ok(a.add(&b)?.add(&a.mul(&b)?)?)
            } else {
                Series::var(t, trunc, k)
            }
        })
        .collect()
}

pub fn face_series<R: Coefficient>(j: usize, f: &Series<R>) -> Result<Series<R>> {
    f.substitute(&face_images(j, f.n_vars, f.trunc)?)
}

pub fn degeneracy_series<R: Coefficient>(j: usize, f: &Series<R>) -> Result<Series<R>> {
    f.substitute(&degeneracy_images(j, f.n_vars, f.trunc)?)
}

/// Images `e(σ(y_j)) - 1` of the variables under a braid letter.
pub fn sigma_series_images<R: Coefficient>(l: BraidLetter, n_vars: usize, trunc: usize) -> Result<Vec<Series<R>>> {
    if n_vars == 0 {
        return arg_err("no braid action on zero variables");
    }
    let map = if l.inverse {
        crate::braid::sigma_inverse_images(l.k, n_vars - 1)?
    } else {
        crate::braid::sigma_images(l.k, n_vars - 1)?
    };
    Ok(map
        .images()
        .iter()
        .map(|w| {
            let mut s = magnus_embed::<R>(w, trunc);
            add_term(&mut s.terms, Monomial::new(), -R::one());
            s
        })
        .collect())
}

/// The braid action on series; the rightmost letter acts first.
pub fn act_series<R: Coefficient>(b: &BraidWord, f: &Series<R>) -> Result<Series<R>> {
    if f.n_vars != b.n() + 1 {
        return arg_err(format!("braid on dimension {} applied to {} variables", b.n() + 1, f.n_vars));
    }
    let mut out = f.clone();
    for l in b.letters().iter().rev() {
        out = out.substitute(&sigma_series_images(*l, f.n_vars, f.trunc)?)?;
    }
    Ok(out)
}

/// The anti-automorphism `x_i ↦ -x_i`.
pub fn chi<R: Coefficient>(f: &Series<R>) -> Series<R> {
    let mut out = Series::zero(f.n_vars, f.trunc);
    for (m, c) in &f.terms {
        let c = if m.len() % 2 == 1 { -c.clone() } else { c.clone() };
        add_term(&mut out.terms, m.iter().rev().copied().collect(), c);
    }
    out
}

/// The anti-automorphism `1 + x_i ↦ (1 + x_i)⁻¹`; on Magnus images it is
/// `e(w) ↦ e(w⁻¹)`.
pub fn antipode<R: Coefficient>(f: &Series<R>) -> Result<Series<R>> {
    let images = (0..f.n_vars)
        .map(|i| {
            let mut s = one_plus_var_power::<R>(f.n_vars, f.trunc, i, -1);
            add_term(&mut s.terms, Monomial::new(), -R::one());
            s
        })
        .collect::<Vec<_>>();
    f.substitute_reversed(&images)
}

/// `d̄_0 = d_0 ∘ antipode`, an anti-homomorphism with
/// `d̄_0(x_0) = (1 + x_0) ⋯ (1 + x_{m-1}) - 1` and
/// `d̄_0(x_j) = (1 + x_{j-1})⁻¹ - 1` for `j > 0`.
pub fn dbar0<R: Coefficient>(f: &Series<R>) -> Result<Series<R>> {
    face_series(0, &antipode(f)?)
}

/// The anti-homomorphism with `x_j ↦ x_{j-1}` (`j > 0`) and
/// `x_0 ↦ (1 + x_0) ⋯ (1 + x_{m-1}) - 1`.
pub fn stated_dbar0<R: Coefficient>(f: &Series<R>) -> Result<Series<R>> {
    let q = f.n_vars;
    if q == 0 {
        return arg_err("d̄_0 needs at least one variable");
    }
    let m = q - 1;
    let images = (0..q)
        .map(|j| {
            if j == 0 {
                let mut s = magnus_embed::<R>(&Word::full_product(m), f.trunc);
                add_term(&mut s.terms, Monomial::new(), -R::one());
                Ok(s)
            } else {
                Series::var(m, f.trunc, j - 1)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    f.substitute_reversed(&images)
}

/// Which family of degree-raising maps `δ_i : V → A(x_0, …, x_{m-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeltaKind {
    /// `δ_0(x_j) = x_{j-1}`, `δ_i(x_j) = 0` for `i, j > 0`, `δ_i(x_0) = Δ_i`.
    /// Sums to [`stated_dbar0`].
    Stated,
    /// `δ_i(x_j) = (-1)^{i+1} x_{j-1}^{i+1}` for `j > 0`, `δ_i(x_0) = Δ_i`.
    /// Sums to [`dbar0`].
    Antipodal,
}

/// `Δ_i` and the images `δ_i(x_j)` for a target with `m` variables.
#[derive(Clone, Debug)]
pub struct DeltaData<R> {
    pub kind: DeltaKind,
    pub m: usize,
    pub trunc: usize,
    /// `Δ_0, …, Δ_{m-1}`: sums of strictly increasing monomials.
    pub big_delta: Vec<Series<R>>,
    /// `images[i][j] = δ_i(x_j)` for `0 ≤ i < trunc`, `0 ≤ j ≤ m`.
    pub images: Vec<Vec<Series<R>>>,
}

fn increasing_monomials(m: usize, len: usize) -> Vec<Monomial> {
    fn rec(start: usize, m: usize, len: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for l in start..m {
            cur.push(l as u8);
            rec(l + 1, m, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, len, &mut Monomial::new(), &mut out);
    out
}

impl<R: Coefficient> DeltaData<R> {
    pub fn new(kind: DeltaKind, m: usize, trunc: usize) -> Result<Self> {
        if m + 1 > MAX_VARS {
            return arg_err("too many variables");
        }
        let big_delta: Vec<Series<R>> = (0..m)
            .map(|i| Series::from_terms(m, trunc, increasing_monomials(m, i + 1).into_iter().map(|mo| (mo, R::one()))))
            .collect::<Result<_>>()?;
        let mut images = Vec::new();
        for i in 0..trunc {
            let mut row = Vec::with_capacity(m + 1);
            row.push(big_delta.get(i).cloned().unwrap_or_else(|| Series::zero(m, trunc)));
            for j in 1..=m {
                let s = match kind {
                    DeltaKind::Stated if i == 0 => Series::var(m, trunc, j - 1)?,
                    DeltaKind::Stated => Series::zero(m, trunc),
                    DeltaKind::Antipodal => {
                        let sign = if i % 2 == 0 { -R::one() } else { R::one() };
                        Series::monomial(m, trunc, &vec![j - 1; i + 1], sign)?
                    }
                };
                row.push(s);
            }
            images.push(row);
        }
        Ok(DeltaData { kind, m, trunc, big_delta, images })
    }

    fn delta(&self, i: usize, l: usize) -> Option<&Series<R>> {
        self.images.get(i).map(|row| &row[l])
    }
}

/// `P^i_δ(f)`, the degree-raising-by-`i` component of the anti-homomorphism
/// determined by `δ`, computed by the anti-Cartan recursion
/// `P^t(m' x_l) = Σ_{a+b=t} δ_a(x_l) P^b(m')`.
pub fn p_delta<R: Coefficient>(i: usize, f: &Series<R>, data: &DeltaData<R>) -> Result<Series<R>> {
    if f.n_vars != data.m + 1 || f.trunc != data.trunc {
        return arg_err(format!(
            "δ data for {} → {} variables at D={} applied to {} variables at D={}",
            data.m + 1,
            data.m,
            data.trunc,
            f.n_vars,
            f.trunc
        ));
    }
    let mut memo: HashMap<Monomial, Vec<Series<R>>> = HashMap::new();
    let mut out = Series::zero(data.m, f.trunc);
    for (m, c) in &f.terms {
        if m.len() + i > f.trunc {
            continue;
        }
        let v = p_all(m, i, data, &mut memo);
        out.add_scaled_unchecked(&v[i], c);
    }
    Ok(out)
}

/// `[P^0(m), …, P^top(m)]`.
fn p_all<R: Coefficient>(
    m: &[u8],
    top: usize,
    data: &DeltaData<R>,
    memo: &mut HashMap<Monomial, Vec<Series<R>>>,
) -> Vec<Series<R>> {
    if let Some(v) = memo.get(m) {
        if v.len() > top {
            return v.clone();
        }
    }
    let (nv, tr) = (data.m, data.trunc);
    let result = if m.is_empty() {
        (0..=top)
            .map(|t| if t == 0 { Series::one(nv, tr) } else { Series::zero(nv, tr) })
            .collect()
    } else {
        let (prefix, last) = (&m[..m.len() - 1], m[m.len() - 1] as usize);
        let inner = p_all(prefix, top, data, memo);
        (0..=top)
            .map(|t| {
                let mut acc = Series::zero(nv, tr);
                for a in 0..=t {
                    if let Some(d) = data.delta(a, last) {
                        if !d.is_zero() && !inner[t - a].is_zero() {
                            acc.add_assign_unchecked(&d.mul_unchecked(&inner[t - a]));
                        }
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
    };
    memo.insert(m.iter().copied().collect(), result.clone());
    result
}

/// `q_i`, the degree-`i` component.
pub fn q_component<R: Coefficient>(i: usize, f: &Series<R>) -> Series<R> {
    f.homogeneous_part(i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaWeight {
    /// The word is the identity.
    Identity,
    /// Least `t ≥ 1` with `q_t(e(w)) ≠ 0`.
    Weight(usize),
    /// No nonzero component up to the cap.
    AboveCap(usize),
}

/// Least `t` with `q_t(e(w)) ≠ 0`, searching degrees `1..=cap`.
pub fn gamma_weight<R: Coefficient>(w: &Word, cap: usize) -> GammaWeight {
    if w.is_identity() {
        return GammaWeight::Identity;
    }
    let e = magnus_embed::<R>(w, cap);
    match e.low_degree() {
        Some(d) => GammaWeight::Weight(d),
        None => GammaWeight::AboveCap(cap),
    }
}

/// A pseudo-random series in `n_vars` variables with small integer
/// coefficients and terms of degree `≤ trunc`.
pub fn random_series<R: Coefficient, G: Rng>(rng: &mut G, n_vars: usize, trunc: usize, n_terms: usize) -> Series<R> {
    let mut s = Series::zero(n_vars, trunc);
    if n_vars == 0 {
        return Series::constant(0, trunc, R::from_i64(rng.gen_range(-3..=3)));
    }
    for _ in 0..n_terms {
        let d = rng.gen_range(0..=trunc);
        let m: Monomial = (0..d).map(|_| rng.gen_range(0..n_vars) as u8).collect();
        add_term(&mut s.terms, m, R::from_i64(rng.gen_range(-5..=5)));
    }
    s
}

/// Checks both decompositions of a face-like anti-homomorphism into
/// homogeneous formal Steenrod components, on `samples` seeded series.
pub fn verify_dbar0_decomposition<R: Coefficient>(n: usize, trunc: usize, samples: usize, seed: u64) -> Result<Vec<Check>> {
    use rand::SeedableRng;
    let mut checks = Vec::new();
    for kind in [DeltaKind::Antipodal, DeltaKind::Stated] {
        let data = DeltaData::<R>::new(kind, n, trunc)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut failure = None;
        let mut degree_ok = true;
        for s in 0..samples {
            let f: Series<R> = if s == 0 {
                Series::zero(n + 1, trunc)
            } else if s <= n + 1 {
                Series::var(n + 1, trunc, s - 1)?
            } else {
                random_series(&mut rng, n + 1, trunc, 12)
            };
            let lhs = match kind {
                DeltaKind::Antipodal => dbar0(&f)?,
                DeltaKind::Stated => stated_dbar0(&f)?,
            };
            let mut rhs = Series::zero(n, trunc);
            for i in 0..=trunc {
                let p = p_delta(i, &f, &data)?;
                for (mo, _) in p.terms.iter() {
                    let src_ok = f.terms.keys().any(|fm| fm.len() + i == mo.len());
                    degree_ok &= src_ok;
                }
                rhs.add_assign_unchecked(&p);
            }
            if lhs != rhs && failure.is_none() {
                failure = Some(format!("sample {s}: f = {f}"));
            }
        }
        let name = match kind {
            DeltaKind::Antipodal => format!("d0∘antipode = ΣP^i (antipodal δ), n={n}, D={trunc}"),
            DeltaKind::Stated => format!("stated d̄0 = ΣP^i (stated δ), n={n}, D={trunc}"),
        };
        checks.push(Check::new(
            name,
            failure.is_none() && degree_ok,
            failure.unwrap_or_else(|| format!("{samples} samples")),
        ));
    }
    Ok(checks)
}

/// Monomials of length `len` in `n_vars` letters, lexicographic.
fn all_monomials(n_vars: usize, len: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..n_vars).map(move |l| {
                    let mut m2 = m.clone();
                    m2.push(l as u8);
                    m2
                })
            })
            .collect();
    }
    out
}

fn uses_every_letter(m: &[u8], n_vars: usize) -> bool {
    (0..n_vars).all(|l| m.contains(&(l as u8)))
}

/// Integer kernel of `(d_1, …, d_q)` on degree-`degree` monomials of
/// `A(S¹)_q`, as columns over the monomial basis (in [`all_monomials`] order).
fn higher_face_kernel(q: usize, degree: usize) -> Result<(Vec<Monomial>, crate::exactla::IntMatrix)> {
    use crate::exactla::{kernel_basis, IntMatrix};
    let monos = all_monomials(q, degree);
    let target = all_monomials(q.saturating_sub(1), degree);
    let pos: HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut columns = Vec::with_capacity(monos.len());
    for m in &monos {
        let mut col = Vec::new();
        for j in 1..=q {
            // d_j kills x_{j-1} and shifts the letters above it down
            if m.contains(&((j - 1) as u8)) {
                continue;
            }
            let img: Monomial = m.iter().map(|&l| if (l as usize) >= j { l - 1 } else { l }).collect();
            col.push(((j - 1) * target.len() + pos[&img], Integer::one()));
        }
        columns.push(col);
    }
    let m = IntMatrix::from_columns(q * target.len(), columns)?;
    Ok((monos, kernel_basis(&m)))
}

/// Kernel of the higher faces in degree `degree` of `A(S¹)_{n+1}`, returned
/// as series. Equals the span of the non-degenerate monomials.
pub fn moore_kernel_basis(n: usize, degree: usize) -> Result<Vec<Series<Integer>>> {
    let q = n + 1;
    let (monos, k) = higher_face_kernel(q, degree)?;
    (0..k.cols())
        .map(|j| Series::from_terms(q, degree, k.column(j).iter().map(|(i, c)| (monos[*i].clone(), c.clone()))))
        .collect()
}

/// For each degree `1..=trunc`: the integer kernel of `(d_1, …, d_{n+1})` on
/// `A(S¹)_{n+1}` equals the span of the monomials using every letter.
pub fn nondegenerate_moore_check(n: usize, trunc: usize) -> Result<Vec<Check>> {
    let q = n + 1;
    if q > 6 || trunc > 8 || q.pow(trunc as u32) > 50_000 {
        return Err(Error::Capacity(format!("monomial basis for {q} variables at degree {trunc} is too large")));
    }
    let mut checks = Vec::new();
    for d in 1..=trunc {
        let (monos, k) = higher_face_kernel(q, d)?;
        let nondeg: Vec<usize> = (0..monos.len()).filter(|&i| uses_every_letter(&monos[i], q)).collect();
        let supported = (0..k.cols()).all(|j| k.column(j).iter().all(|(i, _)| uses_every_letter(&monos[*i], q)));
        let rank_ok = k.cols() == nondeg.len();
        checks.push(Check::new(
            format!("higher-face kernel = non-degenerate span, {q} variables, degree {d}"),
            supported && rank_ok,
            format!("kernel rank {}, non-degenerate monomials {}", k.cols(), nondeg.len()),
        ));
    }
    Ok(checks)
}

/// Magnus-map compatibility and faithfulness probes on seeded samples.
pub fn verify_magnus_representation(dim_max: usize, trunc: usize, samples: usize, seed: u64) -> Result<Vec<Check>> {
    use crate::braid::{act, random_cycle, random_moore, random_word};
    use crate::milnor::{degeneracy, face, is_cycle, is_moore, SimplicialElement};
    use rand::SeedableRng;
    type S = Series<Integer>;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for q in 1..=dim_max {
        let (mut face_ok, mut degen_ok, mut braid_ok) = (true, true, true);
        let mut first_bad = String::new();
        for _ in 0..samples {
            let w = SimplicialElement::new(q, random_word(&mut rng, q, trunc))?;
            let e: S = magnus_embed(w.word(), trunc);
            for j in 0..=q {
                if magnus_embed::<Integer>(face(j, &w)?.word(), trunc) != face_series(j, &e)? {
                    face_ok = false;
                    first_bad = format!("d{j} on {w}");
                }
                if magnus_embed::<Integer>(degeneracy(j, &w)?.word(), trunc) != degeneracy_series(j, &e)? {
                    degen_ok = false;
                    first_bad = format!("s{j} on {w}");
                }
            }
            for k in -1..(q as i32 - 1) {
                for inverse in [false, true] {
                    let b = BraidWord::new(q - 1, vec![BraidLetter { k, inverse }])?;
                    if magnus_embed::<Integer>(act(&b, &w)?.word(), trunc) != act_series(&b, &e)? {
                        braid_ok = false;
                        first_bad = format!("{b} on {w}");
                    }
                }
            }
        }
        let details = |ok: bool| if ok { format!("{samples} words, D={trunc}") } else { first_bad.clone() };
        checks.push(Check::new(format!("e∘d_j = d_j∘e, dim {q}"), face_ok, details(face_ok)));
        checks.push(Check::new(format!("e∘s_j = s_j∘e, dim {q}"), degen_ok, details(degen_ok)));
        if q >= 2 {
            checks.push(Check::new(format!("e∘σ_k = σ_k∘e, dim {q}"), braid_ok, details(braid_ok)));
        }
    }

    let mut faithful = true;
    let mut multiplicative = true;
    let mut probed = 0;
    for _ in 0..samples {
        let q = rng.gen_range(1..=dim_max.min(4));
        let w = random_word(&mut rng, q, 8);
        if w.is_identity() {
            continue;
        }
        probed += 1;
        faithful &= matches!(gamma_weight::<Integer>(&w, w.len()), GammaWeight::Weight(_));
        let u = random_word(&mut rng, q, 3);
        let v = random_word(&mut rng, q, 3);
        let c = u.commutator(&v)?;
        if let (GammaWeight::Weight(a), GammaWeight::Weight(b)) = (gamma_weight::<Integer>(&u, trunc), gamma_weight::<Integer>(&v, trunc)) {
            match gamma_weight::<Integer>(&c, trunc) {
                GammaWeight::Weight(g) => multiplicative &= g >= a + b,
                GammaWeight::AboveCap(_) | GammaWeight::Identity => {}
            }
        }
    }
    checks.push(Check::new("Magnus expansion detects nontrivial words", faithful, format!("{probed} words of length ≤ 8")));
    checks.push(Check::new("filtration weight is superadditive on commutators", multiplicative, format!("{samples} pairs")));

    let mut chi_ok = true;
    let mut dbar_ok = true;
    for _ in 0..samples {
        let n = rng.gen_range(1..=dim_max.min(4));
        let f: S = random_series(&mut rng, n, trunc, 10);
        chi_ok &= chi(&chi(&f)) == f;
        let lhs = dbar0(&f)?;
        dbar_ok &= lhs == antipode(&face_series(0, &f)?)? && lhs == face_series(0, &antipode(&f)?)?;
    }
    checks.push(Check::new("χ² = id", chi_ok, format!("{samples} series")));
    checks.push(Check::new("d̄0 = antipode∘d0 = d0∘antipode", dbar_ok, format!("{samples} series")));

    let (mut cyc_ok, mut moore_ok) = (true, true);
    let mut compared = 0;
    for _ in 0..samples {
        let q = rng.gen_range(2..=dim_max.max(2));
        let w = match rng.gen_range(0..3) {
            0 => random_cycle(&mut rng, q),
            1 => random_moore(&mut rng, q),
            _ => SimplicialElement::new(q, random_word(&mut rng, q, trunc))?,
        };
        let faces: Vec<SimplicialElement> = (0..=q).map(|j| face(j, &w)).collect::<Result<_>>()?;
        if faces.iter().any(|f| f.word().len() > trunc) {
            // truncation could hide a nontrivial face
            continue;
        }
        compared += 1;
        let mut e: S = magnus_embed(w.word(), trunc);
        add_term(&mut e.terms, Monomial::new(), -Integer::one());
        let killed: Vec<bool> = (0..=q).map(|j| face_series(j, &e).map(|s| s.is_zero())).collect::<Result<_>>()?;
        cyc_ok &= is_cycle(&w) == killed.iter().all(|&k| k);
        moore_ok &= is_moore(&w) == killed[1..].iter().all(|&k| k);
    }
    checks.push(Check::new("cycle ⇔ every face kills e(w) − 1", cyc_ok, format!("{compared} elements")));
    checks.push(Check::new("Moore ⇔ higher faces kill e(w) − 1", moore_ok, format!("{compared} elements")));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::F2;

    type S = Series<Integer>;

    fn p(n: usize, d: usize, s: &str) -> S {
        S::parse(n, d, s).unwrap()
    }

    #[test]
    fn ring_examples() {
        let x0 = S::var(2, 3, 0).unwrap();
        assert_eq!(x0.inv_one_plus().unwrap(), p(2, 3, "1 - x0 + x0*x0 - x0*x0*x0"));
        assert_eq!(x0.mul(&S::var(2, 3, 1).unwrap()).unwrap(), p(2, 3, "x0*x1"));
        let f = p(2, 3, "3 + x0*x1 - 2*x1");
        assert!(f.add(&f.neg()).unwrap().is_zero());
        assert!(p(2, 3, "1 + x0").inv_one_plus().is_err());
        assert!(x0.add(&S::var(2, 4, 0).unwrap()).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["1 + x0*x1 - x1*x0", "0", "-x0 + x0*x0", "-3 + 2*x1*x0*x1"] {
            assert_eq!(p(2, 3, s).to_string(), s);
        }
        assert!(S::parse(2, 3, "x0 + x2").is_err());
        assert!(S::parse(2, 3, "x0*2").is_err());
        assert!(S::parse(2, 1, "x0*x1").is_err());
        let f = Series::<F2>::parse(2, 3, "3*x0 - x1").unwrap();
        assert_eq!(f.to_string(), "x0 + x1");
    }

    #[test]
    fn simplicial_examples() {
        let d0 = face_series(0, &S::var(2, 2, 0).unwrap()).unwrap();
        assert_eq!(d0, p(1, 2, "-x0 + x0*x0"));
        let s1 = degeneracy_series(1, &S::var(1, 3, 0).unwrap()).unwrap();
        assert_eq!(s1, p(2, 3, "x0 + x0*x1 + x1"));
        assert!(face_series(2, &S::var(2, 3, 1).unwrap()).unwrap().is_zero());
        assert!(face_series(3, &S::var(2, 3, 1).unwrap()).is_err());
    }

    #[test]
    fn magnus_examples() {
        assert_eq!(magnus_embed::<Integer>(&Word::parse(1, "y0").unwrap(), 3), p(1, 3, "1 + x0"));
        assert_eq!(magnus_embed::<Integer>(&Word::parse(1, "y0^-1").unwrap(), 2), p(1, 2, "1 - x0 + x0*x0"));
        let c = Word::parse(2, "y0^-1 y1^-1 y0 y1").unwrap();
        assert_eq!(magnus_embed::<Integer>(&c, 2), p(2, 2, "1 + x0*x1 - x1*x0"));
        assert_eq!(magnus_embed::<Integer>(&Word::parse(1, "y0^3").unwrap(), 2), p(1, 2, "1 + 3*x0 + 3*x0*x0"));
    }

    #[test]
    fn chi_and_dbar0_examples() {
        assert_eq!(chi(&p(2, 3, "x0")), p(2, 3, "-x0"));
        assert_eq!(chi(&p(2, 3, "x0*x1")), p(2, 3, "x1*x0"));
        let f = p(3, 4, "2 + x0*x1*x2 - x2 + x1*x1");
        assert_eq!(chi(&chi(&f)), f);
        assert_eq!(dbar0(&p(3, 3, "x0")).unwrap(), p(2, 3, "x0 + x0*x1 + x1"));
        assert_eq!(stated_dbar0(&p(3, 3, "x0")).unwrap(), p(2, 3, "x0 + x0*x1 + x1"));
        assert_eq!(stated_dbar0(&p(3, 3, "x2")).unwrap(), p(2, 3, "x1"));
        assert_eq!(dbar0(&p(3, 3, "x2")).unwrap(), p(2, 3, "-x1 + x1*x1 - x1*x1*x1"));
    }

    #[test]
    fn p_delta_examples() {
        let st = DeltaData::<Integer>::new(DeltaKind::Stated, 2, 4).unwrap();
        assert_eq!(p_delta(0, &p(3, 4, "x2"), &st).unwrap(), p(2, 4, "x1"));
        assert_eq!(p_delta(1, &p(3, 4, "x0"), &st).unwrap(), p(2, 4, "x0*x1"));
        assert_eq!(p_delta(1, &p(3, 4, "x0*x2"), &st).unwrap(), p(2, 4, "x1*x0*x1"));
        assert_eq!(st.big_delta[1].len(), 1);
        let an = DeltaData::<Integer>::new(DeltaKind::Antipodal, 2, 4).unwrap();
        assert_eq!(p_delta(0, &p(3, 4, "x2"), &an).unwrap(), p(2, 4, "-x1"));
        assert_eq!(p_delta(1, &p(3, 4, "x0*x2"), &an).unwrap(), p(2, 4, "-x1*x0*x1 + x1*x1*x0 + x1*x1*x1"));
    }

    #[test]
    fn decomposition_small() {
        let checks = verify_dbar0_decomposition::<Integer>(2, 4, 20, 7).unwrap();
        assert!(checks.iter().all(|c| c.passed()), "{checks:?}");
    }

    #[test]
    fn action_examples() {
        let s0 = BraidWord::sigma(1, 0).unwrap();
        assert_eq!(act_series(&s0, &p(2, 2, "x0")).unwrap(), p(2, 2, "x1"));
        assert_eq!(act_series(&s0, &p(2, 2, "x1")).unwrap(), p(2, 2, "x0 + x0*x1 - x1*x0"));
        let s1 = BraidWord::sigma(2, 1).unwrap();
        assert_eq!(act_series(&s1, &p(3, 2, "x0")).unwrap(), p(3, 2, "x0"));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_weight::<Integer>(&Word::parse(2, "y0").unwrap(), 4), GammaWeight::Weight(1));
        let c = Word::parse(2, "y0^-1 y1^-1 y0 y1").unwrap();
        assert_eq!(gamma_weight::<Integer>(&c, 4), GammaWeight::Weight(2));
        assert_eq!(gamma_weight::<Integer>(&Word::identity(2), 4), GammaWeight::Identity);
        assert_eq!(gamma_weight::<Integer>(&c, 1), GammaWeight::AboveCap(1));
    }

    #[test]
    fn higher_face_kernels() {
        let k = moore_kernel_basis(1, 2).unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.iter().all(|s| s.terms().keys().all(|m| m.contains(&0) && m.contains(&1))));
        assert!(moore_kernel_basis(1, 1).unwrap().is_empty());
        assert_eq!(moore_kernel_basis(2, 3).unwrap().len(), 6);
        assert!(nondegenerate_moore_check(2, 4).unwrap().iter().all(|c| c.passed()));
    }

    #[test]
    fn representation_suite_passes() {
        let checks = verify_magnus_representation(3, 4, 15, 7).unwrap();
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
