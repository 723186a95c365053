//! Braid words and their action on F(S¹).
//!
//! On `F(S¹)_{n+1} = F(y_0, …, y_n)` the generator `σ_k` (`0 ≤ k ≤ n-1`) sends
//! `y_k ↦ y_{k+1}`, `y_{k+1} ↦ y_{k+1}⁻¹ y_k y_{k+1}` and `σ_{-1}` sends
//! `y_0 ↦ y_0⁻¹ y_n⁻¹ ⋯ y_1⁻¹`. Together they generate `B_{n+2}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use rand::Rng;
use rayon::prelude::*;

use crate::check::Check;
use crate::error::{arg_err, Error, Result};
use crate::milnor::{
    certify_homotopy, degeneracy, degeneracy_map, face, face_map, faces, is_cycle, is_moore,
    moore_normalize, Bounding, HomotopyCertificate, SimplicialElement,
};
use crate::words::{enumerate_words, GenMap, Word};

/// Largest `n` accepted by the relation verifiers.
pub const MAX_VERIFY_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BraidLetter {
    pub k: i32,
    pub inverse: bool,
}

impl BraidLetter {
    pub fn sigma(k: i32) -> Self {
        BraidLetter { k, inverse: false }
    }

    pub fn sigma_inv(k: i32) -> Self {
        BraidLetter { k, inverse: true }
    }

    pub fn inverted(self) -> Self {
        BraidLetter { k: self.k, inverse: !self.inverse }
    }
}

/// A word in `σ_{-1}, …, σ_{n-1}` acting on `F(S¹)_{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    n: usize,
    letters: Vec<BraidLetter>,
}

fn check_index(k: i32, n: usize) -> Result<()> {
    if k < -1 || k > n as i32 - 1 {
        return arg_err(format!("σ{k} does not act on F(S¹) in dimension {}", n + 1));
    }
    Ok(())
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<BraidLetter>) -> Result<Self> {
        for l in &letters {
            check_index(l.k, n)?;
        }
        Ok(BraidWord { n, letters })
    }

    pub fn identity(n: usize) -> Self {
        BraidWord { n, letters: Vec::new() }
    }

    pub fn sigma(n: usize, k: i32) -> Result<Self> {
        Self::new(n, vec![BraidLetter::sigma(k)])
    }

    /// From `(k, ±1)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(i32, i32)]) -> Result<Self> {
        let letters = pairs
            .iter()
            .map(|&(k, s)| match s {
                1 => Ok(BraidLetter::sigma(k)),
                -1 => Ok(BraidLetter::sigma_inv(k)),
                _ => arg_err(format!("braid exponent {s} is not ±1")),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, letters)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        BraidWord { n: self.n, letters: self.letters.iter().rev().map(|l| l.inverted()).collect() }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return arg_err("braid words over different dimensions");
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { n: self.n, letters })
    }

    /// Image in the symmetric group on `n + 2` points; `σ_k` swaps `k+1, k+2`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.n + 2).collect();
        for l in self.letters.iter().rev() {
            let a = (l.k + 1) as usize;
            for p in perm.iter_mut() {
                if *p == a {
                    *p = a + 1;
                } else if *p == a + 1 {
                    *p = a;
                }
            }
        }
        perm
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "s{}", l.k)?;
            if l.inverse {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

type SigmaKey = (i32, usize, bool);

fn sigma_cache() -> &'static RwLock<HashMap<SigmaKey, Arc<GenMap>>> {
    static CACHE: OnceLock<RwLock<HashMap<SigmaKey, Arc<GenMap>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn build_sigma(k: i32, n: usize, inverse: bool) -> Result<GenMap> {
    let g = n + 1;
    let y = |i: usize| Word::generator(g, i).expect("in range");
    let mut images: Vec<Word> = (0..g).map(y).collect();
    if k == -1 {
        // y_n⁻¹ ⋯ y_1⁻¹
        let tail = Word::from_syllables(g, (1..g).rev().map(|i| (i, -1)))?;
        images[0] = if inverse {
            tail.multiply(&y(0).inverse())?
        } else {
            y(0).inverse().multiply(&tail)?
        };
    } else {
        let k = k as usize;
        let (a, b) = (y(k), y(k + 1));
        if inverse {
            images[k + 1] = a.clone();
            images[k] = a.multiply(&b)?.multiply(&a.inverse())?;
        } else {
            images[k] = b.clone();
            images[k + 1] = a.conjugate(&b)?;
        }
    }
    GenMap::new(g, g, images)
}

fn cached_sigma(k: i32, n: usize, inverse: bool) -> Result<Arc<GenMap>> {
    check_index(k, n)?;
    let key = (k, n, inverse);
    if let Some(m) = sigma_cache().read().expect("cache lock").get(&key) {
        return Ok(m.clone());
    }
    let m = Arc::new(build_sigma(k, n, inverse)?);
    sigma_cache().write().expect("cache lock").insert(key, m.clone());
    Ok(m)
}

/// `σ_k` on `F(S¹)_{n+1}`.
pub fn sigma_images(k: i32, n: usize) -> Result<GenMap> {
    Ok((*cached_sigma(k, n, false)?).clone())
}

/// `σ_k⁻¹` on `F(S¹)_{n+1}`.
pub fn sigma_inverse_images(k: i32, n: usize) -> Result<GenMap> {
    Ok((*cached_sigma(k, n, true)?).clone())
}

fn letter_map(l: BraidLetter, n: usize) -> Result<Arc<GenMap>> {
    cached_sigma(l.k, n, l.inverse)
}

/// The automorphism of `F(S¹)_{n+1}` given by `b` (rightmost letter acts first).
pub fn braid_map(b: &BraidWord) -> Result<GenMap> {
    let mut acc = GenMap::identity(b.n + 1);
    for l in &b.letters {
        acc = acc.compose(&*letter_map(*l, b.n)?)?;
    }
    Ok(acc)
}

pub fn act_word(b: &BraidWord, w: &Word) -> Result<Word> {
    if w.n_gens() != b.n + 1 {
        return arg_err(format!(
            "braid on dimension {} applied to a word over {} generators",
            b.n + 1,
            w.n_gens()
        ));
    }
    let mut out = w.clone();
    for l in b.letters.iter().rev() {
        out = letter_map(*l, b.n)?.apply(&out)?;
    }
    Ok(out)
}

pub fn act(b: &BraidWord, e: &SimplicialElement) -> Result<SimplicialElement> {
    if e.dim() != b.n + 1 {
        return arg_err(format!("braid on dimension {} applied in dimension {}", b.n + 1, e.dim()));
    }
    SimplicialElement::new(e.dim(), act_word(b, e.word())?)
}

/// `σ_k^{±1}` applied to an element of any dimension `≥ k + 2`.
pub fn act_letter(l: BraidLetter, e: &SimplicialElement) -> Result<SimplicialElement> {
    if e.dim() == 0 {
        return arg_err("no braid action in dimension 0");
    }
    e.apply(&*letter_map(l, e.dim() - 1)?)
}

pub fn sigma(k: i32, e: &SimplicialElement) -> Result<SimplicialElement> {
    act_letter(BraidLetter::sigma(k), e)
}

fn compose_letters(n: usize, letters: &[BraidLetter], sigma_fn: &SigmaFn<'_>) -> Result<GenMap> {
    let mut acc = GenMap::identity(n + 1);
    for l in letters {
        let m = if l.inverse { invert_automorphism(&sigma_fn(l.k, n)?)? } else { sigma_fn(l.k, n)? };
        acc = acc.compose(&m)?;
    }
    Ok(acc)
}

/// Supplies `σ_k` on `F(S¹)_{n+1}`; lets tests inject a corrupted action.
pub type SigmaFn<'a> = dyn Fn(i32, usize) -> Result<GenMap> + Sync + 'a;

fn invert_automorphism(m: &GenMap) -> Result<GenMap> {
    // only used for the standard generators, whose inverses are tabulated
    for n in 0..=MAX_VERIFY_N {
        if m.source() != n + 1 {
            continue;
        }
        for k in -1..n as i32 {
            if *cached_sigma(k, n, false)? == *m {
                return Ok((*cached_sigma(k, n, true)?).clone());
            }
        }
    }
    Err(Error::Unsupported("inverse of a non-standard automorphism".into()))
}

/// Braid relations as equalities of generator maps, for every `n ≤ n_max`.
pub fn verify_braid_relations(n_max: usize) -> Result<Vec<Check>> {
    verify_braid_relations_with(n_max, &|k, n| sigma_images(k, n))
}

pub fn verify_braid_relations_with(n_max: usize, sigma_fn: &SigmaFn<'_>) -> Result<Vec<Check>> {
    if n_max > MAX_VERIFY_N {
        return Err(Error::Capacity(format!("n_max {n_max} exceeds {MAX_VERIFY_N}")));
    }
    let mut checks = Vec::new();
    for n in 0..=n_max {
        let ks: Vec<i32> = (-1..n as i32).collect();
        let eval = |ls: &[i32]| -> Result<GenMap> {
            let letters: Vec<BraidLetter> = ls.iter().map(|&k| BraidLetter::sigma(k)).collect();
            compose_letters(n, &letters, sigma_fn)
        };
        for &i in &ks {
            let m = sigma_fn(i, n)?;
            let inv = sigma_inverse_images(i, n)?;
            checks.push(Check::new(
                format!("n={n} s{i} s{i}^-1 = 1"),
                m.compose(&inv)? == GenMap::identity(n + 1) && inv.compose(&m)? == GenMap::identity(n + 1),
                "",
            ));
            for &j in &ks {
                if j == i + 1 {
                    let ok = eval(&[i, j, i])? == eval(&[j, i, j])?;
                    checks.push(Check::new(format!("n={n} s{i} s{j} s{i} = s{j} s{i} s{j}"), ok, ""));
                } else if j >= i + 2 {
                    let ok = eval(&[i, j])? == eval(&[j, i])?;
                    checks.push(Check::new(format!("n={n} s{i} s{j} = s{j} s{i}"), ok, ""));
                }
            }
        }
    }
    Ok(checks)
}

fn sig(k: i32, n: usize) -> Result<GenMap> {
    sigma_images(k, n)
}

/// The exchange identities between faces/degeneracies and the braid action,
/// checked as generator-map equalities on `F(S¹)_{n+1}` for `n ≤ n_max`.
///
/// Faces: `d_j σ_k` equals `σ_{k-1} d_j` (j ≤ k), `d_{k+2}` (j = k+1),
/// `d_{k+1}` (j = k+2) and `σ_k d_j` (j > k+2).
/// Degeneracies: `s_j σ_k` equals `σ_{k+1} s_j` (j ≤ k), `σ_{k+1} σ_k s_{k+2}`
/// (j = k+1), `σ_k σ_{k+1} s_{k+1}` (j = k+2) and `σ_k s_j` (j > k+2).
pub fn verify_braided_identities(n_max: usize) -> Result<Vec<Check>> {
    if n_max > MAX_VERIFY_N {
        return Err(Error::Capacity(format!("n_max {n_max} exceeds {MAX_VERIFY_N}")));
    }
    let mut checks = Vec::new();
    for n in 0..=n_max {
        let q = n + 1;
        for k in -1..n as i32 {
            let sk = sig(k, n)?;
            for j in 0..=q {
                let lhs = face_map(j, q)?.compose(&sk)?;
                let ji = j as i32;
                let (rhs, form) = if ji <= k {
                    (sig(k - 1, n - 1)?.compose(&face_map(j, q)?)?, format!("s{} d{j}", k - 1))
                } else if ji == k + 1 {
                    (face_map(j + 1, q)?, format!("d{}", j + 1))
                } else if ji == k + 2 {
                    (face_map(j - 1, q)?, format!("d{}", j - 1))
                } else {
                    (sig(k, n - 1)?.compose(&face_map(j, q)?)?, format!("s{k} d{j}"))
                };
                checks.push(Check::new(format!("n={n} d{j} s{k} = {form}"), lhs == rhs, ""));
            }
            for j in 0..=q {
                let lhs = degeneracy_map(j, q)?.compose(&sk)?;
                let ji = j as i32;
                let up = n + 1;
                let (rhs, form) = if ji <= k {
                    (sig(k + 1, up)?.compose(&degeneracy_map(j, q)?)?, format!("s{} deg{j}", k + 1))
                } else if ji == k + 1 {
                    (
                        sig(k + 1, up)?.compose(&sig(k, up)?)?.compose(&degeneracy_map(j + 1, q)?)?,
                        format!("s{} s{k} deg{}", k + 1, j + 1),
                    )
                } else if ji == k + 2 {
                    (
                        sig(k, up)?.compose(&sig(k + 1, up)?)?.compose(&degeneracy_map(j - 1, q)?)?,
                        format!("s{k} s{} deg{}", k + 1, j - 1),
                    )
                } else {
                    (sig(k, up)?.compose(&degeneracy_map(j, q)?)?, format!("s{k} deg{j}"))
                };
                checks.push(Check::new(format!("n={n} deg{j} s{k} = {form}"), lhs == rhs, ""));
            }
        }
    }
    Ok(checks)
}

/// Faces and degeneracies satisfy the simplicial identities on generators in
/// every dimension `≤ dim_max`.
pub fn verify_simplicial_identities(dim_max: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for q in 0..=dim_max {
        let mut ok = true;
        let mut first_bad = String::new();
        let mut note = |good: bool, what: String| {
            if !good && ok {
                first_bad = what;
            }
            ok &= good;
        };
        if q >= 2 {
            for j in 0..=q {
                for i in 0..j {
                    let l = face_map(i, q - 1)?.compose(&face_map(j, q)?)?;
                    let r = face_map(j - 1, q - 1)?.compose(&face_map(i, q)?)?;
                    note(l == r, format!("d{i} d{j}"));
                }
            }
        }
        if q >= 1 {
            for j in 0..q {
                for i in 0..=q {
                    // d_i s_j on dimension q-1 → q → q-1
                    let l = face_map(i, q)?.compose(&degeneracy_map(j, q - 1)?)?;
                    let r = if i < j {
                        degeneracy_map(j - 1, q - 2)?.compose(&face_map(i, q - 1)?)?
                    } else if i == j || i == j + 1 {
                        GenMap::identity(q - 1)
                    } else {
                        degeneracy_map(j, q - 2)?.compose(&face_map(i - 1, q - 1)?)?
                    };
                    note(l == r, format!("d{i} s{j}"));
                }
            }
        }
        for j in 0..=q {
            for i in 0..=j {
                let l = degeneracy_map(i, q + 1)?.compose(&degeneracy_map(j, q)?)?;
                let r = degeneracy_map(j + 1, q + 1)?.compose(&degeneracy_map(i, q)?)?;
                note(l == r, format!("s{i} s{j}"));
            }
        }
        let details = if ok { String::new() } else { format!("first failure: {first_bad}") };
        checks.push(Check::new(format!("simplicial identities in dimension {q}"), ok, details));
    }
    Ok(checks)
}

/// The element `σ_{k+1} s_{k+1} x` and its faces, compared against the
/// expected pattern: `d_{k+1} = σ_k x`, `d_{k+3} = x`, every other face trivial.
#[derive(Clone, Debug)]
pub struct InversionWitness {
    pub k: i32,
    pub witness: SimplicialElement,
    pub faces: Vec<SimplicialElement>,
    pub table_matches: bool,
    pub mismatches: Vec<usize>,
    /// Certificate for `σ_k x ≃ x⁻¹` built from the normalized witness.
    pub certificate: HomotopyCertificate,
}

pub fn cycle_inversion_witness(k: i32, x: &SimplicialElement) -> Result<InversionWitness> {
    if !is_cycle(x) {
        return Err(Error::Precondition(format!("{x} is not a cycle")));
    }
    let q = x.dim();
    if q < 1 || k < -1 || k > q as i32 - 2 {
        return arg_err(format!("σ{k} inversion witness undefined in dimension {q}"));
    }
    let lifted = degeneracy((k + 1) as usize, x)?;
    let witness = sigma(k + 1, &lifted)?;
    let fs = faces(&witness);
    let sx = sigma(k, x)?;
    let mut mismatches = Vec::new();
    for (j, f) in fs.iter().enumerate() {
        let expected = if j as i32 == k + 1 {
            sx.clone()
        } else if j as i32 == k + 3 {
            x.clone()
        } else {
            SimplicialElement::identity(q)
        };
        if *f != expected {
            mismatches.push(j);
        }
    }
    let xinv = x.inverse();
    let normalized = moore_normalize(&witness)?.normalized;
    let d0 = face(0, &normalized)?;
    let candidates = [
        (sx.clone(), xinv.clone()),
        (xinv.clone(), sx.clone()),
        (x.clone(), sx.inverse()),
        (sx.inverse(), x.clone()),
    ];
    let mut certificate = None;
    for (a, b) in candidates.iter() {
        if d0 == a.multiply(&b.inverse())? {
            certificate = Some(certify_homotopy(a, b, &witness)?);
            break;
        }
    }
    let certificate = match certificate {
        Some(c) => c,
        None => certify_homotopy(&sx, &xinv, &witness)?,
    };
    Ok(InversionWitness { k, witness, faces: fs, table_matches: mismatches.is_empty(), mismatches, certificate })
}

/// A chain bounding `σ_k(x) · x` for a cycle `x`.
pub fn bound_sigma_product(k: i32, x: &SimplicialElement) -> Result<Bounding> {
    let w = cycle_inversion_witness(k, x)?;
    let u = w.certificate.normalized.clone();
    let d0 = face(0, &u)?;
    let sx = sigma(k, x)?;
    let g = sx.multiply(x)?;
    let xg = x.multiply(&sx)?;
    let b = if d0 == g {
        Bounding::new(g, u)?
    } else if d0 == g.inverse() {
        Bounding::new(g.inverse(), u)?.inverse()
    } else if d0 == xg {
        Bounding::new(xg, u)?.conjugate_by(&x.inverse())?
    } else if d0 == xg.inverse() {
        Bounding::new(xg.inverse(), u)?.inverse().conjugate_by(&x.inverse())?
    } else {
        return Err(Error::Internal(format!(
            "normalized witness for σ{k} on {x} has unexpected boundary {d0}"
        )));
    };
    debug_assert_eq!(b.boundary, sx.multiply(x)?);
    Ok(b)
}

/// Moves a bounding pair along `σ_k^{±1}`, using `d_0 σ_{k+1} = σ_k d_0`.
pub fn transport(b: &Bounding, l: BraidLetter) -> Result<Bounding> {
    let up = BraidLetter { k: l.k + 1, inverse: l.inverse };
    Bounding::new(act_letter(l, &b.boundary)?, act_letter(up, &b.chain)?)
}

/// A chain bounding `σ_k²(x) · x⁻¹` for a cycle `x`.
pub fn bound_square(k: i32, x: &SimplicialElement) -> Result<Bounding> {
    let g1 = bound_sigma_product(k, x)?;
    let moved = transport(&g1, BraidLetter::sigma(k))?;
    // σ_k²(x) x⁻¹ = σ_k(σ_k(x) x) · x (σ_k(x) x)⁻¹ x⁻¹
    moved.multiply(&g1.inverse().conjugate_by(x)?)
}

/// Splits a braid word into factors `β σ_k^{±2} β⁻¹`, scanning greedily.
pub fn squared_conjugate_factors(b: &BraidWord) -> Result<Vec<(Vec<BraidLetter>, BraidLetter)>> {
    let ls = &b.letters;
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < ls.len() {
        let mut len = 0;
        while i + 2 * len + 2 <= ls.len() {
            let beta = &ls[i..i + len];
            let (a, c) = (ls[i + len], ls[i + len + 1]);
            let tail = &ls[i + len + 2..i + 2 * len + 2];
            let tail_ok = beta.iter().rev().zip(tail).all(|(x, y)| x.inverted() == *y);
            if a == c && tail_ok {
                out.push((beta.to_vec(), a));
                i += 2 * len + 2;
                continue 'outer;
            }
            len += 1;
        }
        return Err(Error::Unsupported(format!(
            "braid {b} is not a product of conjugated squared generators"
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FixedCheck {
    pub factors: Vec<BraidWord>,
    pub certificate: HomotopyCertificate,
}

/// Certifies `b(x) ≃ x` for a cycle `x` and a product `b` of conjugated
/// squared generators.
pub fn homotopy_fixed_check(b: &BraidWord, x: &SimplicialElement) -> Result<FixedCheck> {
    if !is_cycle(x) {
        return Err(Error::Precondition(format!("{x} is not a cycle")));
    }
    if x.dim() != b.n + 1 {
        return arg_err("braid and cycle dimensions differ");
    }
    let factors = squared_conjugate_factors(b)?;
    let mut total = Bounding::trivial(x.dim());
    // b = f_1 ⋯ f_m; b(x) x⁻¹ = Π_i f_i(z_i) z_i⁻¹ with z_i = f_{i+1} ⋯ f_m (x)
    let mut z = x.clone();
    let mut pieces = Vec::new();
    let mut words = Vec::new();
    for (beta, letter) in factors.iter().rev() {
        let beta_w = BraidWord::new(b.n, beta.clone())?;
        let zp = act(&beta_w.inverse(), &z)?;
        let piece = if letter.inverse {
            let back = BraidWord::new(b.n, vec![*letter, *letter])?;
            let y = act(&back, &zp)?;
            bound_square(letter.k, &y)?.inverse()
        } else {
            bound_square(letter.k, &zp)?
        };
        let mut moved = piece;
        for l in beta.iter().rev() {
            moved = transport(&moved, *l)?;
        }
        let mut full = beta.clone();
        full.push(*letter);
        full.push(*letter);
        full.extend(beta.iter().rev().map(|l| l.inverted()));
        let fw = BraidWord::new(b.n, full)?;
        z = act(&fw, &z)?;
        pieces.push(moved);
        words.push(fw);
    }
    for p in pieces.iter().rev() {
        total = total.multiply(p)?;
    }
    words.reverse();
    let bx = act(b, x)?;
    debug_assert_eq!(bx, z);
    let certificate = certify_homotopy(&bx, x, &total.chain)?;
    Ok(FixedCheck { factors: words, certificate })
}

/// `A_{ij} = (σ_{j-1} ⋯ σ_{i+1}) σ_i² (σ_{j-1} ⋯ σ_{i+1})⁻¹`, `0 ≤ i < j < m`,
/// as braids on `F(S¹)_m`.
pub fn pure_braid_generators(m: usize) -> Result<Vec<BraidWord>> {
    if m < 2 {
        return arg_err("pure braid generators need at least two strands");
    }
    let n = m - 1;
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let beta: Vec<BraidLetter> = (i + 1..j).rev().map(|k| BraidLetter::sigma(k as i32)).collect();
            let mut letters = beta.clone();
            letters.push(BraidLetter::sigma(i as i32));
            letters.push(BraidLetter::sigma(i as i32));
            letters.extend(beta.iter().rev().map(|l| l.inverted()));
            let w = BraidWord::new(n, letters)?;
            if !w.is_pure() {
                return Err(Error::Internal(format!("{w} is not pure")));
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// `Some(m)` when `w = (y_0 ⋯ y_n)^m`.
pub fn power_of_full_product(w: &Word) -> Option<i64> {
    let g = w.n_gens();
    if w.is_identity() {
        return Some(0);
    }
    if g == 0 || w.len() % g != 0 {
        return None;
    }
    let m = (w.len() / g) as i64;
    let p = Word::full_product(g);
    if p.pow(m) == *w {
        Some(m)
    } else if p.pow(-m) == *w {
        Some(-m)
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct FixedWordSearch {
    pub examined: usize,
    pub fixed: Vec<Word>,
    /// Fixed words outside `⟨y_0 ⋯ y_n⟩`.
    pub violations: Vec<Word>,
}

/// Words in `F(y_0, …, y_n)` of length `≤ max_len` fixed by every `σ_j^k`,
/// `0 ≤ j ≤ n-1`.
pub fn brute_force_fixed_words(n: usize, k: u32, max_len: usize) -> Result<FixedWordSearch> {
    let words: Vec<Word> = enumerate_words(n + 1, max_len)?.collect();
    let powers: Vec<GenMap> = (0..n as i32)
        .map(|j| {
            let b = BraidWord::new(n, vec![BraidLetter::sigma(j); k as usize])?;
            braid_map(&b)
        })
        .collect::<Result<_>>()?;
    let fixed: Vec<Word> = words
        .par_iter()
        .filter(|w| powers.iter().all(|m| m.apply(w).map(|v| v == **w).unwrap_or(false)))
        .cloned()
        .collect();
    let violations = fixed.iter().filter(|w| power_of_full_product(w).is_none()).cloned().collect();
    Ok(FixedWordSearch { examined: words.len(), fixed, violations })
}

/// Left-normed commutator `[[y_{p0}, y_{p1}], …, y_{p(q-1)}]` of all letters.
pub fn nondegenerate_commutator(q: usize, order: &[usize]) -> Result<SimplicialElement> {
    let mut acc = SimplicialElement::generator(q, *order.first().ok_or_else(|| Error::Argument("empty order".into()))?)?;
    for &i in &order[1..] {
        acc = acc.commutator(&SimplicialElement::generator(q, i)?)?;
    }
    Ok(acc)
}

pub fn random_word<R: Rng>(rng: &mut R, n_gens: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::from_syllables(
        n_gens,
        (0..len).map(|_| (rng.gen_range(0..n_gens), if rng.gen_bool(0.5) { 1 } else { -1 })),
    )
    .expect("in range")
}

/// A random Moore element: a product of conjugated non-degenerate commutators.
pub fn random_moore<R: Rng>(rng: &mut R, q: usize) -> SimplicialElement {
    let mut acc = SimplicialElement::identity(q);
    if q == 0 {
        return acc;
    }
    for _ in 0..rng.gen_range(1..=2) {
        let mut order: Vec<usize> = (0..q).collect();
        for i in (1..q).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let c = nondegenerate_commutator(q, &order).expect("valid order");
        let a = SimplicialElement::new(q, random_word(rng, q, 2)).expect("dim");
        let mut f = c.conjugate(&a).expect("dim");
        if rng.gen_bool(0.5) {
            f = f.inverse();
        }
        acc = acc.multiply(&f).expect("dim");
    }
    acc
}

/// A random cycle: conjugated boundaries `d_0 u`, plus `[y0, y1]` in dimension 2.
pub fn random_cycle<R: Rng>(rng: &mut R, q: usize) -> SimplicialElement {
    let mut acc = SimplicialElement::identity(q);
    for _ in 0..rng.gen_range(1..=2) {
        let base = if q == 2 && rng.gen_bool(0.5) {
            nondegenerate_commutator(2, &[0, 1]).expect("dim 2")
        } else {
            face(0, &random_moore(rng, q + 1)).expect("dim")
        };
        let a = SimplicialElement::new(q, random_word(rng, q, 2)).expect("dim");
        let mut f = base.conjugate(&a).expect("dim");
        if rng.gen_bool(0.5) {
            f = f.inverse();
        }
        acc = acc.multiply(&f).expect("dim");
    }
    acc
}

/// Samples the equivalence "cycle ⇔ Moore and σ_{-1}-image Moore".
pub fn verify_cycle_characterization(dim_max: usize, samples: usize, seed: u64) -> Vec<Check> {
    use rand::SeedableRng;
    (1..=dim_max)
        .map(|q| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (q as u64).wrapping_mul(0x9e37_79b9));
            let mut counter = None;
            let mut cycles = 0;
            for i in 0..samples {
                let e = match i % 4 {
                    0 => SimplicialElement::new(q, random_word(&mut rng, q, 8)).expect("dim"),
                    1 => random_moore(&mut rng, q),
                    2 => {
                        let m = random_moore(&mut rng, q);
                        act_letter(BraidLetter::sigma_inv(-1), &m).expect("dim")
                    }
                    _ => random_cycle(&mut rng, q),
                };
                let lhs = is_cycle(&e);
                let rhs = is_moore(&e) && is_moore(&sigma(-1, &e).expect("dim"));
                cycles += lhs as usize;
                if lhs != rhs && counter.is_none() {
                    counter = Some(e);
                }
            }
            let details = match &counter {
                Some(e) => format!("counterexample {e}"),
                None => format!("{samples} samples, {cycles} cycles"),
            };
            Check::new(format!("cycle characterization in dimension {q}"), counter.is_none(), details)
        })
        .collect()
}

fn suite_rng(seed: u64, q: usize) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (q as u64).wrapping_mul(0x9e37_79b9))
}

fn nontrivial_cycle<R: Rng>(rng: &mut R, q: usize) -> SimplicialElement {
    loop {
        let x = random_cycle(rng, q);
        if !x.is_identity() {
            return x;
        }
    }
}

/// For `cycles` random cycles per dimension in `2..=dim_max` and every
/// admissible `k`, the faces of `σ_{k+1} s_{k+1} x` follow the expected table
/// and the normalized witness certifies `σ_k x ≃ x⁻¹`.
pub fn verify_inversion_witnesses(dim_max: usize, cycles: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for q in 2..=dim_max {
        let mut rng = suite_rng(seed, q);
        let mut cases = 0;
        let mut bad = Vec::new();
        for _ in 0..cycles {
            let x = nontrivial_cycle(&mut rng, q);
            for k in -1..=(q as i32 - 2) {
                let w = cycle_inversion_witness(k, &x)?;
                cases += 1;
                if !w.table_matches || !w.certificate.is_valid() {
                    bad.push(format!("k={k} x={x} faces {:?}", w.mismatches));
                }
            }
        }
        let details = match bad.first() {
            None => format!("{cycles} cycles, {cases} (cycle, k) cases"),
            Some(b) => format!("{} of {cases} cases fail; first {b}", bad.len()),
        };
        checks.push(Check::new(format!("inversion witness face table in dimension {q}"), bad.is_empty(), details));
    }
    Ok(checks)
}

pub fn verify_fixed_word_search(n: usize, k: u32, max_len: usize) -> Result<Vec<Check>> {
    let s = brute_force_fixed_words(n, k, max_len)?;
    let details = match s.violations.first() {
        None => format!("{} words examined, {} fixed, all powers of y0⋯y{n}", s.examined, s.fixed.len()),
        Some(w) => format!("{} violations, first {w}", s.violations.len()),
    };
    Ok(vec![Check::new(
        format!("words fixed by every σ_j^{k} lie in ⟨y0⋯y{n}⟩ (n={n}, length ≤ {max_len})"),
        s.violations.is_empty(),
        details,
    )])
}

/// Certifies `b(x) ≃ x` for every pure braid generator `b` and `samples`
/// random cycles `x` per dimension in `2..=dim_max`, plus one product of
/// two generators per dimension.
pub fn verify_pure_braid_fixed(dim_max: usize, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for q in 2..=dim_max {
        let mut rng = suite_rng(seed.wrapping_add(1), q);
        let mut braids = pure_braid_generators(q)?;
        if braids.len() >= 2 {
            let product = braids[0].multiply(&braids[braids.len() - 1].inverse())?;
            braids.push(product);
        }
        let mut cases = 0;
        let mut bad = Vec::new();
        for _ in 0..samples {
            let x = nontrivial_cycle(&mut rng, q);
            for b in &braids {
                cases += 1;
                let c = homotopy_fixed_check(b, &x)?;
                if !c.certificate.is_valid() {
                    bad.push(format!("{b} on {x}"));
                }
            }
        }
        let details = match bad.first() {
            None => format!("{} braids × {samples} cycles = {cases} certificates", braids.len()),
            Some(b) => format!("{} of {cases} certificates invalid; first {b}", bad.len()),
        };
        checks.push(Check::new(format!("pure braids fix cycles up to homotopy in dimension {q}"), bad.is_empty(), details));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::all_passed;

    fn el(dim: usize, s: &str) -> SimplicialElement {
        SimplicialElement::parse(dim, s).unwrap()
    }

    #[test]
    fn sigma_image_examples() {
        let m = sigma_images(0, 1).unwrap();
        assert_eq!(m.image(0).to_string(), "y1");
        assert_eq!(m.image(1).to_string(), "y1^-1 y0 y1");
        let m = sigma_images(-1, 2).unwrap();
        assert_eq!(m.image(0).to_string(), "y0^-1 y2^-1 y1^-1");
        let m = sigma_images(1, 3).unwrap();
        let imgs: Vec<String> = m.images().iter().map(|w| w.to_string()).collect();
        assert_eq!(imgs, ["y0", "y2", "y2^-1 y1 y2", "y3"]);
        assert!(sigma_images(2, 2).is_err());
        assert!(sigma_images(-2, 2).is_err());
    }

    #[test]
    fn action_examples() {
        let s0 = BraidWord::sigma(1, 0).unwrap();
        let c = el(2, "y0^-1 y1^-1 y0 y1");
        assert_eq!(act(&s0, &c).unwrap(), el(2, "y1^-2 y0^-1 y1 y0 y1"));
        assert_eq!(act(&s0, &el(2, "y0 y1")).unwrap(), el(2, "y0 y1"));
        assert_eq!(act(&BraidWord::identity(1), &c).unwrap(), c);
        assert!(act(&s0, &el(3, "y0")).is_err());
    }

    #[test]
    fn relations_hold_and_corruption_is_caught() {
        assert!(all_passed(&verify_braid_relations(4).unwrap()));
        let bad = |k: i32, n: usize| {
            if k == 0 {
                let g = n + 1;
                let mut imgs: Vec<Word> = (0..g).map(|i| Word::generator(g, i).unwrap()).collect();
                imgs[0] = Word::generator(g, 1).unwrap();
                imgs[1] = Word::generator(g, 0).unwrap().pow(2);
                GenMap::new(g, g, imgs)
            } else {
                sigma_images(k, n)
            }
        };
        let checks = verify_braid_relations_with(2, &bad).unwrap();
        assert!(checks.iter().any(|c| !c.passed()));
    }

    #[test]
    fn exchange_identities_hold() {
        let checks = verify_braided_identities(4).unwrap();
        let bad: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
        assert!(bad.is_empty(), "{bad:?}");
        assert!(checks.iter().any(|c| c.name == "n=1 d1 s0 = d2"));
        assert!(checks.iter().any(|c| c.name == "n=2 d0 s0 = s-1 d0"));
        assert!(checks.iter().any(|c| c.name == "n=3 deg2 s0 = s0 s1 deg1"));
    }

    #[test]
    fn simplicial_identities_hold() {
        assert!(all_passed(&verify_simplicial_identities(5).unwrap()));
    }

    #[test]
    fn inversion_witness_tables() {
        let x = el(2, "y0^-1 y1^-1 y0 y1");
        for k in -1..=0 {
            let w = cycle_inversion_witness(k, &x).unwrap();
            assert!(w.table_matches, "k={k} mismatches {:?}", w.mismatches);
            assert!(w.certificate.is_valid(), "k={k}");
        }
        let w = cycle_inversion_witness(-1, &x).unwrap();
        assert_eq!(w.faces[0], sigma(-1, &x).unwrap());
        assert!(w.faces[1].is_identity() && w.faces[3].is_identity());
        assert_eq!(w.faces[2], x);
        let w = cycle_inversion_witness(0, &SimplicialElement::identity(2)).unwrap();
        assert!(w.witness.is_identity() && w.faces.iter().all(|f| f.is_identity()));
        assert!(matches!(cycle_inversion_witness(0, &el(2, "y0")), Err(Error::Precondition(_))));
    }

    #[test]
    fn pure_generators() {
        let g = pure_braid_generators(2).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].to_string(), "s0 s0");
        let g: Vec<String> = pure_braid_generators(3).unwrap().iter().map(|b| b.to_string()).collect();
        assert_eq!(g, ["s0 s0", "s1 s0 s0 s1^-1", "s1 s1"]);
        assert!(pure_braid_generators(5).unwrap().iter().all(|b| b.is_pure()));
        assert!(pure_braid_generators(1).is_err());
    }

    #[test]
    fn full_product_powers() {
        let p = Word::full_product(2);
        assert_eq!(power_of_full_product(&p.pow(3)), Some(3));
        assert_eq!(power_of_full_product(&p.pow(-2)), Some(-2));
        assert_eq!(power_of_full_product(&Word::parse(2, "y1 y0").unwrap()), None);
    }

    #[test]
    fn fixed_word_search_small() {
        let r = brute_force_fixed_words(1, 2, 2).unwrap();
        assert!(r.fixed.contains(&Word::identity(2)));
        assert!(r.fixed.contains(&Word::full_product(2)));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn fixed_check_examples() {
        let x = el(2, "y0^-1 y1^-1 y0 y1");
        let b = BraidWord::from_pairs(1, &[(0, 1), (0, 1)]).unwrap();
        assert!(homotopy_fixed_check(&b, &x).unwrap().certificate.is_valid());
        assert!(homotopy_fixed_check(&BraidWord::identity(1), &x).unwrap().certificate.is_valid());
        let id = SimplicialElement::identity(2);
        assert!(homotopy_fixed_check(&b, &id).unwrap().certificate.is_valid());
        let odd = BraidWord::from_pairs(1, &[(0, 1)]).unwrap();
        assert!(matches!(homotopy_fixed_check(&odd, &x), Err(Error::Unsupported(_))));
    }

    #[test]
    fn squared_factor_parsing() {
        let b = BraidWord::from_pairs(2, &[(1, 1), (0, -1), (0, -1), (1, -1), (1, 1), (1, 1)]).unwrap();
        let f = squared_conjugate_factors(&b).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].0, vec![BraidLetter::sigma(1)]);
        assert_eq!(f[0].1, BraidLetter::sigma_inv(0));
    }
}
