//! Milnor's simplicial group F(S¹).
//!
//! Dimension `q` is the free group on `y_0 .. y_{q-1}`; dimension 0 is trivial.

use std::collections::HashSet;
use std::fmt;

use crate::error::{arg_err, Error, Result};
use crate::words::{GenMap, Word};

/// Default bound on `q - n` for [`in_r`].
pub const DEFAULT_FACE_DEPTH_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplicialElement {
    dim: usize,
    word: Word,
}

impl SimplicialElement {
    pub fn new(dim: usize, word: Word) -> Result<Self> {
        if word.n_gens() != dim {
            return arg_err(format!(
                "word over {} generators cannot live in dimension {dim}",
                word.n_gens()
            ));
        }
        Ok(SimplicialElement { dim, word })
    }

    pub fn identity(dim: usize) -> Self {
        SimplicialElement { dim, word: Word::identity(dim) }
    }

    pub fn generator(dim: usize, k: usize) -> Result<Self> {
        Ok(SimplicialElement { dim, word: Word::generator(dim, k)? })
    }

    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        Ok(SimplicialElement { dim, word: Word::parse(dim, s)? })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn into_word(self) -> Word {
        self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_identity()
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        Ok(SimplicialElement { dim: self.dim, word: self.word.multiply(&other.word)? })
    }

    pub fn inverse(&self) -> Self {
        SimplicialElement { dim: self.dim, word: self.word.inverse() }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(SimplicialElement { dim: self.dim, word: self.word.commutator(&other.word)? })
    }

    /// `a⁻¹ self a`.
    pub fn conjugate(&self, a: &Self) -> Result<Self> {
        Ok(SimplicialElement { dim: self.dim, word: self.word.conjugate(&a.word)? })
    }

    pub fn apply(&self, map: &GenMap) -> Result<Self> {
        Ok(SimplicialElement { dim: map.target(), word: map.apply(&self.word)? })
    }
}

impl fmt::Display for SimplicialElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word)
    }
}

/// `y_{-1} = (y_0 ⋯ y_{q-2})⁻¹`, a word of dimension `q - 1`.
pub fn y_neg1(q: usize) -> Result<Word> {
    if q == 0 {
        return arg_err("y_-1 needs dimension at least 1");
    }
    Ok(Word::full_product(q - 1).inverse())
}

/// `d_j : F(S¹)_q → F(S¹)_{q-1}` on generators.
pub fn face_map(j: usize, q: usize) -> Result<GenMap> {
    if q == 0 || j > q {
        return arg_err(format!("face d{j} undefined in dimension {q}"));
    }
    let t = q - 1;
    let images = (0..q)
        .map(|k| {
            if j <= k {
                if k == 0 {
                    y_neg1(q)
                } else {
                    Word::generator(t, k - 1)
                }
            } else if j == k + 1 {
                Ok(Word::identity(t))
            } else {
                Word::generator(t, k)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GenMap::new(q, t, images)
}

/// `s_j : F(S¹)_q → F(S¹)_{q+1}` on generators.
pub fn degeneracy_map(j: usize, q: usize) -> Result<GenMap> {
    if j > q {
        return arg_err(format!("degeneracy s{j} undefined in dimension {q}"));
    }
    let t = q + 1;
    let images = (0..q)
        .map(|k| {
            if j <= k {
                Word::generator(t, k + 1)
            } else if j == k + 1 {
                Word::from_syllables(t, [(k, 1), (k + 1, 1)])
            } else {
                Word::generator(t, k)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GenMap::new(q, t, images)
}

pub fn face(j: usize, e: &SimplicialElement) -> Result<SimplicialElement> {
    e.apply(&face_map(j, e.dim)?)
}

pub fn degeneracy(j: usize, e: &SimplicialElement) -> Result<SimplicialElement> {
    e.apply(&degeneracy_map(j, e.dim)?)
}

/// `(d_0 e, …, d_q e)`; empty in dimension 0.
pub fn faces(e: &SimplicialElement) -> Vec<SimplicialElement> {
    if e.dim == 0 {
        return Vec::new();
    }
    (0..=e.dim)
        .map(|j| face(j, e).expect("face index in range"))
        .collect()
}

/// All faces `d_j`, `j ≥ 1`, are trivial.
pub fn is_moore(e: &SimplicialElement) -> bool {
    e.dim == 0 || (1..=e.dim).all(|j| face(j, e).expect("in range").is_identity())
}

/// All faces are trivial.
pub fn is_cycle(e: &SimplicialElement) -> bool {
    is_moore(e) && (e.dim == 0 || face(0, e).expect("in range").is_identity())
}

/// Whether every iterated face of length `dim - n` kills `e`.
pub fn in_r(n: usize, e: &SimplicialElement) -> Result<bool> {
    in_r_with_cap(n, e, DEFAULT_FACE_DEPTH_CAP)
}

pub fn in_r_with_cap(n: usize, e: &SimplicialElement, cap: usize) -> Result<bool> {
    if n > e.dim {
        return arg_err(format!("R_{n} membership asked in dimension {}", e.dim));
    }
    if n == 0 {
        return Ok(true);
    }
    let depth = e.dim - n;
    if depth > cap {
        return Err(Error::Capacity(format!("face depth {depth} exceeds cap {cap}")));
    }
    let mut level: HashSet<Word> = HashSet::from([e.word.clone()]);
    let mut dim = e.dim;
    for _ in 0..depth {
        let maps: Vec<GenMap> = (0..=dim).map(|j| face_map(j, dim)).collect::<Result<_>>()?;
        let mut next = HashSet::new();
        for w in &level {
            for m in &maps {
                let img = m.apply(w)?;
                next.insert(img);
            }
        }
        next.retain(|w| !w.is_identity());
        level = next;
        dim -= 1;
        if level.is_empty() {
            return Ok(true);
        }
    }
    Ok(level.is_empty())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub normalized: SimplicialElement,
    /// `(j, c)` with `c = s_{j-1}(d_j u)⁻¹` right-multiplied in order.
    pub corrections: Vec<(usize, SimplicialElement)>,
}

/// Right-multiplies corrections killing the faces `d_q, d_{q-1}, …, d_1` in
/// that order.
///
/// Killing `d_j` with `s_{j-1}` leaves the higher faces trivial because
/// `d_i s_{j-1} = s_{j-1} d_{i-1}` for `i > j`. Ascending order does not have
/// this property: `y0` in dimension 2 would come out as `y1⁻¹`.
pub fn moore_normalize(z: &SimplicialElement) -> Result<Normalization> {
    if z.dim == 0 {
        return arg_err("normalization needs dimension at least 1");
    }
    let mut u = z.clone();
    let mut corrections = Vec::new();
    for j in (1..=z.dim).rev() {
        let dj = face(j, &u)?;
        if dj.is_identity() {
            continue;
        }
        let c = degeneracy(j - 1, &dj)?.inverse();
        u = u.multiply(&c)?;
        corrections.push((j, c));
    }
    debug_assert!(is_moore(&u));
    Ok(Normalization { normalized: u, corrections })
}

/// Checkable evidence that `x y⁻¹` is a boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyCertificate {
    pub claim: (SimplicialElement, SimplicialElement),
    pub witness: SimplicialElement,
    pub normalized: SimplicialElement,
    /// `d_0(normalized) · (x y⁻¹)⁻¹`.
    pub residual: Word,
}

impl HomotopyCertificate {
    pub fn is_valid(&self) -> bool {
        self.residual.is_identity() && is_moore(&self.normalized)
    }
}

pub fn certify_homotopy(
    x: &SimplicialElement,
    y: &SimplicialElement,
    witness: &SimplicialElement,
) -> Result<HomotopyCertificate> {
    if x.dim != y.dim || witness.dim != x.dim + 1 {
        return arg_err(format!(
            "dimensions ({}, {}) with witness in {}",
            x.dim, y.dim, witness.dim
        ));
    }
    let normalized = moore_normalize(witness)?.normalized;
    let target = x.multiply(&y.inverse())?;
    let residual = face(0, &normalized)?.word.multiply(&target.word.inverse())?;
    Ok(HomotopyCertificate { claim: (x.clone(), y.clone()), witness: witness.clone(), normalized, residual })
}

/// A chain `u ∈ N_{q+1}` with `d_0 u = g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounding {
    pub boundary: SimplicialElement,
    pub chain: SimplicialElement,
}

impl Bounding {
    pub fn new(boundary: SimplicialElement, chain: SimplicialElement) -> Result<Self> {
        if chain.dim != boundary.dim + 1 {
            return arg_err("bounding chain must sit one dimension up");
        }
        if !is_moore(&chain) || face(0, &chain)? != boundary {
            return Err(Error::Precondition(format!(
                "{chain} is not a Moore chain with boundary {boundary}"
            )));
        }
        Ok(Bounding { boundary, chain })
    }

    pub fn trivial(dim: usize) -> Self {
        Bounding { boundary: SimplicialElement::identity(dim), chain: SimplicialElement::identity(dim + 1) }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        Ok(Bounding {
            boundary: self.boundary.multiply(&other.boundary)?,
            chain: self.chain.multiply(&other.chain)?,
        })
    }

    pub fn inverse(&self) -> Self {
        Bounding { boundary: self.boundary.inverse(), chain: self.chain.inverse() }
    }

    /// Bounds `h g h⁻¹` by `s_0(h) u s_0(h)⁻¹`.
    pub fn conjugate_by(&self, h: &SimplicialElement) -> Result<Self> {
        let hs = degeneracy(0, h)?;
        let hinv = h.inverse();
        Ok(Bounding {
            boundary: h.multiply(&self.boundary)?.multiply(&hinv)?,
            chain: hs.multiply(&self.chain)?.multiply(&hs.inverse())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(dim: usize, s: &str) -> SimplicialElement {
        SimplicialElement::parse(dim, s).unwrap()
    }

    #[test]
    fn y_neg1_examples() {
        assert_eq!(y_neg1(2).unwrap().to_string(), "y0^-1");
        assert_eq!(y_neg1(3).unwrap().to_string(), "y1^-1 y0^-1");
        assert!(y_neg1(1).unwrap().is_identity());
        assert!(y_neg1(0).is_err());
    }

    #[test]
    fn face_and_degeneracy_examples() {
        let c = el(2, "y0^-1 y1^-1 y0 y1");
        assert!(face(0, &c).unwrap().is_identity());
        assert!(face(2, &el(2, "y1")).unwrap().is_identity());
        assert_eq!(degeneracy(1, &el(1, "y0")).unwrap(), el(2, "y0 y1"));
        assert!(face(3, &c).is_err());
        assert!(degeneracy(0, &SimplicialElement::identity(0)).unwrap().is_identity());
    }

    #[test]
    fn moore_and_cycle_examples() {
        let c = el(2, "y0^-1 y1^-1 y0 y1");
        assert!(is_cycle(&c) && is_moore(&c));
        assert!(!is_moore(&el(2, "y0")));
        let id = SimplicialElement::identity(3);
        assert!(is_moore(&id) && is_cycle(&id));
    }

    #[test]
    fn r_membership_examples() {
        let c = el(2, "y0^-1 y1^-1 y0 y1");
        assert!(in_r(1, &c).unwrap());
        assert!(!in_r(1, &el(2, "y0")).unwrap());
        assert!(in_r(0, &el(9, "y3 y8")).unwrap());
        assert!(in_r(3, &el(2, "y0")).is_err());
        assert!(matches!(in_r(1, &el(9, "y3")), Err(Error::Capacity(_))));
    }

    #[test]
    fn normalization_examples() {
        let c = el(2, "y0^-1 y1^-1 y0 y1");
        let n = moore_normalize(&c).unwrap();
        assert_eq!(n.normalized, c);
        assert!(n.corrections.is_empty());
        let z = degeneracy(0, &el(1, "y0")).unwrap();
        assert!(moore_normalize(&z).unwrap().normalized.is_identity());
        let n = moore_normalize(&el(2, "y1")).unwrap();
        assert!(n.normalized.is_identity());
        assert_eq!(n.corrections, vec![(1, el(2, "y1^-1"))]);
        // ascending order would leave y1^-1 here
        let n = moore_normalize(&el(2, "y0")).unwrap();
        assert!(is_moore(&n.normalized));
    }

    #[test]
    fn certificate_examples() {
        let id1 = SimplicialElement::identity(1);
        let cert = certify_homotopy(&id1, &id1, &SimplicialElement::identity(2)).unwrap();
        assert!(cert.is_valid());

        let u = el(3, "y0").commutator(&el(3, "y1").commutator(&el(3, "y2")).unwrap()).unwrap();
        assert!(is_moore(&u));
        let y = el(2, "y1 y0");
        let x = face(0, &u).unwrap().multiply(&y).unwrap();
        assert!(certify_homotopy(&x, &y, &u).unwrap().is_valid());

        let c = el(2, "y0^-1 y1^-1 y0 y1");
        let cert = certify_homotopy(&c, &el(2, "1"), &SimplicialElement::identity(3)).unwrap();
        assert!(!cert.is_valid());
        assert!(certify_homotopy(&c, &id1, &SimplicialElement::identity(3)).is_err());
    }

    #[test]
    fn bounding_algebra() {
        let u = el(3, "y0").commutator(&el(3, "y1").commutator(&el(3, "y2")).unwrap()).unwrap();
        let b = Bounding::new(face(0, &u).unwrap(), u.clone()).unwrap();
        let h = el(2, "y0 y1^2");
        let conj = b.conjugate_by(&h).unwrap();
        assert_eq!(Bounding::new(conj.boundary.clone(), conj.chain.clone()).unwrap(), conj);
        let prod = b.multiply(&conj.inverse()).unwrap();
        assert!(Bounding::new(prod.boundary.clone(), prod.chain.clone()).is_ok());
        assert!(Bounding::new(el(2, "y0"), u).is_err());
    }
}
