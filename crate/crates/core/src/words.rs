//! Reduced words in finitely generated free groups.
//!
//! Words are stored run-length encoded as syllables `y_i^e`. Conventions used
//! everywhere in the crate:
//!
//! * `commutator(a, b) = a⁻¹ b⁻¹ a b`
//! * `conjugate(w, a) = a⁻¹ w a`

use std::fmt;

use crate::error::{arg_err, Error, Result};

/// Largest word length accepted by [`enumerate_words`].
pub const MAX_ENUMERATION_LEN: usize = 16;
/// Largest number of words [`enumerate_words`] will produce.
pub const MAX_ENUMERATION_COUNT: u128 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub gen: usize,
    pub exp: i64,
}

/// A fully reduced word over generators `y_0 .. y_{n_gens-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    n_gens: usize,
    syllables: Vec<Syllable>,
}

/// Reducing accumulator; pushing syllables keeps the buffer reduced.
#[derive(Debug, Default)]
struct Reducer {
    out: Vec<Syllable>,
}

impl Reducer {
    fn push(&mut self, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.out.last_mut() {
            if last.gen == gen {
                last.exp += exp;
                if last.exp == 0 {
                    self.out.pop();
                }
                return;
            }
        }
        self.out.push(Syllable { gen, exp });
    }

    fn push_word(&mut self, w: &Word) {
        for s in &w.syllables {
            self.push(s.gen, s.exp);
        }
    }

    fn push_inverse(&mut self, w: &Word) {
        for s in w.syllables.iter().rev() {
            self.push(s.gen, -s.exp);
        }
    }
}

impl Word {
    pub fn identity(n_gens: usize) -> Self {
        Word { n_gens, syllables: Vec::new() }
    }

    pub fn generator(n_gens: usize, gen: usize) -> Result<Self> {
        Self::from_syllables(n_gens, [(gen, 1)])
    }

    /// Builds the reduced form of a raw syllable sequence.
    pub fn from_syllables<I>(n_gens: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut r = Reducer::default();
        for (gen, exp) in raw {
            if gen >= n_gens {
                return arg_err(format!("generator y{gen} out of range for {n_gens} generators"));
            }
            r.push(gen, exp);
        }
        Ok(Word { n_gens, syllables: r.out })
    }

    pub fn n_gens(&self) -> usize {
        self.n_gens
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters `y_i^{±1}`.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Letters as `(generator, ±1)`.
    pub fn letters(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.syllables
            .iter()
            .flat_map(|s| std::iter::repeat((s.gen, s.exp.signum())).take(s.exp.unsigned_abs() as usize))
    }

    fn check_same(&self, other: &Word) -> Result<()> {
        if self.n_gens != other.n_gens {
            return arg_err(format!(
                "generator count mismatch: {} vs {}",
                self.n_gens, other.n_gens
            ));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.check_same(other)?;
        let mut r = Reducer { out: self.syllables.clone() };
        r.push_word(other);
        Ok(Word { n_gens: self.n_gens, syllables: r.out })
    }

    pub fn inverse(&self) -> Word {
        let mut r = Reducer::default();
        r.push_inverse(self);
        Word { n_gens: self.n_gens, syllables: r.out }
    }

    /// `a⁻¹ b⁻¹ a b`.
    pub fn commutator(&self, other: &Word) -> Result<Word> {
        self.check_same(other)?;
        let mut r = Reducer::default();
        r.push_inverse(self);
        r.push_inverse(other);
        r.push_word(self);
        r.push_word(other);
        Ok(Word { n_gens: self.n_gens, syllables: r.out })
    }

    /// `a⁻¹ self a`.
    pub fn conjugate(&self, a: &Word) -> Result<Word> {
        self.check_same(a)?;
        let mut r = Reducer::default();
        r.push_inverse(a);
        r.push_word(self);
        r.push_word(a);
        Ok(Word { n_gens: self.n_gens, syllables: r.out })
    }

    pub fn pow(&self, e: i64) -> Word {
        let mut r = Reducer::default();
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                r.push_word(self);
            } else {
                r.push_inverse(self);
            }
        }
        Word { n_gens: self.n_gens, syllables: r.out }
    }

    /// Product `y_0 y_1 ⋯ y_{n-1}` of all generators in order.
    pub fn full_product(n_gens: usize) -> Word {
        Word {
            n_gens,
            syllables: (0..n_gens).map(|gen| Syllable { gen, exp: 1 }).collect(),
        }
    }

    /// Same letters, read in a larger free group.
    pub fn widen(&self, n_gens: usize) -> Result<Word> {
        if n_gens < self.n_gens && self.syllables.iter().any(|s| s.gen >= n_gens) {
            return arg_err("cannot narrow a word that uses a dropped generator");
        }
        Ok(Word { n_gens, syllables: self.syllables.clone() })
    }

    /// Parses `y0 y1^-1 y0^2` (identity is `1`).
    pub fn parse(n_gens: usize, s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::identity(n_gens));
        }
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            let body = tok
                .strip_prefix('y')
                .ok_or_else(|| Error::Parse(format!("bad letter `{tok}`")))?;
            let (g, e) = match body.split_once('^') {
                Some((g, e)) => (g, e.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in `{tok}`")))?),
                None => (body, 1),
            };
            let g: usize = g.parse().map_err(|_| Error::Parse(format!("bad generator in `{tok}`")))?;
            raw.push((g, e));
        }
        if raw.is_empty() {
            return Err(Error::Parse("empty word; write `1` for the identity".into()));
        }
        Word::from_syllables(n_gens, raw)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if s.exp == 1 {
                write!(f, "y{}", s.gen)?;
            } else {
                write!(f, "y{}^{}", s.gen, s.exp)?;
            }
        }
        Ok(())
    }
}

/// A homomorphism of free groups given by the images of the source generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenMap {
    source: usize,
    target: usize,
    images: Vec<Word>,
}

impl GenMap {
    pub fn new(source: usize, target: usize, images: Vec<Word>) -> Result<Self> {
        if images.len() != source {
            return arg_err(format!("{} images for {source} source generators", images.len()));
        }
        if let Some(w) = images.iter().find(|w| w.n_gens != target) {
            return arg_err(format!("image {w} is not over {target} generators"));
        }
        Ok(GenMap { source, target, images })
    }

    pub fn identity(n: usize) -> Self {
        GenMap {
            source: n,
            target: n,
            images: (0..n).map(|i| Word::generator(n, i).expect("in range")).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, gen: usize) -> &Word {
        &self.images[gen]
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.n_gens != self.source {
            return arg_err(format!(
                "word over {} generators given to a map from {} generators",
                w.n_gens, self.source
            ));
        }
        let mut r = Reducer::default();
        for s in &w.syllables {
            let img = &self.images[s.gen];
            for _ in 0..s.exp.unsigned_abs() {
                if s.exp > 0 {
                    r.push_word(img);
                } else {
                    r.push_inverse(img);
                }
            }
        }
        Ok(Word { n_gens: self.target, syllables: r.out })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GenMap) -> Result<GenMap> {
        if inner.target != self.source {
            return arg_err(format!(
                "cannot compose: inner target {} vs outer source {}",
                inner.target, self.source
            ));
        }
        let images = inner
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(GenMap { source: inner.source, target: self.target, images })
    }
}

/// Number of reduced words of length at most `max_len` on `n_gens` generators.
pub fn reduced_word_count(n_gens: usize, max_len: usize) -> u128 {
    let k = 2 * n_gens as u128;
    let mut total = 1u128;
    let mut layer = if k == 0 { 0 } else { k };
    for _ in 1..=max_len {
        total += layer;
        layer = layer.saturating_mul(k.saturating_sub(1));
    }
    total
}

/// Every reduced word of length `<= max_len`, by length and then
/// lexicographically on letters (`y0 < y0⁻¹ < y1 < …`).
pub fn enumerate_words(n_gens: usize, max_len: usize) -> Result<impl Iterator<Item = Word>> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(Error::Capacity(format!(
            "word length {max_len} exceeds cap {MAX_ENUMERATION_LEN}"
        )));
    }
    let count = reduced_word_count(n_gens, max_len);
    if count > MAX_ENUMERATION_COUNT {
        return Err(Error::Capacity(format!(
            "{count} words exceeds cap {MAX_ENUMERATION_COUNT}"
        )));
    }
    Ok((0..=max_len).flat_map(move |len| words_of_length(n_gens, len)))
}

fn words_of_length(n_gens: usize, len: usize) -> Vec<Word> {
    // letter code c: generator c / 2, inverse iff c odd
    fn rec(n_gens: usize, len: usize, prefix: &mut Vec<usize>, out: &mut Vec<Word>) {
        if prefix.len() == len {
            let w = Word::from_syllables(
                n_gens,
                prefix.iter().map(|&c| (c / 2, if c % 2 == 0 { 1 } else { -1 })),
            )
            .expect("letters in range");
            out.push(w);
            return;
        }
        for c in 0..2 * n_gens {
            if let Some(&last) = prefix.last() {
                if last / 2 == c / 2 && last != c {
                    continue;
                }
            }
            prefix.push(c);
            rec(n_gens, len, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if len > 0 && n_gens == 0 {
        return out;
    }
    rec(n_gens, len, &mut Vec::with_capacity(len), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    #[test]
    fn reduction_examples() {
        let r = Word::from_syllables(2, [(0, 1), (1, 1), (1, -1), (0, 1)]).unwrap();
        assert_eq!(r.to_string(), "y0^2");
        assert!(Word::from_syllables(2, []).unwrap().is_identity());
        let r = Word::from_syllables(2, [(0, -1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(r, w(2, "y1"));
        assert!(matches!(Word::from_syllables(2, [(2, 1)]), Err(Error::Argument(_))));
    }

    #[test]
    fn group_operations() {
        let y0 = w(2, "y0");
        let y1 = w(2, "y1");
        assert_eq!(y0.commutator(&y1).unwrap().to_string(), "y0^-1 y1^-1 y0 y1");
        assert!(y0.commutator(&y0).unwrap().is_identity());
        assert_eq!(w(2, "y0 y1").inverse().to_string(), "y1^-1 y0^-1");
        assert!(y0.multiply(&w(3, "y2")).is_err());
        assert_eq!(y1.conjugate(&y0).unwrap(), w(2, "y0^-1 y1 y0"));
        assert_eq!(w(2, "y0 y1").pow(-2), w(2, "y1^-1 y0^-1 y1^-1 y0^-1"));
    }

    #[test]
    fn apply_map_examples() {
        let f = GenMap::new(2, 2, vec![w(2, "y1"), w(2, "y1^-1 y0 y1")]).unwrap();
        assert_eq!(f.apply(&w(2, "y0")).unwrap(), w(2, "y1"));
        let c = w(2, "y0").commutator(&w(2, "y1")).unwrap();
        assert_eq!(f.apply(&c).unwrap(), w(2, "y1^-2 y0^-1 y1 y0 y1"));
        assert_eq!(GenMap::identity(2).apply(&c).unwrap(), c);
        assert!(f.apply(&w(3, "y2")).is_err());
        assert!(GenMap::new(2, 2, vec![w(2, "y1")]).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["1", "y0 y1^-1 y0^2", "y3^-7"] {
            assert_eq!(w(4, s).to_string(), s);
        }
        assert!(Word::parse(2, "y0 x1").is_err());
        assert!(Word::parse(2, "").is_err());
        assert!(Word::parse(2, "y5").is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_words(2, 1).unwrap().count(), 5);
        assert_eq!(enumerate_words(2, 2).unwrap().count(), 17);
        assert_eq!(enumerate_words(0, 5).unwrap().count(), 1);
        for n in 1..=3 {
            for l in 0..=4 {
                let all: Vec<Word> = enumerate_words(n, l).unwrap().collect();
                assert_eq!(all.len() as u128, reduced_word_count(n, l));
                let set: std::collections::HashSet<_> = all.iter().collect();
                assert_eq!(set.len(), all.len());
                assert!(all.iter().all(|x| x.len() <= l));
            }
        }
        assert!(matches!(enumerate_words(2, 17), Err(Error::Capacity(_))));
        assert!(matches!(enumerate_words(8, 12), Err(Error::Capacity(_))));
    }

    #[test]
    fn enumeration_order_is_length_then_lex() {
        let all: Vec<String> = enumerate_words(1, 2).unwrap().map(|w| w.to_string()).collect();
        assert_eq!(all, ["1", "y0", "y0^-1", "y0^2", "y0^-2"]);
    }
}
