//! Free-group words, the Artin action, and longitudes.
//!
//! Generators are 0-based internally and printed 1-based (`X1`, `X2`, ...).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("cannot parse token '{0}'")]
    BadToken(String),
    #[error("braid generator {0} out of range for {1} strands")]
    BraidIndex(i32, usize),
    #[error("braid is not pure")]
    NotPure,
    #[error("image of x{0} is not a conjugate of x{0}")]
    NotConjugate(usize),
    #[error("relation {0} references missing generator")]
    MalformedRelation(usize),
}

/// A freely reduced word. Letters are `(generator, ±1)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<(usize, i8)>,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn gen(i: usize) -> Self {
        Word { letters: vec![(i, 1)] }
    }

    pub fn gen_pow(i: usize, k: i64) -> Self {
        let e = if k < 0 { -1 } else { 1 };
        Word { letters: vec![(i, e); k.unsigned_abs() as usize] }
    }

    /// Reduce a raw letter sequence, checking every index is below `m`.
    pub fn reduce(raw: &[(usize, i8)], m: usize) -> Result<Self, WordError> {
        for &(g, _) in raw {
            if g >= m {
                return Err(WordError::IndexOutOfRange(g + 1, m));
            }
        }
        Ok(Self::from_raw(raw.iter().copied()))
    }

    pub fn from_raw<I: IntoIterator<Item = (usize, i8)>>(raw: I) -> Self {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for (g, e) in raw {
            debug_assert!(e == 1 || e == -1);
            if out.last() == Some(&(g, -e)) {
                out.pop();
            } else {
                out.push((g, e));
            }
        }
        Word { letters: out }
    }

    /// Parse `X1^-1 X2`; the empty string and `1` are the identity.
    pub fn parse(s: &str) -> Result<Self, WordError> {
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let body = tok
                .strip_prefix('X')
                .or_else(|| tok.strip_prefix('x'))
                .ok_or_else(|| WordError::BadToken(tok.to_string()))?;
            let (idx, exp) = match body.split_once('^') {
                Some((a, b)) => (a, b.parse::<i64>().map_err(|_| WordError::BadToken(tok.to_string()))?),
                None => (body, 1),
            };
            let i: usize = idx.parse().map_err(|_| WordError::BadToken(tok.to_string()))?;
            if i == 0 {
                return Err(WordError::BadToken(tok.to_string()));
            }
            let e = if exp < 0 { -1 } else { 1 };
            for _ in 0..exp.unsigned_abs() {
                raw.push((i - 1, e));
            }
        }
        Ok(Self::from_raw(raw))
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn rank(&self) -> usize {
        self.letters.iter().map(|&(g, _)| g + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Word { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_raw(self.letters.iter().chain(o.letters.iter()).copied())
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut r = Word::identity();
        for _ in 0..k.unsigned_abs() {
            r = r.mul(&base);
        }
        r
    }

    /// `g^{-1} self g`.
    pub fn conj(&self, g: &Self) -> Self {
        g.inverse().mul(self).mul(g)
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|&(_, e)| e as i64).sum()
    }

    pub fn exponent_sum_of(&self, g: usize) -> i64 {
        self.letters.iter().filter(|l| l.0 == g).map(|&(_, e)| e as i64).sum()
    }

    /// Replace each generator `x_g` by `images[g]`.
    pub fn substitute(&self, images: &[Word]) -> Self {
        let mut raw = Vec::new();
        for &(g, e) in &self.letters {
            if e > 0 {
                raw.extend(images[g].letters.iter().copied());
            } else {
                raw.extend(images[g].inverse().letters);
            }
        }
        Self::from_raw(raw)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let toks: Vec<String> = self
            .letters
            .iter()
            .map(|&(g, e)| if e > 0 { format!("X{}", g + 1) } else { format!("X{}^-1", g + 1) })
            .collect();
        write!(f, "{}", toks.join(" "))
    }
}

/// A braid word: `k` is σ_k and `-k` is σ_k⁻¹.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Braid {
    strands: usize,
    word: Vec<i32>,
}

impl Braid {
    pub fn new(strands: usize, word: Vec<i32>) -> Result<Self, WordError> {
        for &k in &word {
            if k == 0 || k.unsigned_abs() as usize >= strands {
                return Err(WordError::BraidIndex(k, strands));
            }
        }
        Ok(Braid { strands, word })
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    /// `perm[p]` is the strand that ends at position `p`, reading letters bottom to top.
    pub fn permutation(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.strands).collect();
        for &k in &self.word {
            let k = k.unsigned_abs() as usize - 1;
            pos.swap(k, k + 1);
        }
        pos
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(p, &s)| p == s)
    }

    pub fn inverse(&self) -> Self {
        Braid { strands: self.strands, word: self.word.iter().rev().map(|k| -k).collect() }
    }
}

impl fmt::Display for Braid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let toks: Vec<String> = self
            .word
            .iter()
            .map(|&k| if k > 0 { format!("s{k}") } else { format!("s{}^-1", -k) })
            .collect();
        write!(f, "{}", toks.join(" "))
    }
}

/// Freely reduced pure braid words with at most `max_len` letters, by length and
/// then lexicographically over the alphabet `σ_1, σ_1⁻¹, σ_2, σ_2⁻¹, ...`.
pub fn pure_braids(m: usize, max_len: usize) -> Vec<Braid> {
    let gens: Vec<i32> = (1..m as i32).flat_map(|k| [k, -k]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<i32>> = vec![vec![]];
    for len in 0..=max_len {
        if len > 0 {
            layer = layer
                .iter()
                .flat_map(|w| {
                    gens.iter().filter(move |&&g| w.last() != Some(&-g)).map(move |&g| {
                        let mut v = w.clone();
                        v.push(g);
                        v
                    })
                })
                .collect();
        }
        for w in &layer {
            let b = Braid { strands: m, word: w.clone() };
            if b.is_pure() {
                out.push(b);
            }
        }
    }
    out
}

fn sigma_images(m: usize, k: i32) -> Vec<Word> {
    let mut im: Vec<Word> = (0..m).map(Word::gen).collect();
    let a = k.unsigned_abs() as usize - 1;
    let xa = Word::gen(a);
    let xb = Word::gen(a + 1);
    if k > 0 {
        im[a] = xa.mul(&xb).mul(&xa.inverse());
        im[a + 1] = xa;
    } else {
        im[a] = xb.clone();
        im[a + 1] = xb.inverse().mul(&xa).mul(&xb);
    }
    im
}

/// Image of `w` under the braid automorphism, letters applied in word order.
pub fn artin_apply(b: &Braid, w: &Word) -> Result<Word, WordError> {
    let m = b.strands();
    if let Some(&(g, _)) = w.letters().iter().find(|l| l.0 >= m) {
        return Err(WordError::IndexOutOfRange(g + 1, m));
    }
    let mut r = w.clone();
    for &k in b.word() {
        r = r.substitute(&sigma_images(m, k));
    }
    Ok(r)
}

/// Conjugators `A_i` with `b(x_i) = A_i x_i A_i⁻¹`.
pub fn longitudes_from_braid(b: &Braid) -> Result<Vec<Word>, WordError> {
    if !b.is_pure() {
        return Err(WordError::NotPure);
    }
    (0..b.strands())
        .map(|i| {
            let img = artin_apply(b, &Word::gen(i))?;
            let l = img.letters();
            if l.len() % 2 == 0 {
                return Err(WordError::NotConjugate(i + 1));
            }
            let k = l.len() / 2;
            let a = Word { letters: l[..k].to_vec() };
            let tail = Word { letters: l[k + 1..].to_vec() };
            if l[k] != (i, 1) || tail != a.inverse() {
                return Err(WordError::NotConjugate(i + 1));
            }
            Ok(a)
        })
        .collect()
}

/// `x_i^{-e} raw` where `e` is the exponent sum of `raw`.
pub fn normalize_longitude(raw: &Word, i: usize) -> Word {
    Word::gen_pow(i, -raw.exponent_sum()).mul(raw)
}

/// `raw x_i^{-e}`, the form used for strands read against their orientation.
pub fn normalize_longitude_right(raw: &Word, i: usize) -> Word {
    raw.mul(&Word::gen_pow(i, -raw.exponent_sum()))
}

/// One Wirtinger relation: `leaving = over^{-sign} entering over^{sign}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub leaving: usize,
    pub entering: usize,
    pub over: usize,
    pub sign: i8,
}

/// Arcs of one strand in traversal order, and the relations met as underpass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrandArcs {
    pub arcs: Vec<usize>,
    pub unders: Vec<usize>,
    /// Traversal runs from the 0-end to the 1-end.
    pub upward: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WirtingerPresentation {
    pub generators: usize,
    pub relations: Vec<Relation>,
    /// Arc carrying the canonical meridian `x_i` (at the 0-end of strand `i`).
    pub meridians: Vec<usize>,
    pub strands: Vec<StrandArcs>,
}

impl WirtingerPresentation {
    pub fn m(&self) -> usize {
        self.meridians.len()
    }

    pub fn validate(&self) -> Result<(), WordError> {
        for (k, r) in self.relations.iter().enumerate() {
            if r.leaving >= self.generators || r.entering >= self.generators || r.over >= self.generators {
                return Err(WordError::MalformedRelation(k));
            }
        }
        for s in &self.strands {
            if s.arcs.iter().any(|&a| a >= self.generators) || s.unders.iter().any(|&u| u >= self.relations.len()) {
                return Err(WordError::MalformedRelation(self.relations.len()));
            }
        }
        if self.meridians.iter().any(|&a| a >= self.generators) {
            return Err(WordError::MalformedRelation(self.relations.len()));
        }
        Ok(())
    }
}

/// Arc values as words in the meridians, by repeated sweeps from the 0-ends.
///
/// Every arc starts as its strand's meridian, which is right modulo `F_2`;
/// each sweep gains one lower-central-series step. Sweeping stops when nothing
/// changes (then the values are exact) or after `q` sweeps.
pub fn arc_words(p: &WirtingerPresentation, q: usize) -> Result<Vec<Word>, WordError> {
    p.validate()?;
    let mut val = vec![Word::identity(); p.generators];
    for (i, s) in p.strands.iter().enumerate() {
        for &a in &s.arcs {
            val[a] = Word::gen(i);
        }
    }
    for _ in 0..q.max(1) + p.generators {
        let mut changed = false;
        for (i, s) in p.strands.iter().enumerate() {
            let n = s.unders.len();
            // walk away from the meridian arc
            let order: Vec<usize> = if s.upward { (0..n).collect() } else { (0..n).rev().collect() };
            let start = if s.upward { s.arcs[0] } else { s.arcs[n] };
            debug_assert_eq!(start, p.meridians[i]);
            val[start] = Word::gen(i);
            for k in order {
                let r = &p.relations[s.unders[k]];
                let g = val[r.over].pow(r.sign as i64);
                let new = if s.upward {
                    val[r.entering].conj(&g)
                } else {
                    val[r.leaving].conj(&g.inverse())
                };
                let tgt = if s.upward { r.leaving } else { r.entering };
                if val[tgt] != new {
                    val[tgt] = new;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(val)
}

/// Normalized longitudes read off a Wirtinger presentation.
pub fn nilpotent_longitudes(p: &WirtingerPresentation, q: usize) -> Result<Vec<Word>, WordError> {
    let val = arc_words(p, q)?;
    Ok(p.strands
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let raw = Word::from_raw(s.unders.iter().flat_map(|&k| {
                let r = &p.relations[k];
                val[r.over].pow(r.sign as i64).letters
            }));
            if s.upward {
                normalize_longitude(&raw, i)
            } else {
                normalize_longitude_right(&raw, i)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce(&[(0, 1), (0, -1)], 2).unwrap(), Word::identity());
        assert_eq!(Word::reduce(&[(0, 1), (1, 1), (1, -1), (0, 1)], 2).unwrap(), w("X1^2"));
        assert_eq!(Word::reduce(&[(2, 1)], 2), Err(WordError::IndexOutOfRange(3, 2)));
        let x = w("X1 X2^-1 X3 X1");
        assert!(x.mul(&x.inverse()).is_empty());
    }

    #[test]
    fn parse_display_roundtrip() {
        let x = w("X1^-1 X2 X2 X3^-2");
        assert_eq!(x.to_string(), "X1^-1 X2 X2 X3^-1 X3^-1");
        assert_eq!(w(&x.to_string()), x);
        assert_eq!(w("1"), Word::identity());
        assert!(Word::parse("Y1").is_err());
        assert!(Word::parse("X0").is_err());
    }

    #[test]
    fn sigma_on_generators() {
        let b = Braid::new(2, vec![1]).unwrap();
        assert_eq!(artin_apply(&b, &w("X1")).unwrap(), w("X1 X2 X1^-1"));
        assert_eq!(artin_apply(&b, &w("X2")).unwrap(), w("X1"));
        let id = Braid::new(3, vec![]).unwrap();
        assert_eq!(artin_apply(&id, &w("X3 X1^-1")).unwrap(), w("X3 X1^-1"));
    }

    #[test]
    fn braid_relation() {
        let a = Braid::new(3, vec![1, 2, 1]).unwrap();
        let b = Braid::new(3, vec![2, 1, 2]).unwrap();
        for g in 0..3 {
            assert_eq!(artin_apply(&a, &Word::gen(g)).unwrap(), artin_apply(&b, &Word::gen(g)).unwrap());
        }
    }

    #[test]
    fn hopf_conjugators() {
        let b = Braid::new(2, vec![1, 1]).unwrap();
        assert_eq!(artin_apply(&b, &w("X1")).unwrap(), w("X1 X2 X1 X2^-1 X1^-1"));
        let a = longitudes_from_braid(&b).unwrap();
        assert_eq!(a[0], w("X1 X2"));
        for (i, ai) in a.iter().enumerate() {
            let img = artin_apply(&b, &Word::gen(i)).unwrap();
            assert_eq!(ai.mul(&Word::gen(i)).mul(&ai.inverse()), img);
        }
        assert_eq!(normalize_longitude(&a[0], 0), w("X1^-1 X2"));
    }

    #[test]
    fn borromean_conjugators_have_zero_sums() {
        let b = Braid::new(3, vec![1, -2, 1, -2, 1, -2]).unwrap();
        let a = longitudes_from_braid(&b).unwrap();
        for (i, ai) in a.iter().enumerate() {
            assert_eq!(ai.mul(&Word::gen(i)).mul(&ai.inverse()), artin_apply(&b, &Word::gen(i)).unwrap());
            for g in 0..3 {
                if g != i {
                    assert_eq!(ai.exponent_sum_of(g), 0);
                }
            }
        }
    }

    #[test]
    fn corpus_sizes() {
        assert_eq!(pure_braids(2, 6).len(), 7);
        assert_eq!(pure_braids(3, 6).len(), 373);
        assert_eq!(pure_braids(1, 6).len(), 1);
        assert_eq!(pure_braids(3, 2)[1].word(), &[1, 1]);
    }

    #[test]
    fn non_pure_rejected() {
        let b = Braid::new(2, vec![1]).unwrap();
        assert_eq!(longitudes_from_braid(&b), Err(WordError::NotPure));
        assert!(Braid::new(2, vec![2]).is_err());
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_longitude(&Word::identity(), 0), Word::identity());
        assert_eq!(normalize_longitude(&w("X2^-1 X1"), 1), w("X2^-1 X1"));
        assert_eq!(normalize_longitude_right(&w("X2 X1"), 1), w("X2 X1 X2^-2"));
    }

    #[test]
    fn malformed_presentation() {
        let p = WirtingerPresentation {
            generators: 1,
            relations: vec![Relation { leaving: 0, entering: 0, over: 3, sign: 1 }],
            meridians: vec![0],
            strands: vec![StrandArcs { arcs: vec![0], unders: vec![], upward: true }],
        };
        assert_eq!(nilpotent_longitudes(&p, 3), Err(WordError::MalformedRelation(0)));
    }
}
