//! Linear morphisms and morphic fixed points.
//!
//! A morphism `h` on an integer alphabet is *linear* when `|h(x)| = a + bx`
//! and `S(h(x)) = c + dx` for integers `a,b,c,d`.  Its matrix
//! `M_h = [[a,b],[c,d]]` then satisfies `σ(h(u)) = M_h·σ(u)` for every
//! word `u`, which is the identity the whole template engine rides on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::words::{Letter, Mat2, Word};

/// A morphism on an integer alphabet whose image lengths and sums are
/// affine in the letter value.  Construction verifies linearity exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMorphism {
    alphabet: BTreeSet<Letter>,
    images: BTreeMap<Letter, Word>,
    matrix: Mat2,
    width: usize,
}

impl LinearMorphism {
    /// Fits `(a,b,c,d)` from the images and verifies the fit on every
    /// letter.  The fit is exact; any mismatch is `NotLinear`.
    pub fn new(images: BTreeMap<Letter, Word>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::NotLinear);
        }
        let letters: Vec<Letter> = images.keys().copied().collect();
        let fit = |vals: &dyn Fn(&Word) -> i64| -> Result<(i64, i64)> {
            // Solve v = a + b·x from the first two letters, b = 0 for a
            // singleton alphabet, then verify on all letters.
            let x0 = letters[0] as i64;
            let v0 = vals(&images[&letters[0]]);
            let (a, b) = if letters.len() == 1 {
                (v0, 0)
            } else {
                let x1 = letters[1] as i64;
                let v1 = vals(&images[&letters[1]]);
                let num = v1 - v0;
                let den = x1 - x0;
                if num % den != 0 {
                    return Err(Error::NotLinear);
                }
                let b = num / den;
                (v0 - b * x0, b)
            };
            for &x in &letters {
                if vals(&images[&x]) != a + b * x as i64 {
                    return Err(Error::NotLinear);
                }
            }
            Ok((a, b))
        };
        let (a, b) = fit(&|w: &Word| w.len() as i64)?;
        let (c, d) = fit(&|w: &Word| w.sigma().sum)?;
        let width = images.values().map(Word::len).max().unwrap_or(0);
        Ok(LinearMorphism {
            alphabet: letters.into_iter().collect(),
            images,
            matrix: Mat2([[a, b], [c, d]]),
            width,
        })
    }

    pub fn alphabet(&self) -> &BTreeSet<Letter> {
        &self.alphabet
    }

    pub fn image(&self, a: Letter) -> Result<&Word> {
        self.images.get(&a).ok_or(Error::LetterOutsideDomain(a))
    }

    /// M_h.
    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    /// W_h, the maximum image length.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn min_image_len(&self) -> usize {
        self.images.values().map(Word::len).min().unwrap_or(0)
    }

    /// Applies the morphism letter by letter.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let mut out = Vec::new();
        for &a in w.letters() {
            out.extend_from_slice(self.image(a)?.letters());
        }
        Ok(Word::new(out))
    }

    /// `h^n(seed)`; requires `h(seed)` to start with `seed` so that the
    /// iterates are prefixes of one another.
    pub fn iterate_prefix(&self, seed: Letter, n: u32) -> Result<Word> {
        self.check_prolongable(seed)?;
        let mut w = Word::new(vec![seed]);
        for _ in 0..n {
            w = self.apply(&w)?;
        }
        Ok(w)
    }

    pub fn check_prolongable(&self, seed: Letter) -> Result<()> {
        let img = self.image(seed)?;
        if img.letters().first() != Some(&seed) {
            return Err(Error::NotProlongable(seed));
        }
        Ok(())
    }

    /// All length-`len` factors of `h^ω(seed)`, with the iterate at which
    /// the factor set stabilized.
    ///
    /// Iterates `h^n(seed)` until the factor set is unchanged for one
    /// step while the word is still growing, then confirms with one more
    /// application.  Fails with `NonStabilizing` at the iteration cap,
    /// which also covers non-growing morphisms whose fixed point is
    /// finite.
    pub fn factors_of_fixed_point(&self, seed: Letter, len: usize, cap: u32) -> Result<FactorSet> {
        if len == 0 {
            return Err(Error::Domain("factor length must be >= 1".into()));
        }
        self.check_prolongable(seed)?;
        let mut word = Word::new(vec![seed]);
        let mut prev = factor_set(&word, len);
        for n in 0..cap {
            let next_word = self.apply(&word)?;
            let grew = next_word.len() > word.len();
            let next = factor_set(&next_word, len);
            if grew && next == prev && !next.is_empty() {
                // confirm stability with one further application
                let confirm_word = self.apply(&next_word)?;
                let confirm = factor_set(&confirm_word, len);
                if confirm == next {
                    return Ok(FactorSet {
                        factors: next,
                        len,
                        stabilized_at: n,
                    });
                }
                prev = confirm;
                word = confirm_word;
                continue;
            }
            prev = next;
            word = next_word;
        }
        Err(Error::NonStabilizing { cap })
    }

    /// Frequency of `target` in `h^ω(seed)` via the Perron eigenvector
    /// of the incidence matrix.  Requires a primitive incidence matrix.
    pub fn letter_frequency(&self, seed: Letter, target: Letter, tol: f64) -> Result<f64> {
        self.check_prolongable(seed)?;
        if !self.alphabet.contains(&target) {
            return Err(Error::LetterOutsideDomain(target));
        }
        let letters: Vec<Letter> = self.alphabet.iter().copied().collect();
        let n = letters.len();
        let idx: BTreeMap<Letter, usize> =
            letters.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        // incidence[i][j] = occurrences of letters[i] in h(letters[j])
        let mut incidence = vec![vec![0u64; n]; n];
        for (j, &b) in letters.iter().enumerate() {
            for &c in self.images[&b].letters() {
                incidence[idx[&c]][j] += 1;
            }
        }
        if !is_primitive(&incidence) {
            return Err(Error::NotPrimitive);
        }
        let freqs = perron_frequencies(&incidence, tol);
        Ok(freqs[idx[&target]])
    }

    /// `0->001 1->012 2->212` style rule list.
    pub fn format_rules(&self) -> String {
        self.images
            .iter()
            .map(|(a, w)| {
                if *a < 10 {
                    format!("{a}->{w}")
                } else {
                    format!("({a})->{w}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for LinearMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_rules())
    }
}

impl FromStr for LinearMorphism {
    type Err = Error;

    /// Parses whitespace-separated rules `x->w` with digit letters.
    fn from_str(s: &str) -> Result<Self> {
        let mut images = BTreeMap::new();
        for rule in s.split_whitespace() {
            let (lhs, rhs) = rule
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("rule '{rule}' lacks '->'")))?;
            let lhs_word: Word = lhs.parse()?;
            if lhs_word.len() != 1 {
                return Err(Error::Parse(format!(
                    "rule '{rule}' left side must be a single letter"
                )));
            }
            let letter = lhs_word.letters()[0];
            let image: Word = rhs.parse()?;
            if images.insert(letter, image).is_some() {
                return Err(Error::Parse(format!("duplicate rule for letter {letter}")));
            }
        }
        LinearMorphism::new(images)
    }
}

/// The set of all length-`len` factors of a morphic fixed point, plus
/// the iterate certifying saturation.
#[derive(Clone, Debug)]
pub struct FactorSet {
    pub factors: BTreeSet<Word>,
    pub len: usize,
    /// `h^n(seed)` already contained every factor in the set.
    pub stabilized_at: u32,
}

pub(crate) fn factor_set(w: &Word, len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    if w.len() >= len {
        for i in 0..=w.len() - len {
            out.insert(w.factor(i, i + len));
        }
    }
    out
}

/// Some power of the matrix is entrywise positive.  The exponent bound
/// n² − 2n + 2 is the classical primitivity bound.
fn is_primitive(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    let bound = n * n - 2 * n + 2;
    // boolean matrix powers
    let mut p: Vec<Vec<bool>> = m
        .iter()
        .map(|row| row.iter().map(|&x| x > 0).collect())
        .collect();
    let base = p.clone();
    for _ in 0..bound.max(1) {
        if p.iter().all(|row| row.iter().all(|&x| x)) {
            return true;
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] {
                    for j in 0..n {
                        if base[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        p = next;
    }
    p.iter().all(|row| row.iter().all(|&x| x))
}

/// Normalized Perron eigenvector.  Closed form for 2×2, power iteration
/// otherwise.
fn perron_frequencies(m: &[Vec<u64>], tol: f64) -> Vec<f64> {
    let n = m.len();
    if n == 1 {
        return vec![1.0];
    }
    if n == 2 {
        // characteristic polynomial λ² − Tλ + D, Perron root is the
        // larger one
        let (a, b, c, d) = (
            m[0][0] as f64,
            m[0][1] as f64,
            m[1][0] as f64,
            m[1][1] as f64,
        );
        let t = a + d;
        let det = a * d - b * c;
        let lambda = (t + (t * t - 4.0 * det).sqrt()) / 2.0;
        // (a - λ)x + b y = 0
        let (x, y) = if b.abs() > 0.0 {
            (b, lambda - a)
        } else {
            (lambda - d, c)
        };
        let s = x + y;
        return vec![x / s, y / s];
    }
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += m[i][j] as f64 * v[j];
            }
        }
        let s: f64 = next.iter().sum();
        for x in &mut next {
            *x /= s;
        }
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff < tol {
            break;
        }
    }
    v
}

#[cfg(test)]
pub(crate) use tests::{flagship_f, flagship_g};
