//! Words over integer alphabets and their additive statistics.
//!
//! A [`Word`] is a finite sequence of small non-negative integers.  The
//! additive analogue of the Parikh vector is the [`SigmaVector`]
//! `[length, letter-sum]`; it turns concatenation into vector addition,
//! which is what makes the whole template machinery linear-algebraic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A letter of an integer alphabet.  Letters are small non-negative
/// integers; words print and parse as digit strings.
pub type Letter = u8;

/// A finite word over an integer alphabet.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn push(&mut self, a: Letter) {
        self.0.push(a);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The factor `self[start..end)`.
    pub fn factor(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    /// σ(w) = [|w|, S(w)].
    pub fn sigma(&self) -> SigmaVector {
        SigmaVector {
            len: self.0.len() as i64,
            sum: self.0.iter().map(|&a| a as i64).sum(),
        }
    }

    pub fn parikh(&self) -> ParikhVector {
        let mut counts = BTreeMap::new();
        for &a in &self.0 {
            *counts.entry(a).or_insert(0usize) += 1;
        }
        ParikhVector { counts }
    }

    /// Prefix sums of letter values; `out[i]` is the sum of the first `i`
    /// letters.  Shared by the additive-power detectors.
    pub fn prefix_sums(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut acc = 0i64;
        out.push(0);
        for &a in &self.0 {
            acc += a as i64;
            out.push(acc);
        }
        out
    }

    /// Flip 0 and 1; only meaningful for binary words.
    pub fn binary_complement(&self) -> Word {
        Word(self.0.iter().map(|&a| 1 - a).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &a in &self.0 {
            if a < 10 {
                write!(f, "{a}")?;
            } else {
                write!(f, "({a})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses a digit string; letters ≥ 10 are written `(nn)`.
    fn from_str(s: &str) -> Result<Word> {
        let mut letters = Vec::with_capacity(s.len());
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '0'..='9' => letters.push(c as u8 - b'0'),
                '(' => {
                    let mut num = String::new();
                    for d in chars.by_ref() {
                        if d == ')' {
                            break;
                        }
                        num.push(d);
                    }
                    let v: u8 = num
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad letter '({num})'")))?;
                    letters.push(v);
                }
                _ => return Err(Error::Parse(format!("unexpected character '{c}' in word"))),
            }
        }
        Ok(Word(letters))
    }
}

impl From<&[Letter]> for Word {
    fn from(s: &[Letter]) -> Self {
        Word(s.to_vec())
    }
}

/// The pair σ(w) = [|w|, S(w)]; a monoid morphism from words under
/// concatenation to Z² under addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SigmaVector {
    pub len: i64,
    pub sum: i64,
}

impl SigmaVector {
    pub const ZERO: SigmaVector = SigmaVector { len: 0, sum: 0 };

    pub fn new(len: i64, sum: i64) -> Self {
        SigmaVector { len, sum }
    }
}

impl Add for SigmaVector {
    type Output = SigmaVector;
    fn add(self, rhs: SigmaVector) -> SigmaVector {
        SigmaVector {
            len: self.len + rhs.len,
            sum: self.sum + rhs.sum,
        }
    }
}

impl Sub for SigmaVector {
    type Output = SigmaVector;
    fn sub(self, rhs: SigmaVector) -> SigmaVector {
        SigmaVector {
            len: self.len - rhs.len,
            sum: self.sum - rhs.sum,
        }
    }
}

/// Letter-occurrence counts of a word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParikhVector {
    pub counts: BTreeMap<Letter, usize>,
}

impl ParikhVector {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// A 2×2 integer matrix, as attached to a linear morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat2(pub [[i64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1, 0], [0, 1]]);

    pub fn det(&self) -> i64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> i64 {
        self.0[0][0] + self.0[1][1]
    }

    /// adj(M), with M·adj(M) = det(M)·I.
    pub fn adjugate(&self) -> Mat2 {
        Mat2([[self.0[1][1], -self.0[0][1]], [-self.0[1][0], self.0[0][0]]])
    }

    pub fn mul_sigma(&self, v: SigmaVector) -> SigmaVector {
        SigmaVector {
            len: self.0[0][0] * v.len + self.0[0][1] * v.sum,
            sum: self.0[1][0] * v.len + self.0[1][1] * v.sum,
        }
    }

    pub fn mul_vec(&self, v: [i64; 2]) -> [i64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    /// Exact test that both eigenvalues have absolute value > 1.
    ///
    /// The characteristic polynomial is λ² − T·λ + D with T = trace and
    /// D = det.  Both roots lie strictly outside the unit disk iff the
    /// reciprocal polynomial has both roots strictly inside it, which the
    /// Jury conditions decide in integer arithmetic: |D| > 1,
    /// D − T + 1 and D + T + 1 both of the sign of D, strictly.
    pub fn eigenvalues_exceed_one(&self) -> bool {
        let t = self.trace();
        let d = self.det();
        if d.abs() <= 1 {
            return false;
        }
        // p(1) = 1 - T + D and p(-1) = 1 + T + D, scaled to monic
        // reciprocal coefficients: require (D - T + 1)/D > 0 and
        // (D + T + 1)/D > 0.
        let s = d.signum();
        s * (d - t + 1) > 0 && s * (d + t + 1) > 0
    }
}
