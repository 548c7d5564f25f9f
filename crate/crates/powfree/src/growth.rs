//! Counting lower bounds via multi-valued substitutions.
//!
//! A letter-wise uniform substitution maps each letter to a finite set
//! of equal-length words; applied to an abelian-4-power-free word with
//! letter frequency α it yields Ω(βⁿ) power-free words of length n for
//! an explicitly computable β.  Composing the base substitutions keeps
//! the statistics computable in closed form, so long compositions can
//! be ranked without ever materializing their image sets.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{find_abelian_k_power, PowerReport};
use crate::error::{Error, Result};
use crate::words::{Letter, Word};

/// An exact non-negative integer kept in factored form `Π base^exp`.
///
/// Image-set cardinalities of composed substitutions grow far beyond
/// what positional representations can hold, but they are always
/// products of small base counts, so the factored form stays tiny while
/// remaining exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactoredCount(BTreeMap<u64, u128>);

impl FactoredCount {
    pub fn one() -> Self {
        FactoredCount(BTreeMap::new())
    }

    /// Canonical form via trial-division factoring; counts are tiny.
    pub fn from_u64(mut v: u64) -> Result<Self> {
        if v == 0 {
            return Err(Error::Domain("count must be positive".into()));
        }
        let mut map = BTreeMap::new();
        let mut p = 2u64;
        while p * p <= v {
            while v.is_multiple_of(p) {
                *map.entry(p).or_insert(0u128) += 1;
                v /= p;
            }
            p += 1;
        }
        if v > 1 {
            *map.entry(v).or_insert(0u128) += 1;
        }
        Ok(FactoredCount(map))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul_assign(&mut self, other: &FactoredCount) {
        for (&b, &e) in &other.0 {
            *self.0.entry(b).or_insert(0) += e;
        }
    }

    pub fn pow(&self, e: u128) -> FactoredCount {
        if e == 0 {
            return FactoredCount::one();
        }
        FactoredCount(self.0.iter().map(|(&b, &x)| (b, x * e)).collect())
    }

    pub fn ln(&self) -> f64 {
        // fold from +0.0: an empty iterator's sum() is -0.0
        self.0
            .iter()
            .fold(0.0, |acc, (&b, &e)| acc + e as f64 * (b as f64).ln())
    }

    pub fn log10(&self) -> f64 {
        self.0
            .iter()
            .fold(0.0, |acc, (&b, &e)| acc + e as f64 * (b as f64).log10())
    }

    /// Exact expansion; `None` when the value has more than `max_bits`
    /// bits.
    pub fn to_biguint(&self, max_bits: u64) -> Option<BigUint> {
        let bits: f64 = self
            .0
            .iter()
            .map(|(&b, &e)| e as f64 * (b as f64).log2())
            .sum();
        if bits > max_bits as f64 {
            return None;
        }
        let mut out = BigUint::one();
        for (&b, &e) in &self.0 {
            out *= BigUint::from(b).pow(e as u32);
        }
        Some(out)
    }
}

/// A multi-valued substitution on {0,1} whose image sets are letter-wise
/// uniform in both length and Parikh vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSubstitution {
    images: [Vec<Word>; 2],
}

impl MultiSubstitution {
    /// Verifies at construction that, per letter, all images share one
    /// length and one Parikh vector, and that images are binary.
    pub fn new(images_0: Vec<Word>, images_1: Vec<Word>) -> Result<Self> {
        let images = [images_0, images_1];
        for (a, set) in images.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Domain(format!("letter {a} has no images")));
            }
            let ones = |w: &Word| w.letters().iter().filter(|&&c| c == 1).count();
            let len0 = set[0].len();
            let ones0 = ones(&set[0]);
            for w in set {
                if w.letters().iter().any(|&c| c > 1) {
                    return Err(Error::Domain("images must be binary".into()));
                }
                if w.len() != len0 {
                    return Err(Error::Domain(format!(
                        "letter {a} images are not letter-wise uniform"
                    )));
                }
                if ones(w) != ones0 {
                    return Err(Error::ParikhClassViolation(a as Letter));
                }
            }
            let mut dedup = set.clone();
            dedup.sort();
            dedup.dedup();
            if dedup.len() != set.len() {
                return Err(Error::Domain(format!("letter {a} has duplicate images")));
            }
        }
        Ok(MultiSubstitution { images })
    }

    pub fn identity() -> Self {
        MultiSubstitution::new(vec!["0".parse().unwrap()], vec!["1".parse().unwrap()])
            .expect("identity is uniform")
    }

    pub fn images(&self, a: Letter) -> &[Word] {
        &self.images[a as usize]
    }

    pub fn stats(&self) -> SubstStats {
        let mut ell = [0u128; 2];
        let mut parikh = [[0u128; 2]; 2];
        let mut m = [FactoredCount::one(), FactoredCount::one()];
        for a in 0..2usize {
            let set = &self.images[a];
            ell[a] = set[0].len() as u128;
            let ones = set[0].letters().iter().filter(|&&c| c == 1).count() as u128;
            parikh[a] = [ell[a] - ones, ones];
            m[a] = FactoredCount::from_u64(set.len() as u64).expect("non-empty image set");
        }
        SubstStats { ell, parikh, m }
    }

    /// One uniformly random element of θ(w).
    pub fn apply_sampled<R: Rng>(&self, w: &Word, rng: &mut R) -> Word {
        let mut out = Word::empty();
        for &a in w.letters() {
            let set = &self.images[a as usize];
            out = out.concat(&set[rng.gen_range(0..set.len())]);
        }
        out
    }

    /// The full image set θ(w); only viable for short inputs.
    pub fn apply_all(&self, w: &Word) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for &a in w.letters() {
            let mut next = Vec::new();
            for prefix in &out {
                for img in &self.images[a as usize] {
                    next.push(prefix.concat(img));
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        out
    }
}

/// The four base substitutions: θ₀ maps 0 to one word and 1 to a pair,
/// θ₂ is the variant with the other image shapes, and θ₁, θ₃ swap the
/// images of 0 and 1.
pub fn base_substitutions() -> [MultiSubstitution; 4] {
    let theta0 = MultiSubstitution::new(
        vec!["0001".parse().unwrap()],
        vec!["011".parse().unwrap(), "101".parse().unwrap()],
    )
    .expect("theta_0 is uniform");
    let theta1 = MultiSubstitution::new(
        vec!["011".parse().unwrap(), "101".parse().unwrap()],
        vec!["0001".parse().unwrap()],
    )
    .expect("theta_1 is uniform");
    let theta2 = MultiSubstitution::new(
        vec!["0111".parse().unwrap()],
        vec!["001".parse().unwrap(), "010".parse().unwrap()],
    )
    .expect("theta_2 is uniform");
    let theta3 = MultiSubstitution::new(
        vec!["001".parse().unwrap(), "010".parse().unwrap()],
        vec!["0111".parse().unwrap()],
    )
    .expect("theta_3 is uniform");
    [theta0, theta1, theta2, theta3]
}

/// Closed-form statistics of a letter-wise uniform substitution: image
/// length, image Parikh vector, and image-set cardinality per letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstStats {
    pub ell: [u128; 2],
    /// `parikh[a] = [zeros, ones]` of every image of `a`.
    pub parikh: [[u128; 2]; 2],
    pub m: [FactoredCount; 2],
}

impl SubstStats {
    pub fn identity() -> Self {
        MultiSubstitution::identity().stats()
    }
}

/// Statistics of `outer ∘ inner` computed arithmetically: lengths and
/// Parikh vectors compose linearly and cardinalities multiply with
/// Parikh-count exponents, so no word set is ever enumerated.
pub fn compose_stats(inner: &SubstStats, outer: &SubstStats) -> SubstStats {
    let mut ell = [0u128; 2];
    let mut parikh = [[0u128; 2]; 2];
    let mut m = [FactoredCount::one(), FactoredCount::one()];
    for a in 0..2usize {
        for c in 0..2usize {
            let count = inner.parikh[a][c];
            ell[a] += count * outer.ell[c];
            for (entry, &o) in parikh[a].iter_mut().zip(&outer.parikh[c]) {
                *entry += count * o;
            }
        }
        m[a] = inner.m[a].clone();
        for c in 0..2usize {
            m[a].mul_assign(&outer.m[c].pow(inner.parikh[a][c]));
        }
    }
    SubstStats { ell, parikh, m }
}

/// β = (m₀^{α−ε} m₁^{1−α−ε})^{1/((α+ε)ℓ₀+(1−α+ε)ℓ₁)}, evaluated in log
/// space so astronomically large cardinalities never materialize.
pub fn beta(stats: &SubstStats, alpha: f64, eps: f64) -> Result<f64> {
    if !(0.0 < eps && eps < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < eps < alpha < 1, got alpha={alpha}, eps={eps}"
        )));
    }
    let num = (alpha - eps) * stats.m[0].ln() + (1.0 - alpha - eps) * stats.m[1].ln();
    let den = (alpha + eps) * stats.ell[0] as f64 + (1.0 - alpha + eps) * stats.ell[1] as f64;
    Ok((num / den).exp())
}

/// One ranked composition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthResult {
    /// Composition word over the base indices, applied left to right.
    pub x: String,
    pub ell0: u128,
    pub ell1: u128,
    pub log10_m0: f64,
    pub log10_m1: f64,
    pub beta: f64,
}

impl GrowthResult {
    /// β truncated (not rounded) after 8 decimal places.
    pub fn beta_truncated(&self) -> String {
        truncate_8(self.beta)
    }
}

pub fn truncate_8(x: f64) -> String {
    let scaled = (x * 1e8).floor() as i64;
    format!("{}.{:08}", scaled / 100_000_000, scaled % 100_000_000)
}

/// Evaluates β for every length-k composition word over the given base
/// substitutions and returns the results sorted by decreasing β, ties
/// broken by lexicographically smallest x.
pub fn best_composition(
    k: usize,
    bases: &[MultiSubstitution],
    alpha: f64,
    eps: f64,
) -> Result<Vec<GrowthResult>> {
    if k < 1 {
        return Err(Error::Domain("composition length must be >= 1".into()));
    }
    if k > 20 {
        return Err(Error::Domain(format!(
            "composition length {k} exceeds the cap of 20"
        )));
    }
    if bases.is_empty() || bases.len() > 10 {
        return Err(Error::Domain(
            "need between 1 and 10 base substitutions".into(),
        ));
    }
    // validate the parameters once up front
    beta(&SubstStats::identity(), alpha, eps)?;
    let base_stats: Vec<SubstStats> = bases.iter().map(MultiSubstitution::stats).collect();
    let total = (bases.len() as u64).pow(k as u32);
    let mut results: Vec<GrowthResult> = (0..total)
        .into_par_iter()
        .map(|code| {
            // digits of `code` in base `bases.len()`, most significant
            // first, form the composition word x; x_1 applies first
            let mut digits = Vec::with_capacity(k);
            let mut c = code;
            for _ in 0..k {
                digits.push((c % bases.len() as u64) as usize);
                c /= bases.len() as u64;
            }
            digits.reverse();
            let mut stats = SubstStats::identity();
            for &d in &digits {
                stats = compose_stats(&stats, &base_stats[d]);
            }
            let b = beta(&stats, alpha, eps).expect("parameters validated");
            GrowthResult {
                x: digits.iter().map(|d| d.to_string()).collect(),
                ell0: stats.ell[0],
                ell1: stats.ell[1],
                log10_m0: stats.m[0].log10(),
                log10_m1: stats.m[1].log10(),
                beta: b,
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.beta
            .partial_cmp(&a.beta)
            .expect("beta is finite")
            .then_with(|| a.x.cmp(&b.x))
    });
    Ok(results)
}

/// Outcome of spot-checking a composition on prefixes of an avoiding
/// word.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub counterexample: Option<(String, PowerReport)>,
}

/// Draws random elements of the composed image of `base_word` and
/// checks each for abelian 4-powers.  A spot check, not a proof.
pub fn sample_and_verify<R: Rng>(
    composition: &[MultiSubstitution],
    base_word: &Word,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    for _ in 0..trials.max(1) {
        let mut word = base_word.clone();
        for sub in composition {
            word = sub.apply_sampled(&word, rng);
        }
        if let Some(report) = find_abelian_k_power(&word, 4)? {
            return Ok(VerificationReport {
                trials,
                counterexample: Some((word.to_string(), report)),
            });
        }
    }
    Ok(VerificationReport {
        trials,
        counterexample: None,
    })
}
