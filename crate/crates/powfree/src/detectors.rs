//! Brute-force power detectors and bounded scans.
//!
//! Everything here works by direct enumeration over prefix sums: an
//! additive k-power is k consecutive non-empty blocks of equal length
//! and equal letter sum, an abelian k-power replaces the sum condition
//! by Parikh equality, and ordinary powers are periodicity runs.
//! Witnesses are tie-broken leftmost first, then by smallest block
//! length or period, so goldens are deterministic.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphism::LinearMorphism;
use crate::words::{Letter, Word};

/// What kind of repetition a witness is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerKind {
    Abelian,
    Additive,
    Ordinary,
}

/// A located repetition, re-checkable from its coordinates alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerReport {
    pub kind: PowerKind,
    /// k for abelian/additive powers, n/p for ordinary ones.
    pub exponent_num: i64,
    pub exponent_den: i64,
    /// Start index of the occurrence.
    pub start: usize,
    /// Block length for abelian/additive powers, period for ordinary.
    pub period: usize,
}

impl PowerReport {
    pub fn exponent(&self) -> Ratio<i64> {
        Ratio::new(self.exponent_num, self.exponent_den)
    }
}

/// Leftmost-shortest occurrence of k consecutive equal-length blocks
/// with equal letter sums, or `None`.
pub fn find_additive_k_power(w: &Word, k: usize) -> Result<Option<PowerReport>> {
    find_additive_k_power_bounded(w, k, w.len())
}

/// Same scan restricted to block lengths `<= max_block`.
pub fn find_additive_k_power_bounded(
    w: &Word,
    k: usize,
    max_block: usize,
) -> Result<Option<PowerReport>> {
    if k < 2 {
        return Err(Error::BadPowerOrder(k));
    }
    let n = w.len();
    let sums = w.prefix_sums();
    for start in 0..n {
        let avail = (n - start) / k;
        for block in 1..=avail.min(max_block) {
            let first = sums[start + block] - sums[start];
            let mut ok = true;
            for j in 1..k {
                let lo = start + j * block;
                if sums[lo + block] - sums[lo] != first {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(PowerReport {
                    kind: PowerKind::Additive,
                    exponent_num: k as i64,
                    exponent_den: 1,
                    start,
                    period: block,
                }));
            }
        }
    }
    Ok(None)
}

/// Leftmost-shortest occurrence of k consecutive abelian-equivalent
/// non-empty blocks, or `None`.
pub fn find_abelian_k_power(w: &Word, k: usize) -> Result<Option<PowerReport>> {
    if k < 2 {
        return Err(Error::BadPowerOrder(k));
    }
    let n = w.len();
    // per-letter prefix counts over the letters that actually occur
    let mut letters: Vec<Letter> = w.letters().to_vec();
    letters.sort_unstable();
    letters.dedup();
    let mut counts: Vec<Vec<u32>> = vec![vec![0; n + 1]; letters.len()];
    for (i, &a) in w.letters().iter().enumerate() {
        let li = letters.binary_search(&a).unwrap();
        for (l, row) in counts.iter_mut().enumerate() {
            row[i + 1] = row[i] + u32::from(l == li);
        }
    }
    for start in 0..n {
        let avail = (n - start) / k;
        'blocks: for block in 1..=avail {
            for row in &counts {
                let first = row[start + block] - row[start];
                for j in 1..k {
                    let lo = start + j * block;
                    if row[lo + block] - row[lo] != first {
                        continue 'blocks;
                    }
                }
            }
            return Ok(Some(PowerReport {
                kind: PowerKind::Abelian,
                exponent_num: k as i64,
                exponent_den: 1,
                start,
                period: block,
            }));
        }
    }
    Ok(None)
}

/// Leftmost occurrence of a factor of exponent >= k, or `None`.
///
/// Scans every period; a factor of exponent >= k has its smallest
/// period among them, so the scan is complete.
pub fn has_k_power_ordinary(w: &Word, k: usize) -> Result<Option<PowerReport>> {
    if k < 2 {
        return Err(Error::BadPowerOrder(k));
    }
    let n = w.len();
    let letters = w.letters();
    let mut best: Option<PowerReport> = None;
    for p in 1..=n / k {
        let need = (k - 1) * p; // matching run long enough for exponent k
        let mut run = 0usize;
        for i in 0..n - p {
            if letters[i] == letters[i + p] {
                run += 1;
                if run >= need {
                    let start = i + 1 - run;
                    let better = match &best {
                        None => true,
                        Some(b) => start < b.start || (start == b.start && p < b.period),
                    };
                    if better {
                        best = Some(PowerReport {
                            kind: PowerKind::Ordinary,
                            exponent_num: k as i64,
                            exponent_den: 1,
                            start,
                            period: p,
                        });
                    }
                    break; // earliest start for this period found
                }
            } else {
                run = 0;
            }
        }
    }
    Ok(best)
}

/// Maximum exponent n/p over all factors of `w` with period `p <=
/// max_period`, with a witness.
pub fn max_exponent_up_to(w: &Word, max_period: usize) -> Result<(Ratio<i64>, PowerReport)> {
    if max_period < 1 {
        return Err(Error::Domain("max_period must be >= 1".into()));
    }
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let n = w.len();
    let letters = w.letters();
    let mut best = Ratio::new(1, 1);
    let mut witness = PowerReport {
        kind: PowerKind::Ordinary,
        exponent_num: 1,
        exponent_den: 1,
        start: 0,
        period: 1,
    };
    for p in 1..=max_period.min(n - 1) {
        // maximal runs of positions with letters[i] == letters[i+p]; a
        // run of length r yields a factor of length r + p and period p
        let mut run_start = 0usize;
        let mut i = 0usize;
        while i < n - p {
            if letters[i] == letters[i + p] {
                i += 1;
                continue;
            }
            let run = i - run_start;
            let e = Ratio::new((run + p) as i64, p as i64);
            if e > best {
                best = e;
                witness = PowerReport {
                    kind: PowerKind::Ordinary,
                    exponent_num: (run + p) as i64,
                    exponent_den: p as i64,
                    start: run_start,
                    period: p,
                };
            }
            i += 1;
            run_start = i;
        }
        let run = n - p - run_start;
        let e = Ratio::new((run + p) as i64, p as i64);
        if e > best {
            best = e;
            witness = PowerReport {
                kind: PowerKind::Ordinary,
                exponent_num: (run + p) as i64,
                exponent_den: p as i64,
                start: run_start,
                period: p,
            };
        }
    }
    Ok((best, witness))
}

/// Exhaustive DFS over binary words that avoid both abelian
/// `k_abelian`-powers and ordinary `k_ordinary`-powers; extends with 0
/// before 1.  Returns the maximum reachable length and every avoiding
/// word of that length.
pub fn search_longest_avoiding(
    k_abelian: usize,
    k_ordinary: usize,
    node_cap: u64,
) -> Result<(usize, Vec<Word>)> {
    if k_abelian < 2 || k_ordinary < 2 {
        return Err(Error::BadPowerOrder(k_abelian.min(k_ordinary)));
    }
    let mut visited = 0u64;
    let mut best_len = 0usize;
    let mut best: Vec<Word> = vec![Word::empty()];
    let mut stack: Vec<Letter> = Vec::new();
    let mut ones_prefix: Vec<u32> = vec![0]; // ones count prefix sums

    fn suffix_clean(word: &[Letter], ones: &[u32], k_ab: usize, k_ord: usize) -> bool {
        let n = word.len();
        // abelian k_ab-power ending at n: binary, so Parikh equality is
        // equal ones counts over equal-length blocks
        for block in 1..=n / k_ab {
            let base = n - k_ab * block;
            let first = ones[base + block] - ones[base];
            let mut ok = true;
            for j in 1..k_ab {
                let lo = base + j * block;
                if ones[lo + block] - ones[lo] != first {
                    ok = false;
                    break;
                }
            }
            if ok {
                return false;
            }
        }
        // ordinary k_ord-power ending at n
        for p in 1..=n / k_ord {
            let base = n - (k_ord - 1) * p;
            if (base - p..n - p).all(|i| word[i] == word[i + p]) {
                return false;
            }
        }
        true
    }

    // iterative DFS with explicit extension letters
    let mut pending: Vec<(usize, Letter)> = vec![(0, 0), (0, 1)];
    while let Some((depth, letter)) = pending.pop() {
        while stack.len() > depth {
            stack.pop();
            ones_prefix.pop();
        }
        visited += 1;
        if visited > node_cap {
            return Err(Error::SearchBudgetExceeded { cap: node_cap });
        }
        stack.push(letter);
        ones_prefix.push(ones_prefix[stack.len() - 1] + u32::from(letter == 1));
        if !suffix_clean(&stack, &ones_prefix, k_abelian, k_ordinary) {
            stack.pop();
            ones_prefix.pop();
            continue;
        }
        let n = stack.len();
        if n > best_len {
            best_len = n;
            best.clear();
        }
        if n == best_len {
            best.push(Word::new(stack.clone()));
        }
        // push 1 first so 0 is explored first
        pending.push((n, 1));
        pending.push((n, 0));
    }
    best.sort();
    Ok((best_len, best))
}

/// A machine-checkable record of a bounded scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanCertificate {
    pub word_source: String,
    pub property: String,
    pub bound: usize,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PowerReport>,
    pub parameters: serde_json::Value,
}

impl ScanCertificate {
    pub fn is_clean(&self) -> bool {
        self.verdict == "clean"
    }
}

/// Certifies that every factor of `h_outer(h_inner^ω(seed))` of length
/// `< length_bound` avoids additive k-powers.
///
/// Enumerates a saturated set of inner factors whose outer images cover
/// every window of length `length_bound - 1`, then scans each image for
/// powers short enough to fit in such a window.
pub fn scan_morphic_prefix(
    h_outer: &LinearMorphism,
    h_inner: &LinearMorphism,
    seed: Letter,
    k: usize,
    length_bound: usize,
    factor_cap: u32,
) -> Result<ScanCertificate> {
    if k < 2 {
        return Err(Error::BadPowerOrder(k));
    }
    if length_bound < 2 {
        return Err(Error::Domain("length_bound must be >= 2".into()));
    }
    let min_img = h_outer.min_image_len();
    if min_img == 0 {
        return Err(Error::Domain("outer morphism has an empty image".into()));
    }
    // a window of length_bound - 1 output letters touches at most
    // ceil((length_bound - 1) / min_img) + 1 consecutive inner letters
    let span = (length_bound - 2) / min_img + 2;
    let factors = h_inner.factors_of_fixed_point(seed, span, factor_cap)?;
    let max_block = (length_bound - 1) / k;
    let params = serde_json::json!({
        "k": k,
        "inner_factor_len": span,
        "stabilized_at": factors.stabilized_at,
        "max_block": max_block,
    });
    let source = format!(
        "outer({}) of fixed point of inner({}) from seed {}",
        h_outer.format_rules(),
        h_inner.format_rules(),
        seed
    );
    for v in &factors.factors {
        let image = h_outer.apply(v)?;
        if let Some(report) = find_additive_k_power_bounded(&image, k, max_block)? {
            return Ok(ScanCertificate {
                word_source: source,
                property: format!("no additive {k}-power of length < {length_bound}"),
                bound: length_bound,
                verdict: "witness".into(),
                witness: Some(report),
                parameters: params,
            });
        }
    }
    Ok(ScanCertificate {
        word_source: source,
        property: format!("no additive {k}-power of length < {length_bound}"),
        bound: length_bound,
        verdict: "clean".into(),
        witness: None,
        parameters: params,
    })
}

/// count(letter)/|w| as an exact rational.
pub fn empirical_frequency(w: &Word, letter: Letter) -> Result<Ratio<i64>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let count = w.letters().iter().filter(|&&a| a == letter).count();
    Ok(Ratio::new(count as i64, w.len() as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::{flagship_f, flagship_g};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Independent oracle: re-sums every block of every candidate
    /// factorization from scratch.
    pub(crate) fn naive_additive(word: &Word, k: usize) -> Option<(usize, usize)> {
        let n = word.len();
        for start in 0..n {
            for block in 1..=(n - start) / k {
                let sum_of = |j: usize| -> i64 {
                    word.letters()[start + j * block..start + (j + 1) * block]
                        .iter()
                        .map(|&a| a as i64)
                        .sum()
                };
                if (1..k).all(|j| sum_of(j) == sum_of(0)) {
                    return Some((start, block));
                }
            }
        }
        None
    }

    #[test]
    fn additive_trivial_cases() {
        let r = find_additive_k_power(&w("0101"), 2).unwrap().unwrap();
        assert_eq!((r.start, r.period), (0, 2));
        assert!(find_additive_k_power(&w("0121"), 2).unwrap().is_none());
        assert_eq!(
            find_additive_k_power(&w("01"), 1).unwrap_err(),
            Error::BadPowerOrder(1)
        );
    }

    #[test]
    fn abelian_trivial_cases() {
        let r = find_abelian_k_power(&w("0110"), 2).unwrap().unwrap();
        assert_eq!((r.start, r.period), (0, 2));
        assert!(find_abelian_k_power(&w("0121"), 2).unwrap().is_none());
    }

    /// The longest binary word avoiding abelian 4-powers and cubes.
    pub(crate) const LENGTH_39: &str = "001101011011001001101100100110110101100";

    #[test]
    fn length_39_word_is_clean() {
        let word = w(LENGTH_39);
        assert_eq!(word.len(), 39);
        assert!(find_abelian_k_power(&word, 4).unwrap().is_none());
        assert!(has_k_power_ordinary(&word, 3).unwrap().is_none());
    }

    #[test]
    fn ordinary_power_cases() {
        assert!(has_k_power_ordinary(&w("010010"), 3).unwrap().is_none());
        let r = has_k_power_ordinary(&w("111"), 3).unwrap().unwrap();
        assert_eq!((r.start, r.period), (0, 1));
    }

    #[test]
    fn max_exponent_cases() {
        let (e, wit) = max_exponent_up_to(&w("000"), 3).unwrap();
        assert_eq!(e, Ratio::new(3, 1));
        assert_eq!(wit.period, 1);
        let (e, _) = max_exponent_up_to(&w("0101"), 4).unwrap();
        assert_eq!(e, Ratio::new(2, 1));
    }

    #[test]
    fn max_exponent_relabel_invariant() {
        let a = w("0102010012210");
        let b = Word::new(a.letters().iter().map(|&x| [2, 0, 1][x as usize]).collect());
        let (ea, _) = max_exponent_up_to(&a, 6).unwrap();
        let (eb, _) = max_exponent_up_to(&b, 6).unwrap();
        assert_eq!(ea, eb);
    }

    #[test]
    fn additive_agrees_with_naive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let n = rng.gen_range(0..=60);
            let word = Word::new((0..n).map(|_| rng.gen_range(0..3u8)).collect());
            for k in [2, 3, 4] {
                let fast = find_additive_k_power(&word, k)
                    .unwrap()
                    .map(|r| (r.start, r.period));
                assert_eq!(fast, naive_additive(&word, k), "word {word} k {k}");
            }
        }
    }

    #[test]
    fn binary_abelian_additive_agree_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2_000 {
            let n = rng.gen_range(0..=80);
            let word = Word::new((0..n).map(|_| rng.gen_range(0..2u8)).collect());
            for k in [2, 3, 4] {
                assert_eq!(
                    find_abelian_k_power(&word, k).unwrap().is_some(),
                    find_additive_k_power(&word, k).unwrap().is_some()
                );
            }
        }
    }

    #[test]
    fn factor_monotonicity_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 50 {
            let n = rng.gen_range(8..=24);
            let word = Word::new((0..n).map(|_| rng.gen_range(0..2u8)).collect());
            if find_abelian_k_power(&word, 3).unwrap().is_some() {
                continue;
            }
            checked += 1;
            for i in 0..word.len() {
                for j in i..=word.len() {
                    assert!(find_abelian_k_power(&word.factor(i, j), 3)
                        .unwrap()
                        .is_none());
                }
            }
        }
    }

    #[test]
    fn search_small_case() {
        let (len, words) = search_longest_avoiding(2, 2, 1_000_000).unwrap();
        // abelian squares and ordinary squares over {0,1}: the longest
        // avoiding words are the length-3 square-free-ish words; fixed by
        // exhaustive enumeration below
        let mut expect: Vec<Word> = Vec::new();
        for n in (0..=8usize).rev() {
            for bits in 0..1u32 << n {
                let word = Word::new((0..n).map(|i| ((bits >> i) & 1) as u8).collect());
                if find_abelian_k_power(&word, 2).unwrap().is_none()
                    && has_k_power_ordinary(&word, 2).unwrap().is_none()
                {
                    expect.push(word);
                }
            }
            if !expect.is_empty() {
                assert_eq!(len, n);
                break;
            }
        }
        expect.sort();
        assert_eq!(words, expect);
    }

    #[test]
    fn search_budget_exceeded_when_infinite() {
        assert_eq!(
            search_longest_avoiding(4, 4, 10_000).unwrap_err(),
            Error::SearchBudgetExceeded { cap: 10_000 }
        );
    }

    #[test]
    fn search_39_closed_under_complement() {
        let (len, words) = search_longest_avoiding(4, 3, 100_000_000).unwrap();
        assert_eq!(len, 39);
        for word in &words {
            assert!(words.contains(&word.binary_complement()));
        }
        assert!(words.contains(&w(LENGTH_39)));
        assert_eq!(words.len(), 2);
    }

    #[test]
    fn scan_short_additive_squares_found() {
        // additive squares of length 4 are unavoidable in long binary
        // words, so a small bound already yields a witness
        let f = flagship_f();
        let g = flagship_g();
        let cert = scan_morphic_prefix(&g, &f, 0, 2, 5, 30).unwrap();
        assert_eq!(cert.verdict, "witness");
        assert!(cert.witness.is_some());
    }

    #[test]
    fn scan_error_path_propagates() {
        let id: LinearMorphism = "0->0".parse().unwrap();
        let r = scan_morphic_prefix(&id, &id, 0, 2, 5, 10);
        assert_eq!(r.unwrap_err(), Error::NonStabilizing { cap: 10 });
    }

    #[test]
    fn empirical_frequency_cases() {
        assert_eq!(
            empirical_frequency(&w("0001"), 0).unwrap(),
            Ratio::new(3, 4)
        );
        assert_eq!(empirical_frequency(&w("1"), 0).unwrap(), Ratio::new(0, 1));
        assert_eq!(
            empirical_frequency(&Word::empty(), 0).unwrap_err(),
            Error::EmptyWord
        );
    }

    #[test]
    fn certificate_serializes() {
        let f = flagship_f();
        let g = flagship_g();
        let cert = scan_morphic_prefix(&g, &f, 0, 2, 5, 30).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: ScanCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back.verdict, cert.verdict);
        assert_eq!(back.bound, cert.bound);
    }
}
