//! The explicit word families: `β`, `α`, the language `Z_m` (m ≥ 5) and the
//! factor language `Z_4` of the substitution `g`.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

/// `b_i` (1-based): 1 or 2 by `i mod 3` after removing factors of 3.
pub fn beta_letter(mut i: u64) -> Letter {
    debug_assert!(i >= 1);
    while i.is_multiple_of(3) {
        i /= 3;
    }
    if i % 3 == 1 {
        1
    } else {
        2
    }
}

pub fn beta_prefix(k: usize) -> Word {
    Word::from_raw((1..=k as u64).map(beta_letter).collect(), 2)
}

/// `a_i` (1-based) of Carpi's word `α` over `A_m`.
pub fn alpha_letter(m: usize, i: u64) -> Letter {
    if i % 2 == 1 {
        beta_letter(i.div_ceil(2))
    } else {
        // max{a <= m : 4^(a-2) | i}
        let fours = (i.trailing_zeros() / 2) as usize;
        (fours + 2).min(m) as Letter
    }
}

fn check_m(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::OutOfRange {
            what: "alphabet size m",
            min: min as u64,
            got: m as u64,
        });
    }
    Ok(())
}

pub fn alpha_prefix(m: usize, k: usize) -> Result<Word> {
    check_m(m, 4)?;
    Ok(Word::from_raw(
        (1..=k as u64).map(|i| alpha_letter(m, i)).collect(),
        m,
    ))
}

/// Positions `i ≡ 2 (mod 4)` are free (1 or 2); all others follow `α`.
pub fn zm_is_member(m: usize, z: &[Letter]) -> Result<bool> {
    check_m(m, 5)?;
    Ok(z.iter().enumerate().all(|(idx, &a)| {
        let i = idx as u64 + 1;
        if i % 4 == 2 {
            a == 1 || a == 2
        } else {
            a == alpha_letter(m, i)
        }
    }))
}

/// Number of free positions among `1..=k`.
pub fn zm_free_slots(k: usize) -> usize {
    (k + 2) / 4
}

/// `|Z_m ∩ A_m^k| = 2^⌊(k+2)/4⌋`, independent of `m`.
pub fn zm_count(k: usize) -> BigUint {
    BigUint::from(1u8) << zm_free_slots(k)
}

/// Default cap on free slots for [`zm_enumerate`] (2^20 words).
pub const ZM_ENUMERATION_LIMIT: usize = 20;

/// All members of length `k`, in lexicographic order.
pub fn zm_enumerate(m: usize, k: usize, limit: usize) -> Result<Vec<Word>> {
    check_m(m, 5)?;
    let slots = zm_free_slots(k);
    if slots > limit {
        return Err(Error::LimitExceeded {
            needed: slots,
            limit,
        });
    }
    let template: Vec<Letter> = (1..=k as u64).map(|i| alpha_letter(m, i)).collect();
    Ok((0u64..1 << slots)
        .map(|bits| {
            let mut w = template.clone();
            for j in 0..slots {
                // Earliest free slot is the most significant bit.
                let bit = (bits >> (slots - 1 - j)) & 1;
                w[4 * j + 1] = 1 + bit as Letter;
            }
            Word::from_raw(w, m)
        })
        .collect())
}

/// One member of length `k` with free slots drawn from `rng`.
pub fn zm_sample<R: Rng>(m: usize, k: usize, rng: &mut R) -> Result<Word> {
    check_m(m, 5)?;
    Ok(Word::from_raw(
        (1..=k as u64)
            .map(|i| {
                if i % 4 == 2 {
                    rng.gen_range(1..=2)
                } else {
                    alpha_letter(m, i)
                }
            })
            .collect(),
        m,
    ))
}

/// `count` members of length `k` from a ChaCha8 stream seeded with `seed`.
pub fn zm_samples(m: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Word>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| zm_sample(m, k, &mut rng)).collect()
}

/// A substitution `A_m → 2^(A_m*)`, extended letterwise and then to sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionRule {
    alphabet: usize,
    images: Vec<Vec<Vec<Letter>>>,
}

impl SubstitutionRule {
    pub fn new(alphabet: usize, images: Vec<Vec<Vec<Letter>>>) -> Result<Self> {
        if images.len() != alphabet {
            return Err(Error::InvalidTable(format!(
                "substitution needs {alphabet} image sets, got {}",
                images.len()
            )));
        }
        for set in &images {
            if set.is_empty() {
                return Err(Error::InvalidTable("empty image set".into()));
            }
            for img in set {
                Word::new(img.clone(), alphabet)?;
            }
        }
        Ok(SubstitutionRule { alphabet, images })
    }

    /// `g(1) = {112}, g(2) = {114}, g(3) = {113}, g(4) = {123, 213}`.
    pub fn g() -> Self {
        SubstitutionRule {
            alphabet: 4,
            images: vec![
                vec![vec![1, 1, 2]],
                vec![vec![1, 1, 4]],
                vec![vec![1, 1, 3]],
                vec![vec![1, 2, 3], vec![2, 1, 3]],
            ],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn images_of(&self, a: Letter) -> &[Vec<Letter>] {
        &self.images[a as usize - 1]
    }

    /// Uniform image length, if there is one.
    pub fn uniform_length(&self) -> Option<usize> {
        let len = self.images[0][0].len();
        self.images
            .iter()
            .flatten()
            .all(|img| img.len() == len)
            .then_some(len)
    }

    /// All images of one word, ordered by the choice made at each letter.
    pub fn apply_word(&self, w: &[Letter]) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new()];
        for &a in w {
            let choices = self.images_of(a);
            if choices.len() == 1 {
                for prefix in &mut out {
                    prefix.extend_from_slice(&choices[0]);
                }
            } else {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        choices.iter().map(move |img| {
                            let mut next = prefix.clone();
                            next.extend_from_slice(img);
                            next
                        })
                    })
                    .collect();
            }
        }
        out
    }

    pub fn apply_set(&self, words: &BTreeSet<Word>) -> BTreeSet<Word> {
        words
            .iter()
            .flat_map(|w| self.apply_word(w.letters()))
            .map(|letters| Word::from_raw(letters, self.alphabet))
            .collect()
    }
}

/// `g(W) = ⋃_{w ∈ W} g(w)`.
pub fn g_apply(words: &BTreeSet<Word>) -> BTreeSet<Word> {
    SubstitutionRule::g().apply_set(words)
}

/// The length-`L` factors of `Z_4`, sorted, answering membership for any
/// shorter word as well.
///
/// Every factor of `Z_4` extends on both sides inside `Z_4`, so the factors
/// of length `ℓ <= L` are exactly the length-`ℓ` prefixes of the stored
/// words. Construction runs level by level: a length-`L` window of `g(x)`
/// sits at offset 0, 1 or 2 of `g(u)` for a factor `u` of length
/// `⌈L/3⌉ + 1`, so each level is derived from a much shorter one. The
/// shortest level (length 3) is a fixpoint seeded from `g³(1)`.
#[derive(Clone, Debug)]
pub struct FactorIndex {
    window: usize,
    factors: Vec<Vec<Letter>>,
}

const BASE_WINDOW: usize = 3;

impl FactorIndex {
    pub fn z4(window: usize) -> Self {
        let rule = SubstitutionRule::g();
        let factors = if window <= BASE_WINDOW {
            distinct_prefixes(&z4_base_fixpoint(&rule), window)
        } else {
            z4_level(&rule, window)
        };
        FactorIndex { window, factors }
    }

    /// Index over an explicit factor set; words not of length `window`
    /// are ignored. Prefix membership is only sound if every stored word
    /// is right-extendable inside the language.
    pub fn from_factors(window: usize, factors: impl IntoIterator<Item = Vec<Letter>>) -> Self {
        let set: BTreeSet<Vec<Letter>> = factors.into_iter().filter(|f| f.len() == window).collect();
        FactorIndex {
            window,
            factors: set.into_iter().collect(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Factors of length exactly `window`, sorted.
    pub fn full_length(&self) -> &[Vec<Letter>] {
        &self.factors
    }

    pub fn contains(&self, v: &[Letter]) -> bool {
        assert!(
            v.len() <= self.window,
            "factor index of window {} queried with length {}",
            self.window,
            v.len()
        );
        let i = self.factors.partition_point(|f| f.as_slice() < v);
        self.factors.get(i).is_some_and(|f| f.starts_with(v))
    }

    /// Distinct factors of length `len <= window`, sorted.
    pub fn of_length(&self, len: usize) -> Vec<&[Letter]> {
        assert!(len <= self.window);
        let mut out: Vec<&[Letter]> = Vec::new();
        for f in &self.factors {
            let p = &f[..len];
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Every factor of length `1..=max_len`, length-then-lex.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        (1..=max_len.min(self.window))
            .flat_map(|len| {
                self.of_length(len)
                    .into_iter()
                    .map(|f| Word::from_raw(f.to_vec(), 4))
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

fn distinct_prefixes(words: &[Vec<Letter>], len: usize) -> Vec<Vec<Letter>> {
    let set: BTreeSet<&[Letter]> = words.iter().map(|w| &w[..len]).collect();
    set.into_iter().map(<[Letter]>::to_vec).collect()
}

fn windows_into(rule: &SubstitutionRule, u: &[Letter], len: usize, out: &mut HashSet<Vec<Letter>>) {
    for img in rule.apply_word(u) {
        for offset in 0..3 {
            if offset + len <= img.len() {
                out.insert(img[offset..offset + len].to_vec());
            }
        }
    }
}

fn z4_base_fixpoint(rule: &SubstitutionRule) -> Vec<Vec<Letter>> {
    let mut seeds = vec![vec![1 as Letter]];
    for _ in 0..3 {
        seeds = seeds.iter().flat_map(|w| rule.apply_word(w)).collect();
    }
    let mut known: HashSet<Vec<Letter>> = seeds
        .iter()
        .flat_map(|w| w.windows(BASE_WINDOW).map(<[Letter]>::to_vec))
        .collect();
    loop {
        let shorter = distinct_prefixes(&known.iter().cloned().collect::<Vec<_>>(), 2);
        let mut next = known.clone();
        for u in &shorter {
            windows_into(rule, u, BASE_WINDOW, &mut next);
        }
        if next.len() == known.len() {
            break;
        }
        known = next;
    }
    let mut out: Vec<_> = known.into_iter().collect();
    out.sort();
    out
}

fn z4_level(rule: &SubstitutionRule, len: usize) -> Vec<Vec<Letter>> {
    if len <= BASE_WINDOW {
        return distinct_prefixes(&z4_base_fixpoint(rule), len);
    }
    let below = len.div_ceil(3) + 1;
    let mut out = HashSet::new();
    for u in z4_level(rule, below) {
        windows_into(rule, &u, len, &mut out);
    }
    let mut out: Vec<_> = out.into_iter().collect();
    out.sort();
    out
}

/// All factors of `Z_4` of length `1..=max_len`, length-then-lex.
pub fn z4_factors(max_len: usize) -> Vec<Word> {
    FactorIndex::z4(max_len.max(1)).words_up_to(max_len)
}

pub fn z4_is_factor(v: &[Letter]) -> bool {
    if v.is_empty() {
        return true;
    }
    if v.iter().any(|&a| a == 0 || a > 4) {
        return false;
    }
    FactorIndex::z4(v.len()).contains(v)
}
