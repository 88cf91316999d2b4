//! Pansiot's binary encoding of words over `A_n`.
//!
//! `φ_n` sends the binary letter `0` to the cycle `(1 2 .. n-1)` and `1` to
//! the cycle `(1 2 .. n)`. Points act on the right: `a·φ(uv) = (a·φ(u))·φ(v)`.
//! Binary words are [`Word`]s of alphabet size 2 whose letters `1`/`2` stand
//! for `0`/`1`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{Letter, RepetitionKind, RepetitionReport, Word};

/// A bijection of `{1..n}`; `image[a - 1]` is `a·π`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation {
    image: Vec<Letter>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (1..=n as Letter).collect(),
        }
    }

    /// Build from an explicit image list, checking bijectivity.
    pub fn from_images(image: Vec<Letter>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &a in &image {
            let idx = (a as usize).wrapping_sub(1);
            if idx >= n || std::mem::replace(&mut seen[idx], true) {
                return Err(Error::LetterOutOfRange {
                    letter: a as u32,
                    alphabet: n,
                });
            }
        }
        Ok(Permutation { image })
    }

    /// The cycle `(1 2 .. len)` on `{1..n}`, fixing points above `len`.
    pub fn leading_cycle(n: usize, len: usize) -> Self {
        let mut p = Self::identity(n);
        for a in 1..=len {
            p.image[a - 1] = if a == len { 1 } else { a as Letter + 1 };
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    /// `a·π`.
    pub fn apply(&self, a: Letter) -> Letter {
        self.image[a as usize - 1]
    }

    /// The product `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            image: self.image.iter().map(|&a| other.apply(a)).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &a) in self.image.iter().enumerate() {
            inv[a as usize - 1] = i as Letter + 1;
        }
        Permutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &a)| a as usize == i + 1)
    }

    /// Number of leading points `1, 2, ..` fixed.
    pub fn fixed_prefix(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .take_while(|(i, &a)| a as usize == i + 1)
            .count()
    }

    pub fn images(&self) -> &[Letter] {
        &self.image
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .image
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{}->{}", i + 1, a))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

fn check_order(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "Pansiot order n",
            min: 2,
            got: n as u64,
        });
    }
    Ok(())
}

pub(crate) fn binary_letters(u: &Word) -> Result<&[Letter]> {
    if u.alphabet() != 2 {
        return Err(Error::NotBinary(u.alphabet()));
    }
    Ok(u.letters())
}

/// `φ_n(0)` and `φ_n(1)`.
pub fn generators(n: usize) -> [Permutation; 2] {
    [
        Permutation::leading_cycle(n, n - 1),
        Permutation::leading_cycle(n, n),
    ]
}

pub fn phi(n: usize, u: &Word) -> Result<Permutation> {
    check_order(n)?;
    let letters = binary_letters(u)?;
    let gens = generators(n);
    Ok(letters
        .iter()
        .fold(Permutation::identity(n), |acc, &b| acc.then(&gens[b as usize - 1])))
}

/// Inverse prefix permutations of a binary word: row `i` holds
/// `φ_n(u[..i])⁻¹` as an image list.
///
/// `φ_n(u[s..e])` fixes a point `a` iff rows `s` and `e` agree at `a`, and it
/// is the identity iff the rows are equal.
pub struct PrefixPermutations {
    n: usize,
    rows: Vec<Letter>,
}

impl PrefixPermutations {
    pub fn new(n: usize, letters: &[Letter]) -> Self {
        let gen_inverses: Vec<Vec<Letter>> = generators(n)
            .iter()
            .map(|g| g.inverse().image)
            .collect();
        let mut rows = Vec::with_capacity((letters.len() + 1) * n);
        rows.extend(1..=n as Letter);
        for (i, &b) in letters.iter().enumerate() {
            let g_inv = &gen_inverses[b as usize - 1];
            let base = i * n;
            for a in 0..n {
                // (g·P)⁻¹ restricted: inv_new(a) = inv_old(g⁻¹(a)).
                let v = rows[base + g_inv[a] as usize - 1];
                rows.push(v);
            }
        }
        PrefixPermutations { n, rows }
    }

    pub fn row(&self, i: usize) -> &[Letter] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.n - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Leading points fixed by `φ_n(u[s..e])`.
    pub fn fixed_prefix(&self, s: usize, e: usize) -> usize {
        self.row(s)
            .iter()
            .zip(self.row(e))
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn fixes_first(&self, s: usize, e: usize, k: usize) -> bool {
        self.row(s)[..k] == self.row(e)[..k]
    }

    /// Dense ids such that `ids[s] == ids[e]` iff `φ_n(u[s..e])` is the identity.
    pub fn class_ids(&self) -> Vec<u32> {
        let mut seen: HashMap<&[Letter], u32> = HashMap::new();
        (0..=self.len())
            .map(|i| {
                let next = seen.len() as u32;
                *seen.entry(self.row(i)).or_insert(next)
            })
            .collect()
    }
}

/// `γ_n(u)`: the i-th letter is the point sent to `1` by `φ_n(u[..=i])`.
pub fn gamma(n: usize, u: &Word) -> Result<Word> {
    check_order(n)?;
    let letters = binary_letters(u)?;
    let prefixes = PrefixPermutations::new(n, letters);
    let out = (1..=letters.len()).map(|i| prefixes.row(i)[0]).collect();
    Ok(Word::from_raw(out, n))
}

pub fn is_k_stabilizing(n: usize, v: &Word, k: usize) -> Result<bool> {
    check_order(n)?;
    if k == 0 || k >= n {
        return Err(Error::StabilizingDepth { k, max: n - 1 });
    }
    let p = phi(n, v)?;
    Ok(p.fixed_prefix() >= k)
}

/// Leftmost-shortest factor in `Stab_n(k)` with `0 < |v| < k(n-1)` for some k.
pub fn find_short_stabilizing(n: usize, u: &Word) -> Result<Option<RepetitionReport>> {
    check_order(n)?;
    let letters = binary_letters(u)?;
    let prefixes = PrefixPermutations::new(n, letters);
    Ok(short_stabilizing_in(n, &prefixes))
}

pub(crate) fn short_stabilizing_in(
    n: usize,
    prefixes: &PrefixPermutations,
) -> Option<RepetitionReport> {
    let len = prefixes.len();
    let step = n - 1;
    // |v| < k(n-1) with k <= n-1 bounds |v| by (n-1)^2 - 1.
    let max_len = step * step - 1;
    for s in 0..len {
        for l in 1..=max_len.min(len - s) {
            // Smallest k with l < k(n-1).
            let k = l / step + 1;
            if k <= step && prefixes.fixes_first(s, s + l, k) {
                let mut report = RepetitionReport::new(s + 1, l, l, RepetitionKind::Stabilizing);
                report.stabilized = Some(prefixes.fixed_prefix(s, s + l).min(step));
                return Some(report);
            }
        }
    }
    None
}

/// Shortest (then leftmost) factor of `u` fixing `1..=k`, of length below
/// `below`.
pub fn shortest_stabilizing_factor(
    n: usize,
    u: &Word,
    k: usize,
    below: usize,
) -> Result<Option<RepetitionReport>> {
    check_order(n)?;
    if k == 0 || k >= n {
        return Err(Error::StabilizingDepth { k, max: n - 1 });
    }
    let letters = binary_letters(u)?;
    let prefixes = PrefixPermutations::new(n, letters);
    let len = letters.len();
    for l in 1..below.min(len + 1) {
        for s in 0..=len - l {
            if prefixes.fixes_first(s, s + l, k) {
                let mut report = RepetitionReport::new(s + 1, l, l, RepetitionKind::Stabilizing);
                report.stabilized = Some(prefixes.fixed_prefix(s, s + l).min(n - 1));
                return Ok(Some(report));
            }
        }
    }
    Ok(None)
}

/// Whether `(n-1)|v| > np - (n-1)²`, i.e. `|v| > np/(n-1) - (n-1)`.
pub fn kernel_length_bound(n: usize, len: usize, period: usize) -> bool {
    let n = n as i128;
    (n - 1) * len as i128 > n * period as i128 - (n - 1) * (n - 1)
}

/// Shortest length `>= p` satisfying [`kernel_length_bound`].
fn kernel_min_len(n: usize, p: usize) -> usize {
    let rhs = n as i128 * p as i128 - (n as i128 - 1).pow(2);
    if rhs < 0 {
        p
    } else {
        p.max((rhs / (n as i128 - 1)) as usize + 1)
    }
}

/// Leftmost-shortest kernel repetition of order `n` among the factors of `u`.
///
/// Within a factor of period `p` all length-`p` windows are cyclic shifts of
/// one another, and `φ_n` of a cyclic shift is a conjugate, so testing the
/// first window decides the kernel condition.
pub fn find_kernel_repetition(n: usize, u: &Word) -> Result<Option<RepetitionReport>> {
    check_order(n)?;
    let letters = binary_letters(u)?;
    let prefixes = PrefixPermutations::new(n, letters);
    Ok(kernel_repetition_in(n, letters, &prefixes))
}

pub(crate) fn kernel_repetition_in(
    n: usize,
    letters: &[Letter],
    prefixes: &PrefixPermutations,
) -> Option<RepetitionReport> {
    let len = letters.len();
    let ids = prefixes.class_ids();
    // best[s] = (length, period)
    let mut best: Vec<Option<(usize, usize)>> = vec![None; len];
    let mut run = vec![0usize; len + 1];
    for p in 1..=len {
        let min_len = kernel_min_len(n, p);
        run[len - p] = 0;
        for s in (0..=len - p).rev() {
            if s + p < len {
                run[s] = if letters[s] == letters[s + p] { run[s + 1] + 1 } else { 0 };
            }
            if min_len <= p + run[s] && ids[s] == ids[s + p] {
                match best[s] {
                    Some((l, _)) if l <= min_len => {}
                    _ => best[s] = Some((min_len, p)),
                }
            }
        }
    }
    best.iter().enumerate().find_map(|(s, b)| {
        b.map(|(l, p)| RepetitionReport::new(s + 1, l, p, RepetitionKind::Kernel))
    })
}

/// Whether `v` itself is a kernel repetition of order `n` (some period `p`
/// qualifies).
pub fn is_kernel_repetition(n: usize, v: &Word) -> Result<bool> {
    check_order(n)?;
    let letters = binary_letters(v)?;
    let prefixes = PrefixPermutations::new(n, letters);
    let ids = prefixes.class_ids();
    let len = letters.len();
    Ok((1..=len).any(|p| {
        crate::words::is_period(letters, p)
            && kernel_length_bound(n, len, p)
            && (0..=len - p).any(|j| ids[j] == ids[j + p])
    }))
}

/// The factor scan behind Carpi's reformulation of Pansiot's result:
/// condition (i) short stabilizing factors first, then kernel repetitions.
pub fn scan_prop32(n: usize, u: &Word) -> Result<Option<RepetitionReport>> {
    check_order(n)?;
    let letters = binary_letters(u)?;
    let prefixes = PrefixPermutations::new(n, letters);
    Ok(short_stabilizing_in(n, &prefixes).or_else(|| kernel_repetition_in(n, letters, &prefixes)))
}
