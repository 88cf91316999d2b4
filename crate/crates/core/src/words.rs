//! Words over `{1..n}`, exact exponents and repetition-freeness.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A letter of `A_n = {1, .., n}`.
pub type Letter = u16;

/// A finite word with a declared alphabet size.
///
/// Letters are 1-based. The binary Pansiot alphabet `{0, 1}` is stored as
/// `{1, 2}` with `alphabet == 2` and only rendered as `0/1` by
/// [`Word::to_binary_string`] / parsed by [`Word::parse_binary`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
    alphabet: usize,
}

impl Word {
    pub fn new(letters: Vec<Letter>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if let Some(&bad) = letters
            .iter()
            .find(|&&a| a == 0 || a as usize > alphabet)
        {
            return Err(Error::LetterOutOfRange {
                letter: bad as u32,
                alphabet,
            });
        }
        Ok(Word { letters, alphabet })
    }

    pub fn empty(alphabet: usize) -> Self {
        Word {
            letters: Vec::new(),
            alphabet,
        }
    }

    /// Caller guarantees every letter is in range.
    pub(crate) fn from_raw(letters: Vec<Letter>, alphabet: usize) -> Self {
        debug_assert!(letters.iter().all(|&a| a >= 1 && a as usize <= alphabet));
        Word { letters, alphabet }
    }

    /// Parse the text format: a digit string when `alphabet <= 9`,
    /// comma-separated integers otherwise (commas are accepted for any size).
    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        let text = text.trim();
        let err = |reason: String| Error::ParseWord {
            text: text.to_string(),
            reason,
        };
        let letters = if text.is_empty() || text == "ε" {
            Vec::new()
        } else if text.contains(',') || alphabet > 9 {
            text.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<Letter>()
                        .map_err(|e| err(format!("bad letter {tok:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as Letter)
                        .ok_or_else(|| err(format!("bad letter {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Word::new(letters, alphabet)
    }

    /// Parse a `0/1` string into a binary word (stored as letters 1/2).
    pub fn parse_binary(text: &str) -> Result<Self> {
        let text = text.trim();
        let letters = text
            .chars()
            .filter(|&c| c != 'ε')
            .map(|c| match c {
                '0' => Ok(1),
                '1' => Ok(2),
                _ => Err(Error::ParseWord {
                    text: text.to_string(),
                    reason: format!("binary words use 0 and 1, found {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::from_raw(letters, 2))
    }

    pub fn to_binary_string(&self) -> String {
        self.letters
            .iter()
            .map(|&a| if a == 1 { '0' } else { '1' })
            .collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Factor `w[start .. start + len]` with a 0-based start.
    pub fn factor(&self, start: usize, len: usize) -> Word {
        Word::from_raw(self.letters[start..start + len].to_vec(), self.alphabet)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word::from_raw(letters, self.alphabet.max(other.alphabet))
    }
}

/// Render letters in the text format for the given alphabet size.
pub fn render(letters: &[Letter], alphabet: usize) -> String {
    if alphabet <= 9 {
        letters
            .iter()
            .map(|&a| char::from_digit(a as u32, 10).unwrap_or('?'))
            .collect()
    } else {
        letters
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.letters, self.alphabet))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An exact positive rational, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    num: u64,
    den: u64,
}

impl RationalExponent {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidRational(format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        Ok(RationalExponent {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(value: u64) -> Result<Self> {
        Self::new(value, 1)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// Compare `len / period` against `self` without division.
    pub fn cmp_ratio(&self, len: usize, period: usize) -> Ordering {
        (len as u128 * self.den as u128).cmp(&(self.num as u128 * period as u128))
    }

    /// Whether a factor of exponent `len / period` violates this bound:
    /// `>` when `strict` (r⁺-freeness), `>=` otherwise (r-freeness).
    pub fn violated_by(&self, len: usize, period: usize, strict: bool) -> bool {
        match self.cmp_ratio(len, period) {
            Ordering::Greater => true,
            Ordering::Equal => !strict,
            Ordering::Less => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for RationalExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for RationalExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RationalExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let num = num.parse().map_err(|_| bad())?;
        let den = den.parse().map_err(|_| bad())?;
        Self::new(num, den)
    }
}

impl Serialize for RationalExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepetitionKind {
    Plain,
    Kernel,
    PsiKernel,
    Stabilizing,
}

/// Location of a forbidden factor inside a host word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepetitionReport {
    /// 1-based start index in the host word.
    pub start: usize,
    pub length: usize,
    pub period: usize,
    pub exponent: RationalExponent,
    pub kind: RepetitionKind,
    /// For stabilizing reports: the number of leading points fixed
    /// (capped at `n - 1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilized: Option<usize>,
}

impl RepetitionReport {
    pub fn new(start: usize, length: usize, period: usize, kind: RepetitionKind) -> Self {
        RepetitionReport {
            start,
            length,
            period,
            exponent: RationalExponent::new(length as u64, period as u64)
                .expect("length and period are positive"),
            kind,
            stabilized: None,
        }
    }

    /// The reported factor, sliced out of its host.
    pub fn factor<'a>(&self, host: &'a [Letter]) -> &'a [Letter] {
        &host[self.start - 1..self.start - 1 + self.length]
    }
}

impl fmt::Display for RepetitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} repetition at {} (length {}, period {}, exponent {})",
            self.kind, self.start, self.length, self.period, self.exponent
        )?;
        if let Some(k) = self.stabilized {
            write!(f, ", fixes 1..{k}")?;
        }
        Ok(())
    }
}

pub fn is_period(w: &[Letter], p: usize) -> bool {
    p >= 1 && p <= w.len() && w[p..].iter().zip(w).all(|(a, b)| a == b)
}

/// All periods of `w`, ascending, straight from the definition.
pub fn periods(w: &[Letter]) -> Vec<usize> {
    (1..=w.len()).filter(|&p| is_period(w, p)).collect()
}

/// Failure function: `border[i]` is the longest proper border of `w[..=i]`.
pub fn border_array(w: &[Letter]) -> Vec<usize> {
    let mut border = vec![0; w.len()];
    let mut k = 0;
    for i in 1..w.len() {
        while k > 0 && w[i] != w[k] {
            k = border[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        border[i] = k;
    }
    border
}

/// Same result as [`periods`], via the border chain.
pub fn periods_by_borders(w: &[Letter]) -> Vec<usize> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let border = border_array(w);
    let mut out = Vec::new();
    let mut b = border[n - 1];
    out.push(n - b);
    while b > 0 {
        b = border[b - 1];
        out.push(n - b);
    }
    out
}

pub fn minimal_period(w: &[Letter]) -> Option<usize> {
    let n = w.len();
    (n > 0).then(|| n - border_array(w)[n - 1])
}

/// `|w| / p` for the minimal period `p`.
pub fn max_exponent(w: &[Letter]) -> Result<RationalExponent> {
    let p = minimal_period(w).ok_or(Error::UndefinedExponent)?;
    RationalExponent::new(w.len() as u64, p as u64)
}

/// Leftmost, then shortest, factor of `w` whose exponent is `>= r`
/// (`strict == false`) or `> r` (`strict == true`).
pub fn find_forbidden_factor(
    w: &[Letter],
    r: RationalExponent,
    strict: bool,
) -> Option<RepetitionReport> {
    for start in 0..w.len() {
        // Incremental failure function of w[start..].
        let tail = &w[start..];
        let mut border = Vec::with_capacity(tail.len());
        let mut k = 0usize;
        for (i, &a) in tail.iter().enumerate() {
            if i > 0 {
                while k > 0 && a != tail[k] {
                    k = border[k - 1];
                }
                if a == tail[k] {
                    k += 1;
                }
            }
            border.push(k);
            let len = i + 1;
            let period = len - k;
            if r.violated_by(len, period, strict) {
                return Some(RepetitionReport::new(
                    start + 1,
                    len,
                    period,
                    RepetitionKind::Plain,
                ));
            }
        }
    }
    None
}

/// RT(n): 2, 7/4, 7/5, then n/(n-1).
pub fn repetition_threshold(n: usize) -> Result<RationalExponent> {
    match n {
        0 | 1 => Err(Error::OutOfRange {
            what: "alphabet size for the repetition threshold",
            min: 2,
            got: n as u64,
        }),
        2 => RationalExponent::new(2, 1),
        3 => RationalExponent::new(7, 4),
        4 => RationalExponent::new(7, 5),
        _ => RationalExponent::new(n as u64, n as u64 - 1),
    }
}

/// `|w|_a` for every `a` in `1..=alphabet`.
pub fn letter_counts(w: &Word) -> BTreeMap<Letter, usize> {
    let mut counts: BTreeMap<Letter, usize> =
        (1..=w.alphabet() as Letter).map(|a| (a, 0)).collect();
    for &a in w.letters() {
        *counts.entry(a).or_insert(0) += 1;
    }
    counts
}

/// Incremental r-freeness checker for depth-first extension.
///
/// After each [`push`](SuffixScanner::push) only the suffixes ending at the
/// new letter are inspected: for every period `p` it tracks the length of
/// the longest suffix with period `p`, so a push costs `O(len)`.
#[derive(Clone, Debug)]
pub struct SuffixScanner {
    bound: RationalExponent,
    strict: bool,
    letters: Vec<Letter>,
    // runs[i][p - 1]: consecutive positions j <= i with w[j] == w[j - p].
    runs: Vec<Vec<u32>>,
}

impl SuffixScanner {
    pub fn new(bound: RationalExponent, strict: bool) -> Self {
        SuffixScanner {
            bound,
            strict,
            letters: Vec::new(),
            runs: Vec::new(),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Append `a`; returns `true` if some suffix now violates the bound.
    /// The letter stays pushed either way.
    pub fn push(&mut self, a: Letter) -> bool {
        let i = self.letters.len();
        self.letters.push(a);
        let mut row = Vec::with_capacity(i);
        let mut violated = false;
        for p in 1..=i {
            let run = if self.letters[i - p] == a {
                let prev = if p < i { self.runs[i - 1][p - 1] } else { 0 };
                prev + 1
            } else {
                0
            };
            row.push(run);
            if !violated && self.bound.violated_by(p + run as usize, p, self.strict) {
                violated = true;
            }
        }
        // Period == length: exponent 1.
        if !violated && i == 0 {
            violated = self.bound.violated_by(1, 1, self.strict);
        }
        self.runs.push(row);
        violated
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.runs.pop();
        self.letters.pop()
    }

    /// The shortest violating suffix, if any.
    pub fn violation(&self) -> Option<RepetitionReport> {
        let len = self.letters.len();
        let i = len.checked_sub(1)?;
        (1..=len)
            .filter_map(|l| {
                let suffix = &self.letters[len - l..];
                let p = minimal_period(suffix)?;
                self.bound
                    .violated_by(l, p, self.strict)
                    .then(|| RepetitionReport::new(i + 2 - l, l, p, RepetitionKind::Plain))
            })
            .next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<Letter> {
        Word::parse(s, 9).unwrap().into_letters()
    }

    fn q(s: &str) -> RationalExponent {
        s.parse().unwrap()
    }

    #[test]
    fn periods_examples() {
        assert_eq!(periods(&w("1213121")), vec![4, 6, 7]);
        assert_eq!(periods(&w("111")), vec![1, 2, 3]);
        assert_eq!(periods(&w("12")), vec![2]);
        assert!(periods(&[]).is_empty());
    }

    #[test]
    fn max_exponent_examples() {
        assert_eq!(max_exponent(&w("1213121")).unwrap(), q("7/4"));
        assert_eq!(max_exponent(&w("11")).unwrap(), q("2/1"));
        assert_eq!(max_exponent(&w("123")).unwrap(), q("1/1"));
        assert!(matches!(max_exponent(&[]), Err(Error::UndefinedExponent)));
    }

    #[test]
    fn forbidden_factor_examples() {
        let r = find_forbidden_factor(&w("1212"), q("7/4"), true).unwrap();
        assert_eq!((r.start, r.length, r.period), (1, 4, 2));
        assert_eq!(r.exponent, q("2"));
        assert_eq!(find_forbidden_factor(&w("121"), q("7/4"), true), None);
        assert_eq!(find_forbidden_factor(&w("11"), q("2"), true), None);
        let r = find_forbidden_factor(&w("11"), q("2"), false).unwrap();
        assert_eq!((r.start, r.length), (1, 2));
    }

    #[test]
    fn leftmost_then_shortest() {
        // "1111": the square "11" at position 1 wins over the longer runs.
        let r = find_forbidden_factor(&w("31111"), q("3/2"), true).unwrap();
        assert_eq!((r.start, r.length, r.period), (2, 2, 1));
    }

    #[test]
    fn thresholds() {
        assert_eq!(repetition_threshold(2).unwrap(), q("2"));
        assert_eq!(repetition_threshold(3).unwrap(), q("7/4"));
        assert_eq!(repetition_threshold(4).unwrap(), q("7/5"));
        assert_eq!(repetition_threshold(30).unwrap(), q("30/29"));
        assert!(repetition_threshold(1).is_err());
    }

    #[test]
    fn counts() {
        let c = letter_counts(&Word::parse("112", 4).unwrap());
        assert_eq!(c.values().copied().collect::<Vec<_>>(), vec![2, 1, 0, 0]);
        let c = letter_counts(&Word::empty(4));
        assert!(c.values().all(|&v| v == 0) && c.len() == 4);
        let c = letter_counts(&Word::parse("1234", 4).unwrap());
        assert!(c.values().all(|&v| v == 1));
    }

    #[test]
    fn rational_normalizes_and_orders() {
        assert_eq!(q("14/8"), q("7/4"));
        assert_eq!(q("14/8").to_string(), "7/4");
        assert!(q("7/5") < q("7/4"));
        assert!(RationalExponent::new(0, 3).is_err());
        assert!("x/2".parse::<RationalExponent>().is_err());
    }

    #[test]
    fn text_format() {
        let big = Word::parse("1,2,13", 13).unwrap();
        assert_eq!(big.letters(), &[1, 2, 13]);
        assert_eq!(big.to_string(), "1,2,13");
        assert_eq!(Word::parse("1213", 3).unwrap().to_string(), "1213");
        assert!(Word::parse("14", 3).is_err());
        let b = Word::parse_binary("0110").unwrap();
        assert_eq!(b.letters(), &[1, 2, 2, 1]);
        assert_eq!(b.to_binary_string(), "0110");
        assert!(Word::parse_binary("012").is_err());
    }

    #[test]
    fn scanner_reports_shortest_suffix() {
        let mut s = SuffixScanner::new(q("7/4"), true);
        assert!(!s.push(1));
        assert!(!s.push(2));
        assert!(!s.push(1));
        assert!(s.push(2));
        let r = s.violation().unwrap();
        assert_eq!((r.start, r.length, r.period), (1, 4, 2));
        s.pop();
        assert!(!s.push(3));
        assert!(s.violation().is_none());
    }
}
