//! Combinatorial complexity `C_L(k)` and growth-rate estimates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::carpi::CarpiParams;
use crate::constructions::{zm_is_member, FactorIndex};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::words::{find_forbidden_factor, repetition_threshold, Letter, RationalExponent, SuffixScanner};

/// Decimal digits used for roots and ratios.
pub const DIGITS: u32 = 6;

fn big_to_string<S: Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LanguageDescriptor {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl LanguageDescriptor {
    pub fn new(name: &str, params: &[(&str, String)]) -> Self {
        LanguageDescriptor {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        }
    }
}

/// `C(1..=K)` with derived roots and ratios.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthTable {
    pub language: LanguageDescriptor,
    #[serde(serialize_with = "big_to_string")]
    pub counts: Vec<BigUint>,
    /// `C(k)^(1/k)`, truncated to [`DIGITS`] decimals.
    pub kth_roots: Vec<String>,
    /// `C(k+1)/C(k)` for `k = 1..K-1`.
    pub ratios: Vec<String>,
    pub truncated: bool,
}

impl GrowthTable {
    pub fn new(language: LanguageDescriptor, counts: Vec<BigUint>, truncated: bool) -> Self {
        let kth_roots = counts
            .iter()
            .enumerate()
            .map(|(i, c)| kth_root_decimal(c, i + 1))
            .collect();
        let ratios = counts
            .windows(2)
            .map(|w| ratio_decimal(&w[1], &w[0]))
            .collect();
        GrowthTable {
            language,
            counts,
            kth_roots,
            ratios,
            truncated,
        }
    }

    pub fn count(&self, k: usize) -> Option<&BigUint> {
        k.checked_sub(1).and_then(|i| self.counts.get(i))
    }

    /// `k,count,ratio,kth_root`; the ratio column is empty at `k = 1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count,ratio,kth_root\n");
        for (i, c) in self.counts.iter().enumerate() {
            let ratio = if i == 0 { "" } else { &self.ratios[i - 1] };
            let _ = writeln!(out, "{},{},{},{}", i + 1, c, ratio, self.kth_roots[i]);
        }
        out
    }
}

fn fixed_decimal(scaled: &BigUint) -> String {
    let scale = BigUint::from(10u32).pow(DIGITS);
    let int = scaled / &scale;
    let frac = scaled % &scale;
    format!("{int}.{frac:0>width$}", width = DIGITS as usize)
}

/// `⌊c^(1/k) · 10^6⌋ / 10^6` by integer root extraction.
pub fn kth_root_decimal(c: &BigUint, k: usize) -> String {
    let scaled = c * BigUint::from(10u32).pow(DIGITS * k as u32);
    fixed_decimal(&scaled.nth_root(k as u32))
}

/// `⌊a/b · 10^6⌋ / 10^6`; `-` when `b` is zero.
pub fn ratio_decimal(a: &BigUint, b: &BigUint) -> String {
    if b.is_zero() {
        return "-".to_string();
    }
    fixed_decimal(&(a * BigUint::from(10u32).pow(DIGITS) / b))
}

/// Pairs `(j, k)` with `C(j+k) > C(j)·C(k)`.
pub fn submultiplicative_violations(counts: &[BigUint]) -> Vec<(usize, usize)> {
    let c = |k: usize| &counts[k - 1];
    let mut out = Vec::new();
    for j in 1..=counts.len() {
        for k in j..=counts.len() - j {
            if c(j + k) > &(c(j) * c(k)) {
                out.push((j, k));
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSummary {
    pub k: usize,
    pub last_count: String,
    pub last_ratio: Option<String>,
    pub last_kth_root: String,
    pub ratios_nonincreasing: bool,
    pub roots_nonincreasing: bool,
    pub submultiplicative_violations: Vec<(usize, usize)>,
}

pub fn growth_estimate(table: &GrowthTable) -> Result<GrowthSummary> {
    let k = table.counts.len();
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "growth table length",
            min: 1,
            got: 0,
        });
    }
    let scaled = |s: &str| s.replace('.', "").parse::<u128>().ok();
    let ratios: Vec<_> = table.ratios.iter().map(|r| scaled(r)).collect();
    let roots: Vec<_> = table.kth_roots.iter().map(|r| scaled(r)).collect();
    Ok(GrowthSummary {
        k,
        last_count: table.counts[k - 1].to_string(),
        last_ratio: table.ratios.last().cloned(),
        last_kth_root: table.kth_roots[k - 1].clone(),
        ratios_nonincreasing: ratios.windows(2).all(|w| w[0] >= w[1]),
        roots_nonincreasing: roots.windows(2).all(|w| w[0] >= w[1]),
        submultiplicative_violations: submultiplicative_violations(&table.counts),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    pub exec: Exec,
    /// Prefix length at which DFS subtrees are handed to workers.
    pub split_depth: usize,
    /// Cap on visited words; exceeding it truncates the table.
    pub budget: Option<u64>,
    /// Count words up to renaming of letters and scale by `n!/(n-d)!`.
    pub symmetry: bool,
    /// Replace `RT(n)` by another bound (strict comparison).
    pub bound: Option<RationalExponent>,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            exec: Exec::default(),
            split_depth: 4,
            budget: None,
            symmetry: false,
            bound: None,
        }
    }
}

struct Budget {
    limit: u64,
    used: AtomicU64,
    exhausted: AtomicBool,
}

impl Budget {
    fn charge(&self, nodes: u64) -> bool {
        let total = self.used.fetch_add(nodes, Ordering::Relaxed) + nodes;
        if total > self.limit {
            self.exhausted.store(true, Ordering::Relaxed);
        }
        !self.exhausted.load(Ordering::Relaxed)
    }
}

const BUDGET_FLUSH: u64 = 1024;

struct ThresholdDfs<'a> {
    n: usize,
    max_len: usize,
    symmetry: bool,
    scanner: SuffixScanner,
    // counts[len][distinct]; distinct is 0 without symmetry.
    counts: Vec<Vec<u64>>,
    pending: u64,
    budget: Option<&'a Budget>,
}

impl ThresholdDfs<'_> {
    fn visit(&mut self, distinct: usize) -> bool {
        let len = self.scanner.len();
        self.counts[len][distinct] += 1;
        self.pending += 1;
        if self.pending >= BUDGET_FLUSH {
            if let Some(b) = self.budget {
                if !b.charge(self.pending) {
                    return false;
                }
            }
            self.pending = 0;
        }
        if len == self.max_len {
            return true;
        }
        let top = if self.symmetry {
            (distinct + 1).min(self.n)
        } else {
            self.n
        };
        for a in 1..=top as Letter {
            let ok = if self.scanner.push(a) {
                true
            } else {
                let d = if self.symmetry { distinct.max(a as usize) } else { 0 };
                self.visit(d)
            };
            self.scanner.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn flush(&mut self) -> bool {
        let ok = match self.budget {
            Some(b) => b.charge(self.pending),
            None => true,
        };
        self.pending = 0;
        ok
    }
}

fn falling_factorial(n: usize, d: usize) -> BigUint {
    (0..d).fold(BigUint::from(1u8), |acc, i| acc * BigUint::from(n - i))
}

/// Counts for lengths `0..=max_len`, or `None` if the budget ran out.
fn threshold_counts(
    n: usize,
    max_len: usize,
    bound: RationalExponent,
    opts: &CountOptions,
    budget: Option<&Budget>,
) -> Option<Vec<BigUint>> {
    let new_dfs = |depth: usize| ThresholdDfs {
        n,
        max_len: depth,
        symmetry: opts.symmetry,
        scanner: SuffixScanner::new(bound, true),
        counts: vec![vec![0; n + 1]; depth + 1],
        pending: 0,
        budget,
    };

    // Shallow part, collecting the frontier at the split depth.
    let split = opts.split_depth.min(max_len);
    let mut shallow = new_dfs(split);
    if !shallow.visit(0) || !shallow.flush() {
        return None;
    }
    let mut frontier: Vec<(Vec<Letter>, usize)> = Vec::new();
    collect_frontier(n, split, opts.symmetry, bound, &mut Vec::new(), 0, &mut frontier);

    let mut counts = shallow.counts;
    counts.resize(max_len + 1, vec![0; n + 1]);
    if split < max_len {
        let sub = opts.exec.map(&frontier, |(prefix, distinct)| {
            let mut dfs = new_dfs(max_len);
            for &a in prefix {
                dfs.scanner.push(a);
            }
            // The prefix itself is already counted by the shallow pass.
            let mut ok = true;
            let top = if opts.symmetry { (distinct + 1).min(n) } else { n };
            for a in 1..=top as Letter {
                if !dfs.scanner.push(a) {
                    let d = if opts.symmetry { (*distinct).max(a as usize) } else { 0 };
                    ok = dfs.visit(d);
                }
                dfs.scanner.pop();
                if !ok {
                    break;
                }
            }
            (ok && dfs.flush()).then_some(dfs.counts)
        });
        for part in sub {
            let part = part?;
            for (len, row) in part.into_iter().enumerate().skip(split + 1) {
                for (d, c) in row.into_iter().enumerate() {
                    counts[len][d] += c;
                }
            }
        }
    }
    if budget.is_some_and(|b| b.exhausted.load(Ordering::Relaxed)) {
        return None;
    }
    Some(
        counts
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .map(|(d, c)| {
                        let weight = if opts.symmetry {
                            falling_factorial(n, d)
                        } else {
                            BigUint::from(1u8)
                        };
                        weight * BigUint::from(c)
                    })
                    .sum()
            })
            .collect(),
    )
}

fn collect_frontier(
    n: usize,
    depth: usize,
    symmetry: bool,
    bound: RationalExponent,
    prefix: &mut Vec<Letter>,
    distinct: usize,
    out: &mut Vec<(Vec<Letter>, usize)>,
) {
    if prefix.len() == depth {
        out.push((prefix.clone(), distinct));
        return;
    }
    let top = if symmetry { (distinct + 1).min(n) } else { n };
    for a in 1..=top as Letter {
        prefix.push(a);
        let mut scanner = SuffixScanner::new(bound, true);
        let bad = prefix.iter().any(|&b| scanner.push(b));
        if !bad {
            let d = if symmetry { distinct.max(a as usize) } else { 0 };
            collect_frontier(n, depth, symmetry, bound, prefix, d, out);
        }
        prefix.pop();
    }
}

/// `C_{T_n}(k)` for `k = 1..=max_len` by depth-first extension.
///
/// With a budget the table holds the longest complete prefix of lengths
/// whose enumeration fits, and is marked truncated.
pub fn count_threshold_words(n: usize, max_len: usize, opts: &CountOptions) -> Result<GrowthTable> {
    let bound = match opts.bound {
        Some(b) => b,
        None => repetition_threshold(n)?,
    };
    let descriptor = LanguageDescriptor::new(
        "threshold",
        &[("n", n.to_string()), ("bound", format!("{bound}+"))],
    );
    let mut depth = max_len;
    loop {
        let budget = opts.budget.map(|limit| Budget {
            limit,
            used: AtomicU64::new(0),
            exhausted: AtomicBool::new(false),
        });
        if let Some(counts) = threshold_counts(n, depth, bound, opts, budget.as_ref()) {
            return Ok(GrowthTable::new(
                descriptor,
                counts.into_iter().skip(1).collect(),
                depth < max_len,
            ));
        }
        if depth == 0 {
            return Ok(GrowthTable::new(descriptor, Vec::new(), true));
        }
        depth -= 1;
    }
}

/// How a language behaves under taking prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    /// Every prefix of a member is a member, so DFS may prune.
    PrefixClosed,
    Arbitrary,
}

/// A membership predicate for [`count_language`].
pub trait Language: Sync {
    fn descriptor(&self) -> LanguageDescriptor;
    fn alphabet(&self) -> usize;
    fn contains(&self, w: &[Letter]) -> bool;
    /// `None` means undeclared; counting refuses to guess.
    fn closure(&self) -> Option<Closure>;
}

/// A language given by a closure.
pub struct Predicate<F> {
    pub name: String,
    pub alphabet: usize,
    pub closure: Option<Closure>,
    pub test: F,
}

impl<F: Fn(&[Letter]) -> bool + Sync> Language for Predicate<F> {
    fn descriptor(&self) -> LanguageDescriptor {
        LanguageDescriptor::new(&self.name, &[("alphabet", self.alphabet.to_string())])
    }
    fn alphabet(&self) -> usize {
        self.alphabet
    }
    fn contains(&self, w: &[Letter]) -> bool {
        (self.test)(w)
    }
    fn closure(&self) -> Option<Closure> {
        self.closure
    }
}

/// `Z_m` for `m >= 5`.
pub struct ZmLanguage {
    pub m: usize,
}

impl Language for ZmLanguage {
    fn descriptor(&self) -> LanguageDescriptor {
        LanguageDescriptor::new("zm", &[("m", self.m.to_string())])
    }
    fn alphabet(&self) -> usize {
        self.m
    }
    fn contains(&self, w: &[Letter]) -> bool {
        zm_is_member(self.m, w).unwrap_or(false)
    }
    fn closure(&self) -> Option<Closure> {
        Some(Closure::PrefixClosed)
    }
}

/// The factor language `Z_4`, up to the index window.
pub struct Z4Language {
    pub index: FactorIndex,
}

impl Language for Z4Language {
    fn descriptor(&self) -> LanguageDescriptor {
        LanguageDescriptor::new("z4", &[])
    }
    fn alphabet(&self) -> usize {
        4
    }
    fn contains(&self, w: &[Letter]) -> bool {
        self.index.contains(w)
    }
    fn closure(&self) -> Option<Closure> {
        Some(Closure::PrefixClosed)
    }
}

/// `RT(n)⁺`-free words, tested from scratch on every query.
pub struct ThresholdLanguage {
    pub n: usize,
    pub bound: RationalExponent,
}

impl ThresholdLanguage {
    pub fn new(n: usize) -> Result<Self> {
        Ok(ThresholdLanguage {
            n,
            bound: repetition_threshold(n)?,
        })
    }
}

impl Language for ThresholdLanguage {
    fn descriptor(&self) -> LanguageDescriptor {
        LanguageDescriptor::new("threshold", &[("n", self.n.to_string())])
    }
    fn alphabet(&self) -> usize {
        self.n
    }
    fn contains(&self, w: &[Letter]) -> bool {
        find_forbidden_factor(w, self.bound, true).is_none()
    }
    fn closure(&self) -> Option<Closure> {
        Some(Closure::PrefixClosed)
    }
}

/// Largest number of words per level scanned by the non-prefix-closed path.
pub const LEVEL_SCAN_LIMIT: u64 = 1 << 24;

fn prefix_closed_counts<L: Language + ?Sized>(lang: &L, prefix: &mut Vec<Letter>, counts: &mut [u64]) {
    counts[prefix.len()] += 1;
    if prefix.len() + 1 == counts.len() {
        return;
    }
    for a in 1..=lang.alphabet() as Letter {
        prefix.push(a);
        if lang.contains(prefix) {
            prefix_closed_counts(lang, prefix, counts);
        }
        prefix.pop();
    }
}

/// Exact `C(1..=max_len)` for an arbitrary membership predicate.
pub fn count_language<L: Language>(lang: &L, max_len: usize, exec: Exec) -> Result<GrowthTable> {
    let closure = lang.closure().ok_or(Error::UndeclaredClosure)?;
    let alphabet = lang.alphabet();
    let counts: Vec<BigUint> = match closure {
        Closure::PrefixClosed => {
            let firsts: Vec<Letter> = (1..=alphabet as Letter)
                .filter(|&a| max_len > 0 && lang.contains(&[a]))
                .collect();
            let parts = exec.map(&firsts, |&a| {
                let mut counts = vec![0u64; max_len + 1];
                prefix_closed_counts(lang, &mut vec![a], &mut counts);
                counts
            });
            (1..=max_len)
                .map(|k| BigUint::from(parts.iter().map(|p| p[k]).sum::<u64>()))
                .collect()
        }
        Closure::Arbitrary => {
            let mut out = Vec::with_capacity(max_len);
            for k in 1..=max_len {
                let total = (alphabet as u64).checked_pow(k as u32).filter(|&t| t <= LEVEL_SCAN_LIMIT);
                let total = total.ok_or(Error::LimitExceeded {
                    needed: k,
                    limit: (LEVEL_SCAN_LIMIT as f64).log(alphabet as f64) as usize,
                })?;
                let hits = exec.map_range(alphabet, |first| {
                    let per_first = total / alphabet as u64;
                    let mut w = vec![first as Letter + 1; k];
                    let mut hits = 0u64;
                    for idx in 0..per_first {
                        let mut rest = idx;
                        for slot in w[1..].iter_mut().rev() {
                            *slot = (rest % alphabet as u64) as Letter + 1;
                            rest /= alphabet as u64;
                        }
                        hits += lang.contains(&w) as u64;
                    }
                    hits
                });
                out.push(BigUint::from(hits.iter().sum::<u64>()));
            }
            out
        }
    };
    Ok(GrowthTable::new(lang.descriptor(), counts, false))
}

/// `C_{T_n}(k) = Ω(base^(k/divisor))`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub n: usize,
    pub base: u32,
    pub divisor: u64,
    pub k: u64,
    pub value: f64,
    pub formula: String,
}

/// `2^(k / 4(n-1)(ℓ+1))` for `n >= 33`, `4^(k / 81(n-1)(ℓ+1))` for
/// `27 <= n <= 32`.
pub fn theorem2_lower_bound(n: usize, k: u64) -> Result<LowerBound> {
    if n < 27 {
        return Err(Error::OutOfRange {
            what: "order n for the growth bound",
            min: 27,
            got: n as u64,
        });
    }
    let p = CarpiParams::new(n)?;
    let uniform = p.image_length as u64;
    let (base, divisor) = if n >= 33 {
        (2u32, 4 * uniform)
    } else {
        (4u32, 81 * uniform)
    };
    let value = (base as f64).powf(k as f64 / divisor as f64);
    Ok(LowerBound {
        n,
        base,
        divisor,
        k,
        value,
        formula: format!("{base}^(k/{divisor})"),
    })
}

/// `C(k)` as `f64`, for quick plotting.
pub fn counts_f64(table: &GrowthTable) -> Vec<f64> {
    table
        .counts
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn table(v: &[u64]) -> GrowthTable {
        GrowthTable::new(LanguageDescriptor::new("t", &[]), big(v), false)
    }

    #[test]
    fn threshold_small_counts() {
        let t = count_threshold_words(3, 3, &CountOptions::default()).unwrap();
        assert_eq!(t.counts, big(&[3, 6, 12]));
        assert!(!t.truncated);
        let t = count_threshold_words(3, 0, &CountOptions::default()).unwrap();
        assert!(t.counts.is_empty());
    }

    #[test]
    fn estimates() {
        let s = growth_estimate(&table(&[3, 6, 12])).unwrap();
        assert_eq!(table(&[3, 6, 12]).ratios, vec!["2.000000", "2.000000"]);
        assert_eq!(s.last_ratio.as_deref(), Some("2.000000"));
        assert!(s.submultiplicative_violations.is_empty());
        let t = table(&[1, 1, 1]);
        assert!(t.kth_roots.iter().all(|r| r == "1.000000"));
        assert!(growth_estimate(&table(&[])).is_err());
        assert_eq!(kth_root_decimal(&BigUint::from(2u8), 2), "1.414213");
    }

    #[test]
    fn flags_non_submultiplicative() {
        let s = growth_estimate(&table(&[2, 5])).unwrap();
        assert_eq!(s.submultiplicative_violations, vec![(1, 1)]);
    }

    #[test]
    fn lower_bounds() {
        let b = theorem2_lower_bound(33, 2176).unwrap();
        assert_eq!((b.base, b.divisor), (2, 2176));
        assert!((b.value - 2.0).abs() < 1e-12);
        let b = theorem2_lower_bound(27, 0).unwrap();
        assert_eq!((b.base, b.divisor), (4, 29484));
        assert_eq!(b.formula, "4^(k/29484)");
        assert!(theorem2_lower_bound(26, 1).is_err());
    }

    #[test]
    fn undeclared_closure_is_rejected() {
        let lang = Predicate {
            name: "all".into(),
            alphabet: 3,
            closure: None,
            test: |_: &[Letter]| true,
        };
        assert!(matches!(
            count_language(&lang, 2, Exec::Sequential),
            Err(Error::UndeclaredClosure)
        ));
    }

    #[test]
    fn all_words_both_paths() {
        for closure in [Closure::PrefixClosed, Closure::Arbitrary] {
            let lang = Predicate {
                name: "all".into(),
                alphabet: 3,
                closure: Some(closure),
                test: |_: &[Letter]| true,
            };
            let t = count_language(&lang, 4, Exec::Sequential).unwrap();
            assert_eq!(t.counts, big(&[3, 9, 27, 81]));
        }
    }

    #[test]
    fn csv_layout() {
        let csv = table(&[3, 6]).to_csv();
        assert_eq!(csv, "k,count,ratio,kth_root\n1,3,,3.000000\n2,6,2.000000,2.449489\n");
    }

    #[test]
    fn budget_truncates_deterministically() {
        let full = count_threshold_words(3, 14, &CountOptions::default()).unwrap();
        let nodes: u64 = 1 + full.counts[..10].iter().map(|c| c.to_u64().unwrap()).sum::<u64>();
        let opts = CountOptions {
            budget: Some(nodes),
            ..CountOptions::default()
        };
        for exec in [Exec::Sequential, Exec::Parallel] {
            let t = count_threshold_words(3, 14, &CountOptions { exec, ..opts }).unwrap();
            assert!(t.truncated);
            assert_eq!(t.counts, full.counts[..10].to_vec());
        }
    }
}
