//! Carpi's reduction: `ψ_n`-kernel repetitions over `A_m` and the uniform
//! morphism `f_n : A_m* → B*`.
//!
//! `ψ_n(v) = φ_n(f_n(v))` is never materialized. Its kernel is decided by
//! letter counts: `v ∈ ker ψ_n` iff every `|v|_a` is divisible by 4. The
//! morphism itself is external data loaded into a [`MorphismTable`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pansiot;
use crate::words::{
    find_forbidden_factor, repetition_threshold, Letter, RepetitionKind, RepetitionReport, Word,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CarpiParams {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    pub image_length: usize,
}

/// Smallest order covered by the exponential-growth constructions.
pub const MIN_THEOREM_ORDER: usize = 27;

impl CarpiParams {
    /// `m = ⌊(n-3)/6⌋`, `ℓ = ⌊n/2⌋`, image length `(n-1)(ℓ+1)`. Orders
    /// `9 <= n < 27` are accepted; see [`CarpiParams::warning`].
    pub fn new(n: usize) -> Result<Self> {
        if n < 9 {
            return Err(Error::OutOfRange {
                what: "Carpi order n",
                min: 9,
                got: n as u64,
            });
        }
        let ell = n / 2;
        Ok(CarpiParams {
            n,
            m: (n - 3) / 6,
            ell,
            image_length: (n - 1) * (ell + 1),
        })
    }

    pub fn below_theorem_range(&self) -> bool {
        self.n < MIN_THEOREM_ORDER
    }

    pub fn warning(&self) -> Option<String> {
        self.below_theorem_range().then(|| {
            format!(
                "n = {} is below {MIN_THEOREM_ORDER}; the short-stabilizer guarantee does not apply",
                self.n
            )
        })
    }
}

pub fn params(n: usize) -> Result<CarpiParams> {
    CarpiParams::new(n)
}

/// Every letter count divisible by 4.
pub fn in_psi_kernel(v: &[Letter]) -> bool {
    let mut counts: HashMap<Letter, usize> = HashMap::new();
    for &a in v {
        *counts.entry(a).or_insert(0) += 1;
    }
    counts.values().all(|c| c % 4 == 0)
}

/// Dense ids of prefix letter counts mod 4: `ids[s] == ids[e]` iff
/// `v[s..e]` lies in the `ψ`-kernel.
pub fn kernel_class_ids(v: &[Letter]) -> Vec<u32> {
    let alphabet = v.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u8; alphabet];
    let mut seen: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut ids = Vec::with_capacity(v.len() + 1);
    let mut push = |counts: &Vec<u8>, ids: &mut Vec<u32>| {
        let next = seen.len() as u32;
        ids.push(*seen.entry(counts.clone()).or_insert(next));
    };
    push(&counts, &mut ids);
    for &a in v {
        let c = &mut counts[a as usize - 1];
        *c = (*c + 1) % 4;
        push(&counts, &mut ids);
    }
    ids
}

/// Periods `p` of `v` whose length-`p` prefix is in the `ψ`-kernel.
pub fn kernel_periods(v: &[Letter]) -> Vec<usize> {
    let ids = kernel_class_ids(v);
    (1..=v.len())
        .filter(|&p| ids[0] == ids[p] && crate::words::is_period(v, p))
        .collect()
}

/// The length condition `(n-1)(|v|+1) >= nq - slack` of a `ψ_n`-kernel
/// repetition; the defining value of `slack` is 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PsiInequality {
    pub n: usize,
    pub slack: i64,
}

impl PsiInequality {
    pub fn new(n: usize) -> Self {
        PsiInequality { n, slack: 3 }
    }

    pub fn with_slack(n: usize, slack: i64) -> Self {
        PsiInequality { n, slack }
    }

    pub fn holds(&self, len: usize, period: usize) -> bool {
        let n = self.n as i128;
        (n - 1) * (len as i128 + 1) >= n * period as i128 - self.slack as i128
    }

    /// Shortest length `>= period` for which the inequality holds.
    pub fn min_len(&self, period: usize) -> usize {
        let n = self.n as i128;
        let rhs = n * period as i128 - self.slack as i128;
        // len >= ceil(rhs / (n-1)) - 1
        let need = rhs.div_euclid(n - 1) + i128::from(rhs.rem_euclid(n - 1) != 0) - 1;
        if need <= period as i128 {
            period
        } else {
            need as usize
        }
    }
}

/// Leftmost-shortest `ψ_n`-kernel repetition among the factors of `w`.
pub fn find_psi_kernel_repetition(n: usize, w: &[Letter]) -> Option<RepetitionReport> {
    find_psi_kernel_repetition_with(PsiInequality::new(n), w)
}

/// A factor with period `q` has all its length-`q` windows with equal letter
/// counts, so only the first window of each candidate is tested.
pub fn find_psi_kernel_repetition_with(
    ineq: PsiInequality,
    w: &[Letter],
) -> Option<RepetitionReport> {
    let len = w.len();
    let ids = kernel_class_ids(w);
    let mut best: Vec<Option<(usize, usize)>> = vec![None; len];
    let mut run = vec![0usize; len + 1];
    // Kernel windows have length divisible by 4.
    for q in (4..=len).step_by(4) {
        let min_len = ineq.min_len(q);
        run[len - q] = 0;
        for s in (0..=len - q).rev() {
            if s + q < len {
                run[s] = if w[s] == w[s + q] { run[s + 1] + 1 } else { 0 };
            }
            if min_len <= q + run[s] && ids[s] == ids[s + q] {
                match best[s] {
                    Some((l, _)) if l <= min_len => {}
                    _ => best[s] = Some((min_len, q)),
                }
            }
        }
    }
    best.iter().enumerate().find_map(|(s, b)| {
        b.map(|(l, q)| RepetitionReport::new(s + 1, l, q, RepetitionKind::PsiKernel))
    })
}

/// Incremental `ψ_n`-kernel repetition test for depth-first search: after
/// each push only the suffixes ending at the new letter are inspected.
#[derive(Clone, Debug)]
pub struct PsiSuffixScanner {
    ineq: PsiInequality,
    alphabet: usize,
    letters: Vec<Letter>,
    // Prefix counts mod 4, one row per prefix length.
    counts: Vec<Vec<u8>>,
    runs: Vec<Vec<u32>>,
}

impl PsiSuffixScanner {
    pub fn new(ineq: PsiInequality, alphabet: usize) -> Self {
        PsiSuffixScanner {
            ineq,
            alphabet,
            letters: Vec::new(),
            counts: vec![vec![0; alphabet]],
            runs: Vec::new(),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Append `a`; returns `true` if a suffix is now a `ψ_n`-kernel repetition.
    pub fn push(&mut self, a: Letter) -> bool {
        let i = self.letters.len();
        self.letters.push(a);
        let mut row = self.counts[i].clone();
        row[a as usize - 1] = (row[a as usize - 1] + 1) % 4;
        self.counts.push(row);
        let mut runs = Vec::with_capacity(i);
        let mut violated = false;
        for p in 1..=i {
            let run = if self.letters[i - p] == a {
                if p < i {
                    self.runs[i - 1][p - 1] + 1
                } else {
                    1
                }
            } else {
                0
            };
            runs.push(run);
        }
        for q in (4..=i + 1).step_by(4) {
            let run = if q <= i { runs[q - 1] as usize } else { 0 };
            if self.counts[i + 1 - q] == self.counts[i + 1] && self.ineq.holds(q + run, q) {
                violated = true;
                break;
            }
        }
        self.runs.push(runs);
        violated
    }

    pub fn pop(&mut self) {
        self.letters.pop();
        self.counts.pop();
        self.runs.pop();
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }
}

/// A uniform morphism `A_m* → B*` standing in for Carpi's `f_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismTable {
    n: usize,
    image_length: usize,
    images: Vec<Word>,
}

#[derive(Deserialize, Serialize)]
struct TableFile {
    n: usize,
    m: usize,
    images: BTreeMap<String, String>,
}

impl MorphismTable {
    /// A table for a genuine order `n`: `m` images of length `(n-1)(ℓ+1)`.
    pub fn new(params: &CarpiParams, images: Vec<Word>) -> Result<Self> {
        if images.len() != params.m {
            return Err(Error::InvalidTable(format!(
                "expected {} images for n = {}, got {}",
                params.m,
                params.n,
                images.len()
            )));
        }
        let table = Self::uniform(params.n, images)?;
        if table.image_length != params.image_length {
            return Err(Error::InvalidTable(format!(
                "images must have length (n-1)(l+1) = {}, got {}",
                params.image_length, table.image_length
            )));
        }
        Ok(table)
    }

    /// Any nonempty uniform binary table; used for small test analogues
    /// where `n` has no Carpi parameters.
    pub fn uniform(n: usize, images: Vec<Word>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::InvalidTable("no images".into()))?;
        let image_length = first.len();
        if image_length == 0 {
            return Err(Error::InvalidTable("images must be nonempty".into()));
        }
        for (i, img) in images.iter().enumerate() {
            if img.alphabet() != 2 {
                return Err(Error::InvalidTable(format!("image of {} is not binary", i + 1)));
            }
            if img.len() != image_length {
                return Err(Error::InvalidTable(format!(
                    "image of {} has length {}, expected {image_length}",
                    i + 1,
                    img.len()
                )));
            }
        }
        Ok(MorphismTable {
            n,
            image_length,
            images,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TableFile = serde_json::from_str(text)?;
        let params = CarpiParams::new(raw.n)?;
        if raw.m != params.m {
            return Err(Error::InvalidTable(format!(
                "m = {} does not match floor((n-3)/6) = {}",
                raw.m, params.m
            )));
        }
        let mut images = Vec::with_capacity(params.m);
        for a in 1..=params.m {
            let text = raw
                .images
                .get(&a.to_string())
                .ok_or_else(|| Error::InvalidTable(format!("missing image for letter {a}")))?;
            images.push(
                Word::parse_binary(text).map_err(|e| Error::InvalidTable(e.to_string()))?,
            );
        }
        if let Some(extra) = raw
            .images
            .keys()
            .find(|k| k.parse::<usize>().map_or(true, |a| a == 0 || a > params.m))
        {
            return Err(Error::InvalidTable(format!("unexpected letter {extra:?}")));
        }
        Self::new(&params, images)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            n: self.n,
            m: self.images.len(),
            images: self
                .images
                .iter()
                .enumerate()
                .map(|(i, w)| ((i + 1).to_string(), w.to_binary_string()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("table serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.images.len()
    }

    pub fn image_length(&self) -> usize {
        self.image_length
    }

    pub fn image(&self, a: Letter) -> Option<&Word> {
        self.images.get((a as usize).checked_sub(1)?)
    }
}

pub fn apply_morphism(table: &MorphismTable, w: &[Letter]) -> Result<Word> {
    let mut out = Vec::with_capacity(w.len() * table.image_length);
    for &a in w {
        let img = table.image(a).ok_or(Error::MissingImage(a as u32))?;
        out.extend_from_slice(img.letters());
    }
    Ok(Word::from_raw(out, 2))
}

/// Short stabilizing factors of `f_n(w)`: a report here means the
/// short-stabilizer guarantee fails on this input.
pub fn check_carpi_short(table: &MorphismTable, w: &[Letter]) -> Result<Option<RepetitionReport>> {
    let image = apply_morphism(table, w)?;
    pansiot::find_short_stabilizing(table.n, &image)
}

/// `γ_n(f_n(w))`. With `verify`, `w` must be free of `ψ_n`-kernel
/// repetitions and the output is checked to be `RT(n)⁺`-free.
pub fn threshold_pipeline(table: &MorphismTable, w: &[Letter], verify: bool) -> Result<Word> {
    if verify {
        if let Some(report) = find_psi_kernel_repetition(table.n, w) {
            return Err(Error::PsiKernelInput(report));
        }
    }
    let image = apply_morphism(table, w)?;
    let out = pansiot::gamma(table.n, &image)?;
    if verify {
        let rt = repetition_threshold(table.n)?;
        if let Some(report) = find_forbidden_factor(out.letters(), rt, true) {
            return Err(Error::NotThresholdFree(report));
        }
    }
    Ok(out)
}

/// Result of checking the kernel-lifting property on one input.
#[derive(Clone, Debug, Serialize)]
pub struct KernelLiftOutcome {
    pub binary_kernel: Option<RepetitionReport>,
    pub psi_kernel: Option<RepetitionReport>,
}

impl KernelLiftOutcome {
    /// A kernel repetition in `f_n(w)` must come with a `ψ_n`-kernel
    /// repetition in `w`.
    pub fn consistent(&self) -> bool {
        self.binary_kernel.is_none() || self.psi_kernel.is_some()
    }
}

pub fn check_kernel_lift(table: &MorphismTable, w: &[Letter]) -> Result<KernelLiftOutcome> {
    let image = apply_morphism(table, w)?;
    Ok(KernelLiftOutcome {
        binary_kernel: pansiot::find_kernel_repetition(table.n, &image)?,
        psi_kernel: find_psi_kernel_repetition(table.n, w),
    })
}
