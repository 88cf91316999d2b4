//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use dejean_core::Letter;

/// Images of `g`, written out independently of the library.
pub fn g_letter(a: Letter) -> &'static [[Letter; 3]] {
    match a {
        1 => &[[1, 1, 2]],
        2 => &[[1, 1, 4]],
        3 => &[[1, 1, 3]],
        4 => &[[1, 2, 3], [2, 1, 3]],
        _ => panic!("letter {a} outside A_4"),
    }
}

/// Every word in `g(y)`.
pub fn g_images(y: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::with_capacity(3 * y.len())];
    for &a in y {
        let choices = g_letter(a);
        out = out
            .into_iter()
            .flat_map(|w| {
                choices.iter().map(move |img| {
                    let mut w = w.clone();
                    w.extend_from_slice(img);
                    w
                })
            })
            .collect();
    }
    out
}

/// Factors of length `<= s` of the words in `g^k({1})`, built from the
/// finite iterate `g^(k-1)` (no fixpoint involved).
pub fn iterate_factors(k: u32, s: usize) -> HashSet<Vec<Letter>> {
    if k == 0 {
        return [vec![], vec![1]].into_iter().collect();
    }
    let t = s.div_ceil(3) + 1;
    let mut out = HashSet::new();
    for y in iterate_factors(k - 1, t) {
        for img in g_images(&y) {
            // A factor of g(x) starting in block j sits at offset < 3 of
            // g(x[j..]) truncated to at most t blocks.
            for o in 0..3.min(img.len()) {
                for end in o..=img.len().min(o + s) {
                    out.insert(img[o..end].to_vec());
                }
            }
        }
    }
    out
}

/// Factors of length exactly `s` of the words in `g^k({1})`.
pub fn iterate_windows(k: u32, s: usize) -> BTreeSet<Vec<Letter>> {
    let t = s.div_ceil(3) + 1;
    let mut out = BTreeSet::new();
    for y in iterate_factors(k - 1, t) {
        if 3 * y.len() < s {
            continue;
        }
        for img in g_images(&y) {
            for w in img.windows(s) {
                out.insert(w.to_vec());
            }
        }
    }
    out
}

/// Literal fixpoint: start from the factors of `g³(1)` and close under `g`,
/// keeping words of length `<= s`.
pub fn fixpoint_factors(s: usize) -> BTreeSet<Vec<Letter>> {
    let mut seeds = vec![vec![1 as Letter]];
    for _ in 0..3 {
        seeds = seeds.iter().flat_map(|w| g_images(w)).collect();
    }
    let mut known: BTreeSet<Vec<Letter>> = BTreeSet::new();
    for w in &seeds {
        insert_factors(w, s, &mut known);
    }
    loop {
        let mut next = known.clone();
        for y in &known {
            for img in g_images(y) {
                insert_factors(&img, s, &mut next);
            }
        }
        if next.len() == known.len() {
            return known;
        }
        known = next;
    }
}

fn insert_factors(w: &[Letter], s: usize, out: &mut BTreeSet<Vec<Letter>>) {
    for i in 0..w.len() {
        for j in i + 1..=w.len().min(i + s) {
            out.insert(w[i..j].to_vec());
        }
    }
}

/// Every word of length `0..=max_len` over `1..=alphabet`.
pub fn for_all_words(alphabet: Letter, max_len: usize, f: &mut impl FnMut(&[Letter])) {
    fn go(w: &mut Vec<Letter>, alphabet: Letter, max_len: usize, f: &mut impl FnMut(&[Letter])) {
        f(w);
        if w.len() < max_len {
            for a in 1..=alphabet {
                w.push(a);
                go(w, alphabet, max_len, f);
                w.pop();
            }
        }
    }
    go(&mut Vec::new(), alphabet, max_len, f);
}

pub fn counts_divisible_by_four(v: &[Letter]) -> bool {
    (1..=9).all(|a| v.iter().filter(|&&b| b == a).count() % 4 == 0)
}
