use dejean_core::words::{
    find_forbidden_factor, is_period, max_exponent, minimal_period, periods, periods_by_borders,
    SuffixScanner,
};
use dejean_core::{Letter, RationalExponent};
use proptest::prelude::*;

/// Calls `f` on every word over `1..=alphabet` of length `0..=max_len`.
fn for_all_words(alphabet: Letter, max_len: usize, f: &mut impl FnMut(&[Letter])) {
    fn go(w: &mut Vec<Letter>, alphabet: Letter, max_len: usize, f: &mut impl FnMut(&[Letter])) {
        f(w);
        if w.len() == max_len {
            return;
        }
        for a in 1..=alphabet {
            w.push(a);
            go(w, alphabet, max_len, f);
            w.pop();
        }
    }
    go(&mut Vec::new(), alphabet, max_len, f);
}

/// Exponent test with plain fractions: `len / p` against `num / den`.
fn exceeds(len: usize, p: usize, r: (u64, u64), strict: bool) -> bool {
    let lhs = len as u128 * r.1 as u128;
    let rhs = p as u128 * r.0 as u128;
    if strict {
        lhs > rhs
    } else {
        lhs >= rhs
    }
}

/// `a/b` against `c/d` by continued-fraction expansion, no products.
fn cmp_fractions(a: u64, b: u64, c: u64, d: u64) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    let (q1, r1, q2, r2) = (a / b, a % b, c / d, c % d);
    if q1 != q2 {
        return q1.cmp(&q2);
    }
    match (r1, r2) {
        (0, 0) => Equal,
        (0, _) => Less,
        (_, 0) => Greater,
        _ => cmp_fractions(d, r2, b, r1),
    }
}

fn violates(v: &[Letter], r: (u64, u64), strict: bool) -> bool {
    (1..=v.len()).any(|p| v[p..].iter().zip(v).all(|(a, b)| a == b) && exceeds(v.len(), p, r, strict))
}

/// Any factor with some period beating `r`, found by brute force.
fn brute_forbidden(w: &[Letter], r: (u64, u64), strict: bool) -> bool {
    (0..w.len()).any(|i| (i + 1..=w.len()).any(|j| violates(&w[i..j], r, strict)))
}

const BOUNDS: [((u64, u64), bool); 5] = [
    ((7, 4), true),
    ((2, 1), false),
    ((2, 1), true),
    ((3, 2), false),
    ((5, 4), true),
];

#[test]
fn border_periods_match_definition_on_ternary_words() {
    let mut checked = 0u64;
    for_all_words(3, 12, &mut |w| {
        assert_eq!(periods_by_borders(w), periods(w), "{w:?}");
        checked += 1;
    });
    assert_eq!(checked, (0..=12).map(|k| 3u64.pow(k)).sum::<u64>());
}

#[test]
fn incremental_scan_matches_full_scan_on_ternary_words() {
    for (r, strict) in BOUNDS {
        let bound = RationalExponent::new(r.0, r.1).unwrap();
        // Walk the tree with one scanner; a violation stays once it appears.
        fn go(
            scanner: &mut SuffixScanner,
            seen: bool,
            bound: RationalExponent,
            strict: bool,
            max_len: usize,
        ) {
            let full = find_forbidden_factor(scanner.letters(), bound, strict).is_some();
            assert_eq!(seen, full, "{:?} at {bound} strict={strict}", scanner.letters());
            if scanner.len() == max_len {
                return;
            }
            for a in 1..=3 {
                let hit = scanner.push(a);
                if hit {
                    let v = scanner.violation().expect("a violation was signalled");
                    let suffix = v.factor(scanner.letters());
                    assert_eq!(v.start + v.length - 1, scanner.len());
                    assert!(bound.violated_by(suffix.len(), minimal_period(suffix).unwrap(), strict));
                }
                go(scanner, seen || hit, bound, strict, max_len);
                scanner.pop();
            }
        }
        go(&mut SuffixScanner::new(bound, strict), false, bound, strict, 12);
    }
}

#[test]
fn forbidden_factor_matches_brute_force() {
    for (r, strict) in BOUNDS {
        let bound = RationalExponent::new(r.0, r.1).unwrap();
        for_all_words(3, 8, &mut |w| {
            let fast = find_forbidden_factor(w, bound, strict);
            assert_eq!(fast.is_some(), brute_forbidden(w, r, strict), "{w:?}");
            if let Some(rep) = fast {
                let s = rep.start - 1;
                for i in 0..s {
                    assert!(!(i + 1..=w.len()).any(|j| violates(&w[i..j], r, strict)), "{w:?}");
                }
                for j in s + 1..s + rep.length {
                    assert!(!violates(&w[s..j], r, strict), "{w:?}");
                }
                assert!(violates(rep.factor(w), r, strict));
            }
        });
    }
}

fn word(alphabet: Letter, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(1..=alphabet, 1..=max_len)
}

proptest! {
    #[test]
    fn exponent_at_least_one_and_squares_reach_two(w in word(4, 30)) {
        let e = max_exponent(&w).unwrap();
        prop_assert!(e >= RationalExponent::integer(1).unwrap());
        let ww = [w.clone(), w.clone()].concat();
        prop_assert!(max_exponent(&ww).unwrap() >= RationalExponent::integer(2).unwrap());
    }

    #[test]
    fn periods_pass_to_long_factors(w in word(3, 24), i in 0usize..24, j in 0usize..24) {
        let (i, j) = (i.min(w.len()), j.min(w.len()));
        let (i, j) = (i.min(j), i.max(j));
        for p in periods(&w) {
            if j - i >= p {
                prop_assert!(is_period(&w[i..j], p));
            }
        }
    }

    #[test]
    fn free_implies_plus_free(w in word(3, 20), num in 1u64..12, den in 1u64..8) {
        let r = RationalExponent::new(num, den).unwrap();
        if find_forbidden_factor(&w, r, false).is_none() {
            prop_assert!(find_forbidden_factor(&w, r, true).is_none());
        }
    }

    #[test]
    fn exponent_comparison_is_exact(len in 1usize..100_000, p in 1usize..100_000, num in 1u64..1000, den in 1u64..1000) {
        let r = RationalExponent::new(num, den).unwrap();
        let oracle = cmp_fractions(len as u64, p as u64, r.numerator(), r.denominator());
        prop_assert_eq!(r.cmp_ratio(len, p), oracle);
    }

    #[test]
    fn minimal_period_is_least_period(w in word(2, 40)) {
        prop_assert_eq!(minimal_period(&w), periods(&w).first().copied());
    }
}
