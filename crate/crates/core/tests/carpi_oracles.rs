use dejean_core::carpi::{
    apply_morphism, check_kernel_lift, find_psi_kernel_repetition, find_psi_kernel_repetition_with,
    in_psi_kernel, params, threshold_pipeline, MorphismTable, PsiInequality, PsiSuffixScanner,
};
use dejean_core::pansiot::scan_prop32;
use dejean_core::{Letter, RepetitionKind, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn counts_divisible_by_four(v: &[Letter]) -> bool {
    (1..=9).all(|a| v.iter().filter(|&&b| b == a).count() % 4 == 0)
}

/// Some period `q` of `w[i..j]` with any length-`q` window in the kernel and
/// the length inequality.
fn brute_psi(ineq: PsiInequality, v: &[Letter]) -> bool {
    let l = v.len();
    (1..=l).any(|q| {
        v[q..].iter().zip(v).all(|(a, b)| a == b)
            && ineq.holds(l, q)
            && (0..=l - q).any(|s| counts_divisible_by_four(&v[s..s + q]))
    })
}

fn for_all_words(alphabet: Letter, max_len: usize, f: &mut impl FnMut(&[Letter])) {
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

#[test]
fn prefix_window_test_matches_all_windows() {
    for ineq in [PsiInequality::new(27), PsiInequality::with_slack(27, 30)] {
        for_all_words(4, 10, &mut |w| {
            let fast = find_psi_kernel_repetition_with(ineq, w);
            let brute = (0..w.len()).any(|i| (i + 1..=w.len()).any(|j| brute_psi(ineq, &w[i..j])));
            assert_eq!(fast.is_some(), brute, "{w:?}");
            if let Some(r) = fast {
                assert_eq!(r.kind, RepetitionKind::PsiKernel);
                assert!(brute_psi(ineq, r.factor(w)));
            }
        });
    }
}

#[test]
fn suffix_scanner_agrees_with_full_search() {
    let ineq = PsiInequality::with_slack(27, 30);
    fn go(scanner: &mut PsiSuffixScanner, seen: bool, ineq: PsiInequality, depth: usize) {
        assert_eq!(seen, find_psi_kernel_repetition_with(ineq, scanner.letters()).is_some());
        if depth == 0 {
            return;
        }
        for a in 1..=4 {
            let hit = scanner.push(a);
            go(scanner, seen || hit, ineq, depth - 1);
            scanner.pop();
        }
    }
    go(&mut PsiSuffixScanner::new(ineq, 4), false, ineq, 9);
}

#[test]
fn kernel_closed_under_concatenation_and_rotation() {
    let mut kernel = Vec::new();
    for_all_words(4, 8, &mut |w| {
        let k = in_psi_kernel(w);
        assert_eq!(k, counts_divisible_by_four(w));
        for r in 0..w.len() {
            let rotated = [&w[r..], &w[..r]].concat();
            assert_eq!(in_psi_kernel(&rotated), k);
        }
        if k && w.len() <= 8 {
            kernel.push(w.to_vec());
        }
    });
    for u in &kernel {
        for v in kernel.iter().step_by(7) {
            assert!(in_psi_kernel(&[u.as_slice(), v.as_slice()].concat()));
        }
    }
}

fn random_table(n: usize, seed: u64) -> MorphismTable {
    let p = params(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = (0..p.m)
        .map(|_| {
            let bits: String = (0..p.image_length)
                .map(|_| if rng.gen_bool(0.5) { '1' } else { '0' })
                .collect();
            Word::parse_binary(&bits).unwrap()
        })
        .collect();
    MorphismTable::new(&p, images).unwrap()
}

#[test]
fn pipeline_output_length_is_uniform() {
    for n in [27, 33, 40] {
        let table = random_table(n, n as u64);
        let p = params(n).unwrap();
        assert_eq!(table.image_length(), (n - 1) * (p.ell + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in 0..=12 {
            let w: Vec<Letter> = (0..len).map(|_| rng.gen_range(1..=p.m as Letter)).collect();
            let out = threshold_pipeline(&table, &w, false).unwrap();
            assert_eq!(out.len(), table.image_length() * len);
            assert_eq!(out.alphabet(), n);
        }
    }
}

#[test]
fn table_json_round_trip_and_validation() {
    let table = random_table(33, 1);
    let again = MorphismTable::from_json(&table.to_json()).unwrap();
    assert_eq!(again, table);
    let mut doc: serde_json::Value = serde_json::from_str(&table.to_json()).unwrap();
    doc["images"]["1"] = serde_json::Value::String("01".into());
    assert!(MorphismTable::from_json(&doc.to_string()).is_err());
    doc["m"] = serde_json::json!(6);
    assert!(MorphismTable::from_json(&doc.to_string()).is_err());
}

/// With a supplied `f_n` table: a kernel repetition in `f_n(w)` must come
/// from a `ψ_n`-kernel repetition in `w`.
#[test]
fn kernel_lift_with_supplied_table() {
    let Ok(path) = std::env::var("DEJEAN_TABLE") else {
        eprintln!("DEJEAN_TABLE not set; skipping the supplied-table lift check");
        return;
    };
    let table = MorphismTable::load(path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let len = rng.gen_range(1..=40);
        let w: Vec<Letter> = (0..len).map(|_| rng.gen_range(1..=table.m() as Letter)).collect();
        let outcome = check_kernel_lift(&table, &w).unwrap();
        assert!(outcome.consistent(), "{w:?}");
        let image = apply_morphism(&table, &w).unwrap();
        if let Some(r) = scan_prop32(table.n(), &image).unwrap() {
            if r.kind == RepetitionKind::Kernel {
                assert!(find_psi_kernel_repetition(table.n(), &w).is_some());
            }
        }
    }
}

proptest! {
    #[test]
    fn periodic_kernel_blocks_are_found(block in prop::collection::vec(1u16..=4, 1..6), reps in 4usize..8) {
        // Four copies of any block put every count in the kernel.
        let x: Vec<Letter> = block.iter().cycle().take(block.len() * 4).copied().collect();
        let w: Vec<Letter> = x.iter().cycle().take(x.len() * reps / 2).copied().collect();
        let ineq = PsiInequality::new(27);
        let found = find_psi_kernel_repetition(27, &w);
        let brute = (0..w.len()).any(|i| (i + 1..=w.len()).any(|j| brute_psi(ineq, &w[i..j])));
        prop_assert_eq!(found.is_some(), brute);
    }
}
