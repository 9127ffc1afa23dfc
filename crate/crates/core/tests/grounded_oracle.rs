//! The labelling fixpoint against brute force: the grounded extension is the
//! least complete extension, found here by enumerating every subset.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use star_core::reasoner::grounded_extension;

fn attacks_set(attacks: &[(u32, u32)], set: u32, target: u32) -> bool {
    attacks.iter().any(|&(a, b)| b == target && set & (1 << a) != 0)
}

fn defends(attacks: &[(u32, u32)], set: u32, arg: u32) -> bool {
    attacks.iter().filter(|&&(_, b)| b == arg).all(|&(a, _)| attacks_set(attacks, set, a))
}

fn least_complete(n: u32, attacks: &[(u32, u32)]) -> BTreeSet<u32> {
    let mut complete = Vec::new();
    for set in 0u32..(1 << n) {
        let conflict_free = attacks.iter().all(|&(a, b)| !(set & (1 << a) != 0 && set & (1 << b) != 0));
        if !conflict_free {
            continue;
        }
        let fixed = (0..n).all(|x| (set & (1 << x) != 0) == defends(attacks, set, x));
        if fixed {
            complete.push(set);
        }
    }
    let least = complete.iter().copied().min_by_key(|s| s.count_ones()).expect("a complete extension exists");
    assert!(complete.iter().all(|&s| s & least == least), "least complete extension is contained in all others");
    (0..n).filter(|x| least & (1 << x) != 0).collect()
}

fn random_af(rng: &mut StdRng) -> (u32, Vec<(u32, u32)>) {
    let n = rng.gen_range(0..=10u32);
    let density: f64 = rng.gen_range(0.0..0.5);
    let mut attacks = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(density) {
                attacks.push((a, b));
            }
        }
    }
    (n, attacks)
}

#[test]
fn fixpoint_matches_enumeration_on_random_frameworks() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for case in 0..100 {
        let (n, attacks) = random_af(&mut rng);
        let expected = least_complete(n, &attacks);
        let got = grounded_extension(n as usize, attacks.iter().copied());
        assert_eq!(got, expected, "case {case}: n={n} attacks={attacks:?}");
    }
}

#[test]
fn textbook_frameworks() {
    // a <- b <- c: c is unattacked, it defends a.
    assert_eq!(grounded_extension(3, [(1, 0), (2, 1)]), BTreeSet::from([0, 2]));
    // mutual attack: nothing is sceptically accepted.
    assert_eq!(grounded_extension(2, [(0, 1), (1, 0)]), BTreeSet::new());
    // self-attack
    assert_eq!(grounded_extension(1, [(0, 0)]), BTreeSet::new());
}
