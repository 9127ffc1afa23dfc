//! Grounded semantics for abstract argumentation frameworks.

use std::collections::BTreeSet;

/// Computes the grounded extension of the framework with `n` arguments
/// (identified `0..n`) and the given `(attacker, target)` pairs.
///
/// This is the least fixpoint of the characteristic function, obtained by
/// accepting unattacked arguments, rejecting everything they attack, and
/// repeating until nothing changes.
pub fn grounded_extension(n: usize, attacks: impl IntoIterator<Item = (u32, u32)>) -> BTreeSet<u32> {
    let mut attacked_by: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut attacks_out: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pairs: Vec<(u32, u32)> = attacks.into_iter().collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (a, b) in pairs {
        attacks_out[a as usize].push(b);
        attacked_by[b as usize].push(a);
    }

    #[derive(Copy, Clone, PartialEq)]
    enum Label {
        Undecided,
        In,
        Out,
    }
    let mut label = vec![Label::Undecided; n];
    let mut live_attackers: Vec<usize> = attacked_by.iter().map(Vec::len).collect();
    let mut stack: Vec<u32> = (0..n as u32).filter(|&a| live_attackers[a as usize] == 0).collect();
    for &a in &stack {
        label[a as usize] = Label::In;
    }

    while let Some(a) = stack.pop() {
        for &b in &attacks_out[a as usize] {
            if label[b as usize] == Label::Out {
                continue;
            }
            label[b as usize] = Label::Out;
            for &c in &attacks_out[b as usize] {
                let c = c as usize;
                live_attackers[c] -= 1;
                if live_attackers[c] == 0 && label[c] == Label::Undecided {
                    label[c] = Label::In;
                    stack.push(c as u32);
                }
            }
        }
    }

    (0..n as u32).filter(|&a| label[a as usize] == Label::In).collect()
}

/// Grounded extension of a framework whose arguments are built from
/// sub-arguments. `subs[a]` lists the immediate sub-arguments of `a` and
/// `direct` holds only the attacks on an argument's own top; an attack on a
/// sub-argument counts as an attack on everything built on it.
///
/// An argument is accepted once its direct attackers are rejected and its
/// sub-arguments accepted, and rejected once a direct attacker is accepted
/// or a sub-argument rejected. This gives the same extension as
/// [`grounded_extension`] over the closed attack relation without building
/// it, which can be quadratic in the number of arguments.
pub fn grounded_structured(subs: &[&[u32]], direct: impl IntoIterator<Item = (u32, u32)>) -> BTreeSet<u32> {
    let n = subs.len();
    let mut attacks_out: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = vec![0; n];
    let mut pairs: Vec<(u32, u32)> = direct.into_iter().collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (a, b) in pairs {
        attacks_out[a as usize].push(b);
        pending[b as usize] += 1;
    }
    for (a, ss) in subs.iter().enumerate() {
        let mut ss = ss.to_vec();
        ss.sort_unstable();
        ss.dedup();
        pending[a] += ss.len();
        for s in ss {
            parents[s as usize].push(a as u32);
        }
    }

    #[derive(Copy, Clone, PartialEq)]
    enum Label {
        Undecided,
        In,
        Out,
    }
    let mut label = vec![Label::Undecided; n];
    let mut accepted: Vec<u32> = (0..n as u32).filter(|&a| pending[a as usize] == 0).collect();
    for &a in &accepted {
        label[a as usize] = Label::In;
    }
    let mut rejected: Vec<u32> = Vec::new();

    fn settle(pending: &mut [usize], label: &mut [Label], accepted: &mut Vec<u32>, c: u32) {
        let c = c as usize;
        pending[c] -= 1;
        if pending[c] == 0 && label[c] == Label::Undecided {
            label[c] = Label::In;
            accepted.push(c as u32);
        }
    }

    loop {
        if let Some(b) = rejected.pop() {
            for &c in &attacks_out[b as usize] {
                settle(&mut pending, &mut label, &mut accepted, c);
            }
            for &p in &parents[b as usize] {
                if label[p as usize] == Label::Undecided {
                    label[p as usize] = Label::Out;
                    rejected.push(p);
                }
            }
        } else if let Some(a) = accepted.pop() {
            for &b in &attacks_out[a as usize] {
                if label[b as usize] == Label::Undecided {
                    label[b as usize] = Label::Out;
                    rejected.push(b);
                }
            }
            for &p in &parents[a as usize] {
                settle(&mut pending, &mut label, &mut accepted, p);
            }
        } else {
            break;
        }
    }

    (0..n as u32).filter(|&a| label[a as usize] == Label::In).collect()
}

/// True when no member attacks another member.
pub fn is_conflict_free(set: &BTreeSet<u32>, attacks: &[(u32, u32)]) -> bool {
    !attacks.iter().any(|(a, b)| set.contains(a) && set.contains(b))
}

/// True when every attacker of every member is attacked by some member.
pub fn defends_all(set: &BTreeSet<u32>, attacks: &[(u32, u32)]) -> bool {
    let countered: BTreeSet<u32> = attacks.iter().filter(|(a, _)| set.contains(a)).map(|&(_, b)| b).collect();
    attacks.iter().filter(|(_, b)| set.contains(b)).all(|(a, _)| countered.contains(a))
}
