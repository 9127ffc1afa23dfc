//! Grounded extensions of a few small abstract frameworks.

use star_core::reasoner::grounded_extension;

type Framework = (&'static str, usize, &'static [(u32, u32)]);

fn main() {
    let frameworks: [Framework; 4] = [
        ("chain a <- b <- c", 3, &[(1, 0), (2, 1)]),
        ("mutual attack", 2, &[(0, 1), (1, 0)]),
        ("self attacker", 2, &[(0, 0), (0, 1)]),
        ("odd cycle with a defender", 4, &[(0, 1), (1, 2), (2, 0), (3, 0)]),
    ];
    for (name, n, attacks) in frameworks {
        let ext = grounded_extension(n, attacks.iter().copied());
        println!("{name}: {ext:?}");
    }
}
