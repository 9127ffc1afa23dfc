//! Parses a domain with a mistake in it, shows the diagnostics, then prints
//! the corrected domain in canonical form.

use star_core::parser::{format_domain, parse_domain};

const BROKEN: &str = "session(s(0),[],all).
session(s(1),[q(1)],all).
s(1) :: call(bob, mary, phone1) at 6.
c(1) :: call(X, Y, P) causes is_ringing(P)
q(1) ?? is_ringing(phone1) at 8.
";

fn main() {
    let parsed = parse_domain(BROKEN);
    for d in &parsed.diagnostics {
        println!("{}:{}: {}", d.line, d.column, d.message);
        if let Some(hint) = &d.hint {
            println!("    hint: {hint}");
        }
    }

    let fixed = BROKEN.replace("is_ringing(P)\n", "is_ringing(P).\n");
    let domain = parse_domain(&fixed).into_result().expect("the fixed domain parses");
    print!("{}", format_domain(&domain));
}
