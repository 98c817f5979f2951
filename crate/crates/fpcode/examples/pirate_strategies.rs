//! Four ways a coalition can forge a combined word, and what the tracer does
//! to each. Every strategy respects the constraint that marked columns (where
//! the coalition agrees) keep their shared bit, except the averaging
//! strategy, whose noise may violate it.

use fpcode::codebook::{feasible, Coalition};
use fpcode::pirates::{
    pirate_gaussian_average, pirate_interleave, pirate_majority, pirate_row_copy,
};
use fpcode::rng::Stream;
use fpcode::tardos::{gen, trace};

fn main() {
    let (n, sec) = (10, 0.05);
    let mut stream = Stream::seeded(23);
    let (cb, secret) = gen(n, sec, &mut stream).unwrap();
    // Everyone except user 10 colludes; the tracer must never accuse them.
    let coalition = Coalition::all_but(n, 9);
    println!("coalition: users 1..{} (user {n} innocent)\n", n - 1);

    let words = [
        ("majority", pirate_majority(&cb, &coalition)),
        ("row-copy", pirate_row_copy(&cb, &coalition, &mut stream)),
        ("interleave", pirate_interleave(&cb, &coalition, &mut stream)),
        (
            "gaussian-average",
            pirate_gaussian_average(&cb, &coalition, 0.05, &mut stream).unwrap(),
        ),
    ];
    println!("{:<18} {:>9} {:>8}  accused", "strategy", "ones", "feasible");
    for (name, word) in &words {
        let accused = trace(&secret, &cb, word);
        println!(
            "{:<18} {:>9} {:>8}  {}",
            name,
            word.count_ones(),
            feasible(&cb, &coalition, word, 0.0),
            match accused {
                Some(u) => format!("user {}", u + 1),
                None => "nobody".into(),
            }
        );
        assert_ne!(accused, Some(9), "innocent user accused");
    }
}
