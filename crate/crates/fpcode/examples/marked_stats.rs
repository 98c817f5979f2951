//! Marked columns are where the whole coalition agrees, and the tracing
//! analysis needs plenty of both kinds. Sample codebooks and compare the
//! 0-marked and 1-marked counts against the 5 n^{3/2} ln(n/sec) bound.

use fpcode::codebook::{marked_columns, Coalition};
use fpcode::rng::Stream;
use fpcode::tardos::{gen, marked_count_bound};

fn main() {
    let (n, sec, trials) = (10, 0.05, 20);
    let bound = marked_count_bound(n, sec);
    let full = Coalition::full(n);
    println!("bound m = {bound:.1}\n{:>5} {:>12} {:>12} {:>6}", "trial", "zero-marked", "one-marked", "pass");
    let mut passes = 0;
    for trial in 0..trials {
        let mut stream = Stream::for_trial(2026, trial);
        let (cb, _) = gen(n, sec, &mut stream).unwrap();
        let marked = marked_columns(&cb, &full);
        let pass = marked.zero.len() as f64 >= bound && marked.one.len() as f64 >= bound;
        passes += pass as u32;
        println!(
            "{trial:>5} {:>12} {:>12} {:>6}",
            marked.zero.len(),
            marked.one.len(),
            pass
        );
    }
    println!("\nboth counts above the bound in {passes}/{trials} trials");
}
