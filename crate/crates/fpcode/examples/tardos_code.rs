//! Generate a fingerprinting code, let a coalition forge a word, and trace
//! it back. Rerun with a different seed to see the guarantees hold across
//! codebooks.

use fpcode::codebook::Coalition;
use fpcode::pirates::pirate_majority;
use fpcode::rng::Stream;
use fpcode::tardos::{gen, scores, trace, TardosParams};

fn main() {
    let (n, sec) = (10, 0.05);
    let params = TardosParams::new(n, sec).unwrap();
    println!(
        "code for {n} users at failure probability {sec}: {} columns, threshold Z/2 = {:.3}",
        params.d,
        params.z / 2.0
    );

    let mut stream = Stream::seeded(7);
    let (cb, secret) = gen(n, sec, &mut stream).unwrap();

    // A single leaker who redistributes their own codeword is caught.
    let leaker = 3usize;
    let accused = trace(&secret, &cb, cb.row(leaker));
    println!("leaked row of user {} -> accused {:?}", leaker + 1, accused.map(|u| u + 1));

    // The whole coalition votes per column; tracing still names a member.
    let full = Coalition::full(n);
    let word = pirate_majority(&cb, &full);
    let accused = trace(&secret, &cb, &word);
    println!("majority word of all {n} users -> accused {:?}", accused.map(|u| u + 1));

    let s = scores(&secret, &cb, &word);
    let mut ranked: Vec<(usize, f64)> = s.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top scores (threshold {:.3}):", params.z / 2.0);
    for (user, score) in ranked.iter().take(3) {
        println!("  user {:2}  {:10.3}", user + 1, score);
    }
}
