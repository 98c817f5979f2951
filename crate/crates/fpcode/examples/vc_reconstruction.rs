//! Reconstruction from a shattering query family: if every subset-sum answer
//! is within alpha of the truth, any vector consistent with the answers sits
//! within average error 4 alpha of the hidden one. Finding such a vector is
//! a linear-programming feasibility problem.

use fpcode::reconstruct::{avg_error, build_shattered_instance, subset_answers, vc_reconstruct};
use fpcode::rng::Stream;

fn main() {
    let n = 8;
    let alpha = 0.05;
    let (db, queries) = build_shattered_instance(n).unwrap();
    println!("{n} hidden values, {} subset queries, promise alpha = {alpha}", queries.len());

    let mut stream = Stream::seeded(314);
    let s: Vec<f64> = (0..n).map(|_| stream.uniform01()).collect();
    // Adversarial perturbation: push every answer to the edge of the
    // promise, alternating direction by query parity.
    let answers: Vec<f64> = subset_answers(&db, &queries, &s)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(k, a)| if k.count_ones() % 2 == 0 { a + alpha } else { a - alpha })
        .collect();

    let t = vc_reconstruct(&db, &queries, &answers, alpha).unwrap();
    println!("\n{:>4} {:>10} {:>10}", "row", "hidden", "recovered");
    for i in 0..n {
        println!("{:>4} {:>10.4} {:>10.4}", i + 1, s[i], t[i]);
    }
    let err = avg_error(&t, &s);
    println!("\naverage error {err:.4} (guarantee 4 * alpha = {:.2})", 4.0 * alpha);
    assert!(err <= 4.0 * alpha + 1e-9);
}
