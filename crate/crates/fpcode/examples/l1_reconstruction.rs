//! Decode a hidden vector by minimizing the summed absolute misfit to the
//! answers, reformulated as a linear program with one slack variable per
//! query and solved by the bundled simplex. With exact answers to enough
//! random subset queries the recovery is perfect; with noisy answers the
//! minimizer still beats the ground truth on the objective it optimizes.

use fpcode::reconstruct::{
    avg_error, build_shattered_instance, l1_objective, l1_reconstruct, random_subset_queries,
    subset_answers,
};
use fpcode::rng::Stream;

fn main() {
    let n = 16;
    let mut stream = Stream::seeded(1999);
    let (db, _) = build_shattered_instance(n).unwrap();
    let queries = random_subset_queries(n, 4 * n, &mut stream);
    let s: Vec<f64> = (0..n).map(|_| stream.uniform01()).collect();

    // Exact answers: unique minimizer at the hidden vector.
    let answers = subset_answers(&db, &queries, &s).unwrap();
    let res = l1_reconstruct(&db, &queries, &answers).unwrap();
    println!(
        "exact answers: objective {:.2e}, average error {:.2e}, {} pivots",
        res.objective,
        avg_error(&res.t, &s),
        res.iterations
    );

    // Noisy answers: the recovered point scores at least as well as s.
    let noisy: Vec<f64> = answers.iter().map(|a| a + stream.laplace(0.01)).collect();
    let res = l1_reconstruct(&db, &queries, &noisy).unwrap();
    let at_t = l1_objective(&db, &queries, &noisy, &res.t).unwrap();
    let at_s = l1_objective(&db, &queries, &noisy, &s).unwrap();
    println!(
        "noisy answers: objective at recovery {at_t:.4} <= at truth {at_s:.4}, average error {:.4}",
        avg_error(&res.t, &s)
    );
}
