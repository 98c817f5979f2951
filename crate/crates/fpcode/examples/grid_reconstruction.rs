//! Grid search shrugs off corrupted answers. A third of the subset-sum
//! answers are adversarial garbage, yet any grid point matching more than
//! 5/6 of them within the 2 alpha window lands close to the hidden vector.
//! With a binary secret the search space is the binary grid, small enough to
//! enumerate exhaustively.

use fpcode::reconstruct::{
    avg_error, build_shattered_instance, grid_fit_fraction, grid_reconstruct,
    random_subset_queries, subset_answers, GridParams,
};
use fpcode::rng::Stream;

fn main() {
    let n = 11;
    let params = GridParams {
        alpha: 0.05,
        alpha_prime: 0.5,
        m: 1, // binary secret, binary grid
        n,
        kappa: 0.25,
        query_constant: 8.0,
    };
    let queries_wanted = params.min_queries() * (1.0_f64 / params.alpha).log2().ceil() as usize;
    let mut stream = Stream::seeded(2718);
    let (db, _) = build_shattered_instance(n).unwrap();
    let queries = random_subset_queries(n, queries_wanted, &mut stream);
    let s: Vec<f64> = (0..n).map(|i| ((0b10010110011 >> i) & 1) as f64).collect();

    let mut answers = subset_answers(&db, &queries, &s).unwrap();
    let corrupted = answers.len() / 3;
    for (k, a) in answers.iter_mut().enumerate().take(corrupted) {
        // Past the alpha promise but inside the 2 alpha acceptance window,
        // the worst lie that still lets the truth fit.
        *a += if k % 2 == 0 { 1.9 } else { -1.9 } * params.alpha;
    }
    println!(
        "{} queries, {corrupted} corrupted; grid has {} points",
        answers.len(),
        params.search_space().unwrap()
    );

    let t = grid_reconstruct(&db, &queries, &answers, &params, 9).unwrap();
    let fit = grid_fit_fraction(&db, &queries, &answers, &t, params.alpha).unwrap();
    println!("witness fits {:.1}% of answers (needs > 5/6)", fit * 100.0);
    println!("hidden    {:?}", s.iter().map(|v| *v as u8).collect::<Vec<_>>());
    println!("recovered {:?}", t.iter().map(|v| *v as u8).collect::<Vec<_>>());
    println!("average error {:.4} (target {})", avg_error(&t, &s), params.alpha_prime);
}
