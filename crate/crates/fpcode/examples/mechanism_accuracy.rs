//! How accurate are the baseline mechanisms across the whole query family?
//! The closed-form probability that every noisy answer lands within 1/3
//! separates the regimes the re-identification experiments probe: few users
//! on a long code (noise drowns the answers) versus many users on a short
//! code (accurate and private at once).

use fpcode::mechanisms::{
    answer, gaussian_sigma, whole_family_accuracy_probability, Mechanism,
};
use fpcode::rng::Stream;
use fpcode::tardos::gen;

fn main() {
    let d = 1024;
    println!("whole-family accuracy probability, d = {d} counting queries:");
    println!("{:>8} {:>22} {:>22}", "users", "laplace eps=1", "gaussian eps=1 delta=0.05");
    for n in [100, 400, 1600, 6400] {
        let lap = whole_family_accuracy_probability(&Mechanism::Laplace { eps: 1.0 }, d, n);
        let gau = whole_family_accuracy_probability(
            &Mechanism::Gaussian { eps: 1.0, delta: 0.05 },
            d,
            n,
        );
        println!("{n:>8} {lap:>22.6} {gau:>22.6}");
    }
    println!(
        "\ngaussian noise scale at n = 1600: sigma = {:.4}",
        gaussian_sigma(d, 1600, 1.0, 0.05)
    );

    // Empirical spot check on a real codebook database.
    let mut stream = Stream::seeded(12);
    let (cb, _) = gen(4, 0.2, &mut stream).unwrap();
    let db = cb.as_database();
    let mechanism = Mechanism::Gaussian { eps: 1.0, delta: 0.05 };
    let trials = 200;
    let mut within = 0;
    for t in 0..trials {
        let mut s = Stream::for_trial(5150, t);
        let noisy = answer(&db, &mechanism, &mut s).unwrap();
        let exact = answer(&db, &Mechanism::Exact, &mut s).unwrap();
        if noisy.iter().zip(&exact).all(|(a, e)| (a - e).abs() <= 1.0 / 3.0) {
            within += 1;
        }
    }
    let predicted = whole_family_accuracy_probability(&mechanism, db.width(), db.n_rows());
    println!(
        "\nempirical whole-family accuracy on a {}x{} database: {:.3} (predicted {:.3})",
        db.n_rows(),
        db.width(),
        within as f64 / trials as f64,
        predicted
    );
}
