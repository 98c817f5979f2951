//! Once there are enough users relative to the code length, averaging the
//! coalition's codewords, adding Gaussian noise, and rounding produces a
//! feasible word while keeping any single member's influence differentially
//! private. That combination is exactly what a fingerprinting code is
//! supposed to rule out, so its existence upper-bounds how long a code with
//! so many users can be.

use fpcode::pirates::{averaging_attack_user_count, run_averaging_attack_experiment};

fn main() {
    for d in [256, 1024] {
        let n = averaging_attack_user_count(d);
        println!("code length {d}: self-consistent user count n = {n}");
    }

    let report = run_averaging_attack_experiment(1024, None, 200, 99).unwrap();
    println!(
        "\nd = {}, n = {}, delta = {:.6}, per-column noise sigma = {:.4}",
        report.d, report.n, report.delta, report.sigma
    );
    println!(
        "feasible for the drop-one coalition: {:.3} [{:.3}, {:.3}] over {} trials",
        report.feasible_drop_one.rate,
        report.feasible_drop_one.wilson_low,
        report.feasible_drop_one.wilson_high,
        report.trials
    );
    println!("feasible for the full coalition:     {:.3}", report.feasible_full.rate);
    println!(
        "privacy transfer: drop-one rate <= e * full rate + delta = {:.3}",
        report.dp_bound_drop_one
    );
}
