//! The error-robust code pads the real columns with fake all-zero and
//! all-one columns, then permutes. An adversary who flips a bounded fraction
//! of positions cannot tell real from fake, so most flips are wasted and
//! tracing survives.

use fpcode::codebook::{marked_columns, Coalition};
use fpcode::pirates::{inject_errors, pirate_majority, ErrorMode};
use fpcode::robust::{gen_robust, trace_robust};
use fpcode::rng::Stream;

fn main() {
    let (n, sec) = (8, 0.05);
    let mut stream = Stream::seeded(41);
    let (cb, secret) = gen_robust(n, sec, &mut stream).unwrap();
    println!(
        "robust code for {n} users: {} real + {} fake = {} columns",
        secret.inner().d(),
        cb.len() - secret.inner().d(),
        cb.len()
    );

    let full = Coalition::full(n);
    let word = pirate_majority(&cb, &full);
    println!("clean majority word -> accused {:?}", trace_robust(&secret, &cb, &word).map(|u| u + 1));

    // The tolerated budget is 1/75 of the padded length; flips land on
    // marked columns, the only place they can hurt.
    let budget = cb.len() / 75;
    let marked = marked_columns(&cb, &full);
    println!("marked columns: {} of {}, flip budget {budget}", marked.total(), cb.len());
    let noisy = inject_errors(&word, &cb, &full, budget, ErrorMode::MarkedFirst, &mut stream).unwrap();
    println!(
        "after {budget} marked-column flips -> accused {:?}",
        trace_robust(&secret, &cb, &noisy).map(|u| u + 1)
    );
}
