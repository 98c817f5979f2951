//! Fingerprinting codes, collusion tracing, and reconstruction attacks on
//! noisy query-answering mechanisms.
//!
//! The library builds collusion-resistant fingerprinting codes, runs pirate
//! strategies against them, and turns the same machinery into privacy
//! attacks: re-identification of individuals from accurate query answers and
//! reconstruction of hidden per-row data from approximate subset sums.
//!
//! Each major capability has a runnable demonstration under `examples/`:
//!
//! | Capability | Example |
//! |---|---|
//! | Generate and trace a fingerprinting code | `cargo run --example tardos_code` |
//! | Error-robust code (fake columns + permutation) | `cargo run --example robust_code` |
//! | Pirate strategies and error injection | `cargo run --example pirate_strategies` |
//! | Marked-column counts vs the lemma bound | `cargo run --example marked_stats` |
//! | Gaussian averaging strategy feasibility | `cargo run --example gaussian_averaging_attack` |
//! | Mechanism accuracy regimes | `cargo run --example mechanism_accuracy` |
//! | Re-identification experiment | `cargo run --example reid_experiment` |
//! | LP reconstruction from a shattering family | `cargo run --example vc_reconstruction` |
//! | Grid search tolerating corrupted answers | `cargo run --example grid_reconstruction` |
//! | l1-minimization decoding | `cargo run --example l1_reconstruction` |
//! | Composed attack on a product database | `cargo run --example composed_attack` |
//!
//! The same functionality is scriptable through the `fpcode` binary
//! (`gen`, `trace`, `pirate`, `reid`, `reconstruct`, `compose`,
//! `gaussian-attack`, `marked-stats`); experiment reports embed their config
//! and master seed, and reruns are byte-identical.

pub mod bitrow;
pub mod cli;
pub mod codebook;
pub mod compose;
pub mod lp;
pub mod mechanisms;
pub mod pirates;
pub mod query;
pub mod reconstruct;
pub mod reid;
pub mod report;
pub mod rng;
pub mod robust;
pub mod tardos;

pub use bitrow::BitRow;
pub use codebook::{Coalition, Codebook, CombinedWord};
pub use query::{CountingQuery, Database};
pub use report::ExperimentReport;
pub use rng::Stream;
