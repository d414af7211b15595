//! Sum-rate analysis of selective threshold feedback in opportunistic
//! beamforming.
//!
//! The crate models the per-beam SINR distribution of an opportunistic
//! beamforming downlink (Rayleigh with any beam count, Nakagami and Rician
//! with a single beam), threshold-based feedback policies and their load,
//! exact rate formulas evaluated by quadrature, Schur-concavity
//! certification of the sum-rate on the feedback-probability plane, and
//! threshold optimization. A Monte-Carlo simulator provides an independent
//! oracle for every analytic quantity.

pub mod analytic;
mod error;
pub mod mc;
pub mod numerics;
pub mod optimize;
pub mod policies;
pub mod schur;
pub mod sinr;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

// Compile and run every code block in the book as a doc-test so the guide
// cannot drift from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(getting_started, "../../../book/src/getting-started.md");
    chapter!(sinr_models, "../../../book/src/sinr-models.md");
    chapter!(feedback_policies, "../../../book/src/feedback-policies.md");
    chapter!(monte_carlo, "../../../book/src/monte-carlo.md");
    chapter!(exact_rates, "../../../book/src/exact-rates.md");
    chapter!(certification, "../../../book/src/certification.md");
    chapter!(optimal_thresholds, "../../../book/src/optimal-thresholds.md");
    chapter!(command_line, "../../../book/src/command-line.md");
    chapter!(figures, "../../../book/src/figures.md");
}
