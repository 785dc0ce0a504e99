//! Monte Carlo laboratory for the density smoothness of stochastic
//! evolutions with rough coefficients.
//!
//! The lab turns a density-regularity argument into executable numerics.
//! The object under study is `E[D_h^m phi(X_t)]` for a test function `phi`
//! and the m-th finite difference `D_h^m`. Splitting `X_t` against an
//! auxiliary process `Y_t` with frozen coefficients gives two terms it can
//! measure: a coupling (approximation) error controlled by coefficient
//! regularity, and a kernel (probabilistic) term controlled by the explicit
//! Gaussian or stable law of `Y_t`. Fitted scaling exponents of both terms,
//! and Besov seminorms of mollified empirical densities, are compared
//! against their predicted rates by the `scenarios` registry.
//!
//! Modules:
//! - [`drivers`]: counter-based random streams, Gaussian and symmetric
//!   alpha-stable increments;
//! - [`models`]: coefficient contracts and Euler-Maruyama simulation, with
//!   checkpointed ensembles retaining tail noise;
//! - [`auxiliary`]: coupled frozen / drift-frozen / Taylor / hypoelliptic /
//!   stable auxiliary endpoints;
//! - [`besov`]: difference operators, seminorms, mollified densities,
//!   Gaussian kernel difference norms;
//! - [`estimators`]: Monte Carlo difference functionals, scaling fits, the
//!   epsilon schedule and exponent calculus, certified test functions;
//! - [`scenarios`]: named experiments binding the above into pass/fail
//!   reports, plus the CLI surface.

pub mod auxiliary;
pub mod besov;
pub mod drivers;
pub mod error;
pub mod estimators;
pub mod models;
pub mod numerics;
pub mod scenarios;

pub use error::{Error, Result};

// Chapters of the guide double as doctests, so the book and the library
// cannot drift apart.
#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(random_streams, "../../../book/src/random-streams.md");
    chapter!(simulating_models, "../../../book/src/simulating-models.md");
    chapter!(
        auxiliary_processes,
        "../../../book/src/auxiliary-processes.md"
    );
    chapter!(
        difference_operators,
        "../../../book/src/difference-operators.md"
    );
    chapter!(
        densities_and_kernels,
        "../../../book/src/densities-and-kernels.md"
    );
    chapter!(estimating_rates, "../../../book/src/estimating-rates.md");
    chapter!(exponent_calculus, "../../../book/src/exponent-calculus.md");
    chapter!(scenarios_cli, "../../../book/src/scenarios-and-cli.md");
}
