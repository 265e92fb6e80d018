//! Distance-distribution-function-valued submeasures on finite set rings.
//!
//! A numerical submeasure assigns a non-negative number to every set of a
//! ring; its probabilistic counterpart assigns a whole *distance distribution
//! function* (DDF), so that `gamma_E(x)` reads "the probability that the
//! measure of `E` is below `x`". This crate provides the building blocks for
//! working with such set functions at desk scale and for checking their
//! defining axioms exhaustively:
//!
//! * [`grid`] — grids on `[0, x_max]`, DDFs with closed-form or sampled
//!   realizations, pointwise order and extrema, CSV export;
//! * [`agg`] — binary aggregation functions on `[0,1]^2`: the landmark
//!   t-norms, six parameterized families, semi-/quasi-/copula classification,
//!   additive generators, automorphism transforms and lattice operations;
//! * [`padd`] — pseudo-additions on the extended non-negative half-line
//!   (`K_alpha`, `max`, generated and interval-system forms) with partner
//!   solving;
//! * [`tau`] — sup-convolution triangle functions over a grid and sampled
//!   checks of the triangle-function laws;
//! * [`sets`] — finite universes, bitmask set rings and numerical
//!   submeasures with an exhaustive axiom checker;
//! * [`psub`] — probabilistic submeasures: every constructor, the axiom
//!   checker, quasi-arithmetic combination, Jordan extension, numerical
//!   extraction, the induced pseudo-metric and neighborhood bases;
//! * [`classes`] — the order and lattice structure on submeasure-class
//!   descriptors.
//!
//! All values are immutable after construction and safe to share across
//! threads; the exhaustive checkers parallelize their scans internally.
//!
//! ```
//! use probsub::agg::{make_tnorm, Tnorm};
//! use probsub::grid::Grid;
//! use probsub::padd::PseudoAddition;
//! use probsub::psub::{check_axioms, universal, CheckParams};
//! use probsub::sets::{NumericalSubmeasure, Ring, Universe};
//!
//! let ring = Ring::powerset(Universe::named(&["a", "b", "c"]).unwrap());
//! let eta = NumericalSubmeasure::cardinality(&ring);
//! let gamma = universal(&eta, &ring).unwrap();
//! let report = check_axioms(
//!     &gamma,
//!     &PseudoAddition::k1(),
//!     &make_tnorm(Tnorm::M),
//!     &Grid::uniform(10.0, 64).unwrap(),
//!     &CheckParams::default(),
//! )
//! .unwrap();
//! assert!(report.pass);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(v > 0.0)` also rejects NaN

pub mod agg;
pub mod classes;
pub mod grid;
pub mod padd;
pub mod psub;
pub mod report;
pub mod sets;
pub mod tau;

/// Errors produced by constructors and checkers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on user input was violated.
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Clamp a possibly noisy function value into `[0, 1]`. NaN maps to 0,
/// which `f64::clamp` would propagate instead.
#[inline]
#[allow(clippy::manual_clamp)]
pub(crate) fn clamp01(v: f64) -> f64 {
    v.max(0.0).min(1.0)
}

/// Deterministic low-discrepancy points in `[0, 1)^2` (R2 sequence).
pub(crate) fn weyl_pairs(count: usize) -> impl Iterator<Item = (f64, f64)> {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_2;
    (1..=count).map(|k| {
        let k = k as f64;
        ((0.5 + k * A1).fract(), (0.5 + k * A2).fract())
    })
}

/// Deterministic low-discrepancy points in `[0, 1)^3` (R3 sequence).
pub(crate) fn weyl_triples(count: usize) -> impl Iterator<Item = (f64, f64, f64)> {
    const A1: f64 = 0.819_172_513_396_164_4;
    const A2: f64 = 0.671_043_606_703_789_2;
    const A3: f64 = 0.549_700_477_901_936;
    (1..=count).map(|k| {
        let k = k as f64;
        (
            (0.5 + k * A1).fract(),
            (0.5 + k * A2).fract(),
            (0.5 + k * A3).fract(),
        )
    })
}
