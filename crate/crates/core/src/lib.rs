//! Selection of discrete probability distributions to optimize the
//! expectation of the minimum (or maximum) of independent draws.
//!
//! An instance fixes a shared support grid `l_0 < … < l_{d-1}` and describes
//! each random variable by its tail probabilities `q_j = Pr{Y >= l_j}`, kept
//! as exact rationals. On top of that model this crate provides:
//!
//! * brute-force exact optimizers and an independent joint-outcome oracle
//!   ([`exact`]),
//! * a fully polynomial approximation scheme for min-min selection at fixed
//!   support size ([`fptas`]),
//! * an exact polynomial max-min solver built on planar zonotope vertex
//!   enumeration ([`zonotope`]),
//! * generators for the subset-sum and CNF-SAT reductions that make min-min
//!   selection hard, with certified decision thresholds ([`hardness`]),
//! * serialization, inverse-CDF sampling, and scaling reports for the
//!   command-line harness ([`serial`], [`sample`], [`report`]).
//!
//! All final answers are exact rationals. Logarithms and exponentials are
//! only ever used through certified interval arithmetic ([`interval`]); an
//! interval may select a candidate, but every reported value is re-derived
//! exactly.

pub mod exact;
pub mod fptas;
pub mod hardness;
pub mod interval;
pub mod model;
pub mod rational;
pub mod report;
pub mod sample;
pub mod seeded;
pub mod serial;
pub mod zonotope;

pub use exact::{decide_threshold, joint_outcome_oracle, Aggregate, Objective, SolveResult};
pub use interval::Interval;
pub use model::{
    BinaryInstance, Instance, LogComponent, LogVector, ModelError, Selection, SubsetInstance,
    TailDistribution, ValueGrid,
};
pub use rational::Rational;
