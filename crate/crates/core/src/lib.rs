//! Zeroth-order optimization on the probability simplex.
//!
//! This crate implements a one-point gradient estimator for smooth functions
//! that can only be queried on the probability simplex `Δ_d`, together with
//! two derivative-free optimizers driven by it:
//!
//! - **Estimator**: query `f` at the convex combination `(1-δ)x + δu` with
//!   `u ~ Dir(α·1_d)`. The combination is itself a point of `Δ_d`, so no query
//!   ever leaves the feasible set. Scaling the observed value by the Dirichlet
//!   noise recovers the *centered* gradient `P_d ∇f(x)` up to a bias of order
//!   `δ`, where `P_d = I - (1/d)·11ᵀ`. The centered gradient carries all
//!   first-order information that matters on the simplex.
//! - **Optimizers**: projected gradient descent ([`optimizer::Algo::Pgd`]) and
//!   exponential weights ([`optimizer::Algo::Ew`]) running on the estimated
//!   gradients, with horizon-tuned step size and mixing parameter. For smooth
//!   convex objectives the average iterate converges at a `T^{-1/4}` rate in
//!   the first-order suboptimality gap.
//! - **Harness**: reproducible seeded experiment sweeps, estimator-bias
//!   studies, CSV emission, and log-log rate fitting, exposed both as a
//!   library ([`harness`]) and through the `zo-simplex` CLI.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators; equal
//! seeds and configurations reproduce runs bit for bit.
//!
//! # Example
//!
//! Minimize the distance to a target distribution using only on-simplex
//! function evaluations:
//!
//! ```
//! use zo_simplex::objectives::make_quadratic_distance;
//! use zo_simplex::optimizer::{run, Algo, Schedule};
//! use zo_simplex::simplex::SimplexPoint;
//! use zo_simplex::DirichletSampler;
//!
//! let target = SimplexPoint::new(vec![0.6, 0.3, 0.1])?;
//! let objective = make_quadratic_distance(&target);
//! let schedule = Schedule::with_defaults(10_000, 3, 1.0)?;
//! let mut sampler = DirichletSampler::new(3, 1.0, 42)?;
//! let start = SimplexPoint::uniform(3)?;
//!
//! let trace = run(Algo::Pgd, &objective, &schedule, &mut sampler, &start)?;
//! assert_eq!(objective.evaluations(), 10_000); // one query per step
//! assert_eq!(objective.oracle_grad_evaluations(), 0); // gradients never used
//! assert!(trace.average_iterate.distance(&target) < 0.2);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

#![forbid(unsafe_code)]
// The d x d matrix code reads clearest with index loops.
#![allow(clippy::needless_range_loop)]

pub mod dirichlet;
pub mod estimator;
pub mod harness;
pub mod objectives;
pub mod optimizer;
pub mod simplex;
pub mod stats;

pub use dirichlet::DirichletSampler;
pub use estimator::{BiasReport, EstimatorConfig, EstimatorSample};
pub use objectives::Objective;
pub use optimizer::{Algo, RunTrace, Schedule};
pub use simplex::SimplexPoint;
