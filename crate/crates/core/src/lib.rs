//! Numerical laboratory for the polyharmonic Dirichlet problem on the unit ball.
//!
//! The crate evaluates the Boggio Green function of `(-Δ)^m` on the unit ball
//! of `R^n` (`2 <= n <= 4`, `1 <= m <= 3`), applies it as an integral operator
//! on graded quadrature grids, and uses that solver to study weighted a priori
//! estimates, the principal eigenpair, the exponent bootstrap behind the
//! boundedness of solutions of the system
//!
//! ```text
//! (-Δ)^m u = a(x) v^p,   (-Δ)^m v = b(x) u^q   in B,   Dirichlet data of order m-1
//! ```
//!
//! and the cone-singular family of unbounded solutions.
//!
//! Everything here is `no_std` + `alloc`; all transcendental functions go
//! through [`libm`] so results are bit-identical across targets and builds.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod estimate;
pub mod exponents;
pub mod field;
pub mod geometry;
pub mod green;
pub mod grid;
pub mod math;
pub mod operator;
pub mod singular;
pub mod spectral;

pub use error::{Error, Result};
pub use estimate::{EstimateCase, EstimateReport, LevelRatio, RhsProfile, Trend};
pub use exponents::{BootstrapRound, BootstrapRules, BootstrapTrace, ExponentParams, Regime};
pub use field::{Provenance, SampledField};
pub use geometry::{BallProblem, ConeRegion, Point, MAX_DIM};
pub use green::{BoundCase, GreenKernel, KernelCase, MinRatioReport};
pub use grid::{Grading, QuadratureGrid};
pub use operator::{GreenOperator, OperatorCache, OperatorSource};
pub use singular::SingularSystem;
pub use spectral::EigenPair;
