//! Counting, locating and certifying periodic solutions of scalar polynomial
//! differential equations
//!
//! ```text
//! z' = z^n + P_{n-1}(t) z^{n-1} + ... + P_1(t) z + P_0(t),   t ∈ [0, ω],
//! ```
//!
//! where a solution is *periodic* when `z(0) = z(ω)`. Periodic solutions are
//! the zeros of the holomorphic displacement map `q(c) = z(ω, c) - c`; they are
//! counted with multiplicity by the argument principle.

pub mod bounds;
pub mod coefficients;
pub mod counting;
pub mod displacement;
pub mod error;
pub mod flow;
pub mod integrator;
pub mod planar;

pub use bounds::{geometry, BoundsReport, Geometry, TheoremId};
pub use coefficients::{CoeffFn, Equation, EquationDoc, Harmonic, SupNorm};
pub use counting::{Contour, PeriodicSolution, PeriodicSolutionSet};
pub use displacement::{Direction, QValue, RealDerivatives};
pub use error::{Error, Result};
pub use flow::{Escape, FlowOutcome, IntegratorConfig};
pub use num_complex::Complex64;
pub use planar::{LimitCycleReport, PlanarSystem};
