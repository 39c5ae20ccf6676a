//! Numerical verification of operator Bellman-type inequalities over real
//! symmetric matrices.
//!
//! Module map:
//!
//! * [`matcore`]: symmetric matrices, Jacobi eigen-solver, functional
//!   calculus, Löwner order.
//! * [`means`]: weighted arithmetic and geometric means.
//! * [`functions`]: catalog of scalar functions and a shape probe.
//! * [`constants`]: `K`, `β`, `β̃` with closed forms and grid oracles.
//! * [`maps`]: unital positive linear maps.
//! * [`checks`]: one checker per inequality, producing [`checks::CheckReport`]s.
//! * [`harness`]: seeded campaigns, sweeps and report formats.

pub mod checks;
pub mod constants;
pub mod error;
pub mod functions;
pub mod harness;
pub mod maps;
pub mod matcore;
pub mod means;
pub mod random;

pub use checks::{run_check, CheckId, CheckInput, CheckOptions, CheckReport, Instance, Variant, Verdict};
pub use constants::{ConstantResult, IntervalBounds, Method};
pub use error::{Error, Result};
pub use functions::{ScalarFunction, Shape};
pub use maps::{MapKind, MapSpec, PositiveMap};
pub use matcore::{LoewnerVerdict, Relation, SymMatrix};
pub use means::Weight;
