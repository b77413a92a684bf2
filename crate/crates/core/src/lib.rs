//! Derivations, local derivations and 2-local derivations on the operator
//! algebra `End_A(M)` of a full Hilbert module `M` over a finite commutative
//! C*-algebra `A = C(S)`.
//!
//! The finite model makes every statement about derivations checkable by
//! linear algebra: `End_A(M)` is a block-diagonal matrix algebra, derivation
//! spaces are nullspaces over its structure constants, and local / 2-local
//! properties reduce to least-squares feasibility problems.

pub mod calgebra;
pub mod cjson;
pub mod config;
pub mod dersolve;
pub mod error;
pub mod hilbmod;
pub mod linalg;
pub mod localtools;
pub mod opalg;
pub mod sample;
pub mod twolocal;
pub mod verify;

pub use calgebra::{AlgebraElement, PointSpace};
pub use dersolve::{ConcreteAlgebra, LinearMapOnAlgebra, MapNullspace};
pub use error::{Error, Result};
pub use hilbmod::{Functional, ModuleElement, ModuleSpec};
pub use opalg::{LambdaMatrix, Operator, RankOneSum};

pub use num_complex::Complex64;
