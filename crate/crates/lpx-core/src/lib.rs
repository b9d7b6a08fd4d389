//! Exact-arithmetic toolkit for Lie-Poisson bracket extensions.
//!
//! The crate is organized around a single data structure, the 3-tensor
//! `W_lambda^{mu nu}` that weights an n-tuple bracket built over a base Lie
//! algebra, and everything one wants to do with it at desk scale:
//!
//! * [`exactfield`] -- scalars in Q(i), dense exact matrices, rank / RREF /
//!   pseudoinverse, and the two structural decompositions (simultaneous block
//!   diagonalization of commuting matrices, common triangularization of
//!   commuting nilpotents).
//! * [`extension`] -- the [`extension::ExtensionTensor`] type, axiom
//!   validation, basis transformation, constructors (Leibniz, direct sum,
//!   semidirect append, CRMHD, RMHD, ...), and bracket evaluation over a
//!   pluggable base algebra.
//! * [`normalize`] -- the classification pipeline: degenerate-block split,
//!   lower triangularization, coboundary removal, cocycle normal forms,
//!   fingerprints and the built-in catalog of low-order extensions.
//! * [`casimir`] -- coextensions (nonsingular and singular paths), symbolic
//!   Casimir invariant families, exact verification of the Casimir condition,
//!   and the finite-dimensional quadratic-Casimir linear system.
//! * [`dynamics`] -- double-precision Lie-Poisson time integration over
//!   extension brackets with so(3) as base algebra (rigid body, heavy top).
//! * [`stability`] -- grid-based evaluation of closed-form equilibria and
//!   formal-stability criteria (cat's eye solutions, CRMHD principal minors,
//!   magnetic islands with flow, Rayleigh-type conditions).
//!
//! All algebraic modules are exact: no floating point enters until the
//! dynamics and stability layers, which are explicitly numerical.

pub mod casimir;
pub mod dynamics;
pub mod exactfield;
pub mod extension;
pub mod normalize;
pub mod stability;

pub use exactfield::{Matrix, Scalar};
pub use extension::ExtensionTensor;
