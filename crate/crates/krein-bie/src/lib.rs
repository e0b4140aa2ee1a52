//! Boundary integral realizations of Krein resolvent formulas for the planar
//! Schrödinger operator -Δ + V0.
//!
//! The crate has two layers that mirror each other:
//!
//! * [`extension_core`] is an exact finite-dimensional model of the abstract
//!   extension machinery: a Hermitian matrix plays the role of the free
//!   operator, a rectangular matrix plays the trace map, and the induced
//!   gamma field, Weyl operator and Krein resolvent formula can be checked to
//!   machine precision.
//! * [`geometry`], [`kernels`], [`layer_ops`], [`trace_space`],
//!   [`boundary_conditions`] and [`krein_solver`] realize the same formulas
//!   concretely for -Δ + V0 on R², with boundary conditions (Dirichlet,
//!   Neumann, Robin, δ, δ') imposed on a closed curve Γ or on an open arc
//!   Σ ⊂ Γ.  Boundary operators are dense Nyström matrices acting on nodal
//!   values; resolvents, Green functions, point spectra, scattered fields and
//!   resolvent-difference singular values are all derived from them.

pub mod boundary_conditions;
pub mod extension_core;
pub mod geometry;
pub mod kernels;
pub mod krein_solver;
pub mod layer_ops;
pub mod trace_space;
