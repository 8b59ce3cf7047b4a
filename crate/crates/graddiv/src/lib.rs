//! Ultraweak DPG discretizations of the fourth-order grad-div problem
//! `(grad div)^2 u + u = f` on two-dimensional triangular meshes.
//!
//! The library provides two minimum-residual Petrov-Galerkin schemes with
//! locally computed near-optimal test functions: one built on the first-order
//! reformulation of the equation (four field variables plus four skeleton
//! traces) and one on the second-order reformulation (two vector fields plus
//! paired normal/divergence traces). Both come with the built-in residual
//! error estimator of minimum-residual methods, Dörfler marking, and
//! newest-vertex-bisection mesh adaptivity.
//!
//! Entry points:
//! - [`mesh`]: triangulations of the unit square and a rotated L-shaped
//!   domain, geometry queries, conforming refinement;
//! - [`form`]: the two formulations as element-level ingredients;
//! - [`dpg`]: local optimal-test solves, global assembly, error estimation;
//! - [`problems`]: manufactured solutions and boundary data projection;
//! - [`adaptivity`]: the solve-estimate-mark-refine loop;
//! - [`fortin`]: numerical verification of the reference-element projection
//!   operator underlying the second scheme's test-space enrichment;
//! - [`cli`]: the driver behind the `graddiv` binary.
//!
//! See the crate examples for runnable convergence studies.

pub mod adaptivity;
pub mod basis;
pub mod cli;
pub mod dpg;
pub mod form;
pub mod fortin;
pub mod layout;
pub mod io;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
