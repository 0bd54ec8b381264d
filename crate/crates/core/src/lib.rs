//! Proximal operator of the mixed ℓ₁,∞ matrix norm, projection onto the
//! ℓ∞,1 ball, and the pieces built on top of them: reference solvers for
//! validation, a projected-gradient multi-task least-squares solver and a
//! timing harness.
//!
//! ```
//! use l1inf_core::{prox_l1inf, DenseMatrix, InnerProjection};
//!
//! let v = DenseMatrix::from_rows(&[[4.0, 1.0], [2.0, 1.0]]).unwrap();
//! let sol = prox_l1inf(&v, 1.0, InnerProjection::Michelot).unwrap();
//! assert_eq!(sol.t_star, 4.0);
//! assert_eq!(sol.x_star.row(0), &[3.0, 1.0]);
//! ```

pub mod bench;
pub mod bounds;
mod error;
pub mod l1ball;
mod matrix;
pub mod norms;
pub mod oracle;
pub mod prox;
pub mod rng;
pub mod solver;

pub use bounds::{lower_bound_global, lower_bound_subset, maximize_lower_bound, BoundKind, LowerBound};
pub use error::{Error, Result};
pub use l1ball::{project_l1_ball, InnerProjection, L1BallProjection};
pub use matrix::DenseMatrix;
pub use norms::{mixed_norm_1inf, mixed_norm_inf1, soft_threshold};
pub use prox::{project_linf1, project_linf1_with_solution, prox_l1inf, Projection, ProxSolution};
