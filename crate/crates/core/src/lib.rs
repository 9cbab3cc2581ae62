//! Counts the eigenvalues of a square matrix enclosed by a polygonal contour.
//!
//! The count is the winding number of `det(zI - A)` along the contour. It is
//! obtained by summing principal arguments of determinant ratios between
//! neighboring contour points, with adaptive refinement that keeps each
//! increment on one branch of the logarithm. Determinants come from a dense
//! complex LU and are carried in overflow-safe form.
//!
//! Everything is generic over the real scalar ([`Real`]: `f32` or `f64`); the
//! `*64` aliases below fix it to `f64`.
//!
//! ```
//! use eigencnt::{count_eigenvalues, make_polygon, box_polygon, DenseMatrix, EngineConfig, MatrixHandle};
//! use num_complex::Complex64;
//!
//! let a = MatrixHandle::from_dense(DenseMatrix::from_diagonal(&[
//!     Complex64::new(0.0, 0.0),
//!     Complex64::new(1.0, 0.0),
//! ]));
//! let contour = make_polygon(box_polygon(-0.5, 0.5, -0.5, 0.5)).unwrap();
//! let report = count_eigenvalues(&a, &contour, &EngineConfig::default()).unwrap();
//! assert_eq!(report.count, 1);
//! ```

// `!(x < bound)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contour;
pub mod dense;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod matrix_io;
pub mod oracle;
pub mod scalar;

pub use contour::{box_polygon, circle_polygon, make_polygon, Contour, Node, NodeList, Origin, Status};
pub use dense::DenseMatrix;
pub use engine::{
    accumulate_argument, condition_b_prime, condition_c, count_eigenvalues, eval_point, insertion_count,
    CountReport, EngineConfig, PointData, Warning,
};
pub use error::{Error, Result};
pub use linalg::{det_triplet, lu_factor, phi_ratio, shift_matrix, trace_inverse, DetTriplet, LuFactors};
pub use matrix_io::{one_norm, parse_matrix_market, read_matrix_market, write_matrix_market, MatrixHandle};
pub use scalar::Real;

pub type Matrix64 = DenseMatrix<f64>;
pub type MatrixHandle64 = MatrixHandle<f64>;
pub type DetTriplet64 = DetTriplet<f64>;
pub type LuFactors64 = LuFactors<f64>;
pub type Contour64 = Contour<f64>;
pub type NodeList64 = NodeList<f64>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type CountReport64 = CountReport<f64>;

pub type Matrix32 = DenseMatrix<f32>;
pub type MatrixHandle32 = MatrixHandle<f32>;
pub type EngineConfig32 = EngineConfig<f32>;
pub type CountReport32 = CountReport<f32>;
