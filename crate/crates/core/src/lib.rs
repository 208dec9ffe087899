//! Affine curvature models whose Jacobi operators have projectively
//! constant spectra.
//!
//! The crate builds algebraic curvature operators from complex and
//! quaternionic structures, extracts Jacobi spectra with multiplicities and
//! Jordan structure, classifies operators as affine Osserman, projective or
//! neither, and works with affine connections whose Christoffel symbols are
//! polynomials, including their deformed and modified Riemannian extensions.

pub mod classifier;
pub mod constructors;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod poly;
pub mod scalar;
pub mod spectral;
pub mod structure;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Real = f64;
pub type Rational = num_rational::BigRational;
pub type RealTensor = tensor::CurvatureTensor<f64>;
pub type ExactTensor = tensor::CurvatureTensor<Rational>;
pub type RealMatrix = nalgebra::DMatrix<f64>;
