//! Exact computations with generalized preprojective algebras Π(C,D,Ω):
//! module representations, geometric crystal operators on generic
//! representatives, truncations of B(−∞), Littlewood–Richardson
//! coefficients and evaluations in the convolution algebra.
//!
//! All linear algebra is exact. The core is generic over the scalar field;
//! [`RepQ`] and [`RepFp`] are the two instantiations used in practice.

pub mod cartan;
pub mod catalog;
pub mod convolution;
pub mod crystal;
pub mod error;
pub mod field;
pub mod generic_ops;
pub mod io;
pub mod matrix;
pub mod modrep;
pub mod presentation;
pub mod semicanonical;

pub use cartan::{CartanConfig, CartanDatum, RankVector, WeightCoords};
pub use error::{Error, Result};
pub use field::{Field, FieldKind, Fp, Rational};
pub use matrix::Matrix;
pub use modrep::Rep;
pub use presentation::Algebra;

/// Modules over the rationals.
pub type RepQ = Rep<Rational>;
/// Modules over a prime field chosen at runtime.
pub type RepFp = Rep<Fp>;
/// Matrices over the rationals.
pub type MatrixQ = Matrix<Rational>;
