//! Toolkit for antisymmetric multivectors and their length: the minimal
//! number of decomposable n-vectors summing to a given element of the n-th
//! exterior power of C^m.
//!
//! - [`multivector`]: dense multivectors, wedge/contraction/duality.
//! - [`io`]: the JSON multivector and term-list documents.
//! - [`decomp`]: Plücker decomposability, support rank, exact 2-vector length.
//! - [`bounds`]: lower bounds and known exact values of the maximal length.
//! - [`secant`]: Terracini dimension counts for Grassmannian secant varieties.
//! - [`fit`]: alternating least squares fitting of decomposable sums.

pub mod bounds;
pub mod decomp;
pub mod error;
pub mod exec;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod multivector;
pub mod rng;
pub mod secant;
pub mod subset;

pub use error::{Error, Result};
pub use exec::Exec;
pub use multivector::{contract, hodge_dual, wedge, wedge_vectors, FieldTag, Multivector, VectorM};
pub use num_complex::Complex64;
pub use subset::{subset_rank, subset_unrank, SubsetIndex};
