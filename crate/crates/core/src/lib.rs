//! Random symmetric tridiagonal matrices: samplers, a Sturm-bisection
//! eigensolver, path-sum limit moments, Stieltjes-transform tools and
//! deformation profiles.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod eigensolve;
pub mod ensembles;
pub mod error;
pub mod law;
pub mod measure;
pub mod pathmoments;
pub mod seed;
pub mod sigmaseq;
pub mod stieltjes;
pub mod uhp;

pub use eigensolve::{eigenvalues, SpectralSample};
pub use ensembles::TridiagonalMatrix;
pub use error::{Error, Result};
pub use law::{EntryDistribution, MomentSequence, MomentTable};
pub use measure::EmpiricalMeasure;
pub use seed::SeedSpec;
pub use sigmaseq::{SigmaSequence, TargetLaw};
pub use uhp::ComplexUHP;
