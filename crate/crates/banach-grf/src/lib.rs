//! Gaussian random fields on Hoelder spaces and spaces of Radon measures,
//! built from tensor hat bases with Karhunen-Loeve-type expansions.

pub mod analysis;
pub mod config;
pub mod decomp;
pub mod sampler;
pub mod dyadic;
pub mod error;
pub mod kernels;
pub mod measures;

pub use error::{GrfError, Result};

// The guide chapters double as doc-tests so their snippets cannot drift
// out of sync with the library.
#[doc = include_str!("../../../book/src/basis.md")]
#[cfg(doctest)]
pub mod guide_basis {}

#[doc = include_str!("../../../book/src/kernels.md")]
#[cfg(doctest)]
pub mod guide_kernels {}

#[doc = include_str!("../../../book/src/decomposition.md")]
#[cfg(doctest)]
pub mod guide_decomposition {}

#[doc = include_str!("../../../book/src/sampling.md")]
#[cfg(doctest)]
pub mod guide_sampling {}

#[doc = include_str!("../../../book/src/measures.md")]
#[cfg(doctest)]
pub mod guide_measures {}

#[doc = include_str!("../../../book/src/analysis.md")]
#[cfg(doctest)]
pub mod guide_analysis {}
