//! Explicit unitriangular witnesses for the vanishing of Massey products in the
//! mod-p cohomology of pro-p groups of elementary type.
//!
//! The crate is layered bottom-up:
//!
//! - [`fp`]: arithmetic and Gaussian elimination over F_p.
//! - [`unitriangular`]: the groups U_{n+1}(F_p), their graded Lie algebra and the
//!   commutator-equation solver.
//! - [`groups`]: presentations of elementary-type groups and relator evaluation.
//! - [`cohomology`]: H^1, cup products and the triviality condition, computed
//!   structurally over the construction tree.
//! - [`massey`]: the witness engine.
//! - [`oracle`]: brute-force cochain cohomology and homomorphism enumeration.
//! - [`certificate`]: JSON group specs and witness certificates.
//! - [`suites`]: the cross-validation suites run by the CLI and the test suite.

pub mod certificate;
pub mod cohomology;
pub mod error;
pub mod fp;
pub mod groups;
pub mod massey;
pub mod oracle;
pub mod suites;
pub mod unitriangular;

pub use error::{Error, Result};
