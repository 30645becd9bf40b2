//! Exact computational commutative algebra over graded polynomial rings.
//!
//! The engine works over standard-graded polynomial rings `k[x_1..x_n]`
//! with exact coefficients (arbitrary-precision rationals or a prime
//! field). Everything downstream of the Groebner kernel — resolutions,
//! Ext/Tor, grade, the quotient-ring embedding pipeline, syzygy order
//! ideals — is certified by exact arithmetic, with degreewise linear
//! algebra as an independent cross-check.

pub mod complexes;
pub mod embeddings;
pub mod error;
pub mod groebner;
pub mod linalg;
pub mod module;
pub mod modules;
pub mod order_ideals;
pub mod poly;
pub mod ring;
pub mod scalar;

pub use error::{EngineError, Result};
pub use module::{FreeModule, ModuleMap, Vector};
pub use modules::{Ideal, Presentation, QuotientCtx};
pub use poly::Polynomial;
pub use ring::{Monomial, MonomialOrder, PolyRing};
pub use scalar::{FieldKind, Scalar};
