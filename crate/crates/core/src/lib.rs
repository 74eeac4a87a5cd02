//! Numerical verification engine for almost complex manifolds with Norden
//! metric.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense small-tensor algebra with an indefinite metric;
//! * [`expr`]: closed-form chart expressions with exact derivatives;
//! * [`pointwise`]: compatible `(g, J, F)` triples, Lie forms, Nijenhuis
//!   tensors and the W-class projectors;
//! * [`connections`]: the four-parameter family of almost complex
//!   connections, their torsion and the connection-type table;
//! * [`manifold`]: coordinate charts, curvature of the W1 complex
//!   connections and the scalar-curvature relations;
//! * [`report`] and [`suite`]: residual reports and the orchestrated run.

pub mod connections;
pub mod error;
pub mod expr;
pub mod manifold;
pub mod pointwise;
pub mod report;
pub mod suite;
pub mod tensor;
pub mod tolerance;

pub use error::{Error, Result};
pub use expr::{Expr, ExprError};
pub use tensor::{component_norm, Slot, Tensor};
