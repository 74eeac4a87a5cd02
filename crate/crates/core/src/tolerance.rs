//! Tolerances shared by every check in the crate.
//!
//! Residuals are always measured with [`crate::tensor::component_norm`], the
//! root-sum-square of raw components. The metric is neutral, so a g-induced
//! norm would not be sign-definite.

use serde::{Deserialize, Serialize};

/// Identities that hold in exact arithmetic and are evaluated by pure algebra.
pub const STRUCTURAL: f64 = 1e-10;

/// Checks that go through one outer finite difference.
pub const DERIVATIVE: f64 = 1e-6;

/// Relative threshold for the W-class component norms.
pub const CLASSIFICATION: f64 = 1e-8;

/// Below this component norm the structure tensor counts as zero.
pub const DEGENERATE_F: f64 = 1e-12;

/// Relative singular-value cut used for null spaces.
pub const NULL_SPACE: f64 = 1e-8;

/// Projector laws and the basic-class decomposition.
pub const PROJECTOR: f64 = 1e-8;

/// Lower bound a residual must exceed away from the distinguished parameters.
pub const SEPARATION: f64 = 1e-3;

/// Grid minimum required for the nonexistence cells of the connection table.
pub const NONEXISTENCE: f64 = 1e-6;

/// Tensors (N, Ñ, F) must exceed this norm for a point to count as nondegenerate.
pub const NONDEGENERATE: f64 = 0.1;

/// Curvature identities on charts.
pub const CURVATURE: f64 = 1e-9;

/// Closedness of the Lie forms on charts.
pub const CLOSED_FORM: f64 = 1e-8;

/// Relative tolerance for the scalar-curvature differential relations.
pub const SCALAR_CURVATURE: f64 = 1e-5;

/// Flat-chart quantities that must vanish.
pub const FLAT: f64 = 1e-12;

/// Maximum condition number of the random frame behind [`crate::pointwise::random_point`].
pub const MAX_FRAME_CONDITION: f64 = 100.0;

/// The tunable pair carried by suite configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub structural: f64,
    pub derivative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL,
            derivative: DERIVATIVE,
        }
    }
}
