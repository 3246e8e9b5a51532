//! Per-round losses ℓ_t(z) with z = tr(E_t ω) and feedback b_t.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// |z − b|
    L1,
    /// (z − b)²
    L2,
}

/// Convex loss with its Lipschitz constant on [0,1]×[0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossFunction {
    pub kind: LossKind,
    pub lipschitz: f64,
}

impl LossFunction {
    pub const L1: Self = Self { kind: LossKind::L1, lipschitz: 1.0 };
    pub const L2: Self = Self { kind: LossKind::L2, lipschitz: 2.0 };

    pub fn new(kind: LossKind) -> Self {
        match kind {
            LossKind::L1 => Self::L1,
            LossKind::L2 => Self::L2,
        }
    }

    pub fn value(&self, z: f64, b: f64) -> f64 {
        loss_eval(self, z, b).0
    }

    pub fn derivative(&self, z: f64, b: f64) -> f64 {
        loss_eval(self, z, b).1
    }
}

/// Loss value and (sub)derivative in z. The L1 subgradient at z = b is 0.
pub fn loss_eval(loss: &LossFunction, z: f64, b: f64) -> (f64, f64) {
    let r = z - b;
    match loss.kind {
        LossKind::L2 => (r * r, 2.0 * r),
        LossKind::L1 => {
            let g = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
            (r.abs(), g)
        }
    }
}
