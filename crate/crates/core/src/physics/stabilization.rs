//! Stabilization parameter policies for the numerical flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive value used on degenerate faces by the generalized policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PositiveRule {
    ReciprocalH,
    Fixed(f64),
}

impl PositiveRule {
    pub fn value(self, h: f64) -> f64 {
        match self {
            PositiveRule::ReciprocalH => 1.0 / h,
            PositiveRule::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StabilizationPolicy {
    /// τ = c1 pointwise. Vanishes on degenerate faces.
    Upwind,
    /// τ = c1 on two-phase faces, the rule's value on one-phase faces.
    Generalized(PositiveRule),
    Constant(f64),
    ReciprocalH,
}

impl Default for StabilizationPolicy {
    fn default() -> Self {
        StabilizationPolicy::Generalized(PositiveRule::ReciprocalH)
    }
}

impl StabilizationPolicy {
    pub fn validate(&self) -> Result<()> {
        let bad = |v: f64| !(v > 0.0) || !v.is_finite();
        match *self {
            StabilizationPolicy::Constant(c) if bad(c) => Err(Error::InvalidParameter(format!(
                "constant tau must be positive, got {c}"
            ))),
            StabilizationPolicy::Generalized(PositiveRule::Fixed(g)) if bad(g) => Err(
                Error::InvalidParameter(format!("gamma must be positive, got {g}")),
            ),
            _ => Ok(()),
        }
    }

    /// Short label used in tables and logs.
    pub fn label(&self) -> String {
        match self {
            StabilizationPolicy::Upwind => "upwind".into(),
            StabilizationPolicy::Generalized(PositiveRule::ReciprocalH) => {
                "generalized(1/h)".into()
            }
            StabilizationPolicy::Generalized(PositiveRule::Fixed(g)) => format!("generalized({g})"),
            StabilizationPolicy::Constant(c) => format!("constant({c})"),
            StabilizationPolicy::ReciprocalH => "1/h".into(),
        }
    }
}

/// What a policy needs to know about one face.
#[derive(Debug, Clone, Copy)]
pub struct FaceContext<'a> {
    pub h: f64,
    /// c1 at the face quadrature points.
    pub c1: &'a [f64],
    pub one_phase: bool,
}

pub fn eval_tau(policy: &StabilizationPolicy, ctx: &FaceContext) -> Result<Vec<f64>> {
    if !(ctx.h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h must be positive, got {}",
            ctx.h
        )));
    }
    let n = ctx.c1.len();
    Ok(match *policy {
        StabilizationPolicy::Upwind => {
            if ctx.one_phase {
                return Err(Error::SingularStabilization { faces: 1 });
            }
            ctx.c1.to_vec()
        }
        StabilizationPolicy::Generalized(rule) => {
            if ctx.one_phase {
                vec![rule.value(ctx.h); n]
            } else {
                ctx.c1.to_vec()
            }
        }
        StabilizationPolicy::Constant(c) => vec![c; n],
        StabilizationPolicy::ReciprocalH => vec![1.0 / ctx.h; n],
    })
}
