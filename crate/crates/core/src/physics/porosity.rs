//! Porosity fields and the coefficient groups of the scaled system.
//!
//! With mobility `δ = φ^m` every coefficient is a power of φ times `∇ln φ`:
//! `c1 = φ^{m-1/2}`, `c2 = m c1 ∇ln φ`, `c3 = ½ c1 ∇ln φ`. These are evaluated
//! in that closed form so nothing of the shape 0/0 is ever formed.

use serde::{Deserialize, Serialize};

use crate::discretization::Point;
use crate::error::{Error, Result};
use crate::mesh::BoxDomain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PorosityField {
    /// φ ≡ value > 0.
    Constant(f64),
    /// φ = exp(rate · (x_1 + … + x_dim)).
    Exponential { rate: f64, dim: usize },
    /// φ = (x+shift)^α (y+shift)^{2α}, and φ = 0 where x ≤ -shift or y ≤ -shift.
    Degenerate { alpha: f64, shift: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorosityModel {
    pub field: PorosityField,
    /// δ = φ^m.
    pub mobility_exponent: f64,
    /// Closed domain on which evaluation is allowed.
    pub domain: Option<BoxDomain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientSample {
    pub phi: f64,
    /// φ^{-1/2} δ
    pub c1: f64,
    /// φ^{-1/2} ∇δ
    pub c2: Point,
    /// ½ φ^{-3/2} δ ∇φ
    pub c3: Point,
}

impl PorosityModel {
    pub fn new(field: PorosityField) -> Self {
        Self {
            field,
            mobility_exponent: 1.0,
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Exact predicate for the region where φ ≡ 0 (closed set).
    pub fn one_phase(&self, x: &Point) -> bool {
        match self.field {
            PorosityField::Degenerate { shift, .. } => x[0] <= -shift || x[1] <= -shift,
            _ => false,
        }
    }

    pub fn has_one_phase_region(&self) -> bool {
        matches!(self.field, PorosityField::Degenerate { .. })
    }

    pub fn phi(&self, x: &Point) -> f64 {
        if self.one_phase(x) {
            return 0.0;
        }
        match self.field {
            PorosityField::Constant(c) => c,
            PorosityField::Exponential { rate, dim } => (rate * x[..dim].iter().sum::<f64>()).exp(),
            PorosityField::Degenerate { alpha, shift } => {
                (x[0] + shift).powf(alpha) * (x[1] + shift).powf(2.0 * alpha)
            }
        }
    }

    /// ∇ln φ on the two-phase region, zero on the one-phase region.
    pub fn grad_log_phi(&self, x: &Point) -> Point {
        if self.one_phase(x) {
            return [0.0; 3];
        }
        match self.field {
            PorosityField::Constant(_) => [0.0; 3],
            PorosityField::Exponential { rate, dim } => {
                let mut g = [0.0; 3];
                g[..dim].iter_mut().for_each(|v| *v = rate);
                g
            }
            PorosityField::Degenerate { alpha, shift } => {
                [alpha / (x[0] + shift), 2.0 * alpha / (x[1] + shift), 0.0]
            }
        }
    }

    pub fn grad_phi(&self, x: &Point) -> Point {
        let phi = self.phi(x);
        let g = self.grad_log_phi(x);
        [phi * g[0], phi * g[1], phi * g[2]]
    }

    pub fn delta(&self, x: &Point) -> f64 {
        if self.one_phase(x) {
            0.0
        } else {
            self.phi(x).powf(self.mobility_exponent)
        }
    }

    fn check_domain(&self, x: &Point) -> Result<()> {
        match &self.domain {
            Some(d) if !d.contains(x) => Err(Error::OutsideDomain(*x)),
            _ => Ok(()),
        }
    }

    /// Coefficients without the domain check; used on assembly hot paths.
    pub fn coefficients_unchecked(&self, x: &Point) -> CoefficientSample {
        if self.one_phase(x) {
            return CoefficientSample::default();
        }
        let phi = self.phi(x);
        let m = self.mobility_exponent;
        let c1 = phi.powf(m - 0.5);
        let g = self.grad_log_phi(x);
        CoefficientSample {
            phi,
            c1,
            c2: [m * c1 * g[0], m * c1 * g[1], m * c1 * g[2]],
            c3: [0.5 * c1 * g[0], 0.5 * c1 * g[1], 0.5 * c1 * g[2]],
        }
    }

    /// Coefficients used by the post-processing: `φ^{1/2} δ^{-1}` and `φ^{-1} ∇φ`.
    /// `None` on the one-phase region, where the first one is undefined.
    pub fn post_process_coefficients(&self, x: &Point) -> Option<(f64, Point)> {
        if self.one_phase(x) {
            return None;
        }
        let phi = self.phi(x);
        Some((phi.powf(0.5 - self.mobility_exponent), self.grad_log_phi(x)))
    }
}

pub fn eval_coefficients(model: &PorosityModel, x: &Point) -> Result<CoefficientSample> {
    model.check_domain(x)?;
    Ok(model.coefficients_unchecked(x))
}
