//! Manufactured solutions for the scaled system.
//!
//! Every builtin case uses δ = φ and a fluid pressure p̃ with u = -φ∇p̃ and
//! p = φ^{1/2} p̃, so g̃ = 0 and
//! `f = φ^{1/2} p̃ - φ^{3/2} (2 ∇ln φ · ∇p̃ + Δp̃)`.
//! The constant-coefficient polynomial case is the exception: it carries a
//! non-zero g̃ so that (u, p) lies in the lowest discrete space.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::porosity::{CoefficientSample, PorosityField, PorosityModel};
use crate::discretization::{Point, Shape};
use crate::error::{Error, Result};
use crate::mesh::BoxDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularity {
    Smooth,
    /// p̃ in H^{1.25-ε}
    H125,
    /// p̃ in H^{0.75-ε}
    H075,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CaseKind {
    NonDeg2d { mx: f64, my: f64 },
    NonDeg3d { mx: f64, my: f64, mz: f64 },
    DegSmooth { alpha: f64 },
    DegRough { alpha: f64, beta: f64 },
    ConstPoly { dim: usize },
}

/// Optional case parameters; unset entries take the standard defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    pub m: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Dimension for the polynomial case (2 or 3).
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactSample {
    pub p: f64,
    pub u: Point,
    /// Unscaled pressure, `None` on the one-phase region.
    pub ptilde: Option<f64>,
    pub f: f64,
    /// δ g̃
    pub delta_g: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub name: String,
    pub kind: CaseKind,
    pub domain: BoxDomain,
    pub porosity: PorosityModel,
    pub regularity: Regularity,
}

const SHIFT: f64 = 0.75;

pub const CASE_NAMES: [&str; 5] = ["nondeg2d", "nondeg3d", "degSmooth", "degRough", "constPoly"];

pub fn builtin_case(name: &str, params: &CaseParams) -> Result<ManufacturedCase> {
    let m = |default: &[f64]| -> Result<Vec<f64>> {
        let d = default.len();
        match &params.m {
            None => Ok(default.to_vec()),
            Some(v) if v.len() == d => Ok(v.clone()),
            Some(v) => Err(Error::InvalidParameter(format!(
                "case {name} takes {d} wave numbers, got {}",
                v.len()
            ))),
        }
    };
    let alpha = params.alpha.unwrap_or(2.0);
    if !(alpha >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be at least 2 for bounded coefficients, got {alpha}"
        )));
    }
    let sym = BoxDomain::new(&[-1.0, -1.0], &[1.0, 1.0])?;
    let degenerate = PorosityField::Degenerate {
        alpha,
        shift: SHIFT,
    };
    let (kind, domain, field, regularity) = match name.to_ascii_lowercase().as_str() {
        "nondeg2d" => {
            let w = m(&[2.0, 3.0])?;
            (
                CaseKind::NonDeg2d { mx: w[0], my: w[1] },
                BoxDomain::unit(2),
                PorosityField::Exponential { rate: 2.0, dim: 2 },
                Regularity::Smooth,
            )
        }
        "nondeg3d" => {
            let w = m(&[1.0, 1.0, 1.0])?;
            (
                CaseKind::NonDeg3d {
                    mx: w[0],
                    my: w[1],
                    mz: w[2],
                },
                BoxDomain::unit(3),
                PorosityField::Exponential { rate: 2.0, dim: 3 },
                Regularity::Smooth,
            )
        }
        "degsmooth" => (
            CaseKind::DegSmooth { alpha },
            sym,
            degenerate,
            Regularity::Smooth,
        ),
        "degrough" => {
            let beta = params.beta.unwrap_or(-0.25);
            let regularity = if beta == -0.25 {
                Regularity::H125
            } else if beta == -0.75 {
                Regularity::H075
            } else {
                return Err(Error::InvalidParameter(format!(
                    "beta must be -0.25 or -0.75, got {beta}"
                )));
            };
            (
                CaseKind::DegRough { alpha, beta },
                sym,
                degenerate,
                regularity,
            )
        }
        "constpoly" => {
            let dim = params.dim.unwrap_or(2);
            if !(2..=3).contains(&dim) {
                return Err(Error::InvalidParameter(format!("dimension {dim}")));
            }
            (
                CaseKind::ConstPoly { dim },
                BoxDomain::unit(dim),
                PorosityField::Constant(1.0),
                Regularity::Smooth,
            )
        }
        _ => return Err(Error::UnknownCase(name.to_string())),
    };
    let canonical = CASE_NAMES
        .iter()
        .find(|c| c.eq_ignore_ascii_case(name))
        .expect("matched above");
    Ok(ManufacturedCase {
        name: canonical.to_string(),
        kind,
        porosity: PorosityModel::new(field).with_domain(domain.clone()),
        domain,
        regularity,
    })
}

/// p̃ with its gradient and Laplacian.
struct FluidPressure {
    value: f64,
    grad: Point,
    lap: f64,
}

impl ManufacturedCase {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn default_shape(&self) -> Shape {
        if self.dim() == 3 {
            Shape::Hex
        } else {
            Shape::Quad
        }
    }

    pub fn one_phase(&self, x: &Point) -> bool {
        self.porosity.one_phase(x)
    }

    pub fn has_one_phase_region(&self) -> bool {
        self.porosity.has_one_phase_region()
    }

    pub fn coefficients(&self, x: &Point) -> CoefficientSample {
        self.porosity.coefficients_unchecked(x)
    }

    /// Closure of the two-phase region as a box.
    pub fn two_phase_box(&self) -> BoxDomain {
        if self.has_one_phase_region() {
            BoxDomain {
                lo: vec![-SHIFT; 2],
                hi: self.domain.hi.clone(),
            }
        } else {
            self.domain.clone()
        }
    }

    pub fn dirichlet(&self, x: &Point) -> f64 {
        self.exact(x).p
    }

    pub fn exact(&self, x: &Point) -> ExactSample {
        if self.one_phase(x) {
            return ExactSample::default();
        }
        match self.kind {
            CaseKind::ConstPoly { dim } => {
                let p: f64 = x[..dim].iter().sum();
                let u = if dim == 2 {
                    [x[1], x[0], 0.0]
                } else {
                    [x[1], x[2], x[0]]
                };
                let mut g = [0.0; 3];
                for d in 0..dim {
                    g[d] = u[d] + 1.0;
                }
                ExactSample {
                    p,
                    u,
                    ptilde: Some(p),
                    f: p,
                    delta_g: g,
                }
            }
            CaseKind::NonDeg2d { mx, my } => {
                let (a, b) = (mx * PI, my * PI);
                let (sx, cx) = (a * x[0]).sin_cos();
                let (sy, cy) = (b * x[1]).sin_cos();
                let e = (x[0] + x[1]).exp();
                let p = sx * sy;
                let u = [e * sy * (sx - a * cx), e * sx * (sy - b * cy), 0.0];
                let pt = FluidPressure {
                    value: p / e,
                    grad: [(-p + a * cx * sy) / e, (-p + b * sx * cy) / e, 0.0],
                    lap: ((2.0 - a * a - b * b) * p - 2.0 * a * cx * sy - 2.0 * b * sx * cy) / e,
                };
                self.finish(x, p, u, pt)
            }
            CaseKind::NonDeg3d { mx, my, mz } => {
                let (a, b, c) = (mx * PI, my * PI, mz * PI);
                let (sx, cx) = (a * x[0]).sin_cos();
                let (sy, cy) = (b * x[1]).sin_cos();
                let (sz, cz) = (c * x[2]).sin_cos();
                let e = (x[0] + x[1] + x[2]).exp();
                let p = sx * sy * sz;
                let u = [
                    e * sy * sz * (sx - a * cx),
                    e * sx * sz * (sy - b * cy),
                    e * sx * sy * (sz - c * cz),
                ];
                let pt = FluidPressure {
                    value: p / e,
                    grad: [
                        (-p + a * cx * sy * sz) / e,
                        (-p + b * sx * cy * sz) / e,
                        (-p + c * sx * sy * cz) / e,
                    ],
                    lap: ((3.0 - a * a - b * b - c * c) * p
                        - 2.0 * a * cx * sy * sz
                        - 2.0 * b * sx * cy * sz
                        - 2.0 * c * sx * sy * cz)
                        / e,
                };
                self.finish(x, p, u, pt)
            }
            CaseKind::DegSmooth { alpha } => {
                let (xx, yy) = (x[0] + SHIFT, x[1] + SHIFT);
                let phi = xx.powf(alpha) * yy.powf(2.0 * alpha);
                let w = 6.0 * x[0] * x[1] * x[1];
                let gw = [6.0 * x[1] * x[1], 12.0 * x[0] * x[1], 0.0];
                let (s, c) = w.sin_cos();
                let p = xx.powf(alpha / 2.0) * yy.powf(alpha) * c;
                let u = [phi * s * gw[0], phi * s * gw[1], 0.0];
                let pt = FluidPressure {
                    value: c,
                    grad: [-s * gw[0], -s * gw[1], 0.0],
                    lap: -c * (gw[0] * gw[0] + gw[1] * gw[1]) - s * 12.0 * x[0],
                };
                self.finish(x, p, u, pt)
            }
            CaseKind::DegRough { alpha, beta } => {
                let (xx, yy) = (x[0] + SHIFT, x[1] + SHIFT);
                let (x0, y0) = (x[0], x[1]);
                let q = y0 * (y0 - 3.0 * x0);
                let p = q * xx.powf(alpha / 2.0 + beta) * yy.powf(alpha);
                let u = [
                    y0 * (beta * (3.0 * x0 - y0) + 3.0 * xx)
                        * xx.powf(alpha + beta - 1.0)
                        * yy.powf(2.0 * alpha),
                    (3.0 * x0 - 2.0 * y0) * xx.powf(alpha + beta) * yy.powf(2.0 * alpha),
                    0.0,
                ];
                let xb = xx.powf(beta);
                let xb1 = xx.powf(beta - 1.0);
                let xb2 = xx.powf(beta - 2.0);
                let pt = FluidPressure {
                    value: q * xb,
                    grad: [
                        -3.0 * y0 * xb + beta * q * xb1,
                        (2.0 * y0 - 3.0 * x0) * xb,
                        0.0,
                    ],
                    lap: -6.0 * beta * y0 * xb1 + beta * (beta - 1.0) * q * xb2 + 2.0 * xb,
                };
                self.finish(x, p, u, pt)
            }
        }
    }

    fn finish(&self, x: &Point, p: f64, u: Point, pt: FluidPressure) -> ExactSample {
        let phi = self.porosity.phi(x);
        let g = self.porosity.grad_log_phi(x);
        let dot = g[0] * pt.grad[0] + g[1] * pt.grad[1] + g[2] * pt.grad[2];
        let f = p - phi.powf(1.5) * (2.0 * dot + pt.lap);
        ExactSample {
            p,
            u,
            ptilde: Some(pt.value),
            f,
            delta_g: [0.0; 3],
        }
    }
}

/// Pointwise residuals of the two first-order equations, evaluated with
/// fourth-order central differences (step `step`) of the closed forms.
/// Returns (max |momentum residual component|, |mass residual|).
pub fn pointwise_residual(case: &ManufacturedCase, x: &Point, step: f64) -> (f64, f64) {
    let dim = case.dim();
    let ex = case.exact(x);
    let c = case.coefficients(x);
    let stencil = |d: usize, g: &dyn Fn(&Point) -> f64| -> f64 {
        let shifted = |t: f64| {
            let mut y = *x;
            y[d] += t;
            g(&y)
        };
        (-shifted(2.0 * step) + 8.0 * shifted(step) - 8.0 * shifted(-step) + shifted(-2.0 * step))
            / (12.0 * step)
    };
    let mut r1: f64 = 0.0;
    let mut div = 0.0;
    for d in 0..dim {
        let grad_c1p = stencil(d, &|y| case.coefficients(y).c1 * case.exact(y).p);
        r1 = r1.max((ex.u[d] - c.c2[d] * ex.p + grad_c1p - ex.delta_g[d]).abs());
        div += stencil(d, &|y| case.coefficients(y).c1 * case.exact(y).u[d]);
    }
    let c3u: f64 = (0..dim).map(|d| c.c3[d] * ex.u[d]).sum();
    let r2 = (c3u + ex.p + div - ex.f).abs();
    (r1, r2)
}

/// Maximum residual over `samples` random points of `region`, which should
/// sit inside the two-phase region.
pub fn verify_case_residual_in(
    case: &ManufacturedCase,
    samples: usize,
    region: &BoxDomain,
    seed: u64,
) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = case.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut x = [0.0; 3];
        for d in 0..dim {
            x[d] = rng.gen_range(region.lo[d]..region.hi[d]);
        }
        let (r1, r2) = pointwise_residual(case, &x, 1e-5);
        worst = worst.max(r1).max(r2);
    }
    worst
}

/// Residual on the two-phase region pulled `0.05` away from the interface.
pub fn verify_case_residual(case: &ManufacturedCase, samples: usize) -> f64 {
    let mut region = case.two_phase_box();
    if case.has_one_phase_region() {
        for d in 0..2 {
            region.lo[d] += 0.05;
        }
    }
    verify_case_residual_in(case, samples, &region, 20240611)
}
