use serde::{Deserialize, Serialize};

use super::polynomials::gauss_legendre;
use crate::error::{Error, Result};

/// Coordinates are always stored in three slots; unused trailing slots are zero.
pub type Point = [f64; 3];

/// Reference cell shapes. Segment and quadrilateral also serve as face shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Segment,
    Quad,
    Tri,
    Hex,
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Segment => 1,
            Shape::Quad | Shape::Tri => 2,
            Shape::Hex => 3,
        }
    }

    /// Shape of the faces of a cell of this shape.
    pub fn face_shape(self) -> Option<Shape> {
        match self {
            Shape::Quad | Shape::Tri => Some(Shape::Segment),
            Shape::Hex => Some(Shape::Quad),
            Shape::Segment => None,
        }
    }

    /// Reference measure: 2 for [-1,1], 4 for [-1,1]², 8 for [-1,1]³, 1/2 for the unit triangle.
    pub fn reference_measure(self) -> f64 {
        match self {
            Shape::Segment => 2.0,
            Shape::Quad => 4.0,
            Shape::Hex => 8.0,
            Shape::Tri => 0.5,
        }
    }

    pub fn reference_centroid(self) -> Point {
        match self {
            Shape::Tri => [1.0 / 3.0, 1.0 / 3.0, 0.0],
            _ => [0.0; 3],
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub shape: Shape,
    pub degree: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

pub const MAX_QUADRATURE_DEGREE: usize = 80;

/// Rule exact for polynomials of total (simplex) or per-coordinate (tensor)
/// degree `degree` on the reference shape. Tensor Gauss–Legendre on
/// [-1,1]^d; collapsed Gauss–Legendre on the unit triangle.
pub fn make_quadrature(shape: Shape, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::Unsupported(format!(
            "quadrature degree {degree} exceeds {MAX_QUADRATURE_DEGREE}"
        )));
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match shape {
        Shape::Segment => {
            for i in 0..n {
                points.push([x[i], 0.0, 0.0]);
                weights.push(w[i]);
            }
        }
        Shape::Quad => {
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j], 0.0]);
                    weights.push(w[i] * w[j]);
                }
            }
        }
        Shape::Hex => {
            for l in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        points.push([x[i], x[j], x[l]]);
                        weights.push(w[i] * w[j] * w[l]);
                    }
                }
            }
        }
        Shape::Tri => {
            // Duffy collapse: the Jacobian adds one degree in the collapsed direction.
            let nb = (degree + 1) / 2 + 1;
            let (xb, wb) = gauss_legendre(nb);
            for j in 0..nb {
                for i in 0..n {
                    let (a, b) = (x[i], xb[j]);
                    points.push([(1.0 + a) * (1.0 - b) / 4.0, (1.0 + b) / 2.0, 0.0]);
                    weights.push(w[i] * wb[j] * (1.0 - b) / 8.0);
                }
            }
        }
    }
    Ok(QuadratureRule {
        shape,
        degree,
        points,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_moment() {
        let q = make_quadrature(Shape::Quad, 4).unwrap();
        let v = q.integrate(|p| p[0] * p[0] * p[1] * p[1]);
        assert!((v - 4.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn triangle_area() {
        let q = make_quadrature(Shape::Tri, 0).unwrap();
        assert!((q.integrate(|_| 1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn triangle_monomials_exact() {
        // ∫_T x^a y^b = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).fold(1.0, |acc, k| acc * k as f64);
        for degree in 0..12u32 {
            let q = make_quadrature(Shape::Tri, degree as usize).unwrap();
            for a in 0..=degree {
                let b = degree - a;
                let v = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((v - exact).abs() < 1e-14, "x^{a} y^{b}");
            }
        }
    }

    #[test]
    fn hex_volume_and_weights_positive() {
        let q = make_quadrature(Shape::Hex, 6).unwrap();
        assert!((q.integrate(|_| 1.0) - 8.0).abs() < 1e-13);
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn degree_limit() {
        assert!(make_quadrature(Shape::Segment, 500).is_err());
    }
}
