//! Affine maps from reference cells and faces to physical space.
//!
//! Structured meshes only produce parallelograms/boxes and triangles, so every
//! element map is affine: `x = origin + J ξ`.

use super::quadrature::{Point, QuadratureRule, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    dim: usize,
    origin: Point,
    jac: [[f64; 3]; 3],
    inv: [[f64; 3]; 3],
    det: f64,
}

fn half_diff(a: &Point, b: &Point) -> Point {
    [
        (a[0] - b[0]) / 2.0,
        (a[1] - b[1]) / 2.0,
        (a[2] - b[2]) / 2.0,
    ]
}

fn diff(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl AffineMap {
    /// Map for a cell with the mesh's vertex ordering.
    ///
    /// Quad: (v00, v10, v11, v01); hex: bottom quad then top quad; tri: any
    /// counter-clockwise or clockwise triple, the reference vertex (0,0) going to `v[0]`.
    pub fn from_vertices(shape: Shape, v: &[Point]) -> Result<Self> {
        let (origin, cols): (Point, Vec<Point>) = match shape {
            Shape::Segment => {
                let c = [
                    (v[0][0] + v[1][0]) / 2.0,
                    (v[0][1] + v[1][1]) / 2.0,
                    (v[0][2] + v[1][2]) / 2.0,
                ];
                (c, vec![half_diff(&v[1], &v[0])])
            }
            Shape::Quad => {
                let c = centroid(&v[..4]);
                (c, vec![half_diff(&v[1], &v[0]), half_diff(&v[3], &v[0])])
            }
            Shape::Hex => {
                let c = centroid(&v[..8]);
                (
                    c,
                    vec![
                        half_diff(&v[1], &v[0]),
                        half_diff(&v[3], &v[0]),
                        half_diff(&v[4], &v[0]),
                    ],
                )
            }
            Shape::Tri => (v[0], vec![diff(&v[1], &v[0]), diff(&v[2], &v[0])]),
        };
        let dim = shape.dim();
        let mut jac = [[0.0; 3]; 3];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..3 {
                jac[r][c] = col[r];
            }
        }
        Self::new(dim, origin, jac)
    }

    /// `jac[r][c]` is the derivative of physical coordinate `r` with respect to reference coordinate `c`.
    pub fn new(dim: usize, origin: Point, jac: [[f64; 3]; 3]) -> Result<Self> {
        let det = match dim {
            1 => jac[0][0],
            2 => jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0],
            3 => {
                jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                    - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                    + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0])
            }
            _ => return Err(Error::Unsupported(format!("dimension {dim}"))),
        };
        if !(det.abs() > 1e-300) || !det.is_finite() {
            return Err(Error::DegenerateGeometry(det));
        }
        let mut inv = [[0.0; 3]; 3];
        match dim {
            1 => inv[0][0] = 1.0 / det,
            2 => {
                inv[0][0] = jac[1][1] / det;
                inv[0][1] = -jac[0][1] / det;
                inv[1][0] = -jac[1][0] / det;
                inv[1][1] = jac[0][0] / det;
            }
            _ => {
                for r in 0..3 {
                    for c in 0..3 {
                        // cofactor transpose
                        let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                        let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                        inv[r][c] = (jac[r1][c1] * jac[r2][c2] - jac[r1][c2] * jac[r2][c1]) / det;
                    }
                }
            }
        }
        Ok(Self {
            dim,
            origin,
            jac,
            inv,
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn det_abs(&self) -> f64 {
        self.det.abs()
    }

    pub fn jacobian(&self) -> &[[f64; 3]; 3] {
        &self.jac
    }

    pub fn map(&self, xi: &Point) -> Point {
        let mut x = self.origin;
        for r in 0..self.dim {
            for c in 0..self.dim {
                x[r] += self.jac[r][c] * xi[c];
            }
        }
        x
    }

    pub fn inverse_map(&self, x: &Point) -> Point {
        let d = diff(x, &self.origin);
        let mut xi = [0.0; 3];
        for r in 0..self.dim {
            for c in 0..self.dim {
                xi[r] += self.inv[r][c] * d[c];
            }
        }
        xi
    }

    /// Physical gradient from a reference gradient: `J^{-T} ∇ξ`.
    pub fn transform_gradient(&self, g: &Point) -> Point {
        let mut out = [0.0; 3];
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[r] += self.inv[c][r] * g[c];
            }
        }
        out
    }
}

pub fn centroid(v: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in v {
        for d in 0..3 {
            c[d] += p[d];
        }
    }
    let n = v.len() as f64;
    [c[0] / n, c[1] / n, c[2] / n]
}

/// Physical points and integration weights of a reference rule on a mapped cell.
pub fn physical_map(map: &AffineMap, rule: &QuadratureRule) -> (Vec<Point>, Vec<f64>) {
    let points = rule.points.iter().map(|p| map.map(p)).collect();
    let weights = rule.weights.iter().map(|w| w * map.det_abs()).collect();
    (points, weights)
}

/// Parametrization of a straight face: segment `[-1,1]` or parallelogram `[-1,1]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMap {
    shape: Shape,
    origin: Point,
    t1: Point,
    t2: Point,
    measure: f64,
}

impl FaceMap {
    /// Face vertices in cyclic order (two in 2D, four in 3D).
    pub fn from_vertices(v: &[Point]) -> Result<Self> {
        let (shape, origin, t1, t2) = match v.len() {
            2 => (
                Shape::Segment,
                centroid(v),
                half_diff(&v[1], &v[0]),
                [0.0; 3],
            ),
            4 => (
                Shape::Quad,
                centroid(v),
                half_diff(&v[1], &v[0]),
                half_diff(&v[3], &v[0]),
            ),
            n => return Err(Error::InvalidMesh(format!("face with {n} vertices"))),
        };
        let measure = match shape {
            Shape::Segment => 2.0 * norm(&t1),
            _ => 4.0 * norm(&cross(&t1, &t2)),
        };
        if !(measure > 0.0) {
            return Err(Error::DegenerateGeometry(measure));
        }
        Ok(Self {
            shape,
            origin,
            t1,
            t2,
            measure,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn map(&self, s: &Point) -> Point {
        let mut x = self.origin;
        for d in 0..3 {
            x[d] += s[0] * self.t1[d] + s[1] * self.t2[d];
        }
        x
    }

    pub fn centroid(&self) -> Point {
        self.origin
    }

    /// Physical points and weights (scaled by the measure ratio).
    pub fn physical_rule(&self, rule: &QuadratureRule) -> (Vec<Point>, Vec<f64>) {
        let scale = self.measure / rule.shape.reference_measure();
        let points = rule.points.iter().map(|p| self.map(p)).collect();
        let weights = rule.weights.iter().map(|w| w * scale).collect();
        (points, weights)
    }
}

pub fn norm(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
