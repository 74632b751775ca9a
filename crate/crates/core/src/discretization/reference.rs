//! Nodal Lagrange bases on reference cells.
//!
//! Every basis is built on top of an orthonormal modal basis (tensor
//! Legendre on [-1,1]^d, Dubiner on the unit triangle) through the inverse
//! of the nodal Vandermonde matrix, which keeps high orders well conditioned.
//! The modal basis is public too: its first mode is the constant, which the
//! post-processing solves rely on.

use std::f64::consts::PI;

use super::polynomials::{gauss_lobatto, jacobi_all, jacobi_grad_all, legendre_with_derivatives};
use super::quadrature::{Point, Shape};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    shape: Shape,
    order: usize,
    nodes: Vec<Point>,
    vinv: DenseMatrix,
}

impl ReferenceElement {
    pub fn new(shape: Shape, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::Unsupported(format!(
                "polynomial order {order} exceeds {MAX_ORDER}"
            )));
        }
        let nodes = match shape {
            Shape::Segment => gauss_lobatto(order + 1)
                .into_iter()
                .map(|x| [x, 0.0, 0.0])
                .collect(),
            Shape::Quad => {
                let x = gauss_lobatto(order + 1);
                let mut nodes = Vec::new();
                for &y in &x {
                    for &xx in &x {
                        nodes.push([xx, y, 0.0]);
                    }
                }
                nodes
            }
            Shape::Hex => {
                let x = gauss_lobatto(order + 1);
                let mut nodes = Vec::new();
                for &z in &x {
                    for &y in &x {
                        for &xx in &x {
                            nodes.push([xx, y, z]);
                        }
                    }
                }
                nodes
            }
            Shape::Tri => warp_blend_triangle_nodes(order),
        };
        let n = nodes.len();
        let mut v = DenseMatrix::zeros(n, n);
        for (i, node) in nodes.iter().enumerate() {
            let (vals, _) = modal_eval(shape, order, node);
            v.row_mut(i).copy_from_slice(&vals);
        }
        let vinv = v.lu()?.inverse()?;
        Ok(Self {
            shape,
            order,
            nodes,
            vinv,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Nodal basis values, one row per point.
    pub fn basis_at(&self, points: &[Point]) -> DenseMatrix {
        let modal = self.modal_at(points);
        modal.matmul(&self.vinv).expect("consistent sizes")
    }

    /// Reference-coordinate gradients of the nodal basis, one matrix per direction.
    pub fn basis_gradients_at(&self, points: &[Point]) -> Vec<DenseMatrix> {
        self.modal_gradients_at(points)
            .into_iter()
            .map(|g| g.matmul(&self.vinv).expect("consistent sizes"))
            .collect()
    }

    pub fn modal_at(&self, points: &[Point]) -> DenseMatrix {
        let n = self.len();
        let mut out = DenseMatrix::zeros(points.len(), n);
        for (q, p) in points.iter().enumerate() {
            let (vals, _) = modal_eval(self.shape, self.order, p);
            out.row_mut(q).copy_from_slice(&vals);
        }
        out
    }

    pub fn modal_gradients_at(&self, points: &[Point]) -> Vec<DenseMatrix> {
        let n = self.len();
        let d = self.dim();
        let mut out = vec![DenseMatrix::zeros(points.len(), n); d];
        for (q, p) in points.iter().enumerate() {
            let (_, grads) = modal_eval(self.shape, self.order, p);
            for (j, g) in grads.iter().enumerate() {
                for (dir, m) in out.iter_mut().enumerate() {
                    m[(q, j)] = g[dir];
                }
            }
        }
        out
    }
}

/// Expected basis dimension for a shape/order pair.
pub fn basis_dimension(shape: Shape, order: usize) -> usize {
    match shape {
        Shape::Segment => order + 1,
        Shape::Quad => (order + 1).pow(2),
        Shape::Hex => (order + 1).pow(3),
        Shape::Tri => (order + 1) * (order + 2) / 2,
    }
}

/// Orthonormal modal basis values and gradients at one reference point.
pub fn modal_eval(shape: Shape, order: usize, p: &Point) -> (Vec<f64>, Vec<Point>) {
    match shape {
        Shape::Segment => {
            let (v, d) = legendre_with_derivatives(order, p[0]);
            let grads = d.iter().map(|&g| [g, 0.0, 0.0]).collect();
            (v, grads)
        }
        Shape::Quad => {
            let (vx, dx) = legendre_with_derivatives(order, p[0]);
            let (vy, dy) = legendre_with_derivatives(order, p[1]);
            let mut vals = Vec::with_capacity((order + 1).pow(2));
            let mut grads = Vec::with_capacity((order + 1).pow(2));
            for j in 0..=order {
                for i in 0..=order {
                    vals.push(vx[i] * vy[j]);
                    grads.push([dx[i] * vy[j], vx[i] * dy[j], 0.0]);
                }
            }
            (vals, grads)
        }
        Shape::Hex => {
            let (vx, dx) = legendre_with_derivatives(order, p[0]);
            let (vy, dy) = legendre_with_derivatives(order, p[1]);
            let (vz, dz) = legendre_with_derivatives(order, p[2]);
            let mut vals = Vec::with_capacity((order + 1).pow(3));
            let mut grads = Vec::with_capacity((order + 1).pow(3));
            for l in 0..=order {
                for j in 0..=order {
                    for i in 0..=order {
                        vals.push(vx[i] * vy[j] * vz[l]);
                        grads.push([
                            dx[i] * vy[j] * vz[l],
                            vx[i] * dy[j] * vz[l],
                            vx[i] * vy[j] * dz[l],
                        ]);
                    }
                }
            }
            (vals, grads)
        }
        Shape::Tri => dubiner_eval(order, p),
    }
}

/// Dubiner basis on the unit triangle, orthonormal up to a constant factor.
fn dubiner_eval(order: usize, p: &Point) -> (Vec<f64>, Vec<Point>) {
    let r = 2.0 * p[0] - 1.0;
    let s = 2.0 * p[1] - 1.0;
    let a = if (1.0 - s).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    let b = s;
    let fa = jacobi_all(order, 0, 0, a);
    let dfa = jacobi_grad_all(order, 0, 0, a);
    let half_1mb = 0.5 * (1.0 - b);
    let mut vals = Vec::new();
    let mut grads = Vec::new();
    for i in 0..=order {
        let gb = jacobi_all(order - i, 2 * i as u32 + 1, 0, b);
        let dgb = jacobi_grad_all(order - i, 2 * i as u32 + 1, 0, b);
        let scale = 2f64.powf(i as f64 + 0.5);
        let pow_i = half_1mb.powi(i as i32);
        let pow_im1 = if i > 0 {
            half_1mb.powi(i as i32 - 1)
        } else {
            1.0
        };
        for j in 0..=order - i {
            vals.push(scale * fa[i] * gb[j] * pow_i);
            let mut dr = dfa[i] * gb[j];
            let mut ds = dfa[i] * gb[j] * 0.5 * (1.0 + a);
            if i > 0 {
                dr *= pow_im1;
                ds *= pow_im1;
            }
            let mut tmp = dgb[j] * pow_i;
            if i > 0 {
                tmp -= 0.5 * i as f64 * gb[j] * pow_im1;
            }
            ds += fa[i] * tmp;
            // d/dx = 2 d/dr on the unit triangle
            grads.push([2.0 * scale * dr, 2.0 * scale * ds, 0.0]);
        }
    }
    (vals, grads)
}

/// Warburton's warp & blend nodes mapped to the unit triangle.
fn warp_blend_triangle_nodes(order: usize) -> Vec<Point> {
    if order == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0, 0.0]];
    }
    const ALPHA_OPT: [f64; 15] = [
        0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832, 1.3648, 1.4773, 1.4959,
        1.5743, 1.5770, 1.6223, 1.6258,
    ];
    let alpha = if order < 16 {
        ALPHA_OPT[order - 1]
    } else {
        5.0 / 3.0
    };
    let nf = order as f64;
    let gll = gauss_lobatto(order + 1);
    let req: Vec<f64> = (0..=order).map(|i| -1.0 + 2.0 * i as f64 / nf).collect();
    let warp_factor = |rout: f64| -> f64 {
        // interpolate the GLL displacement with equispaced Lagrange polynomials
        let mut warp = 0.0;
        for i in 0..=order {
            let mut l = 1.0;
            for j in 0..=order {
                if j != i {
                    l *= (rout - req[j]) / (req[i] - req[j]);
                }
            }
            warp += l * (gll[i] - req[i]);
        }
        if rout.abs() < 1.0 - 1e-10 {
            warp / (1.0 - rout * rout)
        } else {
            0.0
        }
    };
    let sqrt3 = 3f64.sqrt();
    let mut nodes = Vec::new();
    for n in 0..=order {
        for m in 0..=order - n {
            let l1 = n as f64 / nf;
            let l3 = m as f64 / nf;
            let l2 = 1.0 - l1 - l3;
            let mut x = -l2 + l3;
            let mut y = (-l2 - l3 + 2.0 * l1) / sqrt3;
            let blend1 = 4.0 * l2 * l3;
            let blend2 = 4.0 * l1 * l3;
            let blend3 = 4.0 * l1 * l2;
            let warp1 = blend1 * warp_factor(l3 - l2) * (1.0 + (alpha * l1).powi(2));
            let warp2 = blend2 * warp_factor(l1 - l3) * (1.0 + (alpha * l2).powi(2));
            let warp3 = blend3 * warp_factor(l2 - l1) * (1.0 + (alpha * l3).powi(2));
            x += warp1 + (2.0 * PI / 3.0).cos() * warp2 + (4.0 * PI / 3.0).cos() * warp3;
            y += (2.0 * PI / 3.0).sin() * warp2 + (4.0 * PI / 3.0).sin() * warp3;
            // equilateral -> biunit -> unit triangle
            let b1 = (sqrt3 * y + 1.0) / 3.0;
            let b2 = (-3.0 * x - sqrt3 * y + 2.0) / 6.0;
            let b3 = (3.0 * x - sqrt3 * y + 2.0) / 6.0;
            let r = -b2 + b3 - b1;
            let s = -b2 - b3 + b1;
            nodes.push([(r + 1.0) / 2.0, (s + 1.0) / 2.0, 0.0]);
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::quadrature::make_quadrature;

    #[test]
    fn dimensions() {
        assert_eq!(ReferenceElement::new(Shape::Quad, 2).unwrap().len(), 9);
        assert_eq!(ReferenceElement::new(Shape::Tri, 3).unwrap().len(), 10);
        assert_eq!(ReferenceElement::new(Shape::Hex, 2).unwrap().len(), 27);
        assert_eq!(ReferenceElement::new(Shape::Segment, 4).unwrap().len(), 5);
        for shape in [Shape::Segment, Shape::Quad, Shape::Tri, Shape::Hex] {
            for k in 0..4 {
                assert_eq!(
                    ReferenceElement::new(shape, k).unwrap().len(),
                    basis_dimension(shape, k)
                );
            }
        }
    }

    #[test]
    fn order_limit() {
        assert!(ReferenceElement::new(Shape::Quad, 11).is_err());
    }

    #[test]
    fn nodal_property_and_partition_of_unity() {
        for shape in [Shape::Segment, Shape::Quad, Shape::Tri] {
            for k in 0..=10 {
                let re = ReferenceElement::new(shape, k).unwrap();
                let phi = re.basis_at(re.nodes());
                for i in 0..re.len() {
                    for j in 0..re.len() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (phi[(i, j)] - expect).abs() < 1e-12,
                            "{shape:?} k={k} ({i},{j}) = {}",
                            phi[(i, j)]
                        );
                    }
                }
                let q = make_quadrature(shape, 5).unwrap();
                let phi = re.basis_at(&q.points);
                for row in 0..phi.rows() {
                    let s: f64 = phi.row(row).iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hex_nodal_property() {
        let re = ReferenceElement::new(Shape::Hex, 3).unwrap();
        let phi = re.basis_at(re.nodes());
        let id = DenseMatrix::identity(re.len());
        assert!(phi.sub(&id).max_abs() < 1e-12);
    }

    #[test]
    fn triangle_modal_basis_is_orthogonal() {
        let k = 5;
        let q = make_quadrature(Shape::Tri, 2 * k).unwrap();
        let re = ReferenceElement::new(Shape::Tri, k).unwrap();
        let psi = re.modal_at(&q.points);
        let n = re.len();
        for i in 0..n {
            for j in 0..n {
                let ip: f64 = (0..q.len())
                    .map(|p| q.weights[p] * psi[(p, i)] * psi[(p, j)])
                    .sum();
                if i == j {
                    assert!(ip > 0.0);
                } else {
                    assert!(ip.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for shape in [Shape::Quad, Shape::Tri, Shape::Hex] {
            let re = ReferenceElement::new(shape, 3).unwrap();
            let p = [0.21, 0.33, 0.12];
            let g = re.basis_gradients_at(&[p]);
            for dir in 0..shape.dim() {
                let mut pp = p;
                let mut pm = p;
                pp[dir] += h;
                pm[dir] -= h;
                let fp = re.basis_at(&[pp]);
                let fm = re.basis_at(&[pm]);
                for i in 0..re.len() {
                    let fd = (fp[(0, i)] - fm[(0, i)]) / (2.0 * h);
                    assert!(
                        (g[dir][(0, i)] - fd).abs() < 1e-6,
                        "{shape:?} dir {dir} fn {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn triangle_vertex_gradient_is_finite() {
        let re = ReferenceElement::new(Shape::Tri, 4).unwrap();
        let g = re.basis_gradients_at(&[[0.0, 1.0, 0.0]]);
        assert!(g.iter().all(|m| m.as_slice().iter().all(|v| v.is_finite())));
    }
}
