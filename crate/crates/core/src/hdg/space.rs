//! Reference data shared by every element of a solve.

use crate::discretization::{
    make_face_space, make_quadrature, FaceSpace, Point, QuadratureRule, ReferenceElement, Shape,
};
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::mesh::{Element, Mesh};

#[derive(Debug, Clone)]
pub struct Space {
    pub shape: Shape,
    pub dim: usize,
    pub k: usize,
    pub element: ReferenceElement,
    pub face: FaceSpace,
    pub vol_rule: QuadratureRule,
    pub face_rule: QuadratureRule,
    /// Element basis at the volume rule points (nq × nk).
    pub vol_basis: DenseMatrix,
    /// Reference gradients at the volume rule points, one table per direction.
    pub vol_grad_ref: Vec<DenseMatrix>,
    /// Face basis at the face rule points (nfq × nf).
    pub face_basis: DenseMatrix,
}

/// Volume quadrature data on one physical element.
#[derive(Debug, Clone)]
pub struct ElementQuadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Physical gradients, one (nq × nk) table per direction.
    pub grads: Vec<DenseMatrix>,
}

impl Space {
    /// `degree` is the exactness degree used for both volume and face rules.
    pub fn new(shape: Shape, k: usize, degree: usize) -> Result<Self> {
        let element = ReferenceElement::new(shape, k)?;
        let face = make_face_space(shape, k)?;
        let vol_rule = make_quadrature(shape, degree)?;
        let face_rule = make_quadrature(face.shape(), degree)?;
        let vol_basis = element.basis_at(&vol_rule.points);
        let vol_grad_ref = element.basis_gradients_at(&vol_rule.points);
        let face_basis = face.basis_at(&face_rule.points);
        Ok(Self {
            shape,
            dim: shape.dim(),
            k,
            element,
            face,
            vol_rule,
            face_rule,
            vol_basis,
            vol_grad_ref,
            face_basis,
        })
    }

    /// Element basis dimension.
    pub fn nk(&self) -> usize {
        self.element.len()
    }

    /// Face basis dimension.
    pub fn nf(&self) -> usize {
        self.face.len()
    }

    /// Local (u, p) unknowns per element.
    pub fn local_dofs(&self) -> usize {
        (self.dim + 1) * self.nk()
    }

    pub fn element_quadrature(&self, el: &Element) -> ElementQuadrature {
        let nq = self.vol_rule.len();
        let nk = self.nk();
        let points = self.vol_rule.points.iter().map(|p| el.map.map(p)).collect();
        let weights = self
            .vol_rule
            .weights
            .iter()
            .map(|w| w * el.map.det_abs())
            .collect();
        let mut grads = vec![DenseMatrix::zeros(nq, nk); self.dim];
        for q in 0..nq {
            for j in 0..nk {
                let mut g = [0.0; 3];
                for (d, t) in self.vol_grad_ref.iter().enumerate() {
                    g[d] = t[(q, j)];
                }
                let pg = el.map.transform_gradient(&g);
                for (d, t) in grads.iter_mut().enumerate() {
                    t[(q, j)] = pg[d];
                }
            }
        }
        ElementQuadrature {
            points,
            weights,
            grads,
        }
    }

    /// Physical points and weights of the face rule on mesh face `f`.
    pub fn face_points(&self, mesh: &Mesh, f: usize) -> (Vec<Point>, Vec<f64>) {
        mesh.faces[f].map.physical_rule(&self.face_rule)
    }

    /// Element basis of `el` evaluated at physical points on its boundary (npts × nk).
    pub fn element_basis_at(&self, el: &Element, points: &[Point]) -> DenseMatrix {
        let refs: Vec<Point> = points.iter().map(|x| el.map.inverse_map(x)).collect();
        self.element.basis_at(&refs)
    }
}
