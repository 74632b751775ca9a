//! Element-wise pressure reconstructions of one degree higher, and the
//! unscaled fields.

use rayon::prelude::*;

use super::solver::HdgSolution;
use crate::discretization::{make_quadrature, Point, ReferenceElement};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mesh::Mesh;
use crate::physics::ManufacturedCase;

/// A broken polynomial field stored per element in a modal or nodal basis.
/// Elements without coefficients are undefined.
#[derive(Debug, Clone)]
pub struct ElementField {
    pub basis: ReferenceElement,
    pub modal: bool,
    pub components: usize,
    pub coeffs: Vec<Option<Vec<f64>>>,
}

impl ElementField {
    /// Basis table at reference points (npts × nb).
    pub fn table(&self, ref_points: &[Point]) -> DenseMatrix {
        if self.modal {
            self.basis.modal_at(ref_points)
        } else {
            self.basis.basis_at(ref_points)
        }
    }

    pub fn is_defined(&self, e: usize) -> bool {
        self.coeffs[e].is_some()
    }

    /// Component values of element `e` at the rows of `table`; `None` when undefined.
    pub fn values(&self, e: usize, table: &DenseMatrix) -> Option<Vec<[f64; 3]>> {
        let c = self.coeffs[e].as_ref()?;
        let nb = self.basis.len();
        Some(
            (0..table.rows())
                .map(|q| {
                    let row = table.row(q);
                    let mut v = [0.0; 3];
                    for (comp, vc) in v.iter_mut().enumerate().take(self.components) {
                        *vc = c[comp * nb..(comp + 1) * nb]
                            .iter()
                            .zip(row)
                            .map(|(a, b)| a * b)
                            .sum();
                    }
                    v
                })
                .collect(),
        )
    }

    /// Value at a physical point of element `e`.
    pub fn eval(&self, mesh: &Mesh, e: usize, x: &Point) -> Option<[f64; 3]> {
        let r = mesh.elements[e].map.inverse_map(x);
        self.values(e, &self.table(&[r])).map(|v| v[0])
    }

    /// Integral of the first component over element `e`.
    pub fn element_mean(&self, mesh: &Mesh, e: usize) -> Option<f64> {
        let rule = make_quadrature(self.basis.shape(), 2 * self.basis.order()).ok()?;
        let vals = self.values(e, &self.table(&rule.points))?;
        let det = mesh.elements[e].map.det_abs();
        Some(
            vals.iter()
                .zip(&rule.weights)
                .map(|(v, w)| v[0] * w * det)
                .sum(),
        )
    }
}

/// Shared per-call data: rule, tables for the solution basis and the
/// degree k+1 modal basis.
struct Setup {
    modal: ReferenceElement,
    weights_ref: Vec<f64>,
    points_ref: Vec<Point>,
    sol_table: DenseMatrix,
    modal_table: DenseMatrix,
    modal_grads: Vec<DenseMatrix>,
}

impl Setup {
    fn new(sol: &HdgSolution) -> Result<Self> {
        let sp = &sol.space;
        let modal = ReferenceElement::new(sp.shape, sp.k + 1)?;
        let rule = make_quadrature(sp.shape, 2 * (sp.k + 1) + 6)?;
        Ok(Self {
            sol_table: sp.element.basis_at(&rule.points),
            modal_table: modal.modal_at(&rule.points),
            modal_grads: modal.modal_gradients_at(&rule.points),
            modal,
            weights_ref: rule.weights,
            points_ref: rule.points,
        })
    }

    fn field(&self, coeffs: Vec<Option<Vec<f64>>>) -> ElementField {
        ElementField {
            basis: self.modal.clone(),
            modal: true,
            components: 1,
            coeffs,
        }
    }

    /// Gradient system over element `e`, constant-mode row replaced by the mean
    /// constraint. `flux(q, x)` gives the target gradient at quadrature point q,
    /// `mean(q, x)` the integrand of the mean.
    fn solve_element(
        &self,
        mesh: &Mesh,
        e: usize,
        flux: impl Fn(usize, &Point) -> [f64; 3],
        mean: impl Fn(usize, &Point) -> f64,
    ) -> Result<Vec<f64>> {
        let el = &mesh.elements[e];
        let dim = mesh.dim;
        let nb = self.modal.len();
        let nq = self.points_ref.len();
        let det = el.map.det_abs();
        let mut grads = vec![[0.0; 3]; nq * nb];
        for q in 0..nq {
            for j in 0..nb {
                let mut g = [0.0; 3];
                for (d, t) in self.modal_grads.iter().enumerate() {
                    g[d] = t[(q, j)];
                }
                grads[q * nb + j] = el.map.transform_gradient(&g);
            }
        }
        let mut k = DenseMatrix::zeros(nb, nb);
        let mut rhs = vec![0.0; nb];
        for q in 0..nq {
            let x = el.map.map(&self.points_ref[q]);
            let w = self.weights_ref[q] * det;
            let target = flux(q, &x);
            let gq = &grads[q * nb..(q + 1) * nb];
            for i in 1..nb {
                for j in 0..nb {
                    k[(i, j)] += w * (0..dim).map(|d| gq[i][d] * gq[j][d]).sum::<f64>();
                }
                rhs[i] += w * (0..dim).map(|d| target[d] * gq[i][d]).sum::<f64>();
            }
            let row = self.modal_table.row(q);
            for j in 0..nb {
                k[(0, j)] += w * row[j];
            }
            rhs[0] += w * mean(q, &x);
        }
        k.lu()?.solve_vec(&rhs)
    }

    /// L² projection of pointwise values onto the modal space of element `e`.
    fn project(&self, mesh: &Mesh, e: usize, value: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
        let nb = self.modal.len();
        let det = mesh.elements[e].map.det_abs();
        let mut m = DenseMatrix::zeros(nb, nb);
        let mut rhs = vec![0.0; nb];
        for q in 0..self.points_ref.len() {
            let w = self.weights_ref[q] * det;
            let row = self.modal_table.row(q);
            let v = value(q);
            for i in 0..nb {
                for j in 0..nb {
                    m[(i, j)] += w * row[i] * row[j];
                }
                rhs[i] += w * v * row[i];
            }
        }
        m.lu()?.solve_vec(&rhs)
    }
}

/// Scaled-pressure reconstruction p★ of degree k+1 on every element.
/// One-phase elements get p★ = p.
pub fn post_process_scaled(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
) -> Result<ElementField> {
    let setup = Setup::new(sol)?;
    let dim = mesh.dim;
    let coeffs = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let p = sol_values(sol, &setup.sol_table, e);
            if case.one_phase(&mesh.elements[e].centroid) {
                return setup.project(mesh, e, |q| p[q].0).map(Some);
            }
            setup
                .solve_element(
                    mesh,
                    e,
                    |q, x| {
                        let (pq, uq) = p[q];
                        let Some((a, gl)) = case.porosity.post_process_coefficients(x) else {
                            return [0.0; 3];
                        };
                        let dg = case.exact(x).delta_g;
                        let mut t = [0.0; 3];
                        for d in 0..dim {
                            t[d] = -a * uq[d] + 0.5 * gl[d] * pq + a * dg[d];
                        }
                        t
                    },
                    |q, _| p[q].0,
                )
                .map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(setup.field(coeffs))
}

/// Fluid-pressure reconstruction p̃★ of degree k+1 on the listed elements.
/// Elements touching the one-phase region are refused.
pub fn post_process_fluid(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
    elements: &[usize],
) -> Result<ElementField> {
    let setup = Setup::new(sol)?;
    let dim = mesh.dim;
    for &e in elements {
        let el = &mesh.elements[e];
        if el
            .vertices
            .iter()
            .any(|&v| case.one_phase(&mesh.vertices[v]))
        {
            return Err(Error::PostProcessRefused(e));
        }
    }
    let solved = elements
        .par_iter()
        .map(|&e| {
            let p = sol_values(sol, &setup.sol_table, e);
            setup.solve_element(
                mesh,
                e,
                |q, x| {
                    let inv = 1.0 / case.porosity.delta(x);
                    let dg = case.exact(x).delta_g;
                    let mut t = [0.0; 3];
                    for d in 0..dim {
                        t[d] = inv * (dg[d] - p[q].1[d]);
                    }
                    t
                },
                |q, x| p[q].0 / case.porosity.phi(x).sqrt(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coeffs = vec![None; mesh.elements.len()];
    for (&e, c) in elements.iter().zip(solved) {
        coeffs[e] = Some(c);
    }
    Ok(setup.field(coeffs))
}

fn sol_values(sol: &HdgSolution, table: &DenseMatrix, e: usize) -> Vec<(f64, Point)> {
    (0..table.rows())
        .map(|q| sol.eval_with_basis(e, table.row(q)))
        .collect()
}

/// Unscaled fields (p̃, ũ) = (φ^{-1/2} p, δ u) at physical points of element
/// `e`; zero on the one-phase region.
pub fn recover_unscaled(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
    e: usize,
    points: &[Point],
) -> Vec<(f64, Point)> {
    let table = sol.space.element_basis_at(&mesh.elements[e], points);
    points
        .iter()
        .enumerate()
        .map(|(q, x)| {
            if case.one_phase(x) {
                return (0.0, [0.0; 3]);
            }
            let (p, u) = sol.eval_with_basis(e, table.row(q));
            let delta = case.porosity.delta(x);
            (
                p / case.porosity.phi(x).sqrt(),
                [delta * u[0], delta * u[1], delta * u[2]],
            )
        })
        .collect()
}

/// Element-wise L² projection of a scalar function onto the nodal degree-k space.
pub fn l2_projection(
    mesh: &Mesh,
    k: usize,
    f: impl Fn(&Point) -> f64 + Sync,
) -> Result<ElementField> {
    let basis = ReferenceElement::new(mesh.shape, k)?;
    let rule = make_quadrature(mesh.shape, 2 * k + 6)?;
    let table = basis.basis_at(&rule.points);
    let nb = basis.len();
    let mut mass = DenseMatrix::zeros(nb, nb);
    for q in 0..rule.len() {
        let row = table.row(q);
        for i in 0..nb {
            for j in 0..nb {
                mass[(i, j)] += rule.weights[q] * row[i] * row[j];
            }
        }
    }
    let lu = mass.lu()?;
    let coeffs = mesh
        .elements
        .par_iter()
        .map(|el| {
            let mut rhs = vec![0.0; nb];
            for q in 0..rule.len() {
                let v = f(&el.map.map(&rule.points[q])) * rule.weights[q];
                for (r, b) in rhs.iter_mut().zip(table.row(q)) {
                    *r += v * b;
                }
            }
            lu.solve_vec(&rhs).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ElementField {
        basis,
        modal: false,
        components: 1,
        coeffs,
    })
}
