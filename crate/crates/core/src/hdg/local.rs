//! Element-local weak forms and static condensation.
//!
//! Local unknowns are ordered (u_1 nodes, …, u_dim nodes, p nodes). Trace
//! unknowns are the interior faces of the element in local face order, each
//! contributing one face-space block. With `x` the local unknowns and `λ` the
//! traces:
//!
//! ```text
//! A x + B λ = b          (local solver)
//! C x + D λ = 0          (this element's share of the conservation rows)
//! ```

use super::problem::HdgProblem;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub element: usize,
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
    pub d: DenseMatrix,
    pub rhs: Vec<f64>,
    pub trace_faces: Vec<usize>,
}

/// Result of eliminating the local unknowns of one element.
#[derive(Debug, Clone)]
pub struct Condensed {
    pub element: usize,
    pub trace_faces: Vec<usize>,
    /// `D - C A^{-1} B`
    pub schur: DenseMatrix,
    /// `-C A^{-1} b`
    pub schur_rhs: Vec<f64>,
    /// `A^{-1} B`
    pub x_trace: DenseMatrix,
    /// `A^{-1} b`
    pub x_rhs: Vec<f64>,
}

impl Condensed {
    /// Local unknowns from the element's trace values.
    pub fn recover(&self, lambda: &[f64]) -> Vec<f64> {
        let mut x = self.x_rhs.clone();
        for (i, xi) in x.iter_mut().enumerate() {
            let row = self.x_trace.row(i);
            *xi -= row.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>();
        }
        x
    }
}

impl HdgProblem<'_> {
    pub fn assemble_local(&self, e: usize) -> LocalSystem {
        let sp = &*self.space;
        let mesh = self.mesh;
        let el = &mesh.elements[e];
        let dim = sp.dim;
        let nk = sp.nk();
        let nf = sp.nf();
        let n = sp.local_dofs();
        let po = dim * nk;
        let trace_faces = self.trace_faces_of(e);
        let nl = trace_faces.len() * nf;
        let mut a = DenseMatrix::zeros(n, n);
        let mut b = DenseMatrix::zeros(n, nl);
        let mut c = DenseMatrix::zeros(nl, n);
        let mut d = DenseMatrix::zeros(nl, nl);
        let mut rhs = vec![0.0; n];

        let eq = sp.element_quadrature(el);
        let mut s = vec![0.0; nk];
        let mut t = vec![0.0; nk];
        for q in 0..eq.points.len() {
            let x = &eq.points[q];
            let w = eq.weights[q];
            let co = self.case.coefficients(x);
            let ex = self.case.exact(x);
            let phi = sp.vol_basis.row(q);
            for i in 0..nk {
                let wi = w * phi[i];
                for j in 0..nk {
                    let m = wi * phi[j];
                    for comp in 0..=dim {
                        a[(comp * nk + i, comp * nk + j)] += m;
                    }
                }
                rhs[po + i] += wi * ex.f;
            }
            for ad in 0..dim {
                let g = eq.grads[ad].row(q);
                for i in 0..nk {
                    s[i] = co.c2[ad] * phi[i] + co.c1 * g[i];
                    t[i] = co.c3[ad] * phi[i] - co.c1 * g[i];
                    rhs[ad * nk + i] += w * ex.delta_g[ad] * phi[i];
                }
                for i in 0..nk {
                    let (ws, wt) = (w * s[i], w * t[i]);
                    for j in 0..nk {
                        a[(ad * nk + i, po + j)] -= ws * phi[j];
                        a[(po + i, ad * nk + j)] += wt * phi[j];
                    }
                }
            }
        }

        for &f in &el.faces {
            let fd = &self.faces[f];
            let nrm = mesh.outward_normal(f, e);
            let tau = self.tau_on(f, e);
            let psi = sp.element_basis_at(el, &fd.points);
            let slot = trace_faces.iter().position(|&g| g == f).map(|s| s * nf);
            for q in 0..fd.points.len() {
                let w = fd.weights[q];
                let c1 = fd.c1[q];
                let tq = tau[q];
                let ps = psi.row(q);
                let mu = sp.face_basis.row(q);
                for i in 0..nk {
                    for j in 0..nk {
                        let pp = w * ps[i] * ps[j];
                        a[(po + i, po + j)] += tq * pp;
                        for ad in 0..dim {
                            a[(po + i, ad * nk + j)] += c1 * nrm[ad] * pp;
                        }
                    }
                }
                match slot {
                    Some(s0) => {
                        for i in 0..nk {
                            for m in 0..nf {
                                let pm = w * ps[i] * mu[m];
                                for ad in 0..dim {
                                    b[(ad * nk + i, s0 + m)] += c1 * nrm[ad] * pm;
                                    c[(s0 + m, ad * nk + i)] -= c1 * nrm[ad] * pm;
                                }
                                b[(po + i, s0 + m)] -= tq * pm;
                                c[(s0 + m, po + i)] -= tq * pm;
                            }
                        }
                        for m in 0..nf {
                            for l in 0..nf {
                                d[(s0 + m, s0 + l)] += w * tq * mu[m] * mu[l];
                            }
                        }
                    }
                    None => {
                        let g = self.case.dirichlet(&fd.points[q]);
                        for i in 0..nk {
                            let wg = w * g * ps[i];
                            for ad in 0..dim {
                                rhs[ad * nk + i] -= c1 * nrm[ad] * wg;
                            }
                            rhs[po + i] += tq * wg;
                        }
                    }
                }
            }
        }
        LocalSystem {
            element: e,
            a,
            b,
            c,
            d,
            rhs,
            trace_faces,
        }
    }

    pub fn condense(&self, local: &LocalSystem) -> Result<Condensed> {
        let e = local.element;
        let lu = local.a.lu().map_err(|_| {
            let (tau_min, tau_max) = self.tau_range(e);
            Error::SingularLocalBlock {
                element: e,
                tau_min,
                tau_max,
            }
        })?;
        let n = local.a.rows();
        let nl = local.b.cols();
        let mut rhs = DenseMatrix::zeros(n, nl + 1);
        for i in 0..n {
            let row = rhs.row_mut(i);
            row[..nl].copy_from_slice(local.b.row(i));
            row[nl] = local.rhs[i];
        }
        let x = lu.solve(&rhs)?;
        let x_trace = DenseMatrix::from_fn(n, nl, |i, j| x[(i, j)]);
        let x_rhs = x.col_to_vec(nl);
        let cx = local.c.matmul(&x)?;
        let schur = DenseMatrix::from_fn(nl, nl, |i, j| local.d[(i, j)] - cx[(i, j)]);
        let schur_rhs = (0..nl).map(|i| -cx[(i, nl)]).collect();
        Ok(Condensed {
            element: e,
            trace_faces: local.trace_faces.clone(),
            schur,
            schur_rhs,
            x_trace,
            x_rhs,
        })
    }
}
