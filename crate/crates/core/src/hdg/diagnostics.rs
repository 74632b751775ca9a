//! Uncondensed system, energy identity and conservation residual.

use super::problem::{HdgProblem, Rhs};
use super::solver::HdgSolution;
use crate::error::{Error, Result};
use crate::linalg::{sparse_lu_solve, SparseMatrix};

/// Elements allowed in the monolithic oracle.
pub const MONOLITHIC_ELEMENT_LIMIT: usize = 512;

/// The full (u, p, p̂) system, with p̂ on every face including Dirichlet ones.
#[derive(Debug, Clone)]
pub struct MonolithicSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Number of element unknowns; face unknowns follow.
    pub element_dofs: usize,
}

impl MonolithicSystem {
    pub fn solve(&self) -> Result<Vec<f64>> {
        sparse_lu_solve(&self.matrix, &self.rhs)
    }
}

impl HdgProblem<'_> {
    pub fn assemble_monolithic(&self, rhs: Option<&Rhs>) -> Result<MonolithicSystem> {
        let ne = self.mesh.elements.len();
        if ne > MONOLITHIC_ELEMENT_LIMIT {
            return Err(Error::SizeGuard {
                limit: MONOLITHIC_ELEMENT_LIMIT,
                elements: ne,
            });
        }
        let sp = &self.space;
        let n = sp.local_dofs();
        let nf = sp.nf();
        let offset = ne * n;
        let total = offset + self.mesh.faces.len() * nf;
        let mut triplets = Vec::new();
        let mut b = vec![0.0; total];
        for e in 0..ne {
            let local = self.assemble_local(e);
            let r0 = e * n;
            let elem_rhs = match rhs {
                Some(r) => &r.elements[e],
                None => &local.rhs,
            };
            b[r0..r0 + n].copy_from_slice(elem_rhs);
            let slot_dof = |s: usize| offset + local.trace_faces[s / nf] * nf + s % nf;
            for i in 0..n {
                for j in 0..n {
                    triplets.push((r0 + i, r0 + j, local.a[(i, j)]));
                }
                for s in 0..local.b.cols() {
                    triplets.push((r0 + i, slot_dof(s), local.b[(i, s)]));
                }
            }
            for s in 0..local.c.rows() {
                for j in 0..n {
                    triplets.push((slot_dof(s), r0 + j, local.c[(s, j)]));
                }
                for t in 0..local.d.cols() {
                    triplets.push((slot_dof(s), slot_dof(t), local.d[(s, t)]));
                }
            }
        }
        for (f, face) in self.mesh.faces.iter().enumerate() {
            if !face.boundary {
                continue;
            }
            let t = self.dirichlet_matrix(f);
            let r = match rhs {
                Some(r) => r.dirichlet[f].clone(),
                None => self.dirichlet_rhs(f),
            };
            for m in 0..nf {
                b[offset + f * nf + m] = r[m];
                for l in 0..nf {
                    triplets.push((offset + f * nf + m, offset + f * nf + l, t[(m, l)]));
                }
            }
        }
        Ok(MonolithicSystem {
            matrix: crate::linalg::sparse_assemble(&triplets, total)?,
            rhs: b,
            element_dofs: offset,
        })
    }

    /// `a(x; x)` from the assembled bilinear form, and the closed-form norm
    /// `‖u‖² + ‖p‖² + ‖p̂‖²_{Γ_D,τ} + ‖p‖²_{Γ_D,τ} + Σ_K ‖p − p̂‖²_{∂K∖Γ_D,τ}`
    /// (weights |τ|). `x` uses the monolithic layout.
    pub fn energy_product(&self, system: &MonolithicSystem, x: &[f64]) -> (f64, f64) {
        let form = system.matrix.quadratic_form(x);
        (form, self.energy_norm(x))
    }

    pub fn energy_norm(&self, x: &[f64]) -> f64 {
        let sp = &self.space;
        let nk = sp.nk();
        let nf = sp.nf();
        let dim = sp.dim;
        let n = sp.local_dofs();
        let offset = self.mesh.elements.len() * n;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut total = 0.0;
        for (e, el) in self.mesh.elements.iter().enumerate() {
            let xe = &x[e * n..(e + 1) * n];
            let eq = sp.element_quadrature(el);
            for q in 0..eq.points.len() {
                let phi = sp.vol_basis.row(q);
                for comp in 0..=dim {
                    let v = dot(&xe[comp * nk..(comp + 1) * nk], phi);
                    total += eq.weights[q] * v * v;
                }
            }
            let pe = &xe[dim * nk..];
            for &f in &el.faces {
                let fd = &self.faces[f];
                let tau = self.tau_on(f, e);
                let psi = sp.element_basis_at(el, &fd.points);
                let lam = &x[offset + f * nf..offset + (f + 1) * nf];
                let boundary = self.mesh.faces[f].boundary;
                for q in 0..fd.points.len() {
                    let w = fd.weights[q] * tau[q].abs();
                    let p = dot(pe, psi.row(q));
                    let ph = dot(lam, sp.face_basis.row(q));
                    total += if boundary {
                        w * (p * p + ph * ph)
                    } else {
                        w * (p - ph) * (p - ph)
                    };
                }
            }
        }
        total
    }

    /// Largest `|⟨[[c1 u·n + τ(p − p̂)]], μ⟩|` over interior faces and face basis functions.
    pub fn conservation_residual(&self, sol: &HdgSolution) -> f64 {
        let sp = &self.space;
        let nf = sp.nf();
        let mut worst: f64 = 0.0;
        for (f, face) in self.mesh.faces.iter().enumerate() {
            let Some(nb) = face.neighbor else { continue };
            let fd = &self.faces[f];
            let lam = sol.face_phat(f);
            let mut r = vec![0.0; nf];
            for e in [face.owner.element, nb.element] {
                let el = &self.mesh.elements[e];
                let nrm = self.mesh.outward_normal(f, e);
                let tau = self.tau_on(f, e);
                let psi = sp.element_basis_at(el, &fd.points);
                for q in 0..fd.points.len() {
                    let (p, u) = sol.eval_with_basis(e, psi.row(q));
                    let mu = sp.face_basis.row(q);
                    let ph: f64 = lam.iter().zip(mu).map(|(a, b)| a * b).sum();
                    let un: f64 = (0..sp.dim).map(|d| u[d] * nrm[d]).sum();
                    let flux = fd.c1[q] * un + tau[q] * (p - ph);
                    for m in 0..nf {
                        r[m] -= fd.weights[q] * flux * mu[m];
                    }
                }
            }
            worst = r.iter().fold(worst, |acc, v| acc.max(v.abs()));
        }
        worst
    }
}
