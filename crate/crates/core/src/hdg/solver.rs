//! Condense, solve for the traces, recover.

use std::sync::Arc;

use rayon::prelude::*;

use super::local::Condensed;
use super::problem::{HdgProblem, Rhs, SolverOptions};
use super::space::Space;
use crate::discretization::{Point, Shape};
use crate::error::{Error, Result};
use crate::linalg::{relative_residual, solve_refined, sparse_assemble, SparseMatrix};
use crate::mesh::Mesh;
use crate::physics::{ManufacturedCase, StabilizationPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveInfo {
    pub case: String,
    pub k: usize,
    pub n: usize,
    pub shape: Shape,
    pub policy: String,
    pub trace_dofs: usize,
}

#[derive(Debug, Clone)]
pub struct HdgSolution {
    pub space: Arc<Space>,
    /// Element-major, `dim * nk` values per element.
    pub u: Vec<f64>,
    /// Element-major, `nk` values per element.
    pub p: Vec<f64>,
    /// Face-major, `nf` values per face.
    pub phat: Vec<f64>,
    pub trace_residual: f64,
    pub info: SolveInfo,
}

impl HdgSolution {
    pub fn num_elements(&self) -> usize {
        self.p.len() / self.space.nk()
    }

    pub fn element_u(&self, e: usize) -> &[f64] {
        let m = self.space.dim * self.space.nk();
        &self.u[e * m..(e + 1) * m]
    }

    pub fn element_p(&self, e: usize) -> &[f64] {
        let nk = self.space.nk();
        &self.p[e * nk..(e + 1) * nk]
    }

    pub fn face_phat(&self, f: usize) -> &[f64] {
        let nf = self.space.nf();
        &self.phat[f * nf..(f + 1) * nf]
    }

    /// Local (u, p) vector of an element in assembly order.
    pub fn element_vector(&self, e: usize) -> Vec<f64> {
        let mut v = self.element_u(e).to_vec();
        v.extend_from_slice(self.element_p(e));
        v
    }

    /// All unknowns in the monolithic layout: element blocks, then every face.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.u.len() + self.p.len() + self.phat.len());
        for e in 0..self.num_elements() {
            v.extend(self.element_vector(e));
        }
        v.extend_from_slice(&self.phat);
        v
    }

    pub fn from_vector(template: &HdgSolution, x: &[f64]) -> Self {
        let nk = template.space.nk();
        let dim = template.space.dim;
        let ne = template.num_elements();
        let n = (dim + 1) * nk;
        let mut u = Vec::with_capacity(ne * dim * nk);
        let mut p = Vec::with_capacity(ne * nk);
        for e in 0..ne {
            u.extend_from_slice(&x[e * n..e * n + dim * nk]);
            p.extend_from_slice(&x[e * n + dim * nk..(e + 1) * n]);
        }
        Self {
            space: template.space.clone(),
            u,
            p,
            phat: x[ne * n..].to_vec(),
            trace_residual: 0.0,
            info: template.info.clone(),
        }
    }

    /// (p, u) at a physical point of element `e`.
    pub fn eval(&self, mesh: &Mesh, e: usize, x: &Point) -> (f64, Point) {
        let sp = &self.space;
        let phi = sp.element_basis_at(&mesh.elements[e], &[*x]);
        self.eval_with_basis(e, phi.row(0))
    }

    /// (p, u) from precomputed basis values of element `e`.
    pub fn eval_with_basis(&self, e: usize, phi: &[f64]) -> (f64, Point) {
        let nk = self.space.nk();
        let pe = self.element_p(e);
        let ue = self.element_u(e);
        let p = pe.iter().zip(phi).map(|(a, b)| a * b).sum();
        let mut u = [0.0; 3];
        for (d, ud) in u.iter_mut().enumerate().take(self.space.dim) {
            *ud = ue[d * nk..(d + 1) * nk]
                .iter()
                .zip(phi)
                .map(|(a, b)| a * b)
                .sum();
        }
        (p, u)
    }
}

#[derive(Debug, Clone)]
pub struct TraceSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Row offset of each interior face, in units of face dofs.
    pub face_rank: Vec<Option<usize>>,
}

impl HdgProblem<'_> {
    pub fn condense_all(&self, rhs: Option<&Rhs>) -> Result<Vec<Condensed>> {
        (0..self.mesh.elements.len())
            .into_par_iter()
            .map(|e| {
                let mut local = self.assemble_local(e);
                if let Some(r) = rhs {
                    local.rhs.clone_from(&r.elements[e]);
                }
                self.condense(&local)
            })
            .collect()
    }

    pub fn assemble_trace_system(&self, condensed: &[Condensed]) -> Result<TraceSystem> {
        let nf = self.space.nf();
        let n = self.trace_dofs();
        let mut triplets = Vec::new();
        let mut rhs = vec![0.0; n];
        for c in condensed {
            let ranks: Vec<usize> = c
                .trace_faces
                .iter()
                .map(|&f| {
                    self.trace_rank[f]
                        .ok_or_else(|| Error::InvalidMesh(format!("face {f} has no trace dofs")))
                })
                .collect::<Result<_>>()?;
            for (i, &ri) in ranks.iter().enumerate() {
                for m in 0..nf {
                    let row = ri * nf + m;
                    rhs[row] += c.schur_rhs[i * nf + m];
                    for (j, &rj) in ranks.iter().enumerate() {
                        for l in 0..nf {
                            triplets.push((row, rj * nf + l, c.schur[(i * nf + m, j * nf + l)]));
                        }
                    }
                }
            }
        }
        Ok(TraceSystem {
            matrix: sparse_assemble(&triplets, n)?,
            rhs,
            face_rank: self.trace_rank.clone(),
        })
    }

    /// Trace values of element `e` gathered from the global trace vector.
    fn gather(&self, c: &Condensed, lambda: &[f64]) -> Vec<f64> {
        let nf = self.space.nf();
        let mut out = Vec::with_capacity(c.trace_faces.len() * nf);
        for &f in &c.trace_faces {
            let r = self.trace_rank[f].expect("interior face");
            out.extend_from_slice(&lambda[r * nf..(r + 1) * nf]);
        }
        out
    }

    pub fn solve(&self) -> Result<HdgSolution> {
        self.solve_with(None)
    }

    /// Three-step solve; `rhs` replaces the case data when given.
    pub fn solve_with(&self, rhs: Option<&Rhs>) -> Result<HdgSolution> {
        let sp = &self.space;
        let nf = sp.nf();
        let nk = sp.nk();
        let dim = sp.dim;
        let condensed = self.condense_all(rhs)?;
        let trace = self.assemble_trace_system(&condensed)?;
        let (lambda, trace_residual) = if trace.rhs.is_empty() {
            (Vec::new(), 0.0)
        } else {
            let lu = trace.matrix.lu()?;
            let lambda = solve_refined(&trace.matrix, &lu, &trace.rhs)?;
            let res = relative_residual(&trace.matrix, &lambda, &trace.rhs);
            (lambda, res)
        };
        let locals: Vec<Vec<f64>> = condensed
            .par_iter()
            .map(|c| c.recover(&self.gather(c, &lambda)))
            .collect();
        let ne = self.mesh.elements.len();
        let mut u = Vec::with_capacity(ne * dim * nk);
        let mut p = Vec::with_capacity(ne * nk);
        for x in &locals {
            u.extend_from_slice(&x[..dim * nk]);
            p.extend_from_slice(&x[dim * nk..]);
        }
        let mut phat = vec![0.0; self.mesh.faces.len() * nf];
        for (f, face) in self.mesh.faces.iter().enumerate() {
            let vals = if face.boundary {
                let r = match rhs {
                    Some(r) => r.dirichlet[f].clone(),
                    None => self.dirichlet_rhs(f),
                };
                self.dirichlet_matrix(f).lu()?.solve_vec(&r)?
            } else {
                let r = self.trace_rank[f].expect("interior face");
                lambda[r * nf..(r + 1) * nf].to_vec()
            };
            phat[f * nf..(f + 1) * nf].copy_from_slice(&vals);
        }
        Ok(HdgSolution {
            space: self.space.clone(),
            u,
            p,
            phat,
            trace_residual,
            info: SolveInfo {
                case: self.case.name.clone(),
                k: self.k,
                n: self.mesh.n,
                shape: self.mesh.shape,
                policy: self.options.policy.label(),
                trace_dofs: self.trace_dofs(),
            },
        })
    }
}

/// Builds the problem and runs the three-step solve.
pub fn solve(
    mesh: &Mesh,
    case: &ManufacturedCase,
    k: usize,
    policy: StabilizationPolicy,
) -> Result<HdgSolution> {
    HdgProblem::new(mesh, case, k, SolverOptions::with_policy(policy))?.solve()
}
