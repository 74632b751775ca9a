//! A discretized problem: mesh + case + order + stabilization, with the
//! per-face data every HDG operation shares.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::space::Space;
use crate::discretization::Point;
use crate::error::{Error, Result};
use crate::mesh::{check_interface_alignment, Mesh};
use crate::physics::{eval_tau, FaceContext, ManufacturedCase, StabilizationPolicy};

/// Which elements decide the phase of a face when choosing τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceTau {
    /// One value per face, classified at the face centroid; interface faces count as one-phase.
    #[default]
    FaceCentroid,
    /// One value per face side, classified by that side's element.
    ElementSide,
}

/// Length scale behind the `1/h` rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauLength {
    /// Element side length of the structured grid.
    #[default]
    Side,
    /// Mesh h, the largest element diameter.
    Diameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub policy: StabilizationPolicy,
    /// Quadrature exactness is `2k + quadrature_boost` during assembly.
    pub quadrature_boost: usize,
    pub interface_tau: InterfaceTau,
    pub tau_length: TauLength,
    /// Fault injection: assemble with -τ. Only for exercising the diagnostics.
    #[serde(skip)]
    pub flip_tau_sign: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            policy: StabilizationPolicy::default(),
            quadrature_boost: 4,
            interface_tau: InterfaceTau::default(),
            tau_length: TauLength::default(),
            flip_tau_sign: false,
        }
    }
}

impl SolverOptions {
    pub fn with_policy(policy: StabilizationPolicy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }
}

/// Face rule points with coefficient and τ values.
#[derive(Debug, Clone)]
pub struct FaceData {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub c1: Vec<f64>,
    pub one_phase: bool,
    pub tau_owner: Vec<f64>,
    /// Present only when the neighbor side uses different values.
    pub tau_neighbor: Option<Vec<f64>>,
}

/// Element right-hand sides and Dirichlet projection right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub elements: Vec<Vec<f64>>,
    /// Empty for interior faces.
    pub dirichlet: Vec<Vec<f64>>,
}

pub struct HdgProblem<'a> {
    pub mesh: &'a Mesh,
    pub case: &'a ManufacturedCase,
    pub k: usize,
    pub options: SolverOptions,
    pub space: Arc<Space>,
    pub faces: Vec<FaceData>,
    pub element_one_phase: Vec<bool>,
    /// Position of each interior face in the trace system.
    pub trace_rank: Vec<Option<usize>>,
    pub n_trace_faces: usize,
}

impl<'a> HdgProblem<'a> {
    pub fn new(
        mesh: &'a Mesh,
        case: &'a ManufacturedCase,
        k: usize,
        options: SolverOptions,
    ) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter(
                "polynomial order must be at least 1".into(),
            ));
        }
        if mesh.dim != case.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional mesh for the {}-dimensional case {}",
                mesh.dim,
                case.dim(),
                case.name
            )));
        }
        options.policy.validate()?;
        if case.has_one_phase_region()
            && !check_interface_alignment(mesh, &|x: &Point| case.one_phase(x))
        {
            return Err(Error::InterfaceMisaligned);
        }
        let space = Arc::new(Space::new(mesh.shape, k, 2 * k + options.quadrature_boost)?);
        let h_tau = match options.tau_length {
            TauLength::Side => mesh.side_length(),
            TauLength::Diameter => mesh.h,
        };
        let element_one_phase: Vec<bool> = mesh
            .elements
            .iter()
            .map(|el| case.one_phase(&el.centroid))
            .collect();
        let sign = if options.flip_tau_sign { -1.0 } else { 1.0 };
        let mut faces = Vec::with_capacity(mesh.faces.len());
        let mut singular = 0usize;
        for (f, face) in mesh.faces.iter().enumerate() {
            let (points, weights) = space.face_points(mesh, f);
            let c1: Vec<f64> = points.iter().map(|x| case.coefficients(x).c1).collect();
            let one_phase = case.one_phase(&face.map.centroid());
            let tau_for = |phase: bool| -> Result<Vec<f64>> {
                let ctx = FaceContext {
                    h: h_tau,
                    c1: &c1,
                    one_phase: phase,
                };
                Ok(eval_tau(&options.policy, &ctx)?
                    .into_iter()
                    .map(|t| sign * t)
                    .collect())
            };
            let (owner_phase, neighbor_phase) = match options.interface_tau {
                InterfaceTau::FaceCentroid => (one_phase, one_phase),
                InterfaceTau::ElementSide => {
                    let o = element_one_phase[face.owner.element];
                    (o, face.neighbor.map_or(o, |s| element_one_phase[s.element]))
                }
            };
            let tau_owner = match tau_for(owner_phase) {
                Ok(t) => t,
                Err(Error::SingularStabilization { .. }) => {
                    singular += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let tau_neighbor = if neighbor_phase != owner_phase {
                match tau_for(neighbor_phase) {
                    Ok(t) => Some(t),
                    Err(Error::SingularStabilization { .. }) => {
                        singular += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            faces.push(FaceData {
                points,
                weights,
                c1,
                one_phase,
                tau_owner,
                tau_neighbor,
            });
        }
        if singular > 0 {
            return Err(Error::SingularStabilization { faces: singular });
        }
        let mut trace_rank = vec![None; mesh.faces.len()];
        let mut n_trace_faces = 0;
        for (f, face) in mesh.faces.iter().enumerate() {
            if !face.boundary {
                trace_rank[f] = Some(n_trace_faces);
                n_trace_faces += 1;
            }
        }
        Ok(Self {
            mesh,
            case,
            k,
            options,
            space,
            faces,
            element_one_phase,
            trace_rank,
            n_trace_faces,
        })
    }

    /// τ seen from element `e` on face `f`.
    pub fn tau_on(&self, f: usize, e: usize) -> &[f64] {
        let fd = &self.faces[f];
        match (&fd.tau_neighbor, self.mesh.faces[f].owner.element == e) {
            (Some(t), false) => t,
            _ => &fd.tau_owner,
        }
    }

    pub fn trace_dofs(&self) -> usize {
        self.n_trace_faces * self.space.nf()
    }

    /// Global faces of `e` that carry trace unknowns, in local face order.
    pub fn trace_faces_of(&self, e: usize) -> Vec<usize> {
        self.mesh.elements[e]
            .faces
            .iter()
            .copied()
            .filter(|&f| !self.mesh.faces[f].boundary)
            .collect()
    }

    pub fn tau_range(&self, e: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &f in &self.mesh.elements[e].faces {
            for &t in self.tau_on(f, e) {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        (lo, hi)
    }

    /// Right-hand sides generated by the case data.
    pub fn case_rhs(&self) -> Rhs {
        let elements = (0..self.mesh.elements.len())
            .map(|e| self.assemble_local(e).rhs)
            .collect();
        let dirichlet = (0..self.mesh.faces.len())
            .map(|f| self.dirichlet_rhs(f))
            .collect();
        Rhs {
            elements,
            dirichlet,
        }
    }

    pub fn zero_rhs(&self) -> Rhs {
        let n = self.space.local_dofs();
        let nf = self.space.nf();
        Rhs {
            elements: vec![vec![0.0; n]; self.mesh.elements.len()],
            dirichlet: self
                .mesh
                .faces
                .iter()
                .map(|f| {
                    if f.boundary {
                        vec![0.0; nf]
                    } else {
                        Vec::new()
                    }
                })
                .collect(),
        }
    }

    /// `⟨τ g_D, μ⟩` on a boundary face, empty on interior faces.
    pub fn dirichlet_rhs(&self, f: usize) -> Vec<f64> {
        if !self.mesh.faces[f].boundary {
            return Vec::new();
        }
        let fd = &self.faces[f];
        let nf = self.space.nf();
        let mut r = vec![0.0; nf];
        for q in 0..fd.points.len() {
            let g = self.case.dirichlet(&fd.points[q]);
            let s = fd.weights[q] * fd.tau_owner[q] * g;
            for (m, &mu) in self.space.face_basis.row(q).iter().enumerate() {
                r[m] += s * mu;
            }
        }
        r
    }

    /// `⟨τ μ_l, μ_m⟩` on a boundary face.
    pub fn dirichlet_matrix(&self, f: usize) -> crate::linalg::DenseMatrix {
        let fd = &self.faces[f];
        let nf = self.space.nf();
        let mut t = crate::linalg::DenseMatrix::zeros(nf, nf);
        for q in 0..fd.points.len() {
            let w = fd.weights[q] * fd.tau_owner[q];
            let mu = self.space.face_basis.row(q);
            for m in 0..nf {
                for l in 0..nf {
                    t[(m, l)] += w * mu[m] * mu[l];
                }
            }
        }
        t
    }
}
