//! Structured box meshes with a face skeleton.
//!
//! Vertices are numbered lexicographically (x fastest). Faces are created the
//! first time an element touches them; that element becomes the owner and
//! the stored unit normal points out of it.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discretization::geometry::{centroid, cross, dot, norm};
use crate::discretization::{AffineMap, FaceMap, Point, Shape};
use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]` in 2 or 3 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
            return Err(Error::InvalidMesh(format!(
                "box corners of dimension {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidMesh("box extent must be positive".into()));
        }
        Ok(Self {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Closed containment with a relative slack of `1e-12`.
    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim()).all(|d| {
            let slack = 1e-12 * (self.hi[d] - self.lo[d]);
            x[d] >= self.lo[d] - slack && x[d] <= self.hi[d] + slack
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub element: usize,
    pub local_face: usize,
}

#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub owner: FaceSide,
    pub neighbor: Option<FaceSide>,
    pub boundary: bool,
    /// Unit normal pointing out of the owner.
    pub normal: Point,
    pub measure: f64,
    pub map: FaceMap,
}

#[derive(Debug, Clone)]
pub struct Element {
    pub vertices: Vec<usize>,
    /// Global face index per local face.
    pub faces: Vec<usize>,
    pub map: AffineMap,
    pub centroid: Point,
    pub diameter: f64,
    pub measure: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub shape: Shape,
    pub domain: BoxDomain,
    /// Elements per axis.
    pub n: usize,
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Maximum element diameter.
    pub h: f64,
}

const QUAD_FACES: [[usize; 2]; 4] = [[0, 1], [1, 2], [2, 3], [3, 0]];
const TRI_FACES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 7, 4],
    [1, 2, 6, 5],
    [0, 1, 5, 4],
    [3, 2, 6, 7],
    [0, 1, 2, 3],
    [4, 5, 6, 7],
];

pub fn local_faces(shape: Shape) -> Vec<Vec<usize>> {
    match shape {
        Shape::Quad => QUAD_FACES.iter().map(|f| f.to_vec()).collect(),
        Shape::Tri => TRI_FACES.iter().map(|f| f.to_vec()).collect(),
        Shape::Hex => HEX_FACES.iter().map(|f| f.to_vec()).collect(),
        Shape::Segment => vec![vec![0], vec![1]],
    }
}

pub fn build_structured_mesh(domain: &BoxDomain, shape: Shape, n: usize) -> Result<Mesh> {
    let dim = domain.dim();
    if n == 0 {
        return Err(Error::InvalidMesh("n must be at least 1".into()));
    }
    match (dim, shape) {
        (2, Shape::Quad) | (2, Shape::Tri) | (3, Shape::Hex) => {}
        _ => {
            return Err(Error::InvalidMesh(format!(
                "{shape:?} elements in {dim} dimensions"
            )))
        }
    }
    let np = n + 1;
    let coord = |d: usize, i: usize| {
        if i == n {
            domain.hi[d]
        } else {
            domain.lo[d] + (domain.hi[d] - domain.lo[d]) * i as f64 / n as f64
        }
    };
    let mut vertices = Vec::new();
    if dim == 2 {
        for j in 0..np {
            for i in 0..np {
                vertices.push([coord(0, i), coord(1, j), 0.0]);
            }
        }
    } else {
        for l in 0..np {
            for j in 0..np {
                for i in 0..np {
                    vertices.push([coord(0, i), coord(1, j), coord(2, l)]);
                }
            }
        }
    }
    let v2 = |i: usize, j: usize| i + np * j;
    let v3 = |i: usize, j: usize, l: usize| i + np * (j + np * l);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    match shape {
        Shape::Quad => {
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![v2(i, j), v2(i + 1, j), v2(i + 1, j + 1), v2(i, j + 1)]);
                }
            }
        }
        Shape::Tri => {
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![v2(i, j), v2(i + 1, j), v2(i + 1, j + 1)]);
                    cells.push(vec![v2(i, j), v2(i + 1, j + 1), v2(i, j + 1)]);
                }
            }
        }
        Shape::Hex => {
            for l in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        cells.push(vec![
                            v3(i, j, l),
                            v3(i + 1, j, l),
                            v3(i + 1, j + 1, l),
                            v3(i, j + 1, l),
                            v3(i, j, l + 1),
                            v3(i + 1, j, l + 1),
                            v3(i + 1, j + 1, l + 1),
                            v3(i, j + 1, l + 1),
                        ]);
                    }
                }
            }
        }
        Shape::Segment => unreachable!(),
    }
    Mesh::from_cells(domain.clone(), shape, n, vertices, cells)
}

impl Mesh {
    /// Builds the skeleton for an explicit cell list.
    pub fn from_cells(
        domain: BoxDomain,
        shape: Shape,
        n: usize,
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let dim = shape.dim();
        let templates = local_faces(shape);
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut elements = Vec::with_capacity(cells.len());
        let mut h: f64 = 0.0;
        for (e, cell) in cells.into_iter().enumerate() {
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "vertex index {bad} out of range"
                )));
            }
            let coords: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let map = AffineMap::from_vertices(shape, &coords)?;
            let c = centroid(&coords);
            let mut diameter: f64 = 0.0;
            for a in 0..coords.len() {
                for b in a + 1..coords.len() {
                    let d = [
                        coords[a][0] - coords[b][0],
                        coords[a][1] - coords[b][1],
                        coords[a][2] - coords[b][2],
                    ];
                    diameter = diameter.max(norm(&d));
                }
            }
            if !(diameter > 0.0) {
                return Err(Error::DegenerateGeometry(diameter));
            }
            h = h.max(diameter);
            let measure = map.det_abs() * shape.reference_measure();
            let mut face_ids = Vec::with_capacity(templates.len());
            for (lf, t) in templates.iter().enumerate() {
                let fv: Vec<usize> = t.iter().map(|&i| cell[i]).collect();
                let mut key = fv.clone();
                key.sort_unstable();
                let side = FaceSide {
                    element: e,
                    local_face: lf,
                };
                let id = match lookup.get(&key) {
                    Some(&id) => {
                        let face = &mut faces[id];
                        if face.neighbor.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "face {id} shared by more than two elements"
                            )));
                        }
                        face.neighbor = Some(side);
                        face.boundary = false;
                        id
                    }
                    None => {
                        let fcoords: Vec<Point> = fv.iter().map(|&v| vertices[v]).collect();
                        let fmap = FaceMap::from_vertices(&fcoords)?;
                        let mut normal = if dim == 2 {
                            let t = [
                                fcoords[1][0] - fcoords[0][0],
                                fcoords[1][1] - fcoords[0][1],
                                0.0,
                            ];
                            [t[1], -t[0], 0.0]
                        } else {
                            let t1 = [
                                fcoords[1][0] - fcoords[0][0],
                                fcoords[1][1] - fcoords[0][1],
                                fcoords[1][2] - fcoords[0][2],
                            ];
                            let t2 = [
                                fcoords[3][0] - fcoords[0][0],
                                fcoords[3][1] - fcoords[0][1],
                                fcoords[3][2] - fcoords[0][2],
                            ];
                            cross(&t1, &t2)
                        };
                        let len = norm(&normal);
                        let fc = fmap.centroid();
                        let out = [fc[0] - c[0], fc[1] - c[1], fc[2] - c[2]];
                        let sign = if dot(&normal, &out) < 0.0 { -1.0 } else { 1.0 };
                        for x in normal.iter_mut() {
                            *x *= sign / len;
                        }
                        faces.push(Face {
                            vertices: fv,
                            owner: side,
                            neighbor: None,
                            boundary: true,
                            normal,
                            measure: fmap.measure(),
                            map: fmap,
                        });
                        lookup.insert(key, faces.len() - 1);
                        faces.len() - 1
                    }
                };
                face_ids.push(id);
            }
            elements.push(Element {
                vertices: cell,
                faces: face_ids,
                map,
                centroid: c,
                diameter,
                measure,
            });
        }
        Ok(Self {
            dim,
            shape,
            domain,
            n,
            vertices,
            elements,
            faces,
            h,
        })
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.boundary).count()
    }

    /// +1 when `element` owns `face`, -1 otherwise.
    pub fn normal_sign(&self, face: usize, element: usize) -> f64 {
        if self.faces[face].owner.element == element {
            1.0
        } else {
            -1.0
        }
    }

    /// Outward unit normal of `element` on `face`.
    pub fn outward_normal(&self, face: usize, element: usize) -> Point {
        let s = self.normal_sign(face, element);
        let n = self.faces[face].normal;
        [s * n[0], s * n[1], s * n[2]]
    }

    /// Element length along the first axis. On uniform structured meshes this is the grid spacing.
    pub fn side_length(&self) -> f64 {
        (self.domain.hi[0] - self.domain.lo[0]) / self.n as f64
    }

    /// Sample points strictly inside an element: a Gauss grid plus vertices pulled slightly inward.
    pub fn interior_samples(&self, element: usize) -> Vec<Point> {
        let el = &self.elements[element];
        let rule = crate::discretization::make_quadrature(self.shape, 6).expect("low degree");
        let mut pts: Vec<Point> = rule.points.iter().map(|p| el.map.map(p)).collect();
        for &v in &el.vertices {
            let x = self.vertices[v];
            let c = el.centroid;
            let t = 1e-9;
            pts.push([
                x[0] + t * (c[0] - x[0]),
                x[1] + t * (c[1] - x[1]),
                x[2] + t * (c[2] - x[2]),
            ]);
        }
        pts
    }

    /// Writes `#vertices`, `#elements` and `#faces` sections. Face records are
    /// `vertices...,owner,neighbor` with an empty neighbor on the boundary.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#vertices")?;
        for v in &self.vertices {
            let coords: Vec<String> = v[..self.dim].iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", coords.join(","))?;
        }
        writeln!(w, "#elements")?;
        for e in &self.elements {
            let ids: Vec<String> = e.vertices.iter().map(|i| i.to_string()).collect();
            writeln!(w, "{}", ids.join(","))?;
        }
        writeln!(w, "#faces")?;
        for f in &self.faces {
            let mut rec: Vec<String> = f.vertices.iter().map(|i| i.to_string()).collect();
            rec.push(f.owner.element.to_string());
            rec.push(
                f.neighbor
                    .map(|s| s.element.to_string())
                    .unwrap_or_default(),
            );
            writeln!(w, "{}", rec.join(","))?;
        }
        Ok(())
    }
}

/// True when every element lies entirely on one side of the one-phase predicate.
pub fn check_interface_alignment(mesh: &Mesh, one_phase: &dyn Fn(&Point) -> bool) -> bool {
    (0..mesh.elements.len()).all(|e| {
        let samples = mesh.interior_samples(e);
        let first = one_phase(&samples[0]);
        samples.iter().all(|p| one_phase(p) == first)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(lo: f64, hi: f64) -> BoxDomain {
        BoxDomain::new(&[lo, lo], &[hi, hi]).unwrap()
    }

    #[test]
    fn quad_counts() {
        let m = build_structured_mesh(&square(0.0, 1.0), Shape::Quad, 4).unwrap();
        assert_eq!(m.elements.len(), 16);
        assert_eq!(m.faces.len(), 40);
        assert_eq!(m.num_boundary_faces(), 16);
        let one = build_structured_mesh(&square(0.0, 1.0), Shape::Quad, 1).unwrap();
        assert_eq!(
            (
                one.elements.len(),
                one.faces.len(),
                one.num_boundary_faces()
            ),
            (1, 4, 4)
        );
    }

    #[test]
    fn tri_counts() {
        let m = build_structured_mesh(&square(0.0, 1.0), Shape::Tri, 4).unwrap();
        assert_eq!(m.elements.len(), 32);
        assert_eq!(m.faces.len(), 56);
    }

    #[test]
    fn hex_counts() {
        let m = build_structured_mesh(&BoxDomain::unit(3), Shape::Hex, 3).unwrap();
        assert_eq!(m.elements.len(), 27);
        // 3 directions × n²(n+1) faces
        assert_eq!(m.faces.len(), 3 * 9 * 4);
        assert_eq!(m.num_boundary_faces(), 6 * 9);
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_structured_mesh(&BoxDomain::unit(3), Shape::Tri, 2).is_err());
        assert!(build_structured_mesh(&BoxDomain::unit(2), Shape::Quad, 0).is_err());
        assert!(BoxDomain::new(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn alignment_examples() {
        let d = square(-1.0, 1.0);
        let pred = |x: &Point| x[0] <= -0.75 || x[1] <= -0.75;
        let m16 = build_structured_mesh(&d, Shape::Quad, 16).unwrap();
        assert!(check_interface_alignment(&m16, &pred));
        let m10 = build_structured_mesh(&d, Shape::Quad, 10).unwrap();
        assert!(!check_interface_alignment(&m10, &pred));
        assert!(check_interface_alignment(&m10, &|_: &Point| false));
    }

    #[test]
    fn csv_sections() {
        let m = build_structured_mesh(&square(0.0, 1.0), Shape::Quad, 1).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("#vertices\n0,0\n1,0\n"));
        assert!(s.contains("#elements\n0,1,3,2\n"));
        assert!(s.contains("#faces\n0,1,0,\n"));
    }
}
