//! Reference elements, quadrature and element maps.

pub mod geometry;
pub mod polynomials;
pub mod quadrature;
pub mod reference;

pub use geometry::{physical_map, AffineMap, FaceMap};
pub use quadrature::{make_quadrature, Point, QuadratureRule, Shape};
pub use reference::{basis_dimension, ReferenceElement};

use crate::error::{Error, Result};

/// Trace space on a face: a nodal basis on the segment or the square.
pub type FaceSpace = ReferenceElement;

pub fn make_reference_element(shape: Shape, k: usize) -> Result<ReferenceElement> {
    ReferenceElement::new(shape, k)
}

pub fn make_face_space(cell: Shape, k: usize) -> Result<FaceSpace> {
    let face = cell
        .face_shape()
        .ok_or_else(|| Error::Unsupported(format!("{cell:?} cells have no face space")))?;
    ReferenceElement::new(face, k)
}
