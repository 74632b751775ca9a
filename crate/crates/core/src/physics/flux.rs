//! Normal flux Jacobian of the first-order form and its eigenstructure.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn check_unit(n: &[f64]) -> Result<()> {
    let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(2..=3).contains(&n.len()) || (len - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "flux Jacobian needs a unit normal in 2 or 3 dimensions, got {n:?}"
        )));
    }
    Ok(())
}

/// `c1 [[0, n], [nᵀ, 0]]`, of size dim+1.
pub fn flux_jacobian(c1: f64, n: &[f64]) -> Result<DenseMatrix> {
    check_unit(n)?;
    let d = n.len();
    let mut a = DenseMatrix::zeros(d + 1, d + 1);
    for i in 0..d {
        a.row_mut(i)[d] = c1 * n[i];
        a.row_mut(d)[i] = c1 * n[i];
    }
    Ok(a)
}

#[derive(Debug, Clone)]
pub struct FluxEigen {
    /// Ascending: -c1, 0 (dim-1 times), c1.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, so the inverse is the transpose.
    pub vectors: DenseMatrix,
}

impl FluxEigen {
    /// `W D W^{-1}`
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let wd = DenseMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        wd.matmul(&self.vectors.transpose()).expect("square")
    }
}

pub fn flux_eigen(c1: f64, n: &[f64]) -> Result<FluxEigen> {
    check_unit(n)?;
    let d = n.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut minus = n.iter().map(|v| v * s).collect::<Vec<_>>();
    minus.push(-s);
    cols.push(minus);
    for t in tangents(n) {
        let mut c = t;
        c.push(0.0);
        cols.push(c);
    }
    let mut plus = n.iter().map(|v| v * s).collect::<Vec<_>>();
    plus.push(s);
    cols.push(plus);
    let mut values = vec![-c1];
    values.extend(std::iter::repeat(0.0).take(d - 1));
    values.push(c1);
    let vectors = DenseMatrix::from_fn(d + 1, d + 1, |i, j| cols[j][i]);
    Ok(FluxEigen { values, vectors })
}

/// Orthonormal basis of the plane orthogonal to `n`.
fn tangents(n: &[f64]) -> Vec<Vec<f64>> {
    if n.len() == 2 {
        return vec![vec![-n[1], n[0]]];
    }
    // Gram-Schmidt from the axis least aligned with n
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
        .unwrap();
    let mut t1 = vec![0.0; 3];
    t1[axis] = 1.0;
    let proj = n[axis];
    for i in 0..3 {
        t1[i] -= proj * n[i];
    }
    let len = t1.iter().map(|v| v * v).sum::<f64>().sqrt();
    t1.iter_mut().for_each(|v| *v /= len);
    let t2 = vec![
        n[1] * t1[2] - n[2] * t1[1],
        n[2] * t1[0] - n[0] * t1[2],
        n[0] * t1[1] - n[1] * t1[0],
    ];
    vec![t1, t2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_axis_example() {
        let e = flux_eigen(1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0, 0.0, 1.0]);
        let a = flux_jacobian(1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!(e.reconstruct().sub(&a).max_abs() < 1e-15);
    }

    #[test]
    fn degenerate_face_is_zero() {
        let a = flux_jacobian(0.0, &[0.6, 0.8]).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        let e = flux_eigen(0.0, &[0.6, 0.8]).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_unit_normal_rejected() {
        assert!(flux_jacobian(1.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let dim = rng.gen_range(2..=3);
            let mut n: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            n.iter_mut().for_each(|v| *v /= len);
            let c1 = rng.gen_range(0.0..5.0);
            let a = flux_jacobian(c1, &n).unwrap();
            let e = flux_eigen(c1, &n).unwrap();
            assert!(e.reconstruct().sub(&a).max_abs() < 1e-12);
            let wtw = e.vectors.transpose().matmul(&e.vectors).unwrap();
            assert!(wtw.sub(&DenseMatrix::identity(dim + 1)).max_abs() < 1e-12);
        }
    }
}
