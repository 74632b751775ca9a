//! Dense and sparse linear algebra used by the element-local and global solves.

mod dense;
mod sparse;

pub use dense::{dense_lu_solve, DenseMatrix, LuFactorization, PIVOT_TOLERANCE};
pub use sparse::{
    relative_residual, solve_refined, sparse_assemble, sparse_lu_solve, SparseLu, SparseMatrix,
};
