//! Orthogonal projector onto the divergence-free subspace of trace-free
//! fields (the TT constraint), applied matrix-free through conjugate-gradient
//! solves on the constraint normal equations.

use crate::error::{Error, Result};
use crate::operators::Operators;
use crate::sparse::{conjugate_gradient, Csr, LinOp};
use std::sync::Arc;

/// P = I - C^T (C C^T)^+ C acting on hat coordinates of the trace-free
/// subspace, where C stacks the divergence constraint.
pub struct TtProjector {
    c: Csr,
    ct: Csr,
    jacobi: Vec<f64>,
    pub dim: usize,
    pub constraint_dim: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl TtProjector {
    /// Build from the assembly context and the hat-embedding of the
    /// trace-free subspace into sym2 (columns orthonormal in hat coords).
    pub fn new(ops: &Operators, embed_tf: &LinOp, cg_tol: f64) -> TtProjector {
        let div = ops.divergence();
        let sym_mass = ops.mass(crate::fields::FieldRank::Sym2);
        let oneform_mass = ops.mass(crate::fields::FieldRank::OneForm);
        let inv_sqrt_sym: Vec<f64> = sym_mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let sqrt_oneform: Vec<f64> = oneform_mass.iter().map(|m| m.sqrt()).collect();
        let chain = LinOp::Chain(vec![
            LinOp::Diag(Arc::new(sqrt_oneform)),
            div.op,
            LinOp::Diag(Arc::new(inv_sqrt_sym)),
            embed_tf.clone(),
        ]);
        // materialize for fast matvecs and an exact Jacobi diagonal
        let c = chain.to_csr();
        let ct = c.transpose();
        let mut jacobi = vec![0.0; c.nrows];
        for r in 0..c.nrows {
            let mut s = 0.0;
            for p in c.indptr[r]..c.indptr[r + 1] {
                s += c.values[p] * c.values[p];
            }
            jacobi[r] = if s > 0.0 { s } else { 1.0 };
        }
        TtProjector {
            dim: c.ncols,
            constraint_dim: c.nrows,
            c,
            ct,
            jacobi,
            cg_tol,
            cg_max_iter: 20_000,
        }
    }

    /// Apply the projector; returns (P v, CG iterations).
    pub fn apply(&self, v: &[f64]) -> Result<(Vec<f64>, usize)> {
        let rhs = self.c.matvec(v);
        let normal = |z: &[f64]| -> Vec<f64> { self.c.matvec(&self.ct.matvec(z)) };
        let (z, its) = conjugate_gradient(
            &normal,
            &rhs,
            Some(&self.jacobi),
            self.cg_tol,
            self.cg_max_iter,
        )
        .map_err(|(_, its, res)| {
            Error::solver(
                "constraint CG did not converge",
                format!(
                    "normal equations on {} constraints: residual {res:.3e} after {its} iterations; \
                     the constraint operator is likely ill-conditioned at this resolution",
                    self.constraint_dim
                ),
            )
        })?;
        let corr = self.ct.matvec(&z);
        let mut out = v.to_vec();
        for i in 0..out.len() {
            out[i] -= corr[i];
        }
        Ok((out, its))
    }

    /// Relative constraint violation |C v| / |v|.
    pub fn constraint_residual(&self, v: &[f64]) -> f64 {
        let n = crate::sparse::norm(v);
        if n == 0.0 {
            return 0.0;
        }
        crate::sparse::norm(&self.c.matvec(v)) / n
    }
}
