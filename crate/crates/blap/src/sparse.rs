//! Minimal CSR matrices and symbolic operator expressions.
//!
//! Operators are kept as expression trees (sums, chains, diagonal scalings,
//! transposes of CSR leaves) and applied matrix-free; explicit COO entries are
//! materialized only on demand (dense fallback eigensolves, cache export).

use rayon::prelude::*;
use std::sync::Arc;

/// Deterministic pairwise-tree summation. All global reductions in the crate
/// go through this so results do not depend on thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        let mut s = 0.0;
        for &x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Dot product with pairwise-tree reduction.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn rec(a: &[f64], b: &[f64]) -> f64 {
        if a.len() <= 16 {
            let mut s = 0.0;
            for i in 0..a.len() {
                s += a[i] * b[i];
            }
            return s;
        }
        let mid = a.len() / 2;
        rec(&a[..mid], &b[..mid]) + rec(&a[mid..], &b[mid..])
    }
    rec(a, b)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Build from unsorted triplets; duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Csr {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut indices = vec![0u32; triplets.len()];
        let mut values = vec![0f64; triplets.len()];
        let mut cursor = counts.clone();
        for &(r, c, v) in triplets {
            let p = cursor[r];
            indices[p] = c as u32;
            values[p] = v;
            cursor[r] += 1;
        }
        let mut m = Csr {
            nrows,
            ncols,
            indptr: counts,
            indices,
            values,
        };
        m.sort_and_compress();
        m
    }

    /// Row-wise builder: `row_fn(i)` returns the (col, value) entries of row i.
    /// Rows are generated in parallel; the result is deterministic.
    pub fn from_rows<F>(nrows: usize, ncols: usize, row_fn: F) -> Csr
    where
        F: Fn(usize) -> Vec<(usize, f64)> + Sync + Send,
    {
        let rows: Vec<Vec<(usize, f64)>> = (0..nrows).into_par_iter().map(row_fn).collect();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0usize);
        let mut nnz = 0usize;
        for r in &rows {
            nnz += r.len();
            indptr.push(nnz);
        }
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for r in &rows {
            for &(c, v) in r {
                indices.push(c as u32);
                values.push(v);
            }
        }
        let mut m = Csr {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        m.sort_and_compress();
        m
    }

    fn sort_and_compress(&mut self) {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        indptr.push(0usize);
        let mut scratch: Vec<(u32, f64)> = Vec::new();
        for r in 0..self.nrows {
            scratch.clear();
            for p in self.indptr[r]..self.indptr[r + 1] {
                scratch.push((self.indices[p], self.values[p]));
            }
            scratch.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < scratch.len() {
                let col = scratch[i].0;
                let mut v = 0.0;
                while i < scratch.len() && scratch[i].0 == col {
                    v += scratch[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    indices.push(col);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut s = 0.0;
            for p in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[p] * x[self.indices[p] as usize];
            }
            *yr = s;
        });
        y
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0f64; self.nnz()];
        let mut cursor = counts.clone();
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[p] as usize;
                let q = cursor[c];
                indices[q] = r as u32;
                values[q] = self.values[p];
                cursor[c] += 1;
            }
        }
        Csr {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// Sparse product self * other.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows);
        let ncols = other.ncols;
        Csr::from_rows(self.nrows, ncols, |r| {
            let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
            for p in self.indptr[r]..self.indptr[r + 1] {
                let k = self.indices[p] as usize;
                let v = self.values[p];
                for q in other.indptr[k]..other.indptr[k + 1] {
                    *acc.entry(other.indices[q] as usize).or_insert(0.0) += v * other.values[q];
                }
            }
            acc.into_iter().filter(|e| e.1 != 0.0).collect()
        })
    }

    pub fn scaled(&self, s: f64) -> Csr {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &Csr) -> Csr {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        Csr::from_rows(self.nrows, self.ncols, |r| {
            let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
            for p in self.indptr[r]..self.indptr[r + 1] {
                *acc.entry(self.indices[p] as usize).or_insert(0.0) += self.values[p];
            }
            for p in other.indptr[r]..other.indptr[r + 1] {
                *acc.entry(other.indices[p] as usize).or_insert(0.0) += other.values[p];
            }
            acc.into_iter().filter(|e| e.1 != 0.0).collect()
        })
    }

    pub fn identity(n: usize) -> Csr {
        Csr {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn diag(d: &[f64]) -> Csr {
        let n = d.len();
        Csr {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: d.to_vec(),
        }
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                t.push((r, self.indices[p] as usize, self.values[p]));
            }
        }
        t
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows)
            .map(|r| self.indptr[r + 1] - self.indptr[r])
            .max()
            .unwrap_or(0)
    }
}

/// Operator between multi-component node-major DOF vectors, built from
/// scalar-grid matrices routed between components plus dense per-node blocks.
///
/// Applying it costs one scalar matvec per matrix term; nothing
/// component-structured is ever materialized unless `to_csr` is called.
#[derive(Debug)]
pub struct ComponentOp {
    pub node_count: usize,
    pub in_comps: usize,
    pub out_comps: usize,
    /// (out_comp, in_comp, scale, scalar-grid matrix)
    pub mat_terms: Vec<(usize, usize, f64, Arc<Csr>)>,
    /// Dense per-node blocks, laid out blocks[node * oc * ic], row-major
    /// (out component major). Applied in addition to the matrix terms.
    pub blocks: Option<Arc<Vec<f64>>>,
}

impl ComponentOp {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let nc = self.node_count;
        assert_eq!(x.len(), nc * self.in_comps);
        let mut out = vec![0.0; nc * self.out_comps];
        let mut scratch = vec![0.0; nc];
        for &(oc, ic, scale, ref mat) in &self.mat_terms {
            for node in 0..nc {
                scratch[node] = x[node * self.in_comps + ic];
            }
            let y = mat.matvec(&scratch);
            for node in 0..nc {
                out[node * self.out_comps + oc] += scale * y[node];
            }
        }
        if let Some(blocks) = &self.blocks {
            let bsz = self.out_comps * self.in_comps;
            out.par_chunks_mut(self.out_comps)
                .enumerate()
                .for_each(|(node, chunk)| {
                    let b = &blocks[node * bsz..(node + 1) * bsz];
                    let xin = &x[node * self.in_comps..(node + 1) * self.in_comps];
                    for oc in 0..self.out_comps {
                        let mut s = 0.0;
                        for ic in 0..self.in_comps {
                            s += b[oc * self.in_comps + ic] * xin[ic];
                        }
                        chunk[oc] += s;
                    }
                });
        }
        out
    }

    pub fn transpose(&self) -> ComponentOp {
        let blocks = self.blocks.as_ref().map(|b| {
            let mut t = vec![0.0; b.len()];
            let bsz = self.out_comps * self.in_comps;
            for node in 0..self.node_count {
                for oc in 0..self.out_comps {
                    for ic in 0..self.in_comps {
                        t[node * bsz + ic * self.out_comps + oc] =
                            b[node * bsz + oc * self.in_comps + ic];
                    }
                }
            }
            Arc::new(t)
        });
        ComponentOp {
            node_count: self.node_count,
            in_comps: self.out_comps,
            out_comps: self.in_comps,
            mat_terms: self
                .mat_terms
                .iter()
                .map(|&(oc, ic, s, ref m)| (ic, oc, s, Arc::new(m.transpose())))
                .collect(),
            blocks,
        }
    }

    pub fn to_csr(&self) -> Csr {
        let mut triplets = Vec::new();
        for &(oc, ic, scale, ref mat) in &self.mat_terms {
            for (r, c, v) in mat.to_triplets() {
                triplets.push((r * self.out_comps + oc, c * self.in_comps + ic, scale * v));
            }
        }
        if let Some(blocks) = &self.blocks {
            let bsz = self.out_comps * self.in_comps;
            for node in 0..self.node_count {
                for oc in 0..self.out_comps {
                    for ic in 0..self.in_comps {
                        let v = blocks[node * bsz + oc * self.in_comps + ic];
                        if v != 0.0 {
                            triplets.push((
                                node * self.out_comps + oc,
                                node * self.in_comps + ic,
                                v,
                            ));
                        }
                    }
                }
            }
        }
        Csr::from_triplets(
            self.node_count * self.out_comps,
            self.node_count * self.in_comps,
            &triplets,
        )
    }
}

/// Symbolic linear operator: CSR leaves composed by sums, chains and diagonals.
#[derive(Debug, Clone)]
pub enum LinOp {
    Csr(Arc<Csr>),
    Diag(Arc<Vec<f64>>),
    Identity(usize),
    Scaled(f64, Box<LinOp>),
    /// Applied right to left: Chain[A, B] x = A (B x).
    Chain(Vec<LinOp>),
    Sum(Vec<LinOp>),
    Component(Arc<ComponentOp>),
}

impl LinOp {
    pub fn csr(m: Csr) -> LinOp {
        LinOp::Csr(Arc::new(m))
    }

    pub fn nrows(&self) -> usize {
        match self {
            LinOp::Csr(m) => m.nrows,
            LinOp::Diag(d) => d.len(),
            LinOp::Identity(n) => *n,
            LinOp::Scaled(_, a) => a.nrows(),
            LinOp::Chain(v) => v.first().unwrap().nrows(),
            LinOp::Sum(v) => v.first().unwrap().nrows(),
            LinOp::Component(c) => c.node_count * c.out_comps,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            LinOp::Csr(m) => m.ncols,
            LinOp::Diag(d) => d.len(),
            LinOp::Identity(n) => *n,
            LinOp::Scaled(_, a) => a.ncols(),
            LinOp::Chain(v) => v.last().unwrap().ncols(),
            LinOp::Sum(v) => v.first().unwrap().ncols(),
            LinOp::Component(c) => c.node_count * c.in_comps,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LinOp::Csr(m) => m.matvec(x),
            LinOp::Diag(d) => {
                assert_eq!(d.len(), x.len());
                d.iter().zip(x).map(|(a, b)| a * b).collect()
            }
            LinOp::Identity(n) => {
                assert_eq!(*n, x.len());
                x.to_vec()
            }
            LinOp::Scaled(s, a) => {
                let mut y = a.apply(x);
                for v in &mut y {
                    *v *= s;
                }
                y
            }
            LinOp::Chain(ops) => {
                let mut y = x.to_vec();
                for op in ops.iter().rev() {
                    y = op.apply(&y);
                }
                y
            }
            LinOp::Sum(ops) => {
                let mut y = ops[0].apply(x);
                for op in &ops[1..] {
                    let z = op.apply(x);
                    for (a, b) in y.iter_mut().zip(z) {
                        *a += b;
                    }
                }
                y
            }
            LinOp::Component(c) => c.apply(x),
        }
    }

    /// Symbolic transpose. CSR leaves are transposed eagerly; leaves in this
    /// crate are small (axis stencils, pointwise blocks, rearrangements).
    pub fn transpose(&self) -> LinOp {
        match self {
            LinOp::Csr(m) => LinOp::csr(m.transpose()),
            LinOp::Diag(d) => LinOp::Diag(d.clone()),
            LinOp::Identity(n) => LinOp::Identity(*n),
            LinOp::Scaled(s, a) => LinOp::Scaled(*s, Box::new(a.transpose())),
            LinOp::Chain(ops) => LinOp::Chain(ops.iter().rev().map(|o| o.transpose()).collect()),
            LinOp::Sum(ops) => LinOp::Sum(ops.iter().map(|o| o.transpose()).collect()),
            LinOp::Component(c) => LinOp::Component(Arc::new(c.transpose())),
        }
    }

    /// Materialize to an explicit CSR matrix.
    pub fn to_csr(&self) -> Csr {
        match self {
            LinOp::Csr(m) => (**m).clone(),
            LinOp::Diag(d) => Csr::diag(d),
            LinOp::Identity(n) => Csr::identity(*n),
            LinOp::Scaled(s, a) => a.to_csr().scaled(*s),
            LinOp::Chain(ops) => {
                let mut m = ops.last().unwrap().to_csr();
                for op in ops.iter().rev().skip(1) {
                    m = op.to_csr().matmul(&m);
                }
                m
            }
            LinOp::Sum(ops) => {
                let mut m = ops[0].to_csr();
                for op in &ops[1..] {
                    m = m.add(&op.to_csr());
                }
                m
            }
            LinOp::Component(c) => c.to_csr(),
        }
    }
}

/// Conjugate gradient for a symmetric positive (semi)definite operator.
/// Returns (solution, iterations). The system must be consistent.
pub fn conjugate_gradient(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    precond_diag: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), (Vec<f64>, usize, f64)> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let prec = |r: &[f64]| -> Vec<f64> {
        match precond_diag {
            Some(d) => r.iter().zip(d).map(|(ri, di)| ri / di).collect(),
            None => r.to_vec(),
        }
    };
    let mut z = prec(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Direction with no curvature: the remaining residual lives in the
            // (near) null space; accept the current iterate.
            return Ok((x, it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= rel_tol * bnorm {
            return Ok((x, it + 1));
        }
        z = prec(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = norm(&r) / bnorm;
    Err((x, max_iter, rn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_roundtrip_and_matvec() {
        let m = Csr::from_triplets(2, 3, &[(0, 1, 2.0), (1, 0, -1.0), (0, 1, 1.0), (1, 2, 4.0)]);
        assert_eq!(m.nnz(), 3); // duplicates summed
        let y = m.matvec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![6.0, 11.0]);
        let t = m.transpose();
        let z = t.matvec(&[1.0, 1.0]);
        assert_eq!(z, vec![-1.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = Csr::from_triplets(2, 2, &[(0, 0, -1.0), (1, 0, 1.0), (1, 1, 0.5)]);
        let c = a.matmul(&b);
        let y = c.matvec(&[1.0, 1.0]);
        // dense: [[1,2],[0,3]] * [[-1,0],[1,0.5]] = [[1,1],[3,1.5]]
        assert_eq!(y, vec![2.0, 4.5]);
    }

    #[test]
    fn chain_transpose_apply() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 0, 1.0)]);
        let op = LinOp::Chain(vec![
            LinOp::Diag(Arc::new(vec![1.0, 3.0])),
            LinOp::csr(a),
        ]);
        let y = op.apply(&[1.0, 5.0]);
        assert_eq!(y, vec![2.0, 3.0]);
        let yt = op.transpose().apply(&[1.0, 1.0]);
        // (D A)^T = A^T D: A^T [[2,1],[0,0]] applied to D*[1,1] = [1,3]
        assert_eq!(yt, vec![5.0, 0.0]);
        let dense = op.to_csr();
        assert_eq!(dense.matvec(&[1.0, 5.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn cg_solves_spd() {
        let a = Csr::from_triplets(
            3,
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 3.0),
                (2, 2, 2.0),
            ],
        );
        let b = vec![1.0, 2.0, 3.0];
        let (x, _) =
            conjugate_gradient(&|v| a.matvec(v), &b, None, 1e-14, 100).expect("cg converges");
        let r = a.matvec(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64) * 0.1).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-9);
    }
}
