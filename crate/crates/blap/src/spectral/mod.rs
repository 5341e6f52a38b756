//! Symmetric eigensolves on full, trace, traceless and TT subspaces.
//!
//! All solves run in "hat" coordinates (DOF scaled by the square root of the
//! diagonal mass), where self-adjoint operators become plain symmetric
//! matrices. The trace and traceless subspaces are exact pointwise blocks;
//! the TT subspace is reached through the divergence-constraint projector.

pub mod bounds;
pub mod lanczos;
pub mod projector;

use crate::error::{Error, Result};
use crate::fields::{sym_pairs, Field, FieldRank};
use crate::manifold::ManifoldKind;
use crate::operators::{Operators, SparseOperator};
use crate::sparse::{norm, ComponentOp, LinOp};
use lanczos::{lanczos_smallest, LanczosOptions};
use projector::TtProjector;
use std::sync::Arc;

pub use bounds::{bounds_report, BoundCheckEntry, BoundsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Subspace {
    Full,
    TracePart,
    Traceless,
    Tt,
}

impl Subspace {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subspace::Full => "full",
            Subspace::TracePart => "trace-part",
            Subspace::Traceless => "traceless",
            Subspace::Tt => "TT",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigOptions {
    pub count: usize,
    /// Relative eigenpair residual tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Cluster gap tolerance; defaults per manifold kind when None.
    pub cluster_rel_tol: Option<f64>,
    /// Relative cutoff below which eigenvalues count as numerical kernel.
    pub kernel_threshold_rel: f64,
    /// TT probe threshold: if the projector annihilates all probe fields to
    /// this relative level, the TT space is reported as numerically trivial.
    pub tt_trivial_threshold: f64,
    pub cg_tol: f64,
    pub dense_threshold: usize,
}

impl EigOptions {
    pub fn new(count: usize, tol: f64, seed: u64) -> EigOptions {
        EigOptions {
            count,
            tol,
            seed,
            cluster_rel_tol: None,
            kernel_threshold_rel: 1e-6,
            tt_trivial_threshold: 1e-3,
            cg_tol: 1e-10,
            dense_threshold: 3000,
        }
    }
}

/// Computed spectrum with clustered multiplicities and solver metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub operator: String,
    pub subspace: Subspace,
    pub eigenvalues: Vec<f64>,
    /// (cluster mean, multiplicity), ascending.
    pub clusters: Vec<(f64, usize)>,
    pub residuals: Vec<f64>,
    pub eigenfields: Vec<Field>,
    pub solver: String,
    pub matvecs: usize,
    pub seed: u64,
    pub resolution: Vec<usize>,
    pub kernel_threshold_rel: f64,
    pub kernel_dim: usize,
    pub tt_trivial: bool,
    pub tt_probe: Option<f64>,
    pub tt_constraint_residual: Option<f64>,
}

/// Greedy left-to-right clustering: a value joins the current cluster when
/// its gap to the previous value is at most rel_tol * max(1, |value|), so
/// chains like {1.98, 2.00, 2.02} at tol 1e-2 form a single cluster. Gaps
/// exactly at the threshold merge (the threshold carries a relative epsilon
/// so representation error cannot split them).
pub fn cluster_multiplicities(eigenvalues: &[f64], rel_tol: f64) -> Vec<(f64, usize)> {
    let rel_tol = rel_tol * (1.0 + 1e-9);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 0..eigenvalues.len() {
        debug_assert!(i == 0 || eigenvalues[i] >= eigenvalues[i - 1] - 1e-12);
        if i > 0 && eigenvalues[i] - eigenvalues[i - 1] > rel_tol * eigenvalues[i].abs().max(1.0) {
            let slice = &eigenvalues[start..i];
            out.push((slice.iter().sum::<f64>() / slice.len() as f64, slice.len()));
            start = i;
        }
    }
    if start < eigenvalues.len() {
        let slice = &eigenvalues[start..];
        out.push((slice.iter().sum::<f64>() / slice.len() as f64, slice.len()));
    }
    out
}

pub fn default_cluster_tol(kind: ManifoldKind) -> f64 {
    match kind {
        ManifoldKind::FlatTorus => 1e-8,
        _ => 1e-2,
    }
}

/// Per-node constant block embedding in hat coordinates.
struct HatEmbedding {
    node_count: usize,
    out_comps: usize,
    in_comps: usize,
    op: LinOp,
    opt: LinOp,
}

impl HatEmbedding {
    fn new(node_count: usize, out_comps: usize, in_comps: usize, block: Vec<f64>) -> HatEmbedding {
        assert_eq!(block.len(), out_comps * in_comps);
        let mut blocks = vec![0.0; node_count * block.len()];
        for node in 0..node_count {
            blocks[node * block.len()..(node + 1) * block.len()].copy_from_slice(&block);
        }
        let comp = ComponentOp {
            node_count,
            in_comps,
            out_comps,
            mat_terms: vec![],
            blocks: Some(Arc::new(blocks)),
        };
        let opt = LinOp::Component(Arc::new(comp.transpose()));
        let op = LinOp::Component(Arc::new(comp));
        HatEmbedding {
            node_count,
            out_comps,
            in_comps,
            op,
            opt,
        }
    }

    fn identity(dim: usize) -> HatEmbedding {
        HatEmbedding {
            node_count: dim,
            out_comps: 1,
            in_comps: 1,
            op: LinOp::Identity(dim),
            opt: LinOp::Identity(dim),
        }
    }

    fn dim(&self) -> usize {
        self.node_count * self.in_comps
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.op.apply(x)
    }

    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        self.opt.apply(x)
    }
}

/// Orthonormal basis (multiplicity metric) of the pointwise trace direction,
/// as hat-block entries.
fn trace_block_hat(n: usize) -> Vec<f64> {
    let pairs = sym_pairs(n);
    let mut block = vec![0.0; pairs.len()];
    for (c, &(i, j)) in pairs.iter().enumerate() {
        if i == j {
            block[c] = 1.0 / (n as f64).sqrt();
        }
    }
    block
}

/// Orthonormal basis of the pointwise traceless complement, hat-block
/// entries (m x (m-1)).
fn traceless_block_hat(n: usize) -> Vec<f64> {
    let pairs = sym_pairs(n);
    let m = pairs.len();
    let mult: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| if i == j { 1.0 } else { 2.0 })
        .collect();
    // candidates in natural coordinates: diagonal deviators then off-diagonal units
    let mut cands: Vec<Vec<f64>> = Vec::new();
    for i in 0..n - 1 {
        let mut v = vec![0.0; m];
        v[crate::fields::sym_index(n, i, i)] = 1.0;
        v[crate::fields::sym_index(n, i + 1, i + 1)] = -1.0;
        cands.push(v);
    }
    for (c, &(i, j)) in pairs.iter().enumerate() {
        if i != j {
            let mut v = vec![0.0; m];
            v[c] = 1.0;
            cands.push(v);
        }
    }
    // Gram-Schmidt in the multiplicity metric
    let ip = |a: &[f64], b: &[f64]| -> f64 { (0..m).map(|c| mult[c] * a[c] * b[c]).sum() };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in cands {
        for b in &basis {
            let c = ip(&v, b);
            for i in 0..m {
                v[i] -= c * b[i];
            }
        }
        let nv = ip(&v, &v).sqrt();
        if nv > 1e-12 {
            for x in &mut v {
                *x /= nv;
            }
            basis.push(v);
        }
    }
    assert_eq!(basis.len(), m - 1);
    let mut block = vec![0.0; m * (m - 1)];
    for (k, t) in basis.iter().enumerate() {
        for c in 0..m {
            block[c * (m - 1) + k] = mult[c].sqrt() * t[c];
        }
    }
    block
}

/// Smallest `count` eigenpairs of a self-adjoint operator on the requested
/// subspace. Dense solve when the restricted dimension is small, otherwise
/// Lanczos with full reorthogonalization; the TT subspace always runs the
/// projected Lanczos.
pub fn eigensolve(
    ops: &Operators,
    op: &SparseOperator,
    subspace: Subspace,
    opts: &EigOptions,
) -> Result<SpectrumResult> {
    if opts.count > 200 {
        return Err(Error::InvalidInput("eigenpair count above 200".into()));
    }
    if opts.tol < 1e-12 {
        return Err(Error::InvalidInput("tolerance below 1e-12".into()));
    }
    if !op.symmetric {
        return Err(Error::ContractViolation(format!(
            "eigensolve needs a self-adjoint operator, got '{}'",
            op.name
        )));
    }
    let defect = op.self_adjointness_defect(2, opts.seed ^ 0x5eed);
    if defect > 1e-10 {
        return Err(Error::ContractViolation(format!(
            "operator '{}' fails the self-adjointness check: defect {defect:.3e}",
            op.name
        )));
    }
    if subspace != Subspace::Full && op.domain.rank != FieldRank::Sym2 {
        return Err(Error::InvalidInput(
            "trace/traceless/TT subspaces are defined for sym2 operators".into(),
        ));
    }

    let model = &op.model;
    let n = model.n;
    let dof = op.domain.dof();
    let sqrt_m: Vec<f64> = op.dom_mass.iter().map(|m| m.sqrt()).collect();
    let inv_sqrt_m: Vec<f64> = sqrt_m.iter().map(|s| 1.0 / s).collect();
    let hat_apply = |x: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = x.iter().zip(&inv_sqrt_m).map(|(a, b)| a * b).collect();
        let y = op.op.apply(&scaled);
        y.iter().zip(&sqrt_m).map(|(a, b)| a * b).collect()
    };

    let m_comps = FieldRank::Sym2.components(n);
    let embed = match subspace {
        Subspace::Full => HatEmbedding::identity(dof),
        Subspace::TracePart => {
            HatEmbedding::new(model.node_count, m_comps, 1, trace_block_hat(n))
        }
        Subspace::Traceless | Subspace::Tt => HatEmbedding::new(
            model.node_count,
            m_comps,
            m_comps - 1,
            traceless_block_hat(n),
        ),
    };
    let dim = embed.dim();
    let restricted = |x: &[f64]| -> Vec<f64> { embed.apply_t(&hat_apply(&embed.apply(x))) };

    let mut tt_probe = None;
    let mut tt_constraint_residual = None;
    let (vals, vecs, residuals, solver, matvecs): (
        Vec<f64>,
        Vec<Vec<f64>>,
        Vec<f64>,
        String,
        usize,
    ) = if subspace == Subspace::Tt {
        let proj = TtProjector::new(ops, &embed.op, opts.cg_tol);
        // Negative control: probe whether the projector annihilates all
        // band-limited trace-free fields (no TT space at this resolution).
        let mut worst = 0.0f64;
        for p in 0..6u64 {
            let f = crate::fields::random_band_limited(model, FieldRank::Sym2, 2, opts.seed ^ p);
            let tf = crate::fields::tracefree_part(&f)?;
            let hat: Vec<f64> = tf.values.iter().zip(&sqrt_m).map(|(a, b)| a * b).collect();
            let sub = embed.apply_t(&hat);
            let (pv, _) = proj.apply(&sub)?;
            worst = worst.max(norm(&pv) / norm(&sub).max(1e-300));
        }
        tt_probe = Some(worst);
        if worst <= opts.tt_trivial_threshold {
            (vec![], vec![], vec![], "tt-trivial".to_string(), 0)
        } else {
            let apply_tt = |x: &[f64]| -> Vec<f64> {
                let y = restricted(x);
                proj.apply(&y).expect("projector CG failed inside Lanczos").0
            };
            let mut lopts = LanczosOptions::new(opts.count, opts.tol, opts.seed);
            lopts.max_dim = lopts.max_dim.min(dim);
            let out = lanczos_smallest(&apply_tt, dim, &lopts)?;
            let mut worst_div = 0.0f64;
            for v in &out.eigenvectors {
                worst_div = worst_div.max(proj.constraint_residual(v));
            }
            tt_constraint_residual = Some(worst_div);
            (
                out.eigenvalues,
                out.eigenvectors,
                out.residuals,
                "lanczos-projected".to_string(),
                out.matvecs,
            )
        }
    } else if dim <= opts.dense_threshold {
        let mut dense = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for j in 0..dim {
            e[j] = 1.0;
            let col = restricted(&e);
            e[j] = 0.0;
            for i in 0..dim {
                dense[(i, j)] = col[i];
            }
        }
        // symmetrize away rounding
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (dense[(i, j)] + dense[(j, i)]);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(dense);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        order.truncate(opts.count.min(dim));
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs: Vec<Vec<f64>> = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
            .collect();
        let mut residuals = Vec::new();
        for (v, lam) in vecs.iter().zip(&vals) {
            let av = restricted(v);
            let mut r = 0.0;
            for i in 0..dim {
                let d = av[i] - lam * v[i];
                r += d * d;
            }
            residuals.push(r.sqrt() / norm(v));
        }
        (vals, vecs, residuals, "dense".to_string(), dim)
    } else {
        let mut lopts = LanczosOptions::new(opts.count, opts.tol, opts.seed);
        lopts.max_dim = lopts.max_dim.min(dim);
        let out = lanczos_smallest(&restricted, dim, &lopts)?;
        (
            out.eigenvalues,
            out.eigenvectors,
            out.residuals,
            "lanczos".to_string(),
            out.matvecs,
        )
    };

    let cluster_tol = opts
        .cluster_rel_tol
        .unwrap_or_else(|| default_cluster_tol(model.kind));
    let clusters = cluster_multiplicities(&vals, cluster_tol);
    let lambda_max = vals.last().cloned().unwrap_or(0.0);
    let kernel_dim = vals
        .iter()
        .filter(|&&v| v < opts.kernel_threshold_rel * lambda_max.max(1e-300))
        .count();

    // map eigenvectors back to natural-coordinate fields
    let eigenfields: Vec<Field> = vecs
        .iter()
        .map(|v| {
            let hat = embed.apply(v);
            let natural: Vec<f64> = hat.iter().zip(&inv_sqrt_m).map(|(a, b)| a * b).collect();
            Field::from_values(model, op.domain.rank, natural)
        })
        .collect();

    Ok(SpectrumResult {
        operator: op.name.clone(),
        subspace,
        eigenvalues: vals,
        clusters,
        residuals,
        eigenfields,
        solver,
        matvecs,
        seed: opts.seed,
        resolution: model.resolution.clone(),
        kernel_threshold_rel: opts.kernel_threshold_rel,
        kernel_dim,
        tt_trivial: tt_probe.map_or(false, |p| p <= opts.tt_trivial_threshold),
        tt_probe,
        tt_constraint_residual,
    })
}
